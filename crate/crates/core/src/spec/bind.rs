use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use thiserror::Error;

use super::SpecDocument;
use crate::embedding::{EmbeddingError, EmbeddingPredicate, TargetSet};
use crate::semantics::{ScoredTrace, Trace};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BindError {
    #[error("no target set supplied for alias `{0}`")]
    MissingTargets(String),
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("target sets disagree on dimension: `{first}` has {first_dim}, `{other}` has {other_dim}")]
    DimensionConflict {
        first: String,
        first_dim: usize,
        other: String,
        other_dim: usize,
    },
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
}

/// A document whose target aliases have been resolved to loaded target sets.
#[derive(Debug, Clone)]
pub struct BoundSpec {
    doc: SpecDocument,
    targets: BTreeMap<String, Arc<TargetSet>>,
    dim: Option<usize>,
}

impl BoundSpec {
    /// Resolves every import of `doc` against `targets` (keyed by alias).
    pub fn new(
        doc: SpecDocument,
        mut targets: BTreeMap<String, TargetSet>,
    ) -> Result<Self, BindError> {
        let mut resolved = BTreeMap::new();
        let mut dim: Option<(String, usize)> = None;
        for import in &doc.targets {
            let set = targets
                .remove(&import.alias)
                .ok_or_else(|| BindError::MissingTargets(import.alias.clone()))?;
            match &dim {
                Some((first, d)) if *d != set.dim() => {
                    return Err(BindError::DimensionConflict {
                        first: first.clone(),
                        first_dim: *d,
                        other: import.alias.clone(),
                        other_dim: set.dim(),
                    })
                }
                Some(_) => {}
                None => dim = Some((import.alias.clone(), set.dim())),
            }
            resolved.insert(import.alias.clone(), Arc::new(set));
        }
        Ok(Self {
            doc,
            targets: resolved,
            dim: dim.map(|(_, d)| d),
        })
    }

    pub fn document(&self) -> &SpecDocument {
        &self.doc
    }

    /// Embedding dimension shared by all target sets, if any are imported.
    pub fn dim(&self) -> Option<usize> {
        self.dim
    }

    pub fn predicate(&self, name: &str) -> Option<(&EmbeddingPredicate, &Arc<TargetSet>)> {
        let p = self.doc.predicate(name)?;
        let t = self.targets.get(&p.target)?;
        Some((p, t))
    }

    /// Replaces a predicate's threshold, e.g. with a calibrated value. Returns the old one.
    pub fn set_epsilon(&mut self, name: &str, epsilon: f64) -> Result<f64, BindError> {
        if !(epsilon >= 0.0) {
            return Err(EmbeddingError::InvalidEpsilon(epsilon).into());
        }
        let p = self
            .doc
            .predicate_mut(name)
            .ok_or_else(|| BindError::UnknownPredicate(name.into()))?;
        Ok(core::mem::replace(&mut p.epsilon, epsilon))
    }

    /// Scores every predicate of the document at every step of `trace`.
    pub fn score_trace(&self, trace: &Trace) -> Result<ScoredTrace, BindError> {
        let names: Vec<&str> = self.doc.predicates.iter().map(|p| p.name.as_str()).collect();
        self.score_predicates(&names, trace)
    }

    pub fn score_predicates(&self, names: &[&str], trace: &Trace) -> Result<ScoredTrace, BindError> {
        let mut meta = Vec::with_capacity(names.len());
        let mut columns = Vec::with_capacity(names.len());
        for name in names {
            let (p, targets) = self
                .predicate(name)
                .ok_or_else(|| BindError::UnknownPredicate((*name).into()))?;
            let mut col = Vec::with_capacity(trace.len());
            for z in trace.embeddings() {
                col.push(p.score(z, targets)?);
            }
            meta.push((p.name.as_str(), p.epsilon, p.comparison));
            columns.push(col);
        }
        Ok(ScoredTrace::new(trace.len(), &meta, &columns).expect("columns share the trace length"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::Embedding;
    use crate::semantics::Valuation;
    use crate::spec::parse;
    use alloc::vec;

    fn set(name: &str, rows: &[&[f64]]) -> TargetSet {
        TargetSet::new(name, rows.iter().map(|r| Embedding::new(r.to_vec()).unwrap()).collect()).unwrap()
    }

    #[test]
    fn bind_and_score() {
        let doc = parse("targets g = \"g.json\"; pred p = dist(l2, g, min) <= 1.0;").unwrap();
        let mut targets = BTreeMap::new();
        targets.insert("g".into(), set("g", &[&[0.0, 0.0], &[3.0, 4.0]]));
        let mut bound = BoundSpec::new(doc, targets).unwrap();
        assert_eq!(bound.dim(), Some(2));
        let trace = Trace::new(vec![
            Embedding::new(vec![0.0, 3.0]).unwrap(),
            Embedding::new(vec![0.0, 0.5]).unwrap(),
        ])
        .unwrap();
        let scored = bound.score_trace(&trace).unwrap();
        assert_eq!(scored.score(0, 0), 3.0);
        assert!(!scored.holds(0, 0));
        assert!(scored.holds(0, 1));

        assert_eq!(bound.set_epsilon("p", 3.0).unwrap(), 1.0);
        let scored = bound.score_trace(&trace).unwrap();
        assert!(scored.holds(0, 0));
        assert!(bound.set_epsilon("p", -1.0).is_err());
        assert!(bound.set_epsilon("q", 1.0).is_err());
    }

    #[test]
    fn missing_and_conflicting_targets() {
        let doc = parse("targets g = \"g\"; targets h = \"h\";").unwrap();
        let mut targets = BTreeMap::new();
        targets.insert("g".into(), set("g", &[&[0.0]]));
        assert_eq!(
            BoundSpec::new(doc.clone(), targets.clone()).unwrap_err(),
            BindError::MissingTargets("h".into())
        );
        targets.insert("h".into(), set("h", &[&[0.0, 1.0]]));
        assert!(matches!(
            BoundSpec::new(doc, targets),
            Err(BindError::DimensionConflict { .. })
        ));
    }

    #[test]
    fn trace_dimension_checked() {
        let doc = parse("targets g = \"g\"; pred p = dist(l2, g, min) <= 1.0;").unwrap();
        let mut targets = BTreeMap::new();
        targets.insert("g".into(), set("g", &[&[0.0]]));
        let bound = BoundSpec::new(doc, targets).unwrap();
        let trace = Trace::new(vec![Embedding::new(vec![0.0, 1.0]).unwrap()]).unwrap();
        assert!(matches!(
            bound.score_trace(&trace),
            Err(BindError::Embedding(EmbeddingError::DimensionMismatch { .. }))
        ));
    }
}
