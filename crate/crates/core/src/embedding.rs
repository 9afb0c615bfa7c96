//! Embeddings, target sets, distances and embedding predicates.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::math;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EmbeddingError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("cosine distance is undefined for a zero-norm vector")]
    ZeroVector,
    #[error("target set `{0}` is empty")]
    EmptyTargetSet(String),
    #[error("embedding has no components")]
    EmptyEmbedding,
    #[error("embedding component {index} is not finite")]
    NonFinite { index: usize },
    #[error("threshold must be a finite non-negative number, got {0}")]
    InvalidEpsilon(f64),
}

/// A fixed-dimension vector of finite reals.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding(Vec<f64>);

impl Embedding {
    pub fn new(values: Vec<f64>) -> Result<Self, EmbeddingError> {
        if values.is_empty() {
            return Err(EmbeddingError::EmptyEmbedding);
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(EmbeddingError::NonFinite { index });
        }
        Ok(Self(values))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    fn norm(&self) -> f64 {
        math::sqrt(self.0.iter().map(|v| v * v).sum())
    }
}

impl TryFrom<Vec<f64>> for Embedding {
    type Error = EmbeddingError;

    fn try_from(values: Vec<f64>) -> Result<Self, Self::Error> {
        Self::new(values)
    }
}

/// A named, nonempty set of embeddings sharing one dimension. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetSet {
    name: String,
    embeddings: Vec<Embedding>,
}

impl TargetSet {
    pub fn new(name: impl Into<String>, embeddings: Vec<Embedding>) -> Result<Self, EmbeddingError> {
        let name = name.into();
        let first = embeddings
            .first()
            .ok_or_else(|| EmbeddingError::EmptyTargetSet(name.clone()))?;
        let expected = first.dim();
        if let Some(bad) = embeddings.iter().find(|e| e.dim() != expected) {
            return Err(EmbeddingError::DimensionMismatch {
                expected,
                found: bad.dim(),
            });
        }
        Ok(Self { name, embeddings })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.embeddings[0].dim()
    }

    pub fn embeddings(&self) -> &[Embedding] {
        &self.embeddings
    }

    pub fn len(&self) -> usize {
        self.embeddings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.embeddings.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DistanceFn {
    L2,
    Cosine,
}

impl DistanceFn {
    /// Distance between two embeddings of equal dimension.
    ///
    /// Cosine distance is `1 - <x,y>/(|x||y|)`, clamped to `[0, 2]` against rounding, and is
    /// rejected for zero-norm inputs.
    pub fn distance(self, x: &Embedding, y: &Embedding) -> Result<f64, EmbeddingError> {
        if x.dim() != y.dim() {
            return Err(EmbeddingError::DimensionMismatch {
                expected: x.dim(),
                found: y.dim(),
            });
        }
        match self {
            DistanceFn::L2 => {
                let sq: f64 = x
                    .values()
                    .iter()
                    .zip(y.values())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                Ok(math::sqrt(sq))
            }
            DistanceFn::Cosine => {
                let (nx, ny) = (x.norm(), y.norm());
                if nx == 0.0 || ny == 0.0 {
                    return Err(EmbeddingError::ZeroVector);
                }
                let dot: f64 = x.values().iter().zip(y.values()).map(|(a, b)| a * b).sum();
                Ok((1.0 - dot / (nx * ny)).clamp(0.0, 2.0))
            }
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            DistanceFn::L2 => "l2",
            DistanceFn::Cosine => "cosine",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Aggregation {
    Min,
    Max,
}

impl Aggregation {
    /// Folds a nonempty sequence; `None` for an empty one.
    pub fn fold(self, values: impl IntoIterator<Item = f64>) -> Option<f64> {
        let mut iter = values.into_iter();
        let first = iter.next()?;
        Some(match self {
            Aggregation::Min => iter.fold(first, f64::min),
            Aggregation::Max => iter.fold(first, f64::max),
        })
    }

    pub fn keyword(self) -> &'static str {
        match self {
            Aggregation::Min => "min",
            Aggregation::Max => "max",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Comparison {
    Le,
    Lt,
    Ge,
    Gt,
}

impl Comparison {
    /// `score ⋈ epsilon`, with exact float comparison.
    pub fn holds(self, score: f64, epsilon: f64) -> bool {
        match self {
            Comparison::Le => score <= epsilon,
            Comparison::Lt => score < epsilon,
            Comparison::Ge => score >= epsilon,
            Comparison::Gt => score > epsilon,
        }
    }

    /// Predicate robustness: `epsilon - score` for upper bounds, `score - epsilon` for lower.
    pub fn robustness(self, score: f64, epsilon: f64) -> f64 {
        if self.is_upper_bound() {
            epsilon - score
        } else {
            score - epsilon
        }
    }

    /// `true` for `<=` and `<`, i.e. the predicate holds when the score is small.
    pub fn is_upper_bound(self) -> bool {
        matches!(self, Comparison::Le | Comparison::Lt)
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Comparison::Le => "<=",
            Comparison::Lt => "<",
            Comparison::Ge => ">=",
            Comparison::Gt => ">",
        }
    }
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// `(targets, d, epsilon, ⋈, aggregation)`. The target set is referenced by alias and resolved
/// when a specification is bound.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingPredicate {
    pub name: String,
    pub target: String,
    pub distance: DistanceFn,
    pub epsilon: f64,
    pub comparison: Comparison,
    pub aggregation: Aggregation,
}

impl EmbeddingPredicate {
    /// Aggregated distance from `z` to every member of `targets`.
    pub fn score(&self, z: &Embedding, targets: &TargetSet) -> Result<f64, EmbeddingError> {
        predicate_score(self.distance, self.aggregation, z, targets)
    }

    pub fn holds(&self, z: &Embedding, targets: &TargetSet) -> Result<bool, EmbeddingError> {
        Ok(self.comparison.holds(self.score(z, targets)?, self.epsilon))
    }

    pub fn robustness_of(&self, score: f64) -> f64 {
        self.comparison.robustness(score, self.epsilon)
    }
}

/// `a({ d(z, g) | g in targets })`.
pub fn predicate_score(
    distance: DistanceFn,
    aggregation: Aggregation,
    z: &Embedding,
    targets: &TargetSet,
) -> Result<f64, EmbeddingError> {
    if z.dim() != targets.dim() {
        return Err(EmbeddingError::DimensionMismatch {
            expected: targets.dim(),
            found: z.dim(),
        });
    }
    let mut dists = Vec::with_capacity(targets.len());
    for g in targets.embeddings() {
        dists.push(distance.distance(z, g)?);
    }
    aggregation
        .fold(dists)
        .ok_or_else(|| EmbeddingError::EmptyTargetSet(targets.name().into()))
}
