//! Reference evaluators: Boolean satisfaction and bounded robustness over finite traces.
//!
//! Both evaluators work on the core fragment (`Pred`, `True`, `Not`, `And`, `Until`); input
//! formulas are desugared first and the `True U φ` / `!(True U !φ)` shapes are then evaluated
//! as suprema / infima over the window.
//!
//! Until is read with finite-trace closure: the witness `j` ranges over `[i, K]` only, so a
//! prefix that has not yet seen the right operand does not satisfy it. Robustness follows the
//! usual sup-min-inf form
//!
//! ```text
//! ρ(φ U ψ, i, K) = sup_{j∈[i,K]} min( ρ(ψ, j, K), inf_{k∈[i,j)} ρ(φ, k, K) )
//! ```
//!
//! where the empty infimum (`j = i`) is `+∞`, represented by [`EvalConfig::sentinel`]. All
//! values are clamped to `[-sentinel, sentinel]`.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::embedding::{Comparison, Embedding, EmbeddingError};
use crate::spec::Formula;

pub const DEFAULT_SENTINEL: f64 = 1e18;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("window [{i}, {k}] is not inside a trace of length {len}")]
    IndexOutOfRange { i: usize, k: usize, len: usize },
    #[error("formula references `{0}`, which the trace does not provide")]
    UnknownAtom(String),
    #[error("trace is empty")]
    EmptyTrace,
    #[error("column {column} has {found} samples, expected {expected}")]
    LengthMismatch {
        column: usize,
        expected: usize,
        found: usize,
    },
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    /// Stands in for `+∞` (the empty infimum and the robustness of `true`).
    pub sentinel: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            sentinel: DEFAULT_SENTINEL,
        }
    }
}

/// A nonempty sequence of embeddings of one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    embeddings: Vec<Embedding>,
}

impl Trace {
    pub fn new(embeddings: Vec<Embedding>) -> Result<Self, EvalError> {
        let first = embeddings.first().ok_or(EvalError::EmptyTrace)?;
        let dim = first.dim();
        if let Some(bad) = embeddings.iter().find(|z| z.dim() != dim) {
            return Err(EmbeddingError::DimensionMismatch {
                expected: dim,
                found: bad.dim(),
            }
            .into());
        }
        Ok(Self { embeddings })
    }

    pub fn len(&self) -> usize {
        self.embeddings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.embeddings.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.embeddings[0].dim()
    }

    pub fn embeddings(&self) -> &[Embedding] {
        &self.embeddings
    }

    /// The finite prefix `σ_{≤t}`.
    pub fn prefix(&self, t: usize) -> Option<Trace> {
        (t < self.len()).then(|| Trace {
            embeddings: self.embeddings[..=t].to_vec(),
        })
    }
}

/// Anything that assigns truth values and robustness to named atoms over time.
pub trait Valuation {
    /// Number of time steps.
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn atom_index(&self, name: &str) -> Option<usize>;

    fn holds(&self, atom: usize, t: usize) -> bool;

    fn robustness(&self, atom: usize, t: usize) -> f64;
}

/// Predicate scores `δ_ap(z_t)` for a set of predicates, together with their thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredTrace {
    names: Vec<String>,
    epsilons: Vec<f64>,
    comparisons: Vec<Comparison>,
    scores: Vec<Vec<f64>>,
    len: usize,
}

impl ScoredTrace {
    /// `meta[a]` describes column `a` of `scores`; all columns must share one nonzero length.
    pub fn from_scores(
        meta: &[(&str, f64, Comparison)],
        scores: &[Vec<f64>],
    ) -> Result<Self, EvalError> {
        let len = scores.first().map(Vec::len).ok_or(EvalError::EmptyTrace)?;
        Self::new(len, meta, scores)
    }

    pub fn new(
        len: usize,
        meta: &[(&str, f64, Comparison)],
        scores: &[Vec<f64>],
    ) -> Result<Self, EvalError> {
        if len == 0 {
            return Err(EvalError::EmptyTrace);
        }
        assert_eq!(meta.len(), scores.len(), "one descriptor per score column");
        for (column, col) in scores.iter().enumerate() {
            if col.len() != len {
                return Err(EvalError::LengthMismatch {
                    column,
                    expected: len,
                    found: col.len(),
                });
            }
        }
        Ok(Self {
            names: meta.iter().map(|m| m.0.to_string()).collect(),
            epsilons: meta.iter().map(|m| m.1).collect(),
            comparisons: meta.iter().map(|m| m.2).collect(),
            scores: scores.to_vec(),
            len,
        })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn score(&self, atom: usize, t: usize) -> f64 {
        self.scores[atom][t]
    }

    pub fn scores(&self, atom: usize) -> &[f64] {
        &self.scores[atom]
    }

    pub fn epsilon(&self, atom: usize) -> f64 {
        self.epsilons[atom]
    }
}

impl Valuation for ScoredTrace {
    fn len(&self) -> usize {
        self.len
    }

    fn atom_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    fn holds(&self, atom: usize, t: usize) -> bool {
        self.comparisons[atom].holds(self.scores[atom][t], self.epsilons[atom])
    }

    fn robustness(&self, atom: usize, t: usize) -> f64 {
        self.comparisons[atom].robustness(self.scores[atom][t], self.epsilons[atom])
    }
}

/// Core-fragment node; children always precede their parent in [`CoreFormula::nodes`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Node {
    True,
    Atom(usize),
    Not(usize),
    And(usize, usize),
    Until(usize, usize),
    /// `True U φ`
    Eventually(usize),
    /// `!(True U !φ)`
    Always(usize),
}

/// A desugared formula flattened into post-order, with atoms numbered locally.
#[derive(Debug, Clone, PartialEq)]
pub struct CoreFormula {
    nodes: Vec<Node>,
    atoms: Vec<String>,
}

impl CoreFormula {
    pub fn compile(formula: &Formula) -> Self {
        let mut cf = CoreFormula {
            nodes: Vec::new(),
            atoms: Vec::new(),
        };
        cf.push(&formula.desugar());
        cf
    }

    fn push(&mut self, f: &Formula) -> usize {
        let node = match f {
            Formula::True => Node::True,
            Formula::Pred(name) => {
                let idx = match self.atoms.iter().position(|a| a == name) {
                    Some(i) => i,
                    None => {
                        self.atoms.push(name.clone());
                        self.atoms.len() - 1
                    }
                };
                Node::Atom(idx)
            }
            Formula::Not(inner) => match inner.as_ref() {
                Formula::Until(l, r) if **l == Formula::True => match r.as_ref() {
                    Formula::Not(body) => Node::Always(self.push(body)),
                    _ => {
                        let ev = self.push(inner);
                        Node::Not(ev)
                    }
                },
                _ => Node::Not(self.push(inner)),
            },
            Formula::And(l, r) => {
                let l = self.push(l);
                let r = self.push(r);
                Node::And(l, r)
            }
            Formula::Until(l, r) if **l == Formula::True => Node::Eventually(self.push(r)),
            Formula::Until(l, r) => {
                let l = self.push(l);
                let r = self.push(r);
                Node::Until(l, r)
            }
            Formula::False | Formula::Or(..) | Formula::Eventually(_) | Formula::Always(_) => {
                unreachable!("input is desugared")
            }
        };
        self.nodes.push(node);
        self.nodes.len() - 1
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn root(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn atoms(&self) -> &[String] {
        &self.atoms
    }

    /// Maps local atom numbers to the valuation's columns.
    pub fn bind<V: Valuation + ?Sized>(&self, val: &V) -> Result<Vec<usize>, EvalError> {
        self.atoms
            .iter()
            .map(|a| val.atom_index(a).ok_or_else(|| EvalError::UnknownAtom(a.clone())))
            .collect()
    }

    fn check_window<V: Valuation + ?Sized>(val: &V, i: usize, k: usize) -> Result<(), EvalError> {
        if i > k || k >= val.len() {
            return Err(EvalError::IndexOutOfRange { i, k, len: val.len() });
        }
        Ok(())
    }

    /// `ρ(φ, σ, i, K)`.
    pub fn robustness<V: Valuation + ?Sized>(
        &self,
        val: &V,
        i: usize,
        k: usize,
        cfg: &EvalConfig,
    ) -> Result<f64, EvalError> {
        Self::check_window(val, i, k)?;
        let cols = self.bind(val)?;
        Ok(self.robustness_bound(val, &cols, i, k, cfg))
    }

    pub(crate) fn robustness_bound<V: Valuation + ?Sized>(
        &self,
        val: &V,
        cols: &[usize],
        i: usize,
        k: usize,
        cfg: &EvalConfig,
    ) -> f64 {
        let top = cfg.sentinel;
        let n = k - i + 1;
        let mut values: Vec<Vec<f64>> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let v = match *node {
                Node::True => vec![top; n],
                Node::Atom(a) => (i..=k)
                    .map(|t| val.robustness(cols[a], t).clamp(-top, top))
                    .collect(),
                Node::Not(c) => values[c].iter().map(|x| -x).collect(),
                Node::And(l, r) => values[l]
                    .iter()
                    .zip(&values[r])
                    .map(|(a, b)| a.min(*b))
                    .collect(),
                Node::Eventually(c) => suffix_fold(&values[c], f64::max),
                Node::Always(c) => suffix_fold(&values[c], f64::min),
                Node::Until(l, r) => {
                    let (lhs, rhs) = (&values[l], &values[r]);
                    (0..n)
                        .map(|j| {
                            let mut best = -top;
                            let mut prefix_inf = top;
                            for w in j..n {
                                best = best.max(rhs[w].min(prefix_inf));
                                prefix_inf = prefix_inf.min(lhs[w]);
                            }
                            best
                        })
                        .collect()
                }
            };
            values.push(v);
        }
        values[self.root()][0]
    }

    /// `σ, i ⊨ φ` over the window `[i, K]`.
    pub fn sat<V: Valuation + ?Sized>(&self, val: &V, i: usize, k: usize) -> Result<bool, EvalError> {
        Self::check_window(val, i, k)?;
        let cols = self.bind(val)?;
        Ok(self.sat_bound(val, &cols, i, k))
    }

    pub(crate) fn sat_bound<V: Valuation + ?Sized>(&self, val: &V, cols: &[usize], i: usize, k: usize) -> bool {
        let n = k - i + 1;
        let mut values: Vec<Vec<bool>> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let v = match *node {
                Node::True => vec![true; n],
                Node::Atom(a) => (i..=k).map(|t| val.holds(cols[a], t)).collect(),
                Node::Not(c) => values[c].iter().map(|x| !x).collect(),
                Node::And(l, r) => values[l].iter().zip(&values[r]).map(|(a, b)| *a && *b).collect(),
                Node::Eventually(c) => suffix_fold(&values[c], |a, b| a || b),
                Node::Always(c) => suffix_fold(&values[c], |a, b| a && b),
                Node::Until(l, r) => {
                    // U(j) = ψ(j) ∨ (φ(j) ∧ U(j+1)), U(K+1) = false
                    let mut out = vec![false; n];
                    let mut next = false;
                    for j in (0..n).rev() {
                        next = values[r][j] || (values[l][j] && next);
                        out[j] = next;
                    }
                    out
                }
            };
            values.push(v);
        }
        values[self.root()][0]
    }
}

fn suffix_fold<T: Copy>(xs: &[T], op: impl Fn(T, T) -> T) -> Vec<T> {
    let mut out = xs.to_vec();
    for j in (0..out.len().saturating_sub(1)).rev() {
        out[j] = op(out[j], out[j + 1]);
    }
    out
}

/// `ρ(φ, σ, i, K)` with the default sentinel.
pub fn robustness<V: Valuation + ?Sized>(f: &Formula, val: &V, i: usize, k: usize) -> Result<f64, EvalError> {
    robustness_with(f, val, i, k, &EvalConfig::default())
}

pub fn robustness_with<V: Valuation + ?Sized>(
    f: &Formula,
    val: &V,
    i: usize,
    k: usize,
    cfg: &EvalConfig,
) -> Result<f64, EvalError> {
    CoreFormula::compile(f).robustness(val, i, k, cfg)
}

/// `σ, i ⊨ φ` over the whole trace.
pub fn sat<V: Valuation + ?Sized>(f: &Formula, val: &V, i: usize) -> Result<bool, EvalError> {
    if val.is_empty() {
        return Err(EvalError::EmptyTrace);
    }
    sat_bounded(f, val, i, val.len() - 1)
}

/// `σ_{≤K}, i ⊨ φ`.
pub fn sat_bounded<V: Valuation + ?Sized>(f: &Formula, val: &V, i: usize, k: usize) -> Result<bool, EvalError> {
    CoreFormula::compile(f).sat(val, i, k)
}
