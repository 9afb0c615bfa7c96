//! Online monitors: per-prefix verdicts `sgn(ρ(φ, σ_{≤i}, 0, i))` with `sgn(0) = +1`.
//!
//! [`monitor_offline`] recomputes every prefix with the reference evaluator.
//! [`IncrementalMonitor`] produces the same robustness values one step at a time:
//!
//! * temporal nodes whose operands contain no temporal operator keep running suprema/infima
//!   (and, for until, the running infimum of the left operand), so F/G/U at the top of the
//!   formula cost O(1) per step;
//! * nodes under another temporal operator keep their value at every start position, which
//!   costs O(t) per step;
//! * a temporal node whose operand is itself temporal recomputes its vector from the
//!   operand's vector each step, using `U(j) = max(ψ(j), min(φ(j), U(j+1)))` for until.
//!
//! Every value is built from `min`, `max` and negation of the same inputs, so the results are
//! bit-identical to the reference.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::embedding::{Embedding, EmbeddingError, EmbeddingPredicate, TargetSet};
use crate::semantics::{CoreFormula, EvalConfig, EvalError, Node, Valuation};
use crate::spec::{BindError, BoundSpec, Formula};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Violated,
    Satisfied,
}

impl Verdict {
    pub fn from_robustness(rho: f64) -> Self {
        if rho >= 0.0 {
            Verdict::Satisfied
        } else {
            Verdict::Violated
        }
    }

    pub fn from_bool(b: bool) -> Self {
        if b {
            Verdict::Satisfied
        } else {
            Verdict::Violated
        }
    }

    /// `+1` or `-1`.
    pub fn sign(self) -> i8 {
        match self {
            Verdict::Satisfied => 1,
            Verdict::Violated => -1,
        }
    }

    pub fn is_satisfied(self) -> bool {
        self == Verdict::Satisfied
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}", self.sign())
    }
}

/// `(r_0, ..., r_t)`, one verdict per prefix.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VerdictTrace(pub Vec<Verdict>);

impl VerdictTrace {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn signs(&self) -> Vec<i8> {
        self.0.iter().map(|v| v.sign()).collect()
    }

    /// First prefix that raised an alert.
    pub fn first_alert(&self) -> Option<usize> {
        self.0.iter().position(|v| *v == Verdict::Violated)
    }

    pub fn last(&self) -> Option<Verdict> {
        self.0.last().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = Verdict> + '_ {
        self.0.iter().copied()
    }
}

impl FromIterator<Verdict> for VerdictTrace {
    fn from_iter<I: IntoIterator<Item = Verdict>>(iter: I) -> Self {
        VerdictTrace(iter.into_iter().collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonitorRun {
    pub verdicts: VerdictTrace,
    pub robustness: Vec<f64>,
}

/// Naive monitor: evaluates `ρ(φ, σ_{≤i}, 0, i)` from scratch for every prefix.
pub fn monitor_offline<V: Valuation + ?Sized>(f: &Formula, val: &V) -> Result<MonitorRun, EvalError> {
    monitor_offline_with(f, val, &EvalConfig::default())
}

pub fn monitor_offline_with<V: Valuation + ?Sized>(
    f: &Formula,
    val: &V,
    cfg: &EvalConfig,
) -> Result<MonitorRun, EvalError> {
    if val.is_empty() {
        return Err(EvalError::EmptyTrace);
    }
    let cf = CoreFormula::compile(f);
    let cols = cf.bind(val)?;
    let robustness: Vec<f64> = (0..val.len())
        .map(|i| cf.robustness_bound(val, &cols, 0, i, cfg))
        .collect();
    let verdicts = robustness.iter().map(|r| Verdict::from_robustness(*r)).collect();
    Ok(MonitorRun { verdicts, robustness })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutput {
    pub t: usize,
    pub verdict: Verdict,
    pub robustness: f64,
}

#[derive(Debug, Clone)]
enum Aux {
    None,
    /// until over non-temporal operands, position 0 only: `inf` of the left operand so far
    UntilHead { prefix_inf: f64 },
    /// until over non-temporal operands, every position `j`: `inf` of the left operand on `[j, t)`
    UntilAll { seg_inf: Vec<f64> },
}

#[derive(Debug, Clone)]
struct NodeState {
    /// contains no temporal operator, so its value at a position never changes
    stable: bool,
    /// values at every start position are needed (the node sits under a temporal operator)
    full: bool,
    vals: Vec<f64>,
    head: f64,
    /// value at the newest position; maintained for stable nodes
    last: f64,
    aux: Aux,
}

impl NodeState {
    fn value0(&self) -> f64 {
        if self.full {
            self.vals[0]
        } else {
            self.head
        }
    }
}

/// Incremental engine over atom robustness values. One instance per stream.
#[derive(Debug, Clone)]
pub struct IncrementalMonitor {
    formula: CoreFormula,
    states: Vec<NodeState>,
    steps: usize,
    top: f64,
}

impl IncrementalMonitor {
    pub fn new(f: &Formula) -> Self {
        Self::with_config(f, &EvalConfig::default())
    }

    pub fn with_config(f: &Formula, cfg: &EvalConfig) -> Self {
        let formula = CoreFormula::compile(f);
        let nodes = formula.nodes();
        let mut stable = vec![false; nodes.len()];
        for (n, node) in nodes.iter().enumerate() {
            stable[n] = match *node {
                Node::True | Node::Atom(_) => true,
                Node::Not(c) => stable[c],
                Node::And(l, r) => stable[l] && stable[r],
                Node::Until(..) | Node::Eventually(_) | Node::Always(_) => false,
            };
        }
        let mut full = vec![false; nodes.len()];
        for n in (0..nodes.len()).rev() {
            match nodes[n] {
                Node::True | Node::Atom(_) => {}
                Node::Not(c) => full[c] = full[n],
                Node::And(l, r) => {
                    full[l] = full[n];
                    full[r] = full[n];
                }
                Node::Eventually(c) | Node::Always(c) => full[c] = true,
                Node::Until(l, r) => {
                    full[l] = true;
                    full[r] = true;
                }
            }
        }
        let states = nodes
            .iter()
            .enumerate()
            .map(|(n, node)| {
                let aux = match *node {
                    Node::Until(l, r) if stable[l] && stable[r] => {
                        if full[n] {
                            Aux::UntilAll { seg_inf: Vec::new() }
                        } else {
                            Aux::UntilHead { prefix_inf: cfg.sentinel }
                        }
                    }
                    _ => Aux::None,
                };
                NodeState {
                    stable: stable[n],
                    full: full[n],
                    vals: Vec::new(),
                    head: 0.0,
                    last: 0.0,
                    aux,
                }
            })
            .collect();
        Self {
            formula,
            states,
            steps: 0,
            top: cfg.sentinel,
        }
    }

    /// Atom names in the order [`Self::step`] expects their robustness values.
    pub fn atoms(&self) -> &[alloc::string::String] {
        self.formula.atoms()
    }

    pub fn steps_seen(&self) -> usize {
        self.steps
    }

    /// Feeds one time step. `atom_robustness[a]` is `ρ` of atom `a` (see [`Self::atoms`]).
    pub fn step(&mut self, atom_robustness: &[f64]) -> StepOutput {
        assert_eq!(
            atom_robustness.len(),
            self.formula.atoms().len(),
            "one robustness value per atom"
        );
        let t = self.steps;
        let top = self.top;
        for n in 0..self.states.len() {
            let node = self.formula.nodes()[n];
            let (done, rest) = self.states.split_at_mut(n);
            let st = &mut rest[0];
            if st.stable {
                let last = match node {
                    Node::True => top,
                    Node::Atom(a) => atom_robustness[a].clamp(-top, top),
                    Node::Not(c) => -done[c].last,
                    Node::And(l, r) => done[l].last.min(done[r].last),
                    _ => unreachable!("temporal nodes are never stable"),
                };
                st.last = last;
                if st.full {
                    st.vals.push(last);
                } else if t == 0 {
                    st.head = last;
                }
                continue;
            }
            match node {
                Node::True | Node::Atom(_) => unreachable!("leaves are stable"),
                Node::Not(c) => {
                    if st.full {
                        st.vals.clear();
                        st.vals.extend(done[c].vals.iter().map(|x| -x));
                    } else {
                        st.head = -done[c].value0();
                    }
                }
                Node::And(l, r) => {
                    if st.full {
                        st.vals.clear();
                        st.vals
                            .extend(done[l].vals.iter().zip(&done[r].vals).map(|(a, b)| a.min(*b)));
                    } else {
                        st.head = done[l].value0().min(done[r].value0());
                    }
                }
                Node::Eventually(c) => running(st, &done[c], t, f64::max),
                Node::Always(c) => running(st, &done[c], t, f64::min),
                Node::Until(l, r) => {
                    let (lhs, rhs) = (&done[l], &done[r]);
                    match &mut st.aux {
                        Aux::UntilHead { prefix_inf } => {
                            let cand = rhs.last.min(*prefix_inf);
                            st.head = if t == 0 { cand } else { st.head.max(cand) };
                            *prefix_inf = prefix_inf.min(lhs.last);
                        }
                        Aux::UntilAll { seg_inf } => {
                            for (v, s) in st.vals.iter_mut().zip(seg_inf.iter_mut()) {
                                *v = v.max(rhs.last.min(*s));
                                *s = s.min(lhs.last);
                            }
                            st.vals.push(rhs.last);
                            seg_inf.push(lhs.last);
                        }
                        Aux::None => {
                            let n = t + 1;
                            let mut next = rhs.vals[n - 1];
                            if st.full {
                                st.vals.resize(n, 0.0);
                                st.vals[n - 1] = next;
                                for j in (0..n - 1).rev() {
                                    next = rhs.vals[j].max(lhs.vals[j].min(next));
                                    st.vals[j] = next;
                                }
                            } else {
                                for j in (0..n - 1).rev() {
                                    next = rhs.vals[j].max(lhs.vals[j].min(next));
                                }
                                st.head = next;
                            }
                        }
                    }
                }
            }
        }
        self.steps += 1;
        let robustness = self.states[self.formula.root()].value0();
        StepOutput {
            t,
            verdict: Verdict::from_robustness(robustness),
            robustness,
        }
    }

    /// Runs the engine over a whole valuation.
    pub fn run<V: Valuation + ?Sized>(f: &Formula, val: &V) -> Result<MonitorRun, EvalError> {
        let mut m = IncrementalMonitor::new(f);
        let cols = m.formula.bind(val)?;
        let mut buf = vec![0.0; cols.len()];
        let mut verdicts = Vec::with_capacity(val.len());
        let mut robustness = Vec::with_capacity(val.len());
        for t in 0..val.len() {
            for (b, c) in buf.iter_mut().zip(&cols) {
                *b = val.robustness(*c, t);
            }
            let out = m.step(&buf);
            verdicts.push(out.verdict);
            robustness.push(out.robustness);
        }
        Ok(MonitorRun {
            verdicts: VerdictTrace(verdicts),
            robustness,
        })
    }
}

/// F/G update: running sup/inf of a non-temporal operand, otherwise a suffix fold of the
/// operand's vector.
fn running(st: &mut NodeState, child: &NodeState, t: usize, op: fn(f64, f64) -> f64) {
    if child.stable {
        if st.full {
            for v in st.vals.iter_mut() {
                *v = op(*v, child.last);
            }
            st.vals.push(child.last);
        } else {
            st.head = if t == 0 { child.last } else { op(st.head, child.last) };
        }
        return;
    }
    let cv = &child.vals;
    if st.full {
        st.vals.clear();
        st.vals.extend_from_slice(cv);
        for j in (0..st.vals.len() - 1).rev() {
            st.vals[j] = op(st.vals[j], st.vals[j + 1]);
        }
    } else {
        st.head = cv[1..].iter().fold(cv[0], |acc, x| op(acc, *x));
    }
}

/// An [`IncrementalMonitor`] fed with embeddings, scoring its predicates on the fly.
#[derive(Debug, Clone)]
pub struct EmbeddingMonitor {
    engine: IncrementalMonitor,
    predicates: Vec<(EmbeddingPredicate, Arc<TargetSet>)>,
    buf: Vec<f64>,
}

impl EmbeddingMonitor {
    pub fn new(bound: &BoundSpec, f: &Formula) -> Result<Self, BindError> {
        let engine = IncrementalMonitor::new(f);
        let predicates = engine
            .atoms()
            .iter()
            .map(|a| {
                bound
                    .predicate(a)
                    .map(|(p, t)| (p.clone(), t.clone()))
                    .ok_or_else(|| BindError::UnknownPredicate(a.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let buf = vec![0.0; predicates.len()];
        Ok(Self {
            engine,
            predicates,
            buf,
        })
    }

    pub fn steps_seen(&self) -> usize {
        self.engine.steps_seen()
    }

    pub fn step(&mut self, z: &Embedding) -> Result<StepOutput, EmbeddingError> {
        for (b, (p, targets)) in self.buf.iter_mut().zip(&self.predicates) {
            *b = p.robustness_of(p.score(z, targets)?);
        }
        Ok(self.engine.step(&self.buf))
    }
}
