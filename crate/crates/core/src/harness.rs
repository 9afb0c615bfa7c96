//! Ground-truth monitors and agreement metrics between ETL and ground-truth verdicts.

use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::monitor::{Verdict, VerdictTrace};
use crate::semantics::{CoreFormula, EvalError, Valuation};
use crate::spec::Formula;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HarnessError {
    #[error("unknown proposition `{0}`")]
    UnknownProposition(String),
    #[error("proposition `{name}` has {found} steps, expected {expected}")]
    RaggedTable {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("proposition table is empty")]
    EmptyTable,
    #[error("trace {index}: ETL has {etl} verdicts, ground truth has {gt}")]
    LengthMismatch { index: usize, etl: usize, gt: usize },
    #[error("{etl} ETL traces but {gt} ground-truth traces")]
    CountMismatch { etl: usize, gt: usize },
}

/// Per-step Boolean valuation of named symbolic propositions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropositionTable {
    names: Vec<String>,
    columns: Vec<Vec<bool>>,
    len: usize,
}

impl PropositionTable {
    pub fn new(columns: Vec<(String, Vec<bool>)>) -> Result<Self, HarnessError> {
        let len = columns.first().map(|c| c.1.len()).ok_or(HarnessError::EmptyTable)?;
        if len == 0 {
            return Err(HarnessError::EmptyTable);
        }
        if let Some((name, col)) = columns.iter().find(|c| c.1.len() != len) {
            return Err(HarnessError::RaggedTable {
                name: name.clone(),
                expected: len,
                found: col.len(),
            });
        }
        let (names, columns) = columns.into_iter().unzip();
        Ok(Self { names, columns, len })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn column(&self, name: &str) -> Option<&[bool]> {
        self.atom_index(name).map(|i| self.columns[i].as_slice())
    }
}

/// Robustness of a Boolean proposition is `±1`.
impl Valuation for PropositionTable {
    fn len(&self) -> usize {
        self.len
    }

    fn atom_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    fn holds(&self, atom: usize, t: usize) -> bool {
        self.columns[atom][t]
    }

    fn robustness(&self, atom: usize, t: usize) -> f64 {
        if self.columns[atom][t] {
            1.0
        } else {
            -1.0
        }
    }
}

/// `b_i = +1` iff `ς_{≤i} ⊨ ω`, for every prefix.
pub fn gt_monitor(omega: &Formula, gt: &PropositionTable) -> Result<VerdictTrace, HarnessError> {
    let cf = CoreFormula::compile(omega);
    let cols = cf.bind(gt).map_err(|e| match e {
        EvalError::UnknownAtom(name) => HarnessError::UnknownProposition(name),
        other => unreachable!("binding only reports unknown atoms: {other}"),
    })?;
    Ok((0..gt.len())
        .map(|i| Verdict::from_bool(cf.sat_bound(gt, &cols, 0, i)))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl Confusion {
    pub fn record(&mut self, predicted: Verdict, actual: Verdict) {
        match (predicted.is_satisfied(), actual.is_satisfied()) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, false) => self.tn += 1,
            (false, true) => self.fn_ += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    /// `TP / (TP + FP)`; with no predicted positives, 1 if there was nothing to find, else 0.
    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp, self.fn_ == 0)
    }

    /// `TP / (TP + FN)`; with no actual positives, 1 if nothing was predicted, else 0.
    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_, self.fp == 0)
    }

    /// `2TP / (2TP + FP + FN)`, the harmonic mean of precision and recall; 1 when there are
    /// no positives on either side.
    pub fn f1(&self) -> f64 {
        ratio(2 * self.tp, 2 * self.tp + self.fp + self.fn_, true)
    }

    pub fn agreement(&self) -> f64 {
        ratio(self.tp + self.tn, self.total(), true)
    }
}

fn ratio(num: usize, den: usize, empty_is_perfect: bool) -> f64 {
    if den == 0 {
        if empty_is_perfect {
            1.0
        } else {
            0.0
        }
    } else {
        num as f64 / den as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    Frames,
    Episodes,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub scope: Scope,
    pub confusion: Confusion,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub agreement: f64,
    pub ordering_accuracy: Option<f64>,
}

impl MetricsReport {
    pub fn from_confusion(scope: Scope, confusion: Confusion) -> Self {
        Self {
            scope,
            confusion,
            precision: confusion.precision(),
            recall: confusion.recall(),
            f1: confusion.f1(),
            agreement: confusion.agreement(),
            ordering_accuracy: None,
        }
    }
}

fn check_pairs(etl: &[VerdictTrace], gt: &[VerdictTrace]) -> Result<(), HarnessError> {
    if etl.len() != gt.len() {
        return Err(HarnessError::CountMismatch {
            etl: etl.len(),
            gt: gt.len(),
        });
    }
    for (index, (e, g)) in etl.iter().zip(gt).enumerate() {
        if e.len() != g.len() {
            return Err(HarnessError::LengthMismatch {
                index,
                etl: e.len(),
                gt: g.len(),
            });
        }
    }
    Ok(())
}

/// Micro-averaged over all frames of all traces; `+1` is the positive class.
pub fn frame_metrics(etl: &[VerdictTrace], gt: &[VerdictTrace]) -> Result<MetricsReport, HarnessError> {
    check_pairs(etl, gt)?;
    let mut c = Confusion::default();
    for (e, g) in etl.iter().zip(gt) {
        for (p, a) in e.iter().zip(g.iter()) {
            c.record(p, a);
        }
    }
    Ok(MetricsReport::from_confusion(Scope::Frames, c))
}

/// One sample per trace: the verdict at the final prefix.
pub fn episode_metrics(etl: &[VerdictTrace], gt: &[VerdictTrace]) -> Result<MetricsReport, HarnessError> {
    check_pairs(etl, gt)?;
    let mut c = Confusion::default();
    for (e, g) in etl.iter().zip(gt) {
        if let (Some(p), Some(a)) = (e.last(), g.last()) {
            c.record(p, a);
        }
    }
    Ok(MetricsReport::from_confusion(Scope::Episodes, c))
}

/// First index at which a subgoal is detected.
pub fn first_satisfaction(detections: impl IntoIterator<Item = bool>) -> Option<usize> {
    detections.into_iter().position(|b| b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubgoalOrder {
    Neither,
    OnlyFirst,
    OnlySecond,
    FirstThenSecond,
    SecondThenFirst,
    Simultaneous,
}

/// First-detection times of two subgoals within one episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SubgoalTimes {
    pub first: Option<usize>,
    pub second: Option<usize>,
}

impl SubgoalTimes {
    pub fn order(&self) -> SubgoalOrder {
        match (self.first, self.second) {
            (None, None) => SubgoalOrder::Neither,
            (Some(_), None) => SubgoalOrder::OnlyFirst,
            (None, Some(_)) => SubgoalOrder::OnlySecond,
            (Some(a), Some(b)) if a < b => SubgoalOrder::FirstThenSecond,
            (Some(a), Some(b)) if a > b => SubgoalOrder::SecondThenFirst,
            _ => SubgoalOrder::Simultaneous,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderingAccuracy {
    pub value: f64,
    pub matched: usize,
    pub episodes: usize,
    /// Set when there were no episodes and the value is vacuously 1.
    pub empty: bool,
}

/// Fraction of episodes whose relative subgoal order agrees with the ground truth.
pub fn ordering_accuracy(
    etl: &[SubgoalTimes],
    gt: &[SubgoalTimes],
) -> Result<OrderingAccuracy, HarnessError> {
    if etl.len() != gt.len() {
        return Err(HarnessError::CountMismatch {
            etl: etl.len(),
            gt: gt.len(),
        });
    }
    let matched = etl.iter().zip(gt).filter(|(e, g)| e.order() == g.order()).count();
    let episodes = etl.len();
    Ok(OrderingAccuracy {
        value: ratio(matched, episodes, true),
        matched,
        episodes,
        empty: episodes == 0,
    })
}
