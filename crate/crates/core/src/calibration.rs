//! Threshold calibration for embedding predicates.
//!
//! * [`f1_optimal_threshold`] picks the observed distance that maximizes frame-level F1 when
//!   predicting "holds" for `d <= ε`.
//! * [`conformal_threshold`] applies split conformal prediction to one score per
//!   demonstration, the distance of its hardest positive frame ([`hardest_positive`]). The
//!   resulting `ε_CP` detects every positive frame of a fresh exchangeable demonstration with
//!   probability at least `1 - α`.

use alloc::vec::Vec;

use rand::Rng;
use thiserror::Error;

use crate::embedding::{Aggregation, DistanceFn, EmbeddingError, TargetSet, predicate_score};
use crate::math;
use crate::semantics::Trace;

pub const DEFAULT_ALPHA: f64 = 0.10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CalibrationError {
    #[error("calibration set is empty")]
    EmptyCalibrationSet,
    #[error("calibration set has no positive labels")]
    NoPositives,
    #[error("demonstration has no positive timestep")]
    NoPositiveTimestep,
    #[error("alpha must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),
    #[error("no conformal scores supplied")]
    EmptyScores,
    #[error("distance {0} is not a finite non-negative number")]
    InvalidDistance(f64),
    #[error("trace has {trace} steps but {labels} labels")]
    LengthMismatch { trace: usize, labels: usize },
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
}

/// One frame: its predicate distance and whether the ground truth says the concept is present.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationSample {
    pub distance: f64,
    pub label: bool,
}

impl CalibrationSample {
    pub fn new(distance: f64, label: bool) -> Self {
        Self { distance, label }
    }
}

/// A labeled embedding trace used for calibration.
#[derive(Debug, Clone, PartialEq)]
pub struct Demonstration {
    pub trace: Trace,
    pub labels: Vec<bool>,
}

impl Demonstration {
    pub fn new(trace: Trace, labels: Vec<bool>) -> Result<Self, CalibrationError> {
        if trace.len() != labels.len() {
            return Err(CalibrationError::LengthMismatch {
                trace: trace.len(),
                labels: labels.len(),
            });
        }
        Ok(Self { trace, labels })
    }

    /// Per-frame samples for one predicate configuration.
    pub fn samples(
        &self,
        targets: &TargetSet,
        distance: DistanceFn,
        aggregation: Aggregation,
    ) -> Result<Vec<CalibrationSample>, CalibrationError> {
        self.trace
            .embeddings()
            .iter()
            .zip(&self.labels)
            .map(|(z, &label)| {
                Ok(CalibrationSample::new(
                    predicate_score(distance, aggregation, z, targets)?,
                    label,
                ))
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    F1Optimal,
    Conformal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationResult {
    /// `f64::INFINITY` when the conformal rank exceeds the number of scores.
    pub epsilon: f64,
    pub method: Method,
    pub alpha: Option<f64>,
    /// Frames (F1) or demonstrations (conformal) used.
    pub n_cal: usize,
    pub achieved_f1: Option<f64>,
    /// 1-based rank of the chosen order statistic (conformal).
    pub k: Option<usize>,
    /// Set when `k > n_cal`; the threshold is then `+∞` and the guarantee is vacuous.
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Counts {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl Counts {
    pub fn f1(&self) -> f64 {
        let denom = 2 * self.tp + self.fp + self.fn_;
        if denom == 0 {
            return 0.0;
        }
        (2 * self.tp) as f64 / denom as f64
    }

    /// Exact comparison of the two F1 fractions.
    fn f1_greater(&self, other: &Counts) -> bool {
        let (a_num, a_den) = (2 * self.tp, 2 * self.tp + self.fp + self.fn_);
        let (b_num, b_den) = (2 * other.tp, 2 * other.tp + other.fp + other.fn_);
        (a_num as u128) * (b_den as u128) > (b_num as u128) * (a_den as u128)
    }
}

fn check_distance(d: f64) -> Result<(), CalibrationError> {
    if d.is_finite() && d >= 0.0 {
        Ok(())
    } else {
        Err(CalibrationError::InvalidDistance(d))
    }
}

/// `argmax_{ε ∈ {d_1..d_N}} F1(ε)`, smallest `ε` on ties. Runs in `O(N log N)`.
pub fn f1_optimal_threshold(samples: &[CalibrationSample]) -> Result<CalibrationResult, CalibrationError> {
    if samples.is_empty() {
        return Err(CalibrationError::EmptyCalibrationSet);
    }
    for s in samples {
        check_distance(s.distance)?;
    }
    let positives = samples.iter().filter(|s| s.label).count() as u64;
    if positives == 0 {
        return Err(CalibrationError::NoPositives);
    }
    let mut sorted: Vec<CalibrationSample> = samples.to_vec();
    sorted.sort_by(|a, b| a.distance.total_cmp(&b.distance));

    let mut best: Option<(f64, Counts)> = None;
    let (mut tp, mut fp) = (0u64, 0u64);
    let mut i = 0;
    while i < sorted.len() {
        let eps = sorted[i].distance;
        while i < sorted.len() && sorted[i].distance == eps {
            if sorted[i].label {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let counts = Counts {
            tp,
            fp,
            fn_: positives - tp,
        };
        if best.as_ref().is_none_or(|(_, b)| counts.f1_greater(b)) {
            best = Some((eps, counts));
        }
    }
    let (epsilon, counts) = best.expect("at least one candidate");
    Ok(CalibrationResult {
        epsilon,
        method: Method::F1Optimal,
        alpha: None,
        n_cal: samples.len(),
        achieved_f1: Some(counts.f1()),
        k: None,
        degenerate: false,
    })
}

/// Largest distance among positive frames: the hardest positive case of one demonstration.
pub fn hardest_positive(samples: &[CalibrationSample]) -> Result<f64, CalibrationError> {
    let mut best: Option<f64> = None;
    for s in samples {
        check_distance(s.distance)?;
        if s.label {
            best = Some(best.map_or(s.distance, |b| b.max(s.distance)));
        }
    }
    best.ok_or(CalibrationError::NoPositiveTimestep)
}

/// Nonconformity score of a demonstration for the predicate `(targets, distance, aggregation)`.
pub fn conformal_score(
    demo: &Demonstration,
    targets: &TargetSet,
    distance: DistanceFn,
    aggregation: Aggregation,
) -> Result<f64, CalibrationError> {
    hardest_positive(&demo.samples(targets, distance, aggregation)?)
}

fn check_alpha(alpha: f64) -> Result<(), CalibrationError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(CalibrationError::InvalidAlpha(alpha))
    }
}

/// `k = ⌈(1 − α)(n + 1)⌉`.
pub fn conformal_rank(n_cal: usize, alpha: f64) -> Result<usize, CalibrationError> {
    check_alpha(alpha)?;
    let k = math::ceil_tolerant((1.0 - alpha) * (n_cal as f64 + 1.0));
    Ok((k as usize).max(1))
}

/// `ε_CP = score_(k)`, the k-th smallest score, or `+∞` (flagged degenerate) when `k > n`.
pub fn conformal_threshold(scores: &[f64], alpha: f64) -> Result<CalibrationResult, CalibrationError> {
    check_alpha(alpha)?;
    if scores.is_empty() {
        return Err(CalibrationError::EmptyScores);
    }
    for s in scores {
        check_distance(*s)?;
    }
    let n = scores.len();
    let k = conformal_rank(n, alpha)?;
    let (epsilon, degenerate) = if k > n {
        (f64::INFINITY, true)
    } else {
        let mut sorted = scores.to_vec();
        sorted.sort_by(f64::total_cmp);
        (sorted[k - 1], false)
    };
    Ok(CalibrationResult {
        epsilon,
        method: Method::Conformal,
        alpha: Some(alpha),
        n_cal: n,
        achieved_f1: None,
        k: Some(k),
        degenerate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageReport {
    pub trials: usize,
    pub covered: usize,
    pub rate: f64,
    /// `1 − α − 3·sqrt(α(1 − α)/trials)`
    pub lower_bound: f64,
}

impl CoverageReport {
    pub fn holds(&self) -> bool {
        self.rate >= self.lower_bound
    }
}

/// Monte-Carlo check of the recall guarantee.
///
/// Each trial draws `n_cal` calibration demonstrations and one test demonstration from
/// `generate` (each a list of per-frame samples), computes `ε_CP`, and counts the trial as
/// covered when every positive test frame has distance `<= ε_CP`.
pub fn verify_recall_guarantee<R, G>(
    mut generate: G,
    rng: &mut R,
    n_cal: usize,
    alpha: f64,
    trials: usize,
) -> Result<CoverageReport, CalibrationError>
where
    R: Rng + ?Sized,
    G: FnMut(&mut R) -> Vec<CalibrationSample>,
{
    check_alpha(alpha)?;
    let mut covered = 0;
    let mut scores = Vec::with_capacity(n_cal);
    for _ in 0..trials {
        scores.clear();
        for _ in 0..n_cal {
            scores.push(hardest_positive(&generate(rng))?);
        }
        let eps = conformal_threshold(&scores, alpha)?.epsilon;
        if hardest_positive(&generate(rng))? <= eps {
            covered += 1;
        }
    }
    let rate = if trials == 0 { 1.0 } else { covered as f64 / trials as f64 };
    let sigma = if trials == 0 {
        0.0
    } else {
        math::sqrt(alpha * (1.0 - alpha) / trials as f64)
    };
    Ok(CoverageReport {
        trials,
        covered,
        rate,
        lower_bound: 1.0 - alpha - 3.0 * sigma,
    })
}
