//! Discrete-time Dubins car benchmark: dynamics, goal regions, a feedback controller, and a
//! deterministic synthetic encoder that turns states into embeddings.
//!
//! State `s = (px, py, θ)` evolves as `s' = s + Δt·(v cos θ, v sin θ, a)` with the turn rate
//! `a` bounded by `a_max`. Three regions label each state: goals `A` (top right) and `B`
//! (top left) with radius 0.25, and the obstacle proximity zone `C` (bottom right) with
//! radius 0.5.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use thiserror::Error;

use crate::embedding::{Embedding, TargetSet};
use crate::math;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("control {a} outside [-{a_max}, {a_max}]")]
    ControlOutOfRange { a: f64, a_max: f64 },
    #[error("split {split} of {n} traces leaves one side empty")]
    InsufficientSplit { n: usize, split: f64 },
    #[error("split fraction must lie in (0, 1), got {0}")]
    InvalidSplit(f64),
    #[error("invalid parameters: {0}")]
    InvalidParams(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DubinsState {
    pub px: f64,
    pub py: f64,
    /// Heading in `(-π, π]`.
    pub theta: f64,
}

impl DubinsState {
    pub fn new(px: f64, py: f64, theta: f64) -> Self {
        Self {
            px,
            py,
            theta: math::wrap_angle(theta),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arena {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Default for Arena {
    fn default() -> Self {
        Self {
            x_min: -1.0,
            x_max: 1.0,
            y_min: -1.0,
            y_max: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DubinsParams {
    /// m/s
    pub v: f64,
    /// rad/s
    pub a_max: f64,
    /// s
    pub dt: f64,
    pub arena: Arena,
}

impl Default for DubinsParams {
    fn default() -> Self {
        Self {
            v: 1.0,
            a_max: 1.25,
            dt: 0.05,
            arena: Arena::default(),
        }
    }
}

impl DubinsParams {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.v > 0.0) {
            return Err(SimError::InvalidParams("speed must be positive"));
        }
        if !(self.a_max > 0.0) {
            return Err(SimError::InvalidParams("turn-rate bound must be positive"));
        }
        if !(self.dt > 0.0) {
            return Err(SimError::InvalidParams("time step must be positive"));
        }
        let a = &self.arena;
        if !(a.x_min < a.x_max && a.y_min < a.y_max) {
            return Err(SimError::InvalidParams("arena bounds are empty"));
        }
        Ok(())
    }
}

/// One Euler step under turn rate `a`.
pub fn step(s: DubinsState, a: f64, p: &DubinsParams) -> Result<DubinsState, SimError> {
    if !(a.abs() <= p.a_max) {
        return Err(SimError::ControlOutOfRange { a, a_max: p.a_max });
    }
    Ok(DubinsState::new(
        s.px + p.dt * p.v * libm::cos(s.theta),
        s.py + p.dt * p.v * libm::sin(s.theta),
        s.theta + p.dt * a,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Proposition {
    A,
    B,
    C,
}

impl Proposition {
    pub const ALL: [Proposition; 3] = [Proposition::A, Proposition::B, Proposition::C];

    pub fn name(self) -> &'static str {
        match self {
            Proposition::A => "A",
            Proposition::B => "B",
            Proposition::C => "C",
        }
    }
}

/// Open Euclidean ball.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub cx: f64,
    pub cy: f64,
    pub radius: f64,
}

impl Region {
    pub fn distance_to_center(&self, px: f64, py: f64) -> f64 {
        math::hypot(px - self.cx, py - self.cy)
    }

    pub fn contains(&self, px: f64, py: f64) -> bool {
        self.distance_to_center(px, py) < self.radius
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regions {
    pub a: Region,
    pub b: Region,
    pub c: Region,
}

impl Default for Regions {
    fn default() -> Self {
        Self {
            a: Region { cx: 0.8, cy: 0.8, radius: 0.25 },
            b: Region { cx: -0.8, cy: 0.8, radius: 0.25 },
            c: Region { cx: 0.8, cy: -0.8, radius: 0.5 },
        }
    }
}

impl Regions {
    pub fn get(&self, p: Proposition) -> &Region {
        match p {
            Proposition::A => &self.a,
            Proposition::B => &self.b,
            Proposition::C => &self.c,
        }
    }

    pub fn labels(&self, s: &DubinsState) -> Labels {
        Labels {
            a: self.a.contains(s.px, s.py),
            b: self.b.contains(s.px, s.py),
            c: self.c.contains(s.px, s.py),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Labels {
    pub a: bool,
    pub b: bool,
    pub c: bool,
}

impl Labels {
    pub fn get(&self, p: Proposition) -> bool {
        match p {
            Proposition::A => self.a,
            Proposition::B => self.b,
            Proposition::C => self.c,
        }
    }
}

/// Ground-truth labels with the default regions.
pub fn gt_labels(s: &DubinsState) -> Labels {
    Regions::default().labels(s)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerConfig {
    /// Proportional gain on heading error.
    pub heading_gain: f64,
    /// Weight of the push away from the obstacle center, relative to the goal direction.
    pub repulsion_gain: f64,
    /// Distance from the obstacle center inside which the push is active.
    pub repulsion_radius: f64,
    pub max_steps: usize,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            heading_gain: 3.0,
            repulsion_gain: 2.0,
            repulsion_radius: 0.75,
            max_steps: 400,
        }
    }
}

impl ControllerConfig {
    /// Turn rate steering toward `goal`, veering away from `obstacle` if one is given.
    pub fn control(&self, s: &DubinsState, goal: &Region, obstacle: Option<&Region>, p: &DubinsParams) -> f64 {
        let (gx, gy) = (goal.cx - s.px, goal.cy - s.py);
        let gn = math::hypot(gx, gy).max(1e-12);
        let (mut dx, mut dy) = (gx / gn, gy / gn);
        if let Some(obstacle) = obstacle {
            let d_obs = obstacle.distance_to_center(s.px, s.py);
            if d_obs < self.repulsion_radius && d_obs > 1e-12 {
                let w = self.repulsion_gain * (self.repulsion_radius - d_obs) / self.repulsion_radius;
                dx += w * (s.px - obstacle.cx) / d_obs;
                dy += w * (s.py - obstacle.cy) / d_obs;
            }
        }
        let desired = libm::atan2(dy, dx);
        let err = math::wrap_angle(desired - s.theta);
        (self.heading_gain * err).clamp(-p.a_max, p.a_max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rollout {
    pub states: Vec<DubinsState>,
    pub labels: Vec<Labels>,
    /// Whether the last goal of the sequence was entered before the step cap.
    pub completed: bool,
}

impl Rollout {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn column(&self, p: Proposition) -> Vec<bool> {
        self.labels.iter().map(|l| l.get(p)).collect()
    }
}

/// Drives the car through `goals` in order. A goal counts as reached on the first state inside
/// its region; the rollout stops when the last goal is reached or after `max_steps` steps.
pub fn rollout(
    start: DubinsState,
    goals: &[Proposition],
    params: &DubinsParams,
    ctrl: &ControllerConfig,
    regions: &Regions,
) -> Result<Rollout, SimError> {
    params.validate()?;
    let mut states = vec![start];
    let mut labels = vec![regions.labels(&start)];
    let mut current = 0;
    let advance = |current: &mut usize, l: &Labels| {
        while *current < goals.len() && l.get(goals[*current]) {
            *current += 1;
        }
    };
    advance(&mut current, &labels[0]);
    let mut s = start;
    while current < goals.len() && states.len() <= ctrl.max_steps {
        let goal = goals[current];
        // no avoidance while the obstacle zone itself is the goal
        let obstacle = (goal != Proposition::C).then_some(&regions.c);
        let a = ctrl.control(&s, regions.get(goal), obstacle, params);
        s = step(s, a, params)?;
        let l = regions.labels(&s);
        states.push(s);
        labels.push(l);
        advance(&mut current, &l);
    }
    Ok(Rollout {
        states,
        labels,
        completed: current == goals.len(),
    })
}

/// Start state and goal sequence of one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodePlan {
    pub start: DubinsState,
    pub goals: Vec<Proposition>,
}

impl EpisodePlan {
    /// 35% reach A, 25% A then B, 25% B then A, and 15% unsafe episodes that drive through the
    /// obstacle zone before reaching A. Starts are uniform over the arena outside all three
    /// regions, heading within 45° of the first goal.
    pub fn sample<R: Rng + ?Sized>(rng: &mut R, params: &DubinsParams, regions: &Regions) -> Self {
        let u: f64 = rng.random();
        let goals = if u < 0.35 {
            vec![Proposition::A]
        } else if u < 0.6 {
            vec![Proposition::A, Proposition::B]
        } else if u < 0.85 {
            vec![Proposition::B, Proposition::A]
        } else {
            vec![Proposition::C, Proposition::A]
        };
        let ar = &params.arena;
        let (px, py) = loop {
            let px = ar.x_min + (ar.x_max - ar.x_min) * rng.random::<f64>();
            let py = ar.y_min + (ar.y_max - ar.y_min) * rng.random::<f64>();
            if !Proposition::ALL.iter().any(|p| regions.get(*p).contains(px, py)) {
                break (px, py);
            }
        };
        let g = regions.get(goals[0]);
        let bearing = libm::atan2(g.cy - py, g.cx - px);
        let jitter = (rng.random::<f64>() - 0.5) * (PI / 2.0);
        Self {
            start: DubinsState::new(px, py, bearing + jitter),
            goals,
        }
    }
}

pub const FEATURE_DIM: usize = 7;

/// Random-projection encoder over hand-built state features.
///
/// Features are `(px, py, cos θ, sin θ, g_A, g_B, g_C)`. Outside region `X`, `g_X` is a fixed
/// step plus the capped distance to the region; inside, it grows linearly from 0 at the
/// boundary to a small value at the center. Pose terms are zeroed while the car is inside any
/// region, so an in-region embedding depends on depth alone and region membership is separated
/// by a margin. The features go through an affine map drawn once from the seed and a `tanh`;
/// Gaussian noise of scale `noise_sigma` is added per component.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthEncoder {
    seed: u64,
    out_dim: usize,
    noise_sigma: f64,
    regions: Regions,
    weights: Vec<f64>,
    bias: Vec<f64>,
}

impl SynthEncoder {
    pub const DEFAULT_DIM: usize = 16;
    const POSITION_WEIGHT: f64 = 0.5;
    const HEADING_WEIGHT: f64 = 0.5;
    const DISTANCE_WEIGHT: f64 = 1.0;
    const DISTANCE_CAP: f64 = 0.5;
    const DEPTH_WEIGHT: f64 = 0.5;
    const REGION_STEP: f64 = 2.0;
    const WEIGHT_SCALE: f64 = 1.0;
    const BIAS_SCALE: f64 = 0.1;

    pub fn new(seed: u64, out_dim: usize, noise_sigma: f64) -> Result<Self, SimError> {
        Self::with_regions(seed, out_dim, noise_sigma, Regions::default())
    }

    pub fn with_regions(seed: u64, out_dim: usize, noise_sigma: f64, regions: Regions) -> Result<Self, SimError> {
        if out_dim == 0 {
            return Err(SimError::InvalidParams("encoder dimension must be positive"));
        }
        if !(noise_sigma >= 0.0) || !noise_sigma.is_finite() {
            return Err(SimError::InvalidParams("noise scale must be finite and non-negative"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w_std = Self::WEIGHT_SCALE / math::sqrt(FEATURE_DIM as f64);
        let weights = (0..out_dim * FEATURE_DIM)
            .map(|_| w_std * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let bias = (0..out_dim)
            .map(|_| Self::BIAS_SCALE * rng.sample::<f64, _>(StandardNormal))
            .collect();
        Ok(Self {
            seed,
            out_dim,
            noise_sigma,
            regions,
            weights,
            bias,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn noise_sigma(&self) -> f64 {
        self.noise_sigma
    }

    /// Same projection, different noise level.
    pub fn with_noise(&self, noise_sigma: f64) -> Self {
        Self {
            noise_sigma,
            ..self.clone()
        }
    }

    pub fn features(&self, s: &DubinsState) -> [f64; FEATURE_DIM] {
        let rs = [&self.regions.a, &self.regions.b, &self.regions.c];
        let inside_any = rs.iter().any(|r| r.contains(s.px, s.py));
        let goal = |r: &Region| {
            let d = r.distance_to_center(s.px, s.py);
            if d < r.radius {
                Self::DEPTH_WEIGHT * (1.0 - d / r.radius)
            } else {
                Self::REGION_STEP + Self::DISTANCE_WEIGHT * (d - r.radius).min(Self::DISTANCE_CAP)
            }
        };
        let pose = if inside_any { 0.0 } else { 1.0 };
        [
            pose * Self::POSITION_WEIGHT * s.px,
            pose * Self::POSITION_WEIGHT * s.py,
            pose * Self::HEADING_WEIGHT * libm::cos(s.theta),
            pose * Self::HEADING_WEIGHT * libm::sin(s.theta),
            goal(rs[0]),
            goal(rs[1]),
            goal(rs[2]),
        ]
    }

    /// Noise-free embedding.
    pub fn encode_clean(&self, s: &DubinsState) -> Embedding {
        let f = self.features(s);
        let values = (0..self.out_dim)
            .map(|o| {
                let row = &self.weights[o * FEATURE_DIM..(o + 1) * FEATURE_DIM];
                let pre: f64 = row.iter().zip(&f).map(|(w, x)| w * x).sum::<f64>() + self.bias[o];
                libm::tanh(pre)
            })
            .collect();
        Embedding::new(values).expect("tanh output is finite")
    }

    /// Embedding with per-component noise drawn from `rng`.
    pub fn encode<R: Rng + ?Sized>(&self, s: &DubinsState, rng: &mut R) -> Embedding {
        let clean = self.encode_clean(s);
        if self.noise_sigma == 0.0 {
            return clean;
        }
        let normal = Normal::new(0.0, self.noise_sigma).expect("validated noise scale");
        let values = clean.into_inner().into_iter().map(|v| v + normal.sample(rng)).collect();
        Embedding::new(values).expect("finite noise")
    }

    /// Noise-free encodings of representative states of one region: its center and
    /// `count - 1` states just inside the boundary, with headings spread over the full turn.
    pub fn target_set(&self, p: Proposition, count: usize) -> TargetSet {
        let r = self.regions.get(p);
        let mut states = vec![DubinsState::new(r.cx, r.cy, 0.0)];
        let ring = count.saturating_sub(1);
        let rad = r.radius * (1.0 - 1e-9);
        for k in 0..ring {
            let ang = 2.0 * PI * k as f64 / ring as f64;
            states.push(DubinsState::new(
                r.cx + rad * libm::cos(ang),
                r.cy + rad * libm::sin(ang),
                -PI + 2.0 * PI * (k as f64 + 0.5) / ring as f64,
            ));
        }
        let embeddings = states.iter().map(|s| self.encode_clean(s)).collect();
        TargetSet::new(p.name(), embeddings).expect("nonempty, uniform dimension")
    }
}

pub const DEFAULT_TARGETS_PER_REGION: usize = 8;

/// A simulated, encoded and labeled episode.
#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    pub index: usize,
    pub plan: EpisodePlan,
    pub rollout: Rollout,
    pub embeddings: Vec<Embedding>,
}

/// Random stream for episode `index`, independent of every other episode.
pub fn episode_rng(master_seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index as u64 + 1);
    rng
}

pub fn generate_episode(
    master_seed: u64,
    index: usize,
    params: &DubinsParams,
    ctrl: &ControllerConfig,
    regions: &Regions,
    encoder: &SynthEncoder,
) -> Result<Episode, SimError> {
    let mut rng = episode_rng(master_seed, index);
    let plan = EpisodePlan::sample(&mut rng, params, regions);
    let rollout = rollout(plan.start, &plan.goals, params, ctrl, regions)?;
    let embeddings = rollout.states.iter().map(|s| encoder.encode(s, &mut rng)).collect();
    Ok(Episode {
        index,
        plan,
        rollout,
        embeddings,
    })
}

/// `(⌈n·split⌉, rest)`, requiring both sides to be nonempty.
pub fn split_counts(n: usize, split: f64) -> Result<(usize, usize), SimError> {
    if !(split > 0.0 && split < 1.0) {
        return Err(SimError::InvalidSplit(split));
    }
    let n_cal = math::ceil_tolerant(n as f64 * split) as usize;
    if n_cal == 0 || n_cal >= n {
        return Err(SimError::InsufficientSplit { n, split });
    }
    Ok((n_cal, n - n_cal))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::DistanceFn;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn step_examples() {
        let p = DubinsParams::default();
        let s = step(DubinsState::new(0.0, 0.0, 0.0), 0.0, &p).unwrap();
        assert_eq!((s.px, s.py, s.theta), (0.05, 0.0, 0.0));
        let s = step(DubinsState::new(0.0, 0.0, PI / 2.0), 0.0, &p).unwrap();
        assert!(close(s.px, 0.0) && close(s.py, 0.05) && close(s.theta, PI / 2.0));
        let s = step(DubinsState::new(0.0, 0.0, 0.0), 1.25, &p).unwrap();
        assert!(close(s.px, 0.05) && s.py == 0.0 && close(s.theta, 0.0625));
        assert!(matches!(
            step(DubinsState::new(0.0, 0.0, 0.0), 1.3, &p),
            Err(SimError::ControlOutOfRange { .. })
        ));
    }

    #[test]
    fn theta_wraps() {
        let p = DubinsParams::default();
        let s = step(DubinsState::new(0.0, 0.0, PI - 0.01), 1.0, &p).unwrap();
        assert!(s.theta > -PI && s.theta <= PI);
        assert!(s.theta < 0.0);
    }

    #[test]
    fn label_examples() {
        assert!(gt_labels(&DubinsState::new(0.8, 0.8, 1.0)).a);
        assert_eq!(gt_labels(&DubinsState::new(0.0, 0.0, 0.0)), Labels::default());
        assert!(gt_labels(&DubinsState::new(0.8, -0.5, 0.0)).c);
        // boundary is outside the open ball
        assert!(!gt_labels(&DubinsState::new(1.05, 0.8, 0.0)).a);
    }

    #[test]
    fn reach_a_from_bottom_left() {
        let r = rollout(
            DubinsState::new(-0.8, -0.8, 0.0),
            &[Proposition::A],
            &DubinsParams::default(),
            &ControllerConfig::default(),
            &Regions::default(),
        )
        .unwrap();
        assert!(r.completed);
        assert!(r.labels.last().unwrap().a);
        assert!(r.labels[..r.len() - 1].iter().all(|l| !l.a));
    }

    #[test]
    fn start_inside_goal() {
        let r = rollout(
            DubinsState::new(0.8, 0.8, 0.0),
            &[Proposition::A],
            &DubinsParams::default(),
            &ControllerConfig::default(),
            &Regions::default(),
        )
        .unwrap();
        assert_eq!(r.len(), 1);
        assert!(r.labels[0].a);
    }

    #[test]
    fn encoder_is_deterministic() {
        let e1 = SynthEncoder::new(11, 16, 0.0).unwrap();
        let e2 = SynthEncoder::new(11, 16, 0.0).unwrap();
        let s = DubinsState::new(0.1, -0.3, 0.7);
        assert_eq!(e1.encode_clean(&s), e2.encode_clean(&s));
        let z = e1.encode(&s, &mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!(z, e1.encode_clean(&s));
        assert_eq!(z.dim(), 16);
        assert!(z.values().iter().all(|v| v.abs() < 1.0));
        assert_ne!(SynthEncoder::new(12, 16, 0.0).unwrap().encode_clean(&s), z);
    }

    #[test]
    fn noisy_encoding_replays() {
        let e = SynthEncoder::new(5, 8, 0.1).unwrap();
        let s = DubinsState::new(0.4, 0.4, 0.0);
        let a = e.encode(&s, &mut ChaCha8Rng::seed_from_u64(9));
        let b = e.encode(&s, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
        assert_ne!(a, e.encode_clean(&s));
    }

    #[test]
    fn target_sets() {
        let e = SynthEncoder::new(1, 16, 0.0).unwrap();
        let t = e.target_set(Proposition::A, 8);
        assert_eq!(t.len(), 8);
        assert_eq!(t.dim(), 16);
    }

    #[test]
    fn inside_states_embed_closer_to_center() {
        let enc = SynthEncoder::new(21, 16, 0.0).unwrap();
        let regions = Regions::default();
        let center = enc.encode_clean(&DubinsState::new(0.8, 0.8, 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let (mut ok, mut total) = (0, 0);
        while total < 2000 {
            let inside = {
                let r = 0.25 * math::sqrt(rng.random::<f64>());
                let a = 2.0 * PI * rng.random::<f64>();
                DubinsState::new(0.8 + r * libm::cos(a), 0.8 + r * libm::sin(a), PI * (2.0 * rng.random::<f64>() - 1.0))
            };
            let outside = DubinsState::new(
                2.0 * rng.random::<f64>() - 1.0,
                2.0 * rng.random::<f64>() - 1.0,
                PI * (2.0 * rng.random::<f64>() - 1.0),
            );
            if regions.a.distance_to_center(outside.px, outside.py) <= 0.6 {
                continue;
            }
            total += 1;
            let din = DistanceFn::L2.distance(&enc.encode_clean(&inside), &center).unwrap();
            let dout = DistanceFn::L2.distance(&enc.encode_clean(&outside), &center).unwrap();
            if din < dout {
                ok += 1;
            }
        }
        assert!(ok as f64 >= 0.99 * total as f64, "{ok}/{total}");
    }

    #[test]
    fn in_region_embedding_depends_on_depth_only() {
        let enc = SynthEncoder::new(3, 16, 0.0).unwrap();
        let targets = enc.target_set(Proposition::A, 8);
        let l2 = |a: &Embedding, b: &Embedding| DistanceFn::L2.distance(a, b).unwrap();
        let rim = &targets.embeddings()[1];
        assert!(targets.embeddings()[1..].iter().all(|t| l2(t, rim) < 1e-6));
        let at = |d: f64, th: f64| enc.encode_clean(&DubinsState::new(0.8 + d, 0.8, th));
        assert!(l2(&at(0.1, 0.0), &enc.encode_clean(&DubinsState::new(0.8, 0.9, 2.0))) < 1e-9);
        let delta = |d: f64| {
            let z = at(d, 1.0);
            targets
                .embeddings()
                .iter()
                .map(|t| DistanceFn::L2.distance(&z, t).unwrap())
                .fold(f64::INFINITY, f64::min)
        };
        // distance to the target set rises from the boundary and falls toward the center
        let outer: Vec<f64> = (1..=25).map(|k| delta(0.25 - 0.005 * k as f64)).collect();
        let peak = outer.iter().cloned().fold(0.0, f64::max);
        assert!(outer[..10].windows(2).all(|w| w[0] < w[1]), "{outer:?}");
        let edge = l2(&at(0.2500001, 1.0), rim);
        assert!(edge > 2.0 * peak, "{edge} vs {peak}");
    }

    #[test]
    fn split_rule() {
        assert_eq!(split_counts(100, 0.4).unwrap(), (40, 60));
        assert_eq!(split_counts(10, 0.4).unwrap(), (4, 6));
        assert!(matches!(split_counts(1, 0.4), Err(SimError::InsufficientSplit { .. })));
        assert!(matches!(split_counts(10, 1.0), Err(SimError::InvalidSplit(_))));
    }

    #[test]
    fn episodes_replay() {
        let params = DubinsParams::default();
        let ctrl = ControllerConfig::default();
        let regions = Regions::default();
        let enc = SynthEncoder::new(4, 16, 0.05).unwrap();
        let a = generate_episode(4, 3, &params, &ctrl, &regions, &enc).unwrap();
        let b = generate_episode(4, 3, &params, &ctrl, &regions, &enc).unwrap();
        assert_eq!(a, b);
        let c = generate_episode(4, 4, &params, &ctrl, &regions, &enc).unwrap();
        assert_ne!(a.rollout.states, c.rollout.states);
    }
}
