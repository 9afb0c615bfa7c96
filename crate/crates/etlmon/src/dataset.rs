//! Dubins benchmark dataset on disk.
//!
//! ```text
//! <dir>/manifest.json
//! <dir>/dubins.etl
//! <dir>/targets/{A,B,C}.json
//! <dir>/calibration/trace_000.jsonl ...
//! <dir>/test/trace_040.jsonl ...
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use etl_core::dubins::{
    generate_episode, split_counts, ControllerConfig, DubinsParams, Episode, Proposition, Regions, SynthEncoder,
    DEFAULT_TARGETS_PER_REGION,
};
use etl_core::Trace;
use rayon::prelude::*;

use crate::error::Result;
use crate::formats::{write_file, write_json, write_target_set, write_trace, DatasetManifest, LabeledTrace};

pub const SPEC_FILE: &str = "dubins.etl";

/// Specification shipped with every dataset. Thresholds are placeholders until calibrated.
pub const DUBINS_SPEC: &str = "\
# Dubins car benchmark: goals A (top right), B (top left), obstacle zone C (bottom right).
targets goal_a = \"targets/A.json\";
targets goal_b = \"targets/B.json\";
targets zone_c = \"targets/C.json\";

pred near_A = dist(l2, goal_a, min) <= 0.5;
pred near_B = dist(l2, goal_b, min) <= 0.5;
pred near_C = dist(l2, zone_c, min) <= 0.5;

spec reach_a = F near_A;
spec avoid_c = G !near_C;
spec reach_avoid = F near_A & G !near_C;
spec seq_ab = F (near_A & F near_B);
";

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetConfig {
    pub seed: u64,
    pub n: usize,
    pub split: f64,
    pub noise_sigma: f64,
    pub encoder_dim: usize,
    pub params: DubinsParams,
    pub controller: ControllerConfig,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            n: 100,
            split: 0.4,
            noise_sigma: 0.0,
            encoder_dim: SynthEncoder::DEFAULT_DIM,
            params: DubinsParams::default(),
            controller: ControllerConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSummary {
    pub dir: PathBuf,
    pub n_cal: usize,
    pub n_test: usize,
    pub frames: usize,
}

pub fn trace_name(index: usize) -> String {
    format!("trace_{index:03}")
}

fn labeled(ep: &Episode) -> Result<LabeledTrace> {
    let labels: BTreeMap<String, Vec<bool>> = Proposition::ALL
        .iter()
        .map(|p| (p.name().to_string(), ep.rollout.column(*p)))
        .collect();
    Ok(LabeledTrace {
        name: trace_name(ep.index),
        trace: Trace::new(ep.embeddings.clone())?,
        labels,
    })
}

/// Simulates, encodes and writes the full dataset under `dir`.
pub fn make_dataset(cfg: &DatasetConfig, dir: &Path) -> Result<DatasetSummary> {
    let (n_cal, n_test) = split_counts(cfg.n, cfg.split)?;
    cfg.params.validate()?;
    let regions = Regions::default();
    let encoder = SynthEncoder::new(cfg.seed, cfg.encoder_dim, cfg.noise_sigma)?;

    for p in Proposition::ALL {
        let set = encoder.target_set(p, DEFAULT_TARGETS_PER_REGION);
        write_target_set(&dir.join("targets").join(format!("{}.json", p.name())), &set)?;
    }

    let frames = (0..cfg.n)
        .into_par_iter()
        .map(|i| -> Result<usize> {
            let ep = generate_episode(cfg.seed, i, &cfg.params, &cfg.controller, &regions, &encoder)?;
            let split = if i < n_cal { "calibration" } else { "test" };
            let trace = labeled(&ep)?;
            write_trace(&dir.join(split).join(format!("{}.jsonl", trace.name)), &trace)?;
            Ok(trace.len())
        })
        .collect::<Result<Vec<usize>>>()?
        .into_iter()
        .sum();

    write_file(&dir.join(SPEC_FILE), DUBINS_SPEC.as_bytes())?;
    write_json(
        &dir.join("manifest.json"),
        &DatasetManifest {
            seed: cfg.seed,
            n: cfg.n,
            split: cfg.split,
            noise_sigma: cfg.noise_sigma,
            encoder_dim: cfg.encoder_dim,
        },
    )?;
    Ok(DatasetSummary {
        dir: dir.to_path_buf(),
        n_cal,
        n_test,
        frames,
    })
}
