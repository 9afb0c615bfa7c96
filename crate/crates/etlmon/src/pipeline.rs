//! Calibration, monitoring and evaluation over trace files.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use etl_core::calibration::{
    conformal_threshold, f1_optimal_threshold, hardest_positive, CalibrationError, CalibrationSample,
};
use etl_core::harness::{
    episode_metrics, first_satisfaction, frame_metrics, gt_monitor, ordering_accuracy, PropositionTable,
    SubgoalTimes,
};
use etl_core::monitor::{EmbeddingMonitor, MonitorRun};
use etl_core::spec::BoundSpec;
use etl_core::{Formula, IncrementalMonitor, SpecDocument, Valuation, VerdictTrace};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formats::{
    confusion_csv, plot_csv, read_json, read_target_set, read_trace, trace_paths, write_file, write_json,
    CalibrationFile, Diagnostics, LabeledTrace, MethodName, MonitorLine, MonitorSummary, PlotRow, SpecMetrics,
};

pub fn load_spec(path: &Path) -> Result<SpecDocument> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    etl_core::parse(&text).map_err(|source| Error::Spec {
        path: path.to_path_buf(),
        source,
    })
}

/// Resolves target imports against `targets_dir` (or the spec's directory). With an explicit
/// directory, a path that does not exist under it falls back to its file name alone.
pub fn bind_spec(doc: SpecDocument, spec_path: &Path, targets_dir: Option<&Path>) -> Result<BoundSpec> {
    let base = match targets_dir {
        Some(d) => d.to_path_buf(),
        None => spec_path.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    let mut sets = BTreeMap::new();
    for import in &doc.targets {
        let mut path = base.join(&import.path);
        if targets_dir.is_some() && !path.exists() {
            if let Some(name) = Path::new(&import.path).file_name() {
                path = base.join(name);
            }
        }
        sets.insert(import.alias.clone(), read_target_set(&path)?);
    }
    Ok(BoundSpec::new(doc, sets)?)
}

pub fn load_bound(spec_path: &Path, targets_dir: Option<&Path>) -> Result<BoundSpec> {
    bind_spec(load_spec(spec_path)?, spec_path, targets_dir)
}

pub fn load_traces(path: &Path) -> Result<Vec<LabeledTrace>> {
    let paths = trace_paths(path)?;
    if paths.is_empty() {
        return Err(Error::format(path, "no trace files"));
    }
    paths.par_iter().map(|p| read_trace(p)).collect()
}

/// Which ground-truth proposition a predicate is checked against.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabelMap(BTreeMap<String, String>);

impl LabelMap {
    /// Parses `pred=PROP` pairs.
    pub fn parse(pairs: &[String]) -> Result<Self> {
        let mut map = BTreeMap::new();
        for p in pairs {
            let (k, v) = p
                .split_once('=')
                .filter(|(k, v)| !k.is_empty() && !v.is_empty())
                .ok_or_else(|| Error::Config(format!("label mapping `{p}` is not of the form pred=PROP")))?;
            map.insert(k.to_string(), v.to_string());
        }
        Ok(Self(map))
    }

    /// Explicit mapping, else the predicate name itself, else the suffix after its last `_`.
    pub fn resolve(&self, predicate: &str, available: &BTreeMap<String, Vec<bool>>) -> Option<String> {
        if let Some(p) = self.0.get(predicate) {
            return available.contains_key(p).then(|| p.clone());
        }
        if available.contains_key(predicate) {
            return Some(predicate.to_string());
        }
        let suffix = predicate.rsplit_once('_')?.1;
        available.contains_key(suffix).then(|| suffix.to_string())
    }

    fn resolve_all(&self, predicate: &str, traces: &[LabeledTrace]) -> Result<String> {
        let first = traces.first().ok_or_else(|| Error::Config("no traces".into()))?;
        let prop = self.resolve(predicate, &first.labels).ok_or_else(|| {
            Error::Config(format!(
                "no ground-truth labels for predicate `{predicate}` in {} (use --label {predicate}=PROP)",
                first.name
            ))
        })?;
        for t in traces {
            if t.label(&prop).is_none() {
                return Err(Error::Config(format!("trace {} has no label `{prop}`", t.name)));
            }
        }
        Ok(prop)
    }
}

/// Predicates of the document whose threshold is an upper bound on distance.
pub fn calibratable_predicates(bound: &BoundSpec) -> Vec<String> {
    bound
        .document()
        .predicates
        .iter()
        .filter(|p| p.comparison.is_upper_bound())
        .map(|p| p.name.clone())
        .collect()
}

pub fn calibrate_predicate(
    bound: &BoundSpec,
    traces: &[LabeledTrace],
    predicate: &str,
    method: MethodName,
    alpha: f64,
    labels: &LabelMap,
) -> Result<CalibrationFile> {
    let (pred, _) = bound
        .predicate(predicate)
        .ok_or_else(|| etl_core::spec::BindError::UnknownPredicate(predicate.into()))?;
    if !pred.comparison.is_upper_bound() {
        return Err(Error::Config(format!(
            "predicate `{predicate}` uses `{}`; only `<=` and `<` predicates can be calibrated",
            pred.comparison
        )));
    }
    let prop = labels.resolve_all(predicate, traces)?;
    let per_trace: Vec<Vec<CalibrationSample>> = traces
        .par_iter()
        .map(|t| -> Result<Vec<CalibrationSample>> {
            let scored = bound.score_predicates(&[predicate], &t.trace)?;
            let gt = t.label(&prop).expect("checked");
            Ok(scored.scores(0).iter().zip(gt).map(|(d, y)| CalibrationSample::new(*d, *y)).collect())
        })
        .collect::<Result<_>>()?;
    let frames = per_trace.iter().map(Vec::len).sum();
    let positives = per_trace.iter().flatten().filter(|s| s.label).count();
    let calib_err = |context: String| move |source: CalibrationError| Error::Calibration { context, source };

    let result = match method {
        MethodName::F1 => {
            let all: Vec<CalibrationSample> = per_trace.into_iter().flatten().collect();
            f1_optimal_threshold(&all).map_err(calib_err(format!("predicate {predicate}")))?
        }
        MethodName::Cp => {
            let scores = per_trace
                .iter()
                .zip(traces)
                .map(|(s, t)| hardest_positive(s).map_err(calib_err(format!("predicate {predicate}, trace {}", t.name))))
                .collect::<Result<Vec<f64>>>()?;
            conformal_threshold(&scores, alpha).map_err(calib_err(format!("predicate {predicate}")))?
        }
    };
    let diagnostics = Diagnostics {
        proposition: prop,
        spec_epsilon: pred.epsilon,
        traces: traces.len(),
        frames,
        positives,
        achieved_f1: result.achieved_f1,
        k: result.k,
        degenerate: result.degenerate,
    };
    Ok(CalibrationFile::new(predicate, &result, diagnostics))
}

pub fn calibration_path(out: &Path, predicate: &str) -> PathBuf {
    out.join("calibration").join(format!("{predicate}.json"))
}

/// Calibration files given directly or as directories of `.json` files.
pub fn load_calibrations(paths: &[PathBuf]) -> Result<Vec<CalibrationFile>> {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut entries: Vec<PathBuf> = fs::read_dir(p)
                .map_err(|e| Error::io(p, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|q| q.extension().is_some_and(|x| x == "json"))
                .collect();
            entries.sort();
            files.extend(entries);
        } else {
            files.push(p.clone());
        }
    }
    files.iter().map(|f| read_json(f)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRecord {
    pub predicate: String,
    pub spec_epsilon: f64,
    pub epsilon: f64,
    pub method: Option<MethodName>,
}

/// Overrides spec thresholds with calibrated ones; returns the threshold of every predicate.
pub fn apply_calibrations(bound: &mut BoundSpec, cals: &[CalibrationFile]) -> Result<Vec<ThresholdRecord>> {
    let mut applied: BTreeMap<&str, &CalibrationFile> = BTreeMap::new();
    for c in cals {
        if applied.insert(&c.predicate, c).is_some() {
            return Err(Error::Config(format!("more than one calibration for predicate `{}`", c.predicate)));
        }
    }
    let mut records = Vec::new();
    let names: Vec<String> = bound.document().predicates.iter().map(|p| p.name.clone()).collect();
    if let Some(name) = applied.keys().find(|a| !names.iter().any(|n| n == *a)) {
        return Err(etl_core::spec::BindError::UnknownPredicate((*name).to_string()).into());
    }
    for name in names {
        let spec_epsilon = bound.predicate(&name).expect("declared").0.epsilon;
        let (epsilon, method) = match applied.get(name.as_str()) {
            Some(c) => {
                bound.set_epsilon(&name, c.epsilon)?;
                (c.epsilon, Some(c.method))
            }
            None => (spec_epsilon, None),
        };
        records.push(ThresholdRecord {
            predicate: name,
            spec_epsilon,
            epsilon,
            method,
        });
    }
    Ok(records)
}

/// Named specs to run: the requested ones in order, or all of them.
pub fn select_specs(doc: &SpecDocument, names: &[String]) -> Result<Vec<(String, Formula)>> {
    if names.is_empty() {
        return Ok(doc.specs.iter().map(|s| (s.name.clone(), s.formula.clone())).collect());
    }
    names
        .iter()
        .map(|n| {
            doc.spec(n)
                .map(|f| (n.clone(), f.clone()))
                .ok_or_else(|| Error::UnknownSpec(format!("no spec named `{n}`")))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub seed: u64,
    pub spec: PathBuf,
    pub traces: PathBuf,
    pub thresholds: Vec<ThresholdRecord>,
}

/// Per-step monitor output of one trace under one spec.
#[derive(Debug, Clone, PartialEq)]
pub struct MonitorOutput {
    pub summary: MonitorSummary,
    pub lines: Vec<MonitorLine>,
}

pub fn monitor_trace(bound: &BoundSpec, trace: &LabeledTrace, spec: &str, f: &Formula) -> Result<MonitorOutput> {
    let mut m = EmbeddingMonitor::new(bound, f)?;
    let mut lines = Vec::with_capacity(trace.len());
    for z in trace.trace.embeddings() {
        lines.push(MonitorLine::from(&m.step(z)?));
    }
    let first_alert = lines.iter().position(|l| l.verdict < 0);
    Ok(MonitorOutput {
        summary: MonitorSummary {
            trace: trace.name.clone(),
            spec: spec.to_string(),
            steps: lines.len(),
            final_verdict: lines.last().map_or(1, |l| l.verdict),
            first_alert,
        },
        lines,
    })
}

/// Runs every spec over every trace; writes `monitor/<trace>/<spec>.jsonl` and
/// `monitor/summary.json` under `out`.
pub fn monitor(
    bound: &BoundSpec,
    traces: &[LabeledTrace],
    specs: &[(String, Formula)],
    out: &Path,
) -> Result<Vec<MonitorOutput>> {
    let outputs: Vec<MonitorOutput> = traces
        .par_iter()
        .map(|t| {
            specs
                .iter()
                .map(|(name, f)| {
                    let o = monitor_trace(bound, t, name, f)?;
                    let mut text = String::new();
                    for l in &o.lines {
                        text.push_str(&serde_json::to_string(l).expect("serializable"));
                        text.push('\n');
                    }
                    write_file(&out.join("monitor").join(&t.name).join(format!("{name}.jsonl")), text.as_bytes())?;
                    Ok(o)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let summaries: Vec<&MonitorSummary> = outputs.iter().map(|o| &o.summary).collect();
    write_json(&out.join("monitor").join("summary.json"), &summaries)?;
    Ok(outputs)
}

struct TraceEval {
    etl: VerdictTrace,
    gt: VerdictTrace,
    etl_times: Option<SubgoalTimes>,
    gt_times: Option<SubgoalTimes>,
    plot: String,
}

fn evaluate_trace(
    bound: &BoundSpec,
    t: &LabeledTrace,
    f: &Formula,
    gt_formula: &Formula,
    atoms: &[&str],
    props: &BTreeMap<String, String>,
) -> Result<TraceEval> {
    let scored = bound.score_predicates(atoms, &t.trace)?;
    let MonitorRun { verdicts: etl, .. } = IncrementalMonitor::run(f, &scored)?;
    let table = PropositionTable::new(t.labels.iter().map(|(k, v)| (k.clone(), v.clone())).collect())?;
    let gt = gt_monitor(gt_formula, &table)?;
    if etl.len() != gt.len() {
        return Err(Error::Config(format!("trace {}: verdict lengths differ", t.name)));
    }

    let (etl_times, gt_times) = match f.sequential_subgoals() {
        Some((a, b)) => {
            let etl_first = |p: &str| {
                let i = scored.atom_index(p).expect("scored");
                first_satisfaction((0..scored.len()).map(|k| scored.holds(i, k)))
            };
            let gt_first = |p: &str| first_satisfaction(t.label(&props[p]).expect("checked").iter().copied());
            (
                Some(SubgoalTimes {
                    first: etl_first(a),
                    second: etl_first(b),
                }),
                Some(SubgoalTimes {
                    first: gt_first(a),
                    second: gt_first(b),
                }),
            )
        }
        None => (None, None),
    };

    let mut rows = Vec::with_capacity(t.len() * atoms.len());
    for k in 0..t.len() {
        for (i, a) in atoms.iter().enumerate() {
            rows.push(PlotRow {
                t: k,
                predicate: a,
                delta: scored.score(i, k),
                epsilon: scored.epsilon(i),
                etl_verdict: etl.0[k].sign(),
                gt_verdict: gt.0[k].sign(),
            });
        }
    }
    Ok(TraceEval {
        etl,
        gt,
        etl_times,
        gt_times,
        plot: plot_csv(&rows),
    })
}

/// Compares ETL and ground-truth verdicts for each spec. Writes `metrics/<spec>.json`,
/// `metrics/<spec>_confusion.csv`, `metrics/summary.json` and `plots/<spec>/<trace>.csv`.
pub fn evaluate(
    bound: &BoundSpec,
    traces: &[LabeledTrace],
    specs: &[(String, Formula)],
    labels: &LabelMap,
    out: &Path,
) -> Result<Vec<SpecMetrics>> {
    let mut all = Vec::new();
    for (name, f) in specs {
        let atoms: Vec<&str> = f.atoms();
        let mut props = BTreeMap::new();
        for a in &atoms {
            props.insert(a.to_string(), labels.resolve_all(a, traces)?);
        }
        let gt_formula = f.map_atoms(&mut |a| props[a].clone());

        let evals: Vec<TraceEval> = traces
            .par_iter()
            .map(|t| evaluate_trace(bound, t, f, &gt_formula, &atoms, &props))
            .collect::<Result<_>>()?;
        for (t, e) in traces.iter().zip(&evals) {
            write_file(&out.join("plots").join(name).join(format!("{}.csv", t.name)), e.plot.as_bytes())?;
        }

        let etl: Vec<VerdictTrace> = evals.iter().map(|e| e.etl.clone()).collect();
        let gt: Vec<VerdictTrace> = evals.iter().map(|e| e.gt.clone()).collect();
        let frames = frame_metrics(&etl, &gt)?;
        let episodes = episode_metrics(&etl, &gt)?;
        let ordering = if f.sequential_subgoals().is_some() {
            let e: Vec<SubgoalTimes> = evals.iter().map(|e| e.etl_times.expect("sequential")).collect();
            let g: Vec<SubgoalTimes> = evals.iter().map(|e| e.gt_times.expect("sequential")).collect();
            Some(ordering_accuracy(&e, &g)?)
        } else {
            None
        };

        let metrics = SpecMetrics {
            spec: name.clone(),
            formula: f.to_string(),
            ground_truth: gt_formula.to_string(),
            traces: traces.len(),
            frames: (&frames).into(),
            episodes: (&episodes).into(),
            ordering: ordering.as_ref().map(Into::into),
        };
        write_json(&out.join("metrics").join(format!("{name}.json")), &metrics)?;
        let csv = confusion_csv(&[(name, "frames", &frames.confusion), (name, "episodes", &episodes.confusion)]);
        write_file(&out.join("metrics").join(format!("{name}_confusion.csv")), csv.as_bytes())?;
        all.push(metrics);
    }
    write_json(&out.join("metrics").join("summary.json"), &all)?;
    Ok(all)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_resolution() {
        let avail: BTreeMap<String, Vec<bool>> =
            [("A".to_string(), vec![]), ("near".to_string(), vec![])].into();
        let m = LabelMap::parse(&["goal=A".into()]).unwrap();
        assert_eq!(m.resolve("goal", &avail).as_deref(), Some("A"));
        assert_eq!(m.resolve("near", &avail).as_deref(), Some("near"));
        assert_eq!(m.resolve("near_A", &avail).as_deref(), Some("A"));
        assert_eq!(m.resolve("far_Z", &avail), None);
        assert!(LabelMap::parse(&["oops".into()]).is_err());
    }
}
