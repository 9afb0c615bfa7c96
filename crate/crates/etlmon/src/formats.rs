//! On-disk formats: target sets, trace files, manifests, calibration results, monitor output,
//! metrics and plot data.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use etl_core::calibration::{CalibrationResult, Method};
use etl_core::harness::{Confusion, MetricsReport, OrderingAccuracy, Scope};
use etl_core::monitor::StepOutput;
use etl_core::{Embedding, TargetSet, Trace};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// JSON has no infinities; an infinite threshold is stored as this value.
pub const INFINITE_EPSILON: f64 = 1e18;

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    write_file(path, text.as_bytes())
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    Ok(BufWriter::new(fs::File::create(path).map_err(|e| Error::io(path, e))?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSetFile {
    pub name: String,
    pub embeddings: Vec<Vec<f64>>,
}

impl From<&TargetSet> for TargetSetFile {
    fn from(t: &TargetSet) -> Self {
        Self {
            name: t.name().to_string(),
            embeddings: t.embeddings().iter().map(|e| e.values().to_vec()).collect(),
        }
    }
}

pub fn read_target_set(path: &Path) -> Result<TargetSet> {
    let file: TargetSetFile = read_json(path)?;
    let rows = file
        .embeddings
        .into_iter()
        .map(Embedding::new)
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Error::format(path, e.to_string()))?;
    TargetSet::new(file.name, rows).map_err(|e| Error::format(path, e.to_string()))
}

pub fn write_target_set(path: &Path, set: &TargetSet) -> Result<()> {
    write_json(path, &TargetSetFile::from(set))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceLine {
    pub t: usize,
    pub z: Vec<f64>,
    #[serde(default)]
    pub labels: BTreeMap<String, bool>,
}

/// An embedding trace with optional ground-truth proposition columns.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledTrace {
    pub name: String,
    pub trace: Trace,
    pub labels: BTreeMap<String, Vec<bool>>,
}

impl LabeledTrace {
    pub fn len(&self) -> usize {
        self.trace.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn label(&self, prop: &str) -> Option<&[bool]> {
        self.labels.get(prop).map(Vec::as_slice)
    }
}

pub fn read_trace(path: &Path) -> Result<LabeledTrace> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut embeddings = Vec::new();
    let mut labels: BTreeMap<String, Vec<bool>> = BTreeMap::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: TraceLine =
            serde_json::from_str(&line).map_err(|e| Error::format(path, format!("line {}: {e}", n + 1)))?;
        let t = embeddings.len();
        if rec.t != t {
            return Err(Error::format(path, format!("line {}: expected t = {t}, found {}", n + 1, rec.t)));
        }
        if t == 0 {
            for k in rec.labels.keys() {
                labels.insert(k.clone(), Vec::new());
            }
        }
        if rec.labels.len() != labels.len() || !rec.labels.keys().all(|k| labels.contains_key(k)) {
            return Err(Error::format(path, format!("line {}: label set differs from the first line", n + 1)));
        }
        for (k, v) in rec.labels {
            labels.get_mut(&k).expect("checked").push(v);
        }
        embeddings.push(Embedding::new(rec.z).map_err(|e| Error::format(path, format!("line {}: {e}", n + 1)))?);
    }
    let trace = Trace::new(embeddings).map_err(|e| Error::format(path, e.to_string()))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(LabeledTrace { name, trace, labels })
}

pub fn write_trace(path: &Path, trace: &LabeledTrace) -> Result<()> {
    let mut w = create(path)?;
    for (t, z) in trace.trace.embeddings().iter().enumerate() {
        let line = TraceLine {
            t,
            z: z.values().to_vec(),
            labels: trace.labels.iter().map(|(k, v)| (k.clone(), v[t])).collect(),
        };
        serde_json::to_writer(&mut w, &line).expect("serializable");
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// A single trace file, or every `.jsonl` file of a directory in name order.
pub fn trace_paths(path: &Path) -> Result<Vec<PathBuf>> {
    if path.is_dir() {
        let mut out: Vec<PathBuf> = fs::read_dir(path)
            .map_err(|e| Error::io(path, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
            .collect();
        out.sort();
        Ok(out)
    } else if path.exists() {
        Ok(vec![path.to_path_buf()])
    } else {
        Err(Error::io(path, std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or directory")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub seed: u64,
    pub n: usize,
    pub split: f64,
    pub noise_sigma: f64,
    pub encoder_dim: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodName {
    F1,
    Cp,
}

impl From<Method> for MethodName {
    fn from(m: Method) -> Self {
        match m {
            Method::F1Optimal => MethodName::F1,
            Method::Conformal => MethodName::Cp,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub proposition: String,
    pub spec_epsilon: f64,
    pub traces: usize,
    pub frames: usize,
    pub positives: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub achieved_f1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub k: Option<usize>,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationFile {
    pub predicate: String,
    pub method: MethodName,
    pub epsilon: f64,
    pub alpha: Option<f64>,
    pub n_cal: usize,
    pub diagnostics: Diagnostics,
}

impl CalibrationFile {
    pub fn new(predicate: &str, result: &CalibrationResult, diagnostics: Diagnostics) -> Self {
        Self {
            predicate: predicate.to_string(),
            method: result.method.into(),
            epsilon: if result.epsilon.is_finite() {
                result.epsilon
            } else {
                INFINITE_EPSILON
            },
            alpha: result.alpha,
            n_cal: result.n_cal,
            diagnostics,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonitorLine {
    pub t: usize,
    pub verdict: i8,
    pub rho: f64,
}

impl From<&StepOutput> for MonitorLine {
    fn from(s: &StepOutput) -> Self {
        Self {
            t: s.t,
            verdict: s.verdict.sign(),
            rho: s.robustness,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorSummary {
    pub trace: String,
    pub spec: String,
    pub steps: usize,
    pub final_verdict: i8,
    pub first_alert: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionJson {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl From<&Confusion> for ConfusionJson {
    fn from(c: &Confusion) -> Self {
        Self {
            tp: c.tp,
            fp: c.fp,
            tn: c.tn,
            fn_: c.fn_,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsJson {
    pub scope: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub agreement: f64,
    pub confusion: ConfusionJson,
}

impl From<&MetricsReport> for MetricsJson {
    fn from(m: &MetricsReport) -> Self {
        Self {
            scope: match m.scope {
                Scope::Frames => "frames".into(),
                Scope::Episodes => "episodes".into(),
            },
            precision: m.precision,
            recall: m.recall,
            f1: m.f1,
            agreement: m.agreement,
            confusion: (&m.confusion).into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderingJson {
    pub accuracy: f64,
    pub matched: usize,
    pub episodes: usize,
}

impl From<&OrderingAccuracy> for OrderingJson {
    fn from(o: &OrderingAccuracy) -> Self {
        Self {
            accuracy: o.value,
            matched: o.matched,
            episodes: o.episodes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecMetrics {
    pub spec: String,
    pub formula: String,
    pub ground_truth: String,
    pub traces: usize,
    pub frames: MetricsJson,
    pub episodes: MetricsJson,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ordering: Option<OrderingJson>,
}

pub fn confusion_csv(rows: &[(&str, &str, &Confusion)]) -> String {
    let mut out = String::from("spec,scope,tp,fp,tn,fn\n");
    for (spec, scope, c) in rows {
        out.push_str(&format!("{spec},{scope},{},{},{},{}\n", c.tp, c.fp, c.tn, c.fn_));
    }
    out
}

/// One row per step and predicate.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotRow<'a> {
    pub t: usize,
    pub predicate: &'a str,
    pub delta: f64,
    pub epsilon: f64,
    pub etl_verdict: i8,
    pub gt_verdict: i8,
}

pub fn plot_csv(rows: &[PlotRow<'_>]) -> String {
    let mut out = String::from("t,predicate,delta,epsilon,etl_verdict,gt_verdict\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{:?},{:?},{},{}\n",
            r.t, r.predicate, r.delta, r.epsilon, r.etl_verdict, r.gt_verdict
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.jsonl");
        let trace = LabeledTrace {
            name: "t".into(),
            trace: Trace::new(vec![
                Embedding::new(vec![0.5, -1.0]).unwrap(),
                Embedding::new(vec![0.25, 1e-9]).unwrap(),
            ])
            .unwrap(),
            labels: [("A".to_string(), vec![false, true]), ("C".to_string(), vec![true, true])].into(),
        };
        write_trace(&path, &trace).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("{\"t\":0,\"z\":[0.5,-1.0],\"labels\":{\"A\":false,\"C\":true}}\n"));
        assert_eq!(read_trace(&path).unwrap(), trace);
    }

    #[test]
    fn trace_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.jsonl");
        fs::write(&path, "{\"t\":1,\"z\":[0.0]}\n").unwrap();
        assert!(matches!(read_trace(&path), Err(Error::Format { .. })));
        fs::write(&path, "{\"t\":0,\"z\":[0.0]}\n{\"t\":1,\"z\":[0.0, 1.0]}\n").unwrap();
        assert!(read_trace(&path).is_err());
        fs::write(&path, "").unwrap();
        assert!(read_trace(&path).is_err());
        assert!(matches!(read_trace(&dir.path().join("missing.jsonl")), Err(Error::Io { .. })));
    }

    #[test]
    fn target_set_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.json");
        let set = TargetSet::new("A", vec![Embedding::new(vec![1.0, 2.0]).unwrap()]).unwrap();
        write_target_set(&path, &set).unwrap();
        assert_eq!(read_target_set(&path).unwrap(), set);
        fs::write(&path, "{\"name\":\"A\",\"embeddings\":[[1.0],[1.0,2.0]]}").unwrap();
        assert!(read_target_set(&path).is_err());
        fs::write(&path, "{\"name\":\"A\",\"embeddings\":[]}").unwrap();
        assert!(read_target_set(&path).is_err());
    }

    #[test]
    fn calibration_file_shape() {
        let r = CalibrationResult {
            epsilon: f64::INFINITY,
            method: Method::Conformal,
            alpha: Some(0.1),
            n_cal: 3,
            achieved_f1: None,
            k: Some(4),
            degenerate: true,
        };
        let d = Diagnostics {
            proposition: "A".into(),
            spec_epsilon: 0.5,
            traces: 3,
            frames: 30,
            positives: 5,
            achieved_f1: None,
            k: Some(4),
            degenerate: true,
        };
        let f = CalibrationFile::new("near_A", &r, d);
        let v: serde_json::Value = serde_json::to_value(&f).unwrap();
        assert_eq!(v["method"], "cp");
        assert_eq!(v["epsilon"], 1e18);
        assert_eq!(v["diagnostics"]["degenerate"], true);
    }
}
