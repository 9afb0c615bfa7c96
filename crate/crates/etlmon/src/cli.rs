//! Command-line interface.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use etl_core::calibration::DEFAULT_ALPHA;

use crate::dataset::{make_dataset, DatasetConfig};
use crate::error::{Error, Result};
use crate::formats::{write_json, MethodName};
use crate::pipeline::{
    apply_calibrations, calibratable_predicates, calibrate_predicate, calibration_path, evaluate, load_bound,
    load_calibrations, load_spec, load_traces, monitor, select_specs, LabelMap, RunManifest, ThresholdRecord,
};

#[derive(Debug, Parser)]
#[command(name = "etlmon", version, about = "Runtime monitoring with embedding temporal logic")]
pub struct Cli {
    /// Master seed.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output directory (default: runs/run-<unix time>).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Specification file.
    #[arg(long, global = true)]
    pub spec: Option<PathBuf>,
    /// Trace file or directory of `.jsonl` traces.
    #[arg(long, global = true)]
    pub traces: Option<PathBuf>,
    /// Directory that target-set paths in the spec are resolved against.
    #[arg(long, global = true)]
    pub targets_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a spec and print it in canonical form.
    Parse {
        /// Spec file (alternative to --spec).
        file: Option<PathBuf>,
    },
    /// Generate the Dubins car dataset.
    Simulate(SimulateArgs),
    /// Calibrate predicate thresholds on labeled traces.
    Calibrate(CalibrateArgs),
    /// Run monitors over traces.
    Monitor(MonitorArgs),
    /// Compare monitor verdicts with ground truth.
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    /// Fraction of traces used for calibration.
    #[arg(long, default_value_t = 0.4)]
    pub split: f64,
    /// Standard deviation of the per-component embedding noise.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 16)]
    pub dim: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    F1,
    Cp,
}

impl From<MethodArg> for MethodName {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::F1 => MethodName::F1,
            MethodArg::Cp => MethodName::Cp,
        }
    }
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[arg(long, value_enum, default_value_t = MethodArg::F1)]
    pub method: MethodArg,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
    /// Predicate to calibrate; repeatable (default: every `<=`/`<` predicate).
    #[arg(long)]
    pub predicate: Vec<String>,
    /// Ground-truth proposition for a predicate, as `pred=PROP`; repeatable.
    #[arg(long)]
    pub label: Vec<String>,
}

#[derive(Debug, Args)]
pub struct MonitorArgs {
    /// Calibration file or directory; overrides spec thresholds. Repeatable.
    #[arg(long)]
    pub calibration: Vec<PathBuf>,
    /// Spec to run; repeatable (default: all).
    #[arg(long)]
    pub name: Vec<String>,
    /// Also print every step as a JSON line on stdout.
    #[arg(long)]
    pub stream: bool,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub calibration: Vec<PathBuf>,
    #[arg(long)]
    pub name: Vec<String>,
    #[arg(long)]
    pub label: Vec<String>,
}

fn required<'a>(v: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
    v.as_deref().ok_or_else(|| Error::Config(format!("{flag} is required")))
}

fn out_dir(cli: &Cli) -> PathBuf {
    cli.out.clone().unwrap_or_else(|| {
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        PathBuf::from("runs").join(format!("run-{secs}"))
    })
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var("ETLMON_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Error::Config(format!("ETLMON_THREADS must be a positive integer, got `{v}`")))?;
    // a pool may already exist when called more than once in one process
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    match &cli.command {
        Command::Parse { file } => cmd_parse(file.as_deref().or(cli.spec.as_deref()).ok_or_else(|| {
            Error::Config("a spec file is required (positional or --spec)".into())
        })?),
        Command::Simulate(a) => cmd_simulate(&cli, a),
        Command::Calibrate(a) => cmd_calibrate(&cli, a),
        Command::Monitor(a) => cmd_monitor(&cli, a),
        Command::Evaluate(a) => cmd_evaluate(&cli, a),
    }
}

fn cmd_parse(path: &Path) -> Result<()> {
    let doc = load_spec(path)?;
    if doc.is_empty() {
        eprintln!("warning: {} is an empty document", path.display());
        return Ok(());
    }
    print!("{doc}");
    if !doc.predicates.is_empty() {
        println!("\n{:<16} {:<8} {:<16} {:<5} {:<3} {}", "predicate", "dist", "targets", "agg", "cmp", "epsilon");
        for p in &doc.predicates {
            println!(
                "{:<16} {:<8} {:<16} {:<5} {:<3} {:?}",
                p.name,
                p.distance.keyword(),
                p.target,
                p.aggregation.keyword(),
                p.comparison.symbol(),
                p.epsilon
            );
        }
    }
    if !doc.specs.is_empty() {
        println!("\n{:<16} {:<6} {:<6} {}", "spec", "depth", "size", "core form");
        for s in &doc.specs {
            println!("{:<16} {:<6} {:<6} {}", s.name, s.formula.depth(), s.formula.size(), s.formula.desugar());
        }
    }
    Ok(())
}

fn cmd_simulate(cli: &Cli, a: &SimulateArgs) -> Result<()> {
    let out = out_dir(cli);
    let cfg = DatasetConfig {
        seed: cli.seed,
        n: a.n,
        split: a.split,
        noise_sigma: a.noise,
        encoder_dim: a.dim,
        ..DatasetConfig::default()
    };
    let s = make_dataset(&cfg, &out)?;
    println!(
        "wrote {} calibration and {} test traces ({} frames) to {}",
        s.n_cal,
        s.n_test,
        s.frames,
        out.display()
    );
    Ok(())
}

fn cmd_calibrate(cli: &Cli, a: &CalibrateArgs) -> Result<()> {
    if !(a.alpha > 0.0 && a.alpha < 1.0) {
        return Err(Error::Config(format!("--alpha must lie in (0, 1), got {}", a.alpha)));
    }
    let bound = load_bound(required(&cli.spec, "--spec")?, cli.targets_dir.as_deref())?;
    let traces = load_traces(required(&cli.traces, "--traces")?)?;
    let labels = LabelMap::parse(&a.label)?;
    let predicates = if a.predicate.is_empty() {
        calibratable_predicates(&bound)
    } else {
        a.predicate.clone()
    };
    let out = out_dir(cli);
    for p in &predicates {
        let file = calibrate_predicate(&bound, &traces, p, a.method.into(), a.alpha, &labels)?;
        if file.diagnostics.degenerate {
            eprintln!(
                "warning: {p}: rank k = {} exceeds {} calibration traces; threshold is unbounded",
                file.diagnostics.k.unwrap_or(0),
                file.n_cal
            );
        }
        let path = calibration_path(&out, p);
        write_json(&path, &file)?;
        match file.diagnostics.achieved_f1 {
            Some(f1) => println!("{p}: epsilon {:?} (F1 {f1:.4}) -> {}", file.epsilon, path.display()),
            None => println!(
                "{p}: epsilon {:?} (k = {}) -> {}",
                file.epsilon,
                file.diagnostics.k.unwrap_or(0),
                path.display()
            ),
        }
    }
    Ok(())
}

fn calibrated_bound(
    cli: &Cli,
    calibrations: &[PathBuf],
) -> Result<(etl_core::spec::BoundSpec, Vec<ThresholdRecord>)> {
    let mut bound = load_bound(required(&cli.spec, "--spec")?, cli.targets_dir.as_deref())?;
    let cals = load_calibrations(calibrations)?;
    let records = apply_calibrations(&mut bound, &cals)?;
    Ok((bound, records))
}

fn write_manifest(cli: &Cli, out: &Path, command: &str, thresholds: Vec<ThresholdRecord>) -> Result<()> {
    write_json(
        &out.join("run.json"),
        &RunManifest {
            command: command.into(),
            seed: cli.seed,
            spec: cli.spec.clone().unwrap_or_default(),
            traces: cli.traces.clone().unwrap_or_default(),
            thresholds,
        },
    )
}

fn cmd_monitor(cli: &Cli, a: &MonitorArgs) -> Result<()> {
    let (bound, records) = calibrated_bound(cli, &a.calibration)?;
    let specs = select_specs(bound.document(), &a.name)?;
    let traces = load_traces(required(&cli.traces, "--traces")?)?;
    let out = out_dir(cli);
    let outputs = monitor(&bound, &traces, &specs, &out)?;
    write_manifest(cli, &out, "monitor", records)?;
    for o in &outputs {
        if a.stream {
            for l in &o.lines {
                println!("{}", serde_json::to_string(l).expect("serializable"));
            }
        }
        let s = &o.summary;
        let alert = s.first_alert.map_or_else(|| "none".to_string(), |t| t.to_string());
        let line = format!(
            "{} {}: final verdict {:+}, first alert {alert}, {} steps",
            s.trace, s.spec, s.final_verdict, s.steps
        );
        if a.stream {
            eprintln!("{line}");
        } else {
            println!("{line}");
        }
    }
    Ok(())
}

fn cmd_evaluate(cli: &Cli, a: &EvaluateArgs) -> Result<()> {
    let (bound, records) = calibrated_bound(cli, &a.calibration)?;
    let specs = select_specs(bound.document(), &a.name)?;
    let traces = load_traces(required(&cli.traces, "--traces")?)?;
    let labels = LabelMap::parse(&a.label)?;
    let out = out_dir(cli);
    let metrics = evaluate(&bound, &traces, &specs, &labels, &out)?;
    write_manifest(cli, &out, "evaluate", records)?;
    for m in &metrics {
        print!(
            "{}: frames P {:.4} R {:.4} F1 {:.4} agreement {:.4}; episodes F1 {:.4} agreement {:.4}",
            m.spec,
            m.frames.precision,
            m.frames.recall,
            m.frames.f1,
            m.frames.agreement,
            m.episodes.f1,
            m.episodes.agreement
        );
        match &m.ordering {
            Some(o) => println!("; ordering {:.4} ({}/{})", o.accuracy, o.matched, o.episodes),
            None => println!(),
        }
    }
    Ok(())
}
