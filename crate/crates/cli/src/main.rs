//! `fidmoo`: train, evaluate and compare black-box/surrogate pairs from the command line.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fidelity_moo::data::DatasetSchema;
use fidelity_moo::harness::{
    emit_report, emit_scatter, pareto_scan, pareto_scan_spec, run_experiment, run_single,
    ExperimentSpec, GnfSpec, ReportFormat,
};
use fidelity_moo::{Checkpoint, Dataset, Error, Method, Result, TrainConfig};

#[derive(Parser)]
#[command(
    name = "fidmoo",
    version,
    about = "Joint black-box / linear-surrogate training with MGDA"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one method on one dataset.
    Train(TrainArgs),
    /// Run a method × seed grid from a spec file.
    Experiment(ExperimentArgs),
    /// Grid-search weights 0.1..0.9 plus MOO, with dominance flags.
    ParetoScan(ParetoArgs),
    /// Print the surrogate's feature importance.
    Explain(ExplainArgs),
    /// Neighbourhood fidelity of a trained black-box under local surrogates.
    Gnf(GnfArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Dataset schema file (TOML).
    #[arg(long)]
    dataset: PathBuf,
    /// moo, stl, uni, gs:<alpha>, rnd, linear, jsep, jdist.
    #[arg(long, default_value = "moo")]
    method: Method,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// TrainConfig fields in TOML.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    epochs: Option<usize>,
    /// Comma-separated hidden layer widths, e.g. 32,32.
    #[arg(long, value_delimiter = ',')]
    hidden: Option<Vec<usize>>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Directory for report.json and checkpoint.json.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    spec: PathBuf,
    /// Overrides the spec's out_dir.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: ReportFormat,
}

#[derive(Args)]
struct ParetoArgs {
    #[arg(long, conflicts_with = "dataset")]
    spec: Option<PathBuf>,
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: ReportFormat,
}

#[derive(Args)]
struct ExplainArgs {
    /// A checkpoint written by `train`; otherwise trains from --dataset.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[arg(long, required_unless_present = "checkpoint")]
    dataset: Option<PathBuf>,
    #[arg(long, default_value = "moo")]
    method: Method,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    epochs: Option<usize>,
}

#[derive(Args)]
struct GnfArgs {
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, default_value_t = 50)]
    points: usize,
    #[arg(long, default_value_t = 10)]
    count: usize,
    #[arg(long, default_value_t = 0.1)]
    sigma2: f64,
    /// Use the trained global surrogate instead of per-instance fits.
    #[arg(long)]
    global: bool,
}

fn load_dataset(path: &Path) -> Result<Dataset> {
    let schema = DatasetSchema::from_file(path)?;
    schema.load(path.parent().unwrap_or(Path::new(".")))
}

fn build_config(run: &RunArgs) -> Result<TrainConfig> {
    let mut cfg = match &run.config {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            TrainConfig::from_toml(&text)?
        }
        None => TrainConfig::default(),
    };
    cfg = cfg.with_method(run.method).with_seed(run.seed);
    if let Some(e) = run.epochs {
        cfg.max_epochs = e;
    }
    if let Some(h) = &run.hidden {
        cfg.hidden = h.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn cmd_train(args: &TrainArgs) -> Result<u8> {
    let ds = load_dataset(&args.run.dataset)?;
    let cfg = build_config(&args.run)?;
    let out = run_single(&ds, &cfg, None)?;
    let fm = &out.report.final_metrics;
    println!(
        "{} seed={} epochs={} stopped={:?} {}={:.6} gf={}",
        out.report.method,
        cfg.seed,
        out.report.epochs_run,
        out.report.stopped_reason,
        fm.task_metric_name,
        fm.task_metric,
        fm.gf.map_or("-".into(), |g| format!("{g:.6e}"))
    );
    if let Some(dir) = &args.out {
        write(&dir.join("report.json"), &(out.report.to_json()? + "\n"))?;
        let ck = Checkpoint::new(&out.model, out.surrogate.as_ref(), &ds.feature_names);
        write(&dir.join("checkpoint.json"), &(ck.to_json()? + "\n"))?;
    }
    Ok(0)
}

fn cmd_experiment(args: &ExperimentArgs) -> Result<u8> {
    let spec = ExperimentSpec::from_file(&args.spec)?;
    let base = args.spec.parent().unwrap_or(Path::new("."));
    let outcome = run_experiment(&spec, base)?;
    let report = emit_report(&outcome.table, args.format)?;
    print!("{report}");
    let out_dir = args
        .out
        .clone()
        .or_else(|| spec.out_dir.as_ref().map(|d| base.join(d)));
    if let Some(dir) = out_dir {
        write(
            &dir.join(format!("results.{}", args.format.extension())),
            &report,
        )?;
        for run in &outcome.runs {
            let name = format!("{}_seed{}.json", run.method.replace(':', "_"), run.seed);
            write(
                &dir.join("runs").join(name),
                &(serde_json::to_string_pretty(run)? + "\n"),
            )?;
        }
    }
    for run in outcome.runs.iter().filter(|r| r.error.is_some()) {
        eprintln!(
            "run {} seed {} failed: {}",
            run.method,
            run.seed,
            run.error.as_deref().unwrap_or("")
        );
    }
    Ok(outcome.failed_runs().min(u8::MAX as usize) as u8)
}

fn cmd_pareto(args: &ParetoArgs) -> Result<u8> {
    let points = match (&args.spec, &args.dataset) {
        (Some(spec_path), _) => {
            let spec = ExperimentSpec::from_file(spec_path)?;
            pareto_scan_spec(&spec, spec_path.parent().unwrap_or(Path::new(".")))?
        }
        (None, Some(ds_path)) => {
            let ds = load_dataset(ds_path)?;
            pareto_scan(&ds, &TrainConfig::default().with_seed(args.seed))?
        }
        (None, None) => {
            return Err(Error::Config(
                "pareto-scan needs --spec or --dataset".into(),
            ))
        }
    };
    let text = emit_scatter(&points, args.format)?;
    print!("{text}");
    if let Some(dir) = &args.out {
        write(
            &dir.join(format!("pareto.{}", args.format.extension())),
            &text,
        )?;
    }
    Ok(0)
}

fn cmd_explain(args: &ExplainArgs) -> Result<u8> {
    let (surrogate, names) = match (&args.checkpoint, &args.dataset) {
        (Some(path), _) => {
            let ck = Checkpoint::load(path)?;
            let g = ck
                .surrogate
                .clone()
                .ok_or_else(|| Error::Invalid("checkpoint holds no surrogate".into()))?;
            let names = if ck.feature_names.is_empty() {
                (0..g.dim()).map(|j| format!("x{j}")).collect()
            } else {
                ck.feature_names.clone()
            };
            (g, names)
        }
        (None, Some(ds_path)) => {
            let ds = load_dataset(ds_path)?;
            let mut cfg = TrainConfig::default()
                .with_method(args.method)
                .with_seed(args.seed);
            if let Some(e) = args.epochs {
                cfg.max_epochs = e;
            }
            let out = run_single(&ds, &cfg, None)?;
            let g = match out.surrogate {
                Some(g) => g,
                None => {
                    let layer = &out.model.layers()[0];
                    fidelity_moo::LinearSurrogate::new(layer.weight.row(0).to_vec(), layer.bias[0])?
                }
            };
            (g, ds.feature_names)
        }
        (None, None) => {
            return Err(Error::Config(
                "explain needs --checkpoint or --dataset".into(),
            ))
        }
    };
    print!("{}", surrogate.explain(&names)?.to_text());
    Ok(0)
}

fn cmd_gnf(args: &GnfArgs) -> Result<u8> {
    let ds = load_dataset(&args.run.dataset)?;
    let cfg = build_config(&args.run)?;
    let spec = GnfSpec {
        points: args.points,
        count: args.count,
        sigma2: args.sigma2,
        local: !args.global,
        ..GnfSpec::default()
    };
    let out = run_single(&ds, &cfg, Some(&spec))?;
    match out.report.final_metrics.gnf {
        Some(v) => println!("{} seed={} gnf={v:.6e}", out.report.method, cfg.seed),
        None => println!("{} seed={} gnf=-", out.report.method, cfg.seed),
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Train(a) => cmd_train(a),
        Command::Experiment(a) => cmd_experiment(a),
        Command::ParetoScan(a) => cmd_pareto(a),
        Command::Explain(a) => cmd_explain(a),
        Command::Gnf(a) => cmd_gnf(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
