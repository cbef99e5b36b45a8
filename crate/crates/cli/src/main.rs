use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use spectemp::classify::Model;
use spectemp::fusion::Kind;
use spectemp::io::{load_dataset, write_dataset, write_json};
use spectemp::pipeline::{self, Artifact, Format, TauChoice, TauReport};
use spectemp::signal::TimeSeries;
use spectemp::{synth, Config};

/// Spectro-temporal feature pipeline for vibration records.
#[derive(Parser, Debug)]
#[command(name = "spectemp", version, about)]
struct Cli {
    /// JSON config file; missing keys take the built-in defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Root seed (overrides the config file).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads; defaults to all available cores.
    #[arg(long, global = true, env = "SPECTEMP_THREADS")]
    threads: Option<usize>,

    /// Encoding of tabular outputs.
    #[arg(long, global = true, default_value = "csv")]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate the synthetic five-class beam dataset.
    Gen(GenArgs),
    /// Per-signal descriptors, class centroids and overlap.
    Descriptors(StageArgs),
    /// Per-class interval selection and common intervals.
    Tau(TauArgs),
    /// Per-window spectral features and spectrograms.
    Features(FeatureArgs),
    /// Build one representation and write it as a dataset bundle.
    Build(BuildArgs),
    /// Cross-validate models on one or more representations.
    Run(RunArgs),
    /// Aggregate results into stability indices and a ranking.
    Report(ReportArgs),
}

#[derive(Args, Debug)]
struct GenArgs {
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Trials per class.
    #[arg(long)]
    trials: Option<usize>,
}

#[derive(Args, Debug)]
struct StageArgs {
    /// Dataset directory or manifest file.
    #[arg(long = "in")]
    input: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct TauArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Path of tau.json; tau_curves is written next to it.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Clone)]
struct TauSelect {
    /// common_best, common_knee or a step in seconds.
    #[arg(long, default_value = "common_knee")]
    tau: TauChoice,
    /// Reuse a tau.json instead of re-running the sweep.
    #[arg(long)]
    tau_file: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FeatureArgs {
    #[command(flatten)]
    stage: StageArgs,
    #[command(flatten)]
    tau: TauSelect,
}

#[derive(Args, Debug)]
struct BuildArgs {
    #[command(flatten)]
    stage: StageArgs,
    #[arg(long)]
    method: Kind,
    #[command(flatten)]
    tau: TauSelect,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    stage: StageArgs,
    /// Representations to evaluate, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "hstf")]
    method: Vec<Kind>,
    #[command(flatten)]
    tau: TauSelect,
    /// Models to fit, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "softmax,knn,gnb")]
    models: Vec<Model>,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// One or more results.csv files.
    #[arg(long = "in", required = true, num_args = 1..)]
    input: Vec<PathBuf>,
    /// Output directory for stability.json.
    #[arg(long)]
    out: PathBuf,
}

/// An error caused by the user's input rather than by the run itself.
#[derive(Debug)]
struct Invalid(String);

impl std::fmt::Display for Invalid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<Invalid>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<spectemp::Error>() {
            return if e.is_validation() { 2 } else { 1 };
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn load_config(cli: &Cli) -> Result<Config> {
    let mut cfg = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Config::from_json(&text).map_err(|e| Invalid(format!("{}: {e}", p.display())))?
        }
        None => Config::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Command::Gen(g) = &cli.command {
        if let Some(seed) = cli.seed {
            cfg.synth.seed = seed;
        }
        if let Some(n) = g.trials {
            cfg.synth.n_trials = n;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Invalid("--threads must be positive".into()).into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let cfg = load_config(&cli)?;
    let prov = cfg.provenance();
    let format = cli.format;

    match cli.command {
        Command::Gen(args) => {
            let signals = synth::generate(&cfg.synth)?;
            write_dataset(&args.out, &signals, Some(&prov))?;
            write_json(
                args.out.join("genconfig.json"),
                &Artifact {
                    provenance: prov,
                    body: &cfg.synth,
                },
            )?;
            println!("wrote {} signals to {}", signals.len(), args.out.display());
        }
        Command::Descriptors(args) => {
            let signals = load(&args.input)?;
            let report = pipeline::descriptor_report(&signals, &cfg)?;
            pipeline::write_descriptors(&args.out, &report, format, &prov)?;
            if let Some((a, b)) = report.radar.closest_pair {
                println!(
                    "closest classes: {} / {}; aggregate overlap {:.4}",
                    pipeline::class_name(a),
                    pipeline::class_name(b),
                    report.radar.overlap.aggregate
                );
            }
        }
        Command::Tau(args) => {
            let signals = load(&args.input)?;
            let report = pipeline::tau_report(&signals, &cfg)?;
            pipeline::write_tau(&args.out, &report, format, &prov)?;
            for c in &report.classes {
                println!(
                    "{:<10} f*={:7.3} Hz  nyq={:.5} s  best={:.5} s  knee={:.5} s  S*={:.3}",
                    c.name, c.critical_freq_hz, c.nyquist_dt_s, c.best_tau_s, c.knee_tau_s, c.s_star
                );
            }
            println!(
                "common best {:.5} s, common knee {:.5} s",
                report.tau_common_best, report.tau_common_knee
            );
        }
        Command::Features(args) => {
            let signals = load(&args.stage.input)?;
            let (tau, floor) = resolve_tau(&signals, &cfg, &args.tau)?;
            let report = pipeline::feature_report(&signals, tau, &cfg, floor)?;
            pipeline::write_features(&args.stage.out, &report, format, &prov)?;
            warn(&report.summary.warnings);
            println!(
                "{} windows at tau {:.5} s (L = {}), {} z6 fallbacks",
                report.windows.len(),
                tau,
                report.summary.window_len,
                report.summary.z6_fallbacks
            );
        }
        Command::Build(args) => {
            let signals = load(&args.stage.input)?;
            let (tau, floor) = if args.method == Kind::Base {
                (None, None)
            } else {
                let (t, f) = resolve_tau(&signals, &cfg, &args.tau)?;
                (Some(t), f)
            };
            let rep = pipeline::build_representation(&signals, args.method, tau, &cfg, floor)?;
            warn(&rep.warnings);
            pipeline::write_bundle(&args.stage.out, &rep, &cfg, format)?;
            let (m, d) = rep.shape();
            println!("{}: {} samples of {m} x {d}", rep.method_label(), rep.samples.len());
        }
        Command::Run(args) => {
            if args.method.is_empty() || args.models.is_empty() {
                return Err(Invalid("need at least one method and one model".into()).into());
            }
            let signals = load(&args.stage.input)?;
            let needs_tau = args.method.iter().any(|k| *k != Kind::Base);
            let (tau, floor) = if needs_tau {
                let (t, f) = resolve_tau(&signals, &cfg, &args.tau)?;
                (Some(t), f)
            } else {
                (None, None)
            };
            let mut reps = Vec::new();
            for &kind in &args.method {
                let rep = pipeline::build_representation(&signals, kind, tau, &cfg, floor)?;
                warn(&rep.warnings);
                reps.push(rep);
            }
            let results = pipeline::evaluate(&reps, &args.models, &cfg)?;
            let doc = pipeline::write_run(&args.stage.out, &results, format, &prov)?;
            for (model, method, mean, std) in spectemp::classify::fold_means(&results) {
                println!(
                    "{model:<8} {method:<14} acc {:.3} ± {:.3}  f1 {:.3} ± {:.3}  auc {:.3} ± {:.3}",
                    mean[0], std[0], mean[1], std[1], mean[2], std[2]
                );
            }
            println!("{}", pipeline::ranking_line(&doc));
        }
        Command::Report(args) => {
            let mut results = Vec::new();
            for p in &args.input {
                results.extend(pipeline::read_results(p)?);
            }
            let doc = pipeline::stability_doc(&results)?;
            write_json(
                args.out.join("stability.json"),
                &Artifact {
                    provenance: prov,
                    body: &doc,
                },
            )?;
            for m in &doc.methods {
                println!(
                    "{:<14} BS acc {}  f1 {}  auc {}",
                    m.method,
                    fmt_bs(m.accuracy.balanced_score),
                    fmt_bs(m.macro_f1.balanced_score),
                    fmt_bs(m.macro_auc.balanced_score)
                );
            }
            println!("{}", pipeline::ranking_line(&doc));
        }
    }
    Ok(())
}

fn load(path: &Path) -> Result<Vec<TimeSeries>> {
    if !path.exists() {
        bail!(Invalid(format!("{} does not exist", path.display())));
    }
    load_dataset(path).with_context(|| format!("loading {}", path.display()))
}

/// The interval to build at and the Nyquist floor, when one is known.
fn resolve_tau(signals: &[TimeSeries], cfg: &Config, sel: &TauSelect) -> Result<(f64, Option<f64>)> {
    let report: Option<TauReport> = match (&sel.tau_file, sel.tau.needs_report()) {
        (Some(p), _) => Some(pipeline::read_tau(p).with_context(|| format!("reading {}", p.display()))?),
        (None, true) => Some(pipeline::tau_report(signals, cfg)?),
        (None, false) => None,
    };
    let tau = match (sel.tau, &report) {
        (TauChoice::Seconds(t), _) => t,
        (choice, Some(r)) => r.resolve(choice),
        (_, None) => unreachable!("common choices always load a report"),
    };
    Ok((tau, report.map(|r| r.nyquist_floor_s)))
}

fn warn(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn fmt_bs(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".into(), |b| format!("{b:.3}"))
}
