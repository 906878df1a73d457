use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use halting::harness::{
    compare_ensembles, preset, read_records, reference_row, run_experiment, summarize, write_outputs, write_text,
    AlgorithmConfig, ExperimentConfig, InnerDimension, Summary, DEFAULT_ALPHA, PRESET_NAMES,
};
use halting::stats::{moment_table_csv, MomentRow, GUMBEL_KURTOSIS, GUMBEL_SKEWNESS};
use halting::{Error, Result};

#[derive(Parser)]
#[command(name = "halting", version, about = "Halting-time fluctuation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Conjugate gradient on random Wishart systems.
    RunCg(RunArgs),
    /// Gradient descent on the 3-spin spherical spin glass.
    RunSpinglass(RunArgs),
    /// Minibatch SGD on a fully connected network.
    RunDeepnet(RunArgs),
    /// Summarize an existing records.csv.
    Analyze(AnalyzeArgs),
    /// Pairwise KS comparison of normalized halting times.
    Compare(CompareArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Named preset, used when no --config is given.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    /// Matrix size, spin count, or training-set size.
    #[arg(long)]
    n: Option<usize>,
    /// Inner dimension of X: an integer, `critical` or `square` (CG only).
    #[arg(long)]
    m: Option<String>,
    /// Stopping threshold.
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    ensemble: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// MNIST images in IDX format (deep net only).
    #[arg(long)]
    images: Option<PathBuf>,
    /// MNIST labels in IDX format (deep net only).
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Record per-trial wall time; makes records.csv non-reproducible.
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// records.csv to summarize.
    records: PathBuf,
    /// Output directory; defaults to the directory holding the records.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    /// Two or more records.csv files.
    #[arg(required = true, num_args = 2..)]
    records: Vec<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    /// Directory for compare.csv.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq)]
enum Kind {
    Cg,
    SpinGlass,
    DeepNet,
}

impl Kind {
    fn default_preset(self) -> &'static str {
        match self {
            Kind::Cg => "cg-ci",
            Kind::SpinGlass => "spinglass-ci",
            Kind::DeepNet => "deepnet-ci",
        }
    }

    fn matches(self, a: &AlgorithmConfig) -> bool {
        matches!(
            (self, a),
            (Kind::Cg, AlgorithmConfig::Cg(_))
                | (Kind::SpinGlass, AlgorithmConfig::SpinGlass(_))
                | (Kind::DeepNet, AlgorithmConfig::DeepNet(_))
        )
    }
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn parse_inner(s: &str) -> Result<InnerDimension> {
    match s {
        "critical" => Ok(InnerDimension::CRITICAL),
        "square" => Ok(InnerDimension::SQUARE),
        _ => s
            .parse()
            .map(InnerDimension::Explicit)
            .map_err(|_| config_err(format!("--m expects an integer, `critical` or `square`, got {s:?}"))),
    }
}

fn build_config(kind: Kind, args: &RunArgs) -> Result<ExperimentConfig> {
    let mut cfg = if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        ExperimentConfig::from_json(&text)?
    } else {
        let name = args.preset.as_deref().unwrap_or(kind.default_preset());
        preset(name)
            .ok_or_else(|| config_err(format!("unknown preset {name:?}; known: {}", PRESET_NAMES.join(", "))))?
    };
    if !kind.matches(&cfg.algorithm) {
        return Err(config_err(
            "configuration is for a different algorithm than the subcommand",
        ));
    }
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if args.threads.is_some() {
        cfg.threads = args.threads;
    }
    if args.timing {
        cfg.record_timing = true;
    }
    let ensemble_err = |e: Error| config_err(e.to_string());
    let not_for = |flag: &str| Err(config_err(format!("{flag} does not apply to this algorithm")));
    match &mut cfg.algorithm {
        AlgorithmConfig::Cg(c) => {
            if args.images.is_some() || args.labels.is_some() {
                return not_for("--images/--labels");
            }
            if let Some(n) = args.n {
                c.n = n;
            }
            if let Some(m) = &args.m {
                c.m = parse_inner(m)?;
            }
            if let Some(eps) = args.eps {
                c.eps = eps;
            }
            if let Some(e) = &args.ensemble {
                c.ensemble = e.parse().map_err(ensemble_err)?;
            }
            if args.max_iter.is_some() {
                c.max_iter = args.max_iter;
            }
        }
        AlgorithmConfig::SpinGlass(s) => {
            if args.m.is_some() {
                return not_for("--m");
            }
            if args.images.is_some() || args.labels.is_some() {
                return not_for("--images/--labels");
            }
            if let Some(n) = args.n {
                s.n = n;
            }
            if let Some(eps) = args.eps {
                s.eps = eps;
            }
            if let Some(e) = &args.ensemble {
                s.ensemble = e.parse().map_err(ensemble_err)?;
            }
            if let Some(cap) = args.max_iter {
                s.max_iter = cap;
            }
        }
        AlgorithmConfig::DeepNet(d) => {
            if args.m.is_some() {
                return not_for("--m");
            }
            if let Some(n) = args.n {
                d.samples = n;
            }
            if let Some(eps) = args.eps {
                d.stop = d.stop.with_threshold(eps);
            }
            if let Some(e) = &args.ensemble {
                d.ensemble = e.parse().map_err(ensemble_err)?;
            }
            if let Some(cap) = args.max_iter {
                d.cap = cap;
            }
            if let Some(p) = &args.images {
                d.images_path = p.clone();
            }
            if let Some(p) = &args.labels {
                d.labels_path = p.clone();
            }
        }
    }
    if let Some(out) = &args.out {
        cfg.out_dir = Some(out.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn print_summary(model: &str, ensemble: &str, s: &Summary) {
    let m = &s.moments;
    println!(
        "{model} / {ensemble}: converged {}/{}  mean {:.3}  std {:.3}  skewness {:.3}  kurtosis {:.3}",
        m.count, s.total, m.mean, m.std, m.skewness, m.kurtosis
    );
    if let Some(d) = s.deltas {
        println!(
            "  vs reference: mean {:+.3}  std {:+.3}  skewness {:+.3}  kurtosis {:+.3}",
            d.mean, d.std, d.skewness, d.kurtosis
        );
    }
    println!("  Gumbel stand-in reference: skewness {GUMBEL_SKEWNESS:.3}  kurtosis {GUMBEL_KURTOSIS:.3}");
}

fn run(kind: Kind, args: &RunArgs) -> Result<ExitCode> {
    let cfg = build_config(kind, args)?;
    let dir = cfg
        .out_dir
        .clone()
        .unwrap_or_else(|| Path::new("out").join(&cfg.experiment_id));
    let records = run_experiment(&cfg)?;
    let model = cfg.algorithm.model_name();
    let ensemble = cfg.algorithm.ensemble_name();
    match write_outputs(&dir, &cfg, &records)? {
        Some(_) => {
            let key = cfg.algorithm.reference_key();
            let s = summarize(&records, key.and_then(|(m, e)| reference_row(&m, &e)))?;
            print_summary(&model, &ensemble, &s);
        }
        None => println!("{model} / {ensemble}: too few converged trials to summarize"),
    }
    let flagged = records.iter().filter(|r| !r.converged).count();
    let fraction = flagged as f64 / records.len() as f64;
    println!(
        "flagged {flagged}/{} trials; outputs in {}",
        records.len(),
        dir.display()
    );
    if fraction > cfg.max_flagged_fraction {
        eprintln!(
            "flagged fraction {fraction:.4} exceeds the allowed {:.4}",
            cfg.max_flagged_fraction
        );
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

/// Model and ensemble names, plus the reference key, from the
/// `config.json` written next to the records if there is one.
fn labels_for(records: &Path) -> (String, String, Option<(String, String)>) {
    let cfg = records
        .parent()
        .map(|d| d.join("config.json"))
        .and_then(|p| std::fs::read_to_string(p).ok())
        .and_then(|t| ExperimentConfig::from_json(&t).ok());
    match cfg {
        Some(c) => (
            c.algorithm.model_name(),
            c.algorithm.ensemble_name(),
            c.algorithm.reference_key(),
        ),
        None => (records.display().to_string(), "unknown".into(), None),
    }
}

fn analyze(args: &AnalyzeArgs) -> Result<ExitCode> {
    let records = read_records(&args.records)?;
    let (model, ensemble, key) = labels_for(&args.records);
    let s = summarize(&records, key.and_then(|(m, e)| reference_row(&m, &e)))?;
    let dir = args
        .out
        .clone()
        .or_else(|| args.records.parent().map(Path::to_path_buf))
        .unwrap_or_default();
    halting::harness::write_summary(&dir, &model, &ensemble, &s)?;
    print_summary(&model, &ensemble, &s);
    Ok(ExitCode::SUCCESS)
}

fn compare(args: &CompareArgs) -> Result<ExitCode> {
    let mut samples = Vec::new();
    let mut rows = Vec::new();
    for path in &args.records {
        let s = summarize(&read_records(path)?, None)?;
        let (model, ensemble, _) = labels_for(path);
        rows.push(MomentRow {
            model,
            ensemble,
            summary: s.moments,
        });
        samples.push((path.display().to_string(), s.normalized));
    }
    print!("{}", moment_table_csv(&rows));
    let mut csv = String::from("a,b,ks,threshold,skewness_delta,kurtosis_delta,verdict\n");
    for i in 0..samples.len() {
        for j in i + 1..samples.len() {
            let r = compare_ensembles(&samples[i].1, &samples[j].1, args.alpha)?;
            println!(
                "{} vs {}: KS {:.4} (threshold {:.4})  dskew {:+.3}  dkurt {:+.3}  => {}",
                samples[i].0, samples[j].0, r.ks, r.threshold, r.skewness_delta, r.kurtosis_delta, r.verdict
            );
            csv.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                samples[i].0, samples[j].0, r.ks, r.threshold, r.skewness_delta, r.kurtosis_delta, r.verdict
            ));
        }
    }
    if let Some(dir) = &args.out {
        write_text(&dir.join("compare.csv"), &csv)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::RunCg(a) => run(Kind::Cg, a),
        Command::RunSpinglass(a) => run(Kind::SpinGlass, a),
        Command::RunDeepnet(a) => run(Kind::DeepNet, a),
        Command::Analyze(a) => analyze(a),
        Command::Compare(a) => compare(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
