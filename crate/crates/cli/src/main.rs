//! `slr`: cluster feature files, refine labels across epochs, run the
//! synthetic simulation and score labelings.
//!
//! Every command prints one JSON line on stdout. Diagnostics go to stderr.
//! Exit codes: 0 success, 1 usage or config error, 2 I/O error,
//! 3 invalid data.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use slr_core::clustering::{dbscan, hdbscan};
use slr_core::io::{self, FeatureFormat};
use slr_core::metrics::{self, noise_fraction};
use slr_core::refine::{
    harden_hdbscan, harden_max, normalize_projection, projection_matrix, refine_with_projection,
};
use slr_core::sim::plot::{line_chart_svg, Series};
use slr_core::sim::{
    run_simulation, AggregateSummary, Arm, RunReport, SimRun, M_ARI, M_CONSISTENCY,
};
use slr_core::{HardLabeling, RunConfig, SimConfig, SlrError};

#[derive(Parser)]
#[command(
    name = "slr",
    version,
    about = "Pseudo-label refinement across clustering epochs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    Dbscan,
    Hdbscan,
}

#[derive(Clone, Copy, ValueEnum)]
enum Harden {
    Hdbscan,
    Max,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Binary,
}

#[derive(Subcommand)]
enum Command {
    /// Cluster a feature file and write a label CSV.
    Cluster {
        #[arg(long)]
        input: PathBuf,
        /// Input format; inferred from the extension (.bin/.slrf = binary)
        /// when omitted.
        #[arg(long, value_enum)]
        format: Option<Format>,
        #[arg(long, value_enum)]
        algo: Algo,
        #[arg(long, required_if_eq("algo", "dbscan"), value_parser = positive)]
        eps: Option<f64>,
        #[arg(long, required_if_eq("algo", "dbscan"), value_parser = clap::value_parser!(u64).range(1..))]
        min_pts: Option<u64>,
        #[arg(long, default_value_t = 7, value_parser = clap::value_parser!(u64).range(2..))]
        min_cluster_size: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Refine the current epoch's labels with the previous epoch's.
    Refine {
        #[arg(long)]
        prev: PathBuf,
        #[arg(long)]
        curr: PathBuf,
        #[arg(long, default_value_t = 0.9, value_parser = unit_interval)]
        alpha: f64,
        #[arg(long, value_enum, default_value = "hdbscan")]
        harden: Harden,
        #[arg(long, default_value_t = 7, value_parser = clap::value_parser!(u64).range(2..))]
        min_cluster_size: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        soft_out: Option<PathBuf>,
    },
    /// Run the refinement and baseline arms on synthetic epoch streams.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Number of consecutive seeds, starting at the configured seed.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        seeds: u64,
        #[arg(long, default_value = "sim_out")]
        out_dir: PathBuf,
        /// Also write features, ground truth and per-epoch labels.
        #[arg(long)]
        dump_labels: bool,
    },
    /// Score predicted labels against reference labels.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        #[arg(long, default_value = "ari,nmi,purity", value_delimiter = ',')]
        metrics: Vec<String>,
    },
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v > 0.0 => Ok(v),
        _ => Err(format!("`{s}` is not a positive number")),
    }
}

fn unit_interval(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if (0.0..=1.0).contains(&v) => Ok(v),
        _ => Err(format!("`{s}` is not a number in [0, 1]")),
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<SlrError> for Failure {
    fn from(e: SlrError) -> Self {
        let code = match e {
            SlrError::Io { .. } => 2,
            SlrError::Config(_) | SlrError::InvalidParameter(_) => 1,
            SlrError::Parse { .. } | SlrError::Validation(_) | SlrError::LengthMismatch { .. } => 3,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type CmdResult = Result<Value, Failure>;

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure {
        code: 2,
        message: format!("I/O error on {}: {e}", path.display()),
    })
}

fn create_dir(path: &Path) -> Result<(), Failure> {
    fs::create_dir_all(path).map_err(|e| Failure {
        code: 2,
        message: format!("I/O error on {}: {e}", path.display()),
    })
}

fn summary(labels: &HardLabeling) -> Value {
    json!({
        "n_samples": labels.len(),
        "n_clusters": labels.n_clusters(),
        "noise_fraction": noise_fraction(labels),
    })
}

fn cmd_cluster(
    input: &Path,
    format: Option<Format>,
    algo: Algo,
    eps: Option<f64>,
    min_pts: Option<u64>,
    min_cluster_size: u64,
    out: &Path,
) -> CmdResult {
    let format = match format {
        Some(Format::Csv) => FeatureFormat::Csv,
        Some(Format::Binary) => FeatureFormat::Binary,
        None => FeatureFormat::from_path(input),
    };
    let features = io::load_features(input, format)?;
    let (labels, name) = match algo {
        Algo::Dbscan => {
            let eps = eps.ok_or_else(|| Failure::usage("--eps is required for dbscan"))?;
            let min_pts =
                min_pts.ok_or_else(|| Failure::usage("--min-pts is required for dbscan"))?;
            (dbscan(&features, eps, min_pts as usize)?, "dbscan")
        }
        Algo::Hdbscan => (hdbscan(&features, min_cluster_size as usize)?, "hdbscan"),
    };
    io::save_labels(&labels, out)?;
    let mut v = summary(&labels);
    v["algo"] = json!(name);
    Ok(v)
}

fn cmd_refine(
    prev: &Path,
    curr: &Path,
    alpha: f64,
    harden: Harden,
    min_cluster_size: u64,
    out: &Path,
    soft_out: Option<&Path>,
) -> CmdResult {
    let prev = io::load_labels(prev)?;
    let curr = io::load_labels(curr)?;
    let p_hat = normalize_projection(&projection_matrix(&prev, &curr)?);
    let soft = refine_with_projection(&prev, &curr, &p_hat, alpha)?;
    let refined = match harden {
        Harden::Hdbscan => harden_hdbscan(&soft, min_cluster_size as usize)?,
        Harden::Max => harden_max(&soft),
    };
    io::save_labels(&refined, out)?;
    if let Some(path) = soft_out {
        io::save_soft_labels(&soft, path)?;
    }
    Ok(json!({
        "projection_shape": [p_hat.m_prev(), p_hat.m_curr()],
        "n_clusters_prev": prev.n_clusters(),
        "n_clusters_curr": curr.n_clusters(),
        "n_clusters_refined": refined.n_clusters(),
        "noise_fraction_refined": noise_fraction(&refined),
    }))
}

fn pretty(v: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

fn dump_run(dir: &Path, run: &SimRun) -> Result<(), Failure> {
    create_dir(dir)?;
    io::save_labels(&run.ground_truth, &dir.join("truth.csv"))?;
    for (t, f) in run.features.iter().enumerate() {
        io::save_features(
            f,
            &dir.join(format!("epoch{t}_features.csv")),
            FeatureFormat::Csv,
        )?;
        io::save_labels(
            &run.slr[t].raw_labels,
            &dir.join(format!("epoch{t}_raw.csv")),
        )?;
        io::save_labels(
            &run.slr[t].refined_labels,
            &dir.join(format!("epoch{t}_refined.csv")),
        )?;
        if let Some(soft) = &run.slr[t].soft_labels {
            io::save_soft_labels(soft, &dir.join(format!("epoch{t}_soft.csv")))?;
        }
    }
    Ok(())
}

fn mean_series(runs: &[SimRun], arm: Arm, metric: &str) -> Vec<f64> {
    let n = runs.first().map_or(0, |r| r.records(arm).len());
    (0..n)
        .map(|t| {
            let vals: Vec<f64> = runs
                .iter()
                .map(|r| r.series(arm, metric)[t])
                .filter(|v| !v.is_nan())
                .collect();
            if vals.is_empty() {
                f64::NAN
            } else {
                vals.iter().sum::<f64>() / vals.len() as f64
            }
        })
        .collect()
}

fn chart(title: &str, label: &str, slr: &[f64], base: &[f64]) -> String {
    line_chart_svg(
        title,
        label,
        &[
            Series {
                name: "refined",
                values: slr,
                color: "#c0392b",
            },
            Series {
                name: "baseline",
                values: base,
                color: "#2c3e50",
            },
        ],
    )
}

fn cmd_simulate(config: &Path, seeds: u64, out_dir: &Path, dump_labels: bool) -> CmdResult {
    let cfg = RunConfig::load(config)?;
    create_dir(out_dir)?;
    let first = cfg.sim.rng_seed;
    let seed_list: Vec<u64> = (0..seeds).map(|k| first.wrapping_add(k)).collect();
    let mut runs = Vec::with_capacity(seed_list.len());
    for &seed in &seed_list {
        let sim = SimConfig {
            rng_seed: seed,
            ..cfg.sim.clone()
        };
        let run = run_simulation(&sim, &cfg.slr)?;
        let report = RunReport::new(&run, &sim, &cfg.slr);
        write_file(
            &out_dir.join(format!("report_seed{seed}.json")),
            pretty(&report),
        )?;
        write_file(
            &out_dir.join(format!("ari_seed{seed}.svg")),
            chart(
                &format!("ARI vs epoch, seed {seed}"),
                "ARI",
                &run.series(Arm::Slr, M_ARI),
                &run.series(Arm::Baseline, M_ARI),
            ),
        )?;
        if dump_labels {
            dump_run(&out_dir.join(format!("seed{seed}")), &run)?;
        }
        runs.push(run);
    }
    let agg = AggregateSummary::from_runs(&seed_list, &runs);
    write_file(&out_dir.join("summary.json"), pretty(&agg))?;
    for (metric, label, file) in [
        (M_ARI, "ARI", "mean_ari.svg"),
        (
            M_CONSISTENCY,
            "pairwise consistency",
            "mean_consistency.svg",
        ),
    ] {
        write_file(
            &out_dir.join(file),
            chart(
                &format!("mean {label} over {} seed(s)", runs.len()),
                label,
                &mean_series(&runs, Arm::Slr, metric),
                &mean_series(&runs, Arm::Baseline, metric),
            ),
        )?;
    }
    Ok(serde_json::to_value(&agg).expect("summary serializes"))
}

fn cmd_eval(pred: &Path, truth: &Path, names: &[String]) -> CmdResult {
    let allowed: Vec<&str> = metrics::METRIC_NAMES
        .iter()
        .copied()
        .filter(|&m| m != "consistency")
        .collect();
    for name in names {
        if name == "consistency" {
            return Err(Failure::usage(
                "consistency compares two epochs and is not available in eval; valid metrics: "
                    .to_string()
                    + &allowed.join(", "),
            ));
        }
        if !allowed.contains(&name.as_str()) {
            return Err(Failure::usage(format!(
                "unknown metric `{name}`; valid metrics: {}",
                allowed.join(", ")
            )));
        }
    }
    let pred = io::load_labels(pred)?;
    let truth = io::load_labels(truth)?;
    let mut out = Map::new();
    for name in names {
        out.insert(name.clone(), json!(metrics::evaluate(name, &pred, &truth)?));
    }
    Ok(Value::Object(out))
}

fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Cluster {
            input,
            format,
            algo,
            eps,
            min_pts,
            min_cluster_size,
            out,
        } => cmd_cluster(&input, format, algo, eps, min_pts, min_cluster_size, &out),
        Command::Refine {
            prev,
            curr,
            alpha,
            harden,
            min_cluster_size,
            out,
            soft_out,
        } => cmd_refine(
            &prev,
            &curr,
            alpha,
            harden,
            min_cluster_size,
            &out,
            soft_out.as_deref(),
        ),
        Command::Simulate {
            config,
            seeds,
            out_dir,
            dump_labels,
        } => cmd_simulate(&config, seeds, &out_dir, dump_labels),
        Command::Eval {
            pred,
            truth,
            metrics,
        } => cmd_eval(&pred, &truth, &metrics),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(v) => {
            println!("{v}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
