use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

use decsim::sweeps;
use decsim::{emit_artifacts, read_run_dir, DEFAULT_SEED};
use decsim_core::metrics::{compute_metrics, validate_log};
use decsim_core::Error as CoreError;

#[derive(Parser)]
#[command(name = "decsim", version, about = "decoder service-time and scheduling simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate one run from a JSON config and write its artifacts.
    Run {
        /// Path to a run config (JSON).
        config: PathBuf,
        /// Output directory (overrides the config's out_dir).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one of the built-in sweeps.
    Sweep {
        #[arg(value_enum)]
        regime: Regime,
        /// Sweep directory (default: <output root>/<regime>).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Shared seed for every cell in the sweep.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Operate on stored run artifacts.
    #[command(subcommand)]
    Metrics(MetricsCmd),
    /// Write figure-ready per-metric CSVs next to a sweep's table.
    PlotData {
        /// Directory holding a sweep table (sram_fit/tail/qos/capacity .csv).
        sweep_dir: PathBuf,
    },
}

#[derive(Subcommand)]
enum MetricsCmd {
    /// Rebuild the summary from config.json + jobs.csv + backlog.csv and
    /// compare it against the stored summary.json.
    Recompute { run_dir: PathBuf },
}

#[derive(Debug, Copy, Clone, ValueEnum)]
enum Regime {
    SramFit,
    Tail,
    Qos,
    Capacity,
}

impl Regime {
    fn dir_name(self) -> &'static str {
        match self {
            Regime::SramFit => "sram-fit",
            Regime::Tail => "tail",
            Regime::Qos => "qos",
            Regime::Capacity => "capacity",
        }
    }
}

/// Output root: $DECSIM_OUT if set, else ./out.
fn out_root() -> PathBuf {
    std::env::var_os("DECSIM_OUT").map(PathBuf::from).unwrap_or_else(|| PathBuf::from("out"))
}

fn cmd_run(config_path: &PathBuf, out: Option<PathBuf>) -> Result<()> {
    let config = decsim::artifacts::read_config(config_path)?;
    let dir = out
        .or_else(|| config.out_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| out_root().join("run"));
    let log = decsim_core::run(&config)?;
    let summary = emit_artifacts(&log, &dir)?;
    println!("{}", serde_json::to_string_pretty(&summary)?);
    eprintln!("wrote {}", dir.display());
    Ok(())
}

fn cmd_sweep(regime: Regime, out: Option<PathBuf>, seed: Option<u64>) -> Result<()> {
    let seed = seed.unwrap_or(DEFAULT_SEED);
    let dir = out.unwrap_or_else(|| out_root().join(regime.dir_name()));
    let table = match regime {
        Regime::SramFit => {
            sweeps::run_sram_fit_sweep(&dir, seed)?;
            "sram_fit.csv"
        }
        Regime::Tail => {
            sweeps::run_tail_sweep(&dir, seed)?;
            "tail.csv"
        }
        Regime::Qos => {
            sweeps::run_qos_sweep(&dir, seed)?;
            "qos.csv"
        }
        Regime::Capacity => {
            sweeps::run_capacity_sweep(&dir, seed)?;
            "capacity.csv"
        }
    };
    eprintln!("wrote {}", dir.join(table).display());
    Ok(())
}

fn cmd_recompute(run_dir: &PathBuf) -> Result<()> {
    let log = read_run_dir(run_dir)?;
    validate_log(&log)?;
    let recomputed = compute_metrics(&log)?;
    let stored = decsim::artifacts::read_summary(run_dir)
        .with_context(|| format!("reading stored summary in {}", run_dir.display()))?;
    let a = serde_json::to_value(&recomputed)?;
    let b = serde_json::to_value(&stored)?;
    println!("{}", serde_json::to_string_pretty(&recomputed)?);
    if a != b {
        let fields = differing_fields(&a, &b);
        return Err(CoreError::Invariant(format!(
            "recomputed summary differs from stored summary.json in {} (fields: {})",
            run_dir.display(),
            fields.join(", ")
        ))
        .into());
    }
    eprintln!("summary matches");
    Ok(())
}

fn differing_fields(a: &serde_json::Value, b: &serde_json::Value) -> Vec<String> {
    match (a.as_object(), b.as_object()) {
        (Some(a), Some(b)) => {
            let mut out: Vec<String> = a
                .iter()
                .filter(|(k, v)| b.get(*k) != Some(v))
                .map(|(k, v)| format!("{k} ({v} vs {})", b.get(k).unwrap_or(&serde_json::Value::Null)))
                .collect();
            out.extend(b.keys().filter(|k| !a.contains_key(*k)).map(|k| format!("{k} (missing)")));
            out
        }
        _ => vec![String::from("(not objects)")],
    }
}

fn cmd_plot_data(sweep_dir: &PathBuf) -> Result<()> {
    let written = decsim::plotdata::write_plot_data(sweep_dir)?;
    for path in written {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Run { config, out } => cmd_run(&config, out),
        Cmd::Sweep { regime, out, seed } => cmd_sweep(regime, out, seed),
        Cmd::Metrics(MetricsCmd::Recompute { run_dir }) => cmd_recompute(&run_dir),
        Cmd::PlotData { sweep_dir } => cmd_plot_data(&sweep_dir),
    }
}

/// Exit codes: 0 success, 1 config or usage problem, 2 violated invariant
/// (including a stored log that fails validation).
fn code_for(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(core) = cause.downcast_ref::<CoreError>() {
            return match core {
                CoreError::Config(_) => 1,
                CoreError::Invariant(_) | CoreError::Log(_) => 2,
            };
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let wants_out = matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = err.print();
            return if wants_out { ExitCode::SUCCESS } else { ExitCode::from(1) };
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(code_for(&err))
        }
    }
}
