//! `graphfuse`: simulate graph series, extract invariants, run fused anomaly
//! detection and Monte Carlo power studies.
//!
//! Exit codes: 0 on success, 1 on usage or configuration errors, 2 when the
//! run itself fails.

mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use graphfuse::harness::{detect_series, run_power, scheme_comparison_table, standardized_series};
use graphfuse::io::{self, EdgeListData, ParseOptions, Table};
use graphfuse::simulate::{make_latent, sample_rdpg_series};
use graphfuse::{FeatureMatrix, SeededRng};
use log::{info, warn};
use serde_json::json;

use config::{ConfigError, Mode, RunArgs, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "graphfuse", version, about = "Fused graph-invariant anomaly detection")]
struct Cli {
    /// TOML file supplying defaults for any flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Only log warnings and errors.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample a kidney-egg series and write it as an edge list.
    Simulate(RunArgs),
    /// Raw and standardized invariants of an edge-list series.
    Features(RunArgs),
    /// Test every time step of an edge-list series against its past.
    Detect(RunArgs),
    /// Monte Carlo power over a grid of egg probabilities.
    Power(RunArgs),
    /// Count equal/adaptive detections at t* for every subset size.
    Table2(RunArgs),
}

impl Command {
    fn split(self) -> (Mode, RunArgs) {
        match self {
            Command::Simulate(a) => (Mode::Simulate, a),
            Command::Features(a) => (Mode::Features, a),
            Command::Detect(a) => (Mode::Detect, a),
            Command::Power(a) => (Mode::Power, a),
            Command::Table2(a) => (Mode::Table2, a),
        }
    }
}

enum Failure {
    Usage(String),
    Runtime(graphfuse::Error),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Usage(e.0)
    }
}

impl From<graphfuse::Error> for Failure {
    fn from(e: graphfuse::Error) -> Self {
        Failure::Runtime(e)
    }
}

fn main() -> ExitCode {
    run(std::env::args_os())
}

fn run(argv: impl IntoIterator<Item = OsString>) -> ExitCode {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    env_logger::Builder::new()
        .filter_level(if cli.quiet { log::LevelFilter::Warn } else { log::LevelFilter::Info })
        .format_timestamp(None)
        .init();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn execute(cli: Cli) -> Result<(), Failure> {
    let (mode, flags) = cli.command.split();
    let args = match &cli.config {
        Some(path) => flags.over(RunArgs::from_file(path)?),
        None => flags,
    };
    let cfg = RunConfig::resolve(mode, args)?;
    info!("master seed {}", cfg.seed);
    info!(
        "resolved config {}",
        serde_json::to_string(&cfg).expect("config serializes")
    );
    match mode {
        Mode::Simulate => simulate(&cfg),
        Mode::Features => features(&cfg),
        Mode::Detect => detect(&cfg),
        Mode::Power => power(&cfg),
        Mode::Table2 => table2(&cfg),
    }
    .map_err(Failure::from)
}

fn provenance(cfg: &RunConfig) -> serde_json::Value {
    json!({
        "tool": "graphfuse",
        "version": env!("CARGO_PKG_VERSION"),
        "seed": cfg.seed,
        "config": cfg,
    })
}

fn emit(table: &Table, cfg: &RunConfig) -> graphfuse::Result<()> {
    match &cfg.out {
        Some(path) => {
            io::emit_results(table, path, cfg.format, &provenance(cfg))?;
            info!("wrote {} rows to {}", table.rows.len(), path.display());
            Ok(())
        }
        None => write_stdout(&table.render(cfg.format)?),
    }
}

fn write_stdout(text: &str) -> graphfuse::Result<()> {
    std::io::stdout()
        .write_all(text.as_bytes())
        .map_err(|e| graphfuse::Error::Io { path: PathBuf::from("<stdout>"), source: e })
}

fn labels_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".labels");
    PathBuf::from(name)
}

fn simulate(cfg: &RunConfig) -> graphfuse::Result<()> {
    let latent = make_latent(cfg.kappa.p, cfg.kappa.q)?;
    let mut rng = SeededRng::new(cfg.seed, 0);
    let series = sample_rdpg_series(&cfg.kappa, &latent, &mut rng)?;
    let Some(out) = &cfg.out else {
        return write_stdout(&io::edge_list_string(&series, None));
    };
    io::write_edge_list(&series, None, out)?;
    let labels: Vec<String> = (0..series.order()).map(|v| v.to_string()).collect();
    io::write_label_map(&labels, &labels_path(out))?;
    let meta = io::meta_path(out);
    let text = serde_json::to_string_pretty(&provenance(cfg))? + "\n";
    std::fs::write(&meta, text).map_err(|e| graphfuse::Error::Io { path: meta, source: e })?;
    info!("wrote {} graphs on {} vertices to {}", series.len(), series.order(), out.display());
    Ok(())
}

fn load(cfg: &RunConfig) -> graphfuse::Result<EdgeListData> {
    let input = cfg.input.as_deref().expect("validated");
    let opts = ParseOptions {
        label_map: cfg.label_map.as_deref().map(io::read_label_map).transpose()?,
        t_range: None,
    };
    let data = io::parse_edge_list(input, &opts)?;
    info!(
        "read {} time steps ({}..={}) on {} vertices from {}",
        data.series.len(),
        data.series.first_t(),
        data.series.last_t(),
        data.series.order(),
        input.display()
    );
    if let Some(out) = &cfg.out {
        io::write_label_map(&data.labels, &labels_path(out))?;
    }
    Ok(data)
}

fn features(cfg: &RunConfig) -> graphfuse::Result<()> {
    let data = load(cfg)?;
    let raw = FeatureMatrix::from_series(&data.series, &cfg.pipeline.invariants)?;
    let normalized = match standardized_series(&data.series, &cfg.pipeline) {
        Ok(s) => Some(s),
        Err(graphfuse::Error::InsufficientHistory { .. }) => {
            warn!("series too short to standardize; writing raw invariants only");
            None
        }
        Err(e) => return Err(e),
    };
    emit(&io::features_table(&raw, normalized.as_ref()), cfg)
}

fn detect(cfg: &RunConfig) -> graphfuse::Result<()> {
    let data = load(cfg)?;
    let results = detect_series(&data.series, &cfg.pipeline, cfg.alpha, &cfg.schemes)?;
    let flagged = results.iter().filter(|r| r.reject).count();
    info!("{flagged} of {} tests rejected", results.len());
    emit(&io::detection_table(&results), cfg)
}

fn power(cfg: &RunConfig) -> graphfuse::Result<()> {
    let results = run_power(&cfg.experiment())?;
    for r in results.iter().filter(|r| r.error.is_some()) {
        warn!("q = {} {} failed: {}", r.q, r.scheme, r.error.as_deref().unwrap_or(""));
    }
    emit(&io::power_table(&results), cfg)
}

fn table2(cfg: &RunConfig) -> graphfuse::Result<()> {
    let data = load(cfg)?;
    let rows = scheme_comparison_table(&data.series, cfg.kappa.t_star, &cfg.pipeline, cfg.alpha)?;
    emit(&io::comparison_table(&rows), cfg)
}
