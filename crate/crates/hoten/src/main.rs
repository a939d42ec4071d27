//! Command-line front end for the hotspot-entropy routing laboratory.
//!
//! Four subcommands cover the pipeline: `synth` writes a reproducible
//! scenario trace log, `hotspots` mines grid-cell visit profiles from a
//! trace log, `simulate` replays the routing protocols over the contacts
//! and reports metrics, and `compare` turns metrics tables into a pairwise
//! comparison with directional pass/fail checks.
//!
//! Settings follow one grammar everywhere: a flat `key = value` config
//! file (`--config`) whose every key is also a same-named flag, with flags
//! taking precedence. Exit codes: 0 success, 1 usage or configuration
//! error, 2 data error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process;

use clap::{Args, Parser, Subcommand};

use commands::{cmd_compare, cmd_hotspots, cmd_simulate, cmd_synth, CliError};
use config::Settings;

#[derive(Parser)]
#[command(name = "hoten", version, about = "Hotspot-entropy routing laboratory")]
struct Cli {
    /// Flat `key = value` settings file applied before any flags.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (default `out`).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<String>,
    /// Scenario seed.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<String>,
    /// Give every node the pooled ground-truth public profile instead of
    /// its gossip estimate.
    #[arg(
        long,
        global = true,
        value_name = "BOOL",
        num_args = 0..=1,
        default_missing_value = "true"
    )]
    oracle_public: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the synthetic scenario and write traces.csv.
    Synth(KeyArgs),
    /// Mine hotspot weight profiles from traces into plot-ready CSV files.
    Hotspots(KeyArgs),
    /// Replay the configured protocols over the ttl sweep and report
    /// metrics.
    Simulate(KeyArgs),
    /// Compare metrics tables pairwise and check the directional
    /// expectations.
    Compare {
        /// metrics.csv files to merge and compare.
        #[arg(value_name = "METRICS", required = true)]
        metrics: Vec<PathBuf>,
    },
}

/// One flag per settings key; values use the exact same grammar as the
/// config file.
#[derive(Args, Default)]
struct KeyArgs {
    /// Trace log to read (mutually exclusive with --synth).
    #[arg(long, value_name = "PATH")]
    traces: Option<String>,
    /// Generate the synthetic scenario instead of reading traces.
    #[arg(long, value_name = "BOOL", num_args = 0..=1, default_missing_value = "true")]
    synth: Option<String>,

    /// Number of nodes in the synthetic scenario.
    #[arg(long, value_name = "N")]
    nodes: Option<String>,
    /// Number of hotspots in the synthetic scenario.
    #[arg(long, value_name = "N")]
    hotspots: Option<String>,
    /// Zipf exponent of each node's hotspot preference.
    #[arg(long, value_name = "S")]
    zipf_s: Option<String>,
    /// World area in square metres.
    #[arg(long, value_name = "M2")]
    area_m2: Option<String>,
    /// Scenario duration in seconds.
    #[arg(long, value_name = "S")]
    duration_s: Option<String>,
    /// Minimum dwell pause in seconds.
    #[arg(long, value_name = "S")]
    pause_min_s: Option<String>,
    /// Maximum dwell pause in seconds.
    #[arg(long, value_name = "S")]
    pause_max_s: Option<String>,
    /// Walking speed in metres per second.
    #[arg(long, value_name = "MPS")]
    speed_mps: Option<String>,
    /// Dwell disc radius around a hotspot center, in metres.
    #[arg(long, value_name = "M")]
    hotspot_radius_m: Option<String>,
    /// GPS fix sampling interval in seconds.
    #[arg(long, value_name = "S")]
    fix_interval_s: Option<String>,

    /// Stay-point detection radius in metres.
    #[arg(long, value_name = "M")]
    stay_radius_m: Option<String>,
    /// Minimum stay-point dwell in seconds.
    #[arg(long, value_name = "S")]
    stay_min_dwell_s: Option<String>,

    /// Grid cell size in metres, or `auto` to fit it.
    #[arg(long, value_name = "M|auto")]
    grid_cell_m: Option<String>,
    /// Candidate cell sizes for automatic sizing, comma-separated metres.
    #[arg(long, value_name = "LIST")]
    grid_candidates: Option<String>,
    /// Fraction of cells each node advertises.
    #[arg(long, value_name = "RATIO")]
    top_k_ratio: Option<String>,

    /// Centrality weight in the combined utility.
    #[arg(long, value_name = "W")]
    alpha: Option<String>,
    /// Similarity weight in the combined utility.
    #[arg(long, value_name = "W")]
    beta: Option<String>,
    /// Personality weight in the combined utility.
    #[arg(long, value_name = "W")]
    gamma: Option<String>,
    /// Zero-substitution constant for the divergence math.
    #[arg(long, value_name = "D")]
    delta: Option<String>,

    /// Radio range in metres.
    #[arg(long, value_name = "M")]
    range_m: Option<String>,
    /// Contact sampling tick in seconds.
    #[arg(long, value_name = "S")]
    tick_s: Option<String>,
    /// Simulated runtime in seconds.
    #[arg(long, value_name = "S")]
    runtime_s: Option<String>,
    /// Message ttl sweep, comma-separated seconds.
    #[arg(long, value_name = "LIST")]
    ttl_sweep_s: Option<String>,
    /// Protocols to replay, comma-separated.
    #[arg(long, value_name = "LIST")]
    protocols: Option<String>,
    /// Write per-run event logs.
    #[arg(long, value_name = "BOOL", num_args = 0..=1, default_missing_value = "true")]
    events: Option<String>,
    /// Cumulative-weight confidence for the visited-ratio report.
    #[arg(long, value_name = "MASS")]
    visited_mass: Option<String>,
}

impl KeyArgs {
    fn apply_to(&self, settings: &mut Settings) -> Result<(), CliError> {
        let pairs: [(&str, &Option<String>); 28] = [
            ("traces", &self.traces),
            ("synth", &self.synth),
            ("nodes", &self.nodes),
            ("hotspots", &self.hotspots),
            ("zipf-s", &self.zipf_s),
            ("area-m2", &self.area_m2),
            ("duration-s", &self.duration_s),
            ("pause-min-s", &self.pause_min_s),
            ("pause-max-s", &self.pause_max_s),
            ("speed-mps", &self.speed_mps),
            ("hotspot-radius-m", &self.hotspot_radius_m),
            ("fix-interval-s", &self.fix_interval_s),
            ("stay-radius-m", &self.stay_radius_m),
            ("stay-min-dwell-s", &self.stay_min_dwell_s),
            ("grid-cell-m", &self.grid_cell_m),
            ("grid-candidates", &self.grid_candidates),
            ("top-k-ratio", &self.top_k_ratio),
            ("alpha", &self.alpha),
            ("beta", &self.beta),
            ("gamma", &self.gamma),
            ("delta", &self.delta),
            ("range-m", &self.range_m),
            ("tick-s", &self.tick_s),
            ("runtime-s", &self.runtime_s),
            ("ttl-sweep-s", &self.ttl_sweep_s),
            ("protocols", &self.protocols),
            ("events", &self.events),
            ("visited-mass", &self.visited_mass),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                settings.apply(key, v)?;
            }
        }
        Ok(())
    }
}

fn build_settings(cli: &Cli, keys: Option<&KeyArgs>) -> Result<Settings, CliError> {
    let mut settings = Settings::default();
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Usage(format!("cannot read config {}: {e}", path.display()))
        })?;
        settings.apply_config_text(&text, &path.display().to_string())?;
    }
    if let Some(keys) = keys {
        keys.apply_to(&mut settings)?;
    }
    if let Some(out) = &cli.out {
        settings.apply("out", out)?;
    }
    if let Some(seed) = &cli.seed {
        settings.apply("seed", seed)?;
    }
    if let Some(oracle) = &cli.oracle_public {
        settings.apply("oracle-public", oracle)?;
    }
    Ok(settings)
}

fn run_command(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Synth(keys) => cmd_synth(&build_settings(&cli, Some(keys))?),
        Command::Hotspots(keys) => cmd_hotspots(&build_settings(&cli, Some(keys))?),
        Command::Simulate(keys) => cmd_simulate(&build_settings(&cli, Some(keys))?),
        Command::Compare { metrics } => {
            let settings = build_settings(&cli, None)?;
            cmd_compare(metrics, &settings.out)
        }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            process::exit(code);
        }
    };
    if let Err(e) = run_command(cli) {
        eprintln!("error: {e}");
        process::exit(e.exit_code());
    }
}
