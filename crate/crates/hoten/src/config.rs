//! Flat `key = value` experiment settings with one shared grammar for
//! config files and command-line flags.
//!
//! Precedence is strictly layered: built-in defaults, then the `--config`
//! file top to bottom, then command-line flags. Every key can appear in
//! both places; the flag wins. Unknown keys are errors so a typo cannot
//! silently fall back to a default.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use hoten_core::protocols::Protocol;
use hoten_core::sim::{GridSizing, SimConfig};
use hoten_core::synth::SynthParams;

/// Everything a run can be told, resolved from defaults, config file, and
/// flags.
#[derive(Debug, Clone)]
pub struct Settings {
    /// Trace CSV to read; mutually exclusive with `synth`.
    pub traces: Option<PathBuf>,
    /// Generate the synthetic scenario instead of reading traces.
    pub synth: bool,
    /// Output directory; files are written under it verbatim.
    pub out: PathBuf,
    pub synth_params: SynthParams,
    pub sim: SimConfig,
    /// Write per-run event logs alongside metrics.
    pub events: bool,
    /// Cumulative-weight confidence for the visited-ratio report.
    pub visited_mass: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            traces: None,
            synth: false,
            out: PathBuf::from("out"),
            synth_params: SynthParams::default(),
            sim: SimConfig::default(),
            events: true,
            visited_mass: 0.9,
        }
    }
}

/// A settings error is always a usage problem: a bad key, a bad value, or
/// an unreadable config file.
#[derive(Debug)]
pub struct SettingsError(pub String);

impl fmt::Display for SettingsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for SettingsError {}

fn parse_num<T: FromStr>(key: &str, value: &str, what: &str) -> Result<T, SettingsError> {
    value
        .parse::<T>()
        .map_err(|_| SettingsError(format!("key `{key}`: `{value}` is not {what}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, SettingsError> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(SettingsError(format!(
            "key `{key}`: `{value}` is not a bool (use true or false)"
        ))),
    }
}

fn parse_list_f64(key: &str, value: &str) -> Result<Vec<f64>, SettingsError> {
    value
        .split(',')
        .map(|item| parse_num::<f64>(key, item.trim(), "a number"))
        .collect()
}

impl Settings {
    /// Applies one `key = value` pair. The same routine backs config-file
    /// lines and command-line flags, so both accept identical values.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<(), SettingsError> {
        match key {
            "traces" => self.traces = Some(PathBuf::from(value)),
            "synth" => self.synth = parse_bool(key, value)?,
            "out" => self.out = PathBuf::from(value),

            "nodes" => self.synth_params.n_nodes = parse_num(key, value, "a count")?,
            "hotspots" => self.synth_params.n_hotspots = parse_num(key, value, "a count")?,
            "zipf-s" => self.synth_params.zipf_s = parse_num(key, value, "a number")?,
            "area-m2" => self.synth_params.area_m2 = parse_num(key, value, "a number")?,
            "duration-s" => self.synth_params.duration_s = parse_num(key, value, "a number")?,
            "pause-min-s" => self.synth_params.pause_min_s = parse_num(key, value, "a number")?,
            "pause-max-s" => self.synth_params.pause_max_s = parse_num(key, value, "a number")?,
            "speed-mps" => self.synth_params.speed_mps = parse_num(key, value, "a number")?,
            "hotspot-radius-m" => {
                self.synth_params.hotspot_radius_m = parse_num(key, value, "a number")?
            }
            "fix-interval-s" => {
                self.synth_params.fix_interval_s = parse_num(key, value, "a number")?
            }
            "seed" => self.synth_params.seed = parse_num(key, value, "an unsigned integer")?,

            "stay-radius-m" => self.sim.stay.radius_m = parse_num(key, value, "a number")?,
            "stay-min-dwell-s" => {
                self.sim.stay.min_dwell_s = parse_num(key, value, "a number")?
            }

            "grid-cell-m" => {
                self.sim.grid = if value == "auto" {
                    GridSizing::Auto
                } else {
                    GridSizing::Fixed(parse_num(key, value, "a number or `auto`")?)
                }
            }
            "grid-candidates" => self.sim.grid_candidates = parse_list_f64(key, value)?,
            "top-k-ratio" => self.sim.top_k_ratio = parse_num(key, value, "a number")?,

            "alpha" => self.sim.entropy.alpha = parse_num(key, value, "a number")?,
            "beta" => self.sim.entropy.beta = parse_num(key, value, "a number")?,
            "gamma" => self.sim.entropy.gamma = parse_num(key, value, "a number")?,
            "delta" => {
                let d: f64 = parse_num(key, value, "a number")?;
                self.sim.entropy.delta = d;
                self.sim.entropy.floor = d;
            }

            "range-m" => self.sim.range_m = parse_num(key, value, "a number")?,
            "tick-s" => self.sim.tick_s = parse_num(key, value, "a number")?,
            "runtime-s" => self.sim.runtime_s = parse_num(key, value, "a number")?,
            "ttl-sweep-s" => self.sim.ttl_sweep_s = parse_list_f64(key, value)?,
            "protocols" => {
                let mut protos: Vec<Protocol> = Vec::new();
                for item in value.split(',') {
                    let p = Protocol::from_str(item.trim()).map_err(|e| {
                        SettingsError(format!("key `protocols`: {e}"))
                    })?;
                    if !protos.contains(&p) {
                        protos.push(p);
                    }
                }
                self.sim.protocols = protos;
            }
            "oracle-public" => self.sim.oracle_public = parse_bool(key, value)?,
            "events" => self.events = parse_bool(key, value)?,

            "visited-mass" => {
                let m: f64 = parse_num(key, value, "a number")?;
                if !(m > 0.0 && m <= 1.0) {
                    return Err(SettingsError(format!(
                        "key `visited-mass`: {m} is not in (0, 1]"
                    )));
                }
                self.visited_mass = m;
            }

            _ => return Err(SettingsError(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Applies a whole config file: `key = value` lines, `#` comments,
    /// blank lines.
    pub fn apply_config_text(&mut self, text: &str, path: &str) -> Result<(), SettingsError> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                SettingsError(format!(
                    "{path}:{}: expected `key = value`, got `{line}`",
                    idx + 1
                ))
            })?;
            self.apply(key.trim(), value.trim())
                .map_err(|e| SettingsError(format!("{path}:{}: {e}", idx + 1)))?;
        }
        Ok(())
    }

    /// Checks the trace-source exclusivity rule for commands that consume
    /// traces.
    pub fn require_one_input(&self) -> Result<(), SettingsError> {
        match (self.traces.is_some(), self.synth) {
            (true, true) => Err(SettingsError(
                "both `traces` and `synth` are set; pick exactly one input source".into(),
            )),
            (false, false) => Err(SettingsError(
                "no input source: set `traces <path>` or `synth true`".into(),
            )),
            _ => Ok(()),
        }
    }
}
