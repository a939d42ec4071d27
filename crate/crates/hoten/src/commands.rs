//! The four commands: scenario generation, hotspot mining, protocol
//! replay, and metrics comparison. Every command writes deterministic
//! files (no timestamps, fixed column orders), so reruns on identical
//! inputs are byte-identical.

use std::fs;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use hoten_core::grid::visited_ratio;
use hoten_core::ingest::{parse_log, IngestError, Trace};
use hoten_core::protocols::Protocol;
use hoten_core::report::{
    events_csv, fmt_g9, grid_csv, hurst_csv, metrics_csv, nodes_csv, traces_csv,
    visited_ratio_csv, weights_csv,
};
use hoten_core::sim::{mine_hotspots, run, MiningOutput, SimError};
use hoten_core::synth::{synth_traces, SynthError};

use crate::config::{Settings, SettingsError};

/// Command failures, split by exit code: usage and configuration problems
/// exit 1, problems with the data being processed exit 2.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

impl From<SettingsError> for CliError {
    fn from(e: SettingsError) -> Self {
        CliError::Usage(e.0)
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::InvalidConfig(_) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        CliError::Data(e.to_string())
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)
            .map_err(|e| CliError::Data(format!("cannot create {}: {e}", parent.display())))?;
    }
    fs::write(&path, contents)
        .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

/// Resolves the configured trace source: either parse the given log or
/// generate the synthetic scenario.
fn load_traces(settings: &Settings) -> Result<Vec<Trace>, CliError> {
    settings.require_one_input()?;
    if settings.synth {
        return Ok(synth_traces(&settings.synth_params)?);
    }
    let path = settings.traces.as_ref().unwrap();
    let file = File::open(path)
        .map_err(|e| CliError::Data(format!("cannot open {}: {e}", path.display())))?;
    let traces = parse_log(BufReader::new(file))?;
    Ok(traces)
}

/// `synth`: generate the scenario and write its trace log.
pub fn cmd_synth(settings: &Settings) -> Result<(), CliError> {
    let traces = synth_traces(&settings.synth_params)?;
    let path = write_file(&settings.out, "traces.csv", &traces_csv(&traces))?;
    println!("wrote {} ({} nodes)", path.display(), traces.len());
    Ok(())
}

/// Writes the mining artifact set: grid geometry, pooled and per-node
/// weight vectors, the cell-size fit (when sizing was automatic), and the
/// visited-ratio table.
fn write_mining_outputs(
    out: &Path,
    mining: &MiningOutput,
    visited_mass: f64,
) -> Result<(), CliError> {
    write_file(out, "grid.csv", &grid_csv(&mining.grid))?;
    write_file(out, "public_weights.csv", &weights_csv(&mining.public.weights))?;
    for (id, w) in mining.node_ids.iter().zip(&mining.personal) {
        write_file(out, &format!("personal_weights/{id}.csv"), &weights_csv(w))?;
    }
    if let Some(fit) = &mining.hurst {
        write_file(out, "hurst_fit.csv", &hurst_csv(fit))?;
    }
    let ratios: Vec<f64> = mining
        .personal
        .iter()
        .map(|w| if w.sum() > 0.0 { visited_ratio(w, visited_mass) } else { 0.0 })
        .collect();
    write_file(out, "visited_ratio.csv", &visited_ratio_csv(&mining.node_ids, &ratios))?;
    Ok(())
}

/// `hotspots`: mine the hotspot grid and weight profiles from the traces.
pub fn cmd_hotspots(settings: &Settings) -> Result<(), CliError> {
    settings.sim.validate()?;
    let traces = load_traces(settings)?;
    let mining = mine_hotspots(
        &traces,
        &settings.sim.stay,
        settings.sim.grid,
        &settings.sim.grid_candidates,
        settings.sim.top_k_ratio,
    )?;
    write_mining_outputs(&settings.out, &mining, settings.visited_mass)?;
    println!(
        "mined {} nodes into a {}x{} grid of {} m cells under {}",
        mining.node_ids.len(),
        mining.grid.cols,
        mining.grid.rows,
        fmt_g9(mining.grid.cell_size_m),
        settings.out.display(),
    );
    Ok(())
}

/// `simulate`: run the full pipeline and write mining outputs, the node
/// index map, the metrics table, and per-run event logs.
pub fn cmd_simulate(settings: &Settings) -> Result<(), CliError> {
    let traces = load_traces(settings)?;
    let output = run(&settings.sim, &traces)?;
    let out = &settings.out;
    write_mining_outputs(out, &output.mining, settings.visited_mass)?;
    write_file(out, "nodes.csv", &nodes_csv(&output.mining.node_ids))?;
    write_file(out, "metrics.csv", &metrics_csv(&output.metrics))?;
    if settings.events {
        for detail in &output.runs {
            let name = format!("events_{}_{}.csv", detail.protocol, fmt_g9(detail.ttl_s));
            write_file(out, &name, &events_csv(&detail.events))?;
        }
    }
    print_metrics_table(&output.metrics);
    println!("wrote results under {}", out.display());
    Ok(())
}

fn print_metrics_table(metrics: &[hoten_core::sim::RunMetrics]) {
    let header =
        ["protocol", "ttl_s", "sent", "delivered", "cpdr", "mean_delay_s", "infected_ratio", "avg_hops"];
    let mut rows: Vec<[String; 8]> = Vec::new();
    for m in metrics {
        let opt = |v: Option<f64>| v.map(fmt_g9).unwrap_or_else(|| "-".into());
        rows.push([
            m.protocol.to_string(),
            fmt_g9(m.ttl_s),
            m.sent.to_string(),
            m.delivered.to_string(),
            fmt_g9(m.cpdr),
            opt(m.mean_delay_s),
            fmt_g9(m.infected_ratio),
            opt(m.avg_hops),
        ]);
    }
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let print_row = |cells: &[String]| {
        let line: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:>w$}", w = w))
            .collect();
        println!("{}", line.join("  "));
    };
    print_row(&header.map(String::from));
    for row in &rows {
        print_row(row);
    }
}

/// One parsed `metrics.csv` row.
#[derive(Debug, Clone)]
struct MetricsRow {
    protocol: Protocol,
    ttl_s: f64,
    cpdr: f64,
    mean_delay_s: Option<f64>,
    infected_ratio: f64,
    avg_hops: Option<f64>,
}

const METRICS_HEADER: &str =
    "protocol,ttl_s,sent,delivered,cpdr,mean_delay_s,infected_ratio,avg_hops";

fn parse_metrics_file(path: &Path) -> Result<Vec<MetricsRow>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    let bad = |line: usize, reason: String| {
        CliError::Data(format!("{}:{line}: {reason}", path.display()))
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == METRICS_HEADER => {}
        _ => return Err(bad(1, format!("expected header `{METRICS_HEADER}`"))),
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let n = idx + 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(bad(n, format!("expected 8 fields, got {}", fields.len())));
        }
        let num = |field: &str, what: &str| -> Result<f64, CliError> {
            field.parse::<f64>().map_err(|_| bad(n, format!("bad {what} `{field}`")))
        };
        let optional = |field: &str, what: &str| -> Result<Option<f64>, CliError> {
            if field.is_empty() { Ok(None) } else { num(field, what).map(Some) }
        };
        rows.push(MetricsRow {
            protocol: Protocol::from_str(fields[0])
                .map_err(|e| bad(n, e.to_string()))?,
            ttl_s: num(fields[1], "ttl")?,
            cpdr: num(fields[4], "cpdr")?,
            mean_delay_s: optional(fields[5], "mean delay")?,
            infected_ratio: num(fields[6], "infected ratio")?,
            avg_hops: optional(fields[7], "hop count")?,
        });
    }
    Ok(rows)
}

/// `compare`: merge metrics tables, write the pairwise comparison, and
/// check the directional expectations at the largest shared ttl.
pub fn cmd_compare(inputs: &[PathBuf], out: &Path) -> Result<(), CliError> {
    let mut rows: Vec<MetricsRow> = Vec::new();
    for path in inputs {
        for row in parse_metrics_file(path)? {
            if rows.iter().any(|r| r.protocol == row.protocol && r.ttl_s == row.ttl_s) {
                return Err(CliError::Data(format!(
                    "{}: duplicate metrics row for {} at ttl {}",
                    path.display(),
                    row.protocol,
                    fmt_g9(row.ttl_s)
                )));
            }
            rows.push(row);
        }
    }

    let mut ttls: Vec<f64> = rows.iter().map(|r| r.ttl_s).collect();
    ttls.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ttls.dedup();

    let find = |ttl: f64, p: Protocol| rows.iter().find(|r| r.ttl_s == ttl && r.protocol == p);
    let mut protocols: Vec<Protocol> = Vec::new();
    for p in [Protocol::Epidemic, Protocol::Hoten, Protocol::SimBet] {
        if rows.iter().any(|r| r.protocol == p) {
            protocols.push(p);
        }
    }

    // one row per (ttl, metric, protocol pair), protocols in name order
    let metrics: [(&str, fn(&MetricsRow) -> Option<f64>); 4] = [
        ("cpdr", |r| Some(r.cpdr)),
        ("mean_delay_s", |r| r.mean_delay_s),
        ("infected_ratio", |r| Some(r.infected_ratio)),
        ("avg_hops", |r| r.avg_hops),
    ];
    let mut csv = String::from("ttl_s,metric,protocol_a,protocol_b,value_a,value_b,delta\n");
    for &ttl in &ttls {
        for (name, get) in &metrics {
            for (i, &pa) in protocols.iter().enumerate() {
                for &pb in &protocols[i + 1..] {
                    let (ra, rb) = (find(ttl, pa), find(ttl, pb));
                    let (va, vb) = (ra.and_then(get), rb.and_then(get));
                    let show = |v: Option<f64>| v.map(fmt_g9).unwrap_or_default();
                    let delta = match (va, vb) {
                        (Some(a), Some(b)) => fmt_g9(a - b),
                        _ => String::new(),
                    };
                    csv.push_str(&format!(
                        "{},{name},{pa},{pb},{},{},{delta}\n",
                        fmt_g9(ttl),
                        show(va),
                        show(vb),
                    ));
                }
            }
        }
    }
    let path = write_file(out, "comparison.csv", &csv)?;
    println!("wrote {}", path.display());

    // directional expectations, judged at the largest ttl all three share
    let shared = ttls
        .iter()
        .rev()
        .find(|&&ttl| {
            [Protocol::Epidemic, Protocol::Hoten, Protocol::SimBet]
                .iter()
                .all(|&p| find(ttl, p).is_some())
        })
        .copied();
    let Some(ttl) = shared else {
        println!("directional checks skipped: no ttl covers epidemic, hoten, and simbet");
        return Ok(());
    };
    let e = find(ttl, Protocol::Epidemic).unwrap();
    let h = find(ttl, Protocol::Hoten).unwrap();
    let s = find(ttl, Protocol::SimBet).unwrap();
    let verdict = |ok: bool| if ok { "PASS" } else { "FAIL" };
    println!(
        "{} delivery ratio at ttl {}: epidemic {} >= hoten {} >= simbet {}",
        verdict(e.cpdr >= h.cpdr && h.cpdr >= s.cpdr),
        fmt_g9(ttl),
        fmt_g9(e.cpdr),
        fmt_g9(h.cpdr),
        fmt_g9(s.cpdr),
    );
    let show = |v: Option<f64>| v.map(fmt_g9).unwrap_or_else(|| "none".into());
    let all_delays = [e.mean_delay_s, h.mean_delay_s, s.mean_delay_s];
    println!(
        "{} delivery delay at ttl {}: epidemic {} lowest of hoten {}, simbet {}",
        verdict(
            all_delays.iter().all(Option::is_some)
                && e.mean_delay_s <= h.mean_delay_s
                && e.mean_delay_s <= s.mean_delay_s
        ),
        fmt_g9(ttl),
        show(e.mean_delay_s),
        show(h.mean_delay_s),
        show(s.mean_delay_s),
    );
    println!(
        "{} infected ratio at ttl {}: epidemic {} highest of hoten {}, simbet {}",
        verdict(e.infected_ratio > h.infected_ratio && e.infected_ratio > s.infected_ratio),
        fmt_g9(ttl),
        fmt_g9(e.infected_ratio),
        fmt_g9(h.infected_ratio),
        fmt_g9(s.infected_ratio),
    );
    let all_hops = [e.avg_hops, h.avg_hops, s.avg_hops];
    println!(
        "{} hop economy at ttl {}: hoten {} lowest of epidemic {}, simbet {}",
        verdict(
            all_hops.iter().all(Option::is_some)
                && h.avg_hops < e.avg_hops
                && h.avg_hops < s.avg_hops
        ),
        fmt_g9(ttl),
        show(h.avg_hops),
        show(e.avg_hops),
        show(s.avg_hops),
    );
    Ok(())
}
