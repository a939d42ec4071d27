//! CSV serialization of every pipeline artifact.
//!
//! All writers return the complete file contents as a string and never
//! consult the clock, the environment, or any other ambient state, so a
//! given input always serializes byte-identically.
//!
//! Derived quantities are rendered with [`fmt_g9`] — nine significant
//! digits in the classic C `%.9g` style — which keeps files stable across
//! platforms while staying human-readable. Raw trace coordinates use Rust's
//! shortest exact rendering instead so that a written trace file parses
//! back to bit-identical values.
//!
//! Node ids appear verbatim: the trace log format itself is comma-separated,
//! so an id can never contain a comma.

use std::fmt::Write as _;

use crate::grid::{GridSpec, WeightVector};
use crate::hurst::HurstFit;
use crate::ingest::Trace;
use crate::sim::{EventRecord, RunMetrics};

/// Renders a float with nine significant digits, matching C's `%.9g`:
/// trailing zeros are trimmed, and magnitudes below 1e-4 or at 1e9 and
/// above switch to scientific notation with a sign-carrying, two-digit
/// exponent.
pub fn fmt_g9(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x < 0.0 { "-inf" } else { "inf" }.to_string();
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0" } else { "0" }.to_string();
    }
    let neg = x < 0.0;
    let exp_form = format!("{:.8e}", x.abs());
    let (mant, exp) = exp_form.split_once('e').expect("e-format always has an exponent");
    let exp: i32 = exp.parse().expect("e-format exponent is an integer");
    let digits: String = mant.chars().filter(|c| c.is_ascii_digit()).collect();
    debug_assert_eq!(digits.len(), 9, "nine significant digits from {{:.8e}}");
    let body = if !(-4..9).contains(&exp) {
        let frac = digits[1..].trim_end_matches('0');
        let lead = &digits[..1];
        if frac.is_empty() {
            format!("{lead}e{exp:+03}")
        } else {
            format!("{lead}.{frac}e{exp:+03}")
        }
    } else if exp >= 0 {
        let cut = (exp + 1) as usize;
        let int = &digits[..cut];
        let frac = digits[cut..].trim_end_matches('0');
        if frac.is_empty() {
            int.to_string()
        } else {
            format!("{int}.{frac}")
        }
    } else {
        let padded = format!("{}{}", "0".repeat((-exp - 1) as usize), digits);
        format!("0.{}", padded.trim_end_matches('0'))
    };
    if neg {
        format!("-{body}")
    } else {
        body
    }
}

/// `cell_index,weight` — one row per grid cell.
pub fn weights_csv(w: &WeightVector) -> String {
    let mut out = String::from("cell_index,weight\n");
    for (i, v) in w.iter().enumerate() {
        writeln!(out, "{i},{}", fmt_g9(*v)).unwrap();
    }
    out
}

/// The grid geometry as a single-row file.
pub fn grid_csv(g: &GridSpec) -> String {
    format!(
        "origin_x_m,origin_y_m,cell_size_m,cols,rows\n{},{},{},{},{}\n",
        fmt_g9(g.origin_x_m),
        fmt_g9(g.origin_y_m),
        fmt_g9(g.cell_size_m),
        g.cols,
        g.rows,
    )
}

/// `cell_size_m,hurst_exponent` for every candidate that produced a fit.
pub fn hurst_csv(fit: &HurstFit) -> String {
    let mut out = String::from("cell_size_m,hurst_exponent\n");
    for (d, h) in fit.d_candidates.iter().zip(&fit.h_values) {
        writeln!(out, "{},{}", fmt_g9(*d), fmt_g9(*h)).unwrap();
    }
    out
}

/// `node_id,visited_ratio` per node, closed by a `mean` row.
pub fn visited_ratio_csv(node_ids: &[String], ratios: &[f64]) -> String {
    assert_eq!(node_ids.len(), ratios.len());
    assert!(!node_ids.is_empty(), "at least one node is required");
    let mut out = String::from("node_id,visited_ratio\n");
    for (id, r) in node_ids.iter().zip(ratios) {
        writeln!(out, "{id},{}", fmt_g9(*r)).unwrap();
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    writeln!(out, "mean,{}", fmt_g9(mean)).unwrap();
    out
}

/// `index,node_id` — the roster mapping node indices to trace ids.
pub fn nodes_csv(node_ids: &[String]) -> String {
    let mut out = String::from("index,node_id\n");
    for (i, id) in node_ids.iter().enumerate() {
        writeln!(out, "{i},{id}").unwrap();
    }
    out
}

/// One row per (protocol, ttl) replay; delay and hop cells stay empty when
/// nothing was delivered.
pub fn metrics_csv(rows: &[RunMetrics]) -> String {
    let mut out =
        String::from("protocol,ttl_s,sent,delivered,cpdr,mean_delay_s,infected_ratio,avg_hops\n");
    for m in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            m.protocol,
            fmt_g9(m.ttl_s),
            m.sent,
            m.delivered,
            fmt_g9(m.cpdr),
            m.mean_delay_s.map(fmt_g9).unwrap_or_default(),
            fmt_g9(m.infected_ratio),
            m.avg_hops.map(fmt_g9).unwrap_or_default(),
        )
        .unwrap();
    }
    out
}

/// The replay event log. Contact rows carry the contact end time in
/// `detail` and leave `msg_id` empty; transfer rows carry the hop count.
pub fn events_csv(events: &[EventRecord]) -> String {
    let mut out = String::from("time_s,event,node_a,node_b,msg_id,detail\n");
    for e in events {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt_g9(e.time_s),
            e.kind.label(),
            e.a,
            e.b,
            e.id.map(|id| id.to_string()).unwrap_or_default(),
            fmt_g9(e.detail),
        )
        .unwrap();
    }
    out
}

/// Traces in the ingestible log format (`node_id,timestamp_s,x_m,y_m`).
/// Coordinates use exact shortest rendering, so parsing the output yields
/// bit-identical fixes.
pub fn traces_csv(traces: &[Trace]) -> String {
    let mut out = String::from("node_id,timestamp_s,x_m,y_m\n");
    for t in traces {
        for f in &t.fixes {
            writeln!(out, "{},{},{},{}", t.node_id, f.timestamp_s, f.x_m, f.y_m).unwrap();
        }
    }
    out
}
