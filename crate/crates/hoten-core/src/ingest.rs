//! GPS log ingestion: parsing, stay-point detection, and resampling.
//!
//! A log is a CSV stream of `node_id,timestamp_s,x_m,y_m` rows. Coordinates
//! are planar offsets in metres (project latitude/longitude before ingest).
//! Rows for different nodes may interleave, but within one node timestamps
//! must be strictly increasing in file order — out-of-order or duplicate
//! timestamps are rejected rather than silently reordered.
//!
//! Stay points condense a fix stream into dwell episodes: a sliding anchor
//! scan grows a window of consecutive fixes that stay within `radius_m` of
//! the window's first fix, and emits the window centroid once the window
//! spans at least `min_dwell_s` seconds. Emission restarts the anchor past
//! the window, so the fix spans backing two stay points never overlap.

use std::collections::BTreeMap;
use std::io::BufRead;

use thiserror::Error;

/// One GPS sample: a timestamp plus planar metric coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpsFix {
    pub timestamp_s: f64,
    pub x_m: f64,
    pub y_m: f64,
}

impl GpsFix {
    /// Euclidean distance to another fix, in metres.
    pub fn distance_m(&self, other: &GpsFix) -> f64 {
        let dx = self.x_m - other.x_m;
        let dy = self.y_m - other.y_m;
        (dx * dx + dy * dy).sqrt()
    }
}

/// The time-ordered fix sequence of a single node.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub node_id: String,
    /// Fixes sorted by strictly increasing timestamp.
    pub fixes: Vec<GpsFix>,
}

impl Trace {
    /// Timestamp of the first fix.
    pub fn start_s(&self) -> f64 {
        self.fixes[0].timestamp_s
    }

    /// Timestamp of the last fix.
    pub fn end_s(&self) -> f64 {
        self.fixes[self.fixes.len() - 1].timestamp_s
    }

    /// Position at time `t`, linearly interpolated between the bracketing
    /// fixes. `None` outside the trace's active window (no extrapolation).
    pub fn position_at(&self, t: f64) -> Option<(f64, f64)> {
        if self.fixes.is_empty() || t < self.start_s() || t > self.end_s() {
            return None;
        }
        let k = self.fixes.partition_point(|f| f.timestamp_s < t);
        if k < self.fixes.len() && self.fixes[k].timestamp_s == t {
            return Some((self.fixes[k].x_m, self.fixes[k].y_m));
        }
        let (a, b) = (&self.fixes[k - 1], &self.fixes[k]);
        let u = (t - a.timestamp_s) / (b.timestamp_s - a.timestamp_s);
        Some((a.x_m + u * (b.x_m - a.x_m), a.y_m + u * (b.y_m - a.y_m)))
    }

    /// Drops every fix after `cutoff_s`. A trace may become empty.
    pub fn truncate_after(&mut self, cutoff_s: f64) {
        self.fixes.retain(|f| f.timestamp_s <= cutoff_s);
    }
}

/// One dwell episode: the centroid of a window of nearby fixes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StayPoint {
    pub x_m: f64,
    pub y_m: f64,
    pub arrival_s: f64,
    pub departure_s: f64,
}

/// Thresholds for stay-point detection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StayPointParams {
    /// Maximum distance from the window's first fix, in metres.
    pub radius_m: f64,
    /// Minimum dwell duration, in seconds.
    pub min_dwell_s: f64,
}

impl Default for StayPointParams {
    fn default() -> Self {
        StayPointParams {
            radius_m: 5.0,
            min_dwell_s: 30.0,
        }
    }
}

/// Ingest failures. Line numbers are 1-based positions in the input stream.
#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: malformed row ({reason})")]
    MalformedRow { line: usize, reason: String },
    #[error("node {node}: timestamp at line {line} does not increase")]
    UnsortedTimestamps { node: String, line: usize },
    #[error("log contains no data rows")]
    EmptyInput,
    #[error("failed to read log: {0}")]
    Io(#[from] std::io::Error),
}

/// Parses a GPS log into one trace per node, sorted by node id.
///
/// Blank lines and lines starting with `#` are skipped. The first data line
/// may be a header (it is ignored when its numeric fields fail to parse);
/// every later unparseable line is an error.
pub fn parse_log(reader: impl BufRead) -> Result<Vec<Trace>, IngestError> {
    let mut per_node: BTreeMap<String, Vec<GpsFix>> = BTreeMap::new();
    let mut seen_data_line = false;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let lineno = idx + 1;
        match parse_row(trimmed) {
            Ok((node, fix)) => {
                let fixes = per_node.entry(node.clone()).or_default();
                if let Some(last) = fixes.last() {
                    if fix.timestamp_s <= last.timestamp_s {
                        return Err(IngestError::UnsortedTimestamps { node, line: lineno });
                    }
                }
                fixes.push(fix);
                seen_data_line = true;
            }
            Err(reason) => {
                if !seen_data_line && !trimmed.contains(char::is_numeric) {
                    // A leading header row such as `node_id,timestamp_s,x_m,y_m`.
                    continue;
                }
                return Err(IngestError::MalformedRow { line: lineno, reason });
            }
        }
    }
    if per_node.is_empty() {
        return Err(IngestError::EmptyInput);
    }
    Ok(per_node
        .into_iter()
        .map(|(node_id, fixes)| Trace { node_id, fixes })
        .collect())
}

fn parse_row(row: &str) -> Result<(String, GpsFix), String> {
    let fields: Vec<&str> = row.split(',').map(str::trim).collect();
    if fields.len() != 4 {
        return Err(format!("expected 4 fields, found {}", fields.len()));
    }
    if fields[0].is_empty() {
        return Err("empty node id".into());
    }
    let num = |name: &str, s: &str| -> Result<f64, String> {
        let v: f64 = s
            .parse()
            .map_err(|_| format!("{name} `{s}` is not a number"))?;
        if !v.is_finite() {
            return Err(format!("{name} `{s}` is not finite"));
        }
        Ok(v)
    };
    Ok((
        fields[0].to_string(),
        GpsFix {
            timestamp_s: num("timestamp", fields[1])?,
            x_m: num("x coordinate", fields[2])?,
            y_m: num("y coordinate", fields[3])?,
        },
    ))
}

/// Detects stay points with a sliding-anchor scan.
///
/// The window anchored at fix `i` extends over consecutive fixes within
/// `radius_m` of fix `i`. If the window spans at least `min_dwell_s` the
/// centroid of the window is emitted (arrival = first fix time, departure =
/// last fix time) and the anchor restarts past the window; otherwise the
/// anchor advances by one fix.
pub fn detect_stay_points(trace: &Trace, params: &StayPointParams) -> Vec<StayPoint> {
    let fixes = &trace.fixes;
    let mut out = Vec::new();
    let mut i = 0;
    while i < fixes.len() {
        let mut j = i + 1;
        while j < fixes.len() && fixes[j].distance_m(&fixes[i]) <= params.radius_m {
            j += 1;
        }
        if fixes[j - 1].timestamp_s - fixes[i].timestamp_s >= params.min_dwell_s {
            let window = &fixes[i..j];
            let n = window.len() as f64;
            out.push(StayPoint {
                x_m: window.iter().map(|f| f.x_m).sum::<f64>() / n,
                y_m: window.iter().map(|f| f.y_m).sum::<f64>() / n,
                arrival_s: fixes[i].timestamp_s,
                departure_s: fixes[j - 1].timestamp_s,
            });
            i = j;
        } else {
            i += 1;
        }
    }
    out
}

/// Resamples a trace onto a regular tick grid anchored at its first fix.
///
/// Samples are taken at `start, start+tick, ...` up to the last fix time;
/// when the trace length is not a tick multiple the final fix time is
/// appended so the active window is always covered end to end. Positions
/// between fixes are linearly interpolated; nothing is extrapolated.
pub fn resample(trace: &Trace, tick_s: f64) -> Trace {
    assert!(tick_s > 0.0, "tick must be positive");
    assert!(!trace.fixes.is_empty(), "cannot resample an empty trace");
    const EPS: f64 = 1e-9;
    let start = trace.start_s();
    let end = trace.end_s();
    let mut fixes = Vec::new();
    let mut k = 0u64;
    loop {
        let t = start + k as f64 * tick_s;
        if t > end + EPS {
            break;
        }
        let (x_m, y_m) = trace.position_at(t.min(end)).expect("t inside window");
        fixes.push(GpsFix {
            timestamp_s: t.min(end),
            x_m,
            y_m,
        });
        k += 1;
    }
    if fixes.last().map_or(true, |f| f.timestamp_s < end - EPS) {
        let (x_m, y_m) = trace.position_at(end).expect("end inside window");
        fixes.push(GpsFix {
            timestamp_s: end,
            x_m,
            y_m,
        });
    }
    Trace {
        node_id: trace.node_id.clone(),
        fixes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace(fixes: &[(f64, f64, f64)]) -> Trace {
        Trace {
            node_id: "n".into(),
            fixes: fixes
                .iter()
                .map(|&(t, x, y)| GpsFix {
                    timestamp_s: t,
                    x_m: x,
                    y_m: y,
                })
                .collect(),
        }
    }

    #[test]
    fn parses_interleaved_nodes_into_sorted_traces() {
        let log = "n2,0,10,10\nn1,5,0,0\nn2,10,11,10\nn1,15,1,0\n";
        let traces = parse_log(log.as_bytes()).unwrap();
        assert_eq!(traces.len(), 2);
        assert_eq!(traces[0].node_id, "n1");
        assert_eq!(traces[1].node_id, "n2");
        assert_eq!(traces[0].fixes.len(), 2);
        assert_eq!(traces[1].fixes[1].timestamp_s, 10.0);
    }

    #[test]
    fn skips_header_comments_and_blank_lines() {
        let log = "# synthetic walk\nnode_id,timestamp_s,x_m,y_m\n\na,0,1,2\na,10,3,4\n";
        let traces = parse_log(log.as_bytes()).unwrap();
        assert_eq!(traces.len(), 1);
        assert_eq!(traces[0].fixes.len(), 2);
        assert_eq!(traces[0].fixes[0].x_m, 1.0);
    }

    #[test]
    fn rejects_malformed_row_with_line_number() {
        let log = "a,0,1,2\na,10,oops,4\n";
        match parse_log(log.as_bytes()) {
            Err(IngestError::MalformedRow { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected malformed-row error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_wrong_field_count() {
        let log = "a,0,1,2\na,10,3\n";
        assert!(matches!(
            parse_log(log.as_bytes()),
            Err(IngestError::MalformedRow { line: 2, .. })
        ));
    }

    #[test]
    fn rejects_out_of_order_timestamps() {
        let log = "n1,10,0,0\nn1,5,1,1\n";
        match parse_log(log.as_bytes()) {
            Err(IngestError::UnsortedTimestamps { node, line }) => {
                assert_eq!(node, "n1");
                assert_eq!(line, 2);
            }
            other => panic!("expected unsorted-timestamp error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_duplicate_timestamps() {
        let log = "n1,10,0,0\nn2,3,0,0\nn1,10,1,1\n";
        assert!(matches!(
            parse_log(log.as_bytes()),
            Err(IngestError::UnsortedTimestamps { line: 3, .. })
        ));
    }

    #[test]
    fn empty_log_is_an_error() {
        assert!(matches!(
            parse_log("# only a comment\n".as_bytes()),
            Err(IngestError::EmptyInput)
        ));
    }

    #[test]
    fn stationary_fixes_become_one_stay_point() {
        let tr = trace(&[(0.0, 0.0, 0.0), (20.0, 0.0, 0.0), (40.0, 0.0, 0.0)]);
        let sps = detect_stay_points(&tr, &StayPointParams::default());
        assert_eq!(sps.len(), 1);
        assert_eq!(sps[0].x_m, 0.0);
        assert_eq!(sps[0].arrival_s, 0.0);
        assert_eq!(sps[0].departure_s, 40.0);
        assert!(sps[0].departure_s - sps[0].arrival_s >= 30.0);
    }

    #[test]
    fn dwell_centroid_matches_hand_computation() {
        // Three fixes within 5 m of the first one over a full minute, then a
        // jump far away: exactly one stay point at the window centroid.
        let tr = trace(&[
            (0.0, 0.0, 0.0),
            (30.0, 3.0, 0.0),
            (60.0, 0.0, 4.0),
            (70.0, 500.0, 500.0),
        ]);
        let sps = detect_stay_points(&tr, &StayPointParams::default());
        assert_eq!(sps.len(), 1);
        assert!((sps[0].x_m - 1.0).abs() < 1e-12);
        assert!((sps[0].y_m - 4.0 / 3.0).abs() < 1e-12);
        assert_eq!(sps[0].departure_s, 60.0);
    }

    #[test]
    fn fast_movement_yields_no_stay_points() {
        // 10 m between consecutive fixes: no window ever satisfies the radius.
        let fixes: Vec<(f64, f64, f64)> =
            (0..20).map(|k| (k as f64 * 10.0, k as f64 * 10.0, 0.0)).collect();
        let sps = detect_stay_points(&trace(&fixes), &StayPointParams::default());
        assert!(sps.is_empty());
    }

    #[test]
    fn short_dwell_below_threshold_is_ignored() {
        let tr = trace(&[(0.0, 0.0, 0.0), (20.0, 1.0, 0.0), (25.0, 100.0, 0.0)]);
        let sps = detect_stay_points(&tr, &StayPointParams::default());
        assert!(sps.is_empty());
    }

    #[test]
    fn detection_is_translation_invariant() {
        let base = vec![
            (0.0, 0.0, 0.0),
            (30.0, 3.0, 0.0),
            (60.0, 0.0, 4.0),
            (70.0, 500.0, 500.0),
            (130.0, 500.0, 501.0),
        ];
        let shifted: Vec<(f64, f64, f64)> =
            base.iter().map(|&(t, x, y)| (t, x + 1000.0, y - 2000.0)).collect();
        let a = detect_stay_points(&trace(&base), &StayPointParams::default());
        let b = detect_stay_points(&trace(&shifted), &StayPointParams::default());
        assert_eq!(a.len(), b.len());
        for (sa, sb) in a.iter().zip(&b) {
            assert!((sb.x_m - sa.x_m - 1000.0).abs() < 1e-9);
            assert!((sb.y_m - sa.y_m + 2000.0).abs() < 1e-9);
            assert_eq!(sa.arrival_s, sb.arrival_s);
        }
    }

    #[test]
    fn stay_point_spans_satisfy_dwell_and_radius_bounds() {
        // A seeded jittery walk with pauses. Every emitted stay point must
        // dwell at least the threshold, every backing fix sits within the
        // radius of its window anchor, and (by the triangle inequality)
        // within twice the radius of the centroid; spans must not overlap.
        let params = StayPointParams::default();
        let mut state = 0x1234_5678_u64;
        let mut rnd = move || {
            // xorshift is plenty for jitter in a fixture
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let mut fixes = Vec::new();
        let mut t = 0.0;
        let mut pos = (0.0, 0.0);
        for leg in 0..40 {
            if leg % 2 == 0 {
                // pause: jitter within ~2 m for 40-120 s
                let dwell = 40.0 + 80.0 * rnd();
                let end = t + dwell;
                while t < end {
                    fixes.push((t, pos.0 + 2.0 * rnd(), pos.1 + 2.0 * rnd()));
                    t += 5.0;
                }
            } else {
                // travel: big jump in a few fixes
                for _ in 0..3 {
                    pos = (pos.0 + 60.0 + 40.0 * rnd(), pos.1 + 60.0 * rnd());
                    fixes.push((t, pos.0, pos.1));
                    t += 10.0;
                }
            }
        }
        let tr = trace(&fixes);
        let sps = detect_stay_points(&tr, &params);
        assert!(!sps.is_empty(), "fixture should produce stay points");
        let mut prev_departure = f64::NEG_INFINITY;
        for sp in &sps {
            assert!(sp.departure_s - sp.arrival_s >= params.min_dwell_s);
            assert!(sp.arrival_s > prev_departure, "spans must not overlap");
            prev_departure = sp.departure_s;
            let window: Vec<&GpsFix> = tr
                .fixes
                .iter()
                .filter(|f| f.timestamp_s >= sp.arrival_s && f.timestamp_s <= sp.departure_s)
                .collect();
            let anchor = window[0];
            let centroid = GpsFix {
                timestamp_s: 0.0,
                x_m: sp.x_m,
                y_m: sp.y_m,
            };
            for f in &window {
                assert!(f.distance_m(anchor) <= params.radius_m + 1e-9);
                assert!(f.distance_m(&centroid) <= 2.0 * params.radius_m + 1e-9);
            }
        }
    }

    #[test]
    fn resample_interpolates_and_keeps_endpoint() {
        let tr = trace(&[(0.0, 0.0, 0.0), (3.0, 3.0, 3.0)]);
        let rs = resample(&tr, 2.0);
        let got: Vec<(f64, f64, f64)> =
            rs.fixes.iter().map(|f| (f.timestamp_s, f.x_m, f.y_m)).collect();
        assert_eq!(got, vec![(0.0, 0.0, 0.0), (2.0, 2.0, 2.0), (3.0, 3.0, 3.0)]);
    }

    #[test]
    fn resample_single_fix_is_identity() {
        let tr = trace(&[(7.0, 1.0, 2.0)]);
        let rs = resample(&tr, 10.0);
        assert_eq!(rs.fixes, tr.fixes);
    }

    #[test]
    fn resample_is_idempotent_on_aligned_traces() {
        let tr = trace(&[(0.0, 0.0, 0.0), (10.0, 10.0, 0.0), (20.0, 10.0, 10.0)]);
        let once = resample(&tr, 5.0);
        let twice = resample(&once, 5.0);
        assert_eq!(once, twice);
    }

    #[test]
    fn position_at_handles_exact_and_out_of_range_times() {
        let tr = trace(&[(0.0, 0.0, 0.0), (10.0, 10.0, 20.0)]);
        assert_eq!(tr.position_at(0.0), Some((0.0, 0.0)));
        assert_eq!(tr.position_at(10.0), Some((10.0, 20.0)));
        assert_eq!(tr.position_at(5.0), Some((5.0, 10.0)));
        assert_eq!(tr.position_at(-1.0), None);
        assert_eq!(tr.position_at(10.1), None);
    }
}
