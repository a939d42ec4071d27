//! Synthetic GPS trace generation with hotspot-biased mobility.
//!
//! Nodes move inside a square area containing a set of shared hotspot
//! centers. Each node ranks the hotspots in its own random order and keeps
//! drawing the next destination from a Zipf distribution over that ranking,
//! so every node concentrates its dwell time on a few personally favorite
//! places while the favorites differ between nodes. At each destination the
//! node pauses (uniform duration), then walks to the next one in a straight
//! line at constant speed. Positions are recorded on a fixed sampling
//! cadence.
//!
//! All randomness flows from one seeded ChaCha8 stream consumed strictly as
//! raw 64-bit draws, so a given parameter set reproduces byte-identical
//! traces on every platform and build.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::ingest::{GpsFix, Trace};

/// Parameters for the synthetic mobility model.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthParams {
    pub n_nodes: usize,
    pub n_hotspots: usize,
    /// Zipf exponent over each node's personal hotspot ranking; 0 means the
    /// node picks destinations uniformly.
    pub zipf_s: f64,
    /// Total area of the square world, in square metres.
    pub area_m2: f64,
    pub duration_s: f64,
    pub pause_min_s: f64,
    pub pause_max_s: f64,
    pub speed_mps: f64,
    /// Dwell points are drawn uniformly from a disc of this radius around
    /// the chosen hotspot center.
    pub hotspot_radius_m: f64,
    pub fix_interval_s: f64,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            n_nodes: 20,
            n_hotspots: 20,
            zipf_s: 1.2,
            area_m2: 4.0e6,
            duration_s: 15_000.0,
            pause_min_s: 60.0,
            pause_max_s: 600.0,
            speed_mps: 1.5,
            hotspot_radius_m: 50.0,
            fix_interval_s: 5.0,
            seed: 42,
        }
    }
}

/// Synthetic generation failures.
#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("invalid synthetic mobility parameters: {0}")]
    InvalidParams(String),
}

impl SynthParams {
    /// Side length of the square world.
    pub fn side_m(&self) -> f64 {
        self.area_m2.sqrt()
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |msg: &str| Err(SynthError::InvalidParams(msg.to_string()));
        if self.n_nodes == 0 {
            return bad("n_nodes must be at least 1");
        }
        if self.n_hotspots == 0 {
            return bad("n_hotspots must be at least 1");
        }
        if !self.zipf_s.is_finite() || self.zipf_s < 0.0 {
            return bad("zipf_s must be finite and non-negative");
        }
        if !(self.area_m2 > 0.0) || !self.area_m2.is_finite() {
            return bad("area_m2 must be positive and finite");
        }
        if !(self.duration_s > 0.0) || !self.duration_s.is_finite() {
            return bad("duration_s must be positive and finite");
        }
        if !(self.pause_min_s > 0.0) || self.pause_max_s < self.pause_min_s {
            return bad("pauses need 0 < pause_min_s <= pause_max_s");
        }
        if !(self.speed_mps > 0.0) || !self.speed_mps.is_finite() {
            return bad("speed_mps must be positive and finite");
        }
        if !(self.hotspot_radius_m > 0.0) {
            return bad("hotspot_radius_m must be positive");
        }
        if !(self.fix_interval_s > 0.0) {
            return bad("fix_interval_s must be positive");
        }
        if self.side_m() < 2.0 * self.hotspot_radius_m {
            return bad("the area is too small for the hotspot radius");
        }
        Ok(())
    }
}

/// Uniform f64 in [0, 1) from the top 53 bits of one raw draw.
fn uniform01(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Unbiased uniform index in `0..n` by rejection sampling raw draws.
fn uniform_index(rng: &mut ChaCha8Rng, n: usize) -> usize {
    debug_assert!(n > 0);
    let n = n as u64;
    let zone = u64::MAX - (u64::MAX % n);
    loop {
        let v = rng.next_u64();
        if v < zone {
            return (v % n) as usize;
        }
    }
}

/// One straight-line (or stationary) leg of an itinerary.
struct Segment {
    t0: f64,
    t1: f64,
    x0: f64,
    y0: f64,
    x1: f64,
    y1: f64,
}

impl Segment {
    fn position_at(&self, t: f64) -> (f64, f64) {
        if self.t1 <= self.t0 {
            return (self.x1, self.y1);
        }
        let f = ((t - self.t0) / (self.t1 - self.t0)).clamp(0.0, 1.0);
        (self.x0 + f * (self.x1 - self.x0), self.y0 + f * (self.y1 - self.y0))
    }
}

/// Draws the shared hotspot centers, inset so every dwell disc stays inside
/// the world. This consumes the first `2 * n_hotspots` uniform draws of the
/// stream, before any per-node randomness.
fn draw_centers(rng: &mut ChaCha8Rng, params: &SynthParams) -> Vec<(f64, f64)> {
    let side = params.side_m();
    let r = params.hotspot_radius_m;
    (0..params.n_hotspots)
        .map(|_| {
            let x = r + uniform01(rng) * (side - 2.0 * r);
            let y = r + uniform01(rng) * (side - 2.0 * r);
            (x, y)
        })
        .collect()
}

/// The hotspot centers a given scenario generates, without the traces. This
/// is the scenario's ground truth, handy for evaluating mined profiles
/// against the places the nodes were actually drawn to.
pub fn hotspot_centers(params: &SynthParams) -> Result<Vec<(f64, f64)>, SynthError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    Ok(draw_centers(&mut rng, params))
}

/// Generates one trace per node under the hotspot-biased mobility model.
/// Fix timestamps run on the sampling grid `0, Δ, 2Δ, …` and always include
/// the final instant `duration_s`.
pub fn synth_traces(params: &SynthParams) -> Result<Vec<Trace>, SynthError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let r = params.hotspot_radius_m;

    let centers = draw_centers(&mut rng, params);

    // Zipf weights over ranks: w_r proportional to (r + 1)^(-s)
    let zipf_w: Vec<f64> = (0..params.n_hotspots)
        .map(|rank| ((rank + 1) as f64).powf(-params.zipf_s))
        .collect();
    let zipf_total: f64 = zipf_w.iter().sum();

    let mut traces = Vec::with_capacity(params.n_nodes);
    for node in 0..params.n_nodes {
        // this node's personal ranking of the shared hotspots
        let mut ranking: Vec<usize> = (0..params.n_hotspots).collect();
        for i in (1..ranking.len()).rev() {
            let j = uniform_index(&mut rng, i + 1);
            ranking.swap(i, j);
        }
        let draw_center = |rng: &mut ChaCha8Rng| {
            let target = uniform01(rng) * zipf_total;
            let mut acc = 0.0;
            let mut rank = zipf_w.len() - 1;
            for (i, w) in zipf_w.iter().enumerate() {
                acc += w;
                if target < acc {
                    rank = i;
                    break;
                }
            }
            centers[ranking[rank]]
        };
        let draw_point = |rng: &mut ChaCha8Rng, center: (f64, f64)| {
            let radius = r * uniform01(rng).sqrt();
            let angle = 2.0 * std::f64::consts::PI * uniform01(rng);
            (center.0 + radius * angle.cos(), center.1 + radius * angle.sin())
        };

        let mut segments: Vec<Segment> = Vec::new();
        let mut t = 0.0;
        let start_center = draw_center(&mut rng);
        let mut pos = draw_point(&mut rng, start_center);
        while t < params.duration_s {
            let pause =
                params.pause_min_s + uniform01(&mut rng) * (params.pause_max_s - params.pause_min_s);
            segments.push(Segment {
                t0: t,
                t1: t + pause,
                x0: pos.0,
                y0: pos.1,
                x1: pos.0,
                y1: pos.1,
            });
            t += pause;
            let next_center = draw_center(&mut rng);
            let next = draw_point(&mut rng, next_center);
            let dist = ((next.0 - pos.0).powi(2) + (next.1 - pos.1).powi(2)).sqrt();
            let walk = dist / params.speed_mps;
            segments.push(Segment {
                t0: t,
                t1: t + walk,
                x0: pos.0,
                y0: pos.1,
                x1: next.0,
                y1: next.1,
            });
            t += walk;
            pos = next;
        }

        let mut fixes = Vec::new();
        let mut cursor = 0usize;
        let sample = |t: f64, fixes: &mut Vec<GpsFix>, cursor: &mut usize| {
            while *cursor + 1 < segments.len() && segments[*cursor].t1 < t {
                *cursor += 1;
            }
            let (x, y) = segments[*cursor].position_at(t);
            fixes.push(GpsFix { timestamp_s: t, x_m: x, y_m: y });
        };
        let mut k = 0u64;
        loop {
            let ts = k as f64 * params.fix_interval_s;
            if ts > params.duration_s + 1e-9 {
                break;
            }
            sample(ts.min(params.duration_s), &mut fixes, &mut cursor);
            k += 1;
        }
        if fixes.last().map_or(true, |f| f.timestamp_s < params.duration_s - 1e-9) {
            sample(params.duration_s, &mut fixes, &mut cursor);
        }

        traces.push(Trace {
            node_id: format!("n{node:03}"),
            fixes,
        });
    }
    Ok(traces)
}
