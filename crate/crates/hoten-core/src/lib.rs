//! Hotspot-entropy routing laboratory for delay tolerant networks.
//!
//! The library turns raw GPS logs into movement statistics and replays
//! store-carry-forward routing protocols over the contacts implied by those
//! logs. The pipeline has three stages:
//!
//! 1. **Mining** — [`ingest`] parses GPS logs and condenses them into stay
//!    points; [`grid`] bins stay points into a square-cell hotspot grid and
//!    produces per-node and network-wide visit-weight vectors; [`hurst`]
//!    picks the grid cell size that maximises the self-similarity of the
//!    per-cell count series.
//! 2. **Utilities** — [`entropy`] scores nodes with relative-entropy
//!    centrality, symmetric-divergence similarity, and Shannon-entropy
//!    personality, and combines the three into the pairwise Hoten utility.
//! 3. **Replay** — [`protocols`] implements single-copy Hoten forwarding,
//!    flooding (epidemic) forwarding, and an ego-network SimBet comparator;
//!    [`sim`] extracts contact events from traces and drives the protocols
//!    deterministically; [`synth`] generates reproducible synthetic traces.
//!
//! Everything downstream of trace generation is free of randomness: two runs
//! with the same inputs produce byte-identical reports (see [`report`]).
//!
//! Coordinates are planar metric offsets (metres on a local tangent plane),
//! not raw latitude/longitude; convert before ingest if needed.

pub mod entropy;
pub mod grid;
pub mod hurst;
pub mod ingest;
pub mod matrix;
pub mod protocols;
pub mod report;
pub mod sim;
pub mod synth;
