//! Relative-entropy utilities: centrality, similarity, personality, and the
//! combined pairwise Hoten utility.
//!
//! All divergences use the natural logarithm and a zero-substitution rule:
//! exact zeros in either vector are replaced by a small positive `delta`
//! (default 1e-6) and the vector is *not* renormalized afterwards. That keeps
//! every term finite without disturbing the non-zero entries.
//!
//! Reciprocal scores are floored: `1 / max(divergence, floor)` with
//! `floor = delta` by default, so identical distributions score the maximum
//! `1/floor` instead of dividing by zero. The floor also absorbs the
//! microscopic negative drift a substituted, unnormalized divergence can
//! exhibit on heavily truncated vectors.
//!
//! A node is scored by three ingredients:
//! * **centrality** — how closely its full personal visit distribution
//!   tracks the network-wide distribution (inverse divergence),
//! * **similarity** — how closely two advertised (top-k truncated)
//!   distributions track each other (inverse symmetric divergence),
//! * **personality** — the Shannon entropy of its personal distribution
//!   (higher entropy = more exploratory mobility).
//!
//! The Hoten utility of node i against node j for destination d mixes the
//! three pairwise ratios with weights alpha/beta/gamma; the two sides of any
//! pair always sum to 1.

use thiserror::Error;

use crate::grid::{truncate_top_k, WeightVector};

/// Tuning knobs for the entropy utilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyParams {
    /// Substituted for exact zeros inside divergences.
    pub delta: f64,
    /// Lower bound applied to divergences before taking reciprocals.
    pub floor: f64,
    /// Weight of the centrality ratio in the combined utility.
    pub alpha: f64,
    /// Weight of the similarity ratio.
    pub beta: f64,
    /// Weight of the personality ratio.
    pub gamma: f64,
}

impl Default for EntropyParams {
    fn default() -> Self {
        EntropyParams {
            delta: 1e-6,
            floor: 1e-6,
            alpha: 1.0 / 3.0,
            beta: 1.0 / 3.0,
            gamma: 1.0 / 3.0,
        }
    }
}

impl EntropyParams {
    /// Builds params with the given component weights and substitution value.
    /// The floor defaults to `delta`; weights must be non-negative and sum
    /// to 1 (within 1e-12).
    pub fn new(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Result<Self, EntropyError> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(EntropyError::InvalidParams(format!(
                "delta must be positive and finite, got {delta}"
            )));
        }
        if alpha < 0.0 || beta < 0.0 || gamma < 0.0 {
            return Err(EntropyError::InvalidParams(format!(
                "component weights must be non-negative, got {alpha}/{beta}/{gamma}"
            )));
        }
        let sum = alpha + beta + gamma;
        if (sum - 1.0).abs() > 1e-12 {
            return Err(EntropyError::InvalidParams(format!(
                "component weights must sum to 1, got {sum}"
            )));
        }
        Ok(EntropyParams {
            delta,
            floor: delta,
            alpha,
            beta,
            gamma,
        })
    }
}

/// What a node knows about itself: its full personal visit distribution and
/// the truncated form it advertises to peers. The advertised vector is what
/// similarity comparisons see; centrality and personality always use the
/// full local vector.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeProfile {
    pub node_id: usize,
    pub personal: WeightVector,
    pub advertised: WeightVector,
    pub version: u64,
}

impl NodeProfile {
    /// Profile with an advertised vector truncated to the `top_k` heaviest
    /// cells of `personal`.
    pub fn new(node_id: usize, personal: WeightVector, top_k: usize) -> Self {
        let advertised = truncate_top_k(&personal, top_k);
        NodeProfile {
            node_id,
            personal,
            advertised,
            version: 1,
        }
    }

    /// Profile reconstructed from a gossiped advertised vector, when the
    /// full personal vector is not known.
    pub fn from_advertised(node_id: usize, advertised: WeightVector, version: u64) -> Self {
        NodeProfile {
            node_id,
            personal: advertised.clone(),
            advertised,
            version,
        }
    }
}

/// The network-wide visit distribution a node compares itself against,
/// either the pooled-count oracle or a gossip estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct PublicProfile {
    pub weights: WeightVector,
}

impl PublicProfile {
    pub fn new(weights: WeightVector) -> Self {
        PublicProfile { weights }
    }
}

/// Failures in the entropy computations.
#[derive(Debug, Error, PartialEq)]
pub enum EntropyError {
    #[error("weight vectors have different lengths ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

fn check_len(p: &WeightVector, q: &WeightVector) -> Result<(), EntropyError> {
    if p.len() != q.len() {
        return Err(EntropyError::LengthMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    Ok(())
}

/// Divergence of `p` from `q` with zero substitution: exact zeros on either
/// side are replaced by `delta` and no renormalization is applied.
pub fn kl_divergence(p: &WeightVector, q: &WeightVector, delta: f64) -> Result<f64, EntropyError> {
    assert!(delta > 0.0, "delta must be positive");
    check_len(p, q)?;
    let mut sum = 0.0;
    for (&pj, &qj) in p.iter().zip(q.iter()) {
        let pj = if pj == 0.0 { delta } else { pj };
        let qj = if qj == 0.0 { delta } else { qj };
        sum += pj * (pj / qj).ln();
    }
    Ok(sum)
}

/// Centrality: how closely a node's full personal distribution tracks the
/// public one; the floored reciprocal of their divergence. Maximal (equal to
/// `1/floor`) when the two coincide.
pub fn centrality(
    personal: &WeightVector,
    public: &PublicProfile,
    params: &EntropyParams,
) -> Result<f64, EntropyError> {
    let d = kl_divergence(personal, &public.weights, params.delta)?;
    Ok(1.0 / d.max(params.floor))
}

/// Similarity between two advertised distributions: the floored reciprocal
/// of their symmetric divergence. Symmetric in its arguments.
pub fn similarity(
    a: &WeightVector,
    b: &WeightVector,
    params: &EntropyParams,
) -> Result<f64, EntropyError> {
    let d = kl_divergence(a, b, params.delta)? + kl_divergence(b, a, params.delta)?;
    Ok(1.0 / d.max(params.floor))
}

/// Personality: the Shannon entropy of the personal distribution, with the
/// same zero substitution as the divergences. Low entropy means strongly
/// habitual movement; high entropy means exploratory movement.
pub fn personality(personal: &WeightVector, params: &EntropyParams) -> f64 {
    let mut sum = 0.0;
    for &wj in personal.iter() {
        let wj = if wj == 0.0 { params.delta } else { wj };
        sum -= wj * wj.ln();
    }
    sum
}

/// The three ingredients of one side of a Hoten comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UtilityComponents {
    pub centrality: f64,
    pub similarity: f64,
    pub personality: f64,
}

pub(crate) fn pairwise_ratio(mine: f64, theirs: f64) -> f64 {
    let total = mine + theirs;
    if total == 0.0 {
        0.5
    } else {
        mine / total
    }
}

/// Combines two sides' components into the utility of the `mine` side:
/// `alpha * bet + beta * sim + gamma * per` over the pairwise ratios. The
/// two sides of a pair sum to 1; a component that is zero on both sides
/// contributes a neutral ratio of 0.5.
pub fn hoten_from_components(
    params: &EntropyParams,
    mine: &UtilityComponents,
    theirs: &UtilityComponents,
) -> f64 {
    params.alpha * pairwise_ratio(mine.centrality, theirs.centrality)
        + params.beta * pairwise_ratio(mine.similarity, theirs.similarity)
        + params.gamma * pairwise_ratio(mine.personality, theirs.personality)
}

fn components(
    node: &NodeProfile,
    dest: &NodeProfile,
    public: &PublicProfile,
    params: &EntropyParams,
) -> Result<UtilityComponents, EntropyError> {
    Ok(UtilityComponents {
        centrality: centrality(&node.personal, public, params)?,
        similarity: similarity(&node.advertised, &dest.advertised, params)?,
        personality: personality(&node.personal, params),
    })
}

/// The Hoten utility of node `i` against node `j` as a relay for messages
/// addressed to `dest`. `hoten_utility(i, j, ...)` and
/// `hoten_utility(j, i, ...)` always sum to 1; identical profiles score
/// exactly 0.5 each.
pub fn hoten_utility(
    i: &NodeProfile,
    j: &NodeProfile,
    dest: &NodeProfile,
    public: &PublicProfile,
    params: &EntropyParams,
) -> Result<f64, EntropyError> {
    let mine = components(i, dest, public, params)?;
    let theirs = components(j, dest, public, params)?;
    Ok(hoten_from_components(params, &mine, &theirs))
}
