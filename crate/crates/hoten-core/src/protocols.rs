//! Store-carry-forward routing protocols replayed over contact events.
//!
//! Three protocols share one node-state shape and one contact entry point
//! per protocol:
//!
//! * **Hoten** — single copy. At a contact the two nodes first merge their
//!   hotspot matrices both ways, then each message is delivered if the peer
//!   is its destination, or handed over (moved, not copied) exactly when the
//!   peer's Hoten utility for the destination is strictly higher than the
//!   holder's. A node keeps no memory of messages it forwarded away, so a
//!   message may legitimately return to a previous holder as the gossiped
//!   public estimate evolves.
//! * **Epidemic** — flooding. Each side copies every live message the peer
//!   has never carried; a delivery terminates at the destination but the
//!   carrier keeps its own copy circulating.
//! * **SimBet** — single copy. Nodes maintain an ego adjacency matrix from
//!   direct contacts plus the neighbor lists peers report, and hand a
//!   message over when the peer wins the 0.5/0.5 mix of betweenness and
//!   common-neighbor similarity ratios (a 0/0 ratio is neutral 0.5).
//!
//! Within one contact the initiating side's queue is processed first, then
//! the peer's, messages in creation order. Expired messages are purged when
//! inspected. Handlers mutate the two node states and report every transfer,
//! so a replay log can be reconstructed and audited downstream.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::entropy::{
    centrality, hoten_from_components, pairwise_ratio, personality, similarity, EntropyError,
    EntropyParams, NodeProfile, PublicProfile, UtilityComponents,
};
use crate::grid::WeightVector;
use crate::matrix::{HotspotMatrix, MatrixError};

/// The routing protocols the simulator can replay.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Protocol {
    Hoten,
    Epidemic,
    SimBet,
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Protocol::Hoten => "hoten",
            Protocol::Epidemic => "epidemic",
            Protocol::SimBet => "simbet",
        })
    }
}

impl FromStr for Protocol {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "hoten" => Ok(Protocol::Hoten),
            "epidemic" => Ok(Protocol::Epidemic),
            "simbet" => Ok(Protocol::SimBet),
            other => Err(format!(
                "unknown protocol `{other}` (expected hoten, epidemic, or simbet)"
            )),
        }
    }
}

/// Message identity: the (source, destination) pair. Creation order equals
/// the lexicographic order of ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MsgId {
    pub src: u32,
    pub dst: u32,
}

impl fmt::Display for MsgId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.src, self.dst)
    }
}

impl FromStr for MsgId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let (src, dst) = s.split_once('-').ok_or_else(|| format!("bad message id `{s}`"))?;
        Ok(MsgId {
            src: src.parse().map_err(|_| format!("bad message id `{s}`"))?,
            dst: dst.parse().map_err(|_| format!("bad message id `{s}`"))?,
        })
    }
}

/// A message in flight. `hop_count` counts successful transfers, including
/// the final delivering hop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Message {
    pub id: MsgId,
    pub created_s: f64,
    pub ttl_s: f64,
    pub hop_count: u32,
}

impl Message {
    /// A message is expired strictly after its time-to-live has elapsed.
    pub fn expired(&self, now_s: f64) -> bool {
        now_s - self.created_s > self.ttl_s
    }
}

/// What happened to one message during a contact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransferKind {
    /// The message reached its destination (single-copy: the copy moved;
    /// epidemic: the carrier keeps its copy).
    Deliver,
    /// A single-copy handover: the message moved from one queue to another.
    Forward,
    /// An epidemic replication: the sender kept its copy.
    Copy,
    /// The message was purged on inspection after its time-to-live passed.
    Expire,
}

impl TransferKind {
    pub fn label(&self) -> &'static str {
        match self {
            TransferKind::Deliver => "deliver",
            TransferKind::Forward => "forward",
            TransferKind::Copy => "copy",
            TransferKind::Expire => "expire",
        }
    }
}

/// One transfer during a contact. For `Expire`, `from == to` is the node
/// that purged the message.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferRecord {
    pub kind: TransferKind,
    pub from: usize,
    pub to: usize,
    pub id: MsgId,
    pub hop_count: u32,
}

/// Symmetric ego adjacency over node indices, with a zero diagonal. Edges
/// are only ever added: from direct contacts and from the neighbor lists
/// peers report.
#[derive(Debug, Clone, PartialEq)]
pub struct EgoMatrix {
    n: usize,
    adj: Vec<bool>,
}

impl EgoMatrix {
    pub fn new(n: usize) -> Self {
        EgoMatrix {
            n,
            adj: vec![false; n * n],
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.n
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u * self.n + v]
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        assert!(u != v, "ego matrix keeps a zero diagonal");
        self.adj[u * self.n + v] = true;
        self.adj[v * self.n + u] = true;
    }

    /// Nodes adjacent to `u`, ascending.
    pub fn neighbors(&self, u: usize) -> Vec<usize> {
        (0..self.n).filter(|&v| self.has_edge(u, v)).collect()
    }

    /// Number of shared neighbors of `u` and `v`.
    pub fn common_neighbors(&self, u: usize, v: usize) -> usize {
        (0..self.n)
            .filter(|&w| self.has_edge(u, w) && self.has_edge(v, w))
            .count()
    }

    /// Ego betweenness of `node`: over every pair of other nodes that are
    /// not directly connected in this matrix, the number of two-hop paths
    /// between them (the matching entry of the squared adjacency matrix).
    pub fn betweenness(&self, node: usize) -> f64 {
        let mut total = 0usize;
        for u in 0..self.n {
            if u == node {
                continue;
            }
            for v in u + 1..self.n {
                if v == node || self.has_edge(u, v) {
                    continue;
                }
                total += self.common_neighbors(u, v);
            }
        }
        total as f64
    }
}

/// Everything a node carries through a simulation run.
#[derive(Debug, Clone)]
pub struct NodeState {
    pub idx: usize,
    pub profile: NodeProfile,
    pub hmatrix: HotspotMatrix,
    pub ego: EgoMatrix,
    /// Live messages held right now, keyed (and iterated) in creation order.
    pub queue: BTreeMap<MsgId, Message>,
    /// Every message id this node has ever held or received. Epidemic uses
    /// it to never re-infect; the single-copy protocols deliberately ignore
    /// it when deciding whether the peer "has" a message.
    pub carried: BTreeSet<MsgId>,
    personality: f64,
    centrality_cache: Option<f64>,
    similarity_cache: BTreeMap<(usize, u64), f64>,
}

impl NodeState {
    /// Fresh state: the hotspot matrix knows only the node's own advertised
    /// row (version 1), the ego matrix is empty, the queue is empty.
    pub fn new(idx: usize, profile: NodeProfile, n_nodes: usize, params: &EntropyParams) -> Self {
        let mut hmatrix = HotspotMatrix::new(n_nodes, profile.personal.len());
        hmatrix
            .set_row(idx, profile.advertised.clone(), 1)
            .expect("own row matches the matrix shape");
        let personality = personality(&profile.personal, params);
        NodeState {
            idx,
            profile,
            hmatrix,
            ego: EgoMatrix::new(n_nodes),
            queue: BTreeMap::new(),
            carried: BTreeSet::new(),
            personality,
            centrality_cache: None,
            similarity_cache: BTreeMap::new(),
        }
    }

    /// Places a message in the queue at creation time (workload seeding).
    pub fn enqueue_initial(&mut self, m: Message) {
        self.carried.insert(m.id);
        self.queue.insert(m.id, m);
    }

    fn note_matrix_changed(&mut self) {
        self.centrality_cache = None;
    }

    /// The three Hoten components of this node for the given destination,
    /// against this node's current view of the network. Centrality falls
    /// back to a uniform public estimate while the matrix holds no mass.
    fn hoten_components(
        &mut self,
        dest: usize,
        ctx: &ContactContext<'_>,
    ) -> Result<UtilityComponents, ProtocolError> {
        let cent = match self.centrality_cache {
            Some(c) => c,
            None => {
                let estimated;
                let public = match ctx.oracle_public {
                    Some(p) => p,
                    None => match self.hmatrix.estimated_public() {
                        Ok(p) => {
                            estimated = p;
                            &estimated
                        }
                        Err(MatrixError::AllPlaceholders) => {
                            let k = self.profile.personal.len();
                            estimated =
                                PublicProfile::new(WeightVector::new(vec![1.0 / k as f64; k]));
                            &estimated
                        }
                        Err(e) => return Err(e.into()),
                    },
                };
                let c = centrality(&self.profile.personal, public, ctx.params)?;
                self.centrality_cache = Some(c);
                c
            }
        };
        let version = self.hmatrix.row(dest).version;
        let key = (dest, version);
        if !self.similarity_cache.contains_key(&key) {
            let s = similarity(
                &self.profile.advertised,
                &self.hmatrix.row(dest).weights,
                ctx.params,
            )?;
            self.similarity_cache.insert(key, s);
        }
        Ok(UtilityComponents {
            centrality: cent,
            similarity: self.similarity_cache[&key],
            personality: self.personality,
        })
    }
}

/// Inputs shared by every Hoten contact: the utility parameters and, in
/// ablation runs, the oracle public distribution that replaces the gossip
/// estimate.
#[derive(Debug, Clone, Copy)]
pub struct ContactContext<'a> {
    pub params: &'a EntropyParams,
    pub oracle_public: Option<&'a PublicProfile>,
}

/// Protocol processing failures.
#[derive(Debug, Error, PartialEq)]
pub enum ProtocolError {
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Entropy(#[from] EntropyError),
}

/// One Hoten contact between `a` and `b` at time `now_s`: hotspot matrices
/// merge both ways, then each side's queue is walked in creation order with
/// strict-improvement single-copy handover.
pub fn hoten_on_contact(
    a: &mut NodeState,
    b: &mut NodeState,
    now_s: f64,
    ctx: &ContactContext<'_>,
) -> Result<Vec<TransferRecord>, ProtocolError> {
    if a.hmatrix.merge_from(&b.hmatrix)? {
        a.note_matrix_changed();
    }
    if b.hmatrix.merge_from(&a.hmatrix)? {
        b.note_matrix_changed();
    }
    let mut cache: BTreeMap<usize, (f64, f64)> = BTreeMap::new();
    let mut records = Vec::new();
    for from_is_a in [true, false] {
        single_copy_pass(
            from_is_a,
            a,
            b,
            now_s,
            &mut records,
            &mut |a, b, dest| {
                if let Some(&pair) = cache.get(&dest) {
                    return Ok(pair);
                }
                let ca = a.hoten_components(dest, ctx)?;
                let cb = b.hoten_components(dest, ctx)?;
                let pair = (
                    hoten_from_components(ctx.params, &ca, &cb),
                    hoten_from_components(ctx.params, &cb, &ca),
                );
                cache.insert(dest, pair);
                Ok(pair)
            },
        )?;
    }
    Ok(records)
}

/// One epidemic contact: each side copies every live message the peer has
/// never carried; messages addressed to the peer are delivered instead (the
/// carrier keeps its copy either way).
pub fn epidemic_on_contact(a: &mut NodeState, b: &mut NodeState, now_s: f64) -> Vec<TransferRecord> {
    let mut records = Vec::new();
    epidemic_pass(a, b, now_s, &mut records);
    epidemic_pass(b, a, now_s, &mut records);
    records
}

fn epidemic_pass(
    from: &mut NodeState,
    to: &mut NodeState,
    now_s: f64,
    records: &mut Vec<TransferRecord>,
) {
    let ids: Vec<MsgId> = from.queue.keys().copied().collect();
    for id in ids {
        let m = from.queue[&id];
        if m.expired(now_s) {
            from.queue.remove(&id);
            records.push(TransferRecord {
                kind: TransferKind::Expire,
                from: from.idx,
                to: from.idx,
                id,
                hop_count: m.hop_count,
            });
            continue;
        }
        if to.carried.contains(&id) {
            continue;
        }
        let mut copy = m;
        copy.hop_count += 1;
        to.carried.insert(id);
        if id.dst as usize == to.idx {
            records.push(TransferRecord {
                kind: TransferKind::Deliver,
                from: from.idx,
                to: to.idx,
                id,
                hop_count: copy.hop_count,
            });
        } else {
            to.queue.insert(id, copy);
            records.push(TransferRecord {
                kind: TransferKind::Copy,
                from: from.idx,
                to: to.idx,
                id,
                hop_count: copy.hop_count,
            });
        }
    }
}

/// One SimBet contact: the direct edge is recorded, neighbor lists are
/// exchanged into both ego matrices, and each side's queue is walked with
/// strict-improvement single-copy handover on the betweenness/similarity
/// mix.
pub fn simbet_on_contact(
    a: &mut NodeState,
    b: &mut NodeState,
    now_s: f64,
) -> Result<Vec<TransferRecord>, ProtocolError> {
    a.ego.add_edge(a.idx, b.idx);
    b.ego.add_edge(a.idx, b.idx);
    for u in b.ego.neighbors(b.idx) {
        if u != a.idx {
            a.ego.add_edge(b.idx, u);
        }
    }
    for u in a.ego.neighbors(a.idx) {
        if u != b.idx {
            b.ego.add_edge(a.idx, u);
        }
    }
    let bet = (a.ego.betweenness(a.idx), b.ego.betweenness(b.idx));
    let mut cache: BTreeMap<usize, (f64, f64)> = BTreeMap::new();
    let mut records = Vec::new();
    for from_is_a in [true, false] {
        single_copy_pass(
            from_is_a,
            a,
            b,
            now_s,
            &mut records,
            &mut |a, b, dest| {
                if let Some(&pair) = cache.get(&dest) {
                    return Ok(pair);
                }
                let sim_a = a.ego.common_neighbors(a.idx, dest) as f64;
                let sim_b = b.ego.common_neighbors(b.idx, dest) as f64;
                let pair = (
                    0.5 * pairwise_ratio(bet.0, bet.1) + 0.5 * pairwise_ratio(sim_a, sim_b),
                    0.5 * pairwise_ratio(bet.1, bet.0) + 0.5 * pairwise_ratio(sim_b, sim_a),
                );
                cache.insert(dest, pair);
                Ok(pair)
            },
        )?;
    }
    Ok(records)
}

/// Walks the `from` side's queue in creation order: purge expired messages,
/// deliver those addressed to the peer, and hand the rest over exactly when
/// the peer's utility is strictly higher. `utilities` is always called in
/// `(a, b)` orientation and returns that pair's utilities for a destination.
fn single_copy_pass(
    from_is_a: bool,
    a: &mut NodeState,
    b: &mut NodeState,
    now_s: f64,
    records: &mut Vec<TransferRecord>,
    utilities: &mut dyn FnMut(
        &mut NodeState,
        &mut NodeState,
        usize,
    ) -> Result<(f64, f64), ProtocolError>,
) -> Result<(), ProtocolError> {
    let ids: Vec<MsgId> = if from_is_a {
        a.queue.keys().copied().collect()
    } else {
        b.queue.keys().copied().collect()
    };
    for id in ids {
        {
            let (from, to) = if from_is_a { (&mut *a, &mut *b) } else { (&mut *b, &mut *a) };
            let Some(&m) = from.queue.get(&id) else { continue };
            debug_assert_ne!(id.dst as usize, from.idx, "a message never sits at its destination");
            if m.expired(now_s) {
                from.queue.remove(&id);
                records.push(TransferRecord {
                    kind: TransferKind::Expire,
                    from: from.idx,
                    to: from.idx,
                    id,
                    hop_count: m.hop_count,
                });
                continue;
            }
            if id.dst as usize == to.idx {
                from.queue.remove(&id);
                to.carried.insert(id);
                records.push(TransferRecord {
                    kind: TransferKind::Deliver,
                    from: from.idx,
                    to: to.idx,
                    id,
                    hop_count: m.hop_count + 1,
                });
                continue;
            }
            if to.queue.contains_key(&id) {
                continue;
            }
        }
        let (ua, ub) = utilities(a, b, id.dst as usize)?;
        let (u_from, u_to) = if from_is_a { (ua, ub) } else { (ub, ua) };
        if u_from < u_to {
            let (from, to) = if from_is_a { (&mut *a, &mut *b) } else { (&mut *b, &mut *a) };
            let mut m = from.queue.remove(&id).expect("message still held");
            m.hop_count += 1;
            to.carried.insert(id);
            records.push(TransferRecord {
                kind: TransferKind::Forward,
                from: from.idx,
                to: to.idx,
                id,
                hop_count: m.hop_count,
            });
            to.queue.insert(id, m);
        }
    }
    Ok(())
}
