//! Markov chain on the essential graphs of a fixed node count with uniform
//! stationary distribution.
//!
//! Each transition draws one of seven modification kinds uniformly (one is a
//! no-op), draws the kind's operands uniformly, applies it to the current
//! essential graph and accepts the candidate iff it is again an essential
//! graph; otherwise the state stays put. Complementary kinds share an operand
//! space and invert each other draw-for-draw, so the proposal is symmetric
//! and the stationary distribution over the reachable set is uniform. The
//! no-op gives every state a self-loop, so the chain is aperiodic.
//!
//! Single-pair edits alone cannot connect this state space: a collider
//! a -> c <- b differs from every other essential graph in at least two
//! pairs. The v-structure kinds therefore touch two pairs at once;
//! reachability is checked exhaustively for small n by
//! [`kernel_support_bfs`].

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equivalence::is_essential_graph;
use crate::error::{Error, Result};
use crate::graph::{EdgeMark, NodeId, Pdag};

/// Sampler cap; chains beyond this are out of experimental range.
pub const MAX_CHAIN_NODES: usize = 40;

/// Reachability checks enumerate the full state space, so they stay small.
pub const MAX_BFS_NODES: usize = 4;

/// The seven modification kinds. `AddUndirected`/`DeleteUndirected` and
/// `AddDirected`/`DeleteDirected` act on one node pair; the v-structure pair
/// acts on a (pair, center) triple and is symmetric in the pair.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum MoveKind {
    NoOp,
    AddUndirected,
    DeleteUndirected,
    AddDirected,
    DeleteDirected,
    MakeVStructure,
    RemoveVStructure,
}

pub const MOVE_KINDS: [MoveKind; 7] = [
    MoveKind::NoOp,
    MoveKind::AddUndirected,
    MoveKind::DeleteUndirected,
    MoveKind::AddDirected,
    MoveKind::DeleteDirected,
    MoveKind::MakeVStructure,
    MoveKind::RemoveVStructure,
];

impl MoveKind {
    fn needs_center(self) -> bool {
        matches!(self, MoveKind::MakeVStructure | MoveKind::RemoveVStructure)
    }
}

/// One fully drawn modification.
#[derive(Clone, Copy, Debug)]
pub struct Move {
    pub kind: MoveKind,
    pub u: NodeId,
    pub v: NodeId,
    /// Collider center for the v-structure kinds.
    pub center: Option<NodeId>,
}

/// Applies `mv` to `g`; `None` means the draw leaves the graph unchanged
/// (no-op kind or inapplicable operands). A `Some` result always differs
/// from `g`.
pub fn apply_move(g: &Pdag, mv: &Move) -> Option<Pdag> {
    let (u, v) = (mv.u, mv.v);
    match mv.kind {
        MoveKind::NoOp => None,
        MoveKind::AddUndirected => {
            if g.mark(u, v) != EdgeMark::Absent {
                return None;
            }
            let mut out = g.clone();
            out.set_mark(u, v, EdgeMark::Undirected);
            Some(out)
        }
        MoveKind::DeleteUndirected => {
            if g.mark(u, v) != EdgeMark::Undirected {
                return None;
            }
            let mut out = g.clone();
            out.set_mark(u, v, EdgeMark::Absent);
            Some(out)
        }
        MoveKind::AddDirected => {
            if g.mark(u, v) != EdgeMark::Absent {
                return None;
            }
            let mut out = g.clone();
            out.set_mark(u, v, EdgeMark::Directed(u, v));
            Some(out)
        }
        MoveKind::DeleteDirected => {
            if g.mark(u, v) != EdgeMark::Directed(u, v) {
                return None;
            }
            let mut out = g.clone();
            out.set_mark(u, v, EdgeMark::Absent);
            Some(out)
        }
        MoveKind::MakeVStructure => {
            let c = mv.center?;
            if g.mark(u, c) != EdgeMark::Undirected
                || g.mark(v, c) != EdgeMark::Undirected
                || g.mark(u, v) != EdgeMark::Absent
            {
                return None;
            }
            let mut out = g.clone();
            out.set_mark(u, c, EdgeMark::Directed(u, c));
            out.set_mark(v, c, EdgeMark::Directed(v, c));
            Some(out)
        }
        MoveKind::RemoveVStructure => {
            let c = mv.center?;
            if g.mark(u, c) != EdgeMark::Directed(u, c)
                || g.mark(v, c) != EdgeMark::Directed(v, c)
                || g.mark(u, v) != EdgeMark::Absent
            {
                return None;
            }
            let mut out = g.clone();
            out.set_mark(u, c, EdgeMark::Undirected);
            out.set_mark(v, c, EdgeMark::Undirected);
            Some(out)
        }
    }
}

/// Decodes ordered-pair index `idx` in [0, n(n-1)).
fn decode_pair(n: usize, idx: usize) -> (NodeId, NodeId) {
    let u = idx / (n - 1);
    let r = idx % (n - 1);
    let v = if r < u { r } else { r + 1 };
    (NodeId::new(u), NodeId::new(v))
}

/// Decodes third-node index `idx` in [0, n-2), skipping `u` and `v`.
fn decode_center(idx: usize, u: NodeId, v: NodeId) -> NodeId {
    let lo = u.index().min(v.index());
    let hi = u.index().max(v.index());
    let mut c = idx;
    if c >= lo {
        c += 1;
    }
    if c >= hi {
        c += 1;
    }
    NodeId::new(c)
}

/// Draws one modification: the kind uniformly over the seven, an ordered pair
/// uniformly over the n(n-1) pairs, and for the v-structure kinds a center
/// uniformly over the remaining n-2 nodes. `None` when the draw cannot
/// change the graph.
fn propose_draw<R: Rng>(g: &Pdag, rng: &mut R) -> Option<Pdag> {
    let n = g.node_count();
    let kind = MOVE_KINDS[rng.gen_range(0..MOVE_KINDS.len())];
    if kind == MoveKind::NoOp || n < 2 {
        return None;
    }
    let (u, v) = decode_pair(n, rng.gen_range(0..n * (n - 1)));
    let center = if kind.needs_center() {
        if n < 3 {
            return None;
        }
        Some(decode_center(rng.gen_range(0..n - 2), u, v))
    } else {
        None
    };
    apply_move(g, &Move { kind, u, v, center })
}

/// Candidate for one transition from essential graph `g`; equals `g` when the
/// draw was a no-op or inapplicable.
pub fn propose<R: Rng>(g: &Pdag, rng: &mut R) -> Pdag {
    propose_draw(g, rng).unwrap_or_else(|| g.clone())
}

/// One transition: the candidate replaces `g` iff it is an essential graph.
pub fn step<R: Rng>(g: &Pdag, rng: &mut R) -> Pdag {
    match propose_draw(g, rng) {
        Some(candidate) if is_essential_graph(&candidate) => candidate,
        _ => g.clone(),
    }
}

/// Chain ensemble configuration.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChainConfig {
    pub n: usize,
    /// Transitions per chain.
    pub steps: u64,
    /// Independent chains; each yields one terminal sample.
    pub chains: u64,
    pub seed: u64,
    /// Emit the terminal state's canonical key with each record.
    pub record_graphs: bool,
}

impl ChainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n > MAX_CHAIN_NODES {
            return Err(Error::InvalidConfig(format!(
                "node count {} outside 1..={MAX_CHAIN_NODES}",
                self.n
            )));
        }
        if self.steps == 0 {
            return Err(Error::InvalidConfig("steps must be at least 1".into()));
        }
        if self.chains == 0 {
            return Err(Error::InvalidConfig("chains must be at least 1".into()));
        }
        Ok(())
    }
}

/// Terminal observation of one chain.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SampleRecord {
    pub n: usize,
    pub chain_index: u64,
    pub steps: u64,
    pub is_edag: bool,
    pub is_connected: bool,
    /// Fraction of transitions whose output differed from their input.
    pub changed_fraction: f64,
    pub chain_seed: u64,
    /// Base64 canonical key of the terminal state, when requested.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub canonical_key: Option<String>,
}

/// Per-chain seed: the (chain_index + 1)-th output of the SplitMix64 stream
/// seeded with the master seed. Chains may run in any order or in parallel
/// without touching each other's randomness.
pub fn derive_chain_seed(master_seed: u64, chain_index: u64) -> u64 {
    let z = master_seed
        .wrapping_add(chain_index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    let z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs one chain from the empty graph and returns its terminal record.
pub fn run_chain(cfg: &ChainConfig, chain_index: u64) -> SampleRecord {
    let chain_seed = derive_chain_seed(cfg.seed, chain_index);
    let mut rng = ChaCha8Rng::seed_from_u64(chain_seed);
    let mut state = Pdag::empty(cfg.n);
    let mut changed = 0u64;
    for _ in 0..cfg.steps {
        if let Some(candidate) = propose_draw(&state, &mut rng) {
            if is_essential_graph(&candidate) {
                state = candidate;
                changed += 1;
            }
        }
    }
    debug_assert!(is_essential_graph(&state));
    SampleRecord {
        n: cfg.n,
        chain_index,
        steps: cfg.steps,
        is_edag: state.undirected_edge_count() == 0,
        is_connected: state.is_connected(),
        changed_fraction: changed as f64 / cfg.steps as f64,
        chain_seed,
        canonical_key: cfg
            .record_graphs
            .then(|| BASE64.encode(state.canonical_key())),
    }
}

/// Runs `cfg.chains` independent chains (in parallel) and returns records in
/// chain-index order. Output is a pure function of the config.
pub fn run_ensemble(cfg: &ChainConfig) -> Result<Vec<SampleRecord>> {
    cfg.validate()?;
    Ok((0..cfg.chains)
        .into_par_iter()
        .map(|i| run_chain(cfg, i))
        .collect())
}

/// All draws on an `n`-node graph, for exhaustive reachability and symmetry
/// checks. No-op excluded.
pub fn all_moves(n: usize) -> Vec<Move> {
    let mut moves = Vec::new();
    if n < 2 {
        return moves;
    }
    for idx in 0..n * (n - 1) {
        let (u, v) = decode_pair(n, idx);
        for kind in MOVE_KINDS {
            match kind {
                MoveKind::NoOp => {}
                k if k.needs_center() => {
                    for cidx in 0..n.saturating_sub(2) {
                        moves.push(Move {
                            kind,
                            u,
                            v,
                            center: Some(decode_center(cidx, u, v)),
                        });
                    }
                }
                _ => moves.push(Move {
                    kind,
                    u,
                    v,
                    center: None,
                }),
            }
        }
    }
    moves
}

/// Number of draws carrying `x` to `y`, split into (pair-kind, v-kind)
/// families. Draws within a family are equiprobable, so family-wise equality
/// of the counts in both directions is exactly proposal symmetry.
pub fn draw_counts_between(x: &Pdag, y: &Pdag) -> (u64, u64) {
    let mut pair = 0u64;
    let mut vee = 0u64;
    for mv in all_moves(x.node_count()) {
        if apply_move(x, &mv).is_some_and(|c| c == *y) {
            if mv.kind.needs_center() {
                vee += 1;
            } else {
                pair += 1;
            }
        }
    }
    (pair, vee)
}

/// Breadth-first closure of the kernel from the empty graph over accepted
/// transitions; returns the canonical keys of every reachable essential
/// graph. Capped at `MAX_BFS_NODES` because the full state space is visited.
pub fn kernel_support_bfs(n: usize) -> Result<BTreeSet<Vec<u8>>> {
    if n == 0 || n > MAX_BFS_NODES {
        return Err(Error::CapExceeded {
            n,
            cap: MAX_BFS_NODES,
        });
    }
    let moves = all_moves(n);
    let start = Pdag::empty(n);
    let mut seen = BTreeSet::new();
    seen.insert(start.canonical_key());
    let mut queue = VecDeque::from([start]);
    while let Some(g) = queue.pop_front() {
        for mv in &moves {
            if let Some(candidate) = apply_move(&g, mv) {
                if !seen.contains(&candidate.canonical_key()) && is_essential_graph(&candidate) {
                    seen.insert(candidate.canonical_key());
                    queue.push_back(candidate);
                }
            }
        }
    }
    Ok(seen)
}

/// Single-chain run that records the state's canonical key every `thin`
/// transitions once `burn_in` transitions have passed. Used by the
/// uniformity diagnostics, not by the sampling protocol.
pub fn thinned_state_counts(
    n: usize,
    steps: u64,
    burn_in: u64,
    thin: u64,
    seed: u64,
) -> Result<BTreeMap<Vec<u8>, u64>> {
    if n == 0 || n > MAX_CHAIN_NODES {
        return Err(Error::InvalidConfig(format!(
            "node count {n} outside 1..={MAX_CHAIN_NODES}"
        )));
    }
    if thin == 0 {
        return Err(Error::InvalidConfig("thin must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = Pdag::empty(n);
    let mut counts = BTreeMap::new();
    for step_index in 1..=steps {
        if let Some(candidate) = propose_draw(&state, &mut rng) {
            if is_essential_graph(&candidate) {
                state = candidate;
            }
        }
        if step_index > burn_in && (step_index - burn_in).is_multiple_of(thin) {
            *counts.entry(state.canonical_key()).or_insert(0) += 1;
        }
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;

    fn id(i: usize) -> NodeId {
        NodeId::new(i)
    }

    fn pdag(n: usize, directed: &[(usize, usize)], undirected: &[(usize, usize)]) -> Pdag {
        let mut g = Pdag::empty(n);
        for &(u, v) in directed {
            g.set_mark(id(u), id(v), EdgeMark::Directed(id(u), id(v)));
        }
        for &(u, v) in undirected {
            g.set_mark(id(u), id(v), EdgeMark::Undirected);
        }
        g
    }

    #[test]
    fn move_application() {
        let empty = Pdag::empty(2);
        let add = Move {
            kind: MoveKind::AddUndirected,
            u: id(0),
            v: id(1),
            center: None,
        };
        assert_eq!(apply_move(&empty, &add).unwrap(), pdag(2, &[], &[(0, 1)]));
        // deleting a directed edge that is not present in that direction
        let und = pdag(2, &[], &[(0, 1)]);
        let del = Move {
            kind: MoveKind::DeleteDirected,
            u: id(1),
            v: id(0),
            center: None,
        };
        assert!(apply_move(&und, &del).is_none());
        // collider creation on an undirected path
        let path = pdag(3, &[], &[(0, 2), (1, 2)]);
        let makev = Move {
            kind: MoveKind::MakeVStructure,
            u: id(0),
            v: id(1),
            center: Some(id(2)),
        };
        let collider = pdag(3, &[(0, 2), (1, 2)], &[]);
        assert_eq!(apply_move(&path, &makev).unwrap(), collider);
        let removev = Move {
            kind: MoveKind::RemoveVStructure,
            u: id(0),
            v: id(1),
            center: Some(id(2)),
        };
        assert_eq!(apply_move(&collider, &removev).unwrap(), path);
    }

    #[test]
    fn step_stays_on_essential_graphs_two_nodes() {
        // only two essential graphs exist on two nodes
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut state = Pdag::empty(2);
        let undirected = pdag(2, &[], &[(0, 1)]);
        let mut seen_both = (false, false);
        for _ in 0..200 {
            state = step(&state, &mut rng);
            assert!(state == Pdag::empty(2) || state == undirected);
            if state == Pdag::empty(2) {
                seen_both.0 = true;
            } else {
                seen_both.1 = true;
            }
        }
        assert!(seen_both.0 && seen_both.1);
    }

    #[test]
    fn single_node_chain_is_trivial() {
        let cfg = ChainConfig {
            n: 1,
            steps: 50,
            chains: 1,
            seed: 9,
            record_graphs: false,
        };
        let rec = run_chain(&cfg, 0);
        assert!(rec.is_edag);
        assert!(rec.is_connected);
        assert_eq!(rec.changed_fraction, 0.0);
    }

    #[test]
    fn ensemble_is_deterministic() {
        let cfg = ChainConfig {
            n: 3,
            steps: 200,
            chains: 8,
            seed: 42,
            record_graphs: true,
        };
        let a = run_ensemble(&cfg).unwrap();
        let b = run_ensemble(&cfg).unwrap();
        let ser = |r: &[SampleRecord]| serde_json::to_string(r).unwrap();
        assert_eq!(ser(&a), ser(&b));
        assert_eq!(a[3].chain_index, 3);
        assert_eq!(a[3].chain_seed, derive_chain_seed(42, 3));
    }

    #[test]
    fn terminal_states_are_essential_graphs() {
        let cfg = ChainConfig {
            n: 3,
            steps: 500,
            chains: 16,
            seed: 7,
            record_graphs: true,
        };
        let egs: BTreeSet<Vec<u8>> = oracle::enumerate_egs(3)
            .unwrap()
            .iter()
            .map(|g| g.canonical_key())
            .collect();
        for rec in run_ensemble(&cfg).unwrap() {
            let key = BASE64.decode(rec.canonical_key.unwrap()).unwrap();
            assert!(egs.contains(&key));
        }
    }

    #[test]
    fn bfs_reaches_every_essential_graph() {
        for n in 2..=3 {
            let reached = kernel_support_bfs(n).unwrap();
            let expect: BTreeSet<Vec<u8>> = oracle::enumerate_egs(n)
                .unwrap()
                .iter()
                .map(|g| g.canonical_key())
                .collect();
            assert_eq!(reached, expect, "kernel support mismatch at n={n}");
        }
        assert!(kernel_support_bfs(5).is_err());
    }

    #[test]
    fn draw_counts_are_symmetric_n3() {
        let egs = oracle::enumerate_egs(3).unwrap();
        for x in &egs {
            for y in &egs {
                if x == y {
                    continue;
                }
                assert_eq!(
                    draw_counts_between(x, y),
                    draw_counts_between(y, x),
                    "asymmetric between {x:?} and {y:?}"
                );
            }
        }
    }

    #[test]
    fn chain_seed_mixing_spreads_indices() {
        let seeds: BTreeSet<u64> = (0..1000).map(|i| derive_chain_seed(1, i)).collect();
        assert_eq!(seeds.len(), 1000);
        assert_ne!(derive_chain_seed(1, 0), derive_chain_seed(2, 0));
    }

    #[test]
    fn config_validation() {
        let ok = ChainConfig {
            n: 3,
            steps: 1,
            chains: 1,
            seed: 0,
            record_graphs: false,
        };
        assert!(ok.validate().is_ok());
        for bad in [
            ChainConfig { n: 0, ..ok.clone() },
            ChainConfig { n: 41, ..ok.clone() },
            ChainConfig { steps: 0, ..ok.clone() },
            ChainConfig { chains: 0, ..ok.clone() },
        ] {
            assert!(bad.validate().is_err());
        }
    }
}
