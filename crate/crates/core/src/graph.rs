//! Labeled partially directed graphs over at most [`MAX_NODES`] nodes.
//!
//! A [`Pdag`] stores one mark per unordered node pair: absent, directed
//! (either way) or undirected. Adjacency lives in per-node `u64` bitsets so
//! mark lookups, updates and whole-graph copies are cheap enough for the
//! inner loop of an MCMC sampler. [`Dag`] is a `Pdag` with no undirected
//! marks and an acyclic directed relation.

use crate::error::{Error, Result};

/// Hard cap on node count; every bitset in this crate is a single `u64`.
pub const MAX_NODES: usize = 64;

/// Version tag for the canonical byte encoding produced by
/// [`Pdag::canonical_key`]. Recorded in output metadata so persisted keys
/// stay interpretable.
pub const CANONICAL_KEY_FORMAT: &str =
    "v1: byte0 = node count; then one 2-bit code per unordered pair (i,j), i<j, \
     in lexicographic order, packed MSB-first (00 absent, 01 i->j, 10 j->i, 11 undirected)";

/// Index of a node in a graph; always strictly less than the graph's node count.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct NodeId(u8);

impl NodeId {
    pub fn new(index: usize) -> Self {
        assert!(index < MAX_NODES, "node index {index} out of range");
        NodeId(index as u8)
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    fn bit(self) -> u64 {
        1u64 << self.0
    }
}

impl std::fmt::Display for NodeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Mark on one unordered node pair.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum EdgeMark {
    Absent,
    /// `Directed(tail, head)` is the arrow tail -> head.
    Directed(NodeId, NodeId),
    Undirected,
}

/// Partially directed labeled graph. Equality is exact structural equality
/// of all marks; the node count is fixed at construction.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Pdag {
    n: u8,
    /// children[u] has bit v set iff u -> v.
    children: [u64; MAX_NODES],
    /// parents[u] has bit v set iff v -> u.
    parents: [u64; MAX_NODES],
    /// undirected[u] has bit v set iff u - v; kept symmetric.
    undirected: [u64; MAX_NODES],
}

impl std::fmt::Debug for Pdag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Pdag(n={};", self.n)?;
        for (u, v) in self.directed_edges() {
            write!(f, " {u}->{v}")?;
        }
        for (u, v) in self.undirected_edges() {
            write!(f, " {u}-{v}")?;
        }
        write!(f, ")")
    }
}

/// Iterator over the set bits of a `u64`, as `NodeId`s in increasing order.
#[derive(Clone)]
pub struct Bits(pub u64);

impl Iterator for Bits {
    type Item = NodeId;

    #[inline]
    fn next(&mut self) -> Option<NodeId> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as u8;
        self.0 &= self.0 - 1;
        Some(NodeId(i))
    }
}

impl Pdag {
    /// Edgeless graph on `n` nodes. Panics unless `1 <= n <= MAX_NODES`.
    pub fn empty(n: usize) -> Self {
        assert!(
            (1..=MAX_NODES).contains(&n),
            "node count {n} outside 1..={MAX_NODES}"
        );
        Pdag {
            n: n as u8,
            children: [0; MAX_NODES],
            parents: [0; MAX_NODES],
            undirected: [0; MAX_NODES],
        }
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.n as usize
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.n).map(NodeId)
    }

    #[inline]
    fn check_pair(&self, u: NodeId, v: NodeId) {
        debug_assert!(u != v, "self-loop at {u}");
        debug_assert!(u.index() < self.node_count() && v.index() < self.node_count());
    }

    #[inline]
    pub fn mark(&self, u: NodeId, v: NodeId) -> EdgeMark {
        self.check_pair(u, v);
        if self.children[u.index()] & v.bit() != 0 {
            EdgeMark::Directed(u, v)
        } else if self.children[v.index()] & u.bit() != 0 {
            EdgeMark::Directed(v, u)
        } else if self.undirected[u.index()] & v.bit() != 0 {
            EdgeMark::Undirected
        } else {
            EdgeMark::Absent
        }
    }

    /// Replaces whatever mark the pair `{u, v}` currently carries.
    /// For `EdgeMark::Directed(a, b)`, `{a, b}` must equal `{u, v}`.
    pub fn set_mark(&mut self, u: NodeId, v: NodeId, mark: EdgeMark) {
        assert!(u != v, "self-loop at {u}");
        assert!(u.index() < self.node_count() && v.index() < self.node_count());
        // clear
        self.children[u.index()] &= !v.bit();
        self.children[v.index()] &= !u.bit();
        self.parents[u.index()] &= !v.bit();
        self.parents[v.index()] &= !u.bit();
        self.undirected[u.index()] &= !v.bit();
        self.undirected[v.index()] &= !u.bit();
        match mark {
            EdgeMark::Absent => {}
            EdgeMark::Undirected => {
                self.undirected[u.index()] |= v.bit();
                self.undirected[v.index()] |= u.bit();
            }
            EdgeMark::Directed(tail, head) => {
                assert!(
                    (tail, head) == (u, v) || (tail, head) == (v, u),
                    "directed mark {tail}->{head} does not match pair {{{u},{v}}}"
                );
                self.children[tail.index()] |= head.bit();
                self.parents[head.index()] |= tail.bit();
            }
        }
    }

    #[inline]
    pub fn has_directed(&self, tail: NodeId, head: NodeId) -> bool {
        self.check_pair(tail, head);
        self.children[tail.index()] & head.bit() != 0
    }

    #[inline]
    pub fn has_undirected(&self, u: NodeId, v: NodeId) -> bool {
        self.check_pair(u, v);
        self.undirected[u.index()] & v.bit() != 0
    }

    #[inline]
    pub fn adjacent(&self, u: NodeId, v: NodeId) -> bool {
        self.mark(u, v) != EdgeMark::Absent
    }

    #[inline]
    pub fn children_mask(&self, u: NodeId) -> u64 {
        self.children[u.index()]
    }

    #[inline]
    pub fn parents_mask(&self, u: NodeId) -> u64 {
        self.parents[u.index()]
    }

    #[inline]
    pub fn undirected_mask(&self, u: NodeId) -> u64 {
        self.undirected[u.index()]
    }

    /// All nodes adjacent to `u` regardless of mark kind.
    #[inline]
    pub fn adjacency_mask(&self, u: NodeId) -> u64 {
        self.children[u.index()] | self.parents[u.index()] | self.undirected[u.index()]
    }

    pub fn children_of(&self, u: NodeId) -> Bits {
        Bits(self.children_mask(u))
    }

    pub fn parents_of(&self, u: NodeId) -> Bits {
        Bits(self.parents_mask(u))
    }

    pub fn undirected_neighbors_of(&self, u: NodeId) -> Bits {
        Bits(self.undirected_mask(u))
    }

    /// Directed edges as (tail, head), tails in increasing order.
    pub fn directed_edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.nodes()
            .flat_map(move |u| self.children_of(u).map(move |v| (u, v)))
    }

    /// Undirected edges as (u, v) with u < v.
    pub fn undirected_edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.nodes().flat_map(move |u| {
            self.undirected_neighbors_of(u)
                .filter(move |&v| u < v)
                .map(move |v| (u, v))
        })
    }

    pub fn directed_edge_count(&self) -> usize {
        (0..self.node_count())
            .map(|u| self.children[u].count_ones() as usize)
            .sum()
    }

    pub fn undirected_edge_count(&self) -> usize {
        (0..self.node_count())
            .map(|u| self.undirected[u].count_ones() as usize)
            .sum::<usize>()
            / 2
    }

    /// Unordered pairs carrying any mark, as (u, v) with u < v, sorted.
    pub fn skeleton(&self) -> Vec<(NodeId, NodeId)> {
        let mut pairs = Vec::new();
        for u in self.nodes() {
            for v in Bits(self.adjacency_mask(u)) {
                if u < v {
                    pairs.push((u, v));
                }
            }
        }
        pairs
    }

    /// Weak connectivity of the skeleton: one component covering all nodes.
    pub fn is_connected(&self) -> bool {
        let n = self.node_count();
        let all = if n == MAX_NODES {
            u64::MAX
        } else {
            (1u64 << n) - 1
        };
        let mut seen = 1u64;
        let mut frontier = 1u64;
        while frontier != 0 {
            let mut next = 0u64;
            for u in Bits(frontier) {
                next |= self.adjacency_mask(u);
            }
            frontier = next & !seen;
            seen |= next;
        }
        seen == all
    }

    /// Injective byte encoding of the graph; see [`CANONICAL_KEY_FORMAT`].
    pub fn canonical_key(&self) -> Vec<u8> {
        let n = self.node_count();
        let pairs = n * (n - 1) / 2;
        let mut key = vec![0u8; 1 + pairs.div_ceil(4)];
        key[0] = self.n;
        let mut idx = 0usize;
        for i in 0..n {
            for j in (i + 1)..n {
                let code: u8 = match self.mark(NodeId::new(i), NodeId::new(j)) {
                    EdgeMark::Absent => 0b00,
                    EdgeMark::Directed(t, _) if t.index() == i => 0b01,
                    EdgeMark::Directed(_, _) => 0b10,
                    EdgeMark::Undirected => 0b11,
                };
                let byte = 1 + idx / 4;
                let shift = 6 - 2 * (idx % 4);
                key[byte] |= code << shift;
                idx += 1;
            }
        }
        key
    }

    /// Inverse of [`Pdag::canonical_key`]. Rejects malformed input,
    /// including nonzero padding bits.
    pub fn from_canonical_key(key: &[u8]) -> Result<Self> {
        let n = *key.first().ok_or_else(|| Error::InvalidKey("empty".into()))? as usize;
        if n == 0 || n > MAX_NODES {
            return Err(Error::InvalidKey(format!("node count {n} out of range")));
        }
        let pairs = n * (n - 1) / 2;
        let expect = 1 + pairs.div_ceil(4);
        if key.len() != expect {
            return Err(Error::InvalidKey(format!(
                "length {} but n={n} needs {expect}",
                key.len()
            )));
        }
        let mut g = Pdag::empty(n);
        let mut idx = 0usize;
        for i in 0..n {
            for j in (i + 1)..n {
                let byte = 1 + idx / 4;
                let shift = 6 - 2 * (idx % 4);
                let code = (key[byte] >> shift) & 0b11;
                let (u, v) = (NodeId::new(i), NodeId::new(j));
                match code {
                    0b00 => {}
                    0b01 => g.set_mark(u, v, EdgeMark::Directed(u, v)),
                    0b10 => g.set_mark(u, v, EdgeMark::Directed(v, u)),
                    _ => g.set_mark(u, v, EdgeMark::Undirected),
                }
                idx += 1;
            }
        }
        if !pairs.is_multiple_of(4) {
            let used = 2 * (pairs % 4);
            let padding = key[expect - 1] & ((1u8 << (8 - used)) - 1);
            if padding != 0 {
                return Err(Error::InvalidKey("nonzero padding bits".into()));
            }
        }
        Ok(g)
    }

    /// Topological order of the directed part, ignoring undirected marks.
    /// Deterministic: the smallest eligible node comes first.
    pub fn directed_topological_order(&self) -> Result<Vec<NodeId>> {
        let n = self.node_count();
        let mut order = Vec::with_capacity(n);
        let mut placed = 0u64;
        // sources = nodes whose unplaced parents are exhausted
        loop {
            let mut sources = 0u64;
            for u in self.nodes() {
                if placed & u.bit() == 0 && self.parents_mask(u) & !placed == 0 {
                    sources |= u.bit();
                }
            }
            let sources = sources & !placed;
            if sources == 0 {
                break;
            }
            let u = NodeId(sources.trailing_zeros() as u8);
            placed |= u.bit();
            order.push(u);
        }
        if order.len() == n {
            Ok(order)
        } else {
            Err(Error::CycleDetected)
        }
    }
}

/// Fully directed acyclic graph; a [`Pdag`] with no undirected marks.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Dag(Pdag);

impl Dag {
    /// Validates the DAG invariants; the topological sort doubles as the
    /// acyclicity witness.
    pub fn try_new(g: Pdag) -> Result<Self> {
        if g.undirected_edge_count() != 0 {
            return Err(Error::UndirectedEdges);
        }
        g.directed_topological_order()?;
        Ok(Dag(g))
    }

    #[inline]
    pub fn as_pdag(&self) -> &Pdag {
        &self.0
    }

    pub fn into_pdag(self) -> Pdag {
        self.0
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.0.node_count()
    }

    /// Every edge tail precedes its head; smallest eligible node first.
    pub fn topological_order(&self) -> Vec<NodeId> {
        self.0
            .directed_topological_order()
            .expect("Dag invariant guarantees acyclicity")
    }
}

impl std::ops::Deref for Dag {
    type Target = Pdag;

    fn deref(&self) -> &Pdag {
        &self.0
    }
}
