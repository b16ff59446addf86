//! Markov-equivalence machinery.
//!
//! Two DAGs are Markov equivalent iff they share skeleton and v-structures;
//! each class is represented by its essential graph (CPDAG), in which an edge
//! is directed iff every member orients it the same way. This module converts
//! a DAG to its CPDAG (v-structures plus Meek-rule closure), extends a PDAG
//! to a member DAG (Dor–Tarsi), and tests essential-graph validity by the
//! extend-then-reconvert round trip.

use crate::error::Result;
use crate::graph::{Bits, Dag, EdgeMark, NodeId, Pdag};

/// Collider a -> c <- b with a, b non-adjacent; normalized so a < b.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct VStructure {
    pub a: NodeId,
    pub c: NodeId,
    pub b: NodeId,
}

/// All v-structures of `d`, sorted. Works on the directed part of any graph,
/// which is what consistent-extension checks need.
pub fn v_structures_of_directed_part(g: &Pdag) -> Vec<VStructure> {
    let mut out = Vec::new();
    for c in g.nodes() {
        let parents = g.parents_mask(c);
        for a in Bits(parents) {
            for b in Bits(parents) {
                if a < b && !g.adjacent(a, b) {
                    out.push(VStructure { a, c, b });
                }
            }
        }
    }
    out.sort_unstable();
    out
}

pub fn v_structures(d: &Dag) -> Vec<VStructure> {
    v_structures_of_directed_part(d.as_pdag())
}

/// Orientation-propagation closure. Orients undirected edges that are forced
/// once the current directed edges are fixed, looping the four rules to a
/// fixpoint:
///
/// * R1: a -> b, b - c, a not adjacent to c  =>  b -> c
/// * R2: a -> w -> b, a - b                  =>  a -> b
/// * R3: a - b with two nonadjacent parents of b among a's undirected
///   neighbors                               =>  a -> b
/// * R4: a - b and a directed path a => b    =>  a -> b
fn meek_closure(g: &mut Pdag) {
    loop {
        let mut changed = false;
        // R1
        for a in g.nodes() {
            for b in g.children_of(a).collect::<Vec<_>>() {
                let forced = g.undirected_mask(b) & !g.adjacency_mask(a) & !(1u64 << a.index());
                for c in Bits(forced) {
                    g.set_mark(b, c, EdgeMark::Directed(b, c));
                    changed = true;
                }
            }
        }
        // R2..R4 examine each undirected pair in both directions.
        for a in g.nodes() {
            for b in g.undirected_neighbors_of(a).collect::<Vec<_>>() {
                if g.mark(a, b) != EdgeMark::Undirected {
                    continue; // oriented by an earlier hit this sweep
                }
                if g.children_mask(a) & g.parents_mask(b) != 0 {
                    g.set_mark(a, b, EdgeMark::Directed(a, b));
                    changed = true;
                    continue;
                }
                if has_nonadjacent_pair(g, g.undirected_mask(a) & g.parents_mask(b)) {
                    g.set_mark(a, b, EdgeMark::Directed(a, b));
                    changed = true;
                    continue;
                }
                if has_directed_path(g, a, b) {
                    g.set_mark(a, b, EdgeMark::Directed(a, b));
                    changed = true;
                }
            }
        }
        if !changed {
            return;
        }
    }
}

fn has_nonadjacent_pair(g: &Pdag, mask: u64) -> bool {
    for c in Bits(mask) {
        for d in Bits(mask) {
            if c < d && !g.adjacent(c, d) {
                return true;
            }
        }
    }
    false
}

fn has_directed_path(g: &Pdag, from: NodeId, to: NodeId) -> bool {
    let mut seen = 1u64 << from.index();
    let mut frontier = seen;
    while frontier != 0 {
        let mut next = 0u64;
        for u in Bits(frontier) {
            next |= g.children_mask(u);
        }
        if next & (1u64 << to.index()) != 0 {
            return true;
        }
        frontier = next & !seen;
        seen |= next;
    }
    false
}

/// The essential graph of `d`'s equivalence class: same skeleton, an edge
/// directed iff compelled. Built by orienting exactly the v-structure edges
/// and closing under the Meek rules.
pub fn cpdag_of_dag(d: &Dag) -> Pdag {
    let mut g = Pdag::empty(d.node_count());
    for (u, v) in d.skeleton() {
        g.set_mark(u, v, EdgeMark::Undirected);
    }
    for vs in v_structures(d) {
        g.set_mark(vs.a, vs.c, EdgeMark::Directed(vs.a, vs.c));
        g.set_mark(vs.b, vs.c, EdgeMark::Directed(vs.b, vs.c));
    }
    meek_closure(&mut g);
    g
}

/// Dor–Tarsi extension: a DAG with the same skeleton as `g`, preserving every
/// directed mark and creating no v-structure absent from `g`. Returns `None`
/// when no such DAG exists.
///
/// Repeatedly peels a node x that (a) has no outgoing directed edge among the
/// remaining nodes and (b) whose undirected neighbors are adjacent to every
/// other remaining neighbor of x, orienting x's undirected edges toward x.
/// The largest eligible id is peeled first, so ties orient with the
/// lowest id as tail ({0 - 1} extends to 0 -> 1).
pub fn consistent_extension(g: &Pdag) -> Option<Dag> {
    let n = g.node_count();
    let mut out = g.clone();
    let mut remaining: u64 = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    for _ in 0..n {
        let mut picked = None;
        for x in Bits(remaining).collect::<Vec<_>>().into_iter().rev() {
            if g.children_mask(x) & remaining & !(1u64 << x.index()) != 0 {
                continue; // not a sink
            }
            let adj = g.adjacency_mask(x) & remaining;
            let und = g.undirected_mask(x) & remaining;
            let ok = Bits(und).all(|y| {
                let others = adj & !(1u64 << y.index());
                g.adjacency_mask(y) & others == others
            });
            if ok {
                picked = Some((x, und));
                break;
            }
        }
        let (x, und) = picked?;
        for y in Bits(und) {
            out.set_mark(y, x, EdgeMark::Directed(y, x));
        }
        remaining &= !(1u64 << x.index());
    }
    let d = Dag::try_new(out).expect("peeling order certifies acyclicity");
    debug_assert_eq!(d.skeleton(), g.skeleton(), "extension changed the skeleton");
    debug_assert!(
        extension_adds_no_v_structure(g, &d),
        "extension created a v-structure absent from the input"
    );
    Some(d)
}

fn extension_adds_no_v_structure(g: &Pdag, d: &Dag) -> bool {
    let before = v_structures_of_directed_part(g);
    v_structures(d).iter().all(|vs| before.contains(vs))
}

/// A graph is an essential graph iff it equals the CPDAG of one (hence every)
/// consistent extension of itself.
pub fn is_essential_graph(g: &Pdag) -> bool {
    match consistent_extension(g) {
        Some(d) => cpdag_of_dag(&d) == *g,
        None => false,
    }
}

/// An essential DAG is an essential graph with no undirected mark: its class
/// has exactly one member. Callers guarantee `g` is an essential graph.
pub fn is_edag(g: &Pdag) -> bool {
    g.undirected_edge_count() == 0
}

/// Number of DAGs Markov equivalent to `d`, counted by enumerating acyclic
/// orientations of the CPDAG's undirected part that introduce no new
/// v-structure. Intended for small n; cost is 2^(undirected edges).
pub fn class_size(d: &Dag) -> u64 {
    let cpdag = cpdag_of_dag(d);
    let free: Vec<(NodeId, NodeId)> = cpdag.undirected_edges().collect();
    let target = v_structures(d);
    let mut count = 0u64;
    for bits in 0u64..(1u64 << free.len()) {
        let mut candidate = cpdag.clone();
        for (i, &(u, v)) in free.iter().enumerate() {
            let (tail, head) = if bits >> i & 1 == 0 { (u, v) } else { (v, u) };
            candidate.set_mark(u, v, EdgeMark::Directed(tail, head));
        }
        if let Ok(dag) = Dag::try_new(candidate) {
            if v_structures(&dag) == target {
                count += 1;
            }
        }
    }
    count
}

/// Convenience used by callers that only hold a candidate `Pdag`.
pub fn dag_from_pdag(g: Pdag) -> Result<Dag> {
    Dag::try_new(g)
}
