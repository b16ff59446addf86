//! Brute-force ground truth for small node counts.
//!
//! Enumerates every labeled DAG (three choices per unordered pair: absent or
//! one of the two arrow directions, then an acyclicity filter), groups DAGs
//! into Markov equivalence classes by the canonical key of their essential
//! graph, and tallies everything the rest of the crate estimates or computes
//! in closed form.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::equivalence::cpdag_of_dag;
use crate::error::{Error, Result};
use crate::graph::{Dag, EdgeMark, NodeId, Pdag};

/// Enumeration past 5 nodes would walk 3^15 candidates per census for little
/// test value; the cap keeps ground truth desk-scale.
pub const MAX_ORACLE_NODES: usize = 5;

/// Exact tallies for everything estimated elsewhere: DAG, connected-DAG,
/// essential-graph, connected-essential-graph and essential-DAG counts, plus
/// the class-size histogram.
#[derive(Clone, Debug, Serialize)]
pub struct OracleCensus {
    pub n: usize,
    pub n_dags: u64,
    pub n_cdags: u64,
    pub n_egs: u64,
    pub n_cegs: u64,
    pub n_edags: u64,
    /// Sorted (class size, number of classes) pairs.
    pub class_size_histogram: Vec<(u64, u64)>,
}

fn check_cap(n: usize) -> Result<()> {
    if n == 0 || n > MAX_ORACLE_NODES {
        return Err(Error::CapExceeded {
            n,
            cap: MAX_ORACLE_NODES,
        });
    }
    Ok(())
}

fn pair_list(n: usize) -> Vec<(NodeId, NodeId)> {
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            pairs.push((NodeId::new(i), NodeId::new(j)));
        }
    }
    pairs
}

/// Decodes candidate index `code` (base-3 digits, one per pair) into a graph;
/// returns it as a `Dag` when the directed relation is acyclic.
fn decode_candidate(n: usize, pairs: &[(NodeId, NodeId)], mut code: u64) -> Option<Dag> {
    let mut g = Pdag::empty(n);
    for &(u, v) in pairs {
        let digit = code % 3;
        code /= 3;
        match digit {
            0 => {}
            1 => g.set_mark(u, v, EdgeMark::Directed(u, v)),
            _ => g.set_mark(u, v, EdgeMark::Directed(v, u)),
        }
    }
    Dag::try_new(g).ok()
}

/// Every labeled DAG on `n` nodes exactly once, in candidate-code order.
pub fn enumerate_dags(n: usize) -> Result<impl Iterator<Item = Dag>> {
    check_cap(n)?;
    let pairs = pair_list(n);
    let total = 3u64.pow(pairs.len() as u32);
    Ok((0..total).filter_map(move |code| decode_candidate(n, &pairs, code)))
}

#[derive(Clone)]
struct ClassAcc {
    size: u64,
    connected: bool,
    edag: bool,
}

fn class_map(n: usize) -> Result<HashMap<Vec<u8>, ClassAcc>> {
    check_cap(n)?;
    let pairs = pair_list(n);
    let total = 3usize.pow(pairs.len() as u32);
    // Partition the candidate space and merge per-partition maps; the merge
    // is associative, so the result is independent of scheduling.
    let chunk = 1 + total / 64;
    let map = (0..total)
        .into_par_iter()
        .with_min_len(chunk)
        .fold(HashMap::new, |mut acc: HashMap<Vec<u8>, ClassAcc>, code| {
            if let Some(dag) = decode_candidate(n, &pairs, code as u64) {
                let eg = cpdag_of_dag(&dag);
                let key = eg.canonical_key();
                acc.entry(key)
                    .and_modify(|c| c.size += 1)
                    .or_insert_with(|| ClassAcc {
                        size: 1,
                        connected: eg.is_connected(),
                        edag: eg.undirected_edge_count() == 0,
                    });
            }
            acc
        })
        .reduce(HashMap::new, |mut left, right| {
            for (key, acc) in right {
                left.entry(key)
                    .and_modify(|c| c.size += acc.size)
                    .or_insert(acc);
            }
            left
        });
    Ok(map)
}

/// Exact census of `n`-node graphs; connectivity is weak connectivity of the
/// skeleton, a class invariant.
pub fn census(n: usize) -> Result<OracleCensus> {
    let map = class_map(n)?;
    let mut n_dags = 0u64;
    let mut n_cdags = 0u64;
    let mut n_egs = 0u64;
    let mut n_cegs = 0u64;
    let mut n_edags = 0u64;
    let mut histogram: std::collections::BTreeMap<u64, u64> = Default::default();
    for acc in map.values() {
        n_dags += acc.size;
        n_egs += 1;
        if acc.connected {
            n_cdags += acc.size;
            n_cegs += 1;
        }
        if acc.edag {
            n_edags += 1;
        }
        *histogram.entry(acc.size).or_insert(0) += 1;
    }
    let census = OracleCensus {
        n,
        n_dags,
        n_cdags,
        n_egs,
        n_cegs,
        n_edags,
        class_size_histogram: histogram.into_iter().collect(),
    };
    debug_assert_eq!(
        census.n_dags,
        census
            .class_size_histogram
            .iter()
            .map(|(s, c)| s * c)
            .sum::<u64>()
    );
    debug_assert_eq!(
        census.n_egs,
        census.class_size_histogram.iter().map(|(_, c)| c).sum::<u64>()
    );
    Ok(census)
}

/// Every distinct essential graph on `n` nodes exactly once, sorted by
/// canonical key.
pub fn enumerate_egs(n: usize) -> Result<Vec<Pdag>> {
    let map = class_map(n)?;
    let mut keys: Vec<Vec<u8>> = map.into_keys().collect();
    keys.sort_unstable();
    keys.iter()
        .map(|k| Pdag::from_canonical_key(k))
        .collect::<Result<Vec<_>>>()
}
