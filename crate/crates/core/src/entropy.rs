//! Link-existence probabilities and entropies under the degree-uncorrelated
//! null model, and the entropy of simple paths.
//!
//! For a graph with `M` links, the probability that nodes `a` and `b` with
//! degrees `ka`, `kb` are linked is
//!
//! ```text
//! P = 1 - prod_{i=1..kb} (M - ka - i + 1) / (M - i + 1)
//!   = 1 - C(M - ka, kb) / C(M, kb)
//! ```
//!
//! and the self-information of the link event is `-log2(P)`. The entropy of
//! a simple path is the sum of its links' entropies. All logarithms are base
//! 2; scores are measured in bits. An impossible link (an endpoint of degree
//! zero) has probability 0 and entropy `+inf`; the infinity propagates
//! through path and score sums and ranks as "least likely".
//!
//! Binomial ratios are evaluated as telescoping sums of `ln(1 - ka/(M-i+1))`
//! terms, never through factorials, so link counts in the thousands are
//! exact to near machine precision.

use crate::error::{Error, Result};
use crate::graph::{NodeId, WeightedGraph};
use crate::paths::Path;

fn check_degrees(m: u64, ka: u64, kb: u64) -> Result<()> {
    if m == 0 {
        return Err(Error::domain("link probability requires M >= 1"));
    }
    if ka > m || kb > m {
        return Err(Error::domain(format!(
            "degrees ({ka}, {kb}) exceed the link count {m}"
        )));
    }
    Ok(())
}

/// Probability that two nodes of degrees `ka` and `kb` are linked in an
/// uncorrelated network with `m` links.
///
/// Exactly 0 when either degree is 0, exactly 1 when `kb > m - ka` (the
/// surviving binomial vanishes), and symmetric in `(ka, kb)`.
pub fn link_probability(m: u64, ka: u64, kb: u64) -> Result<f64> {
    check_degrees(m, ka, kb)?;
    // Canonical orientation: iterate over the smaller degree so the result
    // is bitwise symmetric.
    let (big, small) = (ka.max(kb), ka.min(kb));
    if small == 0 {
        return Ok(0.0);
    }
    if small > m - big {
        return Ok(1.0);
    }
    let mut log_miss = 0.0f64;
    for i in 1..=small {
        log_miss += (-(big as f64) / ((m - i + 1) as f64)).ln_1p();
    }
    Ok(-log_miss.exp_m1())
}

/// Self-information `-log2(P)` of the link event, in bits.
///
/// `+inf` when the link is impossible (probability 0), exactly 0 when it is
/// certain.
pub fn link_entropy(m: u64, ka: u64, kb: u64) -> Result<f64> {
    let p = link_probability(m, ka, kb)?;
    Ok(entropy_bits(p))
}

pub(crate) fn entropy_bits(p: f64) -> f64 {
    if p == 0.0 {
        f64::INFINITY
    } else if p == 1.0 {
        0.0
    } else {
        -p.log2()
    }
}

/// Degree information of a fixed graph, for evaluating link and path
/// entropies.
#[derive(Debug, Clone)]
pub struct LinkEntropyContext {
    m: u64,
    degrees: Vec<u32>,
}

impl LinkEntropyContext {
    /// Captures `M` and the degree sequence of `g`. Fails on a graph with no
    /// links.
    pub fn from_graph(g: &WeightedGraph) -> Result<Self> {
        if g.link_count() == 0 {
            return Err(Error::domain("entropy context requires at least one link"));
        }
        Ok(LinkEntropyContext {
            m: g.link_count() as u64,
            degrees: (0..g.node_count())
                .map(|u| g.degree(u as NodeId) as u32)
                .collect(),
        })
    }

    pub fn link_count(&self) -> u64 {
        self.m
    }

    pub fn degree(&self, u: NodeId) -> u32 {
        self.degrees[u as usize]
    }

    fn check_node(&self, u: NodeId) -> Result<()> {
        if (u as usize) < self.degrees.len() {
            Ok(())
        } else {
            Err(Error::domain(format!("node {u} not in graph")))
        }
    }

    /// Entropy of the link event between nodes `u` and `v`.
    pub fn link_entropy_between(&self, u: NodeId, v: NodeId) -> Result<f64> {
        self.check_node(u)?;
        self.check_node(v)?;
        link_entropy(self.m, self.degree(u) as u64, self.degree(v) as u64)
    }

    /// Entropy of a simple path: the sum of its links' entropies.
    ///
    /// `+inf` as soon as any link on the path is impossible.
    pub fn path_entropy(&self, path: &Path) -> Result<f64> {
        let nodes = path.nodes();
        let mut total = 0.0f64;
        for pair in nodes.windows(2) {
            total += self.link_entropy_between(pair[0], pair[1])?;
        }
        Ok(total)
    }
}

/// Precomputed link entropies for every pair of degrees present in a graph.
///
/// Scoring evaluates `link_entropy` for millions of pairs, but only over the
/// few distinct degree values the graph actually has, so the full pair table
/// is tiny. Lookup is O(1) and lock-free.
#[derive(Debug)]
pub(crate) struct DegreePairEntropies {
    /// degree value -> rank among distinct degrees
    rank: Vec<u32>,
    /// upper-triangular table over rank pairs
    table: Vec<f64>,
}

impl DegreePairEntropies {
    pub(crate) fn from_graph(g: &WeightedGraph) -> Result<Self> {
        let m = g.link_count() as u64;
        if m == 0 {
            return Err(Error::domain("entropy table requires at least one link"));
        }
        let mut distinct: Vec<u32> = (0..g.node_count())
            .map(|u| g.degree(u as NodeId) as u32)
            .collect();
        distinct.sort_unstable();
        distinct.dedup();
        let max_degree = *distinct.last().unwrap() as usize;
        let mut rank = vec![u32::MAX; max_degree + 1];
        for (r, &d) in distinct.iter().enumerate() {
            rank[d as usize] = r as u32;
        }
        let k = distinct.len();
        let mut table = vec![0.0f64; k * (k + 1) / 2];
        for j in 0..k {
            for i in 0..=j {
                table[j * (j + 1) / 2 + i] =
                    link_entropy(m, distinct[i] as u64, distinct[j] as u64)?;
            }
        }
        Ok(DegreePairEntropies { rank, table })
    }

    /// Entropy of a link between nodes of degrees `ka` and `kb`. Both must be
    /// degrees that occur in the graph the table was built from.
    #[inline]
    pub(crate) fn get(&self, ka: u32, kb: u32) -> f64 {
        let (lo, hi) = if ka <= kb { (ka, kb) } else { (kb, ka) };
        let i = self.rank[lo as usize] as usize;
        let j = self.rank[hi as usize] as usize;
        self.table[j * (j + 1) / 2 + i]
    }
}
