//! Undirected weighted graphs: construction, cleaning, and topological
//! statistics.
//!
//! Input files are read into raw [`EdgeRecord`]s first (see [`crate::io`]),
//! then [`preprocess`] turns the record multiset into a simple undirected
//! [`WeightedGraph`]: direction is ignored, duplicate and antiparallel
//! records are merged, self-loops are dropped, and optionally only the
//! largest connected component is kept. Node labels are remapped to dense
//! integer ids; the original labels are retained for output.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense node identifier assigned during preprocessing.
pub type NodeId = u32;

/// One directed weighted record exactly as read from an input file.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeRecord {
    pub source: String,
    pub target: String,
    pub weight: f64,
    /// 1-based line number in the source file, for error reporting.
    pub line: usize,
}

/// How to merge the weights of duplicate or antiparallel records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MergeRule {
    /// Sum the directed weights. Preserves total interaction strength when a
    /// directed network is symmetrized.
    Sum,
    /// Keep the maximum weight seen for the pair.
    Max,
}

impl Default for MergeRule {
    fn default() -> Self {
        MergeRule::Sum
    }
}

/// Options controlling [`preprocess`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PreprocessOptions {
    pub merge: MergeRule,
    /// Drop self-loop records. When `false`, a self-loop in the input is an
    /// error: the graph type does not admit them.
    pub drop_self_loops: bool,
    /// Keep only the largest connected component.
    pub keep_lcc: bool,
}

impl Default for PreprocessOptions {
    fn default() -> Self {
        PreprocessOptions {
            merge: MergeRule::Sum,
            drop_self_loops: true,
            keep_lcc: true,
        }
    }
}

/// A simple undirected graph with strictly positive link weights.
///
/// Immutable after construction; adjacency lists are sorted by neighbor id.
/// Node ids are dense (`0..node_count`), and every node carries the label it
/// had in the input file.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    labels: Vec<String>,
    adj: Vec<Vec<(NodeId, f64)>>,
    link_count: usize,
}

impl WeightedGraph {
    /// Builds a graph from undirected links over `labels.len()` nodes.
    ///
    /// Rejects self-loops, duplicate links, out-of-range endpoints, and
    /// non-positive or non-finite weights. Isolated nodes are allowed.
    pub fn from_links(labels: Vec<String>, links: &[(NodeId, NodeId, f64)]) -> Result<Self> {
        let n = labels.len();
        let mut adj: Vec<Vec<(NodeId, f64)>> = vec![Vec::new(); n];
        for &(u, v, w) in links {
            if u as usize >= n || v as usize >= n {
                return Err(Error::domain(format!(
                    "link ({u},{v}) references a node outside 0..{n}"
                )));
            }
            if u == v {
                return Err(Error::domain(format!("self-loop at node {u}")));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::domain(format!(
                    "link ({u},{v}) has non-positive weight {w}"
                )));
            }
            adj[u as usize].push((v, w));
            adj[v as usize].push((u, w));
        }
        for (u, list) in adj.iter_mut().enumerate() {
            list.sort_unstable_by_key(|&(v, _)| v);
            if list.windows(2).any(|p| p[0].0 == p[1].0) {
                return Err(Error::domain(format!("duplicate link at node {u}")));
            }
        }
        Ok(WeightedGraph {
            labels,
            adj,
            link_count: links.len(),
        })
    }

    /// Number of nodes `|V|`.
    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    /// Number of undirected links `|E|` (the symbol `M` in the entropy model).
    pub fn link_count(&self) -> usize {
        self.link_count
    }

    /// Degree of `u`.
    pub fn degree(&self, u: NodeId) -> usize {
        self.adj[u as usize].len()
    }

    /// Neighbors of `u` with link weights, sorted by neighbor id.
    pub fn neighbors(&self, u: NodeId) -> &[(NodeId, f64)] {
        &self.adj[u as usize]
    }

    pub fn has_link(&self, u: NodeId, v: NodeId) -> bool {
        self.link_weight(u, v).is_some()
    }

    /// Weight of the link `u - v`, if present.
    pub fn link_weight(&self, u: NodeId, v: NodeId) -> Option<f64> {
        let list = &self.adj[u as usize];
        list.binary_search_by_key(&v, |&(x, _)| x)
            .ok()
            .map(|i| list[i].1)
    }

    /// Original input label of `u`.
    pub fn label(&self, u: NodeId) -> &str {
        &self.labels[u as usize]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// All links as `(u, v, w)` with `u < v`, in lexicographic order.
    pub fn links(&self) -> impl Iterator<Item = (NodeId, NodeId, f64)> + '_ {
        self.adj.iter().enumerate().flat_map(|(u, list)| {
            let u = u as NodeId;
            list.iter()
                .filter(move |&&(v, _)| u < v)
                .map(move |&(v, w)| (u, v, w))
        })
    }

    /// All unordered node pairs carrying no link, in lexicographic order.
    /// These are exactly the pairs a similarity index scores.
    pub fn unlinked_pairs(&self) -> Vec<(NodeId, NodeId)> {
        let n = self.node_count() as NodeId;
        let mut pairs = Vec::with_capacity(
            (n as usize) * (n as usize).saturating_sub(1) / 2 - self.link_count,
        );
        for u in 0..n {
            let mut nbrs = self.adj[u as usize]
                .iter()
                .map(|&(v, _)| v)
                .skip_while(|&v| v <= u)
                .peekable();
            for v in (u + 1)..n {
                if nbrs.peek() == Some(&v) {
                    nbrs.next();
                } else {
                    pairs.push((u, v));
                }
            }
        }
        pairs
    }

    /// Topological statistics of the graph.
    pub fn stats(&self) -> GraphStats {
        let v = self.node_count();
        let e = self.link_count();
        let (mut sum_k, mut sum_k2) = (0.0f64, 0.0f64);
        for u in 0..v {
            let k = self.adj[u].len() as f64;
            sum_k += k;
            sum_k2 += k * k;
        }
        let mean_k = sum_k / v as f64;
        let mean_k2 = sum_k2 / v as f64;
        GraphStats {
            node_count: v,
            link_count: e,
            mean_degree: mean_k,
            degree_heterogeneity: mean_k2 / (mean_k * mean_k),
            clustering: self.average_local_clustering(),
        }
    }

    /// Average local clustering coefficient, with C(v) = 0 for nodes of
    /// degree 0 or 1.
    fn average_local_clustering(&self) -> f64 {
        let n = self.node_count();
        let mut total = 0.0f64;
        for u in 0..n {
            let k = self.adj[u].len();
            if k < 2 {
                continue;
            }
            let mut tri = 0usize;
            let nbrs = &self.adj[u];
            for i in 0..k {
                for j in (i + 1)..k {
                    if self.has_link(nbrs[i].0, nbrs[j].0) {
                        tri += 1;
                    }
                }
            }
            total += 2.0 * tri as f64 / (k * (k - 1)) as f64;
        }
        total / n as f64
    }
}

/// Summary statistics of a [`WeightedGraph`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    pub node_count: usize,
    pub link_count: usize,
    /// `<k> = 2|E|/|V|`.
    pub mean_degree: f64,
    /// `H = <k^2>/<k>^2`; equals 1 exactly on regular graphs.
    pub degree_heterogeneity: f64,
    /// Average local clustering coefficient.
    pub clustering: f64,
}

impl GraphStats {
    /// CSV header matching [`GraphStats::csv_row`].
    pub const CSV_HEADER: &'static str = "name,V,E,mean_k,H,C";

    /// One CSV row: `name,V,E,mean_k,H,C`.
    pub fn csv_row(&self, name: &str) -> String {
        format!(
            "{},{},{},{},{},{}",
            name,
            self.node_count,
            self.link_count,
            self.mean_degree,
            self.degree_heterogeneity,
            self.clustering
        )
    }
}

/// Cleans a raw record multiset into a [`WeightedGraph`].
///
/// Direction is ignored. Records for the same unordered pair are merged under
/// `options.merge`. Self-loops are dropped (or rejected, see
/// [`PreprocessOptions::drop_self_loops`]). With `keep_lcc`, only the largest
/// connected component survives (ties broken towards the component containing
/// the lexicographically smallest label). Surviving labels are sorted and
/// remapped to dense ids, so the result is independent of record order.
pub fn preprocess(records: &[EdgeRecord], options: &PreprocessOptions) -> Result<WeightedGraph> {
    // Label -> provisional id, in first-seen order; remapped after cleaning.
    let mut ids: HashMap<&str, u32> = HashMap::new();
    let mut labels: Vec<&str> = Vec::new();
    let mut merged: HashMap<(u32, u32), f64> = HashMap::new();

    fn intern<'a>(
        label: &'a str,
        ids: &mut HashMap<&'a str, u32>,
        labels: &mut Vec<&'a str>,
    ) -> u32 {
        *ids.entry(label).or_insert_with(|| {
            labels.push(label);
            labels.len() as u32 - 1
        })
    }

    for rec in records {
        let u = intern(&rec.source, &mut ids, &mut labels);
        let v = intern(&rec.target, &mut ids, &mut labels);
        if u == v {
            if options.drop_self_loops {
                continue;
            }
            return Err(Error::domain(format!(
                "self-loop '{}' at line {} (drop_self_loops is disabled)",
                rec.source, rec.line
            )));
        }
        let key = (u.min(v), u.max(v));
        merged
            .entry(key)
            .and_modify(|w| match options.merge {
                MergeRule::Sum => *w += rec.weight,
                MergeRule::Max => *w = w.max(rec.weight),
            })
            .or_insert(rec.weight);
    }

    if merged.is_empty() {
        return Err(Error::EmptyGraph(
            "no links remain after preprocessing".into(),
        ));
    }

    // Restrict to the largest connected component if requested.
    let n = labels.len();
    let keep: Vec<bool> = if options.keep_lcc {
        largest_component(n, merged.keys().copied())
    } else {
        vec![true; n]
    };

    // Dense ids ordered by label, so the result does not depend on the
    // order records appeared in the file.
    let mut kept: Vec<(u32, &str)> = (0..n as u32)
        .filter(|&i| keep[i as usize])
        .map(|i| (i, labels[i as usize]))
        .collect();
    kept.sort_unstable_by_key(|&(_, label)| label);
    let mut remap = vec![u32::MAX; n];
    for (new, &(old, _)) in kept.iter().enumerate() {
        remap[old as usize] = new as u32;
    }

    let final_labels: Vec<String> = kept.iter().map(|&(_, l)| l.to_string()).collect();
    let mut links: Vec<(u32, u32, f64)> = merged
        .into_iter()
        .filter(|&((u, v), _)| keep[u as usize] && keep[v as usize])
        .map(|((u, v), w)| {
            let (a, b) = (remap[u as usize], remap[v as usize]);
            (a.min(b), a.max(b), w)
        })
        .collect();
    links.sort_unstable_by_key(|&(a, b, _)| (a, b));

    WeightedGraph::from_links(final_labels, &links)
}

/// Five-node toy graph used across the unit tests: labels "1".."5" (dense ids
/// 0..4), links 1-2 w1, 2-3 w2, 3-4 w1, 4-5 w2, 1-3 w3, 2-4 w1, so M = 6 and
/// degrees are k1=2, k2=3, k3=3, k4=3, k5=1.
#[cfg(test)]
pub(crate) fn t1_graph() -> WeightedGraph {
    WeightedGraph::from_links(
        (1..=5).map(|i| i.to_string()).collect(),
        &[
            (0, 1, 1.0),
            (1, 2, 2.0),
            (2, 3, 1.0),
            (3, 4, 2.0),
            (0, 2, 3.0),
            (1, 3, 1.0),
        ],
    )
    .unwrap()
}

/// Marks the nodes of the largest connected component among `0..n` under the
/// given links. Ties go to the component seen first in id order.
fn largest_component(n: usize, links: impl Iterator<Item = (u32, u32)>) -> Vec<bool> {
    let mut parent: Vec<u32> = (0..n as u32).collect();
    fn find(parent: &mut [u32], mut x: u32) -> u32 {
        while parent[x as usize] != x {
            parent[x as usize] = parent[parent[x as usize] as usize];
            x = parent[x as usize];
        }
        x
    }
    for (u, v) in links {
        let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
        if ru != rv {
            let (lo, hi) = (ru.min(rv), ru.max(rv));
            parent[hi as usize] = lo;
        }
    }
    let mut size = vec![0usize; n];
    for x in 0..n as u32 {
        size[find(&mut parent, x) as usize] += 1;
    }
    let best = (0..n).max_by_key(|&r| size[r]).unwrap_or(0) as u32;
    (0..n as u32)
        .map(|x| find(&mut parent, x) == best)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(u: &str, v: &str, w: f64) -> EdgeRecord {
        EdgeRecord {
            source: u.into(),
            target: v.into(),
            weight: w,
            line: 0,
        }
    }

    #[test]
    fn t1_shape() {
        let g = t1_graph();
        assert_eq!(g.node_count(), 5);
        assert_eq!(g.link_count(), 6);
        let degrees: Vec<usize> = (0..5).map(|u| g.degree(u)).collect();
        assert_eq!(degrees, vec![2, 3, 3, 3, 1]);
        assert_eq!(g.link_weight(0, 2), Some(3.0));
        assert_eq!(g.link_weight(2, 0), Some(3.0));
        assert!(!g.has_link(0, 3));
    }

    #[test]
    fn degree_sum_is_twice_link_count() {
        let g = t1_graph();
        let sum: usize = (0..g.node_count() as NodeId).map(|u| g.degree(u)).sum();
        assert_eq!(sum, 2 * g.link_count());
    }

    #[test]
    fn rejects_invalid_links() {
        let labels = vec!["a".to_string(), "b".to_string()];
        assert!(WeightedGraph::from_links(labels.clone(), &[(0, 0, 1.0)]).is_err());
        assert!(WeightedGraph::from_links(labels.clone(), &[(0, 1, -1.0)]).is_err());
        assert!(WeightedGraph::from_links(labels.clone(), &[(0, 1, 0.0)]).is_err());
        assert!(WeightedGraph::from_links(labels.clone(), &[(0, 2, 1.0)]).is_err());
        assert!(WeightedGraph::from_links(labels, &[(0, 1, 1.0), (1, 0, 2.0)]).is_err());
    }

    #[test]
    fn self_loops_dropped_by_default() {
        let records = vec![rec("1", "1", 5.0), rec("1", "2", 1.0)];
        let g = preprocess(&records, &PreprocessOptions::default()).unwrap();
        assert_eq!(g.link_count(), 1);
        assert_eq!(g.node_count(), 2);
    }

    #[test]
    fn self_loop_is_error_when_dropping_disabled() {
        let records = vec![rec("1", "1", 5.0), rec("1", "2", 1.0)];
        let opts = PreprocessOptions {
            drop_self_loops: false,
            ..Default::default()
        };
        assert!(preprocess(&records, &opts).is_err());
    }

    #[test]
    fn keeps_largest_component() {
        // components {1,2} and {3,4,5} (triangle)
        let records = vec![
            rec("1", "2", 1.0),
            rec("3", "4", 1.0),
            rec("4", "5", 1.0),
            rec("5", "3", 1.0),
        ];
        let g = preprocess(&records, &PreprocessOptions::default()).unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.link_count(), 3);
        assert_eq!(g.labels(), &["3".to_string(), "4".into(), "5".into()]);
    }

    #[test]
    fn lcc_disabled_keeps_everything() {
        let records = vec![rec("1", "2", 1.0), rec("3", "4", 1.0)];
        let opts = PreprocessOptions {
            keep_lcc: false,
            ..Default::default()
        };
        let g = preprocess(&records, &opts).unwrap();
        assert_eq!(g.node_count(), 4);
        assert_eq!(g.link_count(), 2);
    }

    #[test]
    fn preprocess_is_idempotent() {
        let records = vec![
            rec("b", "a", 2.0),
            rec("a", "b", 1.0),
            rec("c", "a", 4.0),
            rec("c", "c", 9.0),
        ];
        let g1 = preprocess(&records, &PreprocessOptions::default()).unwrap();
        let roundtrip: Vec<EdgeRecord> = g1
            .links()
            .map(|(u, v, w)| rec(g1.label(u), g1.label(v), w))
            .collect();
        let g2 = preprocess(&roundtrip, &PreprocessOptions::default()).unwrap();
        assert_eq!(g1, g2);
    }

    #[test]
    fn graph_independent_of_record_order() {
        let records = vec![rec("x", "y", 1.0), rec("z", "x", 2.0), rec("y", "z", 3.0)];
        let mut shuffled = records.clone();
        shuffled.reverse();
        let g1 = preprocess(&records, &PreprocessOptions::default()).unwrap();
        let g2 = preprocess(&shuffled, &PreprocessOptions::default()).unwrap();
        assert_eq!(g1, g2);
    }

    #[test]
    fn triangle_stats() {
        let records = vec![rec("1", "2", 1.0), rec("2", "3", 1.0), rec("3", "1", 1.0)];
        let g = preprocess(&records, &PreprocessOptions::default()).unwrap();
        let s = g.stats();
        assert_eq!(s.node_count, 3);
        assert_eq!(s.link_count, 3);
        assert_eq!(s.mean_degree, 2.0);
        assert_eq!(s.degree_heterogeneity, 1.0);
        assert_eq!(s.clustering, 1.0);
    }

    #[test]
    fn heterogeneity_is_one_for_regular_graphs() {
        // 6-cycle: every node has degree 2
        let records: Vec<EdgeRecord> = (0..6)
            .map(|i| rec(&i.to_string(), &((i + 1) % 6).to_string(), 1.0))
            .collect();
        let g = preprocess(&records, &PreprocessOptions::default()).unwrap();
        let s = g.stats();
        assert_eq!(s.degree_heterogeneity, 1.0);
        assert_eq!(s.clustering, 0.0);
    }

    #[test]
    fn t1_stats_by_hand() {
        let g = t1_graph();
        let s = g.stats();
        // degrees 2,3,3,3,1: <k> = 12/5, <k^2> = (4+9+9+9+1)/5
        assert_eq!(s.mean_degree, 12.0 / 5.0);
        assert!((s.degree_heterogeneity - (32.0 / 5.0) / (2.4 * 2.4)).abs() < 1e-15);
        // local C: node0: nbrs {1,2} linked -> 1; node1: {0,2,3}: pairs (0,2) yes,(0,3) no,(2,3) yes -> 2/3;
        // node2: {0,1,3}: (0,1) yes,(0,3) no,(1,3) yes -> 2/3; node3: {1,2,4}: (1,2) yes,(1,4) no,(2,4) no -> 1/3;
        // node4: degree 1 -> 0. average = (1 + 2/3 + 2/3 + 1/3 + 0)/5
        assert!((s.clustering - (1.0 + 2.0 / 3.0 + 2.0 / 3.0 + 1.0 / 3.0) / 5.0).abs() < 1e-15);
    }

    #[test]
    fn unlinked_pairs_of_t1() {
        let g = t1_graph();
        assert_eq!(g.unlinked_pairs(), vec![(0, 3), (0, 4), (1, 4), (2, 4)]);
    }

    #[test]
    fn stats_csv_row_shape() {
        let g = t1_graph();
        let row = g.stats().csv_row("t1");
        assert!(row.starts_with("t1,5,6,2.4,"), "{row}");
    }

    #[test]
    fn empty_after_cleaning_is_empty_graph_error() {
        let records = vec![rec("1", "1", 5.0)];
        assert!(matches!(
            preprocess(&records, &PreprocessOptions::default()),
            Err(Error::EmptyGraph(_))
        ));
    }
}
