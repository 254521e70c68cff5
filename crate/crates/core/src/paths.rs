//! Bounded-length simple-path enumeration and path weights.

use crate::error::{Error, Result};
use crate::graph::{NodeId, WeightedGraph};

/// A simple path: an ordered sequence of distinct nodes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Path {
    nodes: Vec<NodeId>,
}

impl Path {
    /// Validates distinctness and minimum length (two nodes).
    pub fn new(nodes: Vec<NodeId>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::domain("a path needs at least two nodes"));
        }
        let mut seen = nodes.clone();
        seen.sort_unstable();
        if seen.windows(2).any(|p| p[0] == p[1]) {
            return Err(Error::domain("path nodes must be distinct"));
        }
        Ok(Path { nodes })
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    /// Number of links (one less than the node count).
    pub fn link_count(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn reversed(&self) -> Path {
        let mut nodes = self.nodes.clone();
        nodes.reverse();
        Path { nodes }
    }
}

/// Calls `visit` once for every simple path from `a` to `b` with exactly
/// `length` links, in lexicographic order of the intermediate nodes.
///
/// `b` never appears as an intermediate node; the direct `a - b` link (if
/// any) is not part of any visited path of length >= 2.
pub fn for_each_simple_path(
    g: &WeightedGraph,
    a: NodeId,
    b: NodeId,
    length: usize,
    mut visit: impl FnMut(&[NodeId]),
) -> Result<()> {
    let n = g.node_count();
    if (a as usize) >= n || (b as usize) >= n {
        return Err(Error::domain(format!("nodes ({a},{b}) not in graph")));
    }
    if a == b {
        return Err(Error::domain("path endpoints must differ"));
    }
    if length == 0 {
        return Err(Error::domain("path length must be at least 1"));
    }

    let mut stack: Vec<NodeId> = Vec::with_capacity(length + 1);
    stack.push(a);
    let mut on_path = vec![false; n];
    on_path[a as usize] = true;

    fn dfs(
        g: &WeightedGraph,
        b: NodeId,
        remaining: usize,
        stack: &mut Vec<NodeId>,
        on_path: &mut [bool],
        visit: &mut impl FnMut(&[NodeId]),
    ) {
        let current = *stack.last().unwrap();
        if remaining == 1 {
            if g.has_link(current, b) {
                stack.push(b);
                visit(stack);
                stack.pop();
            }
            return;
        }
        for &(next, _) in g.neighbors(current) {
            if next == b || on_path[next as usize] {
                continue;
            }
            on_path[next as usize] = true;
            stack.push(next);
            dfs(g, b, remaining - 1, stack, on_path, visit);
            stack.pop();
            on_path[next as usize] = false;
        }
    }

    dfs(g, b, length, &mut stack, &mut on_path, &mut visit);
    Ok(())
}

/// All simple paths from `a` to `b` with exactly `length` links, each
/// reported once with `a` first.
pub fn enumerate_simple_paths(
    g: &WeightedGraph,
    a: NodeId,
    b: NodeId,
    length: usize,
) -> Result<Vec<Path>> {
    let mut out = Vec::new();
    for_each_simple_path(g, a, b, length, |nodes| {
        out.push(Path {
            nodes: nodes.to_vec(),
        });
    })?;
    Ok(out)
}

/// Weight of a path: the sum of its links' weights.
pub fn path_weight(g: &WeightedGraph, path: &Path) -> Result<f64> {
    let mut total = 0.0f64;
    for pair in path.nodes().windows(2) {
        let w = g.link_weight(pair[0], pair[1]).ok_or_else(|| {
            Error::domain(format!("no link between {} and {}", pair[0], pair[1]))
        })?;
        total += w;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::t1_graph;

    fn path_nodes(paths: &[Path]) -> Vec<Vec<NodeId>> {
        paths.iter().map(|p| p.nodes().to_vec()).collect()
    }

    #[test]
    fn length_two_paths_are_common_neighbors() {
        let g = t1_graph();
        // labels "1".."5" map to ids 0..4
        let paths = enumerate_simple_paths(&g, 0, 3, 2).unwrap();
        assert_eq!(path_nodes(&paths), vec![vec![0, 1, 3], vec![0, 2, 3]]);
    }

    #[test]
    fn no_paths_when_none_exist() {
        let g = t1_graph();
        assert!(enumerate_simple_paths(&g, 0, 4, 2).unwrap().is_empty());
    }

    #[test]
    fn length_three_paths_of_t1() {
        let g = t1_graph();
        let paths = enumerate_simple_paths(&g, 0, 3, 3).unwrap();
        assert_eq!(path_nodes(&paths), vec![vec![0, 1, 2, 3], vec![0, 2, 1, 3]]);
    }

    #[test]
    fn same_endpoints_rejected() {
        let g = t1_graph();
        assert!(enumerate_simple_paths(&g, 2, 2, 2).is_err());
    }

    #[test]
    fn path_weight_sums_stored_weights() {
        let g = t1_graph();
        let p = Path::new(vec![0, 2, 3]).unwrap(); // 1-3-4: 3 + 1
        assert_eq!(path_weight(&g, &p).unwrap(), 4.0);
        assert_eq!(path_weight(&g, &p.reversed()).unwrap(), 4.0);
    }

    #[test]
    fn single_link_path_weight_is_link_weight() {
        let g = t1_graph();
        let p = Path::new(vec![0, 2]).unwrap();
        assert_eq!(path_weight(&g, &p).unwrap(), g.link_weight(0, 2).unwrap());
    }

    #[test]
    fn path_weight_missing_link_is_domain_error() {
        let g = t1_graph();
        let p = Path::new(vec![0, 4]).unwrap();
        assert!(path_weight(&g, &p).is_err());
    }

    #[test]
    fn path_requires_distinct_nodes() {
        assert!(Path::new(vec![0, 1, 0]).is_err());
        assert!(Path::new(vec![3]).is_err());
    }

    #[test]
    fn weight_additive_over_concatenation() {
        let g = t1_graph();
        let left = Path::new(vec![0, 1]).unwrap();
        let right = Path::new(vec![1, 2, 3]).unwrap();
        let whole = Path::new(vec![0, 1, 2, 3]).unwrap();
        assert_eq!(
            path_weight(&g, &whole).unwrap(),
            path_weight(&g, &left).unwrap() + path_weight(&g, &right).unwrap()
        );
    }
}
