//! Semi-metrics on node sets and shortest-path computations.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Tolerance for the triangle-inequality check.
pub const TRIANGLE_TOL: f64 = 1e-9;

/// Dense symmetric distance table. Distances may be `+inf` for pairs that
/// are disconnected; zero distances between distinct nodes are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct Metric {
    names: Vec<String>,
    dist: Vec<f64>,
}

impl Metric {
    /// All-zero metric on `names`.
    pub fn zero(names: Vec<String>) -> Self {
        let n = names.len();
        Metric {
            names,
            dist: vec![0.0; n * n],
        }
    }

    pub fn from_fn(names: Vec<String>, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Metric::zero(names);
        let n = m.len();
        for a in 0..n {
            for b in a + 1..n {
                m.set(a, b, f(a, b));
            }
        }
        m
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.dist[a * self.names.len() + b]
    }

    pub fn set(&mut self, a: usize, b: usize, d: f64) {
        let n = self.names.len();
        if a != b {
            self.dist[a * n + b] = d;
            self.dist[b * n + a] = d;
        }
    }

    /// Restriction to the listed indices, in that order.
    pub fn restrict(&self, nodes: &[usize]) -> Metric {
        let names = nodes.iter().map(|&v| self.names[v].clone()).collect();
        Metric::from_fn(names, |a, b| self.get(nodes[a], nodes[b]))
    }

    pub fn has_infinite(&self) -> bool {
        self.dist.iter().any(|d| d.is_infinite())
    }

    /// Largest finite distance.
    pub fn diameter(&self) -> f64 {
        self.dist
            .iter()
            .copied()
            .filter(|d| d.is_finite())
            .fold(0.0, f64::max)
    }

    /// Checks nonnegativity, symmetry and the triangle inequality.
    pub fn validate(&self) -> Result<()> {
        let n = self.len();
        let scale = 1.0 + self.diameter();
        for a in 0..n {
            if self.get(a, a) != 0.0 {
                return Err(Error::input(format!(
                    "nonzero self-distance at `{}`",
                    self.names[a]
                )));
            }
            for b in 0..n {
                let d = self.get(a, b);
                if d.is_nan() || d < 0.0 {
                    return Err(Error::input(format!(
                        "distance between `{}` and `{}` must be nonnegative",
                        self.names[a], self.names[b]
                    )));
                }
                if d != self.get(b, a) {
                    return Err(Error::input("distance table is not symmetric"));
                }
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let via = self.get(a, c) + self.get(c, b);
                    if self.get(a, b) > via + TRIANGLE_TOL * scale {
                        return Err(Error::input(format!(
                            "triangle inequality violated: d({}, {}) > d({}, {}) + d({}, {})",
                            self.names[a],
                            self.names[b],
                            self.names[a],
                            self.names[c],
                            self.names[c],
                            self.names[b]
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Copy, Clone, PartialEq)]
struct Entry {
    dist: f64,
    node: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on distance, ties by node index.
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source shortest paths; `pred[v]` is the edge used to reach `v`.
#[derive(Debug, Clone)]
pub struct ShortestPathTree {
    pub source: usize,
    pub dist: Vec<f64>,
    pub pred: Vec<Option<usize>>,
}

impl ShortestPathTree {
    /// Edge indices along the path from the source to `target`, in order.
    pub fn path_edges(&self, g: &Graph, target: usize) -> Option<Vec<usize>> {
        if !self.dist[target].is_finite() {
            return None;
        }
        let mut edges = Vec::new();
        let mut at = target;
        while at != self.source {
            let e = self.pred[at]?;
            edges.push(e);
            at = g.edges()[e].other(at);
        }
        edges.reverse();
        Some(edges)
    }
}

fn check_lengths(g: &Graph, lengths: &[f64]) -> Result<()> {
    if lengths.len() != g.edges().len() {
        return Err(Error::input(format!(
            "expected {} edge lengths, got {}",
            g.edges().len(),
            lengths.len()
        )));
    }
    if let Some(l) = lengths.iter().find(|l| l.is_nan() || **l < 0.0) {
        return Err(Error::input(format!(
            "edge lengths must be nonnegative, got {l}"
        )));
    }
    Ok(())
}

/// Dijkstra from `source` with per-edge `lengths` (aligned with `g.edges()`).
pub fn dijkstra(
    g: &Graph,
    adj: &[Vec<(usize, usize)>],
    lengths: &[f64],
    source: usize,
) -> ShortestPathTree {
    let n = g.node_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Entry {
        dist: 0.0,
        node: source,
    });
    while let Some(Entry { dist: d, node: x }) = heap.pop() {
        if done[x] {
            continue;
        }
        done[x] = true;
        for &(y, e) in &adj[x] {
            let nd = d + lengths[e];
            if nd < dist[y] {
                dist[y] = nd;
                pred[y] = Some(e);
                heap.push(Entry { dist: nd, node: y });
            }
        }
    }
    ShortestPathTree { source, dist, pred }
}

/// All-pairs shortest-path metric of `g` under `lengths`; disconnected pairs
/// get `+inf`.
pub fn shortest_path_metric(g: &Graph, lengths: &[f64]) -> Result<Metric> {
    check_lengths(g, lengths)?;
    let adj = g.adjacency();
    let n = g.node_count();
    let mut m = Metric::zero(g.names().to_vec());
    for s in 0..n {
        let tree = dijkstra(g, &adj, lengths, s);
        for t in s + 1..n {
            m.set(s, t, tree.dist[t]);
        }
    }
    Ok(m)
}

/// Shortest-path trees from every node, for path extraction.
pub fn all_shortest_path_trees(g: &Graph, lengths: &[f64]) -> Result<Vec<ShortestPathTree>> {
    check_lengths(g, lengths)?;
    let adj = g.adjacency();
    Ok((0..g.node_count())
        .map(|s| dijkstra(g, &adj, lengths, s))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generators;

    #[test]
    fn path_metric() {
        let g = generators::path(3, &[0, 2]).unwrap();
        let m = shortest_path_metric(&g, &[1.0, 1.0]).unwrap();
        assert_eq!(m.get(0, 2), 2.0);
        m.validate().unwrap();
    }

    #[test]
    fn single_node_and_disconnected() {
        let g = Graph::new(vec!["a".into()], vec![], vec![0]).unwrap();
        assert_eq!(shortest_path_metric(&g, &[]).unwrap().len(), 1);

        let g = Graph::new(vec!["a".into(), "b".into()], vec![], vec![0, 1]).unwrap();
        let m = shortest_path_metric(&g, &[]).unwrap();
        assert!(m.get(0, 1).is_infinite());
        assert!(m.has_infinite());
    }

    #[test]
    fn rejects_bad_lengths() {
        let g = generators::path(3, &[0]).unwrap();
        assert!(shortest_path_metric(&g, &[1.0]).is_err());
        assert!(shortest_path_metric(&g, &[1.0, -1.0]).is_err());
    }

    #[test]
    fn triangle_violation_detected() {
        let mut m = Metric::zero(vec!["a".into(), "b".into(), "c".into()]);
        m.set(0, 1, 1.0);
        m.set(1, 2, 1.0);
        m.set(0, 2, 3.0);
        assert!(m.validate().is_err());
        m.set(0, 2, 2.0);
        assert!(m.validate().is_ok());
    }

    #[test]
    fn path_extraction() {
        let g = generators::cycle(5, &[0]).unwrap();
        let trees = all_shortest_path_trees(&g, &[1.0; 5]).unwrap();
        let p = trees[0].path_edges(&g, 2).unwrap();
        assert_eq!(p.len(), 2);
    }
}
