//! Exact max-flow / min-cut (Dinic) and the terminal cut function `h_K`.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// A cut value together with one side of a cut achieving it.
#[derive(Debug, Clone, PartialEq)]
pub struct CutValue {
    pub value: f64,
    /// Sorted node indices of the source side.
    pub witness: Vec<usize>,
}

/// Residual network for repeated s-t computations on the same graph.
///
/// The graph's edges become arc pairs with capacity `c` in both directions;
/// each query appends a super source and super sink wired to the requested
/// node sets with capacity `1 + total capacity`.
#[derive(Debug, Clone)]
pub struct FlowNetwork {
    n: usize,
    base_arcs: usize,
    to: Vec<usize>,
    cap: Vec<f64>,
    adj: Vec<Vec<usize>>,
    big: f64,
    eps: f64,
}

impl FlowNetwork {
    pub fn new(g: &Graph) -> Self {
        let n = g.node_count();
        let total = g.total_capacity();
        let mut net = FlowNetwork {
            n,
            base_arcs: 0,
            to: Vec::with_capacity(2 * g.edges().len()),
            cap: Vec::with_capacity(2 * g.edges().len()),
            adj: vec![Vec::new(); n + 2],
            big: 1.0 + total,
            eps: 1e-12 * (1.0 + total),
        };
        for e in g.edges() {
            net.push_pair(e.u, e.v, e.cap, e.cap);
        }
        net.base_arcs = net.to.len();
        net
    }

    fn push_pair(&mut self, a: usize, b: usize, cap_ab: f64, cap_ba: f64) {
        let id = self.to.len();
        self.to.push(b);
        self.cap.push(cap_ab);
        self.to.push(a);
        self.cap.push(cap_ba);
        self.adj[a].push(id);
        self.adj[b].push(id + 1);
    }

    /// Maximum flow from `sources` to `sinks` and the residual-reachable
    /// source side. Sets must be nonempty and disjoint (checked by callers).
    fn solve(&self, sources: &[usize], sinks: &[usize]) -> CutValue {
        let mut work = self.clone();
        let s = self.n;
        let t = self.n + 1;
        for &x in sources {
            work.push_pair(s, x, self.big, 0.0);
        }
        for &x in sinks {
            work.push_pair(x, t, self.big, 0.0);
        }
        let value = work.dinic(s, t);

        let mut seen = vec![false; self.n + 2];
        let mut queue = VecDeque::from([s]);
        seen[s] = true;
        while let Some(x) = queue.pop_front() {
            for &a in &work.adj[x] {
                let y = work.to[a];
                if !seen[y] && work.cap[a] > work.eps {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        let witness = (0..self.n).filter(|&v| seen[v]).collect();
        CutValue { value, witness }
    }

    fn dinic(&mut self, s: usize, t: usize) -> f64 {
        let total_nodes = self.n + 2;
        let mut flow = 0.0;
        let mut level = vec![usize::MAX; total_nodes];
        let mut iter = vec![0usize; total_nodes];
        loop {
            level.fill(usize::MAX);
            level[s] = 0;
            let mut queue = VecDeque::from([s]);
            while let Some(x) = queue.pop_front() {
                for &a in &self.adj[x] {
                    let y = self.to[a];
                    if level[y] == usize::MAX && self.cap[a] > self.eps {
                        level[y] = level[x] + 1;
                        queue.push_back(y);
                    }
                }
            }
            if level[t] == usize::MAX {
                return flow;
            }
            iter.fill(0);
            loop {
                let pushed = self.augment(s, t, f64::INFINITY, &level, &mut iter);
                if pushed <= self.eps {
                    break;
                }
                flow += pushed;
            }
        }
    }

    fn augment(
        &mut self,
        x: usize,
        t: usize,
        limit: f64,
        level: &[usize],
        iter: &mut [usize],
    ) -> f64 {
        if x == t {
            return limit;
        }
        while iter[x] < self.adj[x].len() {
            let a = self.adj[x][iter[x]];
            let y = self.to[a];
            if self.cap[a] > self.eps && level[y] == level[x] + 1 {
                let got = self.augment(y, t, limit.min(self.cap[a]), level, iter);
                if got > self.eps {
                    self.cap[a] -= got;
                    self.cap[a ^ 1] += got;
                    return got;
                }
            }
            iter[x] += 1;
        }
        0.0
    }

    pub fn base_arc_count(&self) -> usize {
        self.base_arcs
    }
}

/// Maximum flow between two disjoint node sets, with a minimum cut whose
/// source side contains every source.
pub fn max_flow_min_cut(g: &Graph, sources: &[usize], sinks: &[usize]) -> Result<CutValue> {
    if sources.is_empty() || sinks.is_empty() {
        return Err(Error::input("sources and sinks must be nonempty"));
    }
    let n = g.node_count();
    let mut side = vec![0u8; n];
    for &x in sources {
        if x >= n {
            return Err(Error::input(format!("source {x} is not a node")));
        }
        side[x] = 1;
    }
    for &x in sinks {
        if x >= n {
            return Err(Error::input(format!("sink {x} is not a node")));
        }
        if side[x] == 1 {
            return Err(Error::input(format!(
                "node `{}` is both a source and a sink",
                g.name(x)
            )));
        }
    }
    Ok(FlowNetwork::new(g).solve(sources, sinks))
}

/// Reusable evaluator for `h_K(A)` over many terminal subsets of one graph.
#[derive(Debug, Clone)]
pub struct TerminalCutOracle<'g> {
    graph: &'g Graph,
    net: FlowNetwork,
}

impl<'g> TerminalCutOracle<'g> {
    pub fn new(graph: &'g Graph) -> Self {
        TerminalCutOracle {
            graph,
            net: FlowNetwork::new(graph),
        }
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    /// Minimum cut separating the terminals in `side` from the remaining
    /// terminals. `side` must contain only terminals.
    pub fn cut(&self, side: &[usize]) -> Result<CutValue> {
        let g = self.graph;
        let mut inside = vec![false; g.node_count()];
        for &a in side {
            if a >= g.node_count() || !g.is_terminal(a) {
                return Err(Error::input(format!("{a} is not a terminal")));
            }
            if std::mem::replace(&mut inside[a], true) {
                return Err(Error::input(format!("terminal `{}` repeated", g.name(a))));
            }
        }
        let rest: Vec<usize> = g
            .terminals()
            .iter()
            .copied()
            .filter(|&t| !inside[t])
            .collect();
        if side.is_empty() {
            return Ok(CutValue {
                value: 0.0,
                witness: Vec::new(),
            });
        }
        if rest.is_empty() {
            return Ok(CutValue {
                value: 0.0,
                witness: (0..g.node_count()).collect(),
            });
        }
        Ok(self.net.solve(side, &rest))
    }

    /// `h_K` for a bitmask over terminal positions.
    pub fn cut_bits(&self, bits: u64) -> f64 {
        let side = self.graph.terminals_from_bits(bits);
        self.cut(&side).map(|c| c.value).unwrap_or(0.0)
    }

    /// `h_K(A)` for every bitmask `A` in `0..2^k`.
    pub fn all_cuts(&self) -> Result<Vec<f64>> {
        use rayon::prelude::*;
        let k = self.graph.k();
        if k > 24 {
            return Err(Error::size(format!(
                "exhaustive terminal cuts need k <= 24, got {k}"
            )));
        }
        if k == 0 {
            return Ok(vec![0.0]);
        }
        // h_K(A) = h_K(K - A): evaluate only masks without the top terminal.
        let full = (1u64 << k) - 1;
        let top = 1u64 << (k - 1);
        let half: Vec<f64> = (0..top).into_par_iter().map(|b| self.cut_bits(b)).collect();
        Ok((0..=full)
            .map(|b| {
                if b & top == 0 {
                    half[b as usize]
                } else {
                    half[(full ^ b) as usize]
                }
            })
            .collect())
    }
}

/// The terminal cut function `h_K(A)`: the minimum capacity of a cut whose
/// intersection with `K` is exactly `A`.
pub fn terminal_cut(g: &Graph, side: &[usize]) -> Result<CutValue> {
    TerminalCutOracle::new(g).cut(side)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generators;

    fn brute_min_cut(g: &Graph, sources: &[usize], sinks: &[usize]) -> f64 {
        let n = g.node_count();
        let free: Vec<usize> = (0..n)
            .filter(|v| !sources.contains(v) && !sinks.contains(v))
            .collect();
        let mut best = f64::INFINITY;
        for bits in 0..1u64 << free.len() {
            let mut inside = vec![false; n];
            for &s in sources {
                inside[s] = true;
            }
            for (i, &v) in free.iter().enumerate() {
                inside[v] = bits >> i & 1 == 1;
            }
            best = best.min(g.cut_value_mask(&inside));
        }
        best
    }

    #[test]
    fn single_edge() {
        let g = Graph::from_named(&["a", "b"], &[("a", "b", 3.0)], &["a", "b"]).unwrap();
        let c = max_flow_min_cut(&g, &[0], &[1]).unwrap();
        assert_eq!(c.value, 3.0);
        assert_eq!(c.witness, vec![0]);
    }

    #[test]
    fn k4_unit() {
        let g = generators::complete(4, None).unwrap();
        let c = max_flow_min_cut(&g, &[0], &[1]).unwrap();
        assert!((c.value - 3.0).abs() < 1e-12);
        assert!((brute_min_cut(&g, &[0], &[1]) - 3.0).abs() < 1e-12);
        assert!((g.cut_value(&c.witness) - c.value).abs() < 1e-9);
    }

    #[test]
    fn overlapping_sets_rejected() {
        let g = generators::complete(3, None).unwrap();
        assert!(matches!(
            max_flow_min_cut(&g, &[0, 1], &[1]),
            Err(Error::Input(_))
        ));
        assert!(max_flow_min_cut(&g, &[], &[1]).is_err());
    }

    #[test]
    fn terminal_cut_edge_cases() {
        let g = generators::star(3).unwrap();
        assert_eq!(terminal_cut(&g, &[]).unwrap().value, 0.0);
        let all = terminal_cut(&g, &[1, 2, 3]).unwrap();
        assert_eq!(all.value, 0.0);
        assert_eq!(all.witness.len(), 4);
        assert!(terminal_cut(&g, &[0]).is_err());
        assert_eq!(terminal_cut(&g, &[1]).unwrap().value, 1.0);
    }

    #[test]
    fn disconnected_terminals_cut_zero() {
        let g = Graph::from_named(
            &["a", "b", "c", "d"],
            &[("a", "b", 1.0), ("c", "d", 1.0)],
            &["a", "c"],
        )
        .unwrap();
        assert_eq!(terminal_cut(&g, &[0]).unwrap().value, 0.0);
    }

    #[test]
    fn random_graphs_match_enumeration() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..30 {
            let g = generators::random_connected(9, 3, 0.3, &mut rng).unwrap();
            let flow = max_flow_min_cut(&g, &[0], &[1, 2]).unwrap();
            let brute = brute_min_cut(&g, &[0], &[1, 2]);
            assert!((flow.value - brute).abs() < 1e-9);
            assert!((g.cut_value(&flow.witness) - flow.value).abs() < 1e-9);
        }
    }
}
