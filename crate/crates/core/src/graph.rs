//! Undirected capacitated graphs with a distinguished terminal set.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};

/// An undirected edge, stored with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub cap: f64,
}

impl Edge {
    /// The endpoint opposite `x`.
    pub fn other(&self, x: usize) -> usize {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }
}

/// Undirected capacitated graph `G = (V, E, c)` with terminals `K`.
///
/// Parallel edges are merged additively on construction and zero-capacity
/// edges are dropped, so `edges()` holds at most one edge per unordered pair,
/// sorted by `(u, v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    names: Vec<String>,
    index: HashMap<String, usize>,
    edges: Vec<Edge>,
    terminals: Vec<usize>,
    terminal_pos: Vec<Option<usize>>,
}

impl Graph {
    pub fn new(
        names: Vec<String>,
        edges: impl IntoIterator<Item = (usize, usize, f64)>,
        terminals: Vec<usize>,
    ) -> Result<Self> {
        let n = names.len();
        let mut index = HashMap::with_capacity(n);
        for (i, name) in names.iter().enumerate() {
            if index.insert(name.clone(), i).is_some() {
                return Err(Error::input(format!("duplicate node id `{name}`")));
            }
        }

        let mut merged: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (u, v, cap) in edges {
            if u >= n || v >= n {
                return Err(Error::input(format!(
                    "edge ({u}, {v}) references an unknown node"
                )));
            }
            if u == v {
                return Err(Error::input(format!("self-loop at node `{}`", names[u])));
            }
            if !cap.is_finite() || cap < 0.0 {
                return Err(Error::input(format!(
                    "capacity of edge (`{}`, `{}`) must be finite and nonnegative, got {cap}",
                    names[u], names[v]
                )));
            }
            *merged.entry((u.min(v), u.max(v))).or_insert(0.0) += cap;
        }
        let edges = merged
            .into_iter()
            .filter(|&(_, cap)| cap > 0.0)
            .map(|((u, v), cap)| Edge { u, v, cap })
            .collect();

        let mut terminal_pos = vec![None; n];
        for (pos, &t) in terminals.iter().enumerate() {
            if t >= n {
                return Err(Error::input(format!("terminal index {t} is not a node")));
            }
            if terminal_pos[t].replace(pos).is_some() {
                return Err(Error::input(format!(
                    "terminal `{}` listed twice",
                    names[t]
                )));
            }
        }

        Ok(Graph {
            names,
            index,
            edges,
            terminals,
            terminal_pos,
        })
    }

    /// Builds a graph from string identifiers.
    pub fn from_named<S: AsRef<str>>(
        nodes: &[S],
        edges: &[(S, S, f64)],
        terminals: &[S],
    ) -> Result<Self> {
        let names: Vec<String> = nodes.iter().map(|s| s.as_ref().to_string()).collect();
        let lookup: HashMap<&str, usize> = nodes
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_ref(), i))
            .collect();
        let find = |s: &S| {
            lookup
                .get(s.as_ref())
                .copied()
                .ok_or_else(|| Error::input(format!("unknown node id `{}`", s.as_ref())))
        };
        let mut idx_edges = Vec::with_capacity(edges.len());
        for (u, v, c) in edges {
            idx_edges.push((find(u)?, find(v)?, *c));
        }
        let terms = terminals.iter().map(find).collect::<Result<Vec<_>>>()?;
        Graph::new(names, idx_edges, terms)
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn terminals(&self) -> &[usize] {
        &self.terminals
    }

    /// Number of terminals, `k = |K|`.
    pub fn k(&self) -> usize {
        self.terminals.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn is_terminal(&self, v: usize) -> bool {
        self.terminal_pos[v].is_some()
    }

    /// Position of `v` in the terminal list, if it is a terminal.
    pub fn terminal_position(&self, v: usize) -> Option<usize> {
        self.terminal_pos[v]
    }

    pub fn non_terminals(&self) -> Vec<usize> {
        (0..self.node_count())
            .filter(|&v| !self.is_terminal(v))
            .collect()
    }

    pub fn total_capacity(&self) -> f64 {
        self.edges.iter().map(|e| e.cap).sum()
    }

    /// For every node, the list of `(neighbor, edge index)` pairs.
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.node_count()];
        for (i, e) in self.edges.iter().enumerate() {
            adj[e.u].push((e.v, i));
            adj[e.v].push((e.u, i));
        }
        adj
    }

    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        let key = (a.min(b), a.max(b));
        self.edges.binary_search_by(|e| (e.u, e.v).cmp(&key)).ok()
    }

    pub fn is_connected(&self) -> bool {
        let n = self.node_count();
        if n <= 1 {
            return true;
        }
        let adj = self.adjacency();
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(x) = stack.pop() {
            for &(y, _) in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    count += 1;
                    stack.push(y);
                }
            }
        }
        count == n
    }

    /// Same graph with every capacity multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Graph> {
        Graph::new(
            self.names.clone(),
            self.edges.iter().map(|e| (e.u, e.v, e.cap * factor)),
            self.terminals.clone(),
        )
    }

    /// Membership mask for a list of node indices.
    pub fn mask(&self, nodes: &[usize]) -> Vec<bool> {
        let mut m = vec![false; self.node_count()];
        for &v in nodes {
            m[v] = true;
        }
        m
    }

    /// Terminal subset encoded as a bitmask over terminal positions.
    pub fn terminals_from_bits(&self, bits: u64) -> Vec<usize> {
        self.terminals
            .iter()
            .enumerate()
            .filter(|(i, _)| bits >> i & 1 == 1)
            .map(|(_, &t)| t)
            .collect()
    }

    /// Total capacity of edges with exactly one endpoint in `set`.
    pub fn cut_value(&self, set: &[usize]) -> f64 {
        self.cut_value_mask(&self.mask(set))
    }

    pub fn cut_value_mask(&self, inside: &[bool]) -> f64 {
        self.edges
            .iter()
            .filter(|e| inside[e.u] != inside[e.v])
            .map(|e| e.cap)
            .sum()
    }
}

/// Free-function form of [`Graph::cut_value`].
pub fn cut_value(g: &Graph, set: &[usize]) -> f64 {
    g.cut_value(set)
}

/// Nonnegative demands on unordered node pairs, keyed `(min, max)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DemandVector {
    entries: BTreeMap<(usize, usize), f64>,
}

impl DemandVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `amount` to the demand between `a` and `b`.
    pub fn add(&mut self, a: usize, b: usize, amount: f64) -> Result<()> {
        if a == b {
            return Err(Error::input("demand between a node and itself"));
        }
        if !amount.is_finite() || amount < 0.0 {
            return Err(Error::input(format!(
                "demand must be finite and nonnegative, got {amount}"
            )));
        }
        *self.entries.entry((a.min(b), a.max(b))).or_insert(0.0) += amount;
        Ok(())
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.entries
            .get(&(a.min(b), a.max(b)))
            .copied()
            .unwrap_or(0.0)
    }

    /// Nonzero entries in key order.
    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.entries
            .iter()
            .filter(|(_, &d)| d > 0.0)
            .map(|(&k, &d)| (k, d))
    }

    pub fn len(&self) -> usize {
        self.iter().count()
    }

    pub fn is_empty(&self) -> bool {
        self.iter().next().is_none()
    }

    pub fn total(&self) -> f64 {
        self.entries.values().sum()
    }

    pub fn scaled(&self, factor: f64) -> DemandVector {
        DemandVector {
            entries: self
                .entries
                .iter()
                .map(|(&k, &d)| (k, d * factor))
                .collect(),
        }
    }

    /// Checks that every endpoint is a terminal of `g`.
    pub fn validate_terminals(&self, g: &Graph) -> Result<()> {
        for ((a, b), _) in self.iter() {
            for x in [a, b] {
                if x >= g.node_count() {
                    return Err(Error::input(format!("demand endpoint {x} is not a node")));
                }
                if !g.is_terminal(x) {
                    return Err(Error::input(format!(
                        "demand endpoint `{}` is not a terminal",
                        g.name(x)
                    )));
                }
            }
        }
        Ok(())
    }
}

impl FromIterator<((usize, usize), f64)> for DemandVector {
    fn from_iter<I: IntoIterator<Item = ((usize, usize), f64)>>(iter: I) -> Self {
        let mut d = DemandVector::new();
        for ((a, b), v) in iter {
            // Invalid entries are a programming error for this constructor.
            d.add(a, b, v).expect("valid demand entry");
        }
        d
    }
}

/// Small graph builders used by tests, the CLI `gen` command and examples.
pub mod generators {
    use super::Graph;
    use crate::error::Result;
    use rand::Rng;

    fn named(prefix: &str, n: usize) -> Vec<String> {
        (0..n).map(|i| format!("{prefix}{i}")).collect()
    }

    /// Path `v0 - v1 - ... - v(n-1)` with unit capacities.
    pub fn path(n: usize, terminals: &[usize]) -> Result<Graph> {
        Graph::new(
            named("v", n),
            (1..n).map(|i| (i - 1, i, 1.0)),
            terminals.to_vec(),
        )
    }

    /// Unit cycle on `n` nodes.
    pub fn cycle(n: usize, terminals: &[usize]) -> Result<Graph> {
        Graph::new(
            named("v", n),
            (0..n).map(|i| (i, (i + 1) % n, 1.0)),
            terminals.to_vec(),
        )
    }

    /// Star `K_{1,leaves}`: center `c`, leaves `t0..`, all leaves terminal.
    pub fn star(leaves: usize) -> Result<Graph> {
        let mut names = vec!["c".to_string()];
        names.extend((0..leaves).map(|i| format!("t{i}")));
        Graph::new(
            names,
            (1..=leaves).map(|i| (0, i, 1.0)),
            (1..=leaves).collect(),
        )
    }

    /// Complete graph with unit capacities; every node is a terminal unless
    /// `terminals` is given.
    pub fn complete(n: usize, terminals: Option<&[usize]>) -> Result<Graph> {
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                edges.push((a, b, 1.0));
            }
        }
        let terms = terminals.map_or_else(|| (0..n).collect(), |t| t.to_vec());
        Graph::new(named("v", n), edges, terms)
    }

    /// `rows x cols` unit grid; node `r * cols + c` is named `g{r}_{c}`.
    pub fn grid(rows: usize, cols: usize, terminals: &[usize]) -> Result<Graph> {
        let mut names = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                names.push(format!("g{r}_{c}"));
            }
        }
        let mut edges = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                let v = r * cols + c;
                if c + 1 < cols {
                    edges.push((v, v + 1, 1.0));
                }
                if r + 1 < rows {
                    edges.push((v, v + cols, 1.0));
                }
            }
        }
        Graph::new(names, edges, terminals.to_vec())
    }

    /// The four corners of a `rows x cols` grid.
    pub fn grid_corners(rows: usize, cols: usize) -> Vec<usize> {
        vec![0, cols - 1, (rows - 1) * cols, rows * cols - 1]
    }

    /// Random connected graph: a random spanning tree plus each remaining
    /// pair independently with probability `p`. Capacities are drawn from
    /// `{1, 2, 3}`. The first `k` nodes are terminals.
    pub fn random_connected<R: Rng>(n: usize, k: usize, p: f64, rng: &mut R) -> Result<Graph> {
        let mut edges = Vec::new();
        let mut present = vec![vec![false; n]; n];
        for v in 1..n {
            let u = rng.gen_range(0..v);
            present[u][v] = true;
            edges.push((u, v, f64::from(rng.gen_range(1..=3u8))));
        }
        for a in 0..n {
            for b in a + 1..n {
                if !present[a][b] && rng.gen_bool(p) {
                    edges.push((a, b, f64::from(rng.gen_range(1..=3u8))));
                }
            }
        }
        Graph::new(named("v", n), edges, (0..k.min(n)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_edges_merge() {
        let g = Graph::new(
            vec!["a".into(), "b".into()],
            vec![(0, 1, 1.5), (1, 0, 2.0)],
            vec![0, 1],
        )
        .unwrap();
        assert_eq!(g.edges().len(), 1);
        assert_eq!(g.edges()[0].cap, 3.5);
    }

    #[test]
    fn rejects_bad_input() {
        let names = || vec!["a".to_string(), "b".to_string()];
        assert!(Graph::new(names(), vec![(0, 0, 1.0)], vec![0]).is_err());
        assert!(Graph::new(names(), vec![(0, 1, -1.0)], vec![0]).is_err());
        assert!(Graph::new(names(), vec![(0, 1, 1.0)], vec![0, 0]).is_err());
        assert!(Graph::new(names(), vec![(0, 1, 1.0)], vec![5]).is_err());
        assert!(Graph::new(vec!["a".into(), "a".into()], vec![], vec![]).is_err());
    }

    #[test]
    fn cut_values() {
        let g = generators::complete(4, None).unwrap();
        assert_eq!(g.cut_value(&[]), 0.0);
        assert_eq!(g.cut_value(&[0]), 3.0);
        assert_eq!(g.cut_value(&[0, 2]), 4.0);
        assert_eq!(g.cut_value(&[0, 1, 2, 3]), 0.0);
    }

    #[test]
    fn demand_vector_validation() {
        let g = generators::star(3).unwrap();
        let mut d = DemandVector::new();
        assert!(d.add(1, 1, 1.0).is_err());
        assert!(d.add(1, 2, -1.0).is_err());
        d.add(2, 1, 1.0).unwrap();
        assert_eq!(d.get(1, 2), 1.0);
        assert!(d.validate_terminals(&g).is_ok());
        d.add(0, 1, 1.0).unwrap();
        assert!(d.validate_terminals(&g).is_err());
    }
}
