//! Randomized hierarchical ball carving over terminal centers, cleanup into
//! a (0-extension, terminal tree) pair, and 0-decompositions.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::contraction::{apply_zero_extension, ZeroExtension};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::metric::Metric;

/// Generator for trial `trial` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// One partition of `V`; `cluster_of[v]` is a dense cluster id.
#[derive(Debug, Clone, PartialEq)]
pub struct Level {
    pub index: i32,
    /// Carving radius in rescaled units (`2^(index-1) beta`); zero at the top.
    pub radius: f64,
    pub cluster_of: Vec<usize>,
    pub clusters: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LaminarDecomposition {
    pub names: Vec<String>,
    /// Terminal node indices, in the caller's order.
    pub terminals: Vec<usize>,
    /// Terminal node indices in the random order used for carving.
    pub permutation: Vec<usize>,
    pub beta: f64,
    /// Factor applied to the metric so the smallest nonzero distance is 1.
    pub scale: f64,
    pub delta: i32,
    /// Top level (`{V}`) first.
    pub levels: Vec<Level>,
}

impl LaminarDecomposition {
    /// Checks that each level refines the one above it.
    pub fn is_laminar(&self) -> bool {
        self.levels.windows(2).all(|w| {
            let mut parent = vec![usize::MAX; w[1].clusters];
            (0..self.names.len()).all(|v| {
                let c = w[1].cluster_of[v];
                let p = w[0].cluster_of[v];
                if parent[c] == usize::MAX {
                    parent[c] = p;
                }
                parent[c] == p
            })
        })
    }
}

/// Carves `metric` around the terminals in random order, one level at a
/// time, until no cluster holds two terminals.
pub fn frt_decompose(
    metric: &Metric,
    terminals: &[usize],
    seed: u64,
) -> Result<LaminarDecomposition> {
    frt_decompose_with(metric, terminals, &mut trial_rng(seed, 0))
}

pub fn frt_decompose_with<R: Rng>(
    metric: &Metric,
    terminals: &[usize],
    rng: &mut R,
) -> Result<LaminarDecomposition> {
    let n = metric.len();
    if terminals.is_empty() {
        return Err(Error::input("decomposition needs at least one terminal"));
    }
    let mut is_terminal = vec![false; n];
    for &t in terminals {
        if t >= n || std::mem::replace(&mut is_terminal[t], true) {
            return Err(Error::input(format!("invalid or repeated terminal {t}")));
        }
    }
    if metric.has_infinite() {
        return Err(Error::input(
            "metric has infinite distances; the graph must be connected",
        ));
    }
    for (i, &a) in terminals.iter().enumerate() {
        for &b in &terminals[i + 1..] {
            if metric.get(a, b) <= 0.0 {
                return Err(Error::input(format!(
                    "terminals `{}` and `{}` are at distance 0",
                    metric.names()[a],
                    metric.names()[b]
                )));
            }
        }
    }
    let mut min_nonzero = f64::INFINITY;
    for a in 0..n {
        for b in a + 1..n {
            let d = metric.get(a, b);
            if d > 0.0 {
                min_nonzero = min_nonzero.min(d);
            }
        }
    }
    let scale = if min_nonzero.is_finite() {
        1.0 / min_nonzero
    } else {
        1.0
    };
    let diameter = metric.diameter() * scale;
    let delta = if diameter <= 1.0 {
        0
    } else {
        diameter.log2().ceil() as i32
    };

    let beta: f64 = rng.gen_range(1.0..2.0);
    let mut permutation = terminals.to_vec();
    permutation.shuffle(rng);

    let mut levels = vec![Level {
        index: delta,
        radius: 0.0,
        cluster_of: vec![0; n],
        clusters: 1,
    }];
    let crowded = |level: &Level| {
        let mut count = vec![0usize; level.clusters];
        terminals.iter().any(|&t| {
            count[level.cluster_of[t]] += 1;
            count[level.cluster_of[t]] > 1
        })
    };
    while crowded(levels.last().unwrap()) {
        let above = levels.last().unwrap();
        let i = above.index - 1;
        let radius = 2f64.powi(i - 1) * beta;
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); above.clusters];
        for v in 0..n {
            members[above.cluster_of[v]].push(v);
        }
        let mut cluster_of = vec![usize::MAX; n];
        let mut next = 0;
        for &center in &permutation {
            for s in &members {
                let mut created = false;
                for &v in s {
                    if cluster_of[v] == usize::MAX && metric.get(v, center) * scale < radius {
                        cluster_of[v] = next;
                        created = true;
                    }
                }
                if created {
                    next += 1;
                }
            }
        }
        // Steiner vertices no center reached stay together within their parent.
        for s in &members {
            let mut created = false;
            for &v in s {
                if cluster_of[v] == usize::MAX {
                    cluster_of[v] = next;
                    created = true;
                }
            }
            if created {
                next += 1;
            }
        }
        levels.push(Level {
            index: i,
            radius,
            cluster_of,
            clusters: next,
        });
    }
    Ok(LaminarDecomposition {
        names: metric.names().to_vec(),
        terminals: terminals.to_vec(),
        permutation,
        beta,
        scale,
        delta,
        levels,
    })
}

/// A tree whose nodes are terminal positions `0..k`.
#[derive(Debug, Clone, PartialEq)]
pub struct TerminalTree {
    pub k: usize,
    /// `parent[a]` with the root's parent `None`.
    pub parent: Vec<Option<usize>>,
    /// Length of the edge from `a` to its parent (zero at the root).
    pub parent_length: Vec<f64>,
}

impl TerminalTree {
    /// Builds a tree from undirected edges, rooted at `root`.
    pub fn from_edges(k: usize, edges: &[(usize, usize, f64)], root: usize) -> Result<Self> {
        if k == 0 || root >= k {
            return Err(Error::input("tree root out of range"));
        }
        if edges.len() + 1 != k {
            return Err(Error::input(format!(
                "a tree on {k} terminals needs {} edges, got {}",
                k - 1,
                edges.len()
            )));
        }
        let mut adj = vec![Vec::new(); k];
        for &(a, b, l) in edges {
            if a >= k || b >= k || a == b || !l.is_finite() || l < 0.0 {
                return Err(Error::input(format!("invalid tree edge ({a}, {b}, {l})")));
            }
            adj[a].push((b, l));
            adj[b].push((a, l));
        }
        let mut parent = vec![None; k];
        let mut parent_length = vec![0.0; k];
        let mut seen = vec![false; k];
        seen[root] = true;
        let mut stack = vec![root];
        while let Some(x) = stack.pop() {
            for &(y, l) in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    parent[y] = Some(x);
                    parent_length[y] = l;
                    stack.push(y);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::input("tree edges do not span the terminals"));
        }
        Ok(TerminalTree {
            k,
            parent,
            parent_length,
        })
    }

    pub fn root(&self) -> usize {
        self.parent.iter().position(|p| p.is_none()).unwrap()
    }

    /// Edges as `(child, parent, length)`, ordered by child.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        (0..self.k)
            .filter_map(|a| self.parent[a].map(|p| (a, p, self.parent_length[a])))
            .collect()
    }

    fn depth(&self, mut a: usize) -> usize {
        let mut d = 0;
        while let Some(p) = self.parent[a] {
            a = p;
            d += 1;
        }
        d
    }

    /// Tree edges (identified by their child endpoint) on the path `a -> b`.
    pub fn path(&self, mut a: usize, mut b: usize) -> Vec<usize> {
        let (mut da, mut db) = (self.depth(a), self.depth(b));
        let mut up = Vec::new();
        let mut down = Vec::new();
        while da > db {
            up.push(a);
            a = self.parent[a].unwrap();
            da -= 1;
        }
        while db > da {
            down.push(b);
            b = self.parent[b].unwrap();
            db -= 1;
        }
        while a != b {
            up.push(a);
            down.push(b);
            a = self.parent[a].unwrap();
            b = self.parent[b].unwrap();
        }
        down.reverse();
        up.extend(down);
        up
    }

    pub fn distance(&self, a: usize, b: usize) -> f64 {
        self.path(a, b).iter().map(|&c| self.parent_length[c]).sum()
    }

    /// Membership mask of the subtree below the edge whose child is `c`.
    pub fn below(&self, c: usize) -> Vec<bool> {
        (0..self.k)
            .map(|mut a| loop {
                if a == c {
                    break true;
                }
                match self.parent[a] {
                    Some(p) => a = p,
                    None => break false,
                }
            })
            .collect()
    }

    pub fn metric(&self, names: Vec<String>) -> Metric {
        Metric::from_fn(names, |a, b| self.distance(a, b))
    }
}

/// A 0-extension together with a terminal tree.
#[derive(Debug, Clone, PartialEq)]
pub struct Skeleton {
    /// Terminal position assigned to each node.
    pub f: Vec<usize>,
    pub tree: TerminalTree,
}

/// Collapses terminal-free parts of the hierarchy and contracts it to a
/// tree on the terminals.
///
/// Each node goes to a terminal of the deepest cluster containing it that
/// holds any terminal; among several, the one whose leaf is closest in the
/// hierarchy, ties by terminal position. Every hierarchy node is labelled by
/// the earliest terminal (in carving order) below it; contracting label
/// classes gives the terminal tree, whose edge lengths are hierarchy
/// distances so that the tree metric dominates the input on terminals.
pub fn cleanup_to_tree(dec: &LaminarDecomposition) -> Result<Skeleton> {
    let n = dec.names.len();
    let k = dec.terminals.len();
    let depth = dec.levels.len();
    let mut pos = vec![usize::MAX; n];
    for (p, &t) in dec.terminals.iter().enumerate() {
        pos[t] = p;
    }
    let mut rank = vec![usize::MAX; k];
    for (r, &t) in dec.permutation.iter().enumerate() {
        rank[pos[t]] = r;
    }
    // Terminals per cluster, per level.
    let mut holds: Vec<Vec<Vec<usize>>> = dec
        .levels
        .iter()
        .map(|l| vec![Vec::new(); l.clusters])
        .collect();
    for (lvl, level) in dec.levels.iter().enumerate() {
        for (p, &t) in dec.terminals.iter().enumerate() {
            holds[lvl][level.cluster_of[t]].push(p);
        }
    }
    // The edge from a level-i cluster to its parent has length beta 2^i:
    // two terminals first split at level j shared a ball of radius
    // beta 2^j, and the path between them has length at least beta 2^(j+1).
    let edge_len: Vec<f64> = dec
        .levels
        .iter()
        .map(|l| dec.beta * 2f64.powi(l.index) / dec.scale)
        .collect();
    // Hierarchy distance between two terminals.
    let hier = |a: usize, b: usize| -> f64 {
        let (ta, tb) = (dec.terminals[a], dec.terminals[b]);
        let mut total = 0.0;
        for lvl in (1..depth).rev() {
            if dec.levels[lvl].cluster_of[ta] == dec.levels[lvl].cluster_of[tb] {
                break;
            }
            total += 2.0 * edge_len[lvl];
        }
        total
    };

    let mut f = vec![0usize; n];
    for v in 0..n {
        if pos[v] != usize::MAX {
            f[v] = pos[v];
            continue;
        }
        let lvl = (0..depth)
            .rev()
            .find(|&l| !holds[l][dec.levels[l].cluster_of[v]].is_empty())
            .expect("the top cluster holds every terminal");
        let c = dec.levels[lvl].cluster_of[v];
        // Distance from v's own leaf up to this cluster and down to a
        // terminal leaf is the same for every candidate, since all leaves
        // sit at the bottom level; the id tie-break decides.
        f[v] = *holds[lvl][c].iter().min().unwrap();
    }

    let label = |lvl: usize, c: usize| -> usize {
        *holds[lvl][c].iter().min_by_key(|&&p| rank[p]).unwrap()
    };
    let mut edges = Vec::new();
    for lvl in 1..depth {
        let mut done = vec![false; dec.levels[lvl].clusters];
        for v in 0..n {
            let c = dec.levels[lvl].cluster_of[v];
            if done[c] || holds[lvl][c].is_empty() {
                continue;
            }
            done[c] = true;
            let up = dec.levels[lvl - 1].cluster_of[v];
            let (a, b) = (label(lvl, c), label(lvl - 1, up));
            if a != b {
                edges.push((a, b, hier(a, b)));
            }
        }
    }
    let root = label(0, 0);
    let tree = TerminalTree::from_edges(k, &edges, root)?;
    Ok(Skeleton { f, tree })
}

/// `G_{f,T}` with weights on the tree edges (indexed by child terminal).
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroDecomposition {
    pub f: ZeroExtension,
    pub tree: TerminalTree,
    /// `weights[c]`: capacity of the tree edge from `c` to its parent; zero
    /// at the root.
    pub weights: Vec<f64>,
}

impl ZeroDecomposition {
    /// Tree edges `(child, parent, weight)`.
    pub fn weighted_edges(&self) -> Vec<(usize, usize, f64)> {
        self.tree
            .edges()
            .into_iter()
            .map(|(c, p, _)| (c, p, self.weights[c]))
            .collect()
    }

    /// `sum_e c_{f,T}(e) Delta_T(e)`.
    pub fn tree_cost(&self) -> f64 {
        (0..self.tree.k)
            .map(|c| self.weights[c] * self.tree.parent_length[c])
            .sum()
    }
}

/// Tree-edge weights: each contracted edge `(a, b)` of `G_f` adds its
/// capacity to every tree edge on the `a`-`b` path.
pub fn zero_decomposition(
    g: &Graph,
    f: &ZeroExtension,
    tree: &TerminalTree,
) -> Result<ZeroDecomposition> {
    if tree.k != g.k() {
        return Err(Error::input("tree does not span the terminals"));
    }
    let gf = apply_zero_extension(g, f)?;
    let mut weights = vec![0.0; tree.k];
    for ((a, b), w) in gf.iter() {
        for c in tree.path(a, b) {
            weights[c] += w;
        }
    }
    Ok(ZeroDecomposition {
        f: f.clone(),
        tree: tree.clone(),
        weights,
    })
}

/// `sum c_f(a, b) Delta_T(a, b)`: cost of `G_f` against the tree metric.
pub fn contracted_tree_cost(g: &Graph, f: &ZeroExtension, tree: &TerminalTree) -> Result<f64> {
    Ok(apply_zero_extension(g, f)?
        .iter()
        .map(|((a, b), w)| w * tree.distance(a, b))
        .sum())
}

#[derive(Debug, Clone, PartialEq)]
pub struct StretchStats {
    pub trials: usize,
    /// `((a, b), mean Delta_T / Delta)` over terminal positions `a < b`.
    pub mean_stretch: Vec<((usize, usize), f64)>,
    pub max_mean_stretch: f64,
    pub dominance_violations: usize,
}

/// Empirical stretch of the terminal tree metric over `trials` seeds.
pub fn stretch_report(
    metric: &Metric,
    terminals: &[usize],
    trials: usize,
    seed: u64,
) -> Result<StretchStats> {
    if trials == 0 {
        return Err(Error::input("trials must be at least 1"));
    }
    let k = terminals.len();
    let pairs: Vec<(usize, usize)> = (0..k)
        .flat_map(|a| (a + 1..k).map(move |b| (a, b)))
        .collect();
    let per_trial: Vec<(Vec<f64>, usize)> = (0..trials as u64)
        .into_par_iter()
        .map(|trial| -> Result<(Vec<f64>, usize)> {
            let dec = frt_decompose_with(metric, terminals, &mut trial_rng(seed, trial))?;
            let skel = cleanup_to_tree(&dec)?;
            let mut violations = 0;
            let ratios = pairs
                .iter()
                .map(|&(a, b)| {
                    let d = metric.get(terminals[a], terminals[b]);
                    let t = skel.tree.distance(a, b);
                    if t < d * (1.0 - 1e-12) {
                        violations += 1;
                    }
                    t / d
                })
                .collect();
            Ok((ratios, violations))
        })
        .collect::<Result<_>>()?;
    let mut sums = vec![0.0; pairs.len()];
    let mut dominance_violations = 0;
    for (ratios, v) in &per_trial {
        dominance_violations += v;
        for (s, r) in sums.iter_mut().zip(ratios) {
            *s += r;
        }
    }
    let mean_stretch: Vec<((usize, usize), f64)> = pairs
        .into_iter()
        .zip(sums)
        .map(|(p, s)| (p, s / trials as f64))
        .collect();
    let max_mean_stretch = mean_stretch.iter().map(|m| m.1).fold(0.0, f64::max);
    Ok(StretchStats {
        trials,
        mean_stretch,
        max_mean_stretch,
        dominance_violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generators;
    use crate::metric::shortest_path_metric;

    fn uniform(k: usize) -> Metric {
        Metric::from_fn((0..k).map(|i| format!("t{i}")).collect(), |_, _| 1.0)
    }

    #[test]
    fn two_terminals() {
        let m = uniform(2);
        let dec = frt_decompose(&m, &[0, 1], 3).unwrap();
        assert_eq!(dec.levels.len(), 2);
        assert_eq!(dec.levels[1].clusters, 2);
        let skel = cleanup_to_tree(&dec).unwrap();
        assert_eq!(skel.f, vec![0, 1]);
        let s = stretch_report(&m, &[0, 1], 50, 1).unwrap();
        assert!(s.max_mean_stretch >= 1.0 && s.max_mean_stretch <= 4.0);
        assert_eq!(s.dominance_violations, 0);
    }

    #[test]
    fn uniform_splits_to_singletons() {
        let m = uniform(4);
        let dec = frt_decompose(&m, &[0, 1, 2, 3], 9).unwrap();
        let last = dec.levels.last().unwrap();
        assert_eq!(last.clusters, 4);
        assert!(last.radius < 1.0);
        assert!(dec.is_laminar());
    }

    #[test]
    fn deterministic_per_seed() {
        let g = generators::path(8, &[0, 3, 7]).unwrap();
        let m = shortest_path_metric(&g, &[1.0; 7]).unwrap();
        let a = frt_decompose(&m, g.terminals(), 42).unwrap();
        let b = frt_decompose(&m, g.terminals(), 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(cleanup_to_tree(&a).unwrap(), cleanup_to_tree(&b).unwrap());
    }

    #[test]
    fn steiner_node_joins_nearby_terminal() {
        // a - v - b with v much closer to a.
        let g = Graph::from_named(
            &["a", "v", "b"],
            &[("a", "v", 1.0), ("v", "b", 1.0)],
            &["a", "b"],
        )
        .unwrap();
        let m = shortest_path_metric(&g, &[1.0, 7.0]).unwrap();
        for seed in 0..20 {
            let dec = frt_decompose(&m, g.terminals(), seed).unwrap();
            let skel = cleanup_to_tree(&dec).unwrap();
            assert_eq!(skel.f[1], 0, "seed {seed}");
        }
    }

    #[test]
    fn zero_decomposition_triangle() {
        let g = generators::complete(3, None).unwrap();
        let f = ZeroExtension::new(&g, vec![0, 1, 2]).unwrap();
        let t = TerminalTree::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0)], 0).unwrap();
        let zd = zero_decomposition(&g, &f, &t).unwrap();
        assert_eq!(zd.weights[1], 2.0);
        assert_eq!(zd.weights[2], 2.0);
        assert!((zd.tree_cost() - contracted_tree_cost(&g, &f, &t).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        let m = Metric::zero(vec!["a".into(), "b".into()]);
        assert!(frt_decompose(&m, &[0, 1], 0).is_err());
        assert!(TerminalTree::from_edges(3, &[(0, 1, 1.0), (0, 1, 1.0)], 0).is_err());
    }
}
