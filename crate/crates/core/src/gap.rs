//! Graph packing problems and their rounding through packed 0-decompositions:
//! solve the integral dual exactly on a sampled tree, pull it back to `G`
//! along the 0-extension, and compare against the fractional optimum.

use rand::Rng;
use rayon::prelude::*;

use crate::contraction::ZeroExtension;
use crate::error::{Error, Result};
use crate::flow::max_flow_min_cut;
use crate::flows::{max_concurrent_flow, max_multiflow};
use crate::frt::{trial_rng, ZeroDecomposition};
use crate::graph::{DemandVector, Graph};
use crate::packing::DecompositionDistribution;

/// Largest tree handled by the exact enumerations below.
pub const MAX_TREE_EDGES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    SparsestCut,
    Multicut,
}

/// A packing problem over terminal pairs, stored by terminal position so it
/// applies unchanged to `G` and to any graph on `K`.
#[derive(Debug, Clone, PartialEq)]
pub enum PackingProblem {
    /// Concurrent flow; the integral dual is generalized sparsest cut.
    SparsestCut(Vec<((usize, usize), f64)>),
    /// Multiflow; the integral dual is multicut.
    Multicut(Vec<(usize, usize)>),
}

fn positions(g: &Graph, a: usize, b: usize) -> Result<(usize, usize)> {
    match (g.terminal_position(a), g.terminal_position(b)) {
        (Some(x), Some(y)) if x != y => Ok((x.min(y), x.max(y))),
        (Some(_), Some(_)) => Err(Error::input(format!("pair ({a}, {b}) has equal endpoints"))),
        _ => Err(Error::input(format!(
            "pair (`{}`, `{}`) is not between terminals",
            g.name(a),
            g.name(b)
        ))),
    }
}

impl PackingProblem {
    /// Sparsest cut for a demand between terminal nodes of `g`.
    pub fn sparsest_cut(g: &Graph, dem: &DemandVector) -> Result<Self> {
        let mut out = Vec::new();
        for ((a, b), x) in dem.iter() {
            if x > 0.0 {
                out.push((positions(g, a, b)?, x));
            }
        }
        if out.is_empty() {
            return Err(Error::input("sparsest cut needs a positive demand"));
        }
        Ok(PackingProblem::SparsestCut(out))
    }

    /// Multicut for pairs of terminal nodes of `g`.
    pub fn multicut(g: &Graph, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut out = pairs
            .iter()
            .map(|&(a, b)| positions(g, a, b))
            .collect::<Result<Vec<_>>>()?;
        out.sort_unstable();
        out.dedup();
        if out.is_empty() {
            return Err(Error::input("multicut needs at least one pair"));
        }
        Ok(PackingProblem::Multicut(out))
    }

    pub fn kind(&self) -> ProblemKind {
        match self {
            PackingProblem::SparsestCut(_) => ProblemKind::SparsestCut,
            PackingProblem::Multicut(_) => ProblemKind::Multicut,
        }
    }

    /// Terminal positions appearing in some pair.
    pub fn endpoints(&self) -> Vec<usize> {
        let mut v: Vec<usize> = match self {
            PackingProblem::SparsestCut(d) => d.iter().flat_map(|&((a, b), _)| [a, b]).collect(),
            PackingProblem::Multicut(p) => p.iter().flat_map(|&(a, b)| [a, b]).collect(),
        };
        v.sort_unstable();
        v.dedup();
        v
    }

    /// The denominator functional on a terminal semimetric `delta`:
    /// separated demand for sparsest cut, the least pair distance for
    /// multicut. Both are nondecreasing in every distance.
    pub fn denominator(&self, delta: impl Fn(usize, usize) -> f64) -> f64 {
        match self {
            PackingProblem::SparsestCut(d) => d.iter().map(|&((a, b), x)| x * delta(a, b)).sum(),
            PackingProblem::Multicut(p) => p
                .iter()
                .map(|&(a, b)| delta(a, b))
                .fold(f64::INFINITY, f64::min),
        }
    }

    fn check(&self, k: usize) -> Result<()> {
        if self.endpoints().last().is_some_and(|&x| x >= k) {
            return Err(Error::input(
                "problem references a terminal position out of range",
            ));
        }
        Ok(())
    }
}

/// The fractional optimum: `lambda*` for sparsest cut, the maximum multiflow
/// value for multicut.
pub fn fractional_opt(p: &PackingProblem, g: &Graph) -> Result<f64> {
    p.check(g.k())?;
    let t = g.terminals();
    match p {
        PackingProblem::SparsestCut(d) => {
            let mut dem = DemandVector::new();
            for &((a, b), x) in d {
                dem.add(t[a], t[b], x)?;
            }
            Ok(max_concurrent_flow(g, &dem)?.lambda_star)
        }
        PackingProblem::Multicut(pairs) => {
            let nodes: Vec<(usize, usize)> = pairs.iter().map(|&(a, b)| (t[a], t[b])).collect();
            max_multiflow(g, &nodes)
        }
    }
}

/// An integral dual: a partition metric `delta(u, v) = [label(u) != label(v)]`
/// over the nodes it was solved on (two labels for a cut metric).
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralDual {
    pub kind: ProblemKind,
    pub labels: Vec<usize>,
    pub value: f64,
}

impl IntegralDual {
    pub fn delta(&self, u: usize, v: usize) -> f64 {
        if self.labels[u] == self.labels[v] {
            0.0
        } else {
            1.0
        }
    }

    /// Whether the metric is in the admissible class for its kind.
    pub fn is_admissible(&self) -> bool {
        match self.kind {
            ProblemKind::SparsestCut => {
                self.labels.iter().all(|&l| l < 2)
                    && self.labels.contains(&0)
                    && self.labels.contains(&1)
            }
            ProblemKind::Multicut => true,
        }
    }
}

/// Value of a partition metric on `g`: `sum c(u,v) delta(u,v)` divided by
/// the denominator on the terminals. Infinite when nothing is separated.
pub fn dual_value(p: &PackingProblem, g: &Graph, labels: &[usize]) -> Result<f64> {
    if labels.len() != g.node_count() {
        return Err(Error::input("labels do not cover the graph"));
    }
    p.check(g.k())?;
    let cost: f64 = g
        .edges()
        .iter()
        .filter(|e| labels[e.u] != labels[e.v])
        .map(|e| e.cap)
        .sum();
    let t = g.terminals();
    let denom = p.denominator(|a, b| {
        if labels[t[a]] == labels[t[b]] {
            0.0
        } else {
            1.0
        }
    });
    Ok(if denom > 0.0 {
        cost / denom
    } else {
        f64::INFINITY
    })
}

fn tree_graph(zd: &ZeroDecomposition, names: &[String]) -> Result<Graph> {
    let edges: Vec<(usize, usize, f64)> = zd.weighted_edges();
    let k = zd.tree.k;
    Graph::new(names.to_vec(), edges, (0..k).collect())
}

/// Components of the tree after deleting the edges (by child) in `removed`.
fn tree_components(zd: &ZeroDecomposition, removed: u64) -> Vec<usize> {
    let k = zd.tree.k;
    let mut label = vec![usize::MAX; k];
    let root = zd.tree.root();
    // Parents precede children once nodes are sorted by depth.
    let mut order: Vec<usize> = (0..k).collect();
    let depth = |mut a: usize| {
        let mut d = 0;
        while let Some(p) = zd.tree.parent[a] {
            a = p;
            d += 1;
        }
        d
    };
    order.sort_by_key(|&a| (depth(a), a));
    let mut next = 0;
    for a in order {
        if a == root || removed >> a & 1 == 1 {
            label[a] = next;
            next += 1;
        } else {
            label[a] = label[zd.tree.parent[a].unwrap()];
        }
    }
    relabel(&label)
}

/// Renumbers labels by first appearance.
fn relabel(labels: &[usize]) -> Vec<usize> {
    let mut map = std::collections::BTreeMap::new();
    labels
        .iter()
        .map(|&l| {
            let n = map.len();
            *map.entry(l).or_insert(n)
        })
        .collect()
}

/// Exact integral dual on the tree `G_{f,T}`.
///
/// Sparsest cut uses `min_e c(e) / D(e)` over tree edges; multicut
/// enumerates all subsets of tree edges.
pub fn tree_integral_dual(p: &PackingProblem, zd: &ZeroDecomposition) -> Result<IntegralDual> {
    let k = zd.tree.k;
    p.check(k)?;
    let tree_edges: Vec<usize> = (0..k).filter(|&c| zd.tree.parent[c].is_some()).collect();
    if tree_edges.len() > MAX_TREE_EDGES {
        return Err(Error::size(format!(
            "exact tree duals need at most {MAX_TREE_EDGES} tree edges, got {}",
            tree_edges.len()
        )));
    }
    match p {
        PackingProblem::SparsestCut(_) => {
            let mut best: Option<(f64, usize)> = None;
            for &c in &tree_edges {
                let below = zd.tree.below(c);
                let sep = p.denominator(|a, b| if below[a] != below[b] { 1.0 } else { 0.0 });
                if sep <= 0.0 {
                    continue;
                }
                let r = zd.weights[c] / sep;
                if best.is_none_or(|(v, _)| r < v) {
                    best = Some((r, c));
                }
            }
            let (value, c) =
                best.ok_or_else(|| Error::input("no tree edge separates any demand"))?;
            let labels = zd.tree.below(c).iter().map(|&b| b as usize).collect();
            Ok(IntegralDual {
                kind: ProblemKind::SparsestCut,
                labels,
                value,
            })
        }
        PackingProblem::Multicut(_) => {
            let mut best: Option<(f64, u64)> = None;
            for subset in 0..(1u64 << tree_edges.len()) {
                let removed = tree_edges
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| subset >> i & 1 == 1)
                    .fold(0u64, |m, (_, &c)| m | 1 << c);
                let cost: f64 = (0..k)
                    .filter(|&c| removed >> c & 1 == 1)
                    .map(|c| zd.weights[c])
                    .sum();
                if best.is_some_and(|(v, _)| cost >= v) {
                    continue;
                }
                let comp = tree_components(zd, removed);
                if p.denominator(|a, b| if comp[a] != comp[b] { 1.0 } else { 0.0 }) >= 1.0 {
                    best = Some((cost, removed));
                }
            }
            let (value, removed) =
                best.ok_or_else(|| Error::internal("cutting every tree edge is a multicut"))?;
            Ok(IntegralDual {
                kind: ProblemKind::Multicut,
                labels: tree_components(zd, removed),
                value,
            })
        }
    }
}

/// Brute-force tree sparsest cut over all terminal bipartitions.
pub fn tree_sparsest_cut_bruteforce(p: &PackingProblem, zd: &ZeroDecomposition) -> Result<f64> {
    let k = zd.tree.k;
    if k > 24 {
        return Err(Error::size(format!(
            "bipartition enumeration needs k <= 24, got {k}"
        )));
    }
    let mut best = f64::INFINITY;
    for bits in 1..(1u64 << (k - 1)) {
        let side = |a: usize| bits >> a & 1 == 1;
        let cost: f64 = zd
            .weighted_edges()
            .iter()
            .filter(|&&(c, q, _)| side(c) != side(q))
            .map(|e| e.2)
            .sum();
        let sep = p.denominator(|a, b| if side(a) != side(b) { 1.0 } else { 0.0 });
        if sep > 0.0 {
            best = best.min(cost / sep);
        }
    }
    Ok(best)
}

/// Pulls a dual on `K` back to `G`: `delta'(u, v) = delta(f(u), f(v))`.
/// The value is recomputed on `G`.
pub fn map_back(
    p: &PackingProblem,
    g: &Graph,
    dual: &IntegralDual,
    f: &ZeroExtension,
) -> Result<IntegralDual> {
    if dual.labels.len() != g.k() {
        return Err(Error::input("dual is not on the terminals of the graph"));
    }
    let labels: Vec<usize> = f.as_slice().iter().map(|&a| dual.labels[a]).collect();
    let value = dual_value(p, g, &labels)?;
    Ok(IntegralDual {
        kind: dual.kind,
        labels,
        value,
    })
}

/// Source side (as a node mask) of a minimum cut separating `from` from `to`.
fn min_cut_side(g: &Graph, from: &[usize], to: &[usize]) -> Result<Vec<bool>> {
    let cut = max_flow_min_cut(g, from, to)?;
    let mut side = vec![false; g.node_count()];
    for v in cut.witness {
        side[v] = true;
    }
    Ok(side)
}

/// Cheapest dual among monotone improvements of `dual` that keep its
/// separation of the problem's terminals: replace each label class by a
/// minimum cut between the demand endpoints it contains and the rest.
pub fn tighten(p: &PackingProblem, g: &Graph, dual: &IntegralDual) -> Result<IntegralDual> {
    let t = g.terminals();
    let ends = p.endpoints();
    let classes: Vec<usize> = {
        let mut c: Vec<usize> = ends.iter().map(|&a| dual.labels[t[a]]).collect();
        c.sort_unstable();
        c.dedup();
        c
    };
    let mut best = dual.clone();
    let split = |class: usize| -> (Vec<usize>, Vec<usize>) {
        let (inside, outside): (Vec<usize>, Vec<usize>) = ends
            .iter()
            .map(|&a| t[a])
            .partition(|&v| dual.labels[v] == class);
        (inside, outside)
    };
    let mut consider = |labels: Vec<usize>| -> Result<()> {
        let value = dual_value(p, g, &labels)?;
        if value < best.value - 1e-12 * best.value.abs() {
            best = IntegralDual {
                kind: dual.kind,
                labels: relabel(&labels),
                value,
            };
        }
        Ok(())
    };
    let mut sides = Vec::new();
    for &class in &classes {
        let (inside, outside) = split(class);
        if inside.is_empty() || outside.is_empty() {
            continue;
        }
        let side = min_cut_side(g, &inside, &outside)?;
        consider(side.iter().map(|&s| s as usize).collect())?;
        sides.push(side);
    }
    if p.kind() == ProblemKind::Multicut && sides.len() > 1 {
        // Components of G minus the union of the class cuts.
        let keep: Vec<(usize, usize)> = g
            .edges()
            .iter()
            .filter(|e| sides.iter().all(|s| s[e.u] == s[e.v]))
            .map(|e| (e.u, e.v))
            .collect();
        let labels = components(g.node_count(), &keep);
        consider(labels)?;
    }
    Ok(best)
}

fn components(n: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for &(u, v) in edges {
        let (a, b) = (find(&mut parent, u), find(&mut parent, v));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let roots: Vec<usize> = (0..n).map(|x| find(&mut parent, x)).collect();
    relabel(&roots)
}

/// One sampled tree's contribution.
#[derive(Debug, Clone, PartialEq)]
pub struct GapSample {
    pub entry: usize,
    pub tree_value: f64,
    pub mapped_value: f64,
    pub tightened_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapStats {
    pub kind: ProblemKind,
    pub fractional_opt: f64,
    pub samples: Vec<GapSample>,
    /// Best mapped-back dual value over samples, after tightening.
    pub best_value: f64,
    /// Best mapped-back dual value over samples, as pulled back.
    pub best_mapped_value: f64,
    /// `best_value / fractional_opt`.
    pub gap: f64,
    /// `best_mapped_value / fractional_opt`.
    pub mapped_gap: f64,
    /// Mean tree dual value over `fractional_opt`.
    pub tree_expectation_ratio: f64,
    /// Every mapped-back dual was admissible with value at least the
    /// fractional optimum (weak duality).
    pub all_feasible: bool,
}

/// Samples trees from `dist`, solves each tree dual exactly, maps it back
/// to `G`, and compares against the fractional optimum.
pub fn gap_report(
    p: &PackingProblem,
    g: &Graph,
    dist: &DecompositionDistribution,
    samples: usize,
    seed: u64,
) -> Result<GapStats> {
    if samples == 0 {
        return Err(Error::input("gap report needs at least one sample"));
    }
    if dist.entries.is_empty() {
        return Err(Error::input("empty decomposition distribution"));
    }
    let opt = fractional_opt(p, g)?;
    if !opt.is_finite() || opt <= 0.0 {
        return Err(Error::input(format!(
            "gap undefined: fractional optimum is {opt}"
        )));
    }
    let cumulative: Vec<f64> = dist
        .entries
        .iter()
        .scan(0.0, |s, e| {
            *s += e.probability;
            Some(*s)
        })
        .collect();
    let picks: Vec<usize> = (0..samples)
        .map(|i| {
            let x: f64 = trial_rng(seed, i as u64).gen::<f64>() * cumulative.last().unwrap();
            cumulative
                .partition_point(|&c| c <= x)
                .min(dist.entries.len() - 1)
        })
        .collect();
    let results: Vec<Result<(GapSample, bool)>> = picks
        .par_iter()
        .map(|&entry| {
            let zd = &dist.entries[entry].decomposition;
            let tree = tree_integral_dual(p, zd)?;
            let mapped = map_back(p, g, &tree, &zd.f)?;
            let tight = tighten(p, g, &mapped)?;
            let feasible =
                mapped.is_admissible() && mapped.value >= opt - 1e-6 && tight.value >= opt - 1e-6;
            Ok((
                GapSample {
                    entry,
                    tree_value: tree.value,
                    mapped_value: mapped.value,
                    tightened_value: tight.value,
                },
                feasible,
            ))
        })
        .collect();
    let mut out = Vec::with_capacity(samples);
    let mut all_feasible = true;
    for r in results {
        let (s, ok) = r?;
        all_feasible &= ok;
        out.push(s);
    }
    let best_value = out
        .iter()
        .map(|s| s.tightened_value)
        .fold(f64::INFINITY, f64::min);
    let best_mapped_value = out
        .iter()
        .map(|s| s.mapped_value)
        .fold(f64::INFINITY, f64::min);
    let mean_tree = out.iter().map(|s| s.tree_value).sum::<f64>() / out.len() as f64;
    Ok(GapStats {
        kind: p.kind(),
        fractional_opt: opt,
        samples: out,
        best_value,
        best_mapped_value,
        gap: best_value / opt,
        mapped_gap: best_mapped_value / opt,
        tree_expectation_ratio: mean_tree / opt,
        all_feasible,
    })
}

/// Tree duals evaluated as graphs on `K`; used to cross-check values.
pub fn tree_dual_value(
    p: &PackingProblem,
    zd: &ZeroDecomposition,
    dual: &IntegralDual,
) -> Result<f64> {
    let names: Vec<String> = (0..zd.tree.k).map(|a| format!("t{a}")).collect();
    let g = tree_graph(zd, &names)?;
    dual_value(p, &g, &dual.labels)
}
