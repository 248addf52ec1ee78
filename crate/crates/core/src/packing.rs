//! Packing 0-decompositions with multiplicative weights, and the oblivious
//! routing scheme induced by the packed distribution.

use std::collections::BTreeMap;

use rand::Rng;

use crate::contraction::ZeroExtension;
use crate::error::{Error, Result};
use crate::flows::max_concurrent_flow;
use crate::frt::{
    cleanup_to_tree, frt_decompose_with, trial_rng, zero_decomposition, ZeroDecomposition,
};
use crate::graph::{DemandVector, Graph};
use crate::metric::all_shortest_path_trees;
use crate::sparsifier::Sparsifier;

/// A path in `G` as `(edge index, +1 if traversed u -> v else -1)`.
pub type Route = Vec<(usize, i8)>;

#[derive(Debug, Clone, PartialEq)]
pub struct PackedEntry {
    pub decomposition: ZeroDecomposition,
    /// `routes[c]`: path in `G` from terminal `c` to its tree parent; empty
    /// at the root.
    pub routes: Vec<Route>,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionDistribution {
    pub entries: Vec<PackedEntry>,
    /// Measured `cong_G(vec H)` of the final mixture.
    pub congestion: f64,
    /// `cong_G(vec H)` after each iteration.
    pub history: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct PackingOptions {
    /// `None` means `32 ceil(ln m)`.
    pub iterations: Option<usize>,
    /// Stop once the relative change of `cong_G(vec H)` drops below this,
    /// tested only after `8 ceil(ln m)` rounds.
    pub epsilon: f64,
}

impl Default for PackingOptions {
    fn default() -> Self {
        PackingOptions {
            iterations: None,
            epsilon: 0.01,
        }
    }
}

fn route_from_edges(g: &Graph, start: usize, edges: &[usize]) -> Route {
    let mut at = start;
    edges
        .iter()
        .map(|&e| {
            let edge = &g.edges()[e];
            if edge.u == at {
                at = edge.v;
                (e, 1)
            } else {
                at = edge.u;
                (e, -1)
            }
        })
        .collect()
}

impl DecompositionDistribution {
    /// `H = sum gamma(f,T) G_{f,T}` as a sparsifier on the terminals.
    pub fn aggregate(&self, g: &Graph) -> Result<Sparsifier> {
        let mut h = Sparsifier::on_terminals(g);
        for entry in &self.entries {
            for (c, p, w) in entry.decomposition.weighted_edges() {
                if w > 0.0 {
                    h.add(c, p, entry.probability * w)?;
                }
            }
        }
        Ok(h)
    }

    /// Checks probabilities and that every route joins its tree edge's
    /// endpoints.
    pub fn validate(&self, g: &Graph) -> Result<()> {
        let total: f64 = self.entries.iter().map(|e| e.probability).sum();
        if (total - 1.0).abs() > 1e-9 || self.entries.iter().any(|e| e.probability < 0.0) {
            return Err(Error::input(format!("probabilities sum to {total}")));
        }
        let t = g.terminals();
        for entry in &self.entries {
            let tree = &entry.decomposition.tree;
            if tree.k != g.k() || entry.routes.len() != tree.k {
                return Err(Error::input("decomposition does not match the graph"));
            }
            for c in 0..tree.k {
                let Some(p) = tree.parent[c] else { continue };
                let mut at = t[c];
                for &(e, s) in &entry.routes[c] {
                    let edge = g
                        .edges()
                        .get(e)
                        .ok_or_else(|| Error::input("route uses an unknown edge"))?;
                    let (from, to) = if s > 0 {
                        (edge.u, edge.v)
                    } else {
                        (edge.v, edge.u)
                    };
                    if from != at {
                        return Err(Error::input("route is not a walk"));
                    }
                    at = to;
                }
                if at != t[p] {
                    return Err(Error::input("route does not reach the tree parent"));
                }
            }
        }
        Ok(())
    }

    /// Largest `load(e) / c(e)` when every tree edge of every decomposition
    /// ships its weight along its route.
    pub fn route_congestion(&self, g: &Graph) -> f64 {
        let mut load = vec![0.0; g.edges().len()];
        for entry in &self.entries {
            for (c, route) in entry.routes.iter().enumerate() {
                let w = entry.probability * entry.decomposition.weights[c];
                for &(e, _) in route {
                    load[e] += w;
                }
            }
        }
        load.iter()
            .zip(g.edges())
            .map(|(l, e)| l / e.cap)
            .fold(0.0, f64::max)
    }
}

/// Multiplicative-weights packing of 0-decompositions.
///
/// Each round sets edge lengths `exp(eta load(e) / c(e)) / c(e)`, carves
/// the resulting shortest-path metric, routes each tree edge along a
/// shortest path, and adds the decomposition to a uniform mixture.
pub fn pack_decompositions(
    g: &Graph,
    opts: PackingOptions,
    seed: u64,
) -> Result<DecompositionDistribution> {
    if !g.is_connected() {
        return Err(Error::input("packing needs a connected graph"));
    }
    if g.k() < 2 {
        return Err(Error::input("packing needs at least two terminals"));
    }
    let m = g.edges().len();
    let ln_m = (m as f64).ln();
    let rounds_unit = (ln_m.ceil() as usize).max(1);
    let iterations = opts.iterations.unwrap_or(32 * rounds_unit).max(1);
    // Early agreement between a few rounds says little; only test for
    // convergence after a quarter of the default budget.
    let min_rounds = (8 * rounds_unit).min(iterations);
    let eta = ln_m / iterations as f64;
    let t = g.terminals().to_vec();
    let mut load = vec![0.0; m];
    let mut raw: Vec<(ZeroDecomposition, Vec<Route>)> = Vec::new();
    let mut history: Vec<f64> = Vec::new();
    let mut h = Sparsifier::on_terminals(g);

    for round in 0..iterations {
        let lengths: Vec<f64> = g
            .edges()
            .iter()
            .zip(&load)
            .map(|(e, l)| (eta * l / e.cap).exp() / e.cap)
            .collect();
        let trees = all_shortest_path_trees(g, &lengths)?;
        let metric = crate::metric::shortest_path_metric(g, &lengths)?;
        let dec = frt_decompose_with(&metric, &t, &mut trial_rng(seed, round as u64))?;
        let skel = cleanup_to_tree(&dec)?;
        let f = ZeroExtension::new(g, skel.f)?;
        let zd = zero_decomposition(g, &f, &skel.tree)?;
        let mut routes = vec![Vec::new(); g.k()];
        for c in 0..g.k() {
            let Some(p) = zd.tree.parent[c] else { continue };
            let edges = trees[t[c]]
                .path_edges(g, t[p])
                .ok_or_else(|| Error::internal("tree edge endpoints are disconnected"))?;
            for &e in &edges {
                load[e] += zd.weights[c];
            }
            routes[c] = route_from_edges(g, t[c], &edges);
        }
        for (c, pnt, w) in zd.weighted_edges() {
            if w > 0.0 {
                h.add(c, pnt, w)?;
            }
        }
        raw.push((zd, routes));
        let mixture = h.scaled(1.0 / raw.len() as f64);
        let cong = max_concurrent_flow(g, &mixture.as_demand(g)?)?.congestion;
        let stable = round + 1 >= min_rounds
            && history
                .last()
                .is_some_and(|&prev| (cong - prev).abs() <= opts.epsilon * prev);
        history.push(cong);
        if stable {
            break;
        }
    }
    let prob = 1.0 / raw.len() as f64;
    let entries = raw
        .into_iter()
        .map(|(decomposition, routes)| PackedEntry {
            decomposition,
            routes,
            probability: prob,
        })
        .collect();
    Ok(DecompositionDistribution {
        entries,
        congestion: *history.last().unwrap(),
        history,
    })
}

/// `cong_G(vec H)` for the aggregate of `dist`.
pub fn congestion_of_distribution(g: &Graph, dist: &DecompositionDistribution) -> Result<f64> {
    Ok(max_concurrent_flow(g, &dist.aggregate(g)?.as_demand(g)?)?.congestion)
}

/// How tree edges are mapped into `G`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TemplateMode {
    /// Along the single shortest path stored with each decomposition.
    StoredRoutes,
    /// Through the optimal concurrent routing of the aggregate `H` in `G`,
    /// one unit flow per terminal pair of `H`.
    AggregateFlow,
}

/// One unit flow per terminal pair: `flows[&(a, b)][e]` is the signed flow
/// on edge `e` (positive `u -> v`) when sending one unit from terminal
/// position `a` to `b > a`.
#[derive(Debug, Clone, PartialEq)]
pub struct RoutingTemplates {
    pub flows: BTreeMap<(usize, usize), Vec<f64>>,
}

impl RoutingTemplates {
    /// Largest deviation from unit value and conservation over all pairs.
    pub fn conservation_residual(&self, g: &Graph) -> f64 {
        let t = g.terminals();
        let mut worst: f64 = 0.0;
        for (&(a, b), flow) in &self.flows {
            let mut net = vec![0.0; g.node_count()];
            for (e, f) in g.edges().iter().zip(flow) {
                net[e.u] -= f;
                net[e.v] += f;
            }
            net[t[a]] += 1.0;
            net[t[b]] -= 1.0;
            worst = net.iter().fold(worst, |w, x| w.max(x.abs()));
        }
        worst
    }

    /// Congestion of routing `dem` (between terminal nodes) obliviously.
    pub fn congestion(&self, g: &Graph, dem: &DemandVector) -> Result<f64> {
        let mut load = vec![0.0; g.edges().len()];
        for ((a, b), x) in dem.iter() {
            let (pa, pb) = match (g.terminal_position(a), g.terminal_position(b)) {
                (Some(pa), Some(pb)) => (pa.min(pb), pa.max(pb)),
                _ => {
                    return Err(Error::input(
                        "oblivious routing demands must be between terminals",
                    ))
                }
            };
            let flow = self
                .flows
                .get(&(pa, pb))
                .ok_or_else(|| Error::input(format!("no template for pair ({pa}, {pb})")))?;
            for (l, f) in load.iter_mut().zip(flow) {
                *l += x * f.abs();
            }
        }
        Ok(load
            .iter()
            .zip(g.edges())
            .map(|(l, e)| l / e.cap)
            .fold(0.0, f64::max))
    }
}

/// Oblivious routing templates: the gamma-average, over decompositions, of
/// the unit flow along the tree path between two terminals, with each tree
/// edge mapped into `G` according to `mode`.
pub fn oblivious_templates(
    g: &Graph,
    dist: &DecompositionDistribution,
    mode: TemplateMode,
) -> Result<RoutingTemplates> {
    dist.validate(g)?;
    let k = g.k();
    let m = g.edges().len();
    // Unit flow in G for each H pair {x, y}, oriented x -> y with x < y.
    let mut unit: BTreeMap<(usize, usize), Vec<f64>> = BTreeMap::new();
    if mode == TemplateMode::AggregateFlow {
        let h = dist.aggregate(g)?;
        let demand = h.as_demand(g)?;
        let res = max_concurrent_flow(g, &demand)?;
        let t = g.terminals();
        for ((a, b), flow) in res.pair_flows(g) {
            let (pa, pb) = (
                g.terminal_position(a).unwrap(),
                g.terminal_position(b).unwrap(),
            );
            let value = res.lambda_star * demand.get(a, b);
            // Pair flows are oriented from the smaller node index.
            let sign = if t[pa.min(pb)] == a { 1.0 } else { -1.0 };
            unit.insert(
                (pa.min(pb), pa.max(pb)),
                flow.iter().map(|f| sign * f / value).collect(),
            );
        }
    }
    let mut flows = BTreeMap::new();
    for a in 0..k {
        for b in a + 1..k {
            let mut total = vec![0.0; m];
            for entry in &dist.entries {
                let tree = &entry.decomposition.tree;
                let mut at = a;
                for c in tree.path(a, b) {
                    let p = tree.parent[c].unwrap();
                    // Direction along the tree edge: up (c -> p) or down.
                    let (from, to) = if at == c { (c, p) } else { (p, c) };
                    at = to;
                    match mode {
                        TemplateMode::StoredRoutes => {
                            let s = if from == c { 1.0 } else { -1.0 };
                            for &(e, dir) in &entry.routes[c] {
                                total[e] += entry.probability * s * dir as f64;
                            }
                        }
                        TemplateMode::AggregateFlow => {
                            let key = (from.min(to), from.max(to));
                            let s = if from == key.0 { 1.0 } else { -1.0 };
                            let f = unit.get(&key).ok_or_else(|| {
                                Error::internal("tree edge missing from aggregate routing")
                            })?;
                            for (x, y) in total.iter_mut().zip(f) {
                                *x += entry.probability * s * y;
                            }
                        }
                    }
                }
            }
            flows.insert((a, b), total);
        }
    }
    Ok(RoutingTemplates { flows })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioStats {
    pub ratios: Vec<f64>,
    pub max: f64,
    pub mean: f64,
    /// Demands skipped because they were zero.
    pub skipped: usize,
}

/// Oblivious congestion over optimal congestion, per demand.
pub fn competitive_ratio(
    g: &Graph,
    templates: &RoutingTemplates,
    demands: &[DemandVector],
) -> Result<RatioStats> {
    let mut ratios = Vec::new();
    let mut skipped = 0;
    for d in demands {
        if d.is_empty() || d.total() == 0.0 {
            skipped += 1;
            continue;
        }
        let opt = max_concurrent_flow(g, d)?.congestion;
        let obl = templates.congestion(g, d)?;
        ratios.push(obl / opt);
    }
    let max = ratios.iter().copied().fold(0.0, f64::max);
    let mean = if ratios.is_empty() {
        0.0
    } else {
        ratios.iter().sum::<f64>() / ratios.len() as f64
    };
    Ok(RatioStats {
        ratios,
        max,
        mean,
        skipped,
    })
}

/// `count` random terminal demands: each pair present with probability 0.6
/// and amount uniform in `[0.1, 3)`. Never empty.
pub fn random_demands(g: &Graph, count: usize, seed: u64) -> Vec<DemandVector> {
    let t = g.terminals();
    (0..count as u64)
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            let mut d = DemandVector::new();
            for a in 0..t.len() {
                for b in a + 1..t.len() {
                    if rng.gen_bool(0.6) {
                        d.add(t[a], t[b], rng.gen_range(0.1..3.0))
                            .expect("distinct terminals");
                    }
                }
            }
            if d.is_empty() && t.len() >= 2 {
                d.add(t[0], t[1], 1.0).expect("distinct terminals");
            }
            d
        })
        .collect()
}
