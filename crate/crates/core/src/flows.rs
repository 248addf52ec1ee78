//! Maximum concurrent flow and maximum multiflow as edge-flow LPs.
//!
//! Demand pairs are grouped by a shared source, so one commodity ships from
//! its source to several sinks at once; any single-source flow decomposes
//! into per-sink paths, so the grouping loses nothing.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::graph::{DemandVector, Graph};
use crate::lp::{self, LpProblem, LpStatus, Relation, Sense};
use crate::metric::shortest_path_metric;

/// A single-source commodity: `flow[e]` is the signed flow on edge `e`,
/// positive in the stored `u -> v` direction.
#[derive(Debug, Clone, PartialEq)]
pub struct Commodity {
    pub source: usize,
    /// Sink and the amount delivered to it.
    pub sinks: Vec<(usize, f64)>,
    pub flow: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowResult {
    /// Largest routable fraction of the demand; `+inf` for zero demand.
    pub lambda_star: f64,
    /// `1 / lambda_star`; zero for zero demand and `+inf` when some demand
    /// pair is disconnected.
    pub congestion: f64,
    /// Flows routing `lambda_star * dem`.
    pub commodities: Vec<Commodity>,
    /// Optimal dual edge lengths `d(e)`, with `sum d(e) c(e) = lambda_star`.
    pub edge_duals: Vec<f64>,
}

impl FlowResult {
    /// Total flow over each edge, summed over commodities in absolute value.
    pub fn edge_loads(&self, g: &Graph) -> Vec<f64> {
        let mut load = vec![0.0; g.edges().len()];
        for c in &self.commodities {
            for (l, f) in load.iter_mut().zip(&c.flow) {
                *l += f.abs();
            }
        }
        load
    }

    /// Largest conservation violation over all commodities and nodes.
    pub fn conservation_residual(&self, g: &Graph) -> f64 {
        self.commodities
            .iter()
            .map(|c| commodity_residual(g, c))
            .fold(0.0, f64::max)
    }

    /// Splits each commodity into one signed edge flow per demand pair,
    /// oriented from the smaller to the larger node index.
    pub fn pair_flows(&self, g: &Graph) -> BTreeMap<(usize, usize), Vec<f64>> {
        let mut out = BTreeMap::new();
        for c in &self.commodities {
            for (t, flow) in decompose_single_source(g, c) {
                let key = (c.source.min(t), c.source.max(t));
                let sign = if c.source == key.0 { 1.0 } else { -1.0 };
                out.insert(key, flow.into_iter().map(|x| sign * x).collect());
            }
        }
        out
    }
}

fn commodity_residual(g: &Graph, c: &Commodity) -> f64 {
    let mut net = vec![0.0; g.node_count()];
    for (e, &f) in g.edges().iter().zip(&c.flow) {
        net[e.u] -= f;
        net[e.v] += f;
    }
    let supplied: f64 = c.sinks.iter().map(|s| s.1).sum();
    net[c.source] += supplied;
    for &(t, amount) in &c.sinks {
        net[t] -= amount;
    }
    net.iter().fold(0.0, |a, x| a.max(x.abs()))
}

/// Groups pairs into commodities: repeatedly pick the node covering the most
/// remaining pairs (smallest index on ties) as a shared source.
fn group_by_source(pairs: &[(usize, usize)]) -> Vec<(usize, Vec<usize>)> {
    let mut remaining: Vec<(usize, usize)> = pairs.to_vec();
    let mut groups = Vec::new();
    while !remaining.is_empty() {
        let mut count: BTreeMap<usize, usize> = BTreeMap::new();
        for &(a, b) in &remaining {
            *count.entry(a).or_default() += 1;
            *count.entry(b).or_default() += 1;
        }
        let best = count
            .iter()
            .map(|(&v, &c)| (c, std::cmp::Reverse(v)))
            .max()
            .unwrap()
            .1
             .0;
        let mut sinks = Vec::new();
        remaining.retain(|&(a, b)| {
            if a == best || b == best {
                sinks.push(if a == best { b } else { a });
                false
            } else {
                true
            }
        });
        sinks.sort_unstable();
        groups.push((best, sinks));
    }
    groups
}

fn component_ids(g: &Graph) -> Vec<usize> {
    let adj = g.adjacency();
    let mut comp = vec![usize::MAX; g.node_count()];
    let mut next = 0;
    for s in 0..g.node_count() {
        if comp[s] != usize::MAX {
            continue;
        }
        let mut stack = vec![s];
        comp[s] = next;
        while let Some(x) = stack.pop() {
            for &(y, _) in &adj[x] {
                if comp[y] == usize::MAX {
                    comp[y] = next;
                    stack.push(y);
                }
            }
        }
        next += 1;
    }
    comp
}

fn check_endpoints(g: &Graph, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<()> {
    for (a, b) in pairs {
        if a >= g.node_count() || b >= g.node_count() {
            return Err(Error::input(format!(
                "demand endpoint ({a}, {b}) is not a node"
            )));
        }
    }
    Ok(())
}

/// Arc variables `(forward, backward)` for every edge, per commodity, and the
/// per-node incidence used for conservation rows.
struct ArcVars {
    vars: Vec<Vec<(usize, usize)>>,
}

impl ArcVars {
    fn add(p: &mut LpProblem, g: &Graph, commodities: usize) -> Self {
        let vars = (0..commodities)
            .map(|c| {
                g.edges()
                    .iter()
                    .enumerate()
                    .map(|(e, _)| {
                        (
                            p.add_nonneg(format!("f{c}_{e}+"), 0.0),
                            p.add_nonneg(format!("f{c}_{e}-"), 0.0),
                        )
                    })
                    .collect()
            })
            .collect();
        ArcVars { vars }
    }

    /// Net inflow coefficients at `v` for commodity `c`.
    fn inflow(
        &self,
        g: &Graph,
        adj: &[Vec<(usize, usize)>],
        c: usize,
        v: usize,
    ) -> Vec<(usize, f64)> {
        let mut row = Vec::new();
        for &(_, e) in &adj[v] {
            let (fwd, bwd) = self.vars[c][e];
            let into_v = g.edges()[e].v == v;
            row.push((fwd, if into_v { 1.0 } else { -1.0 }));
            row.push((bwd, if into_v { -1.0 } else { 1.0 }));
        }
        row
    }

    fn capacity_rows(&self, p: &mut LpProblem, g: &Graph, scale: Option<usize>) -> Vec<usize> {
        g.edges()
            .iter()
            .enumerate()
            .map(|(e, edge)| {
                let mut row: Vec<(usize, f64)> = self
                    .vars
                    .iter()
                    .flat_map(|v| [(v[e].0, 1.0), (v[e].1, 1.0)])
                    .collect();
                match scale {
                    Some(alpha) => {
                        row.push((alpha, -edge.cap));
                        p.add_constraint(row, Relation::Le, 0.0)
                    }
                    None => p.add_constraint(row, Relation::Le, edge.cap),
                }
            })
            .collect()
    }

    fn flows(&self, values: &[f64], c: usize) -> Vec<f64> {
        self.vars[c]
            .iter()
            .map(|&(f, b)| values[f] - values[b])
            .collect()
    }
}

/// Maximum concurrent flow: the largest `lambda` such that `lambda * dem` is
/// simultaneously routable within the capacities.
pub fn max_concurrent_flow(g: &Graph, dem: &DemandVector) -> Result<FlowResult> {
    check_endpoints(g, dem.iter().map(|(p, _)| p))?;
    let pairs: Vec<(usize, usize)> = dem.iter().map(|(p, _)| p).collect();
    if pairs.is_empty() {
        return Ok(FlowResult {
            lambda_star: f64::INFINITY,
            congestion: 0.0,
            commodities: Vec::new(),
            edge_duals: vec![0.0; g.edges().len()],
        });
    }
    let comp = component_ids(g);
    if pairs.iter().any(|&(a, b)| comp[a] != comp[b]) {
        return Ok(FlowResult {
            lambda_star: 0.0,
            congestion: f64::INFINITY,
            commodities: Vec::new(),
            edge_duals: vec![0.0; g.edges().len()],
        });
    }
    let groups = group_by_source(&pairs);
    let adj = g.adjacency();
    let mut p = LpProblem::new(Sense::Maximize);
    let lambda = p.add_nonneg("lambda", 1.0);
    let arcs = ArcVars::add(&mut p, g, groups.len());
    for (c, (s, sinks)) in groups.iter().enumerate() {
        for v in 0..g.node_count() {
            if v == *s || comp[v] != comp[*s] {
                continue;
            }
            let mut row = arcs.inflow(g, &adj, c, v);
            if sinks.binary_search(&v).is_ok() {
                row.push((lambda, -dem.get(*s, v)));
            }
            p.add_constraint(row, Relation::Eq, 0.0);
        }
    }
    let cap_rows = arcs.capacity_rows(&mut p, g, None);
    let sol = lp::solve_lp(&p)?;
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Unbounded => {
            return Err(Error::internal(
                "concurrent flow LP unbounded on a connected demand",
            ))
        }
        LpStatus::Infeasible => return Err(Error::internal("concurrent flow LP infeasible")),
    }
    let lambda_star = sol.values[lambda];
    if lambda_star <= 0.0 {
        return Err(Error::Numerical(
            "concurrent flow LP returned a nonpositive throughput".into(),
        ));
    }
    let commodities = groups
        .iter()
        .enumerate()
        .map(|(c, (s, sinks))| Commodity {
            source: *s,
            sinks: sinks
                .iter()
                .map(|&t| (t, lambda_star * dem.get(*s, t)))
                .collect(),
            flow: arcs.flows(&sol.values, c),
        })
        .collect();
    let edge_duals = cap_rows.iter().map(|&r| sol.duals[r].max(0.0)).collect();
    Ok(FlowResult {
        lambda_star,
        congestion: 1.0 / lambda_star,
        commodities,
        edge_duals,
    })
}

/// Congestion needed to route `dem`: `1 / lambda_star`.
pub fn congestion(g: &Graph, dem: &DemandVector) -> Result<f64> {
    Ok(max_concurrent_flow(g, dem)?.congestion)
}

/// Dual certificate for a concurrent flow result: returns
/// `(sum d(e) c(e), sum D(s,t) dem(s,t))` with `D` the shortest-path
/// distances under the dual lengths. Weak duality gives
/// `lambda* <= first / second`, with equality at an optimum.
pub fn concurrent_flow_certificate(
    g: &Graph,
    dem: &DemandVector,
    res: &FlowResult,
) -> Result<(f64, f64)> {
    let volume: f64 = g
        .edges()
        .iter()
        .zip(&res.edge_duals)
        .map(|(e, d)| e.cap * d)
        .sum();
    let metric = shortest_path_metric(g, &res.edge_duals)?;
    let routed: f64 = dem.iter().map(|((a, b), x)| metric.get(a, b) * x).sum();
    Ok((volume, routed))
}

/// Maximum total flow over `pairs`, each pair an independent commodity.
pub fn max_multiflow(g: &Graph, pairs: &[(usize, usize)]) -> Result<f64> {
    check_endpoints(g, pairs.iter().copied())?;
    let mut keyed: Vec<(usize, usize)> = Vec::new();
    for &(a, b) in pairs {
        if a == b {
            return Err(Error::input(format!("pair ({a}, {b}) has equal endpoints")));
        }
        keyed.push((a.min(b), a.max(b)));
    }
    keyed.sort_unstable();
    keyed.dedup();
    let comp = component_ids(g);
    keyed.retain(|&(a, b)| comp[a] == comp[b]);
    if keyed.is_empty() {
        return Ok(0.0);
    }
    let groups = group_by_source(&keyed);
    let adj = g.adjacency();
    let mut p = LpProblem::new(Sense::Maximize);
    let arcs = ArcVars::add(&mut p, g, groups.len());
    for (c, (s, sinks)) in groups.iter().enumerate() {
        let amounts: Vec<usize> = sinks
            .iter()
            .map(|t| p.add_nonneg(format!("F{s}_{t}"), 1.0))
            .collect();
        for v in 0..g.node_count() {
            if v == *s || comp[v] != comp[*s] {
                continue;
            }
            let mut row = arcs.inflow(g, &adj, c, v);
            if let Ok(i) = sinks.binary_search(&v) {
                row.push((amounts[i], -1.0));
            }
            p.add_constraint(row, Relation::Eq, 0.0);
        }
    }
    arcs.capacity_rows(&mut p, g, None);
    let sol = lp::solve_lp(&p)?;
    if !sol.is_optimal() {
        return Err(Error::internal("multiflow LP not optimal"));
    }
    Ok(sol.objective)
}

/// Adds, for each demand pair, a commodity shipping `amount(pair)` units
/// whose combined load on every edge is at most `alpha * c(e)`. Used by LPs
/// that embed a concurrent-flow feasibility test with variable demands.
/// `amount` maps each pair to a linear expression over existing variables.
pub(crate) fn add_routing_block(
    p: &mut LpProblem,
    g: &Graph,
    pairs: &[(usize, usize)],
    amount: &dyn Fn(usize, usize) -> Vec<(usize, f64)>,
    alpha: usize,
) {
    let groups = group_by_source(pairs);
    let adj = g.adjacency();
    let arcs = ArcVars::add(p, g, groups.len());
    for (c, (s, sinks)) in groups.iter().enumerate() {
        for v in 0..g.node_count() {
            if v == *s {
                continue;
            }
            let mut row = arcs.inflow(g, &adj, c, v);
            if sinks.binary_search(&v).is_ok() {
                for (var, coef) in amount(*s, v) {
                    row.push((var, -coef));
                }
            }
            p.add_constraint(row, Relation::Eq, 0.0);
        }
    }
    arcs.capacity_rows(p, g, Some(alpha));
}

/// Splits a single-source flow into one edge flow per sink by peeling
/// paths along positive-flow arcs and cancelling any cycles met on the way.
fn decompose_single_source(g: &Graph, c: &Commodity) -> Vec<(usize, Vec<f64>)> {
    let n = g.node_count();
    let m = g.edges().len();
    let tol = 1e-12 * (1.0 + c.sinks.iter().map(|s| s.1).sum::<f64>());
    // residual[e] signed like the flow.
    let mut residual = c.flow.clone();
    let adj = g.adjacency();
    let mut need: BTreeMap<usize, f64> = c.sinks.iter().copied().collect();
    let mut out: BTreeMap<usize, Vec<f64>> =
        c.sinks.iter().map(|&(t, _)| (t, vec![0.0; m])).collect();
    let out_arc = |residual: &[f64], x: usize| -> Option<(usize, usize, f64)> {
        adj[x].iter().find_map(|&(y, e)| {
            let f = residual[e];
            let forward = g.edges()[e].u == x;
            let along = if forward { f } else { -f };
            (along > tol).then_some((y, e, along))
        })
    };
    let mut guard = 0usize;
    while need.values().any(|&r| r > tol) {
        guard += 1;
        if guard > 4 * (n + m) * (c.sinks.len() + 1) + 1000 {
            break;
        }
        // Walk from the source until reaching a sink that still needs flow.
        let mut path_nodes = vec![c.source];
        let mut path_edges: Vec<usize> = Vec::new();
        let mut pos = vec![usize::MAX; n];
        pos[c.source] = 0;
        let mut reached = None;
        loop {
            let x = *path_nodes.last().unwrap();
            if x != c.source && need.get(&x).is_some_and(|&r| r > tol) {
                reached = Some(x);
                break;
            }
            let Some((y, e, along)) = out_arc(&residual, x) else {
                break;
            };
            if pos[y] != usize::MAX {
                // Cancel the cycle y -> ... -> x -> y.
                let start = pos[y];
                let mut cyc: Vec<usize> = path_edges[start..].to_vec();
                cyc.push(e);
                let nodes: Vec<usize> = path_nodes[start..].to_vec();
                let mut delta = along;
                for (i, &ce) in cyc.iter().enumerate() {
                    let from = nodes[i];
                    let f = residual[ce];
                    let a = if g.edges()[ce].u == from { f } else { -f };
                    delta = delta.min(a);
                }
                for (i, &ce) in cyc.iter().enumerate() {
                    let from = nodes[i];
                    if g.edges()[ce].u == from {
                        residual[ce] -= delta;
                    } else {
                        residual[ce] += delta;
                    }
                }
                for &v in &path_nodes[start + 1..] {
                    pos[v] = usize::MAX;
                }
                path_nodes.truncate(start + 1);
                path_edges.truncate(start);
                continue;
            }
            pos[y] = path_nodes.len();
            path_nodes.push(y);
            path_edges.push(e);
        }
        let Some(t) = reached else { break };
        let amount = path_edges
            .iter()
            .enumerate()
            .map(|(i, &e)| {
                let f = residual[e];
                if g.edges()[e].u == path_nodes[i] {
                    f
                } else {
                    -f
                }
            })
            .fold(f64::INFINITY, f64::min);
        let r = need.get_mut(&t).unwrap();
        let delta = amount.min(*r);
        *r -= delta;
        let flow = out.get_mut(&t).unwrap();
        for (i, &e) in path_edges.iter().enumerate() {
            let from = path_nodes[i];
            let s = if g.edges()[e].u == from { 1.0 } else { -1.0 };
            residual[e] -= s * delta;
            flow[e] += s * delta;
        }
    }
    out.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::max_flow_min_cut;
    use crate::graph::generators;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn single_edge() -> Graph {
        Graph::from_named(&["a", "b"], &[("a", "b", 1.0)], &["a", "b"]).unwrap()
    }

    fn all_pairs(g: &Graph, amount: f64) -> DemandVector {
        let t = g.terminals();
        let mut d = DemandVector::new();
        for i in 0..t.len() {
            for j in i + 1..t.len() {
                d.add(t[i], t[j], amount).unwrap();
            }
        }
        d
    }

    #[test]
    fn single_edge_concurrent() {
        let g = single_edge();
        let r = max_concurrent_flow(&g, &[((0, 1), 1.0)].into_iter().collect()).unwrap();
        assert!((r.lambda_star - 1.0).abs() < 1e-9);
        assert!((r.congestion - 1.0).abs() < 1e-9);
        let r = max_concurrent_flow(&g, &[((0, 1), 2.0)].into_iter().collect()).unwrap();
        assert!((r.lambda_star - 0.5).abs() < 1e-9);
    }

    #[test]
    fn triangle_all_pairs() {
        let g = generators::complete(3, None).unwrap();
        let d = all_pairs(&g, 1.0);
        let r = max_concurrent_flow(&g, &d).unwrap();
        assert!((r.lambda_star - 1.0).abs() < 1e-9);
        let (vol, routed) = concurrent_flow_certificate(&g, &d, &r).unwrap();
        assert!((vol - r.lambda_star).abs() < 1e-6);
        assert!(routed >= 1.0 - 1e-6);
        // Each pair rides its own edge, and cutting all three edges is the only multicut.
        assert!((max_multiflow(&g, &[(0, 1), (0, 2), (1, 2)]).unwrap() - 3.0).abs() < 1e-9);
    }

    #[test]
    fn zero_and_disconnected_demand() {
        let g = single_edge();
        let r = max_concurrent_flow(&g, &DemandVector::new()).unwrap();
        assert_eq!(r.congestion, 0.0);
        let g = Graph::new(vec!["a".into(), "b".into()], vec![], vec![0, 1]).unwrap();
        let r = max_concurrent_flow(&g, &[((0, 1), 1.0)].into_iter().collect()).unwrap();
        assert!(r.congestion.is_infinite());
        assert_eq!(max_multiflow(&g, &[(0, 1)]).unwrap(), 0.0);
        assert_eq!(max_multiflow(&single_edge(), &[]).unwrap(), 0.0);
    }

    #[test]
    fn bad_endpoint() {
        let g = single_edge();
        assert!(max_multiflow(&g, &[(0, 7)]).is_err());
    }

    #[test]
    fn random_instances_certify() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..15 {
            let g = generators::random_connected(8, 4, 0.3, &mut rng).unwrap();
            let mut d = DemandVector::new();
            for i in 0..4 {
                for j in i + 1..4 {
                    if rng.gen_bool(0.7) {
                        d.add(i, j, rng.gen_range(1..4) as f64).unwrap();
                    }
                }
            }
            if d.is_empty() {
                continue;
            }
            let r = max_concurrent_flow(&g, &d).unwrap();
            assert!(r.conservation_residual(&g) < 1e-7);
            for (load, e) in r.edge_loads(&g).iter().zip(g.edges()) {
                assert!(*load <= e.cap + 1e-7);
            }
            let (vol, routed) = concurrent_flow_certificate(&g, &d, &r).unwrap();
            assert!((vol - r.lambda_star).abs() < 1e-6 * (1.0 + vol));
            assert!((routed - 1.0).abs() < 1e-6);

            let scaled = max_concurrent_flow(&g, &d.scaled(2.5)).unwrap();
            assert!((scaled.congestion - 2.5 * r.congestion).abs() < 1e-6 * scaled.congestion);

            let pf = r.pair_flows(&g);
            assert_eq!(pf.len(), d.len());
            for ((a, b), flow) in &pf {
                let target = r.lambda_star * d.get(*a, *b);
                let mut net = vec![0.0; g.node_count()];
                for (e, f) in g.edges().iter().zip(flow) {
                    net[e.u] -= f;
                    net[e.v] += f;
                }
                assert!((net[*b] - target).abs() < 1e-7, "{} vs {}", net[*b], target);
                assert!((net[*a] + target).abs() < 1e-7);
            }

            for &(a, b) in &[(0usize, 1usize), (2, 3)] {
                let mf = max_multiflow(&g, &[(a, b)]).unwrap();
                let cut = max_flow_min_cut(&g, &[a], &[b]).unwrap().value;
                assert!((mf - cut).abs() < 1e-9);
            }
        }
    }
}
