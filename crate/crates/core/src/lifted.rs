//! The earth-mover lifted LP: a flow sparsifier whose quality is at most
//! the best contraction-based quality, plus independent validity checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::flow::TerminalCutOracle;
use crate::flows::{add_routing_block, congestion};
use crate::graph::{DemandVector, Graph};
use crate::lp::{self, LpProblem, Relation, Sense};
use crate::metric::Metric;
use crate::sparsifier::Sparsifier;

/// Variable layout of a lifted LP.
#[derive(Debug, Clone)]
pub struct LiftedLayout {
    pub alpha: usize,
    /// `marginal[v][i]`: variable of `x^v_i`, or `None` for terminals.
    pub marginal: Vec<Option<Vec<usize>>>,
    /// `pair[e][i * k + j]`: variable of `x^{u,v}_{i,j}` for edge `e = (u, v)`,
    /// or `None` when both endpoints are terminals.
    pub pair: Vec<Option<Vec<usize>>>,
    /// `weight[(i, j)]` for `i < j`, row-major over the upper triangle.
    pub weight: Vec<usize>,
}

fn tri_index(k: usize, i: usize, j: usize) -> usize {
    let (a, b) = (i.min(j), i.max(j));
    a * k - a * (a + 1) / 2 + (b - a - 1)
}

/// Builds the lifted LP: minimize `alpha` over marginals on non-terminals,
/// per-edge transport plans consistent with them, pair weights
/// `w_ij = sum_e c(e) (x^e_ij + x^e_ji)`, and an explicit routing of `w`
/// in `G` with load at most `alpha c(e)` on every edge.
pub fn build_lifted_lp(g: &Graph) -> Result<(LpProblem, LiftedLayout)> {
    let k = g.k();
    if k < 2 {
        return Err(Error::input("the lifted LP needs at least two terminals"));
    }
    let mut p = LpProblem::new(Sense::Minimize);
    let alpha = p.add_nonneg("alpha", 1.0);
    let marginal: Vec<Option<Vec<usize>>> = (0..g.node_count())
        .map(|v| {
            if g.is_terminal(v) {
                None
            } else {
                Some(
                    (0..k)
                        .map(|i| p.add_nonneg(format!("x{v}_{i}"), 0.0))
                        .collect(),
                )
            }
        })
        .collect();
    for m in marginal.iter().flatten() {
        p.add_constraint(m.iter().map(|&x| (x, 1.0)).collect(), Relation::Eq, 1.0);
    }

    let weight: Vec<usize> = (0..k)
        .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
        .map(|(i, j)| p.add_nonneg(format!("w{i}_{j}"), 0.0))
        .collect();
    let mut w_rows: Vec<Vec<(usize, f64)>> = weight.iter().map(|&w| vec![(w, 1.0)]).collect();
    let mut w_const = vec![0.0; weight.len()];

    let mut pair = Vec::with_capacity(g.edges().len());
    for (e, edge) in g.edges().iter().enumerate() {
        let (u, v) = (edge.u, edge.v);
        if let (Some(a), Some(b)) = (g.terminal_position(u), g.terminal_position(v)) {
            w_const[tri_index(k, a, b)] += edge.cap;
            pair.push(None);
            continue;
        }
        let vars: Vec<usize> = (0..k * k)
            .map(|ij| p.add_nonneg(format!("y{e}_{}_{}", ij / k, ij % k), 0.0))
            .collect();
        // Row sums reproduce the marginal at u, column sums the one at v.
        for i in 0..k {
            let row: Vec<(usize, f64)> = (0..k).map(|j| (vars[i * k + j], 1.0)).collect();
            add_marginal_row(&mut p, g, &marginal, row, u, i);
            let col: Vec<(usize, f64)> = (0..k).map(|j| (vars[j * k + i], 1.0)).collect();
            add_marginal_row(&mut p, g, &marginal, col, v, i);
        }
        for i in 0..k {
            for j in 0..k {
                if i != j {
                    w_rows[tri_index(k, i, j)].push((vars[i * k + j], -edge.cap));
                }
            }
        }
        pair.push(Some(vars));
    }
    for (row, c) in w_rows.into_iter().zip(w_const) {
        p.add_constraint(row, Relation::Eq, c);
    }

    let t = g.terminals().to_vec();
    let pairs: Vec<(usize, usize)> = (0..k)
        .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
        .map(|(i, j)| (t[i], t[j]))
        .collect();
    let amount = |s: usize, d: usize| {
        let (a, b) = (
            g.terminal_position(s).unwrap(),
            g.terminal_position(d).unwrap(),
        );
        vec![(weight[tri_index(k, a, b)], 1.0)]
    };
    add_routing_block(&mut p, g, &pairs, &amount, alpha);
    Ok((
        p,
        LiftedLayout {
            alpha,
            marginal,
            pair,
            weight,
        },
    ))
}

fn add_marginal_row(
    p: &mut LpProblem,
    g: &Graph,
    marginal: &[Option<Vec<usize>>],
    mut row: Vec<(usize, f64)>,
    node: usize,
    i: usize,
) {
    match &marginal[node] {
        Some(m) => {
            row.push((m[i], -1.0));
            p.add_constraint(row, Relation::Eq, 0.0);
        }
        None => {
            let fixed = if g.terminal_position(node) == Some(i) {
                1.0
            } else {
                0.0
            };
            p.add_constraint(row, Relation::Eq, fixed);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LiftedSolution {
    pub alpha: f64,
    pub sparsifier: Sparsifier,
    /// `marginals[v]`: distribution of `v` over terminal positions.
    pub marginals: Vec<Vec<f64>>,
    /// `pairs[e]`: row-major `k x k` transport plan for edge `e`.
    pub pairs: Vec<Vec<f64>>,
}

impl LiftedSolution {
    /// Largest violation of the earth-mover equalities and of the weight
    /// definitions.
    pub fn earth_mover_residual(&self, g: &Graph) -> f64 {
        let k = g.k();
        let mut worst: f64 = 0.0;
        for m in &self.marginals {
            worst = worst.max((m.iter().sum::<f64>() - 1.0).abs());
            worst = worst.max(-m.iter().copied().fold(0.0, f64::min));
        }
        let mut w = vec![0.0; k * k];
        for (e, plan) in g.edges().iter().zip(&self.pairs) {
            for i in 0..k {
                let row: f64 = (0..k).map(|j| plan[i * k + j]).sum();
                let col: f64 = (0..k).map(|j| plan[j * k + i]).sum();
                worst = worst.max((row - self.marginals[e.u][i]).abs());
                worst = worst.max((col - self.marginals[e.v][i]).abs());
                for j in 0..k {
                    worst = worst.max(-plan[i * k + j]);
                    if i != j {
                        w[i.min(j) * k + i.max(j)] += e.cap * plan[i * k + j];
                    }
                }
            }
        }
        for i in 0..k {
            for j in i + 1..k {
                worst = worst.max((w[i * k + j] - self.sparsifier.get(i, j)).abs());
            }
        }
        worst
    }
}

/// Solves the lifted LP and extracts the sparsifier.
pub fn solve_flow_sparsifier(g: &Graph) -> Result<LiftedSolution> {
    let (p, layout) = build_lifted_lp(g)?;
    let sol = lp::solve_lp(&p)?;
    if !sol.is_optimal() {
        return Err(Error::internal(format!("lifted LP is {:?}", sol.status)));
    }
    let k = g.k();
    let x = &sol.values;
    let marginals: Vec<Vec<f64>> = (0..g.node_count())
        .map(|v| match &layout.marginal[v] {
            Some(m) => m.iter().map(|&i| x[i].max(0.0)).collect(),
            None => {
                let pos = g.terminal_position(v).unwrap();
                (0..k).map(|i| if i == pos { 1.0 } else { 0.0 }).collect()
            }
        })
        .collect();
    let pairs: Vec<Vec<f64>> = g
        .edges()
        .iter()
        .zip(&layout.pair)
        .map(|(e, vars)| match vars {
            Some(vars) => vars.iter().map(|&i| x[i].max(0.0)).collect(),
            None => {
                let (a, b) = (
                    g.terminal_position(e.u).unwrap(),
                    g.terminal_position(e.v).unwrap(),
                );
                let mut plan = vec![0.0; k * k];
                plan[a * k + b] = 1.0;
                plan
            }
        })
        .collect();
    let mut sparsifier = Sparsifier::on_terminals(g);
    for i in 0..k {
        for j in i + 1..k {
            let w = x[layout.weight[tri_index(k, i, j)]];
            if w > 0.0 {
                sparsifier.add(i, j, w)?;
            }
        }
    }
    Ok(LiftedSolution {
        alpha: x[layout.alpha],
        sparsifier,
        marginals,
        pairs,
    })
}

/// Optimal transport cost between distributions `x` and `y` on the points
/// of `d`.
pub fn earth_mover_distance(d: &Metric, x: &[f64], y: &[f64]) -> Result<f64> {
    let k = d.len();
    if x.len() != k || y.len() != k {
        return Err(Error::input(
            "distribution length does not match the metric",
        ));
    }
    let mut p = LpProblem::new(Sense::Minimize);
    let vars: Vec<usize> = (0..k * k)
        .map(|ij| p.add_nonneg(format!("t{ij}"), d.get(ij / k, ij % k)))
        .collect();
    for i in 0..k {
        p.add_constraint(
            (0..k).map(|j| (vars[i * k + j], 1.0)).collect(),
            Relation::Eq,
            x[i],
        );
    }
    for j in 0..k {
        p.add_constraint(
            (0..k).map(|i| (vars[i * k + j], 1.0)).collect(),
            Relation::Eq,
            y[j],
        );
    }
    let sol = lp::solve_lp(&p)?;
    if !sol.is_optimal() {
        return Err(Error::input("distributions have different total mass"));
    }
    Ok(sol.objective)
}

#[derive(Debug, Clone, PartialEq)]
pub struct QualityReport {
    /// `cong_G(vec H)`: congestion of routing the sparsifier's weights in `G`.
    pub congestion_in_g: f64,
    pub alpha: f64,
    /// Whether cut domination was checked over all `2^k` subsets.
    pub exhaustive: bool,
    /// `min_A h_H(A) - h_K(A)` over the checked subsets.
    pub worst_cut_slack: f64,
    /// Terminal bitmask attaining `worst_cut_slack`.
    pub worst_cut_mask: u64,
    /// Largest `cong_H(d)` over sampled demands normalized to `cong_G(d) = 1`.
    pub sampled_max_congestion_in_h: f64,
    pub samples: usize,
}

impl QualityReport {
    pub fn congestion_ok(&self) -> bool {
        self.congestion_in_g <= self.alpha + 1e-6
    }

    pub fn cuts_ok(&self) -> bool {
        self.worst_cut_slack >= -1e-6
    }

    pub fn samples_ok(&self) -> bool {
        self.sampled_max_congestion_in_h <= 1.0 + 1e-6
    }

    pub fn passed(&self) -> bool {
        self.congestion_ok() && self.cuts_ok() && self.samples_ok()
    }
}

/// Checks that `h` is a flow sparsifier of quality `alpha` for `g`.
///
/// Cut domination is exhaustive for `k <= 16`; larger instances check only
/// singleton cuts plus the sampled-demand test.
pub fn verify_sparsifier(
    g: &Graph,
    h: &Sparsifier,
    alpha: f64,
    demand_samples: usize,
    seed: u64,
) -> Result<QualityReport> {
    h.check_matches(g)?;
    let k = g.k();
    let congestion_in_g = congestion(g, &h.as_demand(g)?)?;

    let oracle = TerminalCutOracle::new(g);
    let exhaustive = k <= 16;
    let masks: Vec<u64> = if exhaustive {
        (1..(1u64 << k).saturating_sub(1)).collect()
    } else {
        (0..k).map(|i| 1u64 << i).collect()
    };
    let mut worst = (f64::INFINITY, 0u64);
    for bits in masks {
        let slack = h.cut_bits(bits) - oracle.cut_bits(bits);
        if slack < worst.0 {
            worst = (slack, bits);
        }
    }
    if worst.0 == f64::INFINITY {
        worst.0 = 0.0;
    }

    let h_graph = h.to_graph()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sampled_max: f64 = 0.0;
    let mut samples = 0;
    let t = g.terminals();
    for _ in 0..demand_samples {
        let mut d = DemandVector::new();
        for i in 0..k {
            for j in i + 1..k {
                if rng.gen_bool(0.5) {
                    d.add(t[i], t[j], rng.gen_range(0.1..1.0))?;
                }
            }
        }
        if d.is_empty() {
            continue;
        }
        let cg = congestion(g, &d)?;
        if !cg.is_finite() || cg == 0.0 {
            continue;
        }
        let dh: DemandVector = d
            .iter()
            .map(|((a, b), x)| {
                let (pa, pb) = (
                    g.terminal_position(a).unwrap(),
                    g.terminal_position(b).unwrap(),
                );
                ((pa.min(pb), pa.max(pb)), x / cg)
            })
            .collect();
        sampled_max = sampled_max.max(congestion(&h_graph, &dh)?);
        samples += 1;
    }
    Ok(QualityReport {
        congestion_in_g,
        alpha,
        exhaustive,
        worst_cut_slack: worst.0,
        worst_cut_mask: worst.1,
        sampled_max_congestion_in_h: sampled_max,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generators;

    #[test]
    fn identity_instance() {
        let g = Graph::from_named(&["a", "b"], &[("a", "b", 2.0)], &["a", "b"]).unwrap();
        let s = solve_flow_sparsifier(&g).unwrap();
        assert!((s.alpha - 1.0).abs() < 1e-9);
        assert!((s.sparsifier.get(0, 1) - 2.0).abs() < 1e-9);
        let r = verify_sparsifier(&g, &s.sparsifier, s.alpha, 5, 1).unwrap();
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn path_instance() {
        let g = Graph::from_named(
            &["a", "v", "b"],
            &[("a", "v", 1.0), ("v", "b", 1.0)],
            &["a", "b"],
        )
        .unwrap();
        let s = solve_flow_sparsifier(&g).unwrap();
        assert!((s.alpha - 1.0).abs() < 1e-9);
        assert!((s.sparsifier.get(0, 1) - 1.0).abs() < 1e-9);
        assert!(s.earth_mover_residual(&g) < 1e-7);
    }

    #[test]
    fn star_instance() {
        let g = generators::star(3).unwrap();
        let s = solve_flow_sparsifier(&g).unwrap();
        assert!((s.alpha - 4.0 / 3.0).abs() < 1e-9);
        for (_, w) in s.sparsifier.iter() {
            assert!((w - 2.0 / 3.0).abs() < 1e-9);
        }
        let r = verify_sparsifier(&g, &s.sparsifier, s.alpha, 10, 2).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!((r.congestion_in_g - 4.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn zero_sparsifier_flagged() {
        let g = generators::star(3).unwrap();
        let h = Sparsifier::on_terminals(&g);
        let r = verify_sparsifier(&g, &h, 1.0, 0, 0).unwrap();
        assert!(!r.cuts_ok());
        assert!(!r.passed());
    }

    #[test]
    fn emd_on_line() {
        let d = Metric::from_fn(vec!["a".into(), "b".into(), "c".into()], |i, j| {
            (i as f64 - j as f64).abs()
        });
        let cost = earth_mover_distance(&d, &[1.0, 0.0, 0.0], &[0.0, 0.5, 0.5]).unwrap();
        assert!((cost - 1.5).abs() < 1e-9);
    }
}
