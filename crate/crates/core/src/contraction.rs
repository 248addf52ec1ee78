//! 0-extensions, contracted graphs, exact contraction quality, and the
//! Cut-Cut and semi-metric relaxations of the 0-extension problem.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::flow::TerminalCutOracle;
use crate::graph::Graph;
use crate::lp::{self, LpProblem, Relation, Sense};
use crate::metric::Metric;
use crate::sparsifier::Sparsifier;

/// A retraction `f: V -> K`, stored as the terminal position of each node.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ZeroExtension {
    map: Vec<usize>,
}

impl ZeroExtension {
    /// Validates `map` (terminal positions per node) against `g`.
    pub fn new(g: &Graph, map: Vec<usize>) -> Result<Self> {
        if map.len() != g.node_count() {
            return Err(Error::input(format!(
                "0-extension covers {} nodes, graph has {}",
                map.len(),
                g.node_count()
            )));
        }
        for (v, &t) in map.iter().enumerate() {
            if t >= g.k() {
                return Err(Error::input(format!(
                    "node `{}` maps to unknown terminal {t}",
                    g.name(v)
                )));
            }
            if let Some(p) = g.terminal_position(v) {
                if p != t {
                    return Err(Error::input(format!(
                        "terminal `{}` must map to itself",
                        g.name(v)
                    )));
                }
            }
        }
        Ok(ZeroExtension { map })
    }

    /// Every non-terminal sent to terminal position `t`.
    pub fn constant(g: &Graph, t: usize) -> Result<Self> {
        let map = (0..g.node_count())
            .map(|v| g.terminal_position(v).unwrap_or(t))
            .collect();
        ZeroExtension::new(g, map)
    }

    pub fn get(&self, v: usize) -> usize {
        self.map[v]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }
}

/// Contracted graph `G_f` as a sparsifier on the terminals.
pub fn apply_zero_extension(g: &Graph, f: &ZeroExtension) -> Result<Sparsifier> {
    if f.map.len() != g.node_count() {
        return Err(Error::input("0-extension does not cover the graph"));
    }
    let mut h = Sparsifier::on_terminals(g);
    for e in g.edges() {
        let (a, b) = (f.get(e.u), f.get(e.v));
        if a != b {
            h.add(a, b, e.cap)?;
        }
    }
    Ok(h)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroExtensionDistribution {
    pub entries: Vec<(ZeroExtension, f64)>,
}

impl ZeroExtensionDistribution {
    pub fn validate(&self) -> Result<()> {
        if self.entries.iter().any(|(_, p)| !p.is_finite() || *p < 0.0) {
            return Err(Error::input("probabilities must be nonnegative"));
        }
        let total: f64 = self.entries.iter().map(|e| e.1).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::input(format!("probabilities sum to {total}, not 1")));
        }
        Ok(())
    }

    /// The expected contracted graph `sum_f gamma(f) G_f`.
    pub fn aggregate(&self, g: &Graph) -> Result<Sparsifier> {
        let mut h = Sparsifier::on_terminals(g);
        for (f, p) in &self.entries {
            for ((a, b), w) in apply_zero_extension(g, f)?.iter() {
                h.add(a, b, p * w)?;
            }
        }
        Ok(h)
    }
}

/// Limits on exhaustive 0-extension enumeration.
#[derive(Debug, Clone, Copy)]
pub struct EnumerationCap {
    pub max_nonterminals: usize,
    pub max_extensions: u64,
}

impl Default for EnumerationCap {
    fn default() -> Self {
        EnumerationCap {
            max_nonterminals: 8,
            max_extensions: 1 << 22,
        }
    }
}

/// All 0-extensions of a graph, in lexicographic order of the non-terminal
/// assignment.
struct Enumerator {
    nonterminals: Vec<usize>,
    base: Vec<usize>,
    k: usize,
    total: u64,
}

impl Enumerator {
    fn new(g: &Graph, cap: EnumerationCap) -> Result<Self> {
        if g.k() == 0 {
            return Err(Error::input("the graph has no terminals"));
        }
        let nonterminals = g.non_terminals();
        let m = nonterminals.len();
        if m > cap.max_nonterminals {
            return Err(Error::size(format!(
                "{m} non-terminals exceed the enumeration cap of {}",
                cap.max_nonterminals
            )));
        }
        let total = (g.k() as u64)
            .checked_pow(m as u32)
            .filter(|&t| t <= cap.max_extensions)
            .ok_or_else(|| {
                Error::size(format!(
                    "{}^{m} 0-extensions exceed the enumeration cap",
                    g.k()
                ))
            })?;
        let base = (0..g.node_count())
            .map(|v| g.terminal_position(v).unwrap_or(0))
            .collect();
        Ok(Enumerator {
            nonterminals,
            base,
            k: g.k(),
            total,
        })
    }

    fn decode(&self, mut idx: u64) -> Vec<usize> {
        let mut map = self.base.clone();
        for &v in self.nonterminals.iter().rev() {
            map[v] = (idx % self.k as u64) as usize;
            idx /= self.k as u64;
        }
        map
    }
}

/// Result of the exact contraction-quality LP.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractionQuality {
    pub alpha: f64,
    pub distribution: ZeroExtensionDistribution,
    /// Number of distinct contracted graphs that entered the LP.
    pub distinct_contractions: usize,
}

fn dense_weights(g: &Graph, map: &[usize]) -> Vec<f64> {
    let k = g.k();
    let mut w = vec![0.0; k * k];
    for e in g.edges() {
        let (a, b) = (map[e.u], map[e.v]);
        if a != b {
            w[a.min(b) * k + a.max(b)] += e.cap;
        }
    }
    w
}

fn dense_cut(k: usize, w: &[f64], bits: u64) -> f64 {
    let mut total = 0.0;
    for a in 0..k {
        for b in a + 1..k {
            if (bits >> a & 1) != (bits >> b & 1) {
                total += w[a * k + b];
            }
        }
    }
    total
}

/// Minimum `alpha` such that some distribution over 0-extensions has
/// `h_K(A) <= E[h_{G_f}(A)] <= alpha h_K(A)` for every `A`, with `0/0 = 1`.
pub fn contraction_quality(g: &Graph) -> Result<ContractionQuality> {
    contraction_quality_with(g, EnumerationCap::default())
}

pub fn contraction_quality_with(g: &Graph, cap: EnumerationCap) -> Result<ContractionQuality> {
    let en = Enumerator::new(g, cap)?;
    let k = g.k();
    if k > 16 {
        return Err(Error::size(format!(
            "contraction quality needs k <= 16, got {k}"
        )));
    }
    if k == 1 {
        return Ok(ContractionQuality {
            alpha: 1.0,
            distribution: ZeroExtensionDistribution {
                entries: vec![(ZeroExtension::constant(g, 0)?, 1.0)],
            },
            distinct_contractions: 1,
        });
    }
    let hk = TerminalCutOracle::new(g).all_cuts()?;
    let top = 1u64 << (k - 1);

    let keys: Vec<Vec<i64>> = (0..en.total)
        .into_par_iter()
        .map(|idx| {
            dense_weights(g, &en.decode(idx))
                .iter()
                .map(|w| (w * 1e9).round() as i64)
                .collect()
        })
        .collect();
    let mut seen: HashMap<&[i64], usize> = HashMap::new();
    let mut reps: Vec<u64> = Vec::new();
    for (idx, key) in keys.iter().enumerate() {
        seen.entry(key.as_slice()).or_insert_with(|| {
            reps.push(idx as u64);
            reps.len() - 1
        });
    }
    let columns: Vec<Vec<f64>> = reps
        .iter()
        .map(|&idx| {
            let w = dense_weights(g, &en.decode(idx));
            (1..top).map(|bits| dense_cut(k, &w, bits)).collect()
        })
        .collect();

    let mut p = LpProblem::new(Sense::Minimize);
    let gamma: Vec<usize> = (0..columns.len())
        .map(|c| p.add_nonneg(format!("g{c}"), 0.0))
        .collect();
    let alpha = p.add_nonneg("alpha", 1.0);
    p.add_constraint(gamma.iter().map(|&v| (v, 1.0)).collect(), Relation::Eq, 1.0);
    let scale = hk.iter().fold(0.0f64, |a, &b| a.max(b));
    for bits in 1..top {
        let h = hk[bits as usize];
        let row: Vec<(usize, f64)> = gamma
            .iter()
            .zip(&columns)
            .map(|(&v, col)| (v, col[bits as usize - 1]))
            .collect();
        if h > 1e-12 * (1.0 + scale) {
            p.add_constraint(row.clone(), Relation::Ge, h);
            let mut upper = row;
            upper.push((alpha, -h));
            p.add_constraint(upper, Relation::Le, 0.0);
        } else {
            p.add_constraint(row, Relation::Le, 0.0);
        }
    }
    let sol = lp::solve_lp(&p)?;
    if !sol.is_optimal() {
        return Err(Error::internal(format!(
            "contraction quality LP is {:?}",
            sol.status
        )));
    }
    let mut entries: Vec<(ZeroExtension, f64)> = gamma
        .iter()
        .zip(&reps)
        .filter(|(&v, _)| sol.values[v] > 1e-12)
        .map(|(&v, &idx)| {
            (
                ZeroExtension {
                    map: en.decode(idx),
                },
                sol.values[v],
            )
        })
        .collect();
    let total: f64 = entries.iter().map(|e| e.1).sum();
    for e in &mut entries {
        e.1 /= total;
    }
    Ok(ContractionQuality {
        alpha: sol.values[alpha].max(1.0),
        distribution: ZeroExtensionDistribution { entries },
        distinct_contractions: columns.len(),
    })
}

fn check_terminal_metric(g: &Graph, d: &Metric) -> Result<()> {
    if d.len() != g.k() {
        return Err(Error::input(format!(
            "terminal metric has {} points, graph has {} terminals",
            d.len(),
            g.k()
        )));
    }
    if d.has_infinite() {
        return Err(Error::input("terminal metric must be finite"));
    }
    d.validate()
}

/// Cost `sum c(u,v) D(f(u), f(v))` of a 0-extension.
pub fn zero_extension_cost(g: &Graph, d: &Metric, f: &ZeroExtension) -> f64 {
    g.edges()
        .iter()
        .map(|e| e.cap * d.get(f.get(e.u), f.get(e.v)))
        .sum()
}

/// Exact minimum-cost 0-extension; ties go to the lexicographically
/// smallest assignment.
pub fn opt_zero_extension(g: &Graph, d: &Metric) -> Result<(f64, ZeroExtension)> {
    opt_zero_extension_with(g, d, EnumerationCap::default())
}

pub fn opt_zero_extension_with(
    g: &Graph,
    d: &Metric,
    cap: EnumerationCap,
) -> Result<(f64, ZeroExtension)> {
    check_terminal_metric(g, d)?;
    let en = Enumerator::new(g, cap)?;
    let (cost, idx) = (0..en.total)
        .into_par_iter()
        .map(|idx| {
            let f = ZeroExtension {
                map: en.decode(idx),
            };
            (zero_extension_cost(g, d, &f), idx)
        })
        .reduce(
            || (f64::INFINITY, u64::MAX),
            |a, b| if (b.0, b.1) < (a.0, a.1) { b } else { a },
        );
    Ok((
        cost,
        ZeroExtension {
            map: en.decode(idx),
        },
    ))
}

/// Semi-metric relaxation: minimum of `sum c(u,v) delta(u,v)` over
/// semi-metrics on `V` that agree with `D` on the terminals.
pub fn semi_metric_opt(g: &Graph, d: &Metric) -> Result<f64> {
    check_terminal_metric(g, d)?;
    let n = g.node_count();
    let mut p = LpProblem::new(Sense::Minimize);
    let mut var = vec![usize::MAX; n * n];
    for u in 0..n {
        for v in u + 1..n {
            let cost = g.edge_index(u, v).map_or(0.0, |e| g.edges()[e].cap);
            let id = match (g.terminal_position(u), g.terminal_position(v)) {
                (Some(a), Some(b)) => {
                    let x = d.get(a, b);
                    p.add_var(format!("d{u}_{v}"), x, Some(x), cost)
                }
                _ => p.add_nonneg(format!("d{u}_{v}"), cost),
            };
            var[u * n + v] = id;
            var[v * n + u] = id;
        }
    }
    for u in 0..n {
        for w in u + 1..n {
            for v in 0..n {
                if v == u || v == w {
                    continue;
                }
                p.add_constraint(
                    vec![
                        (var[u * n + w], 1.0),
                        (var[u * n + v], -1.0),
                        (var[v * n + w], -1.0),
                    ],
                    Relation::Le,
                    0.0,
                );
            }
        }
    }
    let sol = lp::solve_lp(&p)?;
    if !sol.is_optimal() {
        return Err(Error::internal(format!(
            "semi-metric LP is {:?}",
            sol.status
        )));
    }
    Ok(sol.objective)
}

/// An explicit nonnegative combination of terminal cut metrics; each cut is
/// a list of terminal positions.
pub type CutDecomposition = Vec<(Vec<usize>, f64)>;

/// Bitmask of a terminal-position list, rejecting out-of-range entries.
pub fn positions_to_bits(k: usize, side: &[usize]) -> Result<u64> {
    let mut bits = 0u64;
    for &a in side {
        if a >= k {
            return Err(Error::input(format!("terminal position {a} out of range")));
        }
        bits |= 1 << a;
    }
    Ok(bits)
}

/// Checks that `witness` reproduces `D` on every terminal pair within 1e-9.
pub fn check_cut_decomposition(d: &Metric, witness: &CutDecomposition) -> Result<()> {
    let k = d.len();
    let mut masks = Vec::with_capacity(witness.len());
    for (side, w) in witness {
        if !w.is_finite() || *w < 0.0 {
            return Err(Error::input("cut weights must be nonnegative"));
        }
        masks.push((positions_to_bits(k, side)?, *w));
    }
    for a in 0..k {
        for b in a + 1..k {
            let sum: f64 = masks
                .iter()
                .filter(|(m, _)| (m >> a & 1) != (m >> b & 1))
                .map(|(_, w)| w)
                .sum();
            if (sum - d.get(a, b)).abs() > 1e-9 * (1.0 + d.get(a, b)) {
                return Err(Error::input(format!(
                    "cut decomposition gives {sum} for pair ({a}, {b}), metric has {}",
                    d.get(a, b)
                )));
            }
        }
    }
    Ok(())
}

/// `sum delta(U) h_K(U)` for an explicit decomposition.
pub fn cut_decomposition_cost(g: &Graph, witness: &CutDecomposition) -> Result<f64> {
    let oracle = TerminalCutOracle::new(g);
    let mut total = 0.0;
    for (side, w) in witness {
        let nodes: Vec<usize> = side
            .iter()
            .map(|&a| {
                g.terminals()
                    .get(a)
                    .copied()
                    .ok_or_else(|| Error::input("bad terminal position"))
            })
            .collect::<Result<_>>()?;
        total += w * oracle.cut(&nodes)?.value;
    }
    Ok(total)
}

/// Cut-Cut relaxation: minimum of `sum delta(A) h_K(A)` over nonnegative
/// combinations of terminal cuts reproducing `D`. Requires an explicit cut
/// decomposition of `D` as proof that `D` is an L1 metric.
pub fn cut_cut_opt(g: &Graph, d: &Metric, witness: &CutDecomposition) -> Result<f64> {
    if d.len() != g.k() {
        return Err(Error::input(
            "terminal metric size does not match the terminal count",
        ));
    }
    check_cut_decomposition(d, witness)?;
    let k = g.k();
    if k > 20 {
        return Err(Error::size(format!("Cut-Cut LP needs k <= 20, got {k}")));
    }
    if k < 2 {
        return Ok(0.0);
    }
    let hk = TerminalCutOracle::new(g).all_cuts()?;
    let top = 1u64 << (k - 1);
    let mut p = LpProblem::new(Sense::Minimize);
    let cols: Vec<usize> = (1..top)
        .map(|b| p.add_nonneg(format!("x{b}"), hk[b as usize]))
        .collect();
    for a in 0..k {
        for b in a + 1..k {
            let row = (1..top)
                .zip(&cols)
                .filter(|(m, _)| (m >> a & 1) != (m >> b & 1))
                .map(|(_, &v)| (v, 1.0))
                .collect();
            p.add_constraint(row, Relation::Eq, d.get(a, b));
        }
    }
    let sol = lp::solve_lp(&p)?;
    if !sol.is_optimal() {
        return Err(Error::internal(format!("Cut-Cut LP is {:?}", sol.status)));
    }
    Ok(sol.objective)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generators;

    fn path_avb() -> Graph {
        Graph::from_named(
            &["a", "v", "b"],
            &[("a", "v", 1.0), ("v", "b", 1.0)],
            &["a", "b"],
        )
        .unwrap()
    }

    fn metric(k: usize, f: impl FnMut(usize, usize) -> f64) -> Metric {
        Metric::from_fn((0..k).map(|i| format!("t{i}")).collect(), f)
    }

    #[test]
    fn apply_examples() {
        let g = path_avb();
        let f = ZeroExtension::new(&g, vec![0, 0, 1]).unwrap();
        let h = apply_zero_extension(&g, &f).unwrap();
        assert_eq!(h.get(0, 1), 1.0);

        let star = generators::star(3).unwrap();
        let f = ZeroExtension::constant(&star, 0).unwrap();
        let h = apply_zero_extension(&star, &f).unwrap();
        assert_eq!(h.get(0, 1), 1.0);
        assert_eq!(h.get(0, 2), 1.0);
        assert_eq!(h.get(1, 2), 0.0);

        assert!(ZeroExtension::new(&g, vec![1, 0, 1]).is_err());
        assert!(ZeroExtension::new(&g, vec![0, 0]).is_err());
    }

    #[test]
    fn quality_examples() {
        let g = generators::complete(3, None).unwrap();
        assert!((contraction_quality(&g).unwrap().alpha - 1.0).abs() < 1e-9);
        assert!((contraction_quality(&path_avb()).unwrap().alpha - 1.0).abs() < 1e-9);
        let q = contraction_quality(&generators::star(3).unwrap()).unwrap();
        assert!((q.alpha - 4.0 / 3.0).abs() < 1e-9);
        assert_eq!(q.distribution.entries.len(), 3);
        for (_, p) in &q.distribution.entries {
            assert!((p - 1.0 / 3.0).abs() < 1e-9);
        }
        q.distribution.validate().unwrap();
    }

    #[test]
    fn enumeration_cap() {
        let g = generators::path(12, &[0, 11]).unwrap();
        assert!(matches!(contraction_quality(&g), Err(Error::Size(_))));
    }

    #[test]
    fn zero_extension_examples() {
        let g = path_avb();
        let d = metric(2, |_, _| 2.0);
        let (cost, _) = opt_zero_extension(&g, &d).unwrap();
        assert_eq!(cost, 2.0);
        assert!((semi_metric_opt(&g, &d).unwrap() - 2.0).abs() < 1e-9);

        let star = generators::star(3).unwrap();
        let uniform = metric(3, |_, _| 1.0);
        assert_eq!(opt_zero_extension(&star, &uniform).unwrap().0, 2.0);

        let zero = metric(2, |_, _| 0.0);
        assert_eq!(semi_metric_opt(&g, &zero).unwrap(), 0.0);
        assert_eq!(cut_cut_opt(&g, &zero, &vec![]).unwrap(), 0.0);
    }

    #[test]
    fn cut_cut_single_edge() {
        let g = Graph::from_named(&["a", "b"], &[("a", "b", 2.5)], &["a", "b"]).unwrap();
        let d = metric(2, |_, _| 1.0);
        let w = vec![(vec![0], 1.0)];
        assert!((cut_cut_opt(&g, &d, &w).unwrap() - 2.5).abs() < 1e-9);
        assert!(cut_cut_opt(&g, &d, &vec![(vec![0], 0.5)]).is_err());
    }

    #[test]
    fn rejects_non_metric() {
        let g = generators::star(3).unwrap();
        let mut d = metric(3, |_, _| 1.0);
        d.set(0, 1, 5.0);
        assert!(semi_metric_opt(&g, &d).is_err());
    }
}
