//! Quality measurements and the symmetric LP lower bound.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::contraction::CutDecomposition;
use crate::error::{Error, Result};
use crate::flow::TerminalCutOracle;
use crate::frt::trial_rng;
use crate::graph::Graph;
use crate::lp::{self, LpProblem, LpStatus, Relation, Sense};
use crate::metric::Metric;
use crate::sparsifier::Sparsifier;

use super::noise::fourier_cut_value;
use super::{build_cube_instance, named_cuts, CubeCut, CubeInstance};

/// One cut of the symmetric LP: separation counts `E_h(A)` and `h_K(A)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpCut {
    pub name: String,
    pub counts: Vec<f64>,
    pub h_k: f64,
}

/// Builds LP rows for `cuts`, with `h_K` from max-flow on the instance.
pub fn lp_cut_family(inst: &CubeInstance, cuts: &[CubeCut]) -> Result<Vec<LpCut>> {
    let oracle = TerminalCutOracle::new(&inst.graph);
    cuts.iter()
        .map(|cut| {
            let side: Vec<usize> = cut
                .members(inst.d)?
                .iter()
                .enumerate()
                .filter(|(_, &m)| m)
                .map(|(s, _)| inst.z(s))
                .collect();
            Ok(LpCut {
                name: cut.name(),
                counts: cut.separation_counts(inst.d)?,
                h_k: oracle.cut(&side)?.value,
            })
        })
        .collect()
}

/// The majority cut and every subcube cut.
fn default_family(d: usize) -> Vec<CubeCut> {
    named_cuts(d)
        .into_iter()
        .filter(|c| matches!(c, CubeCut::Majority | CubeCut::Subcube(_)))
        .collect()
}

fn check_family(d: usize, family: &[LpCut]) -> Result<()> {
    if family.is_empty() || family.iter().any(|c| c.counts.len() != d + 1) {
        return Err(Error::input("cut family rows must have d + 1 counts"));
    }
    Ok(())
}

/// Whether some class weights `omega >= 0` satisfy
/// `h_K(A) / alpha <= sum_h omega_h E_h(A) <= h_K(A)` on every cut.
pub fn symmetric_lp_feasible(d: usize, family: &[LpCut], alpha: f64) -> Result<bool> {
    check_family(d, family)?;
    if alpha.is_nan() || alpha <= 0.0 {
        return Err(Error::input("alpha must be positive"));
    }
    let mut p = LpProblem::new(Sense::Minimize);
    let omega: Vec<usize> = (1..=d)
        .map(|h| p.add_nonneg(format!("w{h}"), 0.0))
        .collect();
    for cut in family {
        let row: Vec<(usize, f64)> = omega
            .iter()
            .zip(&cut.counts[1..])
            .map(|(&v, &e)| (v, e))
            .collect();
        p.add_constraint(row.clone(), Relation::Le, cut.h_k);
        p.add_constraint(row, Relation::Ge, cut.h_k / alpha);
    }
    Ok(lp::solve_lp(&p)?.status == LpStatus::Optimal)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricBound {
    pub d: usize,
    /// Least `alpha` for which the symmetric LP is feasible.
    pub alpha: f64,
    /// Class weights attaining it, `omega[0] = 0`.
    pub omega: Vec<f64>,
    pub family: Vec<LpCut>,
}

/// Least feasible `alpha`, solved exactly as `1 / max beta` subject to
/// `beta h_K(A) <= sum_h omega_h E_h(A) <= h_K(A)`. With `family = None`
/// the majority and subcube cuts are used.
pub fn symmetric_lp_min_alpha(d: usize, family: Option<Vec<LpCut>>) -> Result<SymmetricBound> {
    let family = match family {
        Some(f) => f,
        None => lp_cut_family(&build_cube_instance(d)?, &default_family(d))?,
    };
    check_family(d, &family)?;
    let mut p = LpProblem::new(Sense::Maximize);
    let beta = p.add_nonneg("beta", 1.0);
    let omega: Vec<usize> = (1..=d)
        .map(|h| p.add_nonneg(format!("w{h}"), 0.0))
        .collect();
    for cut in &family {
        let row: Vec<(usize, f64)> = omega
            .iter()
            .zip(&cut.counts[1..])
            .map(|(&v, &e)| (v, e))
            .collect();
        p.add_constraint(row.clone(), Relation::Le, cut.h_k);
        let mut lower = row;
        lower.iter_mut().for_each(|x| x.1 = -x.1);
        lower.push((beta, cut.h_k));
        p.add_constraint(lower, Relation::Le, 0.0);
    }
    let sol = lp::solve_lp(&p)?;
    if sol.status != LpStatus::Optimal || sol.objective.is_nan() || sol.objective <= 0.0 {
        return Err(Error::internal(
            "symmetric LP has no positive lower scaling",
        ));
    }
    let mut w = vec![0.0];
    w.extend(omega.iter().map(|&v| sol.values[v].max(0.0)));
    Ok(SymmetricBound {
        d,
        alpha: 1.0 / sol.objective,
        omega: w,
        family,
    })
}

/// Extremes of `h'(U) / h_K(U)` over all terminal subsets, with `0/0 = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct CutRatios {
    pub max: f64,
    pub min: f64,
    pub argmax: u64,
    pub argmin: u64,
}

impl CutRatios {
    /// Quality in the `h' >= h_K` convention: `max h'/h_K`.
    pub fn quality(&self) -> f64 {
        self.max
    }

    /// Scaling `max h_K / h'` after which `h' >= h_K` holds everywhere.
    pub fn renormalization_factor(&self) -> f64 {
        1.0 / self.min
    }

    /// Quality of the renormalized sparsifier.
    pub fn renormalized_quality(&self) -> f64 {
        self.max / self.min
    }
}

pub const MAX_BRUTEFORCE_TERMINALS: usize = 16;

/// Exhaustive `h'(U) / h_K(U)` extremes.
pub fn cut_ratio_extremes(g: &Graph, h: &Sparsifier) -> Result<CutRatios> {
    h.check_matches(g)?;
    let k = g.k();
    if k > MAX_BRUTEFORCE_TERMINALS {
        return Err(Error::size(format!(
            "exhaustive quality needs k <= {MAX_BRUTEFORCE_TERMINALS}, got {k}"
        )));
    }
    if k < 2 {
        return Err(Error::input("quality needs at least two terminals"));
    }
    let oracle = TerminalCutOracle::new(g);
    // Complements give the same ratio, so fix the top terminal outside.
    let ratios: Vec<f64> = (1..1u64 << (k - 1))
        .into_par_iter()
        .map(|bits| {
            let hk = oracle.cut_bits(bits);
            let hp = h.cut_bits(bits);
            if hk == 0.0 {
                if hp == 0.0 {
                    1.0
                } else {
                    f64::INFINITY
                }
            } else {
                hp / hk
            }
        })
        .collect();
    let mut out = CutRatios {
        max: f64::NEG_INFINITY,
        min: f64::INFINITY,
        argmax: 0,
        argmin: 0,
    };
    for (i, &r) in ratios.iter().enumerate() {
        let bits = i as u64 + 1;
        if r > out.max {
            out.max = r;
            out.argmax = bits;
        }
        if r < out.min {
            out.min = r;
            out.argmin = bits;
        }
    }
    Ok(out)
}

/// `max_U h'(U) / h_K(U)` over all terminal subsets, with `0/0 = 1`.
pub fn quality_bruteforce(g: &Graph, h: &Sparsifier) -> Result<f64> {
    Ok(cut_ratio_extremes(g, h)?.quality())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionEntry {
    pub label: String,
    pub size: usize,
    pub bal: f64,
    pub value: f64,
    /// `h'(A) / (bal k min(ln(1/bal), sqrt d))`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionReport {
    pub d: usize,
    pub entries: Vec<ExpansionEntry>,
    pub min_ratio: f64,
}

fn expansion_entry(d: usize, label: String, members: &[bool]) -> Result<ExpansionEntry> {
    let k = members.len();
    let size = members.iter().filter(|&&m| m).count();
    let small = size.min(k - size);
    if small == 0 {
        return Err(Error::input("expansion needs a nonempty proper subset"));
    }
    let bal = small as f64 / k as f64;
    let value = fourier_cut_value(d, members)?;
    let scale = bal * k as f64 * (1.0 / bal).ln().min((d as f64).sqrt());
    Ok(ExpansionEntry {
        label,
        size,
        bal,
        value,
        ratio: value / scale,
    })
}

/// Noise-sparsifier expansion of named cuts and `samples` random subsets,
/// normalized by `bal(A) k min(ln(1/bal(A)), sqrt d)`. Subset sizes are
/// drawn log-uniformly in `1..=k/2`.
pub fn small_set_expansion_report(d: usize, samples: usize, seed: u64) -> Result<ExpansionReport> {
    if !(1..=10).contains(&d) {
        return Err(Error::size(format!(
            "expansion report needs 1 <= d <= 10, got {d}"
        )));
    }
    let k = 1usize << d;
    let mut entries = Vec::with_capacity(samples + 2 * d + 2);
    for cut in named_cuts(d) {
        entries.push(expansion_entry(d, cut.name(), &cut.members(d)?)?);
    }
    let sampled: Vec<Result<ExpansionEntry>> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i as u64);
            let exponent: f64 = rng.gen_range(0.0..(d - 1) as f64 + 1e-12);
            let size = (2f64.powf(exponent).round() as usize).clamp(1, k / 2);
            let mut members = vec![false; k];
            let mut points: Vec<usize> = (0..k).collect();
            points.shuffle(&mut rng);
            for &s in &points[..size] {
                members[s] = true;
            }
            expansion_entry(d, format!("sample({i})"), &members)
        })
        .collect();
    for e in sampled {
        entries.push(e?);
    }
    let min_ratio = entries
        .iter()
        .map(|e| e.ratio)
        .fold(f64::INFINITY, f64::min);
    Ok(ExpansionReport {
        d,
        entries,
        min_ratio,
    })
}

/// The metric `sigma` on the terminals of the `d`-instance (pendants of
/// length `sqrt d`, cube edges of length 1): `2 sqrt(d) + Hamming(s, t)`.
/// Its cut decomposition is the `d` axis cuts with weight 1 plus the `k`
/// singleton cuts with weight `sqrt d`.
pub fn sigma_metric(d: usize) -> Result<(Metric, CutDecomposition)> {
    let inst = build_cube_instance(d)?;
    let k = inst.k();
    let sd = (d as f64).sqrt();
    let names: Vec<String> = (0..k)
        .map(|s| inst.graph.name(inst.z(s)).to_string())
        .collect();
    let metric = Metric::from_fn(names, |s, t| {
        if s == t {
            0.0
        } else {
            2.0 * sd + (s ^ t).count_ones() as f64
        }
    });
    let mut cuts: CutDecomposition = (1..=d)
        .map(|i| {
            let side = (0..k)
                .filter(|&s| CubeCut::Axis(i).contains(d, s))
                .collect();
            (side, 1.0)
        })
        .collect();
    cuts.extend((0..k).map(|s| (vec![s], sd)));
    Ok((metric, cuts))
}
