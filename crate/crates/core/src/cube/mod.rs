//! The hypercube instance: `2^d` cube nodes `y_s` joined by unit edges, each
//! with a pendant terminal `z_s` attached by an edge of capacity `sqrt(d)`.
//!
//! Points of `{0,1}^d` are stored as integers; in names, character `i`
//! (1-based) of the bit string is bit `d - i`, so `s_1` is the top bit.

mod bounds;
mod fourier;
mod noise;

pub use bounds::{
    cut_ratio_extremes, lp_cut_family, quality_bruteforce, sigma_metric,
    small_set_expansion_report, symmetric_lp_feasible, symmetric_lp_min_alpha, CutRatios,
    ExpansionEntry, ExpansionReport, LpCut, SymmetricBound,
};
pub use fourier::{noise_stability, wht, wht_in_place, FourierSpectrum};
pub use noise::{
    direct_cut_value, fourier_cut_value, noise_rho, noise_sparsifier, noise_weights,
    routability_check, routability_closed_form, routability_full_lp, SymmetricSparsifier,
};

use crate::error::{Error, Result};
use crate::graph::Graph;

pub const MAX_DIMENSION: usize = 14;

#[derive(Debug, Clone, PartialEq)]
pub struct CubeInstance {
    pub d: usize,
    pub graph: Graph,
}

/// Bit string of `s` with the top bit first.
pub fn bit_string(d: usize, s: usize) -> String {
    (1..=d)
        .map(|i| if s >> (d - i) & 1 == 1 { '1' } else { '0' })
        .collect()
}

pub fn build_cube_instance(d: usize) -> Result<CubeInstance> {
    if !(1..=MAX_DIMENSION).contains(&d) {
        return Err(Error::size(format!(
            "cube dimension must be in 1..={MAX_DIMENSION}, got {d}"
        )));
    }
    let k = 1usize << d;
    let names: Vec<String> = (0..k)
        .map(|s| format!("y_{}", bit_string(d, s)))
        .chain((0..k).map(|s| format!("z_{}", bit_string(d, s))))
        .collect();
    let pendant = (d as f64).sqrt();
    let mut edges = Vec::with_capacity(k * (d + 2) / 2);
    for s in 0..k {
        for b in 0..d {
            let t = s ^ (1 << b);
            if s < t {
                edges.push((s, t, 1.0));
            }
        }
        edges.push((s, k + s, pendant));
    }
    let graph = Graph::new(names, edges, (k..2 * k).collect())?;
    Ok(CubeInstance { d, graph })
}

impl CubeInstance {
    pub fn k(&self) -> usize {
        1 << self.d
    }

    /// Node index of `y_s`.
    pub fn y(&self, s: usize) -> usize {
        s
    }

    /// Node index of `z_s`; its terminal position is `s`.
    pub fn z(&self, s: usize) -> usize {
        self.k() + s
    }
}

/// Terminal cuts with names used by the lower-bound argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CubeCut {
    /// `{ s : |s| <= floor(d/2) }`.
    Majority,
    /// `{ s : s_1 = ... = s_j = 0 }`.
    Subcube(usize),
    /// `{ s : s_i = 1 }`.
    Axis(usize),
    Singleton(usize),
}

fn binom(n: usize, r: usize) -> f64 {
    if r > n {
        return 0.0;
    }
    let r = r.min(n - r);
    (0..r)
        .fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
        .round()
}

impl CubeCut {
    pub fn name(&self) -> String {
        match self {
            CubeCut::Majority => "majority".into(),
            CubeCut::Subcube(j) => format!("subcube({j})"),
            CubeCut::Axis(i) => format!("axis({i})"),
            CubeCut::Singleton(s) => format!("singleton({s})"),
        }
    }

    fn check(&self, d: usize) -> Result<()> {
        let ok = match *self {
            CubeCut::Majority => true,
            CubeCut::Subcube(j) | CubeCut::Axis(j) => (1..=d).contains(&j),
            CubeCut::Singleton(s) => s < 1 << d,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::input(format!(
                "{} is not a cut of the {d}-cube",
                self.name()
            )))
        }
    }

    pub fn contains(&self, d: usize, s: usize) -> bool {
        match *self {
            CubeCut::Majority => s.count_ones() as usize <= d / 2,
            CubeCut::Subcube(j) => s >> (d - j) == 0,
            CubeCut::Axis(i) => s >> (d - i) & 1 == 1,
            CubeCut::Singleton(t) => s == t,
        }
    }

    /// Membership mask over terminal positions.
    pub fn members(&self, d: usize) -> Result<Vec<bool>> {
        self.check(d)?;
        Ok((0..1usize << d).map(|s| self.contains(d, s)).collect())
    }

    /// `E_h(A)` for `h = 0..=d`: the number of pairs `s in A`, `t not in A`
    /// at Hamming distance `h`, from closed-form counts.
    pub fn separation_counts(&self, d: usize) -> Result<Vec<f64>> {
        self.check(d)?;
        let mut e = vec![0.0; d + 1];
        match *self {
            CubeCut::Subcube(j) => {
                for (h, x) in e.iter_mut().enumerate().skip(1) {
                    *x = 2f64.powi((d - j) as i32) * (binom(d, h) - binom(d - j, h));
                }
            }
            CubeCut::Axis(_) => {
                for (h, x) in e.iter_mut().enumerate().skip(1) {
                    *x = 2f64.powi(d as i32 - 1) * binom(d - 1, h - 1);
                }
            }
            CubeCut::Singleton(_) => {
                for (h, x) in e.iter_mut().enumerate().skip(1) {
                    *x = binom(d, h);
                }
            }
            CubeCut::Majority => {
                let m = d / 2;
                // From a point of weight a, flip x ones and h - x zeros.
                for a in 0..=m {
                    for h in 1..=d {
                        for x in 0..=h.min(a) {
                            if a - x + (h - x) > m {
                                e[h] += binom(d, a) * binom(a, x) * binom(d - a, h - x);
                            }
                        }
                    }
                }
            }
        }
        Ok(e)
    }
}

/// Majority, every subcube, every axis cut, and the singleton at `0`.
pub fn named_cuts(d: usize) -> Vec<CubeCut> {
    let mut v = vec![CubeCut::Majority];
    v.extend((1..=d).map(CubeCut::Subcube));
    v.extend((1..=d).map(CubeCut::Axis));
    v.push(CubeCut::Singleton(0));
    v
}

/// `E_h(A)` by direct enumeration over pairs.
pub fn separation_counts(d: usize, members: &[bool]) -> Result<Vec<f64>> {
    if members.len() != 1 << d {
        return Err(Error::input(format!(
            "expected {} membership flags, got {}",
            1usize << d,
            members.len()
        )));
    }
    let mut e = vec![0u64; d + 1];
    let outside: Vec<usize> = (0..members.len()).filter(|&t| !members[t]).collect();
    for s in (0..members.len()).filter(|&s| members[s]) {
        for &t in &outside {
            e[(s ^ t).count_ones() as usize] += 1;
        }
    }
    Ok(e.into_iter().map(|x| x as f64).collect())
}
