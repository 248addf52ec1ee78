//! The noise-sensitive candidate sparsifier: `z_s` and `z_t` are joined with
//! weight `sqrt(d) Pr[u = t]` for `u` a `rho`-correlated copy of `s`.

use crate::error::{Error, Result};
use crate::flows::max_concurrent_flow;
use crate::lp::{self, LpProblem, LpStatus, Relation, Sense};
use crate::sparsifier::Sparsifier;

use super::fourier::{noise_stability, wht};
use super::{bit_string, build_cube_instance, CubeInstance};

/// Largest dimension for which the `k^2 / 2` pair weights are materialized.
pub const MAX_MATERIALIZED_DIMENSION: usize = 11;

/// `rho = 1 - 1/sqrt(d)`.
pub fn noise_rho(d: usize) -> f64 {
    1.0 - 1.0 / (d as f64).sqrt()
}

/// Pair weights that depend only on Hamming distance.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricSparsifier {
    pub d: usize,
    /// `omega[h]`: weight of each terminal pair at distance `h`; `omega[0]`
    /// is unused and zero.
    pub omega: Vec<f64>,
}

impl SymmetricSparsifier {
    pub fn new(d: usize, omega: Vec<f64>) -> Result<Self> {
        if omega.len() != d + 1
            || omega[0] != 0.0
            || omega.iter().any(|w| !w.is_finite() || *w < 0.0)
        {
            return Err(Error::input(
                "class weights must be d + 1 nonnegative values with omega[0] = 0",
            ));
        }
        Ok(SymmetricSparsifier { d, omega })
    }

    pub fn weight(&self, s: usize, t: usize) -> f64 {
        self.omega[(s ^ t).count_ones() as usize]
    }

    /// Total weight at one terminal: `sum_h omega[h] C(d, h)`.
    pub fn incident_weight(&self) -> f64 {
        let d = self.d;
        let mut c = 1.0;
        let mut total = 0.0;
        for h in 1..=d {
            c = c * (d - h + 1) as f64 / h as f64;
            total += self.omega[h] * c;
        }
        total
    }

    pub fn to_sparsifier(&self, inst: &CubeInstance) -> Result<Sparsifier> {
        if inst.d != self.d {
            return Err(Error::input("sparsifier and instance dimensions differ"));
        }
        if self.d > MAX_MATERIALIZED_DIMENSION {
            return Err(Error::size(format!(
                "materializing pair weights needs d <= {MAX_MATERIALIZED_DIMENSION}, got {}",
                self.d
            )));
        }
        let k = inst.k();
        let mut h = Sparsifier::on_terminals(&inst.graph);
        for s in 0..k {
            for t in s + 1..k {
                let w = self.weight(s, t);
                if w > 0.0 {
                    h.add(s, t, w)?;
                }
            }
        }
        Ok(h)
    }

    /// `sum_{s in A, t not in A} weight(s, t)`.
    pub fn cut(&self, members: &[bool]) -> Result<f64> {
        check_members(self.d, members)?;
        let outside: Vec<usize> = (0..members.len()).filter(|&t| !members[t]).collect();
        Ok((0..members.len())
            .filter(|&s| members[s])
            .map(|s| outside.iter().map(|&t| self.weight(s, t)).sum::<f64>())
            .sum())
    }
}

fn check_members(d: usize, members: &[bool]) -> Result<()> {
    if members.len() != 1 << d {
        return Err(Error::input(format!(
            "expected {} membership flags, got {}",
            1usize << d,
            members.len()
        )));
    }
    Ok(())
}

/// `omega[h] = sqrt(d) p^h q^(d-h)` with `p = (1 - rho)/2`, `q = (1 + rho)/2`.
/// The `u = t` mass has no edge, so each terminal carries
/// `sqrt(d) (1 - q^d)` rather than `sqrt(d)`.
pub fn noise_weights(d: usize) -> SymmetricSparsifier {
    let rho = noise_rho(d);
    let (p, q) = ((1.0 - rho) / 2.0, (1.0 + rho) / 2.0);
    let sd = (d as f64).sqrt();
    let omega = (0..=d)
        .map(|h| {
            if h == 0 {
                0.0
            } else {
                sd * p.powi(h as i32) * q.powi((d - h) as i32)
            }
        })
        .collect();
    SymmetricSparsifier { d, omega }
}

/// The noise sparsifier on the terminals of the `d`-instance.
pub fn noise_sparsifier(d: usize) -> Result<Sparsifier> {
    let inst = build_cube_instance(d)?;
    noise_weights(d).to_sparsifier(&inst)
}

/// Cut of the noise sparsifier by direct summation over separated pairs.
pub fn direct_cut_value(d: usize, members: &[bool]) -> Result<f64> {
    noise_weights(d).cut(members)
}

/// Cut of the noise sparsifier from noise stability:
/// `h'(A) = k sqrt(d)/4 (1 - NS_rho(f_A))` with `f_A = -1` on `A`.
pub fn fourier_cut_value(d: usize, members: &[bool]) -> Result<f64> {
    check_members(d, members)?;
    let f: Vec<f64> = members
        .iter()
        .map(|&m| if m { -1.0 } else { 1.0 })
        .collect();
    let ns = noise_stability(&wht(&f)?, noise_rho(d));
    let k = members.len() as f64;
    Ok(k * (d as f64).sqrt() / 4.0 * (1.0 - ns))
}

/// `cong_G(vec H)` for the noise sparsifier via the symmetry-reduced LP.
///
/// Translations of the cube act transitively on terminals, so some optimal
/// routing is a translate of one single-source flow `F` out of `z_0`.
/// Under translation every edge of direction `i` carries the total of `F`
/// over all direction-`i` edges, and every pendant carries the incident
/// weight `W`. The LP minimizes `alpha` subject to
/// `sum_{e in dir i} |F(e)| <= alpha` and `alpha >= W / sqrt(d)`.
pub fn routability_check(d: usize) -> Result<f64> {
    if !(1..=10).contains(&d) {
        return Err(Error::size(format!(
            "reduced routing LP needs 1 <= d <= 10, got {d}"
        )));
    }
    let w = noise_weights(d);
    let k = 1usize << d;
    let mut p = LpProblem::new(Sense::Minimize);
    let alpha = p.add_var("alpha", w.incident_weight() / (d as f64).sqrt(), None, 1.0);
    let mut inflow: Vec<Vec<(usize, f64)>> = vec![Vec::new(); k];
    let mut classes: Vec<Vec<(usize, f64)>> = vec![Vec::new(); d];
    for s in 0..k {
        for b in 0..d {
            let t = s ^ (1 << b);
            let fwd = p.add_nonneg(format!("f_{}_{}", bit_string(d, s), bit_string(d, t)), 0.0);
            inflow[t].push((fwd, 1.0));
            inflow[s].push((fwd, -1.0));
            classes[b].push((fwd, 1.0));
        }
    }
    for (u, row) in inflow.into_iter().enumerate().skip(1) {
        p.add_constraint(row, Relation::Eq, w.weight(0, u));
    }
    for mut row in classes {
        row.push((alpha, -1.0));
        p.add_constraint(row, Relation::Le, 0.0);
    }
    let sol = lp::solve_lp(&p)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::internal("reduced routing LP not optimal"));
    }
    Ok(sol.objective)
}

/// `cong_G(vec H)` from the full edge-flow LP; `d <= 4`.
pub fn routability_full_lp(d: usize) -> Result<f64> {
    if !(1..=4).contains(&d) {
        return Err(Error::size(format!(
            "full routing LP needs 1 <= d <= 4, got {d}"
        )));
    }
    let inst = build_cube_instance(d)?;
    let h = noise_sparsifier(d)?;
    Ok(max_concurrent_flow(&inst.graph, &h.as_demand(&inst.graph)?)?.congestion)
}

/// Optimum of the reduced LP in closed form: shortest paths put total flow
/// `sqrt(d) E|u| = d sqrt(d) p` on the cube, which balances to `1/2` per
/// direction, so `cong = max(1 - q^d, 1/2)`.
pub fn routability_closed_form(d: usize) -> f64 {
    let q = (1.0 + noise_rho(d)) / 2.0;
    (1.0 - q.powi(d as i32)).max(0.5)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_by_distance() {
        let w = noise_weights(4);
        assert_eq!(w.omega[1], 27.0 / 128.0);
        let h = noise_sparsifier(4).unwrap();
        for s in 0..16 {
            for t in 0..16 {
                if s != t {
                    assert_eq!(h.get(s, t), w.weight(s, t));
                }
            }
        }
        for d in 1..=8 {
            let w = noise_weights(d);
            let q = (1.0 + noise_rho(d)) / 2.0;
            let expected = (d as f64).sqrt() * (1.0 - q.powi(d as i32));
            assert!((w.incident_weight() - expected).abs() < 1e-12);
            assert!(w.incident_weight() <= (d as f64).sqrt());
        }
    }

    #[test]
    fn dictator_cut() {
        let members: Vec<bool> = (0..16).map(|s| s >> 3 & 1 == 1).collect();
        assert!((fourier_cut_value(4, &members).unwrap() - 4.0).abs() < 1e-12);
        assert!((direct_cut_value(4, &members).unwrap() - 4.0).abs() < 1e-12);
        assert_eq!(fourier_cut_value(4, &[false; 16]).unwrap(), 0.0);
    }

    #[test]
    fn reduced_lp_matches_full_lp_and_closed_form() {
        for d in 1..=4 {
            let reduced = routability_check(d).unwrap();
            let full = routability_full_lp(d).unwrap();
            let closed = routability_closed_form(d);
            assert!((reduced - full).abs() < 1e-7, "d={d}: {reduced} vs {full}");
            assert!(
                (reduced - closed).abs() < 1e-9,
                "d={d}: {reduced} vs {closed}"
            );
        }
    }
}
