//! Linear programming: problem model, dense two-phase simplex, and the
//! text dump format.

mod dump;
mod simplex;

use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::OnceLock;

use crate::error::{Error, Result};

pub use simplex::{PivotRule, SolverOptions};

/// Primal feasibility tolerance reported on every solve.
pub const FEASIBILITY_TOL: f64 = 1e-7;
/// Optimality / duality-gap tolerance.
pub const OPTIMALITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    /// May be `-inf` for a free variable.
    pub lower: f64,
    pub upper: Option<f64>,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub sense: Sense,
    pub vars: Vec<Variable>,
    pub constraints: Vec<Constraint>,
}

impl LpProblem {
    pub fn new(sense: Sense) -> Self {
        LpProblem {
            sense,
            vars: Vec::new(),
            constraints: Vec::new(),
        }
    }

    /// Adds a variable and returns its index.
    pub fn add_var(
        &mut self,
        name: impl Into<String>,
        lower: f64,
        upper: Option<f64>,
        cost: f64,
    ) -> usize {
        self.vars.push(Variable {
            name: name.into(),
            lower,
            upper,
            cost,
        });
        self.vars.len() - 1
    }

    /// Adds a nonnegative variable.
    pub fn add_nonneg(&mut self, name: impl Into<String>, cost: f64) -> usize {
        self.add_var(name, 0.0, None, cost)
    }

    /// Adds a constraint and returns its index. Duplicate variable entries
    /// in `coeffs` are summed.
    pub fn add_constraint(
        &mut self,
        coeffs: Vec<(usize, f64)>,
        relation: Relation,
        rhs: f64,
    ) -> usize {
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
        self.constraints.len() - 1
    }

    pub fn validate(&self) -> Result<()> {
        for (j, v) in self.vars.iter().enumerate() {
            if !v.cost.is_finite() {
                return Err(Error::input(format!("variable {j} has non-finite cost")));
            }
            if v.lower.is_nan() || v.lower == f64::INFINITY {
                return Err(Error::input(format!(
                    "variable {j} has invalid lower bound"
                )));
            }
            if let Some(u) = v.upper {
                if !u.is_finite() || u < v.lower {
                    return Err(Error::input(format!(
                        "variable {j} has invalid upper bound"
                    )));
                }
            }
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if !c.rhs.is_finite() {
                return Err(Error::input(format!("constraint {i} has non-finite rhs")));
            }
            for &(j, a) in &c.coeffs {
                if j >= self.vars.len() {
                    return Err(Error::input(format!(
                        "constraint {i} references undeclared variable {j}"
                    )));
                }
                if !a.is_finite() {
                    return Err(Error::input(format!(
                        "constraint {i} has a non-finite coefficient"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Objective value of an assignment.
    pub fn objective_of(&self, values: &[f64]) -> f64 {
        self.vars.iter().zip(values).map(|(v, x)| v.cost * x).sum()
    }

    /// Largest violation of any constraint or bound by `values`.
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (v, &x) in self.vars.iter().zip(values) {
            worst = worst.max(v.lower - x);
            if let Some(u) = v.upper {
                worst = worst.max(x - u);
            }
        }
        for c in &self.constraints {
            let lhs: f64 = c.coeffs.iter().map(|&(j, a)| a * values[j]).sum();
            let viol = match c.relation {
                Relation::Le => lhs - c.rhs,
                Relation::Ge => c.rhs - lhs,
                Relation::Eq => (lhs - c.rhs).abs(),
            };
            worst = worst.max(viol);
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective: f64,
    pub values: Vec<f64>,
    /// Shadow price of each constraint, `d objective / d rhs`. For a
    /// maximization, `<=` rows have nonnegative duals and `>=` rows
    /// nonpositive; signs flip for a minimization.
    pub duals: Vec<f64>,
    pub pivots: usize,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    /// Lagrangian bound on the optimum implied by `duals`: an upper bound
    /// for maximization and a lower bound for minimization, valid for any
    /// sign-feasible duals. Equals the optimum at an optimal basis.
    pub fn dual_bound(&self, p: &LpProblem) -> f64 {
        let mut reduced: Vec<f64> = p.vars.iter().map(|v| v.cost).collect();
        let mut bound = 0.0;
        for (c, &y) in p.constraints.iter().zip(&self.duals) {
            bound += c.rhs * y;
            for &(j, a) in &c.coeffs {
                reduced[j] -= a * y;
            }
        }
        let maximize = p.sense == Sense::Maximize;
        for (v, &r) in p.vars.iter().zip(&reduced) {
            // Optimize r * x over the variable's box.
            let pick_upper = if maximize { r > 0.0 } else { r < 0.0 };
            if r == 0.0 {
                continue;
            }
            let x = if pick_upper {
                v.upper.unwrap_or(f64::INFINITY)
            } else {
                v.lower
            };
            bound += r * x;
        }
        bound
    }
}

static DUMP_DIR: OnceLock<PathBuf> = OnceLock::new();
static DUMP_COUNTER: AtomicUsize = AtomicUsize::new(0);

/// Enables writing every solved problem to `dir/lp-NNNNN.txt`.
pub fn set_dump_dir(dir: PathBuf) {
    let _ = DUMP_DIR.set(dir);
}

/// Solves `p` with the default pivot rule.
pub fn solve_lp(p: &LpProblem) -> Result<LpSolution> {
    solve_lp_with(p, &SolverOptions::default())
}

pub fn solve_lp_with(p: &LpProblem, opts: &SolverOptions) -> Result<LpSolution> {
    p.validate()?;
    if let Some(dir) = DUMP_DIR.get() {
        let id = DUMP_COUNTER.fetch_add(1, Ordering::Relaxed);
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(format!("lp-{id:05}.txt")), p.to_text())?;
    }
    simplex::solve(p, opts)
}

#[cfg(test)]
mod tests;
