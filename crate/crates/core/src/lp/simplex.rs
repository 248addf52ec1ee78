//! Dense two-phase tableau simplex.
//!
//! The problem is brought to `max c x, A x {<=,=,>=} b, x >= 0` with
//! `b >= 0`: finite lower bounds are shifted out, finite upper bounds become
//! rows (or a reflection when the lower bound is infinite), and free
//! variables are split. Every row then owns a unit column (slack or
//! artificial), which forms the starting basis. At the optimum the basis is
//! refactored with an LU decomposition to recover accurate primal values and
//! duals.

use nalgebra::{DMatrix, DVector};

use super::{LpProblem, LpSolution, LpStatus, Relation, Sense};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PivotRule {
    /// Largest reduced cost, switching to Bland's rule after a run of
    /// degenerate pivots and back once progress resumes.
    DantzigWithBlandFallback,
    /// Smallest-index rule throughout.
    Bland,
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub rule: PivotRule,
    /// Consecutive degenerate pivots tolerated before the Bland fallback.
    pub degenerate_streak: usize,
    /// Hard pivot limit; `None` derives one from the problem size.
    pub max_pivots: Option<usize>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            rule: PivotRule::DantzigWithBlandFallback,
            degenerate_streak: 50,
            max_pivots: None,
        }
    }
}

const PIVOT_TOL: f64 = 1e-9;
const DRIVE_OUT_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy)]
enum VarMap {
    /// `x = lower + col`.
    Shift { col: usize, lower: f64 },
    /// `x = upper - col`.
    Reflect { col: usize, upper: f64 },
    /// `x = pos - neg`.
    Split { pos: usize, neg: usize },
}

struct StandardForm {
    structural: usize,
    /// Sparse structural columns after row flips: `(row, value)`.
    columns: Vec<Vec<(usize, f64)>>,
    rhs: Vec<f64>,
    relation: Vec<Relation>,
    /// `-1` where the row was negated to make its rhs nonnegative.
    flip: Vec<f64>,
    cost: Vec<f64>,
    maps: Vec<VarMap>,
    original_rows: usize,
}

fn standard_form(p: &LpProblem) -> StandardForm {
    let sign = if p.sense == Sense::Maximize {
        1.0
    } else {
        -1.0
    };
    let mut maps = Vec::with_capacity(p.vars.len());
    let mut cost = Vec::new();
    let mut bound_rows = Vec::new();
    for v in &p.vars {
        let c = sign * v.cost;
        if v.lower.is_finite() {
            let col = cost.len();
            cost.push(c);
            maps.push(VarMap::Shift {
                col,
                lower: v.lower,
            });
            if let Some(u) = v.upper {
                bound_rows.push((col, u - v.lower));
            }
        } else if let Some(u) = v.upper {
            let col = cost.len();
            cost.push(-c);
            maps.push(VarMap::Reflect { col, upper: u });
        } else {
            let pos = cost.len();
            cost.push(c);
            cost.push(-c);
            maps.push(VarMap::Split { pos, neg: pos + 1 });
        }
    }
    let structural = cost.len();
    let m = p.constraints.len() + bound_rows.len();
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    let mut relation = Vec::with_capacity(m);
    for c in &p.constraints {
        let mut dense: std::collections::BTreeMap<usize, f64> = Default::default();
        let mut b = c.rhs;
        for &(j, a) in &c.coeffs {
            match maps[j] {
                VarMap::Shift { col, lower } => {
                    *dense.entry(col).or_default() += a;
                    b -= a * lower;
                }
                VarMap::Reflect { col, upper } => {
                    *dense.entry(col).or_default() -= a;
                    b -= a * upper;
                }
                VarMap::Split { pos, neg } => {
                    *dense.entry(pos).or_default() += a;
                    *dense.entry(neg).or_default() -= a;
                }
            }
        }
        rows.push(dense.into_iter().filter(|&(_, a)| a != 0.0).collect());
        rhs.push(b);
        relation.push(c.relation);
    }
    for (col, u) in bound_rows {
        rows.push(vec![(col, 1.0)]);
        rhs.push(u);
        relation.push(Relation::Le);
    }
    let mut flip = vec![1.0; m];
    for i in 0..m {
        if rhs[i] < 0.0 {
            flip[i] = -1.0;
            rhs[i] = -rhs[i];
            for e in &mut rows[i] {
                e.1 = -e.1;
            }
            relation[i] = match relation[i] {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }
    let mut columns = vec![Vec::new(); structural];
    for (i, row) in rows.iter().enumerate() {
        for &(j, a) in row {
            columns[j].push((i, a));
        }
    }
    StandardForm {
        structural,
        columns,
        rhs,
        relation,
        flip,
        cost,
        maps,
        original_rows: p.constraints.len(),
    }
}

struct Tableau {
    m: usize,
    width: usize,
    data: Vec<f64>,
    basis: Vec<usize>,
    /// First artificial column; artificials occupy `art_start..rhs_col`.
    art_start: usize,
    rhs_col: usize,
    pivots: usize,
    max_pivots: usize,
    cost_tol: f64,
}

#[derive(Debug, PartialEq, Eq)]
enum Outcome {
    Optimal,
    Unbounded,
}

impl Tableau {
    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.width + j]
    }

    fn obj_row(&self) -> usize {
        self.m
    }

    fn pivot(&mut self, r: usize, s: usize) {
        let w = self.width;
        let piv = self.at(r, s);
        let (before, rest) = self.data.split_at_mut(r * w);
        let (row_r, after) = rest.split_at_mut(w);
        for x in row_r.iter_mut() {
            *x /= piv;
        }
        row_r[s] = 1.0;
        let nz: Vec<usize> = (0..w).filter(|&j| row_r[j] != 0.0).collect();
        let update = |row: &mut [f64]| {
            let f = row[s];
            if f != 0.0 {
                for &j in &nz {
                    row[j] -= f * row_r[j];
                }
                row[s] = 0.0;
            }
        };
        before.chunks_mut(w).for_each(update);
        after.chunks_mut(w).for_each(update);
        self.basis[r] = s;
        self.pivots += 1;
    }

    /// Runs simplex iterations on the current objective row. Columns at or
    /// beyond `allowed_end` never enter.
    fn iterate(&mut self, allowed_end: usize, opts: &SolverOptions) -> Result<Outcome> {
        let obj = self.obj_row();
        let mut streak = 0usize;
        let mut bland = opts.rule == PivotRule::Bland;
        loop {
            if self.pivots >= self.max_pivots {
                return Err(Error::Numerical(format!(
                    "simplex pivot limit of {} reached",
                    self.max_pivots
                )));
            }
            let mut enter = None;
            let mut best = self.cost_tol;
            for j in 0..allowed_end {
                let r = self.at(obj, j);
                if r > best {
                    enter = Some(j);
                    if bland {
                        break;
                    }
                    best = r;
                }
            }
            let Some(s) = enter else {
                return Ok(Outcome::Optimal);
            };

            let mut leave: Option<(usize, f64, f64)> = None;
            for i in 0..self.m {
                let a = self.at(i, s);
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.at(i, self.rhs_col).max(0.0) / a;
                leave = match leave {
                    None => Some((i, ratio, a)),
                    Some((li, lr, la)) => {
                        let tie = (ratio - lr).abs() <= 1e-12 * (1.0 + lr.abs());
                        let better = if tie {
                            if bland {
                                self.basis[i] < self.basis[li]
                            } else {
                                a > la
                            }
                        } else {
                            ratio < lr
                        };
                        if better {
                            Some((i, ratio, a))
                        } else {
                            Some((li, lr, la))
                        }
                    }
                };
            }
            let Some((r, ratio, _)) = leave else {
                return Ok(Outcome::Unbounded);
            };
            if ratio * self.at(obj, s) <= 1e-12 {
                streak += 1;
                if opts.rule != PivotRule::Bland && streak > opts.degenerate_streak {
                    bland = true;
                }
            } else {
                streak = 0;
                if opts.rule != PivotRule::Bland {
                    bland = false;
                }
            }
            self.pivot(r, s);
        }
    }

    /// Loads reduced costs `c_j - c_B B^-1 A_j` for the objective `cost`.
    fn load_objective(&mut self, cost: &[f64]) {
        let obj = self.obj_row();
        let w = self.width;
        let mut row = vec![0.0; w];
        row[..cost.len()].copy_from_slice(cost);
        for i in 0..self.m {
            let cb = cost.get(self.basis[i]).copied().unwrap_or(0.0);
            if cb != 0.0 {
                for j in 0..w {
                    row[j] -= cb * self.at(i, j);
                }
            }
        }
        for &b in &self.basis {
            row[b] = 0.0;
        }
        self.data[obj * w..(obj + 1) * w].copy_from_slice(&row);
    }
}

pub(super) fn solve(p: &LpProblem, opts: &SolverOptions) -> Result<LpSolution> {
    let sf = standard_form(p);
    let m = sf.rhs.len();
    let n = sf.structural;
    let mut slack_of = vec![usize::MAX; m];
    let mut art_of = vec![usize::MAX; m];
    let mut next = n;
    for i in 0..m {
        if sf.relation[i] != Relation::Eq {
            slack_of[i] = next;
            next += 1;
        }
    }
    let art_start = next;
    for i in 0..m {
        if sf.relation[i] != Relation::Le {
            art_of[i] = next;
            next += 1;
        }
    }
    let rhs_col = next;
    let width = rhs_col + 1;
    let mut data = vec![0.0; (m + 1) * width];
    for (j, col) in sf.columns.iter().enumerate() {
        for &(i, a) in col {
            data[i * width + j] = a;
        }
    }
    let mut basis = vec![0; m];
    for i in 0..m {
        match sf.relation[i] {
            Relation::Le => {
                data[i * width + slack_of[i]] = 1.0;
                basis[i] = slack_of[i];
            }
            Relation::Ge => {
                data[i * width + slack_of[i]] = -1.0;
                data[i * width + art_of[i]] = 1.0;
                basis[i] = art_of[i];
            }
            Relation::Eq => {
                data[i * width + art_of[i]] = 1.0;
                basis[i] = art_of[i];
            }
        }
        data[i * width + rhs_col] = sf.rhs[i];
    }
    let max_cost = sf.cost.iter().fold(0.0f64, |a, c| a.max(c.abs()));
    let mut t = Tableau {
        m,
        width,
        data,
        basis,
        art_start,
        rhs_col,
        pivots: 0,
        max_pivots: opts.max_pivots.unwrap_or(50_000 + 50 * (m + width)),
        cost_tol: 1e-10 * max_cost.max(1.0),
    };

    // Phase 1: maximize minus the sum of artificials.
    if art_start < rhs_col {
        let mut phase1 = vec![0.0; rhs_col];
        for c in &mut phase1[art_start..] {
            *c = -1.0;
        }
        let saved = t.cost_tol;
        t.cost_tol = 1e-10;
        t.load_objective(&phase1);
        t.iterate(art_start, opts)?;
        t.cost_tol = saved;
        let infeasibility = t.at(m, rhs_col);
        let scale = 1.0 + sf.rhs.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        if infeasibility > 1e-9 * scale {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                objective: f64::NAN,
                values: Vec::new(),
                duals: Vec::new(),
                pivots: t.pivots,
            });
        }
        for i in 0..m {
            if t.basis[i] < art_start {
                continue;
            }
            let mut best = (DRIVE_OUT_TOL, None);
            for j in 0..art_start {
                let a = t.at(i, j).abs();
                if a > best.0 {
                    best = (a, Some(j));
                }
            }
            if let Some(j) = best.1 {
                t.pivot(i, j);
            }
        }
    }

    // Phase 2.
    t.load_objective(&sf.cost);
    if t.iterate(art_start, opts)? == Outcome::Unbounded {
        let objective = if p.sense == Sense::Maximize {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        };
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            objective,
            values: Vec::new(),
            duals: Vec::new(),
            pivots: t.pivots,
        });
    }

    let (x_std, y) = refine(&t, &sf, &slack_of, &art_of);
    let values: Vec<f64> = sf
        .maps
        .iter()
        .map(|map| match *map {
            VarMap::Shift { col, lower } => lower + x_std[col],
            VarMap::Reflect { col, upper } => upper - x_std[col],
            VarMap::Split { pos, neg } => x_std[pos] - x_std[neg],
        })
        .collect();
    let sense = if p.sense == Sense::Maximize {
        1.0
    } else {
        -1.0
    };
    let duals = (0..sf.original_rows)
        .map(|i| sense * sf.flip[i] * y[i])
        .collect();
    Ok(LpSolution {
        status: LpStatus::Optimal,
        objective: p.objective_of(&values),
        values,
        duals,
        pivots: t.pivots,
    })
}

/// Standard-form primal values and row duals at the final basis, from an
/// LU solve when the basis is well conditioned and from the tableau
/// otherwise.
fn refine(
    t: &Tableau,
    sf: &StandardForm,
    slack_of: &[usize],
    art_of: &[usize],
) -> (Vec<f64>, Vec<f64>) {
    let m = t.m;
    let ncols = t.rhs_col;
    let n = sf.structural;
    let column = |j: usize| -> Vec<(usize, f64)> {
        if j < n {
            return sf.columns[j].clone();
        }
        if j < t.art_start {
            let i = slack_of.iter().position(|&s| s == j).expect("slack column");
            let v = if sf.relation[i] == Relation::Ge {
                -1.0
            } else {
                1.0
            };
            return vec![(i, v)];
        }
        let i = art_of
            .iter()
            .position(|&a| a == j)
            .expect("artificial column");
        vec![(i, 1.0)]
    };
    let cost = |j: usize| if j < n { sf.cost[j] } else { 0.0 };

    let mut x_tab = vec![0.0; ncols];
    for i in 0..m {
        x_tab[t.basis[i]] = t.at(i, t.rhs_col).max(0.0);
    }
    // y_i = -(reduced cost of the row's unit column).
    let y_tab: Vec<f64> = (0..m)
        .map(|i| {
            let unit = if sf.relation[i] == Relation::Le {
                slack_of[i]
            } else {
                art_of[i]
            };
            -t.at(m, unit)
        })
        .collect();
    if m == 0 {
        return (x_tab, y_tab);
    }

    let mut b_mat = DMatrix::<f64>::zeros(m, m);
    for (k, &j) in t.basis.iter().enumerate() {
        for (i, a) in column(j) {
            b_mat[(i, k)] = a;
        }
    }
    let lu = b_mat.clone().lu();
    let rhs = DVector::from_column_slice(&sf.rhs);
    let cb = DVector::from_iterator(m, t.basis.iter().map(|&j| cost(j)));
    let (Some(xb), Some(y)) = (lu.solve(&rhs), b_mat.transpose().lu().solve(&cb)) else {
        return (x_tab, y_tab);
    };
    let scale = 1.0 + sf.rhs.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let close = xb
        .iter()
        .zip(&t.basis)
        .all(|(v, &j)| v.is_finite() && (v - x_tab[j]).abs() <= 1e-6 * scale);
    if !close {
        return (x_tab, y_tab);
    }
    let mut x = vec![0.0; ncols];
    for (k, &j) in t.basis.iter().enumerate() {
        x[j] = xb[k].max(0.0);
    }
    (x, y.iter().copied().collect())
}
