use super::*;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn assert_close(a: f64, b: f64, tol: f64) {
    assert!((a - b).abs() <= tol, "{a} vs {b}");
}

#[test]
fn single_bound() {
    let mut p = LpProblem::new(Sense::Maximize);
    let x = p.add_nonneg("x", 1.0);
    p.add_constraint(vec![(x, 1.0)], Relation::Le, 5.0);
    let s = solve_lp(&p).unwrap();
    assert!(s.is_optimal());
    assert_close(s.objective, 5.0, 1e-12);
    assert_close(s.duals[0], 1.0, 1e-12);
}

#[test]
fn infeasible_detected() {
    let mut p = LpProblem::new(Sense::Minimize);
    let x = p.add_nonneg("x", 1.0);
    p.add_constraint(vec![(x, 1.0)], Relation::Le, 0.0);
    p.add_constraint(vec![(x, 1.0)], Relation::Ge, 1.0);
    assert_eq!(solve_lp(&p).unwrap().status, LpStatus::Infeasible);
}

#[test]
fn unbounded_detected() {
    let mut p = LpProblem::new(Sense::Maximize);
    let x = p.add_nonneg("x", 1.0);
    let y = p.add_nonneg("y", 0.0);
    p.add_constraint(vec![(x, 1.0), (y, -1.0)], Relation::Le, 1.0);
    assert_eq!(solve_lp(&p).unwrap().status, LpStatus::Unbounded);
}

#[test]
fn free_and_bounded_variables() {
    // min x + y with x free, y in [-2, 3], x - y >= 1, x >= -4.
    let mut p = LpProblem::new(Sense::Minimize);
    let x = p.add_var("x", f64::NEG_INFINITY, None, 1.0);
    let y = p.add_var("y", -2.0, Some(3.0), 1.0);
    p.add_constraint(vec![(x, 1.0), (y, -1.0)], Relation::Ge, 1.0);
    p.add_constraint(vec![(x, 1.0)], Relation::Ge, -4.0);
    let s = solve_lp(&p).unwrap();
    assert!(s.is_optimal());
    // x = -1, y = -2.
    assert_close(s.objective, -3.0, 1e-9);
    assert_close(s.values[0], -1.0, 1e-9);
    assert_close(s.values[1], -2.0, 1e-9);
    assert_close(s.dual_bound(&p), s.objective, 1e-9);
}

#[test]
fn reflected_variable() {
    // max -x with x <= 2 and no lower bound, x >= -7 via a row.
    let mut p = LpProblem::new(Sense::Maximize);
    let x = p.add_var("x", f64::NEG_INFINITY, Some(2.0), -1.0);
    p.add_constraint(vec![(x, 1.0)], Relation::Ge, -7.0);
    let s = solve_lp(&p).unwrap();
    assert_close(s.objective, 7.0, 1e-9);
    assert_close(s.duals[0], -1.0, 1e-9);
}

#[test]
fn transportation() {
    // Two supplies (3, 4), two demands (2, 5), costs [[1, 3], [2, 1]].
    let mut p = LpProblem::new(Sense::Minimize);
    let cost = [[1.0, 3.0], [2.0, 1.0]];
    let mut v = [[0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            v[i][j] = p.add_nonneg(format!("x{i}{j}"), cost[i][j]);
        }
    }
    for (i, s) in [3.0, 4.0].into_iter().enumerate() {
        p.add_constraint(vec![(v[i][0], 1.0), (v[i][1], 1.0)], Relation::Le, s);
    }
    for (j, d) in [2.0, 5.0].into_iter().enumerate() {
        p.add_constraint(vec![(v[0][j], 1.0), (v[1][j], 1.0)], Relation::Eq, d);
    }
    let s = solve_lp(&p).unwrap();
    // Ship 2 from 0 to 0, 1 from 0 to 1, 4 from 1 to 1: 2 + 3 + 4 = 9.
    assert_close(s.objective, 9.0, 1e-9);
    assert_close(s.dual_bound(&p), 9.0, 1e-9);
    assert!(p.max_violation(&s.values) < 1e-9);
}

#[test]
fn redundant_equalities() {
    let mut p = LpProblem::new(Sense::Maximize);
    let x = p.add_nonneg("x", 1.0);
    let y = p.add_nonneg("y", 2.0);
    p.add_constraint(vec![(x, 1.0), (y, 1.0)], Relation::Eq, 1.0);
    p.add_constraint(vec![(x, 2.0), (y, 2.0)], Relation::Eq, 2.0);
    let s = solve_lp(&p).unwrap();
    assert_close(s.objective, 2.0, 1e-9);
    assert_close(s.dual_bound(&p), 2.0, 1e-9);
}

#[test]
fn rejects_bad_problem() {
    let mut p = LpProblem::new(Sense::Maximize);
    p.add_nonneg("x", f64::NAN);
    assert!(solve_lp(&p).is_err());
    let mut p = LpProblem::new(Sense::Maximize);
    p.add_constraint(vec![(3, 1.0)], Relation::Le, 1.0);
    assert!(solve_lp(&p).is_err());
}

#[test]
fn no_constraints() {
    let mut p = LpProblem::new(Sense::Minimize);
    p.add_var("x", 1.5, Some(4.0), 2.0);
    let s = solve_lp(&p).unwrap();
    assert_close(s.objective, 3.0, 1e-12);
}

#[test]
fn dump_lists_rows() {
    let mut p = LpProblem::new(Sense::Maximize);
    let x = p.add_nonneg("x", 1.0);
    let y = p.add_var("y", 0.0, Some(1.0), 0.0);
    p.add_constraint(vec![(x, 1.0), (y, -2.0)], Relation::Le, 5.0);
    let text = p.to_text();
    assert!(text.contains("r0: 1 x - 2 y <= 5"));
    assert!(text.contains("0 <= y <= 1"));
}

/// Brute-force optimum over all vertices of `{A x <= b, 0 <= x <= u}`.
fn vertex_enumeration(a: &[Vec<f64>], b: &[f64], u: f64, c: &[f64]) -> Option<f64> {
    let n = c.len();
    let mut rows: Vec<(Vec<f64>, f64)> = a.iter().cloned().zip(b.iter().copied()).collect();
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        rows.push((e.clone(), u));
        e[j] = -1.0;
        rows.push((e, 0.0));
    }
    let r = rows.len();
    let mut best: Option<f64> = None;
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        let m = DMatrix::from_fn(n, n, |i, j| rows[idx[i]].0[j]);
        let rhs = DVector::from_iterator(n, idx.iter().map(|&i| rows[i].1));
        if m.determinant().abs() > 1e-9 {
            if let Some(x) = m.lu().solve(&rhs) {
                let ok = rows.iter().all(|(row, bb)| {
                    row.iter().zip(x.iter()).map(|(p, q)| p * q).sum::<f64>() <= bb + 1e-9
                });
                if ok {
                    let val: f64 = c.iter().zip(x.iter()).map(|(p, q)| p * q).sum();
                    best = Some(best.map_or(val, |b: f64| b.max(val)));
                }
            }
        }
        // Next combination.
        let mut i = n;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if idx[i] < r - n + i {
                idx[i] += 1;
                for k in i + 1..n {
                    idx[k] = idx[k - 1] + 1;
                }
                break;
            }
        }
    }
}

#[test]
fn random_lps_match_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let n = 3;
        let rows = rng.gen_range(1..5);
        let a: Vec<Vec<f64>> = (0..rows)
            .map(|_| (0..n).map(|_| rng.gen_range(-3i32..=3) as f64).collect())
            .collect();
        let b: Vec<f64> = (0..rows).map(|_| rng.gen_range(-2i32..=6) as f64).collect();
        let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-3i32..=3) as f64).collect();
        let mut p = LpProblem::new(Sense::Maximize);
        for (j, &cj) in c.iter().enumerate() {
            p.add_var(format!("x{j}"), 0.0, Some(4.0), cj);
        }
        for (row, &bi) in a.iter().zip(&b) {
            p.add_constraint(row.iter().copied().enumerate().collect(), Relation::Le, bi);
        }
        let s = solve_lp(&p).unwrap();
        match vertex_enumeration(&a, &b, 4.0, &c) {
            None => assert_eq!(s.status, LpStatus::Infeasible),
            Some(best) => {
                assert!(s.is_optimal());
                assert_close(s.objective, best, 1e-7);
                assert!(p.max_violation(&s.values) < 1e-7);
                assert_close(s.dual_bound(&p), best, 1e-7);
                for (cons, &y) in p.constraints.iter().zip(&s.duals) {
                    assert_eq!(cons.relation, Relation::Le);
                    assert!(y >= -1e-9);
                }
            }
        }
    }
}

#[test]
fn bland_rule_agrees() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let opts = SolverOptions {
        rule: PivotRule::Bland,
        ..SolverOptions::default()
    };
    for _ in 0..50 {
        let mut p = LpProblem::new(Sense::Minimize);
        let vars: Vec<usize> = (0..5)
            .map(|j| p.add_nonneg(format!("x{j}"), rng.gen_range(1..5) as f64))
            .collect();
        for _ in 0..4 {
            let coeffs = vars
                .iter()
                .map(|&v| (v, rng.gen_range(0..3) as f64))
                .collect();
            p.add_constraint(coeffs, Relation::Ge, rng.gen_range(0..4) as f64);
        }
        let a = solve_lp(&p).unwrap();
        let b = solve_lp_with(&p, &opts).unwrap();
        assert_eq!(a.status, b.status);
        if a.is_optimal() {
            assert_close(a.objective, b.objective, 1e-9);
        }
    }
}
