use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vsparse_core::contraction::contraction_quality;
use vsparse_core::graph::generators;
use vsparse_core::lifted::{earth_mover_distance, solve_flow_sparsifier, verify_sparsifier};
use vsparse_core::metric::Metric;

#[test]
fn lifted_never_worse_than_contraction() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..10 {
        let n = rng.gen_range(5..=8);
        let g = generators::random_connected(n, 3, 0.35, &mut rng).unwrap();
        let lifted = solve_flow_sparsifier(&g).unwrap();
        let contract = contraction_quality(&g).unwrap();
        assert!(
            lifted.alpha <= contract.alpha + 1e-6,
            "trial {trial}: lifted {} > contraction {}",
            lifted.alpha,
            contract.alpha
        );
        assert!(lifted.earth_mover_residual(&g) < 1e-7);
        let report = verify_sparsifier(&g, &lifted.sparsifier, lifted.alpha, 10, trial).unwrap();
        assert!(report.passed(), "trial {trial}: {report:?}");
    }
}

#[test]
fn weights_pay_for_transport() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..5 {
        let g = generators::random_connected(7, 3, 0.4, &mut rng).unwrap();
        let s = solve_flow_sparsifier(&g).unwrap();
        for _ in 0..4 {
            // Random metric on three points: triangle inequality always holds
            // after taking shortest paths over the complete graph.
            let mut raw: [f64; 3] = [
                rng.gen_range(0.1..2.0),
                rng.gen_range(0.1..2.0),
                rng.gen_range(0.1..2.0),
            ];
            raw[0] = raw[0].min(raw[1] + raw[2]);
            raw[1] = raw[1].min(raw[0] + raw[2]);
            raw[2] = raw[2].min(raw[0] + raw[1]);
            let d = Metric::from_fn(vec!["a".into(), "b".into(), "c".into()], |i, j| {
                match (i, j) {
                    (0, 1) => raw[0],
                    (0, 2) => raw[1],
                    _ => raw[2],
                }
            });
            d.validate().unwrap();
            let lhs: f64 = s.sparsifier.iter().map(|((i, j), w)| w * d.get(i, j)).sum();
            let rhs: f64 = g
                .edges()
                .iter()
                .map(|e| {
                    e.cap * earth_mover_distance(&d, &s.marginals[e.u], &s.marginals[e.v]).unwrap()
                })
                .sum();
            assert!(lhs >= rhs - 1e-6, "{lhs} < {rhs}");
        }
    }
}

#[test]
fn capacity_scaling() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let g = generators::random_connected(7, 3, 0.3, &mut rng).unwrap();
    let a = solve_flow_sparsifier(&g).unwrap();
    let b = solve_flow_sparsifier(&g.scaled(3.0).unwrap()).unwrap();
    assert!((a.alpha - b.alpha).abs() < 1e-6 * a.alpha);
    let wa = a.sparsifier.total_weight();
    let wb = b.sparsifier.total_weight();
    assert!((3.0 * wa - wb).abs() < 1e-6 * wb);
}
