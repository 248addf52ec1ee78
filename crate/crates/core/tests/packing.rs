use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vsparse_core::flow::TerminalCutOracle;
use vsparse_core::graph::{generators, Graph};
use vsparse_core::packing::{
    competitive_ratio, congestion_of_distribution, oblivious_templates, pack_decompositions,
    random_demands, PackingOptions, TemplateMode,
};

fn suite() -> Vec<(String, Graph)> {
    let mut out = vec![
        (
            "c4".to_string(),
            generators::cycle(4, &[0, 1, 2, 3]).unwrap(),
        ),
        (
            "grid".to_string(),
            generators::grid(4, 4, &generators::grid_corners(4, 4)).unwrap(),
        ),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for i in 0..3 {
        let n = rng.gen_range(8..=16);
        let k = rng.gen_range(3..=6);
        out.push((
            format!("random{i}"),
            generators::random_connected(n, k, 0.3, &mut rng).unwrap(),
        ));
    }
    out
}

#[test]
fn packed_congestion_within_log_k() {
    for (name, g) in suite() {
        let dist = pack_decompositions(&g, PackingOptions::default(), 7).unwrap();
        dist.validate(&g).unwrap();
        let measured = congestion_of_distribution(&g, &dist).unwrap();
        assert!((measured - dist.congestion).abs() <= 1e-9 * measured);
        let bound = 8.0 * (g.k() as f64).ln();
        println!(
            "{name}: k={} rounds={} cong={measured:.4} bound={bound:.4}",
            g.k(),
            dist.entries.len()
        );
        assert!(measured <= bound, "{name}: {measured} > {bound}");
        // Every G_{f,T} dominates the cuts of G, so the mixture does too.
        let h = dist.aggregate(&g).unwrap();
        let oracle = TerminalCutOracle::new(&g);
        for bits in 1..(1u64 << (g.k() - 1)) {
            let hk = oracle.cut_bits(bits);
            assert!(h.cut_bits(bits) >= hk - 1e-9, "{name}: cut {bits}");
        }
    }
}

#[test]
fn competitive_ratio_bounded_by_aggregate_congestion() {
    for (name, g) in suite() {
        let dist = pack_decompositions(&g, PackingOptions::default(), 7).unwrap();
        let demands = random_demands(&g, 100, 5);
        let agg = oblivious_templates(&g, &dist, TemplateMode::AggregateFlow).unwrap();
        assert!(agg.conservation_residual(&g) < 1e-7, "{name}");
        let stats = competitive_ratio(&g, &agg, &demands).unwrap();
        let stored = oblivious_templates(&g, &dist, TemplateMode::StoredRoutes).unwrap();
        assert!(stored.conservation_residual(&g) < 1e-9, "{name}");
        let stored_stats = competitive_ratio(&g, &stored, &demands).unwrap();
        println!(
            "{name}: cong_H={:.4} route_cong={:.4} aggregate max={:.4} mean={:.4} stored max={:.4} mean={:.4}",
            dist.congestion,
            dist.route_congestion(&g),
            stats.max,
            stats.mean,
            stored_stats.max,
            stored_stats.mean
        );
        assert!(
            stats.max <= dist.congestion + 1e-6,
            "{name}: {} > {}",
            stats.max,
            dist.congestion
        );
        assert!(stats.ratios.iter().all(|&r| r >= 1.0 - 1e-7), "{name}");
        // Shortest-path routes are bounded by their own congestion instead.
        assert!(
            stored_stats.max <= dist.route_congestion(&g) + 1e-6,
            "{name}"
        );
    }
}

#[test]
fn deterministic_for_seed() {
    let g = generators::grid(3, 3, &[0, 2, 6, 8]).unwrap();
    let a = pack_decompositions(&g, PackingOptions::default(), 3).unwrap();
    let b = pack_decompositions(&g, PackingOptions::default(), 3).unwrap();
    assert_eq!(a, b);
}
