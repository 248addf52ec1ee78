use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vsparse_core::contraction::ZeroExtension;
use vsparse_core::frt::{zero_decomposition, TerminalTree};
use vsparse_core::gap::{
    gap_report, map_back, tree_integral_dual, tree_sparsest_cut_bruteforce, PackingProblem,
};
use vsparse_core::graph::{generators, DemandVector, Graph};
use vsparse_core::packing::{pack_decompositions, PackingOptions};

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

fn all_pairs(g: &Graph) -> Vec<(usize, usize)> {
    let t = g.terminals();
    let mut v = Vec::new();
    for a in 0..t.len() {
        for b in a + 1..t.len() {
            v.push((t[a], t[b]));
        }
    }
    v
}

fn uniform_demand(g: &Graph) -> DemandVector {
    all_pairs(g).into_iter().map(|p| (p, 1.0)).collect()
}

#[test]
fn single_pair_gap_is_one() {
    for (name, g) in suite() {
        let dist = pack_decompositions(&g, PackingOptions::default(), 2).unwrap();
        let t = g.terminals();
        for (a, b) in [(0, 1), (0, t.len() - 1)] {
            let dem: DemandVector = [((t[a], t[b]), 1.0)].into_iter().collect();
            for p in [
                PackingProblem::sparsest_cut(&g, &dem).unwrap(),
                PackingProblem::multicut(&g, &[(t[a], t[b])]).unwrap(),
            ] {
                let stats = gap_report(&p, &g, &dist, 8, 1).unwrap();
                assert!(
                    (stats.gap - 1.0).abs() <= 1e-6,
                    "{name} {:?}: gap {}",
                    p.kind(),
                    stats.gap
                );
                assert!(stats.all_feasible, "{name}");
            }
        }
    }
}

#[test]
fn tree_sparsest_cut_formula_matches_bruteforce() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for k in 2..=12 {
        for _ in 0..4 {
            let names: Vec<String> = (0..k).map(|i| format!("t{i}")).collect();
            let edges: Vec<(usize, usize, f64)> = (1..k)
                .map(|i| (rng.gen_range(0..i), i, rng.gen_range(1..6) as f64 / 2.0))
                .collect();
            let g = Graph::new(names, edges.clone(), (0..k).collect()).unwrap();
            let tree = TerminalTree::from_edges(k, &edges, 0).unwrap();
            let f = ZeroExtension::new(&g, (0..k).collect()).unwrap();
            let zd = zero_decomposition(&g, &f, &tree).unwrap();
            let mut dem = DemandVector::new();
            for a in 0..k {
                for b in a + 1..k {
                    if rng.gen_bool(0.5) {
                        dem.add(a, b, rng.gen_range(1..4) as f64).unwrap();
                    }
                }
            }
            if dem.is_empty() {
                dem.add(0, k - 1, 1.0).unwrap();
            }
            let p = PackingProblem::sparsest_cut(&g, &dem).unwrap();
            let formula = tree_integral_dual(&p, &zd).unwrap().value;
            let brute = tree_sparsest_cut_bruteforce(&p, &zd).unwrap();
            assert_eq!(formula, brute, "k={k}");
        }
    }
}

#[test]
fn suite_gaps_within_log_k() {
    for (name, g) in suite() {
        let dist = pack_decompositions(&g, PackingOptions::default(), 2).unwrap();
        let bound = 8.0 * (g.k() as f64).ln();
        for p in [
            PackingProblem::sparsest_cut(&g, &uniform_demand(&g)).unwrap(),
            PackingProblem::multicut(&g, &all_pairs(&g)).unwrap(),
        ] {
            let stats = gap_report(&p, &g, &dist, 32, 9).unwrap();
            println!(
                "{name} {:?}: opt={:.4} gap={:.4} mapped_gap={:.4} tree_ratio={:.4}",
                p.kind(),
                stats.fractional_opt,
                stats.gap,
                stats.mapped_gap,
                stats.tree_expectation_ratio
            );
            assert!(stats.all_feasible, "{name}");
            assert!(stats.gap >= 1.0 - 1e-6, "{name}");
            assert!(stats.gap <= bound, "{name}: {} > {bound}", stats.gap);
            assert!(stats.tree_expectation_ratio <= bound, "{name}");
            assert!(stats
                .samples
                .iter()
                .all(|s| s.tightened_value <= s.mapped_value + 1e-9));
        }
    }
}

#[test]
fn mapped_back_cost_never_exceeds_tree_cost() {
    for (name, g) in suite() {
        let dist = pack_decompositions(&g, PackingOptions::default(), 4).unwrap();
        let sc = PackingProblem::sparsest_cut(&g, &uniform_demand(&g)).unwrap();
        let mc = PackingProblem::multicut(&g, &all_pairs(&g)).unwrap();
        for entry in &dist.entries {
            let zd = &entry.decomposition;
            for p in [&sc, &mc] {
                let dual = tree_integral_dual(p, zd).unwrap();
                let back = map_back(p, &g, &dual, &zd.f).unwrap();
                assert!(
                    back.value <= dual.value + 1e-9,
                    "{name}: {} > {}",
                    back.value,
                    dual.value
                );
                assert!(back.is_admissible());
            }
        }
    }
}
