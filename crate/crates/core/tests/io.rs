use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vsparse_core::graph::{generators, Graph};
use vsparse_core::io::{
    demand_to_csv, graph_to_json, metric_to_json, parse_cuts, parse_demand_csv, parse_distribution,
    parse_graph, parse_metric, parse_sparsifier, parse_tree, sparsifier_to_json,
};
use vsparse_core::metric::Metric;
use vsparse_core::sparsifier::Sparsifier;

fn fixture() -> Graph {
    generators::cycle(4, &[0, 2]).unwrap()
}

/// JSON-ish noise: fragments of every format glued together.
fn jsonish() -> impl Strategy<Value = String> {
    let atoms = prop::sample::select(vec![
        "{",
        "}",
        "[",
        "]",
        ",",
        ":",
        "\"nodes\"",
        "\"edges\"",
        "\"terminals\"",
        "\"u\"",
        "\"v\"",
        "\"cap\"",
        "\"v0\"",
        "\"v1\"",
        "\"v2\"",
        "\"weights\"",
        "\"a\"",
        "\"b\"",
        "\"w\"",
        "\"distances\"",
        "\"d\"",
        "\"cuts\"",
        "\"side\"",
        "\"weight\"",
        "\"parent\"",
        "\"length\"",
        "\"entries\"",
        "\"f\"",
        "\"routes\"",
        "\"probability\"",
        "\"congestion\"",
        "\"history\"",
        "null",
        "1",
        "-1",
        "0",
        "1e308",
        "2.5",
        "\n",
    ]);
    prop::collection::vec(atoms, 0..60).prop_map(|v| v.concat())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn parsers_never_panic(s in any::<String>(), j in jsonish()) {
        let g = fixture();
        let names: Vec<String> = vec!["v0".into(), "v2".into()];
        for text in [&s, &j] {
            let _ = parse_graph(text, "x");
            let _ = parse_demand_csv(text, "x", &g);
            let _ = parse_sparsifier(text, "x");
            let _ = parse_metric(text, "x");
            let _ = parse_cuts(text, "x", &names);
            let _ = parse_tree(text, "x");
            let _ = parse_distribution(text, "x", &g);
        }
    }

    #[test]
    fn csv_never_panics(rows in prop::collection::vec(("[a-z0-9 ]{0,4}", "[v0-9]{0,3}", "[-0-9.e]{0,6}"), 0..8)) {
        let g = fixture();
        let mut text = String::from("src,dst,demand\n");
        for (a, b, c) in rows {
            text.push_str(&format!("{a},{b},{c}\n"));
        }
        let _ = parse_demand_csv(&text, "x", &g);
    }

    #[test]
    fn graph_round_trip(seed in 0u64..1000, n in 2usize..12, p in 0.1f64..0.9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = generators::random_connected(n, n.min(3), p, &mut rng).unwrap();
        prop_assert_eq!(parse_graph(&graph_to_json(&g), "g").unwrap(), g);
    }

    #[test]
    fn sparsifier_round_trip(ws in prop::collection::vec(0.0f64..1e6, 6)) {
        let mut h = Sparsifier::new((0..4).map(|i| format!("t{i}")).collect());
        let mut it = ws.iter();
        for a in 0..4 {
            for b in a + 1..4 {
                h.add(a, b, *it.next().unwrap()).unwrap();
            }
        }
        let (back, alpha) = parse_sparsifier(&sparsifier_to_json(&h, None), "h").unwrap();
        prop_assert_eq!(back, h);
        prop_assert_eq!(alpha, None);
    }

    #[test]
    fn metric_and_demand_round_trip(ds in prop::collection::vec(0.0f64..100.0, 6)) {
        let mut it = ds.iter();
        let mut m = Metric::zero((0..4).map(|i| format!("n{i}")).collect());
        for a in 0..4 {
            for b in a + 1..4 {
                m.set(a, b, *it.next().unwrap());
            }
        }
        prop_assert_eq!(parse_metric(&metric_to_json(&m), "m").unwrap(), m);
        let g = fixture();
        let dem = [((0, 2), ds[0] + 1e-3), ((1, 3), ds[1])].into_iter().collect();
        prop_assert_eq!(parse_demand_csv(&demand_to_csv(&g, &dem), "d", &g).unwrap(), dem);
    }
}
