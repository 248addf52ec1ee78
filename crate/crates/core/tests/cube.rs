use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use vsparse_core::cube::{
    build_cube_instance, cut_ratio_extremes, direct_cut_value, fourier_cut_value, lp_cut_family,
    named_cuts, noise_sparsifier, routability_check, routability_closed_form,
    small_set_expansion_report, symmetric_lp_min_alpha, CubeCut,
};
use vsparse_core::flow::TerminalCutOracle;

#[test]
fn fourier_cut_matches_direct_sum() {
    for d in 1..=4usize {
        let k = 1usize << d;
        let worst = (0..1u64 << k)
            .into_par_iter()
            .map(|bits| {
                let members: Vec<bool> = (0..k).map(|s| bits >> s & 1 == 1).collect();
                let f = fourier_cut_value(d, &members).unwrap();
                let g = direct_cut_value(d, &members).unwrap();
                (f - g).abs()
            })
            .reduce(|| 0.0, f64::max);
        assert!(worst <= 1e-9, "d={d}: {worst}");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..1000 {
        let members: Vec<bool> = (0..256).map(|_| rng.gen_bool(0.5)).collect();
        let f = fourier_cut_value(8, &members).unwrap();
        let g = direct_cut_value(8, &members).unwrap();
        assert!((f - g).abs() <= 1e-9, "{f} vs {g}");
    }
}

#[test]
fn terminal_cuts_of_named_sets() {
    let inst = build_cube_instance(4).unwrap();
    let family = lp_cut_family(
        &inst,
        &[
            CubeCut::Majority,
            CubeCut::Subcube(1),
            CubeCut::Subcube(2),
            CubeCut::Subcube(3),
            CubeCut::Subcube(4),
        ],
    )
    .unwrap();
    let values: Vec<f64> = family.iter().map(|c| c.h_k).collect();
    assert_eq!(values, vec![10.0, 8.0, 8.0, 4.0, 2.0]);
}

#[test]
fn symmetric_bound_grows_with_dimension() {
    let mut prev = 0.0;
    for (d, expected) in [
        (4, 17.0 / 13.0),
        (6, 1.533265),
        (8, 1.745356),
        (10, 1.919073),
    ] {
        let b = symmetric_lp_min_alpha(d, None).unwrap();
        println!("d={d}: alpha={:.6} omega={:?}", b.alpha, b.omega);
        assert!((b.alpha - expected).abs() < 1e-6, "d={d}: {}", b.alpha);
        assert!(b.alpha >= prev - 1e-9, "d={d}: {} < {prev}", b.alpha);
        prev = b.alpha;
    }
}

#[test]
fn noise_sparsifier_routes_with_constant_congestion() {
    for d in [2, 4, 6, 8] {
        let cong = routability_check(d).unwrap();
        println!("d={d}: cong={cong:.6}");
        assert!(cong <= 4.0, "d={d}: {cong}");
        assert!((cong - routability_closed_form(d)).abs() < 1e-9);
    }
    // Cut ratios never exceed the flow congestion.
    for d in [2, 4] {
        let inst = build_cube_instance(d).unwrap();
        let h = noise_sparsifier(d).unwrap();
        let r = cut_ratio_extremes(&inst.graph, &h).unwrap();
        assert!(r.max <= routability_check(d).unwrap() + 1e-9);
    }
}

#[test]
fn quality_d4_within_budget() {
    let start = Instant::now();
    let inst = build_cube_instance(4).unwrap();
    let h = noise_sparsifier(4).unwrap();
    let r = cut_ratio_extremes(&inst.graph, &h).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    println!(
        "d=4 quality={:.9} min={:.9} renormalized={:.9} elapsed={elapsed:.2}s",
        r.quality(),
        r.min,
        r.renormalized_quality()
    );
    assert!(elapsed < 60.0);
    // The worst cut is a singleton, `1 - q^4` with `q = 3/4`.
    assert!((r.quality() - 175.0 / 256.0).abs() < 1e-12);
    assert!((r.min - 43.0 / 128.0).abs() < 1e-12);
    let bound = symmetric_lp_min_alpha(4, None).unwrap();
    assert!(r.renormalized_quality() >= bound.alpha - 1e-9);
    // A singleton terminal is separated by its pendant edge.
    let oracle = TerminalCutOracle::new(&inst.graph);
    assert_eq!(oracle.cut_bits(1), 2.0);
}

#[test]
fn small_sets_expand() {
    let report = small_set_expansion_report(8, 1000, 3).unwrap();
    println!("d=8 min ratio {:.6}", report.min_ratio);
    assert!(report.entries.iter().all(|e| e.ratio > 0.0));
    assert!(report.min_ratio >= 0.05);
    let axis = report
        .entries
        .iter()
        .find(|e| e.label == CubeCut::Axis(1).name())
        .unwrap();
    assert_eq!(axis.bal, 0.5);
    let single = report
        .entries
        .iter()
        .find(|e| e.label == "singleton(0)")
        .unwrap();
    assert_eq!(single.size, 1);
    assert_eq!(named_cuts(8).len(), 2 * 8 + 2);
}
