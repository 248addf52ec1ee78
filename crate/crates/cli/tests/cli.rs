use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use vsparse_core::io::{parse_distribution, parse_graph, parse_sparsifier};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn vsparse(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vsparse"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn star_quality_prints_four_thirds() {
    let out = vsparse(&[
        "quality",
        "--graph",
        s(&fixture("star.json")),
        "--sparsifier",
        s(&fixture("h.json")),
    ]);
    assert_eq!(stdout(&out), "1.3333333\n");
}

#[test]
fn cube_quality_fixture() {
    let out = vsparse(&["cube", "--d", "2", "--op", "quality"]);
    assert_eq!(stdout(&out), "0.5821068\n");
}

#[test]
fn lift_output_is_a_sparsifier_file() {
    let dir = tempfile::tempdir().unwrap();
    let h = dir.path().join("h.json");
    let out = vsparse(&[
        "lift",
        "--graph",
        s(&fixture("star.json")),
        "--verify",
        "--out",
        s(&h),
    ]);
    assert_eq!(
        stdout(&out),
        "flow sparsifier quality 1.3333333, verified\n"
    );
    let text = std::fs::read_to_string(&h).unwrap();
    let (sparsifier, alpha) = parse_sparsifier(&text, "h.json").unwrap();
    assert!((alpha.unwrap() - 4.0 / 3.0).abs() < 1e-6);
    for (_, w) in sparsifier.iter() {
        assert!((w - 2.0 / 3.0).abs() < 1e-6);
    }
    let q = vsparse(&[
        "quality",
        "--graph",
        s(&fixture("star.json")),
        "--sparsifier",
        s(&h),
    ]);
    assert_eq!(stdout(&q), "1.3333333\n");
}

#[test]
fn gen_prints_a_graph() {
    let out = vsparse(&["gen", "--kind", "grid", "--rows", "2", "--cols", "3"]);
    let g = parse_graph(&stdout(&out), "gen").unwrap();
    assert_eq!(g.node_count(), 6);
    assert_eq!(g.edges().len(), 7);
    assert_eq!(g.k(), 4);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("g.json");
    std::fs::write(
        &graph,
        stdout(&vsparse(&[
            "gen", "--kind", "random", "--n", "9", "--k", "4", "--seed", "3",
        ])),
    )
    .unwrap();
    let mut reports: Vec<Vec<String>> = Vec::new();
    let dist = dir.path().join("dist.json");
    for _ in 0..2 {
        let pack = vsparse(&[
            "pack",
            "--graph",
            s(&graph),
            "--seed",
            "11",
            "--out",
            s(&dist),
        ]);
        stdout(&pack);
        let dist_text = std::fs::read_to_string(&dist).unwrap();
        let frt = vsparse(&[
            "frt",
            "--graph",
            s(&graph),
            "--trials",
            "40",
            "--seed",
            "5",
            "--format",
            "json",
        ]);
        let gap = vsparse(&[
            "gap",
            "--dist",
            s(&dist),
            "--samples",
            "8",
            "--seed",
            "2",
            "--format",
            "csv",
        ]);
        let route = vsparse(&[
            "route",
            "--dist",
            s(&dist),
            "--random",
            "10",
            "--seed",
            "4",
            "--format",
            "json",
        ]);
        let cube = vsparse(&[
            "cube",
            "--d",
            "6",
            "--op",
            "expansion",
            "--samples",
            "50",
            "--seed",
            "1",
            "--format",
            "csv",
        ]);
        reports.push(vec![
            dist_text,
            stdout(&frt),
            stdout(&gap),
            stdout(&route),
            stdout(&cube),
        ]);
    }
    assert_eq!(reports[0], reports[1]);
    let g = parse_graph(&std::fs::read_to_string(&graph).unwrap(), "g").unwrap();
    let dist = parse_distribution(&reports[0][0], "dist", &g).unwrap();
    dist.validate(&g).unwrap();
}

#[test]
fn missing_input_fails_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("report.json");
    let missing = dir.path().join("nope.json");
    let out = vsparse(&["lift", "--graph", s(&missing), "--out", s(&out_path)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope.json"));
    assert!(!out_path.exists());
}

#[test]
fn malformed_input_names_the_line() {
    let out = vsparse(&["contract", "--graph", s(&fixture("broken.json"))]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("broken.json") && err.contains("line 4"),
        "{err}"
    );
}

#[test]
fn bad_field_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let dist = dir.path().join("dist.json");
    stdout(&vsparse(&[
        "pack",
        "--graph",
        s(&fixture("star.json")),
        "--out",
        s(&dist),
    ]));
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "src,dst,demand\nt0,t1,1\nt0,zz,2\n").unwrap();
    let out = vsparse(&["route", "--dist", s(&dist), "--demands", s(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("line 3") && err.contains("dst") && err.contains("zz"),
        "{err}"
    );
    let ok = vsparse(&[
        "route",
        "--dist",
        s(&dist),
        "--demands",
        s(&fixture("demands.csv")),
    ]);
    assert!(stdout(&ok).starts_with("max competitive ratio"));
}

#[test]
fn size_limits_exit_three() {
    let out = vsparse(&["cube", "--d", "30", "--op", "build"]);
    assert_eq!(out.status.code(), Some(3));
    let out = vsparse(&["cube", "--d", "6", "--op", "quality"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn report_carries_meta() {
    let out = vsparse(&["cube", "--d", "4", "--op", "lpbound", "--format", "json"]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["meta"]["tool"], "vsparse");
    assert_eq!(doc["meta"]["command"], "cube");
    assert_eq!(doc["meta"]["config"]["seed"], 0);
    assert_eq!(doc["meta"]["config"]["command"]["op"], "lpbound");
    assert!(doc["meta"]["tolerances"]["feasibility"].is_number());
    assert!((doc["alpha"].as_f64().unwrap() - 17.0 / 13.0).abs() < 1e-9);
}

#[test]
fn invalid_caps_rejected() {
    let out = vsparse(&["frt", "--graph", s(&fixture("star.json")), "--trials", "0"]);
    assert_eq!(out.status.code(), Some(2));
}
