use std::path::Path;

use serde_json::{json, Value};
use vsparse_core::contraction::{
    contraction_quality, cut_cut_opt, cut_decomposition_cost, opt_zero_extension, semi_metric_opt,
};
use vsparse_core::cube::{
    build_cube_instance, cut_ratio_extremes, fourier_cut_value, lp_cut_family, named_cuts,
    noise_rho, noise_sparsifier, noise_stability, noise_weights, routability_check,
    routability_closed_form, small_set_expansion_report, symmetric_lp_min_alpha, wht, CubeCut,
};
use vsparse_core::frt::{cleanup_to_tree, frt_decompose_with, stretch_report, trial_rng};
use vsparse_core::gap::{gap_report, PackingProblem};
use vsparse_core::graph::{generators, DemandVector, Graph};
use vsparse_core::io::{
    distribution_to_json, graph_to_json, parse_cuts, parse_demand_csv, parse_distribution,
    parse_graph, parse_metric, parse_sparsifier, read_text, sparsifier_to_json, tree_to_json,
};
use vsparse_core::lifted::{solve_flow_sparsifier, verify_sparsifier};
use vsparse_core::metric::{shortest_path_metric, Metric};
use vsparse_core::packing::{
    competitive_ratio, oblivious_templates, pack_decompositions, random_demands,
    DecompositionDistribution, PackingOptions, TemplateMode,
};
use vsparse_core::sparsifier::Sparsifier;
use vsparse_core::{Error, Result};

use crate::report::{jnum, num, Report, Table};
use crate::{Command, ContractMode, CubeOp, GenKind, ProblemArg, RouteMode, RunConfig};

/// Largest graph `gen` will build.
pub const MAX_GEN_NODES: usize = 1 << 20;

pub fn dispatch(cfg: &RunConfig) -> Result<Report> {
    let seed = cfg.seed;
    let tol = cfg.tol;
    match &cfg.command {
        Command::Gen {
            kind,
            n,
            rows,
            cols,
            k,
            p,
            terminals,
            d,
        } => gen(
            *kind,
            *n,
            *rows,
            *cols,
            *k,
            *p,
            terminals.as_deref(),
            *d,
            seed,
        ),
        Command::Contract {
            graph,
            mode,
            metric,
            cuts,
        } => contract(graph, *mode, metric.as_deref(), cuts.as_deref()),
        Command::Lift {
            graph,
            verify,
            samples,
        } => lift(graph, *verify, *samples, seed, tol),
        Command::Frt {
            graph,
            metric,
            trials,
        } => frt(graph, metric.as_deref(), *trials, seed),
        Command::Pack {
            graph,
            iters,
            epsilon,
        } => pack(graph, *iters, *epsilon, seed),
        Command::Route {
            graph,
            dist,
            demands,
            random,
            mode,
        } => route(
            graph.as_deref(),
            dist,
            demands.as_deref(),
            *random,
            *mode,
            seed,
            tol,
        ),
        Command::Gap {
            graph,
            dist,
            problem,
            pairs,
            samples,
        } => gap(
            graph.as_deref(),
            dist,
            *problem,
            pairs.as_deref(),
            *samples,
            seed,
        ),
        Command::Cube {
            d,
            op,
            cut,
            samples,
        } => cube(*d, *op, cut.as_deref(), *samples, seed),
        Command::Quality { graph, sparsifier } => quality(graph, sparsifier),
    }
}

fn source(path: &Path) -> String {
    path.display().to_string()
}

fn to_value(text: &str) -> Result<Value> {
    serde_json::from_str(text)
        .map_err(|e| Error::internal(format!("serializer produced invalid JSON: {e}")))
}

fn load_graph(path: &Path) -> Result<Graph> {
    parse_graph(&read_text(path)?, &source(path))
}

fn terminal_names(g: &Graph) -> Vec<String> {
    g.terminals()
        .iter()
        .map(|&t| g.name(t).to_string())
        .collect()
}

/// Terminal names for a map from nodes to terminal positions.
fn f_names(g: &Graph, f: &[usize]) -> Vec<String> {
    f.iter()
        .map(|&a| g.name(g.terminals()[a]).to_string())
        .collect()
}

fn side_names(g: &Graph, bits: u64) -> Vec<String> {
    g.terminals_from_bits(bits)
        .into_iter()
        .map(|v| g.name(v).to_string())
        .collect()
}

fn graph_report(g: &Graph, summary: String) -> Result<Report> {
    let mut table = Table::new(&["u", "v", "cap"]);
    for e in g.edges() {
        table.push(vec![g.name(e.u).into(), g.name(e.v).into(), num(e.cap)]);
    }
    Ok(Report {
        summary,
        json: to_value(&graph_to_json(g))?,
        table: Some(table),
    })
}

#[allow(clippy::too_many_arguments)]
fn gen(
    kind: GenKind,
    n: usize,
    rows: Option<usize>,
    cols: Option<usize>,
    k: Option<usize>,
    p: f64,
    terminals: Option<&[usize]>,
    d: Option<usize>,
    seed: u64,
) -> Result<Report> {
    let nodes = match kind {
        GenKind::Grid => rows.unwrap_or(n).saturating_mul(cols.unwrap_or(n)),
        GenKind::Star => n.saturating_add(1),
        GenKind::Cube => 0,
        _ => n,
    };
    if nodes > MAX_GEN_NODES {
        return Err(Error::size(format!(
            "gen builds at most {MAX_GEN_NODES} nodes, asked for {nodes}"
        )));
    }
    let reject_terminals = |what: &str| -> Result<()> {
        match terminals {
            Some(_) => Err(Error::input(format!(
                "`--terminals` does not apply to {what}"
            ))),
            None => Ok(()),
        }
    };
    let g = match kind {
        GenKind::Path => {
            let terms = terminals
                .map(<[usize]>::to_vec)
                .unwrap_or_else(|| vec![0, n.saturating_sub(1)]);
            generators::path(n, &terms)?
        }
        GenKind::Cycle => {
            let terms = terminals
                .map(<[usize]>::to_vec)
                .unwrap_or_else(|| vec![0, n / 2]);
            generators::cycle(n, &terms)?
        }
        GenKind::Star => {
            reject_terminals("stars")?;
            generators::star(n)?
        }
        GenKind::Complete => generators::complete(n, terminals)?,
        GenKind::Grid => {
            let (r, c) = (rows.unwrap_or(n), cols.unwrap_or(n));
            let terms = terminals
                .map(<[usize]>::to_vec)
                .unwrap_or_else(|| generators::grid_corners(r, c));
            generators::grid(r, c, &terms)?
        }
        GenKind::Random => {
            reject_terminals("random graphs")?;
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::input(format!("`--p` must lie in [0, 1], got {p}")));
            }
            generators::random_connected(n, k.unwrap_or(n.min(3)), p, &mut trial_rng(seed, 0))?
        }
        GenKind::Cube => {
            reject_terminals("cube instances")?;
            let d = d.ok_or_else(|| Error::input("`gen --kind cube` needs `--d`"))?;
            build_cube_instance(d)?.graph
        }
    };
    let text = graph_to_json(&g);
    graph_report(&g, text.trim_end().to_string())
}

/// A metric on the terminals of `g`, named and ordered like them.
fn load_terminal_metric(path: Option<&Path>, g: &Graph, mode: &str) -> Result<Metric> {
    let path = path.ok_or_else(|| Error::input(format!("`--mode {mode}` needs `--metric`")))?;
    let m = parse_metric(&read_text(path)?, &source(path))?;
    if m.names() != terminal_names(g).as_slice() {
        return Err(Error::parse(
            source(path),
            "metric nodes must be the graph's terminals, in order",
        ));
    }
    Ok(m)
}

fn contract(
    graph: &Path,
    mode: ContractMode,
    metric: Option<&Path>,
    cuts: Option<&Path>,
) -> Result<Report> {
    let g = load_graph(graph)?;
    match mode {
        ContractMode::Quality => {
            let q = contraction_quality(&g)?;
            let mut header = vec!["probability".to_string()];
            header.extend(g.names().iter().cloned());
            let mut table = Table {
                header,
                rows: Vec::new(),
            };
            let mut entries = Vec::new();
            for (f, prob) in &q.distribution.entries {
                let names = f_names(&g, f.as_slice());
                entries.push(json!({"probability": prob, "f": names}));
                let mut row = vec![num(*prob)];
                row.extend(names);
                table.push(row);
            }
            Ok(Report {
                summary: format!(
                    "contraction quality {:.7} ({} contractions in support)",
                    q.alpha,
                    q.distribution.entries.len()
                ),
                json: json!({
                    "alpha": q.alpha,
                    "distinct_contractions": q.distinct_contractions,
                    "distribution": entries,
                }),
                table: Some(table),
            })
        }
        ContractMode::Zeroext => {
            let d = load_terminal_metric(metric, &g, "zeroext")?;
            let (cost, f) = opt_zero_extension(&g, &d)?;
            let names = f_names(&g, f.as_slice());
            let mut table = Table::new(&["node", "terminal"]);
            for (v, t) in names.iter().enumerate() {
                table.push(vec![g.name(v).into(), t.clone()]);
            }
            Ok(Report {
                summary: format!("optimal 0-extension cost {:.7}", cost),
                json: json!({"cost": jnum(cost), "f": names}),
                table: Some(table),
            })
        }
        ContractMode::Semimetric => {
            let d = load_terminal_metric(metric, &g, "semimetric")?;
            let v = semi_metric_opt(&g, &d)?;
            let mut table = Table::new(&["value"]);
            table.push(vec![num(v)]);
            Ok(Report {
                summary: format!("semi-metric relaxation {:.7}", v),
                json: json!({"value": jnum(v)}),
                table: Some(table),
            })
        }
        ContractMode::Cutcut => {
            let d = load_terminal_metric(metric, &g, "cutcut")?;
            let path = cuts.ok_or_else(|| Error::input("`--mode cutcut` needs `--cuts`"))?;
            let witness = parse_cuts(&read_text(path)?, &source(path), &terminal_names(&g))?;
            let v = cut_cut_opt(&g, &d, &witness)?;
            let cost = cut_decomposition_cost(&g, &witness)?;
            let mut table = Table::new(&["value", "witness_cost"]);
            table.push(vec![num(v), num(cost)]);
            Ok(Report {
                summary: format!("cut-cut relaxation {:.7} (witness cost {:.7})", v, cost),
                json: json!({"value": jnum(v), "witness_cost": jnum(cost)}),
                table: Some(table),
            })
        }
    }
}

fn sparsifier_table(h: &Sparsifier) -> Table {
    let mut table = Table::new(&["a", "b", "w"]);
    for ((a, b), w) in h.iter() {
        table.push(vec![h.names()[a].clone(), h.names()[b].clone(), num(w)]);
    }
    table
}

fn lift(graph: &Path, verify: bool, samples: usize, seed: u64, tol: f64) -> Result<Report> {
    let g = load_graph(graph)?;
    let sol = solve_flow_sparsifier(&g)?;
    let mut json = to_value(&sparsifier_to_json(&sol.sparsifier, Some(sol.alpha)))?;
    let mut summary = format!("flow sparsifier quality {:.7}", sol.alpha);
    if verify {
        let rep = verify_sparsifier(&g, &sol.sparsifier, sol.alpha, samples, seed)?;
        let passed = rep.congestion_in_g <= rep.alpha + tol
            && rep.worst_cut_slack >= -tol
            && rep.sampled_max_congestion_in_h <= 1.0 + tol;
        json["verification"] = json!({
            "congestion_in_g": rep.congestion_in_g,
            "alpha": rep.alpha,
            "exhaustive": rep.exhaustive,
            "worst_cut_slack": jnum(rep.worst_cut_slack),
            "worst_cut_side": side_names(&g, rep.worst_cut_mask),
            "sampled_max_congestion_in_h": jnum(rep.sampled_max_congestion_in_h),
            "samples": rep.samples,
            "passed": passed,
        });
        summary.push_str(if passed {
            ", verified"
        } else {
            ", verification FAILED"
        });
    }
    Ok(Report {
        summary,
        json,
        table: Some(sparsifier_table(&sol.sparsifier)),
    })
}

fn frt(graph: &Path, metric: Option<&Path>, trials: usize, seed: u64) -> Result<Report> {
    let g = load_graph(graph)?;
    let metric = match metric {
        Some(path) => {
            let m = parse_metric(&read_text(path)?, &source(path))?;
            if m.names() != g.names() {
                return Err(Error::parse(
                    source(path),
                    "metric nodes must be the graph's nodes, in order",
                ));
            }
            m
        }
        None => shortest_path_metric(&g, &vec![1.0; g.edges().len()])?,
    };
    let stats = stretch_report(&metric, g.terminals(), trials, seed)?;
    let dec = frt_decompose_with(&metric, g.terminals(), &mut trial_rng(seed, 0))?;
    let skel = cleanup_to_tree(&dec)?;
    let names = terminal_names(&g);
    let mut table = Table::new(&["a", "b", "mean_stretch"]);
    let mut pairs = Vec::new();
    for &((a, b), s) in &stats.mean_stretch {
        table.push(vec![names[a].clone(), names[b].clone(), num(s)]);
        pairs.push(json!({"a": names[a], "b": names[b], "stretch": jnum(s)}));
    }
    Ok(Report {
        summary: format!(
            "max mean stretch {:.7} over {} trials, {} dominance violations",
            stats.max_mean_stretch, stats.trials, stats.dominance_violations
        ),
        json: json!({
            "trials": stats.trials,
            "max_mean_stretch": jnum(stats.max_mean_stretch),
            "dominance_violations": stats.dominance_violations,
            "mean_stretch": pairs,
            "sample": {
                "tree": to_value(&tree_to_json(&names, &skel.tree))?,
                "f": f_names(&g, &skel.f),
                "beta": dec.beta,
                "scale": dec.scale,
                "levels": dec.levels.len(),
            },
        }),
        table: Some(table),
    })
}

fn pack(graph: &Path, iters: Option<usize>, epsilon: f64, seed: u64) -> Result<Report> {
    let g = load_graph(graph)?;
    let dist = pack_decompositions(
        &g,
        PackingOptions {
            iterations: iters,
            epsilon,
        },
        seed,
    )?;
    let mut json = to_value(&distribution_to_json(&g, &dist))?;
    json["graph"] = to_value(&graph_to_json(&g))?;
    json["route_congestion"] = jnum(dist.route_congestion(&g));
    let mut table = Table::new(&["entry", "probability", "tree_cost"]);
    for (i, e) in dist.entries.iter().enumerate() {
        table.push(vec![
            i.to_string(),
            num(e.probability),
            num(e.decomposition.tree_cost()),
        ]);
    }
    Ok(Report {
        summary: format!(
            "packed congestion {:.7} over {} decompositions",
            dist.congestion,
            dist.entries.len()
        ),
        json,
        table: Some(table),
    })
}

/// The graph from `--graph`, or else the one `pack` embeds in its output.
fn load_distribution(
    graph: Option<&Path>,
    dist: &Path,
) -> Result<(Graph, DecompositionDistribution)> {
    let src = source(dist);
    let text = read_text(dist)?;
    let g = match graph {
        Some(path) => load_graph(path)?,
        None => {
            let doc: Value = serde_json::from_str(&text)
                .map_err(|e| Error::parse(src.clone(), e.to_string()))?;
            let embedded = doc
                .get("graph")
                .ok_or_else(|| Error::parse(src.clone(), "no embedded `graph`; pass `--graph`"))?;
            parse_graph(&embedded.to_string(), &format!("{src} (embedded graph)"))?
        }
    };
    let dist = parse_distribution(&text, &src, &g)?;
    Ok((g, dist))
}

fn route(
    graph: Option<&Path>,
    dist: &Path,
    demands: Option<&Path>,
    random: Option<usize>,
    mode: RouteMode,
    seed: u64,
    tol: f64,
) -> Result<Report> {
    let (g, dist) = load_distribution(graph, dist)?;
    let demands = match (demands, random) {
        (Some(path), None) => vec![parse_demand_csv(&read_text(path)?, &source(path), &g)?],
        (None, Some(count)) => random_demands(&g, count, seed),
        _ => {
            return Err(Error::input(
                "route needs exactly one of `--demands` and `--random`",
            ))
        }
    };
    let (template_mode, bound) = match mode {
        RouteMode::Aggregate => (TemplateMode::AggregateFlow, dist.congestion),
        RouteMode::Stored => (TemplateMode::StoredRoutes, dist.route_congestion(&g)),
    };
    let templates = oblivious_templates(&g, &dist, template_mode)?;
    let stats = competitive_ratio(&g, &templates, &demands)?;
    let mut table = Table::new(&["demand", "ratio"]);
    for (i, r) in stats.ratios.iter().enumerate() {
        table.push(vec![i.to_string(), num(*r)]);
    }
    Ok(Report {
        summary: format!(
            "max competitive ratio {:.7} over {} demands (bound {:.7})",
            stats.max,
            stats.ratios.len(),
            bound
        ),
        json: json!({
            "mode": mode,
            "bound": jnum(bound),
            "max": jnum(stats.max),
            "mean": jnum(stats.mean),
            "skipped": stats.skipped,
            "ratios": stats.ratios.iter().map(|&r| jnum(r)).collect::<Vec<_>>(),
            "within_bound": stats.max <= bound + tol,
        }),
        table: Some(table),
    })
}

fn all_pairs(g: &Graph) -> Result<DemandVector> {
    let t = g.terminals();
    let mut dem = DemandVector::new();
    for a in 0..t.len() {
        for b in a + 1..t.len() {
            dem.add(t[a], t[b], 1.0)?;
        }
    }
    Ok(dem)
}

fn gap(
    graph: Option<&Path>,
    dist: &Path,
    problem: ProblemArg,
    pairs: Option<&Path>,
    samples: usize,
    seed: u64,
) -> Result<Report> {
    let (g, dist) = load_distribution(graph, dist)?;
    let dem = match pairs {
        Some(path) => parse_demand_csv(&read_text(path)?, &source(path), &g)?,
        None => all_pairs(&g)?,
    };
    let p = match problem {
        ProblemArg::Sparsest => PackingProblem::sparsest_cut(&g, &dem)?,
        ProblemArg::Multicut => {
            let list: Vec<(usize, usize)> = dem
                .iter()
                .filter(|&(_, w)| w > 0.0)
                .map(|(pair, _)| pair)
                .collect();
            PackingProblem::multicut(&g, &list)?
        }
    };
    let stats = gap_report(&p, &g, &dist, samples, seed)?;
    let mut table = Table::new(&[
        "sample",
        "entry",
        "tree_value",
        "mapped_value",
        "tightened_value",
    ]);
    let mut rows = Vec::new();
    for (i, s) in stats.samples.iter().enumerate() {
        table.push(vec![
            i.to_string(),
            s.entry.to_string(),
            num(s.tree_value),
            num(s.mapped_value),
            num(s.tightened_value),
        ]);
        rows.push(json!({
            "entry": s.entry,
            "tree_value": jnum(s.tree_value),
            "mapped_value": jnum(s.mapped_value),
            "tightened_value": jnum(s.tightened_value),
        }));
    }
    Ok(Report {
        summary: format!(
            "gap {:.7} (fractional {:.7}, integral {:.7}, {} samples)",
            stats.gap,
            stats.fractional_opt,
            stats.best_value,
            stats.samples.len()
        ),
        json: json!({
            "problem": problem,
            "fractional_opt": jnum(stats.fractional_opt),
            "best_value": jnum(stats.best_value),
            "best_mapped_value": jnum(stats.best_mapped_value),
            "gap": jnum(stats.gap),
            "mapped_gap": jnum(stats.mapped_gap),
            "tree_expectation_ratio": jnum(stats.tree_expectation_ratio),
            "all_feasible": stats.all_feasible,
            "samples": rows,
        }),
        table: Some(table),
    })
}

/// Parses `majority`, `subcube(j)`, `axis(i)` or `singleton(s)`.
pub fn parse_cube_cut(text: &str) -> Result<CubeCut> {
    let text = text.trim();
    if text == "majority" {
        return Ok(CubeCut::Majority);
    }
    let bad = || Error::input(format!("unknown cut `{text}`"));
    let (name, rest) = text.split_once('(').ok_or_else(bad)?;
    let arg: usize = rest
        .strip_suffix(')')
        .ok_or_else(bad)?
        .trim()
        .parse()
        .map_err(|_| bad())?;
    match name.trim() {
        "subcube" => Ok(CubeCut::Subcube(arg)),
        "axis" => Ok(CubeCut::Axis(arg)),
        "singleton" => Ok(CubeCut::Singleton(arg)),
        _ => Err(bad()),
    }
}

fn metric_rows(rows: &[(&str, f64)]) -> Table {
    let mut table = Table::new(&["quantity", "value"]);
    for (k, v) in rows {
        table.push(vec![k.to_string(), num(*v)]);
    }
    table
}

fn cube(d: usize, op: CubeOp, cut: Option<&str>, samples: usize, seed: u64) -> Result<Report> {
    if cut.is_some() && op != CubeOp::Cuts {
        return Err(Error::input("`--cut` only applies to `--op cuts`"));
    }
    match op {
        CubeOp::Build => {
            let inst = build_cube_instance(d)?;
            let g = &inst.graph;
            graph_report(
                g,
                format!(
                    "{d}-cube instance: {} nodes, {} edges, {} terminals",
                    g.node_count(),
                    g.edges().len(),
                    g.k()
                ),
            )
        }
        CubeOp::Sparsifier => {
            let h = noise_sparsifier(d)?;
            let sym = noise_weights(d);
            let mut json = to_value(&sparsifier_to_json(&h, None))?;
            json["rho"] = json!(noise_rho(d));
            json["omega"] = json!(sym.omega);
            json["incident_weight"] = json!(sym.incident_weight());
            Ok(Report {
                summary: format!(
                    "noise sparsifier on {} terminals, rho {:.7}, incident weight {:.7}",
                    h.k(),
                    noise_rho(d),
                    sym.incident_weight()
                ),
                json,
                table: Some(sparsifier_table(&h)),
            })
        }
        CubeOp::Cuts => match cut {
            Some(name) => cut_spectrum(d, parse_cube_cut(name)?),
            None => cut_values(d),
        },
        CubeOp::Quality => {
            let inst = build_cube_instance(d)?;
            let h = noise_sparsifier(d)?;
            let r = cut_ratio_extremes(&inst.graph, &h)?;
            let rows = [
                ("quality", r.quality()),
                ("min_ratio", r.min),
                ("renormalization_factor", r.renormalization_factor()),
                ("renormalized_quality", r.renormalized_quality()),
            ];
            Ok(Report {
                summary: format!("{:.7}", r.quality()),
                json: json!({
                    "quality": r.quality(),
                    "max_ratio": r.max,
                    "min_ratio": r.min,
                    "renormalization_factor": r.renormalization_factor(),
                    "renormalized_quality": r.renormalized_quality(),
                    "argmax": side_names(&inst.graph, r.argmax),
                    "argmin": side_names(&inst.graph, r.argmin),
                }),
                table: Some(metric_rows(&rows)),
            })
        }
        CubeOp::Lpbound => {
            let b = symmetric_lp_min_alpha(d, None)?;
            let mut table = Table::new(&["h", "omega"]);
            for (h, w) in b.omega.iter().enumerate() {
                table.push(vec![h.to_string(), num(*w)]);
            }
            let family: Vec<Value> = b
                .family
                .iter()
                .map(|c| json!({"name": c.name, "h_k": c.h_k, "counts": c.counts}))
                .collect();
            Ok(Report {
                summary: format!("symmetric LP bound {:.7}", b.alpha),
                json: json!({"d": b.d, "alpha": b.alpha, "omega": b.omega, "family": family}),
                table: Some(table),
            })
        }
        CubeOp::Expansion => {
            let rep = small_set_expansion_report(d, samples, seed)?;
            let mut table = Table::new(&["label", "size", "bal", "value", "ratio"]);
            let mut entries = Vec::new();
            for e in &rep.entries {
                table.push(vec![
                    e.label.clone(),
                    e.size.to_string(),
                    num(e.bal),
                    num(e.value),
                    num(e.ratio),
                ]);
                entries.push(json!({"label": e.label, "size": e.size, "bal": e.bal, "value": e.value, "ratio": e.ratio}));
            }
            Ok(Report {
                summary: format!(
                    "min expansion ratio {:.7} over {} sets",
                    rep.min_ratio,
                    rep.entries.len()
                ),
                json: json!({"d": rep.d, "min_ratio": rep.min_ratio, "entries": entries}),
                table: Some(table),
            })
        }
        CubeOp::Route => {
            let cong = routability_check(d)?;
            let closed = routability_closed_form(d);
            Ok(Report {
                summary: format!("noise sparsifier routes with congestion {:.7}", cong),
                json: json!({"d": d, "congestion": cong, "closed_form": closed}),
                table: Some(metric_rows(&[
                    ("congestion", cong),
                    ("closed_form", closed),
                ])),
            })
        }
    }
}

fn cut_values(d: usize) -> Result<Report> {
    let inst = build_cube_instance(d)?;
    let cuts = named_cuts(d);
    let family = lp_cut_family(&inst, &cuts)?;
    let mut table = Table::new(&["cut", "size", "h_k", "h_prime", "ratio"]);
    let mut entries = Vec::new();
    for (cut, row) in cuts.iter().zip(&family) {
        let members = cut.members(d)?;
        let size = members.iter().filter(|&&m| m).count();
        let value = fourier_cut_value(d, &members)?;
        let ratio = value / row.h_k;
        table.push(vec![
            row.name.clone(),
            size.to_string(),
            num(row.h_k),
            num(value),
            num(ratio),
        ]);
        entries.push(json!({"cut": row.name, "size": size, "h_k": row.h_k, "h_prime": value, "ratio": jnum(ratio)}));
    }
    Ok(Report {
        summary: format!("{} named cuts of the {d}-cube", cuts.len()),
        json: json!({"d": d, "cuts": entries}),
        table: Some(table),
    })
}

/// Fourier spectrum of `f_A = -1 on A, +1 off A`, in binary subset order.
fn cut_spectrum(d: usize, cut: CubeCut) -> Result<Report> {
    let members = cut.members(d)?;
    let f: Vec<f64> = members
        .iter()
        .map(|&m| if m { -1.0 } else { 1.0 })
        .collect();
    let spec = wht(&f)?;
    let ns = noise_stability(&spec, noise_rho(d));
    let value = fourier_cut_value(d, &members)?;
    let mut table = Table::new(&["subset", "bits", "level", "coefficient"]);
    for (s, c) in spec.coefficients.iter().enumerate() {
        table.push(vec![
            s.to_string(),
            format!("{s:0d$b}"),
            s.count_ones().to_string(),
            num(*c),
        ]);
    }
    Ok(Report {
        summary: format!(
            "{}: h'(A) {:.7}, noise stability {:.7}",
            cut.name(),
            value,
            ns
        ),
        json: json!({
            "cut": cut.name(),
            "d": d,
            "h_prime": value,
            "noise_stability": ns,
            "energy": spec.energy(),
            "level_weights": spec.level_weights(),
            "coefficients": spec.coefficients,
        }),
        table: Some(table),
    })
}

fn quality(graph: &Path, sparsifier: &Path) -> Result<Report> {
    let g = load_graph(graph)?;
    let (h, alpha) = parse_sparsifier(&read_text(sparsifier)?, &source(sparsifier))?;
    let r = cut_ratio_extremes(&g, &h)?;
    let rows = [
        ("quality", r.quality()),
        ("min_ratio", r.min),
        ("renormalization_factor", r.renormalization_factor()),
        ("renormalized_quality", r.renormalized_quality()),
    ];
    Ok(Report {
        summary: format!("{:.7}", r.quality()),
        json: json!({
            "quality": jnum(r.quality()),
            "max_ratio": jnum(r.max),
            "min_ratio": jnum(r.min),
            "renormalization_factor": jnum(r.renormalization_factor()),
            "renormalized_quality": jnum(r.renormalized_quality()),
            "argmax": side_names(&g, r.argmax),
            "argmin": side_names(&g, r.argmin),
            "declared_alpha": alpha.map(jnum),
        }),
        table: Some(metric_rows(&rows)),
    })
}
