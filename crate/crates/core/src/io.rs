//! JSON and CSV formats for graphs, demands, sparsifiers, metrics, cut
//! lists, terminal trees and decomposition distributions.
//!
//! Every parser takes the raw text plus a source name used in diagnostics
//! and never panics; syntax errors carry the offending line, semantic errors
//! the offending field.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::contraction::{CutDecomposition, ZeroExtension};
use crate::error::{Error, Result};
use crate::frt::{TerminalTree, ZeroDecomposition};
use crate::graph::{DemandVector, Graph};
use crate::metric::Metric;
use crate::packing::{DecompositionDistribution, PackedEntry, Route};
use crate::sparsifier::Sparsifier;

fn syntax(source: &str, e: serde_json::Error) -> Error {
    Error::Parse {
        source_name: source.to_string(),
        line: Some(e.line()),
        field: None,
        message: e.to_string(),
    }
}

fn field_error(source: &str, field: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Parse {
        source_name: source.to_string(),
        line: None,
        field: Some(field.into()),
        message: message.into(),
    }
}

/// Re-labels a validation error from a constructor as a parse error.
fn semantic(source: &str, field: &str, e: Error) -> Error {
    match e {
        Error::Input(m) => field_error(source, field, m),
        other => other,
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializing plain data cannot fail");
    s.push('\n');
    s
}

fn finite(source: &str, field: &str, x: f64) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(field_error(source, field, "expected a finite number"))
    }
}

/// Reads a whole file, naming it in the error.
pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::parse(path.display().to_string(), format!("cannot read: {e}")))
}

#[derive(Serialize, Deserialize)]
struct EdgeRecord {
    u: String,
    v: String,
    cap: f64,
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    nodes: Vec<String>,
    edges: Vec<EdgeRecord>,
    terminals: Vec<String>,
}

fn name_index<'a>(
    source: &str,
    field: &str,
    names: &'a [String],
) -> Result<HashMap<&'a str, usize>> {
    let mut index = HashMap::with_capacity(names.len());
    for (i, n) in names.iter().enumerate() {
        if index.insert(n.as_str(), i).is_some() {
            return Err(field_error(
                source,
                format!("{field}[{i}]"),
                format!("duplicate name `{n}`"),
            ));
        }
    }
    Ok(index)
}

fn lookup(source: &str, field: String, index: &HashMap<&str, usize>, name: &str) -> Result<usize> {
    index
        .get(name)
        .copied()
        .ok_or_else(|| field_error(source, field, format!("unknown node `{name}`")))
}

pub fn parse_graph(text: &str, source: &str) -> Result<Graph> {
    let file: GraphFile = serde_json::from_str(text).map_err(|e| syntax(source, e))?;
    let index = name_index(source, "nodes", &file.nodes)?;
    let mut edges = Vec::with_capacity(file.edges.len());
    for (i, e) in file.edges.iter().enumerate() {
        let u = lookup(source, format!("edges[{i}].u"), &index, &e.u)?;
        let v = lookup(source, format!("edges[{i}].v"), &index, &e.v)?;
        if !(e.cap.is_finite() && e.cap > 0.0) {
            return Err(field_error(
                source,
                format!("edges[{i}].cap"),
                "capacity must be positive and finite",
            ));
        }
        edges.push((u, v, e.cap));
    }
    let terminals = file
        .terminals
        .iter()
        .enumerate()
        .map(|(i, t)| lookup(source, format!("terminals[{i}]"), &index, t))
        .collect::<Result<Vec<_>>>()?;
    Graph::new(file.nodes.clone(), edges, terminals).map_err(|e| semantic(source, "edges", e))
}

pub fn graph_to_json(g: &Graph) -> String {
    to_json(&GraphFile {
        nodes: g.names().to_vec(),
        edges: g
            .edges()
            .iter()
            .map(|e| EdgeRecord {
                u: g.name(e.u).to_string(),
                v: g.name(e.v).to_string(),
                cap: e.cap,
            })
            .collect(),
        terminals: g
            .terminals()
            .iter()
            .map(|&t| g.name(t).to_string())
            .collect(),
    })
}

/// Demand CSV with header `src,dst,demand`. A file with header `src,dst`
/// gives every listed pair demand 1.
pub fn parse_demand_csv(text: &str, source: &str, g: &Graph) -> Result<DemandVector> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let csv_error = |e: csv::Error| Error::Parse {
        source_name: source.to_string(),
        line: e.position().map(|p| p.line() as usize),
        field: None,
        message: e.to_string(),
    };
    let headers = reader.headers().map_err(csv_error)?.clone();
    let cols: Vec<&str> = headers.iter().collect();
    let with_amount = match cols.as_slice() {
        ["src", "dst", "demand"] => true,
        ["src", "dst"] => false,
        _ => {
            return Err(Error::Parse {
                source_name: source.to_string(),
                line: Some(1),
                field: None,
                message: format!("expected header `src,dst,demand`, got `{}`", cols.join(",")),
            })
        }
    };
    let mut dem = DemandVector::new();
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map(|p| p.line() as usize);
        let at = |field: &str, message: String| Error::Parse {
            source_name: source.to_string(),
            line,
            field: Some(field.to_string()),
            message,
        };
        let node = |field: &str, i: usize| -> Result<usize> {
            let name = record.get(i).unwrap_or("");
            g.index_of(name)
                .ok_or_else(|| at(field, format!("unknown node `{name}`")))
        };
        let (a, b) = (node("src", 0)?, node("dst", 1)?);
        let amount = if with_amount {
            let raw = record.get(2).unwrap_or("");
            raw.parse::<f64>()
                .map_err(|_| at("demand", format!("`{raw}` is not a number")))?
        } else {
            1.0
        };
        dem.add(a, b, amount).map_err(|e| match e {
            Error::Input(m) => at("demand", m),
            other => other,
        })?;
    }
    Ok(dem)
}

pub fn demand_to_csv(g: &Graph, dem: &DemandVector) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["src", "dst", "demand"]).unwrap();
    for ((a, b), x) in dem.iter() {
        w.write_record([g.name(a), g.name(b), &x.to_string()])
            .unwrap();
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}

#[derive(Serialize, Deserialize)]
struct WeightRecord {
    a: String,
    b: String,
    w: f64,
}

#[derive(Serialize, Deserialize)]
struct SparsifierFile {
    terminals: Vec<String>,
    weights: Vec<WeightRecord>,
    #[serde(default)]
    alpha: Option<f64>,
}

/// Sparsifier JSON with an optional quality `alpha`.
pub fn parse_sparsifier(text: &str, source: &str) -> Result<(Sparsifier, Option<f64>)> {
    let file: SparsifierFile = serde_json::from_str(text).map_err(|e| syntax(source, e))?;
    let index = name_index(source, "terminals", &file.terminals)?;
    let mut h = Sparsifier::new(file.terminals.clone());
    for (i, r) in file.weights.iter().enumerate() {
        let a = lookup(source, format!("weights[{i}].a"), &index, &r.a)?;
        let b = lookup(source, format!("weights[{i}].b"), &index, &r.b)?;
        h.add(a, b, r.w)
            .map_err(|e| semantic(source, &format!("weights[{i}]"), e))?;
    }
    if let Some(a) = file.alpha {
        finite(source, "alpha", a)?;
    }
    Ok((h, file.alpha))
}

pub fn sparsifier_to_json(h: &Sparsifier, alpha: Option<f64>) -> String {
    let names = h.names();
    to_json(&SparsifierFile {
        terminals: names.to_vec(),
        weights: h
            .iter()
            .map(|((a, b), w)| WeightRecord {
                a: names[a].clone(),
                b: names[b].clone(),
                w,
            })
            .collect(),
        alpha,
    })
}

#[derive(Serialize, Deserialize)]
struct DistanceRecord {
    a: String,
    b: String,
    /// `null` encodes an infinite distance.
    d: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct MetricFile {
    nodes: Vec<String>,
    distances: Vec<DistanceRecord>,
}

/// Metric as a list of pair distances; every unordered pair must appear.
pub fn parse_metric(text: &str, source: &str) -> Result<Metric> {
    let file: MetricFile = serde_json::from_str(text).map_err(|e| syntax(source, e))?;
    let index = name_index(source, "nodes", &file.nodes)?;
    let n = file.nodes.len();
    let mut seen = vec![false; n * n];
    let mut m = Metric::zero(file.nodes.clone());
    for (i, r) in file.distances.iter().enumerate() {
        let a = lookup(source, format!("distances[{i}].a"), &index, &r.a)?;
        let b = lookup(source, format!("distances[{i}].b"), &index, &r.b)?;
        let d = r.d.unwrap_or(f64::INFINITY);
        if a == b {
            if d != 0.0 {
                return Err(field_error(
                    source,
                    format!("distances[{i}].d"),
                    "self-distance must be zero",
                ));
            }
            continue;
        }
        if d.is_nan() || d < 0.0 {
            return Err(field_error(
                source,
                format!("distances[{i}].d"),
                "distance must be nonnegative",
            ));
        }
        if seen[a * n + b] {
            return Err(field_error(
                source,
                format!("distances[{i}]"),
                "pair listed twice",
            ));
        }
        seen[a * n + b] = true;
        seen[b * n + a] = true;
        m.set(a, b, d);
    }
    for a in 0..n {
        for b in a + 1..n {
            if !seen[a * n + b] {
                return Err(field_error(
                    source,
                    "distances",
                    format!("missing pair (`{}`, `{}`)", file.nodes[a], file.nodes[b]),
                ));
            }
        }
    }
    Ok(m)
}

pub fn metric_to_json(m: &Metric) -> String {
    let names = m.names();
    let mut distances = Vec::new();
    for a in 0..m.len() {
        for b in a + 1..m.len() {
            let d = m.get(a, b);
            distances.push(DistanceRecord {
                a: names[a].clone(),
                b: names[b].clone(),
                d: d.is_finite().then_some(d),
            });
        }
    }
    to_json(&MetricFile {
        nodes: names.to_vec(),
        distances,
    })
}

#[derive(Serialize, Deserialize)]
struct CutRecord {
    side: Vec<String>,
    weight: f64,
}

#[derive(Serialize, Deserialize)]
struct CutListFile {
    cuts: Vec<CutRecord>,
}

/// Weighted terminal cuts, sides named by terminal.
pub fn parse_cuts(text: &str, source: &str, terminals: &[String]) -> Result<CutDecomposition> {
    let file: CutListFile = serde_json::from_str(text).map_err(|e| syntax(source, e))?;
    let index = name_index(source, "terminals", terminals)?;
    file.cuts
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let mut side = c
                .side
                .iter()
                .enumerate()
                .map(|(j, n)| lookup(source, format!("cuts[{i}].side[{j}]"), &index, n))
                .collect::<Result<Vec<_>>>()?;
            side.sort_unstable();
            side.dedup();
            if !(c.weight.is_finite() && c.weight >= 0.0) {
                return Err(field_error(
                    source,
                    format!("cuts[{i}].weight"),
                    "weight must be nonnegative",
                ));
            }
            Ok((side, c.weight))
        })
        .collect()
}

pub fn cuts_to_json(terminals: &[String], cuts: &CutDecomposition) -> String {
    to_json(&CutListFile {
        cuts: cuts
            .iter()
            .map(|(side, w)| CutRecord {
                side: side.iter().map(|&a| terminals[a].clone()).collect(),
                weight: *w,
            })
            .collect(),
    })
}

#[derive(Serialize, Deserialize)]
struct TreeFile {
    terminals: Vec<String>,
    /// Parent terminal of each terminal, `null` at the root.
    parent: Vec<Option<String>>,
    length: Vec<f64>,
}

fn tree_from_parents(
    source: &str,
    prefix: &str,
    index: &HashMap<&str, usize>,
    parent: &[Option<String>],
    length: &[f64],
) -> Result<TerminalTree> {
    let k = index.len();
    if parent.len() != k || length.len() != k {
        return Err(field_error(
            source,
            format!("{prefix}parent"),
            format!("expected {k} entries"),
        ));
    }
    let mut root = None;
    let mut edges = Vec::with_capacity(k.saturating_sub(1));
    for (a, p) in parent.iter().enumerate() {
        match p {
            None => {
                if root.replace(a).is_some() {
                    return Err(field_error(
                        source,
                        format!("{prefix}parent[{a}]"),
                        "more than one root",
                    ));
                }
            }
            Some(name) => {
                let b = lookup(source, format!("{prefix}parent[{a}]"), index, name)?;
                edges.push((
                    a,
                    b,
                    finite(source, &format!("{prefix}length[{a}]"), length[a])?,
                ));
            }
        }
    }
    let root = root.ok_or_else(|| field_error(source, format!("{prefix}parent"), "no root"))?;
    if length[root] != 0.0 {
        return Err(field_error(
            source,
            format!("{prefix}length[{root}]"),
            "root length must be zero",
        ));
    }
    let tree = TerminalTree::from_edges(k, &edges, root)
        .map_err(|e| semantic(source, &format!("{prefix}parent"), e))?;
    // A cycle plus a disconnected piece can pass the edge count; the
    // rebuilt parents must match the listed ones.
    for (a, p) in parent.iter().enumerate() {
        let listed = p.as_deref().and_then(|n| index.get(n).copied());
        if tree.parent[a] != listed {
            return Err(field_error(
                source,
                format!("{prefix}parent[{a}]"),
                "parent array is not a rooted tree",
            ));
        }
    }
    Ok(tree)
}

fn tree_record(names: &[String], tree: &TerminalTree) -> TreeFile {
    TreeFile {
        terminals: names.to_vec(),
        parent: tree
            .parent
            .iter()
            .map(|p| p.map(|b| names[b].clone()))
            .collect(),
        length: tree.parent_length.clone(),
    }
}

/// Terminal tree with parent arrays and edge lengths.
pub fn parse_tree(text: &str, source: &str) -> Result<(Vec<String>, TerminalTree)> {
    let file: TreeFile = serde_json::from_str(text).map_err(|e| syntax(source, e))?;
    if file.terminals.is_empty() {
        return Err(field_error(
            source,
            "terminals",
            "a tree needs at least one terminal",
        ));
    }
    let index = name_index(source, "terminals", &file.terminals)?;
    let tree = tree_from_parents(source, "", &index, &file.parent, &file.length)?;
    Ok((file.terminals, tree))
}

pub fn tree_to_json(names: &[String], tree: &TerminalTree) -> String {
    to_json(&tree_record(names, tree))
}

#[derive(Serialize, Deserialize)]
struct EntryRecord {
    probability: f64,
    /// Terminal assigned to each node, in graph node order.
    f: Vec<String>,
    parent: Vec<Option<String>>,
    length: Vec<f64>,
    weight: Vec<f64>,
    /// Node sequence in `G` from each terminal to its tree parent; empty at
    /// the root.
    routes: Vec<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
struct DistributionFile {
    congestion: f64,
    history: Vec<f64>,
    entries: Vec<EntryRecord>,
}

fn route_nodes(g: &Graph, start: usize, route: &Route) -> Vec<String> {
    let mut at = start;
    let mut out = vec![g.name(at).to_string()];
    for &(e, _) in route {
        at = g.edges()[e].other(at);
        out.push(g.name(at).to_string());
    }
    out
}

/// Decomposition distribution over the nodes of `g`.
pub fn parse_distribution(
    text: &str,
    source: &str,
    g: &Graph,
) -> Result<DecompositionDistribution> {
    let file: DistributionFile = serde_json::from_str(text).map_err(|e| syntax(source, e))?;
    let term_names: Vec<String> = g
        .terminals()
        .iter()
        .map(|&t| g.name(t).to_string())
        .collect();
    let term_index = name_index(source, "terminals", &term_names)?;
    let mut entries = Vec::with_capacity(file.entries.len());
    for (i, r) in file.entries.iter().enumerate() {
        let prefix = format!("entries[{i}].");
        let probability = finite(source, &format!("{prefix}probability"), r.probability)?;
        let map =
            r.f.iter()
                .enumerate()
                .map(|(v, n)| {
                    term_index.get(n.as_str()).copied().ok_or_else(|| {
                        field_error(
                            source,
                            format!("{prefix}f[{v}]"),
                            format!("unknown terminal `{n}`"),
                        )
                    })
                })
                .collect::<Result<Vec<_>>>()?;
        let f =
            ZeroExtension::new(g, map).map_err(|e| semantic(source, &format!("{prefix}f"), e))?;
        let tree = tree_from_parents(source, &prefix, &term_index, &r.parent, &r.length)?;
        if r.weight.len() != g.k() || r.routes.len() != g.k() {
            return Err(field_error(
                source,
                format!("{prefix}weight"),
                format!("expected {} entries", g.k()),
            ));
        }
        for (c, &w) in r.weight.iter().enumerate() {
            if !(w.is_finite() && w >= 0.0) {
                return Err(field_error(
                    source,
                    format!("{prefix}weight[{c}]"),
                    "weight must be nonnegative",
                ));
            }
        }
        let mut routes = Vec::with_capacity(g.k());
        for (c, path) in r.routes.iter().enumerate() {
            let field = format!("{prefix}routes[{c}]");
            let mut route = Vec::new();
            let nodes = path
                .iter()
                .map(|n| {
                    g.index_of(n).ok_or_else(|| {
                        field_error(source, field.clone(), format!("unknown node `{n}`"))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            for w in nodes.windows(2) {
                let e = g.edge_index(w[0], w[1]).ok_or_else(|| {
                    field_error(source, field.clone(), "consecutive nodes are not adjacent")
                })?;
                route.push((e, if g.edges()[e].u == w[0] { 1 } else { -1 }));
            }
            let expected_start = g.terminals()[c];
            match (tree.parent[c], nodes.first()) {
                (None, None) => {}
                (Some(_), Some(&s)) if s == expected_start => {}
                _ => {
                    return Err(field_error(
                        source,
                        field,
                        "route must start at its terminal, and be empty at the root",
                    ))
                }
            }
            routes.push(route);
        }
        entries.push(PackedEntry {
            decomposition: ZeroDecomposition {
                f,
                tree,
                weights: r.weight.clone(),
            },
            routes,
            probability,
        });
    }
    let dist = DecompositionDistribution {
        entries,
        congestion: finite(source, "congestion", file.congestion)?,
        history: file.history,
    };
    dist.validate(g)
        .map_err(|e| semantic(source, "entries", e))?;
    Ok(dist)
}

pub fn distribution_to_json(g: &Graph, dist: &DecompositionDistribution) -> String {
    let t = g.terminals();
    let term_names: Vec<String> = t.iter().map(|&x| g.name(x).to_string()).collect();
    to_json(&DistributionFile {
        congestion: dist.congestion,
        history: dist.history.clone(),
        entries: dist
            .entries
            .iter()
            .map(|e| {
                let tree = tree_record(&term_names, &e.decomposition.tree);
                EntryRecord {
                    probability: e.probability,
                    f: e.decomposition
                        .f
                        .as_slice()
                        .iter()
                        .map(|&a| term_names[a].clone())
                        .collect(),
                    parent: tree.parent,
                    length: tree.length,
                    weight: e.decomposition.weights.clone(),
                    routes: e
                        .routes
                        .iter()
                        .enumerate()
                        .map(|(c, r)| {
                            if e.decomposition.tree.parent[c].is_none() {
                                Vec::new()
                            } else {
                                route_nodes(g, t[c], r)
                            }
                        })
                        .collect(),
                }
            })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generators;
    use crate::packing::{pack_decompositions, PackingOptions};

    #[test]
    fn graph_round_trip() {
        let g = generators::grid(3, 3, &[0, 2, 8]).unwrap();
        let text = graph_to_json(&g);
        assert_eq!(parse_graph(&text, "g.json").unwrap(), g);
    }

    #[test]
    fn graph_diagnostics() {
        let e = parse_graph("{\"nodes\": [\"a\"],\n \"edges\": [}", "g.json").unwrap_err();
        assert!(matches!(e, Error::Parse { line: Some(2), .. }), "{e}");
        let e = parse_graph(
            r#"{"nodes":["a","b"],"edges":[{"u":"a","v":"c","cap":1}],"terminals":["a"]}"#,
            "g.json",
        )
        .unwrap_err();
        assert_eq!(
            e.to_string(),
            "g.json (field `edges[0].v`): unknown node `c`"
        );
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn demand_csv() {
        let g = generators::path(3, &[0, 2]).unwrap();
        let dem = parse_demand_csv("src,dst,demand\nv0,v2,1.5\n", "d.csv", &g).unwrap();
        assert_eq!(dem.get(0, 2), 1.5);
        assert_eq!(
            parse_demand_csv(&demand_to_csv(&g, &dem), "d.csv", &g).unwrap(),
            dem
        );
        let pairs = parse_demand_csv("src,dst\nv0,v2\n", "p.csv", &g).unwrap();
        assert_eq!(pairs.get(0, 2), 1.0);
        let e = parse_demand_csv("src,dst,demand\nv0,v2,1\nv0,zz,1\n", "d.csv", &g).unwrap_err();
        assert_eq!(
            e.to_string(),
            "d.csv (line 3, field `dst`): unknown node `zz`"
        );
        assert!(parse_demand_csv("a,b\n", "d.csv", &g).is_err());
    }

    #[test]
    fn sparsifier_metric_cuts_round_trip() {
        let mut h = Sparsifier::new(vec!["a".into(), "b".into(), "c".into()]);
        h.add(0, 1, 0.1 + 0.2).unwrap();
        h.add(1, 2, 1.0 / 3.0).unwrap();
        let (back, alpha) =
            parse_sparsifier(&sparsifier_to_json(&h, Some(4.0 / 3.0)), "h.json").unwrap();
        assert_eq!(back, h);
        assert_eq!(alpha, Some(4.0 / 3.0));

        let m = Metric::from_fn(vec!["x".into(), "y".into(), "z".into()], |a, b| {
            if a + b == 3 {
                f64::INFINITY
            } else {
                (a + b) as f64 / 7.0
            }
        });
        let back = parse_metric(&metric_to_json(&m), "m.json").unwrap();
        assert_eq!(back, m);

        let cuts: CutDecomposition = vec![(vec![0], 0.5), (vec![0, 2], 2.0)];
        let names: Vec<String> = vec!["a".into(), "b".into(), "c".into()];
        assert_eq!(
            parse_cuts(&cuts_to_json(&names, &cuts), "c.json", &names).unwrap(),
            cuts
        );
    }

    #[test]
    fn tree_round_trip_and_rejects_cycles() {
        let tree =
            TerminalTree::from_edges(4, &[(0, 1, 1.0), (1, 2, 2.5), (1, 3, 0.5)], 1).unwrap();
        let names: Vec<String> = (0..4).map(|i| format!("t{i}")).collect();
        let (n, back) = parse_tree(&tree_to_json(&names, &tree), "t.json").unwrap();
        assert_eq!((n, back), (names, tree));
        let cyclic =
            r#"{"terminals":["a","b","c","d"],"parent":[null,"c","b","a"],"length":[0,1,1,1]}"#;
        assert!(parse_tree(cyclic, "t.json").is_err());
    }

    #[test]
    fn distribution_round_trip() {
        let g = generators::grid(3, 3, &[0, 2, 6, 8]).unwrap();
        let dist = pack_decompositions(&g, PackingOptions::default(), 5).unwrap();
        let text = distribution_to_json(&g, &dist);
        assert_eq!(parse_distribution(&text, "dist.json", &g).unwrap(), dist);
    }
}
