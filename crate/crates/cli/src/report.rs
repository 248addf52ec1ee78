use serde_json::{json, Map, Value};
use vsparse_core::{Error, Result, EXACT_TOL, FEAS_TOL, OPT_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

/// What a command produced: a one-line summary for the terminal, a JSON
/// document, and optionally a CSV table.
#[derive(Debug, Clone)]
pub struct Report {
    pub summary: String,
    pub json: Value,
    pub table: Option<Table>,
}

/// Shortest round-trip text for a float; `inf`, `-inf`, `nan` otherwise.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// JSON number, or a string for non-finite values.
pub fn jnum(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(num(x))
    }
}

pub struct Meta<'a> {
    pub command: &'a str,
    pub config: Value,
    pub tol: f64,
}

impl Meta<'_> {
    fn to_json(&self) -> Value {
        json!({
            "tool": "vsparse",
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "config": self.config,
            "tolerances": {
                "feasibility": FEAS_TOL,
                "optimality": OPT_TOL,
                "exact": EXACT_TOL,
                "report": self.tol,
            },
        })
    }
}

pub fn render(report: &Report, meta: &Meta, format: Format) -> Result<String> {
    match format {
        Format::Json => {
            let mut obj = match &report.json {
                Value::Object(m) => m.clone(),
                other => {
                    let mut m = Map::new();
                    m.insert("result".into(), other.clone());
                    m
                }
            };
            obj.insert("meta".into(), meta.to_json());
            let mut s = serde_json::to_string_pretty(&Value::Object(obj))
                .map_err(|e| Error::internal(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
        Format::Csv => {
            let table = report
                .table
                .as_ref()
                .ok_or_else(|| Error::input(format!("`{}` has no CSV report", meta.command)))?;
            let mut out = String::new();
            out.push_str(&format!("# vsparse {}\n", env!("CARGO_PKG_VERSION")));
            out.push_str(&format!("# command: {}\n", meta.command));
            out.push_str(&format!("# config: {}\n", meta.config));
            out.push_str(&format!(
                "# tolerances: feasibility={FEAS_TOL} optimality={OPT_TOL} exact={EXACT_TOL} report={}\n",
                meta.tol
            ));
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&table.header)
                .map_err(|e| Error::internal(e.to_string()))?;
            for row in &table.rows {
                w.write_record(row)
                    .map_err(|e| Error::internal(e.to_string()))?;
            }
            let bytes = w.into_inner().map_err(|e| Error::internal(e.to_string()))?;
            out.push_str(&String::from_utf8(bytes).map_err(|e| Error::internal(e.to_string()))?);
            Ok(out)
        }
    }
}
