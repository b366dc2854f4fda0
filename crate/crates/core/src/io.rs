//! Time-binned edge-list ingestion and result emission.
//!
//! Edge lists are UTF-8 text with one `t u v` record per line, fields split
//! by commas or whitespace; blank lines and lines starting with `#` are
//! skipped. `t` is a 1-based time bin, `u` and `v` are arbitrary labels.
//!
//! Results are written as CSV (header plus one record per line) or as a JSON
//! array of flat objects with the same field names. Floats are rounded to six
//! significant digits. Run provenance goes to a `<out>.meta.json` sidecar.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::fusion::{subset_label, DetectionResult};
use crate::graph::{Graph, GraphSeries};
use crate::harness::{ComparisonRow, PowerResult};
use crate::invariants::{Feature, FeatureMatrix};
use crate::temporal::NormalizedFeatures;

/// A parsed series plus the label of each vertex index.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeListData {
    pub series: GraphSeries,
    pub labels: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParseOptions {
    /// Pins the vertex set and its order; unknown labels become errors.
    pub label_map: Option<Vec<String>>,
    /// Pins the emitted time range instead of the observed min..=max.
    pub t_range: Option<(usize, usize)>,
}

pub fn parse_edge_list(path: &Path, opts: &ParseOptions) -> Result<EdgeListData> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_edge_list_str(&text, path, opts)
}

fn records(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            return None;
        }
        let fields = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        Some((i + 1, fields))
    })
}

/// Parses edge-list text; `source` only labels error messages.
pub fn parse_edge_list_str(text: &str, source: &Path, opts: &ParseOptions) -> Result<EdgeListData> {
    let parse_err = |line, message: String| Error::Parse {
        path: source.to_path_buf(),
        line,
        message,
    };
    let mut parsed = Vec::new();
    for (line, fields) in records(text) {
        if fields.len() != 3 {
            return Err(parse_err(
                line,
                format!("expected 3 fields (t, u, v), found {}", fields.len()),
            ));
        }
        let t = fields[0]
            .parse::<usize>()
            .ok()
            .filter(|&t| t >= 1)
            .ok_or_else(|| parse_err(line, format!("time bin {:?} is not an integer >= 1", fields[0])))?;
        parsed.push((line, t, fields[1], fields[2]));
    }
    if parsed.is_empty() {
        return Err(Error::NoRecords {
            path: source.to_path_buf(),
        });
    }

    let labels: Vec<String> = match &opts.label_map {
        Some(map) => map.clone(),
        None => sorted_labels(parsed.iter().flat_map(|&(_, _, u, v)| [u, v])),
    };
    let index: HashMap<&str, usize> = labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();

    let (lo, hi) = match opts.t_range {
        Some(r) => r,
        None => {
            let ts = parsed.iter().map(|r| r.1);
            (ts.clone().min().unwrap_or(1), ts.max().unwrap_or(1))
        }
    };
    if lo == 0 || hi < lo {
        return Err(Error::invalid(format!("bad time range {lo}..={hi}")));
    }
    let mut bins: BTreeMap<usize, Vec<(usize, usize)>> = (lo..=hi).map(|t| (t, Vec::new())).collect();
    for (line, t, u, v) in parsed {
        let lookup = |l: &str| {
            index
                .get(l)
                .copied()
                .ok_or_else(|| parse_err(line, format!("label {l:?} not in label map")))
        };
        let pair = (lookup(u)?, lookup(v)?);
        bins.get_mut(&t)
            .ok_or_else(|| parse_err(line, format!("time bin {t} outside {lo}..={hi}")))?
            .push(pair);
    }
    let n = labels.len();
    let graphs = bins
        .into_values()
        .map(|pairs| Graph::from_edge_list(n, &pairs))
        .collect::<Result<Vec<_>>>()?;
    Ok(EdgeListData {
        series: GraphSeries::starting_at(n, lo, graphs)?,
        labels,
    })
}

/// Integer labels sort numerically; otherwise labels sort as strings.
fn sorted_labels<'a>(labels: impl Iterator<Item = &'a str>) -> Vec<String> {
    let set: BTreeSet<&str> = labels.collect();
    let mut out: Vec<String> = set.into_iter().map(str::to_owned).collect();
    if out.iter().all(|l| l.parse::<u64>().is_ok()) {
        out.sort_by_key(|l| l.parse::<u64>().unwrap_or(0));
    }
    out
}

/// One label per line; `#` comments and blank lines are skipped.
pub fn read_label_map(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let labels: Vec<String> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_owned)
        .collect();
    let distinct: BTreeSet<&String> = labels.iter().collect();
    if distinct.len() != labels.len() {
        return Err(Error::invalid(format!("{}: duplicate labels", path.display())));
    }
    Ok(labels)
}

pub fn write_label_map(labels: &[String], path: &Path) -> Result<()> {
    let mut text = String::new();
    for l in labels {
        text.push_str(l);
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Tab-separated `t u v` lines, edges in lexicographic order per bin. Vertex
/// indices are written as-is unless `labels` are given.
pub fn edge_list_string(series: &GraphSeries, labels: Option<&[String]>) -> String {
    let mut out = String::new();
    for (t, g) in series.iter() {
        for (u, v) in g.edges() {
            match labels {
                Some(l) => writeln!(out, "{t}\t{}\t{}", l[u], l[v]),
                None => writeln!(out, "{t}\t{u}\t{v}"),
            }
            .expect("writing to a String cannot fail");
        }
    }
    out
}

pub fn write_edge_list(series: &GraphSeries, labels: Option<&[String]>, path: &Path) -> Result<()> {
    fs::write(path, edge_list_string(series, labels)).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    /// `.json` selects JSON; anything else is CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Csv,
        }
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::invalid(format!("unknown output format {other:?}"))),
        }
    }
}

/// Rounds to six significant digits.
pub fn round_sig6(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.5e}").parse().unwrap_or(x)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
    Empty,
}

impl Cell {
    fn to_csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => {
                let r = round_sig6(*x);
                if r.is_nan() {
                    "NaN".into()
                } else {
                    r.to_string()
                }
            }
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Int(i) => Value::from(*i),
            Cell::Float(x) => serde_json::Number::from_f64(round_sig6(*x)).map_or(Value::Null, Value::Number),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Empty => Value::Null,
        }
    }
}

/// A flat table ready for CSV or JSON output.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::to_csv))?;
        }
        let bytes = w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }

    pub fn to_json(&self) -> Result<String> {
        let array: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                Value::Object(
                    self.columns
                        .iter()
                        .cloned()
                        .zip(row.iter().map(Cell::to_json))
                        .collect(),
                )
            })
            .collect();
        let mut s = serde_json::to_string_pretty(&array)?;
        s.push('\n');
        Ok(s)
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

/// Sidecar path holding provenance for `out`.
pub fn meta_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

/// Writes `table` to `path` and `provenance` to its `.meta.json` sidecar.
pub fn emit_results(table: &Table, path: &Path, format: Format, provenance: &Value) -> Result<()> {
    let body = table.render(format)?;
    fs::write(path, body).map_err(|e| Error::io(path, e))?;
    let meta = meta_path(path);
    let mut text = serde_json::to_string_pretty(provenance)?;
    text.push('\n');
    fs::write(&meta, text).map_err(|e| Error::io(&meta, e))
}

pub fn power_table(results: &[PowerResult]) -> Table {
    let mut table = Table::new(&["scheme", "subset", "q", "power", "se", "M", "error"]);
    for r in results {
        table.rows.push(vec![
            Cell::Text(r.scheme.to_string()),
            Cell::Text(subset_label(&r.subset)),
            Cell::Float(r.q),
            Cell::Float(r.power),
            Cell::Float(r.se),
            Cell::Int(r.reps as i64),
            r.error.clone().map_or(Cell::Empty, Cell::Text),
        ]);
    }
    table
}

pub fn detection_table(results: &[DetectionResult]) -> Table {
    let mut table = Table::new(&["t", "scheme", "subset", "fused", "cv", "reject", "alpha", "weights"]);
    for r in results {
        let weights = r
            .weights
            .iter()
            .map(|w| round_sig6(*w).to_string())
            .collect::<Vec<_>>()
            .join(";");
        table.rows.push(vec![
            Cell::Int(r.t as i64),
            Cell::Text(r.scheme.to_string()),
            Cell::Text(subset_label(&r.subset)),
            Cell::Float(r.fused),
            Cell::Float(r.cv),
            Cell::Bool(r.reject),
            Cell::Float(r.alpha),
            Cell::Text(weights),
        ]);
    }
    table
}

pub fn comparison_table(rows: &[ComparisonRow]) -> Table {
    let mut table = Table::new(&["d_prime", "combinations", "both", "equal_only", "adaptive_only", "neither"]);
    for r in rows {
        table.rows.push(
            [r.d_prime, r.combinations, r.both, r.equal_only, r.adaptive_only, r.neither]
                .into_iter()
                .map(|x| Cell::Int(x as i64))
                .collect(),
        );
    }
    table
}

/// Raw features per time step, followed by the standardized values where
/// they are defined.
pub fn features_table(raw: &FeatureMatrix, normalized: Option<&NormalizedFeatures>) -> Table {
    let mut columns = vec!["t".to_string()];
    columns.extend(Feature::ALL.iter().map(|f| f.name().to_string()));
    if normalized.is_some() {
        columns.extend(Feature::ALL.iter().map(|f| format!("s_{}", f.name())));
    }
    let mut table = Table {
        columns,
        rows: Vec::new(),
    };
    for t in raw.first_t()..=raw.last_t() {
        let mut row = vec![Cell::Int(t as i64)];
        row.extend(raw.row(0, t).iter().map(|&x| Cell::Float(x)));
        if let Some(s) = normalized {
            let (lo, hi) = s.valid_range();
            if (lo..=hi).contains(&t) {
                row.extend(s.row(0, t).iter().map(|&x| Cell::Float(x)));
            } else {
                row.extend(std::iter::repeat_n(Cell::Empty, s.width()));
            }
        }
        table.rows.push(row);
    }
    table
}
