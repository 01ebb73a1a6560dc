//! Instance files and run configuration.
//!
//! * Edge lists: `src dst [weight]` per line, whitespace separated, `#`
//!   starts a comment. A line with a single label declares an isolated
//!   vertex.
//! * Matrices: comma-separated counts, optionally with a header row of
//!   column labels and a leading column of row labels.
//! * Fixed pairs: `src dst status` with status `present`, `absent` or a
//!   non-negative integer weight.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{Method, Tail};
use crate::error::{Error, Result};
use crate::fixed::FixedSet;
use crate::graph::{Graph, Table};

/// Status of a pair named in a fixed-pair file.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FixedStatus {
    Present,
    Absent,
    Weight(u64),
}

/// A parsed problem instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub graph: Graph,
    /// Design set, including the self pairs and, for tables, every pair
    /// that is not a row -> column cell.
    pub fixed: FixedSet,
    pub labels: Vec<String>,
    /// Number of row vertices when the instance is a table.
    pub table_rows: Option<usize>,
}

impl Instance {
    pub fn table(&self) -> Option<Table> {
        self.table_rows.map(|r| Table::from_graph(&self.graph, r).expect("rows within range"))
    }

    /// Cells `(i, j)` of a table instance that are fixed by the design.
    pub fn fixed_cells(&self) -> Vec<(usize, usize)> {
        let Some(r) = self.table_rows else {
            return Vec::new();
        };
        let c = self.graph.n() - r;
        let mut out = Vec::new();
        for i in 0..r {
            for j in 0..c {
                if self.fixed.contains(i, r + j) {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EdgeListOptions {
    pub directed: bool,
    /// Treat the graph as weighted even if no weight column appears.
    pub weighted: bool,
    pub allow_self_loops: bool,
}

fn perr(path: &str, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_string(),
        line,
        message: message.into(),
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("");
        let toks: Vec<&str> = l.split_whitespace().collect();
        (!toks.is_empty()).then_some((i + 1, toks))
    })
}

/// Parses an edge list. `path` is only used in error messages.
pub fn parse_edge_list(text: &str, path: &str, opts: EdgeListOptions) -> Result<(Graph, Vec<String>)> {
    let mut labels: Vec<String> = Vec::new();
    let mut ids: HashMap<String, usize> = HashMap::new();
    let mut intern = |s: &str| -> usize {
        if let Some(&i) = ids.get(s) {
            return i;
        }
        ids.insert(s.to_string(), labels.len());
        labels.push(s.to_string());
        labels.len() - 1
    };
    let mut edges = Vec::new();
    let mut weighted = opts.weighted;
    for (line, toks) in content_lines(text) {
        match toks.as_slice() {
            [v] => {
                intern(v);
            }
            [u, v] => edges.push((line, intern(u), intern(v), 1u64)),
            [u, v, w] => {
                let w: u64 = w
                    .parse()
                    .map_err(|_| perr(path, line, format!("weight `{w}` is not a non-negative integer")))?;
                weighted = true;
                edges.push((line, intern(u), intern(v), w));
            }
            _ => return Err(perr(path, line, "expected `src dst [weight]`")),
        }
    }
    let n = labels.len();
    let mut g = Graph::new(n, opts.directed, weighted);
    if opts.allow_self_loops {
        g = g.with_self_loops(true)?;
    }
    for (line, u, v, w) in edges {
        if u == v && !g.allows_self_loops() {
            return Err(perr(path, line, format!("self-loop on `{}`", labels[u])));
        }
        if !weighted && g.has_edge(u, v) {
            return Err(perr(path, line, "duplicate edge in an unweighted graph"));
        }
        if !weighted && w > 1 {
            return Err(perr(path, line, "weight above 1 in an unweighted graph"));
        }
        let w = if weighted { g.weight(u, v) + w } else { w };
        g.set_weight(u, v, w).map_err(|e| perr(path, line, e.to_string()))?;
    }
    Ok((g, labels))
}

/// Inverse of [`parse_edge_list`]: vertices are declared in label order,
/// then one line per edge.
pub fn write_edge_list(g: &Graph, labels: &[String]) -> String {
    let mut out = String::new();
    for l in labels {
        let _ = writeln!(out, "{l}");
    }
    for (e, w) in g.edges() {
        if g.is_weighted() {
            let _ = writeln!(out, "{} {} {w}", labels[e.from], labels[e.to]);
        } else {
            let _ = writeln!(out, "{} {}", labels[e.from], labels[e.to]);
        }
    }
    out
}

/// Labelled table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelledTable {
    pub table: Table,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
}

pub fn parse_matrix_csv(text: &str, path: &str) -> Result<LabelledTable> {
    let mut rows: Vec<(usize, Vec<&str>)> = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, l)| (i + 1, l.split(',').map(str::trim).collect()))
        .collect();
    if rows.is_empty() {
        return Err(perr(path, 0, "empty matrix"));
    }
    let numeric = |s: &str| s.parse::<u64>().is_ok();
    // header: a blank corner, or labels past the first cell
    let first = &rows[0].1;
    let header = first[0].is_empty() || first.iter().skip(1).any(|s| !numeric(s));
    let header = if header { Some(rows.remove(0)) } else { None };
    if rows.is_empty() {
        return Err(perr(path, 0, "matrix has no data rows"));
    }
    let row_labelled = rows.iter().any(|(_, r)| !numeric(r[0]));
    let skip = usize::from(row_labelled);
    let width = rows[0].1.len() - skip;
    let mut cells = Vec::with_capacity(rows.len());
    let mut row_labels = Vec::new();
    for (k, (line, r)) in rows.iter().enumerate() {
        if r.len() - skip != width {
            return Err(perr(path, *line, format!("expected {width} counts, found {}", r.len() - skip)));
        }
        row_labels.push(if row_labelled { r[0].to_string() } else { (k + 1).to_string() });
        let mut row = Vec::with_capacity(width);
        for s in &r[skip..] {
            row.push(
                s.parse::<u64>()
                    .map_err(|_| perr(path, *line, format!("`{s}` is not a non-negative integer")))?,
            );
        }
        cells.push(row);
    }
    let col_labels = match header {
        Some((line, h)) => {
            if h.len() < width {
                return Err(perr(path, line, "header shorter than the rows"));
            }
            h.iter().skip(h.len() - width).map(|s| s.to_string()).collect()
        }
        None => (1..=width).map(|j| j.to_string()).collect(),
    };
    Ok(LabelledTable {
        table: Table::from_rows(&cells)?,
        row_labels,
        col_labels,
    })
}

pub fn write_matrix_csv(t: &LabelledTable) -> String {
    let mut out = String::new();
    let _ = writeln!(out, ",{}", t.col_labels.join(","));
    for (i, l) in t.row_labels.iter().enumerate() {
        let row: Vec<String> = (0..t.table.cols()).map(|j| t.table.get(i, j).to_string()).collect();
        let _ = writeln!(out, "{l},{}", row.join(","));
    }
    out
}

/// Parses a fixed-pair file against `inst` and adds the pairs to its design
/// set. Every named status must agree with the instance graph.
pub fn apply_fixed_pairs(inst: &mut Instance, text: &str, path: &str) -> Result<Vec<(usize, usize, FixedStatus)>> {
    let lookup = |names: &[String], s: &str| names.iter().position(|l| l == s);
    let (src_names, dst_names, dst_offset) = match inst.table_rows {
        Some(r) => (inst.labels[..r].to_vec(), inst.labels[r..].to_vec(), r),
        None => (inst.labels.clone(), inst.labels.clone(), 0),
    };
    let mut out = Vec::new();
    for (line, toks) in content_lines(text) {
        let [u, v, status] = toks.as_slice() else {
            return Err(perr(path, line, "expected `src dst status`"));
        };
        let a = lookup(&src_names, u).ok_or_else(|| perr(path, line, format!("unknown vertex `{u}`")))?;
        let b = lookup(&dst_names, v).ok_or_else(|| perr(path, line, format!("unknown vertex `{v}`")))? + dst_offset;
        let status = match *status {
            "present" => FixedStatus::Present,
            "absent" => FixedStatus::Absent,
            s => FixedStatus::Weight(
                s.parse()
                    .map_err(|_| perr(path, line, format!("status `{s}` is not present, absent or a weight")))?,
            ),
        };
        let w = inst.graph.weight(a, b);
        let ok = match status {
            FixedStatus::Present => w > 0,
            FixedStatus::Absent => w == 0,
            FixedStatus::Weight(k) => w == k,
        };
        if !ok {
            return Err(perr(path, line, format!("status {status:?} disagrees with weight {w} of `{u} {v}`")));
        }
        inst.fixed.insert(a, b);
        out.push((a, b, status));
    }
    Ok(out)
}

/// Reads a graph (`.csv` is a matrix, anything else an edge list) and an
/// optional fixed-pair file.
pub fn parse_instance(path: &Path, fixed: Option<&Path>, opts: EdgeListOptions) -> Result<Instance> {
    let text = std::fs::read_to_string(path)?;
    let name = path.display().to_string();
    let mut inst = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        let t = parse_matrix_csv(&text, &name)?;
        let mut labels = t.row_labels.clone();
        labels.extend(t.col_labels.iter().cloned());
        Instance {
            graph: t.table.to_graph(),
            fixed: t.table.structural_fixed(),
            labels,
            table_rows: Some(t.table.rows()),
        }
    } else {
        let (graph, labels) = parse_edge_list(&text, &name, opts)?;
        Instance {
            fixed: FixedSet::for_graph(&graph),
            graph,
            labels,
            table_rows: None,
        }
    };
    if let Some(fp) = fixed {
        let ftext = std::fs::read_to_string(fp)?;
        apply_fixed_pairs(&mut inst, &ftext, &fp.display().to_string())?;
    }
    Ok(inst)
}

/// The statistic a run tracks.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatisticKind {
    /// Likelihood ratio against the (quasi-)independence fit.
    #[default]
    G2,
    ChiSquared,
    Compartmentalization,
    EdgeCount,
}

impl StatisticKind {
    pub fn name(self) -> &'static str {
        match self {
            StatisticKind::G2 => "g2",
            StatisticKind::ChiSquared => "chi_squared",
            StatisticKind::Compartmentalization => "compartmentalization",
            StatisticKind::EdgeCount => "edge_count",
        }
    }
}

fn default_burn_in_frac() -> f64 {
    0.2
}

fn default_thin() -> usize {
    1
}

/// JSON run configuration. `steps` counts retained (thinned) samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub method: Method,
    pub steps: usize,
    #[serde(default = "default_burn_in_frac")]
    pub burn_in_frac: f64,
    #[serde(default = "default_thin")]
    pub thin: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub statistic: StatisticKind,
    #[serde(default)]
    pub tail: Tail,
    #[serde(default)]
    pub plus_one: bool,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if cfg.thin == 0 {
            return Err(Error::Config("thin must be positive".into()));
        }
        if !(cfg.burn_in_frac >= 0.0) {
            return Err(Error::Config("burn_in_frac must be non-negative".into()));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matching_edge_list() {
        let text = "# two disjoint edges\n1 3\n2 4\n";
        let (g, labels) = parse_edge_list(text, "m.txt", EdgeListOptions::default()).unwrap();
        assert_eq!(g.n(), 4);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(labels, vec!["1", "3", "2", "4"]);
        assert!(!g.is_weighted());
    }

    #[test]
    fn edge_list_round_trip() {
        let text = "a\nb c 3\nc d 1\nd b 2\n";
        let opts = EdgeListOptions {
            directed: true,
            ..Default::default()
        };
        let (g, labels) = parse_edge_list(text, "x", opts).unwrap();
        let again = parse_edge_list(&write_edge_list(&g, &labels), "y", opts).unwrap();
        assert_eq!(again, (g, labels));
    }

    #[test]
    fn edge_list_errors_carry_lines() {
        let r = parse_edge_list("a b\nb c -1\n", "f", EdgeListOptions::default());
        match r {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(parse_edge_list("a a\n", "f", EdgeListOptions::default()).is_err());
        assert!(parse_edge_list("a b c d\n", "f", EdgeListOptions::default()).is_err());
    }

    #[test]
    fn matrix_with_labels() {
        let text = ",x,y,z\nA,1,0,2\nB,3,4,0\n";
        let t = parse_matrix_csv(text, "t.csv").unwrap();
        assert_eq!(t.table.to_nested(), vec![vec![1, 0, 2], vec![3, 4, 0]]);
        assert_eq!(t.row_labels, vec!["A", "B"]);
        assert_eq!(t.col_labels, vec!["x", "y", "z"]);
        let again = parse_matrix_csv(&write_matrix_csv(&t), "t.csv").unwrap();
        assert_eq!(again, t);
    }

    #[test]
    fn bare_matrix() {
        let t = parse_matrix_csv("1,2\n3,4\n", "t.csv").unwrap();
        assert_eq!(t.table.to_nested(), vec![vec![1, 2], vec![3, 4]]);
        assert_eq!(t.row_labels, vec!["1", "2"]);
        assert!(parse_matrix_csv("1,2\n3\n", "t.csv").is_err());
    }

    #[test]
    fn fixed_pairs_validate_against_graph() {
        let (g, labels) = parse_edge_list("a b\nb c\n", "g", EdgeListOptions { directed: true, ..Default::default() }).unwrap();
        let mut inst = Instance {
            fixed: FixedSet::for_graph(&g),
            graph: g,
            labels,
            table_rows: None,
        };
        let fixed = apply_fixed_pairs(&mut inst, "a b present\nc a absent\n", "f").unwrap();
        assert_eq!(fixed.len(), 2);
        assert!(inst.fixed.contains(0, 1));
        assert!(inst.fixed.contains(2, 0));
        let err = apply_fixed_pairs(&mut inst, "a q absent\n", "f").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
        assert!(apply_fixed_pairs(&mut inst, "a c present\n", "f").is_err());
    }

    #[test]
    fn table_fixed_cells_use_row_and_column_labels() {
        let t = parse_matrix_csv(",a,b\na,5,1\nb,2,7\n", "t.csv").unwrap();
        let mut labels = t.row_labels.clone();
        labels.extend(t.col_labels.clone());
        let mut inst = Instance {
            graph: t.table.to_graph(),
            fixed: t.table.structural_fixed(),
            labels,
            table_rows: Some(2),
        };
        apply_fixed_pairs(&mut inst, "a a 5\nb b 7\n", "f").unwrap();
        assert_eq!(inst.fixed_cells(), vec![(0, 0), (1, 1)]);
    }

    #[test]
    fn run_config_defaults_and_errors() {
        let c = RunConfig::from_json(r#"{"method":"wgs","steps":100}"#).unwrap();
        assert_eq!(c.burn_in_frac, 0.2);
        assert_eq!(c.thin, 1);
        assert_eq!(c.tail, Tail::Upper);
        let c = RunConfig::from_json(r#"{"method":"ugs","steps":5,"statistic":"compartmentalization","tail":"lower"}"#).unwrap();
        assert_eq!(c.statistic, StatisticKind::Compartmentalization);
        assert!(RunConfig::from_json(r#"{"method":"x","steps":1}"#).is_err());
        assert!(RunConfig::from_json(r#"{"method":"ds","steps":1,"thin":0}"#).is_err());
    }
}
