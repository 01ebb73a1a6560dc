//! Dense graph representation shared by every sampler.
//!
//! Vertices are `0..n`. Weights are non-negative integers held in a
//! row-major `n * n` matrix; `0` means "no edge". Undirected graphs keep the
//! matrix symmetric. Contingency tables are embedded as bipartite digraphs
//! with rows `0..I` pointing at columns `I..I+J` (see [`Table`]).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixed::FixedSet;

/// An ordered vertex pair `from -> to`. For undirected graphs the
/// orientation carries no meaning.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
}

impl Edge {
    pub const fn new(from: usize, to: usize) -> Self {
        Edge { from, to }
    }

    pub const fn reversed(self) -> Self {
        Edge {
            from: self.to,
            to: self.from,
        }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.from, self.to)
    }
}

impl From<(usize, usize)> for Edge {
    fn from((from, to): (usize, usize)) -> Self {
        Edge { from, to }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Graph {
    n: usize,
    directed: bool,
    weighted: bool,
    allow_self_loops: bool,
    weights: Vec<u64>,
}

impl Graph {
    pub fn new(n: usize, directed: bool, weighted: bool) -> Self {
        Graph {
            n,
            directed,
            weighted,
            allow_self_loops: false,
            weights: vec![0; n * n],
        }
    }

    pub fn directed(n: usize) -> Self {
        Self::new(n, true, false)
    }

    pub fn undirected(n: usize) -> Self {
        Self::new(n, false, false)
    }

    /// Self-loops are only meaningful for directed graphs.
    pub fn with_self_loops(mut self, allow: bool) -> Result<Self> {
        if allow && !self.directed {
            return Err(Error::InvalidGraph(
                "self-loops are only supported on directed graphs".into(),
            ));
        }
        self.allow_self_loops = allow;
        Ok(self)
    }

    /// Builds a graph from an edge list; unweighted graphs take weight 1 per edge.
    pub fn from_edges<I>(n: usize, directed: bool, weighted: bool, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, u64)>,
    {
        let mut g = Graph::new(n, directed, weighted);
        for (u, v, w) in edges {
            g.set_weight(u, v, w)?;
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn is_weighted(&self) -> bool {
        self.weighted
    }

    pub fn allows_self_loops(&self) -> bool {
        self.allow_self_loops
    }

    #[inline]
    pub fn weight(&self, u: usize, v: usize) -> u64 {
        self.weights[u * self.n + v]
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.weight(u, v) > 0
    }

    fn check_vertex(&self, v: usize) -> Result<()> {
        if v >= self.n {
            Err(Error::VertexOutOfRange {
                vertex: v,
                n: self.n,
            })
        } else {
            Ok(())
        }
    }

    pub fn set_weight(&mut self, u: usize, v: usize, w: u64) -> Result<()> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if !self.weighted && w > 1 {
            return Err(Error::InvalidGraph(format!(
                "weight {w} on {u}->{v} in an unweighted graph"
            )));
        }
        if u == v && w > 0 && !self.allow_self_loops {
            return Err(Error::InvalidGraph(format!("self-loop at vertex {u}")));
        }
        self.set_weight_unchecked(u, v, w);
        Ok(())
    }

    #[inline]
    pub(crate) fn set_weight_unchecked(&mut self, u: usize, v: usize, w: u64) {
        self.weights[u * self.n + v] = w;
        if !self.directed {
            self.weights[v * self.n + u] = w;
        }
    }

    /// Row-major weight matrix.
    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    /// Edges with positive weight. Undirected graphs list each edge once
    /// with `from <= to`.
    pub fn edges(&self) -> impl Iterator<Item = (Edge, u64)> + '_ {
        let n = self.n;
        let directed = self.directed;
        (0..n).flat_map(move |u| {
            let start = if directed { 0 } else { u };
            (start..n).filter_map(move |v| {
                let w = self.weight(u, v);
                (w > 0).then_some((Edge::new(u, v), w))
            })
        })
    }

    pub fn edge_count(&self) -> usize {
        self.edges().count()
    }

    /// Same vertex set and flags, no edges.
    pub fn empty_like(&self) -> Self {
        Graph {
            weights: vec![0; self.n * self.n],
            ..self.clone()
        }
    }

    /// The same graph read as integer-weighted, each edge with weight 1.
    pub fn to_weighted(&self) -> Self {
        Graph {
            weighted: true,
            ..self.clone()
        }
    }

    /// Replace edge `remove` by edge `add`. Both must be viable: `remove`
    /// present and `add` absent. Fixed-set checks are the caller's job.
    pub fn swap_edge(&mut self, remove: Edge, add: Edge) -> Result<()> {
        self.check_vertex(remove.from)?;
        self.check_vertex(remove.to)?;
        self.check_vertex(add.from)?;
        self.check_vertex(add.to)?;
        if self.weighted {
            return Err(Error::WeightedInput);
        }
        if !self.has_edge(remove.from, remove.to) {
            return Err(Error::NotViable {
                remove,
                add,
                reason: "edge to remove is absent",
            });
        }
        if self.has_edge(add.from, add.to) {
            return Err(Error::NotViable {
                remove,
                add,
                reason: "edge to add is already present",
            });
        }
        if add.from == add.to && !self.allow_self_loops {
            return Err(Error::NotViable {
                remove,
                add,
                reason: "self-loops are not allowed",
            });
        }
        self.set_weight_unchecked(remove.from, remove.to, 0);
        self.set_weight_unchecked(add.from, add.to, 1);
        Ok(())
    }
}

/// Returns a copy of `g` with `remove` replaced by `add`.
pub fn apply_swap(g: &Graph, remove: Edge, add: Edge) -> Result<Graph> {
    let mut out = g.clone();
    out.swap_edge(remove, add)?;
    Ok(out)
}

/// In/out degree or strength per vertex. Undirected graphs carry two equal
/// vectors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeSequence {
    pub in_deg: Vec<u64>,
    pub out_deg: Vec<u64>,
}

impl DegreeSequence {
    pub fn total(&self) -> u64 {
        self.out_deg.iter().sum()
    }
}

fn sums(g: &Graph, f: impl Fn(u64) -> u64) -> DegreeSequence {
    let n = g.n();
    let mut in_deg = vec![0; n];
    let mut out_deg = vec![0; n];
    for u in 0..n {
        for v in 0..n {
            let w = f(g.weight(u, v));
            out_deg[u] += w;
            in_deg[v] += w;
        }
    }
    DegreeSequence { in_deg, out_deg }
}

pub fn degree_sequence(g: &Graph) -> Result<DegreeSequence> {
    if g.is_weighted() {
        return Err(Error::WeightedInput);
    }
    Ok(sums(g, |w| u64::from(w > 0)))
}

pub fn strength_sequence(g: &Graph) -> DegreeSequence {
    sums(g, |w| w)
}

/// A two-way contingency table of non-negative counts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Table {
    rows: usize,
    cols: usize,
    cells: Vec<u64>,
}

impl Table {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Table {
            rows,
            cols,
            cells: vec![0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<u64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidGraph("ragged table".into()));
        }
        Ok(Table {
            rows: r,
            cols: c,
            cells: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.cells[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        self.cells[i * self.cols + j] = v;
    }

    pub fn cells(&self) -> &[u64] {
        &self.cells
    }

    pub fn row_sums(&self) -> Vec<u64> {
        self.cells.chunks(self.cols.max(1)).map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<u64> {
        let mut out = vec![0; self.cols];
        for i in 0..self.rows {
            for (j, o) in out.iter_mut().enumerate() {
                *o += self.get(i, j);
            }
        }
        out
    }

    pub fn total(&self) -> u64 {
        self.cells.iter().sum()
    }

    pub fn to_nested(&self) -> Vec<Vec<u64>> {
        self.cells.chunks(self.cols.max(1)).map(<[u64]>::to_vec).collect()
    }

    /// Bipartite embedding: row `i` is vertex `i`, column `j` is vertex
    /// `rows + j`, and cell `(i, j)` is the weight of edge `i -> rows + j`.
    pub fn to_graph(&self) -> Graph {
        let mut g = Graph::new(self.rows + self.cols, true, true);
        for i in 0..self.rows {
            for j in 0..self.cols {
                g.set_weight_unchecked(i, self.rows + j, self.get(i, j));
            }
        }
        g
    }

    /// Inverse of [`Table::to_graph`].
    pub fn from_graph(g: &Graph, rows: usize) -> Result<Self> {
        if rows > g.n() {
            return Err(Error::InvalidGraph("more rows than vertices".into()));
        }
        let cols = g.n() - rows;
        let mut t = Table::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                t.set(i, j, g.weight(i, rows + j));
            }
        }
        Ok(t)
    }

    /// Every pair of the bipartite embedding that is not a row -> column
    /// cell. Those pairs carry weight zero in every table.
    pub fn structural_fixed(&self) -> FixedSet {
        let n = self.rows + self.cols;
        let mut f = FixedSet::new(n, true);
        for u in 0..n {
            for v in 0..n {
                if !(u < self.rows && v >= self.rows) {
                    f.insert(u, v);
                }
            }
        }
        f
    }

    /// Fixed set over the embedding, given a set of fixed cells `(i, j)`.
    pub fn fixed_with_cells(&self, cells: impl IntoIterator<Item = (usize, usize)>) -> FixedSet {
        let mut f = self.structural_fixed();
        for (i, j) in cells {
            f.insert(i, self.rows + j);
        }
        f
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn figure3() -> Graph {
        // vertices 1..4 of the figure are 0..3 here
        Graph::from_edges(4, false, false, [(0, 2, 1), (1, 3, 1)]).unwrap()
    }

    #[test]
    fn matching_degrees() {
        let d = degree_sequence(&figure3()).unwrap();
        assert_eq!(d.out_deg, vec![1, 1, 1, 1]);
        assert_eq!(d.in_deg, vec![1, 1, 1, 1]);
    }

    #[test]
    fn empty_graph_degrees() {
        let d = degree_sequence(&Graph::directed(3)).unwrap();
        assert_eq!(d.in_deg, vec![0, 0, 0]);
        assert_eq!(d.out_deg, vec![0, 0, 0]);
    }

    #[test]
    fn directed_two_cycle() {
        let g = Graph::from_edges(2, true, false, [(0, 1, 1), (1, 0, 1)]).unwrap();
        let d = degree_sequence(&g).unwrap();
        assert_eq!(d.in_deg, vec![1, 1]);
        assert_eq!(d.out_deg, vec![1, 1]);
    }

    #[test]
    fn degree_sequence_rejects_weighted() {
        let g = Table::from_rows(&[vec![1, 2]]).unwrap().to_graph();
        assert!(matches!(degree_sequence(&g), Err(Error::WeightedInput)));
    }

    #[test]
    fn strengths_of_tables() {
        for (rows, r, c) in [
            (vec![vec![1, 1], vec![1, 1]], vec![2, 2], vec![2, 2]),
            (vec![vec![2, 0], vec![0, 2]], vec![2, 2], vec![2, 2]),
            (vec![vec![5, 1], vec![1, 1]], vec![6, 2], vec![6, 2]),
        ] {
            let t = Table::from_rows(&rows).unwrap();
            let s = strength_sequence(&t.to_graph());
            assert_eq!(&s.out_deg[..2], &r[..]);
            assert_eq!(&s.in_deg[2..], &c[..]);
            assert_eq!(t.row_sums(), r);
            assert_eq!(t.col_sums(), c);
        }
    }

    #[test]
    fn switch_step_and_inverse() {
        // w0=0, w1=1, w2=2
        let g = Graph::from_edges(3, true, false, [(1, 0, 1)]).unwrap();
        let h = apply_swap(&g, Edge::new(1, 0), Edge::new(1, 2)).unwrap();
        assert_eq!(h.edges().map(|(e, _)| e).collect::<Vec<_>>(), vec![Edge::new(1, 2)]);
        let back = apply_swap(&h, Edge::new(1, 2), Edge::new(1, 0)).unwrap();
        assert_eq!(back, g);
        // out-degree of the shared source is unchanged
        assert_eq!(
            degree_sequence(&g).unwrap().out_deg,
            degree_sequence(&h).unwrap().out_deg
        );
    }

    #[test]
    fn swap_missing_edge_is_rejected() {
        let g = Graph::directed(3);
        let err = apply_swap(&g, Edge::new(1, 0), Edge::new(1, 2)).unwrap_err();
        assert!(matches!(err, Error::NotViable { .. }));
    }

    #[test]
    fn table_embedding_round_trip() {
        let t = Table::from_rows(&[vec![3, 0, 1], vec![0, 2, 5]]).unwrap();
        let g = t.to_graph();
        assert_eq!(Table::from_graph(&g, 2).unwrap(), t);
        let f = t.structural_fixed();
        assert!(!f.contains(0, 2));
        assert!(f.contains(2, 0));
        assert!(f.contains(0, 1));
    }

    #[test]
    fn undirected_self_loops_rejected() {
        assert!(Graph::undirected(3).with_self_loops(true).is_err());
        assert!(Graph::directed(3).with_self_loops(true).is_ok());
    }
}
