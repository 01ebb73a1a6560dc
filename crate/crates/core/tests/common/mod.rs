#![allow(dead_code)]

use cgsampler::{FixedSet, Graph, Table};
use rand::Rng;

/// Directed unweighted graph, each off-diagonal pair present with
/// probability `p`.
pub fn random_digraph<R: Rng>(n: usize, p: f64, rng: &mut R) -> Graph {
    let mut g = Graph::directed(n);
    for u in 0..n {
        for v in 0..n {
            if u != v && rng.random_bool(p) {
                g.set_weight(u, v, 1).unwrap();
            }
        }
    }
    g
}

pub fn random_graph<R: Rng>(n: usize, p: f64, rng: &mut R) -> Graph {
    let mut g = Graph::undirected(n);
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(p) {
                g.set_weight(u, v, 1).unwrap();
            }
        }
    }
    g
}

/// Self pairs plus each other pair with probability `q`.
pub fn random_design<R: Rng>(g: &Graph, q: f64, rng: &mut R) -> FixedSet {
    let mut f = FixedSet::for_graph(g);
    for u in 0..g.n() {
        for v in 0..g.n() {
            if u != v && (g.is_directed() || u < v) && rng.random_bool(q) {
                f.insert(u, v);
            }
        }
    }
    f
}

pub fn random_table<R: Rng>(rows: usize, cols: usize, max: u64, rng: &mut R) -> Table {
    let mut t = Table::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            t.set(i, j, rng.random_range(0..=max));
        }
    }
    t
}

pub fn random_cells<R: Rng>(t: &Table, k: usize, rng: &mut R) -> Vec<(usize, usize)> {
    let mut cells = Vec::new();
    while cells.len() < k.min(t.rows() * t.cols()) {
        let c = (rng.random_range(0..t.rows()), rng.random_range(0..t.cols()));
        if !cells.contains(&c) {
            cells.push(c);
        }
    }
    cells
}

pub fn figure3() -> Graph {
    Graph::from_edges(4, false, false, [(0, 2, 1), (1, 3, 1)]).unwrap()
}
