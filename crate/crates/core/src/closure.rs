//! Structurally fixed pairs.
//!
//! Given a design set `F` and a graph `G`, the closure is the set of pairs
//! whose edge status is the same in every graph sharing `G`'s degree
//! sequence and `G`'s statuses on `F`. It is read off the strongly connected
//! components of a bipartite auxiliary digraph: left vertex `u_i`, right
//! vertex `v_j`, with arc `v_j -> u_i` when `ij` is a free edge of `G` and
//! `u_i -> v_j` when `ij` is a free non-edge. A free pair is fixed exactly
//! when its two endpoints land in different components.
//!
//! For directed graphs this is exact. Undirected graphs are handled through
//! their symmetric digraph; the result is always sound (every reported pair
//! is fixed) but can miss pairs forced by odd-cycle parity.

use crate::error::{Error, Result};
use crate::fixed::FixedSet;
use crate::graph::Graph;

/// Bipartite digraph on `2n` vertices: `u_i` is `i`, `v_j` is `n + j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuxiliaryDigraph {
    n: usize,
    adj: Vec<Vec<usize>>,
}

impl AuxiliaryDigraph {
    pub fn graph_order(&self) -> usize {
        self.n
    }

    pub fn left(&self, i: usize) -> usize {
        i
    }

    pub fn right(&self, j: usize) -> usize {
        self.n + j
    }

    pub fn vertex_count(&self) -> usize {
        2 * self.n
    }

    pub fn successors(&self, x: usize) -> &[usize] {
        &self.adj[x]
    }

    pub fn has_arc(&self, x: usize, y: usize) -> bool {
        self.adj[x].contains(&y)
    }

    pub fn arc_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum()
    }

    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(x, s)| s.iter().map(move |&y| (x, y)))
    }

    pub fn adjacency(&self) -> &[Vec<usize>] {
        &self.adj
    }
}

pub fn build_auxiliary(g: &Graph, f: &FixedSet) -> Result<AuxiliaryDigraph> {
    if g.is_weighted() {
        return Err(Error::WeightedInput);
    }
    let n = g.n();
    let f = f.normalized_for(g);
    let mut adj = vec![Vec::new(); 2 * n];
    for i in 0..n {
        for j in 0..n {
            if f.contains(i, j) {
                continue;
            }
            if g.has_edge(i, j) {
                adj[n + j].push(i);
            } else {
                adj[i].push(n + j);
            }
        }
    }
    Ok(AuxiliaryDigraph { n, adj })
}

/// Component label per vertex; labels are `0..count`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SccPartition {
    pub component: Vec<usize>,
    pub count: usize,
}

impl SccPartition {
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.count];
        for (v, &c) in self.component.iter().enumerate() {
            out[c].push(v);
        }
        out
    }
}

/// Iterative Tarjan, linear in vertices plus arcs.
pub fn scc(adj: &[Vec<usize>]) -> SccPartition {
    const UNSEEN: usize = usize::MAX;
    let n = adj.len();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut component = vec![UNSEEN; n];
    let mut stack = Vec::new();
    let mut call: Vec<(usize, usize)> = Vec::new();
    let mut next = 0;
    let mut count = 0;

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        call.push((root, 0));
        while let Some(&(v, pos)) = call.last() {
            if pos == 0 && index[v] == UNSEEN {
                index[v] = next;
                low[v] = next;
                next += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            if let Some(&w) = adj[v].get(pos) {
                call.last_mut().expect("non-empty call stack").1 += 1;
                if index[w] == UNSEEN {
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w] = false;
                    component[w] = count;
                    if w == v {
                        break;
                    }
                }
                count += 1;
            }
        }
    }
    SccPartition { component, count }
}

pub fn strongly_connected_components(b: &AuxiliaryDigraph) -> SccPartition {
    scc(&b.adj)
}

/// The closure of `f` under the degree constraints of `g`.
pub fn compute_closure(g: &Graph, f: &FixedSet) -> Result<FixedSet> {
    let b = build_auxiliary(g, f)?;
    let parts = strongly_connected_components(&b);
    let mut closure = f.normalized_for(g);
    let n = g.n();
    for i in 0..n {
        for j in 0..n {
            if !closure.contains(i, j)
                && parts.component[b.left(i)] != parts.component[b.right(j)]
            {
                closure.insert(i, j);
            }
        }
    }
    Ok(closure)
}
