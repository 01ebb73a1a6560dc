//! Unweighted graph sampler.
//!
//! Each iteration walks an alternating vertex sequence `w0 w1 w2 ...`,
//! replacing edge `w1 w0` by `w1 w2`, then `w3 w2` by `w3 w4`, and so on,
//! until the walk comes back to `w0`. Swaps are applied as the walk goes, so
//! the neighbourhoods consulted at each step are those of the partially
//! rewired graph. Pairs in the closure are never touched.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixed::FixedSet;
use crate::graph::{Edge, Graph};
use crate::indexset::IndexSet;
use crate::sampler::Sampler;

pub const DEFAULT_MAX_WALK: usize = 1_000_000;

/// Record of one iteration.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UgsWalk {
    /// `w0 w1 ... wk w0`
    pub vertices: Vec<usize>,
    /// `(removed, added)` in the order applied.
    pub swaps: Vec<(Edge, Edge)>,
}

impl UgsWalk {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

/// `N_G(u)`: free in-neighbours. `M_G(u)`: free non-out-neighbours.
pub fn neighborhoods_unweighted(g: &Graph, f_tilde: &FixedSet, u: usize) -> (Vec<usize>, Vec<usize>) {
    let f = f_tilde.normalized_for(g);
    let n_set = (0..g.n())
        .filter(|&v| g.has_edge(v, u) && !f.contains(v, u))
        .collect();
    let m_set = (0..g.n())
        .filter(|&v| !g.has_edge(u, v) && !f.contains(u, v))
        .collect();
    (n_set, m_set)
}

#[derive(Clone, Debug)]
pub struct UgsChain {
    graph: Graph,
    fixed: FixedSet,
    in_free: Vec<IndexSet>,
    out_absent: Vec<IndexSet>,
    start: IndexSet,
    max_walk: usize,
    walk: UgsWalk,
    touched: Vec<(usize, usize, bool)>,
    iterations: u64,
    walk_total: u64,
    walk_max: usize,
}

impl UgsChain {
    /// `f_tilde` should be a closure (see [`crate::closure::compute_closure`]).
    pub fn new(graph: Graph, f_tilde: &FixedSet) -> Result<Self> {
        if graph.is_weighted() {
            return Err(Error::WeightedInput);
        }
        if f_tilde.n() != graph.n() {
            return Err(Error::InvalidGraph("fixed set size does not match graph".into()));
        }
        let n = graph.n();
        let fixed = f_tilde.normalized_for(&graph);
        let mut in_free = vec![IndexSet::new(n); n];
        let mut out_absent = vec![IndexSet::new(n); n];
        for u in 0..n {
            for v in 0..n {
                if fixed.contains(u, v) {
                    continue;
                }
                if graph.has_edge(u, v) {
                    in_free[v].insert(u);
                } else {
                    out_absent[u].insert(v);
                }
            }
        }
        let mut start = IndexSet::new(n);
        for (v, s) in in_free.iter().enumerate() {
            if !s.is_empty() {
                start.insert(v);
            }
        }
        Ok(UgsChain {
            graph,
            fixed,
            in_free,
            out_absent,
            start,
            max_walk: DEFAULT_MAX_WALK,
            walk: UgsWalk::default(),
            touched: Vec::new(),
            iterations: 0,
            walk_total: 0,
            walk_max: 0,
        })
    }

    pub fn with_max_walk(mut self, max_walk: usize) -> Self {
        self.max_walk = max_walk;
        self
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn into_graph(self) -> Graph {
        self.graph
    }

    pub fn fixed(&self) -> &FixedSet {
        &self.fixed
    }

    pub fn last_walk(&self) -> &UgsWalk {
        &self.walk
    }

    /// Mean and maximum walk length (vertex count) over all iterations so far.
    pub fn walk_length_stats(&self) -> (f64, usize) {
        if self.iterations == 0 {
            return (0.0, 0);
        }
        (self.walk_total as f64 / self.iterations as f64, self.walk_max)
    }

    #[inline]
    fn key(&self, a: usize, b: usize) -> (usize, usize) {
        if self.graph.is_directed() || a <= b {
            (a, b)
        } else {
            (b, a)
        }
    }

    fn note_touch(&mut self, a: usize, b: usize, was_edge: bool) {
        let k = self.key(a, b);
        if !self.touched.iter().any(|&(x, y, _)| (x, y) == k) {
            self.touched.push((k.0, k.1, was_edge));
        }
    }

    fn remove_arc_index(&mut self, a: usize, b: usize) {
        self.in_free[b].remove(a);
        self.out_absent[a].insert(b);
        if self.in_free[b].is_empty() {
            self.start.remove(b);
        }
    }

    fn add_arc_index(&mut self, a: usize, b: usize) {
        self.out_absent[a].remove(b);
        if self.in_free[b].insert(a) {
            self.start.insert(b);
        }
    }

    fn remove_edge(&mut self, a: usize, b: usize) {
        self.note_touch(a, b, true);
        self.graph.set_weight_unchecked(a, b, 0);
        self.remove_arc_index(a, b);
        if !self.graph.is_directed() {
            self.remove_arc_index(b, a);
        }
    }

    fn add_edge(&mut self, a: usize, b: usize) {
        self.note_touch(a, b, false);
        self.graph.set_weight_unchecked(a, b, 1);
        self.add_arc_index(a, b);
        if !self.graph.is_directed() {
            self.add_arc_index(b, a);
        }
    }

    fn internal(&self, message: impl Into<String>) -> Error {
        Error::Internal {
            message: message.into(),
            walk: self.walk.vertices.clone(),
        }
    }

    fn iterate<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<bool> {
        self.walk.vertices.clear();
        self.walk.swaps.clear();
        self.touched.clear();

        let w0 = self.start.sample_without(rng, None).ok_or(Error::Frozen)?;
        self.walk.vertices.push(w0);
        let mut prev = None;
        let mut cur = w0;
        loop {
            let next = self.in_free[cur].sample_without(rng, prev).ok_or_else(|| {
                self.internal(format!("no free in-neighbour of {cur} other than the previous vertex"))
            })?;
            let target = self.out_absent[next].sample_without(rng, None).ok_or_else(|| {
                self.internal(format!("vertex {next} has no free non-out-neighbour"))
            })?;
            self.remove_edge(next, cur);
            self.add_edge(next, target);
            self.walk.swaps.push((Edge::new(next, cur), Edge::new(next, target)));
            self.walk.vertices.push(next);
            self.walk.vertices.push(target);
            if target == w0 {
                break;
            }
            if self.walk.vertices.len() > self.max_walk {
                return Err(self.internal(format!("walk exceeded {} vertices", self.max_walk)));
            }
            prev = Some(next);
            cur = target;
        }

        self.iterations += 1;
        self.walk_total += self.walk.vertices.len() as u64;
        self.walk_max = self.walk_max.max(self.walk.vertices.len());
        Ok(self
            .touched
            .iter()
            .any(|&(a, b, was)| self.graph.has_edge(a, b) != was))
    }
}

impl Sampler for UgsChain {
    type State = Graph;

    fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<bool> {
        self.iterate(rng)
    }

    fn state(&self) -> &Graph {
        &self.graph
    }
}

/// One iteration starting from `g`. A frozen instance yields
/// [`Error::Frozen`] and leaves `g` untouched.
pub fn ugs_step<R: Rng + ?Sized>(g: &Graph, f_tilde: &FixedSet, rng: &mut R) -> Result<(Graph, UgsWalk)> {
    let mut chain = UgsChain::new(g.clone(), f_tilde)?;
    chain.step(rng)?;
    let walk = chain.walk.clone();
    Ok((chain.into_graph(), walk))
}
