use serde::{Deserialize, Serialize};

use crate::graph::{Edge, Graph};

/// Vertex pairs whose edge status (or weight) is held fixed.
///
/// Stored as a dense `n * n` mask. Undirected sets are kept closed under
/// pair reversal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FixedSet {
    n: usize,
    directed: bool,
    mask: Vec<bool>,
}

impl FixedSet {
    pub fn new(n: usize, directed: bool) -> Self {
        FixedSet {
            n,
            directed,
            mask: vec![false; n * n],
        }
    }

    /// Every pair, including self pairs.
    pub fn all(n: usize, directed: bool) -> Self {
        FixedSet {
            n,
            directed,
            mask: vec![true; n * n],
        }
    }

    /// The design set every graph needs: all self pairs when self-loops are
    /// disallowed, nothing otherwise.
    pub fn for_graph(g: &Graph) -> Self {
        let mut f = FixedSet::new(g.n(), g.is_directed());
        if !g.allows_self_loops() {
            for u in 0..g.n() {
                f.insert(u, u);
            }
        }
        f
    }

    /// `self` plus the self pairs required by `g`.
    pub fn normalized_for(&self, g: &Graph) -> Self {
        let mut f = self.clone();
        if !g.allows_self_loops() {
            for u in 0..g.n() {
                f.insert(u, u);
            }
        }
        f
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    #[inline]
    pub fn contains(&self, u: usize, v: usize) -> bool {
        self.mask[u * self.n + v]
    }

    pub fn contains_edge(&self, e: Edge) -> bool {
        self.contains(e.from, e.to)
    }

    pub fn insert(&mut self, u: usize, v: usize) {
        self.mask[u * self.n + v] = true;
        if !self.directed {
            self.mask[v * self.n + u] = true;
        }
    }

    pub fn remove(&mut self, u: usize, v: usize) {
        self.mask[u * self.n + v] = false;
        if !self.directed {
            self.mask[v * self.n + u] = false;
        }
    }

    pub fn union_with(&mut self, other: &FixedSet) {
        for (a, b) in self.mask.iter_mut().zip(&other.mask) {
            *a |= *b;
        }
    }

    pub fn is_subset_of(&self, other: &FixedSet) -> bool {
        self.mask.iter().zip(&other.mask).all(|(a, b)| !a || *b)
    }

    /// Fixed pairs; undirected sets report each pair once with `from <= to`.
    pub fn iter(&self) -> impl Iterator<Item = Edge> + '_ {
        let n = self.n;
        let directed = self.directed;
        (0..n).flat_map(move |u| {
            let start = if directed { 0 } else { u };
            (start..n).filter_map(move |v| self.contains(u, v).then_some(Edge::new(u, v)))
        })
    }

    pub fn len(&self) -> usize {
        self.iter().count()
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&b| b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn undirected_sets_are_symmetric() {
        let mut f = FixedSet::new(3, false);
        f.insert(0, 2);
        assert!(f.contains(2, 0));
        assert_eq!(f.len(), 1);
        f.remove(2, 0);
        assert!(f.is_empty());
    }

    #[test]
    fn self_pairs_follow_graph_flag() {
        let g = Graph::directed(3);
        assert_eq!(FixedSet::for_graph(&g).len(), 3);
        let g = g.with_self_loops(true).unwrap();
        assert!(FixedSet::for_graph(&g).is_empty());
    }
}
