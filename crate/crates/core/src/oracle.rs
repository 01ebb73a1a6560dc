//! Exhaustive enumeration of small reference sets, for exact checks of the
//! samplers and of the closure.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::fixed::FixedSet;
use crate::graph::{DegreeSequence, Edge, Graph, Table};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    /// Largest number of free pairs the unweighted search accepts.
    pub max_free_pairs: usize,
    pub max_states: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_free_pairs: 36,
            max_states: 2_000_000,
        }
    }
}

/// Every member of a reference set, as row-major weight vectors in sorted
/// order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateSpace {
    pub n: usize,
    pub directed: bool,
    pub weighted: bool,
    pub allow_self_loops: bool,
    states: Vec<Vec<u64>>,
    #[serde(skip)]
    index: HashMap<Vec<u64>, usize>,
}

impl StateSpace {
    fn new(template: &Graph, mut states: Vec<Vec<u64>>) -> Self {
        states.sort();
        states.dedup();
        let index = states.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        StateSpace {
            n: template.n(),
            directed: template.is_directed(),
            weighted: template.is_weighted(),
            allow_self_loops: template.allows_self_loops(),
            states,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[Vec<u64>] {
        &self.states
    }

    pub fn index_of_weights(&self, w: &[u64]) -> Option<usize> {
        self.index.get(w).copied()
    }

    pub fn index_of(&self, g: &Graph) -> Option<usize> {
        self.index_of_weights(g.weights())
    }

    pub fn graph(&self, i: usize) -> Graph {
        let mut g = Graph::new(self.n, self.directed, self.weighted);
        if self.allow_self_loops {
            g = g.with_self_loops(true).expect("space built from a valid graph");
        }
        for (k, &w) in self.states[i].iter().enumerate() {
            if w > 0 {
                g.set_weight_unchecked(k / self.n, k % self.n, w);
            }
        }
        g
    }
}

/// Free pairs in search order, and the residual degree targets after the
/// fixed pairs are accounted for.
struct Search {
    n: usize,
    directed: bool,
    pairs: Vec<(usize, usize)>,
    need_out: Vec<i64>,
    need_in: Vec<i64>,
    /// Free pairs left at or after position `k`, per vertex and side.
    left_out: Vec<i64>,
    left_in: Vec<i64>,
    base: Vec<u64>,
}

impl Search {
    fn new(deg: &DegreeSequence, f: &FixedSet, fixed_value: impl Fn(usize, usize) -> u64) -> Result<Option<Self>> {
        let n = f.n();
        if deg.in_deg.len() != n || deg.out_deg.len() != n {
            return Err(Error::Config("degree sequence length does not match fixed set".into()));
        }
        let directed = f.is_directed();
        let mut need_out: Vec<i64> = deg.out_deg.iter().map(|&d| d as i64).collect();
        let mut need_in: Vec<i64> = deg.in_deg.iter().map(|&d| d as i64).collect();
        let mut base = vec![0u64; n * n];
        let mut pairs = Vec::new();
        for u in 0..n {
            let start = if directed { 0 } else { u };
            for v in start..n {
                if !directed && u == v && !f.contains(u, u) {
                    return Err(Error::Config("undirected graphs cannot have free self pairs".into()));
                }
                if f.contains(u, v) {
                    let w = fixed_value(u, v);
                    if w > 0 {
                        base[u * n + v] = w;
                        base[v * n + u] = if directed { base[v * n + u] } else { w };
                        need_out[u] -= w as i64;
                        if directed {
                            need_in[v] -= w as i64;
                        } else if u != v {
                            need_out[v] -= w as i64;
                        }
                    }
                } else {
                    pairs.push((u, v));
                }
            }
        }
        if !directed {
            need_in.clone_from(&need_out);
        }
        if need_out.iter().chain(&need_in).any(|&x| x < 0) {
            return Ok(None);
        }
        let mut left_out = vec![0; n];
        let mut left_in = vec![0; n];
        for &(u, v) in &pairs {
            left_out[u] += 1;
            if directed {
                left_in[v] += 1;
            } else {
                left_out[v] += 1;
            }
        }
        if !directed {
            left_in.clone_from(&left_out);
        }
        Ok(Some(Search {
            n,
            directed,
            pairs,
            need_out,
            need_in,
            left_out,
            left_in,
            base,
        }))
    }

    fn shift(&mut self, u: usize, v: usize, w: i64, consumed: i64) {
        self.need_out[u] -= w;
        self.left_out[u] -= consumed;
        if self.directed {
            self.need_in[v] -= w;
            self.left_in[v] -= consumed;
        } else {
            self.need_out[v] -= w;
            self.left_out[v] -= consumed;
        }
    }

    fn need_in_of(&self, v: usize) -> i64 {
        if self.directed {
            self.need_in[v]
        } else {
            self.need_out[v]
        }
    }

    fn done(&self) -> bool {
        self.need_out.iter().all(|&x| x == 0) && (!self.directed || self.need_in.iter().all(|&x| x == 0))
    }

    fn set(&mut self, u: usize, v: usize, w: u64) {
        let n = self.n;
        self.base[u * n + v] = w;
        if !self.directed {
            self.base[v * n + u] = w;
        }
    }

    /// Remaining need on the source side can still be met by the free
    /// pairs left: at most one unit per pair when unweighted.
    fn can_finish_out(&self, u: usize, weighted: bool) -> bool {
        let (need, left) = (self.need_out[u], self.left_out[u]);
        if weighted { need == 0 || left > 0 } else { need <= left }
    }

    fn can_finish_in(&self, v: usize, weighted: bool) -> bool {
        let (need, left) = if self.directed {
            (self.need_in[v], self.left_in[v])
        } else {
            (self.need_out[v], self.left_out[v])
        };
        if weighted { need == 0 || left > 0 } else { need <= left }
    }

    fn run(&mut self, k: usize, weighted: bool, cap: usize, out: &mut Vec<Vec<u64>>) -> Result<()> {
        if k == self.pairs.len() {
            if self.done() {
                if out.len() >= cap {
                    return Err(Error::CapExceeded(format!("more than {cap} states")));
                }
                out.push(self.base.clone());
            }
            return Ok(());
        }
        let (u, v) = self.pairs[k];
        let hi = self.need_out[u].min(self.need_in_of(v));
        let hi = if weighted { hi } else { hi.min(1) };
        for w in 0..=hi {
            self.shift(u, v, w, 1);
            self.set(u, v, w as u64);
            if self.can_finish_in(v, weighted) && self.can_finish_out(u, weighted) {
                self.run(k + 1, weighted, cap, out)?;
            }
            self.shift(u, v, -w, -1);
            self.set(u, v, 0);
        }
        Ok(())
    }
}

fn template(n: usize, f: &FixedSet, weighted: bool) -> Result<Graph> {
    let g = Graph::new(n, f.is_directed(), weighted);
    let loops = (0..n).any(|u| !f.contains(u, u));
    if loops && f.is_directed() {
        g.with_self_loops(true)
    } else {
        Ok(g)
    }
}

/// All unweighted graphs with degrees `deg` whose status on each pair of
/// `f` is given by `fixed_status` (pairs missing from the map are absent).
/// Self pairs outside `f` are allowed to carry loops.
pub fn enumerate_unweighted(
    deg: &DegreeSequence,
    f: &FixedSet,
    fixed_status: &BTreeMap<Edge, bool>,
) -> Result<StateSpace> {
    enumerate_unweighted_with(deg, f, fixed_status, Limits::default())
}

pub fn enumerate_unweighted_with(
    deg: &DegreeSequence,
    f: &FixedSet,
    fixed_status: &BTreeMap<Edge, bool>,
    limits: Limits,
) -> Result<StateSpace> {
    let directed = f.is_directed();
    let status = |u: usize, v: usize| {
        let e = if directed || u <= v { Edge::new(u, v) } else { Edge::new(v, u) };
        u64::from(fixed_status.get(&e).copied().unwrap_or(false))
    };
    let tpl = template(f.n(), f, false)?;
    let Some(mut s) = Search::new(deg, f, status)? else {
        return Ok(StateSpace::new(&tpl, Vec::new()));
    };
    if s.pairs.len() > limits.max_free_pairs {
        return Err(Error::CapExceeded(format!(
            "{} free pairs, limit {}",
            s.pairs.len(),
            limits.max_free_pairs
        )));
    }
    let mut out = Vec::new();
    s.run(0, false, limits.max_states, &mut out)?;
    Ok(StateSpace::new(&tpl, out))
}

/// All integer-weighted graphs with strengths `strengths` and the given
/// weights on `f` (pairs missing from the map have weight zero).
pub fn enumerate_weighted(
    strengths: &DegreeSequence,
    f: &FixedSet,
    fixed_weights: &BTreeMap<Edge, u64>,
) -> Result<StateSpace> {
    enumerate_weighted_with(strengths, f, fixed_weights, Limits::default())
}

pub fn enumerate_weighted_with(
    strengths: &DegreeSequence,
    f: &FixedSet,
    fixed_weights: &BTreeMap<Edge, u64>,
    limits: Limits,
) -> Result<StateSpace> {
    let directed = f.is_directed();
    let weight = |u: usize, v: usize| {
        let e = if directed || u <= v { Edge::new(u, v) } else { Edge::new(v, u) };
        fixed_weights.get(&e).copied().unwrap_or(0)
    };
    let tpl = template(f.n(), f, true)?;
    let Some(mut s) = Search::new(strengths, f, weight)? else {
        return Ok(StateSpace::new(&tpl, Vec::new()));
    };
    let mut out = Vec::new();
    s.run(0, true, limits.max_states, &mut out)?;
    Ok(StateSpace::new(&tpl, out))
}

/// The reference set of `g` under `f`: same degrees (or strengths), same
/// values on `f`.
pub fn enumerate_like(g: &Graph, f: &FixedSet) -> Result<StateSpace> {
    let f = f.normalized_for(g);
    let values = f
        .iter()
        .map(|e| (e, g.weight(e.from, e.to)))
        .filter(|&(_, w)| w > 0);
    if g.is_weighted() {
        let fixed: BTreeMap<Edge, u64> = values.collect();
        enumerate_weighted(&crate::graph::strength_sequence(g), &f, &fixed)
    } else {
        let fixed: BTreeMap<Edge, bool> = values.map(|(e, _)| (e, true)).collect();
        let deg = crate::graph::degree_sequence(g)?;
        enumerate_unweighted(&deg, &f, &fixed)
    }
}

/// All tables with the margins of `t` and its values on `fixed_cells`.
pub fn enumerate_tables(t: &Table, fixed_cells: &[(usize, usize)]) -> Result<StateSpace> {
    enumerate_like(&t.to_graph(), &t.fixed_with_cells(fixed_cells.iter().copied()))
}

/// Pairs whose presence is the same in every member of `space`.
pub fn closure_oracle(space: &StateSpace) -> Result<FixedSet> {
    let first = space
        .states
        .first()
        .ok_or_else(|| Error::Infeasible("empty state space".into()))?;
    let n = space.n;
    let mut f = FixedSet::new(n, space.directed);
    for k in 0..n * n {
        let present = first[k] > 0;
        if space.states.iter().all(|s| (s[k] > 0) == present) {
            f.insert(k / n, k % n);
        }
    }
    Ok(f)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gof {
    pub chi2: f64,
    pub df: usize,
    pub p: f64,
}

/// Pearson goodness-of-fit of `visit_counts` against the uniform law on
/// `space`.
pub fn uniformity_test(space: &StateSpace, visit_counts: &[u64]) -> Result<Gof> {
    let k = space.len();
    if visit_counts.len() != k {
        return Err(Error::Domain(format!(
            "{} counts for {k} states",
            visit_counts.len()
        )));
    }
    chi_square_uniform(visit_counts)
}

/// Pearson goodness-of-fit against equal cell probabilities.
pub fn chi_square_uniform(counts: &[u64]) -> Result<Gof> {
    let k = counts.len();
    let total: u64 = counts.iter().sum();
    let needed = 10 * k as u64;
    if k == 0 || total < needed {
        return Err(Error::Undersampled {
            total,
            states: k,
            needed,
        });
    }
    if k == 1 {
        return Ok(Gof { chi2: 0.0, df: 0, p: 1.0 });
    }
    let e = total as f64 / k as f64;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
    let df = k - 1;
    let dist = ChiSquared::new(df as f64).map_err(|e| Error::Domain(e.to_string()))?;
    Ok(Gof {
        chi2,
        df,
        p: dist.sf(chi2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closure::compute_closure;
    use crate::graph::degree_sequence;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand::Rng;

    fn figure3() -> Graph {
        Graph::from_edges(4, false, false, [(0, 2, 1), (1, 3, 1)]).unwrap()
    }

    #[test]
    fn three_matchings() {
        let g = figure3();
        let s = enumerate_like(&g, &FixedSet::for_graph(&g)).unwrap();
        assert_eq!(s.len(), 3);
        assert!(s.index_of(&g).is_some());
        for i in 0..3 {
            assert_eq!(degree_sequence(&s.graph(i)).unwrap(), degree_sequence(&g).unwrap());
        }
        assert_eq!(closure_oracle(&s).unwrap(), FixedSet::for_graph(&g));
    }

    #[test]
    fn forced_singleton() {
        let g = Graph::from_edges(3, true, false, [(1, 0, 1)]).unwrap();
        let s = enumerate_like(&g, &FixedSet::for_graph(&g)).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(closure_oracle(&s).unwrap(), FixedSet::all(3, true));
    }

    #[test]
    fn infeasible_is_empty() {
        let deg = DegreeSequence {
            in_deg: vec![2, 0],
            out_deg: vec![2, 0],
        };
        let mut f = FixedSet::new(2, false);
        f.insert(0, 0);
        f.insert(1, 1);
        let s = enumerate_unweighted(&deg, &f, &BTreeMap::new()).unwrap();
        assert!(s.is_empty());
        assert!(closure_oracle(&s).is_err());
    }

    #[test]
    fn table_counts() {
        let t = Table::from_rows(&[vec![1, 1], vec![1, 1]]).unwrap();
        assert_eq!(enumerate_tables(&t, &[]).unwrap().len(), 3);
        let t = Table::from_rows(&[vec![1, 0], vec![0, 1]]).unwrap();
        let s = enumerate_tables(&t, &[]).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(closure_oracle(&s).unwrap(), t.structural_fixed());
        let t = Table::from_rows(&[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]).unwrap();
        assert_eq!(enumerate_tables(&t, &[]).unwrap().len(), 6);
    }

    #[test]
    fn closed_forms() {
        // k x k permutation tables: k!
        for (k, count) in [(1, 1), (2, 2), (3, 6), (4, 24)] {
            let rows: Vec<Vec<u64>> = (0..k).map(|i| (0..k).map(|j| u64::from(i == j)).collect()).collect();
            let t = Table::from_rows(&rows).unwrap();
            assert_eq!(enumerate_tables(&t, &[]).unwrap().len(), count);
        }
        // 2x2 with margins (m, m) / (m, m): m + 1
        for m in 0..8u64 {
            let t = Table::from_rows(&[vec![m, 0], vec![0, m]]).unwrap();
            assert_eq!(enumerate_tables(&t, &[]).unwrap().len(), m as usize + 1);
        }
    }

    #[test]
    fn fixed_cells_respected() {
        let t = Table::from_rows(&[vec![1, 1, 1], vec![1, 1, 1], vec![1, 1, 1]]).unwrap();
        let s = enumerate_tables(&t, &[(0, 0), (1, 1)]).unwrap();
        for i in 0..s.len() {
            let x = Table::from_graph(&s.graph(i), 3).unwrap();
            assert_eq!(x.get(0, 0), 1);
            assert_eq!(x.get(1, 1), 1);
            assert_eq!(x.row_sums(), vec![3, 3, 3]);
            assert_eq!(x.col_sums(), vec![3, 3, 3]);
        }
    }

    #[test]
    fn directed_self_loops_when_free() {
        // one vertex with a loop: in = out = 1, nothing fixed
        let deg = DegreeSequence {
            in_deg: vec![1],
            out_deg: vec![1],
        };
        let s = enumerate_unweighted(&deg, &FixedSet::new(1, true), &BTreeMap::new()).unwrap();
        assert_eq!(s.len(), 1);
        assert!(s.graph(0).has_edge(0, 0));
    }

    #[test]
    fn agrees_with_closure_on_directed_example() {
        let g = Graph::from_edges(4, true, false, [(0, 1, 1), (1, 2, 1), (2, 0, 1), (3, 0, 1)]).unwrap();
        let mut f = FixedSet::for_graph(&g);
        f.insert(3, 0);
        let s = enumerate_like(&g, &f).unwrap();
        assert_eq!(closure_oracle(&s).unwrap(), compute_closure(&g, &f).unwrap());
    }

    #[test]
    fn cap_is_enforced() {
        let g = Graph::from_edges(6, true, false, (0..6).map(|i| (i, (i + 1) % 6, 1))).unwrap();
        let lim = Limits {
            max_free_pairs: 36,
            max_states: 3,
        };
        let deg = degree_sequence(&g).unwrap();
        let r = enumerate_unweighted_with(&deg, &FixedSet::for_graph(&g), &BTreeMap::new(), lim);
        assert!(matches!(r, Err(Error::CapExceeded(_))));
    }

    #[test]
    fn gof_extremes() {
        let g = uniformity_test_counts(&[100, 100, 100]);
        assert_eq!(g.chi2, 0.0);
        assert!((g.p - 1.0).abs() < 1e-12);
        let n = 300;
        let g = uniformity_test_counts(&[n, 0, 0]);
        assert!((g.chi2 - 2.0 * n as f64).abs() < 1e-9);
        assert!(g.p < 1e-100);
        assert!(matches!(chi_square_uniform(&[1, 2, 3]), Err(Error::Undersampled { .. })));
    }

    fn uniformity_test_counts(c: &[u64]) -> Gof {
        chi_square_uniform(c).unwrap()
    }

    #[test]
    fn gof_calibrated_under_null() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let reps = 400;
        let mut below = [0usize; 4];
        for _ in 0..reps {
            let mut c = vec![0u64; 3];
            for _ in 0..100_000 {
                c[rng.random_range(0..3)] += 1;
            }
            let p = chi_square_uniform(&c).unwrap().p;
            below[((p * 4.0) as usize).min(3)] += 1;
        }
        // each quarter should get about 100
        for b in below {
            assert!((60..=140).contains(&b), "{below:?}");
        }
    }
}
