//! Weighted graph sampler.
//!
//! An iteration first selects a closed alternating walk `w0 w1 ... wk w0`
//! from the current graph without modifying it:
//!
//! * `w_{n+1}` is uniform on `N(w_n) \ {w_{n-1}}`, the free in-neighbours of
//!   `w_n` with positive weight;
//! * if `w0` is in `M(w_{n+1}) \ {w_n}` the walk closes on `w0`, otherwise
//!   `w_{n+2}` is uniform on `M(w_{n+1}) \ {w_n}`, the free out-targets;
//! * an empty candidate set makes the whole iteration a no-op.
//!
//! Every edge `w_{n+1} w_n` gains a visit and every `w_{n+1} w_{n+2}` loses
//! one. The walk then defines a one-parameter family `c + visits * delta`
//! of graphs with the same strengths, and `delta` is drawn from the law that
//! weights each member by the probability of selecting this walk (or its
//! reverse) from it. With a uniform target that keeps the chain reversible
//! for the uniform distribution on the reference set.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixed::FixedSet;
use crate::graph::{Edge, Graph, Table};
use crate::indexset::IndexSet;
use crate::sampler::Sampler;

pub const DEFAULT_MAX_WALK: usize = 1_000_000;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WgsWalk {
    /// `w0 w1 ... wk w0`
    pub vertices: Vec<usize>,
    /// Net visit count per touched pair. Undirected pairs are stored with
    /// `from <= to`. Entries may be zero when visits cancel.
    pub visits: Vec<(Edge, i64)>,
    pub delta_low: i64,
    pub delta_up: i64,
}

impl WgsWalk {
    /// Pairs with a non-zero visit count.
    pub fn touched_edges(&self) -> impl Iterator<Item = (Edge, i64)> + '_ {
        self.visits.iter().copied().filter(|&(_, v)| v != 0)
    }

    pub fn visit(&self, e: Edge) -> i64 {
        self.visits
            .iter()
            .find(|(x, _)| *x == e)
            .map_or(0, |&(_, v)| v)
    }

    /// `w0 wk ... w1 w0`
    pub fn reversed_vertices(&self) -> Vec<usize> {
        self.vertices.iter().rev().copied().collect()
    }

    fn clear(&mut self) {
        self.vertices.clear();
        self.visits.clear();
        self.delta_low = 0;
        self.delta_up = 0;
    }

    fn add_visit(&mut self, e: Edge, by: i64) {
        match self.visits.iter_mut().find(|(x, _)| *x == e) {
            Some((_, v)) => *v += by,
            None => self.visits.push((e, by)),
        }
    }
}

/// Target distribution over the reference set, as a product of per-cell
/// masses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    #[default]
    Uniform,
    /// Mass proportional to `prod 1 / c_uv!`; for tables with fixed margins
    /// this is the (multiple) hypergeometric law.
    Hypergeometric,
}

impl Target {
    #[inline]
    fn cell_log_mass(self, w: u64) -> f64 {
        match self {
            Target::Uniform => 0.0,
            Target::Hypergeometric => -statrs::function::factorial::ln_factorial(w),
        }
    }
}

/// The law of `delta` for one walk.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeltaMeasure {
    pub delta_low: i64,
    pub delta_up: i64,
    /// Probability of selecting the walk class from the graph at `delta_low`.
    pub weight_low: BigRational,
    /// Same, at `delta_up`.
    pub weight_up: BigRational,
    /// Same, at any interior point; zero when there is no interior.
    pub weight_interior: BigRational,
}

impl DeltaMeasure {
    pub fn interior_points(&self) -> i64 {
        (self.delta_up - self.delta_low - 1).max(0)
    }

    pub fn normalizer(&self) -> BigRational {
        if self.delta_low == self.delta_up {
            return BigRational::one();
        }
        &self.weight_low
            + &self.weight_up
            + &self.weight_interior * BigRational::from_integer(self.interior_points().into())
    }

    pub fn probability(&self, delta: i64) -> BigRational {
        if delta < self.delta_low || delta > self.delta_up {
            return BigRational::zero();
        }
        if self.delta_low == self.delta_up {
            return BigRational::one();
        }
        let w = if delta == self.delta_low {
            &self.weight_low
        } else if delta == self.delta_up {
            &self.weight_up
        } else {
            &self.weight_interior
        };
        w / self.normalizer()
    }

    /// `(delta, probability)` over the whole support.
    pub fn probabilities(&self) -> Vec<(i64, BigRational)> {
        (self.delta_low..=self.delta_up)
            .map(|d| (d, self.probability(d)))
            .collect()
    }
}

/// Read-only view of a weighted graph and its fixed set, as the walk
/// selection rule sees it.
trait WalkView {
    fn is_fixed(&self, u: usize, v: usize) -> bool;
    /// Whether `uv` carries positive weight.
    fn positive(&self, u: usize, v: usize) -> bool;
    /// `|N(u)|`
    fn in_count(&self, u: usize) -> usize;
    /// `|M(u)|`
    fn out_count(&self, u: usize) -> usize;
    /// Number of vertices with non-empty `N`.
    fn start_count(&self) -> usize;

    #[inline]
    fn in_n(&self, v: usize, u: usize) -> bool {
        !self.is_fixed(v, u) && self.positive(v, u)
    }
}

trait ProbAcc {
    fn divide(&mut self, k: usize);
}

/// Floating-point probabilities are also kept as `1 / denominator`, so the
/// hot loop multiplies instead of dividing.
struct FloatDenominator(f64);

impl ProbAcc for FloatDenominator {
    #[inline]
    fn divide(&mut self, k: usize) {
        self.0 *= k as f64;
    }
}

/// Exact probabilities are `1 / denominator`.
struct Denominator(BigUint);

impl ProbAcc for Denominator {
    fn divide(&mut self, k: usize) {
        self.0 *= BigUint::from(k);
    }
}

/// Multiplies `acc` by the probability that the selection rule produces
/// the sequence `at(0) .. at(len - 1)`. Returns `false` if that probability
/// is zero.
fn sequence_probability<V: WalkView, P: ProbAcc>(
    view: &V,
    len: usize,
    at: impl Fn(usize) -> usize,
    acc: &mut P,
) -> bool {
    if len < 5 || len % 2 == 0 || at(0) != at(len - 1) {
        return false;
    }
    let last = len - 1;
    let w0 = at(0);
    if view.in_count(w0) == 0 {
        return false;
    }
    acc.divide(view.start_count());
    let mut n = 0;
    let mut prev: Option<usize> = None;
    loop {
        if n + 2 > last {
            return false;
        }
        let cur = at(n);
        let a = at(n + 1);
        if prev == Some(a) || !view.in_n(a, cur) {
            return false;
        }
        let prev_in = prev.is_some_and(|p| view.in_n(p, cur));
        acc.divide(view.in_count(cur) - usize::from(prev_in));

        let b = at(n + 2);
        if cur != w0 && !view.is_fixed(a, w0) {
            return n + 2 == last && b == w0;
        }
        if n + 2 == last || b == cur || view.is_fixed(a, b) {
            return false;
        }
        let cur_in_m = !view.is_fixed(a, cur);
        acc.divide(view.out_count(a) - usize::from(cur_in_m));
        prev = Some(a);
        n += 2;
    }
}

fn class_probability_f64<V: WalkView>(view: &V, w: &[usize]) -> f64 {
    let len = w.len();
    let mut fwd = FloatDenominator(1.0);
    let fwd_ok = sequence_probability(view, len, |i| w[i], &mut fwd);
    let mut rev = FloatDenominator(1.0);
    let rev_ok = !is_palindrome(w) && sequence_probability(view, len, |i| w[len - 1 - i], &mut rev);
    (if fwd_ok { 1.0 / fwd.0 } else { 0.0 }) + (if rev_ok { 1.0 / rev.0 } else { 0.0 })
}

fn class_probability_exact<V: WalkView>(view: &V, w: &[usize]) -> BigRational {
    let len = w.len();
    let mut total = BigRational::zero();
    let mut fwd = Denominator(BigUint::one());
    if sequence_probability(view, len, |i| w[i], &mut fwd) {
        total += BigRational::new(1.into(), fwd.0.into());
    }
    let mut rev = Denominator(BigUint::one());
    if !is_palindrome(w) && sequence_probability(view, len, |i| w[len - 1 - i], &mut rev) {
        total += BigRational::new(1.into(), rev.0.into());
    }
    total
}

fn is_palindrome(w: &[usize]) -> bool {
    w.iter().eq(w.iter().rev())
}

/// Whole-graph view with counts computed up front.
struct StaticView<'a> {
    g: &'a Graph,
    f: &'a FixedSet,
    in_counts: Vec<usize>,
    out_counts: Vec<usize>,
    start: usize,
}

impl<'a> StaticView<'a> {
    fn new(g: &'a Graph, f: &'a FixedSet) -> Self {
        let n = g.n();
        let in_counts: Vec<usize> = (0..n)
            .map(|u| (0..n).filter(|&v| g.weight(v, u) > 0 && !f.contains(v, u)).count())
            .collect();
        let out_counts = (0..n)
            .map(|u| (0..n).filter(|&v| !f.contains(u, v)).count())
            .collect();
        let start = in_counts.iter().filter(|&&c| c > 0).count();
        StaticView {
            g,
            f,
            in_counts,
            out_counts,
            start,
        }
    }
}

impl WalkView for StaticView<'_> {
    fn is_fixed(&self, u: usize, v: usize) -> bool {
        self.f.contains(u, v)
    }
    fn positive(&self, u: usize, v: usize) -> bool {
        self.g.weight(u, v) > 0
    }
    fn in_count(&self, u: usize) -> usize {
        self.in_counts[u]
    }
    fn out_count(&self, u: usize) -> usize {
        self.out_counts[u]
    }
    fn start_count(&self) -> usize {
        self.start
    }
}

/// Probability that the selection rule, run on `g`, produces `walk` or its
/// reverse. Zero if neither can be produced.
pub fn walk_probability(g: &Graph, walk: &[usize], f: &FixedSet) -> BigRational {
    let f = f.normalized_for(g);
    class_probability_exact(&StaticView::new(g, &f), walk)
}

/// `[delta_low, delta_up]`: the integers `delta` for which
/// `c + visits * delta` stays non-negative on every touched pair.
pub fn delta_bounds(g: &Graph, w: &WgsWalk) -> (i64, i64) {
    bounds_from(w.touched_edges().map(|(e, v)| (g.weight(e.from, e.to), v)))
}

fn bounds_from(items: impl Iterator<Item = (u64, i64)>) -> (i64, i64) {
    let mut low = i64::MIN;
    let mut up = i64::MAX;
    for (c, v) in items {
        let c = c as i64;
        if v > 0 {
            low = low.max(-(c / v));
        } else if v < 0 {
            up = up.min(c / -v);
        }
    }
    (low, up)
}

/// `g` with `c += visits * delta` on every touched pair.
pub fn shifted_graph(g: &Graph, w: &WgsWalk, delta: i64) -> Result<Graph> {
    let mut out = g.clone();
    for (e, v) in w.touched_edges() {
        let c = g.weight(e.from, e.to) as i64 + v * delta;
        if c < 0 {
            return Err(Error::Domain(format!("delta {delta} makes {e} negative")));
        }
        out.set_weight_unchecked(e.from, e.to, c as u64);
    }
    Ok(out)
}

pub fn delta_measure(g: &Graph, w: &WgsWalk, f: &FixedSet) -> Result<DeltaMeasure> {
    let (delta_low, delta_up) = delta_bounds(g, w);
    if delta_low == i64::MIN || delta_up == i64::MAX {
        return Err(Error::Domain("walk has no net visits".into()));
    }
    let at = |d: i64| -> Result<BigRational> {
        Ok(walk_probability(&shifted_graph(g, w, d)?, &w.vertices, f))
    };
    let weight_low = at(delta_low)?;
    let weight_up = at(delta_up)?;
    let weight_interior = if delta_up - delta_low >= 2 {
        at(delta_low + 1)?
    } else {
        BigRational::zero()
    };
    Ok(DeltaMeasure {
        delta_low,
        delta_up,
        weight_low,
        weight_up,
        weight_interior,
    })
}

/// Incremental state for repeated iterations on one graph.
#[derive(Clone, Debug)]
pub struct WgsChain {
    graph: Graph,
    fixed: FixedSet,
    in_free: Vec<IndexSet>,
    out_free: Vec<Vec<usize>>,
    start: IndexSet,
    target: Target,
    max_walk: usize,
    walk: WgsWalk,
    walk_ok: bool,
    /// Touched pairs whose positivity differs from the current graph at
    /// the `delta` under evaluation, with their new positivity.
    flips: Vec<(usize, usize, bool)>,
    log_weights: Vec<f64>,
}

impl WgsChain {
    pub fn new(graph: Graph, f: &FixedSet) -> Result<Self> {
        if !graph.is_weighted() {
            return Err(Error::UnweightedInput);
        }
        if f.n() != graph.n() {
            return Err(Error::InvalidGraph("fixed set size does not match graph".into()));
        }
        let n = graph.n();
        let fixed = f.normalized_for(&graph);
        let mut in_free = vec![IndexSet::new(n); n];
        let mut out_free = vec![Vec::new(); n];
        for u in 0..n {
            for v in 0..n {
                if fixed.contains(u, v) {
                    continue;
                }
                out_free[u].push(v);
                if graph.weight(u, v) > 0 {
                    in_free[v].insert(u);
                }
            }
        }
        let mut start = IndexSet::new(n);
        for (v, s) in in_free.iter().enumerate() {
            if !s.is_empty() {
                start.insert(v);
            }
        }
        Ok(WgsChain {
            graph,
            fixed,
            in_free,
            out_free,
            start,
            target: Target::Uniform,
            max_walk: DEFAULT_MAX_WALK,
            walk: WgsWalk::default(),
            walk_ok: false,
            flips: Vec::new(),
            log_weights: Vec::new(),
        })
    }

    /// Chain over tables with the margins of `table`, holding `fixed_cells`
    /// at their current counts.
    pub fn for_table(table: &Table, fixed_cells: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let f = table.fixed_with_cells(fixed_cells);
        Self::new(table.to_graph(), &f)
    }

    pub fn with_target(mut self, target: Target) -> Self {
        self.target = target;
        self
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

    /// The walk selected by the last iteration, if it was not the identity.
    pub fn last_walk(&self) -> Option<&WgsWalk> {
        self.walk_ok.then_some(&self.walk)
    }

    #[inline]
    fn key(&self, u: usize, v: usize) -> Edge {
        if self.graph.is_directed() || u <= v {
            Edge::new(u, v)
        } else {
            Edge::new(v, u)
        }
    }

    /// Samples a walk into `self.walk`. `Ok(false)` means the identity kernel.
    fn select_walk<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<bool> {
        self.walk.clear();
        let w0 = self.start.sample_without(rng, None).ok_or(Error::Frozen)?;
        self.walk.vertices.push(w0);
        let mut prev = None;
        let mut cur = w0;
        let mut check_at = 8 * self.graph.n() + 16;
        loop {
            let Some(a) = self.in_free[cur].sample_without(rng, prev) else {
                return Ok(false);
            };
            let b = if cur != w0 && !self.fixed.contains(a, w0) {
                w0
            } else {
                let m = &self.out_free[a];
                let excl_in = !self.fixed.contains(a, cur);
                if m.len() - usize::from(excl_in) == 0 {
                    return Ok(false);
                }
                loop {
                    let b = m[rng.random_range(0..m.len())];
                    if b != cur {
                        break b;
                    }
                }
            };
            let plus = self.key(a, cur);
            let minus = self.key(a, b);
            self.walk.add_visit(plus, 1);
            self.walk.add_visit(minus, -1);
            self.walk.vertices.push(a);
            self.walk.vertices.push(b);
            if b == w0 {
                return Ok(true);
            }
            if self.walk.vertices.len() > check_at {
                // the walk never changes the graph, so whether it can still
                // close is decidable; a walk that cannot is an identity move
                if !self.can_close(w0, b, a) {
                    return Ok(false);
                }
                check_at *= 2;
            }
            if self.walk.vertices.len() > self.max_walk {
                return Err(Error::Internal {
                    message: format!("walk exceeded {} vertices", self.max_walk),
                    walk: self.walk.vertices.clone(),
                });
            }
            prev = Some(a);
            cur = b;
        }
    }

    /// Whether a walk from `w0` now at `cur`, having arrived from `prev`,
    /// closes with positive probability. Searches the `(cur, prev)` states.
    fn can_close(&self, w0: usize, cur: usize, prev: usize) -> bool {
        let n = self.graph.n();
        let mut seen = vec![false; n * n];
        let mut stack = vec![(cur, prev)];
        seen[cur * n + prev] = true;
        while let Some((cur, prev)) = stack.pop() {
            for a in self.in_free[cur].iter().filter(|&a| a != prev) {
                if cur != w0 && !self.fixed.contains(a, w0) {
                    return true;
                }
                for &b in self.out_free[a].iter().filter(|&&b| b != cur) {
                    if !seen[b * n + a] {
                        seen[b * n + a] = true;
                        stack.push((b, a));
                    }
                }
            }
        }
        false
    }

    /// Selection probability of the current walk class from the graph at `delta`.
    fn weight_at(&mut self, delta: i64) -> f64 {
        self.flips.clear();
        for &(e, v) in &self.walk.visits {
            if v != 0 {
                let old = self.graph.weight(e.from, e.to) > 0;
                let new = self.graph.weight(e.from, e.to) as i64 + v * delta > 0;
                if old != new {
                    self.flips.push((e.from, e.to, new));
                }
            }
        }
        let view = ShiftedView::new(self);
        class_probability_f64(&view, &self.walk.vertices)
    }

    fn set_weight(&mut self, u: usize, v: usize, w: u64) {
        let old = self.graph.weight(u, v);
        self.graph.set_weight_unchecked(u, v, w);
        if (old > 0) == (w > 0) {
            return;
        }
        let directed = self.graph.is_directed();
        let mut link = |a: usize, b: usize| {
            if w > 0 {
                self.in_free[b].insert(a);
                self.start.insert(b);
            } else {
                self.in_free[b].remove(a);
                if self.in_free[b].is_empty() {
                    self.start.remove(b);
                }
            }
        };
        link(u, v);
        if !directed && u != v {
            link(v, u);
        }
    }

    fn draw_delta<R: Rng + ?Sized>(&mut self, rng: &mut R, low: i64, up: i64) -> Result<i64> {
        let w_low = self.weight_at(low);
        let w_up = self.weight_at(up);
        let w_int = if up - low >= 2 { self.weight_at(low + 1) } else { 0.0 };
        // An endpoint can carry zero weight: in undirected graphs (or when a
        // directed pair is both added to and removed from) a pair with net
        // positive visits may also be needed for the reverse walk. The
        // current graph, at delta 0, always has positive weight.
        let w_zero = if low == 0 {
            w_low
        } else if up == 0 {
            w_up
        } else {
            w_int
        };
        let ok = |x: f64| x.is_finite() && x >= 0.0;
        if !(ok(w_low) && ok(w_up) && ok(w_int) && w_zero > 0.0) {
            return Err(Error::Internal {
                message: format!("selection weights invalid: {w_low}, {w_int}, {w_up}"),
                walk: self.walk.vertices.clone(),
            });
        }
        match self.target {
            Target::Uniform => {
                let interior = (up - low - 1).max(0);
                let d = w_low + w_up + w_int * interior as f64;
                let x = rng.random::<f64>() * d;
                if x < w_low {
                    Ok(low)
                } else if x < w_low + w_up || (interior == 0 && w_up > 0.0) {
                    Ok(up)
                } else if interior == 0 {
                    Ok(low)
                } else {
                    Ok(rng.random_range(low + 1..up))
                }
            }
            Target::Hypergeometric => {
                self.log_weights.clear();
                for delta in low..=up {
                    let v = if delta == low {
                        w_low
                    } else if delta == up {
                        w_up
                    } else {
                        w_int
                    };
                    let mass: f64 = self
                        .walk
                        .touched_edges()
                        .map(|(e, k)| {
                            let c = self.graph.weight(e.from, e.to) as i64 + k * delta;
                            self.target.cell_log_mass(c as u64)
                        })
                        .sum();
                    self.log_weights.push(v.ln() + mass);
                }
                let max = self.log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let total: f64 = self.log_weights.iter().map(|l| (l - max).exp()).sum();
                let mut x = rng.random::<f64>() * total;
                let mut last = 0;
                for (i, l) in self.log_weights.iter().enumerate() {
                    let p = (l - max).exp();
                    if p > 0.0 {
                        last = i;
                    }
                    x -= p;
                    if x < 0.0 && p > 0.0 {
                        return Ok(low + i as i64);
                    }
                }
                Ok(low + last as i64)
            }
        }
    }

    fn iterate<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<bool> {
        self.walk_ok = false;
        if !self.select_walk(rng)? {
            return Ok(false);
        }
        let (low, up) = bounds_from(
            self.walk
                .touched_edges()
                .map(|(e, v)| (self.graph.weight(e.from, e.to), v)),
        );
        if low == i64::MIN || up == i64::MAX {
            // every visit cancelled
            return Ok(false);
        }
        self.walk.delta_low = low;
        self.walk.delta_up = up;
        self.walk_ok = true;
        if low == up {
            return Ok(false);
        }
        let delta = self.draw_delta(rng, low, up)?;
        if delta == 0 {
            return Ok(false);
        }
        for i in 0..self.walk.visits.len() {
            let (e, v) = self.walk.visits[i];
            if v != 0 {
                let c = self.graph.weight(e.from, e.to) as i64 + v * delta;
                self.set_weight(e.from, e.to, c as u64);
            }
        }
        Ok(true)
    }
}

/// The chain's graph with the pending `flips` applied.
struct ShiftedView<'a> {
    chain: &'a WgsChain,
    start: usize,
}

impl<'a> ShiftedView<'a> {
    fn new(chain: &'a WgsChain) -> Self {
        let mut view = ShiftedView {
            chain,
            start: chain.start.len(),
        };
        if chain.flips.is_empty() {
            return view;
        }
        let directed = chain.graph.is_directed();
        let flips = &chain.flips;
        let mut start = view.start as i64;
        // vertices whose in-neighbourhood changes, each counted once
        let mut account = |x: usize, upto: usize| {
            let seen_before = flips[..upto]
                .iter()
                .any(|&(a, b, _)| b == x || (!directed && a == x));
            if !seen_before {
                let before = !chain.in_free[x].is_empty();
                let after = view.in_count(x) > 0;
                start += i64::from(after) - i64::from(before);
            }
        };
        for (k, &(u, v, _)) in flips.iter().enumerate() {
            account(v, k);
            if !directed && u != v {
                account(u, k);
            }
        }
        view.start = start as usize;
        view
    }
}

impl WalkView for ShiftedView<'_> {
    #[inline]
    fn is_fixed(&self, u: usize, v: usize) -> bool {
        self.chain.fixed.contains(u, v)
    }

    #[inline]
    fn positive(&self, u: usize, v: usize) -> bool {
        let k = self.chain.key(u, v);
        for &(a, b, new) in &self.chain.flips {
            if (a, b) == (k.from, k.to) {
                return new;
            }
        }
        self.chain.graph.weight(u, v) > 0
    }

    fn in_count(&self, u: usize) -> usize {
        let directed = self.chain.graph.is_directed();
        let mut count = self.chain.in_free[u].len() as i64;
        for &(a, b, new) in &self.chain.flips {
            if b == u || (!directed && a == u) {
                count += if new { 1 } else { -1 };
            }
        }
        count as usize
    }

    #[inline]
    fn out_count(&self, u: usize) -> usize {
        self.chain.out_free[u].len()
    }

    #[inline]
    fn start_count(&self) -> usize {
        self.start
    }
}

impl Sampler for WgsChain {
    type State = Graph;

    fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<bool> {
        self.iterate(rng)
    }

    fn state(&self) -> &Graph {
        &self.graph
    }
}

/// Walk selection on `g`, leaving `g` untouched. `Ok(None)` is the identity
/// kernel.
pub fn wgs_select_walk<R: Rng + ?Sized>(g: &Graph, f: &FixedSet, rng: &mut R) -> Result<Option<WgsWalk>> {
    let mut chain = WgsChain::new(g.clone(), f)?;
    if !chain.select_walk(rng)? {
        return Ok(None);
    }
    let (low, up) = delta_bounds(g, &chain.walk);
    chain.walk.delta_low = low;
    chain.walk.delta_up = up;
    Ok(Some(chain.walk))
}

/// One full iteration from `g`.
pub fn wgs_step<R: Rng + ?Sized>(g: &Graph, f: &FixedSet, rng: &mut R) -> Result<(Graph, Option<WgsWalk>)> {
    let mut chain = WgsChain::new(g.clone(), f)?;
    chain.step(rng)?;
    let walk = chain.last_walk().cloned();
    Ok((chain.into_graph(), walk))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::strength_sequence;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn table(rows: &[Vec<u64>]) -> (Graph, FixedSet) {
        let t = Table::from_rows(rows).unwrap();
        (t.to_graph(), t.structural_fixed())
    }

    // rows r1=0, r2=1; columns c1=2, c2=3
    const CYCLE: [usize; 5] = [2, 0, 3, 1, 2];

    fn cycle_walk() -> WgsWalk {
        WgsWalk {
            vertices: CYCLE.to_vec(),
            visits: vec![
                (Edge::new(0, 2), 1),
                (Edge::new(0, 3), -1),
                (Edge::new(1, 3), 1),
                (Edge::new(1, 2), -1),
            ],
            delta_low: 0,
            delta_up: 0,
        }
    }

    #[test]
    fn walk_probability_constant_table() {
        let (g, f) = table(&[vec![1, 1], vec![1, 1]]);
        assert_eq!(walk_probability(&g, &CYCLE, &f), ratio(1, 2));
    }

    #[test]
    fn walk_probability_one_direction_blocked() {
        let (g, f) = table(&[vec![0, 2], vec![2, 0]]);
        assert_eq!(walk_probability(&g, &CYCLE, &f), ratio(1, 2));
    }

    #[test]
    fn walk_probability_unsampleable() {
        let (g, f) = table(&[vec![0, 1], vec![0, 1]]);
        // r1 -> c1 and r2 -> c1 both have weight zero
        assert_eq!(walk_probability(&g, &CYCLE, &f), BigRational::zero());
    }

    #[test]
    fn bounds_identity_table() {
        let (g, _) = table(&[vec![1, 0], vec![0, 1]]);
        assert_eq!(delta_bounds(&g, &cycle_walk()), (-1, 0));
    }

    #[test]
    fn bounds_constant_table() {
        let (g, _) = table(&[vec![1, 1], vec![1, 1]]);
        assert_eq!(delta_bounds(&g, &cycle_walk()), (-1, 1));
    }

    #[test]
    fn bounds_single_constraint() {
        assert_eq!(bounds_from([(3u64, 2i64)].into_iter()), (-1, i64::MAX));
        // upper bound uses |visits|: c = 3, visits = -2 gives delta <= 1
        assert_eq!(bounds_from([(3u64, -2i64)].into_iter()), (i64::MIN, 1));
    }

    #[test]
    fn bounds_are_tight() {
        let (g, _) = table(&[vec![3, 1], vec![2, 4]]);
        let w = cycle_walk();
        let (lo, up) = delta_bounds(&g, &w);
        for d in lo..=up {
            assert!(shifted_graph(&g, &w, d).is_ok());
        }
        assert!(shifted_graph(&g, &w, lo - 1).is_err());
        assert!(shifted_graph(&g, &w, up + 1).is_err());
    }

    #[test]
    fn measure_constant_table_is_uniform() {
        let (g, f) = table(&[vec![1, 1], vec![1, 1]]);
        let m = delta_measure(&g, &cycle_walk(), &f).unwrap();
        assert_eq!((m.delta_low, m.delta_up), (-1, 1));
        assert_eq!(m.weight_low, ratio(1, 2));
        assert_eq!(m.weight_up, ratio(1, 2));
        assert_eq!(m.weight_interior, ratio(1, 2));
        assert_eq!(m.normalizer(), ratio(3, 2));
        for d in -1..=1 {
            assert_eq!(m.probability(d), ratio(1, 3));
        }
    }

    #[test]
    fn measure_without_interior() {
        let (g, f) = table(&[vec![1, 0], vec![0, 1]]);
        let m = delta_measure(&g, &cycle_walk(), &f).unwrap();
        assert_eq!(m.interior_points(), 0);
        assert_eq!(m.weight_interior, BigRational::zero());
        assert_eq!(m.normalizer(), &m.weight_low + &m.weight_up);
        let total: BigRational = m.probabilities().into_iter().map(|(_, p)| p).sum();
        assert_eq!(total, BigRational::one());
    }

    #[test]
    fn walk_that_cannot_close_is_identity() {
        // every way back to vertex 3 is fixed except from 2, and 2 has no
        // weight into 0 or 1, so a walk from 3 wanders forever
        let g = Graph::from_edges(4, true, true, [(0, 1, 1), (0, 3, 3), (1, 0, 1), (1, 3, 4), (2, 3, 3), (3, 0, 1), (3, 2, 1)])
            .unwrap();
        let mut f = FixedSet::for_graph(&g);
        f.insert(0, 3);
        f.insert(1, 3);
        let s0 = strength_sequence(&g);
        let mut chain = WgsChain::new(g, &f).unwrap().with_max_walk(10_000);
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        for _ in 0..5_000 {
            chain.step(&mut rng).unwrap();
            assert_eq!(strength_sequence(chain.graph()), s0);
        }
    }

    #[test]
    fn measure_with_unreachable_endpoint() {
        // pair 0-3 is crossed both ways; at delta -1 neither direction of
        // the walk can be selected
        let g = Graph::from_edges(5, false, true, [(0, 1, 3), (0, 2, 2), (0, 3, 1), (0, 4, 2), (1, 4, 1), (2, 3, 3)])
            .unwrap();
        let mut f = FixedSet::for_graph(&g);
        f.insert(1, 3);
        let w = WgsWalk {
            vertices: vec![3, 0, 4, 1, 0, 3, 4, 0, 3],
            visits: vec![
                (Edge::new(0, 1), -1),
                (Edge::new(0, 3), 1),
                (Edge::new(0, 4), 0),
                (Edge::new(1, 4), 1),
                (Edge::new(3, 4), -1),
            ],
            delta_low: 0,
            delta_up: 0,
        };
        let m = delta_measure(&g, &w, &f).unwrap();
        assert_eq!((m.delta_low, m.delta_up), (-1, 0));
        assert_eq!(m.weight_low, BigRational::zero());
        assert_eq!(m.probability(0), BigRational::one());

        let mut chain = WgsChain::new(g, &f).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..20_000 {
            chain.step(&mut rng).unwrap();
        }
    }

    #[test]
    fn measure_degenerate_support() {
        let m = DeltaMeasure {
            delta_low: 0,
            delta_up: 0,
            weight_low: ratio(1, 4),
            weight_up: ratio(1, 4),
            weight_interior: BigRational::zero(),
        };
        assert_eq!(m.probability(0), BigRational::one());
        assert_eq!(m.probability(1), BigRational::zero());
    }

    #[test]
    fn identity_when_candidate_set_is_empty() {
        // Column c1 has a single in-neighbour r1, whose only free target other
        // than c1 is blocked: 1x2 table with the second cell fixed.
        let t = Table::from_rows(&[vec![2, 0]]).unwrap();
        let f = t.fixed_with_cells([(0, 1)]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let walk = wgs_select_walk(&t.to_graph(), &f, &mut rng).unwrap();
        assert!(walk.is_none());
    }

    #[test]
    fn all_cells_fixed_is_frozen() {
        let t = Table::from_rows(&[vec![1, 2], vec![3, 4]]).unwrap();
        let f = t.fixed_with_cells([(0, 0), (0, 1), (1, 0), (1, 1)]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(wgs_step(&t.to_graph(), &f, &mut rng), Err(Error::Frozen)));
    }

    #[test]
    fn walks_on_open_tables_have_length_four() {
        let (g, f) = table(&[vec![1, 1], vec![1, 1]]);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut from_c1 = 0;
        let trials = 20_000;
        for _ in 0..trials {
            let w = wgs_select_walk(&g, &f, &mut rng).unwrap().unwrap();
            assert_eq!(w.vertices.len(), 5);
            if w.vertices[0] == 2 {
                from_c1 += 1;
            }
        }
        let p = from_c1 as f64 / trials as f64;
        assert!((p - 0.5).abs() < 0.02, "{p}");
    }

    #[test]
    fn fixed_cells_force_longer_walks() {
        // 3x3 all-ones table with the three "switch" diagonals blocked
        let t = Table::from_rows(&[vec![1, 1, 0], vec![0, 1, 1], vec![1, 0, 1]]).unwrap();
        let f = t.fixed_with_cells([(0, 2), (1, 0), (2, 1)]);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut long = 0;
        for _ in 0..2000 {
            if let Some(w) = wgs_select_walk(&t.to_graph(), &f, &mut rng).unwrap() {
                if w.vertices.len() >= 7 {
                    long += 1;
                }
            }
        }
        assert!(long > 0);
    }

    #[test]
    fn strengths_and_fixed_cells_preserved() {
        let t = Table::from_rows(&[vec![3, 0, 1, 2], vec![0, 2, 5, 1], vec![4, 1, 0, 0]]).unwrap();
        let fixed = [(0, 1), (2, 3)];
        let mut chain = WgsChain::for_table(&t, fixed).unwrap();
        let s0 = strength_sequence(chain.graph());
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20_000 {
            chain.step(&mut rng).unwrap();
            assert_eq!(strength_sequence(chain.graph()), s0);
            let now = Table::from_graph(chain.graph(), 3).unwrap();
            assert_eq!(now.get(0, 1), 0);
            assert_eq!(now.get(2, 3), 0);
            if let Some(w) = chain.last_walk() {
                assert!(w.delta_low <= 0 && 0 <= w.delta_up);
            }
        }
    }

    #[test]
    fn permutation_tables_alternate() {
        let t = Table::from_rows(&[vec![1, 0], vec![0, 1]]).unwrap();
        let mut chain = WgsChain::for_table(&t, []).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut diag = 0;
        let n = 20_000;
        for _ in 0..n {
            chain.step(&mut rng).unwrap();
            if chain.graph().weight(0, 2) == 1 {
                diag += 1;
            }
        }
        let p = diag as f64 / n as f64;
        assert!((p - 0.5).abs() < 0.03, "{p}");
    }

    #[test]
    fn hypergeometric_target_on_two_by_two() {
        // margins (2,2)/(2,2): masses 1/4, 1, 1/4 for c11 = 0, 1, 2
        let t = Table::from_rows(&[vec![1, 1], vec![1, 1]]).unwrap();
        let mut chain = WgsChain::for_table(&t, []).unwrap().with_target(Target::Hypergeometric);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut counts = [0usize; 3];
        let n = 60_000;
        for _ in 0..n {
            chain.step(&mut rng).unwrap();
            counts[chain.graph().weight(0, 2) as usize] += 1;
        }
        let expect = [1.0 / 6.0, 4.0 / 6.0, 1.0 / 6.0];
        for (c, e) in counts.iter().zip(expect) {
            assert!((*c as f64 / n as f64 - e).abs() < 0.02, "{counts:?}");
        }
    }

    #[test]
    fn undirected_weighted_graph_keeps_strengths() {
        let g = Graph::from_edges(
            5,
            false,
            true,
            [(0, 1, 2), (1, 2, 1), (2, 3, 3), (3, 4, 1), (4, 0, 2), (0, 2, 1)],
        )
        .unwrap();
        let f = FixedSet::for_graph(&g);
        let s0 = strength_sequence(&g);
        let mut chain = WgsChain::new(g, &f).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut moved = 0;
        for _ in 0..5000 {
            if chain.step(&mut rng).unwrap() {
                moved += 1;
            }
            assert_eq!(strength_sequence(chain.graph()), s0);
            for u in 0..5 {
                assert_eq!(chain.graph().weight(u, u), 0);
            }
        }
        assert!(moved > 0);
    }
}
