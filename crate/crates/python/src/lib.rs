//! Python bindings: graphs, tables, fixed sets, the three samplers, closure,
//! enumeration and the test statistics.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use cgsampler::diagnostics::{p_value_with, PValueOptions};
use cgsampler::io::{parse_instance, EdgeListOptions, RunConfig};
use cgsampler::oracle::enumerate_like;
use cgsampler::rng::{chain_rng, ChainRng};
use cgsampler::runner::run_instance;
use cgsampler::stats::{chi_squared, ipfp_cells, likelihood_ratio};
use cgsampler::{self as cgs, Sampler};

fn err(e: cgs::Error) -> PyErr {
    match e {
        cgs::Error::Internal { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn parse_enum<T: serde::de::DeserializeOwned>(what: &str, s: &str) -> PyResult<T> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| PyValueError::new_err(format!("unknown {what} `{s}`")))
}

#[pyclass(name = "Graph", module = "pycgsampler", from_py_object)]
#[derive(Clone)]
struct PyGraph {
    inner: cgs::Graph,
}

#[pymethods]
impl PyGraph {
    /// `edges` holds `(u, v)` or `(u, v, weight)` tuples.
    #[new]
    #[pyo3(signature = (n, directed = false, weighted = false, edges = Vec::new(), self_loops = false))]
    fn new(n: usize, directed: bool, weighted: bool, edges: Vec<Vec<u64>>, self_loops: bool) -> PyResult<Self> {
        let mut g = cgs::Graph::new(n, directed, weighted).with_self_loops(self_loops).map_err(err)?;
        for e in edges {
            let (u, v, w) = match e.as_slice() {
                [u, v] => (*u, *v, 1),
                [u, v, w] => (*u, *v, *w),
                _ => return Err(PyValueError::new_err("edges are (u, v) or (u, v, weight)")),
            };
            g.set_weight(u as usize, v as usize, w).map_err(err)?;
        }
        Ok(PyGraph { inner: g })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn directed(&self) -> bool {
        self.inner.is_directed()
    }

    #[getter]
    fn weighted(&self) -> bool {
        self.inner.is_weighted()
    }

    fn weight(&self, u: usize, v: usize) -> u64 {
        self.inner.weight(u, v)
    }

    fn set_weight(&mut self, u: usize, v: usize, w: u64) -> PyResult<()> {
        self.inner.set_weight(u, v, w).map_err(err)
    }

    fn edges(&self) -> Vec<(usize, usize, u64)> {
        self.inner.edges().map(|(e, w)| (e.from, e.to, w)).collect()
    }

    /// `(in, out)` degrees; strengths for weighted graphs.
    fn degrees(&self) -> PyResult<(Vec<u64>, Vec<u64>)> {
        let d = if self.inner.is_weighted() {
            cgs::strength_sequence(&self.inner)
        } else {
            cgs::degree_sequence(&self.inner).map_err(err)?
        };
        Ok((d.in_deg, d.out_deg))
    }

    fn to_weighted(&self) -> Self {
        PyGraph {
            inner: self.inner.to_weighted(),
        }
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!(
            "Graph(n={}, directed={}, weighted={}, edges={})",
            self.inner.n(),
            self.inner.is_directed(),
            self.inner.is_weighted(),
            self.inner.edge_count()
        )
    }
}

#[pyclass(name = "Table", module = "pycgsampler", from_py_object)]
#[derive(Clone)]
struct PyTable {
    inner: cgs::Table,
}

#[pymethods]
impl PyTable {
    #[new]
    fn new(rows: Vec<Vec<u64>>) -> PyResult<Self> {
        Ok(PyTable {
            inner: cgs::Table::from_rows(&rows).map_err(err)?,
        })
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.inner.rows(), self.inner.cols())
    }

    fn tolist(&self) -> Vec<Vec<u64>> {
        self.inner.to_nested()
    }

    fn row_sums(&self) -> Vec<u64> {
        self.inner.row_sums()
    }

    fn col_sums(&self) -> Vec<u64> {
        self.inner.col_sums()
    }

    /// Bipartite embedding: rows are vertices `0..R`, columns `R..R+C`.
    fn to_graph(&self) -> PyGraph {
        PyGraph {
            inner: self.inner.to_graph(),
        }
    }

    /// Fixed set of the embedding: every non-cell pair plus `cells`.
    #[pyo3(signature = (cells = Vec::new()))]
    fn fixed(&self, cells: Vec<(usize, usize)>) -> PyFixedSet {
        PyFixedSet {
            inner: self.inner.fixed_with_cells(cells),
        }
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("Table({:?})", self.inner.to_nested())
    }
}

#[pyclass(name = "FixedSet", module = "pycgsampler", from_py_object)]
#[derive(Clone)]
struct PyFixedSet {
    inner: cgs::FixedSet,
}

#[pymethods]
impl PyFixedSet {
    #[new]
    #[pyo3(signature = (n, directed = false, pairs = Vec::new()))]
    fn new(n: usize, directed: bool, pairs: Vec<(usize, usize)>) -> PyResult<Self> {
        let mut f = cgs::FixedSet::new(n, directed);
        for (u, v) in pairs {
            if u >= n || v >= n {
                return Err(PyValueError::new_err(format!("pair ({u}, {v}) out of range")));
            }
            f.insert(u, v);
        }
        Ok(PyFixedSet { inner: f })
    }

    /// The self pairs `g` requires.
    #[staticmethod]
    fn for_graph(g: &PyGraph) -> Self {
        PyFixedSet {
            inner: cgs::FixedSet::for_graph(&g.inner),
        }
    }

    fn insert(&mut self, u: usize, v: usize) -> PyResult<()> {
        if u >= self.inner.n() || v >= self.inner.n() {
            return Err(PyValueError::new_err(format!("pair ({u}, {v}) out of range")));
        }
        self.inner.insert(u, v);
        Ok(())
    }

    fn __contains__(&self, pair: (usize, usize)) -> bool {
        pair.0 < self.inner.n() && pair.1 < self.inner.n() && self.inner.contains(pair.0, pair.1)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn pairs(&self) -> Vec<(usize, usize)> {
        self.inner.iter().map(|e| (e.from, e.to)).collect()
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("FixedSet(n={}, pairs={})", self.inner.n(), self.inner.len())
    }
}

/// Every pair whose status is the same in all graphs with the degrees of
/// `g` that agree with it on `fixed`.
#[pyfunction]
fn compute_closure(g: &PyGraph, fixed: &PyFixedSet) -> PyResult<PyFixedSet> {
    Ok(PyFixedSet {
        inner: cgs::compute_closure(&g.inner, &fixed.inner).map_err(err)?,
    })
}

/// All graphs with the degrees (or strengths) of `g` and its values on
/// `fixed`. Small instances only.
#[pyfunction]
fn enumerate(g: &PyGraph, fixed: &PyFixedSet) -> PyResult<Vec<PyGraph>> {
    let space = enumerate_like(&g.inner, &fixed.inner).map_err(err)?;
    Ok((0..space.len()).map(|i| PyGraph { inner: space.graph(i) }).collect())
}

#[pyfunction]
fn walk_probability<'py>(py: Python<'py>, g: &PyGraph, walk: Vec<usize>, fixed: &PyFixedSet) -> PyResult<Bound<'py, PyAny>> {
    let p = cgs::walk_probability(&g.inner, &walk, &fixed.inner);
    let int = py.import("builtins")?.getattr("int")?;
    let num = int.call1((p.numer().to_string(),))?;
    let den = int.call1((p.denom().to_string(),))?;
    py.import("fractions")?.getattr("Fraction")?.call1((num, den))
}

/// `steps` iterations; returns how many changed the state.
fn run_steps<S: Sampler>(chain: &mut S, rng: &mut ChainRng, steps: usize) -> PyResult<usize> {
    let mut changed = 0;
    for _ in 0..steps {
        changed += usize::from(chain.step(rng).map_err(err)?);
    }
    Ok(changed)
}

#[pyclass(name = "UgsSampler", module = "pycgsampler")]
struct PyUgs {
    chain: cgs::UgsChain,
    rng: ChainRng,
}

#[pymethods]
impl PyUgs {
    /// `fixed` is closed first, so any design set may be passed.
    #[new]
    #[pyo3(signature = (graph, fixed = None, seed = 0, chain_id = 0))]
    fn new(graph: &PyGraph, fixed: Option<&PyFixedSet>, seed: u64, chain_id: u64) -> PyResult<Self> {
        let f = fixed.map_or_else(|| cgs::FixedSet::for_graph(&graph.inner), |f| f.inner.clone());
        let closed = cgs::compute_closure(&graph.inner, &f).map_err(err)?;
        Ok(PyUgs {
            chain: cgs::UgsChain::new(graph.inner.clone(), &closed).map_err(err)?,
            rng: chain_rng(seed, chain_id),
        })
    }

    /// One iteration; returns whether the state changed.
    fn step(&mut self) -> PyResult<bool> {
        self.chain.step(&mut self.rng).map_err(err)
    }

    /// `steps` iterations; returns how many changed the state.
    fn run(&mut self, steps: usize) -> PyResult<usize> {
        run_steps(&mut self.chain, &mut self.rng, steps)
    }

    #[getter]
    fn graph(&self) -> PyGraph {
        PyGraph {
            inner: self.chain.graph().clone(),
        }
    }
}

#[pyclass(name = "WgsSampler", module = "pycgsampler")]
struct PyWgs {
    chain: cgs::WgsChain,
    rng: ChainRng,
    rows: Option<usize>,
}

#[pymethods]
impl PyWgs {
    /// `target` is `"uniform"` or `"hypergeometric"`.
    #[new]
    #[pyo3(signature = (graph, fixed = None, seed = 0, chain_id = 0, target = "uniform"))]
    fn new(graph: &PyGraph, fixed: Option<&PyFixedSet>, seed: u64, chain_id: u64, target: &str) -> PyResult<Self> {
        let f = fixed.map_or_else(|| cgs::FixedSet::for_graph(&graph.inner), |f| f.inner.clone());
        let chain = cgs::WgsChain::new(graph.inner.to_weighted(), &f).map_err(err)?;
        Ok(PyWgs {
            chain: chain.with_target(parse_enum("target", target)?),
            rng: chain_rng(seed, chain_id),
            rows: None,
        })
    }

    /// One iteration; returns whether the state changed.
    fn step(&mut self) -> PyResult<bool> {
        self.chain.step(&mut self.rng).map_err(err)
    }

    /// `steps` iterations; returns how many changed the state.
    fn run(&mut self, steps: usize) -> PyResult<usize> {
        run_steps(&mut self.chain, &mut self.rng, steps)
    }

    #[staticmethod]
    #[pyo3(signature = (table, fixed_cells = Vec::new(), seed = 0, chain_id = 0, target = "uniform"))]
    fn for_table(
        table: &PyTable,
        fixed_cells: Vec<(usize, usize)>,
        seed: u64,
        chain_id: u64,
        target: &str,
    ) -> PyResult<Self> {
        let chain = cgs::WgsChain::for_table(&table.inner, fixed_cells).map_err(err)?;
        Ok(PyWgs {
            chain: chain.with_target(parse_enum("target", target)?),
            rng: chain_rng(seed, chain_id),
            rows: Some(table.inner.rows()),
        })
    }

    #[getter]
    fn graph(&self) -> PyGraph {
        PyGraph {
            inner: self.chain.graph().clone(),
        }
    }

    /// Current table, for samplers built with `for_table`.
    #[getter]
    fn table(&self) -> PyResult<Option<PyTable>> {
        self.rows
            .map(|r| {
                cgs::Table::from_graph(self.chain.graph(), r)
                    .map(|inner| PyTable { inner })
                    .map_err(err)
            })
            .transpose()
    }

    /// `(vertices, delta_low, delta_up)` of the last non-identity walk.
    fn last_walk(&self) -> Option<(Vec<usize>, i64, i64)> {
        self.chain
            .last_walk()
            .map(|w| (w.vertices.clone(), w.delta_low, w.delta_up))
    }
}

#[pyclass(name = "DsSampler", module = "pycgsampler")]
struct PyDs {
    chain: cgs::DsChain,
    rng: ChainRng,
}

#[pymethods]
impl PyDs {
    #[new]
    #[pyo3(signature = (table, seed = 0, chain_id = 0))]
    fn new(table: &PyTable, seed: u64, chain_id: u64) -> PyResult<Self> {
        Ok(PyDs {
            chain: cgs::DsChain::new(table.inner.clone()).map_err(err)?,
            rng: chain_rng(seed, chain_id),
        })
    }

    /// One iteration; returns whether the state changed.
    fn step(&mut self) -> PyResult<bool> {
        self.chain.step(&mut self.rng).map_err(err)
    }

    /// `steps` iterations; returns how many changed the state.
    fn run(&mut self, steps: usize) -> PyResult<usize> {
        run_steps(&mut self.chain, &mut self.rng, steps)
    }

    #[getter]
    fn table(&self) -> PyTable {
        PyTable {
            inner: self.chain.table().clone(),
        }
    }
}

/// Expected counts under (quasi-)independence with `fixed_cells` held out.
#[pyfunction]
#[pyo3(signature = (table, fixed_cells = Vec::new(), tol = 1e-10, max_iter = 100_000))]
fn ipfp(table: &PyTable, fixed_cells: Vec<(usize, usize)>, tol: f64, max_iter: usize) -> PyResult<Vec<Vec<f64>>> {
    let m = ipfp_cells(&table.inner, fixed_cells, tol, max_iter).map_err(err)?;
    Ok((0..m.rows).map(|i| (0..m.cols).map(|j| m.get(i, j)).collect()).collect())
}

/// `(chi_squared, g2)` against (quasi-)independence.
#[pyfunction]
#[pyo3(signature = (table, fixed_cells = Vec::new()))]
fn table_statistics(table: &PyTable, fixed_cells: Vec<(usize, usize)>) -> PyResult<(f64, f64)> {
    let m = ipfp_cells(&table.inner, fixed_cells, 1e-10, 100_000).map_err(err)?;
    Ok((
        chi_squared(&table.inner, &m).map_err(err)?,
        likelihood_ratio(&table.inner, &m).map_err(err)?,
    ))
}

#[pyfunction]
fn compartmentalization(g: &PyGraph) -> PyResult<f64> {
    cgs::compartmentalization(&g.inner).map_err(err)
}

#[pyfunction]
fn ess(trace: Vec<f64>) -> PyResult<f64> {
    cgs::ess(&trace).map_err(err)
}

/// `(p, standard_error)` of the Monte Carlo p-value.
#[pyfunction]
#[pyo3(signature = (trace, observed, tail = "upper", plus_one = false))]
fn p_value(trace: Vec<f64>, observed: f64, tail: &str, plus_one: bool) -> PyResult<(f64, f64)> {
    let opts = PValueOptions {
        tail: parse_enum("tail", tail)?,
        plus_one,
    };
    let p = p_value_with(&trace, observed, opts).map_err(err)?;
    Ok((p.p, p.se))
}

/// Runs the command-line pipeline on a file. `config` takes the keys of
/// the JSON run configuration. Returns the report as a dict.
#[pyfunction]
#[pyo3(signature = (path, config, fixed = None, directed = false, threads = 1))]
fn run_file<'py>(
    py: Python<'py>,
    path: std::path::PathBuf,
    config: &Bound<'py, PyDict>,
    fixed: Option<std::path::PathBuf>,
    directed: bool,
    threads: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let json = py.import("json")?;
    let text: String = json.call_method1("dumps", (config,))?.extract()?;
    let cfg = RunConfig::from_json(&text).map_err(err)?;
    let opts = EdgeListOptions {
        directed,
        ..Default::default()
    };
    let inst = parse_instance(&path, fixed.as_deref(), opts).map_err(err)?;
    let out = run_instance(&inst, &cfg, threads).map_err(err)?;
    let report = serde_json::to_string(&out.report).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    json.call_method1("loads", (report,))
}

#[pymodule]
fn pycgsampler(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_class::<PyTable>()?;
    m.add_class::<PyFixedSet>()?;
    m.add_class::<PyUgs>()?;
    m.add_class::<PyWgs>()?;
    m.add_class::<PyDs>()?;
    m.add_function(wrap_pyfunction!(compute_closure, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate, m)?)?;
    m.add_function(wrap_pyfunction!(walk_probability, m)?)?;
    m.add_function(wrap_pyfunction!(ipfp, m)?)?;
    m.add_function(wrap_pyfunction!(table_statistics, m)?)?;
    m.add_function(wrap_pyfunction!(compartmentalization, m)?)?;
    m.add_function(wrap_pyfunction!(ess, m)?)?;
    m.add_function(wrap_pyfunction!(p_value, m)?)?;
    m.add_function(wrap_pyfunction!(run_file, m)?)?;
    Ok(())
}
