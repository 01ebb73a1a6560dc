//! End-to-end runs on a parsed instance: closure, sampler, statistic,
//! independent chains, report.

use crate::closure::compute_closure;
use crate::diagnostics::{run_chain, ChainConfig, ChainRun, Method, PValueOptions, StatReport};
use crate::ds::DsChain;
use crate::error::{Error, Result};
use crate::graph::{Graph, Table};
use crate::io::{Instance, RunConfig, StatisticKind};
use crate::rng::chain_rng;
use crate::stats::{
    chi_squared_embedded, compartmentalization, ipfp, likelihood_ratio_embedded, ExpectedCounts,
};
use crate::ugs::UgsChain;
use crate::wgs::WgsChain;

const IPFP_TOL: f64 = 1e-10;
const IPFP_MAX_ITER: usize = 100_000;

/// A statistic evaluated on graphs (tables are read through their
/// embedding).
pub enum Statistic {
    Compartmentalization,
    EdgeCount,
    G2(ExpectedCounts),
    ChiSquared(ExpectedCounts),
}

impl Statistic {
    pub fn for_instance(inst: &Instance, kind: StatisticKind) -> Result<Self> {
        let fit = || -> Result<ExpectedCounts> {
            let t = inst
                .table()
                .ok_or_else(|| Error::Config(format!("statistic {} needs a table instance", kind.name())))?;
            ipfp(&t, &inst.fixed, IPFP_TOL, IPFP_MAX_ITER)
        };
        Ok(match kind {
            StatisticKind::Compartmentalization => Statistic::Compartmentalization,
            StatisticKind::EdgeCount => Statistic::EdgeCount,
            StatisticKind::G2 => Statistic::G2(fit()?),
            StatisticKind::ChiSquared => Statistic::ChiSquared(fit()?),
        })
    }

    pub fn eval(&self, g: &Graph) -> Result<f64> {
        match self {
            Statistic::Compartmentalization => compartmentalization(g),
            Statistic::EdgeCount => Ok(g.edges().map(|(_, w)| w as f64).sum()),
            Statistic::G2(m) => likelihood_ratio_embedded(g, m),
            Statistic::ChiSquared(m) => chi_squared_embedded(g, m),
        }
    }

    pub fn eval_table(&self, t: &Table) -> Result<f64> {
        self.eval(&t.to_graph())
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub observed: f64,
    pub runs: Vec<ChainRun>,
    pub report: StatReport,
    /// Final state of chain 0.
    pub final_graph: Graph,
}

/// Runs `threads` independent chains on `inst`, chain `k` on stream `k`
/// of `cfg.seed`.
pub fn run_instance(inst: &Instance, cfg: &RunConfig, threads: usize) -> Result<RunOutcome> {
    let threads = threads.max(1);
    let stat = Statistic::for_instance(inst, cfg.statistic)?;
    let observed = stat.eval(&inst.graph)?;
    let chain_cfg = ChainConfig::from_samples(cfg.steps, cfg.thin, cfg.burn_in_frac, cfg.seed)?;

    // the closure is shared by every unweighted chain
    let closure = match cfg.method {
        Method::Ugs => {
            if inst.graph.is_weighted() {
                return Err(Error::Config("ugs needs an unweighted graph; use wgs".into()));
            }
            Some(compute_closure(&inst.graph, &inst.fixed)?)
        }
        _ => None,
    };
    if cfg.method == Method::Ds {
        if inst.table_rows.is_none() {
            return Err(Error::Config("ds needs a table instance".into()));
        }
        if !inst.fixed_cells().is_empty() {
            return Err(Error::Config("ds does not support fixed cells; use wgs".into()));
        }
    }

    let one = |k: usize| -> Result<(ChainRun, Graph)> {
        let mut rng = chain_rng(cfg.seed, k as u64);
        let name = cfg.statistic.name();
        let (mut run, g) = match cfg.method {
            Method::Ugs => {
                let f = closure.as_ref().expect("closure computed for ugs");
                let mut chain = UgsChain::new(inst.graph.clone(), f)?;
                let run = run_chain(&mut chain, &mut rng, &chain_cfg, Method::Ugs, name, |g| stat.eval(g))?;
                (run, chain.into_graph())
            }
            Method::Wgs => {
                let mut g = inst.graph.clone();
                if !g.is_weighted() {
                    g = g.to_weighted();
                }
                let mut chain = WgsChain::new(g, &inst.fixed)?;
                let run = run_chain(&mut chain, &mut rng, &chain_cfg, Method::Wgs, name, |g| stat.eval(g))?;
                (run, chain.into_graph())
            }
            Method::Ds => {
                let t = inst.table().expect("checked above");
                let mut chain = DsChain::new(t)?;
                let run = run_chain(&mut chain, &mut rng, &chain_cfg, Method::Ds, name, |t| stat.eval_table(t))?;
                (run, chain.into_table().to_graph())
            }
        };
        run.chain_id = k as u64;
        Ok((run, g))
    };

    let results: Vec<Result<(ChainRun, Graph)>> = if threads == 1 {
        vec![one(0)]
    } else {
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..threads).map(|k| s.spawn(move || one(k))).collect();
            handles
                .into_iter()
                .map(|h| h.join().unwrap_or_else(|_| Err(Error::Internal {
                    message: "chain thread panicked".into(),
                    walk: Vec::new(),
                })))
                .collect()
        })
    };
    let mut runs = Vec::with_capacity(threads);
    let mut final_graph = None;
    for r in results {
        let (run, g) = r?;
        final_graph.get_or_insert(g);
        runs.push(run);
    }
    let opts = PValueOptions {
        tail: cfg.tail,
        plus_one: cfg.plus_one,
    };
    let report = StatReport::pooled(&runs, observed, opts)?;
    Ok(RunOutcome {
        observed,
        runs,
        report,
        final_graph: final_graph.expect("at least one chain"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixed::FixedSet;
    use crate::io::{parse_matrix_csv, EdgeListOptions};

    fn table_instance(text: &str) -> Instance {
        let t = parse_matrix_csv(text, "t.csv").unwrap();
        let mut labels = t.row_labels.clone();
        labels.extend(t.col_labels.clone());
        Instance {
            graph: t.table.to_graph(),
            fixed: t.table.structural_fixed(),
            labels,
            table_rows: Some(t.table.rows()),
        }
    }

    fn cfg(method: Method, statistic: StatisticKind) -> RunConfig {
        RunConfig {
            method,
            steps: 400,
            burn_in_frac: 0.2,
            thin: 2,
            seed: 3,
            statistic,
            tail: Default::default(),
            plus_one: false,
        }
    }

    #[test]
    fn table_runs_all_methods() {
        let inst = table_instance("3,1,0\n1,2,2\n0,1,4\n");
        for m in [Method::Wgs, Method::Ds] {
            let out = run_instance(&inst, &cfg(m, StatisticKind::G2), 1).unwrap();
            assert_eq!(out.report.trace_len, 400);
            assert!((0.0..=1.0).contains(&out.report.p_value));
            let t = Table::from_graph(&out.final_graph, 3).unwrap();
            assert_eq!(t.row_sums(), vec![4, 5, 5]);
        }
    }

    #[test]
    fn threads_are_reproducible() {
        let inst = table_instance("3,1,0\n1,2,2\n0,1,4\n");
        let c = cfg(Method::Wgs, StatisticKind::ChiSquared);
        let a = run_instance(&inst, &c, 3).unwrap();
        let b = run_instance(&inst, &c, 3).unwrap();
        assert_eq!(a.runs.len(), 3);
        for (x, y) in a.runs.iter().zip(&b.runs) {
            assert_eq!(x.trace, y.trace);
        }
        assert_ne!(a.runs[0].trace, a.runs[1].trace);
    }

    #[test]
    fn food_web_with_ugs() {
        let text = "a c\nb c\nc d\nb d\na e\n";
        let opts = EdgeListOptions {
            directed: true,
            ..Default::default()
        };
        let (graph, labels) = crate::io::parse_edge_list(text, "w", opts).unwrap();
        let inst = Instance {
            fixed: FixedSet::for_graph(&graph),
            graph,
            labels,
            table_rows: None,
        };
        let out = run_instance(&inst, &cfg(Method::Ugs, StatisticKind::Compartmentalization), 1).unwrap();
        assert!(out.report.mixing_rate > 0.0);
        assert!(run_instance(&inst, &cfg(Method::Ds, StatisticKind::EdgeCount), 1).is_err());
        assert!(run_instance(&inst, &cfg(Method::Ugs, StatisticKind::G2), 1).is_err());
    }

    #[test]
    fn ds_rejects_fixed_cells() {
        let mut inst = table_instance("3,1\n1,2\n");
        inst.fixed.insert(0, 2);
        assert!(matches!(
            run_instance(&inst, &cfg(Method::Ds, StatisticKind::G2), 1),
            Err(Error::Config(_))
        ));
    }
}
