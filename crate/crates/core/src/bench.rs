//! Sweep comparing the weighted sampler with the 2x2 subtable chain on
//! sparse tables of growing size.

use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{ess, mixing_rate, run_chain, ChainConfig, ChainRun, Method};
use crate::ds::DsChain;
use crate::error::{Error, Result};
use crate::graph::Table;
use crate::rng::chain_rng;
use crate::stats::{ipfp_cells, likelihood_ratio, likelihood_ratio_embedded};
use crate::wgs::WgsChain;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    #[serde(rename = "L")]
    pub levels: usize,
    pub method: Method,
    pub mixing_rate: f64,
    pub ess: f64,
    pub wall_seconds: f64,
    pub ess_per_second: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    /// Bivariate draws per table.
    pub draws: usize,
    /// Retained samples per chain; thinning is `L`.
    pub samples: usize,
    pub burn_in_frac: f64,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            draws: 200,
            samples: 10_000,
            burn_in_frac: 0.2,
            seed: 0,
        }
    }
}

/// `L x L` cross-tabulation of `draws` pairs of independent uniform
/// categorical variables.
pub fn random_table<R: Rng + ?Sized>(levels: usize, draws: usize, rng: &mut R) -> Table {
    let mut t = Table::zeros(levels, levels);
    for _ in 0..draws {
        let i = rng.random_range(0..levels);
        let j = rng.random_range(0..levels);
        t.set(i, j, t.get(i, j) + 1);
    }
    t
}

/// Runs both samplers on one table, tracking the likelihood-ratio statistic
/// against independence.
pub fn bench_table(t: &Table, levels: usize, cfg: &BenchConfig, chain_id: u64) -> Result<Vec<(BenchRow, ChainRun)>> {
    let m = ipfp_cells(t, [], 1e-9, 10_000)?;
    let chain_cfg = ChainConfig::from_samples(cfg.samples, levels.max(1), cfg.burn_in_frac, cfg.seed)?;
    let mut out = Vec::new();

    let mut wgs = WgsChain::for_table(t, [])?;
    let mut rng = chain_rng(cfg.seed, 2 * chain_id);
    let run = run_chain(&mut wgs, &mut rng, &chain_cfg, Method::Wgs, "g2", |g| {
        likelihood_ratio_embedded(g, &m)
    })?;
    out.push((row(levels, &run)?, run));

    let mut ds = DsChain::new(t.clone())?;
    let mut rng = chain_rng(cfg.seed, 2 * chain_id + 1);
    let run = run_chain(&mut ds, &mut rng, &chain_cfg, Method::Ds, "g2", |t| likelihood_ratio(t, &m))?;
    out.push((row(levels, &run)?, run));
    Ok(out)
}

fn row(levels: usize, run: &ChainRun) -> Result<BenchRow> {
    let e = ess(&run.trace)?;
    Ok(BenchRow {
        levels,
        method: run.method,
        mixing_rate: mixing_rate(run)?,
        ess: e,
        wall_seconds: run.wall_seconds,
        ess_per_second: e / run.wall_seconds.max(f64::MIN_POSITIVE),
    })
}

/// One table per `L`, both samplers on each.
pub fn bench_sweep(levels: &[usize], cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    if levels.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Config("L values must be sorted ascending".into()));
    }
    let mut rows = Vec::new();
    for (k, &l) in levels.iter().enumerate() {
        if l < 2 {
            return Err(Error::Config(format!("L = {l} is too small")));
        }
        let mut rng = chain_rng(cfg.seed, u64::MAX - k as u64);
        let t = random_table(l, cfg.draws, &mut rng);
        rows.extend(bench_table(&t, l, cfg, k as u64)?.into_iter().map(|(r, _)| r));
    }
    Ok(rows)
}

pub const CSV_HEADER: &str = "L,method,mixing_rate,ess,wall_seconds,ess_per_second";

pub fn write_csv<W: Write>(rows: &[BenchRow], mut out: W) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.levels, r.method, r.mixing_rate, r.ess, r.wall_seconds, r.ess_per_second
        )?;
    }
    Ok(())
}
