//! Chain driving and output analysis: burn-in and thinning, mixing rate,
//! effective sample size, Monte Carlo p-values.

use std::io::Write;
use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampler::Sampler;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Ugs,
    Wgs,
    Ds,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Ugs => "ugs",
            Method::Wgs => "wgs",
            Method::Ds => "ds",
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tail {
    /// `P(T >= observed)`
    #[default]
    Upper,
    /// `P(T <= observed)`
    Lower,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub total_steps: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
}

impl ChainConfig {
    pub const DEFAULT_BURN_IN_FRAC: f64 = 0.2;

    /// `samples` retained points at thinning `thin`, after a burn-in of
    /// `burn_in_frac` times the retained steps.
    pub fn from_samples(samples: usize, thin: usize, burn_in_frac: f64, seed: u64) -> Result<Self> {
        if thin == 0 {
            return Err(Error::Config("thin must be positive".into()));
        }
        if !(0.0..=1e6).contains(&burn_in_frac) {
            return Err(Error::Config(format!("bad burn-in fraction {burn_in_frac}")));
        }
        let retained = samples * thin;
        let burn_in = (burn_in_frac * retained as f64).round() as usize;
        Ok(ChainConfig {
            total_steps: burn_in + retained,
            burn_in,
            thin,
            seed,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.thin == 0 {
            return Err(Error::Config("thin must be positive".into()));
        }
        if self.burn_in > self.total_steps {
            return Err(Error::Config("burn-in exceeds total steps".into()));
        }
        Ok(())
    }

    pub fn trace_len(&self) -> usize {
        (self.total_steps - self.burn_in) / self.thin
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainRun {
    pub method: Method,
    pub statistic: String,
    pub config: ChainConfig,
    pub chain_id: u64,
    /// Statistic after steps `burn_in + thin`, `burn_in + 2 thin`, ...
    pub trace: Vec<f64>,
    /// One flag per post-burn-in step.
    pub changed: Vec<bool>,
    pub wall_seconds: f64,
}

impl ChainRun {
    /// Step index (1-based) of trace point `k`.
    pub fn trace_step(&self, k: usize) -> usize {
        self.config.burn_in + (k + 1) * self.config.thin
    }

    /// Writes `step statistic changed` lines, one per trace point.
    pub fn write_trace<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# step statistic changed")?;
        for (k, x) in self.trace.iter().enumerate() {
            let changed = self.changed[(k + 1) * self.config.thin - 1];
            writeln!(out, "{} {} {}", self.trace_step(k), x, u8::from(changed))?;
        }
        Ok(())
    }
}

/// Runs `sampler` for `cfg.total_steps` steps, evaluating `statistic` on
/// every retained state.
pub fn run_chain<S, R, F>(
    sampler: &mut S,
    rng: &mut R,
    cfg: &ChainConfig,
    method: Method,
    statistic_name: &str,
    mut statistic: F,
) -> Result<ChainRun>
where
    S: Sampler,
    R: Rng + ?Sized,
    F: FnMut(&S::State) -> Result<f64>,
{
    cfg.validate()?;
    let start = Instant::now();
    for _ in 0..cfg.burn_in {
        sampler.step(rng)?;
    }
    let kept = cfg.total_steps - cfg.burn_in;
    let mut changed = Vec::with_capacity(kept);
    let mut trace = Vec::with_capacity(cfg.trace_len());
    for s in 1..=kept {
        changed.push(sampler.step(rng)?);
        if s % cfg.thin == 0 {
            trace.push(statistic(sampler.state())?);
        }
    }
    Ok(ChainRun {
        method,
        statistic: statistic_name.to_string(),
        config: *cfg,
        chain_id: 0,
        trace,
        changed,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Fraction of post-burn-in steps that changed the state.
pub fn mixing_rate(run: &ChainRun) -> Result<f64> {
    if run.changed.is_empty() {
        return Err(Error::Domain("no post-burn-in steps".into()));
    }
    Ok(run.changed.iter().filter(|&&c| c).count() as f64 / run.changed.len() as f64)
}

/// Autocovariances `gamma_0 .. gamma_{n-1}` (biased, divisor `n`).
pub fn autocovariance(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let size = (2 * n).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = x
        .iter()
        .map(|v| Complex::new(v - mean, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(size)
        .collect();
    let mut planner = FftPlanner::new();
    let fwd: Arc<dyn rustfft::Fft<f64>> = planner.plan_fft_forward(size);
    let inv = planner.plan_fft_inverse(size);
    fwd.process(&mut buf);
    for c in &mut buf {
        *c = Complex::new(c.norm_sqr(), 0.0);
    }
    inv.process(&mut buf);
    let scale = (size * n) as f64;
    buf.iter().take(n).map(|c| c.re / scale).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EssEstimate {
    pub ess: f64,
    /// Integrated autocorrelation time before clamping.
    pub tau: f64,
    /// The trace had zero variance; `ess` is then `n` by convention.
    pub constant: bool,
}

/// Effective sample size with an initial-positive-sequence truncation.
pub fn ess_estimate(trace: &[f64]) -> Result<EssEstimate> {
    let n = trace.len();
    if n < 10 {
        return Err(Error::Domain(format!("ESS needs at least 10 points, got {n}")));
    }
    let gamma = autocovariance(trace);
    if !(gamma[0] > 0.0) || gamma[0] <= 1e-300 {
        return Ok(EssEstimate {
            ess: n as f64,
            tau: 1.0,
            constant: true,
        });
    }
    let rho = |k: usize| gamma[k] / gamma[0];
    // tau = -1 + 2 sum_k (rho_2k + rho_2k+1), stopping at the first
    // non-positive pair
    let mut sum = 0.0;
    let mut k = 0;
    while 2 * k + 1 < n {
        let pair = rho(2 * k) + rho(2 * k + 1);
        if pair <= 0.0 {
            break;
        }
        sum += pair;
        k += 1;
    }
    let tau = -1.0 + 2.0 * sum;
    let ess = if tau > 0.0 { (n as f64 / tau).min(n as f64) } else { n as f64 };
    Ok(EssEstimate {
        ess,
        tau,
        constant: false,
    })
}

pub fn ess(trace: &[f64]) -> Result<f64> {
    Ok(ess_estimate(trace)?.ess)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PValueOptions {
    pub tail: Tail,
    /// Report `(k + 1) / (n + 1)` instead of `k / n`.
    pub plus_one: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PValue {
    pub p: f64,
    /// From the long-run variance of the exceedance indicators.
    pub se: f64,
    /// Batch-means estimate of the same quantity.
    pub se_batch: f64,
}

pub fn p_value(trace: &[f64], observed: f64) -> Result<PValue> {
    p_value_with(trace, observed, PValueOptions::default())
}

pub fn p_value_with(trace: &[f64], observed: f64, opts: PValueOptions) -> Result<PValue> {
    let n = trace.len();
    if n == 0 {
        return Err(Error::Domain("empty trace".into()));
    }
    let hit: Vec<f64> = trace
        .iter()
        .map(|&x| {
            let h = match opts.tail {
                Tail::Upper => x >= observed,
                Tail::Lower => x <= observed,
            };
            f64::from(u8::from(h))
        })
        .collect();
    let k: f64 = hit.iter().sum();
    let p = if opts.plus_one {
        (k + 1.0) / (n as f64 + 1.0)
    } else {
        k / n as f64
    };
    let (se, se_batch) = if n >= 10 {
        let e = ess_estimate(&hit)?;
        let var = autocovariance(&hit)[0];
        let se = if e.constant { 0.0 } else { (var / e.ess).sqrt() };
        (se, batch_means_se(&hit))
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(PValue { p, se, se_batch })
}

/// Standard error of the mean by non-overlapping batches of size
/// `floor(sqrt(n))`.
pub fn batch_means_se(x: &[f64]) -> f64 {
    let n = x.len();
    let b = (n as f64).sqrt().floor() as usize;
    if b == 0 {
        return f64::NAN;
    }
    let a = n / b;
    if a < 2 {
        return f64::NAN;
    }
    let means: Vec<f64> = x
        .chunks_exact(b)
        .take(a)
        .map(|c| c.iter().sum::<f64>() / b as f64)
        .collect();
    let grand = means.iter().sum::<f64>() / a as f64;
    let var = means.iter().map(|m| (m - grand).powi(2)).sum::<f64>() / (a - 1) as f64;
    (var / a as f64).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatReport {
    pub statistic: String,
    pub observed: f64,
    pub tail: Tail,
    pub p_value: f64,
    pub p_se: f64,
    pub p_se_batch: f64,
    pub ess: f64,
    pub ess_constant: bool,
    pub ess_per_second: f64,
    pub mixing_rate: f64,
    pub wall_time: f64,
    pub trace_len: usize,
    pub chains: usize,
}

impl StatReport {
    pub fn from_run(run: &ChainRun, observed: f64, opts: PValueOptions) -> Result<Self> {
        Self::pooled(std::slice::from_ref(run), observed, opts)
    }

    /// Pools independent chains: traces are concatenated for the p-value,
    /// ESS is summed over chains and the wall time is the longest chain's.
    pub fn pooled(runs: &[ChainRun], observed: f64, opts: PValueOptions) -> Result<Self> {
        let first = runs.first().ok_or_else(|| Error::Domain("no chains".into()))?;
        let trace: Vec<f64> = runs.iter().flat_map(|r| r.trace.iter().copied()).collect();
        let p = p_value_with(&trace, observed, opts)?;
        // per-chain standard errors combine as independent means
        let (p_se, p_se_batch) = if runs.len() > 1 {
            let mut v = 0.0;
            let mut vb = 0.0;
            for r in runs {
                let w = r.trace.len() as f64 / trace.len() as f64;
                let q = p_value_with(&r.trace, observed, opts)?;
                v += (w * q.se).powi(2);
                vb += (w * q.se_batch).powi(2);
            }
            (v.sqrt(), vb.sqrt())
        } else {
            (p.se, p.se_batch)
        };
        let mut ess_total = 0.0;
        let mut constant = true;
        for r in runs {
            let e = ess_estimate(&r.trace)?;
            ess_total += e.ess;
            constant &= e.constant;
        }
        let changed: usize = runs.iter().map(|r| r.changed.iter().filter(|&&c| c).count()).sum();
        let steps: usize = runs.iter().map(|r| r.changed.len()).sum();
        let wall = runs.iter().map(|r| r.wall_seconds).fold(0.0, f64::max);
        Ok(StatReport {
            statistic: first.statistic.clone(),
            observed,
            tail: opts.tail,
            p_value: p.p,
            p_se,
            p_se_batch,
            ess: ess_total,
            ess_constant: constant,
            ess_per_second: if wall > 0.0 { ess_total / wall } else { f64::INFINITY },
            mixing_rate: if steps > 0 { changed as f64 / steps as f64 } else { 0.0 },
            wall_time: wall,
            trace_len: trace.len(),
            chains: runs.len(),
        })
    }
}
