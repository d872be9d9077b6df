//! Seeded path simulation, batch-means variance estimates and replicated
//! CLT diagnostics.
//!
//! All randomness comes from Xoshiro256++ (period `2^256 - 1`). Replicate
//! `r` of a run seeded with `s` uses the generator seeded with `s` and
//! advanced by `r` jumps of `2^128` steps, so replicates never overlap and
//! results do not depend on thread scheduling.

use rand::distr::weighted::WeightedIndex;
use rand::{Rng, SeedableRng};
use rand_distr::Distribution;
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::{example9_rates, ReversibleKernel};
use crate::mh_continuous::{mh_step, SamplerSpec};
use crate::variance::AsymptoticVariance;

pub type ChainRng = Xoshiro256PlusPlus;

pub const GENERATOR: &str = "xoshiro256++";

/// Generator for stream `index` of `seed`.
pub fn stream(seed: u64, index: u64) -> ChainRng {
    let mut rng = ChainRng::seed_from_u64(seed);
    for _ in 0..index {
        rng.jump();
    }
    rng
}

/// A value with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

impl Estimate {
    /// `|a - b| <= k sqrt(se_a^2 + se_b^2)`.
    pub fn agrees_with(&self, other: &Estimate, k: f64) -> bool {
        (self.value - other.value).abs() <= k * self.se.hypot(other.se)
    }
}

pub trait MarkovSource {
    type State: Clone + Send;

    fn step<R: Rng + ?Sized>(&self, x: &Self::State, rng: &mut R) -> Self::State;

    fn check_start(&self, x: &Self::State) -> Result<()>;

    fn describe(&self) -> String;
}

/// Exact categorical sampling from the rows of a finite kernel.
#[derive(Debug, Clone)]
pub struct KernelSampler {
    rows: Vec<WeightedIndex<f64>>,
    pi: Vec<f64>,
}

impl KernelSampler {
    pub fn new(kernel: &ReversibleKernel) -> Self {
        let n = kernel.n();
        let rows = (0..n)
            .map(|i| WeightedIndex::new((0..n).map(|j| kernel.prob(i, j))).expect("stochastic rows have positive mass"))
            .collect();
        Self {
            rows,
            pi: kernel.pi().to_vec(),
        }
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    /// Draws a state from the stationary law.
    pub fn sample_stationary<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        WeightedIndex::new(&self.pi)
            .expect("stationary law is positive")
            .sample(rng)
    }
}

impl MarkovSource for KernelSampler {
    type State = usize;

    fn step<R: Rng + ?Sized>(&self, x: &usize, rng: &mut R) -> usize {
        self.rows[*x].sample(rng)
    }

    fn check_start(&self, x: &usize) -> Result<()> {
        if *x < self.n() {
            Ok(())
        } else {
            Err(Error::InvalidStart(format!("state {x} outside 0..{}", self.n())))
        }
    }

    fn describe(&self) -> String {
        format!("finite kernel on {} states", self.n())
    }
}

/// The periodic-versus-Metropolis pair run on all of `Z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Example9Chain {
    P1,
    P2,
}

impl Example9Chain {
    /// Draws from the common stationary law: `1/4` at the origin, otherwise
    /// `|m|` geometric with ratio 1/2 and a fair sign.
    pub fn sample_stationary<R: Rng + ?Sized>(rng: &mut R) -> i64 {
        if rng.random::<f64>() < 0.25 {
            return 0;
        }
        let mut m = 1;
        while rng.random::<bool>() {
            m += 1;
        }
        if rng.random::<bool>() {
            m
        } else {
            -m
        }
    }
}

impl MarkovSource for Example9Chain {
    type State = i64;

    fn step<R: Rng + ?Sized>(&self, x: &i64, rng: &mut R) -> i64 {
        let ((d1, _), (d2, u2)) = example9_rates(*x);
        let u: f64 = rng.random();
        match self {
            Example9Chain::P1 => {
                if u < d1 {
                    x - 1
                } else {
                    x + 1
                }
            }
            Example9Chain::P2 => {
                if u < d2 {
                    x - 1
                } else if u < d2 + u2 {
                    x + 1
                } else {
                    *x
                }
            }
        }
    }

    fn check_start(&self, _: &i64) -> Result<()> {
        Ok(())
    }

    fn describe(&self) -> String {
        format!("example9 {self:?} on Z")
    }
}

impl MarkovSource for SamplerSpec {
    type State = f64;

    fn step<R: Rng + ?Sized>(&self, x: &f64, rng: &mut R) -> f64 {
        mh_step(self, *x, rng).expect("chain stays on the support").0
    }

    fn check_start(&self, x: &f64) -> Result<()> {
        self.check_state(*x)
            .map_err(|_| Error::InvalidStart(format!("{x} is outside the target support")))
    }

    fn describe(&self) -> String {
        SamplerSpec::describe(self)
    }
}

/// `X_1, ..., X_n` started from `x0` (which is not included).
pub fn simulate_states<S: MarkovSource, R: Rng + ?Sized>(
    source: &S,
    x0: S::State,
    n: usize,
    rng: &mut R,
) -> Result<Vec<S::State>> {
    source.check_start(&x0)?;
    let mut x = x0;
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        x = source.step(&x, rng);
        out.push(x.clone());
    }
    Ok(out)
}

/// A simulated trace of `h(X_1), ..., h(X_n)` with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub values: Vec<f64>,
    pub seed: u64,
    pub source: String,
    pub generator: &'static str,
}

pub fn simulate_path<S: MarkovSource>(
    source: &S,
    x0: S::State,
    n: usize,
    seed: u64,
    h: impl Fn(&S::State) -> f64,
) -> Result<Trace> {
    let mut rng = stream(seed, 0);
    let states = simulate_states(source, x0, n, &mut rng)?;
    Ok(Trace {
        values: states.iter().map(h).collect(),
        seed,
        source: source.describe(),
        generator: GENERATOR,
    })
}

/// Batch-means estimate of the asymptotic variance of a trace.
///
/// With `b` batches of size `m = floor(n / b)` (default `b = floor(sqrt n)`),
/// the estimate is `m` times the sample variance of the batch means; its
/// standard error is taken as `estimate * sqrt(2 / (b - 1))`.
pub fn batch_means_variance(values: &[f64], n_batches: Option<usize>) -> Result<Estimate> {
    let n = values.len();
    let b = n_batches.unwrap_or((n as f64).sqrt().floor() as usize);
    if b < 2 || n / b < 2 {
        return Err(Error::TraceTooShort(format!(
            "{n} values cannot form {b} batches of size >= 2"
        )));
    }
    let m = n / b;
    let means: Vec<f64> = values[..b * m]
        .chunks_exact(m)
        .map(|c| c.iter().sum::<f64>() / m as f64)
        .collect();
    let grand = means.iter().sum::<f64>() / b as f64;
    let var = means.iter().map(|x| (x - grand).powi(2)).sum::<f64>() / (b - 1) as f64;
    let value = m as f64 * var;
    Ok(Estimate {
        value,
        se: value * (2.0 / (b - 1) as f64).sqrt(),
    })
}

/// Settings for [`clt_diagnostic`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CltConfig {
    pub n: usize,
    pub replicates: usize,
    pub seed: u64,
    pub burn_in: usize,
}

/// Replicated normalized sums `S_n / sqrt(n)` compared with a reference
/// asymptotic variance.
#[derive(Debug, Clone, PartialEq)]
pub struct CltReport {
    pub n: usize,
    pub replicates: usize,
    pub normalized_sums: Vec<f64>,
    pub mean: f64,
    pub variance: f64,
    pub reference: AsymptoticVariance,
    /// `(variance - v) / (v sqrt(2 / (m - 1)))`; absent for an infinite `v`.
    pub z_score: Option<f64>,
    /// Mean of the normalized sums over its standard error.
    pub mean_z: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    /// Empirical variance at `n` over that at `n / 4`.
    pub growth_ratio: f64,
    /// Set when `v` is infinite or the variance still grows with `n`.
    pub diverging: bool,
}

/// Runs `replicates` independent chains of length `n` (after `burn_in`
/// steps) from starts drawn by `start`, in parallel, and summarizes
/// `S_n / sqrt(n)` with `S_n = sum (h(X_i) - mean)`.
pub fn clt_diagnostic<S, H, F>(
    source: &S,
    h: H,
    mean: f64,
    reference: AsymptoticVariance,
    start: F,
    config: CltConfig,
) -> Result<CltReport>
where
    S: MarkovSource + Sync,
    H: Fn(&S::State) -> f64 + Sync,
    F: Fn(&mut ChainRng) -> S::State + Sync,
{
    const MIN_REPLICATES: usize = 50;
    if config.replicates < MIN_REPLICATES {
        return Err(Error::TooFewSamples {
            min: MIN_REPLICATES,
            got: config.replicates,
        });
    }
    if config.n < 4 {
        return Err(Error::TraceTooShort(format!("n = {} is below 4", config.n)));
    }
    let quarter = config.n / 4;
    let runs: Vec<(f64, f64)> = (0..config.replicates as u64)
        .into_par_iter()
        .map(|r| -> Result<(f64, f64)> {
            let mut rng = stream(config.seed, r);
            let mut x = start(&mut rng);
            source.check_start(&x)?;
            for _ in 0..config.burn_in {
                x = source.step(&x, &mut rng);
            }
            let mut sum = 0.0;
            let mut at_quarter = 0.0;
            for i in 1..=config.n {
                x = source.step(&x, &mut rng);
                sum += h(&x) - mean;
                if i == quarter {
                    at_quarter = sum;
                }
            }
            Ok((sum / (config.n as f64).sqrt(), at_quarter / (quarter as f64).sqrt()))
        })
        .collect::<Result<_>>()?;

    let sums: Vec<f64> = runs.iter().map(|r| r.0).collect();
    let quarters: Vec<f64> = runs.iter().map(|r| r.1).collect();
    let m = sums.len() as f64;
    let (mu, var) = mean_var(&sums);
    let (_, var_quarter) = mean_var(&quarters);
    let sd = var.sqrt();
    let skewness = sums.iter().map(|x| ((x - mu) / sd).powi(3)).sum::<f64>() / m;
    let excess_kurtosis = sums.iter().map(|x| ((x - mu) / sd).powi(4)).sum::<f64>() / m - 3.0;
    let growth_ratio = var / var_quarter;
    let z_score = match reference {
        AsymptoticVariance::Finite(v) => Some((var - v) / (v * (2.0 / (m - 1.0)).sqrt())),
        AsymptoticVariance::Infinite => None,
    };
    Ok(CltReport {
        n: config.n,
        replicates: config.replicates,
        normalized_sums: sums,
        mean: mu,
        variance: var,
        reference,
        z_score,
        mean_z: mu / (var / m).sqrt(),
        skewness,
        excess_kurtosis,
        growth_ratio,
        diverging: !reference.is_finite() || growth_ratio > 2.0,
    })
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}
