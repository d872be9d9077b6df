//! Exact asymptotic variances from the mean-zero spectrum.
//!
//! For a functional `h` with spectral weights `w_i` the lag-`k`
//! autocovariance is `sum_i w_i lambda_i^k` and the asymptotic variance is
//! `sum_i w_i (1 + lambda_i) / (1 - lambda_i)`.

use crate::error::{Error, Result};
use crate::kernel::ReversibleKernel;
use crate::spectral::SpectralDecomposition;

/// Weights below this are treated as numerically absent.
const WEIGHT_FLOOR: f64 = 1e-12;
/// Eigenvalues this close to 1 carrying weight make the variance infinite.
const UNIT_GAP: f64 = 1e-9;

/// A real function on the state space together with its stationary moments.
#[derive(Debug, Clone, PartialEq)]
pub struct Functional {
    values: Vec<f64>,
    mean: f64,
    centered: Vec<f64>,
    var_pi: f64,
}

impl Functional {
    pub fn new(h: &[f64], pi: &[f64]) -> Result<Self> {
        if h.len() != pi.len() {
            return Err(Error::DimensionMismatch {
                expected: pi.len(),
                got: h.len(),
            });
        }
        let mean: f64 = h.iter().zip(pi).map(|(a, p)| a * p).sum();
        let mut centered: Vec<f64> = h.iter().map(|a| a - mean).collect();
        // second pass removes the residual mean left by round-off
        let drift: f64 = centered.iter().zip(pi).map(|(a, p)| a * p).sum();
        centered.iter_mut().for_each(|c| *c -= drift);
        let var_pi = centered.iter().zip(pi).map(|(c, p)| c * c * p).sum();
        Ok(Self {
            values: h.to_vec(),
            mean: mean + drift,
            centered,
            var_pi,
        })
    }

    pub fn for_kernel(h: &[f64], kernel: &ReversibleKernel) -> Result<Self> {
        Self::new(h, kernel.pi())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `pi(h)`.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn centered(&self) -> &[f64] {
        &self.centered
    }

    /// `Var_pi(h)`.
    pub fn var_pi(&self) -> f64 {
        self.var_pi
    }
}

/// An asymptotic variance, which may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AsymptoticVariance {
    Finite(f64),
    Infinite,
}

impl AsymptoticVariance {
    pub fn is_finite(&self) -> bool {
        matches!(self, AsymptoticVariance::Finite(_))
    }

    /// The value as an `f64`, with `Infinite` mapped to `f64::INFINITY`.
    pub fn value(&self) -> f64 {
        match *self {
            AsymptoticVariance::Finite(v) => v,
            AsymptoticVariance::Infinite => f64::INFINITY,
        }
    }
}

impl std::fmt::Display for AsymptoticVariance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AsymptoticVariance::Finite(v) => write!(f, "{v}"),
            AsymptoticVariance::Infinite => f.write_str("inf"),
        }
    }
}

/// `sum_i w_i (1 + lambda_i) / (1 - lambda_i)`, or `Infinite` when weight sits
/// within 1e-9 of eigenvalue 1.
pub fn asymptotic_variance_exact(d: &SpectralDecomposition, h: &Functional) -> Result<AsymptoticVariance> {
    let w = d.spectral_weights(h)?;
    let mut v = 0.0;
    for (&wi, &lam) in w.iter().zip(d.eigenvalues()) {
        if wi <= WEIGHT_FLOOR {
            continue;
        }
        if lam > 1.0 - UNIT_GAP {
            return Ok(AsymptoticVariance::Infinite);
        }
        v += wi * (1.0 + lam) / (1.0 - lam);
    }
    Ok(AsymptoticVariance::Finite(v))
}

/// Stationary lag-`k` autocovariance `Cov(h(X_0), h(X_k))`.
pub fn autocovariance(d: &SpectralDecomposition, h: &Functional, k: usize) -> Result<f64> {
    let w = d.spectral_weights(h)?;
    Ok(w.iter()
        .zip(d.eigenvalues())
        .map(|(wi, lam)| wi * lam.powi(k as i32))
        .sum())
}

/// `Var(sum_{i=1}^n h(X_i)) / n = gamma_0 + 2 sum_{k=1}^{n-1} (1 - k/n) gamma_k`.
pub fn finite_n_variance(d: &SpectralDecomposition, h: &Functional, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::DomainError("horizon must be at least 1".into()));
    }
    let w = d.spectral_weights(h)?;
    let nf = n as f64;
    let mut total = 0.0;
    for (&wi, &lam) in w.iter().zip(d.eigenvalues()) {
        if wi == 0.0 {
            continue;
        }
        let mut power = 1.0;
        let mut tail = 0.0;
        for k in 1..n {
            power *= lam;
            tail += (1.0 - k as f64 / nf) * power;
        }
        total += wi * (1.0 + 2.0 * tail);
    }
    Ok(total)
}

/// Variance-bounding constant `2 / (1 - lambda)` for `lambda = sup` of the
/// mean-zero spectrum.
pub fn variance_bound_k(lambda: f64) -> Result<f64> {
    // eigenvalues carry ~1e-15 rounding; treat anything this close as 1
    if !(lambda < 1.0 - 1e-12) {
        return Err(Error::LambdaAtOne);
    }
    Ok(2.0 / (1.0 - lambda))
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarianceReport {
    pub var_pi: f64,
    pub v_exact: AsymptoticVariance,
    /// `(n, Var(S_n) / n)` per requested horizon.
    pub finite_n: Vec<(usize, f64)>,
    /// `v_exact / var_pi`; NaN for constant functionals.
    pub ratio: f64,
    /// `gamma_0, gamma_1, ...` up to the requested number of lags.
    pub gamma: Vec<f64>,
    pub k_bound: f64,
}

pub fn variance_report(
    d: &SpectralDecomposition,
    h: &Functional,
    horizons: &[usize],
    lags: usize,
) -> Result<VarianceReport> {
    let v_exact = asymptotic_variance_exact(d, h)?;
    let finite_n = horizons
        .iter()
        .map(|&n| finite_n_variance(d, h, n).map(|v| (n, v)))
        .collect::<Result<Vec<_>>>()?;
    let gamma = (0..lags).map(|k| autocovariance(d, h, k)).collect::<Result<Vec<_>>>()?;
    let ratio = if h.var_pi() > 0.0 {
        v_exact.value() / h.var_pi()
    } else {
        f64::NAN
    };
    Ok(VarianceReport {
        var_pi: h.var_pi(),
        v_exact,
        finite_n,
        ratio,
        gamma,
        k_bound: variance_bound_k(d.lambda_max()).unwrap_or(f64::INFINITY),
    })
}
