//! One-dimensional Metropolis–Hastings samplers and grid-based checks of
//! the proposal conditions that make them variance bounding.
//!
//! Three proposal families are supported: a random walk with a fixed
//! increment density, the Langevin (MALA) proposal
//! `N(x + delta/2 * d/dx log t(x), delta^2)`, and the state-dependent proposal
//! `N(x, x^b)` on `(0, inf)`. For the last family, `b = 2` pairs with a log
//! transform and `0 < b < 2` with the power transform `x -> x^a`,
//! `a = 1 - b/2`, both of which turn the chain into a near-random-walk.
//!
//! The MT-good and UMID checks below evaluate their conditions on finite
//! grids. A passing report is evidence on that window, not a proof.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::simulate::Estimate;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

pub fn normal_pdf(x: f64, mean: f64, sd: f64) -> f64 {
    let z = (x - mean) / sd;
    (-0.5 * z * z).exp() / (sd * (2.0 * PI).sqrt())
}

fn normal_ln_pdf(x: f64, mean: f64, sd: f64) -> f64 {
    let z = (x - mean) / sd;
    -0.5 * z * z - sd.ln() - LN_SQRT_2PI
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Support {
    Real,
    Positive,
    Interval(f64, f64),
}

impl Support {
    pub fn contains(&self, x: f64) -> bool {
        match *self {
            Support::Real => x.is_finite(),
            Support::Positive => x > 0.0 && x.is_finite(),
            Support::Interval(lo, hi) => x > lo && x < hi,
        }
    }
}

/// Unnormalized target densities on the real line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Target {
    Normal {
        mean: f64,
        sd: f64,
    },
    /// `t(x) ∝ exp(-|x| / scale)`.
    Laplace {
        scale: f64,
    },
    /// `t(x) ∝ exp(-sqrt(1 + x^2))`: C¹ with exactly exponential tails and
    /// `|d/dx log t| < 1`.
    SmoothLaplace,
    /// `t(x) ∝ 1 / (1 + (x / scale)^2)` on `(0, inf)`.
    HalfCauchy {
        scale: f64,
    },
    /// `t(x) ∝ exp(-rate x)` on `(0, inf)`.
    Exponential {
        rate: f64,
    },
    Uniform {
        lo: f64,
        hi: f64,
    },
}

impl Target {
    pub fn support(&self) -> Support {
        match *self {
            Target::HalfCauchy { .. } | Target::Exponential { .. } => Support::Positive,
            Target::Uniform { lo, hi } => Support::Interval(lo, hi),
            _ => Support::Real,
        }
    }

    /// Log of the unnormalized density; `-inf` off the support.
    pub fn log_density(&self, x: f64) -> f64 {
        if !self.support().contains(x) {
            return f64::NEG_INFINITY;
        }
        match *self {
            Target::Normal { mean, sd } => {
                let z = (x - mean) / sd;
                -0.5 * z * z
            }
            Target::Laplace { scale } => -x.abs() / scale,
            Target::SmoothLaplace => -(1.0 + x * x).sqrt(),
            Target::HalfCauchy { scale } => -(x / scale).powi(2).ln_1p(),
            Target::Exponential { rate } => -rate * x,
            Target::Uniform { .. } => 0.0,
        }
    }

    pub fn grad_log_density(&self, x: f64) -> f64 {
        match *self {
            Target::Normal { mean, sd } => -(x - mean) / (sd * sd),
            Target::Laplace { scale } => -x.signum() / scale,
            Target::SmoothLaplace => -x / (1.0 + x * x).sqrt(),
            Target::HalfCauchy { scale } => {
                let u = x / scale;
                -2.0 * u / (scale * (1.0 + u * u))
            }
            Target::Exponential { rate } => -rate,
            Target::Uniform { .. } => 0.0,
        }
    }

    /// Stationary CDF where it has a closed form.
    pub fn cdf(&self, x: f64) -> Option<f64> {
        match *self {
            Target::HalfCauchy { scale } => Some(if x <= 0.0 { 0.0 } else { 2.0 / PI * (x / scale).atan() }),
            Target::Laplace { scale } => Some(if x < 0.0 {
                0.5 * (x / scale).exp()
            } else {
                1.0 - 0.5 * (-x / scale).exp()
            }),
            Target::Exponential { rate } => Some(if x <= 0.0 { 0.0 } else { -(-rate * x).exp_m1() }),
            Target::Uniform { lo, hi } => Some(((x - lo) / (hi - lo)).clamp(0.0, 1.0)),
            _ => None,
        }
    }
}

/// Unit-scale symmetric increment densities for random-walk proposals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Increment {
    Normal,
    /// Uniform on `[-1, 1]`.
    Uniform,
}

impl Increment {
    pub fn density(&self, u: f64) -> f64 {
        match self {
            Increment::Normal => normal_pdf(u, 0.0, 1.0),
            Increment::Uniform => {
                if u.abs() <= 1.0 {
                    0.5
                } else {
                    0.0
                }
            }
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Increment::Normal => StandardNormal.sample(rng),
            Increment::Uniform => rng.random_range(-1.0..=1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Proposal {
    RandomWalk {
        increment: Increment,
        scale: f64,
    },
    /// Mean `x + step/2 * d/dx log t(x)`, standard deviation `step`.
    Langevin {
        step: f64,
    },
    /// Mean `x`, standard deviation `x^{b/2}`.
    StateDependent {
        b: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Transform {
    None,
    /// `x -> log x`, paired with `b = 2`.
    Log,
    /// `x -> x^a` with `a = 1 - b/2`, paired with `0 < b < 2`.
    Power {
        a: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerSpec {
    target: Target,
    proposal: Proposal,
    transform: Transform,
}

impl SamplerSpec {
    pub fn new(target: Target, proposal: Proposal, transform: Transform) -> Result<Self> {
        match proposal {
            Proposal::RandomWalk { scale, .. } if !(scale > 0.0) => {
                return Err(Error::InvalidSpec(format!("random-walk scale {scale} must be > 0")))
            }
            Proposal::Langevin { step } if !(step > 0.0) => {
                return Err(Error::InvalidSpec(format!("Langevin step {step} must be > 0")))
            }
            Proposal::StateDependent { b } => {
                if !(b > 0.0) {
                    return Err(Error::InvalidSpec(format!("exponent b = {b} must be > 0")));
                }
                if target.support() != Support::Positive {
                    return Err(Error::InvalidSpec(
                        "state-dependent proposal needs a target on (0, inf)".into(),
                    ));
                }
            }
            _ => {}
        }
        match (transform, proposal) {
            (Transform::None, _) => {}
            (Transform::Log, Proposal::StateDependent { b: 2.0 }) => {}
            (Transform::Power { a }, Proposal::StateDependent { b }) if b < 2.0 && a == 1.0 - b / 2.0 => {}
            _ => {
                return Err(Error::InvalidSpec(format!(
                    "transform {transform:?} does not match proposal {proposal:?}"
                )))
            }
        }
        Ok(Self {
            target,
            proposal,
            transform,
        })
    }

    pub fn random_walk(target: Target, increment: Increment, scale: f64) -> Result<Self> {
        Self::new(target, Proposal::RandomWalk { increment, scale }, Transform::None)
    }

    pub fn langevin(target: Target, step: f64) -> Result<Self> {
        Self::new(target, Proposal::Langevin { step }, Transform::None)
    }

    /// `N(x, x^b)` proposal with the transform matching `b`.
    pub fn state_dependent(target: Target, b: f64) -> Result<Self> {
        let transform = if b == 2.0 {
            Transform::Log
        } else if b > 0.0 && b < 2.0 {
            Transform::Power { a: 1.0 - b / 2.0 }
        } else {
            Transform::None
        };
        Self::new(target, Proposal::StateDependent { b }, transform)
    }

    pub fn target(&self) -> &Target {
        &self.target
    }

    pub fn proposal(&self) -> &Proposal {
        &self.proposal
    }

    pub fn transform(&self) -> &Transform {
        &self.transform
    }

    pub fn describe(&self) -> String {
        format!("{:?} / {:?} / {:?}", self.target, self.proposal, self.transform)
    }

    pub fn propose<R: Rng + ?Sized>(&self, x: f64, rng: &mut R) -> f64 {
        match self.proposal {
            Proposal::RandomWalk { increment, scale } => x + scale * increment.sample(rng),
            Proposal::Langevin { step } => {
                let z: f64 = StandardNormal.sample(rng);
                self.langevin_mean(x, step) + step * z
            }
            Proposal::StateDependent { b } => {
                let z: f64 = StandardNormal.sample(rng);
                x + x.powf(0.5 * b) * z
            }
        }
    }

    fn langevin_mean(&self, x: f64, step: f64) -> f64 {
        x + 0.5 * step * self.target.grad_log_density(x)
    }

    /// `log q(x, y)`.
    pub fn log_proposal_density(&self, x: f64, y: f64) -> f64 {
        match self.proposal {
            Proposal::RandomWalk { increment, scale } => (increment.density((y - x) / scale) / scale).ln(),
            Proposal::Langevin { step } => normal_ln_pdf(y, self.langevin_mean(x, step), step),
            Proposal::StateDependent { b } => {
                if x <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                normal_ln_pdf(y, x, x.powf(0.5 * b))
            }
        }
    }

    pub fn proposal_density(&self, x: f64, y: f64) -> f64 {
        self.log_proposal_density(x, y).exp()
    }

    /// `log alpha(x, y)`, `-inf` when `y` is off the support.
    pub fn log_acceptance(&self, x: f64, y: f64) -> f64 {
        let ty = self.target.log_density(y);
        if ty == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        let ratio = ty + self.log_proposal_density(y, x) - self.target.log_density(x) - self.log_proposal_density(x, y);
        if ratio.is_nan() {
            f64::NEG_INFINITY
        } else {
            ratio.min(0.0)
        }
    }

    pub fn check_state(&self, x: f64) -> Result<()> {
        if self.target.support().contains(x) {
            Ok(())
        } else {
            Err(Error::InvalidState(x))
        }
    }
}

/// One Metropolis–Hastings transition: propose, then accept with probability
/// `min(1, t(y) q(y, x) / (t(x) q(x, y)))`. Consumes exactly one proposal draw
/// and one uniform.
pub fn mh_step<R: Rng + ?Sized>(spec: &SamplerSpec, x: f64, rng: &mut R) -> Result<(f64, bool)> {
    spec.check_state(x)?;
    let y = spec.propose(x, rng);
    let u: f64 = rng.random();
    let log_alpha = spec.log_acceptance(x, y);
    if u.ln() < log_alpha {
        Ok((y, true))
    } else {
        Ok((x, false))
    }
}

/// Maps a trace through the sampler's transform (`log x` or `x^a`).
pub fn apply_transform(spec: &SamplerSpec, states: &[f64]) -> Result<Vec<f64>> {
    match spec.transform {
        Transform::None => Ok(states.to_vec()),
        Transform::Log => states
            .iter()
            .map(|&x| {
                if x > 0.0 {
                    Ok(x.ln())
                } else {
                    Err(Error::NonPositiveState(x))
                }
            })
            .collect(),
        Transform::Power { a } => states
            .iter()
            .map(|&x| {
                if x > 0.0 {
                    Ok(x.powf(a))
                } else {
                    Err(Error::NonPositiveState(x))
                }
            })
            .collect(),
    }
}

/// Density at `w` of the proposal increment `(x + x^{1-a} Z)^a - x^a` of
/// the power-transformed chain, `Z ~ N(0, 1)`.
///
/// With `z(w) = x^a ((1 + w x^{-a})^{1/a} - 1)` this is
/// `phi(z) / (a (1 + x^{-a} z)^{a-1})`, and zero where `1 + w x^{-a} <= 0`.
/// As `x -> inf` it tends to the `N(0, a^2)` density.
pub fn transformed_increment_density(x: f64, w: f64, a: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::DomainError(format!("base state {x} must be positive")));
    }
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::DomainError(format!("exponent {a} must lie in (0, 1)")));
    }
    let xa = x.powf(a);
    let rel = w / xa;
    if !(rel > -1.0) {
        return Ok(0.0);
    }
    // (1 + rel)^{1/a} - 1 without cancellation
    let log_base = rel.ln_1p();
    let z = xa * (log_base / a).exp_m1();
    // (1 + x^{-a} z)^{a-1} = (1 + rel)^{(a-1)/a}
    let jacobian = a * ((a - 1.0) / a * log_base).exp();
    Ok(normal_pdf(z, 0.0, 1.0) / jacobian)
}

/// Monte Carlo estimate of the holding probability `P(x, {x})`, averaging
/// `1 - alpha(x, Y)` over proposals `Y ~ q(x, .)`.
pub fn rejection_probability<R: Rng + ?Sized>(
    spec: &SamplerSpec,
    x: f64,
    n_samples: usize,
    rng: &mut R,
) -> Result<Estimate> {
    const MIN_SAMPLES: usize = 1000;
    if n_samples < MIN_SAMPLES {
        return Err(Error::TooFewSamples {
            min: MIN_SAMPLES,
            got: n_samples,
        });
    }
    spec.check_state(x)?;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..n_samples {
        let y = spec.propose(x, rng);
        let reject = 1.0 - spec.log_acceptance(x, y).exp();
        sum += reject;
        sum_sq += reject * reject;
    }
    let n = n_samples as f64;
    let mean = sum / n;
    let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
    Ok(Estimate {
        value: mean,
        se: (var / n).sqrt(),
    })
}

/// Evenly spaced points `lo, lo + step, ..., hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Grid {
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && step > 0.0 && hi > lo) {
            return Err(Error::BadGrid(format!("{lo}:{hi}:{step}")));
        }
        Ok(Self { lo, hi, step })
    }

    pub fn symmetric(half_width: f64, step: f64) -> Result<Self> {
        Self::new(-half_width, half_width, step)
    }

    /// Parses `lo:hi:step`.
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::BadGrid(format!("expected lo:hi:step, got {s:?}")));
        }
        let num = |p: &str| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::BadGrid(format!("bad number {p:?} in {s:?}")))
        };
        Self::new(num(parts[0])?, num(parts[1])?, num(parts[2])?)
    }

    pub fn len(&self) -> usize {
        ((self.hi - self.lo) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |i| self.lo + i as f64 * self.step)
    }
}

impl std::fmt::Display for Grid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}:{}", self.lo, self.hi, self.step)
    }
}

/// Outcome of a grid check, with the numbers that decided it.
#[derive(Debug, Clone, PartialEq)]
pub struct GridReport {
    pub check: &'static str,
    pub grid: String,
    pub verdict: bool,
    pub witnesses: Vec<(&'static str, f64)>,
}

impl GridReport {
    pub fn witness(&self, name: &str) -> Option<f64> {
        self.witnesses.iter().find(|(k, _)| *k == name).map(|&(_, v)| v)
    }
}

/// Least-squares slope of `ys` against `xs`.
fn ls_slope(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Grid check that `s` is symmetric, positive, integrates to 1 and has an
/// exponentially bounded tail.
///
/// The tail test fits `log s(u) ≈ log A - rate |u|` by least squares on the
/// inner (`L/2..3L/4`) and outer (`3L/4..L`) quarter of the grid. It passes
/// when both rates are positive and the outer rate has not fallen below 90%
/// of the inner one; polynomial tails fail because their log-slope decays
/// like `1/|u|`.
pub fn check_mt_good(s: &dyn Fn(f64) -> f64, grid: &Grid) -> Result<GridReport> {
    let half = grid.hi;
    if (grid.lo + grid.hi).abs() > 1e-12 * half.max(1.0) {
        return Err(Error::BadGrid("MT-good grid must be symmetric about 0".into()));
    }
    if grid.step > 0.01 + 1e-15 {
        return Err(Error::BadGrid(format!("step {} exceeds 0.01", grid.step)));
    }
    let pts: Vec<f64> = grid.points().collect();
    let vals: Vec<f64> = pts.iter().map(|&u| s(u)).collect();

    let symmetry_error = pts
        .iter()
        .zip(&vals)
        .map(|(&u, &v)| (v - s(-u)).abs())
        .fold(0.0, f64::max);
    let min_density = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let integral = vals.windows(2).map(|w| 0.5 * (w[0] + w[1]) * grid.step).sum::<f64>();

    let tail = |from: f64, to: f64| -> Option<(f64, f64)> {
        let (xs, ys): (Vec<f64>, Vec<f64>) = pts
            .iter()
            .zip(&vals)
            .filter(|(u, v)| u.abs() >= from && u.abs() <= to && **v > 0.0)
            .map(|(u, v)| (u.abs(), v.ln()))
            .unzip();
        (xs.len() >= 2).then(|| ls_slope(&xs, &ys))
    };
    let (rate_inner, rate_outer, rate, envelope) = match (
        tail(0.5 * half, 0.75 * half),
        tail(0.75 * half, half),
        tail(0.5 * half, half),
    ) {
        (Some((si, _)), Some((so, _)), Some((sa, _))) => {
            let rate = -sa;
            // smallest A with s(u) <= A exp(-rate |u|) on the tail grid
            let a = pts
                .iter()
                .zip(&vals)
                .filter(|(u, _)| u.abs() >= 0.5 * half)
                .map(|(u, v)| v * (rate * u.abs()).exp())
                .fold(0.0, f64::max);
            (-si, -so, rate, a)
        }
        _ => (f64::NAN, f64::NAN, f64::NAN, f64::NAN),
    };

    let symmetric = symmetry_error <= 1e-9;
    let positive = min_density > 0.0;
    let normalized = (integral - 1.0).abs() <= 1e-3;
    let exp_tail = rate_inner > 0.0 && rate_outer > 0.0 && rate_outer >= 0.9 * rate_inner;
    Ok(GridReport {
        check: "mt_good",
        grid: grid.to_string(),
        verdict: symmetric && positive && normalized && exp_tail,
        witnesses: vec![
            ("symmetry_error", symmetry_error),
            ("min_density", min_density),
            ("integral", integral),
            ("tail_rate_inner", rate_inner),
            ("tail_rate_outer", rate_outer),
            ("envelope_rate", rate),
            ("envelope_scale", envelope),
        ],
    })
}

/// Grid evidence for `q(x, x + w) >= c s(w)`: reports
/// `c* = min q(x, x + w) / s(w)` over the `(x, w)` grid and passes when
/// `c* > 1e-6`. `s` must first pass [`check_mt_good`] on `s_grid`.
pub fn check_umid(
    q: &dyn Fn(f64, f64) -> f64,
    s: &dyn Fn(f64) -> f64,
    s_grid: &Grid,
    x_grid: &Grid,
    w_grid: &Grid,
) -> Result<(GridReport, GridReport)> {
    let mt = check_mt_good(s, s_grid)?;
    if !mt.verdict {
        return Err(Error::InvalidSpec(
            "increment density is not MT-good on its grid".into(),
        ));
    }
    let mut c_star = f64::INFINITY;
    let mut worst = (f64::NAN, f64::NAN);
    for x in x_grid.points() {
        for w in w_grid.points() {
            let sw = s(w);
            if sw <= 0.0 {
                continue;
            }
            let ratio = q(x, x + w) / sw;
            if ratio < c_star {
                c_star = ratio;
                worst = (x, w);
            }
        }
    }
    let report = GridReport {
        check: "umid",
        grid: format!("x={x_grid};w={w_grid}"),
        verdict: c_star > 1e-6,
        witnesses: vec![("c_star", c_star), ("worst_x", worst.0), ("worst_w", worst.1)],
    };
    Ok((mt, report))
}

/// Composite Simpson rule with `intervals` (rounded up to even) panels.
pub fn simpson(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, intervals: usize) -> f64 {
    let m = intervals + intervals % 2;
    let h = (hi - lo) / m as f64;
    let mut sum = f(lo) + f(hi);
    for i in 1..m {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(lo + i as f64 * h);
    }
    sum * h / 3.0
}

/// Density of `log(1 + Z)`, `Z ~ N(0, 1)`, restricted to `1 + Z > 0`
/// (total mass `P(Z > -1)`).
pub fn log_increment_density(u: f64) -> f64 {
    let e = u.exp();
    normal_pdf(e - 1.0, 0.0, 1.0) * e
}

/// `min(f(u), f(-u))` for the log-increment density `f`, normalized to
/// integrate to 1. Returns the density and the normalizing constant `c`.
pub fn symmetrized_log_increment() -> (impl Fn(f64) -> f64, f64) {
    let raw = |u: f64| log_increment_density(u).min(log_increment_density(-u));
    let c = simpson(&raw, -60.0, 60.0, 240_000);
    (move |u: f64| raw(u) / c, c)
}
