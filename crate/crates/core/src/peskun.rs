//! Off-diagonal (Peskun) ordering of kernels sharing a stationary law.

use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{Error, Result};
use crate::kernel::ReversibleKernel;
use crate::spectral::eigendecompose;
use crate::variance::{asymptotic_variance_exact, AsymptoticVariance, Functional};

/// Stationary laws must agree entrywise within this.
pub const PI_MATCH_TOL: f64 = 1e-10;
/// Off-diagonal shortfall still counted as domination.
pub const DOMINATION_TOL: f64 = 1e-12;
/// Slack allowed on the monotonicity of `Lambda` and of variances.
pub const MONOTONE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct PeskunReport {
    pub dominates: bool,
    /// Largest positive `P2_ij - P1_ij` over `i != j`, else 0.
    pub worst_violation: f64,
    /// `(Lambda(P1), Lambda(P2))`, filled by [`ordering_report`].
    pub lambda_pair: Option<(f64, f64)>,
    /// `(functional id, Var(h, P1), Var(h, P2))`.
    pub variance_pairs: Vec<(usize, AsymptoticVariance, AsymptoticVariance)>,
}

/// Checks `P1(x, {y}) >= P2(x, {y})` for every `x != y`.
pub fn dominates_off_diagonal(k1: &ReversibleKernel, k2: &ReversibleKernel) -> Result<PeskunReport> {
    check_comparable(k1, k2)?;
    let n = k1.n();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                worst = worst.max(k2.prob(i, j) - k1.prob(i, j));
            }
        }
    }
    Ok(PeskunReport {
        dominates: worst <= DOMINATION_TOL,
        worst_violation: worst,
        lambda_pair: None,
        variance_pairs: Vec::new(),
    })
}

fn check_comparable(k1: &ReversibleKernel, k2: &ReversibleKernel) -> Result<()> {
    if k1.n() != k2.n() {
        return Err(Error::DimensionMismatch {
            expected: k1.n(),
            got: k2.n(),
        });
    }
    let gap = k1
        .pi()
        .iter()
        .zip(k2.pi())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if gap > PI_MATCH_TOL {
        return Err(Error::MismatchedStationary(gap));
    }
    Ok(())
}

/// Domination check plus `Lambda` and per-functional asymptotic variances.
///
/// When `P1` dominates `P2`, fails with [`Error::OrderingViolated`] if
/// `Lambda(P1) > Lambda(P2)` or some `Var(h, P1) > Var(h, P2)` beyond 1e-9.
pub fn ordering_report(k1: &ReversibleKernel, k2: &ReversibleKernel, hs: &[Vec<f64>]) -> Result<PeskunReport> {
    let mut report = dominates_off_diagonal(k1, k2)?;
    let d1 = eigendecompose(k1)?;
    let d2 = eigendecompose(k2)?;
    let (l1, l2) = (d1.lambda_max(), d2.lambda_max());
    report.lambda_pair = Some((l1, l2));
    for (id, h) in hs.iter().enumerate() {
        let f = Functional::for_kernel(h, k1)?;
        let v1 = asymptotic_variance_exact(&d1, &f)?;
        let v2 = asymptotic_variance_exact(&d2, &f)?;
        report.variance_pairs.push((id, v1, v2));
    }
    if report.dominates {
        if l1 > l2 + MONOTONE_TOL {
            return Err(Error::OrderingViolated(format!(
                "Lambda(P1) = {l1} > Lambda(P2) = {l2}"
            )));
        }
        for &(id, v1, v2) in &report.variance_pairs {
            let ok = match (v1, v2) {
                (_, AsymptoticVariance::Infinite) => true,
                (AsymptoticVariance::Infinite, _) => false,
                (AsymptoticVariance::Finite(a), AsymptoticVariance::Finite(b)) => a <= b + MONOTONE_TOL,
            };
            if !ok {
                return Err(Error::OrderingViolated(format!(
                    "functional {id}: Var(h, P1) = {v1} > Var(h, P2) = {v2}"
                )));
            }
        }
    }
    Ok(report)
}

/// `count` functionals with i.i.d. standard-normal entries, centered.
pub fn random_functionals(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let raw: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            let mean = raw.iter().sum::<f64>() / n as f64;
            raw.into_iter().map(|v| v - mean).collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::build_example9;
    use crate::random::random_reversible_kernel;

    #[test]
    fn example9_pair_dominates() {
        let (p1, p2) = build_example9(25).unwrap();
        let r = dominates_off_diagonal(&p1, &p2).unwrap();
        assert!(r.dominates);
        assert_eq!(r.worst_violation, 0.0);
        assert!(!dominates_off_diagonal(&p2, &p1).unwrap().dominates);
    }

    #[test]
    fn kernel_dominates_its_lazy_version() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(7);
        let k = random_reversible_kernel(6, &mut rng);
        let lazy = k.lazy_mixture(0.5).unwrap();
        assert!(dominates_off_diagonal(&k, &lazy).unwrap().dominates);
        let r = ordering_report(&k, &lazy, &random_functionals(6, 10, 1)).unwrap();
        let (l1, l2) = r.lambda_pair.unwrap();
        assert!((l2 - (0.5 + 0.5 * l1)).abs() <= 1e-9);
    }

    #[test]
    fn self_comparison_gives_equal_variances() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(3);
        let k = random_reversible_kernel(5, &mut rng);
        let r = ordering_report(&k, &k, &random_functionals(5, 8, 2)).unwrap();
        assert!(r.dominates);
        for (_, v1, v2) in r.variance_pairs {
            assert!((v1.value() - v2.value()).abs() <= 1e-10);
        }
    }

    #[test]
    fn mismatched_laws_are_rejected() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(11);
        let a = random_reversible_kernel(4, &mut rng);
        let b = random_reversible_kernel(4, &mut rng);
        assert!(matches!(
            dominates_off_diagonal(&a, &b),
            Err(Error::MismatchedStationary(_))
        ));
        let c = random_reversible_kernel(5, &mut rng);
        assert!(matches!(
            dominates_off_diagonal(&a, &c),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn random_functionals_are_seeded_and_centered() {
        let a = random_functionals(7, 3, 99);
        assert_eq!(a, random_functionals(7, 3, 99));
        for h in &a {
            assert!(h.iter().sum::<f64>().abs() < 1e-12);
        }
    }
}
