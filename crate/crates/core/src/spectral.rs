//! Spectrum of a reversible kernel on the mean-zero subspace and the
//! classification derived from it.
//!
//! Detailed balance makes `S = D^{1/2} P D^{-1/2}` (with `D = diag(pi)`)
//! symmetric, and `sqrt(pi)` is its eigenvector for eigenvalue 1. That
//! direction is removed with a Householder reflection before Jacobi runs, so
//! the remaining `n - 1` eigenpairs are exactly the mean-zero spectrum.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::jacobi::jacobi_eigen;
use crate::kernel::ReversibleKernel;
use crate::variance::Functional;

const JACOBI_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;
const RESIDUAL_TOL: f64 = 1e-9;
const RANGE_SLACK: f64 = 1e-9;
/// Deflated eigenvalues above `1 - REDUCIBLE_GAP` indicate a second invariant law.
const REDUCIBLE_GAP: f64 = 1e-8;

/// Values within a few ulps of +-1 are reported as exactly +-1.
fn snap_unit(v: f64) -> f64 {
    let v = v.clamp(-1.0, 1.0);
    if 1.0 - v.abs() <= 8.0 * f64::EPSILON {
        v.signum()
    } else {
        v
    }
}

/// `S_ij = sqrt(pi_i / pi_j) P_ij`.
pub fn symmetrize(kernel: &ReversibleKernel) -> Result<DMatrix<f64>> {
    let pi = kernel.pi();
    if let Some(i) = pi.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::ZeroPiEntry(i));
    }
    let n = kernel.n();
    let root: Vec<f64> = pi.iter().map(|v| v.sqrt()).collect();
    let mut s = DMatrix::from_fn(n, n, |i, j| root[i] / root[j] * kernel.prob(i, j));
    // average away the O(ulp) asymmetry left by detailed-balance round-off
    for i in 0..n {
        for j in (i + 1)..n {
            let m = 0.5 * (s[(i, j)] + s[(j, i)]);
            s[(i, j)] = m;
            s[(j, i)] = m;
        }
    }
    Ok(s)
}

/// Eigenpairs of a reversible kernel restricted to mean-zero functions.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    /// Columns are right eigenvectors of `P`, orthonormal under `<.,.>_pi`.
    eigenvectors: DMatrix<f64>,
    /// Columns are the matching Euclidean-orthonormal eigenvectors of `S`.
    sym_vectors: DMatrix<f64>,
    pi: Vec<f64>,
    residual: f64,
    sweeps: usize,
}

impl SpectralDecomposition {
    /// Mean-zero eigenvalues sorted in descending order.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn eigenvector(&self, i: usize) -> Vec<f64> {
        self.eigenvectors.column(i).iter().copied().collect()
    }

    pub fn sym_vectors(&self) -> &DMatrix<f64> {
        &self.sym_vectors
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    pub fn n(&self) -> usize {
        self.pi.len()
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    /// `sup` of the mean-zero spectrum.
    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// `inf` of the mean-zero spectrum.
    pub fn lambda_min(&self) -> f64 {
        *self.eigenvalues.last().expect("at least one eigenpair")
    }

    /// `sqrt(pi) sqrt(pi)^T + sum_i lambda_i z_i z_i^T`, which should equal
    /// the symmetrized kernel.
    pub fn reconstruct_symmetric(&self) -> DMatrix<f64> {
        let root = DVector::from_iterator(self.n(), self.pi.iter().map(|v| v.sqrt()));
        let mut s = &root * root.transpose();
        for (i, &lam) in self.eigenvalues.iter().enumerate() {
            let z = self.sym_vectors.column(i);
            s += lam * (z * z.transpose());
        }
        s
    }

    /// Squared coefficients `w_i = <h - pi(h), v_i>_pi^2`, summing to `Var_pi(h)`.
    pub fn spectral_weights(&self, h: &Functional) -> Result<Vec<f64>> {
        if h.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: h.len(),
            });
        }
        let scaled: DVector<f64> =
            DVector::from_iterator(self.n(), h.centered().iter().zip(&self.pi).map(|(c, p)| c * p.sqrt()));
        Ok((0..self.eigenvalues.len())
            .map(|i| {
                let c = self.sym_vectors.column(i).dot(&scaled);
                c * c
            })
            .collect())
    }
}

/// Mean-zero spectral decomposition of a reversible kernel.
pub fn eigendecompose(kernel: &ReversibleKernel) -> Result<SpectralDecomposition> {
    let s = symmetrize(kernel)?;
    let n = kernel.n();
    let root: Vec<f64> = kernel.pi().iter().map(|v| v.sqrt()).collect();

    // Householder reflection H with H sqrt(pi) = -e_0.
    let mut w = DVector::from_vec(root.clone());
    w[0] += 1.0;
    let w_norm2 = w.norm_squared();
    let h = DMatrix::<f64>::identity(n, n) - (&w * w.transpose()) * (2.0 / w_norm2);

    let reflected = &h * &s * &h;
    let block = reflected.view((1, 1), (n - 1, n - 1)).into_owned();
    let block = (&block + block.transpose()) * 0.5;
    let jac = jacobi_eigen(&block, JACOBI_TOL, MAX_SWEEPS);

    let m = n - 1;
    let mut padded = DMatrix::zeros(n, m);
    padded.view_mut((1, 0), (m, m)).copy_from(&jac.vectors);
    let z = &h * padded;

    // Measured on the deflated block: coupling to sqrt(pi) is the kernel's own
    // stationarity defect, already bounded by its detailed-balance tolerance.
    let mut residual = 0.0_f64;
    for i in 0..m {
        let col = jac.vectors.column(i);
        let r = &block * col - col * jac.values[i];
        residual = residual.max(r.amax());
    }
    if residual > RESIDUAL_TOL {
        return Err(Error::NoConvergence {
            residual,
            sweeps: jac.sweeps,
        });
    }
    if let Some(&bad) = jac.values.iter().find(|v| !(v.abs() <= 1.0 + RANGE_SLACK)) {
        return Err(Error::DomainError(format!(
            "eigenvalue {bad} outside [-1, 1] beyond round-off"
        )));
    }

    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| jac.values[b].total_cmp(&jac.values[a]));
    let eigenvalues = order.iter().map(|&i| snap_unit(jac.values[i])).collect();
    let sym_vectors = DMatrix::from_fn(n, m, |r, c| z[(r, order[c])]);
    let eigenvectors = DMatrix::from_fn(n, m, |r, c| sym_vectors[(r, c)] / root[r]);

    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
        sym_vectors,
        pi: kernel.pi().to_vec(),
        residual,
        sweeps: jac.sweeps,
    })
}

/// Numerical thresholds behind the boolean classification flags.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    /// Required gap below 1 for variance bounding / geometric ergodicity.
    pub vb_threshold: f64,
    /// Slack below zero still counted as a positive operator.
    pub pos_tol: f64,
    /// `lambda_min < -1 + period_tol` flags near-periodicity.
    pub period_tol: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            vb_threshold: 1e-9,
            pos_tol: 1e-10,
            period_tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    /// `sup` of the mean-zero spectrum.
    pub lambda: f64,
    pub lambda_min: f64,
    /// `2 / (1 - lambda)`; infinite when `lambda` is 1 to solver accuracy.
    pub k_bound: f64,
    pub variance_bounding: bool,
    pub geometrically_ergodic: bool,
    pub positive: bool,
    pub near_periodic: bool,
    pub reducible: bool,
    pub thresholds: Thresholds,
}

pub fn classify(d: &SpectralDecomposition, t: Thresholds) -> Classification {
    let lambda = d.lambda_max();
    let lambda_min = d.lambda_min();
    let k_bound = crate::variance::variance_bound_k(lambda).unwrap_or(f64::INFINITY);
    Classification {
        lambda,
        lambda_min,
        k_bound,
        variance_bounding: lambda <= 1.0 - t.vb_threshold,
        geometrically_ergodic: lambda.abs().max(lambda_min.abs()) <= 1.0 - t.vb_threshold,
        positive: lambda_min >= -t.pos_tol,
        near_periodic: lambda_min < -1.0 + t.period_tol,
        reducible: lambda > 1.0 - REDUCIBLE_GAP,
        thresholds: t,
    }
}
