//! Sub-Metropolis–Hastings kernels on a finite space with counting measure.
//!
//! A proposal table may leave mass undistributed (row sums below 1); that
//! deficit is held at the current state. Off the diagonal the kernel is
//! `M(x, y) = min(q(x, y), t(y) / t(x) * q(y, x))`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::kernel::ReversibleKernel;

const ROW_SUM_TOL: f64 = 1e-12;
const HOLDING_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ProposalTable {
    q: DMatrix<f64>,
}

impl ProposalTable {
    pub fn new(q: DMatrix<f64>) -> Result<Self> {
        if q.nrows() != q.ncols() {
            return Err(Error::DimensionMismatch {
                expected: q.nrows(),
                got: q.ncols(),
            });
        }
        for i in 0..q.nrows() {
            let mut sum = 0.0;
            for j in 0..q.ncols() {
                let v = q[(i, j)];
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(Error::NegativeEntry {
                        row: i,
                        col: j,
                        value: v,
                    });
                }
                sum += v;
            }
            if sum > 1.0 + ROW_SUM_TOL {
                return Err(Error::RowSumExceedsOne { row: i, sum });
            }
        }
        Ok(Self { q })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(r) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: r.len(),
            });
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn n(&self) -> usize {
        self.q.nrows()
    }

    pub fn table(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.q[(from, to)]
    }
}

/// Entrywise `c q` for `0 < c <= 1`.
pub fn scale_proposal(q: &ProposalTable, c: f64) -> Result<ProposalTable> {
    if !(c > 0.0 && c <= 1.0) {
        return Err(Error::BadScale(c));
    }
    Ok(ProposalTable { q: &q.q * c })
}

/// Builds the sub-Metropolis–Hastings kernel for target weights `t`
/// (normalized internally) and proposal `q`.
pub fn build_sub_mh(t: &[f64], q: &ProposalTable) -> Result<ReversibleKernel> {
    let n = q.n();
    if t.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: t.len(),
        });
    }
    if let Some((index, &value)) = t.iter().enumerate().find(|(_, v)| !(**v > 0.0) || !v.is_finite()) {
        return Err(Error::NonPositiveTarget { index, value });
    }
    let mut m = DMatrix::zeros(n, n);
    for x in 0..n {
        let mut moved = 0.0;
        for y in 0..n {
            if y == x {
                continue;
            }
            let forward = q.get(x, y);
            let backward = t[y] / t[x] * q.get(y, x);
            let v = forward.min(backward);
            m[(x, y)] = v;
            moved += v;
        }
        let hold = 1.0 - moved;
        if hold < -HOLDING_TOL {
            return Err(Error::NegativeHolding { row: x, value: hold });
        }
        m[(x, x)] = hold.max(0.0);
    }
    let total: f64 = t.iter().sum();
    let pi = t.iter().map(|v| v / total).collect();
    ReversibleKernel::from_matrix_with_tol(m, Some(pi), 1e-12)
}

/// Acceptance probability `alpha(x, y) = min(1, t(y) q(y, x) / (t(x) q(x, y)))`.
pub fn acceptance(t: &[f64], q: &ProposalTable, x: usize, y: usize) -> f64 {
    let forward = t[x] * q.get(x, y);
    if forward == 0.0 {
        return 1.0;
    }
    (t[y] * q.get(y, x) / forward).min(1.0)
}
