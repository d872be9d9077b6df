//! Cyclic Jacobi eigensolver for dense real symmetric matrices.

use nalgebra::DMatrix;

/// Output of [`jacobi_eigen`]; eigenvalues are unsorted, eigenvectors are
/// the columns of `vectors` in matching order.
#[derive(Debug, Clone)]
pub struct JacobiOutput {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
    pub sweeps: usize,
    pub off_norm: f64,
    pub converged: bool,
}

pub fn off_diagonal_norm(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += a[(i, j)] * a[(i, j)];
            }
        }
    }
    sum.sqrt()
}

/// Diagonalizes symmetric `a` by cyclic-by-row plane rotations.
///
/// Stops when the off-diagonal Frobenius norm drops to `tol` or after
/// `max_sweeps` full sweeps.
pub fn jacobi_eigen(a: &DMatrix<f64>, tol: f64, max_sweeps: usize) -> JacobiOutput {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "jacobi_eigen needs a square matrix");
    let mut a = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    let mut sweeps = 0;
    let mut off = off_diagonal_norm(&a);
    while off > tol && sweeps < max_sweeps {
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let (c, s) = rotation(a[(p, p)], a[(q, q)], apq);
                rotate(&mut a, &mut v, p, q, c, s);
            }
        }
        sweeps += 1;
        off = off_diagonal_norm(&a);
    }
    JacobiOutput {
        values: (0..n).map(|i| a[(i, i)]).collect(),
        vectors: v,
        sweeps,
        off_norm: off,
        converged: off <= tol,
    }
}

// (c, s) annihilating a_pq in the symmetric 2x2 block [[app, apq], [apq, aqq]].
fn rotation(app: f64, aqq: f64, apq: f64) -> (f64, f64) {
    let theta = (aqq - app) / (2.0 * apq);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    (c, t * c)
}

fn rotate(a: &mut DMatrix<f64>, v: &mut DMatrix<f64>, p: usize, q: usize, c: f64, s: f64) {
    let n = a.nrows();
    // A <- A J
    for k in 0..n {
        let (akp, akq) = (a[(k, p)], a[(k, q)]);
        a[(k, p)] = c * akp - s * akq;
        a[(k, q)] = s * akp + c * akq;
    }
    // A <- J^T A
    for k in 0..n {
        let (apk, aqk) = (a[(p, k)], a[(q, k)]);
        a[(p, k)] = c * apk - s * aqk;
        a[(q, k)] = s * apk + c * aqk;
    }
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
    for k in 0..n {
        let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted(mut v: Vec<f64>) -> Vec<f64> {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    #[test]
    fn classic_two_by_two() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let out = jacobi_eigen(&a, 1e-12, 100);
        assert!(out.converged);
        let vals = sorted(out.values);
        assert!((vals[0] - 1.0).abs() < 1e-14);
        assert!((vals[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn diagonal_input_needs_no_sweeps() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, -1.0, 0.5]));
        let out = jacobi_eigen(&a, 1e-12, 100);
        assert_eq!(out.sweeps, 0);
        assert_eq!(out.values, vec![3.0, -1.0, 0.5]);
    }

    #[test]
    fn agrees_with_nalgebra_symmetric_eigen() {
        // deterministic pseudo-random symmetric matrix
        let n = 12;
        let mut seed = 0x9e3779b97f4a7c15_u64;
        let mut next = || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            (seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let x = next();
                a[(i, j)] = x;
                a[(j, i)] = x;
            }
        }
        let ours = jacobi_eigen(&a, 1e-13, 100);
        assert!(ours.converged);
        let theirs = a.clone().symmetric_eigen();
        let x = sorted(ours.values.clone());
        let y = sorted(theirs.eigenvalues.iter().copied().collect());
        for (p, q) in x.iter().zip(&y) {
            assert!((p - q).abs() < 1e-12);
        }
        // A V = V diag(values)
        let av = &a * &ours.vectors;
        for j in 0..n {
            for i in 0..n {
                assert!((av[(i, j)] - ours.values[j] * ours.vectors[(i, j)]).abs() < 1e-12);
            }
        }
    }
}
