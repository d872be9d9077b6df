//! Random instances for property tests, acceptance runs and benchmarks.

use nalgebra::DMatrix;
use rand::Rng;

use crate::kernel::{JointDistribution, ReversibleKernel};
use crate::mh_finite::ProposalTable;

/// Reversible kernel from a random symmetric weight table: `P_ij = W_ij / r_i`
/// with `pi_i ∝ r_i = sum_j W_ij`.
///
/// Weights are cubed uniforms so spectra spread over most of `[-1, 1]`.
pub fn random_reversible_kernel<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ReversibleKernel {
    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let u: f64 = rng.random::<f64>();
            let x = u * u * u + 1e-3;
            w[(i, j)] = x;
            w[(j, i)] = x;
        }
    }
    let rows: Vec<f64> = (0..n).map(|i| w.row(i).sum()).collect();
    let total: f64 = rows.iter().sum();
    let p = DMatrix::from_fn(n, n, |i, j| w[(i, j)] / rows[i]);
    let pi = rows.iter().map(|r| r / total).collect();
    ReversibleKernel::from_matrix(p, Some(pi)).expect("symmetric weights give a reversible kernel")
}

/// Strictly positive joint table, normalized.
pub fn random_joint<R: Rng + ?Sized>(nx: usize, ny: usize, rng: &mut R) -> JointDistribution {
    let raw = DMatrix::from_fn(nx, ny, |_, _| rng.random::<f64>() + 1e-3);
    let total = raw.sum();
    JointDistribution::new(raw / total).expect("positive table is a valid joint law")
}

/// Positive target weights in `[0.05, 1.05)`.
pub fn random_target<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.random::<f64>() + 0.05).collect()
}

/// Random proposal table whose row sums land uniformly in `[0.5, 1]`.
pub fn random_proposal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ProposalTable {
    let mut q = DMatrix::zeros(n, n);
    for i in 0..n {
        let raw: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let total: f64 = raw.iter().sum();
        let mass = 0.5 + 0.5 * rng.random::<f64>();
        for j in 0..n {
            q[(i, j)] = raw[j] / total * mass;
        }
    }
    ProposalTable::new(q).expect("row sums are at most 1")
}
