//! Finite-state reversible Markov kernels.
//!
//! A [`ReversibleKernel`] is a row-stochastic table `P` together with a
//! stationary law `pi` for which detailed balance `pi_i P_ij = pi_j P_ji`
//! holds. Kernels are immutable once built; every transformation returns a
//! new, revalidated kernel.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Row sums and total stationary mass must hit 1 within this.
pub const STOCHASTIC_TOL: f64 = 1e-12;

/// Default bound on `max |pi_i P_ij - pi_j P_ji|`.
pub const DEFAULT_DB_TOL: f64 = 1e-10;

/// Singular values of `P - I` below this count as invariant directions.
const NULLITY_TOL: f64 = 1e-8;

/// Above this size the stationary law is found by power iteration.
const DIRECT_SOLVE_MAX: usize = 2000;

#[derive(Debug, Clone, PartialEq)]
pub struct ReversibleKernel {
    p: DMatrix<f64>,
    pi: Vec<f64>,
    db_residual: f64,
}

impl ReversibleKernel {
    /// Builds a kernel with the default detailed-balance tolerance.
    ///
    /// When `pi` is `None` it is obtained from [`stationary_solve`].
    pub fn from_matrix(p: DMatrix<f64>, pi: Option<Vec<f64>>) -> Result<Self> {
        Self::from_matrix_with_tol(p, pi, DEFAULT_DB_TOL)
    }

    pub fn from_matrix_with_tol(p: DMatrix<f64>, pi: Option<Vec<f64>>, tol: f64) -> Result<Self> {
        check_stochastic(&p)?;
        let pi = match pi {
            Some(pi) => {
                if pi.len() != p.nrows() {
                    return Err(Error::DimensionMismatch {
                        expected: p.nrows(),
                        got: pi.len(),
                    });
                }
                pi
            }
            None => stationary_solve(&p)?,
        };
        check_pi(&pi)?;
        let db_residual = detailed_balance_residual(&p, &pi);
        if !(db_residual <= tol) {
            return Err(Error::NotReversible {
                residual: db_residual,
                tol,
            });
        }
        Ok(Self { p, pi, db_residual })
    }

    /// Convenience constructor from nested rows.
    pub fn from_rows(rows: &[Vec<f64>], pi: Option<Vec<f64>>) -> Result<Self> {
        Self::from_matrix(table_from_rows(rows)?, pi)
    }

    /// The kernel that never moves, with uniform stationary law.
    pub fn identity(n: usize) -> Result<Self> {
        Self::from_matrix(DMatrix::identity(n, n), Some(vec![1.0 / n as f64; n]))
    }

    pub fn n(&self) -> usize {
        self.p.nrows()
    }

    pub fn table(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    pub fn db_residual(&self) -> f64 {
        self.db_residual
    }

    pub fn prob(&self, from: usize, to: usize) -> f64 {
        self.p[(from, to)]
    }

    /// `a I + (1 - a) P`, same stationary law.
    pub fn lazy_mixture(&self, a: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&a) {
            return Err(Error::BadMixtureWeight(a));
        }
        if a == 0.0 {
            return Ok(self.clone());
        }
        let n = self.n();
        let mixed = DMatrix::from_fn(n, n, |i, j| {
            let stay = if i == j { a } else { 0.0 };
            stay + (1.0 - a) * self.p[(i, j)]
        });
        // pi_i ((1-a) P_ij) is symmetric whenever pi_i P_ij is, so the
        // residual can only shrink.
        Self::from_matrix_with_tol(mixed, Some(self.pi.clone()), self.db_residual.max(DEFAULT_DB_TOL))
    }

    /// One-step base `(I + P) / 2` of the binomial modification: a
    /// Binomial(2n, 1/2) number of `P`-steps has the same law as `n` steps of
    /// this kernel.
    pub fn binomial_base(&self) -> Result<Self> {
        self.lazy_mixture(0.5)
    }

    /// Exact `k`-step transition table by repeated multiplication.
    pub fn power(&self, k: usize) -> DMatrix<f64> {
        let n = self.n();
        let mut out = DMatrix::identity(n, n);
        for _ in 0..k {
            out = &out * &self.p;
        }
        out
    }
}

pub fn table_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    for row in rows {
        if row.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: row.len(),
            });
        }
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

/// Validates squareness, size, nonnegativity and unit row sums.
pub fn check_stochastic(p: &DMatrix<f64>) -> Result<()> {
    if p.nrows() != p.ncols() {
        return Err(Error::DimensionMismatch {
            expected: p.nrows(),
            got: p.ncols(),
        });
    }
    if p.nrows() < 2 {
        return Err(Error::TooFewStates(p.nrows()));
    }
    for i in 0..p.nrows() {
        let mut sum = 0.0;
        for j in 0..p.ncols() {
            let v = p[(i, j)];
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::NegativeEntry {
                    row: i,
                    col: j,
                    value: v,
                });
            }
            sum += v;
        }
        if (sum - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::NonStochastic { row: i, sum });
        }
    }
    Ok(())
}

fn check_pi(pi: &[f64]) -> Result<()> {
    for (index, &value) in pi.iter().enumerate() {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::NonPositivePi { index, value });
        }
    }
    let sum: f64 = pi.iter().sum();
    if (sum - 1.0).abs() > STOCHASTIC_TOL {
        return Err(Error::UnnormalizedPi { sum });
    }
    Ok(())
}

pub fn detailed_balance_residual(p: &DMatrix<f64>, pi: &[f64]) -> f64 {
    let n = p.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((pi[i] * p[(i, j)] - pi[j] * p[(j, i)]).abs());
        }
    }
    worst
}

/// Solves `pi P = pi`, `sum(pi) = 1` for a row-stochastic `P`.
///
/// Fails with [`Error::NonUniqueStationary`] when `P - I` has more than one
/// numerically null direction (singular values below 1e-8).
pub fn stationary_solve(p: &DMatrix<f64>) -> Result<Vec<f64>> {
    check_stochastic(p)?;
    let n = p.nrows();
    if n > DIRECT_SOLVE_MAX {
        let classes = closed_class_count(p);
        if classes > 1 {
            return Err(Error::NonUniqueStationary { multiplicity: classes });
        }
        return Ok(power_stationary(p));
    }

    let shifted = p - DMatrix::<f64>::identity(n, n);
    let nullity = shifted
        .clone()
        .singular_values()
        .iter()
        .filter(|&&s| s < NULLITY_TOL)
        .count();
    if nullity > 1 {
        return Err(Error::NonUniqueStationary { multiplicity: nullity });
    }

    // (P^T - I) pi = 0 with the last equation swapped for the normalization.
    let mut a = shifted.transpose();
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = DVector::zeros(n);
    b[n - 1] = 1.0;
    let lu = a.lu();
    let mut x = lu.solve(&b).ok_or(Error::NonUniqueStationary { multiplicity: 2 })?;
    // one step of iterative refinement
    let r = &b - {
        let mut a = shifted.transpose();
        for j in 0..n {
            a[(n - 1, j)] = 1.0;
        }
        a * &x
    };
    if let Some(dx) = lu.solve(&r) {
        x += dx;
    }
    Ok(normalize_nonnegative(x.iter().copied().collect()))
}

fn normalize_nonnegative(mut pi: Vec<f64>) -> Vec<f64> {
    for v in pi.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let sum: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|v| *v /= sum);
    pi
}

fn power_stationary(p: &DMatrix<f64>) -> Vec<f64> {
    let n = p.nrows();
    // the lazy chain is aperiodic and shares the stationary law
    let lazy = (p + DMatrix::<f64>::identity(n, n)) * 0.5;
    let lazy_t = lazy.transpose();
    let mut pi = DVector::from_element(n, 1.0 / n as f64);
    for _ in 0..100_000 {
        let next = &lazy_t * &pi;
        let change = (&next - &pi).amax();
        pi = next;
        if change < 1e-15 {
            break;
        }
    }
    normalize_nonnegative(pi.iter().copied().collect())
}

/// Number of closed communicating classes of the transition graph (edges
/// where `P_ij > 0`). One closed class means a unique stationary law.
pub fn closed_class_count(p: &DMatrix<f64>) -> usize {
    let n = p.nrows();
    let comp = strongly_connected_components(p);
    let n_comp = comp.iter().copied().max().map_or(0, |m| m + 1);
    let mut open = vec![false; n_comp];
    for i in 0..n {
        for j in 0..n {
            if p[(i, j)] > 0.0 && comp[i] != comp[j] {
                open[comp[i]] = true;
            }
        }
    }
    open.iter().filter(|o| !**o).count()
}

/// Graph-based irreducibility check, independent of the spectral route.
pub fn is_irreducible(p: &DMatrix<f64>) -> bool {
    let comp = strongly_connected_components(p);
    comp.iter().all(|&c| c == 0)
}

// Kosaraju on the dense adjacency; returns a component id per state.
fn strongly_connected_components(p: &DMatrix<f64>) -> Vec<usize> {
    let n = p.nrows();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for start in 0..n {
        if visited[start] {
            continue;
        }
        visited[start] = true;
        let mut stack = vec![(start, 0usize)];
        while let Some((v, next)) = stack.pop() {
            if let Some(w) = (next..n).find(|&w| p[(v, w)] > 0.0 && !visited[w]) {
                stack.push((v, w + 1));
                visited[w] = true;
                stack.push((w, 0));
            } else {
                order.push(v);
            }
        }
    }
    let mut comp = vec![usize::MAX; n];
    let mut id = 0;
    for &start in order.iter().rev() {
        if comp[start] != usize::MAX {
            continue;
        }
        comp[start] = id;
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for w in 0..n {
                if p[(w, v)] > 0.0 && comp[w] == usize::MAX {
                    comp[w] = id;
                    stack.push(w);
                }
            }
        }
        id += 1;
    }
    comp
}

/// Joint law of `(x, y)` on a finite grid, the input of a two-block Gibbs
/// sampler.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    p: DMatrix<f64>,
}

impl JointDistribution {
    pub fn new(p: DMatrix<f64>) -> Result<Self> {
        if p.nrows() == 0 || p.ncols() == 0 {
            return Err(Error::InvalidJoint("empty table".into()));
        }
        if let Some(v) = p.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidJoint(format!("entry {v} is not a probability")));
        }
        let total = p.sum();
        if (total - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::InvalidJoint(format!("total mass {total}")));
        }
        for i in 0..p.nrows() {
            if !(p.row(i).sum() > 0.0) {
                return Err(Error::DegenerateMarginal(i));
            }
        }
        Ok(Self { p })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let nx = rows.len();
        let ny = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ny) {
            return Err(Error::InvalidJoint("ragged rows".into()));
        }
        Self::new(DMatrix::from_fn(nx, ny, |i, j| rows[i][j]))
    }

    pub fn nx(&self) -> usize {
        self.p.nrows()
    }

    pub fn ny(&self) -> usize {
        self.p.ncols()
    }

    pub fn table(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn x_marginal(&self) -> Vec<f64> {
        (0..self.nx()).map(|i| self.p.row(i).sum()).collect()
    }
}

/// Kernel of the x-coordinate of the two-block Gibbs sampler:
/// `P(x, x') = sum_y p(y | x) p(x' | y)`.
pub fn build_data_augmentation(joint: &JointDistribution) -> Result<ReversibleKernel> {
    let p = joint.table();
    let (nx, ny) = (joint.nx(), joint.ny());
    let px = joint.x_marginal();
    if let Some(i) = px.iter().position(|&m| !(m > 0.0)) {
        return Err(Error::DegenerateMarginal(i));
    }
    let py: Vec<f64> = (0..ny).map(|j| p.column(j).sum()).collect();
    let table = DMatrix::from_fn(nx, nx, |x, x2| {
        (0..ny)
            .filter(|&y| py[y] > 0.0)
            .map(|y| (p[(x, y)] / px[x]) * (p[(x2, y)] / py[y]))
            .sum()
    });
    let total: f64 = px.iter().sum();
    let pi = px.iter().map(|m| m / total).collect();
    ReversibleKernel::from_matrix(table, Some(pi))
}

/// State `m` of the window `{-N, ..., N}` lives at index `m + N`.
pub fn example9_states(radius: usize) -> Vec<i64> {
    let r = radius as i64;
    (-r..=r).collect()
}

/// Unnormalized stationary weight of state `m` for the periodic-versus-
/// Metropolis pair: `1` at the origin and `(3/2) 2^{-|m|}` elsewhere.
///
/// The drift-toward-0 walk that leaves the origin with probability 1/2 each
/// way and returns from `±1` with probability 2/3 balances exactly this law;
/// on `Z` it normalizes to `pi(0) = 1/4`, `pi(m) = (3/8) 2^{-|m|}`. Away from
/// the origin the ratios match `2^{-|m|}`.
pub fn example9_weight(m: i64) -> f64 {
    if m == 0 {
        1.0
    } else {
        1.5 * 0.5_f64.powi(m.unsigned_abs() as i32)
    }
}

/// [`example9_weight`] renormalized to the window `{-N, ..., N}`.
pub fn example9_pi(radius: usize) -> Vec<f64> {
    let raw: Vec<f64> = example9_states(radius).into_iter().map(example9_weight).collect();
    let z: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / z).collect()
}

/// Transition probabilities `(down, up)` of the two chains at `m` on `Z`;
/// the rest is holding.
pub fn example9_rates(m: i64) -> ((f64, f64), (f64, f64)) {
    match m.signum() {
        1 => ((2.0 / 3.0, 1.0 / 3.0), (0.5, 0.25)),
        -1 => ((1.0 / 3.0, 2.0 / 3.0), (0.25, 0.5)),
        _ => ((0.5, 0.5), (0.375, 0.375)),
    }
}

/// The two chains of the periodic-versus-Metropolis example, truncated to
/// `{-N, ..., N}`.
///
/// `P1` drifts toward the origin with probability 2/3, leaves the origin
/// with probability 1/2 each way and never holds except where a step would
/// leave the window, so it is periodic on `Z`. `P2` is the Metropolis chain
/// for the same law with proposal `±1` each with probability 1/2. Proposal
/// mass that would leave the window is held at the boundary state.
pub fn build_example9(radius: usize) -> Result<(ReversibleKernel, ReversibleKernel)> {
    if radius < 2 {
        return Err(Error::WindowTooSmall(radius));
    }
    let states = example9_states(radius);
    let n = states.len();
    let mut p1 = DMatrix::zeros(n, n);
    let mut p2 = DMatrix::zeros(n, n);
    for (i, &m) in states.iter().enumerate() {
        let ((down1, up1), (down2, up2)) = example9_rates(m);
        let mut stay1 = 0.0;
        let mut stay2 = 1.0 - down2 - up2;
        if i > 0 {
            p1[(i, i - 1)] = down1;
            p2[(i, i - 1)] = down2;
        } else {
            stay1 += down1;
            stay2 += down2;
        }
        if i + 1 < n {
            p1[(i, i + 1)] = up1;
            p2[(i, i + 1)] = up2;
        } else {
            stay1 += up1;
            stay2 += up2;
        }
        p1[(i, i)] = stay1;
        p2[(i, i)] = stay2;
    }
    let pi = example9_pi(radius);
    let k1 = ReversibleKernel::from_matrix_with_tol(p1, Some(pi.clone()), 1e-12)?;
    let k2 = ReversibleKernel::from_matrix_with_tol(p2, Some(pi), 1e-12)?;
    Ok((k1, k2))
}

#[cfg(test)]
#[allow(clippy::needless_range_loop)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn two_state() -> ReversibleKernel {
        ReversibleKernel::from_rows(&[vec![0.7, 0.3], vec![0.6, 0.4]], None).unwrap()
    }

    #[test]
    fn two_state_pi_is_solved() {
        let k = two_state();
        assert_abs_diff_eq!(k.pi()[0], 2.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(k.pi()[1], 1.0 / 3.0, epsilon = 1e-14);
        assert!(k.db_residual() < 1e-15);
    }

    #[test]
    fn identity_with_uniform_pi() {
        for n in 2..6 {
            let k = ReversibleKernel::identity(n).unwrap();
            assert_eq!(k.db_residual(), 0.0);
        }
    }

    #[test]
    fn not_reversible_is_rejected() {
        let err = ReversibleKernel::from_rows(&[vec![0.5, 0.5], vec![0.9, 0.1]], Some(vec![0.5, 0.5])).unwrap_err();
        match err {
            Error::NotReversible { residual, .. } => assert_abs_diff_eq!(residual, 0.2, epsilon = 1e-15),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn bad_rows_and_pi() {
        assert!(matches!(
            ReversibleKernel::from_rows(&[vec![0.5, 0.6], vec![0.5, 0.5]], None),
            Err(Error::NonStochastic { row: 0, .. })
        ));
        assert!(matches!(
            ReversibleKernel::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]], Some(vec![1.0, 0.0])),
            Err(Error::NonPositivePi { index: 1, .. })
        ));
        assert!(matches!(
            ReversibleKernel::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]], Some(vec![0.6, 0.6])),
            Err(Error::UnnormalizedPi { .. })
        ));
        assert!(matches!(
            ReversibleKernel::from_rows(&[vec![1.0]], None),
            Err(Error::TooFewStates(1))
        ));
    }

    #[test]
    fn stationary_of_doubly_stochastic_is_uniform() {
        let p = table_from_rows(&[vec![0.2, 0.5, 0.3], vec![0.3, 0.2, 0.5], vec![0.5, 0.3, 0.2]]).unwrap();
        let pi = stationary_solve(&p).unwrap();
        for v in pi {
            assert_abs_diff_eq!(v, 1.0 / 3.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn stationary_residual_is_tiny() {
        let p = table_from_rows(&[vec![0.1, 0.6, 0.3], vec![0.4, 0.4, 0.2], vec![0.25, 0.25, 0.5]]).unwrap();
        let pi = stationary_solve(&p).unwrap();
        let row = DMatrix::from_row_slice(1, 3, &pi);
        let moved = &row * &p;
        for j in 0..3 {
            assert!((moved[(0, j)] - pi[j]).abs() <= 1e-12);
        }
    }

    #[test]
    fn block_diagonal_is_not_unique() {
        let p = table_from_rows(&[
            vec![0.5, 0.5, 0.0, 0.0],
            vec![0.5, 0.5, 0.0, 0.0],
            vec![0.0, 0.0, 0.3, 0.7],
            vec![0.0, 0.0, 0.7, 0.3],
        ])
        .unwrap();
        assert!(matches!(
            stationary_solve(&p),
            Err(Error::NonUniqueStationary { multiplicity: 2 })
        ));
        assert_eq!(closed_class_count(&p), 2);
        assert!(!is_irreducible(&p));
    }

    #[test]
    fn graph_checks_on_transient_state() {
        // state 0 leaks into the closed class {1, 2}
        let p = table_from_rows(&[vec![0.5, 0.5, 0.0], vec![0.0, 0.5, 0.5], vec![0.0, 0.5, 0.5]]).unwrap();
        assert_eq!(closed_class_count(&p), 1);
        assert!(!is_irreducible(&p));
        let pi = stationary_solve(&p).unwrap();
        assert_abs_diff_eq!(pi[0], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn lazy_mixture_entries() {
        let k = two_state().lazy_mixture(0.5).unwrap();
        let want = [[0.85, 0.15], [0.3, 0.7]];
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(k.prob(i, j), want[i][j], epsilon = 1e-15);
            }
        }
        assert_eq!(k.pi(), two_state().pi());
        assert_eq!(two_state().lazy_mixture(0.0).unwrap(), two_state());
        assert_eq!(two_state().binomial_base().unwrap(), k);
        assert!(matches!(two_state().lazy_mixture(1.0), Err(Error::BadMixtureWeight(_))));
        assert!(matches!(
            two_state().lazy_mixture(-0.1),
            Err(Error::BadMixtureWeight(_))
        ));
    }

    #[test]
    fn binomial_base_of_identity() {
        let id = ReversibleKernel::identity(4).unwrap();
        assert_eq!(id.binomial_base().unwrap().table(), id.table());
    }

    #[test]
    fn two_step_table() {
        let k = two_state();
        let p2 = k.power(2);
        let want = [[0.67, 0.33], [0.66, 0.34]];
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(p2[(i, j)], want[i][j], epsilon = 1e-15);
            }
        }
        assert_eq!(&k.power(1), k.table());
        let id = ReversibleKernel::identity(3).unwrap();
        assert_eq!(id.power(7), DMatrix::identity(3, 3));
    }

    #[test]
    fn example9_interior_rates() {
        let (p1, p2) = build_example9(10).unwrap();
        let idx = |m: i64| (m + 10) as usize;
        assert_eq!(p1.prob(idx(3), idx(2)), 2.0 / 3.0);
        assert_eq!(p1.prob(idx(3), idx(4)), 1.0 / 3.0);
        assert_eq!(p1.prob(idx(3), idx(3)), 0.0);
        assert_eq!(p2.prob(idx(3), idx(2)), 0.5);
        assert_eq!(p2.prob(idx(3), idx(4)), 0.25);
        assert_eq!(p2.prob(idx(3), idx(3)), 0.25);
        assert_eq!(p1.prob(idx(0), idx(-1)), 0.5);
        assert_eq!(p1.prob(idx(0), idx(1)), 0.5);
        assert_eq!(p2.prob(idx(0), idx(0)), 0.25);
        assert_eq!(p2.prob(idx(0), idx(1)), 0.375);
        assert_eq!(p2.prob(idx(-3), idx(-2)), 0.5);
        // boundary holding
        assert_eq!(p1.prob(idx(10), idx(10)), 1.0 / 3.0);
        assert_eq!(p2.prob(idx(10), idx(10)), 0.5);
        assert!(p1.db_residual() <= 1e-12 && p2.db_residual() <= 1e-12);
    }

    #[test]
    fn example9_detailed_balance_at_one() {
        // on Z: pi(1) P2(1,2) = (3/16)(1/4) = pi(2) P2(2,1) = (3/32)(1/2)
        let lhs = (3.0 / 16.0) * 0.25;
        let rhs = (3.0 / 32.0) * 0.5;
        assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-17);
        // and through the origin for P1: (1/4)(1/2) = (3/16)(2/3)
        assert_abs_diff_eq!(0.25 * 0.5, (3.0 / 16.0) * (2.0 / 3.0), epsilon = 1e-17);
        let (_, p2) = build_example9(5).unwrap();
        let pi = p2.pi();
        let (i1, i2) = (6, 7);
        assert_abs_diff_eq!(pi[i1] * p2.prob(i1, i2), pi[i2] * p2.prob(i2, i1), epsilon = 1e-17);
    }

    #[test]
    fn example9_domination_is_exact() {
        let (p1, p2) = build_example9(25).unwrap();
        for i in 0..p1.n() {
            for j in 0..p1.n() {
                if i != j {
                    assert!(p1.prob(i, j) >= p2.prob(i, j));
                }
            }
        }
        assert!(matches!(build_example9(1), Err(Error::WindowTooSmall(1))));
    }

    #[test]
    fn data_augmentation_two_by_two() {
        let joint = JointDistribution::from_rows(&[vec![0.4, 0.1], vec![0.1, 0.4]]).unwrap();
        let k = build_data_augmentation(&joint).unwrap();
        assert_abs_diff_eq!(k.prob(0, 0), 0.68, epsilon = 1e-15);
        assert_abs_diff_eq!(k.prob(0, 1), 0.32, epsilon = 1e-15);
        assert_abs_diff_eq!(k.prob(1, 1), 0.68, epsilon = 1e-15);
        assert_eq!(k.pi(), &[0.5, 0.5]);
        assert!(k.db_residual() <= 1e-12);
    }

    #[test]
    fn data_augmentation_of_product_mixes_in_one_step() {
        let px = [0.2, 0.5, 0.3];
        let qy = [0.6, 0.4];
        let rows: Vec<Vec<f64>> = px.iter().map(|a| qy.iter().map(|b| a * b).collect()).collect();
        let k = build_data_augmentation(&JointDistribution::from_rows(&rows).unwrap()).unwrap();
        for x in 0..3 {
            for x2 in 0..3 {
                assert_abs_diff_eq!(k.prob(x, x2), px[x2], epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn joint_validation() {
        assert!(matches!(
            JointDistribution::from_rows(&[vec![0.5, 0.5], vec![0.0, 0.0]]),
            Err(Error::DegenerateMarginal(1))
        ));
        assert!(JointDistribution::from_rows(&[vec![0.5, 0.6]]).is_err());
    }
}
