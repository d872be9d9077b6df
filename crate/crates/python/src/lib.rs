//! Python bindings for `vbchain`.
//!
//! Kernels are exposed as the `Kernel` class; everything else is a plain
//! function returning floats, lists or dicts. Library errors surface as
//! `VbchainError` (a `ValueError`).

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use vbchain::io::{format_kernel, parse_kernel};
use vbchain::kernel::{build_example9, DEFAULT_DB_TOL};
use vbchain::mh_continuous::{self, SamplerSpec, Target};
use vbchain::mh_finite::{build_sub_mh, ProposalTable};
use vbchain::peskun::{ordering_report, random_functionals};
use vbchain::simulate::{self, simulate_path, stream, KernelSampler};
use vbchain::spectral::Thresholds;
use vbchain::variance::variance_report;
use vbchain::{classify, eigendecompose, Functional, ReversibleKernel};

create_exception!(vbchain_py, VbchainError, PyValueError);

fn err(e: vbchain::Error) -> PyErr {
    VbchainError::new_err(e.to_string())
}

/// A finite reversible transition kernel with its stationary law.
#[pyclass(name = "Kernel", module = "vbchain_py", frozen)]
struct Kernel {
    inner: ReversibleKernel,
}

#[pymethods]
impl Kernel {
    /// `rows` is the transition matrix; `pi` is solved for when omitted.
    #[new]
    #[pyo3(signature = (rows, pi=None, tol=DEFAULT_DB_TOL))]
    fn new(rows: Vec<Vec<f64>>, pi: Option<Vec<f64>>, tol: f64) -> PyResult<Self> {
        let table = vbchain::kernel::table_from_rows(&rows).map_err(err)?;
        let inner = ReversibleKernel::from_matrix_with_tol(table, pi, tol).map_err(err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (text, tol=DEFAULT_DB_TOL))]
    fn from_vbk(text: &str, tol: f64) -> PyResult<Self> {
        parse_kernel(text, tol).map(|inner| Self { inner }).map_err(err)
    }

    fn to_vbk(&self) -> String {
        format_kernel(&self.inner)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn pi(&self) -> Vec<f64> {
        self.inner.pi().to_vec()
    }

    #[getter]
    fn db_residual(&self) -> f64 {
        self.inner.db_residual()
    }

    fn rows(&self) -> Vec<Vec<f64>> {
        let t = self.inner.table();
        (0..t.nrows()).map(|i| t.row(i).iter().copied().collect()).collect()
    }

    /// `a I + (1 - a) P`.
    fn lazy(&self, a: f64) -> PyResult<Self> {
        self.inner.lazy_mixture(a).map(|inner| Self { inner }).map_err(err)
    }

    /// Mean-zero spectrum, largest first.
    fn eigenvalues(&self) -> PyResult<Vec<f64>> {
        Ok(eigendecompose(&self.inner).map_err(err)?.eigenvalues().to_vec())
    }

    fn analyze<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let c = classify(&eigendecompose(&self.inner).map_err(err)?, Thresholds::default());
        let d = PyDict::new(py);
        d.set_item("n", self.inner.n())?;
        d.set_item("Lambda", c.lambda)?;
        d.set_item("lambda_min", c.lambda_min)?;
        d.set_item("K_bound", c.k_bound)?;
        d.set_item("variance_bounding", c.variance_bounding)?;
        d.set_item("geometrically_ergodic", c.geometrically_ergodic)?;
        d.set_item("positive", c.positive)?;
        d.set_item("near_periodic", c.near_periodic)?;
        d.set_item("reducible", c.reducible)?;
        Ok(d)
    }

    /// Exact asymptotic and finite-horizon variances of `h`.
    #[pyo3(signature = (h, horizons=vec![1, 100, 10_000]))]
    fn variance<'py>(&self, py: Python<'py>, h: Vec<f64>, horizons: Vec<usize>) -> PyResult<Bound<'py, PyDict>> {
        let dec = eigendecompose(&self.inner).map_err(err)?;
        let f = Functional::for_kernel(&h, &self.inner).map_err(err)?;
        let r = variance_report(&dec, &f, &horizons, 0).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("var_pi", r.var_pi)?;
        d.set_item("v_exact", r.v_exact.value())?;
        d.set_item("ratio", r.ratio)?;
        d.set_item("K_bound", r.k_bound)?;
        d.set_item("finite_n", r.finite_n)?;
        Ok(d)
    }

    /// Seeded path of state indices; the start is drawn from `pi` when omitted.
    #[pyo3(signature = (n, seed=1, start=None))]
    fn simulate(&self, n: usize, seed: u64, start: Option<usize>) -> PyResult<Vec<usize>> {
        let sampler = KernelSampler::new(&self.inner);
        let x0 = start.unwrap_or_else(|| sampler.sample_stationary(&mut stream(seed, 1)));
        let trace = simulate_path(&sampler, x0, n, seed, |&x| x as f64).map_err(err)?;
        Ok(trace.values.into_iter().map(|v| v as usize).collect())
    }

    fn __repr__(&self) -> String {
        format!(
            "Kernel(n={}, db_residual={:e})",
            self.inner.n(),
            self.inner.db_residual()
        )
    }
}

/// Off-diagonal ordering of `k1` over `k2` plus variances of random functionals.
#[pyfunction]
#[pyo3(signature = (k1, k2, functionals=50, seed=1))]
fn compare<'py>(
    py: Python<'py>,
    k1: &Kernel,
    k2: &Kernel,
    functionals: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let hs = random_functionals(k1.inner.n(), functionals, seed);
    let r = ordering_report(&k1.inner, &k2.inner, &hs).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("dominates", r.dominates)?;
    d.set_item("worst_violation", r.worst_violation)?;
    d.set_item("lambda_pair", r.lambda_pair)?;
    let pairs: Vec<(usize, f64, f64)> = r
        .variance_pairs
        .iter()
        .map(|(id, a, b)| (*id, a.value(), b.value()))
        .collect();
    d.set_item("variances", pairs)?;
    Ok(d)
}

/// Metropolis-type kernel for target weights `t` and proposal rows `q`.
#[pyfunction]
fn build_mh(t: Vec<f64>, q: Vec<Vec<f64>>) -> PyResult<Kernel> {
    let q = ProposalTable::from_rows(&q).map_err(err)?;
    build_sub_mh(&t, &q).map(|inner| Kernel { inner }).map_err(err)
}

/// The truncated periodic / Metropolis pair on `{-radius..radius}`.
#[pyfunction]
#[pyo3(signature = (radius=25))]
fn example9(radius: usize) -> PyResult<(Kernel, Kernel)> {
    let (p1, p2) = build_example9(radius).map_err(err)?;
    Ok((Kernel { inner: p1 }, Kernel { inner: p2 }))
}

#[pyfunction]
fn transformed_increment_density(x: f64, w: f64, a: f64) -> PyResult<f64> {
    mh_continuous::transformed_increment_density(x, w, a).map_err(err)
}

/// Holding probability of the `N(x, x^b)` sampler on a half-Cauchy target,
/// as `(estimate, standard error)`.
#[pyfunction]
#[pyo3(signature = (b, x, samples=10_000, seed=1))]
fn rejection_probability(b: f64, x: f64, samples: usize, seed: u64) -> PyResult<(f64, f64)> {
    let spec = SamplerSpec::state_dependent(Target::HalfCauchy { scale: 1.0 }, b).map_err(err)?;
    let e = mh_continuous::rejection_probability(&spec, x, samples, &mut stream(seed, 0)).map_err(err)?;
    Ok((e.value, e.se))
}

/// Batch-means asymptotic variance of a trace, as `(estimate, standard error)`.
#[pyfunction]
#[pyo3(signature = (values, batches=None))]
fn batch_means(values: Vec<f64>, batches: Option<usize>) -> PyResult<(f64, f64)> {
    let e = simulate::batch_means_variance(&values, batches).map_err(err)?;
    Ok((e.value, e.se))
}

#[pymodule]
fn vbchain_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("VbchainError", m.py().get_type::<VbchainError>())?;
    m.add_class::<Kernel>()?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add_function(wrap_pyfunction!(build_mh, m)?)?;
    m.add_function(wrap_pyfunction!(example9, m)?)?;
    m.add_function(wrap_pyfunction!(transformed_increment_density, m)?)?;
    m.add_function(wrap_pyfunction!(rejection_probability, m)?)?;
    m.add_function(wrap_pyfunction!(batch_means, m)?)?;
    Ok(())
}
