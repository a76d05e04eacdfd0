//! Python bindings: matrices, the scaling loop, decompositions and the
//! closed-form 2x2 results, mirroring the Rust API one to one.
//!
//! Complex entries cross the boundary as Python `complex` values; matrices
//! as lists of row lists. Errors surface as `ValueError` with the message
//! of the underlying Rust error.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use uniscale_core::error::Error;
use uniscale_core::haar::RngStream;
use uniscale_core::landscape::{gradcheck as core_gradcheck, gradient as core_gradient};
use uniscale_core::matrix::{
    max_entry_distance, potential as core_potential, unitarity_residual, DiagonalPhase,
    UnitaryMatrix,
};
use uniscale_core::scale::{line_sum_residual, scale as core_scale, ScaleConfig, ScaleResult};
use uniscale_core::u2;
use uniscale_core::zxz as zxz_mod;

fn err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Dense square complex matrix.
#[pyclass(name = "UnitaryMatrix", module = "uniscale", skip_from_py_object)]
#[derive(Clone)]
struct PyUnitaryMatrix {
    inner: UnitaryMatrix,
}

#[pymethods]
impl PyUnitaryMatrix {
    /// Build from a list of row lists of complex numbers.
    #[new]
    fn new(rows: Vec<Vec<Complex64>>) -> PyResult<Self> {
        let n = rows.len();
        for (j, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(PyValueError::new_err(format!(
                    "row {j} has {} entries, expected {n}",
                    row.len()
                )));
            }
        }
        let entries: Vec<Complex64> = rows.into_iter().flatten().collect();
        Ok(Self {
            inner: UnitaryMatrix::from_entries(n, entries).map_err(err)?,
        })
    }

    #[staticmethod]
    fn identity(n: usize) -> PyResult<Self> {
        if n == 0 {
            return Err(err(Error::EmptyMatrix));
        }
        Ok(Self {
            inner: UnitaryMatrix::identity(n),
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: uniscale_core::io::matrix_from_json(text).map_err(err)?,
        })
    }

    fn to_json(&self) -> String {
        uniscale_core::io::matrix_to_json(&self.inner)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    /// Entries as a list of row lists.
    fn entries(&self) -> Vec<Vec<Complex64>> {
        let n = self.inner.n();
        (0..n)
            .map(|j| (0..n).map(|k| self.inner.get(j, k)).collect())
            .collect()
    }

    fn get(&self, row: usize, col: usize) -> PyResult<Complex64> {
        let n = self.inner.n();
        if row >= n || col >= n {
            return Err(PyValueError::new_err(format!(
                "index ({row}, {col}) out of range for a {n}x{n} matrix"
            )));
        }
        Ok(self.inner.get(row, col))
    }

    fn adjoint(&self) -> Self {
        Self {
            inner: self.inner.adjoint(),
        }
    }

    fn potential(&self) -> f64 {
        core_potential(&self.inner)
    }

    fn line_sum_residual(&self) -> f64 {
        line_sum_residual(&self.inner)
    }

    fn unitarity_residual(&self) -> f64 {
        unitarity_residual(&self.inner)
    }

    fn max_entry_distance(&self, other: &PyUnitaryMatrix) -> PyResult<f64> {
        if self.inner.n() != other.inner.n() {
            return Err(err(Error::DimensionMismatch {
                left: self.inner.n(),
                right: other.inner.n(),
            }));
        }
        Ok(max_entry_distance(&self.inner, &other.inner))
    }

    fn __matmul__(&self, other: &PyUnitaryMatrix) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.mul(&other.inner).map_err(err)?,
        })
    }

    fn __repr__(&self) -> String {
        format!("UnitaryMatrix(n={})", self.inner.n())
    }
}

/// Result of a scaling run.
#[pyclass(name = "ScaleOutcome", module = "uniscale")]
struct PyScaleOutcome {
    result: ScaleResult,
}

#[pymethods]
impl PyScaleOutcome {
    /// The scaled matrix `B = L A R`.
    #[getter]
    fn b(&self) -> PyUnitaryMatrix {
        PyUnitaryMatrix {
            inner: self.result.b.clone(),
        }
    }

    /// Accumulated left phase angles.
    #[getter]
    fn left(&self) -> Vec<f64> {
        self.result.left.phases().to_vec()
    }

    /// Accumulated right phase angles.
    #[getter]
    fn right(&self) -> Vec<f64> {
        self.result.right.phases().to_vec()
    }

    /// "converged", "stalled_at_saddle" or "max_iter_reached".
    #[getter]
    fn status(&self) -> &'static str {
        self.result.status.as_str()
    }

    /// Trace rows as (k, potential, residual) tuples.
    #[getter]
    fn records(&self) -> Vec<(usize, f64, f64)> {
        self.result
            .trace
            .records
            .iter()
            .map(|r| (r.k, r.psi, r.residual))
            .collect()
    }

    /// Events as (k, kind) tuples.
    #[getter]
    fn events(&self) -> Vec<(usize, String)> {
        self.result
            .trace
            .events
            .iter()
            .map(|e| (e.k, e.kind.to_string()))
            .collect()
    }

    fn __repr__(&self) -> String {
        let last = self.result.trace.final_record();
        format!(
            "ScaleOutcome(status='{}', iterations={}, residual={:.3e})",
            self.result.status, last.k, last.residual
        )
    }
}

/// Three-factor decomposition `U = e^(i alpha) Z1 X Z2`.
#[pyclass(name = "ZxzFactors", module = "uniscale")]
struct PyZxzFactors {
    inner: zxz_mod::ZxzDecomposition,
}

#[pymethods]
impl PyZxzFactors {
    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha
    }

    #[getter]
    fn z1(&self) -> Vec<f64> {
        self.inner.z1.phases().to_vec()
    }

    #[getter]
    fn x(&self) -> PyUnitaryMatrix {
        PyUnitaryMatrix {
            inner: self.inner.x.clone(),
        }
    }

    #[getter]
    fn z2(&self) -> Vec<f64> {
        self.inner.z2.phases().to_vec()
    }

    fn reconstruct(&self) -> PyUnitaryMatrix {
        PyUnitaryMatrix {
            inner: self.inner.reconstruct(),
        }
    }

    fn residual_against(&self, u: &PyUnitaryMatrix) -> f64 {
        self.inner.residual_against(&u.inner)
    }

    fn __repr__(&self) -> String {
        format!("ZxzFactors(n={}, alpha={:.6})", self.inner.x.n(), self.inner.alpha)
    }
}

/// Six-factor decomposition `U = X0 Z0 X0^-1 Z1' X Z2`.
#[pyclass(name = "XzxzxzFactors", module = "uniscale")]
struct PyXzxzxzFactors {
    inner: zxz_mod::XzxzxzDecomposition,
}

#[pymethods]
impl PyXzxzxzFactors {
    /// The cyclic-shift permutation as a dense matrix.
    #[getter]
    fn x0(&self) -> PyUnitaryMatrix {
        PyUnitaryMatrix {
            inner: self.inner.x0.clone(),
        }
    }

    #[getter]
    fn z0(&self) -> Vec<f64> {
        self.inner.z0.phases().to_vec()
    }

    #[getter]
    fn z1p(&self) -> Vec<f64> {
        self.inner.z1p.phases().to_vec()
    }

    #[getter]
    fn x(&self) -> PyUnitaryMatrix {
        PyUnitaryMatrix {
            inner: self.inner.x.clone(),
        }
    }

    #[getter]
    fn z2(&self) -> Vec<f64> {
        self.inner.z2.phases().to_vec()
    }

    fn reconstruct(&self) -> PyUnitaryMatrix {
        PyUnitaryMatrix {
            inner: self.inner.reconstruct(),
        }
    }

    fn residual_against(&self, u: &PyUnitaryMatrix) -> f64 {
        self.inner.residual_against(&u.inner)
    }

    fn __repr__(&self) -> String {
        format!("XzxzxzFactors(n={})", self.inner.x.n())
    }
}

fn config_from(tol: f64, max_iter: usize, escape: bool, seed: u64) -> ScaleConfig {
    ScaleConfig {
        tol_residual: tol,
        max_iter,
        escape_enabled: escape,
        rng_seed: seed,
        ..ScaleConfig::default()
    }
}

/// Sample a Haar-random unitary from the stream (seed, counter).
#[pyfunction]
#[pyo3(signature = (n, seed = 0, counter = 0))]
fn sample_unitary(n: usize, seed: u64, counter: u64) -> PyResult<PyUnitaryMatrix> {
    if n == 0 {
        return Err(err(Error::EmptyMatrix));
    }
    Ok(PyUnitaryMatrix {
        inner: uniscale_core::sample_unitary(n, &mut RngStream::new(seed, counter)),
    })
}

/// Run the scaling iteration.
#[pyfunction]
#[pyo3(signature = (m, tol = 1e-10, max_iter = 100_000, escape = true, seed = 0))]
fn scale(
    m: &PyUnitaryMatrix,
    tol: f64,
    max_iter: usize,
    escape: bool,
    seed: u64,
) -> PyResult<PyScaleOutcome> {
    let result = core_scale(&m.inner, &config_from(tol, max_iter, escape, seed)).map_err(err)?;
    Ok(PyScaleOutcome { result })
}

/// Potential n^2 - |matrix sum|^2.
#[pyfunction]
fn potential(m: &PyUnitaryMatrix) -> f64 {
    core_potential(&m.inner)
}

/// Gradient of the potential over the 2n phase angles, as
/// (d/dlambda, d/drho) lists.
#[pyfunction]
fn gradient(m: &PyUnitaryMatrix) -> (Vec<f64>, Vec<f64>) {
    let g = core_gradient(&m.inner);
    (g.dlambda, g.drho)
}

/// Compare the analytic gradient against central finite differences;
/// returns (max_abs_deviation, max_scaled_deviation, pass).
#[pyfunction]
#[pyo3(signature = (m, h = 1e-6))]
fn gradcheck(m: &PyUnitaryMatrix, h: f64) -> PyResult<(f64, f64, bool)> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(PyValueError::new_err("step h must be positive and finite"));
    }
    let report = core_gradcheck(&m.inner, h);
    Ok((
        report.max_abs_deviation,
        report.max_scaled_deviation,
        report.pass,
    ))
}

/// True when the potential is stationary at this start (all nonzero line
/// sums on a single argument axis).
#[pyfunction]
#[pyo3(signature = (m, tol = 1e-8))]
fn detect_constant_argument_start(m: &PyUnitaryMatrix, tol: f64) -> bool {
    uniscale_core::detect_constant_argument_start(&m.inner, tol)
}

/// Factor U = e^(i alpha) Z1 X Z2.
#[pyfunction]
#[pyo3(signature = (m, tol = 1e-10, max_iter = 100_000, escape = true, seed = 0))]
fn zxz(
    m: &PyUnitaryMatrix,
    tol: f64,
    max_iter: usize,
    escape: bool,
    seed: u64,
) -> PyResult<PyZxzFactors> {
    let inner =
        zxz_mod::zxz_decompose(&m.inner, &config_from(tol, max_iter, escape, seed)).map_err(err)?;
    Ok(PyZxzFactors { inner })
}

/// Factor U = X0 Z0 X0^-1 Z1' X Z2 (even dimension only).
#[pyfunction]
#[pyo3(signature = (m, tol = 1e-10, max_iter = 100_000, escape = true, seed = 0))]
fn xzxzxz(
    m: &PyUnitaryMatrix,
    tol: f64,
    max_iter: usize,
    escape: bool,
    seed: u64,
) -> PyResult<PyXzxzxzFactors> {
    let inner =
        zxz_mod::xzxzxz_decompose(&m.inner, &config_from(tol, max_iter, escape, seed)).map_err(err)?;
    Ok(PyXzxzxzFactors { inner })
}

/// diag(1, e^(i theta)).
#[pyfunction]
fn phasor(theta: f64) -> PyResult<PyUnitaryMatrix> {
    if !theta.is_finite() {
        return Err(PyValueError::new_err("theta must be finite"));
    }
    Ok(PyUnitaryMatrix {
        inner: zxz_mod::phasor(theta),
    })
}

/// The one-parameter XU(2) gate with angle theta.
#[pyfunction]
fn negator(theta: f64) -> PyResult<PyUnitaryMatrix> {
    if !theta.is_finite() {
        return Err(PyValueError::new_err("theta must be finite"));
    }
    Ok(PyUnitaryMatrix {
        inner: zxz_mod::negator(theta),
    })
}

/// Cyclic shift permutation matrix.
#[pyfunction]
fn cyclic_shift(n: usize) -> PyResult<PyUnitaryMatrix> {
    if n == 0 {
        return Err(err(Error::EmptyMatrix));
    }
    Ok(PyUnitaryMatrix {
        inner: zxz_mod::cyclic_shift(n),
    })
}

/// Classify against XU(n) and ZU(n): "xu", "zu", "both" or "neither".
#[pyfunction]
#[pyo3(signature = (m, tol = 1e-9))]
fn membership(m: &PyUnitaryMatrix, tol: f64) -> String {
    zxz_mod::membership(&m.inner, tol).to_string()
}

/// Canonical parameters (phi, theta, psi, chi) of a 2x2 unitary.
#[pyfunction]
fn u2_params(m: &PyUnitaryMatrix) -> PyResult<(f64, f64, f64, f64)> {
    let p = u2::params(&m.inner).map_err(err)?;
    Ok((p.phi, p.theta, p.psi, p.chi))
}

/// Build the 2x2 unitary with the given canonical parameters.
#[pyfunction]
fn u2_from_params(phi: f64, theta: f64, psi: f64, chi: f64) -> PyResult<PyUnitaryMatrix> {
    for (name, v) in [("phi", phi), ("theta", theta), ("psi", psi), ("chi", chi)] {
        if !v.is_finite() {
            return Err(PyValueError::new_err(format!("{name} must be finite")));
        }
    }
    Ok(PyUnitaryMatrix {
        inner: u2::from_params(&u2::U2Params {
            phi,
            theta,
            psi,
            chi,
        }),
    })
}

/// Closed-form ZXZ factors of a 2x2 unitary; branch is "first" or "second".
#[pyfunction]
#[pyo3(signature = (m, branch = "first"))]
fn u2_zxz(m: &PyUnitaryMatrix, branch: &str) -> PyResult<PyZxzFactors> {
    let b = match branch {
        "first" => u2::U2Branch::First,
        "second" => u2::U2Branch::Second,
        other => {
            return Err(PyValueError::new_err(format!(
                "branch must be 'first' or 'second', got '{other}'"
            )))
        }
    };
    let inner = u2::analytic_zxz(&m.inner, b).map_err(err)?;
    Ok(PyZxzFactors { inner })
}

/// Predict the endpoint of the iteration for a 2x2 unitary: "b", "b_prime",
/// "separatrix" or "degenerate_coset".
#[pyfunction]
fn predict_attractor(m: &PyUnitaryMatrix) -> PyResult<String> {
    Ok(u2::predict_attractor(&m.inner).map_err(err)?.to_string())
}

/// Asymptotic per-step potential contraction near the 2x2 attractors.
#[pyfunction]
fn convergence_ratio(phi: f64) -> f64 {
    u2::convergence_ratio(phi)
}

/// Apply diagonal phases: diag(e^(i left)) M diag(e^(i right)).
#[pyfunction]
fn apply_phases(
    left: Vec<f64>,
    m: &PyUnitaryMatrix,
    right: Vec<f64>,
) -> PyResult<PyUnitaryMatrix> {
    let l = DiagonalPhase::new(left).map_err(err)?;
    let r = DiagonalPhase::new(right).map_err(err)?;
    Ok(PyUnitaryMatrix {
        inner: uniscale_core::apply_diagonals(&l, &m.inner, &r).map_err(err)?,
    })
}

#[pymodule]
fn uniscale(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyUnitaryMatrix>()?;
    m.add_class::<PyScaleOutcome>()?;
    m.add_class::<PyZxzFactors>()?;
    m.add_class::<PyXzxzxzFactors>()?;
    m.add_function(wrap_pyfunction!(sample_unitary, m)?)?;
    m.add_function(wrap_pyfunction!(scale, m)?)?;
    m.add_function(wrap_pyfunction!(potential, m)?)?;
    m.add_function(wrap_pyfunction!(gradient, m)?)?;
    m.add_function(wrap_pyfunction!(gradcheck, m)?)?;
    m.add_function(wrap_pyfunction!(detect_constant_argument_start, m)?)?;
    m.add_function(wrap_pyfunction!(zxz, m)?)?;
    m.add_function(wrap_pyfunction!(xzxzxz, m)?)?;
    m.add_function(wrap_pyfunction!(phasor, m)?)?;
    m.add_function(wrap_pyfunction!(negator, m)?)?;
    m.add_function(wrap_pyfunction!(cyclic_shift, m)?)?;
    m.add_function(wrap_pyfunction!(membership, m)?)?;
    m.add_function(wrap_pyfunction!(u2_params, m)?)?;
    m.add_function(wrap_pyfunction!(u2_from_params, m)?)?;
    m.add_function(wrap_pyfunction!(u2_zxz, m)?)?;
    m.add_function(wrap_pyfunction!(predict_attractor, m)?)?;
    m.add_function(wrap_pyfunction!(convergence_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(apply_phases, m)?)?;
    Ok(())
}
