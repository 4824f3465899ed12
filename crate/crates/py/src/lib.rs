//! Python bindings. Matrices cross the boundary as lists of rows of Python
//! `complex` (real numbers are accepted on input).

use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use ris_parafac::harness::config::{Overrides, Preset, SweepConfig};
use ris_parafac::harness::{run_sweep as run_sweep_core, write_csv, write_json, OutputFormat};
use ris_parafac::tensor::{default_pinv_tol, matrix_from_rows, matrix_to_rows};
use ris_parafac::{self as core, ChannelPair, ComplexMatrix, PhaseMatrix, ReceivedTensor};

create_exception!(parafac_ris, ParafacError, PyValueError);

type Rows = Vec<Vec<Complex64>>;

fn err(e: core::Error) -> PyErr {
    ParafacError::new_err(e.to_string())
}

fn to_matrix(rows: &Rows) -> PyResult<ComplexMatrix> {
    matrix_from_rows(rows).map_err(err)
}

fn to_rows(m: &ComplexMatrix) -> Rows {
    matrix_to_rows(m.as_ref())
}

fn to_phase(rows: &Rows) -> PyResult<PhaseMatrix> {
    PhaseMatrix::new(to_matrix(rows)?).map_err(err)
}

fn to_tensor(slices: &[Rows]) -> PyResult<ReceivedTensor> {
    let mats = slices.iter().map(to_matrix).collect::<PyResult<Vec<_>>>()?;
    ReceivedTensor::from_slices(mats).map_err(err)
}

#[pyclass(name = "SystemDims", module = "parafac_ris", frozen, eq, skip_from_py_object)]
#[derive(Clone, Copy, PartialEq)]
struct PySystemDims {
    inner: core::SystemDims,
}

#[pymethods]
impl PySystemDims {
    #[new]
    fn new(m: usize, k: usize, n: usize, p: usize, t: usize) -> PyResult<Self> {
        Ok(PySystemDims {
            inner: core::SystemDims::new(m, k, n, p, t).map_err(err)?,
        })
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn p(&self) -> usize {
        self.inner.p
    }

    #[getter]
    fn t(&self) -> usize {
        self.inner.t
    }

    fn is_feasible(&self) -> bool {
        self.inner.is_feasible()
    }

    /// Human-readable list of violated identifiability conditions.
    fn violations(&self) -> Vec<String> {
        core::check_feasibility(&self.inner)
            .violations
            .iter()
            .map(|v| v.to_string())
            .collect()
    }

    fn __repr__(&self) -> String {
        let d = self.inner;
        format!("SystemDims(m={}, k={}, n={}, p={}, t={})", d.m, d.k, d.n, d.p, d.t)
    }
}

/// Returns `(h1, h2)` with shapes `N x M` and `K x N`.
#[pyfunction]
fn generate_channels(dims: &PySystemDims, seed: u64) -> PyResult<(Rows, Rows)> {
    let pair = core::generate_channels(&dims.inner, seed).map_err(err)?;
    Ok((to_rows(&pair.h1), to_rows(&pair.h2)))
}

#[pyfunction]
fn dft_phase(p: usize, n: usize) -> PyResult<Rows> {
    Ok(to_rows(&core::dft_phase(p, n).map_err(err)?.into_inner()))
}

#[pyfunction]
fn generate_pilots(m: usize, t: usize) -> PyResult<Rows> {
    let x = core::generate_pilots(m, t).map_err(err)?;
    Ok(matrix_to_rows(x.as_ref()))
}

/// Pilot-removed received slices, one `K x M` matrix per phase configuration.
/// `snr_db=None` gives noiseless data.
#[pyfunction]
#[pyo3(signature = (dims, h1, h2, snr_db=None, noise_seed=0))]
fn simulate_received(dims: &PySystemDims, h1: Rows, h2: Rows, snr_db: Option<f64>, noise_seed: u64) -> PyResult<Vec<Rows>> {
    let pair = ChannelPair::new(to_matrix(&h1)?, to_matrix(&h2)?).map_err(err)?;
    let d = dims.inner;
    let phi = core::dft_phase(d.p, d.n).map_err(err)?;
    let x = core::generate_pilots(d.m, d.t).map_err(err)?;
    let noise = match snr_db {
        Some(s) => core::NoiseSpec::from_snr_db(s).map_err(err)?,
        None => core::NoiseSpec::noiseless(),
    };
    let z = core::simulate_received(&d, &pair, &phi, &x, &noise, noise_seed).map_err(err)?;
    Ok(z.slices().iter().map(to_rows).collect())
}

#[pyfunction]
fn khatri_rao(a: Rows, b: Rows) -> PyResult<Rows> {
    let kr = core::khatri_rao(to_matrix(&a)?.as_ref(), to_matrix(&b)?.as_ref()).map_err(err)?;
    Ok(to_rows(&kr))
}

/// Mode-`mode` unfolding (1, 2 or 3) of the tensor built from `h1`, `h2`, `phi`.
#[pyfunction]
fn unfold(mode: u8, h1: Rows, h2: Rows, phi: Rows) -> PyResult<Rows> {
    let (h1, h2, phi) = (to_matrix(&h1)?, to_matrix(&h2)?, to_matrix(&phi)?);
    let f = match mode {
        1 => core::unfold_mode1,
        2 => core::unfold_mode2,
        3 => core::unfold_mode3,
        _ => return Err(PyValueError::new_err(format!("mode must be 1, 2 or 3, got {mode}"))),
    };
    Ok(to_rows(&f(h1.as_ref(), h2.as_ref(), phi.as_ref()).map_err(err)?))
}

/// Returns `(pinv, rank)`.
#[pyfunction]
#[pyo3(signature = (a, tol=None))]
fn pinv(a: Rows, tol: Option<f64>) -> PyResult<(Rows, usize)> {
    let a = to_matrix(&a)?;
    let tol = tol.unwrap_or_else(|| default_pinv_tol(a.nrows(), a.ncols()));
    let p = core::pseudo_inverse(a.as_ref(), tol).map_err(err)?;
    Ok((to_rows(&p.matrix), p.rank))
}

#[pyfunction]
fn check_feasibility(m: usize, k: usize, n: usize, p: usize) -> Vec<String> {
    let dims = core::SystemDims { m, k, n, p, t: m };
    core::check_feasibility(&dims).violations.iter().map(|v| v.to_string()).collect()
}

/// Run the ALS estimator on received slices. Returns a dict with `h1`, `h2`,
/// `iterations`, `converged`, `relative_change_history` and
/// `residual_history`.
#[pyfunction]
#[pyo3(signature = (slices, phi, epsilon=1e-5, max_iters=20, pinv_tol=None))]
fn als_estimate<'py>(
    py: Python<'py>,
    slices: Vec<Rows>,
    phi: Rows,
    epsilon: f64,
    max_iters: usize,
    pinv_tol: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let z = to_tensor(&slices)?;
    let phi = to_phase(&phi)?;
    let cfg = core::AlsConfig {
        epsilon,
        max_iters,
        pinv_tol,
    };
    let res = py.detach(|| core::als_estimate(&z, &phi, &cfg)).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("h1", to_rows(&res.h1_hat))?;
    out.set_item("h2", to_rows(&res.h2_hat))?;
    out.set_item("iterations", res.iterations)?;
    out.set_item("converged", res.converged)?;
    out.set_item("relative_change_history", res.relative_change_history)?;
    out.set_item("residual_history", res.residual_history)?;
    Ok(out)
}

/// LS estimate of `H1` given the true `H2`.
#[pyfunction]
fn genie_ls_h1(slices: Vec<Rows>, h2_true: Rows, phi: Rows) -> PyResult<Rows> {
    let est = core::genie_ls_h1(&to_tensor(&slices)?, to_matrix(&h2_true)?.as_ref(), &to_phase(&phi)?).map_err(err)?;
    Ok(to_rows(&est))
}

/// LS estimate of `H2` given the true `H1`.
#[pyfunction]
fn genie_ls_h2(slices: Vec<Rows>, h1_true: Rows, phi: Rows) -> PyResult<Rows> {
    let est = core::genie_ls_h2(&to_tensor(&slices)?, to_matrix(&h1_true)?.as_ref(), &to_phase(&phi)?).map_err(err)?;
    Ok(to_rows(&est))
}

/// Returns `(nmse_h1, nmse_h2)` after removing the diagonal scaling ambiguity.
#[pyfunction]
fn aligned_nmse(h1_true: Rows, h2_true: Rows, h1_est: Rows, h2_est: Rows) -> PyResult<(f64, f64)> {
    let truth = ChannelPair::new(to_matrix(&h1_true)?, to_matrix(&h2_true)?).map_err(err)?;
    let est = ChannelPair::new(to_matrix(&h1_est)?, to_matrix(&h2_est)?).map_err(err)?;
    let rec = core::aligned_nmse(&truth, &est).map_err(err)?;
    Ok((rec.nmse_h1, rec.nmse_h2))
}

/// Run a Monte Carlo sweep and return the result as CSV or JSON text.
///
/// `preset` is `"snr"`, `"n"` or `"p"`; `overrides` is TOML text with the
/// same keys as the command-line config file.
#[pyfunction]
#[pyo3(signature = (preset, overrides="", format="csv"))]
fn run_sweep(py: Python<'_>, preset: &str, overrides: &str, format: &str) -> PyResult<String> {
    let preset = match preset {
        "snr" => Preset::Snr,
        "n" => Preset::Elements,
        "p" => Preset::Phases,
        other => return Err(PyValueError::new_err(format!("unknown preset `{other}`"))),
    };
    let format: OutputFormat = format.parse().map_err(err)?;
    let mut cfg = SweepConfig::preset(preset);
    cfg.apply(&Overrides::from_toml_str(overrides).map_err(err)?).map_err(err)?;
    let res = py.detach(|| run_sweep_core(&cfg)).map_err(err)?;
    let mut buf = Vec::new();
    match format {
        OutputFormat::Csv => write_csv(&res, &mut buf),
        OutputFormat::Json => write_json(&res, &mut buf),
    }
    .map_err(err)?;
    String::from_utf8(buf).map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pymodule]
fn parafac_ris(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("ParafacError", m.py().get_type::<ParafacError>())?;
    m.add_class::<PySystemDims>()?;
    m.add_function(wrap_pyfunction!(generate_channels, m)?)?;
    m.add_function(wrap_pyfunction!(dft_phase, m)?)?;
    m.add_function(wrap_pyfunction!(generate_pilots, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_received, m)?)?;
    m.add_function(wrap_pyfunction!(khatri_rao, m)?)?;
    m.add_function(wrap_pyfunction!(unfold, m)?)?;
    m.add_function(wrap_pyfunction!(pinv, m)?)?;
    m.add_function(wrap_pyfunction!(check_feasibility, m)?)?;
    m.add_function(wrap_pyfunction!(als_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(genie_ls_h1, m)?)?;
    m.add_function(wrap_pyfunction!(genie_ls_h2, m)?)?;
    m.add_function(wrap_pyfunction!(aligned_nmse, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    Ok(())
}
