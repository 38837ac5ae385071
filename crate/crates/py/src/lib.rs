//! Python bindings for the spin-1/2 readout model and the verification checks.
//!
//! Results come back as plain lists and dicts so the module has no
//! dependency on numpy.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use ndweak_core::spinhalf::{
    oscillation_scan, spin_distribution, spin_interpolated_distribution, spin_p_post, BlochConfig,
};
use ndweak_core::{verification, KGrid};

fn to_py(e: ndweak_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn config(pre: f64, post: f64, lambda: f64, coherence: f64, k_h: f64) -> PyResult<BlochConfig> {
    BlochConfig::in_plane(pre, post, lambda, coherence, k_h).map_err(to_py)
}

/// Postselection probability. `pre_angle` is the polar angle of the initial
/// Bloch vector from the measured axis; `post_angle` is the final one, counted
/// from the initial vector.
#[pyfunction]
#[pyo3(signature = (pre_angle, post_angle, lam, coherence = 2.0, k_h = f64::INFINITY))]
fn p_post(pre_angle: f64, post_angle: f64, lam: f64, coherence: f64, k_h: f64) -> PyResult<f64> {
    Ok(spin_p_post(&config(
        pre_angle, post_angle, lam, coherence, k_h,
    )?))
}

/// Exact and interpolated readout distributions on a uniform grid.
///
/// Returns a dict with keys `k`, `Q_exact`, `Q_interp`, `P_post` and, when the
/// dispersion is strong enough to oscillate, `k_osc_measured`/`k_osc_predicted`.
#[pyfunction]
#[pyo3(signature = (pre_angle, post_angle, lam, coherence = 2.0, k_h = f64::INFINITY,
                    k_min = -8.0, k_max = 8.0, n_points = 2048))]
#[allow(clippy::too_many_arguments)]
fn readout<'py>(
    py: Python<'py>,
    pre_angle: f64,
    post_angle: f64,
    lam: f64,
    coherence: f64,
    k_h: f64,
    k_min: f64,
    k_max: f64,
    n_points: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = config(pre_angle, post_angle, lam, coherence, k_h)?;
    let grid = KGrid::new(k_min, k_max, n_points).map_err(to_py)?;
    let (exact, interp) = py
        .detach(|| {
            Ok::<_, ndweak_core::Error>((
                spin_distribution(&cfg, &grid)?,
                spin_interpolated_distribution(&cfg, &grid)?,
            ))
        })
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("k", grid.points())?;
    d.set_item("Q_exact", exact.values().to_vec())?;
    d.set_item("Q_interp", interp.values().to_vec())?;
    d.set_item("P_post", exact.p_post())?;
    if cfg.oscillates() {
        let scan = oscillation_scan(&cfg, &grid).map_err(to_py)?;
        d.set_item("k_osc_predicted", scan.predicted_period)?;
        d.set_item("k_osc_measured", scan.measured_period)?;
    }
    Ok(d)
}

/// Runs the built-in checks; returns `(name, passed, report)` tuples.
#[pyfunction]
#[pyo3(signature = (seed = verification::DEFAULT_SEED))]
fn verify(py: Python<'_>, seed: u64) -> PyResult<Vec<(String, bool, String)>> {
    let checks = py.detach(|| verification::run_all(seed)).map_err(to_py)?;
    Ok(checks
        .into_iter()
        .map(|c| (c.name.clone(), c.passed(), c.report()))
        .collect())
}

#[pymodule]
fn ndweak(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", ndweak_core::VERSION)?;
    m.add_function(wrap_pyfunction!(p_post, m)?)?;
    m.add_function(wrap_pyfunction!(readout, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
