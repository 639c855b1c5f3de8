//! Python bindings. Matrices cross the boundary as lists of rows.

use nalgebra::{DMatrix, Matrix4};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use twistorlab_core::fiber::{self, InnerProductSpace, OrthogonalComplexStructure};
use twistorlab_core::scenario::{self, Format, ScenarioConfig};

fn err(e: twistorlab_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn matrix(rows: Vec<Vec<f64>>) -> PyResult<DMatrix<f64>> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("expected a square matrix"));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// `(id, description)` for every registered check.
#[pyfunction]
fn list_checks() -> Vec<(String, String)> {
    scenario::registry()
        .iter()
        .map(|c| (c.id.to_string(), c.description.to_string()))
        .collect()
}

/// Names of the bundled scenarios.
#[pyfunction]
fn list_scenarios() -> Vec<String> {
    scenario::BUNDLED.iter().map(|(n, _)| n.to_string()).collect()
}

/// Runs a scenario given as JSON text or as a bundled name, and returns the
/// report in the requested format (timings omitted).
#[pyfunction]
#[pyo3(signature = (config, format = "json", seed = None))]
fn run_scenario(py: Python<'_>, config: &str, format: &str, seed: Option<u64>) -> PyResult<String> {
    let text = scenario::bundled(config).unwrap_or(config);
    let mut config = ScenarioConfig::from_json(text).map_err(err)?;
    if let Some(s) = seed {
        config.seed = s;
    }
    let format: Format = format.parse().map_err(err)?;
    let report = py.detach(|| scenario::run(&config)).map_err(err)?.without_timing();
    let bytes = scenario::emit(&report, format).map_err(err)?;
    String::from_utf8(bytes).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// `Ψ(I)`: the structure compatible with `gtilde` obtained from `I` compatible with `g`.
#[pyfunction]
fn psi_point(g: Vec<Vec<f64>>, gtilde: Vec<Vec<f64>>, i: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
    let g = InnerProductSpace::new(matrix(g)?, true).map_err(err)?;
    let gt = InnerProductSpace::new(matrix(gtilde)?, true).map_err(err)?;
    let i = OrthogonalComplexStructure::new(&g, matrix(i)?).map_err(err)?;
    Ok(rows(fiber::psi_point(&g, &gt, &i).map_err(err)?.mat()))
}

/// Unit quaternions `(u, v)` with `A = L_u R_v` for `A ∈ SO(4)`.
#[pyfunction]
fn isoclinic_factor(a: Vec<Vec<f64>>) -> PyResult<([f64; 4], [f64; 4])> {
    let m = matrix(a)?;
    if m.nrows() != 4 {
        return Err(PyValueError::new_err("expected a 4x4 matrix"));
    }
    let pair = fiber::isoclinic_factor(&Matrix4::from_fn(|i, j| m[(i, j)])).map_err(err)?;
    Ok((pair.left, pair.right))
}

#[pymodule]
fn twistorlab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(list_checks, m)?)?;
    m.add_function(wrap_pyfunction!(list_scenarios, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(psi_point, m)?)?;
    m.add_function(wrap_pyfunction!(isoclinic_factor, m)?)?;
    Ok(())
}
