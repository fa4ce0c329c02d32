//! Python bindings: measures, exact W1, model evaluation, simulation.
//!
//! Measures and models cross the boundary as JSON strings in the same
//! schemas the CLI uses, which keeps the binding layer thin and the
//! formats in one place.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use swarmkin::dynamics::{simulate, SimConfig};
use swarmkin::measures::{DiscreteMeasure, PhasePoint};
use swarmkin::models::{eval_all, ModelSpec};
use swarmkin::transport;

fn value_error<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Weighted atomic measure on phase space.
#[pyclass(name = "DiscreteMeasure")]
#[derive(Clone)]
struct PyDiscreteMeasure {
    inner: DiscreteMeasure,
}

#[pymethods]
impl PyDiscreteMeasure {
    /// Build from `[(x, v, mass), ...]`; masses are normalized to 1.
    #[new]
    fn new(atoms: Vec<(Vec<f64>, Vec<f64>, f64)>) -> PyResult<Self> {
        let atoms = atoms
            .into_iter()
            .map(|(x, v, m)| (PhasePoint::new(x, v), m))
            .collect();
        Ok(Self {
            inner: DiscreteMeasure::normalize(atoms).map_err(value_error)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: serde_json::from_str(text).map_err(value_error)?,
        })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(value_error)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn masses(&self) -> Vec<f64> {
        self.inner.masses().to_vec()
    }

    fn position(&self, i: usize) -> PyResult<Vec<f64>> {
        if i >= self.inner.len() {
            return Err(PyValueError::new_err("atom index out of range"));
        }
        Ok(self.inner.position(i).to_vec())
    }

    fn velocity(&self, i: usize) -> PyResult<Vec<f64>> {
        if i >= self.inner.len() {
            return Err(PyValueError::new_err("atom index out of range"));
        }
        Ok(self.inner.velocity(i).to_vec())
    }

    fn support_radius(&self) -> f64 {
        self.inner.support_radius()
    }

    fn mean_velocity(&self) -> Vec<f64> {
        self.inner.mean_velocity()
    }

    fn velocity_diameter(&self) -> f64 {
        self.inner.velocity_diameter()
    }
}

/// Exact W1 between two measures; returns the distance.
#[pyfunction]
fn w1_exact(f: &PyDiscreteMeasure, g: &PyDiscreteMeasure) -> PyResult<f64> {
    let (d, _) = transport::w1_exact(&f.inner, &g.inner).map_err(value_error)?;
    Ok(d)
}

/// Exact W1 plus the optimal plan as JSON.
#[pyfunction]
fn w1_exact_with_plan(
    f: &PyDiscreteMeasure,
    g: &PyDiscreteMeasure,
) -> PyResult<(f64, String)> {
    let (d, plan) = transport::w1_exact(&f.inner, &g.inner).map_err(value_error)?;
    Ok((d, plan.to_json()))
}

/// Fast 1-D W1 (measures must vary in a single coordinate).
#[pyfunction]
fn w1_1d(f: &PyDiscreteMeasure, g: &PyDiscreteMeasure) -> PyResult<f64> {
    transport::w1_1d(&f.inner, &g.inner).map_err(value_error)
}

/// Acceleration field of a model (JSON spec) at every atom.
#[pyfunction]
fn model_eval(model_json: &str, f: &PyDiscreteMeasure) -> PyResult<Vec<f64>> {
    let model: ModelSpec = serde_json::from_str(model_json).map_err(value_error)?;
    eval_all(&f.inner, &model).map_err(value_error)
}

/// Evolve a measure to `t_end`; returns the final state.
#[pyfunction]
#[pyo3(signature = (f, model_json, dt, t_end))]
fn run_simulation(
    f: &PyDiscreteMeasure,
    model_json: &str,
    dt: f64,
    t_end: f64,
) -> PyResult<PyDiscreteMeasure> {
    let model: ModelSpec = serde_json::from_str(model_json).map_err(value_error)?;
    let config = SimConfig {
        model,
        dt,
        t_end,
        record_every: usize::MAX,
        seed: 0,
    };
    let traj = simulate(&f.inner, &config).map_err(value_error)?;
    Ok(PyDiscreteMeasure {
        inner: traj.final_state().clone(),
    })
}

#[pymodule]
fn swarmkin_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDiscreteMeasure>()?;
    m.add_function(wrap_pyfunction!(w1_exact, m)?)?;
    m.add_function(wrap_pyfunction!(w1_exact_with_plan, m)?)?;
    m.add_function(wrap_pyfunction!(w1_1d, m)?)?;
    m.add_function(wrap_pyfunction!(model_eval, m)?)?;
    m.add_function(wrap_pyfunction!(run_simulation, m)?)?;
    Ok(())
}
