use std::collections::HashMap;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use tricoil::circuit::{pathloss_db, CombinerWeights, DriveVector};
use tricoil::config::parse_config;
use tricoil::experiments::{angle_sweep, run_strategy, summary_stats, Scenario, Strategy};
use tricoil::geometry::{
    alpha_grid as grid, receiver_pose_from_alpha, FrameMode, SweepAngle, Vec3,
};
use tricoil::magnetics::{dipole_mutual as kernel, CoilSpec};
use tricoil::optimizer::OptimizationTrace;
use tricoil::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidArgument(_) | Error::Validation { .. } | Error::Parse { .. } => {
            PyValueError::new_err(e.to_string())
        }
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn angle(alpha: f64) -> PyResult<SweepAngle> {
    SweepAngle::new(alpha).map_err(to_py)
}

fn strategy(name: &str) -> PyResult<Strategy> {
    Strategy::ALL
        .into_iter()
        .find(|s| s.label() == name)
        .ok_or_else(|| PyValueError::new_err(format!("unknown strategy `{name}`")))
}

/// Result of the alternating optimization at one angle.
#[pyclass(name = "Trace", frozen)]
struct PyTrace {
    inner: OptimizationTrace,
}

#[pymethods]
impl PyTrace {
    #[getter]
    fn iterations(&self) -> usize {
        self.inner.iterations()
    }

    #[getter]
    fn converged(&self) -> bool {
        self.inner.converged
    }

    #[getter]
    fn pathloss_db(&self) -> Vec<f64> {
        self.inner.entries.iter().map(|e| e.pathloss_db).collect()
    }

    #[getter]
    fn currents(&self) -> Vec<[f64; 3]> {
        self.inner
            .entries
            .iter()
            .map(|e| *e.current.amps())
            .collect()
    }

    #[getter]
    fn weights(&self) -> Vec<[f64; 3]> {
        self.inner
            .entries
            .iter()
            .map(|e| *e.weights.weights())
            .collect()
    }

    #[getter]
    fn best_pathloss_db(&self) -> f64 {
        self.inner.best().pathloss_db
    }

    fn __repr__(&self) -> String {
        format!(
            "Trace(iterations={}, converged={}, best_pathloss_db={:.4})",
            self.inner.iterations(),
            self.inner.converged,
            self.inner.best().pathloss_db
        )
    }
}

/// Link scenario: coils, receiver position and electrical parameters.
#[pyclass(name = "Scenario", frozen)]
struct PyScenario {
    inner: Scenario,
}

#[pymethods]
impl PyScenario {
    /// Builds a scenario from an optional JSON config document.
    #[new]
    #[pyo3(signature = (config_json = None))]
    fn new(config_json: Option<&str>) -> PyResult<Self> {
        let cfg = parse_config(config_json.unwrap_or("").as_bytes()).map_err(to_py)?;
        Ok(Self {
            inner: cfg.to_scenario().map_err(to_py)?,
        })
    }

    #[getter]
    fn r_t(&self) -> f64 {
        self.inner.link.r_t
    }

    #[getter]
    fn p0(&self) -> f64 {
        self.inner.link.p0
    }

    /// `m[i][j]` couples transmit coil i to receive coil j, in henries.
    fn mutual_matrix(&self, alpha: f64) -> PyResult<[[f64; 3]; 3]> {
        Ok(*self
            .inner
            .mutual_at(angle(alpha)?)
            .map_err(to_py)?
            .entries())
    }

    fn receiver_normals(&self, alpha: f64) -> PyResult<[[f64; 3]; 3]> {
        Ok(self
            .inner
            .receiver_pose(angle(alpha)?)
            .normals
            .map(|n| n.to_array()))
    }

    fn pathloss(&self, alpha: f64, current: [f64; 3], weights: [f64; 3]) -> PyResult<f64> {
        let m = self.inner.mutual_at(angle(alpha)?).map_err(to_py)?;
        let i = DriveVector::new(current).map_err(to_py)?;
        let s = CombinerWeights::new(weights).map_err(to_py)?;
        pathloss_db(&m, &i, &s, &self.inner.link).map_err(to_py)
    }

    #[pyo3(signature = (alpha, delta = 2.5e-2))]
    fn optimize(&self, alpha: f64, delta: f64) -> PyResult<PyTrace> {
        let out =
            run_strategy(&self.inner, angle(alpha)?, Strategy::Joint, delta).map_err(to_py)?;
        Ok(PyTrace {
            inner: out.trace.expect("joint strategy records a trace"),
        })
    }

    /// Pathloss in dB of `strategy` ("joint", "tx-only", "rx-only", "equal").
    #[pyo3(signature = (alpha, strategy, delta = 2.5e-2))]
    fn strategy_pathloss(&self, alpha: f64, strategy: &str, delta: f64) -> PyResult<f64> {
        let st = self::strategy(strategy)?;
        Ok(run_strategy(&self.inner, angle(alpha)?, st, delta)
            .map_err(to_py)?
            .pathloss_db)
    }

    /// Column-oriented sweep results keyed like sweep.csv.
    #[pyo3(signature = (angles = 360, delta = 2.5e-2))]
    fn angle_sweep(&self, angles: usize, delta: f64) -> PyResult<HashMap<&'static str, Vec<f64>>> {
        let g = grid(angles).map_err(to_py)?;
        let res = angle_sweep(&self.inner, &g, delta).map_err(to_py)?;
        let col = |f: &dyn Fn(&tricoil::experiments::SweepRecord) -> f64| {
            res.records.iter().map(f).collect::<Vec<f64>>()
        };
        let mut out = HashMap::new();
        out.insert("alpha", col(&|r| r.alpha));
        out.insert("joint_db", col(&|r| r.joint_db));
        out.insert("txonly_db", col(&|r| r.txonly_db));
        out.insert("rxonly_db", col(&|r| r.rxonly_db));
        out.insert("equal_db", col(&|r| r.equal_db));
        out.insert("iters", col(&|r| r.iterations as f64));
        Ok(out)
    }

    /// Per-strategy fluctuation (max − min) over the grid, dB.
    #[pyo3(signature = (angles = 360, delta = 2.5e-2))]
    fn fluctuation(&self, angles: usize, delta: f64) -> PyResult<HashMap<&'static str, f64>> {
        let g = grid(angles).map_err(to_py)?;
        let res = angle_sweep(&self.inner, &g, delta).map_err(to_py)?;
        let s = summary_stats(&res).map_err(to_py)?;
        Ok(Strategy::ALL
            .into_iter()
            .map(|st| (st.label(), s.stats(st).fluctuation))
            .collect())
    }
}

/// Dipole mutual inductance between two identical coils, H.
#[pyfunction]
#[pyo3(signature = (n_t, n_r, offset, turns = 10, radius = 0.1))]
fn dipole_mutual(
    n_t: [f64; 3],
    n_r: [f64; 3],
    offset: [f64; 3],
    turns: u32,
    radius: f64,
) -> PyResult<f64> {
    let coil = CoilSpec::new(turns, radius, 0.0).map_err(to_py)?;
    kernel(
        Vec3::from_array(n_t),
        Vec3::from_array(n_r),
        Vec3::from_array(offset),
        &coil,
        &coil,
    )
    .map_err(to_py)
}

/// Receiver triad normals for sweep angle `alpha`.
#[pyfunction]
#[pyo3(signature = (alpha, mode = "orthonormal"))]
fn receiver_pose(alpha: f64, mode: &str) -> PyResult<[[f64; 3]; 3]> {
    let mode: FrameMode = mode.parse().map_err(to_py)?;
    Ok(receiver_pose_from_alpha(angle(alpha)?, mode)
        .normals
        .map(|n| n.to_array()))
}

#[pyfunction]
fn alpha_grid(count: usize) -> PyResult<Vec<f64>> {
    Ok(grid(count)
        .map_err(to_py)?
        .iter()
        .map(|a| a.radians())
        .collect())
}

/// Eigenvalues (descending) and unit eigenvectors of a symmetric 3×3 matrix.
#[pyfunction]
fn symmetric_eig3(matrix: [[f64; 3]; 3]) -> PyResult<(Vec<f64>, Vec<[f64; 3]>)> {
    let pairs = tricoil::eigen::symmetric_eig3(&matrix).map_err(to_py)?;
    Ok((
        pairs.iter().map(|p| p.value).collect(),
        pairs.iter().map(|p| p.vector).collect(),
    ))
}

#[pymodule]
fn pytricoil(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyScenario>()?;
    m.add_class::<PyTrace>()?;
    m.add_function(wrap_pyfunction!(dipole_mutual, m)?)?;
    m.add_function(wrap_pyfunction!(receiver_pose, m)?)?;
    m.add_function(wrap_pyfunction!(alpha_grid, m)?)?;
    m.add_function(wrap_pyfunction!(symmetric_eig3, m)?)?;
    Ok(())
}
