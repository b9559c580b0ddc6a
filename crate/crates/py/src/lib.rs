//! Python bindings for the socioverse simulation engine.
//!
//! The module exposes the main operations — marginal fitting, population
//! sampling, income draws, pool loading and cleaning, the metric kit, and a
//! whole in-process scenario run — as plain functions plus one `Pool` class.
//! Structured results cross the boundary as dicts/lists mirroring the JSON
//! the command-line tool writes, so the two surfaces stay interchangeable.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde::Serialize;

use socioverse_core::behavior::{run_simulation, RuleOracle, RunOptions};
use socioverse_core::evaluation::{self, evaluate, GroundTruth};
use socioverse_core::pool::{self, filter_abnormal};
use socioverse_core::scenario::{build_plan, is_runnable, ScenarioConfig, Severity};
use socioverse_core::synthesis::{
    income_mixture_draws, ipf_fit as core_ipf_fit, sample_profiles as core_sample_profiles, Axis,
    ContingencyTable, IncomeMixtureParams, IpfOptions, MarginalTargets,
};
use socioverse_core::Error;

// ---------------------------------------------------------------------------
// Error and value plumbing
// ---------------------------------------------------------------------------

fn py_err(e: Error) -> PyErr {
    fn rooted_in_io(e: &Error) -> bool {
        match e {
            Error::Io(_) => true,
            Error::File { cause, .. } => rooted_in_io(cause),
            _ => false,
        }
    }
    if rooted_in_io(&e) {
        PyOSError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn json_to_py(py: Python<'_>, v: &serde_json::Value) -> PyResult<Py<PyAny>> {
    Ok(match v {
        serde_json::Value::Null => py.None(),
        serde_json::Value::Bool(b) => (*b).into_pyobject(py)?.to_owned().into_any().unbind(),
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                i.into_pyobject(py)?.into_any().unbind()
            } else if let Some(u) = n.as_u64() {
                u.into_pyobject(py)?.into_any().unbind()
            } else {
                n.as_f64()
                    .unwrap_or(f64::NAN)
                    .into_pyobject(py)?
                    .into_any()
                    .unbind()
            }
        }
        serde_json::Value::String(s) => s.as_str().into_pyobject(py)?.into_any().unbind(),
        serde_json::Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            list.into_any().unbind()
        }
        serde_json::Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, val) in map {
                dict.set_item(k, json_to_py(py, val)?)?;
            }
            dict.into_any().unbind()
        }
    })
}

/// Serialize any library result and hand it to Python as dicts/lists.
fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let v = serde_json::to_value(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    json_to_py(py, &v)
}

fn build_table(axes: Vec<(String, Vec<String>)>, cells: Vec<f64>) -> PyResult<ContingencyTable> {
    let axes = axes
        .into_iter()
        .map(|(name, categories)| Axis::new(name, categories))
        .collect();
    ContingencyTable::new(axes, cells).map_err(py_err)
}

// ---------------------------------------------------------------------------
// Population synthesis
// ---------------------------------------------------------------------------

/// Fit a contingency table to marginal targets by iterative proportional
/// scaling. Returns the fitted table plus convergence diagnostics.
#[pyfunction]
#[pyo3(signature = (axes, cells, targets, tolerance=1e-6, max_iterations=1000))]
fn ipf_fit(
    py: Python<'_>,
    axes: Vec<(String, Vec<String>)>,
    cells: Vec<f64>,
    targets: BTreeMap<String, BTreeMap<String, f64>>,
    tolerance: f64,
    max_iterations: usize,
) -> PyResult<Py<PyAny>> {
    let table = build_table(axes, cells)?;
    let result = core_ipf_fit(
        &table,
        &MarginalTargets::new(targets),
        IpfOptions { tolerance, max_iterations },
    )
    .map_err(py_err)?;
    to_py(py, &result)
}

/// Draw `n` agent profiles from a joint distribution given as a table.
/// The same seed always reproduces the same draw.
#[pyfunction]
#[pyo3(signature = (axes, cells, n, seed=42))]
fn sample_profiles(
    py: Python<'_>,
    axes: Vec<(String, Vec<String>)>,
    cells: Vec<f64>,
    n: usize,
    seed: u64,
) -> PyResult<Py<PyAny>> {
    let table = build_table(axes, cells)?;
    let profiles = core_sample_profiles(&table, n, seed).map_err(py_err)?;
    to_py(py, &profiles)
}

/// Draw incomes from the log-normal body + Pareto tail mixture. Each draw
/// carries the branch that produced it.
#[pyfunction]
#[pyo3(signature = (n, seed=42, mean=10_000.0, sigma=6_000.0, share=0.9, alpha=2.5))]
fn income_draws(
    py: Python<'_>,
    n: usize,
    seed: u64,
    mean: f64,
    sigma: f64,
    share: f64,
    alpha: f64,
) -> PyResult<Py<PyAny>> {
    let params = IncomeMixtureParams::with_mixture(mean, sigma, share, alpha).map_err(py_err)?;
    let draws = income_mixture_draws(&params, n, seed).map_err(py_err)?;
    to_py(py, &draws)
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

/// Root-mean-square error between two equal-length vectors.
#[pyfunction]
fn rmse(predicted: Vec<f64>, actual: Vec<f64>) -> PyResult<f64> {
    evaluation::rmse(&predicted, &actual).map_err(py_err)
}

/// RMSE normalized by the range of the actual values.
#[pyfunction]
fn nrmse(predicted: Vec<f64>, actual: Vec<f64>) -> PyResult<f64> {
    evaluation::nrmse(&predicted, &actual).map_err(py_err)
}

/// KL divergence Σ p·ln(p/q); inputs are normalized and lightly smoothed.
#[pyfunction]
fn kl_divergence(p: Vec<f64>, q: Vec<f64>) -> PyResult<f64> {
    evaluation::kl_divergence(&p, &q).map_err(py_err)
}

/// Fraction of positions where the two label sequences agree.
#[pyfunction]
fn accuracy(predicted: Vec<String>, actual: Vec<String>) -> PyResult<f64> {
    evaluation::accuracy(&predicted, &actual).map_err(py_err)
}

/// Repeated-word share across a user's posts — the bot-filter signal.
#[pyfunction]
fn word_repetition_ratio(posts: Vec<String>) -> PyResult<f64> {
    pool::word_repetition_ratio(&posts).map_err(py_err)
}

// ---------------------------------------------------------------------------
// User pool
// ---------------------------------------------------------------------------

/// A loaded user pool: schema-validated users with their posts and labels.
#[pyclass(module = "socioverse")]
struct Pool {
    inner: pool::Pool,
}

#[pymethods]
impl Pool {
    /// Load and validate a JSONL pool against its attribute schema.
    #[staticmethod]
    fn load(pool_path: PathBuf, schema_path: PathBuf) -> PyResult<Pool> {
        let (inner, _stats) = pool::Pool::load(pool_path, schema_path).map_err(py_err)?;
        Ok(Pool { inner })
    }

    /// Number of users in the pool.
    #[getter]
    fn users(&self) -> usize {
        self.inner.len()
    }

    /// Total number of posts across all users.
    #[getter]
    fn posts(&self) -> usize {
        self.inner.users().iter().map(|u| u.posts.len()).sum()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Pool(users={}, posts={})", self.users(), self.posts())
    }

    /// The attribute schema as a list of dicts.
    fn schema(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &self.inner.schema())
    }

    /// Observed distribution of one categorical attribute.
    fn marginal(&self, py: Python<'_>, attribute: &str) -> PyResult<Py<PyAny>> {
        let dist = self.inner.marginal_distribution(attribute).map_err(py_err)?;
        to_py(py, &dist)
    }

    /// Drop users whose posts repeat words beyond `threshold`; users with
    /// fewer than `min_posts` posts are never judged. Returns the cleaned
    /// pool and a report dict listing exactly who was removed.
    #[pyo3(signature = (threshold=0.3, min_posts=3))]
    fn clean(&self, py: Python<'_>, threshold: f64, min_posts: usize) -> PyResult<(Pool, Py<PyAny>)> {
        let (cleaned, report) =
            filter_abnormal(&self.inner, threshold, min_posts).map_err(py_err)?;
        Ok((Pool { inner: cleaned }, to_py(py, &report)?))
    }

    /// Write the pool back out as canonical JSONL.
    fn write_jsonl(&self, path: PathBuf) -> PyResult<()> {
        let file = File::create(&path)
            .map_err(|e| PyOSError::new_err(format!("{}: {e}", path.display())))?;
        self.inner.write_jsonl(BufWriter::new(file)).map_err(py_err)
    }
}

// ---------------------------------------------------------------------------
// Scenarios
// ---------------------------------------------------------------------------

/// Cross-check a scenario config against the files it references. Returns a
/// list of findings; an empty list means the scenario is runnable as-is.
#[pyfunction]
fn validate_scenario(py: Python<'_>, config_path: PathBuf) -> PyResult<Py<PyAny>> {
    let config = ScenarioConfig::load(&config_path).map_err(py_err)?;
    let base = config_path.parent().unwrap_or_else(|| std::path::Path::new("."));
    let findings = socioverse_core::scenario::validate_scenario(&config, base);
    to_py(py, &findings)
}

/// Run a whole scenario in process on the deterministic rule-oracle backend:
/// load the config and pool, build the seeded plan, simulate every agent,
/// and score the results against the configured ground truth. Returns a dict
/// with the evaluation `report` and the run `manifest`.
#[pyfunction]
#[pyo3(signature = (config_path, seed=42, concurrency=4))]
fn run_scenario(
    py: Python<'_>,
    config_path: PathBuf,
    seed: u64,
    concurrency: usize,
) -> PyResult<Py<PyAny>> {
    let config = ScenarioConfig::load(&config_path).map_err(py_err)?;
    let base = config_path
        .parent()
        .unwrap_or_else(|| std::path::Path::new("."))
        .to_path_buf();

    let findings = socioverse_core::scenario::validate_scenario(&config, &base);
    if !is_runnable(&findings) {
        let errors: Vec<String> = findings
            .iter()
            .filter(|f| f.severity == Severity::Error)
            .map(|f| f.message.clone())
            .collect();
        return Err(PyValueError::new_err(format!(
            "scenario '{}' is not runnable: {}",
            config.scenario_id,
            errors.join("; ")
        )));
    }

    let (user_pool, _) =
        pool::Pool::load(base.join(&config.pool), base.join(&config.schema)).map_err(py_err)?;
    let plan = build_plan(&config, &base, &user_pool, seed).map_err(py_err)?;
    let out = run_simulation(
        &plan,
        &RuleOracle,
        &RunOptions { concurrency, ..RunOptions::default() },
        |_| {},
    )
    .map_err(py_err)?;
    let truth = GroundTruth::load(base.join(&config.ground_truth)).map_err(py_err)?;
    let report = evaluate(&plan, &out.results, &truth).map_err(py_err)?;

    let result = PyDict::new(py);
    result.set_item("report", to_py(py, &report)?)?;
    result.set_item("manifest", to_py(py, &out.manifest)?)?;
    Ok(result.into_any().unbind())
}

/// Write the bundled demo fixtures (pools, scenarios, questionnaires, and
/// ground truths) into a directory; returns the list of paths written.
#[pyfunction]
fn write_fixtures(py: Python<'_>, dir: PathBuf) -> PyResult<Py<PyAny>> {
    let files = socioverse_core::fixtures::write_all(&dir).map_err(py_err)?;
    to_py(py, &files)
}

// ---------------------------------------------------------------------------
// Module
// ---------------------------------------------------------------------------

#[pymodule]
fn socioverse(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<Pool>()?;
    m.add_function(wrap_pyfunction!(ipf_fit, m)?)?;
    m.add_function(wrap_pyfunction!(sample_profiles, m)?)?;
    m.add_function(wrap_pyfunction!(income_draws, m)?)?;
    m.add_function(wrap_pyfunction!(rmse, m)?)?;
    m.add_function(wrap_pyfunction!(nrmse, m)?)?;
    m.add_function(wrap_pyfunction!(kl_divergence, m)?)?;
    m.add_function(wrap_pyfunction!(accuracy, m)?)?;
    m.add_function(wrap_pyfunction!(word_repetition_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(validate_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(write_fixtures, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn io_errors_map_to_oserror() {
        let io = Error::Io(std::io::Error::new(std::io::ErrorKind::NotFound, "gone"));
        let wrapped = Error::File { path: "x.json".into(), cause: Box::new(io) };
        Python::initialize();
        Python::attach(|py| {
            assert!(py_err(wrapped).is_instance_of::<PyOSError>(py));
            assert!(py_err(Error::Schema("bad".into())).is_instance_of::<PyValueError>(py));
        });
    }

    #[test]
    fn json_round_trips_into_python_objects() {
        Python::initialize();
        Python::attach(|py| {
            let v = serde_json::json!({
                "name": "x", "count": 3, "share": 0.5,
                "flags": [true, false], "missing": null
            });
            let obj = json_to_py(py, &v).unwrap();
            let bound = obj.bind(py);
            let dict = bound.downcast::<PyDict>().unwrap();
            let count: i64 = dict.get_item("count").unwrap().unwrap().extract().unwrap();
            assert_eq!(count, 3);
            let flags: Vec<bool> =
                dict.get_item("flags").unwrap().unwrap().extract().unwrap();
            assert_eq!(flags, vec![true, false]);
        });
    }
}
