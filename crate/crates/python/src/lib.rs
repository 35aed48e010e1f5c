//! Python bindings. Instances, solutions and reports cross the boundary as
//! JSON text in the same schemas the `ckc` tool reads and writes.

use colorful_kcenter::driver::{approximation_factor as factor, solve as run_solver, SolverConfig};
use colorful_kcenter::generate;
use colorful_kcenter::matching::{self, matching_weight_bounds, WeightedGraph};
use colorful_kcenter::model::{self, read_instance, Instance, SolutionJson};
use colorful_kcenter::number::{format_rational, parse_rational, Length};
use colorful_kcenter::{oracle as brute, pseudo, Error};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::OracleGuard { .. } | Error::RecoveryFailed { .. } => PyRuntimeError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> PyResult<String> {
    serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn instance(text: &str) -> PyResult<Instance> {
    read_instance(text).map_err(py_err)
}

fn length(text: &str) -> PyResult<Length> {
    text.parse().map_err(py_err)
}

/// Runs the full solver; returns the run report as JSON.
#[pyfunction]
#[pyo3(signature = (instance_json, alpha = "8.25", seed = 0, radius = None, early_stop = false, parallel = None))]
fn solve(
    py: Python<'_>,
    instance_json: &str,
    alpha: &str,
    seed: u64,
    radius: Option<&str>,
    early_stop: bool,
    parallel: Option<usize>,
) -> PyResult<String> {
    let inst = instance(instance_json)?;
    let cfg = SolverConfig {
        alpha: parse_rational(alpha).map_err(py_err)?,
        seed,
        parallelism: parallel,
        early_stop,
        radius: radius.map(length).transpose()?,
        timing: false,
    };
    let report = py.detach(|| run_solver(&inst, &cfg)).map_err(py_err)?;
    to_json(&report)
}

/// Coverage report for a solution JSON `{"centers": [...], "radius": "..."}`.
#[pyfunction]
fn verify(instance_json: &str, solution_json: &str) -> PyResult<String> {
    let inst = instance(instance_json)?;
    let sol: SolutionJson = serde_json::from_str(solution_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let sol = sol.into_solution(&inst).map_err(py_err)?;
    to_json(&model::verify(&inst, &sol).map_err(py_err)?)
}

/// Exact optimum by enumeration.
#[pyfunction]
fn oracle(py: Python<'_>, instance_json: &str) -> PyResult<String> {
    let inst = instance(instance_json)?;
    to_json(&py.detach(|| brute::brute_force_optimum(&inst)).map_err(py_err)?)
}

/// Pseudo-approximation at radius guess `rho`; `None` if the LP is infeasible.
#[pyfunction]
fn pseudo_approximate(instance_json: &str, budget: usize, rho: &str) -> PyResult<Option<String>> {
    let inst = instance(instance_json)?;
    let sol = pseudo::pseudo_approximate(&inst, budget, &length(rho)?).map_err(py_err)?;
    sol.map(|s| to_json(&s)).transpose()
}

#[pyfunction]
fn candidate_radii(instance_json: &str) -> PyResult<Vec<String>> {
    Ok(model::candidate_radii(&instance(instance_json)?).iter().map(|r| r.to_string()).collect())
}

#[pyfunction]
fn approximation_factor(alpha: &str) -> PyResult<String> {
    Ok(format_rational(&factor(&parse_rational(alpha).map_err(py_err)?)))
}

#[pyfunction]
#[pyo3(signature = (scale = "1"))]
fn gen_example_2_5(scale: &str) -> PyResult<String> {
    let inst = generate::gen_example_2_5(&parse_rational(scale).map_err(py_err)?).map_err(py_err)?;
    to_json(&inst.to_json())
}

#[pyfunction]
#[pyo3(signature = (n, k, colors = 2, seed = 0, metric = false))]
fn gen_random(n: usize, k: usize, colors: usize, seed: u64, metric: bool) -> PyResult<String> {
    let inst = if metric {
        generate::gen_random_metric(n, k, colors, seed)
    } else {
        generate::gen_random_planar(n, k, colors, seed)
    }
    .map_err(py_err)?;
    to_json(&inst.to_json())
}

/// Planted separated instance; returns `(instance_json, planted_centers, rho)`.
#[pyfunction]
#[pyo3(signature = (n, k, colors = 2, alpha = "8.25", rho = "1", outliers = 0, seed = 0))]
fn gen_separated(
    n: usize,
    k: usize,
    colors: usize,
    alpha: &str,
    rho: &str,
    outliers: usize,
    seed: u64,
) -> PyResult<(String, Vec<usize>, String)> {
    let params = generate::SeparatedParams {
        n,
        k,
        colors,
        alpha: parse_rational(alpha).map_err(py_err)?,
        rho: parse_rational(rho).map_err(py_err)?,
        outliers,
        seed,
    };
    let (inst, planted) = generate::gen_separated(&params).map_err(py_err)?;
    Ok((to_json(&inst.to_json())?, planted.centers, planted.rho.to_string()))
}

fn graph(text: &str) -> PyResult<WeightedGraph> {
    WeightedGraph::from_json(text).map_err(py_err)
}

/// Weight vectors achieved by perfect matchings of the graph JSON.
#[pyfunction]
#[pyo3(signature = (graph_json, bounds = None, seed = 0))]
fn match_support(graph_json: &str, bounds: Option<Vec<usize>>, seed: u64) -> PyResult<Vec<Vec<usize>>> {
    let g = graph(graph_json)?;
    let bounds = bounds.unwrap_or_else(|| matching_weight_bounds(&g));
    Ok(matching::support(&g, &bounds, seed).map_err(py_err)?.achievable())
}

/// Edge indices of a perfect matching with exactly `target` weight, or `None`.
#[pyfunction]
#[pyo3(signature = (graph_json, target, bounds = None, seed = 0))]
fn match_recover(
    graph_json: &str,
    target: Vec<usize>,
    bounds: Option<Vec<usize>>,
    seed: u64,
) -> PyResult<Option<Vec<usize>>> {
    let g = graph(graph_json)?;
    let bounds = bounds.unwrap_or_else(|| matching_weight_bounds(&g));
    matching::recover(&g, &bounds, &target, seed).map_err(py_err)
}

#[pymodule]
#[pyo3(name = "colorful_kcenter")]
fn colorful_kcenter_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(oracle, m)?)?;
    m.add_function(wrap_pyfunction!(pseudo_approximate, m)?)?;
    m.add_function(wrap_pyfunction!(candidate_radii, m)?)?;
    m.add_function(wrap_pyfunction!(approximation_factor, m)?)?;
    m.add_function(wrap_pyfunction!(gen_example_2_5, m)?)?;
    m.add_function(wrap_pyfunction!(gen_random, m)?)?;
    m.add_function(wrap_pyfunction!(gen_separated, m)?)?;
    m.add_function(wrap_pyfunction!(match_support, m)?)?;
    m.add_function(wrap_pyfunction!(match_recover, m)?)?;
    Ok(())
}
