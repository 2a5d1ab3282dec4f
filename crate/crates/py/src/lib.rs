//! Python bindings for `imdelab`: benchmark fields, integrator steps, IMDE
//! coefficients, truncation diagnostics, and single training runs.

use std::collections::HashMap;

use imdelab::bench;
use imdelab::cli::{exit_code, resolve_method, run_experiment, ExperimentConfig, KvConfig, EXIT_USAGE};
use imdelab::discovery::convergence_order as order_between;
use imdelab::error::Error;
use imdelab::imde::{
    closed_form_imde, hamiltonicity_defect as defect_of, truncation_diagnostics as diagnostics, ImdeField,
};
use imdelab::integrators::{compose, ButcherTableau, Method};
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn py_err(e: Error) -> PyErr {
    if exit_code(&e) == EXIT_USAGE {
        PyValueError::new_err(e.to_string())
    } else {
        PyArithmeticError::new_err(e.to_string())
    }
}

fn load(problem: &str, params: Option<HashMap<String, f64>>) -> PyResult<bench::Problem> {
    let mut params: Vec<(String, f64)> = params.unwrap_or_default().into_iter().collect();
    params.sort_by(|a, b| a.0.cmp(&b.0));
    bench::problem(problem, &params).map_err(py_err)
}

/// Names of the benchmark problems.
#[pyfunction]
fn problems() -> Vec<&'static str> {
    bench::PROBLEM_NAMES.to_vec()
}

/// Default initial point of a problem.
#[pyfunction]
#[pyo3(signature = (problem, params=None))]
fn initial_point(problem: &str, params: Option<HashMap<String, f64>>) -> PyResult<Vec<f64>> {
    Ok(load(problem, params)?.x0)
}

/// The problem's vector field at `x`.
#[pyfunction]
#[pyo3(signature = (problem, x, params=None))]
fn field(problem: &str, x: Vec<f64>, params: Option<HashMap<String, f64>>) -> PyResult<Vec<f64>> {
    load(problem, params)?.eval(&x).map_err(py_err)
}

/// `steps` applications of a one-step method with step `h`.
#[pyfunction]
#[pyo3(signature = (problem, method, x, h, steps=1, params=None))]
fn integrate(
    problem: &str,
    method: &str,
    x: Vec<f64>,
    h: f64,
    steps: usize,
    params: Option<HashMap<String, f64>>,
) -> PyResult<Vec<f64>> {
    let p = load(problem, params)?;
    let m = Method::named(method).map_err(py_err)?;
    compose(&m, &p.field, &x, &h, steps).map_err(py_err)
}

/// IMDE coefficients `f_0..f_k` at `x`. `method` names a Runge-Kutta tableau,
/// `symplectic-euler`, or a multistep scheme.
#[pyfunction]
#[pyo3(signature = (problem, method, x, k, compositions=1, params=None))]
fn imde_coefficients(
    problem: &str,
    method: &str,
    x: Vec<f64>,
    k: usize,
    compositions: usize,
    params: Option<HashMap<String, f64>>,
) -> PyResult<Vec<Vec<f64>>> {
    let p = load(problem, params)?;
    let (m, _) = resolve_method(method, compositions).map_err(py_err)?;
    ImdeField::new(&p.field, m, k).and_then(|imde| imde.coefficients(&x, k)).map_err(py_err)
}

/// `sum_{j <= k} h^j f_j(x)`.
#[pyfunction]
#[pyo3(signature = (problem, method, x, h, k, compositions=1, params=None))]
fn imde_truncated(
    problem: &str,
    method: &str,
    x: Vec<f64>,
    h: f64,
    k: usize,
    compositions: usize,
    params: Option<HashMap<String, f64>>,
) -> PyResult<Vec<f64>> {
    let p = load(problem, params)?;
    let (m, _) = resolve_method(method, compositions).map_err(py_err)?;
    ImdeField::new(&p.field, m, k).and_then(|imde| imde.truncated_eval(&x, h)).map_err(py_err)
}

/// Closed-form truncations. For `symplectic-euler` the problem must
/// be Hamiltonian and the single entry is the truncated Hamiltonian.
#[pyfunction]
#[pyo3(signature = (problem, method, x, h, params=None))]
fn closed_form(
    problem: &str,
    method: &str,
    x: Vec<f64>,
    h: f64,
    params: Option<HashMap<String, f64>>,
) -> PyResult<Vec<f64>> {
    let p = load(problem, params)?;
    let expr = match (method, &p.hamiltonian, &p.field) {
        ("symplectic-euler", Some(h_expr), _) => h_expr.clone(),
        ("symplectic-euler", None, _) => {
            return Err(PyValueError::new_err(format!("{problem} has no Hamiltonian")));
        }
        (_, _, bench::ProblemField::Expr(f)) => f.clone(),
        (_, _, bench::ProblemField::Hamiltonian(_)) => {
            return Err(PyValueError::new_err(format!(
                "{method} closed forms need an expression field; {problem} is Hamiltonian"
            )));
        }
    };
    closed_form_imde(method, &expr, &x, h).map_err(py_err)
}

/// Largest symmetry defect of the Jacobian of `J f_j` over `points`, for
/// each coefficient `f_1..f_k`.
#[pyfunction]
#[pyo3(signature = (problem, method, k, points, compositions=1, params=None))]
fn hamiltonicity_defects(
    problem: &str,
    method: &str,
    k: usize,
    points: Vec<Vec<f64>>,
    compositions: usize,
    params: Option<HashMap<String, f64>>,
) -> PyResult<Vec<f64>> {
    let p = load(problem, params)?;
    let (m, _) = resolve_method(method, compositions).map_err(py_err)?;
    let imde = ImdeField::new(&p.field, m, k).map_err(py_err)?;
    (1..=k).map(|j| defect_of(&imde.coefficient_field(j), &points).map_err(py_err)).collect()
}

/// Truncation constants of a tableau for field bound `m`, radius `r` and step `h`.
#[pyfunction]
#[pyo3(signature = (tableau, m, r, h, order=None))]
fn truncation_diagnostics<'py>(
    py: Python<'py>,
    tableau: &str,
    m: f64,
    r: f64,
    h: f64,
    order: Option<usize>,
) -> PyResult<Bound<'py, PyDict>> {
    let tab = ButcherTableau::named(tableau).map_err(py_err)?;
    let p = order.unwrap_or(tab.order);
    let d = diagnostics(&tab, m, r, h, p);
    let out = PyDict::new(py);
    out.set_item("mu", d.mu)?;
    out.set_item("kappa", d.kappa)?;
    out.set_item("h0", d.h0)?;
    out.set_item("b1", d.b1)?;
    out.set_item("b2", d.b2)?;
    out.set_item("eta", d.eta)?;
    out.set_item("zeta", d.zeta)?;
    out.set_item("q", d.q)?;
    out.set_item("k_of_h", d.k_of_h)?;
    out.set_item("no_valid_k", d.no_valid_k)?;
    out.set_item("k_with_b1", d.k_with_b1)?;
    Ok(out)
}

/// `log2(e_2h / e_h)`.
#[pyfunction]
fn convergence_order(e_2h: f64, e_h: f64) -> PyResult<f64> {
    order_between(e_2h, e_h).map_err(py_err)
}

/// Trains and evaluates one configuration given as `key -> value` pairs in
/// the config-file vocabulary. Returns the report row plus the loss curve.
#[pyfunction]
fn train<'py>(py: Python<'py>, config: HashMap<String, String>) -> PyResult<Bound<'py, PyDict>> {
    let mut kv = KvConfig::new();
    let mut keys: Vec<_> = config.into_iter().collect();
    keys.sort();
    for (k, v) in keys {
        kv.set(&k, v).map_err(py_err)?;
    }
    let cfg = ExperimentConfig::from_kv(&kv).map_err(py_err)?;
    let outcome = py.detach(|| run_experiment(&cfg)).map_err(py_err)?;
    let r = outcome.report;
    let out = PyDict::new(py);
    out.set_item("run_id", r.run_id)?;
    out.set_item("model", r.model)?;
    out.set_item("method", r.method)?;
    out.set_item("T", r.t)?;
    out.set_item("S", r.s)?;
    out.set_item("h", r.h)?;
    out.set_item("train_loss", r.train_loss)?;
    out.set_item("test_loss", r.test_loss)?;
    out.set_item("E_net_vs_f", r.e_net_vs_f)?;
    out.set_item("E_net_vs_imdeK", r.e_net_vs_imde)?;
    out.set_item("E_f_vs_imdeK", outcome.e_f_vs_imde)?;
    out.set_item("status", r.status)?;
    out.set_item("curve", outcome.curve)?;
    out.set_item("params", outcome.net.params())?;
    Ok(out)
}

#[pymodule]
fn imdelab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(problems, m)?)?;
    m.add_function(wrap_pyfunction!(initial_point, m)?)?;
    m.add_function(wrap_pyfunction!(field, m)?)?;
    m.add_function(wrap_pyfunction!(integrate, m)?)?;
    m.add_function(wrap_pyfunction!(imde_coefficients, m)?)?;
    m.add_function(wrap_pyfunction!(imde_truncated, m)?)?;
    m.add_function(wrap_pyfunction!(closed_form, m)?)?;
    m.add_function(wrap_pyfunction!(hamiltonicity_defects, m)?)?;
    m.add_function(wrap_pyfunction!(truncation_diagnostics, m)?)?;
    m.add_function(wrap_pyfunction!(convergence_order, m)?)?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    Ok(())
}
