//! Named benchmark systems.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use serde::Serialize;

use crate::algebra::{FieldExpr, HamiltonianField, VectorField};
use crate::error::{Error, Result};

/// An axis-aligned sampling box.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Domain {
    pub name: String,
    pub bounds: Vec<(f64, f64)>,
}

impl Domain {
    pub fn new(name: &str, bounds: Vec<(f64, f64)>) -> Self {
        Self { name: name.to_string(), bounds }
    }

    pub fn volume(&self) -> f64 {
        self.bounds.iter().map(|(lo, hi)| hi - lo).product()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(&self.bounds).all(|(v, (lo, hi))| v >= lo && v <= hi)
    }

    /// Intersection of two boxes, if nonempty.
    pub fn overlap(&self, other: &Domain) -> Option<Domain> {
        let bounds: Vec<(f64, f64)> =
            self.bounds.iter().zip(&other.bounds).map(|(a, b)| (a.0.max(b.0), a.1.min(b.1))).collect();
        bounds.iter().all(|(lo, hi)| lo < hi).then(|| Domain::new(&format!("{}&{}", self.name, other.name), bounds))
    }
}

/// The vector field of a problem: an expression, or the canonical field of a Hamiltonian.
#[derive(Clone, Debug)]
pub enum ProblemField {
    Expr(FieldExpr),
    Hamiltonian(HamiltonianField),
}

impl<S: crate::algebra::Scalar> VectorField<S> for ProblemField {
    fn dim(&self) -> usize {
        match self {
            ProblemField::Expr(f) => VectorField::<S>::dim(f),
            ProblemField::Hamiltonian(f) => VectorField::<S>::dim(f),
        }
    }

    fn eval(&self, y: &[S]) -> Result<Vec<S>> {
        match self {
            ProblemField::Expr(f) => VectorField::eval(f, y),
            ProblemField::Hamiltonian(f) => f.eval(y),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Problem {
    pub name: String,
    pub description: String,
    /// Where the system comes from.
    pub citation: String,
    pub params: BTreeMap<String, f64>,
    pub field: ProblemField,
    pub hamiltonian: Option<FieldExpr>,
    pub domains: Vec<Domain>,
    pub x0: Vec<f64>,
    pub data_step: f64,
    /// Trajectory length of the default flow data.
    pub horizon: f64,
}

impl Problem {
    pub fn dim(&self) -> usize {
        VectorField::<f64>::dim(&self.field)
    }

    pub fn domain(&self) -> &Domain {
        &self.domains[0]
    }

    pub fn domain_named(&self, name: &str) -> Result<&Domain> {
        self.domains
            .iter()
            .find(|d| d.name == name)
            .ok_or_else(|| Error::BadParams(format!("problem {} has no domain `{name}`", self.name)))
    }

    pub fn eval(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.field.eval(y)
    }
}

pub const PROBLEM_NAMES: [&str; 6] =
    ["pendulum", "pendulum-hnn", "damped-oscillator", "lorenz", "linear", "nonuniq-ab"];

fn merge_params(name: &str, defaults: &[(&str, f64)], given: &[(String, f64)]) -> Result<BTreeMap<String, f64>> {
    let mut out: BTreeMap<String, f64> = defaults.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    for (k, v) in given {
        if !out.contains_key(k) {
            return Err(Error::BadParams(format!("problem {name} has no parameter `{k}`")));
        }
        if !v.is_finite() {
            return Err(Error::BadParams(format!("parameter `{k}` must be finite")));
        }
        out.insert(k.clone(), *v);
    }
    Ok(out)
}

fn bind(mut f: FieldExpr, params: &BTreeMap<String, f64>) -> FieldExpr {
    for (k, v) in params {
        f.bind(k, *v);
    }
    f
}

fn positive(params: &BTreeMap<String, f64>, keys: &[&str]) -> Result<()> {
    for k in keys {
        if params[*k] <= 0.0 {
            return Err(Error::BadParams(format!("parameter `{k}` must be positive")));
        }
    }
    Ok(())
}

/// Looks up a named problem, overriding default parameters.
pub fn problem(name: &str, params: &[(String, f64)]) -> Result<Problem> {
    let parse = |s: &str| FieldExpr::parse(s, None).expect("built-in field parses");
    match name {
        "pendulum" => {
            let p = merge_params(name, &[("g", 10.0), ("l", 1.0)], params)?;
            positive(&p, &["g", "l"])?;
            Ok(Problem {
                name: name.into(),
                description: "pendulum dp/dt = -(g/l) sin q, dq/dt = p (ODE-net variant)".into(),
                citation: "classical mathematical pendulum".into(),
                field: ProblemField::Expr(bind(parse("(* (- (/ g l)) (sin y2)); y1"), &p)),
                params: p,
                hamiltonian: None,
                domains: vec![Domain::new("default", vec![(-3.8, 3.8), (-1.2, 1.2)])],
                x0: vec![0.0, 1.0],
                data_step: 0.12,
                horizon: 4.0,
            })
        }
        "pendulum-hnn" => {
            let p = merge_params(name, &[("g", 1.0), ("l", 1.0)], params)?;
            positive(&p, &["g", "l"])?;
            let h = bind(FieldExpr::parse("(- (* 0.5 (pow y1 2)) (* (/ g l) (cos y2)))", Some(2))?, &p);
            Ok(Problem {
                name: name.into(),
                description: "pendulum with H = p^2/2 - (g/l) cos q (HNN variant)".into(),
                citation: "Greydanus, Dzamba and Yosinski, Hamiltonian Neural Networks (NeurIPS 2019)".into(),
                field: ProblemField::Hamiltonian(HamiltonianField::new(h.clone())?),
                params: p,
                hamiltonian: Some(h),
                domains: vec![
                    Domain::new("space1", vec![(-1.1, FRAC_PI_2), (-1.1, FRAC_PI_2)]),
                    Domain::new("space2", vec![(-FRAC_PI_2, 1.1), (-FRAC_PI_2, 1.1)]),
                ],
                x0: vec![0.0, 1.0],
                data_step: 0.1,
                horizon: 2.0 * std::f64::consts::PI,
            })
        }
        "damped-oscillator" => {
            let p = merge_params(name, &[], params)?;
            Ok(Problem {
                name: name.into(),
                description: "damped oscillator with cubic dynamics".into(),
                citation: "Brunton, Proctor and Kutz, PNAS 113 (2016) 3932".into(),
                field: ProblemField::Expr(parse(
                    "(+ (* -0.1 (pow y1 3)) (* 2 (pow y2 3))); (- (* -2 (pow y1 3)) (* 0.1 (pow y2 3)))",
                )),
                params: p,
                hamiltonian: None,
                domains: vec![Domain::new("default", vec![(-2.2, 2.2), (-2.2, 2.0)])],
                x0: vec![2.0, 0.0],
                data_step: 0.04,
                horizon: 10.0,
            })
        }
        "lorenz" => {
            let p = merge_params(name, &[], params)?;
            Ok(Problem {
                name: name.into(),
                description: "rescaled Lorenz system".into(),
                citation:
                    "Lorenz, J. Atmos. Sci. 20 (1963) 130; rescaled as in Raissi, Perdikaris and Karniadakis (2018)"
                        .into(),
                field: ProblemField::Expr(parse(
                    "(* 10 (- y2 y1)); (- (* y1 (- 28 (* 10 y3))) y2); (- (* 10 (* y1 y2)) (* (/ 8 3) y3))",
                )),
                params: p,
                hamiltonian: None,
                domains: vec![Domain::new("default", vec![(-2.5, 2.5), (-3.0, 3.0), (0.0, 5.0)])],
                x0: vec![-0.8, 0.7, 2.6],
                data_step: 0.04,
                horizon: 10.0,
            })
        }
        "linear" => {
            let p = merge_params(name, &[("lambda", 1.0)], params)?;
            Ok(Problem {
                name: name.into(),
                description: "scalar linear dy/dt = lambda y".into(),
                citation: "Dahlquist linear test equation".into(),
                field: ProblemField::Expr(bind(parse("(* lambda y1)"), &p)),
                params: p,
                hamiltonian: None,
                domains: vec![Domain::new("default", vec![(-2.0, 2.0)])],
                x0: vec![1.0],
                data_step: 0.1,
                horizon: 1.0,
            })
        }
        "nonuniq-ab" => {
            let p = merge_params(name, &[("a", 1.0), ("b", 0.0)], params)?;
            if p["a"] == 0.0 {
                return Err(Error::BadParams("parameter `a` must be nonzero".into()));
            }
            Ok(Problem {
                name: name.into(),
                description: "dp/dt = a, dq/dt = sin(p + b): same period-2pi/a flow for every b".into(),
                citation: "two-parameter family whose flows coincide for every b".into(),
                field: ProblemField::Expr(bind(parse("a; (sin (+ y1 b))"), &p)),
                params: p.clone(),
                hamiltonian: None,
                domains: vec![Domain::new("default", vec![(-3.0, 3.0), (-3.0, 3.0)])],
                x0: vec![0.0, 0.0],
                data_step: 0.1,
                horizon: 2.0 * std::f64::consts::PI / p["a"],
            })
        }
        other => Err(Error::UnknownProblem(other.to_string())),
    }
}

/// Problem with default parameters.
pub fn named(name: &str) -> Result<Problem> {
    problem(name, &[])
}
