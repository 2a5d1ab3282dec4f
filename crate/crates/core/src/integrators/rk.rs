use serde::{Deserialize, Serialize};

use super::tableau::ButcherTableau;
use crate::algebra::scalar::{axpy, max_magnitude, weighted_sum, Scalar};
use crate::algebra::{FieldExpr, HamiltonianField, VectorField};
use crate::error::{Error, Result};

/// Tolerance of plain-number fixed-point solves, relative to the stage scale.
pub const FIXED_POINT_TOL: f64 = 1e-14;
pub const FIXED_POINT_MAX_SWEEPS: usize = 100;

/// A one-step map: a Runge-Kutta tableau or the symplectic Euler scheme.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Method {
    Rk(ButcherTableau),
    SymplecticEuler,
}

impl Method {
    pub fn named(id: &str) -> Result<Self> {
        match id {
            "symplectic-euler" => Ok(Method::SymplecticEuler),
            other => ButcherTableau::named(other).map(Method::Rk),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Method::Rk(t) => &t.name,
            Method::SymplecticEuler => "symplectic-euler",
        }
    }

    pub fn order(&self) -> usize {
        match self {
            Method::Rk(t) => t.order,
            Method::SymplecticEuler => 1,
        }
    }

    pub fn step<S: Scalar, F: VectorField<S> + ?Sized>(&self, f: &F, y0: &[S], h: &S) -> Result<Vec<S>> {
        match self {
            Method::Rk(t) => rk_step(t, f, y0, h),
            Method::SymplecticEuler => symplectic_euler_field_step(f, y0, h),
        }
    }
}

/// Step size `h`, composition count `S`, and the data step `T = S h`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverSpec {
    pub method: Method,
    pub h: f64,
    pub steps: usize,
}

impl SolverSpec {
    pub fn new(method: Method, h: f64, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::BadParams("composition count must be at least 1".into()));
        }
        if !h.is_finite() {
            return Err(Error::BadParams(format!("step {h} is not finite")));
        }
        Ok(Self { method, h, steps })
    }

    /// `S` steps covering a data step `T`.
    pub fn for_data_step(method: Method, t: f64, steps: usize) -> Result<Self> {
        Self::new(method, t / steps as f64, steps)
    }

    pub fn data_step(&self) -> f64 {
        self.h * self.steps as f64
    }
}

fn sweep_budget<S: Scalar>(h: &S) -> Option<usize> {
    h.series_order().map(|k| k + 2)
}

fn stage_point<S: Scalar>(y0: &[S], h: &S, row: &[f64], k: &[Vec<S>]) -> Vec<S> {
    let n = y0.len();
    if row.iter().all(|&a| a == 0.0) {
        return y0.to_vec();
    }
    (0..n)
        .map(|i| {
            let comps: Vec<S> = k.iter().map(|ki| ki[i].clone()).collect();
            let incr = weighted_sum(row, &comps).expect("nonzero row");
            y0[i].clone() + h.clone() * incr
        })
        .collect()
}

/// One Runge-Kutta step `y_1 = y_0 + h sum_i b_i k_i`.
///
/// Explicit tableaus are solved by forward substitution. Implicit stages are
/// iterated from `k_i = f(y_0)`: exactly `K + 2` sweeps when `h` is a series
/// of order `K`, otherwise until the update falls below `1e-14` of the stage
/// scale.
pub fn rk_step<S: Scalar, F: VectorField<S> + ?Sized>(tab: &ButcherTableau, f: &F, y0: &[S], h: &S) -> Result<Vec<S>> {
    let s = tab.stages();
    let k = if tab.is_explicit() {
        let mut k: Vec<Vec<S>> = Vec::with_capacity(s);
        for i in 0..s {
            let yi = stage_point(y0, h, &tab.a[i][..i], &k);
            k.push(f.eval(&yi)?);
        }
        k
    } else {
        let f0 = f.eval(y0)?;
        let mut k: Vec<Vec<S>> = vec![f0; s];
        let budget = sweep_budget(h);
        let max = budget.unwrap_or(FIXED_POINT_MAX_SWEEPS);
        let mut converged = false;
        let mut residual = f64::INFINITY;
        for _ in 0..max {
            let mut next = Vec::with_capacity(s);
            for i in 0..s {
                let yi = stage_point(y0, h, &tab.a[i], &k);
                next.push(f.eval(&yi)?);
            }
            if budget.is_none() {
                let scale = k.iter().map(|v| max_magnitude(v)).fold(1.0, f64::max);
                residual = next
                    .iter()
                    .zip(&k)
                    .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x.clone() - y.clone()).magnitude()).fold(0.0, f64::max))
                    .fold(0.0, f64::max);
                k = next;
                if residual <= FIXED_POINT_TOL * scale {
                    converged = true;
                    break;
                }
            } else {
                k = next;
            }
        }
        if budget.is_none() && !converged {
            return Err(Error::NoConvergence { iterations: max, residual });
        }
        k
    };
    let n = y0.len();
    Ok((0..n)
        .map(|i| {
            let comps: Vec<S> = k.iter().map(|ki| ki[i].clone()).collect();
            match weighted_sum(&tab.b, &comps) {
                Some(incr) => y0[i].clone() + h.clone() * incr,
                None => y0[i].clone(),
            }
        })
        .collect())
}

/// Symplectic Euler for a field split as `f = (f_p, f_q)` on `y = (p, q)`:
/// `p' = p + h f_p(p', q)`, `q' = q + h f_q(p', q)`.
///
/// For `f = J^{-1} grad H` this is `p' = p - h H_q(p', q)`, `q' = q + h H_p(p', q)`.
pub fn symplectic_euler_field_step<S: Scalar, F: VectorField<S> + ?Sized>(f: &F, y0: &[S], h: &S) -> Result<Vec<S>> {
    let n = y0.len();
    if !n.is_multiple_of(2) {
        return Err(Error::OddDimension(n));
    }
    let d = n / 2;
    let budget = sweep_budget(h);
    let max = budget.unwrap_or(FIXED_POINT_MAX_SWEEPS);
    let mut point = y0.to_vec();
    let mut v = f.eval(&point)?;
    let mut residual = f64::INFINITY;
    let mut converged = false;
    for _ in 0..max {
        let p_next = axpy(&y0[..d], h, &v[..d]);
        let change =
            p_next.iter().zip(&point[..d]).map(|(a, b)| (a.clone() - b.clone()).magnitude()).fold(0.0, f64::max);
        let scale = max_magnitude(&p_next).max(1.0);
        point[..d].clone_from_slice(&p_next);
        v = f.eval(&point)?;
        if budget.is_none() {
            residual = change;
            if change <= FIXED_POINT_TOL * scale {
                converged = true;
                break;
            }
        }
    }
    if budget.is_none() && !converged {
        return Err(Error::NoConvergence { iterations: max, residual });
    }
    let q_next = axpy(&y0[d..], h, &v[d..]);
    point[d..].clone_from_slice(&q_next);
    Ok(point)
}

/// Symplectic Euler on the Hamiltonian `H(p, q)`.
pub fn symplectic_euler_step<S: Scalar>(h_expr: &FieldExpr, y0: &[S], h: &S) -> Result<Vec<S>> {
    let f = HamiltonianField::new(h_expr.clone())?;
    symplectic_euler_field_step(&f, y0, h)
}

/// `spec.steps`-fold composition of `spec.method` with step `spec.h`.
pub fn ode_solve<S: Scalar, F: VectorField<S> + ?Sized>(spec: &SolverSpec, f: &F, x: &[S]) -> Result<Vec<S>> {
    let h = S::from_f64(spec.h);
    compose(&spec.method, f, x, &h, spec.steps)
}

/// `steps`-fold composition with a step over the algebra.
pub fn compose<S: Scalar, F: VectorField<S> + ?Sized>(
    method: &Method,
    f: &F,
    x: &[S],
    h: &S,
    steps: usize,
) -> Result<Vec<S>> {
    if x.len() != f.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), got: x.len() });
    }
    let mut y = x.to_vec();
    for _ in 0..steps {
        y = method.step(f, &y, h)?;
    }
    Ok(y)
}
