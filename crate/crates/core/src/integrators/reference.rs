//! High-order Taylor-series integration used as ground truth.

use crate::algebra::flow::{eval_expansion, flow_taylor};
use crate::algebra::{Jet, VectorField};
use crate::error::{Error, Result};

pub const REFERENCE_ORDER: usize = 20;
pub const DEFAULT_TOL: f64 = 1e-13;
pub const MIN_STEP: f64 = 1e-12;

/// Step from the decay of the last two Taylor coefficients.
fn step_size(c: &[Vec<f64>], tol: f64) -> f64 {
    let k = c.len() - 1;
    [k - 1, k]
        .iter()
        .map(|&j| {
            let norm = c[j].iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if norm == 0.0 {
                f64::INFINITY
            } else {
                (tol / norm).powf(1.0 / j as f64)
            }
        })
        .fold(f64::INFINITY, f64::min)
}

/// `phi_t(x)` by adaptive order-20 Taylor steps with local tolerance `tol`.
pub fn reference_flow<F: VectorField<Jet<f64>> + ?Sized>(f: &F, x: &[f64], t: f64, tol: f64) -> Result<Vec<f64>> {
    if !t.is_finite() {
        return Err(Error::BadParams(format!("time {t} is not finite")));
    }
    let mut y = x.to_vec();
    let dir = t.signum();
    let mut remaining = t.abs();
    while remaining > 0.0 {
        let c = flow_taylor(f, &y, REFERENCE_ORDER)?;
        let mut h = step_size(&c, tol);
        if h >= remaining {
            h = remaining;
        } else if h < MIN_STEP {
            return Err(Error::StepUnderflow { step: h });
        }
        y = eval_expansion(&c, dir * h);
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::StepUnderflow { step: h });
        }
        remaining -= h;
        if remaining < 1e-15 * t.abs() {
            remaining = 0.0;
        }
    }
    Ok(y)
}

/// Points `phi_{i dt}(x)` for `i = 0..=n`, chained from one mesh point to the next.
pub fn reference_trajectory<F: VectorField<Jet<f64>> + ?Sized>(
    f: &F,
    x: &[f64],
    dt: f64,
    n: usize,
    tol: f64,
) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(x.to_vec());
    for i in 0..n {
        let next = reference_flow(f, &out[i], dt, tol)?;
        out.push(next);
    }
    Ok(out)
}
