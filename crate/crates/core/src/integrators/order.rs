use super::reference::{reference_flow, DEFAULT_TOL};
use super::rk::Method;
use crate::algebra::FieldExpr;
use crate::error::{Error, Result};

/// One-step errors below this are indistinguishable from reference noise.
pub const MIN_MEASURABLE_ERROR: f64 = 1e-13;

fn one_step_error(method: &Method, f: &FieldExpr, x: &[f64], h: f64) -> Result<f64> {
    let approx = method.step(f, x, &h)?;
    let exact = reference_flow(f, x, h, DEFAULT_TOL)?;
    Ok(approx.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

/// Global order of `method` measured from one-step errors at `h` and `h / 2`.
///
/// The local error ratio is `2^{p+1}`, so the reported value is
/// `log2(e(h) / e(h/2)) - 1`, averaged over the suite.
pub fn order_estimate(method: &Method, suite: &[(FieldExpr, Vec<f64>)], h: f64) -> Result<f64> {
    if suite.is_empty() {
        return Err(Error::BadParams("empty test suite".into()));
    }
    let mut total = 0.0;
    for (f, x) in suite {
        let e1 = one_step_error(method, f, x, h)?;
        let e2 = one_step_error(method, f, x, h / 2.0)?;
        if e1 < MIN_MEASURABLE_ERROR || e2 < MIN_MEASURABLE_ERROR {
            return Err(Error::DegenerateError(e1.min(e2)));
        }
        total += (e1 / e2).log2() - 1.0;
    }
    Ok(total / suite.len() as f64)
}

/// Smooth two-dimensional fields and start points shared by the order checks.
pub fn default_suite() -> Vec<(FieldExpr, Vec<f64>)> {
    vec![
        (FieldExpr::parse("(* -10 (sin y2)); y1", None).unwrap(), vec![0.0, 1.0]),
        (FieldExpr::parse("(- (sin y2)); y1", None).unwrap(), vec![0.3, -0.8]),
        (
            FieldExpr::parse("(- (* 2 (pow y2 3)) (* 0.1 (pow y1 3))); (- (* -2 (pow y1 3)) (* 0.1 (pow y2 3)))", None)
                .unwrap(),
            vec![1.0, 0.5],
        ),
    ]
}
