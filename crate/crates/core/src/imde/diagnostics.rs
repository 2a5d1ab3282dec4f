//! Constructive constants of the truncation error analysis.

use serde::Serialize;

use crate::integrators::ButcherTableau;

/// Method constants and the truncation index chosen for a step size.
///
/// The analytic-radius bound is `h_0 = b_1 r / m` with `b_1 = 1 / (4 kappa)`
/// and the contraction constant is `b_2 = 2 mu`. The selected index is the
/// largest `K` with `zeta (K - p + 2)^q h m / (eta r) <= e^{-q}`. The same
/// inequality with `b_1 r` in place of `eta r` is reported as `k_with_b1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TruncationDiagnostics {
    pub mu: f64,
    pub kappa: f64,
    pub h0: f64,
    pub b1: f64,
    pub b2: f64,
    pub eta: f64,
    pub zeta: f64,
    pub q: f64,
    /// Selected truncation index, floored at `p - 1`.
    pub k_of_h: i64,
    /// Set when no `K >= p` satisfies the inequality.
    pub no_valid_k: bool,
    /// The index from the `b_1 r` form; `None` when `b_1` is unbounded (`kappa = 0`).
    pub k_with_b1: Option<i64>,
}

fn largest_k(scale: f64, zeta: f64, q: f64, h: f64, m: f64, p: usize) -> f64 {
    // zeta (K - p + 2)^q h m / scale <= e^{-q}  <=>  K - p + 2 <= (scale / (zeta h m))^{1/q} / e
    (scale / (zeta * h * m)).powf(1.0 / q) / std::f64::consts::E + p as f64 - 2.0
}

pub fn truncation_diagnostics(tab: &ButcherTableau, m: f64, r: f64, h: f64, p: usize) -> TruncationDiagnostics {
    let mu: f64 = tab.b.iter().map(|b| b.abs()).sum();
    let kappa = tab.a.iter().map(|row| row.iter().map(|a| a.abs()).sum::<f64>()).fold(0.0, f64::max);
    let (h0, b1) =
        if kappa == 0.0 { (f64::INFINITY, f64::INFINITY) } else { (r / (4.0 * kappa * m), 1.0 / (4.0 * kappa)) };
    let b2 = 2.0 * mu;
    let eta = f64::max(6.0, (b2 + 1.0) / 29.0 + 1.0);
    let zeta = 10.0 * (eta - 1.0);
    let q = -(2.0 * b2).ln() / 0.912f64.ln();
    let raw = largest_k(eta * r, zeta, q, h, m, p).floor() as i64;
    let no_valid_k = raw < p as i64;
    let k_of_h = if no_valid_k { p as i64 - 1 } else { raw };
    let k_with_b1 = b1.is_finite().then(|| largest_k(b1 * r, zeta, q, h, m, p).floor() as i64);
    TruncationDiagnostics { mu, kappa, h0, b1, b2, eta, zeta, q, k_of_h, no_valid_k, k_with_b1 }
}
