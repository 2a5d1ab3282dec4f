use super::dataset::sample_box;
use super::parallel::par_map;
use crate::algebra::{Jet, VectorField};
use crate::bench::Domain;
use crate::error::{Error, Result};
use crate::imde::{closed_form_coefficients, ExpandableField, ImdeField, ImdeMethod};
use crate::integrators::{reference_trajectory, DEFAULT_TOL};

pub const MIN_POINTS_PER_UNIT_TIME: usize = 2000;
pub const MIN_DOMAIN_SAMPLES: usize = 100_000;

/// Points at which two fields are compared, with the quadrature that turns
/// pointwise sup-norm differences into the error `E`.
#[derive(Clone, Debug, PartialEq)]
pub enum Probe {
    /// Mesh of a reference trajectory, integrated by the trapezoid rule.
    Flow { points: Vec<Vec<f64>>, dt: f64 },
    /// Uniform samples in a box: sample mean times the box volume.
    Domain { points: Vec<Vec<f64>>, volume: f64 },
}

impl Probe {
    /// Trajectory mesh of `x_0` on `[0, horizon]` with `per_unit` points per unit time.
    pub fn flow<F: VectorField<Jet<f64>> + ?Sized>(f: &F, x0: &[f64], horizon: f64, per_unit: usize) -> Result<Self> {
        let n = ((horizon * per_unit as f64).ceil() as usize).max(1);
        let dt = horizon / n as f64;
        Ok(Probe::Flow { points: reference_trajectory(f, x0, dt, n, DEFAULT_TOL)?, dt })
    }

    pub fn domain(domain: &Domain, count: usize, seed: u64) -> Self {
        Probe::Domain { points: sample_box(domain, count, seed), volume: domain.volume() }
    }

    pub fn points(&self) -> &[Vec<f64>] {
        match self {
            Probe::Flow { points, .. } | Probe::Domain { points, .. } => points,
        }
    }

    /// Quadrature of pointwise values, summed in point order.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        match self {
            Probe::Flow { dt, .. } => {
                let n = values.len();
                if n < 2 {
                    return 0.0;
                }
                let inner: f64 = values[1..n - 1].iter().sum();
                dt * (inner + 0.5 * (values[0] + values[n - 1]))
            }
            Probe::Domain { volume, .. } => {
                if values.is_empty() {
                    return 0.0;
                }
                volume * values.iter().sum::<f64>() / values.len() as f64
            }
        }
    }
}

/// Values of `g` at every probe point, evaluated in parallel.
pub fn evaluate_on<G>(g: G, probe: &Probe) -> Result<Vec<Vec<f64>>>
where
    G: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
{
    par_map(probe.points(), |x| g(x)).into_iter().collect()
}

fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// `E` from precomputed values of both fields.
pub fn error_between(a: &[Vec<f64>], b: &[Vec<f64>], probe: &Probe) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(u, v)| sup_distance(u, v)).collect();
    probe.integrate(&d)
}

/// `E(g, g_hat)`: integral of `|g - g_hat|_inf` over the probe.
pub fn error_metric<G, H>(g: G, g_hat: H, probe: &Probe) -> Result<f64>
where
    G: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
    H: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
{
    let a = evaluate_on(g, probe)?;
    let b = evaluate_on(g_hat, probe)?;
    Ok(error_between(&a, &b, probe))
}

/// `log2(E(2h) / E(h))`.
pub fn convergence_order(e_2h: f64, e_h: f64) -> Result<f64> {
    if !(e_2h > 0.0 && e_h > 0.0) || !e_2h.is_finite() || !e_h.is_finite() {
        return Err(Error::NonPositiveError(e_2h, e_h));
    }
    Ok((e_2h / e_h).log2())
}

/// IMDE coefficients `f_0..=f_K` at every probe point. The closed
/// forms are used where they exist (`K <= 3`, Euler-type and midpoint
/// methods), the generic engine otherwise.
pub fn imde_coefficients_on<F: ExpandableField + Sync>(
    f: &F,
    method: &ImdeMethod,
    k: usize,
    probe: &Probe,
) -> Result<Vec<Vec<Vec<f64>>>> {
    // Composing S steps leaves the coefficients in powers of h unchanged.
    let one_step = match method {
        ImdeMethod::OneStep { method, .. } => Some(method),
        ImdeMethod::Multistep(_) => None,
    };
    let id = one_step.and_then(|m| match m.name() {
        "euler" | "explicit-euler" => Some("euler"),
        "implicit-euler" => Some("implicit-euler"),
        "explicit-midpoint" | "midpoint" => Some("midpoint"),
        _ => None,
    });
    match id {
        Some(id) if k <= 3 => par_map(probe.points(), |x| {
            let mut fs = closed_form_coefficients(id, f, x)?;
            fs.truncate(k + 1);
            Ok(fs)
        })
        .into_iter()
        .collect(),
        _ => {
            let method = match one_step {
                Some(m) => ImdeMethod::one_step(m.clone()),
                None => method.clone(),
            };
            let imde = ImdeField::new(f, method, k)?;
            par_map(probe.points(), |x| imde.coefficients(x, k)).into_iter().collect()
        }
    }
}

/// `f_h^K = sum_k h^k f_k` at every point from precomputed coefficients.
pub fn truncated_values(coeffs: &[Vec<Vec<f64>>], h: f64) -> Vec<Vec<f64>> {
    coeffs
        .iter()
        .map(|fs| {
            let n = fs[0].len();
            (0..n).map(|i| fs.iter().rev().fold(0.0, |acc, fk| acc * h + fk[i])).collect()
        })
        .collect()
}
