use serde::{Deserialize, Serialize};

use super::rk::{FIXED_POINT_MAX_SWEEPS, FIXED_POINT_TOL};
use crate::algebra::VectorField;
use crate::error::{Error, Result};

/// `sum_m alpha_m y_{n+m} = h sum_m beta_m f(y_{n+m})`, `m = 0..M`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LmmScheme {
    pub name: String,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

impl LmmScheme {
    /// Validates the side conditions, weak stability and consistency.
    pub fn new(name: &str, alpha: Vec<f64>, beta: Vec<f64>) -> Result<Self> {
        if alpha.len() < 2 || alpha.len() != beta.len() {
            return Err(Error::InvalidScheme(format!(
                "alpha and beta need equal length >= 2, got {} and {}",
                alpha.len(),
                beta.len()
            )));
        }
        let m = alpha.len() - 1;
        if alpha[m] == 0.0 {
            return Err(Error::InvalidScheme("alpha_M must be nonzero".into()));
        }
        if alpha[0].abs() + beta[0].abs() == 0.0 {
            return Err(Error::InvalidScheme("|alpha_0| + |beta_0| must be positive".into()));
        }
        let s = Self { name: name.to_string(), alpha, beta };
        let rho1 = s.rho_prime();
        if rho1.abs() < 1e-14 {
            return Err(Error::NotWeaklyStable);
        }
        let sum_a: f64 = s.alpha.iter().sum();
        if sum_a.abs() > 1e-12 {
            return Err(Error::NotConsistent(format!("sum alpha = {sum_a}")));
        }
        let sum_b: f64 = s.beta.iter().sum();
        if (rho1 - sum_b).abs() > 1e-12 {
            return Err(Error::NotConsistent(format!("sum m alpha_m = {rho1} but sum beta = {sum_b}")));
        }
        Ok(s)
    }

    pub fn steps(&self) -> usize {
        self.alpha.len() - 1
    }

    pub fn is_explicit(&self) -> bool {
        self.beta[self.steps()] == 0.0
    }

    /// `sum_m m alpha_m`.
    pub fn rho_prime(&self) -> f64 {
        self.alpha.iter().enumerate().map(|(m, a)| m as f64 * a).sum()
    }

    pub fn ab2() -> Self {
        Self::new("ab2", vec![0.0, -1.0, 1.0], vec![-0.5, 1.5, 0.0]).unwrap()
    }

    pub fn ab3() -> Self {
        Self::new("ab3", vec![0.0, 0.0, -1.0, 1.0], vec![5.0 / 12.0, -16.0 / 12.0, 23.0 / 12.0, 0.0]).unwrap()
    }

    pub fn trapezoidal() -> Self {
        Self::new("trapezoidal", vec![-1.0, 1.0], vec![0.5, 0.5]).unwrap()
    }

    pub fn implicit_euler() -> Self {
        Self::new("implicit-euler", vec![-1.0, 1.0], vec![0.0, 1.0]).unwrap()
    }

    pub fn explicit_euler() -> Self {
        Self::new("euler", vec![-1.0, 1.0], vec![1.0, 0.0]).unwrap()
    }

    pub fn named(id: &str) -> Result<Self> {
        match id {
            "ab2" => Ok(Self::ab2()),
            "ab3" => Ok(Self::ab3()),
            "trapezoidal" => Ok(Self::trapezoidal()),
            "implicit-euler" => Ok(Self::implicit_euler()),
            "euler" => Ok(Self::explicit_euler()),
            other => Err(Error::UnknownMethodId(other.to_string())),
        }
    }

    pub const NAMES: [&'static str; 5] = ["ab2", "ab3", "trapezoidal", "implicit-euler", "euler"];

    /// `sum_m alpha_m y_m - h sum_m beta_m f(y_m)` over a window of `M + 1` points.
    pub fn residual<F: VectorField<f64> + ?Sized>(&self, f: &F, window: &[Vec<f64>], h: f64) -> Result<Vec<f64>> {
        let n = window[0].len();
        let mut r = vec![0.0; n];
        for (m, y) in window.iter().enumerate() {
            if self.alpha[m] != 0.0 {
                for i in 0..n {
                    r[i] += self.alpha[m] * y[i];
                }
            }
            if self.beta[m] != 0.0 {
                let fy = f.eval(y)?;
                for i in 0..n {
                    r[i] -= h * self.beta[m] * fy[i];
                }
            }
        }
        Ok(r)
    }
}

/// Runs the scheme from `M` startup values, returning startup plus `n_steps` new points.
pub fn lmm_trajectory<F: VectorField<f64> + ?Sized>(
    scheme: &LmmScheme,
    f: &F,
    startup: &[Vec<f64>],
    h: f64,
    n_steps: usize,
) -> Result<Vec<Vec<f64>>> {
    let m_steps = scheme.steps();
    if startup.len() != m_steps {
        return Err(Error::DimensionMismatch { expected: m_steps, got: startup.len() });
    }
    let mut ys: Vec<Vec<f64>> = startup.to_vec();
    let a_m = scheme.alpha[m_steps];
    let b_m = scheme.beta[m_steps];
    for _ in 0..n_steps {
        let base = ys.len() - m_steps;
        let n = ys[base].len();
        // known part: h sum_{m<M} beta_m f(y_m) - sum_{m<M} alpha_m y_m
        let mut known = vec![0.0; n];
        for m in 0..m_steps {
            let y = &ys[base + m];
            if scheme.alpha[m] != 0.0 {
                for i in 0..n {
                    known[i] -= scheme.alpha[m] * y[i];
                }
            }
            if scheme.beta[m] != 0.0 {
                let fy = f.eval(y)?;
                for i in 0..n {
                    known[i] += h * scheme.beta[m] * fy[i];
                }
            }
        }
        let explicit: Vec<f64> = known.iter().map(|k| k / a_m).collect();
        let next = if b_m == 0.0 {
            explicit
        } else {
            let mut y = ys[ys.len() - 1].clone();
            let mut converged = false;
            let mut residual = f64::INFINITY;
            for _ in 0..FIXED_POINT_MAX_SWEEPS {
                let fy = f.eval(&y)?;
                let new: Vec<f64> = (0..n).map(|i| explicit[i] + h * b_m * fy[i] / a_m).collect();
                residual = new.iter().zip(&y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                let scale = new.iter().fold(1.0f64, |m, v| m.max(v.abs()));
                y = new;
                if residual <= FIXED_POINT_TOL * scale {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::NoConvergence { iterations: FIXED_POINT_MAX_SWEEPS, residual });
            }
            y
        };
        ys.push(next);
    }
    Ok(ys)
}
