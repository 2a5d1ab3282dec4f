use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients `(a, b, c)` of an `s`-stage Runge-Kutta method.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ButcherTableau {
    pub name: String,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub order: usize,
}

impl ButcherTableau {
    /// Builds a tableau with `c_i = sum_j a_ij`, rejecting ragged or inconsistent input.
    pub fn new(name: &str, a: Vec<Vec<f64>>, b: Vec<f64>, order: usize) -> Result<Self> {
        let s = b.len();
        if s == 0 {
            return Err(Error::InvalidTableau("no stages".into()));
        }
        if a.len() != s || a.iter().any(|row| row.len() != s) {
            return Err(Error::InvalidTableau(format!("a must be {s}x{s}")));
        }
        if a.iter().flatten().chain(&b).any(|v| !v.is_finite()) {
            return Err(Error::InvalidTableau("non-finite coefficient".into()));
        }
        let sum_b: f64 = b.iter().sum();
        if (sum_b - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidTableau(format!("sum of b is {sum_b}, not 1")));
        }
        if order == 0 {
            return Err(Error::InvalidTableau("declared order must be at least 1".into()));
        }
        let c = a.iter().map(|row| row.iter().sum()).collect();
        Ok(Self { name: name.to_string(), a, b, c, order })
    }

    /// Tableau from a row-major `a` array of length `s*s`.
    pub fn from_row_major(name: &str, a: &[f64], b: Vec<f64>, order: usize) -> Result<Self> {
        let s = b.len();
        if a.len() != s * s {
            return Err(Error::InvalidTableau(format!("expected {} entries in a, got {}", s * s, a.len())));
        }
        Self::new(name, a.chunks(s).map(<[f64]>::to_vec).collect(), b, order)
    }

    pub fn stages(&self) -> usize {
        self.b.len()
    }

    pub fn is_explicit(&self) -> bool {
        self.a.iter().enumerate().all(|(i, row)| row[i..].iter().all(|&v| v == 0.0))
    }

    pub fn euler() -> Self {
        Self::new("euler", vec![vec![0.0]], vec![1.0], 1).unwrap()
    }

    pub fn implicit_euler() -> Self {
        Self::new("implicit-euler", vec![vec![1.0]], vec![1.0], 1).unwrap()
    }

    pub fn explicit_midpoint() -> Self {
        Self::new("explicit-midpoint", vec![vec![0.0, 0.0], vec![0.5, 0.0]], vec![0.0, 1.0], 2).unwrap()
    }

    /// The implicit midpoint rule, used as a symmetric test method.
    pub fn implicit_midpoint() -> Self {
        Self::new("implicit-midpoint", vec![vec![0.5]], vec![1.0], 2).unwrap()
    }

    pub fn rk4() -> Self {
        let a = vec![
            vec![0.0, 0.0, 0.0, 0.0],
            vec![0.5, 0.0, 0.0, 0.0],
            vec![0.0, 0.5, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0],
        ];
        Self::new("rk4", a, vec![1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0], 4).unwrap()
    }

    pub fn named(id: &str) -> Result<Self> {
        match id {
            "euler" | "explicit-euler" => Ok(Self::euler()),
            "implicit-euler" => Ok(Self::implicit_euler()),
            "explicit-midpoint" | "midpoint" => Ok(Self::explicit_midpoint()),
            "implicit-midpoint" => Ok(Self::implicit_midpoint()),
            "rk4" => Ok(Self::rk4()),
            other => Err(Error::UnknownMethodId(other.to_string())),
        }
    }

    pub const NAMES: [&'static str; 5] = ["euler", "implicit-euler", "explicit-midpoint", "implicit-midpoint", "rk4"];
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn built_ins_satisfy_row_sum_and_consistency() {
        for id in ButcherTableau::NAMES {
            let t = ButcherTableau::named(id).unwrap();
            for (row, c) in t.a.iter().zip(&t.c) {
                assert_eq!(row.iter().sum::<f64>(), *c);
            }
            assert!((t.b.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        }
        assert!(ButcherTableau::rk4().is_explicit());
        assert!(!ButcherTableau::implicit_euler().is_explicit());
    }

    #[test]
    fn rejects_bad_tableaus() {
        assert!(ButcherTableau::new("x", vec![vec![0.0]], vec![0.5], 1).is_err());
        assert!(ButcherTableau::new("x", vec![vec![0.0, 0.0]], vec![1.0], 1).is_err());
        assert!(ButcherTableau::from_row_major("x", &[0.0, 0.0, 0.5], vec![0.0, 1.0], 2).is_err());
        let ok = ButcherTableau::from_row_major("x", &[0.0, 0.0, 0.5, 0.0], vec![0.0, 1.0], 2).unwrap();
        assert_eq!(ok, ButcherTableau { name: "x".into(), ..ButcherTableau::explicit_midpoint() });
        assert!(matches!(ButcherTableau::named("bogus"), Err(Error::UnknownMethodId(_))));
    }
}
