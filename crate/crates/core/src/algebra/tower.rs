//! Jets whose nesting depth is decided at run time.
//!
//! A [`Tower`] is either a plain number or a truncated series in a numbered
//! variable whose coefficients are towers in lower-numbered variables. Mixing
//! levels treats the lower operand as a constant in the higher variable, so
//! a fresh expansion variable can be introduced on top of any point without
//! knowing its depth at compile time. The IMDE recursion relies on this: the
//! coefficient `f_k` is evaluated at points that are series in the step of the
//! enclosing expansion, to a depth that grows with `k`.

use std::ops::{Add, Div, Mul, Neg, Sub};
use std::rc::Rc;

use super::scalar::{Scalar, ZERO_DIVISOR_TOL};
use super::series;

#[derive(Clone, Debug)]
pub enum Tower {
    Num(f64),
    Jet { level: u32, coeffs: Rc<[Tower]> },
}

impl Tower {
    pub fn level(&self) -> u32 {
        match self {
            Tower::Num(_) => 0,
            Tower::Jet { level, .. } => *level,
        }
    }

    /// Series in variable `level` with the given coefficients.
    pub fn series(level: u32, coeffs: Vec<Tower>) -> Tower {
        assert!(level > 0, "level 0 is reserved for plain numbers");
        debug_assert!(coeffs.iter().all(|c| c.level() < level));
        if coeffs.is_empty() {
            return Tower::Num(0.0);
        }
        Tower::Jet { level, coeffs: coeffs.into() }
    }

    /// `c0 + t` in variable `level`, truncated at `order`.
    pub fn variable(level: u32, c0: Tower, order: usize) -> Tower {
        let mut coeffs = vec![c0];
        if order >= 1 {
            coeffs.push(Tower::Num(1.0));
            coeffs.extend((1..order).map(|_| Tower::Num(0.0)));
        }
        Tower::series(level, coeffs)
    }

    /// Coefficient of `t^k` where `t` is variable `level`.
    pub fn coeff(&self, level: u32, k: usize) -> Tower {
        match self {
            Tower::Num(_) => {
                if k == 0 {
                    self.clone()
                } else {
                    Tower::Num(0.0)
                }
            }
            Tower::Jet { level: l, coeffs } => {
                if *l == level {
                    coeffs.get(k).cloned().unwrap_or(Tower::Num(0.0))
                } else if *l < level {
                    if k == 0 {
                        self.clone()
                    } else {
                        Tower::Num(0.0)
                    }
                } else {
                    let inner: Vec<Tower> = coeffs.iter().map(|c| c.coeff(level, k)).collect();
                    Tower::series(*l, inner)
                }
            }
        }
    }

    /// Innermost constant term.
    pub fn value(&self) -> f64 {
        match self {
            Tower::Num(x) => *x,
            Tower::Jet { coeffs, .. } => coeffs[0].value(),
        }
    }

    /// The plain number, if every series coefficient past the constant vanishes.
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Tower::Num(x) => Some(*x),
            Tower::Jet { coeffs, .. } => {
                if coeffs[1..].iter().all(|c| c.magnitude() == 0.0) {
                    coeffs[0].as_f64()
                } else {
                    None
                }
            }
        }
    }

    /// Identity test used to recognise an unchanged stage argument.
    pub fn same_as(&self, other: &Tower) -> bool {
        match (self, other) {
            (Tower::Num(a), Tower::Num(b)) => a.to_bits() == b.to_bits(),
            (Tower::Jet { coeffs: a, .. }, Tower::Jet { coeffs: b, .. }) => Rc::ptr_eq(a, b),
            _ => false,
        }
    }

    fn coeff_slice(&self, level: u32) -> std::borrow::Cow<'_, [Tower]> {
        match self {
            Tower::Jet { level: l, coeffs } if *l == level => std::borrow::Cow::Borrowed(coeffs),
            _ => std::borrow::Cow::Owned(vec![self.clone()]),
        }
    }

    fn map_coeffs(&self, f: impl Fn(&Tower) -> Tower) -> Tower {
        match self {
            Tower::Num(_) => f(self),
            Tower::Jet { level, coeffs } => {
                Tower::Jet { level: *level, coeffs: coeffs.iter().map(f).collect::<Vec<_>>().into() }
            }
        }
    }

    fn unary(&self, num: impl Fn(f64) -> f64, jet: impl Fn(&[Tower]) -> Vec<Tower>) -> Tower {
        match self {
            Tower::Num(x) => Tower::Num(num(*x)),
            Tower::Jet { level, coeffs } => Tower::series(*level, jet(coeffs)),
        }
    }
}

pub fn max_level(v: &[Tower]) -> u32 {
    v.iter().map(Tower::level).max().unwrap_or(0)
}

pub fn lift(v: &[f64]) -> Vec<Tower> {
    v.iter().map(|&x| Tower::Num(x)).collect()
}

/// Constant terms of every component.
pub fn values(v: &[Tower]) -> Vec<f64> {
    v.iter().map(Tower::value).collect()
}

/// Componentwise coefficient extraction.
pub fn coeffs(v: &[Tower], level: u32, k: usize) -> Vec<Tower> {
    v.iter().map(|t| t.coeff(level, k)).collect()
}

impl Add for Tower {
    type Output = Tower;
    fn add(self, rhs: Tower) -> Tower {
        match (&self, &rhs) {
            (Tower::Num(a), Tower::Num(b)) => Tower::Num(a + b),
            _ => {
                let (la, lb) = (self.level(), rhs.level());
                if la > lb {
                    let mut c = self.coeff_slice(la).into_owned();
                    c[0] = c[0].clone() + rhs;
                    Tower::series(la, c)
                } else if lb > la {
                    let mut c = rhs.coeff_slice(lb).into_owned();
                    c[0] = self + c[0].clone();
                    Tower::series(lb, c)
                } else {
                    Tower::series(la, series::add(&self.coeff_slice(la), &rhs.coeff_slice(la)))
                }
            }
        }
    }
}

impl Sub for Tower {
    type Output = Tower;
    fn sub(self, rhs: Tower) -> Tower {
        match (&self, &rhs) {
            (Tower::Num(a), Tower::Num(b)) => Tower::Num(a - b),
            _ => self + (-rhs),
        }
    }
}

impl Neg for Tower {
    type Output = Tower;
    fn neg(self) -> Tower {
        match &self {
            Tower::Num(a) => Tower::Num(-a),
            _ => self.map_coeffs(|c| -c.clone()),
        }
    }
}

impl Mul for Tower {
    type Output = Tower;
    fn mul(self, rhs: Tower) -> Tower {
        match (&self, &rhs) {
            (Tower::Num(a), Tower::Num(b)) => Tower::Num(a * b),
            (Tower::Num(a), _) => rhs.scale(*a),
            (_, Tower::Num(b)) => self.scale(*b),
            _ => {
                let (la, lb) = (self.level(), rhs.level());
                if la > lb {
                    self.map_coeffs(|c| c.clone() * rhs.clone())
                } else if lb > la {
                    rhs.map_coeffs(|c| self.clone() * c.clone())
                } else {
                    Tower::series(la, series::mul(&self.coeff_slice(la), &rhs.coeff_slice(la)))
                }
            }
        }
    }
}

impl Div for Tower {
    type Output = Tower;
    fn div(self, rhs: Tower) -> Tower {
        match (&self, &rhs) {
            (Tower::Num(a), Tower::Num(b)) => Tower::Num(a / b),
            (_, Tower::Num(b)) => self.scale(1.0 / b),
            _ => {
                let (la, lb) = (self.level(), rhs.level());
                if la > lb {
                    self.map_coeffs(|c| c.clone() / rhs.clone())
                } else {
                    Tower::series(lb, series::div(&self.coeff_slice(lb), &rhs.coeff_slice(lb)))
                }
            }
        }
    }
}

impl Scalar for Tower {
    fn from_f64(c: f64) -> Self {
        Tower::Num(c)
    }

    fn scale(&self, c: f64) -> Self {
        match self {
            Tower::Num(a) => Tower::Num(a * c),
            _ => self.map_coeffs(|x| x.scale(c)),
        }
    }

    fn add_f64(&self, c: f64) -> Self {
        match self {
            Tower::Num(a) => Tower::Num(a + c),
            Tower::Jet { level, coeffs } => {
                let mut v = coeffs.to_vec();
                v[0] = v[0].add_f64(c);
                Tower::series(*level, v)
            }
        }
    }

    fn magnitude(&self) -> f64 {
        match self {
            Tower::Num(a) => a.abs(),
            Tower::Jet { coeffs, .. } => coeffs.iter().map(Scalar::magnitude).fold(0.0, f64::max),
        }
    }

    fn is_zero_divisor(&self) -> bool {
        self.value().abs() <= ZERO_DIVISOR_TOL
    }

    fn series_order(&self) -> Option<usize> {
        match self {
            Tower::Num(_) => None,
            Tower::Jet { coeffs, .. } => Some(coeffs.len() - 1),
        }
    }

    fn sin(&self) -> Self {
        self.unary(f64::sin, |c| series::sin_cos(c).0)
    }

    fn cos(&self) -> Self {
        self.unary(f64::cos, |c| series::sin_cos(c).1)
    }

    fn sin_cos(&self) -> (Self, Self) {
        match self {
            Tower::Num(x) => {
                let (s, c) = x.sin_cos();
                (Tower::Num(s), Tower::Num(c))
            }
            Tower::Jet { level, coeffs } => {
                let (s, c) = series::sin_cos(coeffs);
                (Tower::series(*level, s), Tower::series(*level, c))
            }
        }
    }

    fn exp(&self) -> Self {
        self.unary(f64::exp, series::exp)
    }

    fn tanh(&self) -> Self {
        self.unary(f64::tanh, series::tanh)
    }

    fn sigmoid(&self) -> Self {
        self.unary(super::scalar::sigmoid, series::sigmoid)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mixed_levels_act_as_constants() {
        let x = Tower::variable(1, Tower::Num(2.0), 2); // 2 + s
        let y = Tower::variable(2, Tower::Num(3.0), 2); // 3 + t
        let p = x.clone() * y.clone(); // 6 + 3s + 2t + st
        assert_eq!(p.level(), 2);
        assert_eq!(p.coeff(2, 0).coeff(1, 0).value(), 6.0);
        assert_eq!(p.coeff(2, 0).coeff(1, 1).value(), 3.0);
        assert_eq!(p.coeff(2, 1).coeff(1, 0).value(), 2.0);
        assert_eq!(p.coeff(2, 1).coeff(1, 1).value(), 1.0);
        // coefficient extraction through an outer level
        assert_eq!(p.coeff(1, 1).coeff(2, 1).value(), 1.0);
        let q = x.clone() + y.clone() - x;
        assert_eq!(q.coeff(2, 1).value(), 1.0);
        assert_eq!(q.coeff(1, 1).magnitude(), 0.0);
    }

    #[test]
    fn matches_static_jets() {
        use crate::algebra::Jet;
        let s = Tower::variable(1, Tower::Num(0.4), 6);
        let j = Jet::variable(0.4, 6);
        let ft = (s.sin() * s.exp() + s.tanh()) / (s.sigmoid().add_f64(1.0));
        let fj = (j.sin() * j.exp() + j.tanh()) / (j.sigmoid().add_f64(1.0));
        for k in 0..=6 {
            assert!((ft.coeff(1, k).value() - fj.coeff(k)).abs() < 1e-14);
        }
    }

    #[test]
    fn division_by_lower_level() {
        let x = Tower::variable(1, Tower::Num(2.0), 1);
        let t = Tower::variable(2, Tower::Num(1.0), 1);
        // t / x with x lower: coefficients divided by x
        let r = t.clone() / x.clone();
        assert!((r.coeff(2, 0).coeff(1, 0).value() - 0.5).abs() < 1e-15);
        assert!((r.coeff(2, 0).coeff(1, 1).value() + 0.25).abs() < 1e-15);
        // x / t with t higher: series division
        let r = x / t;
        assert!((r.coeff(2, 1).coeff(1, 0).value() + 2.0).abs() < 1e-15);
    }
}
