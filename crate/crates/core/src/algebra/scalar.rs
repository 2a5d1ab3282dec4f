use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Absolute threshold under which a divisor's constant term counts as zero.
pub const ZERO_DIVISOR_TOL: f64 = 1e-300;

/// A commutative scalar algebra with the analytic primitives needed to
/// evaluate vector fields.
///
/// Plain `f64` implements it, and so does [`Jet`](super::Jet) over any
/// implementing scalar, so expressions, integrators and the IMDE engine can
/// be run on numbers and on truncated power series with the same code.
pub trait Scalar:
    Clone + Debug + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Neg<Output = Self>
{
    fn from_f64(c: f64) -> Self;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    fn one() -> Self {
        Self::from_f64(1.0)
    }

    fn scale(&self, c: f64) -> Self {
        self.clone() * Self::from_f64(c)
    }

    fn add_f64(&self, c: f64) -> Self {
        self.clone() + Self::from_f64(c)
    }

    /// Largest absolute value over every coefficient, recursively.
    fn magnitude(&self) -> f64;

    /// True when dividing by `self` would divide by a zero constant term.
    fn is_zero_divisor(&self) -> bool;

    /// Truncation order of the outermost series variable, if `self` is a series.
    fn series_order(&self) -> Option<usize> {
        None
    }

    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn exp(&self) -> Self;
    fn tanh(&self) -> Self;
    fn sigmoid(&self) -> Self;

    fn sin_cos(&self) -> (Self, Self) {
        (self.sin(), self.cos())
    }

    fn square(&self) -> Self {
        self.clone() * self.clone()
    }

    /// Integer power by repeated squaring; exact for polynomial series.
    fn powi(&self, n: i32) -> Self {
        if n < 0 {
            return Self::one() / self.powi(-n);
        }
        let mut result = Self::one();
        let mut base = self.clone();
        let mut e = n as u32;
        let mut first = true;
        while e > 0 {
            if e & 1 == 1 {
                result = if first { base.clone() } else { result * base.clone() };
                first = false;
            }
            e >>= 1;
            if e > 0 {
                base = base.square();
            }
        }
        result
    }
}

impl Scalar for f64 {
    fn from_f64(c: f64) -> Self {
        c
    }

    fn scale(&self, c: f64) -> Self {
        self * c
    }

    fn add_f64(&self, c: f64) -> Self {
        self + c
    }

    fn magnitude(&self) -> f64 {
        self.abs()
    }

    fn is_zero_divisor(&self) -> bool {
        self.abs() <= ZERO_DIVISOR_TOL
    }

    fn sin(&self) -> Self {
        f64::sin(*self)
    }

    fn cos(&self) -> Self {
        f64::cos(*self)
    }

    fn exp(&self) -> Self {
        f64::exp(*self)
    }

    fn tanh(&self) -> Self {
        f64::tanh(*self)
    }

    fn sigmoid(&self) -> Self {
        sigmoid(*self)
    }

    fn sin_cos(&self) -> (Self, Self) {
        f64::sin_cos(*self)
    }

    fn powi(&self, n: i32) -> Self {
        f64::powi(*self, n)
    }
}

/// Logistic function, evaluated without overflow for large |x|.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Dot product over any scalar algebra with plain-number weights.
pub fn weighted_sum<S: Scalar>(weights: &[f64], terms: &[S]) -> Option<S> {
    let mut acc: Option<S> = None;
    for (w, t) in weights.iter().zip(terms) {
        if *w == 0.0 {
            continue;
        }
        let term = if *w == 1.0 { t.clone() } else { t.scale(*w) };
        acc = Some(match acc {
            None => term,
            Some(a) => a + term,
        });
    }
    acc
}

/// Componentwise `y + h * v` over a shared scalar algebra.
pub fn axpy<S: Scalar>(y: &[S], h: &S, v: &[S]) -> Vec<S> {
    y.iter().zip(v).map(|(a, b)| a.clone() + h.clone() * b.clone()).collect()
}

pub fn max_magnitude<S: Scalar>(v: &[S]) -> f64 {
    v.iter().map(Scalar::magnitude).fold(0.0, f64::max)
}
