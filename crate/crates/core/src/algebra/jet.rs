use std::ops::{Add, Div, Mul, Neg, Sub};

use super::scalar::Scalar;
use super::series;

/// A truncated univariate power series `c_0 + c_1 t + ... + c_K t^K` with
/// coefficients in any [`Scalar`] algebra.
///
/// Binary operations truncate at the longer operand, so a length-one jet
/// acts as a constant. Jets of jets are legal and give mixed partials.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet<S> {
    coeffs: Vec<S>,
}

impl<S: Scalar> Jet<S> {
    pub fn new(coeffs: Vec<S>) -> Self {
        if coeffs.is_empty() {
            return Self { coeffs: vec![S::zero()] };
        }
        Self { coeffs }
    }

    pub fn constant(c: S) -> Self {
        Self { coeffs: vec![c] }
    }

    /// The series `c0 + t`, truncated at `order`.
    pub fn variable(c0: S, order: usize) -> Self {
        let mut coeffs = vec![c0];
        if order >= 1 {
            coeffs.push(S::one());
            coeffs.extend((1..order).map(|_| S::zero()));
        }
        Self { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<S> {
        self.coeffs
    }

    /// Coefficient of `t^k`; zero past the truncation order.
    pub fn coeff(&self, k: usize) -> S {
        self.coeffs.get(k).cloned().unwrap_or_else(S::zero)
    }

    pub fn constant_term(&self) -> &S {
        &self.coeffs[0]
    }

    /// `k!` times the `t^k` coefficient.
    pub fn derivative(&self, k: usize) -> S {
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        self.coeff(k).scale(fact)
    }

    pub fn eval(&self, t: &S) -> S {
        series::eval(&self.coeffs, t)
    }

    pub fn truncate(&self, order: usize) -> Self {
        let mut coeffs: Vec<S> = self.coeffs.iter().take(order + 1).cloned().collect();
        coeffs.resize(order + 1, S::zero());
        Self { coeffs }
    }
}

impl<S: Scalar> Add for Jet<S> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(series::add(&self.coeffs, &rhs.coeffs))
    }
}

impl<S: Scalar> Sub for Jet<S> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(series::sub(&self.coeffs, &rhs.coeffs))
    }
}

impl<S: Scalar> Mul for Jet<S> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self::new(series::mul(&self.coeffs, &rhs.coeffs))
    }
}

impl<S: Scalar> Div for Jet<S> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        Self::new(series::div(&self.coeffs, &rhs.coeffs))
    }
}

impl<S: Scalar> Neg for Jet<S> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(series::neg(&self.coeffs))
    }
}

impl<S: Scalar> Scalar for Jet<S> {
    fn from_f64(c: f64) -> Self {
        Self::constant(S::from_f64(c))
    }

    fn scale(&self, c: f64) -> Self {
        Self::new(series::scale(&self.coeffs, c))
    }

    fn add_f64(&self, c: f64) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs[0] = coeffs[0].add_f64(c);
        Self::new(coeffs)
    }

    fn magnitude(&self) -> f64 {
        self.coeffs.iter().map(Scalar::magnitude).fold(0.0, f64::max)
    }

    fn is_zero_divisor(&self) -> bool {
        self.coeffs[0].is_zero_divisor()
    }

    fn series_order(&self) -> Option<usize> {
        Some(self.order())
    }

    fn sin(&self) -> Self {
        Self::new(series::sin_cos(&self.coeffs).0)
    }

    fn cos(&self) -> Self {
        Self::new(series::sin_cos(&self.coeffs).1)
    }

    fn sin_cos(&self) -> (Self, Self) {
        let (s, c) = series::sin_cos(&self.coeffs);
        (Self::new(s), Self::new(c))
    }

    fn exp(&self) -> Self {
        Self::new(series::exp(&self.coeffs))
    }

    fn tanh(&self) -> Self {
        Self::new(series::tanh(&self.coeffs))
    }

    fn sigmoid(&self) -> Self {
        Self::new(series::sigmoid(&self.coeffs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(order: usize) -> Jet<f64> {
        Jet::variable(0.0, order)
    }

    fn factorial(n: usize) -> f64 {
        (1..=n).map(|i| i as f64).product()
    }

    #[test]
    fn maclaurin_coefficients_through_order_8() {
        let x = t(8);
        let e = x.exp();
        let (s, c) = x.sin_cos();
        for k in 0..=8 {
            let fk = factorial(k);
            assert!((e.coeff(k) - 1.0 / fk).abs() < 1e-14);
            let sin_k = if k % 2 == 1 { (-1f64).powi(((k - 1) / 2) as i32) / fk } else { 0.0 };
            let cos_k = if k % 2 == 0 { (-1f64).powi((k / 2) as i32) / fk } else { 0.0 };
            assert!((s.coeff(k) - sin_k).abs() < 1e-14, "sin {k}");
            assert!((c.coeff(k) - cos_k).abs() < 1e-14, "cos {k}");
        }
        // tanh t = t - t^3/3 + 2t^5/15 - 17t^7/315
        let th = x.tanh();
        let expected = [0.0, 1.0, 0.0, -1.0 / 3.0, 0.0, 2.0 / 15.0, 0.0, -17.0 / 315.0, 0.0];
        for (k, e) in expected.iter().enumerate() {
            assert!((th.coeff(k) - e).abs() < 1e-14, "tanh {k}");
        }
        // sigmoid t = 1/2 + t/4 - t^3/48 + t^5/480 - 17 t^7/80640
        let sg = x.sigmoid();
        let expected = [0.5, 0.25, 0.0, -1.0 / 48.0, 0.0, 1.0 / 480.0, 0.0, -17.0 / 80640.0, 0.0];
        for (k, e) in expected.iter().enumerate() {
            assert!((sg.coeff(k) - e).abs() < 1e-14, "sigmoid {k}");
        }
    }

    #[test]
    fn primitives_about_nonzero_point_match_derivatives() {
        // d^k/dx^k exp(x) at 0.7 is exp(0.7)
        let x = Jet::variable(0.7, 5);
        let e = x.exp();
        for k in 0..=5 {
            assert!((e.derivative(k) - 0.7f64.exp()).abs() < 1e-13);
        }
        let th = x.tanh();
        let t0 = 0.7f64.tanh();
        assert!((th.derivative(1) - (1.0 - t0 * t0)).abs() < 1e-14);
        assert!((th.derivative(2) - (-2.0 * t0 * (1.0 - t0 * t0))).abs() < 1e-14);
    }

    #[test]
    fn polynomial_inputs_are_exact() {
        // (1 + t)^3 = 1 + 3t + 3t^2 + t^3
        let x = Jet::variable(1.0, 4);
        let p = x.powi(3);
        assert_eq!(p.coeffs(), &[1.0, 3.0, 3.0, 1.0, 0.0]);
        // 1 / (1 - t) = sum t^k
        let inv = Jet::from_f64(1.0) / (Jet::from_f64(1.0) - t(5));
        assert_eq!(inv.coeffs(), &[1.0; 6]);
        let q = x.powi(-2);
        // (1+t)^-2 = 1 - 2t + 3t^2 - 4t^3 + 5t^4
        for (k, e) in [1.0, -2.0, 3.0, -4.0, 5.0].iter().enumerate() {
            assert!((q.coeff(k) - e).abs() < 1e-14);
        }
    }

    #[test]
    fn constants_promote_and_orders_agree() {
        let x = t(3);
        let y = x.clone() * Jet::from_f64(2.0) + Jet::from_f64(1.0);
        assert_eq!(y.order(), 3);
        assert_eq!(y.coeffs(), &[1.0, 2.0, 0.0, 0.0]);
        let one = Jet::from_f64(1.0);
        assert_eq!(x.clone() * one, x);
    }

    #[test]
    fn nested_jets_give_mixed_partials() {
        // f(x, y) = sin(x) * y^2 ; d^2 f / dx dy at (0.3, 1.5) = cos(0.3) * 2 * 1.5
        let x: Jet<Jet<f64>> = Jet::new(vec![Jet::new(vec![0.3]), Jet::new(vec![1.0])]);
        let y: Jet<Jet<f64>> = Jet::constant(Jet::variable(1.5, 1));
        let f = x.sin() * y.square();
        let mixed = f.coeff(1).coeff(1);
        assert!((mixed - 0.3f64.cos() * 3.0).abs() < 1e-14);
    }
}
