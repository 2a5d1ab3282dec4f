use super::expr::FieldExpr;
use super::jet::Jet;
use super::scalar::Scalar;
use crate::error::{Error, Result};

/// Anything that maps a state over the algebra `S` to a tangent vector over `S`.
pub trait VectorField<S> {
    fn dim(&self) -> usize;
    fn eval(&self, y: &[S]) -> Result<Vec<S>>;
}

impl<S, V: VectorField<S> + ?Sized> VectorField<S> for &V {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn eval(&self, y: &[S]) -> Result<Vec<S>> {
        (**self).eval(y)
    }
}

impl<S: Scalar> VectorField<S> for FieldExpr {
    fn dim(&self) -> usize {
        FieldExpr::dim(self)
    }

    fn eval(&self, y: &[S]) -> Result<Vec<S>> {
        if self.len() != FieldExpr::dim(self) {
            return Err(Error::DimensionMismatch { expected: FieldExpr::dim(self), got: self.len() });
        }
        FieldExpr::eval(self, y)
    }
}

/// A field given by a closure.
pub struct FnField<F> {
    dim: usize,
    f: F,
}

impl<F> FnField<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<S, F: Fn(&[S]) -> Result<Vec<S>>> VectorField<S> for FnField<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, y: &[S]) -> Result<Vec<S>> {
        (self.f)(y)
    }
}

/// Gradient of a scalar expression by one first-order jet per coordinate.
pub fn gradient<S: Scalar>(h: &FieldExpr, y: &[S]) -> Result<Vec<S>> {
    let n = y.len();
    (0..n)
        .map(|i| {
            let point: Vec<Jet<S>> = y
                .iter()
                .enumerate()
                .map(|(j, v)| if i == j { Jet::variable(v.clone(), 1) } else { Jet::constant(v.clone()) })
                .collect();
            Ok(h.eval_scalar(&point)?.coeff(1))
        })
        .collect()
}

/// The canonical field `J^{-1} grad H` on `y = (p, q)`, i.e. `(-H_q, H_p)`.
#[derive(Clone, Debug)]
pub struct HamiltonianField {
    h: FieldExpr,
}

impl HamiltonianField {
    pub fn new(h: FieldExpr) -> Result<Self> {
        if h.len() != 1 {
            return Err(Error::DimensionMismatch { expected: 1, got: h.len() });
        }
        if !h.dim().is_multiple_of(2) {
            return Err(Error::OddDimension(h.dim()));
        }
        Ok(Self { h })
    }

    pub fn hamiltonian(&self) -> &FieldExpr {
        &self.h
    }
}

impl<S: Scalar> VectorField<S> for HamiltonianField {
    fn dim(&self) -> usize {
        self.h.dim()
    }

    fn eval(&self, y: &[S]) -> Result<Vec<S>> {
        let grad = gradient(&self.h, y)?;
        Ok(canonical_from_gradient(grad))
    }
}

/// `J^{-1} g` for a gradient `g = (g_p, g_q)`.
pub fn canonical_from_gradient<S: Scalar>(grad: Vec<S>) -> Vec<S> {
    let d = grad.len() / 2;
    let mut out: Vec<S> = grad[d..].iter().map(|g| -g.clone()).collect();
    out.extend(grad[..d].iter().cloned());
    out
}
