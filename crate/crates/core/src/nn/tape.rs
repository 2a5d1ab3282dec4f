//! Reverse-mode differentiation over a recorded trace of matrix operations.
//!
//! A [`Tape`] records every operation applied to its [`Var`]s. Calling
//! [`Tape::backward`] on a `1 x 1` output replays the trace in reverse and
//! accumulates adjoints. Because derivative expressions can themselves be
//! written with tape operations, a gradient recorded on the tape can be
//! differentiated again.

use std::cell::RefCell;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::rc::Rc;

use super::tensor::Tensor;
use crate::algebra::scalar::{sigmoid, ZERO_DIVISOR_TOL};
use crate::algebra::Scalar;

#[derive(Clone, Debug)]
enum Op {
    Leaf,
    MatMul(usize, usize),
    MatMulBt(usize, usize),
    AddRow(usize, usize),
    /// `act(x W^T + b)` with `act` absent for a plain affine map.
    Dense {
        x: usize,
        w: usize,
        b: usize,
        act: Option<Act>,
    },
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
    Div(usize, usize),
    Scale(usize, f64),
    AddScalar(usize),
    Tanh(usize),
    Sigmoid(usize),
    Sin(usize),
    Cos(usize),
    Exp(usize),
    PowI(usize, i32),
    HCat(Vec<usize>),
    Column(usize, usize),
    SumSquares(usize),
    Sum(usize),
}

/// Activation of a fused dense layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Act {
    Tanh,
    Sigmoid,
}

impl Act {
    fn apply(self, x: f64) -> f64 {
        match self {
            Act::Tanh => x.tanh(),
            Act::Sigmoid => sigmoid(x),
        }
    }

    /// Derivative in terms of the activation's output.
    fn slope(self, y: f64) -> f64 {
        match self {
            Act::Tanh => 1.0 - y * y,
            Act::Sigmoid => y * (1.0 - y),
        }
    }
}

struct Node {
    value: Rc<Tensor>,
    op: Op,
}

#[derive(Clone, Default)]
pub struct Tape(Rc<RefCell<Vec<Node>>>);

impl fmt::Debug for Tape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tape({} nodes)", self.len())
    }
}

/// A handle to a recorded value.
#[derive(Clone)]
pub struct Var {
    tape: Tape,
    idx: usize,
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.value();
        write!(f, "Var#{}({}x{})", self.idx, v.rows, v.cols)
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.0.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn push(&self, value: Tensor, op: Op) -> Var {
        let mut nodes = self.0.borrow_mut();
        nodes.push(Node { value: Rc::new(value), op });
        Var { tape: self.clone(), idx: nodes.len() - 1 }
    }

    /// Records an input. Gradients are available for every leaf.
    pub fn leaf(&self, value: Tensor) -> Var {
        self.push(value, Op::Leaf)
    }

    fn value(&self, idx: usize) -> Rc<Tensor> {
        self.0.borrow()[idx].value.clone()
    }

    pub fn hcat(&self, parts: &[Var]) -> Var {
        let values: Vec<Rc<Tensor>> = parts.iter().map(|p| p.value()).collect();
        let refs: Vec<&Tensor> = values.iter().map(|v| v.as_ref()).collect();
        self.push(Tensor::hcat(&refs), Op::HCat(parts.iter().map(|p| p.idx).collect()))
    }

    /// Adjoints of every leaf with respect to the scalar `out`.
    pub fn backward(&self, out: &Var) -> Gradients {
        let nodes = self.0.borrow();
        assert_eq!(nodes[out.idx].value.shape(), (1, 1), "backward needs a 1x1 output");
        let mut grads: Vec<Option<Tensor>> = vec![None; out.idx + 1];
        grads[out.idx] = Some(Tensor::filled(1, 1, 1.0));
        for i in (0..=out.idx).rev() {
            let node = &nodes[i];
            if matches!(node.op, Op::Leaf) {
                continue;
            }
            let Some(g) = grads[i].take() else { continue };
            let val = |j: usize| nodes[j].value.as_ref();
            let mut acc = |j: usize, t: Tensor| match &mut grads[j] {
                Some(existing) => existing.add_assign(&t),
                slot => *slot = Some(t),
            };
            match &node.op {
                Op::Leaf => {}
                Op::MatMul(a, b) => {
                    acc(*a, g.matmul_bt(val(*b)));
                    acc(*b, val(*a).matmul_at(&g));
                }
                Op::MatMulBt(a, b) => {
                    acc(*a, g.matmul(val(*b)));
                    acc(*b, g.matmul_at(val(*a)));
                }
                Op::AddRow(a, b) => {
                    acc(*b, Tensor::row(g.column_sums()));
                    acc(*a, g);
                }
                Op::Dense { x, w, b, act } => {
                    let gz = match act {
                        Some(act) => g.zip(&node.value, |g, y| g * act.slope(y)),
                        None => g,
                    };
                    acc(*w, gz.matmul_at(val(*x)));
                    acc(*b, Tensor::row(gz.column_sums()));
                    acc(*x, gz.matmul(val(*w)));
                }
                Op::Add(a, b) => {
                    acc(*a, g.clone());
                    acc(*b, g);
                }
                Op::Sub(a, b) => {
                    acc(*b, g.map(|v| -v));
                    acc(*a, g);
                }
                Op::Mul(a, b) => {
                    acc(*a, g.zip(val(*b), |g, y| g * y));
                    acc(*b, g.zip(val(*a), |g, x| g * x));
                }
                Op::Div(a, b) => {
                    let ga = g.zip(val(*b), |g, y| g / y);
                    acc(*b, ga.zip(&node.value, |ga, q| -ga * q));
                    acc(*a, ga);
                }
                Op::Scale(a, c) => acc(*a, g.map(|v| v * c)),
                Op::AddScalar(a) => acc(*a, g),
                Op::Tanh(a) => acc(*a, g.zip(&node.value, |g, t| g * (1.0 - t * t))),
                Op::Sigmoid(a) => acc(*a, g.zip(&node.value, |g, s| g * s * (1.0 - s))),
                Op::Sin(a) => acc(*a, g.zip(val(*a), |g, x| g * x.cos())),
                Op::Cos(a) => acc(*a, g.zip(val(*a), |g, x| -g * x.sin())),
                Op::Exp(a) => acc(*a, g.zip(&node.value, |g, e| g * e)),
                Op::PowI(a, n) => {
                    let n = *n;
                    acc(*a, g.zip(val(*a), |g, x| g * n as f64 * x.powi(n - 1)))
                }
                Op::HCat(parts) => {
                    let mut offset = 0;
                    for &p in parts {
                        let w = val(p).cols;
                        let mut part = Tensor::zeros(g.rows, w);
                        for r in 0..g.rows {
                            part.data[r * w..(r + 1) * w].copy_from_slice(&g.row_slice(r)[offset..offset + w]);
                        }
                        acc(p, part);
                        offset += w;
                    }
                }
                Op::Column(a, j) => {
                    let src = val(*a);
                    let mut t = Tensor::zeros(src.rows, src.cols);
                    for r in 0..src.rows {
                        t.data[r * src.cols + j] = g.data[r];
                    }
                    acc(*a, t);
                }
                Op::SumSquares(a) => {
                    let s = 2.0 * g.data[0];
                    acc(*a, val(*a).map(|x| s * x));
                }
                Op::Sum(a) => {
                    let src = val(*a);
                    acc(*a, Tensor::filled(src.rows, src.cols, g.data[0]));
                }
            }
        }
        Gradients { grads }
    }
}

/// Adjoints from one backward sweep.
pub struct Gradients {
    grads: Vec<Option<Tensor>>,
}

impl Gradients {
    /// Adjoint of the leaf `v`; all zeros when `v` does not influence the
    /// output. Adjoints of interior nodes are not retained.
    pub fn wrt(&self, v: &Var) -> Tensor {
        match self.grads.get(v.idx).and_then(Option::as_ref) {
            Some(g) => g.clone(),
            None => {
                let t = v.value();
                Tensor::zeros(t.rows, t.cols)
            }
        }
    }
}

impl Var {
    pub fn value(&self) -> Rc<Tensor> {
        self.tape.value(self.idx)
    }

    pub fn tape(&self) -> &Tape {
        &self.tape
    }

    pub fn shape(&self) -> (usize, usize) {
        self.value().shape()
    }

    /// The single entry of a `1 x 1` value.
    pub fn item(&self) -> f64 {
        let v = self.value();
        assert_eq!(v.shape(), (1, 1));
        v.data[0]
    }

    fn unary(&self, f: impl Fn(&Tensor) -> Tensor, op: Op) -> Var {
        let v = f(&self.value());
        self.tape.push(v, op)
    }

    fn binary(&self, other: &Var, f: impl Fn(&Tensor, &Tensor) -> Tensor, op: Op) -> Var {
        let v = f(&self.value(), &other.value());
        self.tape.push(v, op)
    }

    pub fn matmul(&self, other: &Var) -> Var {
        self.binary(other, Tensor::matmul, Op::MatMul(self.idx, other.idx))
    }

    /// `self * other^T`.
    pub fn matmul_bt(&self, other: &Var) -> Var {
        self.binary(other, Tensor::matmul_bt, Op::MatMulBt(self.idx, other.idx))
    }

    /// Adds the `1 x cols` row `bias` to every row.
    pub fn add_row(&self, bias: &Var) -> Var {
        self.binary(bias, |a, b| a.add_row(&b.data), Op::AddRow(self.idx, bias.idx))
    }

    /// `act(self W^T + b)` for a `1 x out` bias row `b`.
    pub fn dense(&self, w: &Var, b: &Var, act: Option<Act>) -> Var {
        let mut z = self.value().matmul_bt(&w.value());
        let bias = b.value();
        let cols = z.cols;
        for row in z.data.chunks_mut(cols) {
            for (v, bj) in row.iter_mut().zip(&bias.data) {
                *v += bj;
                if let Some(act) = act {
                    *v = act.apply(*v);
                }
            }
        }
        self.tape.push(z, Op::Dense { x: self.idx, w: w.idx, b: b.idx, act })
    }

    pub fn add(&self, other: &Var) -> Var {
        self.binary(other, |a, b| a.zip(b, |x, y| x + y), Op::Add(self.idx, other.idx))
    }

    pub fn sub(&self, other: &Var) -> Var {
        self.binary(other, |a, b| a.zip(b, |x, y| x - y), Op::Sub(self.idx, other.idx))
    }

    pub fn mul(&self, other: &Var) -> Var {
        self.binary(other, |a, b| a.zip(b, |x, y| x * y), Op::Mul(self.idx, other.idx))
    }

    pub fn div(&self, other: &Var) -> Var {
        self.binary(other, |a, b| a.zip(b, |x, y| x / y), Op::Div(self.idx, other.idx))
    }

    pub fn scale(&self, c: f64) -> Var {
        self.unary(|a| a.map(|x| x * c), Op::Scale(self.idx, c))
    }

    pub fn add_scalar(&self, c: f64) -> Var {
        self.unary(|a| a.map(|x| x + c), Op::AddScalar(self.idx))
    }

    pub fn tanh(&self) -> Var {
        self.unary(|a| a.map(f64::tanh), Op::Tanh(self.idx))
    }

    pub fn sigmoid(&self) -> Var {
        self.unary(|a| a.map(sigmoid), Op::Sigmoid(self.idx))
    }

    pub fn sin(&self) -> Var {
        self.unary(|a| a.map(f64::sin), Op::Sin(self.idx))
    }

    pub fn cos(&self) -> Var {
        self.unary(|a| a.map(f64::cos), Op::Cos(self.idx))
    }

    pub fn exp(&self) -> Var {
        self.unary(|a| a.map(f64::exp), Op::Exp(self.idx))
    }

    pub fn powi(&self, n: i32) -> Var {
        self.unary(|a| a.map(|x| x.powi(n)), Op::PowI(self.idx, n))
    }

    pub fn column(&self, j: usize) -> Var {
        self.unary(|a| a.select_column(j), Op::Column(self.idx, j))
    }

    /// Sum of squared entries, as a `1 x 1` value.
    pub fn sum_squares(&self) -> Var {
        self.unary(|a| Tensor::filled(1, 1, a.sum_squares()), Op::SumSquares(self.idx))
    }

    pub fn sum(&self) -> Var {
        self.unary(|a| Tensor::filled(1, 1, a.sum()), Op::Sum(self.idx))
    }
}

/// A batch of values flowing through scalar code: either a constant shared by
/// every sample or a recorded column with one entry per sample.
///
/// Implementing [`Scalar`] lets integrators and expression evaluators run
/// unchanged on a whole training batch while the tape records the trace.
#[derive(Clone, Debug)]
pub enum Batch {
    Const(f64),
    Node(Var),
}

impl Batch {
    pub fn as_var(&self) -> Option<&Var> {
        match self {
            Batch::Node(v) => Some(v),
            Batch::Const(_) => None,
        }
    }

    /// The recorded column, materializing a constant as a `rows x 1` leaf.
    pub fn to_column(&self, tape: &Tape, rows: usize) -> Var {
        match self {
            Batch::Node(v) => v.clone(),
            Batch::Const(c) => tape.leaf(Tensor::filled(rows, 1, *c)),
        }
    }

    pub fn values(&self) -> Vec<f64> {
        match self {
            Batch::Node(v) => v.value().data.clone(),
            Batch::Const(c) => vec![*c],
        }
    }

    fn map(&self, f: impl Fn(f64) -> f64, g: impl Fn(&Var) -> Var) -> Batch {
        match self {
            Batch::Const(c) => Batch::Const(f(*c)),
            Batch::Node(v) => Batch::Node(g(v)),
        }
    }
}

fn broadcast(v: &Var, c: f64) -> Var {
    let (r, k) = v.shape();
    v.tape().leaf(Tensor::filled(r, k, c))
}

impl Add for Batch {
    type Output = Batch;
    fn add(self, rhs: Batch) -> Batch {
        match (self, rhs) {
            (Batch::Const(a), Batch::Const(b)) => Batch::Const(a + b),
            (Batch::Node(v), Batch::Const(c)) | (Batch::Const(c), Batch::Node(v)) => {
                if c == 0.0 {
                    Batch::Node(v)
                } else {
                    Batch::Node(v.add_scalar(c))
                }
            }
            (Batch::Node(a), Batch::Node(b)) => Batch::Node(a.add(&b)),
        }
    }
}

impl Sub for Batch {
    type Output = Batch;
    fn sub(self, rhs: Batch) -> Batch {
        match (self, rhs) {
            (Batch::Const(a), Batch::Const(b)) => Batch::Const(a - b),
            (Batch::Node(v), Batch::Const(c)) => Batch::Node(v.add_scalar(-c)),
            (Batch::Const(c), Batch::Node(v)) => Batch::Node(v.scale(-1.0).add_scalar(c)),
            (Batch::Node(a), Batch::Node(b)) => Batch::Node(a.sub(&b)),
        }
    }
}

impl Mul for Batch {
    type Output = Batch;
    fn mul(self, rhs: Batch) -> Batch {
        match (self, rhs) {
            (Batch::Const(a), Batch::Const(b)) => Batch::Const(a * b),
            (Batch::Node(v), Batch::Const(c)) | (Batch::Const(c), Batch::Node(v)) => {
                if c == 1.0 {
                    Batch::Node(v)
                } else {
                    Batch::Node(v.scale(c))
                }
            }
            (Batch::Node(a), Batch::Node(b)) => Batch::Node(a.mul(&b)),
        }
    }
}

impl Div for Batch {
    type Output = Batch;
    fn div(self, rhs: Batch) -> Batch {
        match (self, rhs) {
            (Batch::Const(a), Batch::Const(b)) => Batch::Const(a / b),
            (Batch::Node(v), Batch::Const(c)) => Batch::Node(v.scale(1.0 / c)),
            (Batch::Const(c), Batch::Node(v)) => Batch::Node(broadcast(&v, c).div(&v)),
            (Batch::Node(a), Batch::Node(b)) => Batch::Node(a.div(&b)),
        }
    }
}

impl Neg for Batch {
    type Output = Batch;
    fn neg(self) -> Batch {
        self.map(|c| -c, |v| v.scale(-1.0))
    }
}

impl Scalar for Batch {
    fn from_f64(c: f64) -> Self {
        Batch::Const(c)
    }

    fn scale(&self, c: f64) -> Self {
        self.clone() * Batch::Const(c)
    }

    fn add_f64(&self, c: f64) -> Self {
        self.clone() + Batch::Const(c)
    }

    fn magnitude(&self) -> f64 {
        match self {
            Batch::Const(c) => c.abs(),
            Batch::Node(v) => v.value().max_abs(),
        }
    }

    fn is_zero_divisor(&self) -> bool {
        match self {
            Batch::Const(c) => c.abs() <= ZERO_DIVISOR_TOL,
            Batch::Node(v) => v.value().data.iter().any(|x| x.abs() <= ZERO_DIVISOR_TOL),
        }
    }

    fn sin(&self) -> Self {
        self.map(f64::sin, Var::sin)
    }

    fn cos(&self) -> Self {
        self.map(f64::cos, Var::cos)
    }

    fn exp(&self) -> Self {
        self.map(f64::exp, Var::exp)
    }

    fn tanh(&self) -> Self {
        self.map(f64::tanh, Var::tanh)
    }

    fn sigmoid(&self) -> Self {
        self.map(sigmoid, Var::sigmoid)
    }

    fn square(&self) -> Self {
        self.map(|c| c * c, |v| v.powi(2))
    }

    fn powi(&self, n: i32) -> Self {
        self.map(|c| c.powi(n), |v| v.powi(n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd(f: impl Fn(f64) -> f64, x: f64) -> f64 {
        let e = 1e-6;
        (f(x + e) - f(x - e)) / (2.0 * e)
    }

    #[test]
    fn quadratic_form_gradient() {
        let tape = Tape::new();
        let w = tape.leaf(Tensor::new(2, 2, vec![1.0, 2.0, 3.0, 4.0]));
        let x = tape.leaf(Tensor::column(vec![1.0, 0.0]));
        let loss = w.matmul(&x).sum_squares();
        let g = tape.backward(&loss).wrt(&w);
        // d|Wx|^2/dW = 2 (Wx) x^T; Wx = (1, 3).
        assert_eq!(g.data, vec![2.0, 0.0, 6.0, 0.0]);
    }

    #[test]
    fn unused_leaf_has_zero_gradient() {
        let tape = Tape::new();
        let a = tape.leaf(Tensor::column(vec![1.0, 2.0]));
        let b = tape.leaf(Tensor::column(vec![3.0, 4.0]));
        let loss = a.tanh().sum();
        assert_eq!(tape.backward(&loss).wrt(&b).data, vec![0.0, 0.0]);
    }

    #[test]
    fn elementwise_rules_match_finite_differences() {
        let x0 = 0.37;
        let chain = |x: f64| {
            let s = sigmoid(x.sin() * x.exp());
            (s / (1.0 + x.cos().powi(2))).tanh()
        };
        let tape = Tape::new();
        let x = Batch::Node(tape.leaf(Tensor::column(vec![x0])));
        let s = (x.sin() * x.exp()).sigmoid();
        let y = (s / (x.cos().powi(2) + Batch::Const(1.0))).tanh();
        let y = y.as_var().unwrap().sum();
        assert!((y.item() - chain(x0)).abs() < 1e-15);
        let g = tape.backward(&y).wrt(x.as_var().unwrap()).data[0];
        assert!((g - fd(chain, x0)).abs() < 1e-8);
    }

    #[test]
    fn hcat_and_column_route_adjoints() {
        let tape = Tape::new();
        let a = tape.leaf(Tensor::column(vec![1.0, 2.0]));
        let b = tape.leaf(Tensor::column(vec![3.0, 4.0]));
        let m = tape.hcat(&[a.clone(), b.clone()]);
        let loss = m.column(1).scale(3.0).sum().add(&m.column(0).sum_squares());
        let g = tape.backward(&loss);
        assert_eq!(g.wrt(&a).data, vec![2.0, 4.0]);
        assert_eq!(g.wrt(&b).data, vec![3.0, 3.0]);
    }
}
