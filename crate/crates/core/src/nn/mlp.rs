use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tape::{Act, Batch, Tape, Var};
use super::tensor::Tensor;
use crate::algebra::field::canonical_from_gradient;
use crate::algebra::{Jet, Scalar, VectorField};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Sigmoid,
}

impl Activation {
    pub fn name(self) -> &'static str {
        match self {
            Activation::Tanh => "tanh",
            Activation::Sigmoid => "sigmoid",
        }
    }

    fn apply<S: Scalar>(self, x: &S) -> S {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Sigmoid => x.sigmoid(),
        }
    }

    fn tape_act(self) -> Act {
        match self {
            Activation::Tanh => Act::Tanh,
            Activation::Sigmoid => Act::Sigmoid,
        }
    }

    /// Derivative expressed through the activation's output `a`.
    fn derivative_from_output(self, a: &Var) -> Var {
        match self {
            Activation::Tanh => a.powi(2).scale(-1.0).add_scalar(1.0),
            Activation::Sigmoid => a.mul(&a.scale(-1.0).add_scalar(1.0)),
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tanh" => Ok(Activation::Tanh),
            "sigmoid" => Ok(Activation::Sigmoid),
            other => Err(Error::Config(format!("unknown activation `{other}`"))),
        }
    }
}

/// Dense feed-forward network: affine layers separated by the activation,
/// with an affine output layer.
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp {
    widths: Vec<usize>,
    activation: Activation,
    seed: u64,
    /// One `out x in` matrix per layer.
    pub weights: Vec<Tensor>,
    pub biases: Vec<Vec<f64>>,
}

fn check_widths(widths: &[usize]) -> Result<()> {
    if widths.len() < 2 || widths.contains(&0) {
        return Err(Error::BadParams(format!("invalid layer widths {widths:?}")));
    }
    Ok(())
}

impl Mlp {
    /// Weights uniform in `±sqrt(6 / (in + out))`, biases zero.
    pub fn new(widths: &[usize], activation: Activation, seed: u64) -> Result<Self> {
        check_widths(widths)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let weights = widths
            .windows(2)
            .map(|w| {
                let (n_in, n_out) = (w[0], w[1]);
                let bound = (6.0 / (n_in + n_out) as f64).sqrt();
                let data = (0..n_in * n_out).map(|_| rng.gen_range(-bound..bound)).collect();
                Tensor::new(n_out, n_in, data)
            })
            .collect();
        let biases = widths[1..].iter().map(|&n| vec![0.0; n]).collect();
        Ok(Self { widths: widths.to_vec(), activation, seed, weights, biases })
    }

    pub fn zeros(widths: &[usize], activation: Activation) -> Result<Self> {
        check_widths(widths)?;
        Ok(Self {
            widths: widths.to_vec(),
            activation,
            seed: 0,
            weights: widths.windows(2).map(|w| Tensor::zeros(w[1], w[0])).collect(),
            biases: widths[1..].iter().map(|&n| vec![0.0; n]).collect(),
        })
    }

    /// Builds a network from explicit parameters, checking every shape.
    pub fn from_parts(
        widths: &[usize],
        activation: Activation,
        seed: u64,
        weights: Vec<Tensor>,
        biases: Vec<Vec<f64>>,
    ) -> Result<Self> {
        check_widths(widths)?;
        let layers = widths.len() - 1;
        if weights.len() != layers || biases.len() != layers {
            return Err(Error::DimensionMismatch { expected: layers, got: weights.len().min(biases.len()) });
        }
        for (l, w) in widths.windows(2).enumerate() {
            if weights[l].shape() != (w[1], w[0]) {
                return Err(Error::DimensionMismatch { expected: w[1] * w[0], got: weights[l].data.len() });
            }
            if biases[l].len() != w[1] {
                return Err(Error::DimensionMismatch { expected: w[1], got: biases[l].len() });
            }
        }
        Ok(Self { widths: widths.to_vec(), activation, seed, weights, biases })
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn input_dim(&self) -> usize {
        self.widths[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.widths.last().unwrap()
    }

    pub fn param_count(&self) -> usize {
        self.widths.windows(2).map(|w| (w[0] + 1) * w[1]).sum()
    }

    /// Parameters flattened layer by layer: weights row-major, then biases.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend_from_slice(&w.data);
            out.extend_from_slice(b);
        }
        out
    }

    pub fn set_params(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.param_count() {
            return Err(Error::DimensionMismatch { expected: self.param_count(), got: flat.len() });
        }
        let mut at = 0;
        for (w, b) in self.weights.iter_mut().zip(&mut self.biases) {
            let n = w.data.len();
            w.data.copy_from_slice(&flat[at..at + n]);
            at += n;
            let m = b.len();
            b.copy_from_slice(&flat[at..at + m]);
            at += m;
        }
        Ok(())
    }

    fn check_input(&self, n: usize) -> Result<()> {
        if n != self.input_dim() {
            return Err(Error::DimensionMismatch { expected: self.input_dim(), got: n });
        }
        Ok(())
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x.len())?;
        let last = self.weights.len() - 1;
        let mut h = x.to_vec();
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let mut z: Vec<f64> =
                (0..w.rows).map(|r| b[r] + w.row_slice(r).iter().zip(&h).map(|(a, v)| a * v).sum::<f64>()).collect();
            if l < last {
                for v in &mut z {
                    *v = self.activation.apply(v);
                }
            }
            h = z;
        }
        Ok(h)
    }

    /// Forward pass over any scalar algebra.
    pub fn forward_generic<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>> {
        self.check_input(x.len())?;
        let last = self.weights.len() - 1;
        let mut h = x.to_vec();
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            h = (0..w.rows)
                .map(|r| {
                    let z = w.row_slice(r).iter().zip(&h).fold(S::from_f64(b[r]), |acc, (a, v)| acc + v.scale(*a));
                    if l < last {
                        self.activation.apply(&z)
                    } else {
                        z
                    }
                })
                .collect();
        }
        Ok(h)
    }

    /// Records the parameters as leaves of `tape`.
    pub fn bind(&self, tape: &Tape) -> BoundMlp {
        BoundMlp {
            activation: self.activation,
            widths: self.widths.clone(),
            weights: self.weights.iter().map(|w| tape.leaf(w.clone())).collect(),
            biases: self.biases.iter().map(|b| tape.leaf(Tensor::row(b.clone()))).collect(),
            tape: tape.clone(),
        }
    }

    /// Parses a width list such as `2,64,2`.
    pub fn parse_widths(s: &str) -> Result<Vec<usize>> {
        let widths = s
            .split(',')
            .map(|w| w.trim().parse::<usize>().map_err(|_| Error::Config(format!("bad width `{w}` in `{s}`"))))
            .collect::<Result<Vec<_>>>()?;
        check_widths(&widths)?;
        Ok(widths)
    }
}

impl<S: Scalar> VectorField<S> for Mlp {
    fn dim(&self) -> usize {
        self.input_dim()
    }

    fn eval(&self, y: &[S]) -> Result<Vec<S>> {
        self.forward_generic(y)
    }
}

/// A network whose parameters are leaves of a tape.
pub struct BoundMlp {
    activation: Activation,
    widths: Vec<usize>,
    pub weights: Vec<Var>,
    pub biases: Vec<Var>,
    tape: Tape,
}

impl BoundMlp {
    pub fn tape(&self) -> &Tape {
        &self.tape
    }

    pub fn input_dim(&self) -> usize {
        self.widths[0]
    }

    /// Forward pass on a `batch x in` matrix; returns `batch x out`.
    pub fn forward(&self, x: &Var) -> Var {
        self.forward_with_hidden(x).0
    }

    fn forward_with_hidden(&self, x: &Var) -> (Var, Vec<Var>) {
        let last = self.weights.len() - 1;
        let mut hidden = Vec::with_capacity(last);
        let mut h = x.clone();
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            h = if l < last {
                let a = h.dense(w, b, Some(self.activation.tape_act()));
                hidden.push(a.clone());
                a
            } else {
                h.dense(w, b, None)
            };
        }
        (h, hidden)
    }

    /// Gradient of a scalar-output network with respect to its input,
    /// `batch x in`, recorded on the tape so it can be differentiated again.
    pub fn input_gradient(&self, x: &Var) -> Result<Var> {
        let out = *self.widths.last().unwrap();
        if out != 1 {
            return Err(Error::DimensionMismatch { expected: 1, got: out });
        }
        let (_, hidden) = self.forward_with_hidden(x);
        let rows = x.shape().0;
        let ones = self.tape.leaf(Tensor::filled(rows, 1, 1.0));
        let mut g = ones.matmul(self.weights.last().unwrap());
        for (l, a) in hidden.iter().enumerate().rev() {
            g = g.mul(&self.activation.derivative_from_output(a)).matmul(&self.weights[l]);
        }
        Ok(g)
    }

    /// `J^{-1} grad u` on a `batch x 2n` matrix, as `batch x 2n`.
    pub fn hamiltonian_field(&self, x: &Var) -> Result<Var> {
        let d = self.input_dim();
        if !d.is_multiple_of(2) {
            return Err(Error::OddDimension(d));
        }
        let g = self.input_gradient(x)?;
        let cols: Vec<Var> = (0..d).map(|j| g.column(j)).collect();
        let out = canonical_from_gradient(cols.into_iter().map(Batch::Node).collect::<Vec<_>>());
        let vars: Vec<Var> = out.into_iter().map(|b| b.as_var().cloned().expect("recorded column")).collect();
        Ok(self.tape.hcat(&vars))
    }

    /// The network as a vector field over batched columns.
    pub fn as_field(&self) -> TapeField<'_> {
        TapeField { net: self }
    }
}

/// A bound network evaluated column-wise on [`Batch`] values.
pub struct TapeField<'a> {
    net: &'a BoundMlp,
}

/// Stacks per-coordinate batch columns into one `rows x n` matrix.
pub fn stack_columns(tape: &Tape, y: &[Batch]) -> Result<Var> {
    let rows = y.iter().find_map(|b| b.as_var().map(|v| v.shape().0)).unwrap_or(1);
    let cols: Vec<Var> = y.iter().map(|b| b.to_column(tape, rows)).collect();
    Ok(tape.hcat(&cols))
}

/// Splits a `rows x n` matrix into per-coordinate columns.
pub fn split_columns(m: &Var) -> Vec<Batch> {
    (0..m.shape().1).map(|j| Batch::Node(m.column(j))).collect()
}

impl VectorField<Batch> for TapeField<'_> {
    fn dim(&self) -> usize {
        self.net.input_dim()
    }

    fn eval(&self, y: &[Batch]) -> Result<Vec<Batch>> {
        if y.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: y.len() });
        }
        let x = stack_columns(&self.net.tape, y)?;
        Ok(split_columns(&self.net.forward(&x)))
    }
}

/// `y -> J^{-1} grad u(y)` for a scalar network `u`, over any scalar algebra.
#[derive(Clone, Debug)]
pub struct NetHamiltonianField {
    u: Mlp,
}

impl NetHamiltonianField {
    pub fn u(&self) -> &Mlp {
        &self.u
    }
}

pub fn hamiltonian_field_from_net(u: Mlp) -> Result<NetHamiltonianField> {
    if u.output_dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: u.output_dim() });
    }
    if !u.input_dim().is_multiple_of(2) {
        return Err(Error::OddDimension(u.input_dim()));
    }
    Ok(NetHamiltonianField { u })
}

impl<S: Scalar> VectorField<S> for NetHamiltonianField {
    fn dim(&self) -> usize {
        self.u.input_dim()
    }

    fn eval(&self, y: &[S]) -> Result<Vec<S>> {
        self.u.check_input(y.len())?;
        let grad = (0..y.len())
            .map(|i| {
                let point: Vec<Jet<S>> = y
                    .iter()
                    .enumerate()
                    .map(|(j, v)| if i == j { Jet::variable(v.clone(), 1) } else { Jet::constant(v.clone()) })
                    .collect();
                Ok(self.u.forward_generic(&point)?[0].coeff(1))
            })
            .collect::<Result<Vec<S>>>()?;
        Ok(canonical_from_gradient(grad))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn param_count_and_round_trip() {
        let mut net = Mlp::new(&[2, 8, 3], Activation::Tanh, 1).unwrap();
        assert_eq!(net.param_count(), 3 * 8 + 9 * 3);
        let p: Vec<f64> = (0..net.param_count()).map(|i| i as f64).collect();
        net.set_params(&p).unwrap();
        assert_eq!(net.params(), p);
        assert!(net.set_params(&p[1..]).is_err());
    }

    #[test]
    fn init_respects_bound() {
        let net = Mlp::new(&[2, 64, 2], Activation::Sigmoid, 7).unwrap();
        let bound = (6.0 / 66.0f64).sqrt();
        assert!(net.weights.iter().all(|w| w.max_abs() <= bound));
        assert_eq!(net, Mlp::new(&[2, 64, 2], Activation::Sigmoid, 7).unwrap());
        assert_ne!(net, Mlp::new(&[2, 64, 2], Activation::Sigmoid, 8).unwrap());
    }

    #[test]
    fn forward_paths_agree() {
        let net = Mlp::new(&[2, 5, 5, 2], Activation::Tanh, 3).unwrap();
        let x = [0.3, -0.7];
        let a = net.forward(&x).unwrap();
        let b = net.forward_generic(&x).unwrap();
        let tape = Tape::new();
        let bound = net.bind(&tape);
        let c = bound.forward(&tape.leaf(Tensor::row(x.to_vec()))).value().data.clone();
        for i in 0..2 {
            assert!((a[i] - b[i]).abs() < 1e-15 && (a[i] - c[i]).abs() < 1e-15);
        }
        assert!(net.forward(&[1.0]).is_err());
    }

    #[test]
    fn input_gradient_matches_jets() {
        let u = Mlp::new(&[2, 6, 6, 1], Activation::Sigmoid, 11).unwrap();
        let pts = vec![vec![0.2, -0.4], vec![1.0, 0.5]];
        let tape = Tape::new();
        let bound = u.bind(&tape);
        let f = bound.hamiltonian_field(&tape.leaf(Tensor::from_rows(&pts))).unwrap().value();
        let field = hamiltonian_field_from_net(u).unwrap();
        for (r, p) in pts.iter().enumerate() {
            let want: Vec<f64> = field.eval(p).unwrap();
            for j in 0..2 {
                assert!((f.get(r, j) - want[j]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn hamiltonian_field_errors() {
        assert!(matches!(
            hamiltonian_field_from_net(Mlp::zeros(&[3, 4, 1], Activation::Tanh).unwrap()),
            Err(Error::OddDimension(3))
        ));
        assert!(hamiltonian_field_from_net(Mlp::zeros(&[2, 4, 2], Activation::Tanh).unwrap()).is_err());
    }
}
