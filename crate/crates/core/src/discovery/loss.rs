use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use crate::algebra::VectorField;
use crate::error::{Error, Result};
use crate::integrators::{ode_solve, LmmScheme, Method, SolverSpec};
use crate::nn::mlp::{split_columns, stack_columns};
use crate::nn::{BoundMlp, Mlp, Tape, Tensor, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Odenet,
    Lmnet,
    HnnSymplecticEuler,
    HnnExplicit,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Odenet => "odenet",
            ModelKind::Lmnet => "lmnet",
            ModelKind::HnnSymplecticEuler => "hnn-symplectic-euler",
            ModelKind::HnnExplicit => "hnn-explicit",
        }
    }

    pub fn is_hnn(self) -> bool {
        matches!(self, ModelKind::HnnSymplecticEuler | ModelKind::HnnExplicit)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "odenet" => Ok(ModelKind::Odenet),
            "lmnet" => Ok(ModelKind::Lmnet),
            "hnn-symplectic-euler" => Ok(ModelKind::HnnSymplecticEuler),
            "hnn-explicit" => Ok(ModelKind::HnnExplicit),
            other => Err(Error::Config(format!("unknown model kind `{other}`"))),
        }
    }
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

fn check_pairs(inputs: &[Vec<f64>], targets: &[Vec<f64>]) -> Result<()> {
    if inputs.len() != targets.len() {
        return Err(Error::DimensionMismatch { expected: inputs.len(), got: targets.len() });
    }
    if inputs.is_empty() {
        return Err(Error::BadParams("empty batch".into()));
    }
    Ok(())
}

/// Mean of `|ode_solve(spec, f, x_i) - y_i|^2`.
pub fn odenet_loss<F: VectorField<f64> + ?Sized>(
    f: &F,
    spec: &SolverSpec,
    inputs: &[Vec<f64>],
    targets: &[Vec<f64>],
) -> Result<f64> {
    check_pairs(inputs, targets)?;
    let mut total = 0.0;
    for (x, y) in inputs.iter().zip(targets) {
        total += squared_distance(&ode_solve(spec, f, x)?, y);
    }
    Ok(total / inputs.len() as f64)
}

/// `sum_i |sum_m alpha_m y_{i+m} / h - sum_m beta_m f(y_{i+m})|^2` over every window.
pub fn lmnet_loss<F: VectorField<f64> + ?Sized>(
    f: &F,
    scheme: &LmmScheme,
    trajectory: &[Vec<f64>],
    h: f64,
) -> Result<f64> {
    let m = scheme.steps();
    if trajectory.len() < m + 1 {
        return Err(Error::BadParams(format!(
            "trajectory of {} points is shorter than the {} points of one window",
            trajectory.len(),
            m + 1
        )));
    }
    let mut total = 0.0;
    for window in trajectory.windows(m + 1) {
        let r = scheme.residual(f, window, h)?;
        total += r.iter().map(|v| (v / h).powi(2)).sum::<f64>();
    }
    Ok(total)
}

fn split_pq(x: &[f64]) -> Result<(&[f64], &[f64])> {
    if !x.len().is_multiple_of(2) {
        return Err(Error::OddDimension(x.len()));
    }
    Ok(x.split_at(x.len() / 2))
}

/// Residual of the symplectic Euler scheme with canonical field `g = J^{-1} grad u`:
/// mean of `|p + h g_p(pbar, q) - pbar|^2 + |q + h g_q(pbar, q) - qbar|^2`.
pub fn hnn_symplectic_euler_loss<G: VectorField<f64> + ?Sized>(
    g: &G,
    inputs: &[Vec<f64>],
    targets: &[Vec<f64>],
    h: f64,
) -> Result<f64> {
    check_pairs(inputs, targets)?;
    let mut total = 0.0;
    for (x, y) in inputs.iter().zip(targets) {
        let (_, q) = split_pq(x)?;
        let (pbar, _) = split_pq(y)?;
        let mut z = pbar.to_vec();
        z.extend_from_slice(q);
        let gz = g.eval(&z)?;
        total += x.iter().zip(&gz).zip(y).map(|((xi, gi), yi)| (xi + h * gi - yi).powi(2)).sum::<f64>();
    }
    Ok(total / inputs.len() as f64)
}

/// Mean of `|x + h g(x) - y|^2`, one explicit Euler step of `g = J^{-1} grad u`.
pub fn hnn_explicit_euler_loss<G: VectorField<f64> + ?Sized>(
    g: &G,
    inputs: &[Vec<f64>],
    targets: &[Vec<f64>],
    h: f64,
) -> Result<f64> {
    check_pairs(inputs, targets)?;
    let mut total = 0.0;
    for (x, y) in inputs.iter().zip(targets) {
        split_pq(x)?;
        let gx = g.eval(x)?;
        total += x.iter().zip(&gx).zip(y).map(|((xi, gi), yi)| (xi + h * gi - yi).powi(2)).sum::<f64>();
    }
    Ok(total / inputs.len() as f64)
}

/// A training objective together with its integrator.
#[derive(Clone, Debug, PartialEq)]
pub enum Objective {
    Odenet(SolverSpec),
    Lmnet { scheme: LmmScheme, h: f64 },
    HnnSymplecticEuler { h: f64 },
    HnnExplicit { h: f64 },
}

fn rows(points: &[Vec<f64>], idx: &[usize]) -> Tensor {
    let picked: Vec<Vec<f64>> = idx.iter().map(|&i| points[i].clone()).collect();
    Tensor::from_rows(&picked)
}

impl Objective {
    pub fn kind(&self) -> ModelKind {
        match self {
            Objective::Odenet(_) => ModelKind::Odenet,
            Objective::Lmnet { .. } => ModelKind::Lmnet,
            Objective::HnnSymplecticEuler { .. } => ModelKind::HnnSymplecticEuler,
            Objective::HnnExplicit { .. } => ModelKind::HnnExplicit,
        }
    }

    /// Name of the integrator inside the loss.
    pub fn method_name(&self) -> String {
        match self {
            Objective::Odenet(spec) => spec.method.name().to_string(),
            Objective::Lmnet { scheme, .. } => scheme.name.clone(),
            Objective::HnnSymplecticEuler { .. } => "symplectic-euler".into(),
            Objective::HnnExplicit { .. } => "euler".into(),
        }
    }

    /// Solver step `h`.
    pub fn step(&self) -> f64 {
        match self {
            Objective::Odenet(spec) => spec.h,
            Objective::Lmnet { h, .. } | Objective::HnnSymplecticEuler { h } | Objective::HnnExplicit { h } => *h,
        }
    }

    pub fn compositions(&self) -> usize {
        match self {
            Objective::Odenet(spec) => spec.steps,
            _ => 1,
        }
    }

    /// Number of loss terms: pairs, or multistep windows.
    pub fn terms(&self, data: &Dataset) -> usize {
        match self {
            Objective::Lmnet { scheme, .. } => (data.len() + 1).saturating_sub(scheme.steps()),
            _ => data.len(),
        }
    }

    /// Checks that the objective can be trained on `data` with `net`.
    pub fn validate(&self, net: &Mlp, data: &Dataset) -> Result<()> {
        let n = data.dim();
        match self {
            Objective::Odenet(spec) => {
                let t = spec.data_step();
                if (t - data.data_step).abs() > 1e-12 * data.data_step.abs().max(1.0) {
                    return Err(Error::Config(format!(
                        "solver covers T = {t} but the data step is {}",
                        data.data_step
                    )));
                }
                match &spec.method {
                    Method::Rk(tab) if tab.is_explicit() => {}
                    other => {
                        return Err(Error::UnsupportedPrimitive(format!(
                            "training through the implicit solve of `{}`",
                            other.name()
                        )))
                    }
                }
            }
            Objective::Lmnet { scheme, h } => {
                if (h - data.data_step).abs() > 1e-12 * data.data_step.abs().max(1.0) {
                    return Err(Error::Config(format!("LMNet step {h} differs from the data step {}", data.data_step)));
                }
                data.trajectory()?;
                if self.terms(data) == 0 {
                    return Err(Error::BadParams(format!("trajectory too short for {}", scheme.name)));
                }
            }
            Objective::HnnSymplecticEuler { h } | Objective::HnnExplicit { h } => {
                if (h - data.data_step).abs() > 1e-12 * data.data_step.abs().max(1.0) {
                    return Err(Error::Config(format!("HNN step {h} differs from the data step {}", data.data_step)));
                }
                if !n.is_multiple_of(2) {
                    return Err(Error::OddDimension(n));
                }
                if net.output_dim() != 1 || net.input_dim() != n {
                    return Err(Error::Config(format!("an HNN on dimension {n} needs widths {n},...,1")));
                }
                return Ok(());
            }
        }
        if net.input_dim() != n || net.output_dim() != n {
            return Err(Error::Config(format!("a vector-field net on dimension {n} needs widths {n},...,{n}")));
        }
        Ok(())
    }

    /// The loss over the terms `idx`, recorded on the network's tape.
    /// Mean-type losses average over `idx`; the LMNet sum is rescaled to the
    /// full window count so that batch and full losses agree in expectation.
    pub fn loss_var(&self, net: &BoundMlp, data: &Dataset, idx: &[usize]) -> Result<Var> {
        let tape: &Tape = net.tape();
        let b = idx.len() as f64;
        match self {
            Objective::Odenet(spec) => {
                let x = tape.leaf(rows(&data.inputs, idx));
                let y = tape.leaf(rows(&data.targets, idx));
                let field = net.as_field();
                let out = ode_solve(spec, &field, &split_columns(&x))?;
                Ok(stack_columns(tape, &out)?.sub(&y).sum_squares().scale(1.0 / b))
            }
            Objective::Lmnet { scheme, h } => {
                let traj = data.trajectory()?;
                let n = data.dim();
                let mut known = vec![0.0; idx.len() * n];
                for (r, &i) in idx.iter().enumerate() {
                    for (m, a) in scheme.alpha.iter().enumerate() {
                        for j in 0..n {
                            known[r * n + j] += a / h * traj[i + m][j];
                        }
                    }
                }
                let mut residual = tape.leaf(Tensor::new(idx.len(), n, known));
                for (m, beta) in scheme.beta.iter().enumerate() {
                    if *beta != 0.0 {
                        let shifted: Vec<usize> = idx.iter().map(|i| i + m).collect();
                        let ym = tape.leaf(rows(&traj, &shifted));
                        residual = residual.sub(&net.forward(&ym).scale(*beta));
                    }
                }
                let scale = self.terms(data) as f64 / b;
                Ok(residual.sum_squares().scale(scale))
            }
            Objective::HnnSymplecticEuler { h } => {
                let d = data.dim() / 2;
                let z: Vec<Vec<f64>> = idx
                    .iter()
                    .map(|&i| {
                        let mut z = data.targets[i][..d].to_vec();
                        z.extend_from_slice(&data.inputs[i][d..]);
                        z
                    })
                    .collect();
                let z = tape.leaf(Tensor::from_rows(&z));
                let x = tape.leaf(rows(&data.inputs, idx));
                let y = tape.leaf(rows(&data.targets, idx));
                let g = net.hamiltonian_field(&z)?;
                Ok(x.add(&g.scale(*h)).sub(&y).sum_squares().scale(1.0 / b))
            }
            Objective::HnnExplicit { h } => {
                let x = tape.leaf(rows(&data.inputs, idx));
                let y = tape.leaf(rows(&data.targets, idx));
                let g = net.hamiltonian_field(&x)?;
                Ok(x.add(&g.scale(*h)).sub(&y).sum_squares().scale(1.0 / b))
            }
        }
    }

    /// The loss over every term of `data`.
    pub fn loss(&self, net: &Mlp, data: &Dataset) -> Result<f64> {
        let idx: Vec<usize> = (0..self.terms(data)).collect();
        let tape = Tape::new();
        Ok(self.loss_var(&net.bind(&tape), data, &idx)?.item())
    }
}
