//! Taylor expansion of exact flows and iterated Lie derivatives.

use super::field::VectorField;
use super::jet::Jet;
use super::scalar::Scalar;
use crate::error::Result;

/// Taylor coefficients `c_0 .. c_K` of the exact solution `t -> phi_t(x)`.
///
/// `c_0 = x` and `c_{k+1} = [t^k] f(sum_j c_j t^j) / (k + 1)`, so
/// `c_1 = f`, `c_2 = f'f / 2`, `c_3 = (f''(f,f) + f'f'f) / 6`, ...
pub fn flow_taylor<S, F>(f: &F, x: &[S], order: usize) -> Result<Vec<Vec<S>>>
where
    S: Scalar,
    F: VectorField<Jet<S>> + ?Sized,
{
    let n = x.len();
    let mut c: Vec<Vec<S>> = vec![x.to_vec()];
    for k in 0..order {
        let point: Vec<Jet<S>> = (0..n).map(|i| Jet::new(c.iter().map(|ck| ck[i].clone()).collect())).collect();
        let v = f.eval(&point)?;
        let scale = 1.0 / (k as f64 + 1.0);
        c.push(v.iter().map(|vi| vi.coeff(k).scale(scale)).collect());
    }
    Ok(c)
}

/// The flow expansion packed as one jet per state component.
pub fn flow_jets<S, F>(f: &F, x: &[S], order: usize) -> Result<Vec<Jet<S>>>
where
    S: Scalar,
    F: VectorField<Jet<S>> + ?Sized,
{
    let c = flow_taylor(f, x, order)?;
    Ok((0..x.len()).map(|i| Jet::new(c.iter().map(|ck| ck[i].clone()).collect())).collect())
}

/// `(D^j g)(x)` where `D g = g' f`, read off as `j!` times the `t^j`
/// coefficient of `g` along the flow of `f`.
pub fn lie_derivative<S, F, G>(f: &F, g: &G, x: &[S], j: usize) -> Result<Vec<S>>
where
    S: Scalar,
    F: VectorField<Jet<S>> + ?Sized,
    G: VectorField<Jet<S>> + ?Sized,
{
    let path = flow_jets(f, x, j)?;
    let v = g.eval(&path)?;
    let fact: f64 = (1..=j).map(|i| i as f64).product();
    Ok(v.iter().map(|vi| vi.coeff(j).scale(fact)).collect())
}

/// Evaluates the truncated expansion at `t`.
pub fn eval_expansion(c: &[Vec<f64>], t: f64) -> Vec<f64> {
    let n = c[0].len();
    (0..n).map(|i| c.iter().rev().fold(0.0, |acc, ck| acc * t + ck[i])).collect()
}
