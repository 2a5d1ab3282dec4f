//! Numeric computation of the IMDE coefficient fields `f_k`.
//!
//! For a one-step map `Phi_h` composed `S` times, the coefficients satisfy
//!
//! ```text
//! f_k = [h^{k+1}] (phi_{Sh,f}(x) - (Phi_{h, f_h^{k-1}})^S(x)) / S,   f_h^{k-1} = sum_{j<k} h^j f_j
//! ```
//!
//! Both sides are expanded in `h` by running the flow expansion and the
//! integrator itself over [`Tower`] values, with `h` a fresh series variable.
//! Stage points other than `x` carry `h`, so the lower coefficients there are
//! computed recursively one level up; the nesting depth is `k`.

use std::collections::HashMap;
use std::sync::Mutex;

use crate::algebra::tower::{self, Tower};
use crate::algebra::{flow_taylor, FnField, Jet, Scalar, VectorField};
use crate::error::{Error, Result};
use crate::integrators::{compose, LmmScheme, Method};

/// Fields the engine can expand: evaluable on towers and on jets of towers.
pub trait ExpandableField:
    VectorField<Tower> + VectorField<Jet<Tower>> + VectorField<f64> + VectorField<Jet<f64>>
{
}

impl<F> ExpandableField for F where
    F: VectorField<Tower> + VectorField<Jet<Tower>> + VectorField<f64> + VectorField<Jet<f64>>
{
}

/// The integrator whose IMDE is computed.
#[derive(Clone, Debug, PartialEq)]
pub enum ImdeMethod {
    /// `(Phi_h)^S` for a one-step method.
    OneStep {
        method: Method,
        compositions: usize,
    },
    Multistep(LmmScheme),
}

impl ImdeMethod {
    pub fn one_step(method: Method) -> Self {
        ImdeMethod::OneStep { method, compositions: 1 }
    }

    pub fn composed(method: Method, compositions: usize) -> Self {
        ImdeMethod::OneStep { method, compositions }
    }

    pub fn declared_order(&self) -> usize {
        match self {
            ImdeMethod::OneStep { method, .. } => method.order(),
            ImdeMethod::Multistep(s) => lmm_order(s),
        }
    }
}

/// Largest `p` with `sum_m alpha_m m^j = j sum_m beta_m m^{j-1}` for `j <= p`.
pub fn lmm_order(s: &LmmScheme) -> usize {
    let mut p = 0;
    for j in 1..=12 {
        let lhs: f64 = s.alpha.iter().enumerate().map(|(m, a)| a * (m as f64).powi(j)).sum();
        let rhs: f64 = s.beta.iter().enumerate().map(|(m, b)| j as f64 * b * (m as f64).powi(j - 1)).sum();
        if (lhs - rhs).abs() > 1e-10 {
            break;
        }
        p = j as usize;
    }
    p
}

fn same_point(a: &[Tower], b: &[Tower]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.same_as(y))
}

/// `sum_j h^j f_j` by Horner's rule.
fn horner(fs: &[Vec<Tower>], h: &Tower) -> Vec<Tower> {
    let n = fs[0].len();
    (0..n)
        .map(|i| {
            let mut acc = fs[fs.len() - 1][i].clone();
            for f in fs[..fs.len() - 1].iter().rev() {
                acc = acc * h.clone() + f[i].clone();
            }
            acc
        })
        .collect()
}

/// Coefficients `f_0 ..= f_kmax` of a one-step method at a tower point.
pub fn one_step_coefficients<F: ExpandableField + ?Sized>(
    f: &F,
    method: &Method,
    compositions: usize,
    x: &[Tower],
    kmax: usize,
) -> Result<Vec<Vec<Tower>>> {
    let n = x.len();
    let mut fs: Vec<Vec<Tower>> = vec![VectorField::<Tower>::eval(f, x)?];
    if kmax == 0 {
        return Ok(fs);
    }
    let level = tower::max_level(x) + 1;
    let c = flow_taylor(f, x, kmax + 1)?;
    let s = compositions as f64;
    for k in 1..=kmax {
        let h = Tower::variable(level, Tower::Num(0.0), k + 1);
        let lower = &fs;
        let g = FnField::new(n, |y: &[Tower]| -> Result<Vec<Tower>> {
            if same_point(y, x) {
                Ok(horner(&lower[..k], &h))
            } else {
                let fy = one_step_coefficients(f, method, compositions, y, k - 1)?;
                Ok(horner(&fy, &h))
            }
        });
        let y1 = compose(method, &g, x, &h, compositions)?;
        let sk = s.powi(k as i32 + 1);
        let fk: Vec<Tower> =
            (0..n).map(|i| (c[k + 1][i].scale(sk) - y1[i].coeff(level, k + 1)).scale(1.0 / s)).collect();
        fs.push(fk);
    }
    Ok(fs)
}

/// Coefficients `f_0 ..= f_kmax` of a weakly stable, consistent multistep scheme:
///
/// ```text
/// f_k = (sum_m alpha_m m^{k+1} c_{k+1} - sum_m beta_m sum_{j=1}^k m^j [t^j] f_{k-j}(phi_t(x))) / sum_m beta_m
/// ```
///
/// where `c_{k+1} = D^k f / (k+1)!` are the flow coefficients and the
/// `t^j` coefficient of `f_i` along the flow is `D^j f_i / j!`.
pub fn multistep_coefficients<F: ExpandableField + ?Sized>(
    f: &F,
    scheme: &LmmScheme,
    x: &[Tower],
    kmax: usize,
) -> Result<Vec<Vec<Tower>>> {
    let n = x.len();
    let f0 = VectorField::<Tower>::eval(f, x)?;
    if kmax == 0 {
        return Ok(vec![f0]);
    }
    let c = flow_taylor(f, x, kmax + 1)?;
    let level = tower::max_level(x) + 1;
    // the flow as a series in t, truncated at kmax
    let path: Vec<Tower> =
        (0..n).map(|i| Tower::series(level, c[..=kmax].iter().map(|ck| ck[i].clone()).collect())).collect();
    let along = multistep_coefficients(f, scheme, &path, kmax - 1)?;
    let sum_beta: f64 = scheme.beta.iter().sum();
    let mut fs = vec![f0];
    for k in 1..=kmax {
        let fk: Vec<Tower> = (0..n)
            .map(|i| {
                let mut acc = Tower::Num(0.0);
                for (m, &a) in scheme.alpha.iter().enumerate() {
                    if a != 0.0 && m != 0 {
                        acc = acc + c[k + 1][i].scale(a * (m as f64).powi(k as i32 + 1));
                    }
                }
                for (m, &b) in scheme.beta.iter().enumerate() {
                    if b == 0.0 || m == 0 {
                        continue;
                    }
                    for j in 1..=k {
                        let w = b * (m as f64).powi(j as i32);
                        acc = acc - along[k - j][i].coeff(level, j).scale(w);
                    }
                }
                acc.scale(1.0 / sum_beta)
            })
            .collect();
        fs.push(fk);
    }
    Ok(fs)
}

/// The IMDE of an integrator applied to `f`, truncated at order `K`, with
/// coefficients memoized per base point.
pub struct ImdeField<F> {
    f: F,
    method: ImdeMethod,
    order: usize,
    cache: Mutex<HashMap<Vec<u64>, Vec<Vec<f64>>>>,
}

impl<F: ExpandableField> ImdeField<F> {
    pub fn new(f: F, method: ImdeMethod, order: usize) -> Result<Self> {
        if let ImdeMethod::OneStep { compositions: 0, .. } = method {
            return Err(Error::BadParams("composition count must be at least 1".into()));
        }
        Ok(Self { f, method, order, cache: Mutex::new(HashMap::new()) })
    }

    pub fn base(&self) -> &F {
        &self.f
    }

    pub fn method(&self) -> &ImdeMethod {
        &self.method
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `f_0 ..= f_kmax` at a tower point (no memoization).
    pub fn coefficients_tower(&self, x: &[Tower], kmax: usize) -> Result<Vec<Vec<Tower>>> {
        if x.len() != VectorField::<f64>::dim(&self.f) {
            return Err(Error::DimensionMismatch { expected: VectorField::<f64>::dim(&self.f), got: x.len() });
        }
        match &self.method {
            ImdeMethod::OneStep { method, compositions } => {
                one_step_coefficients(&self.f, method, *compositions, x, kmax)
            }
            ImdeMethod::Multistep(s) => multistep_coefficients(&self.f, s, x, kmax),
        }
    }

    /// `f_0 ..= f_kmax` at a point.
    pub fn coefficients(&self, x: &[f64], kmax: usize) -> Result<Vec<Vec<f64>>> {
        let key: Vec<u64> = x.iter().map(|v| v.to_bits()).collect();
        if let Some(hit) = self.cache.lock().unwrap().get(&key) {
            if hit.len() > kmax {
                return Ok(hit[..=kmax].to_vec());
            }
        }
        let fs = self.coefficients_tower(&tower::lift(x), kmax)?;
        let fs: Vec<Vec<f64>> = fs.iter().map(|v| tower::values(v)).collect();
        self.cache.lock().unwrap().insert(key, fs.clone());
        Ok(fs)
    }

    pub fn coefficient(&self, x: &[f64], k: usize) -> Result<Vec<f64>> {
        Ok(self.coefficients(x, k)?.pop().unwrap())
    }

    /// `f_h^K(x) = sum_{k <= K} h^k f_k(x)`.
    pub fn truncated_eval(&self, x: &[f64], h: f64) -> Result<Vec<f64>> {
        let fs = self.coefficients(x, self.order)?;
        let n = x.len();
        Ok((0..n).map(|i| fs.iter().rev().fold(0.0, |acc, fk| acc * h + fk[i])).collect())
    }

    /// `f_h^K` as a plain-number vector field at a fixed step.
    pub fn truncated(&self, h: f64) -> TruncatedImde<'_, F> {
        TruncatedImde { imde: self, h }
    }

    /// The `k`-th coefficient as a field over towers, for differentiating it.
    pub fn coefficient_field(&self, k: usize) -> impl VectorField<Tower> + '_ {
        FnField::new(VectorField::<f64>::dim(&self.f), move |y: &[Tower]| {
            Ok(self.coefficients_tower(y, k)?.pop().unwrap())
        })
    }

    /// `f_h^K` as a field over towers.
    pub fn truncated_field_tower(&self, h: f64) -> impl VectorField<Tower> + '_ {
        FnField::new(VectorField::<f64>::dim(&self.f), move |y: &[Tower]| {
            let fs = self.coefficients_tower(y, self.order)?;
            Ok(horner(&fs, &Tower::Num(h)))
        })
    }
}

pub struct TruncatedImde<'a, F> {
    imde: &'a ImdeField<F>,
    h: f64,
}

impl<F: ExpandableField> VectorField<f64> for TruncatedImde<'_, F> {
    fn dim(&self) -> usize {
        VectorField::<f64>::dim(&self.imde.f)
    }

    fn eval(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.imde.truncated_eval(y, self.h)
    }
}

/// Largest deviation of the coefficients `f_0..=f_k` of `(Phi_h)^S` from those of `Phi_h`.
pub fn composition_invariance_defect<F: ExpandableField + Clone>(
    method: &Method,
    f: &F,
    x: &[f64],
    k: usize,
    compositions: &[usize],
) -> Result<f64> {
    let base = ImdeField::new(f.clone(), ImdeMethod::one_step(method.clone()), k)?.coefficients(x, k)?;
    let mut worst: f64 = 0.0;
    for &s in compositions {
        let other = ImdeField::new(f.clone(), ImdeMethod::composed(method.clone(), s), k)?.coefficients(x, k)?;
        for (a, b) in base.iter().zip(&other) {
            for (u, v) in a.iter().zip(b) {
                worst = worst.max((u - v).abs());
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::FieldExpr;
    use crate::integrators::ButcherTableau;

    fn rk(id: &str) -> ImdeMethod {
        ImdeMethod::one_step(Method::named(id).unwrap())
    }

    #[test]
    fn euler_linear_coefficients_are_exponential() {
        let f = FieldExpr::parse("(* 0.7 y1)", None).unwrap();
        let imde = ImdeField::new(f, rk("euler"), 5).unwrap();
        let fs = imde.coefficients(&[1.3], 5).unwrap();
        let mut fact = 1.0;
        for (k, fk) in fs.iter().enumerate() {
            fact *= (k + 1) as f64;
            let expected = 0.7f64.powi(k as i32 + 1) / fact * 1.3;
            assert!((fk[0] - expected).abs() < 1e-14, "k={k}");
        }
    }

    #[test]
    fn implicit_euler_linear() {
        // (1 - e^{-lambda h}) / h = lambda - lambda^2 h / 2 + lambda^3 h^2 / 6 - ...
        let f = FieldExpr::parse("y1", None).unwrap();
        let imde = ImdeField::new(f, rk("implicit-euler"), 3).unwrap();
        let fs = imde.coefficients(&[1.0], 3).unwrap();
        let expected = [1.0, -0.5, 1.0 / 6.0, -1.0 / 24.0];
        for (fk, e) in fs.iter().zip(expected) {
            assert!((fk[0] - e).abs() < 1e-14);
        }
    }

    #[test]
    fn midpoint_first_coefficient_vanishes() {
        let f = FieldExpr::parse("(* -10 (sin y2)); y1", None).unwrap();
        let imde = ImdeField::new(f, rk("explicit-midpoint"), 2).unwrap();
        let fs = imde.coefficients(&[0.2, 1.0], 2).unwrap();
        assert!(fs[1].iter().all(|v| v.abs() < 1e-12));
        assert!(fs[2].iter().any(|v| v.abs() > 1e-3));
    }

    #[test]
    fn ab2_second_coefficient() {
        let f = FieldExpr::parse("y1", None).unwrap();
        let imde = ImdeField::new(f, ImdeMethod::Multistep(LmmScheme::ab2()), 2).unwrap();
        let fs = imde.coefficients(&[1.0], 2).unwrap();
        assert!(fs[1][0].abs() < 1e-14);
        assert!((fs[2][0] - 5.0 / 12.0).abs() < 1e-14);
    }

    #[test]
    fn lmm_euler_matches_one_step_euler() {
        let f = FieldExpr::parse("(* -10 (sin y2)); (+ y1 (* 0.2 (pow y2 2)))", None).unwrap();
        let a = ImdeField::new(f.clone(), rk("euler"), 4).unwrap().coefficients(&[0.3, 0.8], 4).unwrap();
        let b = ImdeField::new(f, ImdeMethod::Multistep(LmmScheme::explicit_euler()), 4)
            .unwrap()
            .coefficients(&[0.3, 0.8], 4)
            .unwrap();
        for (u, v) in a.iter().flatten().zip(b.iter().flatten()) {
            assert!((u - v).abs() < 1e-10 * u.abs().max(1.0));
        }
    }

    #[test]
    fn memoized_values_are_reused() {
        let f = FieldExpr::parse("(sin y1)", None).unwrap();
        let imde = ImdeField::new(f, ImdeMethod::one_step(Method::Rk(ButcherTableau::rk4())), 3).unwrap();
        let a = imde.coefficients(&[0.4], 3).unwrap();
        let b = imde.coefficients(&[0.4], 2).unwrap();
        assert_eq!(&a[..3], &b[..]);
        // rk4 has order 4
        for fk in &a[1..] {
            assert!(fk[0].abs() < 1e-13);
        }
    }
}
