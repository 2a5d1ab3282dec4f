//! Closed-form low-order IMDE truncations, evaluated from elementary differentials.
//!
//! Derivatives come from multilinear directional derivatives: the coefficient
//! of `e_1 e_2 ... e_m` in `f(x + sum_l e_l v_l)`, with each `e_l` a separate
//! first-order tower variable, is `f^{(m)}(x)(v_1, ..., v_m)`.

use crate::algebra::tower::{self, Tower};
use crate::algebra::{gradient, FieldExpr, Scalar, VectorField};
use crate::error::{Error, Result};

/// `g^{(m)}(x)(v_1, ..., v_m)` for `m = dirs.len()`.
pub fn multilinear<G: VectorField<Tower> + ?Sized>(g: &G, x: &[Tower], dirs: &[Vec<Tower>]) -> Result<Vec<Tower>> {
    let base = tower::max_level(x).max(dirs.iter().map(|d| tower::max_level(d)).max().unwrap_or(0));
    let n = x.len();
    let point: Vec<Tower> = (0..n)
        .map(|i| {
            let mut y = x[i].clone();
            for (l, d) in dirs.iter().enumerate() {
                let e = Tower::variable(base + 1 + l as u32, Tower::Num(0.0), 1);
                y = y + e * d[i].clone();
            }
            y
        })
        .collect();
    let v = g.eval(&point)?;
    Ok(v.into_iter()
        .map(|mut c| {
            for l in (0..dirs.len()).rev() {
                c = c.coeff(base + 1 + l as u32, 1);
            }
            c
        })
        .collect())
}

/// The elementary differentials of `f` at `x` through order four.
pub struct Differentials {
    pub f: Vec<Tower>,
    pub fp_f: Vec<Tower>,
    pub fpp_ff: Vec<Tower>,
    pub fp_fp_f: Vec<Tower>,
    pub fppp_fff: Vec<Tower>,
    pub fpp_fpf_f: Vec<Tower>,
    pub fp_fpp_ff: Vec<Tower>,
    pub fp_fp_fp_f: Vec<Tower>,
}

impl Differentials {
    pub fn at<G: VectorField<Tower> + ?Sized>(g: &G, x: &[Tower]) -> Result<Self> {
        let f = g.eval(x)?;
        let fp_f = multilinear(g, x, std::slice::from_ref(&f))?;
        let fpp_ff = multilinear(g, x, &[f.clone(), f.clone()])?;
        let fp_fp_f = multilinear(g, x, std::slice::from_ref(&fp_f))?;
        let fppp_fff = multilinear(g, x, &[f.clone(), f.clone(), f.clone()])?;
        let fpp_fpf_f = multilinear(g, x, &[fp_f.clone(), f.clone()])?;
        let fp_fpp_ff = multilinear(g, x, std::slice::from_ref(&fpp_ff))?;
        let fp_fp_fp_f = multilinear(g, x, std::slice::from_ref(&fp_fp_f))?;
        Ok(Self { f, fp_f, fpp_ff, fp_fp_f, fppp_fff, fpp_fpf_f, fp_fpp_ff, fp_fp_fp_f })
    }
}

fn combine(terms: &[(f64, &Vec<Tower>)]) -> Vec<Tower> {
    let n = terms[0].1.len();
    (0..n)
        .map(|i| {
            terms
                .iter()
                .filter(|(w, _)| *w != 0.0)
                .map(|(w, v)| v[i].scale(*w))
                .reduce(|a, b| a + b)
                .unwrap_or(Tower::Num(0.0))
        })
        .collect()
}

/// Third-order truncation for explicit Euler.
pub fn euler_truncation(d: &Differentials, h: f64) -> Vec<Tower> {
    let (h2, h3) = (h * h, h * h * h);
    combine(&[
        (1.0, &d.f),
        (h / 2.0, &d.fp_f),
        (h2 / 6.0, &d.fpp_ff),
        (h2 / 6.0, &d.fp_fp_f),
        (h3 / 24.0, &d.fppp_fff),
        (h3 / 8.0, &d.fpp_fpf_f),
        (h3 / 24.0, &d.fp_fpp_ff),
        (h3 / 24.0, &d.fp_fp_fp_f),
    ])
}

/// Third-order truncation for explicit midpoint.
pub fn midpoint_truncation(d: &Differentials, h: f64) -> Vec<Tower> {
    let (h2, h3) = (h * h, h * h * h);
    combine(&[
        (1.0, &d.f),
        (h2 / 6.0, &d.fp_fp_f),
        (h2 / 24.0, &d.fpp_ff),
        (-h3 / 16.0, &d.fp_fpp_ff),
        (-h3 / 8.0, &d.fp_fp_fp_f),
    ])
}

/// The coefficients `f_0..=f_3` behind the closed-form truncations, so that
/// `f_h^3 = sum_k h^k f_k` can be re-evaluated at any step without new
/// derivatives. Ids as in [`closed_form_imde`], vector-field methods only.
pub fn closed_form_coefficients<G: VectorField<Tower> + ?Sized>(
    method_id: &str,
    f: &G,
    x: &[f64],
) -> Result<Vec<Vec<f64>>> {
    let sign = match method_id {
        "euler" | "midpoint" | "explicit-midpoint" => 1.0,
        "implicit-euler" => -1.0,
        other => return Err(Error::UnknownMethodId(other.to_string())),
    };
    let d = Differentials::at(f, &tower::lift(x))?;
    let fs = if method_id == "implicit-euler" || method_id == "euler" {
        vec![
            combine(&[(1.0, &d.f)]),
            combine(&[(0.5, &d.fp_f)]),
            combine(&[(1.0 / 6.0, &d.fpp_ff), (1.0 / 6.0, &d.fp_fp_f)]),
            combine(&[
                (1.0 / 24.0, &d.fppp_fff),
                (1.0 / 8.0, &d.fpp_fpf_f),
                (1.0 / 24.0, &d.fp_fpp_ff),
                (1.0 / 24.0, &d.fp_fp_fp_f),
            ]),
        ]
    } else {
        vec![
            combine(&[(1.0, &d.f)]),
            combine(&[(0.0, &d.f)]),
            combine(&[(1.0 / 6.0, &d.fp_fp_f), (1.0 / 24.0, &d.fpp_ff)]),
            combine(&[(-1.0 / 16.0, &d.fp_fpp_ff), (-1.0 / 8.0, &d.fp_fp_fp_f)]),
        ]
    };
    Ok(fs
        .iter()
        .enumerate()
        .map(|(k, v)| tower::values(v).into_iter().map(|c| c * sign.powi(k as i32)).collect())
        .collect())
}

/// Second-order truncation of the IMDE Hamiltonian for symplectic Euler
/// `p' = p - h H_q(p', q)`, `q' = q + h H_p(p', q)`.
pub fn symplectic_euler_hamiltonian<S: Scalar>(h_expr: &FieldExpr, y: &[S], h: f64) -> Result<S> {
    let n = y.len();
    if !n.is_multiple_of(2) {
        return Err(Error::OddDimension(n));
    }
    let d = n / 2;
    let value = h_expr.eval_scalar(y)?;
    let grad = gradient(h_expr, y)?;
    let (hp, hq) = grad.split_at(d);
    // second partials through the gradient of each gradient component
    let mut hess: Vec<Vec<S>> = Vec::with_capacity(n);
    for i in 0..n {
        let row = second_partials(h_expr, y, i)?;
        hess.push(row);
    }
    let bilinear = |rows: std::ops::Range<usize>, cols: std::ops::Range<usize>, u: &[S], v: &[S]| -> S {
        let mut acc = S::zero();
        for (a, i) in rows.clone().enumerate() {
            for (b, j) in cols.clone().enumerate() {
                acc = acc + hess[i][j].clone() * u[a].clone() * v[b].clone();
            }
        }
        acc
    };
    let hp_hq = hp.iter().zip(hq).map(|(a, b)| a.clone() * b.clone()).fold(S::zero(), |a, b| a + b);
    let t_pp = bilinear(0..d, 0..d, hq, hq);
    let t_pq = bilinear(0..d, d..n, hp, hq);
    let t_qq = bilinear(d..n, d..n, hp, hp);
    Ok(value + hp_hq.scale(h / 2.0) + (t_pp + t_pq + t_qq).scale(h * h / 6.0))
}

/// Row `i` of the Hessian, `d^2 H / dy_i dy_j` for all `j`.
fn second_partials<S: Scalar>(h_expr: &FieldExpr, y: &[S], i: usize) -> Result<Vec<S>> {
    use crate::algebra::Jet;
    let point: Vec<Jet<S>> = y
        .iter()
        .enumerate()
        .map(|(j, v)| if i == j { Jet::variable(v.clone(), 1) } else { Jet::constant(v.clone()) })
        .collect();
    Ok(gradient(h_expr, &point)?.into_iter().map(|g| g.coeff(1)).collect())
}

/// Closed-form truncations. Returns the truncated vector field, except for
/// `symplectic-euler` where the single entry is the truncated Hamiltonian.
pub fn closed_form_imde(method_id: &str, f_or_h: &FieldExpr, x: &[f64], h: f64) -> Result<Vec<f64>> {
    match method_id {
        "euler" | "implicit-euler" | "midpoint" | "explicit-midpoint" => {
            let d = Differentials::at(f_or_h, &tower::lift(x))?;
            let v = match method_id {
                "euler" => euler_truncation(&d, h),
                "implicit-euler" => euler_truncation(&d, -h),
                _ => midpoint_truncation(&d, h),
            };
            Ok(tower::values(&v))
        }
        "symplectic-euler" => Ok(vec![symplectic_euler_hamiltonian(f_or_h, x, h)?]),
        other => Err(Error::UnknownMethodId(other.to_string())),
    }
}

/// `J^{-1} grad H_h^2`, the field of the truncated symplectic Euler Hamiltonian.
pub fn symplectic_euler_field(h_expr: &FieldExpr, x: &[f64], h: f64) -> Result<Vec<f64>> {
    use crate::algebra::field::canonical_from_gradient;
    use crate::algebra::Jet;
    let n = x.len();
    let grad: Vec<f64> = (0..n)
        .map(|i| {
            let point: Vec<Jet<f64>> = x
                .iter()
                .enumerate()
                .map(|(j, &v)| if i == j { Jet::variable(v, 1) } else { Jet::constant(v) })
                .collect();
            Ok(symplectic_euler_hamiltonian(h_expr, &point, h)?.coeff(1))
        })
        .collect::<Result<_>>()?;
    Ok(canonical_from_gradient(grad))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euler_on_linear_field() {
        // every elementary differential of f = y at 1 is 1 except those with f'' or f'''
        let f = FieldExpr::parse("y1", None).unwrap();
        let h = 0.1;
        let v = closed_form_imde("euler", &f, &[1.0], h).unwrap();
        let expected = 1.0 + h / 2.0 + h * h / 6.0 + h * h * h / 24.0;
        assert!((v[0] - expected).abs() < 1e-15);
        assert!((v[0] - 1.0517083333).abs() < 1e-10);
    }

    #[test]
    fn coefficients_resum_to_truncations() {
        let f = FieldExpr::parse("(* -10 (sin y2)); y1", None).unwrap();
        let x = [0.3, 1.0];
        for id in ["euler", "implicit-euler", "midpoint"] {
            let fs = closed_form_coefficients(id, &f, &x).unwrap();
            let h: f64 = 0.07;
            let want = closed_form_imde(id, &f, &x, h).unwrap();
            for i in 0..2 {
                let got: f64 = fs.iter().enumerate().map(|(k, c)| h.powi(k as i32) * c[i]).sum();
                assert!((got - want[i]).abs() < 1e-14, "{id}");
            }
        }
    }

    #[test]
    fn implicit_mirrors_explicit() {
        let f = FieldExpr::parse("(* -10 (sin y2)); y1", None).unwrap();
        let a = closed_form_imde("implicit-euler", &f, &[0.3, 1.0], 0.05).unwrap();
        let b = closed_form_imde("euler", &f, &[0.3, 1.0], -0.05).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn multilinear_matches_hand_derivatives() {
        // f = (-10 sin q, p): f'f = (-10 cos q p, -10 sin q)
        let f = FieldExpr::parse("(* -10 (sin y2)); y1", None).unwrap();
        let x = [0.4, 1.0];
        let d = Differentials::at(&f, &tower::lift(&x)).unwrap();
        let fpf = tower::values(&d.fp_f);
        assert!((fpf[0] + 10.0 * 1f64.cos() * 0.4).abs() < 1e-14);
        assert!((fpf[1] + 10.0 * 1f64.sin()).abs() < 1e-14);
        // f''(f,f) = (10 sin q p^2, 0)
        let fpp = tower::values(&d.fpp_ff);
        assert!((fpp[0] - 10.0 * 1f64.sin() * 0.16).abs() < 1e-14);
        assert_eq!(fpp[1], 0.0);
    }

    #[test]
    fn symplectic_hamiltonian_at_zero_step() {
        let h = FieldExpr::parse("(- (* 0.5 (pow y1 2)) (cos y2))", Some(2)).unwrap();
        let v = closed_form_imde("symplectic-euler", &h, &[0.0, 1.0], 0.0).unwrap();
        assert!((v[0] + 1f64.cos()).abs() < 1e-15);
        assert!(matches!(closed_form_imde("rk4", &h, &[0.0, 1.0], 0.1), Err(Error::UnknownMethodId(_))));
    }
}
