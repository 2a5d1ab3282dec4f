//! Coefficient kernels for truncated univariate power series.
//!
//! Every kernel takes coefficient slices of possibly different lengths,
//! treats missing entries as zero, and returns a series truncated at the
//! longer input. Analytic primitives use the ODE recurrences of the
//! function they expand (`s' = c u'`, `c' = -s u'`, `e' = e u'`, ...).

use super::scalar::Scalar;

fn at<S: Scalar>(a: &[S], k: usize) -> Option<&S> {
    a.get(k)
}

pub fn add<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|k| match (at(a, k), at(b, k)) {
            (Some(x), Some(y)) => x.clone() + y.clone(),
            (Some(x), None) => x.clone(),
            (None, Some(y)) => y.clone(),
            (None, None) => unreachable!(),
        })
        .collect()
}

pub fn sub<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|k| match (at(a, k), at(b, k)) {
            (Some(x), Some(y)) => x.clone() - y.clone(),
            (Some(x), None) => x.clone(),
            (None, Some(y)) => -y.clone(),
            (None, None) => unreachable!(),
        })
        .collect()
}

pub fn neg<S: Scalar>(a: &[S]) -> Vec<S> {
    a.iter().map(|x| -x.clone()).collect()
}

pub fn scale<S: Scalar>(a: &[S], c: f64) -> Vec<S> {
    a.iter().map(|x| x.scale(c)).collect()
}

/// Cauchy product truncated at the longer operand.
pub fn mul<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    let n = a.len().max(b.len());
    if a.len() == 1 {
        return b.iter().map(|y| a[0].clone() * y.clone()).collect();
    }
    if b.len() == 1 {
        return a.iter().map(|x| x.clone() * b[0].clone()).collect();
    }
    (0..n)
        .map(|k| {
            let lo = k.saturating_sub(b.len() - 1);
            let hi = k.min(a.len() - 1);
            let mut acc: Option<S> = None;
            for i in lo..=hi {
                let term = a[i].clone() * b[k - i].clone();
                acc = Some(match acc {
                    None => term,
                    Some(s) => s + term,
                });
            }
            acc.unwrap_or_else(S::zero)
        })
        .collect()
}

/// `a / b`; the caller checks that `b[0]` is not a zero divisor.
pub fn div<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    let n = a.len().max(b.len());
    let b0 = b[0].clone();
    if b.len() == 1 {
        return a.iter().map(|x| x.clone() / b0.clone()).collect();
    }
    let mut c: Vec<S> = Vec::with_capacity(n);
    for k in 0..n {
        let mut num = at(a, k).cloned().unwrap_or_else(S::zero);
        for j in 1..=k.min(b.len() - 1) {
            num = num - b[j].clone() * c[k - j].clone();
        }
        c.push(num / b0.clone());
    }
    c
}

/// `sum_{j=1}^{k} j u_j w_{k-j} / k`, the common step of first-order recurrences.
fn recurrence_step<S: Scalar>(u: &[S], w: &[S], k: usize) -> S {
    let mut acc: Option<S> = None;
    for j in 1..=k.min(u.len() - 1) {
        let term = (u[j].clone() * w[k - j].clone()).scale(j as f64);
        acc = Some(match acc {
            None => term,
            Some(s) => s + term,
        });
    }
    acc.map(|s| s.scale(1.0 / k as f64)).unwrap_or_else(S::zero)
}

pub fn exp<S: Scalar>(u: &[S]) -> Vec<S> {
    let mut e = Vec::with_capacity(u.len());
    e.push(u[0].exp());
    for k in 1..u.len() {
        let next = recurrence_step(u, &e, k);
        e.push(next);
    }
    e
}

pub fn sin_cos<S: Scalar>(u: &[S]) -> (Vec<S>, Vec<S>) {
    let (s0, c0) = u[0].sin_cos();
    let mut s = vec![s0];
    let mut c = vec![c0];
    for k in 1..u.len() {
        let sk = recurrence_step(u, &c, k);
        let ck = -recurrence_step(u, &s, k);
        s.push(sk);
        c.push(ck);
    }
    (s, c)
}

/// Shared driver for `y' = g(y) u'` where `g` is a quadratic in `y`:
/// `g(y) = a + b y + c y^2`, updated incrementally as coefficients of `y` appear.
fn quadratic_ode<S: Scalar>(u: &[S], y0: S, a: f64, b: f64, c: f64) -> Vec<S> {
    let n = u.len();
    let mut y: Vec<S> = Vec::with_capacity(n);
    let mut g: Vec<S> = Vec::with_capacity(n);
    y.push(y0);
    let g_coeff = |y: &[S], m: usize| -> S {
        // coefficient m of a + b y + c y^2
        let mut sq: Option<S> = None;
        for i in 0..=m {
            let t = y[i].clone() * y[m - i].clone();
            sq = Some(match sq {
                None => t,
                Some(s) => s + t,
            });
        }
        let mut out = y[m].scale(b) + sq.unwrap().scale(c);
        if m == 0 {
            out = out.add_f64(a);
        }
        out
    };
    g.push(g_coeff(&y, 0));
    for k in 1..n {
        let yk = recurrence_step(u, &g, k);
        y.push(yk);
        let gk = g_coeff(&y, k);
        g.push(gk);
    }
    y
}

/// tanh' = 1 - tanh^2.
pub fn tanh<S: Scalar>(u: &[S]) -> Vec<S> {
    quadratic_ode(u, u[0].tanh(), 1.0, 0.0, -1.0)
}

/// sigmoid' = sigmoid - sigmoid^2.
pub fn sigmoid<S: Scalar>(u: &[S]) -> Vec<S> {
    quadratic_ode(u, u[0].sigmoid(), 0.0, 1.0, -1.0)
}

/// Horner evaluation of the series at `t`.
pub fn eval<S: Scalar>(a: &[S], t: &S) -> S {
    let mut acc = a[a.len() - 1].clone();
    for c in a[..a.len() - 1].iter().rev() {
        acc = acc * t.clone() + c.clone();
    }
    acc
}
