use approx::assert_abs_diff_eq;
use imdelab::algebra::{FieldExpr, HamiltonianField};
use imdelab::bench::{self, ProblemField};
use imdelab::imde::{
    closed_form_imde, composition_invariance_defect, hamiltonicity_defect, imde_coefficient, lmm_imde_coefficient,
    symplectic_euler_field, truncation_diagnostics, ImdeField, ImdeMethod,
};
use imdelab::integrators::{reference_flow, ButcherTableau, LmmScheme, Method, DEFAULT_TOL};
use proptest::prelude::*;

fn expr(name: &str) -> FieldExpr {
    match bench::named(name).unwrap().field {
        ProblemField::Expr(f) => f,
        ProblemField::Hamiltonian(_) => panic!("{name} is Hamiltonian"),
    }
}

fn method(name: &str) -> Method {
    Method::named(name).unwrap()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[test]
fn coefficient_examples() {
    let p = expr("pendulum");
    let f1 = imde_coefficient(&method("euler"), &p, &[0.0, 1.0], 1).unwrap();
    assert_abs_diff_eq!(f1[0], 0.0, epsilon = 1e-12);
    assert_abs_diff_eq!(f1[1], -4.2073549, epsilon = 1e-7);
    for name in ["pendulum", "lorenz", "damped-oscillator"] {
        let f = expr(name);
        let x = vec![0.4; f.dim()];
        let m1 = imde_coefficient(&method("explicit-midpoint"), &f, &x, 1).unwrap();
        assert!(max_abs(&m1) <= 1e-10, "{name}: {m1:?}");
        let f0 = imde_coefficient(&method("rk4"), &f, &x, 0).unwrap();
        assert_eq!(f0, imdelab::algebra::VectorField::<f64>::eval(&f, &x).unwrap());
    }
    let lin = FieldExpr::parse("y1", None).unwrap();
    assert_abs_diff_eq!(imde_coefficient(&method("euler"), &lin, &[1.0], 2).unwrap()[0], 1.0 / 6.0, epsilon = 1e-12);
}

#[test]
fn truncated_evaluation_examples() {
    let p = expr("pendulum");
    let x = [0.0, 1.0];
    let fx = imdelab::algebra::VectorField::<f64>::eval(&p, &x).unwrap();
    let k0 = ImdeField::new(&p, ImdeMethod::one_step(method("euler")), 0).unwrap();
    assert_eq!(k0.truncated_eval(&x, 0.1).unwrap(), fx);
    let k3 = ImdeField::new(&p, ImdeMethod::one_step(method("euler")), 3).unwrap();
    let at_zero = k3.truncated_eval(&x, 0.0).unwrap();
    for (a, b) in at_zero.iter().zip(&fx) {
        assert_abs_diff_eq!(a, b, epsilon = 1e-15);
    }
    let engine = k3.truncated_eval(&x, 0.02).unwrap();
    let closed = closed_form_imde("euler", &p, &x, 0.02).unwrap();
    for (a, b) in engine.iter().zip(&closed) {
        assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0), "{a} vs {b}");
    }
}

#[test]
fn multistep_examples() {
    let lorenz = expr("lorenz");
    let x = [-0.8, 0.7, 2.6];
    let fx = imdelab::algebra::VectorField::<f64>::eval(&lorenz, &x).unwrap();
    for scheme in [LmmScheme::ab2(), LmmScheme::ab3(), LmmScheme::trapezoidal()] {
        let f0 = lmm_imde_coefficient(&scheme, &lorenz, &x, 0).unwrap();
        for (a, b) in f0.iter().zip(&fx) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }
    let f1 = lmm_imde_coefficient(&LmmScheme::ab2(), &lorenz, &x, 1).unwrap();
    assert!(max_abs(&f1) <= 1e-9 * max_abs(&fx), "{f1:?}");
    let lin = FieldExpr::parse("y1", None).unwrap();
    let f2 = lmm_imde_coefficient(&LmmScheme::ab2(), &lin, &[1.0], 2).unwrap();
    assert_abs_diff_eq!(f2[0], 5.0 / 12.0, epsilon = 1e-12);
}

#[test]
fn multistep_coefficients_match_the_linear_resolvent() {
    // AB2 on f = y: the modified rate is (z^2 - z) / (h (3z/2 - 1/2)) with z = e^h
    let lin = FieldExpr::parse("y1", None).unwrap();
    let h: f64 = 1e-2;
    let z = h.exp();
    let exact = (z * z - z) / (h * (1.5 * z - 0.5));
    let imde = ImdeField::new(&lin, ImdeMethod::Multistep(LmmScheme::ab2()), 4).unwrap();
    let approx = imde.truncated_eval(&[1.0], h).unwrap()[0];
    // the first omitted term is O(h^5)
    assert!((approx - exact).abs() <= 1e-9, "{approx} vs {exact}");
}

#[test]
fn closed_form_examples() {
    let lin = FieldExpr::parse("y1", None).unwrap();
    let h: f64 = 0.1;
    let v = closed_form_imde("euler", &lin, &[1.0], h).unwrap()[0];
    assert_abs_diff_eq!(v, 1.0 + h / 2.0 + h * h / 6.0 + h.powi(3) / 24.0, epsilon = 1e-15);
    let p = expr("pendulum");
    for x in [[0.0, 1.0], [0.5, -0.3]] {
        let a = closed_form_imde("implicit-euler", &p, &x, 0.05).unwrap();
        let b = closed_form_imde("euler", &p, &x, -0.05).unwrap();
        assert_eq!(a, b);
    }
    let ham = bench::named("pendulum-hnn").unwrap().hamiltonian.unwrap();
    let h0 = closed_form_imde("symplectic-euler", &ham, &[0.0, 1.0], 0.0).unwrap();
    assert_abs_diff_eq!(h0[0], -0.540302306, epsilon = 1e-9);
    assert!(closed_form_imde("leapfrog", &p, &[0.0, 1.0], 0.1).is_err());
}

#[test]
fn composition_invariance_examples() {
    let p = expr("pendulum");
    let d = composition_invariance_defect(&method("euler"), &p, &[0.0, 1.0], 3, &[1, 2, 4]).unwrap();
    assert!(d <= 1e-9, "{d}");
    let d0 = composition_invariance_defect(&method("euler"), &p, &[0.0, 1.0], 0, &[3, 5]).unwrap();
    assert_eq!(d0, 0.0);
    let l = expr("lorenz");
    let d = composition_invariance_defect(&method("explicit-midpoint"), &l, &[-0.8, 0.7, 2.6], 2, &[1, 2]).unwrap();
    assert!(d <= 1e-8, "{d}");
}

#[test]
fn hamiltonicity_examples() {
    let hnn = bench::named("pendulum-hnn").unwrap();
    let samples = vec![vec![0.0, 1.0], vec![0.4, -0.7], vec![-1.0, 0.2]];
    assert!(hamiltonicity_defect(&hnn.field, &samples).unwrap() <= 1e-10);
    let sym = ImdeField::new(&hnn.field, ImdeMethod::one_step(Method::SymplecticEuler), 2).unwrap();
    for k in 1..=2 {
        let d = hamiltonicity_defect(&sym.coefficient_field(k), &samples).unwrap();
        assert!(d <= 1e-8, "k={k}: {d}");
    }
    let p = expr("pendulum");
    let euler = ImdeField::new(&p, ImdeMethod::one_step(method("euler")), 1).unwrap();
    let d = hamiltonicity_defect(&euler.coefficient_field(1), &[vec![0.0, 1.0]]).unwrap();
    assert!(d >= 0.1, "{d}");
    let lorenz = expr("lorenz");
    assert!(hamiltonicity_defect(&lorenz, &[vec![0.0; 3]]).is_err());
}

#[test]
fn symplectic_engine_matches_the_closed_form_hamiltonian() {
    let ham = bench::named("pendulum-hnn").unwrap().hamiltonian.unwrap();
    let f = HamiltonianField::new(ham.clone()).unwrap();
    let imde = ImdeField::new(&f, ImdeMethod::one_step(Method::SymplecticEuler), 2).unwrap();
    for x in [[0.0, 1.0], [0.6, -0.4], [-1.0, 1.3]] {
        for h in [0.1, 0.05, 0.02] {
            let engine = imde.truncated_eval(&x, h).unwrap();
            let closed = symplectic_euler_field(&ham, &x, h).unwrap();
            for (a, b) in engine.iter().zip(&closed) {
                assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0), "x={x:?} h={h}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn low_order_coefficients_vanish_for_order_p_methods() {
    let l = expr("lorenz");
    let x = [0.3, -0.2, 1.1];
    for (name, p) in [("explicit-midpoint", 2), ("implicit-midpoint", 2), ("rk4", 4)] {
        let imde = ImdeField::new(&l, ImdeMethod::one_step(method(name)), p).unwrap();
        let fs = imde.coefficients(&x, p).unwrap();
        for (k, fk) in fs.iter().enumerate().take(p).skip(1) {
            assert!(max_abs(fk) <= 1e-9, "{name} k={k}: {fk:?}");
        }
        assert!(max_abs(&fs[p]) > 1e-3, "{name}: f_p vanished");
    }
}

#[test]
fn truncated_imde_defect_order() {
    let p = expr("pendulum");
    let x = [0.3, 0.8];
    for k in 0..=3 {
        let imde = ImdeField::new(&p, ImdeMethod::one_step(method("euler")), k).unwrap();
        let defect = |h: f64| {
            let stepped = method("euler").step(&imde.truncated(h), &x, &h).unwrap();
            let exact = reference_flow(&p, &x, h, DEFAULT_TOL).unwrap();
            stepped.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        };
        let ratio = defect(0.04) / defect(0.02);
        assert!(ratio >= 2f64.powf(k as f64 + 1.7), "K={k}: ratio {ratio}");
    }
}

#[test]
fn diagnostics_examples() {
    let d = truncation_diagnostics(&ButcherTableau::euler(), 1.0, 1.0, 1e-3, 1);
    assert_eq!(d.mu, 1.0);
    assert_eq!(d.kappa, 0.0);
    assert!(d.h0.is_infinite());
    assert_eq!(d.b2, 2.0);
    assert_abs_diff_eq!(d.q, 4f64.ln() / 0.912f64.ln().abs(), epsilon = 1e-12);
    assert_abs_diff_eq!(d.q, 15.05, epsilon = 0.01);
    assert!(d.no_valid_k);
    assert_eq!(d.k_of_h, 0);
    let m = truncation_diagnostics(&ButcherTableau::explicit_midpoint(), 2.0, 3.0, 1e-3, 2);
    assert_eq!(m.mu, 1.0);
    assert_eq!(m.kappa, 0.5);
    assert_abs_diff_eq!(m.h0, 3.0 / (2.0 * 2.0), epsilon = 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn euler_linear_coefficients(lambda in -2.0f64..2.0, y in -2.0f64..2.0) {
        let f = FieldExpr::parse(&format!("(* {lambda} y1)"), None).unwrap();
        let fs = ImdeField::new(&f, ImdeMethod::one_step(method("euler")), 5).unwrap().coefficients(&[y], 5).unwrap();
        let mut fact = 1.0;
        for (k, fk) in fs.iter().enumerate() {
            fact *= (k + 1) as f64;
            prop_assert!((fk[0] - lambda.powi(k as i32 + 1) / fact * y).abs() <= 1e-10);
        }
    }

    #[test]
    fn implicit_euler_mirrors_explicit_euler(p in -1.0f64..1.0, q in -1.0f64..1.0) {
        let f = expr("pendulum");
        let e = ImdeField::new(&f, ImdeMethod::one_step(method("euler")), 3).unwrap().coefficients(&[p, q], 3).unwrap();
        let i = ImdeField::new(&f, ImdeMethod::one_step(method("implicit-euler")), 3).unwrap().coefficients(&[p, q], 3).unwrap();
        for k in 0..=3 {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            for (a, b) in e[k].iter().zip(&i[k]) {
                prop_assert!((sign * a - b).abs() <= 1e-9 * a.abs().max(1.0), "k={} {} {}", k, a, b);
            }
        }
    }

    #[test]
    fn selected_index_is_nonincreasing_in_h(m in 0.5f64..4.0, r in 0.5f64..4.0, h in 1e-12f64..1e-3) {
        for tab in [ButcherTableau::euler(), ButcherTableau::explicit_midpoint(), ButcherTableau::rk4()] {
            let a = truncation_diagnostics(&tab, m, r, h, tab.order);
            let b = truncation_diagnostics(&tab, m, r, 2.0 * h, tab.order);
            prop_assert!(b.k_of_h <= a.k_of_h);
            prop_assert!(a.mu >= 1.0 - 1e-15);
        }
    }
}
