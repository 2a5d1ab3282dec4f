use approx::assert_abs_diff_eq;
use imdelab::algebra::{FieldExpr, HamiltonianField, Jet};
use imdelab::bench;
use imdelab::error::Error;
use imdelab::integrators::{
    compose, lmm_trajectory, ode_solve, order_estimate, reference_flow, reference_trajectory, rk_step,
    symplectic_euler_step, ButcherTableau, LmmScheme, Method, SolverSpec, DEFAULT_TOL,
};
use proptest::prelude::*;

fn linear(lambda: f64) -> FieldExpr {
    FieldExpr::parse(&format!("(* {lambda} y1)"), None).unwrap()
}

#[test]
fn one_step_examples() {
    let f = linear(1.0);
    let step = |name: &str| rk_step(&ButcherTableau::named(name).unwrap(), &f, &[1.0], &0.1).unwrap()[0];
    assert_abs_diff_eq!(step("euler"), 1.1, epsilon = 1e-15);
    assert_abs_diff_eq!(step("explicit-midpoint"), 1.105, epsilon = 1e-15);
    assert_abs_diff_eq!(step("implicit-euler"), 1.0 / 0.9, epsilon = 1e-13);
    assert_abs_diff_eq!(step("implicit-midpoint"), 1.05 / 0.95, epsilon = 1e-13);
    let rk4: f64 = [1.0, 0.1, 0.005, 0.1f64.powi(3) / 6.0, 0.1f64.powi(4) / 24.0].iter().sum();
    assert_abs_diff_eq!(step("rk4"), rk4, epsilon = 1e-15);
}

#[test]
fn composition_examples() {
    let f = linear(1.0);
    let euler = Method::named("euler").unwrap();
    let spec = SolverSpec::new(euler.clone(), 0.1, 2).unwrap();
    assert_abs_diff_eq!(ode_solve(&spec, &f, &[1.0]).unwrap()[0], 1.21, epsilon = 1e-15);
    assert_abs_diff_eq!(spec.data_step(), 0.2, epsilon = 1e-15);
    let single = SolverSpec::new(euler.clone(), 0.3, 1).unwrap();
    assert_eq!(ode_solve(&single, &f, &[2.0]).unwrap(), euler.step(&f, &[2.0], &0.3).unwrap());
    let x = [0.4, -0.3];
    let p = bench::named("pendulum").unwrap().field;
    assert_eq!(compose(&euler, &p, &x, &0.05, 0).unwrap(), x.to_vec());
}

#[test]
fn solver_spec_rejects_bad_steps() {
    let euler = Method::named("euler").unwrap();
    assert!(SolverSpec::new(euler.clone(), f64::NAN, 1).is_err());
    assert!(SolverSpec::new(euler.clone(), 0.1, 0).is_err());
    let spec = SolverSpec::for_data_step(euler, 0.12, 4).unwrap();
    assert_abs_diff_eq!(spec.h, 0.03, epsilon = 1e-15);
}

#[test]
fn unknown_method_names_are_reported() {
    assert!(matches!(Method::named("leapfrog"), Err(Error::UnknownMethodId(_))));
    assert!(LmmScheme::named("bdf7").is_err());
    for name in ButcherTableau::NAMES {
        assert_eq!(Method::named(name).unwrap().name(), name);
    }
}

#[test]
fn symplectic_euler_examples() {
    let h = bench::named("pendulum-hnn").unwrap().hamiltonian.unwrap();
    let y = symplectic_euler_step(&h, &[0.0, 1.0], &0.1).unwrap();
    assert_abs_diff_eq!(y[0], -0.1 * 1f64.sin(), epsilon = 1e-14);
    assert_abs_diff_eq!(y[1], 1.0 + 0.1 * y[0], epsilon = 1e-14);
    assert_abs_diff_eq!(y[0], -0.08414710, epsilon = 1e-8);
    assert_abs_diff_eq!(y[1], 0.99158529, epsilon = 1e-8);
    assert_eq!(symplectic_euler_step(&h, &[0.3, -0.2], &0.0).unwrap(), vec![0.3, -0.2]);
    let odd = FieldExpr::parse("(pow y1 2)", Some(3)).unwrap();
    assert!(matches!(symplectic_euler_step(&odd, &[0.0; 3], &0.1), Err(Error::OddDimension(3))));
}

#[test]
fn symplectic_euler_with_nonseparable_hamiltonian_converges() {
    // H = (p^2 + 1) (q^2 + 1) / 2 couples p into the implicit stage
    let h = FieldExpr::parse("(* 0.5 (* (+ (pow y1 2) 1) (+ (pow y2 2) 1)))", Some(2)).unwrap();
    let x = [0.3, 0.4];
    let dt = 0.05;
    let y = symplectic_euler_step(&h, &x, &dt).unwrap();
    // p' = p - dt H_q(p', q), q' = q + dt H_p(p', q)
    let hq = (y[0] * y[0] + 1.0) * x[1];
    let hp = y[0] * (x[1] * x[1] + 1.0);
    assert_abs_diff_eq!(y[0], x[0] - dt * hq, epsilon = 1e-13);
    assert_abs_diff_eq!(y[1], x[1] + dt * hp, epsilon = 1e-13);
}

#[test]
fn adams_bashforth_example() {
    let f = linear(1.0);
    let startup = vec![vec![1.0], vec![0.1f64.exp()]];
    let ys = lmm_trajectory(&LmmScheme::ab2(), &f, &startup, 0.1, 1).unwrap();
    let e1 = 0.1f64.exp();
    assert_abs_diff_eq!(ys[2][0], e1 + 0.1 * (1.5 * e1 - 0.5), epsilon = 1e-15);
    assert_abs_diff_eq!(ys[2][0], 1.2209466, epsilon = 1e-7);
    let same = lmm_trajectory(&LmmScheme::ab3(), &f, &[vec![1.0], vec![1.1], vec![1.2]], 0.1, 0).unwrap();
    assert_eq!(same, vec![vec![1.0], vec![1.1], vec![1.2]]);
    assert!(lmm_trajectory(&LmmScheme::ab2(), &f, &startup[..1], 0.1, 3).is_err());
}

#[test]
fn lmm_residual_vanishes_on_its_own_trajectory() {
    let f = bench::named("damped-oscillator").unwrap().field;
    let h = 0.02;
    for scheme in [LmmScheme::ab2(), LmmScheme::ab3(), LmmScheme::trapezoidal(), LmmScheme::implicit_euler()] {
        let startup = reference_trajectory(&f, &[2.0, 0.0], h, scheme.steps() - 1, DEFAULT_TOL).unwrap();
        let ys = lmm_trajectory(&scheme, &f, &startup, h, 5).unwrap();
        let m = scheme.steps();
        for w in ys.windows(m + 1) {
            let r = scheme.residual(&f, w, h).unwrap();
            assert!(r.iter().all(|v| v.abs() <= 1e-12), "{r:?}");
        }
    }
}

#[test]
fn reference_flow_examples() {
    let f = linear(1.0);
    assert_abs_diff_eq!(reference_flow(&f, &[1.0], 1.0, DEFAULT_TOL).unwrap()[0], std::f64::consts::E, epsilon = 1e-12);
    assert_eq!(reference_flow(&f, &[0.7], 0.0, DEFAULT_TOL).unwrap(), vec![0.7]);
}

#[test]
fn reference_flow_conserves_the_pendulum_energy() {
    let p = bench::named("pendulum-hnn").unwrap();
    let ham = p.hamiltonian.unwrap();
    let energy = |y: &[f64]| ham.eval_scalar(y).unwrap();
    let traj = reference_trajectory(&p.field, &[0.0, 1.0], 0.1, 63, DEFAULT_TOL).unwrap();
    let e0 = energy(&traj[0]);
    for y in &traj {
        assert_abs_diff_eq!(energy(y), e0, epsilon = 1e-12);
    }
}

#[test]
fn measured_orders() {
    let suite = imdelab::integrators::order::default_suite();
    for (name, p, h) in
        [("euler", 1.0, 0.01), ("explicit-midpoint", 2.0, 0.01), ("implicit-midpoint", 2.0, 0.01), ("rk4", 4.0, 0.05)]
    {
        let o = order_estimate(&Method::named(name).unwrap(), &suite, h).unwrap();
        assert!((o - p).abs() <= 0.1, "{name}: {o}");
    }
    let hamiltonian_suite: Vec<(FieldExpr, Vec<f64>)> =
        vec![(FieldExpr::parse("(- (sin y2)); y1", None).unwrap(), vec![0.3, -0.8])];
    let o = order_estimate(&Method::SymplecticEuler, &hamiltonian_suite, 0.01).unwrap();
    assert!((o - 1.0).abs() <= 0.1, "symplectic euler: {o}");
}

fn jacobian_det(h: &FieldExpr, x: [f64; 2], dt: f64) -> f64 {
    let mut cols = Vec::new();
    for j in 0..2 {
        let y: Vec<Jet<f64>> = (0..2).map(|i| Jet::new(vec![x[i], if i == j { 1.0 } else { 0.0 }])).collect();
        let out = symplectic_euler_step(h, &y, &Jet::constant(dt)).unwrap();
        cols.push([out[0].coeff(1), out[1].coeff(1)]);
    }
    cols[0][0] * cols[1][1] - cols[1][0] * cols[0][1]
}

proptest! {
    #[test]
    fn symplectic_euler_preserves_area(p in -1.5f64..1.5, q in -1.5f64..1.5, dt in 0.01f64..0.2) {
        let h = FieldExpr::parse("(- (* 0.5 (pow y1 2)) (cos y2))", Some(2)).unwrap();
        prop_assert!((jacobian_det(&h, [p, q], dt) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn explicit_euler_does_not_preserve_area(p in -1.5f64..1.5, q in -1.5f64..1.5) {
        // the explicit map has determinant 1 + h^2 cos q away from q = pi/2
        let f = HamiltonianField::new(FieldExpr::parse("(- (* 0.5 (pow y1 2)) (cos y2))", Some(2)).unwrap()).unwrap();
        let dt = 0.1;
        let euler = Method::named("euler").unwrap();
        let mut cols = Vec::new();
        for j in 0..2 {
            let y: Vec<Jet<f64>> = (0..2).map(|i| Jet::new(vec![[p, q][i], if i == j { 1.0 } else { 0.0 }])).collect();
            let out = euler.step(&f, &y, &Jet::constant(dt)).unwrap();
            cols.push([out[0].coeff(1), out[1].coeff(1)]);
        }
        let det = cols[0][0] * cols[1][1] - cols[1][0] * cols[0][1];
        prop_assert!((det - (1.0 + dt * dt * q.cos())).abs() <= 1e-12);
    }

    #[test]
    fn implicit_euler_is_the_resolvent_on_linear_fields(lambda in -3.0f64..3.0, y0 in -2.0f64..2.0, h in 0.01f64..0.2) {
        let y = rk_step(&ButcherTableau::implicit_euler(), &linear(lambda), &[y0], &h).unwrap()[0];
        prop_assert!((y - y0 / (1.0 - h * lambda)).abs() <= 1e-12 * y0.abs().max(1.0));
    }

    #[test]
    fn composition_splits(s1 in 1usize..4, s2 in 1usize..4, x in -1.0f64..1.0, y in -1.0f64..1.0) {
        let f = bench::named("pendulum").unwrap().field;
        let m = Method::named("explicit-midpoint").unwrap();
        let h = 0.03;
        let whole = compose(&m, &f, &[x, y], &h, s1 + s2).unwrap();
        let first = compose(&m, &f, &[x, y], &h, s1).unwrap();
        let parts = compose(&m, &f, &first, &h, s2).unwrap();
        prop_assert_eq!(whole, parts);
    }

    #[test]
    fn reference_flow_is_a_group(x in -1.0f64..1.0, y in -1.0f64..1.0, t in 0.05f64..0.5) {
        let f = bench::named("pendulum").unwrap().field;
        let once = reference_flow(&f, &[x, y], 2.0 * t, DEFAULT_TOL).unwrap();
        let half = reference_flow(&f, &[x, y], t, DEFAULT_TOL).unwrap();
        let twice = reference_flow(&f, &half, t, DEFAULT_TOL).unwrap();
        for (a, b) in once.iter().zip(&twice) {
            prop_assert!((a - b).abs() <= 1e-11);
        }
        let back = reference_flow(&f, &once, -2.0 * t, DEFAULT_TOL).unwrap();
        prop_assert!((back[0] - x).abs() <= 1e-11 && (back[1] - y).abs() <= 1e-11);
    }
}
