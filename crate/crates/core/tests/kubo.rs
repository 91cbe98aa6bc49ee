use std::f64::consts::FRAC_PI_2;

use friction_workbench::kubo::*;
use num_complex::Complex64;

fn osc(d: usize, t: Temperature) -> (QuantumSystem, CMatrix, CMatrix) {
    let s = oscillator(d, 1.3, 0.8, t).unwrap();
    let x = s.observable("x").unwrap().clone();
    let p = s.observable("p").unwrap().clone();
    (s, x, p)
}

#[test]
fn position_evolves_into_momentum_after_a_quarter_period() {
    let (omega, mass) = (1.0, 1.0);
    for d in [60, 120] {
        let sys = oscillator(d, omega, mass, Temperature::Zero).unwrap();
        let x = sys.observable("x").unwrap();
        let p = sys.observable("p").unwrap();
        let xt = heisenberg_evolve(&sys, x, FRAC_PI_2 / omega).unwrap();
        let target = p * Complex64::new(1.0 / (mass * omega), 0.0);
        let diff = (&xt - &target).view((0, 0), (20, 20)).into_owned();
        let norm = frobenius(&target.view((0, 0), (20, 20)).into_owned());
        assert!(frobenius(&diff) <= 1e-8 * norm, "d = {d}");
    }
}

#[test]
fn oscillator_response_is_the_commutator_closed_form() {
    let (omega, mass) = (1.3, 0.8);
    for d in [60, 120] {
        let (sys, x, _) = osc(d, Temperature::Zero);
        let k = response_function(&sys, &x, &x, 0.05, 40.0).unwrap();
        for (t, v) in k.times().zip(&k.values) {
            // i <[x(t), x]> with [x(t), x] = -i sin(wt)/(m w)
            let expect = (omega * t).sin() / (mass * omega);
            assert!((v - expect).abs() <= 1e-6, "d = {d}, t = {t}: {v} vs {expect}");
        }
    }
    let (sys, x, _) = osc(60, Temperature::Zero);
    let k = response_function(&sys, &x, &x, 0.05, 1.0).unwrap();
    assert_eq!(k.green(-3), 0.0);
    assert_eq!(k.green(7), -k.values[7]);
}

#[test]
fn oscillator_response_is_temperature_independent() {
    let (cold, x, _) = osc(160, Temperature::Zero);
    let hot = cold.at_temperature(Temperature::Kt(5.0)).unwrap();
    // Gibbs weight of the top ten levels stays below 1e-12
    let tail: f64 = hot.populations()[150..].iter().sum();
    assert!(tail < 1e-12, "{tail}");
    let a = response_function(&cold, &x, &x, 0.1, 30.0).unwrap();
    let b = response_function(&hot, &x, &x, 0.1, 30.0).unwrap();
    for (u, v) in a.values.iter().zip(&b.values) {
        assert!((u - v).abs() <= 1e-8);
    }
}

#[test]
fn static_displacement_matches_shifted_ground_state() {
    let (sys, x, _) = osc(60, Temperature::Zero);
    let lambda = 1e-3;
    let at = |eta: f64| {
        kubo_predict(&sys, &x, &x, &DriveProtocol::adiabatic(lambda, eta, 0.0))
            .unwrap()
            .value
    };
    let (coarse, fine) = (at(0.05), at(0.025));
    let extrapolated = (4.0 * fine - coarse) / 3.0;
    let oracle = shifted_ground_displacement(&sys, &x, &x, lambda);
    let closed = -lambda / (0.8 * 1.3 * 1.3);
    assert!(((oracle - closed) / closed).abs() < 1e-9);
    assert!(((extrapolated - oracle) / oracle).abs() <= 1e-5);
    // a finite switch-on rate alone leaves a relative bias of (eta/w)^2
    let bias = ((coarse - oracle) / oracle).abs();
    assert!((bias - (0.05f64 / 1.3).powi(2)).abs() < 1e-4, "{bias}");
}

#[test]
fn prediction_matches_exact_evolution_at_small_coupling() {
    let (sys, x, _) = osc(20, Temperature::Zero);
    let drive = DriveProtocol::adiabatic(1e-3, 0.05, 2.0);
    let k = kubo_predict(&sys, &x, &x, &drive).unwrap();
    let e = exact_response(&sys, &x, &x, &drive).unwrap();
    assert!(((k.value - e.value) / e.value).abs() <= 1e-5, "{k:?} {e:?}");

    let tls = two_level(1.0, 0.4, Temperature::Zero).unwrap();
    let (sz, sx) = (tls.observable("sz").unwrap(), tls.observable("sx").unwrap());
    let drive = DriveProtocol::adiabatic(1e-3, 0.05, 0.0);
    let k = kubo_predict(&tls, sz, sx, &drive).unwrap();
    let e = exact_response(&tls, sz, sx, &drive).unwrap();
    assert!(k.value.abs() > 1e-5);
    assert!(
        ((k.value - e.value) / e.value).abs() <= 1e-5 + 10.0 * drive.lambda,
        "{k:?} {e:?}"
    );
}

#[test]
fn exact_evolution_keeps_a_valid_state() {
    let tls = two_level(1.0, 0.4, Temperature::Kt(0.5)).unwrap();
    let (sz, sx) = (tls.observable("sz").unwrap(), tls.observable("sx").unwrap());
    let e = exact_response(&tls, sz, sx, &DriveProtocol::adiabatic(0.2, 0.1, 4.0)).unwrap();
    assert!(e.state.trace_error < 1e-10);
    assert!(e.state.hermiticity_defect < 1e-12);
    assert!(e.state.min_eigenvalue > -1e-10);
    assert!(e.last_change < 1e-9);
}

#[test]
fn quadratic_coupling_error_grows_as_lambda_squared() {
    let sys = oscillator(24, 1.0, 1.0, Temperature::Zero).unwrap();
    let x2 = sys.observable("x2").unwrap();
    let sweep = linearity_sweep(
        &sys,
        x2,
        x2,
        &DriveProtocol::adiabatic(0.0, 0.1, 0.0),
        &[1e-1, 3e-2, 1e-2, 3e-3, 1e-3],
    )
    .unwrap();
    let slope = sweep.slope.expect("errors above the floor");
    assert!((1.7..=2.3).contains(&slope), "{sweep:#?}");
    assert!(!sweep.floor_limited);

    let tls = two_level(1.0, 0.4, Temperature::Zero).unwrap();
    let (sz, sx) = (tls.observable("sz").unwrap(), tls.observable("sx").unwrap());
    let sweep = linearity_sweep(
        &tls,
        sz,
        sx,
        &DriveProtocol::adiabatic(0.0, 0.1, 0.0),
        &[1e-1, 3e-2, 1e-2],
    )
    .unwrap();
    let slope = sweep.slope.unwrap();
    assert!((1.7..=2.3).contains(&slope), "{sweep:#?}");
}

#[test]
fn linear_coupling_of_position_is_floor_limited() {
    let (sys, x, _) = osc(20, Temperature::Zero);
    let sweep = linearity_sweep(&sys, &x, &x, &DriveProtocol::adiabatic(0.0, 0.1, 0.0), &[1e-1, 1e-2]).unwrap();
    assert!(sweep.floor_limited);
    assert!(sweep.slope.is_none());
    for r in &sweep.rows {
        assert!(r.error <= ERROR_FLOOR, "{r:?}");
    }
}

#[test]
fn drive_after_measurement_has_no_effect() {
    let tls = two_level(1.0, 0.4, Temperature::Zero).unwrap();
    let (sz, sx) = (tls.observable("sz").unwrap(), tls.observable("sx").unwrap());
    let base = DriveProtocol::adiabatic(0.05, 0.1, 1.5);
    let spoiled = DriveProtocol {
        after_measurement: Some(-40.0),
        ..base.clone()
    };
    assert_eq!(
        kubo_predict(&tls, sz, sx, &base).unwrap(),
        kubo_predict(&tls, sz, sx, &spoiled).unwrap()
    );
    assert_eq!(
        exact_response(&tls, sz, sx, &base).unwrap(),
        exact_response(&tls, sz, sx, &spoiled).unwrap()
    );
}

#[test]
fn quadrature_converges_under_halving() {
    let (sys, x, _) = osc(30, Temperature::Kt(0.7));
    let p = kubo_predict(&sys, &x, &x, &DriveProtocol::adiabatic(0.01, 0.05, 5.0)).unwrap();
    assert!(p.last_change <= 1e-8 * p.value.abs());
    assert!(p.dt > 0.0);
}

#[test]
fn short_switch_on_window_is_rejected() {
    let tls = two_level(1.0, 0.4, Temperature::Zero).unwrap();
    let (sz, sx) = (tls.observable("sz").unwrap(), tls.observable("sx").unwrap());
    let drive = DriveProtocol {
        t_start: -100.0,
        ..DriveProtocol::adiabatic(0.01, 0.2, 0.0)
    };
    assert!(drive.validate().is_ok());
    let drive = DriveProtocol {
        t_start: -50.0,
        ..drive
    };
    assert!(matches!(
        kubo_predict(&tls, sz, sx, &drive),
        Err(KuboError::InvalidDrive(_))
    ));
    assert!(matches!(
        exact_response(&tls, sz, sx, &drive),
        Err(KuboError::InvalidDrive(_))
    ));
}

#[test]
fn conserved_quantities_have_vanishing_commutator_averages() {
    let sys = chain(ChainParams::default(), Temperature::Zero).unwrap();
    assert!(!sys.ground_degenerate());
    let bond = sys.observable("bond").unwrap().clone();
    let g = translation_generator(6);
    let c = conserved_commutator_check(&sys, &bond, &g).unwrap();
    assert!(c.conserved && c.passed, "{c:?}");

    let h = sys.h0().clone();
    let c = conserved_commutator_check(&sys, &random_hermitian(64, 3), &h).unwrap();
    assert!(c.passed, "{c:?}");

    let hot = sys.at_temperature(Temperature::Kt(1.5)).unwrap();
    assert!(conserved_commutator_check(&hot, &bond, &g).unwrap().passed);

    let control = conserved_commutator_check(&sys, &bond, &random_hermitian(64, 7)).unwrap();
    assert!(!control.conserved && !control.passed);
    assert!(control.value > 1e-6, "{control:?}");
}
