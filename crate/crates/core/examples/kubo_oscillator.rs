//! Oscillator response: phi_xx, static displacement, exact evolution.

use std::time::Instant;

use friction_workbench::kubo::*;

fn main() -> Result<(), KuboError> {
    let (omega, mass) = (1.0, 1.0);
    let sys = oscillator(60, omega, mass, Temperature::Zero)?;
    let x = sys.observable("x")?.clone();
    let p = sys.observable("p")?.clone();

    let xt = heisenberg_evolve(&sys, &x, std::f64::consts::FRAC_PI_2)?;
    let block = (xt - &p * num_complex::Complex64::new(1.0 / (mass * omega), 0.0))
        .view((0, 0), (20, 20))
        .into_owned();
    println!("x(pi/2) - p/(m w) on the low block: {:.2e}", frobenius(&block));

    let kernel = response_function(&sys, &x, &x, 0.01, 20.0)?;
    let worst = kernel
        .times()
        .zip(&kernel.values)
        .map(|(t, v)| (v - (omega * t).sin() / (mass * omega)).abs())
        .fold(0.0, f64::max);
    println!("max |phi_xx - sin(w t)/(m w)| over [0, 20]: {worst:.2e}");

    let lambda = 1e-3;
    let t0 = Instant::now();
    let eta = 0.05;
    let at = |eta: f64| kubo_predict(&sys, &x, &x, &DriveProtocol::adiabatic(lambda, eta, 0.0)).map(|p| p.value);
    let (full, half) = (at(eta)?, at(eta / 2.0)?);
    let richardson = (4.0 * half - full) / 3.0;
    let oracle = shifted_ground_displacement(&sys, &x, &x, lambda);
    println!(
        "static displacement: kubo {richardson:.10e}  shifted ground {oracle:.10e}  -lambda/(m w^2) {:.10e}  rel {:.2e}  ({:.2?})",
        -lambda / (mass * omega * omega),
        ((richardson - oracle) / oracle).abs(),
        t0.elapsed()
    );

    let drive = DriveProtocol::adiabatic(lambda, eta, 3.0);
    let t0 = Instant::now();
    let pred = kubo_predict(&sys, &x, &x, &drive)?;
    let exact = exact_response(&sys, &x, &x, &drive)?;
    println!(
        "t_meas = 3: kubo {:.10e}  exact {:.10e}  rel {:.2e}  halvings {}  trace drift {:.1e}  ({:.2?})",
        pred.value,
        exact.value,
        ((pred.value - exact.value) / exact.value).abs(),
        exact.halvings,
        exact.state.trace_error,
        t0.elapsed()
    );

    let small = oscillator(24, omega, mass, Temperature::Zero)?;
    let x2 = small.observable("x2")?.clone();
    let t0 = Instant::now();
    let sweep = linearity_sweep(
        &small,
        &x2,
        &x2,
        &DriveProtocol::adiabatic(0.0, eta, 0.0),
        &[1e-1, 3e-2, 1e-2, 3e-3, 1e-3],
    )?;
    for r in &sweep.rows {
        println!(
            "  lambda {:.0e}  kubo {:+.8e}  exact {:+.8e}  error {:.3e}",
            r.lambda, r.predicted, r.exact, r.error
        );
    }
    println!("x2 linearity slope {:?} ({:.2?})", sweep.slope, t0.elapsed());
    Ok(())
}
