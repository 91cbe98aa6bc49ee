//! Configuration, suite orchestration and reports for the command-line tool.

mod config;
mod render;

pub use config::{
    temperature, validate_config, ChainConfig, ConfigError, DerivationConfig, Diagnostic, EnsembleConfig, KuboConfig,
    OscillatorConfig, OutputFormat, RunConfig, SystemKind, TwoLevelConfig, KEYS,
};
pub use render::{render_report, write_atomic};

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::derivation::{self, CrossCheck, DerivationReport, DeriveOptions, MAX_ORDER};
use crate::ensemble::{self, EnsembleSpec, SuiteTable};
use crate::kubo::{self, CMatrix, DriveProtocol, KuboError, QuantumSystem, SweepResult, Temperature};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Exit status for a passing run.
pub const EXIT_PASS: i32 = 0;
/// Exit status when any suite fails.
pub const EXIT_FAIL: i32 = 1;
/// Exit status for usage and configuration errors.
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Derive,
    Ensemble,
    Kubo,
    All,
}

impl Suite {
    fn includes(self, s: Suite) -> bool {
        self == Suite::All || self == s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
}

impl Outcome {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Outcome::Pass
        } else {
            Outcome::Fail
        }
    }

    pub fn passed(self) -> bool {
        self == Outcome::Pass
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.passed() { "pass" } else { "fail" })
    }
}

/// Seed for one suite: the first eight bytes of SHA-256("suite:seed").
pub fn suite_seed(suite: &str, seed: u64) -> u64 {
    let digest = Sha256::digest(format!("{suite}:{seed}").as_bytes());
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossCheckSection {
    pub seed: u64,
    pub result: CrossCheck,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivationSection {
    pub verdict: Outcome,
    pub report: Option<DerivationReport>,
    pub cross_check: Option<CrossCheckSection>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSection {
    pub verdict: Outcome,
    pub seed: u64,
    pub table: Option<SuiteTable>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    AtMost(f64),
    Above(f64),
    Within(f64, f64),
}

impl Bound {
    pub fn admits(self, v: f64) -> bool {
        match self {
            Bound::AtMost(b) => v <= b,
            Bound::Above(b) => v > b,
            Bound::Within(lo, hi) => (lo..=hi).contains(&v),
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::AtMost(b) => write!(f, "<= {b:e}"),
            Bound::Above(b) => write!(f, "> {b:e}"),
            Bound::Within(lo, hi) => write!(f, "in [{lo}, {hi}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KuboCheck {
    pub name: String,
    /// Absent when the quantity is undefined, e.g. a floor-limited slope.
    pub value: Option<f64>,
    pub bound: Bound,
    pub verdict: Outcome,
    pub note: String,
}

fn check(name: impl Into<String>, value: f64, bound: Bound) -> KuboCheck {
    KuboCheck {
        name: name.into(),
        value: Some(value),
        bound,
        verdict: Outcome::from_bool(bound.admits(value)),
        note: String::new(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KuboRecord {
    pub system: SystemKind,
    pub dim: usize,
    pub temperature: Temperature,
    pub ground_degenerate: bool,
    pub checks: Vec<KuboCheck>,
    pub sweep: Option<SweepResult>,
    pub verdict: Outcome,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KuboSection {
    pub verdict: Outcome,
    pub experiments: Vec<KuboRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub version: String,
    pub config: RunConfig,
    pub derivation: Option<DerivationSection>,
    pub ensemble: Option<EnsembleSection>,
    pub kubo: Option<KuboSection>,
    pub verdict: Outcome,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        if self.verdict.passed() {
            EXIT_PASS
        } else {
            EXIT_FAIL
        }
    }
}

/// Runs the selected suites. Suite-internal errors become failed entries.
pub fn run(suite: Suite, config: &RunConfig) -> RunReport {
    let derivation = suite.includes(Suite::Derive).then(|| derivation_suite(config));
    let ensemble = suite.includes(Suite::Ensemble).then(|| ensemble_suite(config));
    let kubo = suite.includes(Suite::Kubo).then(|| kubo_suite(config));
    let passed = derivation.as_ref().is_none_or(|s| s.verdict.passed())
        && ensemble.as_ref().is_none_or(|s| s.verdict.passed())
        && kubo.as_ref().is_none_or(|s| s.verdict.passed());
    RunReport {
        version: VERSION.into(),
        config: RunConfig {
            out: None,
            ..config.clone()
        },
        derivation,
        ensemble,
        kubo,
        verdict: Outcome::from_bool(passed),
    }
}

fn derivation_suite(config: &RunConfig) -> DerivationSection {
    let report = match derivation::derive_report(config.order, &DeriveOptions::default()) {
        Ok(r) => r,
        Err(e) => {
            return DerivationSection {
                verdict: Outcome::Fail,
                report: None,
                cross_check: None,
                error: Some(e.to_string()),
            }
        }
    };
    // the numeric comparison is against the full third-order series
    let mut error = None;
    let cross_check = if config.order == MAX_ORDER {
        let seed = suite_seed("derivation", config.seed);
        match derivation::numeric_cross_check(config.derivation.cross_check_samples, seed) {
            Ok(result) => Some(CrossCheckSection {
                seed,
                passed: (result.exponent - 4.0).abs() <= 0.3,
                result,
            }),
            Err(e) => {
                error = Some(e.to_string());
                None
            }
        }
    } else {
        None
    };
    let passed = report.passed && error.is_none() && cross_check.as_ref().is_none_or(|c| c.passed);
    DerivationSection {
        verdict: Outcome::from_bool(passed),
        report: Some(report),
        cross_check,
        error,
    }
}

fn ensemble_suite(config: &RunConfig) -> EnsembleSection {
    let e = &config.ensemble;
    let seed = suite_seed("ensemble", config.seed);
    let spec = EnsembleSpec {
        variance_e: e.variance_e,
        variance_h: e.variance_h,
        sample_count: e.samples,
        seed,
        eps: e.eps,
        mu: e.mu,
        ..EnsembleSpec::default()
    };
    match ensemble::zero_mean_suite(&spec) {
        Ok(table) => EnsembleSection {
            verdict: Outcome::from_bool(table.passed),
            seed,
            table: Some(table),
            error: None,
        },
        Err(err) => EnsembleSection {
            verdict: Outcome::Fail,
            seed,
            table: None,
            error: Some(err.to_string()),
        },
    }
}

fn kubo_suite(config: &RunConfig) -> KuboSection {
    let k = &config.kubo;
    let mut experiments = Vec::new();
    for system in &k.systems {
        match system {
            SystemKind::Oscillator => {
                experiments.push(record(SystemKind::Oscillator, || oscillator_experiment(&k.oscillator)))
            }
            SystemKind::TwoLevel => {
                experiments.push(record(SystemKind::TwoLevel, || two_level_experiment(&k.two_level)))
            }
            SystemKind::Chain => {
                let seed = suite_seed("kubo.chain", config.seed);
                for &kt in &k.chain.kts {
                    experiments.push(record(SystemKind::Chain, || chain_experiment(&k.chain, kt, seed)));
                }
            }
        }
    }
    let passed = experiments.iter().all(|r| r.verdict.passed());
    KuboSection {
        verdict: Outcome::from_bool(passed),
        experiments,
    }
}

fn record(system: SystemKind, f: impl FnOnce() -> Result<KuboRecord, KuboError>) -> KuboRecord {
    f().unwrap_or_else(|e| KuboRecord {
        system,
        dim: 0,
        temperature: Temperature::Zero,
        ground_degenerate: false,
        checks: Vec::new(),
        sweep: None,
        verdict: Outcome::Fail,
        error: Some(e.to_string()),
    })
}

fn finish(sys: &QuantumSystem, system: SystemKind, checks: Vec<KuboCheck>, sweep: Option<SweepResult>) -> KuboRecord {
    let passed = checks.iter().all(|c| c.verdict.passed());
    KuboRecord {
        system,
        dim: sys.dim(),
        temperature: sys.temperature(),
        ground_degenerate: sys.ground_degenerate(),
        checks,
        sweep,
        verdict: Outcome::from_bool(passed),
        error: None,
    }
}

fn smallest(lambdas: &[f64]) -> f64 {
    lambdas
        .iter()
        .copied()
        .min_by(|a, b| a.abs().total_cmp(&b.abs()))
        .expect("validated non-empty")
}

fn relative(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        ((a - b) / b).abs()
    }
}

fn sweep_checks(sweep: &SweepResult, checks: &mut Vec<KuboCheck>) {
    let slope = match sweep.slope {
        Some(s) => check("linearity slope", s, Bound::Within(1.7, 2.3)),
        None => KuboCheck {
            name: "linearity slope".into(),
            value: None,
            bound: Bound::Within(1.7, 2.3),
            verdict: Outcome::Pass,
            note: format!("floor-limited: every error <= {:e}", kubo::ERROR_FLOOR),
        },
    };
    checks.push(slope);
    let trace = sweep.rows.iter().map(|r| r.state.trace_error).fold(0.0, f64::max);
    let herm = sweep
        .rows
        .iter()
        .map(|r| r.state.hermiticity_defect)
        .fold(0.0, f64::max);
    let min_eig = sweep
        .rows
        .iter()
        .map(|r| r.state.min_eigenvalue)
        .fold(f64::INFINITY, f64::min);
    checks.push(check("evolved state trace drift", trace, Bound::AtMost(1e-10)));
    checks.push(check("evolved state hermiticity defect", herm, Bound::AtMost(1e-10)));
    checks.push(check(
        "evolved state negativity",
        (-min_eig).max(0.0),
        Bound::AtMost(1e-10),
    ));
}

/// Coupling for the direct prediction-versus-evolution comparison.
pub const CHECK_LAMBDA: f64 = 1e-3;

/// Relative gap between the linear prediction and the part of the exact
/// response odd in lambda, `(exact(lambda) - exact(-lambda))/2`, which
/// removes the second-order term.
pub fn linear_mismatch(sys: &QuantumSystem, a: &CMatrix, b: &CMatrix, drive: &DriveProtocol) -> Result<f64, KuboError> {
    let pred = kubo::kubo_predict(sys, a, b, drive)?.value;
    let plus = kubo::exact_response(sys, a, b, drive)?.value;
    let minus = kubo::exact_response(
        sys,
        a,
        b,
        &DriveProtocol {
            lambda: -drive.lambda,
            ..drive.clone()
        },
    )?
    .value;
    Ok(relative(pred, (plus - minus) / 2.0))
}

/// Static displacement from the Richardson combination of `eta` and `eta/2`.
pub fn static_response(sys: &QuantumSystem, a: &CMatrix, b: &CMatrix, lambda: f64, eta: f64) -> Result<f64, KuboError> {
    let at = |eta: f64| kubo::kubo_predict(sys, a, b, &DriveProtocol::adiabatic(lambda, eta, 0.0)).map(|p| p.value);
    let (coarse, fine) = (at(eta)?, at(eta / 2.0)?);
    Ok((4.0 * fine - coarse) / 3.0)
}

fn oscillator_experiment(c: &OscillatorConfig) -> Result<KuboRecord, KuboError> {
    let t = temperature(c.kt);
    let sys = kubo::oscillator(c.dim, c.omega, c.mass, t)?;
    let x = sys.observable("x")?.clone();
    let p = sys.observable("p")?.clone();
    let mut checks = Vec::new();

    let n = 20.min(c.dim / 3).max(1);
    let xt = kubo::heisenberg_evolve(&sys, &x, FRAC_PI_2 / c.omega)?;
    let target = &p * Complex64::new(1.0 / (c.mass * c.omega), 0.0);
    let dev = kubo::frobenius(&(&xt - &target).view((0, 0), (n, n)).into_owned())
        / kubo::frobenius(&target.view((0, 0), (n, n)).into_owned());
    checks.push(check(
        format!("x(pi/2w) = p/(m w) on the lowest {n} levels"),
        dev,
        Bound::AtMost(1e-8),
    ));

    let kernel = kubo::response_function(&sys, &x, &x, 0.01, 10.0)?;
    let worst = kernel
        .times()
        .zip(&kernel.values)
        .map(|(tau, v)| (v - (c.omega * tau).sin() / (c.mass * c.omega)).abs())
        .fold(0.0, f64::max);
    checks.push(check(
        "phi_xx = sin(w tau)/(m w) on [0, 10]",
        worst,
        Bound::AtMost(1e-6),
    ));

    let lambda = smallest(&c.lambdas);
    let stat = static_response(&sys, &x, &x, lambda, c.eta)?;
    let oracle = kubo::shifted_ground_displacement(&sys, &x, &x, lambda);
    checks.push(check(
        "static displacement vs shifted ground state",
        relative(stat, oracle),
        Bound::AtMost(1e-5),
    ));

    let small = kubo::oscillator(c.sweep_dim, c.omega, c.mass, t)?;
    let xs = small.observable("x")?.clone();
    let drive = DriveProtocol::adiabatic(CHECK_LAMBDA, c.eta, 2.0);
    checks.push(check(
        "kubo vs exact, x driven by x",
        linear_mismatch(&small, &xs, &xs, &drive)?,
        Bound::AtMost(1e-5),
    ));

    let x2 = small.observable("x2")?.clone();
    let sweep = kubo::linearity_sweep(&small, &x2, &x2, &DriveProtocol::adiabatic(0.0, c.eta, 0.0), &c.lambdas)?;
    sweep_checks(&sweep, &mut checks);
    Ok(finish(&sys, SystemKind::Oscillator, checks, Some(sweep)))
}

fn two_level_experiment(c: &TwoLevelConfig) -> Result<KuboRecord, KuboError> {
    let sys = kubo::two_level(c.delta, c.tilt, temperature(c.kt))?;
    let sz = sys.observable("sz")?.clone();
    let sx = sys.observable("sx")?.clone();
    let mut checks = Vec::new();
    let drive = DriveProtocol::adiabatic(CHECK_LAMBDA, c.eta, 0.0);
    checks.push(check(
        "kubo vs exact, sz driven by sx",
        linear_mismatch(&sys, &sz, &sx, &drive)?,
        Bound::AtMost(1e-5),
    ));
    let sweep = kubo::linearity_sweep(&sys, &sz, &sx, &DriveProtocol::adiabatic(0.0, c.eta, 0.0), &c.lambdas)?;
    sweep_checks(&sweep, &mut checks);
    Ok(finish(&sys, SystemKind::TwoLevel, checks, Some(sweep)))
}

fn chain_experiment(c: &ChainConfig, kt: f64, seed: u64) -> Result<KuboRecord, KuboError> {
    let params = kubo::ChainParams {
        sites: c.sites,
        j: c.j,
        hx: c.hx,
        hz: c.hz,
    };
    let sys = kubo::chain(params, temperature(kt))?;
    let bond = sys.observable("bond")?.clone();
    let mut checks = Vec::new();
    let norm = |a: &CMatrix, g: &CMatrix| kubo::frobenius(a) * kubo::frobenius(g);
    for (name, g) in [
        ("translation generator", kubo::translation_generator(c.sites)),
        ("H0", sys.h0().clone()),
    ] {
        let r = kubo::conserved_commutator_check(&sys, &bond, &g)?;
        let mut k = check(
            format!("<[A, G]> with G = {name}"),
            r.value / norm(&bond, &g),
            Bound::AtMost(1e-10),
        );
        if !r.conserved {
            k.verdict = Outcome::Fail;
            k.note = format!("G does not commute with rho0 ({:e})", r.state_commutator);
        }
        checks.push(k);
    }
    let g = kubo::random_hermitian(sys.dim(), seed);
    let r = kubo::conserved_commutator_check(&sys, &bond, &g)?;
    checks.push(check(
        "<[A, G]> with random G (control)",
        r.value / norm(&bond, &g),
        Bound::Above(1e-6),
    ));
    Ok(finish(&sys, SystemKind::Chain, checks, None))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_seeds_differ_and_are_stable() {
        assert_eq!(suite_seed("ensemble", 42), suite_seed("ensemble", 42));
        assert_ne!(suite_seed("ensemble", 42), suite_seed("derivation", 42));
        assert_ne!(suite_seed("ensemble", 42), suite_seed("ensemble", 43));
    }

    #[test]
    fn bounds() {
        assert!(Bound::AtMost(1.0).admits(1.0));
        assert!(!Bound::Above(1.0).admits(1.0));
        assert!(Bound::Within(1.7, 2.3).admits(2.0));
        assert!(!Bound::Within(1.7, 2.3).admits(f64::NAN));
    }
}
