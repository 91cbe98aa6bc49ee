//! Finite-dimensional linear-response laboratory.
//!
//! Units: ħ = 1, temperatures given as kT. A drive adds
//! `H1(t) = lambda * f(t) * B` to `H0` with `f(t) = exp(eta*t)` for
//! `t <= 0` and `f(t) = 1` afterwards. The response function is
//!
//! ```text
//! phi_AB(tau) = i tr(rho0 [A(tau), B]),   <<A(t), B(t')>> = -theta(t - t') phi_AB(t - t')
//! ```
//!
//! and the linear prediction is `Δ<A>(t) = -lambda ∫ phi_AB(t - t') f(t') dt'`.

mod systems;

pub use systems::{
    bond_observable, chain, oscillator, random_hermitian, shifted_ground_displacement, translation_generator,
    translation_operator, two_level, ChainParams,
};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type CMatrix = DMatrix<Complex64>;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Error, PartialEq)]
pub enum KuboError {
    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("invalid drive: {0}")]
    InvalidDrive(String),
    #[error("invalid temperature: {0}")]
    InvalidTemperature(String),
    #[error("quadrature did not settle after {0} halvings")]
    GridTooCoarse(u32),
    #[error("time stepping did not settle after {0} halvings")]
    NoConvergence(u32),
    #[error("unknown observable `{0}`")]
    UnknownObservable(String),
}

pub type Result<T, E = KuboError> = std::result::Result<T, E>;

/// Equilibrium temperature: ground state or Gibbs state at kT.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Temperature {
    Zero,
    Kt(f64),
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn hermiticity_defect(m: &CMatrix) -> f64 {
    frobenius(&(m - m.adjoint()))
}

fn check_hermitian(m: &CMatrix) -> Result<()> {
    let defect = hermiticity_defect(m);
    if defect > 1e-12 * frobenius(m).max(1.0) {
        return Err(KuboError::NotHermitian(defect));
    }
    Ok(())
}

/// `H0` with its spectrum, an equilibrium state and named observables.
#[derive(Debug, Clone)]
pub struct QuantumSystem {
    h0: CMatrix,
    energies: DVector<f64>,
    /// Columns are eigenvectors of `H0`, in ascending energy order.
    basis: CMatrix,
    /// True when `H0` was already diagonal and `basis` is the identity.
    diagonal: bool,
    populations: Vec<f64>,
    temperature: Temperature,
    ground_degeneracy: usize,
    observables: Vec<(String, CMatrix)>,
}

impl QuantumSystem {
    pub fn new(h0: CMatrix, temperature: Temperature) -> Result<Self> {
        if h0.nrows() != h0.ncols() {
            return Err(KuboError::Dimension {
                expected: h0.nrows(),
                got: h0.ncols(),
            });
        }
        check_hermitian(&h0)?;
        if let Temperature::Kt(kt) = temperature {
            if !(kt > 0.0 && kt.is_finite()) {
                return Err(KuboError::InvalidTemperature(format!("kT must be positive, got {kt}")));
            }
        }
        let d = h0.nrows();
        let diagonal = (0..d).all(|i| (0..d).all(|j| i == j || h0[(i, j)] == Complex64::new(0.0, 0.0)));
        let (energies, basis) = if diagonal {
            let mut order: Vec<usize> = (0..d).collect();
            order.sort_by(|&a, &b| h0[(a, a)].re.total_cmp(&h0[(b, b)].re));
            let e = DVector::from_iterator(d, order.iter().map(|&i| h0[(i, i)].re));
            let mut v = CMatrix::zeros(d, d);
            for (col, &i) in order.iter().enumerate() {
                v[(i, col)] = Complex64::new(1.0, 0.0);
            }
            (e, v)
        } else {
            let eig = SymmetricEigen::new(h0.clone());
            let mut order: Vec<usize> = (0..d).collect();
            order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
            let e = DVector::from_iterator(d, order.iter().map(|&i| eig.eigenvalues[i]));
            let v = CMatrix::from_columns(&order.iter().map(|&i| eig.eigenvectors.column(i)).collect::<Vec<_>>());
            (e, v)
        };
        let e0 = energies[0];
        let tol = 1e-9 * e0.abs().max(1.0);
        let ground_degeneracy = energies.iter().filter(|e| **e - e0 <= tol).count();
        let populations: Vec<f64> = match temperature {
            Temperature::Zero => energies
                .iter()
                .map(|e| {
                    if *e - e0 <= tol {
                        1.0 / ground_degeneracy as f64
                    } else {
                        0.0
                    }
                })
                .collect(),
            Temperature::Kt(kt) => {
                let w: Vec<f64> = energies.iter().map(|e| (-(e - e0) / kt).exp()).collect();
                let z: f64 = w.iter().sum();
                w.into_iter().map(|x| x / z).collect()
            }
        };
        Ok(QuantumSystem {
            h0,
            energies,
            basis,
            diagonal,
            populations,
            temperature,
            ground_degeneracy,
            observables: Vec::new(),
        })
    }

    pub fn with_observable(mut self, name: &str, m: CMatrix) -> Result<Self> {
        self.check_operator(&m)?;
        self.observables.retain(|(n, _)| n != name);
        self.observables.push((name.to_string(), m));
        Ok(self)
    }

    pub fn observable(&self, name: &str) -> Result<&CMatrix> {
        self.observables
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, m)| m)
            .ok_or_else(|| KuboError::UnknownObservable(name.into()))
    }

    /// Same Hamiltonian and observables at another temperature.
    pub fn at_temperature(&self, temperature: Temperature) -> Result<Self> {
        let mut s = QuantumSystem::new(self.h0.clone(), temperature)?;
        s.observables = self.observables.clone();
        Ok(s)
    }

    fn check_operator(&self, m: &CMatrix) -> Result<()> {
        if m.nrows() != self.dim() || m.ncols() != self.dim() {
            return Err(KuboError::Dimension {
                expected: self.dim(),
                got: m.nrows(),
            });
        }
        check_hermitian(m)
    }

    pub fn dim(&self) -> usize {
        self.h0.nrows()
    }

    pub fn h0(&self) -> &CMatrix {
        &self.h0
    }

    pub fn energies(&self) -> &DVector<f64> {
        &self.energies
    }

    pub fn temperature(&self) -> Temperature {
        self.temperature
    }

    /// Equilibrium populations of the energy eigenstates.
    pub fn populations(&self) -> &[f64] {
        &self.populations
    }

    /// More than one state shares the lowest energy; at T = 0 the state is
    /// then the uniform mixture over the ground space.
    pub fn ground_degenerate(&self) -> bool {
        self.ground_degeneracy > 1
    }

    pub fn ground_degeneracy(&self) -> usize {
        self.ground_degeneracy
    }

    /// Smallest nonzero level spacing.
    pub fn smallest_gap(&self) -> f64 {
        self.energies
            .as_slice()
            .windows(2)
            .map(|w| w[1] - w[0])
            .filter(|g| *g > 1e-9)
            .fold(f64::INFINITY, f64::min)
    }

    fn to_eigenbasis(&self, m: &CMatrix) -> CMatrix {
        if self.diagonal {
            let d = self.dim();
            let perm: Vec<usize> = (0..d)
                .map(|c| (0..d).find(|&r| self.basis[(r, c)].re == 1.0).expect("permutation"))
                .collect();
            CMatrix::from_fn(d, d, |i, j| m[(perm[i], perm[j])])
        } else {
            self.basis.adjoint() * m * &self.basis
        }
    }

    fn to_original_basis(&self, m: &CMatrix) -> CMatrix {
        if self.diagonal {
            let d = self.dim();
            let perm: Vec<usize> = (0..d)
                .map(|c| (0..d).find(|&r| self.basis[(r, c)].re == 1.0).expect("permutation"))
                .collect();
            let mut out = CMatrix::zeros(d, d);
            for i in 0..d {
                for j in 0..d {
                    out[(perm[i], perm[j])] = m[(i, j)];
                }
            }
            out
        } else {
            &self.basis * m * self.basis.adjoint()
        }
    }

    /// The equilibrium density matrix in the original basis.
    pub fn rho0(&self) -> CMatrix {
        let d = self.dim();
        let diag = CMatrix::from_fn(d, d, |i, j| {
            if i == j {
                Complex64::new(self.populations[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        self.to_original_basis(&diag)
    }

    /// Trace error, smallest eigenvalue and Hermiticity defect of ρ0.
    pub fn state_diagnostics(&self) -> StateDiagnostics {
        let rho = self.rho0();
        state_diagnostics(&rho)
    }

    pub fn expectation(&self, m: &CMatrix) -> f64 {
        (self.rho0() * m).trace().re
    }

    /// Nonzero entries of `m` in the energy basis as (row, col, value).
    fn sparse_eigen(&self, m: &CMatrix) -> Vec<(usize, usize, Complex64)> {
        let me = self.to_eigenbasis(m);
        let scale = me.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let floor = 1e-15 * scale;
        let d = self.dim();
        let mut out = Vec::new();
        for i in 0..d {
            for j in 0..d {
                if me[(i, j)].norm() > floor {
                    out.push((i, j, me[(i, j)]));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateDiagnostics {
    pub trace_error: f64,
    pub min_eigenvalue: f64,
    pub hermiticity_defect: f64,
}

fn state_diagnostics(rho: &CMatrix) -> StateDiagnostics {
    let herm = (rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(herm);
    StateDiagnostics {
        trace_error: (rho.trace().re - 1.0).abs() + rho.trace().im.abs(),
        min_eigenvalue: eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min),
        hermiticity_defect: hermiticity_defect(rho),
    }
}

/// `exp(i H0 t) M exp(-i H0 t)`.
pub fn heisenberg_evolve(sys: &QuantumSystem, m: &CMatrix, t: f64) -> Result<CMatrix> {
    sys.check_operator(m)?;
    if t == 0.0 {
        return Ok(m.clone());
    }
    let e = &sys.energies;
    let me = sys.to_eigenbasis(m);
    let d = sys.dim();
    let phase: Vec<Complex64> = e.iter().map(|x| Complex64::from_polar(1.0, x * t)).collect();
    let evolved = CMatrix::from_fn(d, d, |i, j| me[(i, j)] * phase[i] * phase[j].conj());
    Ok(sys.to_original_basis(&evolved))
}

/// `phi_AB` as a sum of oscillating terms, `Re(i Σ c e^{i w tau})`.
#[derive(Debug, Clone)]
pub struct SpectralResponse {
    terms: Vec<(f64, Complex64)>,
}

impl SpectralResponse {
    pub fn new(sys: &QuantumSystem, a: &CMatrix, b: &CMatrix) -> Result<Self> {
        sys.check_operator(a)?;
        sys.check_operator(b)?;
        let ae = sys.to_eigenbasis(a);
        let be = sys.to_eigenbasis(b);
        let p = &sys.populations;
        let e = &sys.energies;
        let d = sys.dim();
        let mut terms = Vec::new();
        for j in 0..d {
            for k in 0..d {
                let dp = p[j] - p[k];
                if dp == 0.0 {
                    continue;
                }
                let c = ae[(j, k)] * be[(k, j)] * dp;
                if c.norm() > 0.0 {
                    terms.push((e[j] - e[k], c));
                }
            }
        }
        Ok(SpectralResponse { terms })
    }

    pub fn at(&self, tau: f64) -> f64 {
        self.terms
            .iter()
            .map(|(w, c)| -(c.re * (w * tau).sin() + c.im * (w * tau).cos()))
            .sum()
    }

    /// Highest transition frequency contributing to the response.
    pub fn max_frequency(&self) -> f64 {
        self.terms.iter().map(|(w, _)| w.abs()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseKernel {
    pub dt: f64,
    /// `phi_AB(n dt)` for n = 0..len.
    pub values: Vec<f64>,
}

impl ResponseKernel {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(|n| n as f64 * self.dt)
    }

    /// The retarded Green function `-theta(tau) phi(tau)` at grid point `n`,
    /// for `n` possibly negative.
    pub fn green(&self, n: i64) -> f64 {
        if n < 0 {
            0.0
        } else {
            -self.values[n as usize]
        }
    }
}

/// `phi_AB` on the grid `0, dt, ..., t_max`.
pub fn response_function(sys: &QuantumSystem, a: &CMatrix, b: &CMatrix, dt: f64, t_max: f64) -> Result<ResponseKernel> {
    let s = SpectralResponse::new(sys, a, b)?;
    let n = (t_max / dt).round() as usize + 1;
    Ok(ResponseKernel {
        dt,
        values: (0..n).map(|k| s.at(k as f64 * dt)).collect(),
    })
}

/// Adiabatically switched drive `lambda * f(t) * B`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriveProtocol {
    pub lambda: f64,
    pub eta: f64,
    pub t_start: f64,
    pub t_meas: f64,
    /// Value of `f` after the measurement time; it cannot affect the
    /// measured response.
    pub after_measurement: Option<f64>,
}

impl DriveProtocol {
    /// Switch-on from `t_start = -20/eta`, measured at `t_meas`.
    pub fn adiabatic(lambda: f64, eta: f64, t_meas: f64) -> Self {
        DriveProtocol {
            lambda,
            eta,
            t_start: -20.0 / eta,
            t_meas,
            after_measurement: None,
        }
    }

    // negated comparisons also reject NaN
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(KuboError::InvalidDrive(m));
        if !(self.eta > 0.0) {
            return bad(format!("eta must be positive, got {}", self.eta));
        }
        if !(self.t_start < 0.0) {
            return bad(format!("t_start must be negative, got {}", self.t_start));
        }
        if self.eta * self.t_start.abs() < 20.0 - 1e-9 {
            return bad(format!(
                "eta*|t_start| = {} leaves the drive switched on at the start; need >= 20",
                self.eta * self.t_start.abs()
            ));
        }
        if !(self.t_meas >= 0.0) {
            return bad(format!("t_meas must be non-negative, got {}", self.t_meas));
        }
        if !self.lambda.is_finite() {
            return bad("lambda must be finite".into());
        }
        Ok(())
    }

    pub fn f(&self, t: f64) -> f64 {
        if t > self.t_meas {
            if let Some(v) = self.after_measurement {
                return v;
            }
        }
        if t <= 0.0 {
            (self.eta * t).exp()
        } else {
            1.0
        }
    }
}

fn simpson(a: f64, b: f64, n: usize, g: impl Fn(f64) -> f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let n = n.max(2) + n.max(2) % 2;
    let h = (b - a) / n as f64;
    let mut s = g(a) + g(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * g(a + k as f64 * h);
    }
    s * h / 3.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub value: f64,
    pub dt: f64,
    /// Change under the last dt halving.
    pub last_change: f64,
}

/// Linear-response prediction of `Δ<A>(t_meas)`. The quadrature step is
/// halved until the result changes by less than 1e-8 relative.
pub fn kubo_predict(sys: &QuantumSystem, a: &CMatrix, b: &CMatrix, drive: &DriveProtocol) -> Result<Prediction> {
    drive.validate()?;
    let phi = SpectralResponse::new(sys, a, b)?;
    if drive.lambda == 0.0 || phi.is_zero() {
        return Ok(Prediction {
            value: 0.0,
            dt: 0.0,
            last_change: 0.0,
        });
    }
    let tm = drive.t_meas;
    let integral = |dt: f64| {
        let g = |t: f64| phi.at(tm - t) * drive.f(t);
        let n1 = (drive.t_start.abs() / dt).ceil() as usize;
        let n2 = (tm / dt).ceil() as usize;
        simpson(drive.t_start, 0.0, n1, g) + simpson(0.0, tm, n2, g)
    };
    let w = phi.max_frequency().max(drive.eta);
    let mut dt = (0.25 / w).min(0.1);
    let mut prev = -drive.lambda * integral(dt);
    for _ in 0..16 {
        dt /= 2.0;
        let next = -drive.lambda * integral(dt);
        let change = (next - prev).abs();
        if change <= 1e-8 * next.abs().max(1e-300) || change < 1e-15 {
            return Ok(Prediction {
                value: next,
                dt,
                last_change: change,
            });
        }
        prev = next;
    }
    Err(KuboError::GridTooCoarse(16))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactResult {
    pub value: f64,
    pub dt: f64,
    pub halvings: u32,
    pub last_change: f64,
    /// Diagnostics of ρ(t_meas).
    pub state: StateDiagnostics,
}

/// Integrates the von Neumann equation in the interaction picture with
/// classical RK4 and reports `tr(rho(t_meas) A) - tr(rho0 A)`.
pub fn exact_response(sys: &QuantumSystem, a: &CMatrix, b: &CMatrix, drive: &DriveProtocol) -> Result<ExactResult> {
    drive.validate()?;
    sys.check_operator(a)?;
    let bs = {
        sys.check_operator(b)?;
        sys.sparse_eigen(b)
    };
    let ae = sys.to_eigenbasis(a);
    let d = sys.dim();
    let rho0 = CMatrix::from_fn(d, d, |i, j| {
        if i == j {
            Complex64::new(sys.populations[i], 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let a0: f64 = (0..d).map(|i| sys.populations[i] * ae[(i, i)].re).sum();
    if drive.lambda == 0.0 {
        return Ok(ExactResult {
            value: 0.0,
            dt: 0.0,
            halvings: 0,
            last_change: 0.0,
            state: state_diagnostics(&rho0),
        });
    }
    let e = sys.energies.as_slice();
    let span = drive.t_meas - drive.t_start;
    let w = bs
        .iter()
        .map(|(i, j, _)| (e[*i] - e[*j]).abs())
        .fold(drive.eta, f64::max);

    // f has a kink at t = 0, so both 0 and t_meas are grid nodes
    let nodes = |steps: usize| -> Vec<f64> {
        let h = span / steps as f64;
        let n1 = ((-drive.t_start / h).round() as usize).max(1);
        let n2 = (drive.t_meas / h).round() as usize;
        let h1 = -drive.t_start / n1 as f64;
        let mut ts: Vec<f64> = (0..n1).map(|k| drive.t_start + k as f64 * h1).collect();
        ts.push(0.0);
        if n2 > 0 {
            let h2 = drive.t_meas / n2 as f64;
            ts.extend((1..n2).map(|k| k as f64 * h2));
            ts.push(drive.t_meas);
        }
        ts
    };
    let run = |steps: usize| -> (f64, CMatrix) {
        let n = d * d;
        let phases = |t: f64| -> Vec<Complex64> { e.iter().map(|x| Complex64::from_polar(1.0, x * t)).collect() };
        let mut m = vec![Complex64::new(0.0, 0.0); n];
        // d(rho)/dt = -i lambda f(t) [B(t), rho], with (B rho)^† = rho B
        let mut rhs = |t: f64, phase: &[Complex64], rho: &[Complex64], out: &mut [Complex64]| {
            m.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
            for &(i, j, v) in &bs {
                let c = v * phase[i] * phase[j].conj();
                let (row, src) = (&mut m[i * d..(i + 1) * d], &rho[j * d..(j + 1) * d]);
                for (r, s) in row.iter_mut().zip(src) {
                    *r += c * s;
                }
            }
            let scale = -I * drive.lambda * drive.f(t);
            for a in 0..d {
                for b in 0..d {
                    out[a * d + b] = scale * (m[a * d + b] - m[b * d + a].conj());
                }
            }
        };
        let mut rho: Vec<Complex64> = rho0.transpose().iter().copied().collect();
        let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (
            vec![rho[0]; n],
            vec![rho[0]; n],
            vec![rho[0]; n],
            vec![rho[0]; n],
            vec![rho[0]; n],
        );
        let axpy = |out: &mut [Complex64], x: &[Complex64], s: f64, y: &[Complex64]| {
            for ((o, x), y) in out.iter_mut().zip(x).zip(y) {
                *o = x + y * s;
            }
        };
        let ts = nodes(steps);
        let mut p_start = phases(drive.t_start);
        for w in ts.windows(2) {
            let (t, h) = (w[0], w[1] - w[0]);
            let p_mid = phases(t + h / 2.0);
            let p_end = phases(w[1]);
            rhs(t, &p_start, &rho, &mut k1);
            axpy(&mut tmp, &rho, h / 2.0, &k1);
            rhs(t + h / 2.0, &p_mid, &tmp, &mut k2);
            axpy(&mut tmp, &rho, h / 2.0, &k2);
            rhs(t + h / 2.0, &p_mid, &tmp, &mut k3);
            axpy(&mut tmp, &rho, h, &k3);
            rhs(w[1], &p_end, &tmp, &mut k4);
            for idx in 0..n {
                rho[idx] += (k1[idx] + (k2[idx] + k3[idx]) * 2.0 + k4[idx]) * (h / 6.0);
            }
            p_start = p_end;
        }
        let rho = CMatrix::from_row_slice(d, d, &rho);
        let phase = phases(drive.t_meas);
        let mut value = Complex64::new(0.0, 0.0);
        for i in 0..d {
            for j in 0..d {
                // tr(rho_I A_I), A_I(t)_ji = A_ji e^{i(E_j - E_i) t}
                value += rho[(i, j)] * ae[(j, i)] * phase[j] * phase[i].conj();
            }
        }
        (value.re - a0, rho)
    };

    const MAX_HALVINGS: u32 = 12;
    let mut steps = ((span * w / 0.5).ceil() as usize).max(64);
    let (mut prev, _) = run(steps);
    for halving in 1..=MAX_HALVINGS {
        steps *= 2;
        let (next, rho) = run(steps);
        let change = (next - prev).abs();
        if change < 1e-9 {
            return Ok(ExactResult {
                value: next,
                dt: span / steps as f64,
                halvings: halving,
                last_change: change,
                state: state_diagnostics(&rho),
            });
        }
        prev = next;
    }
    Err(KuboError::NoConvergence(MAX_HALVINGS))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub predicted: f64,
    pub exact: f64,
    pub error: f64,
    /// Diagnostics of the exactly evolved state.
    pub state: StateDiagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// Fitted d log(error) / d log(lambda); absent when floor-limited.
    pub slope: Option<f64>,
    pub floor_limited: bool,
}

/// Errors below this are indistinguishable from the exact solver's
/// convergence tolerance.
pub const ERROR_FLOOR: f64 = 1e-8;

/// Least-squares slope of log y against log x.
pub fn log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Linear-response error against exact evolution over a list of
/// couplings, with the power-law slope of the error.
pub fn linearity_sweep(
    sys: &QuantumSystem,
    a: &CMatrix,
    b: &CMatrix,
    template: &DriveProtocol,
    lambdas: &[f64],
) -> Result<SweepResult> {
    let rows = lambdas
        .par_iter()
        .map(|&lambda| {
            let drive = DriveProtocol {
                lambda,
                ..template.clone()
            };
            let predicted = kubo_predict(sys, a, b, &drive)?.value;
            let exact = exact_response(sys, a, b, &drive)?;
            Ok(SweepRow {
                lambda,
                predicted,
                exact: exact.value,
                error: (exact.value - predicted).abs(),
                state: exact.state,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let usable: Vec<&SweepRow> = rows
        .iter()
        .filter(|r| r.lambda != 0.0 && r.error > ERROR_FLOOR)
        .collect();
    let (slope, floor_limited) = if usable.len() >= 2 {
        let xs: Vec<f64> = usable.iter().map(|r| r.lambda.abs()).collect();
        let ys: Vec<f64> = usable.iter().map(|r| r.error).collect();
        (Some(log_slope(&xs, &ys)), false)
    } else {
        (None, true)
    };
    Ok(SweepResult {
        rows,
        slope,
        floor_limited,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommutatorCheck {
    /// |tr(rho0 [A, G])|.
    pub value: f64,
    /// 1e-10 ‖A‖ ‖G‖ (Frobenius norms).
    pub bound: f64,
    /// ‖[rho0, G]‖ / (‖rho0‖ ‖G‖).
    pub state_commutator: f64,
    pub conserved: bool,
    /// `conserved` and `value <= bound`.
    pub passed: bool,
}

/// Checks that `<[A, G]>_0` vanishes when `G` commutes with the
/// equilibrium state.
pub fn conserved_commutator_check(sys: &QuantumSystem, a: &CMatrix, g: &CMatrix) -> Result<CommutatorCheck> {
    sys.check_operator(a)?;
    sys.check_operator(g)?;
    let rho = sys.rho0();
    let comm = a * g - g * a;
    let value = (&rho * comm).trace().norm();
    let bound = 1e-10 * frobenius(a) * frobenius(g);
    let rg = &rho * g - g * &rho;
    let state_commutator = frobenius(&rg) / (frobenius(&rho) * frobenius(g)).max(f64::MIN_POSITIVE);
    let conserved = state_commutator <= 1e-12;
    Ok(CommutatorCheck {
        value,
        bound,
        state_commutator,
        conserved,
        passed: conserved && value <= bound,
    })
}
