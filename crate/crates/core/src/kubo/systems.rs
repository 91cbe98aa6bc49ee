use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{CMatrix, QuantumSystem, Result, Temperature};

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Harmonic oscillator truncated to the lowest `d` levels, with
/// observables `x`, `p` and `x2 = x*x`.
pub fn oscillator(d: usize, omega: f64, mass: f64, temperature: Temperature) -> Result<QuantumSystem> {
    let h0 = CMatrix::from_fn(d, d, |i, j| if i == j { c(omega * (i as f64 + 0.5)) } else { c(0.0) });
    let mut a = CMatrix::zeros(d, d);
    for n in 1..d {
        a[(n - 1, n)] = c((n as f64).sqrt());
    }
    let ad = a.adjoint();
    let x = (&a + &ad) * c((1.0 / (2.0 * mass * omega)).sqrt());
    let p = (&ad - &a) * Complex64::new(0.0, (mass * omega / 2.0).sqrt());
    let x2 = &x * &x;
    QuantumSystem::new(h0, temperature)?
        .with_observable("x", x)?
        .with_observable("p", p)?
        .with_observable("x2", x2)
}

fn pauli() -> [CMatrix; 3] {
    let z = c(0.0);
    let o = c(1.0);
    let i = Complex64::new(0.0, 1.0);
    [
        CMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        CMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        CMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
    ]
}

/// `H0 = (delta/2) sz + (tilt/2) sx`, with observables `sx`, `sy`, `sz`.
pub fn two_level(delta: f64, tilt: f64, temperature: Temperature) -> Result<QuantumSystem> {
    let [sx, sy, sz] = pauli();
    let h0 = &sz * c(delta / 2.0) + &sx * c(tilt / 2.0);
    QuantumSystem::new(h0, temperature)?
        .with_observable("sx", sx)?
        .with_observable("sy", sy)?
        .with_observable("sz", sz)
}

/// Cyclic spin chain `H0 = Σ J sz_n sz_{n+1} + hx sx_n + hz sz_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainParams {
    pub sites: usize,
    pub j: f64,
    pub hx: f64,
    pub hz: f64,
}

impl Default for ChainParams {
    fn default() -> Self {
        ChainParams {
            sites: 6,
            j: 1.0,
            hx: 0.9,
            hz: 0.35,
        }
    }
}

fn site_operator(op: &CMatrix, site: usize, sites: usize) -> CMatrix {
    let mut out = CMatrix::identity(1, 1);
    for n in 0..sites {
        let f = if n == site { op.clone() } else { CMatrix::identity(2, 2) };
        out = out.kronecker(&f);
    }
    out
}

/// The chain with observable `bond = sz_0 sz_1 + sx_0 sx_1`.
pub fn chain(p: ChainParams, temperature: Temperature) -> Result<QuantumSystem> {
    let n = p.sites;
    let [sx, _, sz] = pauli();
    let zs: Vec<CMatrix> = (0..n).map(|k| site_operator(&sz, k, n)).collect();
    let xs: Vec<CMatrix> = (0..n).map(|k| site_operator(&sx, k, n)).collect();
    let d = 1 << n;
    let mut h0 = CMatrix::zeros(d, d);
    for k in 0..n {
        h0 += &zs[k] * &zs[(k + 1) % n] * c(p.j) + &xs[k] * c(p.hx) + &zs[k] * c(p.hz);
    }
    let bond = bond_observable(n);
    QuantumSystem::new(h0, temperature)?.with_observable("bond", bond)
}

pub fn bond_observable(sites: usize) -> CMatrix {
    let [sx, _, sz] = pauli();
    site_operator(&sz, 0, sites) * site_operator(&sz, 1, sites)
        + site_operator(&sx, 0, sites) * site_operator(&sx, 1, sites)
}

/// Cyclic shift moving the spin on site n to site n+1.
pub fn translation_operator(sites: usize) -> CMatrix {
    let d = 1usize << sites;
    let mut t = CMatrix::zeros(d, d);
    // site 0 is the most significant bit of the basis index
    for s in 0..d {
        let low = s & 1;
        let shifted = (s >> 1) | (low << (sites - 1));
        t[(shifted, s)] = c(1.0);
    }
    t
}

/// Hermitian `G` with `exp(iG) = T`: `G = Σ theta_k P_k` over the momentum
/// projectors `P_k = (1/N) Σ_n e^{-2πikn/N} T^n`.
pub fn translation_generator(sites: usize) -> CMatrix {
    let t = translation_operator(sites);
    let d = t.nrows();
    let mut powers = vec![CMatrix::identity(d, d)];
    for n in 1..sites {
        powers.push(&t * &powers[n - 1]);
    }
    let nf = sites as f64;
    let mut g = CMatrix::zeros(d, d);
    for k in 0..sites {
        let kk = if 2 * k <= sites { k as f64 } else { k as f64 - nf };
        let theta = 2.0 * PI * kk / nf;
        let mut proj = CMatrix::zeros(d, d);
        for (n, tn) in powers.iter().enumerate() {
            proj += tn * Complex64::from_polar(1.0 / nf, -2.0 * PI * k as f64 * n as f64 / nf);
        }
        g += proj * c(theta);
    }
    g
}

/// Seeded random Hermitian matrix with unit-variance Gaussian entries.
pub fn random_hermitian(d: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = DMatrix::from_fn(d, d, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        Complex64::new(re, im)
    });
    (&m + m.adjoint()) * c(0.5)
}

/// `<A>` in the ground state of `H0 + lambda B` minus `<A>` in the ground
/// state of `H0`.
pub fn shifted_ground_displacement(sys: &QuantumSystem, a: &CMatrix, b: &CMatrix, lambda: f64) -> f64 {
    let ground = |h: CMatrix| {
        let eig = SymmetricEigen::new(h);
        let (i, _) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|x, y| x.1.total_cmp(y.1))
            .expect("non-empty spectrum");
        let v = eig.eigenvectors.column(i).into_owned();
        (v.adjoint() * a * &v)[(0, 0)].re
    };
    ground(sys.h0() + b * c(lambda)) - ground(sys.h0().clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kubo::frobenius;

    #[test]
    fn translation_generator_exponentiates_to_shift() {
        let n = 4;
        let g = translation_generator(n);
        assert!(frobenius(&(&g - g.adjoint())) < 1e-12);
        let eig = SymmetricEigen::new(g);
        let d = eig.eigenvalues.len();
        let exp = CMatrix::from_fn(d, d, |i, j| {
            if i == j {
                Complex64::from_polar(1.0, eig.eigenvalues[i])
            } else {
                c(0.0)
            }
        });
        let t = &eig.eigenvectors * exp * eig.eigenvectors.adjoint();
        assert!(frobenius(&(t - translation_operator(n))) < 1e-10);
    }

    #[test]
    fn chain_commutes_with_translation() {
        let sys = chain(ChainParams::default(), Temperature::Zero).unwrap();
        let t = translation_operator(6);
        let h = sys.h0();
        assert!(frobenius(&(h * &t - &t * h)) < 1e-12);
        let b = bond_observable(6);
        // the bond moves to the next pair under translation
        let moved = &t * &b * t.adjoint();
        assert!(frobenius(&(moved - &b)) > 1.0);
    }

    #[test]
    fn oscillator_commutator_is_canonical_below_the_cutoff() {
        let sys = oscillator(30, 1.3, 0.7, Temperature::Zero).unwrap();
        let x = sys.observable("x").unwrap();
        let p = sys.observable("p").unwrap();
        let comm = x * p - p * x;
        for i in 0..29 {
            assert!((comm[(i, i)] - Complex64::new(0.0, 1.0)).norm() < 1e-12);
        }
    }
}
