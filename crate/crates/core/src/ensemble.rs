//! Seeded Gaussian field ensembles and equilibrium averages.
//!
//! Samples are drawn in fixed blocks of [`BLOCK`] samples. Block `b` uses
//! a ChaCha8 generator seeded with the spec's seed on stream `b`, and fills
//! each sample in the order E_x, E_y, E_z, H_x, H_y, H_z with standard
//! normals scaled to the requested variance. Per-block partial sums are
//! merged in block order, so serial and parallel runs agree bit for bit.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::derivation::{SIGMA0, SIGMA1, W0};
use crate::expr::{parse, CompiledExpr, Expr, ExprError, Kind, SymbolTable};

/// Samples per generator stream.
pub const BLOCK: usize = 4096;

/// Acceptance threshold in standard errors.
pub const SIGMA_LEVEL: f64 = 5.0;

#[derive(Debug, Error)]
pub enum EnsembleError {
    #[error("invalid ensemble spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

pub type Result<T, E = EnsembleError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub variance_e: f64,
    pub variance_h: f64,
    pub sample_count: usize,
    pub seed: u64,
    /// Per-axis variance multipliers applied to both fields.
    pub anisotropy: [f64; 3],
    pub eps: f64,
    pub mu: f64,
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        EnsembleSpec {
            variance_e: 1.0,
            variance_h: 1.0,
            sample_count: 1_000_000,
            seed: 0,
            anisotropy: [1.0; 3],
            eps: 2.0,
            mu: 1.5,
        }
    }
}

impl EnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(EnsembleError::InvalidSpec(m));
        if !(self.variance_e > 0.0 && self.variance_e.is_finite()) {
            return bad(format!("variance_e must be positive, got {}", self.variance_e));
        }
        if !(self.variance_h > 0.0 && self.variance_h.is_finite()) {
            return bad(format!("variance_h must be positive, got {}", self.variance_h));
        }
        if self.sample_count < 2 {
            return bad(format!("sample_count must be at least 2, got {}", self.sample_count));
        }
        if self.anisotropy.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
            return bad(format!(
                "anisotropy multipliers must be positive, got {:?}",
                self.anisotropy
            ));
        }
        if !(self.eps > 0.0 && self.mu > 0.0) {
            return bad(format!("eps and mu must be positive, got {} and {}", self.eps, self.mu));
        }
        Ok(())
    }

    fn blocks(&self) -> usize {
        self.sample_count.div_ceil(BLOCK)
    }

    fn block_len(&self, b: usize) -> usize {
        BLOCK.min(self.sample_count - b * BLOCK)
    }

    fn scales(&self) -> [f64; 6] {
        let a = self.anisotropy;
        let (se, sh) = (self.variance_e, self.variance_h);
        [
            (se * a[0]).sqrt(),
            (se * a[1]).sqrt(),
            (se * a[2]).sqrt(),
            (sh * a[0]).sqrt(),
            (sh * a[1]).sqrt(),
            (sh * a[2]).sqrt(),
        ]
    }

    fn fill_block(&self, b: usize, out: &mut Vec<[f64; 6]>) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(b as u64);
        let scale = self.scales();
        for _ in 0..self.block_len(b) {
            out.push(std::array::from_fn(|i| {
                let z: f64 = StandardNormal.sample(&mut rng);
                z * scale[i]
            }));
        }
    }

    /// Seed used for the single permitted resample.
    pub fn resample_seed(&self) -> u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(u64::MAX);
        rng.next_u64()
    }
}

/// Samples of (E, H), six components each, in block order.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub samples: Vec<[f64; 6]>,
}

impl SampleBatch {
    pub fn e(&self, i: usize) -> [f64; 3] {
        let s = &self.samples[i];
        [s[0], s[1], s[2]]
    }

    pub fn h(&self, i: usize) -> [f64; 3] {
        let s = &self.samples[i];
        [s[3], s[4], s[5]]
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

pub fn sample_fields(spec: &EnsembleSpec) -> Result<SampleBatch> {
    spec.validate()?;
    let mut samples = Vec::with_capacity(spec.sample_count);
    for b in 0..spec.blocks() {
        spec.fill_block(b, &mut samples);
    }
    Ok(SampleBatch { samples })
}

/// Count, sum and sum of squares; merging is associative.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub count: u64,
    pub sum: f64,
    pub sumsq: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        self.sum += x;
        self.sumsq += x * x;
    }

    pub fn merge(self, o: Moments) -> Moments {
        Moments {
            count: self.count + o.count,
            sum: self.sum + o.sum,
            sumsq: self.sumsq + o.sumsq,
        }
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.count as f64
    }

    /// Sample standard deviation over √n.
    pub fn stderr(&self) -> f64 {
        let n = self.count as f64;
        let var = ((self.sumsq - self.sum * self.sum / n) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub label: String,
    pub mean: f64,
    pub stderr: f64,
    pub sample_count: u64,
}

impl EstimateResult {
    fn from_moments(label: &str, m: Moments) -> Self {
        EstimateResult {
            label: label.into(),
            mean: m.mean(),
            stderr: m.stderr(),
            sample_count: m.count,
        }
    }

    /// |mean − expected| in standard errors.
    pub fn z(&self, expected: f64) -> f64 {
        (self.mean - expected).abs() / self.stderr
    }
}

/// Material constants for evaluation; kappa follows from eps and mu.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Medium {
    pub eps: f64,
    pub mu: f64,
}

impl Medium {
    fn slots(&self) -> [f64; 3] {
        [self.eps, self.mu, self.eps * self.mu - 1.0]
    }
}

const SCALARS: [&str; 3] = ["eps", "mu", "kappa"];
const VECTORS: [&str; 2] = ["E", "H"];

fn compile(e: &Expr) -> Result<CompiledExpr> {
    if e.kind() != Kind::Scalar {
        return Err(ExprError::KindMismatch("ensemble average of a vector".into()).into());
    }
    // S and other field-level definitions are inlined; kappa stays a slot
    let t = SymbolTable::moving_media();
    let e = t.expand_only(e, &["S"])?;
    Ok(CompiledExpr::compile(&e, &SCALARS, &VECTORS)?)
}

fn block_moments(exprs: &[CompiledExpr], medium: &Medium, samples: &[[f64; 6]]) -> Vec<Moments> {
    let s = medium.slots();
    let mut m = vec![Moments::default(); exprs.len()];
    for x in samples {
        let v = [[x[0], x[1], x[2]], [x[3], x[4], x[5]]];
        for (acc, c) in m.iter_mut().zip(exprs) {
            acc.push(c.eval_scalar(&s, &v));
        }
    }
    m
}

fn merge_in_order(parts: Vec<Vec<Moments>>, n: usize) -> Vec<Moments> {
    parts.into_iter().fold(vec![Moments::default(); n], |acc, p| {
        acc.into_iter().zip(p).map(|(a, b)| a.merge(b)).collect()
    })
}

/// Mean and standard error of `expr` over a materialized batch.
pub fn estimate_mean(expr: &Expr, batch: &SampleBatch, medium: &Medium) -> Result<EstimateResult> {
    let c = [compile(expr)?];
    let parts: Vec<Vec<Moments>> = batch
        .samples
        .chunks(BLOCK)
        .map(|chunk| block_moments(&c, medium, chunk))
        .collect();
    let m = merge_in_order(parts, 1);
    Ok(EstimateResult::from_moments(&expr.to_string(), m[0]))
}

/// Estimates several expressions in one pass without materializing the
/// batch. Blocks are generated and evaluated in parallel, `blocks_per_task`
/// at a time; the result does not depend on that grouping.
pub fn estimate_streaming(
    exprs: &[(String, Expr)],
    spec: &EnsembleSpec,
    blocks_per_task: usize,
) -> Result<Vec<EstimateResult>> {
    spec.validate()?;
    let compiled = exprs.iter().map(|(_, e)| compile(e)).collect::<Result<Vec<_>>>()?;
    let medium = Medium {
        eps: spec.eps,
        mu: spec.mu,
    };
    let tasks: Vec<usize> = (0..spec.blocks()).step_by(blocks_per_task.max(1)).collect();
    let per_task: Vec<Vec<Vec<Moments>>> = tasks
        .par_iter()
        .map(|&first| {
            let last = (first + blocks_per_task.max(1)).min(spec.blocks());
            let mut buf = Vec::with_capacity(BLOCK);
            (first..last)
                .map(|b| {
                    buf.clear();
                    spec.fill_block(b, &mut buf);
                    block_moments(&compiled, &medium, &buf)
                })
                .collect()
        })
        .collect();
    let merged = merge_in_order(per_task.into_iter().flatten().collect(), exprs.len());
    Ok(exprs
        .iter()
        .zip(merged)
        .map(|((label, _), m)| EstimateResult::from_moments(label, m))
        .collect())
}

/// What a suite row asserts about its mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expectation {
    /// |mean| ≤ 5 stderr.
    Zero,
    /// |mean − value| ≤ 5 stderr.
    Value(f64),
    /// |mean| > 5 stderr: the test must be able to see a bias.
    Nonzero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteRow {
    pub label: String,
    pub ensemble: String,
    pub expectation: Expectation,
    pub mean: f64,
    pub stderr: f64,
    pub z: f64,
    pub resampled: bool,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteTable {
    pub sample_count: usize,
    pub seed: u64,
    pub rows: Vec<SuiteRow>,
    pub passed: bool,
}

fn judge(e: &Expectation, r: &EstimateResult) -> (f64, bool) {
    match e {
        Expectation::Zero => {
            let z = r.z(0.0);
            (z, z <= SIGMA_LEVEL)
        }
        Expectation::Value(v) => {
            let z = r.z(*v);
            (z, z <= SIGMA_LEVEL)
        }
        Expectation::Nonzero => {
            let z = r.z(0.0);
            (z, z > SIGMA_LEVEL)
        }
    }
}

fn run_rows(name: &str, spec: &EnsembleSpec, rows: Vec<(String, Expr, Expectation)>) -> Result<Vec<SuiteRow>> {
    const BLOCKS_PER_TASK: usize = 8;
    let exprs: Vec<(String, Expr)> = rows.iter().map(|(l, e, _)| (l.clone(), e.clone())).collect();
    let first = estimate_streaming(&exprs, spec, BLOCKS_PER_TASK)?;
    let mut out: Vec<SuiteRow> = rows
        .iter()
        .zip(&first)
        .map(|((label, _, exp), r)| {
            let (z, passed) = judge(exp, r);
            SuiteRow {
                label: label.clone(),
                ensemble: name.into(),
                expectation: exp.clone(),
                mean: r.mean,
                stderr: r.stderr,
                z,
                resampled: false,
                passed,
            }
        })
        .collect();
    let failed: Vec<usize> = (0..out.len()).filter(|&i| !out[i].passed).collect();
    if !failed.is_empty() {
        let again = EnsembleSpec {
            seed: spec.resample_seed(),
            ..spec.clone()
        };
        let sub: Vec<(String, Expr)> = failed.iter().map(|&i| exprs[i].clone()).collect();
        let second = estimate_streaming(&sub, &again, BLOCKS_PER_TASK)?;
        for (&i, r) in failed.iter().zip(&second) {
            let (z, passed) = judge(&out[i].expectation, r);
            out[i] = SuiteRow {
                mean: r.mean,
                stderr: r.stderr,
                z,
                resampled: true,
                passed,
                ..out[i].clone()
            };
        }
    }
    Ok(out)
}

fn expr(s: &str) -> Expr {
    parse(s, &SymbolTable::moving_media()).unwrap_or_else(|e| panic!("built-in expression `{s}`: {e}"))
}

/// Off-diagonal stress components of a medium at rest,
/// `(1/(4*pi))(eps E_a E_b + mu H_a H_b)`.
pub fn rest_stress(a: char, b: char) -> Expr {
    expr(&format!(
        "(1/(4*pi))*(eps*comp(E,{a})*comp(E,{b}) + mu*comp(H,{a})*comp(H,{b}))"
    ))
}

/// Equilibrium averages that must vanish, a closed-form second moment,
/// and an anisotropic control that must not vanish.
pub fn zero_mean_suite(spec: &EnsembleSpec) -> Result<SuiteTable> {
    spec.validate()?;
    let a = spec.anisotropy;
    let w0_mean =
        (spec.eps * spec.variance_e + spec.mu * spec.variance_h) * (a[0] + a[1] + a[2]) / (8.0 * std::f64::consts::PI);
    let mut rows = vec![
        ("sigma0_xz".to_string(), expr(SIGMA0), Expectation::Zero),
        ("sigma1_xz".to_string(), expr(SIGMA1), Expectation::Zero),
    ];
    for (x, y) in [('x', 'y'), ('x', 'z'), ('y', 'z')] {
        rows.push((format!("sigma_{x}{y} at rest"), rest_stress(x, y), Expectation::Zero));
    }
    rows.push(("E_x H_y".into(), expr("comp(E,x)*comp(H,y)"), Expectation::Zero));
    rows.push(("E_x".into(), expr("comp(E,x)"), Expectation::Zero));
    rows.push(("w0".into(), expr(W0), Expectation::Value(w0_mean)));
    let mut table = run_rows("isotropic", spec, rows)?;

    let aniso = EnsembleSpec {
        anisotropy: [4.0, 1.0, 1.0],
        ..spec.clone()
    };
    let control = vec![
        ("sigma0_xz".to_string(), expr(SIGMA0), Expectation::Zero),
        (
            "E_x^2 - E_z^2".to_string(),
            expr("pow(comp(E,x),2) - pow(comp(E,z),2)"),
            Expectation::Nonzero,
        ),
        (
            "E_x^2 - E_z^2 value".to_string(),
            expr("pow(comp(E,x),2) - pow(comp(E,z),2)"),
            Expectation::Value(3.0 * spec.variance_e),
        ),
    ];
    table.extend(run_rows("anisotropic (4,1,1)", &aniso, control)?);
    let passed = table.iter().all(|r| r.passed);
    Ok(SuiteTable {
        sample_count: spec.sample_count,
        seed: spec.seed,
        rows: table,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64, n: usize) -> EnsembleSpec {
        EnsembleSpec {
            seed,
            sample_count: n,
            ..EnsembleSpec::default()
        }
    }

    #[test]
    fn same_seed_same_batch() {
        let a = sample_fields(&small(1, 4)).unwrap();
        let b = sample_fields(&small(1, 4)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample_fields(&small(2, 4)).unwrap());
    }

    #[test]
    fn batch_prefix_is_stable_in_length() {
        let a = sample_fields(&small(3, 5000)).unwrap();
        let b = sample_fields(&small(3, 9000)).unwrap();
        assert_eq!(a.samples[..], b.samples[..5000]);
    }

    #[test]
    fn invalid_specs_rejected() {
        for spec in [
            EnsembleSpec {
                variance_e: 0.0,
                ..small(0, 10)
            },
            EnsembleSpec {
                variance_h: -1.0,
                ..small(0, 10)
            },
            small(0, 1),
            EnsembleSpec {
                anisotropy: [1.0, 0.0, 1.0],
                ..small(0, 10)
            },
        ] {
            assert!(
                matches!(spec.validate(), Err(EnsembleError::InvalidSpec(_))),
                "{spec:?}"
            );
        }
    }

    #[test]
    fn moments_merge_matches_direct() {
        let xs = [1.0, 2.0, 4.0, 8.0, -3.0];
        let mut all = Moments::default();
        xs.iter().for_each(|x| all.push(*x));
        let mut a = Moments::default();
        let mut b = Moments::default();
        xs[..2].iter().for_each(|x| a.push(*x));
        xs[2..].iter().for_each(|x| b.push(*x));
        assert_eq!(a.merge(b), all);
        let mean = 12.0 / 5.0;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / 4.0;
        assert!((all.stderr() - (var / 5.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn vector_expression_rejected() {
        let batch = sample_fields(&small(0, 10)).unwrap();
        let m = Medium { eps: 1.0, mu: 1.0 };
        assert!(estimate_mean(&expr("E"), &batch, &m).is_err());
        assert!(estimate_mean(&expr("dot(D,E)"), &batch, &m).is_err());
    }
}
