use friction_workbench::derivation::{SIGMA0, SIGMA1, W0};
use friction_workbench::ensemble::*;
use friction_workbench::expr::{canonicalize, parse, SymbolTable};

fn e(s: &str) -> friction_workbench::expr::Expr {
    parse(s, &SymbolTable::moving_media()).unwrap()
}

fn spec(seed: u64, n: usize) -> EnsembleSpec {
    EnsembleSpec {
        seed,
        sample_count: n,
        ..EnsembleSpec::default()
    }
}

#[test]
fn chunked_and_serial_estimates_are_identical() {
    let s = spec(5, 50_000);
    let batch = sample_fields(&s).unwrap();
    let medium = Medium { eps: s.eps, mu: s.mu };
    let exprs = vec![
        ("sigma0".to_string(), e(SIGMA0)),
        ("sigma1".to_string(), e(SIGMA1)),
        ("w0".to_string(), e(W0)),
    ];
    let serial: Vec<_> = exprs
        .iter()
        .map(|(l, x)| EstimateResult {
            label: l.clone(),
            ..estimate_mean(x, &batch, &medium).unwrap()
        })
        .collect();
    for per_task in [1, 3, 7, 100] {
        let streamed = estimate_streaming(&exprs, &s, per_task).unwrap();
        assert_eq!(streamed, serial, "blocks per task {per_task}");
    }
}

#[test]
fn w0_mean_matches_gaussian_second_moments() {
    let s2 = 2.0;
    let s = EnsembleSpec {
        variance_e: s2,
        variance_h: s2,
        eps: 1.0,
        mu: 1.0,
        ..spec(9, 200_000)
    };
    let batch = sample_fields(&s).unwrap();
    let r = estimate_mean(&e(W0), &batch, &Medium { eps: 1.0, mu: 1.0 }).unwrap();
    let expected = 6.0 * s2 / (8.0 * std::f64::consts::PI);
    assert!(r.z(expected) <= 5.0, "{r:?} vs {expected}");
    // direct summation over the batch
    let direct: f64 = (0..batch.len())
        .map(|i| {
            let (a, b) = (batch.e(i), batch.h(i));
            (a.iter().map(|x| x * x).sum::<f64>() + b.iter().map(|x| x * x).sum::<f64>()) / (8.0 * std::f64::consts::PI)
        })
        .sum::<f64>()
        / batch.len() as f64;
    assert!((direct - r.mean).abs() <= 1e-12 * direct.abs());
}

#[test]
fn component_mean_and_cross_covariance_vanish() {
    let s = spec(17, 1_000_000);
    let r = estimate_streaming(
        &[
            ("E_x".into(), e("comp(E,x)")),
            ("E_x H_y".into(), e("comp(E,x)*comp(H,y)")),
        ],
        &s,
        8,
    )
    .unwrap();
    assert!(r[0].mean.abs() <= 5.0 / 1000.0);
    assert!(r[1].z(0.0) <= 5.0);
}

#[test]
fn stderr_halves_when_samples_quadruple() {
    for seed in 0..5 {
        let x = [("w0".to_string(), e(W0))];
        let a = estimate_streaming(&x, &spec(seed, 25_000), 4).unwrap()[0].stderr;
        let b = estimate_streaming(&x, &spec(seed + 100, 100_000), 4).unwrap()[0].stderr;
        let ratio = a / b;
        assert!((ratio - 2.0).abs() <= 0.4, "seed {seed}: ratio {ratio}");
    }
}

#[test]
fn zero_mean_claims_hold_across_seeds() {
    let mut failures = 0;
    for seed in 0..20 {
        let t = zero_mean_suite(&spec(seed, 100_000)).unwrap();
        failures += t.rows.iter().filter(|r| !r.passed).count();
    }
    assert!(failures <= 1, "{failures} failures over 20 seeds");
}

#[test]
fn canonical_and_raw_expressions_agree() {
    let s = spec(21, 20_000);
    let batch = sample_fields(&s).unwrap();
    let medium = Medium { eps: 2.5, mu: 1.25 };
    for text in [
        SIGMA0,
        SIGMA1,
        W0,
        "dot(cross(E,H),cross(E,H)) + pow(dot(E,H),2)",
        "kappa*comp(cross(E, cross(H, E)), y)",
    ] {
        let raw = e(text);
        let canon = canonicalize(&raw).unwrap();
        let a = estimate_mean(&raw, &batch, &medium).unwrap();
        let b = estimate_mean(&canon, &batch, &medium).unwrap();
        let scale = a.mean.abs().max(a.stderr);
        assert!(
            (a.mean - b.mean).abs() <= 1e-10 * scale,
            "{text}: {} vs {}",
            a.mean,
            b.mean
        );
    }
}

#[test]
fn tiny_ensemble_still_runs() {
    let t = zero_mean_suite(&spec(4, 100)).unwrap();
    assert_eq!(t.rows.len(), 11);
    for r in &t.rows {
        if r.expectation == Expectation::Zero {
            assert!(r.passed, "{r:?}");
        }
        assert!(r.stderr > 0.0);
    }
}

#[test]
fn anisotropic_control_is_detected() {
    let t = zero_mean_suite(&spec(8, 1_000_000)).unwrap();
    assert!(t.passed, "{:#?}", t.rows);
    let c = t.rows.iter().find(|r| r.label == "E_x^2 - E_z^2").unwrap();
    assert!(c.z > 5.0);
    let v = t.rows.iter().find(|r| r.label == "E_x^2 - E_z^2 value").unwrap();
    assert!((v.mean - 3.0).abs() <= 5.0 * v.stderr);
}
