use friction_workbench::derivation::*;
use friction_workbench::expr::{equal_mod_order, fold_fixed, substitute, truncate, Expr};

#[test]
fn back_substitution_vanishes_at_every_order() {
    for order in 0..=3 {
        let r = derive_report(order, &DeriveOptions::default()).unwrap();
        for name in [
            "back-substitution D",
            "back-substitution B",
            "constitutive D",
            "constitutive B",
        ] {
            let s = r.step(name).unwrap();
            assert_eq!(s.verdict, Verdict::Match, "order {order}: {s:#?}");
        }
        assert!(r.passed);
    }
}

#[test]
fn lower_orders_are_truncations_of_order_three() {
    let t = table();
    let full = solve_constitutive(3).unwrap();
    for k in 0..3 {
        let low = solve_constitutive(k).unwrap();
        assert!(
            equal_mod_order(&low.d_series, full.d_series.truncated(k), k, &t)
                .unwrap()
                .matches
        );
        assert!(
            equal_mod_order(&low.b_series, full.b_series.truncated(k), k, &t)
                .unwrap()
                .matches
        );
        assert!(low.iterations_used <= k + 2);
    }
}

#[test]
fn order_one_skips_cubic_structure() {
    let r = derive_report(1, &DeriveOptions::default()).unwrap();
    assert!(r.passed);
    let s = r.step("friction (sigma0,w1)").unwrap();
    assert_eq!(s.verdict.to_string(), "skipped (order<3)");
    assert_eq!(r.step("stress").unwrap().verdict, Verdict::Match);
}

#[test]
fn order_above_three_is_rejected() {
    assert!(matches!(solve_constitutive(4), Err(DerivationError::Order(4))));
}

#[test]
fn corrupted_targets_are_caught() {
    for name in ["constitutive D", "w", "stress", "friction (sigma0,w1)"] {
        let opts = DeriveOptions {
            corrupt_target: Some(name.into()),
        };
        let r = derive_report(3, &opts).unwrap();
        let s = r.step(name).unwrap();
        assert_eq!(s.verdict, Verdict::Mismatch, "{name}");
        assert!(!s.residual.is_empty());
        assert!(!r.passed);
    }
}

#[test]
fn parity_flips_only_odd_part() {
    let sol = solve_constitutive(3).unwrap();
    let s = stress_xz(&sol).unwrap();
    let t = table();
    assert!(s.odd_part.grades().iter().all(|k| k % 2 == 1));
    assert!(s.even_part.grades().iter().all(|k| k % 2 == 0));
    assert_eq!(s.odd_part.grades(), vec![1, 3]);
    assert_eq!(s.even_part.add(&s.odd_part).unwrap(), s.sigma_xz_series);
    let r = s.sigma_xz_series.reflect_beta();
    assert_eq!(r.odd_part(), s.odd_part.neg());
    assert_eq!(r.even_part(), s.even_part);
    let c3 = s.sigma_xz_series.coefficient(3);
    let expect =
        friction_workbench::expr::parse("eps*mu*(kappa/(4*pi))*(comp(E,x)*comp(H,y) - comp(E,y)*comp(H,x))", &t)
            .unwrap();
    assert!(equal_mod_order(&c3, &expect, 0, &t).unwrap().matches);
}

#[test]
fn energy_perturbation_vanishes_at_rest_and_in_vacuum() {
    let t = table();
    let sol = solve_constitutive(3).unwrap();
    let w = hamiltonian_density(&sol).unwrap();
    let bar = perturbation(&w).unwrap();
    assert!(bar.coefficient(0).is_zero_literal());
    let one = Expr::one();
    let vac = substitute(&substitute(&bar.to_expr(), "eps", &one).unwrap(), "mu", &one).unwrap();
    assert!(fold_fixed(&vac, &t).unwrap().is_zero_literal());
}

#[test]
fn friction_pairings_vanish_without_medium() {
    let sol = solve_constitutive(3).unwrap();
    let stress = stress_xz(&sol).unwrap();
    let w = hamiltonian_density(&sol).unwrap();
    let fs = friction_structure(&stress, &perturbation(&w).unwrap()).unwrap();
    // the parts carrying kappa vanish when eps = mu = 1
    let (w1, w2) = perturbation_split();
    let t = table();
    let one = Expr::one();
    for part in [w1, w2, stress.sigma1.clone()] {
        let e = substitute(&substitute(&t.expand(&part).unwrap(), "eps", &one).unwrap(), "mu", &one).unwrap();
        assert!(fold_fixed(&e, &t).unwrap().is_zero_literal(), "{part}");
    }
    let odd: Vec<_> = fs
        .pairings
        .iter()
        .filter(|p| p.is_friction())
        .map(|p| (p.sigma, p.w))
        .collect();
    assert_eq!(odd, vec![("sigma0", "w1"), ("sigma1", "w2")]);
    for p in &fs.pairings {
        assert!(p.prefactor.grades().iter().all(|k| *k <= 3));
    }
    let even = fs.pairing("sigma0", "w2");
    assert_eq!(
        even.prefactor,
        truncate(&Expr::beta().mul(&Expr::beta()).unwrap(), 3).unwrap()
    );
}

#[test]
fn numeric_residual_scales_as_fourth_power() {
    let c = numeric_cross_check(100, 11).unwrap();
    assert!((c.exponent - 4.0).abs() <= 0.3, "{c:?}");
    assert!(c.residuals.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn report_round_trips_through_json() {
    let r = derive_report(3, &DeriveOptions::default()).unwrap();
    let text = serde_json::to_string(&r).unwrap();
    let back: DerivationReport = serde_json::from_str(&text).unwrap();
    assert_eq!(back, r);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let keys: Vec<_> = v["steps"][0].as_object().unwrap().keys().cloned().collect();
    for k in ["name", "relation", "derived", "target", "verdict", "residual"] {
        assert!(keys.iter().any(|x| x == k), "{k}");
    }
}
