mod common;

use common::{binding, components, expression, scalar, tree, vector};
use friction_workbench::expr::{self, canonicalize, eval_numeric, parse, render, truncate, Format, SymbolTable};
use proptest::prelude::*;

fn table() -> SymbolTable {
    SymbolTable::moving_media()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn canonical_form_evaluates_like_the_raw_tree(e in expression(), b in binding()) {
        let c = canonicalize(&e).unwrap();
        let raw = components(eval_numeric(&e, &b).unwrap());
        let canon = components(eval_numeric(&c, &b).unwrap());
        let canon = if canon.len() < raw.len() { vec![canon[0]; raw.len()] } else { canon };
        for (x, y) in raw.iter().zip(&canon) {
            prop_assert!((x - y).abs() <= 1e-10 * (1.0 + x.abs()), "{e} -> {c}: {x} vs {y}");
        }
    }

    #[test]
    fn canonicalize_is_idempotent(e in expression()) {
        let c = canonicalize(&e).unwrap();
        prop_assert_eq!(canonicalize(&c).unwrap(), c);
    }

    #[test]
    fn canonical_forms_survive_a_plain_round_trip(e in expression()) {
        let c = canonicalize(&e).unwrap();
        let back = parse(&render(&c, Format::Plain), &table()).unwrap();
        prop_assert_eq!(canonicalize(&back).unwrap(), c);
        let raw = parse(&render(&e, Format::Plain), &table()).unwrap();
        prop_assert_eq!(canonicalize(&raw).unwrap(), canonicalize(&e).unwrap());
    }

    #[test]
    fn truncation_is_a_ring_homomorphism(ta in tree(), tb in tree(), n in 0u32..5) {
        let (a, b) = (scalar(&ta), scalar(&tb));
        let (sa, sb) = (truncate(&a, n).unwrap(), truncate(&b, n).unwrap());
        prop_assert_eq!(truncate(&a.add(&b).unwrap(), n).unwrap(), sa.add(&sb).unwrap());
        prop_assert_eq!(truncate(&a.mul(&b).unwrap(), n).unwrap(), sa.mul(&sb).unwrap());
        let (va, vb) = (vector(&ta), vector(&tb));
        prop_assert_eq!(
            truncate(&va.sub(&vb).unwrap(), n).unwrap(),
            truncate(&va, n).unwrap().sub(&truncate(&vb, n).unwrap()).unwrap()
        );
    }

    #[test]
    fn deep_truncation_loses_nothing(t in tree(), v in any::<bool>()) {
        let e = if v { vector(&t) } else { scalar(&t) };
        let s = truncate(&e, 64).unwrap();
        prop_assert_eq!(canonicalize(&s.to_expr()).unwrap(), canonicalize(&e).unwrap());
        prop_assert!(expr::is_identically_zero(&e.sub(&s.to_expr()).unwrap()).unwrap());
    }
}
