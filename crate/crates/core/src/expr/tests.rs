use super::*;

fn t() -> SymbolTable {
    SymbolTable::moving_media()
        .vector("a")
        .and_then(|t| t.vector("b"))
        .and_then(|t| t.vector("c"))
        .unwrap()
}

fn p(s: &str) -> Expr {
    parse(s, &t()).unwrap_or_else(|e| panic!("{s}: {e}"))
}

fn canon(s: &str) -> String {
    canonicalize(&p(s)).unwrap().to_string()
}

#[test]
fn antisymmetry_and_bac_cab() {
    assert_eq!(canon("cross(E,E)"), "0");
    assert_eq!(canon("cross(a,b) + cross(b,a)"), "0");
    assert_eq!(canon("cross(a, cross(b,c)) - b*dot(a,c) + c*dot(a,b)"), "0");
    assert_eq!(canon("cross(cross(a,b), c) - b*dot(a,c) + a*dot(b,c)"), "0");
    assert_eq!(canon("dot(E,H) - dot(H,E)"), "0");
}

#[test]
fn triple_product_is_cyclic_and_antisymmetric() {
    assert_eq!(canon("dot(a,cross(b,c)) - dot(b,cross(c,a))"), "0");
    assert_eq!(canon("dot(a,cross(b,c)) + dot(b,cross(a,c))"), "0");
    assert_eq!(canon("dot(a,cross(a,c))"), "0");
    assert_eq!(canon("dot(cross(b,c),a)"), "dot(a,cross(b,c))");
}

#[test]
fn like_terms_collect_exactly() {
    assert_eq!(canon("(1/3)*eps + (2/3)*eps"), "eps");
    assert_eq!(canon("eps*E - E"), "-E + eps*E");
    assert_eq!(canon("pow(eps + mu, 2) - pow(eps,2) - 2*eps*mu - pow(mu,2)"), "0");
    assert_eq!(canon("pi/pi"), "1");
    assert_eq!(canon("(1/(8*pi))*8*pi"), "1");
}

#[test]
fn reciprocal_of_sum_stays_opaque_but_consistent() {
    let a = canonicalize(&p("1/(2*eps + 2*mu)")).unwrap();
    let b = canonicalize(&p("(1/2)/(eps + mu)")).unwrap();
    assert_eq!(a, b);
    assert_eq!(
        canon("(eps+mu)/(eps+mu)*pow(eps+mu,-1)*(eps+mu)"),
        canon("(eps+mu)/(eps+mu)")
    );
    assert!(canonicalize(&p("1/(eps - eps)")).is_err());
}

#[test]
fn canonicalize_is_idempotent_on_examples() {
    for s in [
        "cross(v, cross(v, E))*kappa + eps*E",
        "(1/(8*pi))*(eps*dot(E,E) + mu*dot(H,H))",
        "comp(cross(E,H), z)*pow(beta,3) - dot(cross(a,b),cross(c,E))",
        "1/(eps + mu*beta) + pow(eps,-2)",
    ] {
        let once = canonicalize(&p(s)).unwrap();
        let twice = canonicalize(&once).unwrap();
        assert_eq!(once, twice, "{s}");
    }
}

#[test]
fn component_expansion() {
    let table = t();
    let c = |s: &str| to_components(&p(s), &table).unwrap();
    assert_eq!(
        c("dot(E,H)"),
        canonicalize(&p("comp(E,x)*comp(H,x) + comp(E,y)*comp(H,y) + comp(E,z)*comp(H,z)")).unwrap()
    );
    assert_eq!(
        c("comp(cross(E,H), z)"),
        canonicalize(&p("comp(E,x)*comp(H,y) - comp(E,y)*comp(H,x)")).unwrap()
    );
    assert!(c("comp(cross(xhat,H), x)").is_zero_literal());
    assert_eq!(c("comp(cross(xhat,H), y)"), canonicalize(&p("-comp(H,z)")).unwrap());
    assert_eq!(c("dot(xhat,xhat)"), Expr::one());
    assert!(to_components(&p("E"), &table).is_err());
    let [x, y, z] = component_forms(&p("cross(xhat,H)"), &table).unwrap();
    assert!(x.is_zero_literal());
    assert_eq!(y.to_string(), "-comp(H,z)");
    assert_eq!(z.to_string(), "comp(H,y)");
}

#[test]
fn truncation_examples() {
    let s = truncate(&p("(1 + kappa*pow(beta,2))*(1 + eps*mu*pow(beta,2))"), 3).unwrap();
    assert_eq!(s.grades(), vec![0, 2]);
    assert_eq!(s.coefficient(0), Expr::one());
    assert_eq!(s.coefficient(2), canonicalize(&p("kappa + eps*mu")).unwrap());

    assert!(truncate(&p("pow(beta,4)*dot(E,E)"), 3).unwrap().is_zero());

    let s = truncate(&p("beta*kappa*comp(cross(xhat,H),y)"), 3).unwrap();
    assert_eq!(s.grades(), vec![1]);
    let c1 = to_components(&s.coefficient(1), &t()).unwrap();
    assert_eq!(c1, canonicalize(&p("-kappa*comp(H,z)")).unwrap());

    assert!(matches!(
        truncate(&p("1/(1 + beta)"), 3),
        Err(ExprError::NonPolynomialBeta(_))
    ));
    assert!(matches!(
        truncate(&p("pow(beta,-1)"), 3),
        Err(ExprError::NonPolynomialBeta(_))
    ));
}

#[test]
fn comparison_examples() {
    let table = t();
    assert!(
        equal_mod_order(p("dot(E,H)"), p("dot(H,E)"), 3, &table)
            .unwrap()
            .matches
    );
    let c = equal_mod_order(p("eps*E"), p("E"), 0, &table).unwrap();
    assert!(!c.matches);
    assert!(
        equal_mod_order(c.residual.clone(), p("(eps - 1)*E"), 0, &table)
            .unwrap()
            .matches
    );
    // differences beyond the order are ignored
    assert!(
        equal_mod_order(p("E + pow(beta,4)*H"), p("E"), 3, &table)
            .unwrap()
            .matches
    );
    assert!(
        !equal_mod_order(p("E + pow(beta,3)*H"), p("E"), 3, &table)
            .unwrap()
            .matches
    );
    // definitions are expanded before comparing
    assert!(equal_mod_order(p("kappa"), p("eps*mu - 1"), 0, &table).unwrap().matches);
    assert!(
        equal_mod_order(p("dot(v,v)"), p("pow(beta,2)"), 3, &table)
            .unwrap()
            .matches
    );
    assert!(equal_mod_order(p("E"), p("eps"), 0, &table).is_err());
}

#[test]
fn series_arithmetic() {
    let a = truncate(&p("1 + beta*eps + pow(beta,2)*mu"), 3).unwrap();
    let b = truncate(&p("1 - beta*eps"), 3).unwrap();
    let prod = a.mul(&b).unwrap();
    let direct = truncate(&p("(1 + beta*eps + pow(beta,2)*mu)*(1 - beta*eps)"), 3).unwrap();
    assert_eq!(prod, direct);
    assert_eq!(a.add(&b).unwrap(), truncate(&p("2 + pow(beta,2)*mu"), 3).unwrap());
    assert!(a.sub(&a).unwrap().is_zero());
    let r = a.reflect_beta();
    assert_eq!(r.coefficient(1), canonicalize(&p("-eps")).unwrap());
    assert_eq!(a.even_part().grades(), vec![0, 2]);
    assert_eq!(a.odd_part().grades(), vec![1]);
    assert_eq!(a.truncated(1).grades(), vec![0, 1]);
    let v = truncate(&p("E + beta*H"), 3).unwrap();
    assert!(v.mul(&v).is_err());
    assert_eq!(v.kind(), Kind::Vector);
    let to = v.to_expr();
    assert_eq!(truncate(&to, 3).unwrap(), v);
}

#[test]
fn numeric_evaluation() {
    let bind = Binding::new().vector("E", [1.0, 0.0, 0.0]).vector("H", [0.0, 1.0, 0.0]);
    assert_eq!(eval_numeric(&p("dot(E,H)"), &bind).unwrap(), Value::Scalar(0.0));
    assert_eq!(
        eval_numeric(&p("comp(cross(E,H), z)"), &bind).unwrap(),
        Value::Scalar(1.0)
    );
    assert_eq!(
        eval_numeric(&p("cross(E,H)"), &bind).unwrap(),
        Value::Vector([0.0, 0.0, 1.0])
    );
    assert!(matches!(
        eval_numeric(&p("eps*dot(E,H)"), &bind),
        Err(ExprError::Unbound(s)) if s == "eps"
    ));
    let e = p("(1/(8*pi))*(eps*dot(E,E) + mu*dot(H,H))");
    let bind = bind.scalar("eps", 2.0).scalar("mu", 3.0);
    let x = eval_numeric(&e, &bind).unwrap().scalar().unwrap();
    assert!((x - 5.0 / (8.0 * std::f64::consts::PI)).abs() < 1e-15);
    let c = CompiledExpr::compile(&e, &["eps", "mu"], &["E", "H"]).unwrap();
    assert_eq!(c.eval_scalar(&[2.0, 3.0], &[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]), x);
}

#[test]
fn rendering() {
    let w0 = p("(1/(8*pi))*(eps*dot(E,E) + mu*dot(H,H))");
    assert_eq!(render(&w0, Format::Plain), "(1/(8*pi))*(eps*dot(E,E) + mu*dot(H,H))");
    assert_eq!(
        render(&w0, Format::Latex),
        "\\frac{1}{8\\pi}\\left(\\varepsilon \\mathbf{E}^2 + \\mu \\mathbf{H}^2\\right)"
    );
    assert_eq!(render(&Expr::integer(0), Format::Plain), "0");
    assert_eq!(render(&Expr::integer(0), Format::Latex), "0");
    assert_eq!(
        render(&p("comp(cross(v,H),x)"), Format::Latex),
        "\\left(\\mathbf{v}\\times\\mathbf{H}\\right)_x"
    );
    assert_eq!(render(&p("pow(comp(E,y),2)"), Format::Latex), "E_y^2");
    assert_eq!(canon("eps - mu - (1/2)*beta"), "-(1/2)*beta + eps - mu");
}

#[test]
fn plain_round_trip_of_canonical_forms() {
    for s in [
        "-(1/2)*beta + eps - mu",
        "cross(v, cross(v, E))*kappa - eps*E/(4*pi)",
        "1/(eps + mu*beta) - pow(eps,-2)*comp(cross(a,b),y)",
        "-(eps - mu)*(2/3)",
        "-1/pi",
        "D/pow(eps + mu,2)",
        "eps*dot(E,E)/(mu*(eps + mu))",
        "1/pow(pow(eps + 1,2),-1)",
    ] {
        let c = canonicalize(&p(s)).unwrap();
        let back = parse(&render(&c, Format::Plain), &t()).unwrap();
        assert_eq!(canonicalize(&back).unwrap(), c, "{s} -> {c}");
    }
}

#[test]
fn negative_powers_of_sums_keep_their_base() {
    assert_eq!(canon("D/pow(eps + mu,2)"), "pow(eps + mu,-2)*D");
    assert_eq!(canon("1/(mu*(eps + mu)) - 1/mu/(eps + mu)"), "0");
}
