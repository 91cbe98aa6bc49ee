//! Parsing, canonical rewriting, β-truncation and rendering of vector
//! expressions.

use friction_workbench::expr::{canonicalize, equal_mod_order, parse, render, truncate, Format, SymbolTable};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let t = SymbolTable::moving_media().vector("a")?.vector("b")?.vector("c")?;

    for text in [
        "cross(a, cross(b, c))",
        "cross(a, b) + cross(b, a)",
        "dot(a, cross(b, c)) - dot(c, cross(a, b))",
        "(1/(8*pi))*(eps*dot(E,E) + mu*dot(H,H))",
        "eps*E/(eps + mu) + mu*E/(eps + mu)",
    ] {
        let e = parse(text, &t)?;
        let c = canonicalize(&e)?;
        println!(
            "{text}\n    plain: {}\n    latex: {}",
            render(&c, Format::Plain),
            render(&c, Format::Latex)
        );
    }

    // the product is (1 - beta^8) kappa E, so nothing below beta^8 survives
    let e = parse(
        "(1 + pow(beta,2) + pow(beta,4) + pow(beta,6))*(1 - pow(beta,2))*kappa*E",
        &t,
    )?;
    let series = truncate(&t.expand(&e)?, 8)?;
    for (k, c) in series.coefficients() {
        println!("beta^{k}: {c}");
    }
    let same = equal_mod_order(&e, &parse("kappa*E", &t)?, 7, &t)?;
    println!("equal to kappa*E through beta^7: {}", same.matches);
    println!(
        "residual at beta^8: {}",
        equal_mod_order(&e, &parse("kappa*E", &t)?, 8, &t)?.residual
    );
    Ok(())
}
