//! Re-derives the moving-media chain through (v/c)^3 and prints every step.

use friction_workbench::derivation::{derive_report, numeric_cross_check, DeriveOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let report = derive_report(3, &DeriveOptions::default())?;
    for s in &report.steps {
        println!("[{}] {} ({})", s.verdict, s.name, s.relation);
        println!("    derived: {}", s.derived);
        println!("    target:  {}", s.target);
        if !s.residual.is_empty() {
            println!("    residual: {}", s.residual);
        }
    }
    let check = numeric_cross_check(100, 7)?;
    println!(
        "exact-solve residuals {:?} at beta {:?}: exponent {:.3}",
        check.residuals, check.betas, check.exponent
    );
    println!("overall: {}", if report.passed { "pass" } else { "fail" });
    Ok(())
}
