//! Equilibrium averages of stress components over a seeded Gaussian
//! ensemble, with an anisotropic control that must show a bias.

use friction_workbench::ensemble::{zero_mean_suite, EnsembleSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let samples = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(1_000_000);
    let spec = EnsembleSpec {
        sample_count: samples,
        seed: 2024,
        ..EnsembleSpec::default()
    };
    let started = std::time::Instant::now();
    let table = zero_mean_suite(&spec)?;
    for r in &table.rows {
        println!(
            "{:<5} {:<22} {:<20} mean {:+.3e} stderr {:.3e} z {:6.2}{}",
            if r.passed { "pass" } else { "FAIL" },
            r.label,
            r.ensemble,
            r.mean,
            r.stderr,
            r.z,
            if r.resampled { " (resampled)" } else { "" }
        );
    }
    println!("{} samples in {:.2?}", table.sample_count, started.elapsed());
    Ok(())
}
