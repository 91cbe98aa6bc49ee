//! Runs the derivation suite in-process and prints the report in every
//! output format.

use friction_workbench::cli::{render_report, run, OutputFormat, RunConfig, Suite};

fn main() {
    let config = RunConfig {
        seed: 3,
        ..RunConfig::default()
    };
    let report = run(Suite::Derive, &config);
    for format in [OutputFormat::Text, OutputFormat::Latex, OutputFormat::Json] {
        println!("---- {format:?}");
        print!("{}", render_report(&report, format));
    }
    println!("exit code {}", report.exit_code());
}
