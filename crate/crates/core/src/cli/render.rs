use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use super::{KuboCheck, OutputFormat, RunReport};
use crate::derivation::{self, Step};
use crate::expr::{self, Format};

pub fn render_report(report: &RunReport, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
        OutputFormat::Text => text(report),
        OutputFormat::Latex => latex(report),
    }
}

/// Writes `contents` to a sibling temp file and renames it over `path`.
pub fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "output path has no file name"))?;
    let tmp = dir.join(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

/// Shortest round-trip form, in exponent notation outside [1e-3, 1e7).
fn num(x: f64) -> String {
    if x == 0.0 || (1e-3..1e7).contains(&x.abs()) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

fn value(c: &KuboCheck) -> String {
    c.value.map_or_else(|| "n/a".into(), num)
}

fn text(r: &RunReport) -> String {
    let mut o = String::new();
    let w = &mut o;
    let _ = writeln!(w, "friction-workbench {}", r.version);
    let c = &r.config;
    let _ = writeln!(
        w,
        "config: order {} seed {} samples {}",
        c.order, c.seed, c.ensemble.samples
    );

    if let Some(d) = &r.derivation {
        let _ = writeln!(w, "\n== derivation: {}", d.verdict);
        if let Some(e) = &d.error {
            let _ = writeln!(w, "error: {e}");
        }
        if let Some(rep) = &d.report {
            let _ = writeln!(w, "order {}", rep.order);
            for s in &rep.steps {
                let _ = writeln!(w, "[{}] {} ({})", s.verdict, s.name, s.relation);
                let _ = writeln!(w, "    derived: {}", s.derived);
                let _ = writeln!(w, "    target:  {}", s.target);
                if !s.residual.is_empty() {
                    let _ = writeln!(w, "    residual: {}", s.residual);
                }
            }
        }
        if let Some(x) = &d.cross_check {
            let _ = writeln!(
                w,
                "numeric cross-check ({} bindings, seed {}): {}",
                x.result.samples,
                x.seed,
                if x.passed { "pass" } else { "fail" }
            );
            for (b, res) in x.result.betas.iter().zip(&x.result.residuals) {
                let _ = writeln!(w, "    beta {}: residual {}", num(*b), num(*res));
            }
            let _ = writeln!(w, "    fitted exponent {}", num(x.result.exponent));
        }
    }

    if let Some(e) = &r.ensemble {
        let _ = writeln!(w, "\n== ensemble: {}", e.verdict);
        let _ = writeln!(w, "suite seed {}", e.seed);
        if let Some(err) = &e.error {
            let _ = writeln!(w, "error: {err}");
        }
        if let Some(t) = &e.table {
            let _ = writeln!(w, "samples {}", t.sample_count);
            for row in &t.rows {
                let _ = writeln!(
                    w,
                    "[{}] {} / {}: mean {} stderr {} z {} expect {:?}{}",
                    if row.passed { "pass" } else { "fail" },
                    row.ensemble,
                    row.label,
                    num(row.mean),
                    num(row.stderr),
                    num(row.z),
                    row.expectation,
                    if row.resampled { " (resampled)" } else { "" }
                );
            }
        }
    }

    if let Some(k) = &r.kubo {
        let _ = writeln!(w, "\n== kubo: {}", k.verdict);
        for x in &k.experiments {
            let _ = writeln!(
                w,
                "{:?} d={} {:?}{}: {}",
                x.system,
                x.dim,
                x.temperature,
                if x.ground_degenerate {
                    " (degenerate ground state)"
                } else {
                    ""
                },
                x.verdict
            );
            if let Some(e) = &x.error {
                let _ = writeln!(w, "    error: {e}");
            }
            for c in &x.checks {
                let note = if c.note.is_empty() {
                    String::new()
                } else {
                    format!(" ({})", c.note)
                };
                let _ = writeln!(w, "    [{}] {}: {} {}{}", c.verdict, c.name, value(c), c.bound, note);
            }
            if let Some(s) = &x.sweep {
                for row in &s.rows {
                    let _ = writeln!(
                        w,
                        "    lambda {}: kubo {} exact {} error {}",
                        num(row.lambda),
                        num(row.predicted),
                        num(row.exact),
                        num(row.error)
                    );
                }
            }
        }
    }
    let _ = writeln!(w, "\nverdict: {}", r.verdict);
    o
}

fn esc(s: &str) -> String {
    let mut o = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '_' | '&' | '%' | '$' | '#' | '{' | '}' => {
                o.push('\\');
                o.push(ch);
            }
            '^' => o.push_str("\\^{}"),
            '~' => o.push_str("\\~{}"),
            '\\' => o.push_str("\\textbackslash{}"),
            _ => o.push(ch),
        }
    }
    o
}

fn tex_expr(s: &str) -> String {
    match expr::parse(s, &derivation::table()) {
        Ok(e) => expr::render(&e, Format::Latex),
        Err(_) => format!("\\texttt{{{}}}", esc(s)),
    }
}

const DISPLAYED: &[(&str, &str)] = &[
    ("constitutive D", "\\mathbf{D}"),
    ("constitutive B", "\\mathbf{B}"),
    ("w", "w"),
    ("w split", "w - w_0"),
    ("stress", "\\sigma_{xz}"),
    ("friction (sigma0,w1)", "c_{(\\sigma^{(0)},\\, w_1)}"),
    ("friction (sigma1,w2)", "c_{(\\sigma^{(1)},\\, w_2)}"),
];

fn equation(w: &mut String, lhs: &str, s: &Step) {
    let _ = writeln!(w, "% {}: {}", s.name, s.verdict);
    let _ = writeln!(w, "\\begin{{equation*}}");
    let _ = writeln!(w, "  {lhs} = {}", tex_expr(&s.derived));
    let _ = writeln!(w, "  \\qquad \\text{{[{}]}}", esc(&s.verdict.to_string()));
    let _ = writeln!(w, "\\end{{equation*}}");
}

fn latex(r: &RunReport) -> String {
    let mut o = String::new();
    let w = &mut o;
    let _ = writeln!(w, "% friction-workbench {}", r.version);
    if let Some(d) = &r.derivation {
        let _ = writeln!(w, "\\section*{{Derivation: {}}}", d.verdict);
        if let Some(e) = &d.error {
            let _ = writeln!(w, "Error: \\texttt{{{}}}\n", esc(e));
        }
        if let Some(rep) = &d.report {
            for (name, lhs) in DISPLAYED {
                if let Some(s) = rep.step(name) {
                    equation(w, lhs, s);
                }
            }
            let _ = writeln!(w, "\\begin{{itemize}}");
            for s in &rep.steps {
                let _ = writeln!(w, "  \\item {}: {}", esc(&s.name), esc(&s.verdict.to_string()));
            }
            let _ = writeln!(w, "\\end{{itemize}}");
            if let Some(s) = rep.step("scaling channels") {
                let _ = writeln!(
                    w,
                    "Scaling channels: \\texttt{{{}}} [{}]\n",
                    esc(&s.derived),
                    esc(&s.verdict.to_string())
                );
            }
        }
        if let Some(x) = &d.cross_check {
            let _ = writeln!(
                w,
                "Numeric cross-check: fitted exponent ${}$ [{}]\n",
                num(x.result.exponent),
                if x.passed { "pass" } else { "fail" }
            );
        }
    }
    if let Some(e) = &r.ensemble {
        let _ = writeln!(w, "\\section*{{Ensemble: {}}}", e.verdict);
        if let Some(t) = &e.table {
            let _ = writeln!(w, "\\begin{{tabular}}{{llrrrl}}");
            let _ = writeln!(w, "ensemble & quantity & mean & stderr & $z$ & verdict \\\\");
            for row in &t.rows {
                let _ = writeln!(
                    w,
                    "{} & {} & ${}$ & ${}$ & ${}$ & {} \\\\",
                    esc(&row.ensemble),
                    esc(&row.label),
                    num(row.mean),
                    num(row.stderr),
                    num(row.z),
                    if row.passed { "pass" } else { "fail" }
                );
            }
            let _ = writeln!(w, "\\end{{tabular}}");
        }
    }
    if let Some(k) = &r.kubo {
        let _ = writeln!(w, "\\section*{{Linear response: {}}}", k.verdict);
        let _ = writeln!(w, "\\begin{{tabular}}{{llrll}}");
        let _ = writeln!(w, "system & check & value & bound & verdict \\\\");
        for x in &k.experiments {
            for c in &x.checks {
                let _ = writeln!(
                    w,
                    "{} & {} & ${}$ & {} & {} \\\\",
                    esc(&format!("{:?} d={} {:?}", x.system, x.dim, x.temperature)),
                    esc(&c.name),
                    value(c),
                    esc(&c.bound.to_string()),
                    c.verdict
                );
            }
        }
        let _ = writeln!(w, "\\end{{tabular}}");
    }
    let _ = writeln!(w, "\n% verdict: {}", r.verdict);
    o
}
