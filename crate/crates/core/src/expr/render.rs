//! Plain and LaTeX serialization. Plain output re-parses to an expression
//! with the same canonical form.

use num_rational::BigRational;
use num_traits::{One, Signed};

use super::{Expr, Node};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Plain,
    Latex,
}

pub fn render(e: &Expr, format: Format) -> String {
    match format {
        Format::Plain => plain(e),
        Format::Latex => latex(e),
    }
}

/// A product split into sign, numerator factors and denominator factors
/// (the latter as positive powers).
struct Split {
    negative: bool,
    num: Vec<Expr>,
    den: Vec<Expr>,
}

/// With `exact_powers`, `pow(sum,-k)` for k > 1 stays in the numerator:
/// `1/pow(sum,k)` would re-parse as the reciprocal of the expanded power.
fn split_product(items: &[Expr], exact_powers: bool) -> Split {
    let mut negative = false;
    let mut num = Vec::new();
    let mut den = Vec::new();
    for (i, f) in items.iter().enumerate() {
        match f.node() {
            Node::Rational(r) if i == 0 && r.is_negative() => {
                negative = true;
                let a = -r;
                if !a.is_one() {
                    num.push(Expr::rational(a));
                }
            }
            _ if exact_powers && kept_power(f) => num.push(f.clone()),
            Node::Pow(b, n) if *n < 0 => {
                if *n == -1 {
                    den.push(b.clone());
                } else {
                    den.push(Expr::pow(b.clone(), -n).expect("scalar base"));
                }
            }
            _ => num.push(f.clone()),
        }
    }
    Split { negative, num, den }
}

/// True if the rendering of `e` starts with a minus sign that can be
/// pulled out as a binary minus in a sum.
fn negative_term(e: &Expr) -> Option<Expr> {
    match e.node() {
        Node::Rational(r) if r.is_negative() => Some(Expr::rational(-r)),
        Node::Product(items) => match items.first().map(|f| f.node()) {
            Some(Node::Rational(r)) if r.is_negative() => {
                let mut rest = items.clone();
                let a = -r;
                if a.is_one() {
                    rest.remove(0);
                } else {
                    rest[0] = Expr::rational(a);
                }
                Some(Expr::product(rest).expect("same factors"))
            }
            _ => None,
        },
        _ => None,
    }
}

fn plain_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn plain(e: &Expr) -> String {
    match e.node() {
        Node::Rational(r) => plain_rational(r),
        Node::Pi => "pi".into(),
        Node::Scalar(s) | Node::Vector(s) => s.clone(),
        Node::Sum(items) => {
            let mut out = String::new();
            for (i, t) in items.iter().enumerate() {
                match (i, negative_term(t)) {
                    (0, _) => out.push_str(&plain(t)),
                    (_, Some(abs)) => {
                        out.push_str(" - ");
                        out.push_str(&plain_factor_in_sum(&abs));
                    }
                    (_, None) => {
                        out.push_str(" + ");
                        out.push_str(&plain(t));
                    }
                }
            }
            out
        }
        Node::Product(items) => plain_product(items),
        Node::Pow(_, n) if *n < 0 && !kept_power(e) => plain_product(std::slice::from_ref(e)),
        Node::Pow(b, n) => format!("pow({},{})", plain(b), n),
        Node::Dot(a, b) => format!("dot({},{})", plain(a), plain(b)),
        Node::Cross(a, b) => format!("cross({},{})", plain(a), plain(b)),
        Node::Component(v, ax) => format!("comp({},{})", plain(v), ax.name()),
    }
}

/// After a binary minus, a sum would need parentheses.
fn plain_factor_in_sum(e: &Expr) -> String {
    match e.node() {
        Node::Sum(_) => format!("({})", plain(e)),
        _ => plain(e),
    }
}

fn kept_power(e: &Expr) -> bool {
    matches!(e.node(), Node::Pow(b, n) if *n < -1 && matches!(b.node(), Node::Sum(_)))
}

fn plain_factor(e: &Expr) -> String {
    match e.node() {
        Node::Sum(_) | Node::Product(_) => format!("({})", plain(e)),
        Node::Rational(r) if !r.is_integer() || r.is_negative() => format!("({})", plain(e)),
        Node::Pow(_, n) if *n < 0 && !kept_power(e) => format!("({})", plain(e)),
        _ => plain(e),
    }
}

fn plain_product(items: &[Expr]) -> String {
    let s = split_product(items, true);
    let mut out = String::new();
    if s.negative {
        out.push('-');
    }
    let num: Vec<String> = s.num.iter().map(plain_factor).collect();
    if num.is_empty() {
        out.push('1');
    } else if num.len() == 1 && s.den.is_empty() && !s.negative {
        // a lone factor still needs its parentheses only inside products
        out.push_str(&num[0]);
    } else {
        out.push_str(&num.join("*"));
    }
    match s.den.len() {
        0 => {}
        1 => {
            out.push('/');
            out.push_str(&plain_factor(&s.den[0]));
        }
        _ => {
            let den: Vec<String> = s.den.iter().map(plain_factor).collect();
            out.push_str(&format!("/({})", den.join("*")));
        }
    }
    out
}

fn latex_name(name: &str) -> String {
    const GREEK: &[(&str, &str)] = &[
        ("eps", "\\varepsilon"),
        ("epsilon", "\\varepsilon"),
        ("mu", "\\mu"),
        ("kappa", "\\kappa"),
        ("beta", "\\beta"),
        ("alpha", "\\alpha"),
        ("gamma", "\\gamma"),
        ("lambda", "\\lambda"),
        ("omega", "\\omega"),
        ("sigma", "\\sigma"),
        ("theta", "\\theta"),
    ];
    GREEK
        .iter()
        .find(|(k, _)| *k == name)
        .map(|(_, v)| v.to_string())
        .unwrap_or_else(|| name.to_string())
}

fn latex_vector(name: &str) -> String {
    match name {
        "xhat" => "\\hat{\\mathbf{x}}".into(),
        _ => format!("\\mathbf{{{name}}}"),
    }
}

fn latex_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else if r.is_negative() {
        format!("-\\frac{{{}}}{{{}}}", -r.numer(), r.denom())
    } else {
        format!("\\frac{{{}}}{{{}}}", r.numer(), r.denom())
    }
}

fn latex(e: &Expr) -> String {
    match e.node() {
        Node::Rational(r) => latex_rational(r),
        Node::Pi => "\\pi".into(),
        Node::Scalar(s) => latex_name(s),
        Node::Vector(s) => latex_vector(s),
        Node::Sum(items) => {
            let mut out = String::new();
            for (i, t) in items.iter().enumerate() {
                match (i, negative_term(t)) {
                    (0, _) => out.push_str(&latex(t)),
                    (_, Some(abs)) => {
                        out.push_str(" - ");
                        out.push_str(&latex_grouped_sum(&abs));
                    }
                    (_, None) => {
                        out.push_str(" + ");
                        out.push_str(&latex(t));
                    }
                }
            }
            out
        }
        Node::Product(items) => latex_product(items),
        Node::Pow(_, n) if *n < 0 => latex_product(std::slice::from_ref(e)),
        Node::Pow(b, n) => format!("{}^{}", latex_base(b), latex_exponent(*n)),
        Node::Dot(a, b) if a == b => format!("{}^2", latex_operand(a)),
        Node::Dot(a, b) => format!("{}\\cdot{}", latex_operand(a), latex_operand(b)),
        Node::Cross(a, b) => format!("{}\\times{}", latex_operand(a), latex_operand(b)),
        Node::Component(v, ax) => match v.node() {
            Node::Vector(s) => format!("{}_{}", s, ax.name()),
            _ => format!("\\left({}\\right)_{}", latex(v), ax.name()),
        },
    }
}

fn latex_exponent(n: i64) -> String {
    if (0..10).contains(&n) {
        n.to_string()
    } else {
        format!("{{{n}}}")
    }
}

fn latex_grouped_sum(e: &Expr) -> String {
    match e.node() {
        Node::Sum(_) => format!("\\left({}\\right)", latex(e)),
        _ => latex(e),
    }
}

fn latex_operand(e: &Expr) -> String {
    match e.node() {
        Node::Vector(_) => latex(e),
        _ => format!("\\left({}\\right)", latex(e)),
    }
}

fn latex_base(e: &Expr) -> String {
    match e.node() {
        Node::Scalar(_) | Node::Pi | Node::Component(..) => latex(e),
        Node::Rational(r) if r.is_integer() && !r.is_negative() => latex(e),
        _ => format!("\\left({}\\right)", latex(e)),
    }
}

fn latex_factor(e: &Expr) -> String {
    match e.node() {
        Node::Sum(_) => format!("\\left({}\\right)", latex(e)),
        Node::Rational(r) if r.is_negative() => format!("\\left({}\\right)", latex(e)),
        _ => latex(e),
    }
}

fn join_factors(parts: &[(String, bool)]) -> String {
    let mut out = String::new();
    let mut prev_numeric = false;
    for (i, (s, numeric)) in parts.iter().enumerate() {
        if i > 0 {
            if prev_numeric && *numeric {
                out.push_str("\\cdot ");
            } else if !prev_numeric && !s.starts_with("\\left(") {
                out.push(' ');
            }
        }
        out.push_str(s);
        prev_numeric = *numeric;
    }
    out
}

fn latex_product(items: &[Expr]) -> String {
    let s = split_product(items, false);
    let parts = |v: &[Expr]| -> Vec<(String, bool)> {
        v.iter()
            .map(|f| {
                let numeric = matches!(f.node(), Node::Rational(r) if r.is_integer());
                (latex_factor(f), numeric)
            })
            .collect()
    };
    let mut out = String::new();
    if s.negative {
        out.push('-');
    }
    // a fractional coefficient goes in front: \frac{1}{4\pi} E_x H_y
    if let Some(Node::Rational(r)) = s.num.first().map(|f| f.node()) {
        if !r.is_integer() {
            let mut den = vec![Expr::rational(BigRational::from_integer(r.denom().clone()))];
            den.extend(s.den.iter().cloned());
            let rest = &s.num[1..];
            out.push_str(&format!("\\frac{{{}}}{{{}}}", r.numer(), join_factors(&parts(&den))));
            if !rest.is_empty() {
                out.push(' ');
                out.push_str(&join_factors(&parts(rest)));
            }
            return out;
        }
    }
    if s.den.is_empty() {
        out.push_str(&join_factors(&parts(&s.num)));
    } else {
        // a lone factor inside \frac needs no parentheses
        let group = |v: &[Expr]| match v {
            [] => "1".to_string(),
            [f] => latex(f),
            _ => join_factors(&parts(v)),
        };
        let (numer, denom) = (group(&s.num), group(&s.den));
        out.push_str(&format!("\\frac{{{numer}}}{{{denom}}}"));
    }
    out
}
