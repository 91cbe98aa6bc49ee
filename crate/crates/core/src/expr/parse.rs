//! Recursive-descent parser for the plain expression format.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | primary
//! primary := INT | IDENT | IDENT '(' args ')' | '(' expr ')'
//! ```
//!
//! Functions are `dot(a,b)`, `cross(a,b)`, `comp(v, x|y|z)` and
//! `pow(e, n)` with an integer (possibly negative) exponent. `pi` and
//! `beta` are reserved. `p/q` between integer literals is an exact
//! rational; any other quotient is a product with a `pow(·,-1)` factor.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use thiserror::Error;

use super::{Axis, Expr, ExprError, Node, SymbolKind, SymbolTable, BETA, PI};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at offset {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown identifier `{name}` at offset {pos}")]
    UnknownIdentifier { pos: usize, name: String },
    #[error("kind mismatch at offset {pos}: {msg}")]
    KindMismatch { pos: usize, msg: String },
    #[error("division by zero at offset {pos}")]
    DivisionByZero { pos: usize },
}

impl ParseError {
    pub fn position(&self) -> usize {
        match self {
            ParseError::Syntax { pos, .. }
            | ParseError::UnknownIdentifier { pos, .. }
            | ParseError::KindMismatch { pos, .. }
            | ParseError::DivisionByZero { pos } => *pos,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
    Comma,
    End,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b',' => Tok::Comma,
            b'0'..=b'9' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                out.push((Tok::Int(text[start..i].parse().unwrap()), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(text[start..i].to_string()), start));
                continue;
            }
            _ => {
                let ch = text[i..].chars().next().unwrap();
                return Err(ParseError::Syntax {
                    pos: i,
                    msg: format!("unexpected character `{ch}`"),
                });
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    at: usize,
    table: &'a SymbolTable,
}

fn kind_err(pos: usize) -> impl Fn(ExprError) -> ParseError {
    move |e| match e {
        ExprError::DivisionByZero => ParseError::DivisionByZero { pos },
        other => ParseError::KindMismatch {
            pos,
            msg: other.to_string(),
        },
    }
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(ParseError::Syntax {
                pos: self.pos(),
                msg: format!("expected {what}"),
            })
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        let mut terms = vec![self.term()?];
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    terms.push(self.term()?);
                }
                Tok::Minus => {
                    self.bump();
                    let t = self.term()?;
                    terms.push(negate(t));
                }
                _ => break,
            }
        }
        Expr::sum(terms).map_err(kind_err(pos))
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        let mut factors = vec![self.unary()?];
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    factors.push(self.unary()?);
                }
                Tok::Slash => {
                    let (_, at) = self.bump();
                    let den = self.unary()?;
                    if let Some(r) = den.as_rational() {
                        if r.is_zero() {
                            return Err(ParseError::DivisionByZero { pos: at });
                        }
                        // integer literal over integer literal folds to a rational
                        let last = factors.last().and_then(|f| f.as_rational()).cloned();
                        if let (Some(num), true, true) = (last, den_is_literal(&den), factors.len() == 1) {
                            if num.is_integer() {
                                factors[0] = Expr::rational(num / r);
                                continue;
                            }
                        }
                    }
                    factors.push(Expr::pow(den, -1).map_err(kind_err(at))?);
                }
                _ => break,
            }
        }
        // `-a*b` reads as the product -1*a*b, not (-a)*b
        if factors.len() > 1 {
            if let Node::Product(lead) = factors[0].node() {
                if lead
                    .first()
                    .and_then(Expr::as_rational)
                    .is_some_and(|r| r.is_negative())
                {
                    let lead = lead.clone();
                    factors.splice(0..1, lead);
                }
            }
        }
        Expr::product(factors).map_err(kind_err(pos))
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(negate(self.unary()?));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let (tok, pos) = self.bump();
        match tok {
            Tok::Int(n) => Ok(Expr::rational(BigRational::from_integer(n))),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if *self.peek() == Tok::LParen {
                    self.call(&name, pos)
                } else {
                    self.identifier(&name, pos)
                }
            }
            Tok::End => Err(ParseError::Syntax {
                pos,
                msg: "unexpected end of input".into(),
            }),
            other => Err(ParseError::Syntax {
                pos,
                msg: format!("unexpected token {other:?}"),
            }),
        }
    }

    fn identifier(&self, name: &str, pos: usize) -> Result<Expr, ParseError> {
        if name == PI {
            return Ok(Expr::pi());
        }
        if name == BETA {
            return Ok(Expr::beta());
        }
        match self.table.lookup(name) {
            Some(SymbolKind::Scalar) => Ok(Expr::scalar(name)),
            Some(_) => Ok(Expr::vector(name)),
            None => Err(ParseError::UnknownIdentifier {
                pos,
                name: name.to_string(),
            }),
        }
    }

    fn call(&mut self, name: &str, pos: usize) -> Result<Expr, ParseError> {
        self.expect(Tok::LParen, "`(`")?;
        let out = match name {
            "dot" | "cross" => {
                let a = self.expr()?;
                self.expect(Tok::Comma, "`,`")?;
                let b = self.expr()?;
                if name == "dot" {
                    Expr::dot(a, b)
                } else {
                    Expr::cross(a, b)
                }
                .map_err(kind_err(pos))?
            }
            "comp" => {
                let v = self.expr()?;
                self.expect(Tok::Comma, "`,`")?;
                let (tok, at) = self.bump();
                let axis = match tok {
                    Tok::Ident(ref s) => Axis::from_name(s),
                    _ => None,
                }
                .ok_or(ParseError::Syntax {
                    pos: at,
                    msg: "expected axis x, y or z".into(),
                })?;
                Expr::component(v, axis).map_err(kind_err(pos))?
            }
            "pow" => {
                let base = self.expr()?;
                self.expect(Tok::Comma, "`,`")?;
                let negative = if *self.peek() == Tok::Minus {
                    self.bump();
                    true
                } else {
                    false
                };
                let (tok, at) = self.bump();
                let n = match tok {
                    Tok::Int(n) => i64::try_from(n).ok(),
                    _ => None,
                }
                .ok_or(ParseError::Syntax {
                    pos: at,
                    msg: "expected integer exponent".into(),
                })?;
                Expr::pow(base, if negative { -n } else { n }).map_err(kind_err(pos))?
            }
            _ => {
                return Err(ParseError::UnknownIdentifier {
                    pos,
                    name: name.to_string(),
                })
            }
        };
        self.expect(Tok::RParen, "`)`")?;
        Ok(out)
    }
}

fn den_is_literal(e: &Expr) -> bool {
    matches!(e.node(), Node::Rational(r) if r.is_integer())
}

fn negate(e: Expr) -> Expr {
    match e.node() {
        Node::Product(items) if items.first().and_then(|f| f.as_rational()).is_some() => {
            let mut items = items.clone();
            items[0] = Expr::rational(-items[0].as_rational().unwrap());
            Expr::product(items).expect("same factors")
        }
        _ => e.neg(),
    }
}

/// Parses `text` against the declared symbols of `table`.
pub fn parse(text: &str, table: &SymbolTable) -> Result<Expr, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
        table,
    };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(ParseError::Syntax {
            pos: p.pos(),
            msg: "trailing input".into(),
        });
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{canonicalize, render, Format};

    fn table() -> SymbolTable {
        SymbolTable::moving_media()
            .vector("a")
            .and_then(|t| t.vector("b"))
            .and_then(|t| t.vector("c"))
            .unwrap()
    }

    #[test]
    fn cross_of_vectors() {
        let e = parse("cross(v,H)", &table()).unwrap();
        match e.node() {
            Node::Cross(a, b) => {
                assert_eq!(a.node(), &Node::Vector("v".into()));
                assert_eq!(b.node(), &Node::Vector("H".into()));
            }
            other => panic!("got {other:?}"),
        }
    }

    #[test]
    fn triple_product_tree() {
        let e = parse("dot(E, cross(v, B))", &table()).unwrap();
        assert!(e.is_scalar());
        let Node::Dot(a, b) = e.node() else { panic!() };
        assert_eq!(a.node(), &Node::Vector("E".into()));
        assert!(matches!(b.node(), Node::Cross(..)));
    }

    #[test]
    fn energy_density_parses_and_prints_back() {
        let text = "(1/(8*pi))*(eps*dot(E,E) + mu*dot(H,H))";
        let e = parse(text, &table()).unwrap();
        assert_eq!(render(&e, Format::Plain), text);
        let Node::Product(f) = e.node() else { panic!() };
        assert_eq!(f.len(), 2);
        assert!(matches!(f[1].node(), Node::Sum(_)));
    }

    #[test]
    fn rational_literals_fold() {
        let e = parse("3/6", &table()).unwrap();
        assert_eq!(e, Expr::ratio(1, 2).unwrap());
        let e = parse("2/3*eps", &table()).unwrap();
        assert_eq!(canonicalize(&e).unwrap().to_string(), "(2/3)*eps");
    }

    #[test]
    fn errors_carry_positions() {
        let t = table();
        let err = parse("eps + * mu", &t).unwrap_err();
        assert!(matches!(err, ParseError::Syntax { pos: 6, .. }), "{err:?}");
        let err = parse("eps + velocity", &t).unwrap_err();
        assert_eq!(
            err,
            ParseError::UnknownIdentifier {
                pos: 6,
                name: "velocity".into()
            }
        );
        let err = parse("cross(eps, H)", &t).unwrap_err();
        assert!(matches!(err, ParseError::KindMismatch { pos: 0, .. }));
        assert!(matches!(parse("E + eps", &t), Err(ParseError::KindMismatch { .. })));
        assert!(matches!(
            parse("dot(E,H)*cross(E,H)*H", &t),
            Err(ParseError::KindMismatch { .. })
        ));
        assert!(matches!(parse("eps/0", &t), Err(ParseError::DivisionByZero { pos: 3 })));
        assert!(matches!(
            parse("comp(E, w)", &t),
            Err(ParseError::Syntax { pos: 8, .. })
        ));
        assert!(matches!(parse("eps)", &t), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("", &t), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("eps # 2", &t), Err(ParseError::Syntax { pos: 4, .. })));
    }

    #[test]
    fn pow_accepts_negative_exponents() {
        let e = parse("pow(eps, -2)*pow(eps,2)", &table()).unwrap();
        assert_eq!(canonicalize(&e).unwrap(), Expr::one());
    }
}
