//! Symbolic engine for 3-vector field algebra.
//!
//! An [`Expr`] is an immutable, kind-checked tree over exact rationals,
//! the constant π, named scalar and vector symbols, sums, products, integer
//! powers, `dot`, `cross` and Cartesian components. Every constructor checks
//! kinds, so a value of type `Expr` is always well-kinded.
//!
//! The small parameter β (velocity in units of c) is the reserved scalar
//! `beta`; [`GradedSeries`] organizes expressions by powers of it.

mod components;
mod eval;
mod normal;
mod parse;
mod render;
mod series;
mod symbols;

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

pub use components::{component_forms, fold_fixed, substitute, to_components};
pub use eval::{eval_numeric, Binding, CompiledExpr, Value};
pub use parse::{parse, ParseError};
pub use render::{render, Format};
pub use series::{equal_mod_order, truncate, Comparison, GradedSeries, Operand};
pub use symbols::{SymbolKind, SymbolTable};

/// Reserved name of the formal small parameter β = v/c.
pub const BETA: &str = "beta";
/// Reserved name of the constant π.
pub const PI: &str = "pi";

pub type Result<T, E = ExprError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("kind mismatch: {0}")]
    KindMismatch(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("unbound symbol `{0}`")]
    Unbound(String),
    #[error("beta appears outside a polynomial factor: {0}")]
    NonPolynomialBeta(String),
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("symbol `{0}` declared twice with conflicting kinds")]
    ConflictingDeclaration(String),
}

/// Whether an expression denotes a scalar or a 3-vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    Scalar,
    Vector,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }

    pub fn from_name(s: &str) -> Option<Axis> {
        match s {
            "x" => Some(Axis::X),
            "y" => Some(Axis::Y),
            "z" => Some(Axis::Z),
            _ => None,
        }
    }

    /// The two axes following `self` cyclically, so that
    /// `(a×b)_self = a_j b_k − a_k b_j`.
    pub(crate) fn cyclic_rest(self) -> (Axis, Axis) {
        match self {
            Axis::X => (Axis::Y, Axis::Z),
            Axis::Y => (Axis::Z, Axis::X),
            Axis::Z => (Axis::X, Axis::Y),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Node {
    Rational(BigRational),
    Pi,
    Scalar(String),
    Vector(String),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Pow(Expr, i64),
    Dot(Expr, Expr),
    Cross(Expr, Expr),
    Component(Expr, Axis),
}

/// Immutable, well-kinded expression tree.
///
/// Equality is structural on the tree. The rational zero is accepted
/// wherever a vector is expected, so the zero vector is the node `0` with
/// vector kind.
#[derive(Clone)]
pub struct Expr {
    node: Arc<Node>,
    kind: Kind,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.node, &other.node) || self.node == other.node
    }
}

impl Eq for Expr {}

impl std::hash::Hash for Expr {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.node.hash(state);
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({})", render(self, Format::Plain))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self, Format::Plain))
    }
}

fn is_zero_literal(e: &Expr) -> bool {
    matches!(e.node(), Node::Rational(r) if r.is_zero())
}

impl Expr {
    fn raw(node: Node, kind: Kind) -> Expr {
        Expr {
            node: Arc::new(node),
            kind,
        }
    }

    pub fn node(&self) -> &Node {
        &self.node
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn is_scalar(&self) -> bool {
        self.kind == Kind::Scalar
    }

    pub fn rational(r: BigRational) -> Expr {
        Expr::raw(Node::Rational(r), Kind::Scalar)
    }

    pub fn integer(n: i64) -> Expr {
        Expr::rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(num: i64, den: i64) -> Result<Expr> {
        if den == 0 {
            return Err(ExprError::DivisionByZero);
        }
        Ok(Expr::rational(BigRational::new(BigInt::from(num), BigInt::from(den))))
    }

    pub fn zero(kind: Kind) -> Expr {
        Expr::raw(Node::Rational(BigRational::zero()), kind)
    }

    pub fn one() -> Expr {
        Expr::rational(BigRational::one())
    }

    pub fn pi() -> Expr {
        Expr::raw(Node::Pi, Kind::Scalar)
    }

    pub fn scalar(name: impl Into<String>) -> Expr {
        Expr::raw(Node::Scalar(name.into()), Kind::Scalar)
    }

    pub fn beta() -> Expr {
        Expr::scalar(BETA)
    }

    pub fn vector(name: impl Into<String>) -> Expr {
        Expr::raw(Node::Vector(name.into()), Kind::Vector)
    }

    pub fn is_zero_literal(&self) -> bool {
        is_zero_literal(self)
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self.node() {
            Node::Rational(r) => Some(r),
            _ => None,
        }
    }

    /// Sum of like-kinded terms. An empty sum is the scalar zero; a
    /// one-element sum is that element.
    pub fn sum(items: Vec<Expr>) -> Result<Expr> {
        let kind = items
            .iter()
            .filter(|e| !is_zero_literal(e))
            .map(Expr::kind)
            .next()
            .unwrap_or_else(|| items.first().map_or(Kind::Scalar, Expr::kind));
        for e in &items {
            if e.kind != kind && !is_zero_literal(e) {
                return Err(ExprError::KindMismatch("sum mixes scalar and vector terms".into()));
            }
        }
        Ok(match items.len() {
            0 => Expr::zero(Kind::Scalar),
            1 => items.into_iter().next().unwrap(),
            _ => Expr::raw(Node::Sum(items), kind),
        })
    }

    /// Product of scalars with at most one vector factor.
    pub fn product(items: Vec<Expr>) -> Result<Expr> {
        let vectors = items.iter().filter(|e| e.kind == Kind::Vector).count();
        if vectors > 1 {
            return Err(ExprError::KindMismatch(
                "product of two vectors; use dot or cross".into(),
            ));
        }
        let kind = if vectors == 1 { Kind::Vector } else { Kind::Scalar };
        Ok(match items.len() {
            0 => Expr::one(),
            1 => items.into_iter().next().unwrap(),
            _ => Expr::raw(Node::Product(items), kind),
        })
    }

    pub fn pow(base: Expr, exponent: i64) -> Result<Expr> {
        if base.kind != Kind::Scalar {
            return Err(ExprError::KindMismatch("power of a vector".into()));
        }
        if exponent < 0 && is_zero_literal(&base) {
            return Err(ExprError::DivisionByZero);
        }
        Ok(Expr::raw(Node::Pow(base, exponent), Kind::Scalar))
    }

    pub fn dot(a: Expr, b: Expr) -> Result<Expr> {
        if a.kind != Kind::Vector || b.kind != Kind::Vector {
            return Err(ExprError::KindMismatch("dot of a scalar".into()));
        }
        Ok(Expr::raw(Node::Dot(a, b), Kind::Scalar))
    }

    pub fn cross(a: Expr, b: Expr) -> Result<Expr> {
        if a.kind != Kind::Vector || b.kind != Kind::Vector {
            return Err(ExprError::KindMismatch("cross of a scalar".into()));
        }
        Ok(Expr::raw(Node::Cross(a, b), Kind::Vector))
    }

    pub fn component(v: Expr, axis: Axis) -> Result<Expr> {
        if v.kind != Kind::Vector {
            return Err(ExprError::KindMismatch("component of a scalar".into()));
        }
        Ok(Expr::raw(Node::Component(v, axis), Kind::Scalar))
    }

    pub fn add(&self, other: &Expr) -> Result<Expr> {
        Expr::sum(vec![self.clone(), other.clone()])
    }

    pub fn sub(&self, other: &Expr) -> Result<Expr> {
        Expr::sum(vec![self.clone(), other.neg()])
    }

    pub fn mul(&self, other: &Expr) -> Result<Expr> {
        Expr::product(vec![self.clone(), other.clone()])
    }

    pub fn neg(&self) -> Expr {
        match self.node() {
            Node::Rational(r) => {
                let mut e = Expr::rational(-r);
                e.kind = self.kind;
                e
            }
            _ => Expr::raw(Node::Product(vec![Expr::integer(-1), self.clone()]), self.kind),
        }
    }

    /// Direct children, in order.
    pub fn children(&self) -> Vec<&Expr> {
        match self.node() {
            Node::Rational(_) | Node::Pi | Node::Scalar(_) | Node::Vector(_) => vec![],
            Node::Sum(v) | Node::Product(v) => v.iter().collect(),
            Node::Pow(b, _) => vec![b],
            Node::Dot(a, b) | Node::Cross(a, b) => vec![a, b],
            Node::Component(v, _) => vec![v],
        }
    }

    /// Rebuilds this node with new children (same arity), re-checking kinds.
    pub(crate) fn with_children(&self, children: Vec<Expr>) -> Result<Expr> {
        let mut it = children.into_iter();
        match self.node() {
            Node::Rational(_) | Node::Pi | Node::Scalar(_) | Node::Vector(_) => Ok(self.clone()),
            Node::Sum(_) => Expr::sum(it.collect()),
            Node::Product(_) => Expr::product(it.collect()),
            Node::Pow(_, n) => Expr::pow(it.next().unwrap(), *n),
            Node::Dot(..) => {
                let a = it.next().unwrap();
                Expr::dot(a, it.next().unwrap())
            }
            Node::Cross(..) => {
                let a = it.next().unwrap();
                Expr::cross(a, it.next().unwrap())
            }
            Node::Component(_, ax) => Expr::component(it.next().unwrap(), *ax),
        }
    }

    pub fn node_count(&self) -> usize {
        1 + self.children().iter().map(|c| c.node_count()).sum::<usize>()
    }

    /// Names of scalar and vector symbols occurring in the tree.
    pub fn free_symbols(&self) -> (Vec<String>, Vec<String>) {
        let mut scalars = std::collections::BTreeSet::new();
        let mut vectors = std::collections::BTreeSet::new();
        fn walk(e: &Expr, s: &mut std::collections::BTreeSet<String>, v: &mut std::collections::BTreeSet<String>) {
            match e.node() {
                Node::Scalar(n) => {
                    s.insert(n.clone());
                }
                Node::Vector(n) => {
                    v.insert(n.clone());
                }
                _ => e.children().into_iter().for_each(|c| walk(c, s, v)),
            }
        }
        walk(self, &mut scalars, &mut vectors);
        (scalars.into_iter().collect(), vectors.into_iter().collect())
    }

    pub fn contains_symbol(&self, name: &str) -> bool {
        match self.node() {
            Node::Scalar(n) | Node::Vector(n) => n == name,
            _ => self.children().iter().any(|c| c.contains_symbol(name)),
        }
    }
}

/// Rewrites `e` to canonical form: bilinear expansion of `dot`/`cross`,
/// BAC-CAB, antisymmetry, triple-product normalization, flattening, ordering
/// and exact like-term collection. Idempotent.
///
/// Fails only when a negative power of an expression that reduces to zero
/// is encountered.
pub fn canonicalize(e: &Expr) -> Result<Expr> {
    Ok(normal::Poly::from_expr(e)?.to_expr())
}

/// True when `e` canonicalizes to zero.
pub fn is_identically_zero(e: &Expr) -> Result<bool> {
    Ok(normal::Poly::from_expr(e)?.is_zero())
}

#[cfg(test)]
mod tests;
