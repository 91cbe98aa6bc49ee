//! Polynomial normal form behind `canonicalize`.
//!
//! A normal form is a map from monomials to nonzero exact coefficients. A
//! monomial is a product of scalar atoms with integer exponents and, for
//! vector-kinded forms, exactly one vector atom. After `dot`/`cross`
//! expansion the only vector atoms left are symbols and `a×b` with `a < b`,
//! and the only vector-built scalar atoms are `a·b` (`a <= b`), the sorted
//! triple product `a·(b×c)` (`a < b < c`) and components.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{Axis, Expr, ExprError, Kind, Node, Result, BETA};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) enum VecAtom {
    Symbol(String),
    Cross(String, String),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) enum ScalarAtom {
    Pi,
    Symbol(String),
    Component(VecAtom, Axis),
    Dot(String, String),
    Triple(String, String, String),
    /// `1/p` for a multi-term polynomial `p` whose leading coefficient is 1.
    Reciprocal(Poly),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) struct Monomial {
    pub scalars: BTreeMap<ScalarAtom, i64>,
    pub vector: Option<VecAtom>,
}

impl Monomial {
    fn mul(&self, other: &Monomial) -> Monomial {
        let mut scalars = self.scalars.clone();
        for (atom, e) in &other.scalars {
            let slot = scalars.entry(atom.clone()).or_insert(0);
            *slot += e;
            if *slot == 0 {
                scalars.remove(atom);
            }
        }
        debug_assert!(self.vector.is_none() || other.vector.is_none());
        Monomial {
            scalars,
            vector: self.vector.clone().or_else(|| other.vector.clone()),
        }
    }

    pub fn beta_power(&self) -> i64 {
        self.scalars
            .get(&ScalarAtom::Symbol(BETA.to_string()))
            .copied()
            .unwrap_or(0)
    }

    pub fn without_beta(&self) -> Monomial {
        let mut m = self.clone();
        m.scalars.remove(&ScalarAtom::Symbol(BETA.to_string()));
        m
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) struct Poly {
    pub kind: Kind,
    pub terms: BTreeMap<Monomial, BigRational>,
}

fn sorted_pair(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

impl Poly {
    pub fn zero(kind: Kind) -> Poly {
        Poly {
            kind,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(r: BigRational) -> Poly {
        let mut p = Poly::zero(Kind::Scalar);
        p.add_term(Monomial::default(), r);
        p
    }

    pub fn one() -> Poly {
        Poly::constant(BigRational::one())
    }

    pub fn atom(a: ScalarAtom) -> Poly {
        Poly::atom_pow(a, 1)
    }

    pub fn atom_pow(a: ScalarAtom, e: i64) -> Poly {
        let mut m = Monomial::default();
        m.scalars.insert(a, e);
        let mut p = Poly::zero(Kind::Scalar);
        p.add_term(m, BigRational::one());
        p
    }

    pub fn vector_atom(v: VecAtom) -> Poly {
        let m = Monomial {
            scalars: BTreeMap::new(),
            vector: Some(v),
        };
        let mut p = Poly::zero(Kind::Vector);
        p.add_term(m, BigRational::one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let kind = if self.is_zero() { other.kind } else { self.kind };
        let mut out = self.clone();
        out.kind = kind;
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Poly {
        self.scale(&-BigRational::one())
    }

    pub fn scale(&self, r: &BigRational) -> Poly {
        if r.is_zero() {
            return Poly::zero(self.kind);
        }
        Poly {
            kind: self.kind,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * r)).collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let kind = if self.kind == Kind::Vector || other.kind == Kind::Vector {
            Kind::Vector
        } else {
            Kind::Scalar
        };
        let mut out = Poly::zero(kind);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    /// Multiplies every term by a scalar monomial and coefficient.
    fn mul_monomial(&self, m: &Monomial, c: &BigRational) -> Poly {
        let mut out = Poly::zero(self.kind);
        for (mm, cc) in &self.terms {
            out.add_term(mm.mul(m), cc * c);
        }
        out
    }

    pub fn powi(&self, n: i64) -> Result<Poly> {
        if self.kind == Kind::Vector {
            return Err(ExprError::KindMismatch("power of a vector".into()));
        }
        if n == 0 {
            return Ok(Poly::one());
        }
        if n > 0 {
            let mut acc = Poly::one();
            let mut base = self.clone();
            let mut k = n as u64;
            while k > 0 {
                if k & 1 == 1 {
                    acc = acc.mul(&base);
                }
                k >>= 1;
                if k > 0 {
                    base = base.mul(&base);
                }
            }
            return Ok(acc);
        }
        let m = -n;
        match self.terms.len() {
            0 => Err(ExprError::DivisionByZero),
            1 => {
                let (mono, c) = self.terms.iter().next().unwrap();
                let coeff = pow_rational(c, n);
                let mut inv = Monomial::default();
                let mut expanded = Poly::one();
                for (a, e) in &mono.scalars {
                    match a {
                        // (1/q)^(-k) is q^k, expanded
                        ScalarAtom::Reciprocal(q) => expanded = expanded.mul(&q.powi(-e * n)?),
                        _ => {
                            inv.scalars.insert(a.clone(), e * n);
                        }
                    }
                }
                let mut p = Poly::zero(Kind::Scalar);
                p.add_term(inv, coeff);
                Ok(p.mul(&expanded))
            }
            _ => {
                let lead = self.terms.values().next().unwrap().clone();
                let monic = self.scale(&lead.recip());
                let mut p = Poly::atom_pow(ScalarAtom::Reciprocal(monic), m);
                p = p.scale(&pow_rational(&lead, n));
                Ok(p)
            }
        }
    }

    pub fn dot(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero(Kind::Scalar);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let (va, vb) = match (&ma.vector, &mb.vector) {
                    (Some(a), Some(b)) => (a, b),
                    _ => unreachable!("dot of non-vector monomials"),
                };
                let scal = Monomial {
                    scalars: ma
                        .mul(&Monomial {
                            scalars: mb.scalars.clone(),
                            vector: None,
                        })
                        .scalars,
                    vector: None,
                };
                let atoms = dot_atoms(va, vb);
                out = out.add(&atoms.mul_monomial(&scal, &(ca * cb)));
            }
        }
        out
    }

    pub fn cross(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero(Kind::Vector);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let (va, vb) = match (&ma.vector, &mb.vector) {
                    (Some(a), Some(b)) => (a, b),
                    _ => unreachable!("cross of non-vector monomials"),
                };
                let scal = Monomial {
                    scalars: ma
                        .mul(&Monomial {
                            scalars: mb.scalars.clone(),
                            vector: None,
                        })
                        .scalars,
                    vector: None,
                };
                let atoms = cross_atoms(va, vb);
                out = out.add(&atoms.mul_monomial(&scal, &(ca * cb)));
            }
        }
        out.kind = Kind::Vector;
        out
    }

    pub fn component(&self, axis: Axis) -> Poly {
        let mut out = Poly::zero(Kind::Scalar);
        for (m, c) in &self.terms {
            let v = m.vector.clone().expect("component of a scalar monomial");
            let mut mono = Monomial {
                scalars: m.scalars.clone(),
                vector: None,
            };
            let slot = mono.scalars.entry(ScalarAtom::Component(v, axis)).or_insert(0);
            *slot += 1;
            out.add_term(mono, c.clone());
        }
        out
    }

    /// Product of factors, cancelling multi-term scalar factors against
    /// reciprocals of the same polynomial before expanding.
    fn product_of(factors: &[Poly]) -> Result<Poly> {
        let mut net: BTreeMap<Poly, i64> = BTreeMap::new();
        let mut rest = Poly::one();
        for f in factors {
            if f.kind == Kind::Scalar && f.terms.len() > 1 {
                let lead = f.terms.values().next().unwrap().clone();
                rest = rest.scale(&lead);
                *net.entry(f.scale(&lead.recip())).or_insert(0) += 1;
            } else if f.terms.len() == 1 {
                let (mono, c) = f.terms.iter().next().unwrap();
                let mut plain = mono.clone();
                for (a, e) in &mono.scalars {
                    if let ScalarAtom::Reciprocal(q) = a {
                        plain.scalars.remove(a);
                        *net.entry(q.clone()).or_insert(0) -= *e;
                    }
                }
                rest = rest.mul_monomial(&plain, c);
                if f.kind == Kind::Vector {
                    rest.kind = Kind::Vector;
                }
            } else {
                rest = rest.mul(f);
            }
        }
        for (q, k) in net {
            match k.cmp(&0) {
                std::cmp::Ordering::Equal => {}
                std::cmp::Ordering::Greater => rest = rest.mul(&q.powi(k)?),
                std::cmp::Ordering::Less => rest = rest.mul(&Poly::atom_pow(ScalarAtom::Reciprocal(q), -k)),
            }
        }
        Ok(rest)
    }

    pub fn from_expr(e: &Expr) -> Result<Poly> {
        Ok(match e.node() {
            Node::Rational(r) => {
                let mut p = Poly::constant(r.clone());
                if r.is_zero() {
                    p.kind = e.kind();
                }
                p
            }
            Node::Pi => Poly::atom(ScalarAtom::Pi),
            Node::Scalar(s) => Poly::atom(ScalarAtom::Symbol(s.clone())),
            Node::Vector(v) => Poly::vector_atom(VecAtom::Symbol(v.clone())),
            Node::Sum(items) => {
                let mut acc = Poly::zero(e.kind());
                for it in items {
                    acc = acc.add(&Poly::from_expr(it)?);
                }
                acc.kind = e.kind();
                acc
            }
            Node::Product(items) => {
                let mut acc = Poly::product_of(&items.iter().map(Poly::from_expr).collect::<Result<Vec<_>>>()?)?;
                acc.kind = e.kind();
                acc
            }
            // (ab)^-k = a^-k b^-k and (b^j)^k = b^(jk), so reciprocals
            // keep the factors they were written with
            Node::Pow(b, n) if *n < 0 => match b.node() {
                Node::Product(items) => Poly::product_of(
                    &items
                        .iter()
                        .map(|it| Poly::from_expr(it)?.powi(*n))
                        .collect::<Result<Vec<_>>>()?,
                )?,
                Node::Pow(inner, j) if j.checked_mul(*n).is_some() => Poly::from_expr(inner)?.powi(j * n)?,
                _ => Poly::from_expr(b)?.powi(*n)?,
            },
            Node::Pow(b, n) => Poly::from_expr(b)?.powi(*n)?,
            Node::Dot(a, b) => Poly::from_expr(a)?.dot(&Poly::from_expr(b)?),
            Node::Cross(a, b) => Poly::from_expr(a)?.cross(&Poly::from_expr(b)?),
            Node::Component(v, ax) => Poly::from_expr(v)?.component(*ax),
        })
    }

    pub fn to_expr(&self) -> Expr {
        if self.terms.is_empty() {
            return Expr::zero(self.kind);
        }
        let terms: Vec<Expr> = self.terms.iter().map(|(m, c)| monomial_expr(m, c)).collect();
        Expr::sum(terms).expect("normal form terms share a kind")
    }

    pub fn contains_beta(&self) -> bool {
        self.terms.keys().any(|m| {
            m.scalars.keys().any(|a| match a {
                ScalarAtom::Symbol(s) => s == BETA,
                ScalarAtom::Reciprocal(p) => p.contains_beta(),
                _ => false,
            })
        })
    }

    /// Splits by power of β. Fails if β occurs with a negative power or
    /// inside a reciprocal.
    pub fn beta_grades(&self) -> Result<BTreeMap<u32, Poly>> {
        let mut out: BTreeMap<u32, Poly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let k = m.beta_power();
            let rest = m.without_beta();
            let hidden = rest.scalars.keys().any(|a| match a {
                ScalarAtom::Reciprocal(p) => p.contains_beta(),
                _ => false,
            });
            if k < 0 || hidden {
                return Err(ExprError::NonPolynomialBeta(monomial_expr(m, c).to_string()));
            }
            out.entry(k as u32)
                .or_insert_with(|| Poly::zero(self.kind))
                .add_term(rest, c.clone());
        }
        out.retain(|_, p| !p.is_zero());
        for p in out.values_mut() {
            p.kind = self.kind;
        }
        Ok(out)
    }
}

fn pow_rational(r: &BigRational, n: i64) -> BigRational {
    let base = if n < 0 { r.recip() } else { r.clone() };
    let mut acc = BigRational::one();
    for _ in 0..n.unsigned_abs() {
        acc *= &base;
    }
    acc
}

fn dot_atoms(a: &VecAtom, b: &VecAtom) -> Poly {
    use VecAtom::*;
    match (a, b) {
        (Symbol(x), Symbol(y)) => {
            let (p, q) = sorted_pair(x, y);
            Poly::atom(ScalarAtom::Dot(p, q))
        }
        (Symbol(x), Cross(y, z)) | (Cross(y, z), Symbol(x)) => triple(x, y, z),
        (Cross(p, q), Cross(r, s)) => {
            // (p×q)·(r×s) = (p·r)(q·s) − (p·s)(q·r)
            let d = |u: &str, v: &str| {
                let (a, b) = sorted_pair(u, v);
                Poly::atom(ScalarAtom::Dot(a, b))
            };
            d(p, r).mul(&d(q, s)).add(&d(p, s).mul(&d(q, r)).neg())
        }
    }
}

/// `a·(b×c)`, fully antisymmetric: sorted with permutation sign.
fn triple(a: &str, b: &str, c: &str) -> Poly {
    if a == b || b == c || a == c {
        return Poly::zero(Kind::Scalar);
    }
    let mut v = [a, b, c];
    let mut sign = 1i64;
    for i in 0..3 {
        for j in 0..2 - i {
            if v[j] > v[j + 1] {
                v.swap(j, j + 1);
                sign = -sign;
            }
        }
    }
    let p = Poly::atom(ScalarAtom::Triple(v[0].to_string(), v[1].to_string(), v[2].to_string()));
    p.scale(&BigRational::from_integer(BigInt::from(sign)))
}

fn vsym(name: &str) -> Poly {
    Poly::vector_atom(VecAtom::Symbol(name.to_string()))
}

fn dot_sym(u: &str, v: &str) -> Poly {
    let (a, b) = sorted_pair(u, v);
    Poly::atom(ScalarAtom::Dot(a, b))
}

fn cross_atoms(a: &VecAtom, b: &VecAtom) -> Poly {
    use VecAtom::*;
    match (a, b) {
        (Symbol(x), Symbol(y)) => {
            if x == y {
                Poly::zero(Kind::Vector)
            } else if x < y {
                Poly::vector_atom(Cross(x.clone(), y.clone()))
            } else {
                Poly::vector_atom(Cross(y.clone(), x.clone())).neg()
            }
        }
        // a×(b×c) = b(a·c) − c(a·b)
        (Symbol(a), Cross(b, c)) => vsym(b).mul(&dot_sym(a, c)).add(&vsym(c).mul(&dot_sym(a, b)).neg()),
        // (a×b)×c = b(a·c) − a(b·c)
        (Cross(a, b), Symbol(c)) => vsym(b).mul(&dot_sym(a, c)).add(&vsym(a).mul(&dot_sym(b, c)).neg()),
        // (a×b)×(c×d) = c[a,b,d] − d[a,b,c]
        (Cross(a, b), Cross(c, d)) => vsym(c).mul(&triple(a, b, d)).add(&vsym(d).mul(&triple(a, b, c)).neg()),
    }
}

pub(crate) fn vec_atom_expr(v: &VecAtom) -> Expr {
    match v {
        VecAtom::Symbol(s) => Expr::vector(s.clone()),
        VecAtom::Cross(a, b) => Expr::cross(Expr::vector(a.clone()), Expr::vector(b.clone())).expect("vector atoms"),
    }
}

fn scalar_atom_expr(a: &ScalarAtom) -> Expr {
    match a {
        ScalarAtom::Pi => Expr::pi(),
        ScalarAtom::Symbol(s) => Expr::scalar(s.clone()),
        ScalarAtom::Component(v, ax) => Expr::component(vec_atom_expr(v), *ax).expect("vector atom"),
        ScalarAtom::Dot(a, b) => Expr::dot(Expr::vector(a.clone()), Expr::vector(b.clone())).expect("vector atoms"),
        ScalarAtom::Triple(a, b, c) => Expr::dot(
            Expr::vector(a.clone()),
            Expr::cross(Expr::vector(b.clone()), Expr::vector(c.clone())).expect("vectors"),
        )
        .expect("vectors"),
        ScalarAtom::Reciprocal(p) => p.to_expr(),
    }
}

fn monomial_expr(m: &Monomial, c: &BigRational) -> Expr {
    let mut factors = Vec::new();
    let bare = m.scalars.is_empty() && m.vector.is_none();
    if bare || !c.is_one() {
        if c.abs().is_one() && !bare {
            factors.push(Expr::integer(-1));
        } else {
            factors.push(Expr::rational(c.clone()));
        }
    }
    for (a, e) in &m.scalars {
        let base = scalar_atom_expr(a);
        let e = if matches!(a, ScalarAtom::Reciprocal(_)) { -e } else { *e };
        if e == 1 {
            factors.push(base);
        } else {
            factors.push(Expr::pow(base, e).expect("scalar atom"));
        }
    }
    if let Some(v) = &m.vector {
        factors.push(vec_atom_expr(v));
    }
    Expr::product(factors).expect("at most one vector factor")
}
