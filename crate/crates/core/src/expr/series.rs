//! Expressions graded by powers of β, truncated at a fixed order.

use std::collections::BTreeMap;

use super::normal::Poly;
use super::{component_forms, to_components, Expr, ExprError, Kind, Result, SymbolTable};

/// Coefficients of β⁰…β^max_order; absent powers are zero.
///
/// Every stored coefficient is canonical, nonzero and free of β.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedSeries {
    kind: Kind,
    max_order: u32,
    coeffs: BTreeMap<u32, Expr>,
}

impl GradedSeries {
    pub fn zero(kind: Kind, max_order: u32) -> Self {
        GradedSeries {
            kind,
            max_order,
            coeffs: BTreeMap::new(),
        }
    }

    fn from_polys(kind: Kind, max_order: u32, grades: BTreeMap<u32, Poly>) -> Self {
        let coeffs = grades
            .into_iter()
            .filter(|(k, p)| *k <= max_order && !p.is_zero())
            .map(|(k, p)| (k, p.to_expr()))
            .collect();
        GradedSeries {
            kind,
            max_order,
            coeffs,
        }
    }

    fn polys(&self) -> Result<BTreeMap<u32, Poly>> {
        self.coeffs.iter().map(|(k, e)| Ok((*k, Poly::from_expr(e)?))).collect()
    }

    /// Builds a series from explicit coefficients, canonicalizing each.
    pub fn from_coefficients(
        kind: Kind,
        max_order: u32,
        coefficients: impl IntoIterator<Item = (u32, Expr)>,
    ) -> Result<Self> {
        let mut grades: BTreeMap<u32, Poly> = BTreeMap::new();
        for (k, e) in coefficients {
            if e.kind() != kind && !e.is_zero_literal() {
                return Err(ExprError::KindMismatch("series coefficient kind".into()));
            }
            let p = Poly::from_expr(&e)?;
            if p.contains_beta() {
                return Err(ExprError::NonPolynomialBeta(e.to_string()));
            }
            let slot = grades.entry(k).or_insert_with(|| Poly::zero(kind));
            *slot = slot.add(&p);
        }
        Ok(Self::from_polys(kind, max_order, grades))
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn max_order(&self) -> u32 {
        self.max_order
    }

    pub fn coefficient(&self, k: u32) -> Expr {
        self.coeffs.get(&k).cloned().unwrap_or_else(|| Expr::zero(self.kind))
    }

    /// Nonzero coefficients in increasing power.
    pub fn coefficients(&self) -> impl Iterator<Item = (u32, &Expr)> {
        self.coeffs.iter().map(|(k, e)| (*k, e))
    }

    pub fn grades(&self) -> Vec<u32> {
        self.coeffs.keys().copied().collect()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `Σ β^k c_k` as a single canonical expression.
    pub fn to_expr(&self) -> Expr {
        let mut total = Poly::zero(self.kind);
        for (k, e) in &self.coeffs {
            let p = Poly::from_expr(e).expect("stored coefficients are canonical");
            let bk = Poly::atom_pow(super::normal::ScalarAtom::Symbol(super::BETA.to_string()), *k as i64);
            total = total.add(&if *k == 0 { p } else { p.mul(&bk) });
        }
        total.to_expr()
    }

    fn check_same_kind(&self, other: &GradedSeries) -> Result<()> {
        if self.kind != other.kind && !self.is_zero() && !other.is_zero() {
            return Err(ExprError::KindMismatch("series of different kinds".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &GradedSeries) -> Result<GradedSeries> {
        self.check_same_kind(other)?;
        let kind = if self.is_zero() { other.kind } else { self.kind };
        let n = self.max_order.min(other.max_order);
        let mut grades = self.polys()?;
        for (k, p) in other.polys()? {
            let slot = grades.entry(k).or_insert_with(|| Poly::zero(kind));
            *slot = slot.add(&p);
        }
        Ok(Self::from_polys(kind, n, grades))
    }

    pub fn neg(&self) -> GradedSeries {
        GradedSeries {
            kind: self.kind,
            max_order: self.max_order,
            coeffs: self
                .coeffs
                .iter()
                .map(|(k, e)| (*k, Poly::from_expr(e).expect("canonical").neg().to_expr()))
                .collect(),
        }
    }

    pub fn sub(&self, other: &GradedSeries) -> Result<GradedSeries> {
        self.add(&other.neg())
    }

    /// Graded (Cauchy) product, truncated to the smaller order.
    pub fn mul(&self, other: &GradedSeries) -> Result<GradedSeries> {
        if self.kind == Kind::Vector && other.kind == Kind::Vector {
            return Err(ExprError::KindMismatch("product of two vector series".into()));
        }
        let kind = if self.kind == Kind::Vector || other.kind == Kind::Vector {
            Kind::Vector
        } else {
            Kind::Scalar
        };
        let n = self.max_order.min(other.max_order);
        let (a, b) = (self.polys()?, other.polys()?);
        let mut grades: BTreeMap<u32, Poly> = BTreeMap::new();
        for (i, pa) in &a {
            for (j, pb) in &b {
                if i + j > n {
                    continue;
                }
                let slot = grades.entry(i + j).or_insert_with(|| Poly::zero(kind));
                *slot = slot.add(&pa.mul(pb));
            }
        }
        Ok(Self::from_polys(kind, n, grades))
    }

    /// Multiplies every coefficient by a β-free scalar.
    pub fn scale(&self, factor: &Expr) -> Result<GradedSeries> {
        let f = GradedSeries::from_coefficients(Kind::Scalar, self.max_order, [(0, factor.clone())])?;
        self.mul(&f)
    }

    /// Keeps powers up to `n` (and lowers the order to `n`).
    pub fn truncated(&self, n: u32) -> GradedSeries {
        GradedSeries {
            kind: self.kind,
            max_order: self.max_order.min(n),
            coeffs: self
                .coeffs
                .iter()
                .filter(|(k, _)| **k <= n)
                .map(|(k, e)| (*k, e.clone()))
                .collect(),
        }
    }

    /// The series under β → −β.
    pub fn reflect_beta(&self) -> GradedSeries {
        let mut out = self.clone();
        for (k, e) in out.coeffs.iter_mut() {
            if k % 2 == 1 {
                *e = Poly::from_expr(e).expect("canonical").neg().to_expr();
            }
        }
        out
    }

    pub fn even_part(&self) -> GradedSeries {
        let mut out = self.clone();
        out.coeffs.retain(|k, _| k % 2 == 0);
        out
    }

    pub fn odd_part(&self) -> GradedSeries {
        let mut out = self.clone();
        out.coeffs.retain(|k, _| k % 2 == 1);
        out
    }

    /// Applies `f` to each coefficient, re-canonicalizing.
    pub fn map_coefficients(&self, mut f: impl FnMut(&Expr) -> Result<Expr>) -> Result<GradedSeries> {
        let mut out = Vec::new();
        for (k, e) in &self.coeffs {
            out.push((*k, f(e)?));
        }
        GradedSeries::from_coefficients(self.kind, self.max_order, out)
    }
}

/// Splits `e` by powers of β, discarding powers above `n`.
///
/// β must occur only as a polynomial factor (not under a negative power).
pub fn truncate(e: &Expr, n: u32) -> Result<GradedSeries> {
    let p = Poly::from_expr(e)?;
    let kind = if p.is_zero() { e.kind() } else { p.kind };
    Ok(GradedSeries::from_polys(kind, n, p.beta_grades()?))
}

/// Either side of an [`equal_mod_order`] comparison.
#[derive(Debug, Clone)]
pub enum Operand {
    Expr(Expr),
    Series(GradedSeries),
}

impl Operand {
    fn as_expr(&self) -> Expr {
        match self {
            Operand::Expr(e) => e.clone(),
            Operand::Series(s) => s.to_expr(),
        }
    }
}

impl From<Expr> for Operand {
    fn from(e: Expr) -> Self {
        Operand::Expr(e)
    }
}

impl From<&Expr> for Operand {
    fn from(e: &Expr) -> Self {
        Operand::Expr(e.clone())
    }
}

impl From<GradedSeries> for Operand {
    fn from(s: GradedSeries) -> Self {
        Operand::Series(s)
    }
}

impl From<&GradedSeries> for Operand {
    fn from(s: &GradedSeries) -> Self {
        Operand::Series(s.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Comparison {
    pub matches: bool,
    /// Canonical `a − b` through order `n` (definitions expanded); zero when
    /// the operands match.
    pub residual: Expr,
}

/// Decides `a ≡ b (mod β^(n+1))`: the difference, with every definition
/// of `table` expanded and truncated at `n`, must vanish component by
/// component.
pub fn equal_mod_order(
    a: impl Into<Operand>,
    b: impl Into<Operand>,
    n: u32,
    table: &SymbolTable,
) -> Result<Comparison> {
    let (a, b) = (a.into().as_expr(), b.into().as_expr());
    if a.kind() != b.kind() && !a.is_zero_literal() && !b.is_zero_literal() {
        return Err(ExprError::KindMismatch("comparing a scalar with a vector".into()));
    }
    let diff = table.expand(&a.sub(&b)?)?;
    let series = truncate(&diff, n)?;
    let mut matches = true;
    for (_, c) in series.coefficients() {
        let zero = match c.kind() {
            Kind::Scalar => to_components(c, table)?.is_zero_literal(),
            Kind::Vector => component_forms(c, table)?.iter().all(Expr::is_zero_literal),
        };
        if !zero {
            matches = false;
            break;
        }
    }
    let residual = if matches {
        Expr::zero(series.kind())
    } else {
        series.to_expr()
    };
    Ok(Comparison { matches, residual })
}
