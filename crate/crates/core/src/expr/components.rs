//! Cartesian expansion: `dot`, `cross` and triple products rewritten as
//! sums of component products through δ and the Levi-Civita symbol.

use super::normal::{Poly, ScalarAtom, VecAtom};
use super::{Axis, Expr, ExprError, Kind, Node, Result, SymbolTable};

/// Replaces every occurrence of symbol `name` by `replacement`.
pub fn substitute(e: &Expr, name: &str, replacement: &Expr) -> Result<Expr> {
    match e.node() {
        Node::Scalar(n) | Node::Vector(n) if n == name => {
            if replacement.kind() != e.kind() && !replacement.is_zero_literal() {
                return Err(ExprError::KindMismatch(format!(
                    "substituting `{name}` with an expression of another kind"
                )));
            }
            if replacement.is_zero_literal() {
                return Ok(Expr::zero(e.kind()));
            }
            Ok(replacement.clone())
        }
        _ => {
            let children = e.children();
            if children.is_empty() || !e.contains_symbol(name) {
                return Ok(e.clone());
            }
            let new = children
                .into_iter()
                .map(|c| substitute(c, name, replacement))
                .collect::<Result<Vec<_>>>()?;
            e.with_children(new)
        }
    }
}

struct Expander<'a> {
    table: &'a SymbolTable,
}

impl Expander<'_> {
    fn comp(&self, name: &str, axis: Axis) -> Poly {
        match self.table.fixed_components(name) {
            Some(c) => Poly::constant(c[axis.index()].clone()),
            None => Poly::atom(ScalarAtom::Component(VecAtom::Symbol(name.to_string()), axis)),
        }
    }

    fn cross_comp(&self, a: &str, b: &str, axis: Axis) -> Poly {
        let (j, k) = axis.cyclic_rest();
        self.comp(a, j)
            .mul(&self.comp(b, k))
            .add(&self.comp(a, k).mul(&self.comp(b, j)).neg())
    }

    fn vec_comp(&self, v: &VecAtom, axis: Axis) -> Poly {
        match v {
            VecAtom::Symbol(s) => self.comp(s, axis),
            VecAtom::Cross(a, b) => self.cross_comp(a, b, axis),
        }
    }

    fn atom(&self, a: &ScalarAtom) -> Result<Poly> {
        Ok(match a {
            ScalarAtom::Pi | ScalarAtom::Symbol(_) => Poly::atom(a.clone()),
            ScalarAtom::Component(v, ax) => self.vec_comp(v, *ax),
            ScalarAtom::Dot(a, b) => Axis::ALL.iter().fold(Poly::zero(Kind::Scalar), |acc, &i| {
                acc.add(&self.comp(a, i).mul(&self.comp(b, i)))
            }),
            ScalarAtom::Triple(a, b, c) => Axis::ALL.iter().fold(Poly::zero(Kind::Scalar), |acc, &i| {
                acc.add(&self.comp(a, i).mul(&self.cross_comp(b, c, i)))
            }),
            ScalarAtom::Reciprocal(p) => self.scalar_poly(p)?.powi(-1)?,
        })
    }

    fn scalar_poly(&self, p: &Poly) -> Result<Poly> {
        let mut out = Poly::zero(Kind::Scalar);
        for (m, c) in &p.terms {
            let mut term = Poly::constant(c.clone());
            for (a, e) in &m.scalars {
                term = term.mul(&self.atom(a)?.powi(*e)?);
            }
            out = out.add(&term);
        }
        Ok(out)
    }

    fn vector_component(&self, p: &Poly, axis: Axis) -> Result<Poly> {
        let mut out = Poly::zero(Kind::Scalar);
        for (m, c) in &p.terms {
            let mut term = Poly::constant(c.clone());
            for (a, e) in &m.scalars {
                term = term.mul(&self.atom(a)?.powi(*e)?);
            }
            let v = m.vector.as_ref().expect("vector-kinded monomial");
            out = out.add(&term.mul(&self.vec_comp(v, axis)));
        }
        Ok(out)
    }
}

/// Eliminates every `dot` and `cross` of a scalar expression in favor of
/// component products; components of fixed vectors (declared in `table`)
/// become constants. The result is canonical.
pub fn to_components(e: &Expr, table: &SymbolTable) -> Result<Expr> {
    if e.kind() == Kind::Vector && !e.is_zero_literal() {
        return Err(ExprError::KindMismatch(
            "to_components needs a scalar; use component_forms for vectors".into(),
        ));
    }
    let p = Poly::from_expr(e)?;
    Ok(Expander { table }.scalar_poly(&p)?.to_expr())
}

/// The three Cartesian components of a vector expression, each fully
/// expanded as by [`to_components`].
pub fn component_forms(e: &Expr, table: &SymbolTable) -> Result<[Expr; 3]> {
    if e.kind() != Kind::Vector {
        return Err(ExprError::KindMismatch("component_forms needs a vector".into()));
    }
    let p = Poly::from_expr(e)?;
    let ex = Expander { table };
    Ok([
        ex.vector_component(&p, Axis::X)?.to_expr(),
        ex.vector_component(&p, Axis::Y)?.to_expr(),
        ex.vector_component(&p, Axis::Z)?.to_expr(),
    ])
}

/// Replaces dot products and components of fixed vectors by their values,
/// then canonicalizes. Other structure is kept, so the result stays readable.
pub fn fold_fixed(e: &Expr, table: &SymbolTable) -> Result<Expr> {
    fn fixed(e: &Expr, table: &SymbolTable) -> Option<[num_rational::BigRational; 3]> {
        match e.node() {
            Node::Vector(n) => table.fixed_components(n).cloned(),
            _ => None,
        }
    }
    fn go(e: &Expr, table: &SymbolTable) -> Result<Expr> {
        match e.node() {
            Node::Dot(a, b) => {
                if let (Some(x), Some(y)) = (fixed(a, table), fixed(b, table)) {
                    let s = x.iter().zip(&y).map(|(p, q)| p * q).sum();
                    return Ok(Expr::rational(s));
                }
            }
            Node::Component(v, ax) => {
                if let Some(x) = fixed(v, table) {
                    return Ok(Expr::rational(x[ax.index()].clone()));
                }
            }
            _ => {}
        }
        let children = e.children();
        if children.is_empty() {
            return Ok(e.clone());
        }
        let new = children.into_iter().map(|c| go(c, table)).collect::<Result<Vec<_>>>()?;
        e.with_children(new)
    }
    super::canonicalize(&go(e, table)?)
}
