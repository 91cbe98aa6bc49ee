use std::collections::BTreeMap;

use num_rational::BigRational;

use super::{components::substitute, parse, Expr, ExprError, Kind, Result, BETA, PI};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SymbolKind {
    Scalar,
    Vector,
    /// A vector with fixed exact Cartesian components, such as a unit axis.
    FixedVector([BigRational; 3]),
}

impl SymbolKind {
    pub fn kind(&self) -> Kind {
        match self {
            SymbolKind::Scalar => Kind::Scalar,
            SymbolKind::Vector | SymbolKind::FixedVector(_) => Kind::Vector,
        }
    }
}

/// Declared symbols plus definitions expanded on demand.
///
/// `beta` is always declared as a scalar; `pi` is reserved for the constant.
#[derive(Debug, Clone)]
pub struct SymbolTable {
    symbols: BTreeMap<String, SymbolKind>,
    definitions: Vec<(String, Expr)>,
}

impl Default for SymbolTable {
    fn default() -> Self {
        let mut symbols = BTreeMap::new();
        symbols.insert(BETA.to_string(), SymbolKind::Scalar);
        SymbolTable {
            symbols,
            definitions: Vec::new(),
        }
    }
}

impl SymbolTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn declare(&mut self, name: &str, kind: SymbolKind) -> Result<()> {
        if name == PI {
            return Err(ExprError::ConflictingDeclaration(name.into()));
        }
        match self.symbols.get(name) {
            Some(k) if k.kind() != kind.kind() => Err(ExprError::ConflictingDeclaration(name.into())),
            Some(k) if *k != kind => Err(ExprError::ConflictingDeclaration(name.into())),
            _ => {
                self.symbols.insert(name.to_string(), kind);
                Ok(())
            }
        }
    }

    pub fn scalar(mut self, name: &str) -> Result<Self> {
        self.declare(name, SymbolKind::Scalar)?;
        Ok(self)
    }

    pub fn vector(mut self, name: &str) -> Result<Self> {
        self.declare(name, SymbolKind::Vector)?;
        Ok(self)
    }

    /// Declares `name` and binds it to `definition`, parsed against the
    /// symbols declared so far. The kind is taken from the definition.
    pub fn define(mut self, name: &str, definition: &str) -> Result<Self> {
        let body = parse(definition, &self)?;
        let kind = match body.kind() {
            Kind::Scalar => SymbolKind::Scalar,
            Kind::Vector => SymbolKind::Vector,
        };
        self.declare(name, kind)?;
        self.definitions.push((name.to_string(), body));
        Ok(self)
    }

    pub fn lookup(&self, name: &str) -> Option<&SymbolKind> {
        self.symbols.get(name)
    }

    pub fn fixed_components(&self, name: &str) -> Option<&[BigRational; 3]> {
        match self.symbols.get(name) {
            Some(SymbolKind::FixedVector(c)) => Some(c),
            _ => None,
        }
    }

    pub fn definition(&self, name: &str) -> Option<&Expr> {
        self.definitions.iter().find(|(n, _)| n == name).map(|(_, e)| e)
    }

    pub fn definitions(&self) -> impl Iterator<Item = (&str, &Expr)> {
        self.definitions.iter().map(|(n, e)| (n.as_str(), e))
    }

    /// Replaces every defined symbol by its definition, recursively.
    pub fn expand(&self, e: &Expr) -> Result<Expr> {
        let mut out = e.clone();
        // later definitions may reference earlier ones
        for _ in 0..=self.definitions.len() {
            let mut changed = false;
            for (name, body) in self.definitions.iter().rev() {
                if out.contains_symbol(name) {
                    out = substitute(&out, name, body)?;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        Ok(out)
    }

    /// Replaces only the named definitions.
    pub fn expand_only(&self, e: &Expr, names: &[&str]) -> Result<Expr> {
        let mut out = e.clone();
        for (name, body) in self.definitions.iter().rev() {
            if names.contains(&name.as_str()) && out.contains_symbol(name) {
                out = substitute(&out, name, body)?;
            }
        }
        Ok(out)
    }

    /// Symbols of the moving-media problem, with the speed of light
    /// absorbed into β:
    ///
    /// * scalars `eps`, `mu`, and `kappa := eps*mu - 1`;
    /// * field vectors `E`, `H`, `D`, `B`;
    /// * `xhat`, the unit vector along the direction of motion;
    /// * `v := beta*xhat`, the velocity in units of c;
    /// * `S := (1/(4*pi))*cross(E,H)`, the Poynting vector divided by c.
    pub fn moving_media() -> SymbolTable {
        let one = BigRational::from_integer(1.into());
        let zero = BigRational::from_integer(0.into());
        let mut t = SymbolTable::new()
            .scalar("eps")
            .and_then(|t| t.scalar("mu"))
            .and_then(|t| t.vector("E"))
            .and_then(|t| t.vector("H"))
            .and_then(|t| t.vector("D"))
            .and_then(|t| t.vector("B"))
            .expect("fresh table");
        t.declare("xhat", SymbolKind::FixedVector([one, zero.clone(), zero]))
            .expect("fresh table");
        t.define("kappa", "eps*mu - 1")
            .and_then(|t| t.define("v", "beta*xhat"))
            .and_then(|t| t.define("S", "(1/(4*pi))*cross(E,H)"))
            .expect("built-in definitions parse")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conflicting_kinds_rejected() {
        let mut t = SymbolTable::new().scalar("a").unwrap();
        assert!(matches!(
            t.declare("a", SymbolKind::Vector),
            Err(ExprError::ConflictingDeclaration(_))
        ));
        assert!(t.declare("a", SymbolKind::Scalar).is_ok());
        assert!(t.declare("pi", SymbolKind::Scalar).is_err());
    }

    #[test]
    fn expand_is_recursive() {
        let t = SymbolTable::moving_media();
        let e = parse("dot(v,S)*kappa", &t).unwrap();
        let x = t.expand(&e).unwrap();
        for name in ["v", "S", "kappa"] {
            assert!(!x.contains_symbol(name), "{name} left in {x}");
        }
        assert!(x.contains_symbol("beta"));
        assert!(x.contains_symbol("xhat"));
    }
}
