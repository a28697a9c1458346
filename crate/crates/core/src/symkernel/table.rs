use super::expr::Symbol;
use crate::scalar::Func;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SymbolError {
    #[error("symbol `{0}` is declared more than once")]
    Duplicate(String),
    #[error("`{0}` is not a valid identifier")]
    InvalidName(String),
    #[error("`{0}` is reserved for a function name")]
    Reserved(String),
    #[error("expected at least one coordinate")]
    NoCoordinates,
    #[error("{coords} coordinates but {momenta} momenta")]
    LengthMismatch { coords: usize, momenta: usize },
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// The symbols a model is written in: coordinates `q`, momenta `p`, the
/// updated momenta `P` used by the generating function, parameters, and the
/// timestep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolTable {
    coords: Vec<Symbol>,
    momenta: Vec<Symbol>,
    new_momenta: Vec<Symbol>,
    params: Vec<Symbol>,
    tau: Symbol,
}

impl SymbolTable {
    /// Builds a table. The `P` names are derived from the momentum names by
    /// upper-casing their first letter (`p0` becomes `P0`); the timestep is
    /// `tau`. Either gets trailing underscores if the name is already taken.
    pub fn new(coords: &[&str], momenta: &[&str], params: &[&str]) -> Result<SymbolTable, SymbolError> {
        if coords.is_empty() {
            return Err(SymbolError::NoCoordinates);
        }
        if coords.len() != momenta.len() {
            return Err(SymbolError::LengthMismatch {
                coords: coords.len(),
                momenta: momenta.len(),
            });
        }
        let mut taken: Vec<String> = Vec::new();
        for name in coords.iter().chain(momenta).chain(params) {
            if !is_identifier(name) {
                return Err(SymbolError::InvalidName(name.to_string()));
            }
            if Func::from_name(name).is_some() {
                return Err(SymbolError::Reserved(name.to_string()));
            }
            if taken.iter().any(|t| t == name) {
                return Err(SymbolError::Duplicate(name.to_string()));
            }
            taken.push(name.to_string());
        }
        let fresh = |base: String, taken: &mut Vec<String>| {
            let mut name = base;
            while taken.contains(&name) {
                name.push('_');
            }
            taken.push(name.clone());
            Symbol::new(&name)
        };
        let new_momenta = momenta
            .iter()
            .map(|p| {
                let mut cs = p.chars();
                let first = cs.next().unwrap().to_ascii_uppercase();
                fresh(std::iter::once(first).chain(cs).collect(), &mut taken)
            })
            .collect();
        let tau = fresh("tau".to_string(), &mut taken);
        Ok(SymbolTable {
            coords: coords.iter().map(|s| Symbol::new(s)).collect(),
            momenta: momenta.iter().map(|s| Symbol::new(s)).collect(),
            new_momenta,
            params: params.iter().map(|s| Symbol::new(s)).collect(),
            tau,
        })
    }

    /// Number of degrees of freedom (half the phase-space dimension).
    pub fn degrees(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Symbol] {
        &self.coords
    }

    pub fn momenta(&self) -> &[Symbol] {
        &self.momenta
    }

    pub fn new_momenta(&self) -> &[Symbol] {
        &self.new_momenta
    }

    pub fn params(&self) -> &[Symbol] {
        &self.params
    }

    pub fn tau(&self) -> &Symbol {
        &self.tau
    }

    pub fn lookup(&self, name: &str) -> Option<&Symbol> {
        self.coords
            .iter()
            .chain(&self.momenta)
            .chain(&self.new_momenta)
            .chain(&self.params)
            .chain(std::iter::once(&self.tau))
            .find(|s| s.name() == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derives_capital_momenta_and_tau() {
        let t = SymbolTable::new(&["q0", "q1"], &["p0", "p1"], &["alpha"]).unwrap();
        assert_eq!(t.new_momenta()[1].name(), "P1");
        assert_eq!(t.tau().name(), "tau");
        assert!(t.lookup("alpha").is_some());
    }

    #[test]
    fn avoids_collisions() {
        let t = SymbolTable::new(&["q"], &["p"], &["P", "tau"]).unwrap();
        assert_eq!(t.new_momenta()[0].name(), "P_");
        assert_eq!(t.tau().name(), "tau_");
    }

    #[test]
    fn rejects_bad_tables() {
        assert_eq!(
            SymbolTable::new(&["q", "q"], &["p", "r"], &[]),
            Err(SymbolError::Duplicate("q".into()))
        );
        assert!(matches!(
            SymbolTable::new(&["q"], &[], &[]),
            Err(SymbolError::LengthMismatch { .. })
        ));
        assert_eq!(SymbolTable::new(&[], &[], &[]), Err(SymbolError::NoCoordinates));
        assert!(matches!(SymbolTable::new(&["sin"], &["p"], &[]), Err(SymbolError::Reserved(_))));
        assert!(matches!(SymbolTable::new(&["1q"], &["p"], &[]), Err(SymbolError::InvalidName(_))));
    }
}
