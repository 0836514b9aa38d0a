use std::fmt;

use crate::error::{Result, WbError};

/// An opaque element name. Atoms carry a global total order (lexicographic
/// on the name) used everywhere quotients pick canonical representatives.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom(String);

impl Atom {
    pub fn new(name: impl Into<String>) -> Self {
        Atom(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Atom {
    fn from(s: &str) -> Self {
        Atom::new(s)
    }
}

impl From<String> for Atom {
    fn from(s: String) -> Self {
        Atom::new(s)
    }
}

/// A finite set of atoms in canonical (sorted) order — the stand-in for a
/// topological space.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct FiniteSpace {
    elements: Vec<Atom>,
}

impl FiniteSpace {
    /// Builds a space, sorting into canonical order. Duplicates are rejected.
    pub fn new(mut elements: Vec<Atom>) -> Result<Self> {
        elements.sort();
        for w in elements.windows(2) {
            if w[0] == w[1] {
                return Err(WbError::Precondition(format!(
                    "duplicate atom `{}` in finite space",
                    w[0]
                )));
            }
        }
        Ok(FiniteSpace { elements })
    }

    pub fn empty() -> Self {
        FiniteSpace::default()
    }

    /// The one-point space on the given atom.
    pub fn singleton(a: Atom) -> Self {
        FiniteSpace { elements: vec![a] }
    }

    /// A space `prefix0, prefix1, …` of the requested size.
    pub fn named(prefix: &str, size: usize) -> Self {
        FiniteSpace::new((0..size).map(|i| Atom::new(format!("{prefix}{i}"))).collect())
            .expect("generated names are distinct")
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, a: &Atom) -> bool {
        self.elements.binary_search(a).is_ok()
    }

    /// Canonical position of an atom.
    pub fn index_of(&self, a: &Atom) -> Result<usize> {
        self.elements
            .binary_search(a)
            .map_err(|_| WbError::Undefined(format!("atom `{a}` not in space")))
    }

    pub fn get(&self, i: usize) -> &Atom {
        &self.elements[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Atom> {
        self.elements.iter()
    }

    pub fn elements(&self) -> &[Atom] {
        &self.elements
    }
}

impl FromIterator<Atom> for FiniteSpace {
    fn from_iter<I: IntoIterator<Item = Atom>>(iter: I) -> Self {
        let mut elements: Vec<Atom> = iter.into_iter().collect();
        elements.sort();
        elements.dedup();
        FiniteSpace { elements }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atoms_order_lexicographically() {
        assert!(Atom::new("a") < Atom::new("b"));
        assert!(Atom::new("a10") < Atom::new("a2"));
    }

    #[test]
    fn space_is_sorted_and_rejects_duplicates() {
        let s = FiniteSpace::new(vec![Atom::new("b"), Atom::new("a")]).unwrap();
        assert_eq!(s.elements(), &[Atom::new("a"), Atom::new("b")]);
        assert!(FiniteSpace::new(vec![Atom::new("x"), Atom::new("x")]).is_err());
    }

    #[test]
    fn index_lookup() {
        let s = FiniteSpace::named("e", 3);
        assert_eq!(s.index_of(&Atom::new("e1")).unwrap(), 1);
        assert!(s.index_of(&Atom::new("zz")).is_err());
    }
}
