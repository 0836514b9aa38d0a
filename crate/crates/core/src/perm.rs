use itertools::Itertools;

use crate::error::{Result, WbError};

/// A permutation of `[n] = {1, …, n}`, stored as the value list
/// `images[i-1] = σ(i)`.
///
/// The workbench composes permutations diagrammatically: `σ.then(τ)` is
/// "apply σ, then τ", so the right-action law reads
/// `(x·σ)·τ = x·(σ.then(τ))`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Perm {
    images: Vec<usize>,
}

impl Perm {
    pub fn identity(n: usize) -> Self {
        Perm { images: (1..=n).collect() }
    }

    /// Builds a permutation from 1-based images, validating bijectivity.
    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &v in &images {
            if v == 0 || v > n || seen[v - 1] {
                return Err(WbError::Precondition(format!(
                    "images {images:?} are not a bijection of [{n}]"
                )));
            }
            seen[v - 1] = true;
        }
        Ok(Perm { images })
    }

    /// The permutation ranking the given (distinct) values: `result(i)` is
    /// the 1-based rank of `values[i-1]` within the list. This is the `σ[h]`
    /// of the matching-object action: it preserves relative order.
    pub fn ranks(values: &[usize]) -> Self {
        let images = values
            .iter()
            .map(|v| 1 + values.iter().filter(|w| *w < v).count())
            .collect();
        Perm { images }
    }

    pub fn arity(&self) -> usize {
        self.images.len()
    }

    /// 1-based application.
    pub fn apply(&self, i: usize) -> usize {
        self.images[i - 1]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// Diagrammatic composite: `self.then(other)(i) = other(self(i))`.
    pub fn then(&self, other: &Perm) -> Perm {
        Perm { images: self.images.iter().map(|&v| other.apply(v)).collect() }
    }

    pub fn inverse(&self) -> Perm {
        let mut images = vec![0; self.images.len()];
        for (i, &v) in self.images.iter().enumerate() {
            images[v - 1] = i + 1;
        }
        Perm { images }
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &v)| v == i + 1)
    }

    /// All `n!` permutations of `[n]`, in lexicographic order of images.
    pub fn all(n: usize) -> Vec<Perm> {
        (1..=n).permutations(n).map(|images| Perm { images }).collect()
    }

    /// Block composition `σ(τ₁, …, τₙ)`: block `j` (of size `τ_j.arity()`)
    /// is sent where input `j` goes under `σ`, permuted internally by `τ_j`.
    pub fn block(&self, blocks: &[Perm]) -> Result<Perm> {
        let n = self.arity();
        if blocks.len() != n {
            return Err(WbError::Precondition(format!(
                "block composition of a {n}-ary permutation with {} blocks",
                blocks.len()
            )));
        }
        let sizes: Vec<usize> = blocks.iter().map(|b| b.arity()).collect();
        let mut images = Vec::with_capacity(sizes.iter().sum());
        for (j, tau) in blocks.iter().enumerate() {
            let offset: usize = (0..n)
                .filter(|&jp| self.images[jp] < self.images[j])
                .map(|jp| sizes[jp])
                .sum();
            for r in 1..=tau.arity() {
                images.push(offset + tau.apply(r));
            }
        }
        Ok(Perm { images })
    }

    /// Operadic insertion `σ ∘ᵢ τ`: block composition with identity blocks
    /// everywhere except slot `i` (1-based).
    pub fn insert(&self, i: usize, tau: &Perm) -> Result<Perm> {
        let n = self.arity();
        if i == 0 || i > n {
            return Err(WbError::Precondition(format!("insert position {i} not in [{n}]")));
        }
        let blocks: Vec<Perm> = (1..=n)
            .map(|j| if j == i { tau.clone() } else { Perm::identity(1) })
            .collect();
        self.block(&blocks)
    }
}

impl std::fmt::Display for Perm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({})", self.images.iter().join(" "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compose_and_invert() {
        let s = Perm::from_images(vec![2, 3, 1]).unwrap();
        assert_eq!(s.then(&s.inverse()), Perm::identity(3));
        assert_eq!(s.inverse().then(&s), Perm::identity(3));
        let t = Perm::from_images(vec![1, 3, 2]).unwrap();
        // then is diagrammatic: (s.then(t))(1) = t(s(1)) = t(2) = 3
        assert_eq!(s.then(&t).apply(1), 3);
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(Perm::all(0).len(), 1);
        assert_eq!(Perm::all(4).len(), 24);
    }

    #[test]
    fn ranks_preserve_relative_order() {
        let p = Perm::ranks(&[5, 2, 9]);
        assert_eq!(p.images(), &[2, 1, 3]);
    }

    #[test]
    fn block_with_identities_is_self() {
        for sigma in Perm::all(3) {
            let ids = vec![Perm::identity(1); 3];
            assert_eq!(sigma.block(&ids).unwrap(), sigma);
        }
    }

    #[test]
    fn block_composition_example() {
        // swap(id₁, e₂) sends the singleton block after the size-2 block.
        let swap = Perm::from_images(vec![2, 1]).unwrap();
        let pi = swap.block(&[Perm::identity(1), Perm::identity(2)]).unwrap();
        assert_eq!(pi.images(), &[3, 1, 2]);
    }

    #[test]
    fn insert_identity_units() {
        let s = Perm::from_images(vec![3, 1, 2]).unwrap();
        assert_eq!(s.insert(2, &Perm::identity(1)).unwrap(), s);
        assert_eq!(Perm::identity(1).insert(1, &s).unwrap(), s);
    }
}
