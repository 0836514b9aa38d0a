use itertools::Itertools;

use crate::error::{Result, WbError};
use crate::perm::Perm;

/// An order-preserving injection `h: [ℓ] → [n]`, stored as the strictly
/// increasing 1-based value list `images[i-1] = h(i)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OrderInj {
    target: usize,
    images: Vec<usize>,
}

impl OrderInj {
    pub fn new(target: usize, images: Vec<usize>) -> Result<Self> {
        for w in images.windows(2) {
            if w[0] >= w[1] {
                return Err(WbError::Precondition(format!(
                    "images {images:?} are not strictly increasing"
                )));
            }
        }
        if let Some(&last) = images.last() {
            if last > target || images[0] == 0 {
                return Err(WbError::Precondition(format!(
                    "images {images:?} do not land in [{target}]"
                )));
            }
        }
        Ok(OrderInj { target, images })
    }

    pub fn identity(n: usize) -> Self {
        OrderInj { target: n, images: (1..=n).collect() }
    }

    /// The generator `s_i: [n-1] → [n]` skipping the value `i`.
    pub fn skip(n: usize, i: usize) -> Result<Self> {
        if i == 0 || i > n {
            return Err(WbError::Precondition(format!("skip value {i} not in [{n}]")));
        }
        Ok(OrderInj { target: n, images: (1..=n).filter(|&v| v != i).collect() })
    }

    pub fn source(&self) -> usize {
        self.images.len()
    }

    pub fn target(&self) -> usize {
        self.target
    }

    /// 1-based application.
    pub fn apply(&self, i: usize) -> usize {
        self.images[i - 1]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn is_identity(&self) -> bool {
        self.source() == self.target
    }

    /// Diagrammatic composite `self.then(g) = g ∘ self`.
    pub fn then(&self, g: &OrderInj) -> Result<OrderInj> {
        if self.target != g.source() {
            return Err(WbError::Precondition(format!(
                "cannot compose [{}]→[{}] with [{}]→[{}]",
                self.source(),
                self.target,
                g.source(),
                g.target
            )));
        }
        Ok(OrderInj {
            target: g.target,
            images: self.images.iter().map(|&v| g.apply(v)).collect(),
        })
    }

    /// The complementary injection `h_c: [n-ℓ] → [n]` onto `[n] ∖ Im(h)`.
    pub fn complement(&self) -> OrderInj {
        let images = (1..=self.target).filter(|v| !self.images.contains(v)).collect();
        OrderInj { target: self.target, images }
    }

    /// Whether `v` lies in the image.
    pub fn hits(&self, v: usize) -> bool {
        self.images.contains(&v)
    }

    /// Writes `self = s_j ∘ h'` with `j` the largest value missing from the
    /// image; `None` if `self` is an identity. Used to push contravariant
    /// actions down to the `s_i*` generators.
    pub fn split_top_skip(&self) -> Option<(usize, OrderInj)> {
        let j = (1..=self.target).rev().find(|v| !self.hits(*v))?;
        let images = self
            .images
            .iter()
            .map(|&v| if v > j { v - 1 } else { v })
            .collect();
        Some((j, OrderInj { target: self.target - 1, images }))
    }
}

impl std::fmt::Display for OrderInj {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}]→[{}]:{{{}}}", self.source(), self.target, self.images.iter().join(" "))
    }
}

/// All order-preserving injections `[ℓ] → [n]`, lexicographically sorted by
/// image; there are `binom(n, ℓ)` of them, and none when `ℓ > n`.
pub fn enumerate_order_injections(l: usize, n: usize) -> Vec<OrderInj> {
    (1..=n)
        .combinations(l)
        .map(|images| OrderInj { target: n, images })
        .collect()
}

/// All proper order-preserving injections into `[n]` (source `< n`).
pub fn enumerate_proper_injections(n: usize) -> Vec<OrderInj> {
    (0..n).flat_map(|l| enumerate_order_injections(l, n)).collect()
}

/// The index `ε_{h;i} ∈ [n-ℓ]` with `(h ∘ s_i)_c ∘ s_{ε_{h;i}} = h_c`,
/// for `h: [ℓ+1] → [n]` and `s_i: [ℓ] → [ℓ+1]`.
pub fn epsilon_index(h: &OrderInj, i: usize) -> Result<usize> {
    let l1 = h.source();
    if i == 0 || i > l1 {
        return Err(WbError::Precondition(format!("position {i} not in [{l1}]")));
    }
    let si = OrderInj::skip(l1, i)?;
    let hsi_c = si.then(h)?.complement();
    let hc = h.complement();
    for eps in 1..=hsi_c.source() {
        let s_eps = OrderInj::skip(hsi_c.source(), eps)?;
        if s_eps.then(&hsi_c)? == hc {
            return Ok(eps);
        }
    }
    Err(WbError::Precondition(format!("no ε index for h={h}, i={i}")))
}

/// The index `ϑ_{h;i}` with `s_i ∘ h_c = (s_i ∘ h)_c ∘ s_{ϑ_{h;i}}`,
/// for `h: [ℓ] → [n-1]` and `s_i: [n-1] → [n]`.
pub fn theta_index(h: &OrderInj, i: usize) -> Result<usize> {
    let n = h.target() + 1;
    if i == 0 || i > n {
        return Err(WbError::Precondition(format!("skip value {i} not in [{n}]")));
    }
    let si = OrderInj::skip(n, i)?;
    let lhs = h.complement().then(&si)?;
    let sih_c = h.then(&si)?.complement();
    for theta in 1..=sih_c.source() {
        let s_theta = OrderInj::skip(sih_c.source(), theta)?;
        if s_theta.then(&sih_c)? == lhs {
            return Ok(theta);
        }
    }
    Err(WbError::Precondition(format!("no ϑ index for h={h}, i={i}")))
}

/// The action of `σ ∈ Σ_n` on `h: [ℓ] → [n]`: returns `(h·σ, σ[h])` where
/// `h·σ` is the unique order-preserving injection with image `σ(Im h)` and
/// `σ[h] ∈ Σ_ℓ` preserves relative order: `σ[h](i) < σ[h](j)` iff
/// `σ(h(i)) < σ(h(j))`. These satisfy `(h·σ) ∘ σ[h] = σ ∘ h`.
pub fn inj_action(h: &OrderInj, sigma: &Perm) -> Result<(OrderInj, Perm)> {
    if sigma.arity() != h.target() {
        return Err(WbError::Precondition(format!(
            "permutation of [{}] cannot act on injection into [{}]",
            sigma.arity(),
            h.target()
        )));
    }
    let moved: Vec<usize> = h.images().iter().map(|&v| sigma.apply(v)).collect();
    let mut images = moved.clone();
    images.sort_unstable();
    let h_sigma = OrderInj { target: h.target(), images };
    Ok((h_sigma, Perm::ranks(&moved)))
}

/// The extension `σ_h ∈ Σ_m` of `σ ∈ Σ_n` along `h: [n] → [m]`:
/// `σ_h(h(j)) = h(σ(j))` and the identity off the image.
pub fn sigma_extension(sigma: &Perm, h: &OrderInj) -> Result<Perm> {
    if sigma.arity() != h.source() {
        return Err(WbError::Precondition(format!(
            "permutation of [{}] cannot extend along injection from [{}]",
            sigma.arity(),
            h.source()
        )));
    }
    let mut images: Vec<usize> = (1..=h.target()).collect();
    for j in 1..=h.source() {
        images[h.apply(j) - 1] = h.apply(sigma.apply(j));
    }
    Perm::from_images(images)
}

/// A general injection, in the fixed factorization convention
/// "order-preserving ∘ permutation": the composite is `mono ∘ perm`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Inj {
    pub perm: Perm,
    pub mono: OrderInj,
}

impl Inj {
    /// Factors an arbitrary injective value list `[ℓ] → [n]`.
    pub fn factor(target: usize, values: &[usize]) -> Result<Inj> {
        let mut sorted = values.to_vec();
        sorted.sort_unstable();
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                return Err(WbError::Precondition(format!("values {values:?} not injective")));
            }
        }
        let mono = OrderInj::new(target, sorted)?;
        let perm = Perm::ranks(values);
        Ok(Inj { perm, mono })
    }

    pub fn apply(&self, i: usize) -> usize {
        self.mono.apply(self.perm.apply(i))
    }

    pub fn source(&self) -> usize {
        self.perm.arity()
    }

    pub fn target(&self) -> usize {
        self.mono.target()
    }
}
