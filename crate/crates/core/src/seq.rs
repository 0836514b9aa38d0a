use std::collections::BTreeMap;

use itertools::Itertools;

use crate::error::{Result, WbError};
use crate::inj::{
    enumerate_order_injections, enumerate_proper_injections, inj_action, sigma_extension,
    OrderInj,
};
use crate::perm::Perm;
use crate::space::{Atom, FiniteSpace};

/// An arity-indexed family of finite spaces with a right symmetric-group
/// action. Missing arities are *undefined* (not materialized), which is
/// different from a defined empty component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymSeq {
    components: BTreeMap<usize, FiniteSpace>,
    /// `action[n][σ][elem index] = image index`.
    action: BTreeMap<usize, BTreeMap<Perm, Vec<usize>>>,
    unit: Option<Atom>,
    truncation: Option<usize>,
}

impl SymSeq {
    pub fn new() -> Self {
        SymSeq {
            components: BTreeMap::new(),
            action: BTreeMap::new(),
            unit: None,
            truncation: None,
        }
    }

    /// Inserts a component together with its action, tabulating `act` over
    /// all of `Σ_n`.
    pub fn insert_component(
        &mut self,
        n: usize,
        space: FiniteSpace,
        act: impl Fn(&Atom, &Perm) -> Atom,
    ) -> Result<()> {
        let mut table = BTreeMap::new();
        for sigma in Perm::all(n) {
            let mut images = Vec::with_capacity(space.len());
            for a in space.iter() {
                let b = act(a, &sigma);
                images.push(space.index_of(&b).map_err(|_| {
                    WbError::Precondition(format!(
                        "action of {sigma} sends `{a}` outside the component"
                    ))
                })?);
            }
            table.insert(sigma, images);
        }
        self.components.insert(n, space);
        self.action.insert(n, table);
        Ok(())
    }

    /// Inserts a component on which every permutation acts trivially.
    pub fn insert_trivial(&mut self, n: usize, space: FiniteSpace) {
        self.insert_component(n, space, |a, _| a.clone())
            .expect("trivial action stays inside the component");
    }

    /// The terminal sequence: one point in every arity `≤ max_arity`.
    pub fn terminal(max_arity: usize) -> Self {
        let mut seq = SymSeq::new();
        for n in 0..=max_arity {
            seq.insert_trivial(n, FiniteSpace::singleton(Atom::new("*")));
        }
        seq.unit = Some(Atom::new("*"));
        seq
    }

    /// The empty sequence, defined (and empty) in every arity `≤ max_arity`.
    pub fn empty(max_arity: usize) -> Self {
        let mut seq = SymSeq::new();
        for n in 0..=max_arity {
            seq.insert_trivial(n, FiniteSpace::empty());
        }
        seq
    }

    /// One component in a single arity, trivial action.
    pub fn concentrated(n: usize, space: FiniteSpace) -> Self {
        let mut seq = SymSeq::new();
        seq.insert_trivial(n, space);
        seq
    }

    /// The monoidal unit 𝟙: a point in arity 1 and nothing elsewhere
    /// (defined empty in arities `≤ max_arity`).
    pub fn one(max_arity: usize) -> Self {
        let mut seq = SymSeq::new();
        for n in 0..=max_arity {
            if n == 1 {
                seq.insert_trivial(1, FiniteSpace::singleton(Atom::new("*1")));
            } else {
                seq.insert_trivial(n, FiniteSpace::empty());
            }
        }
        seq.unit = Some(Atom::new("*1"));
        seq
    }

    pub fn set_unit(&mut self, unit: Atom) -> Result<()> {
        match self.components.get(&1) {
            Some(c) if c.contains(&unit) => {
                self.unit = Some(unit);
                Ok(())
            }
            _ => Err(WbError::Precondition(format!("unit `{unit}` not in arity-1 component"))),
        }
    }

    pub fn unit(&self) -> Option<&Atom> {
        self.unit.as_ref()
    }

    pub fn truncation(&self) -> Option<usize> {
        self.truncation
    }

    pub fn arities(&self) -> impl Iterator<Item = usize> + '_ {
        self.components.keys().copied()
    }

    pub fn max_arity(&self) -> Option<usize> {
        self.components.keys().next_back().copied()
    }

    pub fn component(&self, n: usize) -> Option<&FiniteSpace> {
        self.components.get(&n)
    }

    pub fn component_or_err(&self, n: usize) -> Result<&FiniteSpace> {
        self.components
            .get(&n)
            .ok_or_else(|| WbError::Undefined(format!("component in arity {n} not materialized")))
    }

    /// Right action `x · σ`.
    pub fn act(&self, n: usize, x: &Atom, sigma: &Perm) -> Result<Atom> {
        if sigma.arity() != n {
            return Err(WbError::Precondition(format!(
                "permutation {sigma} does not act on arity {n}"
            )));
        }
        let space = self.component_or_err(n)?;
        let table = self
            .action
            .get(&n)
            .and_then(|t| t.get(sigma))
            .ok_or_else(|| WbError::Undefined(format!("no action table for {sigma} in arity {n}")))?;
        Ok(space.get(table[space.index_of(x)?]).clone())
    }

    /// Retains arities `≤ r`; idempotent.
    pub fn truncate(&self, r: usize) -> SymSeq {
        SymSeq {
            components: self.components.range(..=r).map(|(k, v)| (*k, v.clone())).collect(),
            action: self.action.range(..=r).map(|(k, v)| (*k, v.clone())).collect(),
            unit: if r >= 1 { self.unit.clone() } else { None },
            truncation: Some(r),
        }
    }

    /// Verifies the right-action law `(x·σ)·τ = x·(σ.then(τ))` and unitality
    /// on every materialized component.
    pub fn check_action_laws(&self) -> Result<()> {
        for (&n, space) in &self.components {
            for x in space.iter() {
                if self.act(n, x, &Perm::identity(n))? != *x {
                    return Err(WbError::Precondition(format!(
                        "identity permutation moves `{x}` in arity {n}"
                    )));
                }
                for sigma in Perm::all(n) {
                    let xs = self.act(n, x, &sigma)?;
                    for tau in Perm::all(n) {
                        let lhs = self.act(n, &xs, &tau)?;
                        let rhs = self.act(n, x, &sigma.then(&tau))?;
                        if lhs != rhs {
                            return Err(WbError::Precondition(format!(
                                "action law fails in arity {n} at `{x}`, σ={sigma}, τ={tau}"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

impl Default for SymSeq {
    fn default() -> Self {
        SymSeq::new()
    }
}

/// A Σ-sequence with a contravariant injection action generated by the
/// restriction maps `s_i*: X(n) → X(n-1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LamSeq {
    sym: SymSeq,
    /// `rest[(n, i)][elem index] = image index` in arity `n-1`.
    rest: BTreeMap<(usize, usize), Vec<usize>>,
}

impl LamSeq {
    /// Wraps a Σ-sequence, tabulating the generator maps from `gen`.
    /// Generators are tabulated for every pair of consecutive materialized
    /// arities.
    pub fn new(sym: SymSeq, gen: impl Fn(usize, usize, &Atom) -> Atom) -> Result<Self> {
        let mut rest = BTreeMap::new();
        for n in sym.arities().collect::<Vec<_>>() {
            if n == 0 || sym.component(n - 1).is_none() {
                continue;
            }
            let space = sym.component(n).unwrap();
            let below = sym.component(n - 1).unwrap();
            for i in 1..=n {
                let mut images = Vec::with_capacity(space.len());
                for x in space.iter() {
                    let y = gen(n, i, x);
                    images.push(below.index_of(&y).map_err(|_| {
                        WbError::Precondition(format!(
                            "s_{i}* sends `{x}` outside the arity-{} component",
                            n - 1
                        ))
                    })?);
                }
                rest.insert((n, i), images);
            }
        }
        Ok(LamSeq { sym, rest })
    }

    pub fn terminal(max_arity: usize) -> Self {
        LamSeq::new(SymSeq::terminal(max_arity), |_, _, a| a.clone())
            .expect("terminal restrictions are defined")
    }

    pub fn sym(&self) -> &SymSeq {
        &self.sym
    }

    pub fn component(&self, n: usize) -> Option<&FiniteSpace> {
        self.sym.component(n)
    }

    pub fn act(&self, n: usize, x: &Atom, sigma: &Perm) -> Result<Atom> {
        self.sym.act(n, x, sigma)
    }

    /// The generator `s_i*: X(n) → X(n-1)`.
    pub fn restrict_gen(&self, n: usize, i: usize, x: &Atom) -> Result<Atom> {
        let space = self.sym.component_or_err(n)?;
        let below = self.sym.component_or_err(n - 1)?;
        let table = self
            .rest
            .get(&(n, i))
            .ok_or_else(|| WbError::Undefined(format!("s_{i}* not materialized in arity {n}")))?;
        Ok(below.get(table[space.index_of(x)?]).clone())
    }

    /// Contravariant action `h*: X(n) → X(ℓ)` of an order-preserving
    /// injection, computed by peeling top skips: `(s_j ∘ h')* = h'* ∘ s_j*`.
    pub fn restrict(&self, h: &OrderInj, x: &Atom) -> Result<Atom> {
        match h.split_top_skip() {
            None => Ok(x.clone()),
            Some((j, rest)) => {
                let y = self.restrict_gen(h.target(), j, x)?;
                self.restrict(&rest, &y)
            }
        }
    }

    /// Full contravariant action of a general injection `u = mono ∘ perm`:
    /// `u*(x) = (mono*(x)) · perm`.
    pub fn contra(&self, mono: &OrderInj, perm: &Perm, x: &Atom) -> Result<Atom> {
        let y = self.restrict(mono, x)?;
        self.sym.act(mono.source(), &y, perm)
    }

    pub fn truncate(&self, r: usize) -> LamSeq {
        LamSeq {
            sym: self.sym.truncate(r),
            rest: self
                .rest
                .iter()
                .filter(|((n, _), _)| *n <= r)
                .map(|(k, v)| (*k, v.clone()))
                .collect(),
        }
    }

    /// Functoriality on order-preserving composites: `(u∘v)* = v* ∘ u*`
    /// within the materialized arities, capped at `max_arity`.
    pub fn check_order_functoriality(&self, max_arity: usize) -> Result<()> {
        let arities: Vec<usize> = self.sym.arities().filter(|&n| n <= max_arity).collect();
        for &n in &arities {
            for &l in arities.iter().filter(|&&l| l <= n) {
                for u in enumerate_order_injections(l, n) {
                    for &k in arities.iter().filter(|&&k| k <= l) {
                        for v in enumerate_order_injections(k, l) {
                            let uv = v.then(&u)?;
                            for x in self.sym.component(n).unwrap().iter() {
                                let lhs = self.restrict(&uv, x)?;
                                let rhs = self.restrict(&v, &self.restrict(&u, x)?)?;
                                if lhs != rhs {
                                    return Err(WbError::Precondition(format!(
                                        "functoriality fails at `{x}`: u={u}, v={v}"
                                    )));
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Full validity sweep for a contravariant structure on injections:
    /// order functoriality, the action laws, and the exchange relation
    /// `(u·σ)*(x·σ) = (u*(x))·σ[u]`, which is how the factorization
    /// `(u·σ) ∘ σ[u]` interacts with the right-action convention.
    pub fn check_functoriality(&self, max_arity: usize) -> Result<()> {
        self.sym.check_action_laws()?;
        self.check_order_functoriality(max_arity)?;
        let arities: Vec<usize> = self.sym.arities().filter(|&n| n <= max_arity).collect();
        for &n in &arities {
            for &l in arities.iter().filter(|&&l| l <= n) {
                for u in enumerate_order_injections(l, n) {
                    for sigma in Perm::all(n) {
                        let (u_sigma, sigma_u) = inj_action(&u, &sigma)?;
                        for x in self.sym.component(n).unwrap().iter() {
                            let lhs = self.restrict(&u_sigma, &self.sym.act(n, x, &sigma)?)?;
                            let rhs = self.act(l, &self.restrict(&u, x)?, &sigma_u)?;
                            if lhs != rhs {
                                return Err(WbError::Precondition(format!(
                                    "exchange relation fails at `{x}`: u={u}, σ={sigma}"
                                )));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

fn lam_atom(h: &OrderInj, x: &Atom) -> Atom {
    Atom::new(format!(
        "(lam (h {} {}) {})",
        h.target(),
        h.images().iter().join(" "),
        x
    ))
}

/// The value of `Λ[X]` / `∂Λ[Y]` on one arity, as pairs `(h; x)`.
fn lambda_component(x_seq: &SymSeq, n: usize, strict: bool) -> FiniteSpace {
    let mut atoms = Vec::new();
    for m in x_seq.arities() {
        if m < n || (strict && m == n) {
            continue;
        }
        if let Some(space) = x_seq.component(m) {
            for h in enumerate_order_injections(n, m) {
                for x in space.iter() {
                    atoms.push(lam_atom(&h, x));
                }
            }
        }
    }
    FiniteSpace::new(atoms).expect("pairs (h;x) are distinct")
}

fn parse_lam_atom(a: &Atom) -> (OrderInj, Atom) {
    // Atoms produced by `lam_atom` only; parsed back structurally.
    let s = a.as_str();
    let inner = &s[5..s.len() - 1];
    let close = inner.find(')').unwrap();
    let mut nums = inner[3..close].split_whitespace().map(|t| t.parse::<usize>().unwrap());
    let target = nums.next().unwrap();
    let images: Vec<usize> = nums.collect();
    let x = Atom::new(inner[close + 2..].to_string());
    (OrderInj::new(target, images).unwrap(), x)
}

fn lambda_like(x_seq: &SymSeq, strict: bool) -> Result<LamSeq> {
    let max = x_seq.max_arity().unwrap_or(0);
    let mut sym = SymSeq::new();
    let top = if strict { max.saturating_sub(1) } else { max };
    for n in 0..=top {
        let space = lambda_component(x_seq, n, strict);
        sym.insert_component(n, space, |a, sigma| {
            // σ*(h; x) = (h; x · σ_h)
            let (h, x) = parse_lam_atom(a);
            let ext = sigma_extension(sigma, &h).expect("σ extends along h");
            let xs = x_seq.act(h.target(), &x, &ext).expect("action defined");
            lam_atom(&h, &xs)
        })?;
    }
    LamSeq::new(sym, |n, i, a| {
        // s_i*(h; x) = (h ∘ s_i; x)
        let (h, x) = parse_lam_atom(a);
        let si = OrderInj::skip(n, i).expect("valid skip");
        lam_atom(&si.then(&h).expect("composable"), &x)
    })
}

/// The free Λ-sequence `Λ[X](n) = ⊔_{m ≥ n} Λ₊([n];[m]) × X(m)` on a
/// Σ-sequence, with actions `σ*(h;x) = (h; x·σ_h)` and
/// `s_i*(h;x) = (h∘s_i; x)`.
pub fn lambda_extend(x_seq: &SymSeq) -> Result<LamSeq> {
    lambda_like(x_seq, false)
}

/// The boundary variant `∂Λ[Y](n) = ⊔_{ℓ > n} Λ₊([n];[ℓ]) × Y(ℓ)`,
/// a componentwise subsequence of `Λ[Y]`.
pub fn boundary_lambda(y_seq: &SymSeq) -> Result<LamSeq> {
    lambda_like(y_seq, true)
}

/// A matching object `𝓜(X)(n)`: the limit of `X` over proper
/// order-preserving injections into `[n]`, with its `Σ_n`-action.
#[derive(Debug, Clone)]
pub struct MatchingObject {
    pub arity: usize,
    pub space: FiniteSpace,
    /// For each family atom, its value at every proper injection.
    families: BTreeMap<Atom, BTreeMap<OrderInj, Atom>>,
}

fn family_atom(n: usize, family: &BTreeMap<OrderInj, Atom>) -> Atom {
    let parts = (1..=n)
        .map(|i| family[&OrderInj::skip(n, i).unwrap()].to_string())
        .join(" ");
    Atom::new(format!("(mo {parts})"))
}

impl MatchingObject {
    /// The family's value at a proper injection `h`.
    pub fn value(&self, fam: &Atom, h: &OrderInj) -> Result<&Atom> {
        self.families
            .get(fam)
            .and_then(|f| f.get(h))
            .ok_or_else(|| WbError::Undefined(format!("no matching-family value at {h}")))
    }

    /// `σ*(x)` is the family whose value at `h·σ` is `x_h · σ[h]`, so that
    /// the canonical map into the matching object stays equivariant.
    pub fn sigma_act(&self, x_lam: &LamSeq, fam: &Atom, sigma: &Perm) -> Result<Atom> {
        let f = self
            .families
            .get(fam)
            .ok_or_else(|| WbError::Undefined(format!("unknown family `{fam}`")))?;
        let mut moved = BTreeMap::new();
        for h in f.keys() {
            let (h_sigma, sigma_h) = inj_action(h, sigma)?;
            let w = x_lam.act(h.source(), &f[h], &sigma_h)?;
            moved.insert(h_sigma, w);
        }
        let atom = family_atom(self.arity, &moved);
        if !self.space.contains(&atom) {
            return Err(WbError::Precondition(format!(
                "Σ-action image `{atom}` is not a compatible family"
            )));
        }
        Ok(atom)
    }
}

/// Computes `𝓜(X)(n)` by brute-force enumeration of compatible families
/// `{x_h}` with `f*(x_g) = x_{g∘f}`. For `n = 0` the empty limit is a point.
pub fn matching_object(x_lam: &LamSeq, n: usize) -> Result<MatchingObject> {
    if n == 0 {
        let atom = Atom::new("(mo)");
        let mut families = BTreeMap::new();
        families.insert(atom.clone(), BTreeMap::new());
        return Ok(MatchingObject {
            arity: 0,
            space: FiniteSpace::singleton(atom),
            families,
        });
    }
    for l in 0..n {
        x_lam.sym().component_or_err(l)?;
    }
    let top = x_lam.sym().component(n - 1).unwrap();
    let proper = enumerate_proper_injections(n);
    let mut families = BTreeMap::new();
    let mut atoms = Vec::new();
    for choice in (0..n).map(|_| top.elements().iter()).multi_cartesian_product() {
        // A candidate family is determined by its values at the s_i;
        // extend downwards along h = s_j ∘ h' and then check every
        // compatibility f*(x_g) = x_{g∘f}.
        let mut family: BTreeMap<OrderInj, Atom> = BTreeMap::new();
        for (i, x) in choice.iter().enumerate() {
            family.insert(OrderInj::skip(n, i + 1)?, (*x).clone());
        }
        for h in &proper {
            if h.source() == n - 1 {
                continue;
            }
            let (j, rest) = h.split_top_skip().expect("proper injections miss a value");
            let base = family[&OrderInj::skip(n, j)?].clone();
            family.insert(h.clone(), x_lam.restrict(&rest, &base)?);
        }
        let mut compatible = true;
        'outer: for g in &proper {
            for k in 0..g.source() {
                for f in enumerate_order_injections(k, g.source()) {
                    let gf = f.then(g)?;
                    if x_lam.restrict(&f, &family[g])? != family[&gf] {
                        compatible = false;
                        break 'outer;
                    }
                }
            }
        }
        if compatible {
            let atom = family_atom(n, &family);
            atoms.push(atom.clone());
            families.insert(atom, family);
        }
    }
    Ok(MatchingObject {
        arity: n,
        space: FiniteSpace::new(atoms)?,
        families,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_level_fixture() -> LamSeq {
        // X(0) = {a, b}, X(1) = {x, y}, s₁*(x) = a, s₁*(y) = b.
        let mut sym = SymSeq::new();
        sym.insert_trivial(0, FiniteSpace::new(vec![Atom::new("a"), Atom::new("b")]).unwrap());
        sym.insert_trivial(1, FiniteSpace::new(vec![Atom::new("x"), Atom::new("y")]).unwrap());
        LamSeq::new(sym, |_, _, e| {
            if e == &Atom::new("x") {
                Atom::new("a")
            } else {
                Atom::new("b")
            }
        })
        .unwrap()
    }

    #[test]
    fn truncation_is_idempotent() {
        let x = SymSeq::terminal(4);
        let t = x.truncate(2);
        assert_eq!(t.truncate(2), t);
        assert_eq!(x.truncate(3).truncate(2), t);
        assert_eq!(x.truncate(0).arities().collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn lambda_extend_counts_concentrated() {
        // X concentrated in arity 2 with one point.
        let x = SymSeq::concentrated(2, FiniteSpace::singleton(Atom::new("c")));
        let lam = lambda_extend(&x).unwrap();
        assert_eq!(lam.component(0).unwrap().len(), 1);
        assert_eq!(lam.component(1).unwrap().len(), 2);
        assert_eq!(lam.component(2).unwrap().len(), 1);
        assert!(lam.component(3).is_none());
    }

    #[test]
    fn lambda_extend_empty_and_two_points() {
        let lam = lambda_extend(&SymSeq::empty(3)).unwrap();
        for n in 0..=3 {
            assert!(lam.component(n).unwrap().is_empty());
        }
        // Two points in arity 3: |Λ[X](1)| = binom(3,1) · 2 = 6.
        let x = SymSeq::concentrated(3, FiniteSpace::named("p", 2));
        assert_eq!(lambda_extend(&x).unwrap().component(1).unwrap().len(), 6);
    }

    #[test]
    fn boundary_is_componentwise_subset() {
        let x = SymSeq::concentrated(2, FiniteSpace::singleton(Atom::new("c")));
        let full = lambda_extend(&x).unwrap();
        let boundary = boundary_lambda(&x).unwrap();
        assert!(boundary.component(2).is_none());
        assert_eq!(boundary.component(1).unwrap().len(), 2);
        for n in 0..=1 {
            for a in boundary.component(n).unwrap().iter() {
                assert!(full.component(n).unwrap().contains(a));
            }
        }
        let empty = boundary_lambda(&SymSeq::empty(2)).unwrap();
        for n in 0..=1 {
            assert!(empty.component(n).unwrap().is_empty());
        }
    }

    #[test]
    fn lambda_extend_generator_relations() {
        // The pair presentation satisfies the action laws, functoriality on
        // order-preserving maps, and the relation for permutations pushed
        // through a codimension-one restriction:
        // σ'* ∘ s_i* = s_i* ∘ (σ'_{s_i})*.
        let x = SymSeq::concentrated(3, FiniteSpace::named("p", 2));
        let lam = lambda_extend(&x).unwrap();
        lam.sym().check_action_laws().unwrap();
        lam.check_order_functoriality(3).unwrap();
        for n in 1..=3usize {
            for i in 1..=n {
                let si = OrderInj::skip(n, i).unwrap();
                for sigma in Perm::all(n - 1) {
                    let ext = sigma_extension(&sigma, &si).unwrap();
                    for a in lam.component(n).unwrap().iter() {
                        let lhs = lam.act(n - 1, &lam.restrict_gen(n, i, a).unwrap(), &sigma);
                        let rhs =
                            lam.restrict_gen(n, i, &lam.act(n, a, &ext).unwrap());
                        assert_eq!(lhs.unwrap(), rhs.unwrap());
                    }
                }
            }
        }
        two_level_fixture().check_functoriality(1).unwrap();
    }

    #[test]
    fn matching_terminal_is_singleton() {
        let t = LamSeq::terminal(4);
        for n in 0..=4 {
            assert_eq!(matching_object(&t, n).unwrap().space.len(), 1, "arity {n}");
        }
    }

    #[test]
    fn matching_arity_zero_is_a_point() {
        let x = two_level_fixture();
        assert_eq!(matching_object(&x, 0).unwrap().space.len(), 1);
    }

    #[test]
    fn matching_two_level_fixture() {
        // Compatibility forces both codimension-1 values to restrict to the
        // same element of X(0): exactly the diagonal pairs survive.
        let x = two_level_fixture();
        let mo = matching_object(&x, 2).unwrap();
        assert_eq!(mo.space.len(), 2);
    }

    #[test]
    fn matching_sigma_action_is_right_action() {
        let x = two_level_fixture();
        let mo = matching_object(&x, 2).unwrap();
        for fam in mo.space.iter() {
            for sigma in Perm::all(2) {
                let once = mo.sigma_act(&x, fam, &sigma).unwrap();
                for tau in Perm::all(2) {
                    let lhs = mo.sigma_act(&x, &once, &tau).unwrap();
                    let rhs = mo.sigma_act(&x, fam, &sigma.then(&tau)).unwrap();
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn truncate_lambda_commutes() {
        let x = SymSeq::concentrated(2, FiniteSpace::singleton(Atom::new("c")));
        let lam = lambda_extend(&x).unwrap();
        let t1 = lam.truncate(1);
        assert_eq!(t1.component(1).unwrap().len(), 2);
        assert!(t1.component(2).is_none());
    }
}
