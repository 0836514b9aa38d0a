use std::collections::BTreeMap;

use itertools::Itertools;

use crate::error::{Result, WbError};
use crate::perm::Perm;
use crate::report::LawReport;
use crate::seq::{LamSeq, SymSeq};
use crate::space::{Atom, FiniteSpace};
use crate::trees::Tree;

/// A tabulated operad: a symmetric sequence with unit together with the
/// insertion maps `∘ᵢ: O(n) × O(m) → O(n+m−1)`, materialized for every
/// triple whose output arity is materialized. Compositions that fall
/// outside the evaluation bound are simply absent (truncated semantics).
#[derive(Debug, Clone)]
pub struct Operad {
    name: String,
    seq: SymSeq,
    comp: BTreeMap<(usize, usize, usize), BTreeMap<(Atom, Atom), Atom>>,
}

impl Operad {
    /// Tabulates an operad from a composition procedure. The procedure may
    /// return `BoundOverflow` for a pair whose composite is not
    /// representable within bounds; that entry is skipped.
    pub fn from_fn(
        name: impl Into<String>,
        seq: SymSeq,
        f: impl Fn(usize, usize, &Atom, usize, &Atom) -> Result<Atom>,
    ) -> Result<Operad> {
        if seq.unit().is_none() {
            return Err(WbError::Precondition(
                "an operad needs a unit in arity 1".into(),
            ));
        }
        let arities: Vec<usize> = seq.arities().collect();
        let mut comp = BTreeMap::new();
        for &n in &arities {
            for &m in &arities {
                if n == 0 {
                    continue;
                }
                let out = n + m - 1;
                if !arities.contains(&out) {
                    continue;
                }
                for i in 1..=n {
                    let mut table = BTreeMap::new();
                    for x in seq.component(n).unwrap().iter() {
                        for y in seq.component(m).unwrap().iter() {
                            match f(n, i, x, m, y) {
                                Ok(z) => {
                                    if !seq.component(out).unwrap().contains(&z) {
                                        return Err(WbError::Precondition(format!(
                                            "composite `{z}` of `{x}` ∘_{i} `{y}` is not an \
                                             element of arity {out}"
                                        )));
                                    }
                                    table.insert((x.clone(), y.clone()), z);
                                }
                                Err(WbError::BoundOverflow(_)) => {}
                                Err(e) => return Err(e),
                            }
                        }
                    }
                    comp.insert((n, i, m), table);
                }
            }
        }
        Ok(Operad {
            name: name.into(),
            seq,
            comp,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn seq(&self) -> &SymSeq {
        &self.seq
    }

    pub fn component(&self, n: usize) -> Option<&FiniteSpace> {
        self.seq.component(n)
    }

    pub fn max_arity(&self) -> usize {
        self.seq.max_arity().unwrap_or(0)
    }

    pub fn unit(&self) -> &Atom {
        self.seq.unit().expect("operads always carry a unit")
    }

    /// An operad is reduced when its arity-0 component is a singleton.
    pub fn is_reduced(&self) -> bool {
        self.component(0).map(FiniteSpace::len) == Some(1)
    }

    /// The distinguished arity-0 element of a reduced operad.
    pub fn star0(&self) -> Result<&Atom> {
        match self.component(0) {
            Some(c) if c.len() == 1 => Ok(c.get(0)),
            _ => Err(WbError::Precondition(format!(
                "operad {} is not reduced",
                self.name
            ))),
        }
    }

    pub fn act(&self, n: usize, x: &Atom, sigma: &Perm) -> Result<Atom> {
        self.seq.act(n, x, sigma)
    }

    pub fn compose(&self, n: usize, i: usize, x: &Atom, m: usize, y: &Atom) -> Result<Atom> {
        self.comp
            .get(&(n, i, m))
            .and_then(|t| t.get(&(x.clone(), y.clone())))
            .cloned()
            .ok_or_else(|| {
                WbError::Undefined(format!(
                    "{}: composition ({n}) ∘_{i} ({m}) undefined at `{x}`, `{y}`",
                    self.name
                ))
            })
    }

    pub(crate) fn compose_opt(&self, n: usize, i: usize, x: &Atom, m: usize, y: &Atom) -> Option<Atom> {
        self.comp
            .get(&(n, i, m))
            .and_then(|t| t.get(&(x.clone(), y.clone())))
            .cloned()
    }

    /// Replaces a single table entry. Test support for fault injection.
    pub fn override_composition(
        &mut self,
        n: usize,
        i: usize,
        m: usize,
        x: &Atom,
        y: &Atom,
        z: Atom,
    ) -> Result<()> {
        let table = self
            .comp
            .get_mut(&(n, i, m))
            .ok_or_else(|| WbError::Undefined(format!("no table ({n}, {i}, {m})")))?;
        if !table.contains_key(&(x.clone(), y.clone())) {
            return Err(WbError::Undefined("no such entry".into()));
        }
        table.insert((x.clone(), y.clone()), z);
        Ok(())
    }

    /// Exhaustively verifies the operad axioms on all materialized
    /// compositions with result arity at most `bound`: both unit laws,
    /// linear and ramified associativity, and equivariance.
    pub fn check_axioms(&self, bound: usize) -> LawReport {
        let mut report = LawReport::new(format!("operad {}", self.name));
        let arities: Vec<usize> = self.seq.arities().filter(|&n| n <= bound).collect();
        let unit = self.unit().clone();

        let mut cases = 0usize;
        let mut fail: Option<String> = None;
        for &n in &arities {
            if n == 0 {
                continue;
            }
            for x in self.seq.component(n).unwrap().iter() {
                if let Some(z) = self.compose_opt(1, 1, &unit, n, x) {
                    cases += 1;
                    if fail.is_none() && &z != x {
                        fail = Some(format!("∗₁ ∘₁ `{x}` = `{z}`"));
                    }
                }
                for i in 1..=n {
                    if let Some(z) = self.compose_opt(n, i, x, 1, &unit) {
                        cases += 1;
                        if fail.is_none() && &z != x {
                            fail = Some(format!("`{x}` ∘_{i} ∗₁ = `{z}`"));
                        }
                    }
                }
            }
        }
        report.record("unit", cases, fail);

        let (mut cases, mut fail) = (0usize, None::<String>);
        for (&n, &m, &k) in arities.iter().cartesian_product(&arities).cartesian_product(&arities).map(|((a, b), c)| (a, b, c)) {
            if n == 0 || m == 0 || n + m + k < 2 || n + m + k - 2 > bound {
                continue;
            }
            for i in 1..=n {
                for j in 1..=m {
                    for a in self.seq.component(n).unwrap().iter() {
                        for b in self.seq.component(m).unwrap().iter() {
                            for c in self.seq.component(k).unwrap().iter() {
                                let lhs = self
                                    .compose_opt(n, i, a, m, b)
                                    .and_then(|ab| self.compose_opt(n + m - 1, i + j - 1, &ab, k, c));
                                let rhs = self
                                    .compose_opt(m, j, b, k, c)
                                    .and_then(|bc| self.compose_opt(n, i, a, m + k - 1, &bc));
                                if let (Some(l), Some(r)) = (lhs, rhs) {
                                    cases += 1;
                                    if fail.is_none() && l != r {
                                        fail = Some(format!(
                                            "a=`{a}` b=`{b}` c=`{c}` i={i} j={j}: `{l}` ≠ `{r}`"
                                        ));
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        report.record("linear associativity", cases, fail);

        let (mut cases, mut fail) = (0usize, None::<String>);
        for (&n, &m, &k) in arities.iter().cartesian_product(&arities).cartesian_product(&arities).map(|((a, b), c)| (a, b, c)) {
            if n < 2 || n + m + k < 2 || n + m + k - 2 > bound {
                continue;
            }
            for i in 1..n {
                for j in i + 1..=n {
                    for a in self.seq.component(n).unwrap().iter() {
                        for b in self.seq.component(m).unwrap().iter() {
                            for c in self.seq.component(k).unwrap().iter() {
                                let lhs = self
                                    .compose_opt(n, i, a, m, b)
                                    .and_then(|ab| self.compose_opt(n + m - 1, j + m - 1, &ab, k, c));
                                let rhs = self
                                    .compose_opt(n, j, a, k, c)
                                    .and_then(|ac| self.compose_opt(n + k - 1, i, &ac, m, b));
                                if let (Some(l), Some(r)) = (lhs, rhs) {
                                    cases += 1;
                                    if fail.is_none() && l != r {
                                        fail = Some(format!(
                                            "a=`{a}` b=`{b}` c=`{c}` i={i} j={j}: `{l}` ≠ `{r}`"
                                        ));
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        report.record("ramified associativity", cases, fail);

        let (mut cases, mut fail) = (0usize, None::<String>);
        for &n in &arities {
            for &m in &arities {
                if n == 0 || n + m < 1 || n + m - 1 > bound {
                    continue;
                }
                for p in 1..=n {
                    for a in self.seq.component(n).unwrap().iter() {
                        for b in self.seq.component(m).unwrap().iter() {
                            for sigma in Perm::all(n) {
                                for tau in Perm::all(m) {
                                    let lhs = self
                                        .act(n, a, &sigma)
                                        .ok()
                                        .zip(self.act(m, b, &tau).ok())
                                        .and_then(|(as_, bt)| {
                                            self.compose_opt(n, sigma.apply(p), &as_, m, &bt)
                                        });
                                    let rhs = self.compose_opt(n, p, a, m, b).and_then(|ab| {
                                        let rho = sigma.insert(p, &tau).ok()?;
                                        self.act(n + m - 1, &ab, &rho).ok()
                                    });
                                    if let (Some(l), Some(r)) = (lhs, rhs) {
                                        cases += 1;
                                        if fail.is_none() && l != r {
                                            fail = Some(format!(
                                                "a=`{a}` b=`{b}` σ={sigma} τ={tau} p={p}: `{l}` ≠ `{r}`"
                                            ));
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        report.record("equivariance", cases, fail);

        report
    }

    /// `O_{>0}`: same operad with the arity-0 component redefined to be
    /// empty; all compositions not involving arity 0 are preserved.
    pub fn positive_part(&self) -> Operad {
        let mut seq = SymSeq::new();
        for n in self.seq.arities() {
            if n == 0 {
                seq.insert_trivial(0, FiniteSpace::empty());
            } else {
                let space = self.seq.component(n).unwrap().clone();
                let src = &self.seq;
                seq.insert_component(n, space, |x, sigma| src.act(n, x, sigma).unwrap())
                    .expect("copying materialized components");
            }
        }
        seq.set_unit(self.unit().clone()).unwrap();
        let comp = self
            .comp
            .iter()
            .filter(|((n, _, m), _)| *n > 0 && *m > 0)
            .map(|(k, v)| (*k, v.clone()))
            .collect();
        Operad {
            name: format!("{}_{{>0}}", self.name),
            seq,
            comp,
        }
    }

    /// The Λ-structure on the positive arities of a reduced operad,
    /// generated by `s_i*(θ) = θ ∘ᵢ ∗₀`.
    pub fn lambda_structure(&self) -> Result<LamSeq> {
        let star0 = self.star0()?.clone();
        let mut sym = SymSeq::new();
        for n in self.seq.arities().filter(|&n| n > 0) {
            let space = self.seq.component(n).unwrap().clone();
            let src = &self.seq;
            sym.insert_component(n, space, |x, sigma| src.act(n, x, sigma).unwrap())
                .expect("copying materialized components");
        }
        LamSeq::new(sym, |n, i, x| {
            self.compose(n, i, x, 0, &star0)
                .expect("reduced operad has all ∘ᵢ∗₀ maps")
        })
    }

    /// The subset `O(n;k) ⊆ O(n)` of points of the form `(θ₁ ∘₁ θ₂)·σ`,
    /// computed by brute force. Defined only for `1 < k < n`.
    pub fn subspace_nk(&self, n: usize, k: usize) -> Result<FiniteSpace> {
        if !(1 < k && k < n) {
            return Err(WbError::Precondition(format!(
                "O(n;k) requires 1 < k < n, got n={n}, k={k}"
            )));
        }
        let mut out = Vec::new();
        for i in 2..=k {
            let (Some(inner), Some(outer)) = (self.component(i), self.component(n - i + 1))
            else {
                continue;
            };
            for theta2 in inner.iter() {
                for theta1 in outer.iter() {
                    let Some(base) = self.compose_opt(n - i + 1, 1, theta1, i, theta2) else {
                        continue;
                    };
                    for sigma in admissible_shuffles(n, i, k) {
                        out.push(self.act(n, &base, &sigma)?);
                    }
                }
            }
        }
        out.sort();
        out.dedup();
        FiniteSpace::new(out)
    }
}

/// Permutations of `[n]` fixing `k+1, …, n` pointwise and shuffling
/// `{1,…,i}` with `{i+1,…,k}` (order-preserving on each block).
fn admissible_shuffles(n: usize, i: usize, k: usize) -> Vec<Perm> {
    Perm::all(n)
        .into_iter()
        .filter(|s| {
            (k + 1..=n).all(|j| s.apply(j) == j)
                && (1..i).all(|j| s.apply(j) < s.apply(j + 1))
                && (i + 1..k).all(|j| s.apply(j) < s.apply(j + 1))
        })
        .collect()
}

/// The commutative operad: a singleton in every arity.
/// The unit operad `𝟙`: a single point in arity 1 and nothing elsewhere.
pub fn one_operad(max_arity: usize) -> Operad {
    let seq = SymSeq::one(max_arity);
    Operad::from_fn("One", seq, |_, _, x, _, _| Ok(x.clone()))
        .expect("the unit operad tabulates")
}

pub fn com(max_arity: usize) -> Operad {
    let mut seq = SymSeq::terminal(max_arity);
    let unit = seq.component(1).unwrap().get(0).clone();
    seq.set_unit(unit).unwrap();
    let point = seq.component(0).unwrap().get(0).clone();
    let witness = point.clone();
    Operad::from_fn("Com", seq, move |_, _, _, _, _| Ok(witness.clone())).unwrap()
}

fn perm_atom(p: &Perm) -> Atom {
    Atom::new(format!(
        "(p{})",
        p.images().iter().map(|i| format!(" {i}")).collect::<String>()
    ))
}

fn atom_perm(a: &Atom) -> Result<Perm> {
    let s = crate::sexp::parse(a.as_str())?;
    let items = s.as_tagged("p")?;
    Perm::from_images(items.iter().map(|i| i.as_nat()).collect::<Result<Vec<_>>>()?)
}

/// Insertion of `μ` into input `i` of `π`, reading a permutation as the
/// word `x_{π(1)} … x_{π(n)}`: the letter `i` is replaced by the block
/// `μ` shifted to `i, …, i+m−1`, and higher letters are shifted by `m−1`.
fn word_insert(pi: &Perm, i: usize, mu: &Perm) -> Perm {
    let n = pi.arity();
    let m = mu.arity();
    let mut images = Vec::with_capacity(n + m - 1);
    for j in 1..=n {
        let v = pi.apply(j);
        if v < i {
            images.push(v);
        } else if v == i {
            for k in 1..=m {
                images.push(i + mu.apply(k) - 1);
            }
        } else {
            images.push(v + m - 1);
        }
    }
    Perm::from_images(images).unwrap()
}

/// The associative operad: `Ass(n) = Σ_n` with insertion as composition.
pub fn ass(max_arity: usize) -> Operad {
    let mut seq = SymSeq::new();
    for n in 0..=max_arity {
        let space = FiniteSpace::new(Perm::all(n).iter().map(perm_atom).collect()).unwrap();
        seq.insert_component(n, space, |x, sigma| {
            perm_atom(&atom_perm(x).unwrap().then(sigma))
        })
        .expect("fresh component");
    }
    seq.set_unit(perm_atom(&Perm::identity(1))).unwrap();
    Operad::from_fn("Ass", seq, |_, i, x, _, y| {
        Ok(perm_atom(&word_insert(&atom_perm(x)?, i, &atom_perm(y)?)))
    })
    .unwrap()
}

fn fn_atom(outputs: &[usize]) -> Atom {
    Atom::new(format!(
        "(fn{})",
        outputs.iter().map(|i| format!(" {i}")).collect::<String>()
    ))
}

fn atom_fn(a: &Atom) -> Result<Vec<usize>> {
    let s = crate::sexp::parse(a.as_str())?;
    let items = s.as_tagged("fn")?;
    items.iter().map(|i| i.as_nat()).collect()
}

/// Index of an input tuple in the lexicographic enumeration of `S^n`
/// (entries are element indices in `0..size`).
fn tuple_index(tuple: &[usize], size: usize) -> usize {
    tuple.iter().fold(0, |acc, &v| acc * size + v)
}

fn all_tuples(size: usize, n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    (0..n)
        .map(|_| 0..size)
        .multi_cartesian_product()
        .collect()
}

/// The endomorphism operad of a finite set: `End(n)` is the set of all
/// functions `S^n → S`, acting by input substitution.
pub fn endomorphism_operad(s: &FiniteSpace, max_arity: usize) -> Result<Operad> {
    let size = s.len();
    if size == 0 {
        return Err(WbError::Precondition("endomorphism operad of ∅".into()));
    }
    for n in 0..=max_arity {
        let domain = size.checked_pow(n as u32).unwrap_or(usize::MAX);
        let table_bits = domain.checked_mul(size.ilog2() as usize + 1);
        if domain > 64 || table_bits.is_none() || size.checked_pow(domain as u32).is_none() {
            return Err(WbError::BoundOverflow(format!(
                "endomorphism operad on {size} elements at arity {n} is too large"
            )));
        }
    }
    let mut seq = SymSeq::new();
    for n in 0..=max_arity {
        let domain = all_tuples(size, n);
        let atoms: Vec<Atom> = all_tuples(size, domain.len())
            .iter()
            .map(|outs| fn_atom(outs))
            .collect();
        let dom = domain.clone();
        seq.insert_component(n, FiniteSpace::new(atoms)?, move |x, sigma| {
            // (f·σ)(x₁,…,xₙ) = f(x_{σ(1)}, …, x_{σ(n)})
            let f = atom_fn(x).unwrap();
            let outs: Vec<usize> = dom
                .iter()
                .map(|tuple| {
                    let permuted: Vec<usize> =
                        (1..=n).map(|j| tuple[sigma.apply(j) - 1]).collect();
                    f[tuple_index(&permuted, size)]
                })
                .collect();
            fn_atom(&outs)
        })?;
    }
    let id_outputs: Vec<usize> = (0..size).collect();
    seq.set_unit(fn_atom(&id_outputs))?;
    Operad::from_fn("End", seq, move |n, i, x, m, y| {
        let f = atom_fn(x)?;
        let g = atom_fn(y)?;
        let outs: Vec<usize> = all_tuples(size, n + m - 1)
            .iter()
            .map(|tuple| {
                let inner = g[tuple_index(&tuple[i - 1..i + m - 1], size)];
                let mut outer: Vec<usize> = tuple[..i - 1].to_vec();
                outer.push(inner);
                outer.extend_from_slice(&tuple[i + m - 1..]);
                f[tuple_index(&outer, size)]
            })
            .collect();
        Ok(fn_atom(&outs))
    })
}

/// Decorated rooted trees for the free operad: vertex labels are elements
/// of the generating sequence, leaves carry a bijective labeling.
fn decorated_shapes(x: &SymSeq, max_leaves: usize, max_vertices: usize) -> Vec<Tree> {
    // Trees with ≤ max_vertices vertices whose vertex arities all have
    // non-empty generating components, with unlabeled leaves.
    fn gen(x: &SymSeq, budget: usize, max_leaves: usize) -> Vec<(Tree, usize)> {
        let mut out = vec![(Tree::Leaf(0), 0)];
        if budget == 0 {
            return out;
        }
        let arities: Vec<usize> = x
            .arities()
            .filter(|&a| !x.component(a).unwrap().is_empty())
            .collect();
        for &a in &arities {
            for combo in children(x, a, budget - 1, max_leaves) {
                let used = 1 + combo.iter().map(|(_, u)| u).sum::<usize>();
                let tree = Tree::vertex(combo.into_iter().map(|(t, _)| t).collect());
                if tree.arity() <= max_leaves.max(1) {
                    out.push((tree, used));
                }
            }
        }
        out
    }
    fn children(
        x: &SymSeq,
        a: usize,
        budget: usize,
        max_leaves: usize,
    ) -> Vec<Vec<(Tree, usize)>> {
        if a == 0 {
            return vec![Vec::new()];
        }
        let mut out = Vec::new();
        for (t, used) in gen(x, budget, max_leaves) {
            for mut rest in children(x, a - 1, budget - used, max_leaves) {
                rest.insert(0, (t.clone(), used));
                out.push(rest);
            }
        }
        out
    }
    gen(x, max_vertices, max_leaves)
        .into_iter()
        .map(|(t, _)| t)
        .collect()
}

/// All ways of decorating the vertices of a shape with generators of the
/// matching arity.
fn decorate(x: &SymSeq, shape: &Tree) -> Vec<Tree> {
    match shape {
        Tree::Leaf(k) => vec![Tree::Leaf(*k)],
        Tree::Node { children, .. } => {
            let labels = x.component(children.len()).unwrap().elements().to_vec();
            let per_child: Vec<Vec<Tree>> = children.iter().map(|c| decorate(x, c)).collect();
            let combos: Vec<Vec<Tree>> = if per_child.is_empty() {
                vec![Vec::new()]
            } else {
                per_child
                    .iter()
                    .map(|v| v.iter().cloned())
                    .multi_cartesian_product()
                    .collect()
            };
            let mut out = Vec::new();
            for label in labels {
                for combo in &combos {
                    out.push(Tree::labeled(label.clone(), combo.clone()));
                }
            }
            out
        }
    }
}

/// Canonical representative of a decorated tree under the relation that
/// reorders the children of a vertex by `π` while replacing the decoration
/// `x` by `x·π`.
fn canon_decorated(x: &SymSeq, t: &Tree) -> Tree {
    match t {
        Tree::Leaf(k) => Tree::Leaf(*k),
        Tree::Node {
            label, children, ..
        } => {
            let canon_children: Vec<Tree> =
                children.iter().map(|c| canon_decorated(x, c)).collect();
            let a = children.len();
            let label = label.as_ref().expect("decorated vertices carry labels");
            Perm::all(a)
                .into_iter()
                .map(|pi| {
                    // `x` with inputs (c₁…cₐ) equals `x·π` with input i
                    // reading c_{π⁻¹(i)}.
                    let twisted = x.act(a, label, &pi).unwrap();
                    let inv = pi.inverse();
                    let reordered: Vec<Tree> =
                        (1..=a).map(|k| canon_children[inv.apply(k) - 1].clone()).collect();
                    Tree::labeled(twisted, reordered)
                })
                .min_by_key(Tree::to_atom)
                .unwrap()
        }
    }
}

/// The free operad on a symmetric sequence, evaluated within bounds:
/// elements are canonical decorated trees with bijectively labeled leaves;
/// composition is grafting; the unit is the edge tree `(leaf 1)`.
pub fn free_operad(x: &SymSeq, max_leaves: usize, max_vertices: usize) -> Result<Operad> {
    let shapes = decorated_shapes(x, max_leaves, max_vertices);
    let mut by_arity: BTreeMap<usize, Vec<Tree>> = (0..=max_leaves).map(|n| (n, vec![])).collect();
    for shape in shapes {
        let n = if shape.is_leaf() { 1 } else { shape.arity() };
        if shape.is_leaf() {
            by_arity.get_mut(&1).unwrap().push(Tree::Leaf(1));
            continue;
        }
        if n > max_leaves {
            continue;
        }
        for decorated in decorate(x, &shape) {
            for sigma in Perm::all(n) {
                let labeled = decorated.identity_labeled().act_on_leaves(&sigma);
                by_arity
                    .get_mut(&n)
                    .unwrap()
                    .push(canon_decorated(x, &labeled));
            }
        }
    }
    let mut seq = SymSeq::new();
    for (n, mut trees) in by_arity {
        trees.sort();
        trees.dedup();
        let atoms: Vec<Atom> = trees.iter().map(Tree::to_atom).collect();
        let xs = x.clone();
        seq.insert_component(n, FiniteSpace::new(atoms)?, move |a, sigma| {
            let t = Tree::from_atom(a).unwrap();
            canon_decorated(&xs, &t.act_on_leaves(sigma)).to_atom()
        })?;
    }
    seq.set_unit(Tree::Leaf(1).to_atom())?;
    let xs = x.clone();
    Operad::from_fn("Free", seq, move |_, i, a, _, b| {
        let s = Tree::from_atom(a)?;
        let t = Tree::from_atom(b)?;
        let grafted = s.graft(i, &t)?;
        if grafted.num_vertices() > max_vertices {
            return Err(WbError::BoundOverflow(format!(
                "graft of `{a}` and `{b}` exceeds {max_vertices} vertices"
            )));
        }
        Ok(canon_decorated(&xs, &grafted).to_atom())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn com_axioms_pass() {
        let report = com(5).check_axioms(5);
        assert!(report.all_passed(), "{report}");
    }

    #[test]
    fn ass_axioms_pass() {
        let report = ass(4).check_axioms(4);
        assert!(report.all_passed(), "{report}");
    }

    #[test]
    fn ass_corrupted_entry_fails() {
        let mut o = ass(4);
        let a = perm_atom(&Perm::identity(2));
        let z = perm_atom(&Perm::from_images(vec![2, 1, 3]).unwrap());
        o.override_composition(2, 1, 2, &a, &a, z).unwrap();
        let report = o.check_axioms(4);
        assert!(!report.all_passed());
        let names: Vec<&str> = report.failures().map(|f| f.law.as_str()).collect();
        assert!(
            names.iter().any(|n| n.contains("associativity") || n.contains("unit")),
            "{report}"
        );
    }

    #[test]
    fn positive_part_properties() {
        let o = ass(4);
        let p = o.positive_part();
        assert!(p.component(0).unwrap().is_empty());
        for n in 1..=4 {
            assert_eq!(p.component(n).unwrap().len(), o.component(n).unwrap().len());
        }
        let pp = p.positive_part();
        for n in 0..=4 {
            assert_eq!(
                pp.component(n).unwrap().elements(),
                p.component(n).unwrap().elements()
            );
        }
        assert!(p.check_axioms(4).all_passed());
    }

    #[test]
    fn lambda_structure_com_is_terminal() {
        let l = com(4).lambda_structure().unwrap();
        for n in 1..=4 {
            assert_eq!(l.component(n).unwrap().len(), 1);
        }
        l.check_functoriality(4).unwrap();
    }

    #[test]
    fn lambda_structure_ass_collapses() {
        let o = ass(4);
        let l = o.lambda_structure().unwrap();
        let id1 = perm_atom(&Perm::identity(1));
        for x in o.component(2).unwrap().iter() {
            assert_eq!(l.restrict_gen(2, 1, x).unwrap(), id1);
            assert_eq!(l.restrict_gen(2, 2, x).unwrap(), id1);
        }
        l.check_functoriality(4).unwrap();
    }

    #[test]
    fn positive_part_agrees_with_direct_insertion() {
        let o = ass(4);
        let l = o.lambda_structure().unwrap();
        let star0 = o.star0().unwrap().clone();
        for n in 2..=4usize {
            for x in o.component(n).unwrap().iter() {
                for i in 1..=n {
                    assert_eq!(
                        l.restrict_gen(n, i, x).unwrap(),
                        o.compose(n, i, x, 0, &star0).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn endomorphism_operad_counts_and_axioms() {
        let s1 = FiniteSpace::named("s", 1);
        let e1 = endomorphism_operad(&s1, 3).unwrap();
        for n in 0..=3 {
            assert_eq!(e1.component(n).unwrap().len(), 1);
        }
        let s2 = FiniteSpace::named("s", 2);
        let e2 = endomorphism_operad(&s2, 2).unwrap();
        assert_eq!(e2.component(2).unwrap().len(), 16);
        let e3 = endomorphism_operad(&s2, 3).unwrap();
        let report = e3.check_axioms(3);
        assert!(report.all_passed(), "{report}");
    }

    #[test]
    fn endomorphism_operad_refuses_blowup() {
        let s = FiniteSpace::named("s", 4);
        assert!(matches!(
            endomorphism_operad(&s, 4),
            Err(WbError::BoundOverflow(_))
        ));
    }

    #[test]
    fn free_operad_on_symmetric_binary_generator() {
        // One Σ₂-invariant point in arity 2.
        let x = SymSeq::concentrated(2, FiniteSpace::named("g", 1));
        let f = free_operad(&x, 4, 3).unwrap();
        assert_eq!(f.component(1).unwrap().len(), 1); // the unit edge
        assert_eq!(f.component(2).unwrap().len(), 1);
        assert_eq!(f.component(3).unwrap().len(), 3);
        let report = f.check_axioms(3);
        assert!(report.all_passed(), "{report}");
    }

    #[test]
    fn free_operad_on_empty_input() {
        let x = SymSeq::empty(3);
        let f = free_operad(&x, 3, 2).unwrap();
        assert_eq!(f.component(1).unwrap().len(), 1);
        for n in [0usize, 2, 3] {
            assert!(f.component(n).unwrap().is_empty(), "arity {n}");
        }
    }

    #[test]
    fn free_operad_axiom_sweep_small_generators() {
        // All generating sequences with ≤ 2 points in a single arity ≤ 2.
        for arity in [1usize, 2] {
            for points in [1usize, 2] {
                let x = SymSeq::concentrated(arity, FiniteSpace::named("g", points));
                let f = free_operad(&x, 4, 3).unwrap();
                let report = f.check_axioms(3);
                assert!(report.all_passed(), "arity {arity} points {points}: {report}");
            }
        }
    }

    #[test]
    fn subspace_nk_com_and_bounds() {
        let o = com(5);
        let s = o.subspace_nk(4, 2).unwrap();
        assert_eq!(s.len(), 1);
        assert!(o.subspace_nk(3, 1).is_err());
        assert!(o.subspace_nk(3, 3).is_err());
    }

    #[test]
    fn subspace_nk_ass_brute_force() {
        let o = ass(4);
        let s = o.subspace_nk(3, 2).unwrap();
        // Independent brute force straight from the definition.
        let mut expect = Vec::new();
        for theta2 in Perm::all(2) {
            for theta1 in Perm::all(2) {
                let base = word_insert(&theta1, 1, &theta2);
                for sigma in Perm::all(3) {
                    let fixes_tail = sigma.apply(3) == 3;
                    let shuffle = sigma.apply(1) < sigma.apply(2);
                    if fixes_tail && shuffle {
                        expect.push(perm_atom(&base.then(&sigma)));
                    }
                }
            }
        }
        expect.sort();
        expect.dedup();
        assert_eq!(s.elements(), &expect[..]);
        for a in s.iter() {
            assert!(o.component(3).unwrap().contains(a));
        }
    }
}
