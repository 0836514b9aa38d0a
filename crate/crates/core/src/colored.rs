//! Colored operads assembled from ordinary ones.
//!
//! From a pair of operads `(P, Q)` this module builds the two-sorted-style
//! colored operad `P+Q` whose algebras are `(P-Q)`-bimodules, together with
//! its positive variant `(P+Q)₊` taken over surjective index maps.  From a
//! single operad `O` it builds the colored operad `O₊` (colors ℕ, all
//! operations unary) whose algebras are infinitesimal `O`-bimodules.
//!
//! Elements are stored in a normal form with exactly one head vertex: a
//! `P`-label, an index map `α`, and one `Q`-decoration per index.  The tree
//! presentation exists only transiently inside composition, which grafts,
//! pushes the grafted decoration layer through the head, and contracts.

use std::collections::BTreeMap;

use itertools::Itertools;

use crate::bimodules::{operad_gamma, Bimodule, IBimodule};
use crate::error::{Result, WbError};
use crate::operads::Operad;
use crate::perm::Perm;
use crate::seq::SymSeq;
use crate::sexp::{self, Sexp};
use crate::space::{Atom, FiniteSpace};

/// The positions `{j : α(j) = i}` for every `i ∈ [n]`, each listed in
/// increasing order.  `alpha` holds 1-based values.
fn fibers(alpha: &[usize], n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); n];
    for (j, &v) in alpha.iter().enumerate() {
        out[v - 1].push(j + 1);
    }
    out
}

/// The permutation whose image list is `values` — the shuffle carrying the
/// canonical order of the union to the given block-concatenation order.
/// `values` must be a list of distinct positive integers; entry `t` is
/// replaced by its rank, so any partition of a finite set qualifies.
fn shuffle_perm(values: &[usize]) -> Perm {
    Perm::ranks(values)
}

// ---------------------------------------------------------------------------
// P+Q
// ---------------------------------------------------------------------------

/// A normal-form element of `(P+Q)(n₁,…,n_k; m)`: a head label `p ∈ P(k)`,
/// an index map `α: [m] → [n₁+⋯+n_k]`, and decorations `qᵢ ∈ Q(|α⁻¹(i)|)`.
/// The input colors `n₁,…,n_k` are part of the element because they
/// determine how `[n₁+⋯+n_k]` splits into blocks.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct PQElement {
    pub p: Atom,
    pub colors: Vec<usize>,
    pub alpha: Vec<usize>,
    pub qs: Vec<Atom>,
}

impl PQElement {
    /// Total input color `n₁+⋯+n_k`.
    pub fn total_color(&self) -> usize {
        self.colors.iter().sum()
    }

    /// Output color `m`.
    pub fn output(&self) -> usize {
        self.alpha.len()
    }

    /// Checks membership of the labels and arity coherence of the
    /// decorations against concrete operads.
    pub fn validate(&self, p: &Operad, q: &Operad) -> Result<()> {
        let k = self.colors.len();
        let n = self.total_color();
        match p.component(k) {
            Some(c) if c.contains(&self.p) => {}
            _ => {
                return Err(WbError::Precondition(format!(
                    "head label `{}` is not a {k}-ary element of {}",
                    self.p,
                    p.name()
                )))
            }
        }
        if self.qs.len() != n {
            return Err(WbError::Precondition(format!(
                "{} decorations for total color {n}",
                self.qs.len()
            )));
        }
        if self.alpha.iter().any(|&v| v == 0 || v > n) {
            return Err(WbError::Precondition(format!(
                "index map value outside [{n}]"
            )));
        }
        let fib = fibers(&self.alpha, n);
        for (i, qi) in self.qs.iter().enumerate() {
            let len = fib[i].len();
            match q.component(len) {
                Some(c) if c.contains(qi) => {}
                _ => {
                    return Err(WbError::Precondition(format!(
                        "decoration `{qi}` at index {} is not a {len}-ary element of {}",
                        i + 1,
                        q.name()
                    )))
                }
            }
        }
        Ok(())
    }

    /// Renders `(pq (p <atom>) (alpha m -> n : v₁ … v_m) (q 1 <atom>) …)`.
    pub fn to_atom(&self) -> Atom {
        let n = self.total_color();
        let mut alpha = vec![
            Sexp::atom("alpha"),
            Sexp::nat(self.alpha.len()),
            Sexp::atom("->"),
            Sexp::nat(n),
            Sexp::atom(":"),
        ];
        alpha.extend(self.alpha.iter().map(|&v| Sexp::nat(v)));
        let mut items = vec![
            Sexp::atom("pq"),
            Sexp::list(vec![Sexp::atom("p"), Sexp::atom(self.p.as_str())]),
            Sexp::list(alpha),
        ];
        for (i, qi) in self.qs.iter().enumerate() {
            items.push(Sexp::list(vec![
                Sexp::atom("q"),
                Sexp::nat(i + 1),
                Sexp::atom(qi.as_str()),
            ]));
        }
        Atom::new(Sexp::list(items).to_string())
    }

    /// Parses the rendering above.  The input colors are supplied by the
    /// caller since the syntax only records their sum.
    pub fn from_atom(a: &Atom, colors: &[usize]) -> Result<PQElement> {
        let sx = sexp::parse(a.as_str())?;
        let items = sx.as_tagged("pq")?;
        if items.is_empty() {
            return Err(WbError::Parse("empty pq element".into()));
        }
        let p_items = items[0].as_tagged("p")?;
        if p_items.len() != 1 {
            return Err(WbError::Parse("malformed head label".into()));
        }
        let p = Atom::new(p_items[0].as_atom()?);
        let alpha_items = items[1].as_tagged("alpha")?;
        if alpha_items.len() < 4 {
            return Err(WbError::Parse("malformed index map".into()));
        }
        let m = alpha_items[0].as_nat()?;
        let n = alpha_items[2].as_nat()?;
        if n != colors.iter().sum::<usize>() {
            return Err(WbError::Parse(format!(
                "index map target {n} does not match the supplied colors"
            )));
        }
        if alpha_items.len() != 4 + m {
            return Err(WbError::Parse("index map length mismatch".into()));
        }
        let alpha: Vec<usize> =
            alpha_items[4..].iter().map(Sexp::as_nat).collect::<Result<_>>()?;
        let mut qs = vec![None; n];
        for item in &items[2..] {
            let q_items = item.as_tagged("q")?;
            if q_items.len() != 2 {
                return Err(WbError::Parse("malformed decoration".into()));
            }
            let i = q_items[0].as_nat()?;
            if i == 0 || i > n {
                return Err(WbError::Parse(format!("decoration index {i} outside [{n}]")));
            }
            qs[i - 1] = Some(Atom::new(q_items[1].as_atom()?));
        }
        let qs: Vec<Atom> = qs
            .into_iter()
            .enumerate()
            .map(|(i, q)| {
                q.ok_or_else(|| WbError::Parse(format!("missing decoration at index {}", i + 1)))
            })
            .collect::<Result<_>>()?;
        Ok(PQElement { p, colors: colors.to_vec(), alpha, qs })
    }
}

/// The identity of `(P+Q)` at color `n`: unit head, identity index map,
/// unit decorations.
pub fn pq_unit(p: &Operad, q: &Operad, n: usize) -> PQElement {
    PQElement {
        p: p.unit().clone(),
        colors: vec![n],
        alpha: (1..=n).collect(),
        qs: vec![q.unit().clone(); n],
    }
}

fn all_index_maps(m: usize, n: usize) -> Vec<Vec<usize>> {
    if m == 0 {
        return vec![vec![]];
    }
    if n == 0 {
        return vec![];
    }
    (0..m).map(|_| 1..=n).multi_cartesian_product().collect()
}

fn decoration_tuples(q: &Operad, fib: &[Vec<usize>]) -> Result<Vec<Vec<Atom>>> {
    let mut out = vec![vec![]];
    for f in fib {
        let comp = q.component(f.len()).ok_or_else(|| {
            WbError::BoundOverflow(format!(
                "{} has no arity-{} component for a fiber decoration",
                q.name(),
                f.len()
            ))
        })?;
        if comp.is_empty() {
            return Ok(vec![]);
        }
        out = out
            .into_iter()
            .cartesian_product(comp.iter())
            .map(|(mut t, a)| {
                t.push(a.clone());
                t
            })
            .collect();
    }
    Ok(out)
}

fn pq_component_inner(
    p: &Operad,
    q: &Operad,
    colors: &[usize],
    m: usize,
    surjective_only: bool,
) -> Result<FiniteSpace> {
    let k = colors.len();
    let n: usize = colors.iter().sum();
    let heads = p.component(k).ok_or_else(|| {
        WbError::BoundOverflow(format!("{} has no arity-{k} component", p.name()))
    })?;
    let mut elems = Vec::new();
    for alpha in all_index_maps(m, n) {
        let fib = fibers(&alpha, n);
        if surjective_only && fib.iter().any(Vec::is_empty) {
            continue;
        }
        for qs in decoration_tuples(q, &fib)? {
            for head in heads.iter() {
                let e = PQElement {
                    p: head.clone(),
                    colors: colors.to_vec(),
                    alpha: alpha.clone(),
                    qs: qs.clone(),
                };
                elems.push(e.to_atom());
            }
        }
    }
    elems.sort();
    elems.dedup();
    FiniteSpace::new(elems)
}

/// The component `(P+Q)(n₁,…,n_k; m)` as a finite space of rendered
/// normal forms.
pub fn pq_component(p: &Operad, q: &Operad, colors: &[usize], m: usize) -> Result<FiniteSpace> {
    pq_component_inner(p, q, colors, m, false)
}

/// The positive variant: the same component with the coproduct restricted
/// to surjective index maps.  Requires both operads to have empty
/// arity-zero parts.
pub fn pq_positive_component(
    p: &Operad,
    q: &Operad,
    colors: &[usize],
    m: usize,
) -> Result<FiniteSpace> {
    for (op, tag) in [(p, "head"), (q, "decoration")] {
        if op.component(0).map(|c| !c.is_empty()).unwrap_or(false) {
            return Err(WbError::Precondition(format!(
                "positive components require an empty arity-zero {tag} operad, but {} has one",
                op.name()
            )));
        }
    }
    pq_component_inner(p, q, colors, m, true)
}

/// Composition of the decoration layers: an element of `Q₁(n; m)` (an index
/// map `[m] → [n]` with decorations over `[n]`) followed by an element of
/// `Q₁(m; l)`.  For each `i ∈ [n]` the decorations over the fiber `α⁻¹(i)`
/// are inserted into `qᵢ` and the result is twisted by the shuffle that
/// restores the canonical order of the combined fiber.
fn q1_compose(
    q: &Operad,
    n: usize,
    alpha1: &[usize],
    qs1: &[Atom],
    alpha2: &[usize],
    qs2: &[Atom],
) -> Result<(Vec<usize>, Vec<Atom>)> {
    let m = alpha1.len();
    let alpha: Vec<usize> = alpha2.iter().map(|&b| alpha1[b - 1]).collect();
    let fib1 = fibers(alpha1, n);
    let fib2 = fibers(alpha2, m);
    let mut qs = Vec::with_capacity(n);
    for i in 1..=n {
        let bs = &fib1[i - 1];
        let args: Vec<(usize, Atom)> =
            bs.iter().map(|&b| (fib2[b - 1].len(), qs2[b - 1].clone())).collect();
        let inner = operad_gamma(q, bs.len(), &qs1[i - 1], &args)?;
        let concat: Vec<usize> =
            bs.iter().flat_map(|&b| fib2[b - 1].iter().copied()).collect();
        let sigma = shuffle_perm(&concat);
        let z = if sigma.is_identity() {
            inner
        } else {
            q.act(concat.len(), &inner, &sigma)?
        };
        qs.push(z);
    }
    Ok((alpha, qs))
}

/// Operadic composition `x ∘ᵢ y` in `P+Q`.  The tree indexing `y` is
/// grafted into the `i`-th leaf of the tree indexing `x`; the grafted
/// decoration layer is then pushed through the head vertex (extending it by
/// units away from the `i`-th block), the two decoration layers are
/// contracted with [`q1_compose`], and the two head vertices with the
/// composition of `P`.
pub fn pq_compose(
    p: &Operad,
    q: &Operad,
    x: &PQElement,
    i: usize,
    y: &PQElement,
) -> Result<PQElement> {
    let k = x.colors.len();
    if i == 0 || i > k {
        return Err(WbError::Precondition(format!("insertion slot {i} not in [{k}]")));
    }
    let ni = x.colors[i - 1];
    if y.output() != ni {
        return Err(WbError::Precondition(format!(
            "color mismatch: slot {i} has color {ni} but the inserted element outputs {}",
            y.output()
        )));
    }
    let n = x.total_color();
    let np = y.total_color();
    let off: usize = x.colors[..i - 1].iter().sum();
    let n_new = n - ni + np;

    // The inserted layer, extended by units to an index map [n] → [n_new].
    let mut alpha_ext = Vec::with_capacity(n);
    for j in 1..=n {
        alpha_ext.push(if j <= off {
            j
        } else if j <= off + ni {
            off + y.alpha[j - off - 1]
        } else {
            j - ni + np
        });
    }
    let mut qs_ext = Vec::with_capacity(n_new);
    for c in 1..=n_new {
        qs_ext.push(if c > off && c <= off + np {
            y.qs[c - off - 1].clone()
        } else {
            q.unit().clone()
        });
    }

    let (alpha, qs) = q1_compose(q, n_new, &alpha_ext, &qs_ext, &x.alpha, &x.qs)?;
    let kp = y.colors.len();
    let head = p.compose(k, i, &x.p, kp, &y.p)?;
    let mut colors = Vec::with_capacity(k + kp - 1);
    colors.extend_from_slice(&x.colors[..i - 1]);
    colors.extend_from_slice(&y.colors);
    colors.extend_from_slice(&x.colors[i..]);
    Ok(PQElement { p: head, colors, alpha, qs })
}

/// The `Σ_k`-action permuting the inputs of a normal form: slot `j` of
/// `x·σ` is slot `σ⁻¹(j)` of `x`, so colors pull back along `σ⁻¹` and the
/// output blocks are rearranged accordingly.
pub fn pq_act(p: &Operad, x: &PQElement, sigma: &Perm) -> Result<PQElement> {
    let k = x.colors.len();
    if sigma.arity() != k {
        return Err(WbError::Precondition(format!(
            "permutation {sigma} does not act on {k} inputs"
        )));
    }
    let inv = sigma.inverse();
    let head = p.act(k, &x.p, sigma)?;
    let colors: Vec<usize> = (1..=k).map(|j| x.colors[inv.apply(j) - 1]).collect();
    // Old output position ↦ new output position: old block t becomes new
    // block σ⁻¹(t), order-preserving inside each block.
    let old_off: Vec<usize> = (0..k)
        .map(|t| x.colors[..t].iter().sum())
        .collect();
    let new_off: Vec<usize> = (0..k).map(|j| colors[..j].iter().sum()).collect();
    let n = x.total_color();
    let mut rho = vec![0usize; n];
    for t in 1..=k {
        // Old block t becomes new block j, where σ⁻¹(j) = t.
        let j = sigma.apply(t);
        for r in 1..=x.colors[t - 1] {
            rho[old_off[t - 1] + r - 1] = new_off[j - 1] + r;
        }
    }
    let alpha: Vec<usize> = x.alpha.iter().map(|&v| rho[v - 1]).collect();
    let mut qs = vec![Atom::new(""); n];
    for (idx, qi) in x.qs.iter().enumerate() {
        qs[rho[idx] - 1] = qi.clone();
    }
    Ok(PQElement { p: head, colors, alpha, qs })
}

/// The action of a `P+Q` normal form on a `(P-Q)`-bimodule: the head acts
/// through the left operations, each decoration is inserted through the
/// right operations (top slot first, so lower slots stay stable), and the
/// shuffle carrying block order to the canonical output order is applied
/// last.
pub fn pq_action(m: &Bimodule, x: &PQElement, args: &[Atom]) -> Result<Atom> {
    let k = x.colors.len();
    if args.len() != k {
        return Err(WbError::Precondition(format!(
            "{} arguments for a {k}-input element",
            args.len()
        )));
    }
    let n = x.total_color();
    let mut acc = m.left(k, &x.p, &x.colors, args)?;
    let fib = fibers(&x.alpha, n);
    let mut cur = n;
    for i in (1..=n).rev() {
        let ki = fib[i - 1].len();
        acc = m.right(cur, i, &acc, ki, &x.qs[i - 1])?;
        cur = cur + ki - 1;
    }
    let concat: Vec<usize> = fib.iter().flatten().copied().collect();
    let sigma = shuffle_perm(&concat);
    if sigma.is_identity() {
        Ok(acc)
    } else {
        m.act(x.output(), &acc, &sigma)
    }
}

// ---------------------------------------------------------------------------
// Bimodules ↔ (P+Q)-algebras
// ---------------------------------------------------------------------------

/// A `(P+Q)`-algebra presented by its underlying sequence and a structure
/// map evaluating normal-form elements on argument tuples.
pub struct PQAlgebra<'a> {
    seq: SymSeq,
    p: &'a Operad,
    q: &'a Operad,
    act: Box<dyn Fn(&PQElement, &[Atom]) -> Result<Atom> + 'a>,
}

impl<'a> PQAlgebra<'a> {
    pub fn new(
        seq: SymSeq,
        p: &'a Operad,
        q: &'a Operad,
        act: impl Fn(&PQElement, &[Atom]) -> Result<Atom> + 'a,
    ) -> Self {
        PQAlgebra { seq, p, q, act: Box::new(act) }
    }

    pub fn seq(&self) -> &SymSeq {
        &self.seq
    }

    pub fn left_operad(&self) -> &Operad {
        self.p
    }

    pub fn right_operad(&self) -> &Operad {
        self.q
    }

    pub fn act(&self, x: &PQElement, args: &[Atom]) -> Result<Atom> {
        (self.act)(x, args)
    }
}

/// A bimodule regarded as a `(P+Q)`-algebra through [`pq_action`].
pub fn bimodule_to_algebra(m: &Bimodule) -> PQAlgebra<'_> {
    PQAlgebra::new(
        m.seq().clone(),
        m.left_operad(),
        m.right_operad(),
        move |x, args| pq_action(m, x, args),
    )
}

/// Entries the algebra cannot evaluate inside its tabulated range are
/// skipped rather than fatal when retabulating a bimodule.
fn demote_undefined(r: Result<Atom>) -> Result<Atom> {
    r.map_err(|e| match e {
        WbError::Undefined(s) => WbError::BoundOverflow(s),
        e => e,
    })
}

/// The element `ι_r(q)` inserting `q ∈ Q(mm)` at slot `i` of color `n`:
/// unit head, the interval-collapse index map, unit decorations away from
/// `i`.
fn iota_right(p: &Operad, q: &Operad, n: usize, i: usize, mm: usize, qq: &Atom) -> PQElement {
    let alpha: Vec<usize> = (1..=n + mm - 1)
        .map(|j| {
            if j < i {
                j
            } else if j < i + mm {
                i
            } else {
                j - mm + 1
            }
        })
        .collect();
    let mut qs = vec![q.unit().clone(); n];
    qs[i - 1] = qq.clone();
    PQElement { p: p.unit().clone(), colors: vec![n], alpha, qs }
}

/// The element `ι_ℓ(head)` with the given input colors: identity index
/// map, unit decorations.
fn iota_left(q: &Operad, head: &Atom, profile: &[usize]) -> PQElement {
    let n: usize = profile.iter().sum();
    PQElement {
        p: head.clone(),
        colors: profile.to_vec(),
        alpha: (1..=n).collect(),
        qs: vec![q.unit().clone(); n],
    }
}

/// The pure-permutation element of `(P+Q)(n; n)` acting as `x ↦ x·σ`.
fn perm_element(p: &Operad, q: &Operad, n: usize, sigma: &Perm) -> PQElement {
    PQElement {
        p: p.unit().clone(),
        colors: vec![n],
        alpha: sigma.inverse().images().to_vec(),
        qs: vec![q.unit().clone(); n],
    }
}

/// Recovers a bimodule from a `(P+Q)`-algebra, tabulating up to arity `r`.
/// The symmetric structure is read off the pure-permutation elements, the
/// right operations from `ι_r`, and the left operations from `ι_ℓ`.
pub fn algebra_to_bimodule(
    name: impl Into<String>,
    alg: &PQAlgebra<'_>,
    r: usize,
) -> Result<Bimodule> {
    let p = alg.left_operad().clone();
    let q = alg.right_operad().clone();
    let mut seq = SymSeq::new();
    for n in alg.seq().arities().filter(|&n| n <= r) {
        let space = alg.seq().component(n).unwrap().clone();
        let mut table: BTreeMap<(Perm, Atom), Atom> = BTreeMap::new();
        for sigma in Perm::all(n) {
            let e = perm_element(&p, &q, n, &sigma);
            for a in space.iter() {
                table.insert((sigma.clone(), a.clone()), alg.act(&e, &[a.clone()])?);
            }
        }
        seq.insert_component(n, space, |a, sigma| {
            table[&(sigma.clone(), a.clone())].clone()
        })?;
    }
    let p2 = p.clone();
    let q2 = q.clone();
    let q3 = q.clone();
    Bimodule::from_fn(
        name,
        seq,
        p.clone(),
        q.clone(),
        move |p0| {
            let e = PQElement { p: p0.clone(), colors: vec![], alpha: vec![], qs: vec![] };
            demote_undefined(alg.act(&e, &[]))
        },
        move |n, i, x, mm, qq| {
            demote_undefined(alg.act(&iota_right(&p2, &q2, n, i, mm, qq), &[x.clone()]))
        },
        move |_n, head, profile, args| {
            demote_undefined(alg.act(&iota_left(&q3, head, profile), args))
        },
    )
}

// ---------------------------------------------------------------------------
// O₊
// ---------------------------------------------------------------------------

/// A normal-form element of `O₊(n; m)`: a pointed index map
/// `α₊: [m]₊ → [n]₊` together with decorations `θᵢ ∈ O(|α₊⁻¹(i)|)` for
/// `i ∈ [n]₊`.  The basepoint fiber includes the basepoint itself; by
/// convention it occupies the first input slot of `θ₀`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct OPlusElement {
    /// Input color `n`.
    pub n: usize,
    /// `α₊(j)` for `j ∈ [m]`, with `0` for the basepoint.
    pub alpha: Vec<usize>,
    /// Decoration over the basepoint fiber, in `O(1 + |α₊⁻¹(0) ∖ {0}|)`.
    pub theta0: Atom,
    /// Decorations over the fibers of `1, …, n`.
    pub thetas: Vec<Atom>,
}

impl OPlusElement {
    pub fn output(&self) -> usize {
        self.alpha.len()
    }

    fn fiber0(&self) -> Vec<usize> {
        (1..=self.alpha.len()).filter(|&j| self.alpha[j - 1] == 0).collect()
    }

    pub fn validate(&self, o: &Operad) -> Result<()> {
        if self.thetas.len() != self.n {
            return Err(WbError::Precondition(format!(
                "{} decorations for input color {}",
                self.thetas.len(),
                self.n
            )));
        }
        if self.alpha.iter().any(|&v| v > self.n) {
            return Err(WbError::Precondition(format!(
                "pointed index map value outside [{}]₊",
                self.n
            )));
        }
        let fib = fibers(
            &self.alpha.iter().map(|&v| v + 1).collect::<Vec<_>>(),
            self.n + 1,
        );
        let k0 = 1 + fib[0].len();
        match o.component(k0) {
            Some(c) if c.contains(&self.theta0) => {}
            _ => {
                return Err(WbError::Precondition(format!(
                    "basepoint decoration `{}` is not a {k0}-ary element of {}",
                    self.theta0,
                    o.name()
                )))
            }
        }
        for (i, t) in self.thetas.iter().enumerate() {
            let len = fib[i + 1].len();
            match o.component(len) {
                Some(c) if c.contains(t) => {}
                _ => {
                    return Err(WbError::Precondition(format!(
                        "decoration `{t}` at index {} is not a {len}-ary element of {}",
                        i + 1,
                        o.name()
                    )))
                }
            }
        }
        Ok(())
    }

    /// Renders `(op+ (alpha m -> n : v₁ … v_m) (t 0 <atom>) (t 1 <atom>) …)`.
    pub fn to_atom(&self) -> Atom {
        let mut alpha = vec![
            Sexp::atom("alpha"),
            Sexp::nat(self.alpha.len()),
            Sexp::atom("->"),
            Sexp::nat(self.n),
            Sexp::atom(":"),
        ];
        alpha.extend(self.alpha.iter().map(|&v| Sexp::nat(v)));
        let mut items = vec![Sexp::atom("op+"), Sexp::list(alpha)];
        items.push(Sexp::list(vec![
            Sexp::atom("t"),
            Sexp::nat(0),
            Sexp::atom(self.theta0.as_str()),
        ]));
        for (i, t) in self.thetas.iter().enumerate() {
            items.push(Sexp::list(vec![
                Sexp::atom("t"),
                Sexp::nat(i + 1),
                Sexp::atom(t.as_str()),
            ]));
        }
        Atom::new(Sexp::list(items).to_string())
    }

    pub fn from_atom(a: &Atom) -> Result<OPlusElement> {
        let sx = sexp::parse(a.as_str())?;
        let items = sx.as_tagged("op+")?;
        if items.is_empty() {
            return Err(WbError::Parse("empty op+ element".into()));
        }
        let alpha_items = items[0].as_tagged("alpha")?;
        if alpha_items.len() < 4 {
            return Err(WbError::Parse("malformed pointed index map".into()));
        }
        let m = alpha_items[0].as_nat()?;
        let n = alpha_items[2].as_nat()?;
        if alpha_items.len() != 4 + m {
            return Err(WbError::Parse("pointed index map length mismatch".into()));
        }
        let alpha: Vec<usize> =
            alpha_items[4..].iter().map(Sexp::as_nat).collect::<Result<_>>()?;
        let mut theta0 = None;
        let mut thetas = vec![None; n];
        for item in &items[1..] {
            let t_items = item.as_tagged("t")?;
            if t_items.len() != 2 {
                return Err(WbError::Parse("malformed decoration".into()));
            }
            let i = t_items[0].as_nat()?;
            let v = Atom::new(t_items[1].as_atom()?);
            if i == 0 {
                theta0 = Some(v);
            } else if i <= n {
                thetas[i - 1] = Some(v);
            } else {
                return Err(WbError::Parse(format!("decoration index {i} outside [{n}]₊")));
            }
        }
        let theta0 =
            theta0.ok_or_else(|| WbError::Parse("missing basepoint decoration".into()))?;
        let thetas: Vec<Atom> = thetas
            .into_iter()
            .enumerate()
            .map(|(i, t)| {
                t.ok_or_else(|| WbError::Parse(format!("missing decoration at index {}", i + 1)))
            })
            .collect::<Result<_>>()?;
        Ok(OPlusElement { n, alpha, theta0, thetas })
    }
}

/// The identity of `O₊` at color `n`.
pub fn oplus_unit(o: &Operad, n: usize) -> OPlusElement {
    OPlusElement {
        n,
        alpha: (1..=n).collect(),
        theta0: o.unit().clone(),
        thetas: vec![o.unit().clone(); n],
    }
}

/// The component `O₊(n; m)`: all pointed index maps with all decorations.
pub fn oplus_component(o: &Operad, n: usize, m: usize) -> Result<FiniteSpace> {
    let mut elems = Vec::new();
    let maps: Vec<Vec<usize>> = if m == 0 {
        vec![vec![]]
    } else {
        (0..m).map(|_| 0..=n).multi_cartesian_product().collect()
    };
    for alpha in maps {
        let fib = fibers(&alpha.iter().map(|&v| v + 1).collect::<Vec<_>>(), n + 1);
        let k0 = 1 + fib[0].len();
        let base = o.component(k0).ok_or_else(|| {
            WbError::BoundOverflow(format!(
                "{} has no arity-{k0} component for a basepoint decoration",
                o.name()
            ))
        })?;
        let rest: Vec<&FiniteSpace> = (1..=n)
            .map(|i| {
                o.component(fib[i].len()).ok_or_else(|| {
                    WbError::BoundOverflow(format!(
                        "{} has no arity-{} component for a fiber decoration",
                        o.name(),
                        fib[i].len()
                    ))
                })
            })
            .collect::<Result<_>>()?;
        let mut tuples: Vec<Vec<Atom>> = vec![vec![]];
        for comp in &rest {
            if comp.is_empty() {
                tuples.clear();
                break;
            }
            tuples = tuples
                .into_iter()
                .cartesian_product(comp.iter())
                .map(|(mut t, a)| {
                    t.push(a.clone());
                    t
                })
                .collect();
        }
        for theta0 in base.iter() {
            for thetas in &tuples {
                let e = OPlusElement {
                    n,
                    alpha: alpha.clone(),
                    theta0: theta0.clone(),
                    thetas: thetas.clone(),
                };
                elems.push(e.to_atom());
            }
        }
    }
    elems.sort();
    elems.dedup();
    FiniteSpace::new(elems)
}

/// Composition `x ∘₁ y : O₊(k; m)` for `x ∈ O₊(n; m)` and `y ∈ O₊(k; n)`.
/// Away from the basepoint each decoration of `y` absorbs the decorations
/// of `x` over its fiber; over the basepoint the composite is
/// `θ₀(x) ∘₁ [θ₀(y)(1, θ_{i₁}(x), …, θ_{i_p}(x))]` with
/// `{i₁ < ⋯ < i_p} = β₊⁻¹(0) ∖ {0}`, followed in both cases by the shuffle
/// restoring the canonical fiber order.
pub fn oplus_compose(o: &Operad, x: &OPlusElement, y: &OPlusElement) -> Result<OPlusElement> {
    if y.output() != x.n {
        return Err(WbError::Precondition(format!(
            "color mismatch: composing input color {} with output color {}",
            x.n,
            y.output()
        )));
    }
    let n = x.n;
    let k = y.n;
    let gamma: Vec<usize> = x
        .alpha
        .iter()
        .map(|&v| if v == 0 { 0 } else { y.alpha[v - 1] })
        .collect();
    // Fibers of x's index map inside [m], including the basepoint fiber.
    let xfib = fibers(&x.alpha.iter().map(|&v| v + 1).collect::<Vec<_>>(), n + 1);
    // Fibers of y's index map inside [n].
    let yfib = fibers(&y.alpha.iter().map(|&v| v + 1).collect::<Vec<_>>(), k + 1);

    let mut thetas = Vec::with_capacity(k);
    for j in 1..=k {
        let bf = &yfib[j];
        let args: Vec<(usize, Atom)> = bf
            .iter()
            .map(|&i| (xfib[i].len(), x.thetas[i - 1].clone()))
            .collect();
        let inner = operad_gamma(o, bf.len(), &y.thetas[j - 1], &args)?;
        let concat: Vec<usize> =
            bf.iter().flat_map(|&i| xfib[i].iter().copied()).collect();
        let sigma = shuffle_perm(&concat);
        thetas.push(if sigma.is_identity() {
            inner
        } else {
            o.act(concat.len(), &inner, &sigma)?
        });
    }

    let bf0 = &yfib[0];
    let p = bf0.len();
    let mut args: Vec<(usize, Atom)> = vec![(1, o.unit().clone())];
    args.extend(bf0.iter().map(|&i| (xfib[i].len(), x.thetas[i - 1].clone())));
    let inner = operad_gamma(o, 1 + p, &y.theta0, &args)?;
    let inner_arity = 1 + bf0.iter().map(|&i| xfib[i].len()).sum::<usize>();
    let k0x = 1 + xfib[0].len();
    let raw = o.compose(k0x, 1, &x.theta0, inner_arity, &inner)?;
    // Block order of the raw composite: the basepoint, the fibers of x over
    // β₊⁻¹(0) ∖ {0}, then x's own non-basepoint part of the 0-fiber.  Zero
    // stands in for the basepoint when ranking.
    let mut concat: Vec<usize> = vec![0];
    concat.extend(bf0.iter().flat_map(|&i| xfib[i].iter().copied()));
    concat.extend(xfib[0].iter().copied());
    let sigma = shuffle_perm(&concat);
    let theta0 = if sigma.is_identity() {
        raw
    } else {
        o.act(concat.len(), &raw, &sigma)?
    };

    Ok(OPlusElement { n: k, alpha: gamma, theta0, thetas })
}

/// The action of an `O₊` normal form on an infinitesimal bimodule: right
/// insertions for the non-basepoint decorations (top slot first), the
/// infinitesimal left operation at the basepoint-first slot of `θ₀`, then
/// the shuffle restoring the canonical input order.
pub fn oplus_action(m: &IBimodule, x: &OPlusElement, a: &Atom) -> Result<Atom> {
    let n = x.n;
    let fib = fibers(&x.alpha.iter().map(|&v| v + 1).collect::<Vec<_>>(), n + 1);
    let mut acc = a.clone();
    let mut cur = n;
    for i in (1..=n).rev() {
        let ki = fib[i].len();
        acc = m.right(cur, i, &acc, ki, &x.thetas[i - 1])?;
        cur = cur + ki - 1;
    }
    let k0 = 1 + fib[0].len();
    acc = m.left(k0, 1, &x.theta0, cur, &acc)?;
    let mut concat: Vec<usize> = (1..=n).flat_map(|i| fib[i].iter().copied()).collect();
    concat.extend(fib[0].iter().copied());
    let sigma = shuffle_perm(&concat);
    if sigma.is_identity() {
        Ok(acc)
    } else {
        m.act(x.output(), &acc, &sigma)
    }
}

// ---------------------------------------------------------------------------
// Infinitesimal bimodules ↔ O₊-algebras
// ---------------------------------------------------------------------------

/// An `O₊`-algebra: all operations are unary, so the structure map takes a
/// single argument.
pub struct OPlusAlgebra<'a> {
    seq: SymSeq,
    o: &'a Operad,
    act: Box<dyn Fn(&OPlusElement, &Atom) -> Result<Atom> + 'a>,
}

impl<'a> OPlusAlgebra<'a> {
    pub fn new(
        seq: SymSeq,
        o: &'a Operad,
        act: impl Fn(&OPlusElement, &Atom) -> Result<Atom> + 'a,
    ) -> Self {
        OPlusAlgebra { seq, o, act: Box::new(act) }
    }

    pub fn seq(&self) -> &SymSeq {
        &self.seq
    }

    pub fn operad(&self) -> &Operad {
        self.o
    }

    pub fn act(&self, x: &OPlusElement, a: &Atom) -> Result<Atom> {
        (self.act)(x, a)
    }
}

/// An infinitesimal bimodule regarded as an `O₊`-algebra through
/// [`oplus_action`].
pub fn ibimodule_to_algebra(m: &IBimodule) -> OPlusAlgebra<'_> {
    OPlusAlgebra::new(m.seq().clone(), m.operad(), move |x, a| oplus_action(m, x, a))
}

/// The pure-permutation element of `O₊(n; n)` acting as `x ↦ x·σ`.
fn oplus_perm_element(o: &Operad, n: usize, sigma: &Perm) -> OPlusElement {
    OPlusElement {
        n,
        alpha: sigma.inverse().images().to_vec(),
        theta0: o.unit().clone(),
        thetas: vec![o.unit().clone(); n],
    }
}

/// Recovers an infinitesimal bimodule from an `O₊`-algebra, tabulating up
/// to arity `r`.
pub fn algebra_to_ibimodule(
    name: impl Into<String>,
    alg: &OPlusAlgebra<'_>,
    r: usize,
) -> Result<IBimodule> {
    let o = alg.operad().clone();
    let mut seq = SymSeq::new();
    for n in alg.seq().arities().filter(|&n| n <= r) {
        let space = alg.seq().component(n).unwrap().clone();
        let mut table: BTreeMap<(Perm, Atom), Atom> = BTreeMap::new();
        for sigma in Perm::all(n) {
            let e = oplus_perm_element(&o, n, &sigma);
            for a in space.iter() {
                table.insert((sigma.clone(), a.clone()), alg.act(&e, a)?);
            }
        }
        seq.insert_component(n, space, |a, sigma| {
            table[&(sigma.clone(), a.clone())].clone()
        })?;
    }
    let o2 = o.clone();
    let o3 = o.clone();
    IBimodule::from_fn(
        name,
        seq,
        o.clone(),
        move |n, i, x, mm, q| {
            let alpha: Vec<usize> = (1..=n + mm - 1)
                .map(|j| {
                    if j < i {
                        j
                    } else if j < i + mm {
                        i
                    } else {
                        j - mm + 1
                    }
                })
                .collect();
            let mut thetas = vec![o2.unit().clone(); n];
            thetas[i - 1] = q.clone();
            let e = OPlusElement { n, alpha, theta0: o2.unit().clone(), thetas };
            demote_undefined(alg.act(&e, x))
        },
        move |n, i, theta, mm, x| {
            // The element of O₊(mm; n+mm−1) inserting x at slot i of theta:
            // positions outside the interval land in the basepoint fiber,
            // and theta is rotated so that slot i becomes the leading
            // (basepoint) slot.
            let alpha: Vec<usize> = (1..=n + mm - 1)
                .map(|j| if j < i || j >= i + mm { 0 } else { j - i + 1 })
                .collect();
            let pi = Perm::from_images(
                (1..=n)
                    .map(|t| {
                        if t < i {
                            t + 1
                        } else if t == i {
                            1
                        } else {
                            t
                        }
                    })
                    .collect(),
            )?;
            let theta0 = o3.act(n, theta, &pi)?;
            let e = OPlusElement {
                n: mm,
                alpha,
                theta0,
                thetas: vec![o3.unit().clone(); mm],
            };
            demote_undefined(alg.act(&e, x))
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bimodules::{operad_as_bimodule, operad_as_ibimodule};
    use crate::operads::{ass, com};

    fn com_pq(max: usize) -> (Operad, Operad) {
        (com(max), com(max))
    }

    fn ass_bimodule(max: usize) -> Bimodule {
        let a = ass(max);
        operad_as_bimodule(&a, &a, |_n, x| Ok(x.clone())).unwrap()
    }

    /// All elements of a component, decoded.
    fn pq_elements(p: &Operad, q: &Operad, colors: &[usize], m: usize) -> Vec<PQElement> {
        pq_component(p, q, colors, m)
            .unwrap()
            .iter()
            .map(|a| PQElement::from_atom(a, colors).unwrap())
            .collect()
    }

    fn oplus_elements(o: &Operad, n: usize, m: usize) -> Vec<OPlusElement> {
        oplus_component(o, n, m)
            .unwrap()
            .iter()
            .map(|a| OPlusElement::from_atom(a).unwrap())
            .collect()
    }

    #[test]
    fn component_counts_index_maps_and_decorations() {
        let (p, q) = com_pq(3);
        // Colors (1,1), m = 2: all four maps [2] → [2], singleton
        // decorations throughout.
        assert_eq!(pq_component(&p, &q, &[1, 1], 2).unwrap().len(), 4);
        // m = 0: the empty map with arity-zero decorations on both indices.
        assert_eq!(pq_component(&p, &q, &[1, 1], 0).unwrap().len(), 1);
        // An empty arity-zero decoration operad kills non-surjective maps.
        let qp = q.positive_part();
        assert_eq!(pq_component(&p, &qp, &[1, 1], 2).unwrap().len(), 2);
    }

    #[test]
    fn positive_component_restricts_to_surjections() {
        let p = com(3).positive_part();
        let q = com(3).positive_part();
        assert_eq!(pq_positive_component(&p, &q, &[1, 1], 2).unwrap().len(), 2);
        // No surjection onto a larger set.
        assert_eq!(pq_positive_component(&p, &q, &[1, 1], 1).unwrap().len(), 0);
        // Subset of the full component.
        let full = pq_component(&p, &q, &[1, 1], 2).unwrap();
        for a in pq_positive_component(&p, &q, &[1, 1], 2).unwrap().iter() {
            assert!(full.contains(a));
        }
    }

    #[test]
    fn positive_component_rejects_unreduced_inputs() {
        let (p, q) = com_pq(2);
        assert!(matches!(
            pq_positive_component(&p, &q, &[1], 1),
            Err(WbError::Precondition(_))
        ));
    }

    #[test]
    fn element_syntax_round_trips() {
        let a = ass(3);
        for colors in [vec![1usize, 2], vec![2], vec![]] {
            let m = 2.min(colors.iter().sum::<usize>() + 1);
            for e in pq_elements(&a, &a, &colors, m) {
                let back = PQElement::from_atom(&e.to_atom(), &colors).unwrap();
                assert_eq!(back, e);
            }
        }
        for e in oplus_elements(&a, 2, 2) {
            assert_eq!(OPlusElement::from_atom(&e.to_atom()).unwrap(), e);
        }
    }

    #[test]
    fn unit_composes_trivially() {
        let a = ass(4);
        for colors in [vec![1usize, 1], vec![2, 1]] {
            for x in pq_elements(&a, &a, &colors, 2) {
                // Left unit: unit at output color ∘₁ x.
                let u = pq_unit(&a, &a, x.output());
                assert_eq!(pq_compose(&a, &a, &u, 1, &x).unwrap(), x);
                // Right units at each slot.
                for i in 1..=colors.len() {
                    let ui = pq_unit(&a, &a, colors[i - 1]);
                    assert_eq!(pq_compose(&a, &a, &x, i, &ui).unwrap(), x);
                }
            }
        }
    }

    #[test]
    fn composition_is_associative() {
        let a = ass(4);
        // Nested associativity (z into y) over decorations with a
        // noncommutative operad, so the fiber shuffles matter.
        let xs = pq_elements(&a, &a, &[1, 1], 2);
        let ys = pq_elements(&a, &a, &[2], 1);
        let zs = pq_elements(&a, &a, &[1, 1], 2);
        let mut cases = 0;
        for x in &xs {
            for y in &ys {
                for z in &zs {
                    let xy = pq_compose(&a, &a, x, 1, y).unwrap();
                    let lhs = pq_compose(&a, &a, &xy, 1, z).unwrap();
                    let yz = pq_compose(&a, &a, y, 1, z).unwrap();
                    let rhs = pq_compose(&a, &a, x, 1, &yz).unwrap();
                    assert_eq!(lhs, rhs, "nested associativity at {x:?}, {y:?}, {z:?}");
                    cases += 1;
                }
            }
        }
        assert!(cases > 0);
        // Horizontal associativity: inserting into two different slots
        // commutes.  After inserting a two-input element at slot 1, the old
        // slot 2 sits at position 3.
        let xs = pq_elements(&a, &a, &[2, 2], 2);
        let ws = pq_elements(&a, &a, &[1, 1], 2);
        for x in xs.iter().step_by(5) {
            for y in ws.iter().step_by(2) {
                for z in ws.iter().step_by(3) {
                    let lhs = pq_compose(&a, &a, &pq_compose(&a, &a, x, 1, y).unwrap(), 3, z)
                        .unwrap();
                    let rhs = pq_compose(&a, &a, &pq_compose(&a, &a, x, 2, z).unwrap(), 1, y)
                        .unwrap();
                    assert_eq!(lhs, rhs, "horizontal associativity at {x:?}, {y:?}, {z:?}");
                }
            }
        }
    }

    #[test]
    fn block_permutations_commute_with_composition() {
        let a = ass(4);
        let xs = pq_elements(&a, &a, &[1, 2], 2);
        let ys = pq_elements(&a, &a, &[1, 1], 1);
        for x in &xs {
            for y in &ys {
                for sigma in Perm::all(2) {
                    for tau in Perm::all(2) {
                        let xs2 = pq_act(&a, x, &sigma).unwrap();
                        let ys2 = pq_act(&a, y, &tau).unwrap();
                        // Only slots of color 1 accept y (its output is 1).
                        let p = 1usize;
                        if xs2.colors[sigma.apply(p) - 1] != y.output() {
                            continue;
                        }
                        let lhs = pq_compose(&a, &a, &xs2, sigma.apply(p), &ys2).unwrap();
                        let rhs = pq_act(
                            &a,
                            &pq_compose(&a, &a, x, p, y).unwrap(),
                            &sigma.insert(p, &tau).unwrap(),
                        )
                        .unwrap();
                        assert_eq!(lhs, rhs, "equivariance at {x:?}, {y:?}, {sigma}, {tau}");
                    }
                }
            }
        }
    }

    #[test]
    fn action_respects_composition() {
        // The structure map of the algebra attached to a bimodule turns
        // composition in P+Q into composition of actions.  Noncommutative
        // decorations pin the shuffles.
        let m = ass_bimodule(4);
        let a = ass(4);
        let xs = pq_elements(&a, &a, &[1, 1], 2);
        let ys = pq_elements(&a, &a, &[2], 1);
        for x in &xs {
            for y in &ys {
                let xy = pq_compose(&a, &a, x, 1, y).unwrap();
                for b in m.component(1).unwrap().clone().iter() {
                    for c in m.component(1).unwrap().clone().iter() {
                        for d in m.component(1).unwrap().clone().iter() {
                            let inner = pq_action(&m, y, &[b.clone(), c.clone()]).unwrap();
                            let lhs = pq_action(&m, x, &[inner, d.clone()]).unwrap();
                            let rhs =
                                pq_action(&m, &xy, &[b.clone(), c.clone(), d.clone()]).unwrap();
                            assert_eq!(lhs, rhs);
                        }
                    }
                }
            }
        }
        // A second shape whose index maps interleave the two blocks.
        let xs = pq_elements(&a, &a, &[1, 1], 3);
        let ys = pq_elements(&a, &a, &[1], 1);
        for x in xs.iter().step_by(3) {
            for y in &ys {
                let xy = pq_compose(&a, &a, x, 2, y).unwrap();
                for b in m.component(1).unwrap().clone().iter() {
                    for c in m.component(1).unwrap().clone().iter() {
                        let inner = pq_action(&m, y, &[c.clone()]).unwrap();
                        let lhs = pq_action(&m, x, &[b.clone(), inner]).unwrap();
                        let rhs = pq_action(&m, &xy, &[b.clone(), c.clone()]).unwrap();
                        assert_eq!(lhs, rhs);
                    }
                }
            }
        }
    }

    #[test]
    fn action_respects_the_symmetric_structure() {
        let m = ass_bimodule(4);
        let a = ass(4);
        for x in pq_elements(&a, &a, &[1, 1], 2) {
            for sigma in Perm::all(2) {
                let xs = pq_act(&a, &x, &sigma).unwrap();
                for b in m.component(1).unwrap().clone().iter() {
                    for c in m.component(1).unwrap().clone().iter() {
                        let args = [b.clone(), c.clone()];
                        let permuted: Vec<Atom> =
                            (1..=2).map(|t| args[sigma.apply(t) - 1].clone()).collect();
                        let lhs = pq_action(&m, &xs, &args).unwrap();
                        let rhs = pq_action(&m, &x, &permuted).unwrap();
                        assert_eq!(lhs, rhs, "at {x:?}, {sigma}");
                    }
                }
            }
        }
    }

    #[test]
    fn right_insertion_element_reproduces_the_right_operations() {
        let m = ass_bimodule(4);
        let a = ass(4);
        for n in 1..=2usize {
            for mm in 0..=2usize {
                if n + mm == 0 || n + mm - 1 > 4 {
                    continue;
                }
                for i in 1..=n {
                    for x in m.component(n).unwrap().clone().iter() {
                        for q in a.component(mm).unwrap().clone().iter() {
                            let e = iota_right(&a, &a, n, i, mm, q);
                            assert_eq!(
                                pq_action(&m, &e, &[x.clone()]).unwrap(),
                                m.right(n, i, x, mm, q).unwrap()
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn bimodule_algebra_round_trip_is_the_identity() {
        let m = ass_bimodule(3);
        let alg = bimodule_to_algebra(&m);
        let m2 = algebra_to_bimodule("round trip", &alg, 3).unwrap();
        let r = 3;
        // Components and symmetric structure agree.
        for n in 0..=r {
            let c1 = m.component(n).unwrap();
            let c2 = m2.component(n).unwrap();
            assert_eq!(c1.elements(), c2.elements());
            for x in c1.iter() {
                for sigma in Perm::all(n) {
                    assert_eq!(m.act(n, x, &sigma).unwrap(), m2.act(n, x, &sigma).unwrap());
                }
            }
        }
        // Structure operations agree wherever both are defined.
        for p0 in m.left_operad().component(0).unwrap().clone().iter() {
            assert_eq!(m.gamma0(p0).unwrap(), m2.gamma0(p0).unwrap());
        }
        for n in 1..=r {
            for mm in 0..=r {
                if n + mm < 1 || n + mm - 1 > r {
                    continue;
                }
                for i in 1..=n {
                    for x in m.component(n).unwrap().clone().iter() {
                        for q in m.right_operad().component(mm).unwrap().clone().iter() {
                            assert_eq!(
                                m.right(n, i, x, mm, q).unwrap(),
                                m2.right(n, i, x, mm, q).unwrap()
                            );
                        }
                    }
                }
            }
        }
        for head in m.left_operad().component(2).unwrap().clone().iter() {
            for x in m.component(1).unwrap().clone().iter() {
                for y in m.component(2).unwrap().clone().iter() {
                    assert_eq!(
                        m.left(2, head, &[1, 2], &[x.clone(), y.clone()]).unwrap(),
                        m2.left(2, head, &[1, 2], &[x.clone(), y.clone()]).unwrap()
                    );
                }
            }
        }
        // The recovered structure is again a lawful bimodule.
        let report = m2.check_axioms(2);
        assert!(report.all_passed(), "{report}");
    }

    #[test]
    fn oplus_component_counts_pointed_maps() {
        let o = com(2);
        // n = m = 1: the two pointed maps [1]₊ → [1]₊.
        assert_eq!(oplus_component(&o, 1, 1).unwrap().len(), 2);
        // m = 0: only the trivial map, decorated by O(1) at the basepoint.
        assert_eq!(oplus_component(&o, 1, 0).unwrap().len(), 1);
    }

    #[test]
    fn oplus_unit_composes_trivially() {
        let a = ass(4);
        for x in oplus_elements(&a, 1, 2) {
            let u_out = oplus_unit(&a, x.output());
            let u_in = oplus_unit(&a, x.n);
            assert_eq!(oplus_compose(&a, &u_out, &x).unwrap(), x);
            assert_eq!(oplus_compose(&a, &x, &u_in).unwrap(), x);
        }
    }

    #[test]
    fn oplus_composition_is_associative() {
        let a = ass(4);
        let xs = oplus_elements(&a, 2, 2);
        let ys = oplus_elements(&a, 1, 2);
        let zs = oplus_elements(&a, 1, 1);
        for x in xs.iter().step_by(4) {
            for y in ys.iter().step_by(3) {
                for z in &zs {
                    let lhs =
                        oplus_compose(&a, &oplus_compose(&a, x, y).unwrap(), z).unwrap();
                    let rhs =
                        oplus_compose(&a, x, &oplus_compose(&a, y, z).unwrap()).unwrap();
                    assert_eq!(lhs, rhs, "associativity at {x:?}, {y:?}, {z:?}");
                }
            }
        }
    }

    #[test]
    fn oplus_action_respects_composition() {
        let m = operad_as_ibimodule(&ass(4)).unwrap();
        let a = ass(4);
        let xs = oplus_elements(&a, 2, 3);
        let ys = oplus_elements(&a, 1, 2);
        for x in xs.iter().step_by(7) {
            for y in ys.iter().step_by(2) {
                let xy = oplus_compose(&a, x, y).unwrap();
                for b in m.component(1).unwrap().clone().iter() {
                    let inner = oplus_action(&m, y, b).unwrap();
                    let lhs = oplus_action(&m, x, &inner).unwrap();
                    let rhs = oplus_action(&m, &xy, b).unwrap();
                    assert_eq!(lhs, rhs, "at {x:?}, {y:?}, {b}");
                }
            }
        }
    }

    #[test]
    fn ibimodule_algebra_round_trip_is_the_identity() {
        let m = operad_as_ibimodule(&ass(3)).unwrap();
        let alg = ibimodule_to_algebra(&m);
        let m2 = algebra_to_ibimodule("round trip", &alg, 3).unwrap();
        let r = 3;
        for n in 0..=r {
            let c1 = m.component(n).unwrap();
            let c2 = m2.component(n).unwrap();
            assert_eq!(c1.elements(), c2.elements());
            for x in c1.iter() {
                for sigma in Perm::all(n) {
                    assert_eq!(m.act(n, x, &sigma).unwrap(), m2.act(n, x, &sigma).unwrap());
                }
            }
        }
        for n in 1..=r {
            for mm in 0..=r {
                if n + mm < 1 || n + mm - 1 > r {
                    continue;
                }
                for i in 1..=n {
                    for x in m.component(n).unwrap().clone().iter() {
                        for q in m.operad().component(mm).unwrap().clone().iter() {
                            assert_eq!(
                                m.right(n, i, x, mm, q).unwrap(),
                                m2.right(n, i, x, mm, q).unwrap()
                            );
                            assert_eq!(
                                m.left(mm, i.min(mm.max(1)), q, n, x).ok(),
                                m2.left(mm, i.min(mm.max(1)), q, n, x).ok()
                            );
                        }
                    }
                }
            }
        }
        let report = m2.check_axioms(2);
        assert!(report.all_passed(), "{report}");
    }
}
