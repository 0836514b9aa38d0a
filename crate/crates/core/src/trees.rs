use std::fmt;

use itertools::Itertools;

use crate::error::{Result, WbError};
use crate::perm::Perm;
use crate::sexp::{self, Sexp};
use crate::space::{Atom, FiniteSpace};

/// A value in the finite chain model of the unit interval: a reduced
/// fraction `num/den` with `num ≤ den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Param {
    num: u32,
    den: u32,
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl Param {
    pub fn new(num: u32, den: u32) -> Result<Param> {
        if den == 0 || num > den {
            return Err(WbError::Precondition(format!(
                "parameter {num}/{den} is not in the unit interval"
            )));
        }
        let g = gcd(num.max(1), den);
        Ok(Param {
            num: num / g,
            den: den / g,
        })
    }

    pub fn zero() -> Param {
        Param { num: 0, den: 1 }
    }

    pub fn one() -> Param {
        Param { num: 1, den: 1 }
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn is_one(&self) -> bool {
        self.num == self.den
    }

    /// All chain values `0, 1/N, …, 1`.
    pub fn chain(n: u32) -> Vec<Param> {
        (0..=n).map(|k| Param::new(k, n).unwrap()).collect()
    }

    /// The midpoint rescaling `t ↦ t/2`, used when refining a chain.
    pub fn halve(&self) -> Param {
        Param::new(self.num, self.den * 2).unwrap()
    }
}

impl PartialOrd for Param {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Param {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.num as u64 * other.den as u64).cmp(&(other.num as u64 * self.den as u64))
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// A planar rooted tree. Leaves carry labels; internal vertices may carry a
/// decoration, a parameter, and a pearl flag. Shape-level operations ignore
/// decorations.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Tree {
    Leaf(usize),
    Node {
        pearl: bool,
        label: Option<Atom>,
        param: Option<Param>,
        children: Vec<Tree>,
    },
}

impl Tree {
    pub fn leaf(k: usize) -> Tree {
        Tree::Leaf(k)
    }

    pub fn vertex(children: Vec<Tree>) -> Tree {
        Tree::Node {
            pearl: false,
            label: None,
            param: None,
            children,
        }
    }

    pub fn pearl_vertex(children: Vec<Tree>) -> Tree {
        Tree::Node {
            pearl: true,
            label: None,
            param: None,
            children,
        }
    }

    pub fn labeled(label: Atom, children: Vec<Tree>) -> Tree {
        Tree::Node {
            pearl: false,
            label: Some(label),
            param: None,
            children,
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Tree::Leaf(_))
    }

    pub fn is_pearl(&self) -> bool {
        matches!(self, Tree::Node { pearl: true, .. })
    }

    pub fn children(&self) -> &[Tree] {
        match self {
            Tree::Leaf(_) => &[],
            Tree::Node { children, .. } => children,
        }
    }

    pub fn label(&self) -> Option<&Atom> {
        match self {
            Tree::Leaf(_) => None,
            Tree::Node { label, .. } => label.as_ref(),
        }
    }

    pub fn param(&self) -> Option<Param> {
        match self {
            Tree::Leaf(_) => None,
            Tree::Node { param, .. } => *param,
        }
    }

    pub fn with_label(mut self, l: Atom) -> Tree {
        if let Tree::Node { label, .. } = &mut self {
            *label = Some(l);
        }
        self
    }

    pub fn with_param(mut self, p: Param) -> Tree {
        if let Tree::Node { param, .. } = &mut self {
            *param = Some(p);
        }
        self
    }

    /// Number of leaves.
    pub fn arity(&self) -> usize {
        match self {
            Tree::Leaf(_) => 1,
            Tree::Node { children, .. } => children.iter().map(Tree::arity).sum(),
        }
    }

    /// Leaf labels in planar order.
    pub fn leaf_labels(&self) -> Vec<usize> {
        match self {
            Tree::Leaf(k) => vec![*k],
            Tree::Node { children, .. } => {
                children.iter().flat_map(|c| c.leaf_labels()).collect()
            }
        }
    }

    /// Number of internal vertices.
    pub fn num_vertices(&self) -> usize {
        match self {
            Tree::Leaf(_) => 0,
            Tree::Node { children, .. } => {
                1 + children.iter().map(Tree::num_vertices).sum::<usize>()
            }
        }
    }

    pub fn max_vertex_arity(&self) -> usize {
        match self {
            Tree::Leaf(_) => 0,
            Tree::Node { children, .. } => children
                .len()
                .max(children.iter().map(Tree::max_vertex_arity).max().unwrap_or(0)),
        }
    }

    /// Paths (child-index sequences from the root) of all internal vertices,
    /// in preorder.
    pub fn vertex_paths(&self) -> Vec<Vec<usize>> {
        fn walk(t: &Tree, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if let Tree::Node { children, .. } = t {
                out.push(path.clone());
                for (i, c) in children.iter().enumerate() {
                    path.push(i);
                    walk(c, path, out);
                    path.pop();
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn node_at(&self, path: &[usize]) -> Result<&Tree> {
        let mut cur = self;
        for &i in path {
            cur = cur
                .children()
                .get(i)
                .ok_or_else(|| WbError::Precondition("invalid tree path".into()))?;
        }
        Ok(cur)
    }

    /// Replaces the subtree at `path` with `new`.
    pub fn replace_at(&self, path: &[usize], new: Tree) -> Result<Tree> {
        if path.is_empty() {
            return Ok(new);
        }
        match self {
            Tree::Leaf(_) => Err(WbError::Precondition("invalid tree path".into())),
            Tree::Node {
                pearl,
                label,
                param,
                children,
            } => {
                let i = path[0];
                if i >= children.len() {
                    return Err(WbError::Precondition("invalid tree path".into()));
                }
                let mut cs = children.clone();
                cs[i] = cs[i].replace_at(&path[1..], new)?;
                Ok(Tree::Node {
                    pearl: *pearl,
                    label: label.clone(),
                    param: *param,
                    children: cs,
                })
            }
        }
    }

    /// Applies a function to every leaf label.
    pub fn map_leaves(&self, f: &impl Fn(usize) -> usize) -> Tree {
        match self {
            Tree::Leaf(k) => Tree::Leaf(f(*k)),
            Tree::Node {
                pearl,
                label,
                param,
                children,
            } => Tree::Node {
                pearl: *pearl,
                label: label.clone(),
                param: *param,
                children: children.iter().map(|c| c.map_leaves(f)).collect(),
            },
        }
    }

    /// Right action on leaf labels: each leaf `ℓ` becomes `σ(ℓ)`.
    pub fn act_on_leaves(&self, sigma: &Perm) -> Tree {
        self.map_leaves(&|k| sigma.apply(k))
    }

    /// Relabels leaves by `1..=n` in planar order.
    pub fn identity_labeled(&self) -> Tree {
        let mut next = 0usize;
        fn walk(t: &Tree, next: &mut usize) -> Tree {
            match t {
                Tree::Leaf(_) => {
                    *next += 1;
                    Tree::Leaf(*next)
                }
                Tree::Node {
                    pearl,
                    label,
                    param,
                    children,
                } => Tree::Node {
                    pearl: *pearl,
                    label: label.clone(),
                    param: *param,
                    children: children.iter().map(|c| walk(c, next)).collect(),
                },
            }
        }
        walk(self, &mut next)
    }

    pub fn is_identity_labeled(&self) -> bool {
        self.leaf_labels() == (1..=self.arity()).collect::<Vec<_>>()
    }

    /// Operadic graft: replaces the leaf labeled `i` by `other` with the
    /// standard relabeling (labels of `other` shifted by `i−1`; labels of
    /// `self` above `i` shifted by `|other|−1`).
    pub fn graft(&self, i: usize, other: &Tree) -> Result<Tree> {
        let n = self.arity();
        let m = other.arity();
        if i == 0 || i > n || !self.leaf_labels().contains(&i) {
            return Err(WbError::Precondition(format!("no leaf labeled {i}")));
        }
        let shifted = other.map_leaves(&|j| j + i - 1);
        fn walk(t: &Tree, i: usize, m: usize, sub: &Tree) -> Tree {
            match t {
                Tree::Leaf(k) if *k == i => sub.clone(),
                Tree::Leaf(k) if *k > i => Tree::Leaf(*k + m - 1),
                Tree::Leaf(k) => Tree::Leaf(*k),
                Tree::Node {
                    pearl,
                    label,
                    param,
                    children,
                } => Tree::Node {
                    pearl: *pearl,
                    label: label.clone(),
                    param: *param,
                    children: children.iter().map(|c| walk(c, i, m, sub)).collect(),
                },
            }
        }
        Ok(walk(self, i, m, &shifted))
    }

    /// Contracts the edge between the vertex at `path` and its `child_idx`-th
    /// child (which must be an internal vertex): the child's children are
    /// spliced in place of the child. The merged vertex keeps the parent's
    /// pearl flag and parameter; its label is produced by `merge` from the
    /// two labels and the 1-based input position of the child among the
    /// parent's inputs.
    pub fn contract_edge(
        &self,
        path: &[usize],
        child_idx: usize,
        merge: impl FnOnce(Option<&Atom>, Option<&Atom>, usize) -> Option<Atom>,
    ) -> Result<Tree> {
        let parent = self.node_at(path)?;
        let (pearl, label, param, children) = match parent {
            Tree::Node {
                pearl,
                label,
                param,
                children,
            } => (*pearl, label.clone(), *param, children.clone()),
            Tree::Leaf(_) => return Err(WbError::Precondition("path does not name a vertex".into())),
        };
        let child = children
            .get(child_idx)
            .ok_or_else(|| WbError::Precondition("invalid child index".into()))?;
        let sub_children = match child {
            Tree::Node { children, .. } => children.clone(),
            Tree::Leaf(_) => {
                return Err(WbError::Precondition("cannot contract a leaf edge".into()))
            }
        };
        let new_label = merge(label.as_ref(), child.label(), child_idx + 1);
        let mut cs = Vec::with_capacity(children.len() + sub_children.len() - 1);
        cs.extend_from_slice(&children[..child_idx]);
        cs.extend(sub_children);
        cs.extend_from_slice(&children[child_idx + 1..]);
        self.replace_at(
            path,
            Tree::Node {
                pearl,
                label: new_label,
                param,
                children: cs,
            },
        )
    }

    /// Removes a unary vertex at `path`, replacing it by its single child.
    pub fn remove_unary(&self, path: &[usize]) -> Result<Tree> {
        match self.node_at(path)? {
            Tree::Node { children, .. } if children.len() == 1 => {
                self.replace_at(path, children[0].clone())
            }
            _ => Err(WbError::Precondition("vertex is not unary".into())),
        }
    }

    pub fn to_sexp(&self) -> Sexp {
        match self {
            Tree::Leaf(k) => Sexp::list(vec![Sexp::atom("leaf"), Sexp::nat(*k)]),
            Tree::Node {
                pearl,
                label,
                param,
                children,
            } => {
                let mut items = vec![Sexp::atom(if *pearl { "pearl" } else { "v" })];
                if let Some(l) = label {
                    items.push(Sexp::list(vec![
                        Sexp::atom("lbl"),
                        Sexp::atom(l.as_str()),
                    ]));
                }
                if let Some(p) = param {
                    items.push(Sexp::list(vec![
                        Sexp::atom("t"),
                        Sexp::nat(p.num as usize),
                        Sexp::nat(p.den as usize),
                    ]));
                }
                items.extend(children.iter().map(Tree::to_sexp));
                Sexp::list(items)
            }
        }
    }

    pub fn from_sexp(s: &Sexp) -> Result<Tree> {
        let items = s.as_list()?;
        let head = items
            .first()
            .ok_or_else(|| WbError::Parse("empty tree form".into()))?
            .as_atom()?;
        match head {
            "leaf" => {
                if items.len() != 2 {
                    return Err(WbError::Parse("leaf takes one label".into()));
                }
                Ok(Tree::Leaf(items[1].as_nat()?))
            }
            "v" | "pearl" => {
                let mut label = None;
                let mut param = None;
                let mut children = Vec::new();
                for item in &items[1..] {
                    let inner = item.as_list()?;
                    match inner.first().and_then(|h| h.as_atom().ok()) {
                        Some("lbl") => label = Some(Atom::new(inner[1].as_atom()?)),
                        Some("t") => {
                            param =
                                Some(Param::new(inner[1].as_nat()? as u32, inner[2].as_nat()? as u32)?)
                        }
                        _ => children.push(Tree::from_sexp(item)?),
                    }
                }
                Ok(Tree::Node {
                    pearl: head == "pearl",
                    label,
                    param,
                    children,
                })
            }
            other => Err(WbError::Parse(format!("unknown tree form `{other}`"))),
        }
    }

    pub fn to_atom(&self) -> Atom {
        Atom::new(self.to_sexp().to_string())
    }

    pub fn from_atom(a: &Atom) -> Result<Tree> {
        Tree::from_sexp(&sexp::parse(a.as_str())?)
    }
}

/// Number of pearls in the tree.
pub fn pearl_count(t: &Tree) -> usize {
    match t {
        Tree::Leaf(_) => 0,
        Tree::Node {
            pearl, children, ..
        } => (*pearl as usize) + children.iter().map(pearl_count).sum::<usize>(),
    }
}

/// Section validity: every path from a leaf or an arity-0 vertex to the
/// root crosses exactly one pearl (the vertex itself counts).
pub fn is_valid_section(t: &Tree) -> bool {
    fn walk(t: &Tree, pearls_above: usize) -> bool {
        match t {
            Tree::Leaf(_) => pearls_above == 1,
            Tree::Node {
                pearl, children, ..
            } => {
                let here = pearls_above + (*pearl as usize);
                if here > 1 {
                    return false;
                }
                if children.is_empty() && here != 1 {
                    return false;
                }
                children.iter().all(|c| walk(c, here))
            }
        }
    }
    walk(t, 0)
}

/// Reducedness for trees with section: every inner edge has a pearl
/// endpoint. Equivalently, no two non-pearl vertices are joined by an
/// edge — such edges are always contracted by the structure maps, so
/// trees containing them are never normal forms.
pub fn is_reduced_section(t: &Tree) -> bool {
    fn walk(t: &Tree, parent: Option<bool>) -> bool {
        match t {
            Tree::Leaf(_) => true,
            Tree::Node {
                pearl, children, ..
            } => {
                if parent == Some(false) && !*pearl {
                    return false;
                }
                children.iter().all(|c| walk(c, Some(*pearl)))
            }
        }
    }
    walk(t, None)
}

/// Pearled-tree validity (exactly one pearl) and reducedness (every other
/// vertex adjacent to the pearl).
pub fn is_valid_pearled(t: &Tree) -> bool {
    pearl_count(t) == 1
}

pub fn is_reduced_pearled(t: &Tree) -> bool {
    is_valid_pearled(t) && is_reduced_section_like_pearled(t)
}

fn is_reduced_section_like_pearled(t: &Tree) -> bool {
    fn walk(t: &Tree, parent_is_pearl: bool) -> bool {
        match t {
            Tree::Leaf(_) => true,
            Tree::Node {
                pearl, children, ..
            } => {
                let adjacent =
                    *pearl || parent_is_pearl || children.iter().any(Tree::is_pearl);
                adjacent && children.iter().all(|c| walk(c, *pearl))
            }
        }
    }
    walk(t, false)
}

/// Bounds for tree enumeration.
#[derive(Debug, Clone, Copy)]
pub struct TreeBounds {
    pub max_vertices: usize,
    pub max_arity: usize,
    pub allow_zero: bool,
}

/// All planar tree shapes (leaves unlabeled) with at most `max_vertices`
/// internal vertices, vertex arities `≤ max_arity` (and `≥ 1` unless
/// `allow_zero`). A bare leaf is included.
fn all_shapes(b: &TreeBounds) -> Vec<Tree> {
    fn subtrees(b: &TreeBounds, budget: usize) -> Vec<(Tree, usize)> {
        let mut out = vec![(Tree::Leaf(0), 0)];
        if budget == 0 {
            return out;
        }
        let min = if b.allow_zero { 0 } else { 1 };
        for a in min..=b.max_arity {
            for combo in child_lists(b, a, budget - 1) {
                let used = 1 + combo.iter().map(|(_, u)| u).sum::<usize>();
                out.push((
                    Tree::vertex(combo.into_iter().map(|(t, _)| t).collect()),
                    used,
                ));
            }
        }
        out
    }
    fn child_lists(b: &TreeBounds, a: usize, budget: usize) -> Vec<Vec<(Tree, usize)>> {
        if a == 0 {
            return vec![Vec::new()];
        }
        let mut out = Vec::new();
        for (t, used) in subtrees(b, budget) {
            for mut rest in child_lists(b, a - 1, budget - used) {
                rest.insert(0, (t.clone(), used));
                out.push(rest);
            }
        }
        out
    }
    subtrees(b, b.max_vertices)
        .into_iter()
        .map(|(t, _)| t)
        .collect()
}

/// The tree grammars that can be enumerated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreeKind {
    Section,
    ReducedSection,
    Pearled,
    ReducedPearled,
}

/// Complete, duplicate-free enumeration of identity-labeled trees of the
/// given kind with exactly `n` leaves, within bounds. Pearls are assigned in
/// all ways compatible with the grammar.
pub fn enumerate_trees(kind: TreeKind, n: usize, bounds: &TreeBounds) -> Vec<Tree> {
    let mut out = Vec::new();
    for shape in all_shapes(bounds) {
        if shape.arity() != n || shape.is_leaf() {
            continue;
        }
        let paths = shape.vertex_paths();
        for flags in (0..paths.len()).map(|_| [false, true]).multi_cartesian_product() {
            let mut t = shape.clone();
            for (path, &flag) in paths.iter().zip(flags.iter()) {
                if flag {
                    let node = t.node_at(path).unwrap().clone();
                    if let Tree::Node {
                        label,
                        param,
                        children,
                        ..
                    } = node
                    {
                        t = t
                            .replace_at(
                                path,
                                Tree::Node {
                                    pearl: true,
                                    label,
                                    param,
                                    children,
                                },
                            )
                            .unwrap();
                    }
                }
            }
            let ok = match kind {
                TreeKind::Section => is_valid_section(&t),
                TreeKind::ReducedSection => is_valid_section(&t) && is_reduced_section(&t),
                TreeKind::Pearled => is_valid_pearled(&t),
                TreeKind::ReducedPearled => is_reduced_pearled(&t),
            };
            if ok {
                out.push(t.identity_labeled());
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

/// An element of 𝕡[n]: a planar tree whose root has exactly `n` ordered
/// incoming edges, leaves labeled by the identity. The root is implicit; the
/// field holds the subtrees on the root's incoming edges.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct RootTree {
    children: Vec<Tree>,
}

impl RootTree {
    pub fn new(children: Vec<Tree>) -> RootTree {
        let t = RootTree { children };
        t.identity_labeled()
    }

    /// The `n`-corolla: all root edges are leaves.
    pub fn corolla(n: usize) -> RootTree {
        RootTree::new((1..=n).map(Tree::Leaf).collect())
    }

    pub fn root_arity(&self) -> usize {
        self.children.len()
    }

    pub fn children(&self) -> &[Tree] {
        &self.children
    }

    /// Total number of leaves `|T|`.
    pub fn leaves(&self) -> usize {
        self.children.iter().map(Tree::arity).sum()
    }

    /// Leaf count of the `j`-th root subtree (1-based): `n_j[T]`.
    pub fn subtree_leaves(&self, j: usize) -> usize {
        self.children[j - 1].arity()
    }

    /// Number of non-root vertices.
    pub fn num_vertices(&self) -> usize {
        self.children.iter().map(Tree::num_vertices).sum()
    }

    fn identity_labeled(&self) -> RootTree {
        let mut next = 0usize;
        let children = self
            .children
            .iter()
            .map(|c| {
                let shifted = c.identity_labeled().map_leaves(&|k| k + next);
                next += c.arity();
                shifted
            })
            .collect();
        RootTree { children }
    }

    /// Paths of all non-root vertices, in planar preorder. A path starts
    /// with the root-edge index.
    pub fn vertex_paths(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        for (i, c) in self.children.iter().enumerate() {
            for mut p in c.vertex_paths() {
                p.insert(0, i);
                out.push(p);
            }
        }
        out
    }

    pub fn node_at(&self, path: &[usize]) -> Result<&Tree> {
        if path.is_empty() {
            return Err(WbError::Precondition("empty path names the root".into()));
        }
        self.children
            .get(path[0])
            .ok_or_else(|| WbError::Precondition("invalid tree path".into()))?
            .node_at(&path[1..])
    }

    /// The partial order on non-root vertices: `u ≤ v` iff the path from
    /// `v` to the root passes through `u` (prefix order on paths).
    pub fn vertex_leq(path_u: &[usize], path_v: &[usize]) -> bool {
        path_v.len() >= path_u.len() && &path_v[..path_u.len()] == path_u
    }

    /// `δ_{i,m}`: for `m = 0`, inserts a new arity-0 vertex at root position
    /// `i`; for `m > 0`, glues root edges `i, …, i+m−1` under a new vertex.
    /// Either way the result has one more vertex.
    pub fn delta(&self, i: usize, m: usize) -> Result<RootTree> {
        let mut cs = self.children.clone();
        if m == 0 {
            if i == 0 || i > cs.len() + 1 {
                return Err(WbError::Precondition(format!("δ position {i} out of range")));
            }
            cs.insert(i - 1, Tree::vertex(Vec::new()));
        } else {
            if i == 0 || i + m - 1 > cs.len() {
                return Err(WbError::Precondition(format!(
                    "δ range {i}..{} out of range",
                    i + m - 1
                )));
            }
            let glued: Vec<Tree> = cs.splice(i - 1..i + m - 1, std::iter::empty()).collect();
            cs.insert(i - 1, Tree::vertex(glued));
        }
        Ok(RootTree::new(cs))
    }

    /// `Γ^m_k`: keeps root edges `k+1, …, k+m` with their subtrees.
    pub fn gamma(&self, m: usize, k: usize) -> Result<RootTree> {
        if m + k > self.children.len() {
            return Err(WbError::Precondition(format!(
                "Γ^{m}_{k} undefined on a root with {} edges",
                self.children.len()
            )));
        }
        Ok(RootTree::new(self.children[k..k + m].to_vec()))
    }

    /// Permutes the root's incoming edges: edge `i` of the result is edge
    /// `σ(i)` of `T`. Returns `(T_σ, σ_V[T], σ_L[T])` where `σ_V[T]` maps the
    /// preorder index of a vertex in `T` to its preorder index in `T_σ`, and
    /// `σ_L[T]` maps a leaf of `T` to its position in `T_σ`.
    pub fn root_permute(&self, sigma: &Perm) -> Result<(RootTree, Perm, Perm)> {
        let n = self.children.len();
        if sigma.arity() != n {
            return Err(WbError::Precondition(format!(
                "permutation {sigma} does not act on {n} root edges"
            )));
        }
        let permuted: Vec<Tree> = (1..=n)
            .map(|i| self.children[sigma.apply(i) - 1].clone())
            .collect();
        let moved = RootTree { children: permuted };
        // Track where each old vertex / leaf lands by carrying markers.
        let old_vertex_order = self.vertex_paths();
        let vertex_index = |paths: &[Vec<usize>], path: &[usize]| {
            paths.iter().position(|p| p == path).unwrap() + 1
        };
        let new_vertex_order = moved.vertex_paths();
        let mut sigma_v = vec![0usize; old_vertex_order.len()];
        for old_path in &old_vertex_order {
            // Root edge j of T becomes edge σ⁻¹(j) of T_σ.
            let mut new_path = old_path.clone();
            new_path[0] = sigma.inverse().apply(old_path[0] + 1) - 1;
            sigma_v[vertex_index(&old_vertex_order, old_path) - 1] =
                vertex_index(&new_vertex_order, &new_path);
        }
        // Old leaf label ℓ sits somewhere in `moved`; its new label is its
        // planar position there.
        let moved_labels = RootTree {
            children: moved.children.clone(),
        };
        let flat: Vec<usize> = moved_labels
            .children
            .iter()
            .flat_map(|c| c.leaf_labels())
            .collect();
        let mut sigma_l = vec![0usize; flat.len()];
        for (pos, &old_label) in flat.iter().enumerate() {
            sigma_l[old_label - 1] = pos + 1;
        }
        Ok((
            moved.identity_labeled(),
            Perm::from_images(sigma_v)?,
            Perm::from_images(sigma_l)?,
        ))
    }

    /// All reorderings of the tree that fix the root-edge order, i.e. all
    /// ways of permuting children of non-root vertices. Returns the 𝕋[n]
    /// canonical representative (lexicographically minimal serialization).
    pub fn canonical_class(&self) -> RootTree {
        self.reorderings()
            .into_iter()
            .min_by_key(|t| t.to_atom())
            .unwrap()
    }

    fn reorderings(&self) -> Vec<RootTree> {
        fn tree_reorderings(t: &Tree) -> Vec<Tree> {
            match t {
                Tree::Leaf(k) => vec![Tree::Leaf(*k)],
                Tree::Node {
                    pearl,
                    label,
                    param,
                    children,
                } => {
                    let per_child: Vec<Vec<Tree>> =
                        children.iter().map(tree_reorderings).collect();
                    let mut out = Vec::new();
                    for combo in product_or_single(&per_child) {
                        for ord in Perm::all(children.len()) {
                            let cs: Vec<Tree> = (1..=children.len())
                                .map(|i| combo[ord.apply(i) - 1].clone())
                                .collect();
                            out.push(Tree::Node {
                                pearl: *pearl,
                                label: label.clone(),
                                param: *param,
                                children: cs,
                            });
                        }
                    }
                    out
                }
            }
        }
        let per_child: Vec<Vec<Tree>> = self.children.iter().map(tree_reorderings).collect();
        let mut out = Vec::new();
        for combo in product_or_single(&per_child) {
            out.push(RootTree {
                children: combo.into_iter().cloned().collect(),
            }
            .identity_labeled());
        }
        out.sort();
        out.dedup();
        out
    }

    /// Automorphisms of the 𝕋[n] class: reorderings fixing the root-edge
    /// order that reproduce the same identity-labeled planar tree. Each is
    /// reported as `(σ_V, σ_L)`: the induced permutations of non-root
    /// vertices (preorder) and of leaves.
    pub fn automorphisms(&self) -> Vec<(Perm, Perm)> {
        // Tag leaves and vertices with their identities, enumerate
        // reorderings of the tagged tree, and keep those whose untagged
        // identity-labeled form equals `self`.
        let tagged = RootTree {
            children: {
                let mut vid = 0usize;
                self.children
                    .iter()
                    .map(|c| tag_vertices(c, &mut vid))
                    .collect()
            },
        };
        let n_vertices = self.num_vertices();
        let mut out = Vec::new();
        for candidate in tagged.reorderings_raw() {
            let untagged = RootTree {
                children: candidate.iter().map(untag).collect(),
            }
            .identity_labeled();
            if &untagged != self {
                continue;
            }
            let reordered = RootTree {
                children: candidate.clone(),
            };
            // σ_V: old vertex id (preorder in self) ↦ new preorder position.
            let mut sigma_v = vec![0usize; n_vertices];
            for (new_pos, path) in reordered.vertex_paths().iter().enumerate() {
                let node = reordered.node_at(path).unwrap();
                let old_id: usize = node
                    .label()
                    .and_then(|l| l.as_str().strip_prefix("#v"))
                    .and_then(|s| s.parse().ok())
                    .unwrap();
                sigma_v[old_id - 1] = new_pos + 1;
            }
            // σ_L: old leaf label ↦ new planar position.
            let flat: Vec<usize> = reordered
                .children
                .iter()
                .flat_map(|c| c.leaf_labels())
                .collect();
            let mut sigma_l = vec![0usize; flat.len()];
            for (pos, &old_label) in flat.iter().enumerate() {
                sigma_l[old_label - 1] = pos + 1;
            }
            let aut = (
                Perm::from_images(sigma_v).unwrap(),
                Perm::from_images(sigma_l).unwrap(),
            );
            if !out.contains(&aut) {
                out.push(aut);
            }
        }
        out
    }

    fn reorderings_raw(&self) -> Vec<Vec<Tree>> {
        fn tree_reorderings(t: &Tree) -> Vec<Tree> {
            match t {
                Tree::Leaf(k) => vec![Tree::Leaf(*k)],
                Tree::Node {
                    pearl,
                    label,
                    param,
                    children,
                } => {
                    let per_child: Vec<Vec<Tree>> =
                        children.iter().map(tree_reorderings).collect();
                    let mut out = Vec::new();
                    for combo in product_or_single(&per_child) {
                        for ord in Perm::all(children.len()) {
                            let cs: Vec<Tree> = (1..=children.len())
                                .map(|i| combo[ord.apply(i) - 1].clone())
                                .collect();
                            out.push(Tree::Node {
                                pearl: *pearl,
                                label: label.clone(),
                                param: *param,
                                children: cs,
                            });
                        }
                    }
                    out.sort();
                    out.dedup();
                    out
                }
            }
        }
        let per_child: Vec<Vec<Tree>> = self.children.iter().map(tree_reorderings).collect();
        product_or_single(&per_child)
            .into_iter()
            .map(|combo| combo.into_iter().cloned().collect())
            .collect()
    }

    pub fn to_sexp(&self) -> Sexp {
        let mut items = vec![Sexp::atom("root")];
        items.extend(self.children.iter().map(Tree::to_sexp));
        Sexp::list(items)
    }

    pub fn from_sexp(s: &Sexp) -> Result<RootTree> {
        let items = s.as_tagged("root")?;
        Ok(RootTree::new(
            items.iter().map(Tree::from_sexp).collect::<Result<Vec<_>>>()?,
        ))
    }

    pub fn to_atom(&self) -> Atom {
        Atom::new(self.to_sexp().to_string())
    }

    pub fn from_atom(a: &Atom) -> Result<RootTree> {
        RootTree::from_sexp(&sexp::parse(a.as_str())?)
    }
}

fn tag_vertices(t: &Tree, vid: &mut usize) -> Tree {
    match t {
        Tree::Leaf(k) => Tree::Leaf(*k),
        Tree::Node {
            pearl,
            param,
            children,
            ..
        } => {
            *vid += 1;
            let me = *vid;
            Tree::Node {
                pearl: *pearl,
                label: Some(Atom::new(format!("#v{me}"))),
                param: *param,
                children: children.iter().map(|c| tag_vertices(c, vid)).collect(),
            }
        }
    }
}

fn untag(t: &Tree) -> Tree {
    match t {
        Tree::Leaf(k) => Tree::Leaf(*k),
        Tree::Node {
            pearl,
            param,
            children,
            ..
        } => Tree::Node {
            pearl: *pearl,
            label: None,
            param: *param,
            children: children.iter().map(untag).collect(),
        },
    }
}

/// Enumerates 𝕡[n]: trees whose root has exactly `n` incoming edges, within
/// bounds. If `classes` is set, returns one canonical representative per
/// 𝕋[n] class instead.
pub fn enumerate_root_trees(n: usize, bounds: &TreeBounds, classes: bool) -> Vec<RootTree> {
    fn child_lists(b: &TreeBounds, a: usize, budget: usize) -> Vec<Vec<(Tree, usize)>> {
        if a == 0 {
            return vec![Vec::new()];
        }
        let mut out = Vec::new();
        for (t, used) in subtrees(b, budget) {
            for mut rest in child_lists(b, a - 1, budget - used) {
                rest.insert(0, (t.clone(), used));
                out.push(rest);
            }
        }
        out
    }
    fn subtrees(b: &TreeBounds, budget: usize) -> Vec<(Tree, usize)> {
        let mut out = vec![(Tree::Leaf(0), 0)];
        if budget == 0 {
            return out;
        }
        let min = if b.allow_zero { 0 } else { 1 };
        for a in min..=b.max_arity {
            for combo in child_lists(b, a, budget - 1) {
                let used = 1 + combo.iter().map(|(_, u)| u).sum::<usize>();
                out.push((
                    Tree::vertex(combo.into_iter().map(|(t, _)| t).collect()),
                    used,
                ));
            }
        }
        out
    }
    let mut out: Vec<RootTree> = child_lists(bounds, n, bounds.max_vertices)
        .into_iter()
        .map(|combo| RootTree::new(combo.into_iter().map(|(t, _)| t).collect()))
        .collect();
    if classes {
        out = out.into_iter().map(|t| t.canonical_class()).collect();
    }
    out.sort();
    out.dedup();
    out
}

/// A parameter assignment on the non-root vertices of a `RootTree`, in
/// preorder, monotone toward the leaves (vertices closer to the root carry
/// smaller values).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamAssignment(pub Vec<Param>);

impl ParamAssignment {
    pub fn to_atom(&self) -> Atom {
        Atom::new(format!(
            "(ts {})",
            self.0.iter().map(|p| p.to_string()).join(" ")
        ))
    }

    pub fn from_atom(a: &Atom) -> Result<ParamAssignment> {
        let s = sexp::parse(a.as_str())?;
        let items = s.as_tagged("ts")?;
        let mut out = Vec::new();
        for item in items {
            let text = item.as_atom()?;
            let (num, den) = text
                .split_once('/')
                .ok_or_else(|| WbError::Parse(format!("bad parameter `{text}`")))?;
            out.push(Param::new(
                num.parse().map_err(|_| WbError::Parse("bad parameter".into()))?,
                den.parse().map_err(|_| WbError::Parse("bad parameter".into()))?,
            )?);
        }
        Ok(ParamAssignment(out))
    }
}

/// Which part of `H(T)` to enumerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HVariant {
    Full,
    /// Assignments with at least one arity-0 vertex attached to the root
    /// carrying parameter 0.
    Boundary,
}

/// Enumerates the discretized parameter poset `H(T)` over the chain `I_N`.
pub fn h_poset(t: &RootTree, n_chain: u32, variant: HVariant) -> (FiniteSpace, Vec<ParamAssignment>) {
    let paths = t.vertex_paths();
    let values = Param::chain(n_chain);
    let mut assignments = Vec::new();
    let mut atoms = Vec::new();
    let factors: Vec<Vec<Param>> = vec![values; paths.len()];
    for choice in product_or_single(&factors) {
        let assign: Vec<Param> = choice.into_iter().copied().collect();
        let monotone = paths.iter().enumerate().all(|(i, pu)| {
            paths.iter().enumerate().all(|(j, pv)| {
                !(RootTree::vertex_leq(pu, pv) && assign[i] > assign[j])
            })
        });
        if !monotone {
            continue;
        }
        if variant == HVariant::Boundary {
            let has_boundary_vertex = paths.iter().enumerate().any(|(i, p)| {
                p.len() == 1
                    && t.node_at(p).map(|v| v.children().is_empty()).unwrap_or(false)
                    && assign[i].is_zero()
            });
            if !has_boundary_vertex {
                continue;
            }
        }
        let pa = ParamAssignment(assign);
        atoms.push(pa.to_atom());
        assignments.push(pa);
    }
    (
        FiniteSpace::new(atoms).expect("assignments are distinct"),
        assignments,
    )
}

/// Cartesian product of the given factor slices, yielding one empty
/// combination when there are no factors (`multi_cartesian_product` yields
/// nothing in that case).
fn product_or_single<'a, T: Clone + 'a>(factors: &'a [Vec<T>]) -> Vec<Vec<&'a T>> {
    if factors.is_empty() {
        vec![Vec::new()]
    } else {
        factors
            .iter()
            .map(|f| f.iter())
            .multi_cartesian_product()
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binary() -> Tree {
        // (v (leaf 1) (v (leaf 2) (leaf 3)))
        Tree::vertex(vec![
            Tree::Leaf(1),
            Tree::vertex(vec![Tree::Leaf(2), Tree::Leaf(3)]),
        ])
    }

    #[test]
    fn arity_and_labels() {
        let t = binary();
        assert_eq!(t.arity(), 3);
        assert_eq!(t.leaf_labels(), vec![1, 2, 3]);
        assert_eq!(t.num_vertices(), 2);
        assert!(t.is_identity_labeled());
    }

    #[test]
    fn sexp_round_trip() {
        let t = binary().with_label(Atom::new("q")).with_param(Param::new(1, 2).unwrap());
        let back = Tree::from_atom(&t.to_atom()).unwrap();
        assert_eq!(back, t);
        let p = Tree::pearl_vertex(vec![Tree::Leaf(1)]);
        assert_eq!(Tree::from_atom(&p.to_atom()).unwrap(), p);
    }

    #[test]
    fn graft_and_contract() {
        // Graft a 2-corolla into leaf 1 of a 2-corolla.
        let c2 = Tree::vertex(vec![Tree::Leaf(1), Tree::Leaf(2)]);
        let g = c2.graft(1, &c2).unwrap();
        assert_eq!(g.arity(), 3);
        assert_eq!(g.leaf_labels(), vec![1, 2, 3]);
        // Contract the unique inner edge: back to the 3-corolla shape.
        let contracted = g.contract_edge(&[], 0, |_, _, _| None).unwrap();
        assert_eq!(contracted, Tree::vertex(vec![
            Tree::Leaf(1),
            Tree::Leaf(2),
            Tree::Leaf(3),
        ]));
    }

    #[test]
    fn graft_relabels_upper_leaves() {
        let c2 = Tree::vertex(vec![Tree::Leaf(1), Tree::Leaf(2)]);
        let c3 = Tree::vertex(vec![Tree::Leaf(1), Tree::Leaf(2), Tree::Leaf(3)]);
        let g = c2.graft(1, &c3).unwrap();
        assert_eq!(g.leaf_labels(), vec![1, 2, 3, 4]);
        let g2 = c2.graft(2, &c3).unwrap();
        assert_eq!(g2.leaf_labels(), vec![1, 2, 3, 4]);
    }

    #[test]
    fn section_predicates() {
        let pearl_corolla = Tree::pearl_vertex(vec![Tree::Leaf(1), Tree::Leaf(2)]);
        assert!(is_valid_section(&pearl_corolla));
        assert!(is_reduced_section(&pearl_corolla));
        // Pearl under a root vertex, plus a pearl sibling: valid + reduced.
        let t = Tree::vertex(vec![
            Tree::pearl_vertex(vec![Tree::Leaf(1)]),
            Tree::pearl_vertex(vec![Tree::Leaf(2)]),
        ]);
        assert!(is_valid_section(&t) && is_reduced_section(&t));
        // No pearl on the path: invalid.
        assert!(!is_valid_section(&binary()));
        // Nested pearls: invalid.
        let nested = Tree::pearl_vertex(vec![Tree::pearl_vertex(vec![Tree::Leaf(1)])]);
        assert!(!is_valid_section(&nested));
        // Arity-0 non-pearl vertex below the section: invalid.
        let below = Tree::vertex(vec![
            Tree::pearl_vertex(vec![Tree::Leaf(1)]),
            Tree::vertex(vec![]),
        ]);
        assert!(!is_valid_section(&below));
        // Same arity-0 vertex above the section: fine.
        let above = Tree::pearl_vertex(vec![Tree::Leaf(1), Tree::vertex(vec![])]);
        assert!(is_valid_section(&above));
    }

    #[test]
    fn enumerate_reduced_section_n1() {
        // Hand enumeration: with one leaf and no arity-0 vertices every
        // vertex is unary, so the valid reduced trees are the pearl corolla,
        // the pearl under a unary root vertex, and the pearl root with a
        // unary vertex above it.
        let bounds = TreeBounds {
            max_vertices: 2,
            max_arity: 2,
            allow_zero: false,
        };
        let ts = enumerate_trees(TreeKind::ReducedSection, 1, &bounds);
        let expected = [
            Tree::pearl_vertex(vec![Tree::Leaf(1)]),
            Tree::pearl_vertex(vec![Tree::vertex(vec![Tree::Leaf(1)])]),
            Tree::vertex(vec![Tree::pearl_vertex(vec![Tree::Leaf(1)])]),
        ];
        assert_eq!(ts.len(), 3, "{ts:?}");
        for e in &expected {
            assert!(ts.contains(e), "missing {e:?}");
        }
    }

    #[test]
    fn enumerate_pearled_zero_corolla() {
        let bounds = TreeBounds {
            max_vertices: 1,
            max_arity: 3,
            allow_zero: true,
        };
        let ts = enumerate_trees(TreeKind::Pearled, 0, &bounds);
        assert_eq!(ts, vec![Tree::pearl_vertex(vec![])]);
    }

    #[test]
    fn delta_and_gamma() {
        let c2 = RootTree::corolla(2);
        // δ_{1,0}: extra arity-0 vertex at the front, root arity 3.
        let d = c2.delta(1, 0).unwrap();
        assert_eq!(d.root_arity(), 3);
        assert_eq!(d.num_vertices(), 1);
        assert!(d.children()[0].children().is_empty() && !d.children()[0].is_leaf());
        // δ_{1,1}: unary vertex on edge 1.
        let d1 = c2.delta(1, 1).unwrap();
        assert_eq!(d1.root_arity(), 2);
        assert_eq!(d1.leaves(), 2);
        // δ_{2,3} on a 4-corolla: root arity 2, new vertex with 3 edges.
        let d2 = RootTree::corolla(4).delta(2, 3).unwrap();
        assert_eq!(d2.root_arity(), 2);
        assert_eq!(d2.children()[1].children().len(), 3);
        // Γ²₁ of the 4-corolla → 2-corolla; Γ^n₀ = id.
        assert_eq!(RootTree::corolla(4).gamma(2, 1).unwrap(), RootTree::corolla(2));
        assert_eq!(c2.gamma(2, 0).unwrap(), c2);
        assert!(c2.gamma(2, 1).is_err());
    }

    #[test]
    fn delta_adds_one_vertex_sweep() {
        let bounds = TreeBounds {
            max_vertices: 3,
            max_arity: 3,
            allow_zero: true,
        };
        for t in enumerate_root_trees(2, &bounds, false) {
            for m in 0..=2usize {
                let n = if m == 0 {
                    t.root_arity() + 1
                } else {
                    t.root_arity() + 1 - m
                };
                for i in 1..=n {
                    if let Ok(d) = t.delta(i, m) {
                        assert_eq!(d.num_vertices(), t.num_vertices() + 1);
                        assert_eq!(d.root_arity(), n);
                    }
                }
            }
        }
    }

    #[test]
    fn gamma_delta_identities() {
        // Γ^m_{i−1}(T) = Γ^m_{i−1}(δ_{j+m−1,ℓ}(T)) for j > i, and
        // Γ^m_{i−1}(δ_{k+i−1,ℓ}(T)) = δ_{k,ℓ}(Γ^{m+ℓ−1}_{i−1}(T)).
        let bounds = TreeBounds {
            max_vertices: 2,
            max_arity: 3,
            allow_zero: true,
        };
        for l in 1..=2usize {
            for n in 1..=2usize {
                for m in 1..=2usize {
                    let total = n + m + l - 2;
                    for t in enumerate_root_trees(total, &bounds, false) {
                        for i in 1..n {
                            for j in i + 1..=n {
                                let lhs = t.gamma(m, i - 1).unwrap();
                                let rhs = t.delta(j + m - 1, l).unwrap().gamma(m, i - 1).unwrap();
                                assert_eq!(lhs, rhs, "ramified: T={t:?} i={i} j={j} m={m} l={l}");
                            }
                        }
                        for i in 1..=n {
                            for k in 1..=m {
                                let lhs =
                                    t.delta(k + i - 1, l).unwrap().gamma(m, i - 1).unwrap();
                                let rhs =
                                    t.gamma(m + l - 1, i - 1).unwrap().delta(k, l).unwrap();
                                assert_eq!(lhs, rhs, "linear: T={t:?} i={i} k={k} m={m} l={l}");
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn root_permute_tracks_vertices_and_leaves() {
        // T = root(c2, leaf): swap the root edges.
        let t = RootTree::new(vec![
            Tree::vertex(vec![Tree::Leaf(0), Tree::Leaf(0)]),
            Tree::Leaf(0),
        ]);
        let swap = Perm::from_images(vec![2, 1]).unwrap();
        let (ts, sv, sl) = t.root_permute(&swap).unwrap();
        assert_eq!(
            ts,
            RootTree::new(vec![
                Tree::Leaf(0),
                Tree::vertex(vec![Tree::Leaf(0), Tree::Leaf(0)]),
            ])
        );
        assert_eq!(sv.images(), &[1]);
        // Leaves 1,2 (under the vertex) move to positions 2,3; leaf 3 moves
        // to position 1.
        assert_eq!(sl.images(), &[2, 3, 1]);
        // Double swap is the identity.
        let (ts2, sv2, sl2) = ts.root_permute(&swap).unwrap();
        assert_eq!(ts2, t);
        assert!(sv2.is_identity() && sl2.images() == [3, 1, 2]);
    }

    #[test]
    fn canonical_class_and_automorphisms() {
        // Corolla: trivial automorphism group.
        assert_eq!(RootTree::corolla(3).automorphisms().len(), 1);
        // Root with one vertex carrying two arity-0 children: order 2.
        let t = RootTree::new(vec![Tree::vertex(vec![
            Tree::vertex(vec![]),
            Tree::vertex(vec![]),
        ])]);
        let auts = t.automorphisms();
        assert_eq!(auts.len(), 2);
        // Group closure + identity membership on small classes.
        let bounds = TreeBounds {
            max_vertices: 3,
            max_arity: 2,
            allow_zero: true,
        };
        for t in enumerate_root_trees(2, &bounds, true) {
            let auts = t.automorphisms();
            assert!(auts.iter().any(|(v, l)| v.is_identity() && l.is_identity()));
            for (v1, l1) in &auts {
                for (v2, l2) in &auts {
                    let comp = (v1.then(v2), l1.then(l2));
                    assert!(auts.contains(&comp), "not closed: {t:?}");
                }
            }
        }
    }

    #[test]
    fn class_quotient_counts() {
        // 𝕋[2] with ≤ 2 vertices, arities ≤ 2, no arity-0: classes vs planar.
        let bounds = TreeBounds {
            max_vertices: 2,
            max_arity: 2,
            allow_zero: false,
        };
        let planar = enumerate_root_trees(2, &bounds, false);
        let classes = enumerate_root_trees(2, &bounds, true);
        assert!(classes.len() <= planar.len());
        for c in &classes {
            assert_eq!(&c.canonical_class(), c);
        }
    }

    #[test]
    fn h_poset_counts() {
        // Chain tree: root → v1 → v2, two comparable non-root vertices.
        let t = RootTree::new(vec![Tree::vertex(vec![Tree::vertex(vec![Tree::Leaf(0)])])]);
        let (space, _) = h_poset(&t, 1, HVariant::Full);
        assert_eq!(space.len(), 3);
        // Corolla: one empty assignment.
        let (space, _) = h_poset(&RootTree::corolla(3), 2, HVariant::Full);
        assert_eq!(space.len(), 1);
        // Boundary variant is a subset.
        let t0 = RootTree::new(vec![Tree::vertex(vec![]), Tree::Leaf(0)]);
        let (full, _) = h_poset(&t0, 2, HVariant::Full);
        let (boundary, _) = h_poset(&t0, 2, HVariant::Boundary);
        assert!(boundary.len() < full.len());
        for a in boundary.iter() {
            assert!(full.contains(a));
        }
    }

    #[test]
    fn param_ordering_and_chain() {
        assert!(Param::new(1, 2).unwrap() < Param::one());
        assert_eq!(Param::new(2, 4).unwrap(), Param::new(1, 2).unwrap());
        assert_eq!(Param::chain(2).len(), 3);
        assert!(Param::zero().is_zero() && Param::one().is_one());
        assert_eq!(Param::new(1, 2).unwrap().halve(), Param::new(1, 4).unwrap());
    }
}
