//! Permutations, combinatorial data (π_ℓ, π_r), the move action on data,
//! trees of relations, hyperelliptic involution recovery, and the graph of
//! reachable combinatorial data.
//!
//! Permutations are stored in one-line notation, 1-based; cycle notation
//! appears only in I/O and documentation.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

/// Errors from combinatorial constructions.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CombError {
    /// A sequence that is not a bijection of {1..k}.
    #[error("not a permutation: {0:?}")]
    NotAPermutation(Vec<usize>),
    /// A cycle reference that is not a cycle of the stated permutation.
    #[error("{0:?} is not a cycle of the {1:?} permutation")]
    NotACycle(Vec<usize>, Side),
    /// ⟨π_ℓ, π_r⟩ does not act transitively on {1..k}.
    #[error("datum is not transitive (disconnected surface)")]
    NotTransitive,
    /// A triple of involutions whose dual graph is not a tree.
    #[error("invalid tree of relations: {0}")]
    InvalidTree(String),
    /// Graph search exceeded its vertex budget.
    #[error("graph enumeration exceeded the budget of {0} vertices")]
    VertexBudgetExceeded(usize),
    /// Graph enumeration started from a non-hyperelliptic datum.
    #[error("datum is not hyperelliptic (no admissible involution)")]
    NotHyperelliptic,
}

/// The two sides of a wedge / the two permutations of a datum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    /// The other side.
    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }

    /// One-letter form used in logs and words: `l` or `r`.
    pub fn letter(self) -> char {
        match self {
            Side::Left => 'l',
            Side::Right => 'r',
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// A permutation of {1..k} in one-line notation (`images[i-1]` is the image
/// of `i`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Perm {
    images: Vec<usize>,
}

impl Perm {
    /// Builds a permutation from its one-line images, checking bijectivity.
    pub fn from_images(images: Vec<usize>) -> Result<Self, CombError> {
        let k = images.len();
        let mut seen = vec![false; k];
        for &v in &images {
            if v == 0 || v > k || seen[v - 1] {
                return Err(CombError::NotAPermutation(images));
            }
            seen[v - 1] = true;
        }
        Ok(Perm { images })
    }

    /// The identity on {1..k}.
    pub fn identity(k: usize) -> Self {
        Perm { images: (1..=k).collect() }
    }

    /// Builds a permutation of {1..k} from disjoint cycles; omitted points
    /// are fixed.
    pub fn from_cycles(k: usize, cycles: &[Vec<usize>]) -> Result<Self, CombError> {
        let mut images: Vec<usize> = (1..=k).collect();
        for cycle in cycles {
            for (pos, &i) in cycle.iter().enumerate() {
                let next = cycle[(pos + 1) % cycle.len()];
                if i == 0 || i > k {
                    return Err(CombError::NotAPermutation(cycle.clone()));
                }
                images[i - 1] = next;
            }
        }
        Perm::from_images(images)
    }

    /// Degree k.
    pub fn k(&self) -> usize {
        self.images.len()
    }

    /// Image of `i` (1-based).
    pub fn apply(&self, i: usize) -> usize {
        self.images[i - 1]
    }

    /// One-line images.
    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// The inverse permutation.
    pub fn inverse(&self) -> Perm {
        let mut images = vec![0; self.k()];
        for (i, &v) in self.images.iter().enumerate() {
            images[v - 1] = i + 1;
        }
        Perm { images }
    }

    /// Composition `self ∘ other`: first `other`, then `self`.
    pub fn compose(&self, other: &Perm) -> Perm {
        assert_eq!(self.k(), other.k());
        Perm { images: (1..=self.k()).map(|i| self.apply(other.apply(i))).collect() }
    }

    /// True iff `self ∘ self` is the identity.
    pub fn is_involution(&self) -> bool {
        (1..=self.k()).all(|i| self.apply(self.apply(i)) == i)
    }

    /// Cycle decomposition: a disjoint cover of {1..k}, each cycle listed
    /// from its minimum element, cycles ordered by that minimum.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let k = self.k();
        let mut seen = vec![false; k];
        let mut out = Vec::new();
        for start in 1..=k {
            if seen[start - 1] {
                continue;
            }
            let mut cycle = vec![start];
            seen[start - 1] = true;
            let mut cur = self.apply(start);
            while cur != start {
                seen[cur - 1] = true;
                cycle.push(cur);
                cur = self.apply(cur);
            }
            out.push(cycle);
        }
        out
    }

    /// The cycle of `self` through `i`, listed from its minimum element.
    pub fn cycle_through(&self, i: usize) -> Vec<usize> {
        let mut cycle = vec![i];
        let mut cur = self.apply(i);
        while cur != i {
            cycle.push(cur);
            cur = self.apply(cur);
        }
        let min_pos = cycle
            .iter()
            .enumerate()
            .min_by_key(|&(_, v)| v)
            .map(|(p, _)| p)
            .unwrap();
        cycle.rotate_left(min_pos);
        cycle
    }

    /// Cycle-notation text, e.g. `(1,2,3)(4)` -> trivial cycles omitted
    /// unless the permutation is the identity.
    pub fn cycle_string(&self) -> String {
        let nontrivial: Vec<String> = self
            .cycles()
            .into_iter()
            .filter(|c| c.len() > 1)
            .map(|c| {
                format!("({})", c.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" "))
            })
            .collect();
        if nontrivial.is_empty() {
            "id".to_string()
        } else {
            nontrivial.join("")
        }
    }
}

/// A reference to one staircase: a cycle of π_ℓ (`Left`) or π_r (`Right`),
/// stored in cycle order from its minimum element.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CycleRef {
    pub side: Side,
    pub indices: Vec<usize>,
}

impl CycleRef {
    /// Canonicalizes the rotation so the cycle starts at its minimum element.
    pub fn new(side: Side, mut indices: Vec<usize>) -> Self {
        let min_pos = indices
            .iter()
            .enumerate()
            .min_by_key(|&(_, v)| v)
            .map(|(p, _)| p)
            .unwrap_or(0);
        indices.rotate_left(min_pos);
        CycleRef { side, indices }
    }

    /// True iff `i` belongs to the cycle.
    pub fn contains(&self, i: usize) -> bool {
        self.indices.contains(&i)
    }
}

impl fmt::Display for CycleRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = match self.side {
            Side::Left => 'L',
            Side::Right => 'R',
        };
        let idx: Vec<String> = self.indices.iter().map(|i| i.to_string()).collect();
        write!(f, "{side}{{{}}}", idx.join(","))
    }
}

/// A combinatorial datum (π_ℓ, π_r) with ⟨π_ℓ, π_r⟩ transitive on {1..k}.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CombDatum {
    perm_l: Perm,
    perm_r: Perm,
}

impl CombDatum {
    /// Builds a datum, checking degrees and transitivity.
    pub fn new(perm_l: Perm, perm_r: Perm) -> Result<Self, CombError> {
        if perm_l.k() != perm_r.k() {
            return Err(CombError::NotAPermutation(perm_r.images().to_vec()));
        }
        let d = CombDatum { perm_l, perm_r };
        if !d.is_transitive() {
            return Err(CombError::NotTransitive);
        }
        Ok(d)
    }

    /// Number of quadrilaterals / wedges.
    pub fn k(&self) -> usize {
        self.perm_l.k()
    }

    /// π_ℓ.
    pub fn perm_l(&self) -> &Perm {
        &self.perm_l
    }

    /// π_r.
    pub fn perm_r(&self) -> &Perm {
        &self.perm_r
    }

    /// The permutation on the requested side.
    pub fn perm(&self, side: Side) -> &Perm {
        match side {
            Side::Left => &self.perm_l,
            Side::Right => &self.perm_r,
        }
    }

    /// True iff ⟨π_ℓ, π_r⟩ acts transitively on {1..k} (connected surface).
    pub fn is_transitive(&self) -> bool {
        let k = self.k();
        if k == 0 {
            return false;
        }
        let mut seen = vec![false; k];
        let mut queue = VecDeque::from([1usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(i) = queue.pop_front() {
            for p in [&self.perm_l, &self.perm_r] {
                for j in [p.apply(i), p.inverse().apply(i)] {
                    if !seen[j - 1] {
                        seen[j - 1] = true;
                        count += 1;
                        queue.push_back(j);
                    }
                }
            }
        }
        count == k
    }

    /// All staircase cycles of one side.
    pub fn side_cycles(&self, side: Side) -> Vec<CycleRef> {
        self.perm(side).cycles().into_iter().map(|c| CycleRef::new(side, c)).collect()
    }

    /// All staircase cycles of both sides (left first).
    pub fn all_cycles(&self) -> Vec<CycleRef> {
        let mut out = self.side_cycles(Side::Left);
        out.extend(self.side_cycles(Side::Right));
        out
    }

    /// Checks that `c` really is a cycle of the stated side's permutation.
    pub fn check_cycle(&self, c: &CycleRef) -> Result<(), CombError> {
        let p = self.perm(c.side);
        let n = c.indices.len();
        let ok = n > 0
            && (0..n).all(|pos| p.apply(c.indices[pos]) == c.indices[(pos + 1) % n])
            && c.indices.iter().collect::<BTreeSet<_>>().len() == n;
        if ok {
            Ok(())
        } else {
            Err(CombError::NotACycle(c.indices.clone(), c.side))
        }
    }

    /// The move action `c·π` on combinatorial data: for a right cycle,
    /// `π_ℓ'(i) = π_ℓ(π_r(i))` on `i ∈ c` and unchanged elsewhere, with π_r
    /// untouched; symmetrically for a left cycle.
    pub fn act_move(&self, c: &CycleRef) -> Result<CombDatum, CombError> {
        self.check_cycle(c)?;
        let mut d = self.clone();
        match c.side {
            Side::Right => {
                let mut images = d.perm_l.images().to_vec();
                for &i in &c.indices {
                    images[i - 1] = self.perm_l.apply(self.perm_r.apply(i));
                }
                d.perm_l = Perm::from_images(images)?;
            }
            Side::Left => {
                let mut images = d.perm_r.images().to_vec();
                for &i in &c.indices {
                    images[i - 1] = self.perm_r.apply(self.perm_l.apply(i));
                }
                d.perm_r = Perm::from_images(images)?;
            }
        }
        debug_assert!(d.is_transitive());
        Ok(d)
    }

    /// The rotation operator on data: `π_ℓ' = π_ℓ π_r π_ℓ⁻¹`, `π_r' = π_ℓ⁻¹`.
    pub fn rotate(&self) -> CombDatum {
        let inv_l = self.perm_l.inverse();
        CombDatum {
            perm_l: self.perm_l.compose(&self.perm_r).compose(&inv_l),
            perm_r: inv_l,
        }
    }

    /// The inverse rotation: `π_ℓ' = π_r⁻¹`, `π_r' = π_r π_ℓ π_r⁻¹`.
    pub fn rotate_inverse(&self) -> CombDatum {
        let inv_r = self.perm_r.inverse();
        CombDatum {
            perm_l: inv_r.clone(),
            perm_r: self.perm_r.compose(&self.perm_l).compose(&inv_r),
        }
    }

    /// The cycle `c'` of the rotated datum matching staircase `c`: `c' = c`
    /// for left cycles and `c' = π_ℓ·c` (element-wise image) for right
    /// cycles, with the side flipped.
    pub fn cycle_prime(&self, c: &CycleRef) -> Result<CycleRef, CombError> {
        self.check_cycle(c)?;
        let (side, set): (Side, BTreeSet<usize>) = match c.side {
            Side::Left => (Side::Right, c.indices.iter().copied().collect()),
            Side::Right => {
                (Side::Left, c.indices.iter().map(|&i| self.perm_l.apply(i)).collect())
            }
        };
        // Reorder the index set as a cycle of the rotated datum's permutation.
        let rotated = self.rotate();
        let first = *set.iter().next().expect("non-empty cycle");
        let out = CycleRef::new(side, rotated.perm(side).cycle_through(first));
        if out.indices.iter().copied().collect::<BTreeSet<usize>>() != set {
            return Err(CombError::NotACycle(c.indices.clone(), c.side));
        }
        debug_assert!(rotated.check_cycle(&out).is_ok());
        Ok(out)
    }

    /// Searches for the hyperelliptic involution: an involution ι such that
    /// `π_ℓ∘ι` and `π_r∘ι` are involutions and `(π_r∘ι, π_ℓ∘ι, ι)` is a
    /// valid tree of relations.  Returns `None` for non-hyperelliptic data.
    ///
    /// Exhaustive search over involutions; degrees here are small.
    pub fn find_involution(&self) -> Option<Perm> {
        let mut found = None;
        for iota in involutions(self.k()) {
            let sigma_r = self.perm_l.compose(&iota);
            let sigma_l = self.perm_r.compose(&iota);
            if !sigma_r.is_involution() || !sigma_l.is_involution() {
                continue;
            }
            let tree = TreeOfRelations { sigma_l, sigma_r, sigma_d: iota.clone() };
            if tree.validate().is_ok() {
                found = Some(iota);
                break;
            }
        }
        found
    }
}

/// All involutions of {1..k}, identity first, in a deterministic order.
fn involutions(k: usize) -> Vec<Perm> {
    fn go(k: usize, next: usize, images: &mut Vec<usize>, out: &mut Vec<Perm>) {
        let i = (next..=k).find(|&i| images[i - 1] == 0);
        let Some(i) = i else {
            out.push(Perm::from_images(images.clone()).unwrap());
            return;
        };
        // i fixed:
        images[i - 1] = i;
        go(k, i + 1, images, out);
        images[i - 1] = 0;
        // i paired with a later free j:
        for j in i + 1..=k {
            if images[j - 1] == 0 {
                images[i - 1] = j;
                images[j - 1] = i;
                go(k, i + 1, images, out);
                images[i - 1] = 0;
                images[j - 1] = 0;
            }
        }
    }
    let mut out = Vec::new();
    go(k, 1, &mut vec![0; k], &mut out);
    out
}

/// A tree of relations: three involutions (σ_ℓ, σ_r, σ_d) whose dual graph
/// — one edge `{i, σ(i)}` per non-fixed pair of each involution — is a tree
/// on {1..k}, and whose product σ_ℓσ_rσ_d is a k-cycle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeOfRelations {
    pub sigma_l: Perm,
    pub sigma_r: Perm,
    pub sigma_d: Perm,
}

impl TreeOfRelations {
    /// Number of vertices.
    pub fn k(&self) -> usize {
        self.sigma_d.k()
    }

    /// Checks all tree-of-relations invariants.
    pub fn validate(&self) -> Result<(), CombError> {
        let k = self.k();
        if self.sigma_l.k() != k || self.sigma_r.k() != k {
            return Err(CombError::InvalidTree("mismatched degrees".into()));
        }
        for (name, s) in [("sigma_l", &self.sigma_l), ("sigma_r", &self.sigma_r), ("sigma_d", &self.sigma_d)] {
            if !s.is_involution() {
                return Err(CombError::InvalidTree(format!("{name} is not an involution")));
            }
        }
        // Dual graph: one edge per transposition of each involution; it must
        // be a tree on {1..k}, i.e. exactly k−1 edges, all distinct, connected.
        let mut edges = BTreeSet::new();
        let mut edge_count = 0usize;
        let mut adjacency: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for s in [&self.sigma_l, &self.sigma_r, &self.sigma_d] {
            for i in 1..=k {
                let j = s.apply(i);
                if j > i {
                    edge_count += 1;
                    if !edges.insert((i, j)) {
                        return Err(CombError::InvalidTree(format!("doubled edge {{{i},{j}}}")));
                    }
                    adjacency.entry(i).or_default().push(j);
                    adjacency.entry(j).or_default().push(i);
                }
            }
        }
        if edge_count != k - 1 {
            return Err(CombError::InvalidTree(format!("{edge_count} edges, expected {}", k - 1)));
        }
        let mut seen = vec![false; k];
        let mut queue = VecDeque::from([1usize]);
        seen[0] = true;
        let mut reached = 1;
        while let Some(i) = queue.pop_front() {
            for &j in adjacency.get(&i).map(|v| v.as_slice()).unwrap_or(&[]) {
                if !seen[j - 1] {
                    seen[j - 1] = true;
                    reached += 1;
                    queue.push_back(j);
                }
            }
        }
        if reached != k {
            return Err(CombError::InvalidTree("dual graph disconnected".into()));
        }
        let product = self.sigma_l.compose(&self.sigma_r).compose(&self.sigma_d);
        if product.cycles().len() != 1 {
            return Err(CombError::InvalidTree("sigma_l sigma_r sigma_d is not a k-cycle".into()));
        }
        Ok(())
    }

    /// The combinatorial datum of the tree: `π_ℓ = σ_r∘σ_d`, `π_r = σ_ℓ∘σ_d`.
    pub fn datum(&self) -> Result<CombDatum, CombError> {
        self.validate()?;
        CombDatum::new(self.sigma_r.compose(&self.sigma_d), self.sigma_l.compose(&self.sigma_d))
    }
}

/// The conserved k-cycle attached to a hyperelliptic datum, computed as
/// `π_ℓ ∘ π_r ∘ ι` (apply ι first).  The literature prints two variant
/// expressions whose readings disagree; this ordering is the one an
/// exhaustive check over the k = 3 reachability graph shows to be
/// constant under moves — the sandwich `π_r ∘ ι ∘ π_ℓ` is *not*.  Its
/// constancy is property-tested across the graph, not assumed.
pub fn invariant_cycle(d: &CombDatum) -> Option<Perm> {
    let iota = d.find_involution()?;
    Some(d.perm_l().compose(d.perm_r()).compose(&iota))
}

/// The graph of combinatorial data reachable by staircase moves.
#[derive(Debug, Clone)]
pub struct GraphG {
    /// Vertices in BFS-discovery order.
    pub vertices: Vec<CombDatum>,
    /// Edges `(from_index, cycle, to_index)` into `vertices`.
    pub edges: Vec<(usize, CycleRef, usize)>,
}

/// BFS closure of `d` under the move action over all cycles of both sides.
///
/// Requires a hyperelliptic start (every reachable vertex then stays
/// hyperelliptic); fails once more than `max_vertices` vertices appear.
pub fn enumerate_graph(d: &CombDatum, max_vertices: usize) -> Result<GraphG, CombError> {
    if d.find_involution().is_none() {
        return Err(CombError::NotHyperelliptic);
    }
    let mut index: BTreeMap<CombDatum, usize> = BTreeMap::new();
    let mut vertices = vec![d.clone()];
    index.insert(d.clone(), 0);
    let mut edges = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(from) = queue.pop_front() {
        let datum = vertices[from].clone();
        for c in datum.all_cycles() {
            let next = datum.act_move(&c)?;
            let to = match index.get(&next) {
                Some(&i) => i,
                None => {
                    let i = vertices.len();
                    if i >= max_vertices {
                        return Err(CombError::VertexBudgetExceeded(max_vertices));
                    }
                    vertices.push(next.clone());
                    index.insert(next, i);
                    queue.push_back(i);
                    i
                }
            };
            edges.push((from, c, to));
        }
    }
    Ok(GraphG { vertices, edges })
}

impl GraphG {
    /// DOT-format rendering with data as vertex labels and cycles as edge
    /// labels.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph G {\n");
        for (i, v) in self.vertices.iter().enumerate() {
            out.push_str(&format!(
                "  v{i} [label=\"pi_l={} pi_r={}\"];\n",
                v.perm_l().cycle_string(),
                v.perm_r().cycle_string()
            ));
        }
        for (from, c, to) in &self.edges {
            out.push_str(&format!("  v{from} -> v{to} [label=\"{c}\"];\n"));
        }
        out.push_str("}\n");
        out
    }
}
