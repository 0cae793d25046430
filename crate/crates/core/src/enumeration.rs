//! Copies of a pattern in a host graph, bridges on a pair, internally
//! disjoint packings and the covering predicates.
//!
//! Embeddings are found by backtracking in a connectivity-first vertex
//! order. Equivalent embeddings (those differing by a pattern automorphism)
//! are pruned with ordering constraints derived from a stabiliser chain of the
//! automorphism group, so each copy is produced exactly once.

use std::collections::HashMap;
use std::ops::ControlFlow;

use thiserror::Error;

use crate::gf2::EdgeVector;
use crate::graph::{Graph, Host};
use crate::pattern::{automorphisms_fixing, HPattern, PatternError, Permutation, RootedPair};

/// Default cap on stored copies.
pub const DEFAULT_COPY_CAP: usize = 5_000_000;
/// Largest family for which packings are solved exactly.
pub const EXACT_PACKING_LIMIT: usize = 24;

#[derive(Debug, Error)]
pub enum EnumError {
    #[error("anchor vertices must differ (got {0} twice)")]
    SameVertex(usize),
    #[error("vertex {0} outside the host graph")]
    VertexOutOfRange(usize),
    #[error("root tuple has {found} vertices, pair needs {expected}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("root tuple repeats vertex {0}")]
    RepeatedRoot(usize),
    #[error("vector length {found} does not match the host edge count {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("exact packing of {count} sets exceeds the limit of {limit}")]
    PackingOverBudget { count: usize, limit: usize },
    #[error("copy enumeration truncated at cap {cap}")]
    Truncated { cap: usize },
    #[error(transparent)]
    Pattern(#[from] PatternError),
}

pub type Result<T> = std::result::Result<T, EnumError>;

/// A pattern prepared for embedding into hosts.
#[derive(Debug, Clone)]
pub(crate) struct EmbeddingPlan {
    /// Pattern vertices in matching order; roots come first.
    order: Vec<usize>,
    n_roots: usize,
    /// Per position: earlier positions adjacent in the pattern.
    back: Vec<Vec<usize>>,
    /// Per position: earlier positions whose image must be smaller.
    above: Vec<Vec<usize>>,
    /// Per position: earlier positions whose image must be larger.
    below: Vec<Vec<usize>>,
    degree: Vec<usize>,
    edges: Vec<(usize, usize)>,
}

impl EmbeddingPlan {
    /// `group` must fix every root pointwise.
    pub(crate) fn new(pattern: &Graph, roots: &[usize], group: &[Permutation]) -> Self {
        let k = pattern.n();
        let deg = pattern.degrees();
        let mut order: Vec<usize> = roots.to_vec();
        let mut placed = vec![false; k];
        for &r in roots {
            placed[r] = true;
        }
        while order.len() < k {
            let next = (0..k)
                .filter(|&v| !placed[v])
                .max_by_key(|&v| {
                    let links = order.iter().filter(|&&u| pattern.adjacent(u, v)).count();
                    (links, deg[v], std::cmp::Reverse(v))
                })
                .expect("unplaced vertex");
            placed[next] = true;
            order.push(next);
        }
        let mut pos = vec![0; k];
        for (i, &v) in order.iter().enumerate() {
            pos[v] = i;
        }
        let back = (0..k)
            .map(|i| (0..i).filter(|&j| pattern.adjacent(order[i], order[j])).collect())
            .collect();

        // Stabiliser chain: at each non-root position v, require φ(v) to be the
        // least image over the orbit of v, then restrict to the stabiliser of v.
        let mut above = vec![Vec::new(); k];
        let mut below = vec![Vec::new(); k];
        let mut current: Vec<&Permutation> = group.iter().collect();
        debug_assert!(current.iter().all(|s| roots.iter().all(|&r| s[r] == r)));
        for &v in &order[roots.len()..] {
            let mut orbit: Vec<usize> = current.iter().map(|s| s[v]).collect();
            orbit.sort_unstable();
            orbit.dedup();
            for u in orbit {
                if u == v {
                    continue;
                }
                // φ(v) < φ(u)
                let (pv, pu) = (pos[v], pos[u]);
                if pv < pu {
                    above[pu].push(pv);
                } else {
                    below[pv].push(pu);
                }
            }
            current.retain(|s| s[v] == v);
        }
        EmbeddingPlan { order, n_roots: roots.len(), back, above, below, degree: deg, edges: pattern.edges().collect() }
    }

    fn size(&self) -> usize {
        self.order.len()
    }

    /// Calls `visit` with the image of every pattern vertex (indexed by
    /// pattern vertex) for each non-equivalent embedding extending `roots`.
    pub(crate) fn for_each<H, F>(&self, host: &H, roots: &[usize], mut visit: F) -> ControlFlow<()>
    where
        H: Host + ?Sized,
        F: FnMut(&[usize]) -> ControlFlow<()>,
    {
        debug_assert_eq!(roots.len(), self.n_roots);
        let k = self.size();
        let mut image = vec![usize::MAX; k];
        for (i, &x) in roots.iter().enumerate() {
            if image[..i].contains(&x) {
                return ControlFlow::Continue(());
            }
            for &j in &self.back[i] {
                if !host.adjacent(x, image[j]) {
                    return ControlFlow::Continue(());
                }
            }
            image[i] = x;
        }
        let mut by_vertex = vec![usize::MAX; k];
        self.extend(host, self.n_roots, &mut image, &mut by_vertex, &mut visit)
    }

    fn extend<H, F>(
        &self,
        host: &H,
        i: usize,
        image: &mut [usize],
        by_vertex: &mut [usize],
        visit: &mut F,
    ) -> ControlFlow<()>
    where
        H: Host + ?Sized,
        F: FnMut(&[usize]) -> ControlFlow<()>,
    {
        if i == self.size() {
            for (p, &v) in self.order.iter().enumerate() {
                by_vertex[v] = image[p];
            }
            return visit(by_vertex);
        }
        let need = self.degree[self.order[i]];
        let lo = self.above[i].iter().map(|&j| image[j]).max();
        let hi = self.below[i].iter().map(|&j| image[j]).min();
        let accept = |w: usize, image: &[usize]| -> bool {
            if lo.is_some_and(|l| w <= l) || hi.is_some_and(|h| w >= h) {
                return false;
            }
            if host.degree(w) < need || image[..i].contains(&w) {
                return false;
            }
            true
        };
        if let Some(&anchor) = self.back[i].iter().min_by_key(|&&j| host.degree(image[j])) {
            let base = image[anchor];
            for idx in 0..host.neighbors(base).len() {
                let w = host.neighbors(base)[idx] as usize;
                if !accept(w, image) {
                    continue;
                }
                if !self.back[i].iter().all(|&j| j == anchor || host.adjacent(w, image[j])) {
                    continue;
                }
                image[i] = w;
                self.extend(host, i + 1, image, by_vertex, visit)?;
            }
        } else {
            for w in 0..host.vertex_count() {
                if !accept(w, image) {
                    continue;
                }
                image[i] = w;
                self.extend(host, i + 1, image, by_vertex, visit)?;
            }
        }
        image[i] = usize::MAX;
        ControlFlow::Continue(())
    }

    fn edge_vector<H: Host + ?Sized>(&self, host: &H, by_vertex: &[usize]) -> EdgeVector {
        let mut v = EdgeVector::zeros(host.edge_space_len());
        for &(a, b) in &self.edges {
            let id = host.edge_id(by_vertex[a], by_vertex[b]).expect("embedded pattern edge exists in host");
            v.flip(id);
        }
        v
    }
}

/// One subgraph of the host isomorphic to the pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Copy {
    pub edges: EdgeVector,
    /// Image of each pattern vertex.
    pub vertices: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct CopySet {
    pub pattern: String,
    pub copies: Vec<Copy>,
    pub truncated: bool,
}

impl CopySet {
    pub fn len(&self) -> usize {
        self.copies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.copies.is_empty()
    }
}

/// A bridge on `xy`: a copy of `H` through `xy` in `G ∪ {xy}`, minus `xy`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bridge {
    /// Edges of the bridge in the host's edge space (never includes `xy`).
    pub edges: EdgeVector,
    /// Vertices other than `x` and `y`, sorted.
    pub internal: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct BridgeSet {
    pub x: usize,
    pub y: usize,
    pub bridges: Vec<Bridge>,
}

impl BridgeSet {
    /// The bridge count `t(xy)`.
    pub fn count(&self) -> usize {
        self.bridges.len()
    }
}

/// Precomputed embedding plans for one pattern.
#[derive(Debug, Clone)]
pub struct PatternMatcher {
    pattern: HPattern,
    copy_plan: EmbeddingPlan,
    /// One plan per ordered-edge type `(a, b)`, embedding `H - ab` rooted at `(a, b)`.
    bridge_plans: Vec<((usize, usize), EmbeddingPlan)>,
}

impl PatternMatcher {
    pub fn new(h: &HPattern) -> Self {
        let g = h.graph();
        let copy_plan = EmbeddingPlan::new(g, &[], h.aut_group());
        let bridge_plans = h
            .ordered_edge_reps()
            .iter()
            .map(|rep| {
                let (a, b) = (rep.a, rep.b);
                let pairs: Vec<_> = g.edges().filter(|&e| e != (a.min(b), a.max(b))).collect();
                let minus = Graph::new(g.n(), &pairs).expect("subgraph of a simple graph");
                let stab: Vec<Permutation> = h.aut_group().iter().filter(|s| s[a] == a && s[b] == b).cloned().collect();
                ((a, b), EmbeddingPlan::new(&minus, &[a, b], &stab))
            })
            .collect();
        PatternMatcher { pattern: h.clone(), copy_plan, bridge_plans }
    }

    pub fn pattern(&self) -> &HPattern {
        &self.pattern
    }

    /// All copies of the pattern, stopping once more than `cap` are found.
    pub fn copies<H: Host + ?Sized>(&self, host: &H, cap: usize) -> CopySet {
        let mut copies = Vec::new();
        let mut truncated = false;
        let _ = self.copy_plan.for_each(host, &[], |img| {
            if copies.len() == cap {
                truncated = true;
                return ControlFlow::Break(());
            }
            copies.push(Copy { edges: self.copy_plan.edge_vector(host, img), vertices: img.to_vec() });
            ControlFlow::Continue(())
        });
        CopySet { pattern: self.pattern.name().to_string(), copies, truncated }
    }

    fn check_pair<H: Host + ?Sized>(host: &H, x: usize, y: usize) -> Result<()> {
        if x == y {
            return Err(EnumError::SameVertex(x));
        }
        for v in [x, y] {
            if v >= host.vertex_count() {
                return Err(EnumError::VertexOutOfRange(v));
            }
        }
        Ok(())
    }

    /// Visits each `xy`-bridge as (pattern-vertex images, ordered-edge type).
    fn for_each_bridge<H, F>(&self, host: &H, x: usize, y: usize, mut visit: F)
    where
        H: Host + ?Sized,
        F: FnMut(&[usize], (usize, usize), &EmbeddingPlan) -> ControlFlow<()>,
    {
        for (ab, plan) in &self.bridge_plans {
            if plan.for_each(host, &[x, y], |img| visit(img, *ab, plan)).is_break() {
                return;
            }
        }
    }

    pub fn bridges<H: Host + ?Sized>(&self, host: &H, x: usize, y: usize) -> Result<BridgeSet> {
        Self::check_pair(host, x, y)?;
        let mut bridges = Vec::new();
        self.for_each_bridge(host, x, y, |img, _, plan| {
            let edges = plan.edge_vector(host, img);
            let mut internal: Vec<usize> = img.iter().copied().filter(|&v| v != x && v != y).collect();
            internal.sort_unstable();
            bridges.push(Bridge { edges, internal });
            ControlFlow::Continue(())
        });
        Ok(BridgeSet { x, y, bridges })
    }

    /// Number of `xy`-bridges without materialising them.
    pub fn bridge_count<H: Host + ?Sized>(&self, host: &H, x: usize, y: usize) -> Result<usize> {
        Self::check_pair(host, x, y)?;
        let mut t = 0;
        self.for_each_bridge(host, x, y, |_, _, _| {
            t += 1;
            ControlFlow::Continue(())
        });
        Ok(t)
    }

    /// Whether some copy of `H` in `host ∪ {xy}` contains `xy`.
    pub fn has_bridge<H: Host + ?Sized>(&self, host: &H, x: usize, y: usize) -> bool {
        let mut found = false;
        self.for_each_bridge(host, x, y, |_, _, _| {
            found = true;
            ControlFlow::Break(())
        });
        found
    }

    /// `Q_H`: every edge lies in a copy, with early exit on the first uncovered edge.
    pub fn holds_q(&self, g: &Graph) -> bool {
        g.edges().all(|(u, v)| self.has_bridge(g, u, v))
    }
}

pub fn enumerate_copies(h: &HPattern, g: &Graph, cap: usize) -> CopySet {
    PatternMatcher::new(h).copies(g, cap)
}

pub fn bridges(g: &Graph, x: usize, y: usize, h: &HPattern) -> Result<BridgeSet> {
    PatternMatcher::new(h).bridges(g, x, y)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PackingMode {
    /// Take sets in stored order when they avoid everything taken so far.
    Greedy,
    /// Maximum independent set in the conflict graph; refused above the limit.
    Exact,
    /// Exact up to [`EXACT_PACKING_LIMIT`] sets, greedy beyond.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Packing {
    pub size: usize,
    /// False when the size is only a greedy lower bound.
    pub exact: bool,
}

/// Largest subfamily of pairwise disjoint vertex sets.
pub fn pack_disjoint(sets: &[&[usize]], mode: PackingMode) -> Result<Packing> {
    let exact = match mode {
        PackingMode::Greedy => false,
        PackingMode::Exact if sets.len() > EXACT_PACKING_LIMIT => {
            return Err(EnumError::PackingOverBudget { count: sets.len(), limit: EXACT_PACKING_LIMIT })
        }
        PackingMode::Exact => true,
        PackingMode::Auto => sets.len() <= EXACT_PACKING_LIMIT,
    };
    let meets = |a: &[usize], b: &[usize]| a.iter().any(|v| b.contains(v));
    if !exact {
        let mut taken: Vec<&[usize]> = Vec::new();
        for s in sets {
            if taken.iter().all(|t| !meets(t, s)) {
                taken.push(s);
            }
        }
        return Ok(Packing { size: taken.len(), exact: sets.is_empty() });
    }
    let k = sets.len();
    let mut conflict = vec![0u32; k];
    for i in 0..k {
        for j in 0..k {
            if i != j && meets(sets[i], sets[j]) {
                conflict[i] |= 1 << j;
            }
        }
    }
    let all = if k == 32 { u32::MAX } else { (1u32 << k) - 1 };
    Ok(Packing { size: max_independent(all, &conflict), exact: true })
}

fn max_independent(cands: u32, conflict: &[u32]) -> usize {
    if cands == 0 {
        return 0;
    }
    let v = cands.trailing_zeros() as usize;
    let rest = cands & !(1 << v);
    if conflict[v] & rest == 0 {
        return 1 + max_independent(rest, conflict);
    }
    let with = 1 + max_independent(rest & !conflict[v], conflict);
    if with > rest.count_ones() as usize {
        return with;
    }
    with.max(max_independent(rest, conflict))
}

/// `s(xy)`: the largest set of internally disjoint bridges.
pub fn disjoint_packing(b: &BridgeSet, mode: PackingMode) -> Result<Packing> {
    let sets: Vec<&[usize]> = b.bridges.iter().map(|br| br.internal.as_slice()).collect();
    pack_disjoint(&sets, mode)
}

/// Whether `bridge` meets `s` in an odd number of edges, one of which avoids `{x, y}`.
pub fn is_central(g: &Graph, bridge: &Bridge, s: &EdgeVector, x: usize, y: usize) -> bool {
    let mut count = 0;
    let mut off_anchor = false;
    for i in bridge.edges.support().filter(|&i| s.get(i)) {
        count += 1;
        let (u, v) = g.edge(i);
        if u != x && u != y && v != x && v != y {
            off_anchor = true;
        }
    }
    count % 2 == 1 && off_anchor
}

/// Packing restricted to `S`-central `xy`-bridges.
pub fn central_packing(
    g: &Graph,
    x: usize,
    y: usize,
    s: &EdgeVector,
    h: &HPattern,
    mode: PackingMode,
) -> Result<Packing> {
    if s.len() != g.m() {
        return Err(EnumError::LengthMismatch { expected: g.m(), found: s.len() });
    }
    let b = bridges(g, x, y, h)?;
    let sets: Vec<&[usize]> =
        b.bridges.iter().filter(|br| is_central(g, br, s, x, y)).map(|br| br.internal.as_slice()).collect();
    pack_disjoint(&sets, mode)
}

/// Pairs `{x, y}` whose central packing exceeds `c · lambda`. The constant `c`
/// has no canonical value and must be supplied.
pub fn central_pairs(
    g: &Graph,
    h: &HPattern,
    s: &EdgeVector,
    c: f64,
    lambda: f64,
    mode: PackingMode,
) -> Result<Vec<(usize, usize)>> {
    let mut out = Vec::new();
    for x in 0..g.n() {
        for y in x + 1..g.n() {
            if central_packing(g, x, y, s, h, mode)?.size as f64 > c * lambda {
                out.push((x, y));
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Predicates {
    /// Every edge lies in a copy of `H`.
    pub q: bool,
    /// Each vertex has odd degree in some copy (vacuous for Eulerian `H`).
    pub r: bool,
    /// No two edges lie in exactly the same copies.
    pub s: bool,
}

/// Evaluates `Q`, `R` and `S` from the full copy list.
pub fn evaluate_predicates(g: &Graph, h: &HPattern, cap: usize) -> Result<Predicates> {
    let set = enumerate_copies(h, g, cap);
    predicates_from_copies(g, h, &set)
}

pub fn predicates_from_copies(g: &Graph, h: &HPattern, set: &CopySet) -> Result<Predicates> {
    if set.truncated {
        return Err(EnumError::Truncated { cap: set.copies.len() });
    }
    let mut signature: Vec<Vec<u32>> = vec![Vec::new(); g.m()];
    let odd = h.odd_vertices();
    let mut odd_somewhere = vec![false; g.n()];
    for (k, c) in set.copies.iter().enumerate() {
        for e in c.edges.support() {
            signature[e].push(k as u32);
        }
        for &v in &odd {
            odd_somewhere[c.vertices[v]] = true;
        }
    }
    let q = signature.iter().all(|s| !s.is_empty());
    let r = h.eulerian() || odd_somewhere.iter().all(|&b| b);
    let mut seen: HashMap<&[u32], usize> = HashMap::with_capacity(g.m());
    let mut s = true;
    for sig in &signature {
        if seen.insert(sig.as_slice(), 0).is_some() {
            s = false;
            break;
        }
    }
    Ok(Predicates { q, r, s })
}

/// `(τ, σ)` for copies of `[W, Z]` on the root tuple `x` (listed in the
/// increasing order of `W`).
pub fn tau_sigma(g: &Graph, rp: &RootedPair, x: &[usize], mode: PackingMode) -> Result<(usize, Packing)> {
    let roots = rp.root();
    if x.len() != roots.len() {
        return Err(EnumError::ArityMismatch { expected: roots.len(), found: x.len() });
    }
    for (i, &v) in x.iter().enumerate() {
        if v >= g.n() {
            return Err(EnumError::VertexOutOfRange(v));
        }
        if x[..i].contains(&v) {
            return Err(EnumError::RepeatedRoot(v));
        }
    }
    let target = rp.target();
    let local = |v: usize| target.binary_search(&v).expect("vertex of Z");
    let pairs: Vec<_> = rp.edges().into_iter().map(|(u, v)| (local(u), local(v))).collect();
    let ext = Graph::new(target.len(), &pairs).expect("subgraph of host");
    let local_roots: Vec<usize> = roots.iter().map(|&v| local(v)).collect();
    let group = automorphisms_fixing(&ext, &local_roots);
    let plan = EmbeddingPlan::new(&ext, &local_roots, &group);
    let mut internals: Vec<Vec<usize>> = Vec::new();
    let _ = plan.for_each(g, x, |img| {
        let mut inside: Vec<usize> =
            (0..img.len()).filter(|v| !local_roots.contains(v)).map(|v| img[v]).collect();
        inside.sort_unstable();
        internals.push(inside);
        ControlFlow::Continue(())
    });
    let sets: Vec<&[usize]> = internals.iter().map(Vec::as_slice).collect();
    let sigma = pack_disjoint(&sets, mode)?;
    Ok((internals.len(), sigma))
}
