//! The fixed pattern graph `H`: automorphisms, 2-densities, balance,
//! the four-way space classification, threshold formulas and rooted
//! extension densities.
//!
//! All densities are exact rationals. Vertex sets of patterns are handled as
//! `u32` bitmasks, which bounds pattern size well above the enumeration budget.

use std::cmp::Ordering;
use std::fmt;

use num_rational::Ratio;
use thiserror::Error;

use crate::graph::{Graph, GraphError, Host};

pub type Rational = Ratio<i64>;

/// Largest pattern (and rooted target set) accepted by the exhaustive scans.
pub const PATTERN_VERTEX_LIMIT: usize = 12;

#[derive(Debug, Error)]
pub enum PatternError {
    #[error("pattern has no edges")]
    Edgeless,
    #[error("pattern has {0} vertices; at least 3 are required")]
    TooFewVertices(usize),
    #[error("{what} has {size} vertices, over the budget of {limit}")]
    OverBudget { what: &'static str, size: usize, limit: usize },
    #[error("root set must be a proper subset of the target set")]
    BadRootedPair,
    #[error("vertex {0} is not in the host graph")]
    VertexOutOfRange(usize),
    #[error("n = {n} is below the minimum {min}")]
    SmallN { n: usize, min: usize },
    #[error("probability {0} outside [0, 1]")]
    Probability(f64),
    #[error("{0}")]
    Undefined(&'static str),
    #[error("unknown pattern {0:?}")]
    Unknown(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

pub type Result<T> = std::result::Result<T, PatternError>;

/// The natural value of the H-space, by (Eulerian, parity of `e_H`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WClass {
    /// Eulerian, odd edge count: the cycle space.
    Cycle,
    /// Eulerian, even edge count: cycle space ∩ even-size subgraphs.
    CycleAndEven,
    /// Not Eulerian, odd edge count: the whole edge space.
    Full,
    /// Not Eulerian, even edge count: even-size subgraphs.
    Even,
}

impl WClass {
    pub fn classify(eulerian: bool, edge_count_even: bool) -> WClass {
        match (eulerian, edge_count_even) {
            (true, false) => WClass::Cycle,
            (true, true) => WClass::CycleAndEven,
            (false, false) => WClass::Full,
            (false, true) => WClass::Even,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            WClass::Cycle => "CYCLE",
            WClass::CycleAndEven => "CYCLE_AND_EVEN",
            WClass::Full => "FULL",
            WClass::Even => "EVEN",
        }
    }

    /// Whether the orthogonal complement contains every cut.
    pub fn contains_cuts_in_perp(self) -> bool {
        matches!(self, WClass::Cycle | WClass::CycleAndEven)
    }
}

impl fmt::Display for WClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `perm[v]` is the image of `v`.
pub type Permutation = Vec<usize>;

fn adjacency_matrix(g: &Graph) -> Vec<Vec<bool>> {
    let mut a = vec![vec![false; g.n()]; g.n()];
    for (u, v) in g.edges() {
        a[u][v] = true;
        a[v][u] = true;
    }
    a
}

/// All automorphisms of `g` fixing every vertex of `fixed`, by backtracking
/// over degree- and neighbourhood-compatible images.
pub fn automorphisms_fixing(g: &Graph, fixed: &[usize]) -> Vec<Permutation> {
    let n = g.n();
    let adj = adjacency_matrix(g);
    let deg = g.degrees();
    let signature: Vec<(usize, Vec<usize>)> = (0..n)
        .map(|v| {
            let mut nd: Vec<usize> = g.neighbors(v).iter().map(|&w| deg[w as usize]).collect();
            nd.sort_unstable();
            (deg[v], nd)
        })
        .collect();
    let mut is_fixed = vec![false; n];
    for &f in fixed {
        is_fixed[f] = true;
    }

    let mut order: Vec<usize> = Vec::with_capacity(n);
    let mut placed = vec![false; n];
    for &f in fixed {
        if !placed[f] {
            placed[f] = true;
            order.push(f);
        }
    }
    while order.len() < n {
        let next = (0..n)
            .filter(|&v| !placed[v])
            .max_by_key(|&v| {
                let links = order.iter().filter(|&&u| adj[u][v]).count();
                (links, deg[v], std::cmp::Reverse(v))
            })
            .expect("unplaced vertex remains");
        placed[next] = true;
        order.push(next);
    }

    struct Search<'a> {
        adj: &'a [Vec<bool>],
        signature: &'a [(usize, Vec<usize>)],
        is_fixed: &'a [bool],
        order: &'a [usize],
        image: Vec<usize>,
        used: Vec<bool>,
        out: Vec<Permutation>,
    }

    impl Search<'_> {
        fn run(&mut self, i: usize) {
            if i == self.order.len() {
                self.out.push(self.image.clone());
                return;
            }
            let v = self.order[i];
            let n = self.adj.len();
            for w in 0..n {
                if self.used[w] || self.signature[w] != self.signature[v] {
                    continue;
                }
                if self.is_fixed[v] && w != v {
                    continue;
                }
                let consistent = self.order[..i].iter().all(|&u| self.adj[v][u] == self.adj[w][self.image[u]]);
                if !consistent {
                    continue;
                }
                self.image[v] = w;
                self.used[w] = true;
                self.run(i + 1);
                self.used[w] = false;
            }
        }
    }

    let mut s = Search {
        adj: &adj,
        signature: &signature,
        is_fixed: &is_fixed,
        order: &order,
        image: vec![usize::MAX; n],
        used: vec![false; n],
        out: Vec::new(),
    };
    s.run(0);
    s.out.sort();
    s.out
}

pub fn automorphisms(g: &Graph) -> Vec<Permutation> {
    automorphisms_fixing(g, &[])
}

/// One representative ordered edge per isomorphism type, with `aut(H; a, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrderedEdgeRep {
    pub a: usize,
    pub b: usize,
    pub stabilizer_order: usize,
}

fn ordered_edge_reps(g: &Graph, aut: &[Permutation]) -> Vec<OrderedEdgeRep> {
    let mut ordered: Vec<(usize, usize)> = g.edges().flat_map(|(u, v)| [(u, v), (v, u)]).collect();
    ordered.sort_unstable();
    let mut seen = std::collections::HashSet::new();
    let mut reps = Vec::new();
    for (a, b) in ordered {
        if seen.contains(&(a, b)) {
            continue;
        }
        for s in aut {
            seen.insert((s[a], s[b]));
        }
        let stabilizer_order = aut.iter().filter(|s| s[a] == a && s[b] == b).count();
        reps.push(OrderedEdgeRep { a, b, stabilizer_order });
    }
    reps
}

/// `d_2(K) = (e - 1)/(v - 2)` for `v >= 3`, else 0.
pub fn two_density(k: &Graph) -> Rational {
    two_density_counts(k.n(), k.m())
}

fn two_density_counts(v: usize, e: usize) -> Rational {
    if v >= 3 {
        Rational::new(e as i64 - 1, v as i64 - 2)
    } else {
        Rational::from_integer(0)
    }
}

/// Bitmask adjacency for graphs of at most 32 vertices.
#[derive(Clone, Debug)]
struct MaskGraph {
    adj: Vec<u32>,
}

impl MaskGraph {
    fn new(g: &Graph) -> Self {
        let mut adj = vec![0u32; g.n()];
        for (u, v) in g.edges() {
            adj[u] |= 1 << v;
            adj[v] |= 1 << u;
        }
        MaskGraph { adj }
    }

    fn edges_within(&self, set: u32) -> usize {
        let mut twice = 0;
        let mut rest = set;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            twice += (self.adj[v] & set).count_ones() as usize;
        }
        twice / 2
    }
}

fn mask_to_vec(mask: u32) -> Vec<usize> {
    (0..32).filter(|&i| mask >> i & 1 == 1).collect()
}

fn vec_to_mask(vs: &[usize], n: usize) -> Result<u32> {
    let mut m = 0u32;
    for &v in vs {
        if v >= n {
            return Err(PatternError::VertexOutOfRange(v));
        }
        m |= 1 << v;
    }
    Ok(m)
}

/// Lexicographic order of sorted vertex lists encoded as masks.
fn cmp_sets_lex(a: u32, b: u32) -> Ordering {
    let la = mask_to_vec(a);
    let lb = mask_to_vec(b);
    la.cmp(&lb)
}

fn check_budget(what: &'static str, size: usize) -> Result<()> {
    if size > PATTERN_VERTEX_LIMIT {
        Err(PatternError::OverBudget { what, size, limit: PATTERN_VERTEX_LIMIT })
    } else {
        Ok(())
    }
}

/// A densest subgraph in the 2-density sense.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DensestSubgraph {
    pub density: Rational,
    pub vertices: Vec<usize>,
    pub edges: Vec<(usize, usize)>,
}

/// `m_2(H)` with a witness. For a fixed vertex set the induced subgraph is
/// densest, so the scan runs over vertex subsets; among maximisers the
/// witness has fewest vertices, then the lexicographically least vertex list.
pub fn max_two_density(h: &Graph) -> Result<DensestSubgraph> {
    check_budget("pattern", h.n())?;
    let mg = MaskGraph::new(h);
    let mut best_mask = 0u32;
    let mut best = Rational::from_integer(0);
    for mask in 1u32..(1u32 << h.n()) {
        let d = two_density_counts(mask.count_ones() as usize, mg.edges_within(mask));
        let better = match d.cmp(&best) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => {
                best_mask == 0
                    || mask.count_ones() < best_mask.count_ones()
                    || (mask.count_ones() == best_mask.count_ones() && cmp_sets_lex(mask, best_mask) == Ordering::Less)
            }
        };
        if better {
            best = d;
            best_mask = mask;
        }
    }
    let vertices = mask_to_vec(best_mask);
    let edges = h.edges().filter(|&(u, v)| best_mask >> u & 1 == 1 && best_mask >> v & 1 == 1).collect();
    Ok(DensestSubgraph { density: best, vertices, edges })
}

/// Strict 2-balance by scanning subgraphs: every proper subgraph is strictly
/// sparser than `h`. Proper subgraphs on at most two vertices have 2-density 0.
pub fn is_strictly_2_balanced(h: &Graph) -> Result<bool> {
    if h.n() < 3 {
        return Err(PatternError::TooFewVertices(h.n()));
    }
    check_budget("pattern", h.n())?;
    let d = two_density(h);
    if d <= Rational::from_integer(0) {
        return Ok(false);
    }
    let mg = MaskGraph::new(h);
    let all = (1u32 << h.n()) - 1;
    for mask in 1u32..all {
        let k = mask.count_ones() as usize;
        if k >= 3 && two_density_counts(k, mg.edges_within(mask)) >= d {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Strict 2-balance through rooted extensions: `[xy, H]` strictly balanced
/// for every edge `xy`, together with `d_2(H) > 0` (the single-edge subgraph).
pub fn is_strictly_2_balanced_rooted(h: &Graph) -> Result<bool> {
    if h.n() < 3 {
        return Err(PatternError::TooFewVertices(h.n()));
    }
    check_budget("pattern", h.n())?;
    if two_density(h) <= Rational::from_integer(0) {
        return Ok(false);
    }
    let all: Vec<usize> = (0..h.n()).collect();
    for (x, y) in h.edges() {
        let rp = RootedPair::new(h.clone(), &[x, y], &all)?;
        if !rooted_density_profile(&rp)?.strictly_balanced {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The pattern `H` with everything the rest of the crate needs cached.
#[derive(Debug, Clone)]
pub struct HPattern {
    name: String,
    graph: Graph,
    aut_group: Vec<Permutation>,
    ordered_edge_reps: Vec<OrderedEdgeRep>,
    rho: Rational,
    eulerian: bool,
    d2: Rational,
    m2: DensestSubgraph,
    strictly_2_balanced: bool,
    w_class: WClass,
}

impl HPattern {
    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn graph(&self) -> &Graph {
        &self.graph
    }
    pub fn v(&self) -> usize {
        self.graph.n()
    }
    pub fn e(&self) -> usize {
        self.graph.m()
    }
    pub fn aut_group(&self) -> &[Permutation] {
        &self.aut_group
    }
    pub fn aut_order(&self) -> usize {
        self.aut_group.len()
    }
    pub fn ordered_edge_reps(&self) -> &[OrderedEdgeRep] {
        &self.ordered_edge_reps
    }
    pub fn rho(&self) -> Rational {
        self.rho
    }
    pub fn eulerian(&self) -> bool {
        self.eulerian
    }
    /// `e_H mod 2`.
    pub fn edge_parity(&self) -> usize {
        self.graph.m() % 2
    }
    pub fn d2(&self) -> Rational {
        self.d2
    }
    pub fn m2(&self) -> Rational {
        self.m2.density
    }
    pub fn m2_witness(&self) -> &DensestSubgraph {
        &self.m2
    }
    pub fn strictly_2_balanced(&self) -> bool {
        self.strictly_2_balanced
    }
    pub fn w_class(&self) -> WClass {
        self.w_class
    }
    /// Vertices of odd degree in `H`.
    pub fn odd_vertices(&self) -> Vec<usize> {
        (0..self.v()).filter(|&v| self.graph.degree(v) % 2 == 1).collect()
    }
}

pub fn analyze_pattern(h: &Graph) -> Result<HPattern> {
    analyze_named(h, "custom")
}

pub fn analyze_named(h: &Graph, name: &str) -> Result<HPattern> {
    if h.m() == 0 {
        return Err(PatternError::Edgeless);
    }
    if h.n() < 3 {
        return Err(PatternError::TooFewVertices(h.n()));
    }
    check_budget("pattern", h.n())?;
    let aut_group = automorphisms(h);
    let ordered_edge_reps = ordered_edge_reps(h, &aut_group);
    let rho = ordered_edge_reps.iter().map(|r| Rational::new(1, r.stabilizer_order as i64)).sum();
    let eulerian = h.degrees().iter().all(|d| d % 2 == 0);
    let strict = is_strictly_2_balanced(h)?;
    debug_assert_eq!(strict, is_strictly_2_balanced_rooted(h)?);
    Ok(HPattern {
        name: name.to_string(),
        graph: h.clone(),
        rho,
        eulerian,
        d2: two_density(h),
        m2: max_two_density(h)?,
        strictly_2_balanced: strict,
        w_class: WClass::classify(eulerian, h.m() % 2 == 0),
        aut_group,
        ordered_edge_reps,
    })
}

/// Names accepted by [`named_pattern`].
pub const PATTERN_NAMES: &[&str] =
    &["C3", "C4", "C5", "C6", "C7", "C8", "C9", "K4", "K5", "K4+pendant", "K5+C7"];

/// Built-in patterns. `K5+C7` is a `K_5` on `0..5` and a 7-cycle through
/// vertex 0 and the new vertices `5..11`.
pub fn named_pattern(name: &str) -> Option<Graph> {
    match name {
        "K4" => Some(Graph::complete(4)),
        "K5" => Some(Graph::complete(5)),
        "K4+pendant" => {
            let mut pairs: Vec<_> = Graph::complete(4).edges().collect();
            pairs.push((0, 4));
            Some(Graph::new(5, &pairs).expect("valid"))
        }
        "K5+C7" => {
            let mut pairs: Vec<_> = Graph::complete(5).edges().collect();
            let cyc = [0, 5, 6, 7, 8, 9, 10];
            for i in 0..7 {
                pairs.push((cyc[i], cyc[(i + 1) % 7]));
            }
            Some(Graph::new(11, &pairs).expect("valid"))
        }
        _ => {
            let k: usize = name.strip_prefix('C')?.parse().ok()?;
            (3..=9).contains(&k).then(|| Graph::cycle(k))
        }
    }
}

/// Resolves a built-in name and analyses it.
pub fn pattern_by_name(name: &str) -> Result<HPattern> {
    let g = named_pattern(name).ok_or_else(|| PatternError::Unknown(name.to_string()))?;
    analyze_named(&g, name)
}

/// `p*_H(n) = n^{-1/m2} [(2 - 1/m2) ϱ^{-1} ln n]^{1/(e_H - 1)}`.
///
/// Evaluated for any pattern; callers should flag patterns that are not
/// strictly 2-balanced, for which the value carries no threshold meaning.
pub fn p_star(h: &HPattern, n: usize) -> Result<f64> {
    if n < 3 {
        return Err(PatternError::SmallN { n, min: 3 });
    }
    if h.e() < 2 || h.m2() <= Rational::from_integer(0) {
        return Err(PatternError::Undefined("p* needs e_H >= 2 and m_2 > 0"));
    }
    let m2 = ratio_f64(h.m2());
    let rho = ratio_f64(h.rho);
    let nf = n as f64;
    Ok(nf.powf(-1.0 / m2) * ((2.0 - 1.0 / m2) / rho * nf.ln()).powf(1.0 / (h.e() as f64 - 1.0)))
}

pub fn ratio_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn check_p(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(PatternError::Probability(p))
    }
}

/// `(Λ_K^p, Ψ_K^p) = (n^{v-2} p^{e-1}, n^v p^e)`.
pub fn lambda_psi(k: &Graph, n: usize, p: f64) -> Result<(f64, f64)> {
    check_p(p)?;
    let nf = n as f64;
    let (v, e) = (k.n() as i32, k.m() as i32);
    Ok((nf.powi(v - 2) * p.powi(e - 1), nf.powi(v) * p.powi(e)))
}

/// Expected number of copies of `H` through a given pair of `G(n, p)`:
/// `ϱ (n-2)_{v_H-2} p^{e_H-1}`.
pub fn expected_bridges(h: &HPattern, n: usize, p: f64) -> Result<f64> {
    check_p(p)?;
    if n < h.v() {
        return Err(PatternError::SmallN { n, min: h.v() });
    }
    let falling: f64 = (0..h.v() - 2).map(|i| (n - 2 - i) as f64).product();
    Ok(ratio_f64(h.rho) * falling * p.powi(h.e() as i32 - 1))
}

/// `[W, Z]` over a host graph `F`: the graph on `Z` with the edges of `F[Z]`
/// not inside `W`.
#[derive(Debug, Clone)]
pub struct RootedPair {
    host: Graph,
    root: u32,
    target: u32,
    masks: Vec<u32>,
}

impl RootedPair {
    pub fn new(host: Graph, root: &[usize], target: &[usize]) -> Result<Self> {
        if host.n() > 32 {
            return Err(PatternError::OverBudget { what: "rooted host", size: host.n(), limit: 32 });
        }
        let root_m = vec_to_mask(root, host.n())?;
        let target_m = vec_to_mask(target, host.n())?;
        if root_m & !target_m != 0 || root_m == target_m {
            return Err(PatternError::BadRootedPair);
        }
        let masks = MaskGraph::new(&host).adj;
        Ok(RootedPair { host, root: root_m, target: target_m, masks })
    }

    fn mg(&self) -> MaskGraph {
        MaskGraph { adj: self.masks.clone() }
    }

    pub fn host(&self) -> &Graph {
        &self.host
    }
    pub fn root(&self) -> Vec<usize> {
        mask_to_vec(self.root)
    }
    pub fn target(&self) -> Vec<usize> {
        mask_to_vec(self.target)
    }
    pub fn internal(&self) -> Vec<usize> {
        mask_to_vec(self.target & !self.root)
    }
    pub fn root_mask(&self) -> u32 {
        self.root
    }
    pub fn target_mask(&self) -> u32 {
        self.target
    }

    /// Number of internal vertices `|Z \ W|`.
    pub fn v(&self) -> usize {
        (self.target & !self.root).count_ones() as usize
    }

    /// `|E(F[Z])| - |E(F[W])|`.
    pub fn e(&self) -> usize {
        let mg = self.mg();
        mg.edges_within(self.target) - mg.edges_within(self.root)
    }

    pub fn density(&self) -> Rational {
        Rational::new(self.e() as i64, self.v() as i64)
    }

    /// Edges of `[W, Z]` as host vertex pairs.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let (z, w) = (self.target, self.root);
        self.host
            .edges()
            .filter(|&(u, v)| z >> u & 1 == 1 && z >> v & 1 == 1 && !(w >> u & 1 == 1 && w >> v & 1 == 1))
            .collect()
    }
}

fn pair_density(mg: &MaskGraph, w: u32, z: u32) -> Rational {
    let e = mg.edges_within(z) - mg.edges_within(w);
    Rational::new(e as i64, (z & !w).count_ones() as i64)
}

/// Proper nonempty subsets of `free`, as masks.
fn proper_submasks(free: u32) -> impl Iterator<Item = u32> {
    let mut sub = free;
    std::iter::from_fn(move || {
        // Walk submasks downwards from `free`, skipping `free` itself and 0.
        sub = sub.wrapping_sub(1) & free;
        (sub != 0).then_some(sub)
    })
}

/// Density data of a rooted pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DensityProfile {
    pub density: Rational,
    pub balanced: bool,
    pub strictly_balanced: bool,
    /// `max d(W, Y)` over `W ⊊ Y ⊊ Z`; present when `|Z \ W| >= 2`.
    pub a: Option<Rational>,
    /// `min d(Y, Z)` over the same range.
    pub b: Option<Rational>,
}

pub fn rooted_density_profile(rp: &RootedPair) -> Result<DensityProfile> {
    if rp.v() > 20 {
        return Err(PatternError::OverBudget { what: "rooted pair interior", size: rp.v(), limit: 20 });
    }
    let mg = rp.mg();
    let d = pair_density(&mg, rp.root, rp.target);
    let free = rp.target & !rp.root;
    let mut balanced = true;
    let mut strict = true;
    let mut a: Option<Rational> = None;
    let mut b: Option<Rational> = None;
    for sub in proper_submasks(free) {
        let y = rp.root | sub;
        let dwy = pair_density(&mg, rp.root, y);
        let dyz = pair_density(&mg, y, rp.target);
        if dwy > d {
            balanced = false;
        }
        if dwy >= d {
            strict = false;
        }
        a = Some(a.map_or(dwy, |x| x.max(dwy)));
        b = Some(b.map_or(dyz, |x| x.min(dyz)));
    }
    Ok(DensityProfile { density: d, balanced, strictly_balanced: strict, a, b })
}

/// `W = S_0 ⊂ S_1 ⊂ … ⊂ S_k = Z` built greedily: each step takes the densest
/// extension, then the smallest, then the lexicographically least vertex set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainDecomposition {
    sets: Vec<u32>,
    densities: Vec<Rational>,
}

impl ChainDecomposition {
    pub fn sets(&self) -> Vec<Vec<usize>> {
        self.sets.iter().map(|&m| mask_to_vec(m)).collect()
    }

    /// `d(S_{i-1}, S_i)` for each step.
    pub fn densities(&self) -> &[Rational] {
        &self.densities
    }

    pub fn steps(&self) -> usize {
        self.densities.len()
    }

    /// The steps as rooted pairs over the same host.
    pub fn step_pairs(&self, host: &Graph) -> Result<Vec<RootedPair>> {
        self.sets
            .windows(2)
            .map(|w| RootedPair::new(host.clone(), &mask_to_vec(w[0]), &mask_to_vec(w[1])))
            .collect()
    }
}

pub fn chain_decompose(rp: &RootedPair) -> Result<ChainDecomposition> {
    check_budget("target set", rp.target.count_ones() as usize)?;
    let mg = rp.mg();
    let mut sets = vec![rp.root];
    let mut densities = Vec::new();
    let mut cur = rp.root;
    while cur != rp.target {
        let free = rp.target & !cur;
        let mut best: Option<(Rational, u32)> = None;
        for sub in std::iter::once(free).chain(proper_submasks(free)) {
            let s = cur | sub;
            let d = pair_density(&mg, cur, s);
            let take = match &best {
                None => true,
                Some((bd, bs)) => match d.cmp(bd) {
                    Ordering::Greater => true,
                    Ordering::Less => false,
                    Ordering::Equal => match s.count_ones().cmp(&bs.count_ones()) {
                        Ordering::Less => true,
                        Ordering::Greater => false,
                        Ordering::Equal => cmp_sets_lex(s, *bs) == Ordering::Less,
                    },
                },
            };
            if take {
                best = Some((d, s));
            }
        }
        let (d, s) = best.expect("nonempty free set");
        densities.push(d);
        sets.push(s);
        cur = s;
    }
    Ok(ChainDecomposition { sets, densities })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{gnp_sample, RandomSource};
    use proptest::prelude::*;

    fn r(a: i64, b: i64) -> Rational {
        Rational::new(a, b)
    }

    fn k4_pendant() -> Graph {
        named_pattern("K4+pendant").unwrap()
    }

    #[test]
    fn classify_table() {
        assert_eq!(WClass::classify(true, false), WClass::Cycle);
        assert_eq!(WClass::classify(true, true), WClass::CycleAndEven);
        assert_eq!(WClass::classify(false, false), WClass::Full);
        assert_eq!(WClass::classify(false, true), WClass::Even);
    }

    #[test]
    fn analyze_c4_k4_c3() {
        let c4 = pattern_by_name("C4").unwrap();
        assert!(c4.eulerian());
        assert_eq!(c4.edge_parity(), 0);
        assert_eq!(c4.w_class(), WClass::CycleAndEven);
        assert_eq!((c4.d2(), c4.m2()), (r(3, 2), r(3, 2)));
        assert!(c4.strictly_2_balanced());
        assert_eq!(c4.rho(), r(1, 1));
        assert_eq!(c4.aut_order(), 8);

        let k4 = pattern_by_name("K4").unwrap();
        assert!(!k4.eulerian());
        assert_eq!(k4.w_class(), WClass::Even);
        assert_eq!(k4.d2(), r(5, 2));
        assert_eq!(k4.rho(), r(1, 2));
        assert_eq!(k4.ordered_edge_reps().len(), 1);
        assert_eq!(k4.ordered_edge_reps()[0].stabilizer_order, 2);

        let c3 = pattern_by_name("C3").unwrap();
        assert_eq!(c3.w_class(), WClass::Cycle);
        assert_eq!(c3.d2(), r(2, 1));
        assert_eq!(c3.rho(), r(1, 1));
    }

    #[test]
    fn analyze_rejects() {
        assert!(matches!(analyze_pattern(&Graph::empty(4)), Err(PatternError::Edgeless)));
        assert!(matches!(analyze_pattern(&Graph::complete(2)), Err(PatternError::TooFewVertices(2))));
        assert!(matches!(analyze_pattern(&Graph::cycle(13)), Err(PatternError::OverBudget { .. })));
        assert!(analyze_pattern(&Graph::path(3)).is_ok());
    }

    #[test]
    fn rho_equals_twice_edges_over_aut() {
        for name in PATTERN_NAMES {
            let h = pattern_by_name(name).unwrap();
            assert_eq!(h.rho(), r(2 * h.e() as i64, h.aut_order() as i64), "{name}");
            for rep in h.ordered_edge_reps() {
                let orbit: std::collections::HashSet<_> =
                    h.aut_group().iter().map(|s| (s[rep.a], s[rep.b])).collect();
                assert_eq!(orbit.len() * rep.stabilizer_order, h.aut_order());
            }
        }
    }

    #[test]
    fn aut_group_is_a_group() {
        for name in ["C5", "K4+pendant", "K5+C7"] {
            let h = pattern_by_name(name).unwrap();
            let group: std::collections::HashSet<_> = h.aut_group().iter().cloned().collect();
            let id: Permutation = (0..h.v()).collect();
            assert!(group.contains(&id));
            for a in h.aut_group() {
                let mut inv = vec![0; a.len()];
                for (i, &x) in a.iter().enumerate() {
                    inv[x] = i;
                }
                assert!(group.contains(&inv));
                for b in h.aut_group() {
                    let comp: Permutation = (0..a.len()).map(|i| a[b[i]]).collect();
                    assert!(group.contains(&comp));
                }
            }
        }
        assert_eq!(pattern_by_name("K5+C7").unwrap().aut_order(), 48);
    }

    #[test]
    fn two_density_examples() {
        assert_eq!(two_density(&Graph::complete(3)), r(2, 1));
        assert_eq!(two_density(&Graph::cycle(5)), r(4, 3));
        assert_eq!(two_density(&Graph::complete(2)), r(0, 1));
    }

    #[test]
    fn max_two_density_examples() {
        let w = max_two_density(&k4_pendant()).unwrap();
        assert_eq!(w.density, r(5, 2));
        assert_eq!(w.vertices, vec![0, 1, 2, 3]);
        assert_eq!(two_density(&k4_pendant()), r(2, 1));
        let c6 = max_two_density(&Graph::cycle(6)).unwrap();
        assert_eq!(c6.density, r(5, 4));
        assert_eq!(c6.vertices.len(), 6);
        assert_eq!(max_two_density(&Graph::complete(4)).unwrap().density, r(5, 2));
    }

    #[test]
    fn strict_balance_examples() {
        for k in 3..=9 {
            assert!(is_strictly_2_balanced(&Graph::cycle(k)).unwrap());
        }
        assert!(is_strictly_2_balanced(&Graph::complete(4)).unwrap());
        assert!(!is_strictly_2_balanced(&k4_pendant()).unwrap());
        assert!(matches!(is_strictly_2_balanced(&Graph::complete(2)), Err(PatternError::TooFewVertices(2))));
        let h = pattern_by_name("K4+pendant").unwrap();
        assert!(!h.strictly_2_balanced());
    }

    #[test]
    fn p_star_examples() {
        let c3 = pattern_by_name("C3").unwrap();
        let c4 = pattern_by_name("C4").unwrap();
        for n in [3usize, 10, 100, 1000] {
            let nf = n as f64;
            let want3 = nf.powf(-0.5) * (1.5 * nf.ln()).sqrt();
            let want4 = nf.powf(-2.0 / 3.0) * (4.0 / 3.0 * nf.ln()).powf(1.0 / 3.0);
            assert!((p_star(&c3, n).unwrap() - want3).abs() < 1e-12);
            assert!((p_star(&c4, n).unwrap() - want4).abs() < 1e-12);
        }
        let vals: Vec<f64> = (3..500).map(|n| p_star(&c3, n).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0]));
        assert!(matches!(p_star(&c3, 2), Err(PatternError::SmallN { .. })));
    }

    #[test]
    fn lambda_psi_examples() {
        let (l, s) = lambda_psi(&Graph::complete(2), 50, 0.2).unwrap();
        assert!((l - 1.0).abs() < 1e-12 && (s - 2500.0 * 0.2).abs() < 1e-9);
        let (l, s) = lambda_psi(&Graph::complete(3), 10, 0.1).unwrap();
        assert!((l - 0.1).abs() < 1e-12);
        assert!((s - 100.0 * 0.1 * l).abs() < 1e-12);
        assert!(lambda_psi(&Graph::complete(3), 10, -0.1).is_err());
    }

    #[test]
    fn expected_bridge_examples() {
        let (n, p) = (20usize, 0.3f64);
        let nf = n as f64;
        let c3 = pattern_by_name("C3").unwrap();
        let c4 = pattern_by_name("C4").unwrap();
        let k4 = pattern_by_name("K4").unwrap();
        assert!((expected_bridges(&c3, n, p).unwrap() - (nf - 2.0) * p * p).abs() < 1e-12);
        assert!((expected_bridges(&c4, n, p).unwrap() - (nf - 2.0) * (nf - 3.0) * p.powi(3)).abs() < 1e-12);
        assert!((expected_bridges(&k4, n, p).unwrap() - (nf - 2.0) * (nf - 3.0) * p.powi(5) / 2.0).abs() < 1e-12);
        assert!(matches!(expected_bridges(&k4, 3, p), Err(PatternError::SmallN { n: 3, min: 4 })));
    }

    #[test]
    fn rooted_profile_examples() {
        let k4 = Graph::complete(4);
        for x in 0..4 {
            let rp = RootedPair::new(k4.clone(), &[x], &[0, 1, 2, 3]).unwrap();
            let prof = rooted_density_profile(&rp).unwrap();
            assert_eq!(prof.density, r(2, 1));
            assert!(prof.strictly_balanced && prof.balanced);
            assert!(prof.density < two_density(&k4));
        }
        let c3 = Graph::complete(3);
        let rp = RootedPair::new(c3, &[0, 1], &[0, 1, 2]).unwrap();
        let prof = rooted_density_profile(&rp).unwrap();
        assert_eq!(prof.density, r(2, 1));
        assert_eq!(prof.a, None);
        assert!(RootedPair::new(k4.clone(), &[0, 1], &[0, 1]).is_err());
        assert!(RootedPair::new(k4, &[0, 3], &[0, 1, 2]).is_err());
    }

    #[test]
    fn a_b_on_unbalanced_pair() {
        // [∅, K4+pendant]: densest proper part is the K4 with 6/4.
        let h = k4_pendant();
        let rp = RootedPair::new(h, &[], &[0, 1, 2, 3, 4]).unwrap();
        let prof = rooted_density_profile(&rp).unwrap();
        assert_eq!(prof.density, r(7, 5));
        assert_eq!(prof.a, Some(r(3, 2)));
        assert!(!prof.balanced);
        let chain = chain_decompose(&rp).unwrap();
        assert_eq!(chain.sets(), vec![vec![], vec![0, 1, 2, 3], vec![0, 1, 2, 3, 4]]);
        assert_eq!(chain.densities(), &[r(3, 2), r(1, 1)]);
    }

    #[test]
    fn chain_examples() {
        let k4 = Graph::complete(4);
        let rp = RootedPair::new(k4, &[2], &[0, 1, 2, 3]).unwrap();
        assert_eq!(chain_decompose(&rp).unwrap().steps(), 1);
        let rp = RootedPair::new(Graph::complete(3), &[0, 1], &[0, 1, 2]).unwrap();
        assert_eq!(chain_decompose(&rp).unwrap().steps(), 1);
    }

    #[test]
    fn strict_balance_routes_agree_on_corpus() {
        for name in PATTERN_NAMES {
            let g = named_pattern(name).unwrap();
            assert_eq!(is_strictly_2_balanced(&g).unwrap(), is_strictly_2_balanced_rooted(&g).unwrap(), "{name}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn strict_balance_routes_agree_random(n in 3usize..8, seed in any::<u64>(), p in 0.2f64..0.9) {
            let g = gnp_sample(n, p, &mut RandomSource::new(seed, 0).rng()).unwrap();
            prop_assume!(g.m() >= 2);
            prop_assert_eq!(is_strictly_2_balanced(&g).unwrap(), is_strictly_2_balanced_rooted(&g).unwrap());
        }

        #[test]
        fn m2_at_least_d2(n in 3usize..9, seed in any::<u64>()) {
            let g = gnp_sample(n, 0.5, &mut RandomSource::new(seed, 0).rng()).unwrap();
            let m = max_two_density(&g).unwrap();
            prop_assert!(m.density >= two_density(&g));
        }
    }
}
