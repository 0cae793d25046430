//! Cycle, even, cut and pattern spaces of a host graph, the classified
//! candidate space `W`, and the smallest vector separating their
//! complements.

use std::cmp::Ordering;
use std::collections::VecDeque;

use thiserror::Error;

use crate::enumeration::{EnumError, PatternMatcher, DEFAULT_COPY_CAP};
use crate::gf2::{min_weight_coset, CosetStrategy, EdgeVector, Gf2Error, Subspace};
use crate::graph::{Graph, Host};
use crate::pattern::{HPattern, WClass};

/// Default budget, in visited vectors, for exact minimisation.
pub const DEFAULT_WORK_CAP: u64 = 1 << 30;
/// Largest host order accepted by the complete-graph verifier.
pub const KN_VERIFY_LIMIT: usize = 9;

#[derive(Debug, Error)]
pub enum SpaceError {
    #[error("copy enumeration truncated at {cap} copies; spaces would be unsound")]
    Truncated { cap: usize },
    #[error("exact search needs {work} steps, over the budget of {cap}")]
    OverBudget { work: f64, cap: u64 },
    #[error("cut improvement needs a class whose complement contains all cuts, got {0}")]
    WrongClass(WClass),
    #[error("host order {n} outside [{min}, {max}]")]
    OrderOutOfRange { n: usize, min: usize, max: usize },
    #[error("internal consistency check failed: {0}")]
    Inconsistent(&'static str),
    #[error(transparent)]
    Gf2(#[from] Gf2Error),
    #[error(transparent)]
    Enum(#[from] EnumError),
}

pub type Result<T> = std::result::Result<T, SpaceError>;

/// Spaces that depend on the host alone.
#[derive(Debug, Clone)]
pub struct CanonicalSpaces {
    /// Even-degree subgraphs.
    pub cycle: Subspace,
    /// Subgraphs with an even number of edges.
    pub even: Subspace,
    /// Span of the vertex stars.
    pub cut: Subspace,
}

pub fn canonical_spaces(g: &Graph) -> CanonicalSpaces {
    let m = g.m();
    // Fundamental cycles: a non-tree edge plus the two tree paths to the root.
    let mut to_root: Vec<Option<EdgeVector>> = vec![None; g.n()];
    let mut tree = vec![false; m];
    for s in 0..g.n() {
        if to_root[s].is_some() {
            continue;
        }
        to_root[s] = Some(EdgeVector::zeros(m));
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &e in g.incident_edges(u) {
                let e = e as usize;
                let (a, b) = g.edge(e);
                let w = if a == u { b } else { a };
                if to_root[w].is_none() {
                    let mut path = to_root[u].clone().expect("visited");
                    path.flip(e);
                    to_root[w] = Some(path);
                    tree[e] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    let mut cycle = Subspace::zero(m);
    for (e, (u, v)) in g.edges().enumerate() {
        if tree[e] {
            continue;
        }
        let mut c = to_root[u].clone().expect("visited");
        c.add_assign(to_root[v].as_ref().expect("visited")).expect("same length");
        c.flip(e);
        cycle.insert(&c).expect("same length");
    }
    let mut even = Subspace::zero(m);
    for i in 1..m {
        even.insert(&EdgeVector::from_indices(m, [0, i]).expect("in range")).expect("same length");
    }
    let mut cut = Subspace::zero(m);
    for v in 0..g.n() {
        cut.insert(&star(g, v)).expect("same length");
    }
    CanonicalSpaces { cycle, even, cut }
}

/// The edges at `v`.
pub fn star(g: &Graph, v: usize) -> EdgeVector {
    g.edge_vector(g.incident_edges(v).iter().map(|&e| e as usize))
}

/// `W` and its complement for the given class.
pub fn w_space(g: &Graph, cls: WClass) -> Result<(Subspace, Subspace)> {
    w_space_from(&canonical_spaces(g), g.m(), cls)
}

fn w_space_from(c: &CanonicalSpaces, m: usize, cls: WClass) -> Result<(Subspace, Subspace)> {
    let all = Subspace::span([&EdgeVector::ones(m)], m)?;
    let (w, perp) = match cls {
        WClass::Cycle => (c.cycle.clone(), c.cut.clone()),
        WClass::CycleAndEven => (c.cycle.intersection(&c.even)?, c.cut.sum(&all)?),
        WClass::Full => (Subspace::full(m), Subspace::zero(m)),
        WClass::Even => (c.even.clone(), all),
    };
    if w.dim() + perp.dim() != m || !w.is_orthogonal_to(&perp)? {
        return Err(SpaceError::Inconsistent("W and its complement disagree"));
    }
    Ok((w, perp))
}

/// The span of all copies of a pattern.
#[derive(Debug, Clone)]
pub struct HSpace {
    pub space: Subspace,
    pub perp: Subspace,
    pub copies: usize,
    pub truncated: bool,
}

pub fn h_space(g: &Graph, h: &HPattern, cap: usize) -> HSpace {
    let set = PatternMatcher::new(h).copies(g, cap);
    let mut space = Subspace::zero(g.m());
    for c in &set.copies {
        space.insert(&c.edges).expect("copy vectors live in the host edge space");
    }
    let perp = space.orthogonal_complement();
    HSpace { space, perp, copies: set.copies.len(), truncated: set.truncated }
}

#[derive(Debug, Clone)]
pub struct SpaceBundle {
    pub host: Graph,
    pub w_class: WClass,
    pub cycle: Subspace,
    pub even: Subspace,
    pub cut: Subspace,
    pub w: Subspace,
    pub w_perp: Subspace,
    pub h: Subspace,
    pub h_perp: Subspace,
    pub copies: usize,
    pub truncated: bool,
}

impl SpaceBundle {
    pub fn build(g: &Graph, h: &HPattern, cap: usize) -> Result<Self> {
        let canon = canonical_spaces(g);
        let (w, w_perp) = w_space_from(&canon, g.m(), h.w_class())?;
        let hs = h_space(g, h, cap);
        let bundle = SpaceBundle {
            host: g.clone(),
            w_class: h.w_class(),
            cycle: canon.cycle,
            even: canon.even,
            cut: canon.cut,
            w,
            w_perp,
            h: hs.space,
            h_perp: hs.perp,
            copies: hs.copies,
            truncated: hs.truncated,
        };
        if !bundle.truncated && !bundle.containments_hold()? {
            return Err(SpaceError::Inconsistent("pattern space escapes W"));
        }
        Ok(bundle)
    }

    /// `C_H ⊆ W` and `W⊥ ⊆ C_H⊥`, checked row by row.
    pub fn containments_hold(&self) -> Result<bool> {
        Ok(self.h.is_subspace_of(&self.w)? && self.w_perp.is_subspace_of(&self.h_perp)?)
    }

    fn require_complete(&self) -> Result<()> {
        if self.truncated {
            Err(SpaceError::Truncated { cap: self.copies })
        } else {
            Ok(())
        }
    }

    /// Whether the pattern space equals `W`; containment is known, so
    /// dimensions decide.
    pub fn is_t(&self) -> Result<bool> {
        self.require_complete()?;
        Ok(self.h.dim() == self.w.dim())
    }
}

pub fn is_t(g: &Graph, h: &HPattern) -> Result<bool> {
    SpaceBundle::build(g, h, DEFAULT_COPY_CAP)?.is_t()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FStrategy {
    /// Exhaustive search; fails when the work exceeds the cap.
    Exact { work_cap: u64 },
    /// Exhaustive when within the cap, otherwise local search with restarts.
    BestEffort { work_cap: u64, restarts: usize, seed: u64 },
}

impl Default for FStrategy {
    fn default() -> Self {
        FStrategy::BestEffort { work_cap: DEFAULT_WORK_CAP, restarts: 64, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FMethod {
    Exhaustive,
    LocalSearch,
}

/// A light vector orthogonal to every copy but not to all of `W`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinimalF {
    pub vector: EdgeVector,
    /// True when no lighter (or equally light, lexicographically smaller)
    /// candidate exists.
    pub exact: bool,
    pub method: FMethod,
    /// A member of `W` meeting `vector` in an odd number of edges.
    pub witness: EdgeVector,
}

impl MinimalF {
    pub fn weight(&self) -> usize {
        self.vector.weight()
    }
}

/// Cosets of `W⊥` inside `C_H⊥` past the trivial one are visited in Gray
/// order; the result is the least element by weight, then support.
pub fn find_min_f(bundle: &SpaceBundle, strategy: FStrategy) -> Result<Option<MinimalF>> {
    bundle.require_complete()?;
    let mut quotient = bundle.w_perp.clone();
    let mut reps = Vec::new();
    for row in bundle.h_perp.basis() {
        if quotient.insert(row)? {
            reps.push(row.clone());
        }
    }
    if reps.is_empty() {
        return Ok(None);
    }
    let k = reps.len();
    let d = bundle.w_perp.dim();
    let work = (2f64.powi(k as i32) - 1.0) * 2f64.powi(d as i32);
    let cap = match strategy {
        FStrategy::Exact { work_cap } | FStrategy::BestEffort { work_cap, .. } => work_cap,
    };
    let m = bundle.host.m();
    let (vector, exact, method) = if work <= cap as f64 {
        let mut best = EdgeVector::zeros(m);
        let mut best_w = usize::MAX;
        let mut offset = EdgeVector::zeros(m);
        for i in 1u64..1 << k {
            offset.add_assign(&reps[i.trailing_zeros() as usize])?;
            bundle.w_perp.for_each_in_coset(&offset, d, |x| {
                let w = x.weight();
                if w < best_w || (w == best_w && x.cmp_support_lex(&best) == Ordering::Less) {
                    best_w = w;
                    best.clone_from(x);
                }
            })?;
        }
        (best, true, FMethod::Exhaustive)
    } else {
        match strategy {
            FStrategy::Exact { work_cap } => return Err(SpaceError::OverBudget { work, cap: work_cap }),
            FStrategy::BestEffort { restarts, seed, .. } => {
                (local_min(bundle, &reps, restarts, seed)?, false, FMethod::LocalSearch)
            }
        }
    };
    let witness = bundle
        .w
        .basis()
        .iter()
        .find(|row| row.inner_unchecked(&vector))
        .cloned()
        .ok_or(SpaceError::Inconsistent("minimal vector lies in the complement of W"))?;
    Ok(Some(MinimalF { vector, exact, method, witness }))
}

/// Heuristic search: for a bounded set of nonzero quotient classes, take a
/// local minimum in the corresponding coset of `W⊥`.
fn local_min(bundle: &SpaceBundle, reps: &[EdgeVector], restarts: usize, seed: u64) -> Result<EdgeVector> {
    use rand::{Rng, SeedableRng};
    let m = bundle.host.m();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut classes: Vec<EdgeVector> = reps.to_vec();
    for _ in 0..restarts.max(1) * 4 {
        let mut c = EdgeVector::zeros(m);
        for r in reps {
            if rng.gen::<bool>() {
                c.add_assign(r)?;
            }
        }
        if !bundle.w_perp.contains(&c)? {
            classes.push(c);
        }
    }
    let mut best: Option<EdgeVector> = None;
    for (i, c) in classes.iter().enumerate() {
        let strategy = CosetStrategy::LocalRandom { restarts, seed: seed.wrapping_add(i as u64) };
        let mut cand = min_weight_coset(&bundle.w_perp, c, strategy, usize::MAX)?.vector;
        if bundle.w_class.contains_cuts_in_perp() {
            cand = improve_by_stars(&bundle.host, cand);
        }
        if best.as_ref().map_or(true, |b| cand.cmp_weight_lex(b) == Ordering::Less) {
            best = Some(cand);
        }
    }
    Ok(best.expect("at least one class"))
}

/// Adds the star at the least vertex where `F` holds more than half the
/// degree, until no such vertex remains. Each step lowers the weight, so
/// the loop ends after at most `|F|` steps; the coset of the cut space is
/// preserved.
pub fn cut_improve(f: &EdgeVector, g: &Graph, cls: WClass) -> Result<EdgeVector> {
    if !cls.contains_cuts_in_perp() {
        return Err(SpaceError::WrongClass(cls));
    }
    if f.len() != g.m() {
        return Err(Gf2Error::LengthMismatch { expected: g.m(), found: f.len() }.into());
    }
    Ok(improve_by_stars(g, f.clone()))
}

fn improve_by_stars(g: &Graph, mut f: EdgeVector) -> EdgeVector {
    let mut deg_f = g.degrees_in(&f);
    'outer: loop {
        for v in 0..g.n() {
            if 2 * deg_f[v] > g.degree(v) {
                for &e in g.incident_edges(v) {
                    let e = e as usize;
                    let (a, b) = g.edge(e);
                    let other = if a == v { b } else { a };
                    if f.get(e) {
                        deg_f[other] -= 1;
                    } else {
                        deg_f[other] += 1;
                    }
                    f.flip(e);
                }
                deg_f[v] = g.degree(v) - deg_f[v];
                continue 'outer;
            }
        }
        return f;
    }
}

/// Whether `d_F(v) ≤ d_G(v)/2` at every vertex.
pub fn satisfies_degree_bound(g: &Graph, f: &EdgeVector) -> bool {
    g.degrees_in(f).iter().enumerate().all(|(v, &d)| 2 * d <= g.degree(v))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnReport {
    pub n: usize,
    /// Whether `n ≥ v_H + 2`, the range where equality is guaranteed.
    pub in_range: bool,
    pub equal: bool,
    pub dim_h: usize,
    pub dim_w: usize,
    pub copies: usize,
}

/// Compares the pattern space of `K_n` with `W`, both containments.
pub fn verify_kn(h: &HPattern, n: usize) -> Result<KnReport> {
    if n < h.v() || n > KN_VERIFY_LIMIT {
        return Err(SpaceError::OrderOutOfRange { n, min: h.v(), max: KN_VERIFY_LIMIT });
    }
    let b = SpaceBundle::build(&Graph::complete(n), h, DEFAULT_COPY_CAP)?;
    b.require_complete()?;
    let equal = b.h.is_subspace_of(&b.w)? && b.w.is_subspace_of(&b.h)?;
    Ok(KnReport { n, in_range: n >= h.v() + 2, equal, dim_h: b.h.dim(), dim_w: b.w.dim(), copies: b.copies })
}

/// `K_5` with three pendant 7-cycles (at vertices 0, 1 and 2), the last two
/// sharing a path so that the cycle `1-p-q-2-1` uses exactly one edge of the
/// `K_5`. Every edge lies in a copy of `K_5` plus a pendant 7-cycle, but that
/// cycle is not in the span of the copies.
pub fn pendant_cycle_counterexample() -> Graph {
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for a in 0..5 {
        for b in a + 1..5 {
            pairs.push((a, b));
        }
    }
    let mut cycle = |vs: &[usize]| {
        for i in 0..vs.len() {
            let (a, b) = (vs[i], vs[(i + 1) % vs.len()]);
            pairs.push((a.min(b), a.max(b)));
        }
    };
    cycle(&[0, 5, 6, 7, 8, 9, 10]);
    // p=11, q=12, r=13, s=14, t=15, u=16; the second cycle adds 17, 18.
    cycle(&[1, 11, 12, 13, 14, 15, 16]);
    cycle(&[2, 12, 13, 14, 15, 17, 18]);
    pairs.sort_unstable();
    pairs.dedup();
    Graph::new(19, &pairs).expect("valid construction")
}
