//! Seeded Monte Carlo harnesses: threshold sweeps, graph-process walks,
//! minimal-vector sampling, plus the tail-bound evaluators.
//!
//! Every trial draws from its own `(seed, stream)` generator and results are
//! gathered in grid order, so outputs do not depend on thread scheduling.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::enumeration::{predicates_from_copies, EnumError, PatternMatcher, DEFAULT_COPY_CAP};
use crate::gf2::{EdgeVector, Subspace};
use crate::graph::{edge_process, gnp_sample, pair_index, Graph, GraphError, GrowingGraph, RandomSource};
use crate::pattern::{analyze_named, p_star, pattern_by_name, HPattern, PatternError, WClass};
use crate::spaces::{find_min_f, satisfies_degree_bound, FMethod, FStrategy, SpaceBundle, SpaceError};

/// Largest `n` for which sweeps compute pattern spaces by default.
pub const DEFAULT_T_LIMIT: usize = 60;
/// From-scratch comparisons per graph-process walk.
pub const CHECKPOINTS_PER_WALK: usize = 20;
/// Exhaustive-search budget per sampled graph; larger searches fall back to
/// local search and are flagged non-exact.
pub const SAMPLING_WORK_CAP: u64 = 1 << 24;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error(transparent)]
    Pattern(#[from] PatternError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl ExperimentError {
    /// Process exit status for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Verification(_) => 1,
            ExperimentError::Budget(_) => 3,
            ExperimentError::Pattern(PatternError::OverBudget { .. }) => 3,
            _ => 2,
        }
    }
}

impl From<SpaceError> for ExperimentError {
    fn from(e: SpaceError) -> Self {
        match e {
            SpaceError::Truncated { .. } | SpaceError::OverBudget { .. } => ExperimentError::Budget(e.to_string()),
            SpaceError::Inconsistent(_) => ExperimentError::Verification(e.to_string()),
            SpaceError::Enum(inner) => inner.into(),
            _ => ExperimentError::Config(e.to_string()),
        }
    }
}

impl From<EnumError> for ExperimentError {
    fn from(e: EnumError) -> Self {
        match e {
            EnumError::Truncated { .. } | EnumError::PackingOverBudget { .. } => ExperimentError::Budget(e.to_string()),
            EnumError::Pattern(p) => p.into(),
            _ => ExperimentError::Config(e.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, ExperimentError>;

/// A named corpus pattern, or an edge-list file named by its stem.
pub fn load_pattern(spec: &str) -> Result<HPattern> {
    match pattern_by_name(spec) {
        Ok(h) => Ok(h),
        Err(PatternError::Unknown(_)) if Path::new(spec).is_file() => {
            let file = std::fs::File::open(spec)?;
            let g = Graph::read_edge_list(file)?;
            let name = Path::new(spec).file_stem().and_then(|s| s.to_str()).unwrap_or(spec);
            Ok(analyze_named(&g, name)?)
        }
        Err(e) => Err(e.into()),
    }
}

/// Wilson score interval at 95% confidence.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    const Z: f64 = 1.959_963_984_540_054;
    let n = trials as f64;
    let phat = successes as f64 / n;
    let z2 = Z * Z;
    let denom = 1.0 + z2 / n;
    let centre = (phat + z2 / (2.0 * n)) / denom;
    let half = Z * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Which per-trial quantities a sweep records; `Q` is always recorded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Recorded {
    pub r: bool,
    pub s: bool,
    pub t: bool,
    pub min_f: bool,
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub pattern: HPattern,
    pub ns: Vec<usize>,
    /// Edge probabilities as multiples of the threshold scale at each `n`.
    pub multiples: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub record: Recorded,
    /// Largest `n` at which pattern spaces are computed.
    pub t_limit: usize,
}

impl SweepConfig {
    pub fn new(pattern: HPattern, ns: Vec<usize>, multiples: Vec<f64>, trials: usize, seed: u64) -> Self {
        SweepConfig { pattern, ns, multiples, trials, seed, record: Recorded::default(), t_limit: DEFAULT_T_LIMIT }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(ExperimentError::Config(msg));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.ns.is_empty() || self.multiples.is_empty() {
            return bad("the n list and the multiple grid must be nonempty".into());
        }
        if let Some(m) = self.multiples.iter().find(|m| !(m.is_finite() && **m > 0.0)) {
            return bad(format!("grid multiple {m} must be positive"));
        }
        for &n in &self.ns {
            if n < self.pattern.v() {
                return bad(format!("n = {n} is smaller than the pattern"));
            }
            if (self.record.t || self.record.min_f) && n > self.t_limit {
                return bad(format!("space computations need n <= {}, got {n}", self.t_limit));
            }
            for &mult in &self.multiples {
                let p = mult * p_star(&self.pattern, n)?;
                if p > 1.0 {
                    return bad(format!("multiple {mult} gives p = {p} > 1 at n = {n}"));
                }
            }
        }
        Ok(())
    }

    /// `(n, multiple)` cells in output order.
    pub fn grid(&self) -> Vec<(usize, f64)> {
        self.ns.iter().flat_map(|&n| self.multiples.iter().map(move |&m| (n, m))).collect()
    }
}

/// The stream used by trial `trial` of grid cell `cell`.
pub fn trial_stream(cell: usize, trial: usize) -> u64 {
    ((cell as u64) << 32) | trial as u64
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub n: usize,
    pub p: f64,
    pub seed: u64,
    pub stream: u64,
    pub edges: usize,
    pub q: bool,
    pub r: Option<bool>,
    pub s: Option<bool>,
    pub t: Option<bool>,
    pub min_f_weight: Option<usize>,
    pub micros: u128,
}

/// One G(n, p) draw with the requested predicates.
pub fn run_trial(
    matcher: &PatternMatcher,
    n: usize,
    p: f64,
    seed: u64,
    stream: u64,
    record: Recorded,
) -> Result<TrialRecord> {
    let start = Instant::now();
    let h = matcher.pattern();
    let g = gnp_sample(n, p, &mut RandomSource::new(seed, stream).rng())?;
    let (q, r, s) = if record.r || record.s {
        let set = matcher.copies(&g, DEFAULT_COPY_CAP);
        let pr = predicates_from_copies(&g, h, &set)?;
        (pr.q, record.r.then_some(pr.r), record.s.then_some(pr.s))
    } else {
        (matcher.holds_q(&g), None, None)
    };
    let (mut t, mut min_f_weight) = (None, None);
    if record.t || record.min_f {
        let bundle = SpaceBundle::build(&g, h, DEFAULT_COPY_CAP)?;
        let is_t = bundle.is_t()?;
        if record.t {
            t = Some(is_t);
        }
        if record.min_f && !is_t {
            let strategy = FStrategy::BestEffort { work_cap: SAMPLING_WORK_CAP, restarts: 64, seed: stream };
            min_f_weight = find_min_f(&bundle, strategy)?.map(|f| f.weight());
        }
    }
    Ok(TrialRecord { n, p, seed, stream, edges: g.m(), q, r, s, t, min_f_weight, micros: start.elapsed().as_micros() })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub n: usize,
    pub multiple: f64,
    pub p: f64,
    pub trials: usize,
    pub q: usize,
    pub r: Option<usize>,
    pub s: Option<usize>,
    pub t: Option<usize>,
    /// Sum and count of minimal-vector weights over trials that produced one.
    pub min_f: Option<(usize, usize)>,
}

impl SweepCell {
    pub fn freq_q(&self) -> f64 {
        self.q as f64 / self.trials as f64
    }
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub pattern: String,
    pub record: Recorded,
    pub cells: Vec<SweepCell>,
}

pub fn sweep(cfg: &SweepConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let matcher = PatternMatcher::new(&cfg.pattern);
    let grid = cfg.grid();
    let ps: Vec<f64> = grid.iter().map(|&(n, m)| Ok(m * p_star(&cfg.pattern, n)?)).collect::<Result<_>>()?;
    let records: Vec<TrialRecord> = (0..grid.len() * cfg.trials)
        .into_par_iter()
        .map(|k| {
            let (cell, trial) = (k / cfg.trials, k % cfg.trials);
            run_trial(&matcher, grid[cell].0, ps[cell], cfg.seed, trial_stream(cell, trial), cfg.record)
        })
        .collect::<Result<_>>()?;
    let count = |v: &[TrialRecord], f: fn(&TrialRecord) -> Option<bool>| v.iter().filter(|r| f(r) == Some(true)).count();
    let cells = records
        .chunks(cfg.trials)
        .zip(&grid)
        .zip(&ps)
        .map(|((chunk, &(n, multiple)), &p)| SweepCell {
            n,
            multiple,
            p,
            trials: cfg.trials,
            q: chunk.iter().filter(|r| r.q).count(),
            r: cfg.record.r.then(|| count(chunk, |r| r.r)),
            s: cfg.record.s.then(|| count(chunk, |r| r.s)),
            t: cfg.record.t.then(|| count(chunk, |r| r.t)),
            min_f: cfg.record.min_f.then(|| {
                let ws: Vec<usize> = chunk.iter().filter_map(|r| r.min_f_weight).collect();
                (ws.iter().sum(), ws.len())
            }),
        })
        .collect();
    Ok(SweepResult { pattern: cfg.pattern.name().to_string(), record: cfg.record, cells })
}

impl SweepResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,p_multiple,p,trials");
        let mut cols = vec!["Q"];
        for (on, name) in [(self.record.r, "R"), (self.record.s, "S"), (self.record.t, "T")] {
            if on {
                cols.push(name);
            }
        }
        for c in &cols {
            write!(out, ",freq_{c},lo_{c},hi_{c}").unwrap();
        }
        if self.record.min_f {
            out.push_str(",mean_minF_weight");
        }
        out.push('\n');
        for cell in &self.cells {
            write!(out, "{},{},{:.6e},{}", cell.n, cell.multiple, cell.p, cell.trials).unwrap();
            let hits = [Some(cell.q), cell.r, cell.s, cell.t];
            for k in hits.into_iter().flatten() {
                let (lo, hi) = wilson_interval(k, cell.trials);
                write!(out, ",{:.4},{:.4},{:.4}", k as f64 / cell.trials as f64, lo, hi).unwrap();
            }
            if let Some((sum, cnt)) = cell.min_f {
                if cnt == 0 {
                    out.push_str(",NA");
                } else {
                    write!(out, ",{:.4}", sum as f64 / cnt as f64).unwrap();
                }
            }
            out.push('\n');
        }
        out
    }
}

/// One walk along a uniformly random edge order of `K_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HittingTimeReport {
    pub n: usize,
    pub seed: u64,
    pub stream: u64,
    /// Step counts `i` (edges present) at which every edge lies in a copy.
    pub q_indices: Vec<usize>,
    /// Among `q_indices`, those where the pattern space differs from `W`.
    pub violations: Vec<usize>,
    /// Least `i ≥ 1` at which every edge lies in a copy.
    pub first_q: Option<usize>,
    /// Checks at which some copy fell outside `W`; expected to be zero.
    pub containment_failures: usize,
    /// Checkpoints where incremental and from-scratch state disagreed.
    pub checkpoint_mismatches: usize,
    pub checkpoints: usize,
}

/// Components and bipartiteness under edge insertion.
struct ParityForest {
    parent: Vec<usize>,
    parity: Vec<bool>,
    components: usize,
    odd_components: usize,
    odd: Vec<bool>,
}

impl ParityForest {
    fn new(n: usize) -> Self {
        ParityForest { parent: (0..n).collect(), parity: vec![false; n], components: n, odd_components: 0, odd: vec![false; n] }
    }

    fn find(&mut self, v: usize) -> (usize, bool) {
        let p = self.parent[v];
        if p == v {
            return (v, false);
        }
        let (root, up) = self.find(p);
        self.parity[v] ^= up;
        self.parent[v] = root;
        (root, self.parity[v])
    }

    fn add(&mut self, u: usize, v: usize) {
        let (ru, pu) = self.find(u);
        let (rv, pv) = self.find(v);
        if ru == rv {
            if pu == pv && !self.odd[ru] {
                self.odd[ru] = true;
                self.odd_components += 1;
            }
            return;
        }
        self.parent[rv] = ru;
        self.parity[rv] = !(pu ^ pv);
        self.components -= 1;
        if self.odd[rv] {
            if self.odd[ru] {
                self.odd_components -= 1;
            }
            self.odd[ru] = true;
        }
    }
}

/// Dimension of `W` from edge, vertex and component counts.
fn w_dimension(cls: WClass, m: usize, n: usize, comps: usize, bipartite: bool) -> usize {
    let cycle = m + comps - n;
    match cls {
        WClass::Cycle => cycle,
        WClass::CycleAndEven => cycle - usize::from(!bipartite),
        WClass::Full => m,
        WClass::Even => m.saturating_sub(1),
    }
}

/// Whether a copy (over the pair index of `K_n`) lies in `W`.
fn copy_in_w(cls: WClass, n: usize, copy: &EdgeVector) -> bool {
    let even_size = copy.weight() % 2 == 0;
    let even_degrees = || {
        let mut deg = vec![0usize; n];
        for u in 0..n {
            for v in u + 1..n {
                if copy.get(pair_index(n, u, v)) {
                    deg[u] += 1;
                    deg[v] += 1;
                }
            }
        }
        deg.iter().all(|d| d % 2 == 0)
    };
    match cls {
        WClass::Cycle => even_degrees(),
        WClass::CycleAndEven => even_size && even_degrees(),
        WClass::Full => true,
        WClass::Even => even_size,
    }
}

/// Walks one graph process, tracking the pattern space incrementally.
pub fn hitting_time_walk(h: &HPattern, n: usize, seed: u64, stream: u64) -> Result<HittingTimeReport> {
    if n < 2 {
        return Err(ExperimentError::Config("n must be at least 2".into()));
    }
    let matcher = PatternMatcher::new(h);
    let mut rng = RandomSource::new(seed, stream).rng();
    let process = edge_process(n, &mut rng);
    let total = process.len();
    let mut checkpoints: Vec<usize> = (0..=total).collect::<Vec<_>>();
    checkpoints.shuffle(&mut rng);
    checkpoints.truncate(CHECKPOINTS_PER_WALK.min(total + 1));
    checkpoints.sort_unstable();

    let cls = h.w_class();
    let mut g = GrowingGraph::new(n);
    let mut span = Subspace::zero(total);
    let mut cover = vec![0u32; total];
    let mut uncovered = 0usize;
    let mut forest = ParityForest::new(n);
    let mut copies_outside_w = 0usize;
    let mut report = HittingTimeReport {
        n,
        seed,
        stream,
        q_indices: Vec::new(),
        violations: Vec::new(),
        first_q: None,
        containment_failures: 0,
        checkpoint_mismatches: 0,
        checkpoints: checkpoints.len(),
    };
    let mut next_checkpoint = 0;
    for i in 0..=total {
        if i > 0 {
            let (x, y) = process.edge(i - 1);
            let new = matcher.bridges(&g, x, y)?;
            g.add_edge(x, y);
            forest.add(x, y);
            let xy = pair_index(n, x, y);
            uncovered += 1;
            for b in &new.bridges {
                let mut copy = b.edges.clone();
                copy.flip(xy);
                for e in copy.support() {
                    if cover[e] == 0 {
                        uncovered -= 1;
                    }
                    cover[e] += 1;
                }
                if !copy_in_w(cls, n, &copy) {
                    copies_outside_w += 1;
                }
                span.insert(&copy).expect("same length");
            }
        }
        let q = uncovered == 0;
        if q {
            report.q_indices.push(i);
            if i > 0 && report.first_q.is_none() {
                report.first_q = Some(i);
            }
            if copies_outside_w > 0 {
                report.containment_failures += 1;
            }
            let w_dim = w_dimension(cls, g.m(), n, forest.components, forest.odd_components == 0);
            if span.dim() != w_dim {
                report.violations.push(i);
            }
        }
        if checkpoints.get(next_checkpoint) == Some(&i) {
            next_checkpoint += 1;
            let w_dim = w_dimension(cls, g.m(), n, forest.components, forest.odd_components == 0);
            if !checkpoint_agrees(h, &g.to_graph(), n, &span, w_dim, q)? {
                report.checkpoint_mismatches += 1;
            }
        }
    }
    Ok(report)
}

/// Recomputes the state of a process prefix from scratch and compares.
fn checkpoint_agrees(h: &HPattern, g: &Graph, n: usize, span: &Subspace, w_dim: usize, q: bool) -> Result<bool> {
    let bundle = SpaceBundle::build(g, h, DEFAULT_COPY_CAP)?;
    let set = PatternMatcher::new(h).copies(g, DEFAULT_COPY_CAP);
    let pr = predicates_from_copies(g, h, &set)?;
    // Lift the from-scratch span into the pair index of K_n.
    let mut lifted = Subspace::zero(span.ambient_len());
    for row in bundle.h.basis() {
        let v = EdgeVector::from_indices(span.ambient_len(), row.support().map(|e| {
            let (a, b) = g.edge(e);
            pair_index(n, a, b)
        }))
        .expect("pair index in range");
        lifted.insert(&v).expect("same length");
    }
    Ok(lifted == *span && bundle.w.dim() == w_dim && pr.q == q && bundle.containments_hold()?)
}

/// `walks` independent graph-process walks, stream `k` for walk `k`.
pub fn hitting_time(h: &HPattern, n: usize, walks: usize, seed: u64) -> Result<Vec<HittingTimeReport>> {
    if walks == 0 {
        return Err(ExperimentError::Config("at least one permutation is required".into()));
    }
    (0..walks).into_par_iter().map(|k| hitting_time_walk(h, n, seed, k as u64)).collect()
}

pub fn hitting_time_csv(reports: &[HittingTimeReport]) -> String {
    let mut out = String::from("walk,n,seed,stream,q_steps,first_q,violations,containment_failures,checkpoint_mismatches\n");
    for (k, r) in reports.iter().enumerate() {
        let first = r.first_q.map_or("NA".to_string(), |i| i.to_string());
        writeln!(
            out,
            "{k},{},{},{},{},{first},{},{},{}",
            r.n,
            r.seed,
            r.stream,
            r.q_indices.len(),
            r.violations.len(),
            r.containment_failures,
            r.checkpoint_mismatches
        )
        .unwrap();
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinFRow {
    pub trial: usize,
    pub stream: u64,
    pub n: usize,
    pub p: f64,
    pub edges: usize,
    pub is_t: bool,
    pub weight: Option<usize>,
    pub exact: Option<bool>,
    pub method: Option<FMethod>,
    /// Degree condition, checked when the class admits cut moves.
    pub degree_bound: Option<bool>,
}

pub fn min_f_samples(h: &HPattern, n: usize, multiple: f64, trials: usize, seed: u64) -> Result<Vec<MinFRow>> {
    if trials == 0 {
        return Err(ExperimentError::Config("trials must be at least 1".into()));
    }
    if !(multiple.is_finite() && multiple > 0.0) {
        return Err(ExperimentError::Config(format!("grid multiple {multiple} must be positive")));
    }
    let p = multiple * p_star(h, n)?;
    if p > 1.0 {
        return Err(ExperimentError::Config(format!("multiple {multiple} gives p = {p} > 1")));
    }
    (0..trials)
        .into_par_iter()
        .map(|trial| {
            let stream = trial as u64;
            let g = gnp_sample(n, p, &mut RandomSource::new(seed, stream).rng())?;
            let bundle = SpaceBundle::build(&g, h, DEFAULT_COPY_CAP)?;
            let is_t = bundle.is_t()?;
            let strategy = FStrategy::BestEffort { work_cap: SAMPLING_WORK_CAP, restarts: 64, seed: stream };
            let f = find_min_f(&bundle, strategy)?;
            let degree_bound = match &f {
                Some(f) if h.w_class().contains_cuts_in_perp() => Some(satisfies_degree_bound(&g, &f.vector)),
                _ => None,
            };
            Ok(MinFRow {
                trial,
                stream,
                n,
                p,
                edges: g.m(),
                is_t,
                weight: f.as_ref().map(|f| f.weight()),
                exact: f.as_ref().map(|f| f.exact),
                method: f.as_ref().map(|f| f.method),
                degree_bound,
            })
        })
        .collect()
}

pub fn min_f_csv(rows: &[MinFRow]) -> String {
    let na = |o: Option<String>| o.unwrap_or_else(|| "NA".into());
    let mut out = String::from("trial,stream,n,p,edges,is_T,minF_weight,exact,method,degree_bound\n");
    for r in rows {
        let method = r.method.map(|m| match m {
            FMethod::Exhaustive => "exhaustive".to_string(),
            FMethod::LocalSearch => "local".to_string(),
        });
        writeln!(
            out,
            "{},{},{},{:.6e},{},{},{},{},{},{}",
            r.trial,
            r.stream,
            r.n,
            r.p,
            r.edges,
            r.is_t,
            na(r.weight.map(|w| w.to_string())),
            na(r.exact.map(|b| b.to_string())),
            na(method),
            na(r.degree_bound.map(|b| b.to_string())),
        )
        .unwrap();
    }
    out
}

/// Human-readable pattern summary with a threshold table.
pub fn pattern_report(h: &HPattern, ns: &[usize]) -> Result<String> {
    let mut out = String::new();
    let w = h.m2_witness();
    writeln!(out, "pattern          {}", h.name()).unwrap();
    writeln!(out, "vertices         {}", h.v()).unwrap();
    writeln!(out, "edges            {}", h.e()).unwrap();
    writeln!(out, "automorphisms    {}", h.aut_order()).unwrap();
    writeln!(out, "rho              {}", h.rho()).unwrap();
    writeln!(out, "d2               {}", h.d2()).unwrap();
    writeln!(out, "m2               {} (attained on vertices {:?})", h.m2(), w.vertices).unwrap();
    writeln!(out, "strictly 2-bal.  {}", h.strictly_2_balanced()).unwrap();
    writeln!(out, "eulerian         {}", h.eulerian()).unwrap();
    writeln!(out, "edge parity      {}", if h.edge_parity() == 0 { "even" } else { "odd" }).unwrap();
    writeln!(out, "w_class          {}", h.w_class()).unwrap();
    if !h.strictly_2_balanced() {
        writeln!(out, "warning: pattern is not strictly 2-balanced; threshold formula may not apply").unwrap();
    }
    if !ns.is_empty() {
        writeln!(out, "{:>8} {:>14}", "n", "p*").unwrap();
        for &n in ns {
            match p_star(h, n) {
                Ok(p) => writeln!(out, "{n:>8} {p:>14.6e}").unwrap(),
                Err(e) => writeln!(out, "{n:>8} {e:>14}").unwrap(),
            }
        }
    }
    Ok(out)
}

/// `φ(x) = (1+x)ln(1+x) − x` for `x ≥ −1`, with `φ(−1) = 1`.
pub fn varphi(x: f64) -> Result<f64> {
    if !(x >= -1.0) || !x.is_finite() {
        return Err(ExperimentError::Config(format!("varphi needs x >= -1, got {x}")));
    }
    if x == -1.0 {
        return Ok(1.0);
    }
    Ok((1.0 + x) * x.ln_1p() - x)
}

fn check_mu_t(mu: f64, t: f64) -> Result<()> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(ExperimentError::Config(format!("mean must be positive, got {mu}")));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(ExperimentError::Config(format!("deviation must be nonnegative, got {t}")));
    }
    Ok(())
}

/// Upper tail of a binomial: `(exp(−μφ(t/μ)), exp(−t²/(2(μ+t/3))))`.
pub fn chernoff_upper(mu: f64, t: f64) -> Result<(f64, f64)> {
    check_mu_t(mu, t)?;
    Ok(((-mu * varphi(t / mu)?).exp(), (-t * t / (2.0 * (mu + t / 3.0))).exp()))
}

/// Lower tail of a binomial: `(exp(−μφ(−t/μ)), exp(−t²/(2μ)))`, for `t ≤ μ`.
pub fn chernoff_lower(mu: f64, t: f64) -> Result<(f64, f64)> {
    check_mu_t(mu, t)?;
    if t > mu {
        return Err(ExperimentError::Config(format!("lower tail needs t <= mu, got t = {t}, mu = {mu}")));
    }
    Ok(((-mu * varphi(-t / mu)?).exp(), (-t * t / (2.0 * mu)).exp()))
}

/// `P(X > Kμ) < exp(−Kμ ln(K/e))`; informative only for `K > e`.
pub fn chernoff_large(mu: f64, k: f64) -> Result<f64> {
    check_mu_t(mu, 0.0)?;
    if !(k > 0.0 && k.is_finite()) {
        return Err(ExperimentError::Config(format!("K must be positive, got {k}")));
    }
    Ok((-k * mu * (k.ln() - 1.0)).exp())
}

/// Lower tail for sums of dependent indicators:
/// `(exp(−φ(−t/μ)μ²/Δ̄), exp(−t²/(2Δ̄)))`, for `t ∈ [0, μ]`.
pub fn janson(mu: f64, t: f64, delta_bar: f64) -> Result<(f64, f64)> {
    check_mu_t(mu, t)?;
    if !(delta_bar > 0.0 && delta_bar.is_finite()) {
        return Err(ExperimentError::Config(format!("correlation sum must be positive, got {delta_bar}")));
    }
    if t > mu {
        return Err(ExperimentError::Config(format!("janson needs t in [0, mu], got t = {t}, mu = {mu}")));
    }
    Ok(((-varphi(-t / mu)? * mu * mu / delta_bar).exp(), (-t * t / (2.0 * delta_bar)).exp()))
}

/// Uniform random pair of distinct vertices.
pub fn random_pair<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (usize, usize) {
    let x = rng.gen_range(0..n);
    let mut y = rng.gen_range(0..n - 1);
    if y >= x {
        y += 1;
    }
    (x, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pat(name: &str) -> HPattern {
        pattern_by_name(name).unwrap()
    }

    #[test]
    fn varphi_examples() {
        assert_eq!(varphi(0.0).unwrap(), 0.0);
        assert_eq!(varphi(-1.0).unwrap(), 1.0);
        assert!((varphi(1.0).unwrap() - (2.0 * 2f64.ln() - 1.0)).abs() < 1e-12);
        assert!((varphi(1.0).unwrap() - 0.386294).abs() < 1e-6);
        assert!((varphi(-1.0 + 1e-12).unwrap() - 1.0).abs() < 1e-9);
        assert!(varphi(-1.5).is_err());
        assert!(varphi(f64::NAN).is_err());
    }

    #[test]
    fn tail_domain_errors() {
        assert!(chernoff_upper(0.0, 1.0).is_err());
        assert!(chernoff_upper(1.0, -1.0).is_err());
        assert!(chernoff_lower(1.0, 2.0).is_err());
        assert!(janson(2.0, 1.0, 0.0).is_err());
        assert!(janson(2.0, 3.0, 1.0).is_err());
        assert!(chernoff_large(1.0, 0.0).is_err());
    }

    #[test]
    fn large_deviation_matches_finer_bound_shape() {
        // exp(−μφ(K−1)) ≤ exp(−Kμ ln(K/e)) since φ(K−1) = K ln K − K + 1 ≥ K ln K − K.
        for &(mu, k) in &[(1.0, 3.0), (5.0, 4.0), (0.5, 10.0)] {
            let fine = chernoff_upper(mu, (k - 1.0) * mu).unwrap().0;
            assert!(fine <= chernoff_large(mu, k).unwrap());
        }
    }

    proptest! {
        #[test]
        fn chernoff_upper_forms_ordered(mu in 1e-3f64..1e4, t in 0f64..1e4) {
            let (a, b) = chernoff_upper(mu, t).unwrap();
            prop_assert!(a <= b * (1.0 + 1e-12) + 1e-300);
        }

        #[test]
        fn chernoff_lower_forms_ordered(mu in 1e-3f64..1e4, frac in 0f64..=1.0) {
            let (a, b) = chernoff_lower(mu, frac * mu).unwrap();
            prop_assert!(a <= b * (1.0 + 1e-12) + 1e-300);
        }

        #[test]
        fn janson_forms_ordered(mu in 1e-2f64..1e3, frac in 0f64..=1.0, extra in 0f64..1e3) {
            // Δ̄ includes the diagonal, so Δ̄ ≥ μ.
            let (a, b) = janson(mu, frac * mu, mu + extra).unwrap();
            prop_assert!(a <= b * (1.0 + 1e-12) + 1e-300);
        }

        #[test]
        fn wilson_contains_estimate(trials in 1usize..2000, frac in 0f64..=1.0) {
            let k = ((trials as f64) * frac).floor() as usize;
            let (lo, hi) = wilson_interval(k, trials);
            let phat = k as f64 / trials as f64;
            prop_assert!(0.0 <= lo && lo <= phat + 1e-12 && phat <= hi + 1e-12 && hi <= 1.0);
        }
    }

    #[test]
    fn wilson_reference_values() {
        // 50/100: centre 0.5, half-width 1.96·sqrt(.25/100 + 1.96²/40000)/(1 + 1.96²/100).
        let (lo, hi) = wilson_interval(50, 100);
        assert!((lo - 0.4038).abs() < 1e-4 && (hi - 0.5962).abs() < 1e-4);
        let (lo, hi) = wilson_interval(0, 10);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.2775).abs() < 1e-4);
    }

    #[test]
    fn sweep_config_validation() {
        let mut cfg = SweepConfig::new(pat("C3"), vec![50], vec![0.0, 1.0], 5, 1);
        assert!(matches!(cfg.validate(), Err(ExperimentError::Config(_))));
        cfg.multiples = vec![1.0];
        cfg.trials = 0;
        assert!(cfg.validate().is_err());
        cfg.trials = 3;
        assert!(cfg.validate().is_ok());
        cfg.record.t = true;
        cfg.ns = vec![100];
        assert!(cfg.validate().is_err());
        cfg.ns = vec![2];
        assert!(cfg.validate().is_err());
        let big = SweepConfig::new(pat("C3"), vec![10], vec![50.0], 1, 0);
        assert!(big.validate().is_err());
    }

    #[test]
    fn sweep_is_deterministic_and_well_formed() {
        let mut cfg = SweepConfig::new(pat("C3"), vec![20, 30], vec![0.7, 1.3], 12, 9);
        cfg.record = Recorded { r: true, s: true, t: true, min_f: true };
        let a = sweep(&cfg).unwrap().to_csv();
        let b = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| sweep(&cfg).unwrap().to_csv());
        assert_eq!(a, b);
        let lines: Vec<&str> = a.lines().collect();
        assert_eq!(
            lines[0],
            "n,p_multiple,p,trials,freq_Q,lo_Q,hi_Q,freq_R,lo_R,hi_R,freq_S,lo_S,hi_S,freq_T,lo_T,hi_T,mean_minF_weight"
        );
        assert_eq!(lines.len(), 5);
        for line in &lines[1..] {
            let fields: Vec<&str> = line.split(',').collect();
            assert_eq!(fields.len(), 17);
            assert!(fields.iter().all(|f| !f.is_empty()));
            for f in &fields[4..16] {
                let x: f64 = f.parse().unwrap();
                assert!((0.0..=1.0).contains(&x));
            }
        }
        let q_only = sweep(&SweepConfig::new(pat("C3"), vec![20], vec![1.0], 4, 9)).unwrap().to_csv();
        assert_eq!(q_only.lines().next().unwrap(), "n,p_multiple,p,trials,freq_Q,lo_Q,hi_Q");
    }

    #[test]
    fn trial_is_reproducible_from_stream() {
        let m = PatternMatcher::new(&pat("C4"));
        let rec = Recorded { r: true, s: true, t: true, min_f: false };
        let a = run_trial(&m, 15, 0.3, 5, trial_stream(1, 2), rec).unwrap();
        let b = run_trial(&m, 15, 0.3, 5, trial_stream(1, 2), rec).unwrap();
        assert_eq!(TrialRecord { micros: 0, ..a }, TrialRecord { micros: 0, ..b });
    }

    #[test]
    fn parity_forest_tracks_bipartiteness() {
        let mut f = ParityForest::new(5);
        for (u, v) in [(0, 1), (1, 2), (2, 3), (3, 0)] {
            f.add(u, v);
        }
        assert_eq!((f.components, f.odd_components), (2, 0));
        f.add(0, 2);
        assert_eq!(f.odd_components, 1);
        f.add(3, 4);
        assert_eq!((f.components, f.odd_components), (1, 1));
    }

    #[test]
    fn walk_on_small_n() {
        for name in ["C3", "C4", "K4"] {
            let h = pat(name);
            let r = hitting_time_walk(&h, h.v() + 3, 11, 0).unwrap();
            let total = r.n * (r.n - 1) / 2;
            assert_eq!(r.q_indices.first(), Some(&0));
            assert_eq!(r.q_indices.last(), Some(&total));
            assert!(!r.violations.contains(&0));
            assert!(!r.violations.contains(&total));
            assert!(r.violations.iter().all(|i| r.q_indices.contains(i)));
            assert_eq!(r.containment_failures, 0);
            assert_eq!(r.checkpoint_mismatches, 0);
            assert!(r.checkpoints > 0);
        }
    }

    #[test]
    fn min_f_rows() {
        let rows = min_f_samples(&pat("C3"), 12, 1.0, 6, 4).unwrap();
        assert_eq!(rows.len(), 6);
        for r in &rows {
            assert_eq!(r.is_t, r.weight.is_none());
            if r.exact == Some(true) {
                assert_eq!(r.degree_bound, Some(true));
            }
        }
        let csv = min_f_csv(&rows);
        assert_eq!(csv, min_f_csv(&min_f_samples(&pat("C3"), 12, 1.0, 6, 4).unwrap()));
    }

    #[test]
    fn pattern_loading() {
        assert_eq!(load_pattern("C4").unwrap().name(), "C4");
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("paw.txt");
        std::fs::write(&path, "4 4\n0 1\n0 2\n1 2\n2 3\n").unwrap();
        let h = load_pattern(path.to_str().unwrap()).unwrap();
        assert_eq!((h.name(), h.v(), h.e()), ("paw", 4, 4));
        assert!(matches!(load_pattern("nope"), Err(ExperimentError::Pattern(_))));
    }

    #[test]
    fn analyze_report_mentions_class() {
        let r = pattern_report(&pat("C4"), &[100]).unwrap();
        assert!(r.contains("CYCLE_AND_EVEN"));
        assert!(pattern_report(&pat("K4+pendant"), &[]).unwrap().contains("warning"));
    }
}
