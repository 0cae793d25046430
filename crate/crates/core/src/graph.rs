//! Simple undirected graphs on dense vertex sets, random graph models and the
//! edge-text file format.
//!
//! Edges are always indexed lexicographically on `(min endpoint, max endpoint)`;
//! every [`EdgeVector`] built against a [`Graph`] uses that order.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::gf2::EdgeVector;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("loop at vertex {0}")]
    Loop(usize),
    #[error("duplicate edge {0}-{1}")]
    Duplicate(usize, usize),
    #[error("edge {0}-{1} has an endpoint outside 0..{2}")]
    OutOfRange(usize, usize, usize),
    #[error("vertex {0} outside 0..{1}")]
    VertexOutOfRange(usize, usize),
    #[error("probability {0} outside [0, 1]")]
    Probability(f64),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, GraphError>;

/// Read access shared by static and growing graphs.
pub trait Host {
    fn vertex_count(&self) -> usize;
    fn neighbors(&self, u: usize) -> &[u32];
    fn adjacent(&self, u: usize, v: usize) -> bool;
    /// Index of edge `uv` in this host's edge space, if present.
    fn edge_id(&self, u: usize, v: usize) -> Option<usize>;
    /// Length of edge vectors over this host.
    fn edge_space_len(&self) -> usize;

    fn degree(&self, u: usize) -> usize {
        self.neighbors(u).len()
    }
}

/// An immutable simple graph on vertices `0..n`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Graph {
    n: usize,
    edges: Vec<(u32, u32)>,
    adj: Vec<Vec<u32>>,
    adj_edge: Vec<Vec<u32>>,
}

impl Graph {
    /// Builds a graph from unordered pairs given in any order and orientation.
    pub fn new(n: usize, pairs: &[(usize, usize)]) -> Result<Graph> {
        let mut edges = Vec::with_capacity(pairs.len());
        for &(a, b) in pairs {
            if a == b {
                return Err(GraphError::Loop(a));
            }
            if a >= n || b >= n {
                return Err(GraphError::OutOfRange(a, b, n));
            }
            edges.push((a.min(b) as u32, a.max(b) as u32));
        }
        edges.sort_unstable();
        if let Some(w) = edges.windows(2).find(|w| w[0] == w[1]) {
            return Err(GraphError::Duplicate(w[0].0 as usize, w[0].1 as usize));
        }
        Ok(Self::from_sorted_edges(n, edges))
    }

    fn from_sorted_edges(n: usize, edges: Vec<(u32, u32)>) -> Graph {
        let mut adj = vec![Vec::new(); n];
        let mut adj_edge = vec![Vec::new(); n];
        // Pushing in lexicographic edge order leaves each list sorted.
        for (i, &(u, v)) in edges.iter().enumerate() {
            adj[v as usize].push(u);
            adj_edge[v as usize].push(i as u32);
        }
        for (i, &(u, v)) in edges.iter().enumerate() {
            adj[u as usize].push(v);
            adj_edge[u as usize].push(i as u32);
        }
        Graph { n, edges, adj, adj_edge }
    }

    pub fn empty(n: usize) -> Graph {
        Self::from_sorted_edges(n, Vec::new())
    }

    pub fn complete(n: usize) -> Graph {
        let mut edges = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for u in 0..n as u32 {
            for v in u + 1..n as u32 {
                edges.push((u, v));
            }
        }
        Self::from_sorted_edges(n, edges)
    }

    pub fn cycle(k: usize) -> Graph {
        let pairs: Vec<_> = (0..k).map(|i| (i, (i + 1) % k)).collect();
        Graph::new(k, &pairs).expect("cycle on at least 3 vertices")
    }

    pub fn path(n: usize) -> Graph {
        let pairs: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Graph::new(n, &pairs).expect("valid path")
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl ExactSizeIterator<Item = (usize, usize)> + '_ {
        self.edges.iter().map(|&(u, v)| (u as usize, v as usize))
    }

    pub fn edge(&self, i: usize) -> (usize, usize) {
        let (u, v) = self.edges[i];
        (u as usize, v as usize)
    }

    /// Edge ids incident to `u`, aligned with `neighbors(u)`.
    pub fn incident_edges(&self, u: usize) -> &[u32] {
        &self.adj_edge[u]
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adj.iter().map(Vec::len).collect()
    }

    /// Indicator vector of a set of edge ids.
    pub fn edge_vector<I: IntoIterator<Item = usize>>(&self, ids: I) -> EdgeVector {
        EdgeVector::from_indices(self.m(), ids).expect("edge ids in range")
    }

    /// Edges of a vector as endpoint pairs.
    pub fn edges_of(&self, v: &EdgeVector) -> Vec<(usize, usize)> {
        v.support().map(|i| self.edge(i)).collect()
    }

    /// Degree of every vertex inside the subgraph `f`.
    pub fn degrees_in(&self, f: &EdgeVector) -> Vec<usize> {
        let mut d = vec![0; self.n];
        for i in f.support() {
            let (u, v) = self.edges[i];
            d[u as usize] += 1;
            d[v as usize] += 1;
        }
        d
    }

    /// Subgraph on the same vertex set keeping the edges of `f`.
    pub fn spanning_subgraph(&self, f: &EdgeVector) -> Graph {
        let edges = f.support().map(|i| self.edges[i]).collect();
        Self::from_sorted_edges(self.n, edges)
    }

    /// Vertex-disjoint union; `other` is relabelled after `self`.
    pub fn disjoint_union(&self, other: &Graph) -> Graph {
        let off = self.n;
        let mut pairs: Vec<_> = self.edges().collect();
        pairs.extend(other.edges().map(|(u, v)| (u + off, v + off)));
        Graph::new(self.n + other.n, &pairs).expect("disjoint union is simple")
    }

    /// Number of connected components (isolated vertices count).
    pub fn component_count(&self) -> usize {
        let mut seen = vec![false; self.n];
        let mut stack = Vec::new();
        let mut count = 0;
        for s in 0..self.n {
            if seen[s] {
                continue;
            }
            count += 1;
            seen[s] = true;
            stack.push(s);
            while let Some(u) = stack.pop() {
                for &w in &self.adj[u] {
                    if !seen[w as usize] {
                        seen[w as usize] = true;
                        stack.push(w as usize);
                    }
                }
            }
        }
        count
    }

    /// Parses the edge-list text format: `n m`, then `m` lines `u v` with `u < v < n`.
    pub fn read_edge_list<R: Read>(reader: R) -> Result<Graph> {
        let mut lines = BufReader::new(reader).lines();
        let header = lines.next().ok_or(GraphError::Parse { line: 1, msg: "missing header".into() })??;
        let (n, m) = parse_pair(&header, 1)?;
        let mut pairs = Vec::with_capacity(m);
        for k in 0..m {
            let line_no = k + 2;
            let line = lines
                .next()
                .ok_or_else(|| GraphError::Parse { line: line_no, msg: format!("expected {m} edge lines") })??;
            let (u, v) = parse_pair(&line, line_no)?;
            if u >= v {
                return Err(GraphError::Parse { line: line_no, msg: format!("need u < v, got {u} {v}") });
            }
            if v >= n {
                return Err(GraphError::Parse { line: line_no, msg: format!("vertex {v} not below n = {n}") });
            }
            pairs.push((u, v));
        }
        for (k, line) in lines.enumerate() {
            if !line?.trim().is_empty() {
                return Err(GraphError::Parse { line: m + 2 + k, msg: "unexpected trailing content".into() });
            }
        }
        Graph::new(n, &pairs).map_err(|e| match e {
            GraphError::Duplicate(u, v) => {
                let line = pairs.iter().rposition(|&p| p == (u, v)).map_or(0, |i| i + 2);
                GraphError::Parse { line, msg: format!("duplicate edge {u} {v}") }
            }
            other => other,
        })
    }

    pub fn to_edge_list(&self) -> String {
        let mut s = format!("{} {}\n", self.n, self.m());
        for (u, v) in self.edges() {
            let _ = writeln!(s, "{u} {v}");
        }
        s
    }
}

fn parse_pair(line: &str, line_no: usize) -> Result<(usize, usize)> {
    let mut it = line.split_ascii_whitespace();
    let mut next = || -> Result<usize> {
        let tok = it.next().ok_or_else(|| GraphError::Parse { line: line_no, msg: "expected two integers".into() })?;
        tok.parse().map_err(|_| GraphError::Parse { line: line_no, msg: format!("not a nonnegative integer: {tok:?}") })
    };
    let a = next()?;
    let b = next()?;
    if it.next().is_some() {
        return Err(GraphError::Parse { line: line_no, msg: "expected exactly two integers".into() });
    }
    Ok((a, b))
}

impl Host for Graph {
    fn vertex_count(&self) -> usize {
        self.n
    }

    fn neighbors(&self, u: usize) -> &[u32] {
        &self.adj[u]
    }

    fn adjacent(&self, u: usize, v: usize) -> bool {
        let (a, b) = if self.adj[u].len() <= self.adj[v].len() { (u, v) } else { (v, u) };
        self.adj[a].binary_search(&(b as u32)).is_ok()
    }

    fn edge_id(&self, u: usize, v: usize) -> Option<usize> {
        self.adj[u].binary_search(&(v as u32)).ok().map(|k| self.adj_edge[u][k] as usize)
    }

    fn edge_space_len(&self) -> usize {
        self.m()
    }
}

/// Position of pair `u < v` in the lexicographic order of `E(K_n)`.
#[inline]
pub fn pair_index(n: usize, u: usize, v: usize) -> usize {
    let (u, v) = if u < v { (u, v) } else { (v, u) };
    u * (2 * n - u - 1) / 2 + (v - u - 1)
}

/// A graph that grows one edge at a time; edge ids are positions in `E(K_n)`.
#[derive(Clone, Debug)]
pub struct GrowingGraph {
    n: usize,
    adj: Vec<Vec<u32>>,
    present: Vec<bool>,
    m: usize,
}

impl GrowingGraph {
    pub fn new(n: usize) -> Self {
        Self { n, adj: vec![Vec::new(); n], present: vec![false; n * n.saturating_sub(1) / 2], m: 0 }
    }

    /// Adds `uv`; returns false if it was already present.
    pub fn add_edge(&mut self, u: usize, v: usize) -> bool {
        let k = pair_index(self.n, u, v);
        if self.present[k] {
            return false;
        }
        self.present[k] = true;
        self.adj[u].push(v as u32);
        self.adj[v].push(u as u32);
        self.m += 1;
        true
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Snapshot as a [`Graph`] with its own canonical edge index.
    pub fn to_graph(&self) -> Graph {
        let mut edges = Vec::with_capacity(self.m);
        for u in 0..self.n {
            for &w in &self.adj[u] {
                if (w as usize) > u {
                    edges.push((u as u32, w));
                }
            }
        }
        edges.sort_unstable();
        Graph::from_sorted_edges(self.n, edges)
    }
}

impl Host for GrowingGraph {
    fn vertex_count(&self) -> usize {
        self.n
    }

    fn neighbors(&self, u: usize) -> &[u32] {
        &self.adj[u]
    }

    fn adjacent(&self, u: usize, v: usize) -> bool {
        u != v && self.present[pair_index(self.n, u, v)]
    }

    fn edge_id(&self, u: usize, v: usize) -> Option<usize> {
        let k = pair_index(self.n, u, v);
        (u != v && self.present[k]).then_some(k)
    }

    fn edge_space_len(&self) -> usize {
        self.present.len()
    }
}

/// Reproducible randomness keyed by `(seed, stream)`.
///
/// Backed by ChaCha8, whose stream parameter gives independent sequences for
/// the same seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RandomSource {
    pub seed: u64,
    pub stream: u64,
}

impl RandomSource {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(GraphError::Probability(p))
    }
}

/// Samples `G(n, p)`: each pair independently with probability `p`.
pub fn gnp_sample<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<Graph> {
    check_probability(p)?;
    let mut edges = Vec::new();
    if p > 0.0 {
        for u in 0..n as u32 {
            for v in u + 1..n as u32 {
                if p >= 1.0 || rng.gen::<f64>() < p {
                    edges.push((u, v));
                }
            }
        }
    }
    Ok(Graph::from_sorted_edges(n, edges))
}

/// Keeps each edge of `g` independently with probability `r`.
pub fn percolate<R: Rng + ?Sized>(g: &Graph, r: f64, rng: &mut R) -> Result<Graph> {
    check_probability(r)?;
    if r >= 1.0 {
        return Ok(g.clone());
    }
    let edges = g.edges.iter().copied().filter(|_| r > 0.0 && rng.gen::<f64>() < r).collect();
    Ok(Graph::from_sorted_edges(g.n, edges))
}

/// The edge set `∇(A)` of edges with exactly one endpoint in `a`.
pub fn boundary(g: &Graph, a: &[usize]) -> Result<EdgeVector> {
    let mut inside = vec![false; g.n];
    for &v in a {
        if v >= g.n {
            return Err(GraphError::VertexOutOfRange(v, g.n));
        }
        inside[v] = true;
    }
    let ids = g.edges.iter().enumerate().filter(|(_, &(u, v))| inside[u as usize] != inside[v as usize]).map(|(i, _)| i);
    Ok(g.edge_vector(ids))
}

/// A uniformly random ordering of `E(K_n)` and its prefix graphs.
#[derive(Clone, Debug)]
pub struct GraphProcess {
    n: usize,
    order: Vec<(u32, u32)>,
}

impl GraphProcess {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// The `i`-th edge added (1-based step `i + 1`).
    pub fn edge(&self, i: usize) -> (usize, usize) {
        let (u, v) = self.order[i];
        (u as usize, v as usize)
    }

    pub fn order(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.order.iter().map(|&(u, v)| (u as usize, v as usize))
    }

    /// `G_i`: the first `i` edges.
    pub fn prefix(&self, i: usize) -> Graph {
        let mut edges: Vec<_> = self.order[..i].to_vec();
        edges.sort_unstable();
        Graph::from_sorted_edges(self.n, edges)
    }
}

/// A uniform random permutation of the pairs of `0..n`.
pub fn edge_process<R: Rng + ?Sized>(n: usize, rng: &mut R) -> GraphProcess {
    let mut order: Vec<(u32, u32)> = Graph::complete(n).edges;
    order.shuffle(rng);
    GraphProcess { n, order }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn build_examples() {
        let t = Graph::new(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(t.m(), 3);
        assert_eq!(t.degrees(), vec![2, 2, 2]);
        assert_eq!(Graph::new(5, &[]).unwrap().m(), 0);
        let k4 = Graph::complete(4);
        assert_eq!(k4.m(), 6);
        assert!(k4.degrees().iter().all(|&d| d == 3));
        assert_eq!(k4.edges().collect::<Vec<_>>(), vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
    }

    #[test]
    fn build_rejections() {
        assert!(matches!(Graph::new(3, &[(1, 1)]), Err(GraphError::Loop(1))));
        assert!(matches!(Graph::new(3, &[(0, 1), (1, 0)]), Err(GraphError::Duplicate(0, 1))));
        assert!(matches!(Graph::new(3, &[(0, 3)]), Err(GraphError::OutOfRange(0, 3, 3))));
    }

    #[test]
    fn edge_ids_match_lex_order() {
        let g = Graph::new(5, &[(3, 4), (0, 2), (2, 1), (0, 4)]).unwrap();
        for (i, (u, v)) in g.edges().enumerate() {
            assert_eq!(g.edge_id(u, v), Some(i));
            assert_eq!(g.edge_id(v, u), Some(i));
        }
        assert_eq!(g.edge_id(0, 1), None);
        let n = 7;
        let kn = Graph::complete(n);
        for (i, (u, v)) in kn.edges().enumerate() {
            assert_eq!(pair_index(n, u, v), i);
        }
    }

    #[test]
    fn gnp_extremes_and_mean() {
        let mut rng = RandomSource::new(1, 0).rng();
        assert_eq!(gnp_sample(9, 0.0, &mut rng).unwrap().m(), 0);
        assert_eq!(gnp_sample(5, 1.0, &mut rng).unwrap().m(), 10);
        assert!(matches!(gnp_sample(5, 1.5, &mut rng), Err(GraphError::Probability(_))));
        let trials = 1000;
        let total: usize = (0..trials).map(|s| gnp_sample(100, 0.5, &mut RandomSource::new(7, s).rng()).unwrap().m()).sum();
        let mean = total as f64 / trials as f64;
        // Binomial(4950, 1/2): sd of the mean is sqrt(4950/4)/sqrt(1000).
        let se = (4950.0f64 * 0.25).sqrt() / (trials as f64).sqrt();
        assert!((mean - 2475.0).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn random_source_reproducible_and_streams_differ() {
        let draw = |seed, stream| -> Vec<u64> {
            let mut r = RandomSource::new(seed, stream).rng();
            (0..4).map(|_| r.gen()).collect()
        };
        let (a, b, c) = (draw(5, 3), draw(5, 3), draw(5, 4));
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn process_prefixes() {
        let p = edge_process(6, &mut RandomSource::new(2, 0).rng());
        assert_eq!(p.len(), 15);
        assert_eq!(p.prefix(0).m(), 0);
        assert_eq!(p.prefix(15), Graph::complete(6));
        for i in 0..15 {
            let (a, b) = (p.prefix(i), p.prefix(i + 1));
            assert_eq!(a.m(), i);
            assert!(a.edges().all(|(u, v)| b.edge_id(u, v).is_some()));
        }
    }

    #[test]
    fn percolation() {
        let g = Graph::complete(200);
        let mut rng = RandomSource::new(3, 0).rng();
        assert_eq!(percolate(&g, 1.0, &mut rng).unwrap(), g);
        assert_eq!(percolate(&g, 0.0, &mut rng).unwrap().m(), 0);
        let trials = 1000;
        let total: usize = (0..trials).map(|s| percolate(&g, 0.3, &mut RandomSource::new(11, s).rng()).unwrap().m()).sum();
        let mean = total as f64 / trials as f64;
        let m = g.m() as f64;
        let se = (m * 0.3 * 0.7).sqrt() / (trials as f64).sqrt();
        assert!((mean - 0.3 * m).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn boundary_examples() {
        let k4 = Graph::complete(4);
        let b = boundary(&k4, &[2]).unwrap();
        assert_eq!(k4.edges_of(&b), vec![(0, 2), (1, 2), (2, 3)]);
        assert!(boundary(&k4, &[0, 1, 2, 3]).unwrap().is_zero());
        let c6 = Graph::cycle(6);
        assert_eq!(boundary(&c6, &[0, 2, 4]).unwrap().weight(), 6);
        assert!(matches!(boundary(&c6, &[6]), Err(GraphError::VertexOutOfRange(6, 6))));
    }

    #[test]
    fn edge_list_round_trip_and_errors() {
        let g = Graph::new(4, &[(0, 1), (1, 3), (2, 3)]).unwrap();
        let text = g.to_edge_list();
        assert_eq!(Graph::read_edge_list(text.as_bytes()).unwrap(), g);
        let bad = |s: &str| match Graph::read_edge_list(s.as_bytes()) {
            Err(GraphError::Parse { line, .. }) => line,
            other => panic!("expected parse error, got {other:?}"),
        };
        assert_eq!(bad("3 2\n0 1\n2 1\n"), 3);
        assert_eq!(bad("3 2\n0 1\n0 1\n"), 3);
        assert_eq!(bad("3 1\n0 3\n"), 2);
        assert_eq!(bad("3 2\n0 1\n"), 3);
        assert_eq!(bad("x 2\n"), 1);
        assert_eq!(bad("3 1\n0 1 2\n"), 2);
    }

    proptest! {
        #[test]
        fn canonical_rebuild(n in 2usize..12, bits in prop::collection::vec(any::<bool>(), 66)) {
            let k = Graph::complete(n);
            let pairs: Vec<_> = k.edges().zip(&bits).filter(|(_, &b)| b).map(|(e, _)| (e.1, e.0)).collect();
            let g = Graph::new(n, &pairs).unwrap();
            let again = Graph::new(n, &g.edges().collect::<Vec<_>>()).unwrap();
            prop_assert_eq!(&again, &g);
            prop_assert_eq!(g.degrees().iter().sum::<usize>(), 2 * g.m());
        }

        #[test]
        fn cut_space_closure(n in 2usize..10, seed in any::<u64>(), a in prop::collection::vec(any::<bool>(), 10), b in prop::collection::vec(any::<bool>(), 10)) {
            let g = gnp_sample(n, 0.5, &mut RandomSource::new(seed, 0).rng()).unwrap();
            let sa: Vec<_> = (0..n).filter(|&i| a[i]).collect();
            let sb: Vec<_> = (0..n).filter(|&i| b[i]).collect();
            let sym: Vec<_> = (0..n).filter(|&i| a[i] != b[i]).collect();
            let comp: Vec<_> = (0..n).filter(|&i| !a[i]).collect();
            let lhs = boundary(&g, &sa).unwrap().sum(&boundary(&g, &sb).unwrap()).unwrap();
            prop_assert_eq!(lhs, boundary(&g, &sym).unwrap());
            prop_assert_eq!(boundary(&g, &sa).unwrap(), boundary(&g, &comp).unwrap());
        }

        #[test]
        fn percolate_is_subgraph(seed in any::<u64>(), r in 0.0f64..1.0) {
            let g = gnp_sample(15, 0.4, &mut RandomSource::new(seed, 0).rng()).unwrap();
            let h = percolate(&g, r, &mut RandomSource::new(seed, 1).rng()).unwrap();
            prop_assert_eq!(h.n(), g.n());
            prop_assert!(h.edges().all(|(u, v)| g.edge_id(u, v).is_some()));
        }
    }
}
