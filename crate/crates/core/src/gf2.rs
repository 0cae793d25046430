//! Packed GF(2) vectors over an edge index and row-reduced subspaces.
//!
//! Every [`EdgeVector`] is relative to some ambient edge count `m`; bits at
//! positions `>= m` are always zero. A [`Subspace`] keeps its basis in reduced
//! row-echelon form where the pivot of a row is its lowest set bit.

use std::cmp::Ordering;
use std::fmt;

use rand::Rng;
use thiserror::Error;

/// Default exponent bound for exhaustive enumeration (2^24 vectors).
pub const DEFAULT_ENUMERATION_CAP: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Gf2Error {
    #[error("vector length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("subspace dimension {dim} exceeds the enumeration cap {cap}")]
    DimensionTooLarge { dim: usize, cap: usize },
    #[error("bit index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },
}

pub type Result<T> = std::result::Result<T, Gf2Error>;

#[inline]
fn words_for(len: usize) -> usize {
    len.div_ceil(64)
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Gf2Error::LengthMismatch { expected, found })
    }
}

/// An element of GF(2)^m, stored as packed 64-bit words.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct EdgeVector {
    len: usize,
    words: Vec<u64>,
}

impl EdgeVector {
    pub fn zeros(len: usize) -> Self {
        Self { len, words: vec![0; words_for(len)] }
    }

    pub fn ones(len: usize) -> Self {
        let mut v = Self { len, words: vec![u64::MAX; words_for(len)] };
        v.mask_tail();
        v
    }

    /// Builds the indicator vector of `indices`. Repeated indices cancel.
    pub fn from_indices<I: IntoIterator<Item = usize>>(len: usize, indices: I) -> Result<Self> {
        let mut v = Self::zeros(len);
        for i in indices {
            if i >= len {
                return Err(Gf2Error::IndexOutOfRange { index: i, len });
            }
            v.flip(i);
        }
        Ok(v)
    }

    /// Builds a vector from a slice of booleans.
    pub fn from_bits(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    #[inline]
    fn mask_tail(&mut self) {
        let r = self.len % 64;
        if r != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << r) - 1;
            }
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    /// Hamming weight.
    #[inline]
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Lowest set bit, if any.
    pub fn first_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(k, w)| k * 64 + w.trailing_zeros() as usize)
    }

    /// Indices of set bits in increasing order.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    None
                } else {
                    let t = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    Some(k * 64 + t)
                }
            })
        })
    }

    /// In-place addition; lengths must already agree.
    #[inline]
    pub(crate) fn add_assign_unchecked(&mut self, other: &EdgeVector) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= *b;
        }
    }

    pub fn add_assign(&mut self, other: &EdgeVector) -> Result<()> {
        check_len(self.len, other.len)?;
        self.add_assign_unchecked(other);
        Ok(())
    }

    pub fn sum(&self, other: &EdgeVector) -> Result<EdgeVector> {
        let mut out = self.clone();
        out.add_assign(other)?;
        Ok(out)
    }

    #[inline]
    pub(crate) fn inner_unchecked(&self, other: &EdgeVector) -> bool {
        let mut acc = 0u64;
        for (a, b) in self.words.iter().zip(&other.words) {
            acc ^= a & b;
        }
        acc.count_ones() % 2 == 1
    }

    #[inline]
    pub(crate) fn intersection_weight(&self, other: &EdgeVector) -> usize {
        self.words.iter().zip(&other.words).map(|(a, b)| (a & b).count_ones() as usize).sum()
    }

    /// Order on supports: lighter first, ties broken by the lexicographically
    /// smaller sorted index list.
    pub fn cmp_weight_lex(&self, other: &EdgeVector) -> Ordering {
        self.weight().cmp(&other.weight()).then_with(|| self.cmp_support_lex(other))
    }

    /// Lexicographic order of the sorted support lists of two equal-weight
    /// vectors: the vector owning the lowest differing index is smaller.
    pub fn cmp_support_lex(&self, other: &EdgeVector) -> Ordering {
        for (a, b) in self.words.iter().zip(&other.words) {
            let diff = a ^ b;
            if diff != 0 {
                let bit = diff & diff.wrapping_neg();
                return if a & bit != 0 { Ordering::Less } else { Ordering::Greater };
            }
        }
        Ordering::Equal
    }
}

impl fmt::Debug for EdgeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "EdgeVector[{}]{{", self.len)?;
        for (k, i) in self.support().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

/// Parity of `|u ∩ v|`.
pub fn inner_product(u: &EdgeVector, v: &EdgeVector) -> Result<bool> {
    check_len(u.len, v.len)?;
    Ok(u.inner_unchecked(v))
}

const NO_ROW: u32 = u32::MAX;

/// A subspace of GF(2)^m held as a reduced row-echelon basis.
#[derive(Clone, Debug)]
pub struct Subspace {
    len: usize,
    rows: Vec<EdgeVector>,
    pivots: Vec<usize>,
    row_of_pivot: Vec<u32>,
}

impl PartialEq for Subspace {
    fn eq(&self, other: &Self) -> bool {
        // RREF with fixed pivot convention is unique.
        self.len == other.len && self.rows == other.rows
    }
}

impl Eq for Subspace {}

impl Subspace {
    /// The zero subspace of GF(2)^len.
    pub fn zero(len: usize) -> Self {
        Self { len, rows: Vec::new(), pivots: Vec::new(), row_of_pivot: vec![NO_ROW; len] }
    }

    /// The whole of GF(2)^len.
    pub fn full(len: usize) -> Self {
        let mut s = Self::zero(len);
        for i in 0..len {
            let mut v = EdgeVector::zeros(len);
            v.set(i, true);
            s.rows.push(v);
            s.pivots.push(i);
            s.row_of_pivot[i] = i as u32;
        }
        s
    }

    pub fn span<'a, I>(generators: I, len: usize) -> Result<Self>
    where
        I: IntoIterator<Item = &'a EdgeVector>,
    {
        let mut s = Self::zero(len);
        for g in generators {
            s.insert(g)?;
        }
        Ok(s)
    }

    #[inline]
    pub fn ambient_len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn basis(&self) -> &[EdgeVector] {
        &self.rows
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Remainder of `v` after elimination against the basis; zero iff `v` is a member.
    pub fn reduce(&self, v: &EdgeVector) -> Result<EdgeVector> {
        check_len(self.len, v.len)?;
        let mut r = v.clone();
        self.reduce_in_place(&mut r);
        Ok(r)
    }

    fn reduce_in_place(&self, v: &mut EdgeVector) {
        // Each pivot column is a unit column of the basis, so one pass suffices.
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if v.get(p) {
                v.add_assign_unchecked(row);
            }
        }
    }

    pub fn contains(&self, v: &EdgeVector) -> Result<bool> {
        check_len(self.len, v.len)?;
        let mut r = v.clone();
        self.reduce_in_place(&mut r);
        Ok(r.is_zero())
    }

    /// Adds `v` to the spanning set. Returns `true` when the dimension grew.
    pub fn insert(&mut self, v: &EdgeVector) -> Result<bool> {
        check_len(self.len, v.len)?;
        let mut r = v.clone();
        self.reduce_in_place(&mut r);
        let Some(p) = r.first_one() else {
            return Ok(false);
        };
        // Clearing column p cannot disturb older pivots: a row holding bit p has
        // its pivot below p, and r is zero on every existing pivot column.
        for row in &mut self.rows {
            if row.get(p) {
                row.add_assign_unchecked(&r);
            }
        }
        let at = self.pivots.partition_point(|&q| q < p);
        self.rows.insert(at, r);
        self.pivots.insert(at, p);
        for (k, &q) in self.pivots.iter().enumerate().skip(at) {
            self.row_of_pivot[q] = k as u32;
        }
        Ok(true)
    }

    /// Basis row whose pivot is `col`, if any.
    pub fn row_with_pivot(&self, col: usize) -> Option<&EdgeVector> {
        match self.row_of_pivot.get(col) {
            Some(&k) if k != NO_ROW => Some(&self.rows[k as usize]),
            _ => None,
        }
    }

    /// The subspace of all vectors orthogonal to every member of `self`.
    pub fn orthogonal_complement(&self) -> Subspace {
        let mut gens: Vec<EdgeVector> = Vec::with_capacity(self.len - self.dim());
        let mut gen_of_col = vec![NO_ROW; self.len];
        for j in 0..self.len {
            if self.row_of_pivot[j] == NO_ROW {
                gen_of_col[j] = gens.len() as u32;
                let mut g = EdgeVector::zeros(self.len);
                g.set(j, true);
                gens.push(g);
            }
        }
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            for j in row.support() {
                let k = gen_of_col[j];
                if k != NO_ROW {
                    gens[k as usize].set(p, true);
                }
            }
        }
        let mut out = Subspace::zero(self.len);
        for g in &gens {
            out.insert(g).expect("lengths agree");
        }
        out
    }

    /// `self + other`.
    pub fn sum(&self, other: &Subspace) -> Result<Subspace> {
        check_len(self.len, other.len)?;
        let mut out = self.clone();
        for r in &other.rows {
            out.insert(r)?;
        }
        Ok(out)
    }

    /// `self ∩ other`, computed as `(self⊥ + other⊥)⊥`.
    pub fn intersection(&self, other: &Subspace) -> Result<Subspace> {
        check_len(self.len, other.len)?;
        let joined = self.orthogonal_complement().sum(&other.orthogonal_complement())?;
        Ok(joined.orthogonal_complement())
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> Result<bool> {
        check_len(self.len, other.len)?;
        for r in &self.rows {
            if !other.contains(r)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// True when every basis vector of `self` is orthogonal to every basis vector of `other`.
    pub fn is_orthogonal_to(&self, other: &Subspace) -> Result<bool> {
        check_len(self.len, other.len)?;
        Ok(self.rows.iter().all(|a| other.rows.iter().all(|b| !a.inner_unchecked(b))))
    }

    fn check_cap(&self, cap: usize) -> Result<()> {
        if self.dim() > cap || self.dim() >= usize::BITS as usize - 1 {
            Err(Gf2Error::DimensionTooLarge { dim: self.dim(), cap })
        } else {
            Ok(())
        }
    }

    /// Visits every element of the coset `offset + self` exactly once in
    /// Gray-code order, starting at `offset`.
    pub fn for_each_in_coset<F>(&self, offset: &EdgeVector, cap: usize, mut visit: F) -> Result<()>
    where
        F: FnMut(&EdgeVector),
    {
        check_len(self.len, offset.len)?;
        self.check_cap(cap)?;
        let mut cur = offset.clone();
        visit(&cur);
        let count: u64 = 1u64 << self.dim();
        for i in 1..count {
            cur.add_assign_unchecked(&self.rows[i.trailing_zeros() as usize]);
            visit(&cur);
        }
        Ok(())
    }

    /// All `2^dim` elements, in Gray-code order.
    pub fn enumerate(&self, cap: usize) -> Result<Elements<'_>> {
        self.check_cap(cap)?;
        Ok(Elements { space: self, cur: EdgeVector::zeros(self.len), next: 0, end: 1u64 << self.dim() })
    }
}

/// Iterator over the elements of a [`Subspace`].
pub struct Elements<'a> {
    space: &'a Subspace,
    cur: EdgeVector,
    next: u64,
    end: u64,
}

impl Iterator for Elements<'_> {
    type Item = EdgeVector;

    fn next(&mut self) -> Option<EdgeVector> {
        if self.next >= self.end {
            return None;
        }
        if self.next > 0 {
            self.cur.add_assign_unchecked(&self.space.rows[self.next.trailing_zeros() as usize]);
        }
        self.next += 1;
        Some(self.cur.clone())
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.end - self.next) as usize;
        (left, Some(left))
    }
}

/// How to search a coset for a light element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CosetStrategy {
    /// Scan the whole coset; refused when the dimension exceeds the cap.
    Exhaustive,
    /// Greedy descent by basis rows from `v`, then from `restarts` random
    /// coset points.
    LocalRandom { restarts: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CosetMinimum {
    pub vector: EdgeVector,
    /// True only when the coset was scanned completely.
    pub exact: bool,
}

/// Lightest element of `v + space` (ties: lexicographically least support).
pub fn min_weight_coset(
    space: &Subspace,
    v: &EdgeVector,
    strategy: CosetStrategy,
    cap: usize,
) -> Result<CosetMinimum> {
    check_len(space.len, v.len)?;
    match strategy {
        CosetStrategy::Exhaustive => {
            let mut best = v.clone();
            let mut best_w = best.weight();
            space.for_each_in_coset(v, cap, |x| {
                let w = x.weight();
                if w < best_w || (w == best_w && x.cmp_support_lex(&best) == Ordering::Less) {
                    best_w = w;
                    best.clone_from(x);
                }
            })?;
            Ok(CosetMinimum { vector: best, exact: true })
        }
        CosetStrategy::LocalRandom { restarts, seed } => {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut best = descend(space, v.clone());
            for _ in 0..restarts {
                let mut start = v.clone();
                for row in space.basis() {
                    if rng.gen::<bool>() {
                        start.add_assign_unchecked(row);
                    }
                }
                let cand = descend(space, start);
                if cand.cmp_weight_lex(&best) == Ordering::Less {
                    best = cand;
                }
            }
            if space.dim() == 0 {
                return Ok(CosetMinimum { vector: best, exact: true });
            }
            Ok(CosetMinimum { vector: best, exact: false })
        }
    }
}

/// Adds basis rows while any single row lowers the weight.
fn descend(space: &Subspace, mut x: EdgeVector) -> EdgeVector {
    let mut w = x.weight();
    loop {
        let mut improved = false;
        for row in space.basis() {
            let nw = w + row.weight() - 2 * x.intersection_weight(row);
            if nw < w {
                x.add_assign_unchecked(row);
                w = nw;
                improved = true;
            }
        }
        if !improved {
            return x;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn v(len: usize, idx: &[usize]) -> EdgeVector {
        EdgeVector::from_indices(len, idx.iter().copied()).unwrap()
    }

    fn random_vec(rng: &mut impl Rng, len: usize, density: f64) -> EdgeVector {
        let bits: Vec<bool> = (0..len).map(|_| rng.gen_bool(density)).collect();
        EdgeVector::from_bits(&bits)
    }

    #[test]
    fn inner_product_examples() {
        let j = v(10, &[1, 3, 4, 8, 9]);
        assert!(inner_product(&j, &j).unwrap());
        assert!(!inner_product(&v(6, &[0, 1]), &v(6, &[2, 3])).unwrap());
        assert!(inner_product(&v(4, &[1, 2]), &v(4, &[2, 3])).unwrap());
        assert_eq!(
            inner_product(&v(4, &[1]), &v(5, &[1])),
            Err(Gf2Error::LengthMismatch { expected: 4, found: 5 })
        );
    }

    #[test]
    fn ones_masks_tail() {
        let o = EdgeVector::ones(70);
        assert_eq!(o.weight(), 70);
        assert_eq!(o.words()[1], (1u64 << 6) - 1);
    }

    #[test]
    fn span_examples() {
        assert_eq!(Subspace::span([], 5).unwrap().dim(), 0);
        let a = v(5, &[0, 2]);
        assert_eq!(Subspace::span([&a, &a], 5).unwrap().dim(), 1);
        // K4 edges in canonical order: 01 02 03 12 13 23.
        let t1 = v(6, &[0, 1, 3]);
        let t2 = v(6, &[0, 2, 4]);
        let t3 = v(6, &[1, 2, 5]);
        let s = Subspace::span([&t1, &t2, &t3], 6).unwrap();
        assert_eq!(s.dim(), 3);
        assert!(s.contains(&v(6, &[3, 4, 5])).unwrap());
    }

    #[test]
    fn member_examples() {
        let e1 = v(3, &[0]);
        let x = v(3, &[1]);
        let s = Subspace::span([&x.sum(&e1).unwrap()], 3).unwrap();
        assert!(s.contains(&EdgeVector::zeros(3)).unwrap());
        assert!(!s.contains(&x).unwrap());
        let a = v(4, &[0, 1]);
        let b = v(4, &[1, 3]);
        let s2 = Subspace::span([&a, &b], 4).unwrap();
        assert!(s2.contains(&a.sum(&b).unwrap()).unwrap());
        assert!(s2.contains(&v(5, &[0])).is_err());
    }

    #[test]
    fn rref_shape() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let gens: Vec<_> = (0..20).map(|_| random_vec(&mut rng, 40, 0.3)).collect();
        let s = Subspace::span(&gens, 40).unwrap();
        assert!(s.pivots().windows(2).all(|w| w[0] < w[1]));
        for (i, &p) in s.pivots().iter().enumerate() {
            assert_eq!(s.basis()[i].first_one(), Some(p));
            for (k, r) in s.basis().iter().enumerate() {
                assert_eq!(r.get(p), k == i);
            }
        }
    }

    #[test]
    fn complement_examples() {
        assert_eq!(Subspace::zero(7).orthogonal_complement(), Subspace::full(7));
        // Even-weight space of GF(2)^5 has complement {0, all-ones}.
        let gens: Vec<_> = (1..5).map(|i| v(5, &[0, i])).collect();
        let d = Subspace::span(&gens, 5).unwrap();
        let dp = d.orthogonal_complement();
        assert_eq!(dp.dim(), 1);
        assert!(dp.contains(&EdgeVector::ones(5)).unwrap());
    }

    #[test]
    fn intersection_matches_direct_filter() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let a: Vec<_> = (0..5).map(|_| random_vec(&mut rng, 9, 0.5)).collect();
            let b: Vec<_> = (0..6).map(|_| random_vec(&mut rng, 9, 0.5)).collect();
            let sa = Subspace::span(&a, 9).unwrap();
            let sb = Subspace::span(&b, 9).unwrap();
            let both = sa.intersection(&sb).unwrap();
            let direct: Vec<_> = sa.enumerate(24).unwrap().filter(|x| sb.contains(x).unwrap()).collect();
            assert_eq!(1usize << both.dim(), direct.len());
            assert!(direct.iter().all(|x| both.contains(x).unwrap()));
        }
    }

    #[test]
    fn enumerate_examples() {
        let z = Subspace::zero(4);
        let all: Vec<_> = z.enumerate(24).unwrap().collect();
        assert_eq!(all, vec![EdgeVector::zeros(4)]);
        let s = Subspace::span([&v(4, &[0, 1]), &v(4, &[2])], 4).unwrap();
        let els: std::collections::HashSet<_> = s.enumerate(24).unwrap().collect();
        assert_eq!(els.len(), 4);
        assert!(els.iter().all(|x| s.contains(x).unwrap()));
        assert!(matches!(s.enumerate(1), Err(Gf2Error::DimensionTooLarge { dim: 2, cap: 1 })));
    }

    #[test]
    fn coset_minimum_examples() {
        let s = Subspace::span([&v(5, &[0, 1]), &v(5, &[2, 3])], 5).unwrap();
        let inside = v(5, &[0, 1, 2, 3]);
        let m = min_weight_coset(&s, &inside, CosetStrategy::Exhaustive, 24).unwrap();
        assert!(m.vector.is_zero() && m.exact);
        let x = v(5, &[1, 4]);
        let m0 = min_weight_coset(&Subspace::zero(5), &x, CosetStrategy::Exhaustive, 24).unwrap();
        assert_eq!(m0.vector, x);
        assert!(matches!(
            min_weight_coset(&s, &x, CosetStrategy::Exhaustive, 1),
            Err(Gf2Error::DimensionTooLarge { .. })
        ));
    }

    #[test]
    fn coset_minimum_dim12_matches_scan() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        let mut s = Subspace::zero(30);
        while s.dim() < 12 {
            s.insert(&random_vec(&mut rng, 30, 0.4)).unwrap();
        }
        let x = random_vec(&mut rng, 30, 0.5);
        // Oracle: all 4096 subsets of the basis, summed from scratch.
        let mut oracle = usize::MAX;
        for mask in 0u32..4096 {
            let mut y = x.clone();
            for (k, r) in s.basis().iter().enumerate() {
                if mask >> k & 1 == 1 {
                    y.add_assign(r).unwrap();
                }
            }
            oracle = oracle.min(y.weight());
        }
        let m = min_weight_coset(&s, &x, CosetStrategy::Exhaustive, 24).unwrap();
        assert_eq!(m.vector.weight(), oracle);
        assert!(s.contains(&m.vector.sum(&x).unwrap()).unwrap());
        let h = min_weight_coset(&s, &x, CosetStrategy::LocalRandom { restarts: 50, seed: 1 }, 24).unwrap();
        assert!(h.vector.weight() >= oracle);
        assert!(s.contains(&h.vector.sum(&x).unwrap()).unwrap());
        assert!(!h.exact);
    }

    #[test]
    fn lex_order_on_supports() {
        use Ordering::*;
        assert_eq!(v(8, &[1, 5]).cmp_support_lex(&v(8, &[2, 3])), Less);
        assert_eq!(v(8, &[2, 3]).cmp_support_lex(&v(8, &[1, 5])), Greater);
        assert_eq!(v(8, &[0, 7]).cmp_weight_lex(&v(8, &[6])), Greater);
        assert_eq!(v(80, &[70]).cmp_support_lex(&v(80, &[70])), Equal);
    }

    fn arb_subspace(max_len: usize) -> impl Strategy<Value = (usize, Vec<Vec<bool>>)> {
        (1..=max_len).prop_flat_map(|m| {
            (Just(m), prop::collection::vec(prop::collection::vec(any::<bool>(), m), 0..m + 3))
        })
    }

    proptest! {
        #[test]
        fn complement_laws((m, gens) in arb_subspace(64)) {
            let gens: Vec<_> = gens.iter().map(|b| EdgeVector::from_bits(b)).collect();
            let s = Subspace::span(&gens, m).unwrap();
            let sp = s.orthogonal_complement();
            prop_assert_eq!(s.dim() + sp.dim(), m);
            prop_assert!(s.is_orthogonal_to(&sp).unwrap());
            prop_assert_eq!(&sp.orthogonal_complement(), &s);
            prop_assert_eq!(&Subspace::span(s.basis(), m).unwrap(), &s);
            for g in &gens {
                prop_assert!(s.contains(g).unwrap());
            }
        }

        #[test]
        fn bilinearity(bits in prop::collection::vec((any::<bool>(), any::<bool>(), any::<bool>()), 1..150)) {
            let u = EdgeVector::from_bits(&bits.iter().map(|t| t.0).collect::<Vec<_>>());
            let w = EdgeVector::from_bits(&bits.iter().map(|t| t.1).collect::<Vec<_>>());
            let x = EdgeVector::from_bits(&bits.iter().map(|t| t.2).collect::<Vec<_>>());
            let lhs = inner_product(&u.sum(&w).unwrap(), &x).unwrap();
            let rhs = inner_product(&u, &x).unwrap() ^ inner_product(&w, &x).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn exhaustive_coset_matches_naive((m, gens) in arb_subspace(20), off in prop::collection::vec(any::<bool>(), 20)) {
            let gens: Vec<_> = gens.iter().map(|b| EdgeVector::from_bits(b)).collect();
            let s = Subspace::span(&gens, m).unwrap();
            prop_assume!(s.dim() <= 16);
            let x = EdgeVector::from_bits(&off[..m]);
            let naive = s.enumerate(24).unwrap()
                .map(|y| y.sum(&x).unwrap())
                .min_by(|a, b| a.cmp_weight_lex(b))
                .unwrap();
            let got = min_weight_coset(&s, &x, CosetStrategy::Exhaustive, 24).unwrap();
            prop_assert_eq!(got.vector, naive);
        }
    }
}
