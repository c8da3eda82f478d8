//! Attacks an eavesdropper can run with the public key alone, and
//! statistics on ciphertexts.
//!
//! The quotient attacks map words to the abelianization or the free class-2
//! nilpotent group and test membership of the image of the relators' normal
//! closure, which is over-approximated by an integer lattice. A word outside
//! the lattice is certainly nontrivial.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use thiserror::Error;

use crate::codec::decrypt_word;
use crate::keygen::PrivateKey;
use crate::presentations::{Presentation, SymmetrizedSet};
use crate::rng::Rng;
use crate::words::{random_reduced_word, Word, WordError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AdversaryError {
    #[error("vector has dimension {got}, lattice has {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("empty corpus")]
    EmptyCorpus,
    #[error(transparent)]
    Word(#[from] WordError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VerdictKind {
    DefinitelyNonTrivial,
    TrivialCertified,
    Inconclusive,
}

impl fmt::Display for VerdictKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VerdictKind::DefinitelyNonTrivial => "DefinitelyNonTrivial",
            VerdictKind::TrivialCertified => "TrivialCertified",
            VerdictKind::Inconclusive => "Inconclusive",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AttackVerdict {
    pub kind: VerdictKind,
    pub evidence: String,
}

impl AttackVerdict {
    fn new(kind: VerdictKind, evidence: impl Into<String>) -> Self {
        Self {
            kind,
            evidence: evidence.into(),
        }
    }
}

type SparseRow = Vec<(usize, BigInt)>;

fn scaled_sum(a: &BigInt, x: &SparseRow, b: &BigInt, y: &SparseRow) -> SparseRow {
    let mut out = Vec::with_capacity(x.len() + y.len());
    let (mut i, mut j) = (0, 0);
    while i < x.len() || j < y.len() {
        let (col, v) = match (x.get(i), y.get(j)) {
            (Some((ci, vi)), Some((cj, vj))) if ci == cj => {
                i += 1;
                j += 1;
                (*ci, a * vi + b * vj)
            }
            (Some((ci, vi)), Some((cj, _))) if ci < cj => {
                i += 1;
                (*ci, a * vi)
            }
            (Some((ci, vi)), None) => {
                i += 1;
                (*ci, a * vi)
            }
            (_, Some((cj, vj))) => {
                j += 1;
                (*cj, b * vj)
            }
            (None, None) => unreachable!(),
        };
        if !v.is_zero() {
            out.push((col, v));
        }
    }
    out
}

/// Integer span of a set of vectors, kept in echelon form with exact
/// arithmetic.
///
/// Each row owns a pivot column at which every later row is zero. Pivots
/// are picked when a row is appended, preferring the entry of least
/// magnitude; on sparse inputs this keeps entries small and rows short.
#[derive(Clone, Debug, Default)]
pub struct IntegerLattice {
    dim: usize,
    rows: Vec<SparseRow>,
    pivots: Vec<usize>,
    row_of: HashMap<usize, usize>,
}

fn entry(v: &SparseRow, col: usize) -> Option<&BigInt> {
    v.binary_search_by_key(&col, |x| x.0).ok().map(|i| &v[i].1)
}

impl IntegerLattice {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            ..Self::default()
        }
    }

    pub fn from_rows<I: IntoIterator<Item = Vec<i64>>>(dim: usize, rows: I) -> Result<Self, AdversaryError> {
        let mut l = Self::new(dim);
        for r in rows {
            l.insert(&r)?;
        }
        Ok(l)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    fn sparse(&self, v: &[i64]) -> Result<SparseRow, AdversaryError> {
        if v.len() != self.dim {
            return Err(AdversaryError::DimensionMismatch {
                expected: self.dim,
                got: v.len(),
            });
        }
        Ok(v.iter().enumerate().filter(|(_, &x)| x != 0).map(|(i, &x)| (i, BigInt::from(x))).collect())
    }

    /// Earliest row whose pivot column is nonzero in `v`.
    fn first_hit(&self, v: &SparseRow) -> Option<usize> {
        v.iter().filter_map(|(c, _)| self.row_of.get(c).copied()).min()
    }

    pub fn insert(&mut self, v: &[i64]) -> Result<(), AdversaryError> {
        let v = self.sparse(v)?;
        self.insert_sparse(v);
        Ok(())
    }

    fn insert_sparse(&mut self, mut v: SparseRow) {
        let mut touched = usize::MAX;
        while let Some(i) = self.first_hit(&v) {
            let p = self.pivots[i];
            let row = &self.rows[i];
            let a = entry(row, p).expect("pivot entry").clone();
            let b = entry(&v, p).expect("hit entry").clone();
            if b.is_multiple_of(&a) {
                v = scaled_sum(&BigInt::one(), &v, &-(&b / &a), row);
            } else {
                let eg = a.extended_gcd(&b);
                let new_row = scaled_sum(&eg.x, row, &eg.y, &v);
                v = scaled_sum(&(&a / &eg.gcd), &v, &-(&b / &eg.gcd), row);
                self.rows[i] = new_row;
                touched = touched.min(i);
            }
        }
        if let Some(best) = v.iter().min_by(|x, y| x.1.abs().cmp(&y.1.abs()).then(x.0.cmp(&y.0))) {
            let (p, val) = (best.0, best.1.clone());
            if val.is_negative() {
                v.iter_mut().for_each(|(_, x)| *x = -&*x);
            }
            self.row_of.insert(p, self.rows.len());
            self.pivots.push(p);
            self.rows.push(v);
            touched = touched.min(self.rows.len() - 1);
        }
        if touched != usize::MAX {
            self.normalize();
        }
    }

    /// Reduces every row's entries at later pivot columns into `[0, pivot)`.
    /// Keeps entries from growing with the history of insertions.
    fn normalize(&mut self) {
        for l in (0..self.rows.len()).rev() {
            loop {
                let next = self.rows[l]
                    .iter()
                    .filter_map(|(c, x)| {
                        let j = *self.row_of.get(c)?;
                        (j > l && (x.is_negative() || x >= entry(&self.rows[j], *c).expect("pivot entry"))).then_some(j)
                    })
                    .min();
                let Some(j) = next else { break };
                let p = self.pivots[j];
                let q = entry(&self.rows[l], p).expect("entry").div_floor(entry(&self.rows[j], p).expect("pivot entry"));
                self.rows[l] = scaled_sum(&BigInt::one(), &self.rows[l], &-q, &self.rows[j]);
            }
        }
    }

    /// Exact integer membership.
    pub fn contains(&self, target: &[i64]) -> Result<bool, AdversaryError> {
        let mut v = self.sparse(target)?;
        while let Some(i) = self.first_hit(&v) {
            let p = self.pivots[i];
            let row = &self.rows[i];
            let (q, r) = entry(&v, p).expect("hit entry").div_rem(entry(row, p).expect("pivot entry"));
            if !r.is_zero() {
                return Ok(false);
            }
            v = scaled_sum(&BigInt::one(), &v, &-q, row);
        }
        Ok(v.is_empty())
    }
}

/// Image of a word in the free class-2 nilpotent group:
/// `w = x_1^e_1 ... x_k^e_k * prod_{i<j} [x_i, x_j]^c_ij` modulo weight-3
/// commutators, with `[a, b] = a^-1 b^-1 a b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Class2Coords {
    pub e: Vec<i64>,
    pub c: Vec<i64>,
}

/// Position of `c_ij` (`i < j`, 0-based) in the flattened upper triangle.
pub fn pair_index(i: usize, j: usize, k: usize) -> usize {
    debug_assert!(i < j && j < k);
    i * (2 * k - i - 1) / 2 + (j - i - 1)
}

impl Class2Coords {
    pub fn zero(k: usize) -> Self {
        Self {
            e: vec![0; k],
            c: vec![0; k * k.saturating_sub(1) / 2],
        }
    }

    /// Composition in the class-2 group.
    pub fn compose(&self, other: &Self) -> Self {
        let k = self.e.len();
        let e = self.e.iter().zip(&other.e).map(|(a, b)| a + b).collect();
        let mut c: Vec<i64> = self.c.iter().zip(&other.c).map(|(a, b)| a + b).collect();
        for (x, b) in c.iter_mut().zip(beta(&self.e, &other.e, k)) {
            *x += b;
        }
        Self { e, c }
    }

    pub fn flat(&self) -> Vec<i64> {
        self.e.iter().chain(&self.c).copied().collect()
    }
}

/// Cross term of the product: `beta(u, v)_ij = -u_j v_i`.
pub fn beta(u: &[i64], v: &[i64], k: usize) -> Vec<i64> {
    let mut out = vec![0; k * k.saturating_sub(1) / 2];
    for i in 0..k {
        if v[i] == 0 {
            continue;
        }
        for j in i + 1..k {
            out[pair_index(i, j, k)] = -u[j] * v[i];
        }
    }
    out
}

/// Commutator coordinates of `[x^u, x^v]`: `B(u, v)_ij = u_i v_j - u_j v_i`.
pub fn bracket(u: &[i64], v: &[i64], k: usize) -> Vec<i64> {
    let mut out = vec![0; k * k.saturating_sub(1) / 2];
    for i in 0..k {
        for j in i + 1..k {
            out[pair_index(i, j, k)] = u[i] * v[j] - u[j] * v[i];
        }
    }
    out
}

/// One left-to-right collection pass.
pub fn class2_coords(w: &Word, k: usize) -> Result<Class2Coords, AdversaryError> {
    w.check_gens(k)?;
    let mut out = Class2Coords::zero(k);
    for l in w.letters() {
        let i = l.gen() as usize - 1;
        let eps = l.sign();
        for j in i + 1..k {
            out.c[pair_index(i, j, k)] -= eps * out.e[j];
        }
        out.e[i] += eps;
    }
    Ok(out)
}

/// Relator exponent vectors; a word outside their span is nontrivial in the abelianization.
#[derive(Clone, Debug)]
pub struct AbelianTest {
    gens: usize,
    lattice: IntegerLattice,
}

impl AbelianTest {
    pub fn new(p: &Presentation) -> Self {
        let rows = p.relators().iter().map(|r| r.exponent_vector(p.gens()).expect("relators fit"));
        Self {
            gens: p.gens(),
            lattice: IntegerLattice::from_rows(p.gens(), rows).expect("dimensions match"),
        }
    }

    pub fn attack(&self, w: &Word) -> Result<AttackVerdict, AdversaryError> {
        let e = w.exponent_vector(self.gens)?;
        Ok(if self.lattice.contains(&e)? {
            AttackVerdict::new(VerdictKind::Inconclusive, "exponent vector lies in the relator lattice")
        } else {
            AttackVerdict::new(VerdictKind::DefinitelyNonTrivial, "exponent vector outside the relator lattice")
        })
    }
}

/// Class-2 image of the normal closure, over-approximated by the span of
/// `(e(r), c(r))` for each relator, the product cross terms
/// `(0, beta(e(r), e(s)))` and the conjugation terms `(0, B(unit_a, e(r)))`.
#[derive(Clone, Debug)]
pub struct Class2Test {
    gens: usize,
    lattice: IntegerLattice,
}

impl Class2Test {
    pub fn new(p: &Presentation) -> Self {
        let k = p.gens();
        let coords: Vec<Class2Coords> = p.relators().iter().map(|r| class2_coords(r, k).expect("relators fit")).collect();
        let mut lattice = IntegerLattice::new(k + k * k.saturating_sub(1) / 2);
        let zero_e = vec![0i64; k];
        let push_c = |l: &mut IntegerLattice, c: Vec<i64>| {
            if c.iter().any(|&x| x != 0) {
                let v: Vec<i64> = zero_e.iter().copied().chain(c).collect();
                l.insert(&v).expect("dimensions match");
            }
        };
        for x in &coords {
            lattice.insert(&x.flat()).expect("dimensions match");
        }
        for x in &coords {
            for a in 0..k {
                let mut unit = vec![0i64; k];
                unit[a] = 1;
                push_c(&mut lattice, bracket(&unit, &x.e, k));
            }
            for y in &coords {
                push_c(&mut lattice, beta(&x.e, &y.e, k));
            }
        }
        Self { gens: k, lattice }
    }

    pub fn attack(&self, w: &Word) -> Result<AttackVerdict, AdversaryError> {
        let x = class2_coords(w, self.gens)?;
        Ok(if self.lattice.contains(&x.flat())? {
            AttackVerdict::new(VerdictKind::Inconclusive, "class-2 coordinates lie in the relator lattice")
        } else if x.e.iter().all(|&v| v == 0) {
            AttackVerdict::new(VerdictKind::DefinitelyNonTrivial, "commutator coordinates outside the relator lattice")
        } else {
            AttackVerdict::new(VerdictKind::DefinitelyNonTrivial, "class-2 coordinates outside the relator lattice")
        })
    }
}

pub fn abelian_attack(p: &Presentation, w: &Word) -> Result<AttackVerdict, AdversaryError> {
    AbelianTest::new(p).attack(w)
}

pub fn nilpotent2_attack(p: &Presentation, w: &Word) -> Result<AttackVerdict, AdversaryError> {
    Class2Test::new(p).attack(w)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumerationBudget {
    pub max_factors: usize,
    pub max_conj_len: usize,
    pub max_states: usize,
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        Self {
            max_factors: 3,
            max_conj_len: 1,
            max_states: 100_000,
        }
    }
}

fn all_reduced_words(gens: usize, max_len: usize) -> Vec<Word> {
    let mut out = vec![Word::empty()];
    let mut layer = vec![Word::empty()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &layer {
            for g in 1..=gens as u32 {
                for inv in [false, true] {
                    let x = Word::from_letters(vec![crate::words::Letter::new(g, inv)]);
                    let y = w.concat(&x);
                    if y.is_reduced() {
                        next.push(y);
                    }
                }
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// Breadth-first search over products of conjugated relators. Only ever
/// certifies triviality; running out of budget is inconclusive.
pub fn enumerate_yes(p: &Presentation, w: &Word, budget: EnumerationBudget) -> Result<AttackVerdict, AdversaryError> {
    w.check_gens(p.gens())?;
    let target = w.free_reduce();
    let target_key = target.cyclic_key();
    if target.is_empty() {
        return Ok(AttackVerdict::new(VerdictKind::TrivialCertified, "freely trivial"));
    }
    let members = SymmetrizedSet::from_relators(p.relators()).members();
    let mut factors: Vec<Word> = Vec::new();
    let mut seen_factor = HashSet::new();
    for c in all_reduced_words(p.gens(), budget.max_conj_len) {
        for s in &members {
            let f = c.inverse().concat(s).concat(&c).free_reduce();
            if seen_factor.insert(f.clone()) {
                factors.push(f);
            }
        }
    }
    // Each state remembers (parent, factor) to rebuild the derivation.
    let mut states: Vec<(Word, usize, usize)> = vec![(Word::empty(), usize::MAX, usize::MAX)];
    let mut seen: HashMap<Word, usize> = HashMap::from([(Word::empty(), 0)]);
    let mut queue = VecDeque::from([(0usize, 0usize)]);
    while let Some((idx, depth)) = queue.pop_front() {
        if depth == budget.max_factors {
            continue;
        }
        for (fi, f) in factors.iter().enumerate() {
            let next = states[idx].0.mul(f);
            let key = next.cyclic_key();
            if seen.contains_key(&key) {
                continue;
            }
            if states.len() >= budget.max_states {
                return Ok(AttackVerdict::new(
                    VerdictKind::Inconclusive,
                    format!("budget exhausted after {} states", states.len()),
                ));
            }
            let hit = next == target || key == target_key;
            states.push((next, idx, fi));
            let id = states.len() - 1;
            seen.insert(key, id);
            if hit {
                let mut chain = Vec::new();
                let mut cur = id;
                while cur != 0 {
                    chain.push(factors[states[cur].2].to_string());
                    cur = states[cur].1;
                }
                chain.reverse();
                let how = if states[id].0 == target { "product" } else { "conjugate of product" };
                return Ok(AttackVerdict::new(
                    VerdictKind::TrivialCertified,
                    format!("{how} of {} factor(s): {}", chain.len(), chain.join(" * ")),
                ));
            }
            queue.push_back((id, depth + 1));
        }
    }
    Ok(AttackVerdict::new(
        VerdictKind::Inconclusive,
        format!("search space exhausted after {} states", states.len()),
    ))
}

#[derive(Clone, Debug, PartialEq)]
pub struct FreqRow {
    pub sub_len: usize,
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Categories after merging sparse cells.
    pub cells: usize,
}

fn subword_counts(corpus: &[Word], n: usize) -> HashMap<&[crate::words::Letter], u64> {
    let mut m = HashMap::new();
    for w in corpus {
        for s in w.letters().windows(n) {
            *m.entry(s).or_insert(0) += 1;
        }
    }
    m
}

/// Two-sample chi-square test on subword counts, per subword length.
pub fn freq_test(a: &[Word], b: &[Word], max_sub: usize) -> Result<Vec<FreqRow>, AdversaryError> {
    if a.is_empty() || b.is_empty() {
        return Err(AdversaryError::EmptyCorpus);
    }
    let mut rows = Vec::new();
    for n in 1..=max_sub {
        let ca = subword_counts(a, n);
        let cb = subword_counts(b, n);
        let mut keys: Vec<&[crate::words::Letter]> = ca.keys().chain(cb.keys()).copied().collect();
        keys.sort_unstable();
        keys.dedup();
        let ta: u64 = ca.values().sum();
        let tb: u64 = cb.values().sum();
        let total = (ta + tb) as f64;
        let mut cells: Vec<(u64, u64)> = Vec::new();
        let mut other = (0u64, 0u64);
        for k in keys {
            let (x, y) = (ca.get(k).copied().unwrap_or(0), cb.get(k).copied().unwrap_or(0));
            let col = (x + y) as f64;
            let min_expected = col * ta.min(tb) as f64 / total;
            if min_expected < 5.0 {
                other.0 += x;
                other.1 += y;
            } else {
                cells.push((x, y));
            }
        }
        if other.0 + other.1 > 0 {
            cells.push(other);
        }
        let mut stat = 0.0;
        if ta > 0 && tb > 0 {
            for &(x, y) in &cells {
                let col = (x + y) as f64;
                for (obs, t) in [(x, ta), (y, tb)] {
                    let e = col * t as f64 / total;
                    if e > 0.0 {
                        stat += (obs as f64 - e).powi(2) / e;
                    }
                }
            }
        }
        let dof = cells.len().saturating_sub(1);
        let p_value = if dof == 0 {
            1.0
        } else {
            ChiSquared::new(dof as f64).expect("positive dof").sf(stat)
        };
        rows.push(FreqRow {
            sub_len: n,
            statistic: stat,
            dof,
            p_value,
            cells: cells.len(),
        });
    }
    Ok(rows)
}

/// Fraction of uniform reduced words of length `n` over the public
/// generators that the private key decodes as nontrivial.
pub fn estimate_nontrivial_rate(private: &PrivateKey, n: usize, samples: usize, rng: &mut Rng) -> f64 {
    if samples == 0 {
        return 0.0;
    }
    let gens = private.public_gens();
    let hits = (0..samples)
        .filter(|_| {
            let w = random_reduced_word(rng, gens, n);
            !decrypt_word(private, &w).expect("word is over the public generators")
        })
        .count();
    hits as f64 / samples as f64
}
