//! Finite presentations, symmetrized relator sets, small cancellation
//! checks and Dehn's algorithm.

use std::fmt;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::Rng;
use crate::words::{push_reduced, random_reduced_word, Letter, Word, WordError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PresentationError {
    #[error(transparent)]
    Word(#[from] WordError),
    #[error("relator {0} is trivial in the free group")]
    EmptyRelator(usize),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WpError {
    #[error("presentation is not C'({}/{}): {report}", report.lambda.num, report.lambda.den)]
    NotSmallCancellation { report: SmallCancellationReport },
    #[error(transparent)]
    Word(#[from] WordError),
}

/// `<x_1..x_k | r_1..r_m>` with every relator cyclically reduced and non-empty.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Presentation {
    gens: usize,
    relators: Vec<Word>,
}

impl Presentation {
    /// Relators are replaced by their cyclic cores; the normal closure is unchanged.
    pub fn new(gens: usize, relators: Vec<Word>) -> Result<Self, PresentationError> {
        let relators = relators
            .into_iter()
            .enumerate()
            .map(|(i, r)| {
                r.check_gens(gens)?;
                let core = r.cyclic_core();
                if core.is_empty() {
                    Err(PresentationError::EmptyRelator(i))
                } else {
                    Ok(core)
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { gens, relators })
    }

    pub fn gens(&self) -> usize {
        self.gens
    }

    pub fn relators(&self) -> &[Word] {
        &self.relators
    }

    pub fn total_length(&self) -> usize {
        self.relators.iter().map(Word::len).sum()
    }

    pub fn symmetrize(&self) -> SymmetrizedSet {
        SymmetrizedSet::from_relators(&self.relators)
    }

    pub fn verify_c_prime(&self, lambda: Lambda) -> SmallCancellationReport {
        self.symmetrize().max_piece(lambda)
    }

    /// Copy with one more relator appended.
    pub fn with_relator(&self, r: Word) -> Result<Self, PresentationError> {
        let mut rels = self.relators.clone();
        rels.push(r);
        Presentation::new(self.gens, rels)
    }

    /// Counts of relators by length, ascending.
    pub fn length_histogram(&self) -> Vec<(usize, usize)> {
        let mut h = std::collections::BTreeMap::new();
        for r in &self.relators {
            *h.entry(r.len()).or_insert(0) += 1;
        }
        h.into_iter().collect()
    }
}

/// Metric small cancellation parameter `num/den`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lambda {
    pub num: u32,
    pub den: u32,
}

impl Lambda {
    pub const SIXTH: Lambda = Lambda { num: 1, den: 6 };

    /// `piece < lambda * len`, in integers.
    pub fn admits(self, piece: usize, len: usize) -> bool {
        (piece as u64) * (self.den as u64) < (self.num as u64) * (len as u64)
    }
}

impl Default for Lambda {
    fn default() -> Self {
        Lambda::SIXTH
    }
}

/// Relators closed under cyclic permutation and inversion, sorted and
/// deduplicated. The sorted order doubles as a prefix index.
///
/// Members are not stored individually: each cyclic core and its inverse is
/// kept twice over, so every rotation is a slice of it. Memory is linear in
/// the total relator length even for relators thousands of letters long.
#[derive(Clone, Debug)]
pub struct SymmetrizedSet {
    doubled: Vec<Vec<Letter>>,
    /// `(base, rotation)` in sorted order.
    forms: Vec<(u32, u32)>,
    min_len: SparseMin,
    max_len: usize,
}

impl SymmetrizedSet {
    pub fn from_relators(relators: &[Word]) -> Self {
        let mut doubled = Vec::new();
        for r in relators {
            let core = r.cyclic_core();
            for q in [core.clone(), core.inverse()] {
                if !q.is_empty() {
                    doubled.push(q.concat(&q).into_letters());
                }
            }
        }
        let slice = |(b, k): (u32, u32)| {
            let d = &doubled[b as usize];
            &d[k as usize..k as usize + d.len() / 2]
        };
        let mut forms: Vec<(u32, u32)> = doubled
            .iter()
            .enumerate()
            .flat_map(|(b, d)| (0..d.len() / 2).map(move |k| (b as u32, k as u32)))
            .collect();
        forms.sort_unstable_by(|&x, &y| slice(x).cmp(slice(y)).then(x.cmp(&y)));
        forms.dedup_by(|x, y| slice(*x) == slice(*y));
        let lens: Vec<usize> = forms.iter().map(|&f| slice(f).len()).collect();
        let max_len = lens.iter().copied().max().unwrap_or(0);
        Self {
            min_len: SparseMin::new(&lens),
            doubled,
            forms,
            max_len,
        }
    }

    /// The `i`-th member in sorted order.
    pub fn member(&self, i: usize) -> &[Letter] {
        let (b, k) = self.forms[i];
        let d = &self.doubled[b as usize];
        &d[k as usize..k as usize + d.len() / 2]
    }

    /// All members in sorted order, materialized.
    pub fn members(&self) -> Vec<Word> {
        (0..self.len()).map(|i| Word::from_letters(self.member(i).to_vec())).collect()
    }

    pub fn len(&self) -> usize {
        self.forms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forms.is_empty()
    }

    pub fn contains(&self, w: &Word) -> bool {
        self.forms
            .binary_search_by(|&(b, k)| {
                let d = &self.doubled[b as usize];
                d[k as usize..k as usize + d.len() / 2].cmp(w.letters())
            })
            .is_ok()
    }

    fn lcp(a: &[Letter], b: &[Letter]) -> usize {
        a.iter()
            .zip(b)
            .take_while(|(x, y)| x == y)
            .count()
    }

    /// Longest piece, with each member checked against `lambda` using the
    /// longest piece that is a prefix of it. Neighbours in sorted order
    /// realise every member's longest common prefix.
    pub fn max_piece(&self, lambda: Lambda) -> SmallCancellationReport {
        let n = self.len();
        let mut best = 0;
        let mut witness = None;
        let mut satisfies = true;
        let mut violations = 0;
        let adjacent: Vec<usize> = (0..n.saturating_sub(1))
            .map(|i| Self::lcp(self.member(i), self.member(i + 1)))
            .collect();
        for i in 0..n {
            let member = self.member(i);
            let left = if i > 0 { adjacent[i - 1] } else { 0 };
            let right = adjacent.get(i).copied().unwrap_or(0);
            let piece = left.max(right);
            if !lambda.admits(piece, member.len()) {
                satisfies = false;
                violations += 1;
            }
            if piece > best {
                best = piece;
                let other = if left >= right { i - 1 } else { i + 1 };
                witness = Some(PieceWitness {
                    piece: Word::from_letters(member[..piece].to_vec()),
                    first: Word::from_letters(member.to_vec()),
                    second: Word::from_letters(self.member(other).to_vec()),
                });
            }
        }
        SmallCancellationReport {
            max_piece_length: best,
            witness,
            satisfies_lambda: satisfies,
            lambda,
            violating_members: violations,
            short_relators: (0..n).filter(|&i| self.member(i).len() <= 2).count(),
        }
    }

    /// Longest `d` such that `probe(0..d)` is a prefix of a member `r` with
    /// `2d > |r|`; among members realising it, the least one. `probe(i)`
    /// returns the i-th letter of the text being matched, if any.
    fn longest_half_match(&self, mut probe: impl FnMut(usize) -> Option<Letter>) -> Option<(usize, usize)> {
        let (mut lo, mut hi) = (0, self.len());
        let mut best = None;
        let mut d = 0;
        while lo < hi && d < self.max_len {
            let Some(x) = probe(d) else { break };
            let range = &self.forms[lo..hi];
            // Members shorter than d+1 sort first within the range.
            let key = |&(b, k): &(u32, u32)| {
                let len = self.doubled[b as usize].len() / 2;
                (d < len).then(|| self.doubled[b as usize][k as usize + d])
            };
            let a = range.partition_point(|f| key(f) < Some(x));
            let b = range.partition_point(|f| key(f) <= Some(x));
            hi = lo + b;
            lo += a;
            d += 1;
            if lo < hi && self.min_len.query(lo, hi) < 2 * d {
                best = Some((d, lo, hi));
            }
        }
        let (d, lo, hi) = best?;
        let idx = (lo..hi).find(|&i| self.member(i).len() < 2 * d)?;
        Some((d, idx))
    }

    /// Dehn's algorithm. Letters are pushed onto a reduced stack; after
    /// every push the top of the stack is tested for a subword that is more
    /// than half of a member, and such a subword is replaced by the inverse
    /// of the member's remainder (fed back through the input so that new
    /// matches are caught). The earliest-ending match wins, then the longest,
    /// then the least member. The cyclic core of the stack is returned.
    pub fn dehn_reduce(&self, w: &Word) -> DehnOutcome {
        let mut input: Vec<Letter> = w.letters().iter().rev().copied().collect();
        let mut stack: Vec<Letter> = Vec::with_capacity(w.len());
        let mut steps = 0;
        while let Some(x) = input.pop() {
            let before = stack.len();
            push_reduced(&mut stack, x);
            if stack.len() < before || self.is_empty() {
                continue;
            }
            // Stack read top-down and inverted spells u^-1 where u is the
            // suffix; u^-1 a prefix of r' = u^-1 v^-1 means u = v^-1 in the group.
            let n = stack.len();
            let found = self.longest_half_match(|i| (i < n).then(|| stack[n - 1 - i].inverse()));
            if let Some((d, idx)) = found {
                stack.truncate(n - d);
                input.extend(self.member(idx)[d..].iter().rev());
                steps += 1;
            }
        }
        DehnOutcome {
            word: Word::from_letters(stack).cyclic_core(),
            steps,
        }
    }
}

/// Range-minimum table over member lengths.
#[derive(Clone, Debug)]
struct SparseMin {
    levels: Vec<Vec<usize>>,
}

impl SparseMin {
    fn new(values: &[usize]) -> Self {
        let mut levels = vec![values.to_vec()];
        let mut width = 1;
        while 2 * width <= values.len() {
            let prev = levels.last().unwrap();
            let next: Vec<usize> = (0..=values.len() - 2 * width)
                .map(|i| prev[i].min(prev[i + width]))
                .collect();
            levels.push(next);
            width *= 2;
        }
        Self { levels }
    }

    /// Minimum over `lo..hi`, which must be non-empty.
    fn query(&self, lo: usize, hi: usize) -> usize {
        let span = hi - lo;
        let k = usize::BITS as usize - 1 - span.leading_zeros() as usize;
        let level = &self.levels[k];
        level[lo].min(level[hi - (1 << k)])
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PieceWitness {
    pub piece: Word,
    pub first: Word,
    pub second: Word,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmallCancellationReport {
    pub max_piece_length: usize,
    pub witness: Option<PieceWitness>,
    pub satisfies_lambda: bool,
    pub lambda: Lambda,
    /// Members whose longest prefix piece breaks the metric condition.
    pub violating_members: usize,
    /// Members of length 1 or 2; these rule out small cancellation.
    pub short_relators: usize,
}

impl fmt::Display for SmallCancellationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "max piece length {}", self.max_piece_length)?;
        if let Some(w) = &self.witness {
            write!(f, " (piece {} shared by {} and {})", w.piece, w.first, w.second)?;
        }
        write!(f, ", {} violating member(s)", self.violating_members)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DehnOutcome {
    pub word: Word,
    pub steps: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Trivial,
    NonTrivial,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WpVerdict {
    pub verdict: Verdict,
    pub steps: usize,
}

impl WpVerdict {
    pub fn is_trivial(&self) -> bool {
        self.verdict == Verdict::Trivial
    }
}

/// Word-problem solver for a presentation already known to be C'(1/6).
#[derive(Clone, Debug)]
pub struct DehnSolver {
    presentation: Presentation,
    set: SymmetrizedSet,
    report: SmallCancellationReport,
}

impl DehnSolver {
    pub fn new(presentation: Presentation) -> Result<Self, WpError> {
        let set = presentation.symmetrize();
        let report = set.max_piece(Lambda::SIXTH);
        if !report.satisfies_lambda {
            return Err(WpError::NotSmallCancellation { report });
        }
        Ok(Self {
            presentation,
            set,
            report,
        })
    }

    pub fn presentation(&self) -> &Presentation {
        &self.presentation
    }

    pub fn symmetrized(&self) -> &SymmetrizedSet {
        &self.set
    }

    pub fn report(&self) -> &SmallCancellationReport {
        &self.report
    }

    pub fn word_problem(&self, w: &Word) -> Result<WpVerdict, WpError> {
        w.check_gens(self.presentation.gens())?;
        let out = self.set.dehn_reduce(w);
        Ok(WpVerdict {
            verdict: if out.word.is_empty() {
                Verdict::Trivial
            } else {
                Verdict::NonTrivial
            },
            steps: out.steps,
        })
    }
}

/// One-shot convenience; builds the symmetrized set each call.
pub fn word_problem(p: &Presentation, w: &Word) -> Result<WpVerdict, WpError> {
    DehnSolver::new(p.clone())?.word_problem(w)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PresentationParams {
    pub gens: RangeInclusive<usize>,
    pub relators: RangeInclusive<usize>,
    pub lengths: RangeInclusive<usize>,
}

impl Default for PresentationParams {
    fn default() -> Self {
        Self {
            gens: 10..=20,
            relators: 10..=30,
            lengths: 12..=20,
        }
    }
}

pub fn random_presentation(rng: &mut Rng, params: &PresentationParams) -> Presentation {
    let gens = rng.inclusive(*params.gens.start(), *params.gens.end());
    let m = rng.inclusive(*params.relators.start(), *params.relators.end());
    let relators = (0..m)
        .map(|_| {
            let len = rng.inclusive(*params.lengths.start(), *params.lengths.end()).max(1);
            random_reduced_word(rng, gens, len)
        })
        .collect();
    Presentation::new(gens, relators).expect("random reduced words have non-empty cyclic cores")
}

/// Genus-two surface group `<a,b,c,d | [a,b][c,d]>`.
pub fn surface_genus_two() -> Presentation {
    Presentation::new(4, vec![Word::from_compact("abABcdCD").unwrap()]).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::from_compact(s).unwrap()
    }

    fn pres(gens: usize, rels: &[&str]) -> Presentation {
        Presentation::new(gens, rels.iter().map(|r| w(r)).collect()).unwrap()
    }

    /// Every ordered pair of distinct members, longest common prefix.
    fn brute_max_piece(s: &SymmetrizedSet) -> usize {
        let m = s.members();
        let mut best = 0;
        for i in 0..m.len() {
            for j in 0..m.len() {
                if i != j {
                    best = best.max(SymmetrizedSet::lcp(m[i].letters(), m[j].letters()));
                }
            }
        }
        best
    }

    #[test]
    fn symmetrize_examples() {
        let s = pres(3, &["abc"]).symmetrize();
        let mut expect: Vec<Word> = ["abc", "bca", "cab", "CBA", "ACB", "BAC"].iter().map(|x| w(x)).collect();
        expect.sort();
        assert_eq!(s.members(), expect);
        let s = pres(1, &["aa"]).symmetrize();
        assert_eq!(s.members(), vec![w("AA"), w("aa")]);
        assert!(pres(2, &[]).symmetrize().is_empty());
    }

    #[test]
    fn construction_rejects_bad_relators() {
        assert_eq!(
            Presentation::new(2, vec![w("aA")]),
            Err(PresentationError::EmptyRelator(0))
        );
        assert!(Presentation::new(2, vec![w("ac")]).is_err());
        assert_eq!(pres(2, &["Aba"]).relators(), &[w("b")]);
    }

    #[test]
    fn max_piece_examples() {
        let s = pres(4, &["abc", "abd"]).symmetrize();
        let r = s.max_piece(Lambda::SIXTH);
        assert_eq!(r.max_piece_length, brute_max_piece(&s));
        assert!(r.max_piece_length >= 2);
        assert!(!r.satisfies_lambda);

        let s = surface_genus_two().symmetrize();
        assert_eq!(s.len(), 16);
        let r = s.max_piece(Lambda::SIXTH);
        assert_eq!(r.max_piece_length, 1);
        assert_eq!(brute_max_piece(&s), 1);
        assert!(r.satisfies_lambda);

        let s = pres(2, &["abAB"]).symmetrize();
        let r = s.max_piece(Lambda::SIXTH);
        assert!(r.max_piece_length >= 1);
        assert!(!r.satisfies_lambda);
        assert!(s.contains(&w("abAB")) && s.contains(&w("aBAb")));
    }

    #[test]
    fn verify_c_prime_examples() {
        assert!(surface_genus_two().verify_c_prime(Lambda::SIXTH).satisfies_lambda);
        let p = pres(2, &["ab"]);
        let r = p.verify_c_prime(Lambda::SIXTH);
        assert_eq!(r.max_piece_length, brute_max_piece(&p.symmetrize()));
        let empty = pres(3, &[]).verify_c_prime(Lambda::SIXTH);
        assert_eq!(empty.max_piece_length, 0);
        assert!(empty.satisfies_lambda);
        assert!(empty.witness.is_none());
    }

    #[test]
    fn dehn_examples() {
        let s = surface_genus_two().symmetrize();
        let out = s.dehn_reduce(&w("abABcdCD"));
        assert_eq!(out, DehnOutcome { word: Word::empty(), steps: 1 });
        let out = s.dehn_reduce(&w("abABcdC"));
        assert_eq!(out.word, w("d"));
        assert_eq!(out.steps, 1);
        let out = s.dehn_reduce(&w("abAB"));
        assert_eq!(out, DehnOutcome { word: w("abAB"), steps: 0 });
    }

    #[test]
    fn word_problem_examples() {
        let p = surface_genus_two();
        assert!(word_problem(&p, &w("abABcdCD")).unwrap().is_trivial());
        assert!(!word_problem(&p, &w("abAB")).unwrap().is_trivial());
        assert!(word_problem(&p, &Word::empty()).unwrap().is_trivial());
        let bad = pres(2, &["abAB"]);
        assert!(matches!(
            word_problem(&bad, &w("a")),
            Err(WpError::NotSmallCancellation { .. })
        ));
    }

    #[test]
    fn random_presentation_contract() {
        let params = PresentationParams::default();
        let a = random_presentation(&mut Rng::new(4), &params);
        let b = random_presentation(&mut Rng::new(4), &params);
        assert_eq!(a, b);
        assert!((10..=20).contains(&a.gens()));
        assert!((10..=30).contains(&a.relators().len()));
        assert!(a.relators().iter().all(|r| r.is_cyclically_reduced() && r.len() <= 20));
    }

    #[test]
    fn sparse_min_matches_scan() {
        let vals = [5, 3, 8, 1, 9, 2, 7, 7, 4];
        let t = SparseMin::new(&vals);
        for lo in 0..vals.len() {
            for hi in lo + 1..=vals.len() {
                assert_eq!(t.query(lo, hi), *vals[lo..hi].iter().min().unwrap());
            }
        }
    }
}
