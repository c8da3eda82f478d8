//! Free-group words over numbered generators.
//!
//! A letter is a generator index `i >= 1` with a sign; `x_i^{-1}` is stored
//! as `-i`. The empty word is the identity.

use std::fmt;
use std::ops::RangeInclusive;

use thiserror::Error;

use crate::rng::Rng;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WordError {
    #[error("generator index {index} out of range 1..={gens}")]
    IndexOutOfRange { index: u32, gens: usize },
    #[error("letter 0 is not a generator")]
    ZeroLetter,
    #[error("cannot parse word `{0}`")]
    Parse(String),
    #[error("no zero-exponent word of length in {lo}..={hi} over {gens} generator(s)")]
    NoCommutatorWord { lo: usize, hi: usize, gens: usize },
}

/// A signed generator symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter(i32);

impl Letter {
    pub fn new(gen: u32, inverse: bool) -> Self {
        assert!(gen >= 1, "generator indices start at 1");
        let g = gen as i32;
        Letter(if inverse { -g } else { g })
    }

    pub fn from_signed(v: i32) -> Result<Self, WordError> {
        if v == 0 {
            Err(WordError::ZeroLetter)
        } else {
            Ok(Letter(v))
        }
    }

    pub fn gen(self) -> u32 {
        self.0.unsigned_abs()
    }

    pub fn is_inverse(self) -> bool {
        self.0 < 0
    }

    /// +1 or -1.
    pub fn sign(self) -> i64 {
        self.0.signum() as i64
    }

    pub fn signed(self) -> i32 {
        self.0
    }

    pub fn inverse(self) -> Self {
        Letter(-self.0)
    }
}

/// Finite sequence of letters. Not necessarily reduced; every operation
/// returns a fresh word.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn from_letters(letters: Vec<Letter>) -> Self {
        Word(letters)
    }

    pub fn from_signed(values: &[i32]) -> Result<Self, WordError> {
        values
            .iter()
            .map(|&v| Letter::from_signed(v))
            .collect::<Result<Vec<_>, _>>()
            .map(Word)
    }

    pub fn generator(gen: u32) -> Self {
        Word(vec![Letter::new(gen, false)])
    }

    /// Compact notation: `a`..`t` are x1..x20, upper case is the inverse.
    pub fn from_compact(s: &str) -> Result<Self, WordError> {
        s.chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| {
                let lower = c.to_ascii_lowercase();
                if !('a'..='t').contains(&lower) {
                    return Err(WordError::Parse(s.to_string()));
                }
                let gen = (lower as u8 - b'a') as u32 + 1;
                Ok(Letter::new(gen, c.is_ascii_uppercase()))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Word)
    }

    /// Compact notation if every generator is at most 20, else `None`.
    pub fn to_compact(&self) -> Option<String> {
        self.0
            .iter()
            .map(|l| {
                if l.gen() > 20 {
                    return None;
                }
                let c = (b'a' + (l.gen() - 1) as u8) as char;
                Some(if l.is_inverse() { c.to_ascii_uppercase() } else { c })
            })
            .collect()
    }

    pub fn to_signed(&self) -> Vec<i32> {
        self.0.iter().map(|l| l.signed()).collect()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn into_letters(self) -> Vec<Letter> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_gen(&self) -> u32 {
        self.0.iter().map(|l| l.gen()).max().unwrap_or(0)
    }

    pub fn check_gens(&self, gens: usize) -> Result<(), WordError> {
        match self.0.iter().find(|l| l.gen() as usize > gens) {
            Some(l) => Err(WordError::IndexOutOfRange {
                index: l.gen(),
                gens,
            }),
            None => Ok(()),
        }
    }

    /// Concatenation without reduction.
    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// Concatenation followed by free reduction.
    pub fn mul(&self, other: &Word) -> Word {
        let mut out = self.free_reduce();
        for &l in &other.0 {
            push_reduced(&mut out.0, l);
        }
        out
    }

    pub fn is_reduced(&self) -> bool {
        self.0.windows(2).all(|p| p[0] != p[1].inverse())
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        self.is_reduced()
            && match (self.0.first(), self.0.last()) {
                (Some(&f), Some(&l)) => self.len() == 1 || f != l.inverse(),
                _ => true,
            }
    }

    /// Single left-to-right pass with the output vector used as a stack.
    pub fn free_reduce(&self) -> Word {
        let mut out = Vec::with_capacity(self.len());
        for &l in &self.0 {
            push_reduced(&mut out, l);
        }
        Word(out)
    }

    /// Returns `(core, prefix)` with `prefix * core * prefix^-1` freely equal
    /// to `self` and `core` cyclically reduced.
    pub fn cyclic_reduce(&self) -> (Word, Word) {
        let reduced = self.free_reduce().0;
        let n = reduced.len();
        let mut k = 0;
        while 2 * k + 1 < n && reduced[k] == reduced[n - 1 - k].inverse() {
            k += 1;
        }
        (
            Word(reduced[k..n - k].to_vec()),
            Word(reduced[..k].to_vec()),
        )
    }

    pub fn cyclic_core(&self) -> Word {
        self.cyclic_reduce().0
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    /// Cyclic shift so the result starts at position `k`.
    pub fn rotate(&self, k: usize) -> Word {
        if self.is_empty() {
            return Word::empty();
        }
        let k = k % self.len();
        let mut v = Vec::with_capacity(self.len());
        v.extend_from_slice(&self.0[k..]);
        v.extend_from_slice(&self.0[..k]);
        Word(v)
    }

    pub fn subword(&self, start: usize, end: usize) -> Word {
        Word(self.0[start..end].to_vec())
    }

    pub fn pow(&self, n: usize) -> Word {
        let mut v = Vec::with_capacity(self.len() * n);
        for _ in 0..n {
            v.extend_from_slice(&self.0);
        }
        Word(v).free_reduce()
    }

    /// `[a, b] = a^-1 b^-1 a b`, freely reduced.
    pub fn commutator(a: &Word, b: &Word) -> Word {
        a.inverse()
            .concat(&b.inverse())
            .concat(a)
            .concat(b)
            .free_reduce()
    }

    /// Exponent sum on each of the generators `1..=gens`.
    pub fn exponent_vector(&self, gens: usize) -> Result<Vec<i64>, WordError> {
        self.check_gens(gens)?;
        let mut e = vec![0i64; gens];
        for l in &self.0 {
            e[l.gen() as usize - 1] += l.sign();
        }
        Ok(e)
    }

    /// Least rotation of the cyclic core and of its inverse: two words get
    /// the same key iff their cyclic cores are conjugate up to inversion.
    pub fn cyclic_key(&self) -> Word {
        let core = self.cyclic_core();
        let a = least_rotation(&core);
        let b = least_rotation(&core.inverse());
        a.min(b)
    }
}

fn least_rotation(w: &Word) -> Word {
    (0..w.len().max(1))
        .map(|k| w.rotate(k))
        .min()
        .unwrap_or_default()
}

#[inline]
pub(crate) fn push_reduced(stack: &mut Vec<Letter>, l: Letter) {
    if stack.last() == Some(&l.inverse()) {
        stack.pop();
    } else {
        stack.push(l);
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.to_compact() {
            Some(s) => f.write_str(&s),
            None => {
                let parts: Vec<String> = self.0.iter().map(|l| l.0.to_string()).collect();
                f.write_str(&parts.join(" "))
            }
        }
    }
}

impl FromIterator<Letter> for Word {
    fn from_iter<I: IntoIterator<Item = Letter>>(iter: I) -> Self {
        Word(iter.into_iter().collect())
    }
}

/// Draws a letter uniformly from the `2k` symbols, excluding `avoid` when given.
fn random_letter(rng: &mut Rng, gens: usize, avoid: Option<Letter>) -> Letter {
    let symbols = 2 * gens - usize::from(avoid.is_some());
    let mut idx = rng.below(symbols);
    loop {
        let l = Letter::new((idx / 2) as u32 + 1, idx % 2 == 1);
        if Some(l) == avoid {
            idx += 1;
            continue;
        }
        return l;
    }
}

/// Uniform over reduced words of length exactly `len` on `gens` generators.
pub fn random_reduced_word(rng: &mut Rng, gens: usize, len: usize) -> Word {
    assert!(gens >= 1, "need at least one generator");
    let mut v: Vec<Letter> = Vec::with_capacity(len);
    for _ in 0..len {
        let avoid = v.last().map(|l| l.inverse());
        v.push(random_letter(rng, gens, avoid));
    }
    Word(v)
}

const REPAIR_ROUNDS: usize = 1000;
const RESTARTS: usize = 1000;

/// Whether some reduced word with zero exponent vector has this length.
fn admissible_commutator_length(gens: usize, len: usize) -> bool {
    len == 0 || (gens >= 2 && len >= 4 && len.is_multiple_of(2))
}

/// Random reduced word with zero exponent sum on every generator and length in `lengths`.
///
/// Starts from a uniform reduced word of an admissible target length and
/// repairs exponents: an odd excess on `x_i` is fixed by inserting one
/// opposite letter, an even excess by flipping the sign of a random
/// occurrence. Lengths drifting out of range are repaired by inserting or
/// deleting a matched `x_j ... x_j^-1` pair.
pub fn random_commutator_word(
    rng: &mut Rng,
    gens: usize,
    lengths: RangeInclusive<usize>,
) -> Result<Word, WordError> {
    let (lo, hi) = (*lengths.start(), *lengths.end());
    let targets: Vec<usize> = (lo..=hi)
        .filter(|&n| admissible_commutator_length(gens, n))
        .collect();
    if targets.is_empty() {
        return Err(WordError::NoCommutatorWord { lo, hi, gens });
    }
    for _ in 0..RESTARTS {
        let target = *rng.choose(&targets);
        if target == 0 {
            return Ok(Word::empty());
        }
        let mut w = random_reduced_word(rng, gens, target).0;
        for _ in 0..REPAIR_ROUNDS {
            let e = Word(w.clone()).exponent_vector(gens)?;
            let unbalanced: Vec<usize> = (0..gens).filter(|&i| e[i] != 0).collect();
            if unbalanced.is_empty() {
                if (lo..=hi).contains(&w.len()) {
                    return Ok(Word(w));
                }
                if w.len() < lo {
                    let g = rng.below(gens) as u32 + 1;
                    let l = Letter::new(g, rng.coin());
                    let p = rng.inclusive(0, w.len());
                    w.insert(p, l);
                    let q = rng.inclusive(0, w.len());
                    w.insert(q, l.inverse());
                } else {
                    let p = rng.below(w.len());
                    let l = w.remove(p);
                    let partners: Vec<usize> = (0..w.len()).filter(|&j| w[j] == l.inverse()).collect();
                    let q = *rng.choose(&partners);
                    w.remove(q);
                }
            } else {
                let i = *rng.choose(&unbalanced);
                let excess = Letter::new(i as u32 + 1, e[i] < 0);
                if e[i] % 2 != 0 {
                    let p = rng.inclusive(0, w.len());
                    w.insert(p, excess.inverse());
                } else {
                    let spots: Vec<usize> = (0..w.len()).filter(|&j| w[j] == excess).collect();
                    let p = *rng.choose(&spots);
                    w[p] = excess.inverse();
                }
            }
            w = Word(w).free_reduce().0;
        }
    }
    Err(WordError::NoCommutatorWord { lo, hi, gens })
}
