//! Encoding bits as words over the public generators, and decoding them
//! with the private key.

use std::collections::HashMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::keygen::{PrivateKey, ProtocolParams, PublicKey};
use crate::presentations::{SymmetrizedSet, WpError};
use crate::rng::Rng;
use crate::tietze::TietzeError;
use crate::words::{random_commutator_word, random_reduced_word, Letter, Word, WordError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CodecError {
    #[error("public key has no relators of length 3 or 4")]
    NoShortRelators,
    #[error(transparent)]
    Word(#[from] WordError),
    #[error(transparent)]
    Tietze(#[from] TietzeError),
    #[error(transparent)]
    Wp(#[from] WpError),
}

/// One word per plaintext bit.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Ciphertext {
    pub words: Vec<Word>,
}

impl Ciphertext {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn mean_len(&self) -> f64 {
        if self.words.is_empty() {
            0.0
        } else {
            self.words.iter().map(Word::len).sum::<usize>() as f64 / self.words.len() as f64
        }
    }

    pub fn max_len(&self) -> usize {
        self.words.iter().map(Word::len).max().unwrap_or(0)
    }
}

/// Per-key tables for encoding: the symmetrized short public relators and
/// the two-letter rewrites they induce.
#[derive(Clone, Debug)]
pub struct Encoder {
    gens: usize,
    special: u32,
    params: ProtocolParams,
    factors: Vec<Word>,
    rewrites: HashMap<(Letter, Letter), Vec<Word>>,
}

impl Encoder {
    pub fn new(public: &PublicKey, params: &ProtocolParams) -> Result<Self, CodecError> {
        let short: Vec<Word> = public
            .presentation
            .relators()
            .iter()
            .filter(|r| matches!(r.len(), 3 | 4))
            .cloned()
            .collect();
        if short.is_empty() {
            return Err(CodecError::NoShortRelators);
        }
        let factors = SymmetrizedSet::from_relators(&short).members();
        let mut rewrites: HashMap<(Letter, Letter), Vec<Word>> = HashMap::new();
        for m in &factors {
            let l = m.letters();
            let rest = m.subword(2, m.len()).inverse();
            let slot = rewrites.entry((l[0], l[1])).or_default();
            if !slot.contains(&rest) {
                slot.push(rest);
            }
        }
        Ok(Self {
            gens: public.gens(),
            special: public.special,
            params: params.clone(),
            factors,
            rewrites,
        })
    }

    /// Symmetrized public relators of length 3 or 4.
    pub fn factors(&self) -> &[Word] {
        &self.factors
    }

    /// Number of trivial pairs inserted per shuffle round for a given `p`.
    pub fn inserts_for(&self, p: usize) -> usize {
        (2 * p).div_ceil(self.gens)
    }

    /// Rewrites `w` into another word equal to it in the public group.
    ///
    /// Each round inserts `inserts` cancelling pairs at random positions,
    /// then scans left to right replacing every two-letter subword that
    /// starts a short symmetrized relator by the inverse of the rest of
    /// that relator, and finally reduces freely.
    pub fn shuffle(&self, w: &Word, rounds: usize, inserts: usize, rng: &mut Rng) -> Word {
        let mut cur = w.clone().into_letters();
        for _ in 0..rounds {
            for _ in 0..inserts {
                let x = Letter::new(rng.inclusive(1, self.gens) as u32, rng.coin());
                let pos = rng.inclusive(0, cur.len());
                cur.splice(pos..pos, [x, x.inverse()]);
            }
            let mut out = Vec::with_capacity(cur.len() + 8);
            let mut i = 0;
            while i < cur.len() {
                if i + 1 < cur.len() {
                    if let Some(choices) = self.rewrites.get(&(cur[i], cur[i + 1])) {
                        out.extend_from_slice(rng.choose(choices).letters());
                        i += 2;
                        continue;
                    }
                }
                out.push(cur[i]);
                i += 1;
            }
            cur = Word::from_letters(out).free_reduce().into_letters();
        }
        Word::from_letters(cur)
    }

    /// Uniform over reduced words of length at most 2.
    fn small_conjugator(&self, rng: &mut Rng) -> Word {
        let k = 2 * self.gens;
        let n = rng.below(1 + k + k * (k - 1));
        if n == 0 {
            Word::empty()
        } else if n <= k {
            random_reduced_word(rng, self.gens, 1)
        } else {
            random_reduced_word(rng, self.gens, 2)
        }
    }

    fn wrap(&self, u: &Word, p: usize, rng: &mut Rng) -> Word {
        let w = Word::commutator(&Word::generator(self.special), u);
        let rounds = w.len().div_ceil(2);
        self.shuffle(&w, rounds, self.inserts_for(p), rng)
    }

    /// A word trivial in the public group: the commutator of the special
    /// generator with a shuffled product of conjugated short relators.
    pub fn encode_one(&self, rng: &mut Rng) -> Word {
        let p = rng.inclusive(self.params.p_range[0], self.params.p_range[1]);
        loop {
            let mut u = Word::empty();
            for _ in 0..p {
                let s = rng.choose(&self.factors);
                let c = self.small_conjugator(rng);
                u = u.mul(&c.inverse().concat(s).concat(&c));
            }
            let u = self.shuffle(&u, p, self.inserts_for(p), rng);
            if !u.is_empty() {
                return self.wrap(&u, p, rng);
            }
        }
    }

    /// The commutator of the special generator with a random element of the
    /// commutator subgroup, shuffled. Nontrivial with high probability.
    pub fn encode_zero(&self, rng: &mut Rng) -> Word {
        let p = rng.inclusive(self.params.p_range[0], self.params.p_range[1]);
        let l = rng.inclusive(self.params.u_len[0], self.params.u_len[1]);
        let u = self.zero_core(rng, l);
        self.wrap(&u, p, rng)
    }

    /// Commutator-subgroup word of length `l` whose commutator with the
    /// special generator has length `2l + 2`.
    pub fn zero_core(&self, rng: &mut Rng, l: usize) -> Word {
        let lo = if l < 4 { 4 } else { l & !1 };
        let hi = lo.max(l);
        loop {
            let u = random_commutator_word(rng, self.gens, lo..=hi).expect("lengths are admissible");
            let ends = [u.letters()[0], u.letters()[u.len() - 1]];
            if ends.iter().all(|e| e.gen() != self.special) {
                return u;
            }
        }
    }

    pub fn encode_bit(&self, bit: bool, rng: &mut Rng) -> Word {
        if bit {
            self.encode_one(rng)
        } else {
            self.encode_zero(rng)
        }
    }
}

/// Bit `i` is encoded with the stream `(seed, i)`, so the result does not
/// depend on how the work is scheduled.
pub fn encrypt(public: &PublicKey, params: &ProtocolParams, bits: &[bool], seed: u64) -> Result<Ciphertext, CodecError> {
    if bits.is_empty() {
        return Ok(Ciphertext::default());
    }
    let enc = Encoder::new(public, params)?;
    let words = bits
        .par_iter()
        .enumerate()
        .map(|(i, &b)| enc.encode_bit(b, &mut Rng::derived(seed, i as u64)))
        .collect();
    Ok(Ciphertext { words })
}

/// `true` iff the word is trivial in the private group.
pub fn decrypt_word(private: &PrivateKey, w: &Word) -> Result<bool, CodecError> {
    w.check_gens(private.public_gens())?;
    let image = private.psi().apply(w)?;
    Ok(private.solver().word_problem(&image)?.is_trivial())
}

pub fn decrypt(private: &PrivateKey, ct: &Ciphertext) -> Result<Vec<bool>, CodecError> {
    ct.words.par_iter().map(|w| decrypt_word(private, w)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presentations::Presentation;

    fn w(s: &str) -> Word {
        Word::from_compact(s).unwrap()
    }

    fn toy_key() -> PublicKey {
        PublicKey {
            presentation: Presentation::new(4, vec![w("abcd")]).unwrap(),
            special: 1,
        }
    }

    #[test]
    fn two_letter_rewrites() {
        let enc = Encoder::new(&toy_key(), &ProtocolParams::default()).unwrap();
        let mut rng = Rng::new(0);
        assert_eq!(enc.shuffle(&w("ab"), 1, 0, &mut rng), w("DC"));
        assert_eq!(enc.shuffle(&w("bc"), 1, 0, &mut rng), w("AD"));
        assert_eq!(enc.factors().len(), 8);
    }

    #[test]
    fn zero_rounds_is_identity() {
        let enc = Encoder::new(&toy_key(), &ProtocolParams::default()).unwrap();
        let x = w("abAcdB");
        assert_eq!(enc.shuffle(&x, 0, 3, &mut Rng::new(1)), x);
    }

    #[test]
    fn inserts_round_up() {
        let enc = Encoder::new(&toy_key(), &ProtocolParams::default()).unwrap();
        assert_eq!(enc.inserts_for(5), 3);
        assert_eq!(enc.inserts_for(4), 2);
    }

    #[test]
    fn needs_short_relators() {
        let key = PublicKey {
            presentation: Presentation::new(2, vec![w("abababAB")]).unwrap(),
            special: 1,
        };
        assert_eq!(
            Encoder::new(&key, &ProtocolParams::default()).unwrap_err(),
            CodecError::NoShortRelators
        );
    }

    #[test]
    fn exponent_sums_stay_in_the_relator_lattice() {
        let enc = Encoder::new(&toy_key(), &ProtocolParams::default()).unwrap();
        let mut rng = Rng::new(3);
        for bit in [true, false, true, false] {
            let x = enc.encode_bit(bit, &mut rng);
            assert!(x.is_reduced());
            let e = x.exponent_vector(4).unwrap();
            assert!(e.iter().all(|&v| v == e[0]), "{x}");
        }
        let u = w("abAB");
        assert_eq!(enc.wrap(&u, 5, &mut rng).exponent_vector(4).unwrap(), vec![0; 4]);
        assert_eq!(Word::commutator(&Word::generator(1), &u).exponent_vector(4).unwrap(), vec![0; 4]);
    }

    #[test]
    fn zero_core_lengths() {
        let enc = Encoder::new(&toy_key(), &ProtocolParams::default()).unwrap();
        let mut rng = Rng::new(4);
        for l in [4, 9, 65, 80] {
            let u = enc.zero_core(&mut rng, l);
            assert!(u.len() == l || u.len() == l - 1, "{l} {}", u.len());
            assert_eq!(Word::commutator(&Word::generator(1), &u).len(), 2 * u.len() + 2);
        }
    }

    #[test]
    fn ciphertext_shape() {
        let key = toy_key();
        let params = ProtocolParams::default();
        assert!(encrypt(&key, &params, &[], 1).unwrap().is_empty());
        let ct = encrypt(&key, &params, &[true, false], 1).unwrap();
        assert_eq!(ct.len(), 2);
        assert_eq!(ct, encrypt(&key, &params, &[true, false], 1).unwrap());
        assert!(ct.max_len() as f64 >= ct.mean_len());
    }
}
