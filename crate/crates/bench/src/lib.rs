//! Shared helpers for the benchmarks.

use dehncrypt::words::random_reduced_word;
use dehncrypt::{Rng, Word};

/// A product of conjugated relators with at least `len` letters.
pub fn trivial_word(rng: &mut Rng, relators: &[Word], gens: usize, len: usize) -> Word {
    let mut w = Word::empty();
    while w.len() < len {
        let r = rng.choose(relators);
        let c = random_reduced_word(rng, gens, 3);
        w = w.concat(&c.inverse().concat(r).concat(&c));
    }
    w
}
