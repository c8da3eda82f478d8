//! Key generation: a random small cancellation presentation, diffused by
//! Tietze moves, abridged, and extended by the special relator.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::presentations::{random_presentation, DehnSolver, Lambda, Presentation, PresentationParams};
use crate::rng::Rng;
use crate::tietze::{NielsenMove, RelatorMove, SubstitutionTable, TietzeError, TietzeSession};
use crate::words::{random_reduced_word, Letter, Word};

/// Relators of at most this length count as short.
pub const SHORT_LEN: usize = 4;

const DISCARD_TRIES: usize = 1000;

/// Tunable parameters of the scheme. Ranges are inclusive `[lo, hi]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolParams {
    /// Generators of the seed presentation.
    pub gens: [usize; 2],
    /// Relators of the seed presentation.
    pub relators: [usize; 2],
    /// Relator lengths of the seed presentation; also the length of words
    /// introduced by T1 moves while mixing.
    pub relator_len: [usize; 2],
    /// Number of commutator factors in the special relator.
    pub special_factors: usize,
    /// Random T1/T3 moves applied while mixing.
    pub tietze_budget: usize,
    /// Relator moves applied before mixing, per relator.
    pub premix_factor: usize,
    /// Breaking stops once this fraction of relators is short.
    pub short_fraction: f64,
    /// Fraction of relators withheld from the public key.
    pub discard_fraction: f64,
    /// Minimum fraction of short relators among the published ones.
    pub min_public_short: f64,
    /// Factors in the product behind a 1-encoding.
    pub p_range: [usize; 2],
    /// Length of the commutator-subgroup word behind a 0-encoding.
    pub u_len: [usize; 2],
    /// Full pipeline restarts before giving up.
    pub retry_cap: usize,
    /// Seed draws per pipeline attempt before giving up.
    pub seed_retry_cap: usize,
    /// Trivial-group preset to mix in, if any.
    pub pad_preset: Option<usize>,
}

impl Default for ProtocolParams {
    fn default() -> Self {
        Self {
            gens: [10, 20],
            relators: [10, 30],
            relator_len: [12, 20],
            special_factors: 10,
            tietze_budget: 50,
            premix_factor: 2,
            short_fraction: 0.30,
            discard_fraction: 0.70,
            min_public_short: 0.50,
            p_range: [5, 12],
            u_len: [65, 85],
            retry_cap: 50,
            seed_retry_cap: 1000,
            pad_preset: None,
        }
    }
}

impl ProtocolParams {
    pub fn validate(&self) -> Result<(), KeygenError> {
        let bad = |what: &str| Err(KeygenError::InvalidParams(what.to_string()));
        for (name, [lo, hi]) in [
            ("gens", self.gens),
            ("relators", self.relators),
            ("relator_len", self.relator_len),
            ("p_range", self.p_range),
            ("u_len", self.u_len),
        ] {
            if lo > hi {
                return bad(&format!("{name}: empty range [{lo}, {hi}]"));
            }
        }
        if self.gens[0] < 2 {
            return bad("gens: need at least 2 generators");
        }
        if self.relators[0] < 1 || self.relator_len[0] < 1 {
            return bad("relators and relator_len must be positive");
        }
        if self.u_len[1] < 4 {
            return bad("u_len: no commutator words that short");
        }
        for (name, f) in [
            ("short_fraction", self.short_fraction),
            ("discard_fraction", self.discard_fraction),
            ("min_public_short", self.min_public_short),
        ] {
            if !(0.0..=1.0).contains(&f) {
                return bad(&format!("{name}: {f} is not in [0, 1]"));
            }
        }
        if self.discard_fraction >= 1.0 {
            return bad("discard_fraction: nothing would be published");
        }
        if self.retry_cap == 0 || self.seed_retry_cap == 0 {
            return bad("retry caps must be positive");
        }
        Ok(())
    }

    pub fn presentation_params(&self) -> PresentationParams {
        PresentationParams {
            gens: self.gens[0]..=self.gens[1],
            relators: self.relators[0]..=self.relators[1],
            lengths: self.relator_len[0]..=self.relator_len[1],
        }
    }
}

/// Why pipeline attempts were thrown away.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct KeygenStats {
    pub attempts: usize,
    pub seed_draws: usize,
    pub seed_failures: usize,
    pub unsatisfiable_discards: usize,
    pub oversized_keys: usize,
    pub final_not_small_cancellation: usize,
    pub collisions: usize,
}

impl fmt::Display for KeygenStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "attempts={} seed_draws={} seed_failures={} unsatisfiable_discards={} oversized_keys={} final_not_c6={} collisions={}",
            self.attempts,
            self.seed_draws,
            self.seed_failures,
            self.unsatisfiable_discards,
            self.oversized_keys,
            self.final_not_small_cancellation,
            self.collisions
        )
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KeygenError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("no small cancellation presentation after {draws} draws")]
    SeedExhausted { draws: usize },
    #[error("no discard leaves {needed} short relators among {keep} survivors ({short} short of {total})")]
    ConstraintUnsatisfiable {
        short: usize,
        total: usize,
        keep: usize,
        needed: usize,
    },
    #[error("key generation gave up: {0}")]
    RetryExhausted(KeygenStats),
    #[error(transparent)]
    Tietze(#[from] TietzeError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PublicKey {
    pub presentation: Presentation,
    /// Index (1-based) of the generator forced into the commutator subgroup.
    pub special: u32,
}

impl PublicKey {
    pub fn gens(&self) -> usize {
        self.presentation.gens()
    }

    /// The special relator is last.
    pub fn special_relator(&self) -> &Word {
        self.presentation.relators().last().expect("public key has relators")
    }
}

#[derive(Clone, Debug)]
pub struct PrivateKey {
    solver: DehnSolver,
    special: u32,
    psi: SubstitutionTable,
    pubhash: [u8; 32],
}

impl PrivateKey {
    pub fn new(presentation: Presentation, special: u32, psi: SubstitutionTable, pubhash: [u8; 32]) -> Result<Self, crate::presentations::WpError> {
        Ok(Self {
            solver: DehnSolver::new(presentation)?,
            special,
            psi,
            pubhash,
        })
    }

    pub fn presentation(&self) -> &Presentation {
        self.solver.presentation()
    }

    pub fn solver(&self) -> &DehnSolver {
        &self.solver
    }

    pub fn special(&self) -> u32 {
        self.special
    }

    pub fn psi(&self) -> &SubstitutionTable {
        &self.psi
    }

    /// SHA-256 of the serialized public key this key belongs to.
    pub fn pubhash(&self) -> &[u8; 32] {
        &self.pubhash
    }

    /// Public generator count.
    pub fn public_gens(&self) -> usize {
        self.psi.len()
    }
}

#[derive(Clone, Debug)]
pub struct KeyPair {
    pub public: PublicKey,
    pub private: PrivateKey,
    pub stats: KeygenStats,
}

fn is_short(w: &Word) -> bool {
    w.cyclic_core().len() <= SHORT_LEN
}

/// Random presentation satisfying C'(1/6). Returns it with the number of draws used.
pub fn generate_seed_presentation(rng: &mut Rng, params: &ProtocolParams) -> Result<(Presentation, usize), KeygenError> {
    let pp = params.presentation_params();
    for draw in 1..=params.seed_retry_cap {
        let p = random_presentation(rng, &pp);
        if p.verify_c_prime(Lambda::SIXTH).satisfies_lambda {
            return Ok((p, draw));
        }
    }
    Err(KeygenError::SeedExhausted {
        draws: params.seed_retry_cap,
    })
}

fn random_relator_move(rng: &mut Rng, s: &TietzeSession) -> RelatorMove {
    let m = s.relators().len();
    let index = rng.below(m);
    let other = if m > 1 { (index + 1 + rng.below(m - 1)) % m } else { index };
    match rng.below(if m > 1 { 4 } else { 2 }) {
        0 => RelatorMove::Invert { index },
        1 => RelatorMove::Conjugate {
            index,
            by: Letter::new(rng.inclusive(1, s.gens()) as u32, rng.coin()),
        },
        2 => RelatorMove::MulRight {
            index,
            other,
            inverse: rng.coin(),
        },
        _ => RelatorMove::MulLeft {
            index,
            other,
            inverse: rng.coin(),
        },
    }
}

fn random_nielsen_move(rng: &mut Rng, gens: usize) -> NielsenMove {
    let target = rng.inclusive(1, gens) as u32;
    let by = (target as usize % gens + rng.below(gens - 1)) as u32 % gens as u32 + 1;
    let inverse = rng.coin();
    match rng.below(3) {
        0 => NielsenMove::RightMul { target, by, inverse },
        1 => NielsenMove::LeftMul { target, by, inverse },
        _ => NielsenMove::Invert { target },
    }
}

fn short_fraction(s: &TietzeSession) -> f64 {
    let lens = s.relator_lengths();
    lens.iter().filter(|&&l| l <= SHORT_LEN).count() as f64 / lens.len() as f64
}

/// Diffuses `gamma` by Tietze moves, then publishes a subset of the relators.
pub fn mix_and_abridge(rng: &mut Rng, gamma: &Presentation, params: &ProtocolParams) -> Result<(TietzeSession, Presentation), KeygenError> {
    let mut s = TietzeSession::new(gamma);
    for _ in 0..params.premix_factor * gamma.relators().len() {
        let mv = random_relator_move(rng, &s);
        match s.t4_prime(mv) {
            Ok(()) | Err(TietzeError::DegenerateRelator(_)) => {}
            Err(e) => return Err(e.into()),
        }
    }
    if let Some(preset) = params.pad_preset {
        s.pad_with_trivial_group(rng, preset)?;
    }
    // New generators are defined by words in the generators present before
    // mixing; words in all current generators make psi grow geometrically.
    let base_gens = s.gens();
    let mut done = 0;
    while done < params.tietze_budget {
        if rng.coin() {
            let len = rng.inclusive(params.relator_len[0], params.relator_len[1]);
            let w = random_reduced_word(rng, base_gens, len);
            if s.psi().apply(&w)?.is_empty() {
                continue;
            }
            s.t1_introduce(&w)?;
        } else {
            let mv = random_nielsen_move(rng, s.gens());
            s.t3_nielsen(mv)?;
        }
        done += 1;
    }
    while short_fraction(&s) < params.short_fraction {
        let long: Vec<usize> = s
            .relator_lengths()
            .iter()
            .enumerate()
            .filter(|(_, &l)| l > SHORT_LEN)
            .map(|(i, _)| i)
            .collect();
        let i = *rng.choose(&long);
        let len = s.relator_lengths()[i];
        // Three-letter carves leave length-4 relators behind. Length-3
        // relators make shuffling erase trivial words: `ab -> C` is
        // immediately followed by the cancellation of `Cc`.
        let carve = if len >= 6 { 3 } else { 2 };
        s.break_relator(i, rng.below(len), carve)?;
    }

    let total = s.relators().len();
    let keep = (((1.0 - params.discard_fraction) * total as f64).round() as usize).clamp(1, total);
    let needed = (params.min_public_short * keep as f64).ceil() as usize;
    let (short, long): (Vec<usize>, Vec<usize>) = (0..total).partition(|&i| is_short(&s.relators()[i]));
    let unsatisfiable = KeygenError::ConstraintUnsatisfiable {
        short: short.len(),
        total,
        keep,
        needed,
    };
    let mut chosen = None;
    for _ in 0..DISCARD_TRIES {
        let pick = rng.sample_indices(total, keep);
        if pick.iter().filter(|&&i| is_short(&s.relators()[i])).count() >= needed {
            chosen = Some(pick);
            break;
        }
    }
    let mut chosen = match chosen {
        Some(c) => c,
        None => {
            // Uniform subsets almost never meet the constraint once survivors
            // number in the dozens; draw the short/long split explicitly.
            let lo = needed.max(keep.saturating_sub(long.len()));
            let hi = keep.min(short.len());
            if lo > hi {
                return Err(unsatisfiable);
            }
            let n_short = rng.inclusive(lo, hi);
            let mut c: Vec<usize> = rng.sample_indices(short.len(), n_short).into_iter().map(|i| short[i]).collect();
            c.extend(rng.sample_indices(long.len(), keep - n_short).into_iter().map(|i| long[i]));
            c
        }
    };
    chosen.sort_unstable();
    let relators = chosen.iter().map(|&i| s.relators()[i].clone()).collect();
    let public = Presentation::new(s.gens(), relators).expect("session relators are non-trivial");
    Ok((s, public))
}

/// Result of [`add_special_relator`].
#[derive(Clone, Debug)]
pub struct Extended {
    pub public: Presentation,
    pub special: u32,
    pub private: Presentation,
}

/// Appends `x^-1 * prod_j [x, w_j]` to the public presentation for a random
/// generator `x`, and its image under the session's substitution to the
/// seed presentation.
pub fn add_special_relator(rng: &mut Rng, session: &TietzeSession, public: &Presentation, factors: usize) -> Result<Extended, KeygenError> {
    let gens = public.gens();
    assert!(gens >= 2, "special relator needs two generators");
    let special = rng.inclusive(1, gens) as u32;
    let x = Word::generator(special);
    let mut relator = x.inverse();
    let mut j = 0;
    while j < factors {
        let len = rng.inclusive(1, 2);
        let w = random_reduced_word(rng, gens, len);
        if w.letters().iter().all(|l| l.gen() == special) {
            continue;
        }
        relator = relator.concat(&Word::commutator(&x, &w));
        j += 1;
    }
    let image = session.psi().apply(&relator)?;
    let public = public.with_relator(relator).expect("special relator is non-trivial");
    let private = session
        .original()
        .with_relator(image)
        .map_err(|_| KeygenError::InvalidParams("special relator maps to the identity".into()))?;
    Ok(Extended { public, special, private })
}

/// Full pipeline with restarts.
pub fn keygen(rng: &mut Rng, params: &ProtocolParams) -> Result<KeyPair, KeygenError> {
    params.validate()?;
    let mut stats = KeygenStats::default();
    for _ in 0..params.retry_cap {
        stats.attempts += 1;
        let gamma = match generate_seed_presentation(rng, params) {
            Ok((g, draws)) => {
                stats.seed_draws += draws;
                g
            }
            Err(KeygenError::SeedExhausted { draws }) => {
                stats.seed_draws += draws;
                stats.seed_failures += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let (session, public) = match mix_and_abridge(rng, &gamma, params) {
            Ok(x) => x,
            Err(KeygenError::ConstraintUnsatisfiable { .. }) => {
                stats.unsatisfiable_discards += 1;
                continue;
            }
            Err(KeygenError::Tietze(TietzeError::KeyTooLarge { .. })) => {
                stats.oversized_keys += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let seed_keys: std::collections::HashSet<Word> = gamma.relators().iter().map(Word::cyclic_key).collect();
        if public.relators().iter().any(|r| seed_keys.contains(&r.cyclic_key())) {
            stats.collisions += 1;
            continue;
        }
        let ext = match add_special_relator(rng, &session, &public, params.special_factors) {
            Ok(x) => x,
            Err(KeygenError::Tietze(TietzeError::KeyTooLarge { .. })) => {
                stats.oversized_keys += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let public = PublicKey {
            presentation: ext.public,
            special: ext.special,
        };
        let pubhash = crate::format::public_hash(&public);
        let private = match PrivateKey::new(ext.private, ext.special, session.psi().clone(), pubhash) {
            Ok(k) => k,
            Err(_) => {
                stats.final_not_small_cancellation += 1;
                continue;
            }
        };
        return Ok(KeyPair { public, private, stats });
    }
    Err(KeygenError::RetryExhausted(stats))
}
