//! Tietze moves on a presentation, tracking the isomorphism back to the
//! starting presentation.
//!
//! A [`TietzeSession`] starts from some presentation `G` and keeps, for each
//! generator of the current presentation, a word over the generators of `G`
//! representing the same element. Relator moves leave that table alone;
//! introducing a generator adds an entry; Nielsen moves rewrite one entry.

use thiserror::Error;

use crate::presentations::Presentation;
use crate::rng::Rng;
use crate::words::{Letter, Word, WordError};

/// Longest substitution entry allowed before a session gives up.
pub const DEFAULT_ENTRY_CAP: usize = 4096;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TietzeError {
    #[error("cannot introduce a generator equal to the empty word")]
    EmptyIntroduction,
    #[error("{what} index {index} out of range (have {count})")]
    Index {
        what: &'static str,
        index: usize,
        count: usize,
    },
    #[error("move needs two distinct indices, got {0} twice")]
    SameIndex(usize),
    #[error("relator {0} would become trivial")]
    DegenerateRelator(usize),
    #[error("relator {index} has length {len}; breaking needs at least 5")]
    TooShort { index: usize, len: usize },
    #[error("cannot carve {carve} letters from a relator of length {len}")]
    BadCarve { carve: usize, len: usize },
    #[error("substitution for generator {gen} would reach {len} letters (cap {cap})")]
    KeyTooLarge { gen: usize, len: usize, cap: usize },
    #[error("no substitution entry for generator {0}")]
    MissingEntry(u32),
    #[error("no trivial-group preset {0}")]
    UnknownPreset(usize),
    #[error(transparent)]
    Word(#[from] WordError),
}

/// Images of the current generators as words over the original generators.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SubstitutionTable {
    entries: Vec<Word>,
}

impl SubstitutionTable {
    pub fn identity(gens: usize) -> Self {
        Self {
            entries: (1..=gens as u32).map(Word::generator).collect(),
        }
    }

    pub fn from_entries(entries: Vec<Word>) -> Self {
        Self { entries }
    }

    pub fn entries(&self) -> &[Word] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entry for generator `gen` (1-based).
    pub fn get(&self, gen: u32) -> Option<&Word> {
        (gen as usize).checked_sub(1).and_then(|i| self.entries.get(i))
    }

    pub fn max_entry_len(&self) -> usize {
        self.entries.iter().map(Word::len).max().unwrap_or(0)
    }

    /// Letterwise substitution followed by free reduction.
    pub fn apply(&self, w: &Word) -> Result<Word, TietzeError> {
        let mut out = Vec::new();
        for &l in w.letters() {
            let entry = self.get(l.gen()).ok_or(TietzeError::MissingEntry(l.gen()))?;
            if l.is_inverse() {
                for &x in entry.letters().iter().rev() {
                    crate::words::push_reduced(&mut out, x.inverse());
                }
            } else {
                for &x in entry.letters() {
                    crate::words::push_reduced(&mut out, x);
                }
            }
        }
        Ok(Word::from_letters(out))
    }
}

/// Elementary automorphism of the free group (type T3).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NielsenMove {
    /// `x_target -> x_target * x_by^(+-1)`
    RightMul { target: u32, by: u32, inverse: bool },
    /// `x_target -> x_by^(+-1) * x_target`
    LeftMul { target: u32, by: u32, inverse: bool },
    /// `x_target -> x_target^-1`
    Invert { target: u32 },
}

impl NielsenMove {
    pub fn inverse(self) -> Self {
        match self {
            NielsenMove::RightMul { target, by, inverse } => NielsenMove::RightMul {
                target,
                by,
                inverse: !inverse,
            },
            NielsenMove::LeftMul { target, by, inverse } => NielsenMove::LeftMul {
                target,
                by,
                inverse: !inverse,
            },
            m @ NielsenMove::Invert { .. } => m,
        }
    }

    fn target(self) -> u32 {
        match self {
            NielsenMove::RightMul { target, .. }
            | NielsenMove::LeftMul { target, .. }
            | NielsenMove::Invert { target } => target,
        }
    }

    /// Image of the target generator.
    fn image(self) -> Word {
        match self {
            NielsenMove::RightMul { target, by, inverse } => {
                Word::from_letters(vec![Letter::new(target, false), Letter::new(by, inverse)])
            }
            NielsenMove::LeftMul { target, by, inverse } => {
                Word::from_letters(vec![Letter::new(by, inverse), Letter::new(target, false)])
            }
            NielsenMove::Invert { target } => Word::from_letters(vec![Letter::new(target, true)]),
        }
    }

    /// Applies the automorphism to `w` and freely reduces.
    pub fn apply(self, w: &Word) -> Word {
        let t = self.target();
        let img = self.image();
        let img_inv = img.inverse();
        let mut out = Vec::with_capacity(w.len() + 4);
        for &l in w.letters() {
            if l.gen() == t {
                let part = if l.is_inverse() { &img_inv } else { &img };
                for &x in part.letters() {
                    crate::words::push_reduced(&mut out, x);
                }
            } else {
                crate::words::push_reduced(&mut out, l);
            }
        }
        Word::from_letters(out)
    }
}

/// Relator replacement within the same normal closure (recursive T4).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RelatorMove {
    /// `r_i -> r_i^-1`
    Invert { index: usize },
    /// `r_i -> r_i * r_j^(+-1)`
    MulRight { index: usize, other: usize, inverse: bool },
    /// `r_i -> r_j^(+-1) * r_i`
    MulLeft { index: usize, other: usize, inverse: bool },
    /// `r_i -> by^-1 * r_i * by`
    Conjugate { index: usize, by: Letter },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Move {
    Introduce(Word),
    Nielsen(NielsenMove),
    Relator(RelatorMove),
    Break { relator: usize, start: usize, carve: usize },
    Pad { preset: usize },
}

/// Balanced presentations of the trivial group.
///
/// Preset 0 is `<x,y | x y x^-1 = y^2, y x y^-1 = x^2>` and preset 1 the
/// cyclic three-generator analogue. Both collapse to one coset under
/// coset enumeration (see the tests).
pub fn trivial_group_presets() -> Vec<(usize, Vec<Word>)> {
    let w = |v: &[i32]| Word::from_signed(v).unwrap();
    vec![
        (2, vec![w(&[1, 2, -1, -2, -2]), w(&[2, 1, -2, -1, -1])]),
        (
            3,
            vec![
                w(&[1, 2, -1, -2, -2]),
                w(&[2, 3, -2, -3, -3]),
                w(&[3, 1, -3, -1, -1]),
            ],
        ),
    ]
}

/// Mutable presentation plus the isomorphism back to where it started.
///
/// Relators are stored freely reduced (not necessarily cyclically reduced),
/// so a Nielsen move followed by its inverse restores them exactly;
/// [`TietzeSession::presentation`] gives the cyclically reduced snapshot.
#[derive(Clone, Debug)]
pub struct TietzeSession {
    original: Presentation,
    gens: usize,
    relators: Vec<Word>,
    psi: SubstitutionTable,
    history: Vec<Move>,
    entry_cap: usize,
}

impl TietzeSession {
    pub fn new(start: &Presentation) -> Self {
        Self {
            original: start.clone(),
            gens: start.gens(),
            relators: start.relators().to_vec(),
            psi: SubstitutionTable::identity(start.gens()),
            history: Vec::new(),
            entry_cap: DEFAULT_ENTRY_CAP,
        }
    }

    pub fn with_entry_cap(mut self, cap: usize) -> Self {
        self.entry_cap = cap;
        self
    }

    pub fn gens(&self) -> usize {
        self.gens
    }

    /// The presentation the session started from.
    pub fn original(&self) -> &Presentation {
        &self.original
    }

    pub fn relators(&self) -> &[Word] {
        &self.relators
    }

    pub fn psi(&self) -> &SubstitutionTable {
        &self.psi
    }

    pub fn history(&self) -> &[Move] {
        &self.history
    }

    /// Current presentation with relators cyclically reduced.
    pub fn presentation(&self) -> Presentation {
        Presentation::new(self.gens, self.relators.clone())
            .expect("session relators are non-trivial")
    }

    /// Cyclically reduced length of each relator.
    pub fn relator_lengths(&self) -> Vec<usize> {
        self.relators.iter().map(|r| r.cyclic_core().len()).collect()
    }

    fn check_gen(&self, g: u32) -> Result<(), TietzeError> {
        if g == 0 || g as usize > self.gens {
            Err(TietzeError::Index {
                what: "generator",
                index: g as usize,
                count: self.gens,
            })
        } else {
            Ok(())
        }
    }

    fn check_relator(&self, i: usize) -> Result<(), TietzeError> {
        if i >= self.relators.len() {
            Err(TietzeError::Index {
                what: "relator",
                index: i,
                count: self.relators.len(),
            })
        } else {
            Ok(())
        }
    }

    fn checked_entry(&self, gen: usize, entry: Word) -> Result<Word, TietzeError> {
        if entry.len() > self.entry_cap {
            Err(TietzeError::KeyTooLarge {
                gen,
                len: entry.len(),
                cap: self.entry_cap,
            })
        } else {
            Ok(entry)
        }
    }

    fn introduce(&mut self, s: &Word) -> Result<u32, TietzeError> {
        s.check_gens(self.gens)?;
        let s = s.free_reduce();
        if s.is_empty() {
            return Err(TietzeError::EmptyIntroduction);
        }
        let y = self.gens as u32 + 1;
        let entry = self.checked_entry(y as usize, self.psi.apply(&s)?)?;
        self.gens += 1;
        self.psi.entries.push(entry);
        self.relators.push(Word::generator(y).concat(&s.inverse()));
        Ok(y)
    }

    /// T1: new generator `y` with relator `y s^-1`. Returns the index of `y`.
    pub fn t1_introduce(&mut self, s: &Word) -> Result<u32, TietzeError> {
        let y = self.introduce(s)?;
        self.history.push(Move::Introduce(s.free_reduce()));
        Ok(y)
    }

    /// T3 restricted to elementary Nielsen moves. Relators are mapped by the
    /// move; the substitution entry of the target becomes its image under the
    /// inverse move.
    pub fn t3_nielsen(&mut self, mv: NielsenMove) -> Result<(), TietzeError> {
        self.check_gen(mv.target())?;
        let new_entry = match mv {
            NielsenMove::RightMul { target, by, inverse } | NielsenMove::LeftMul { target, by, inverse } => {
                self.check_gen(by)?;
                if by == target {
                    return Err(TietzeError::SameIndex(target as usize));
                }
                let own = self.psi.get(target).unwrap();
                let other = self.psi.get(by).unwrap();
                // The inverse move multiplies by x_by^(-+1).
                let factor = if inverse { other.clone() } else { other.inverse() };
                if matches!(mv, NielsenMove::RightMul { .. }) {
                    own.mul(&factor)
                } else {
                    factor.mul(own)
                }
            }
            NielsenMove::Invert { target } => self.psi.get(target).unwrap().inverse(),
        };
        let t = mv.target();
        let new_entry = self.checked_entry(t as usize, new_entry)?;
        for r in &mut self.relators {
            *r = mv.apply(r);
        }
        self.psi.entries[t as usize - 1] = new_entry;
        self.history.push(Move::Nielsen(mv));
        Ok(())
    }

    /// T4': replace one relator by a product, inverse or conjugate. The
    /// result is stored cyclically reduced; the substitution table is unchanged.
    pub fn t4_prime(&mut self, mv: RelatorMove) -> Result<(), TietzeError> {
        let (index, replacement) = match mv {
            RelatorMove::Invert { index } => {
                self.check_relator(index)?;
                (index, self.relators[index].inverse())
            }
            RelatorMove::MulRight { index, other, inverse } | RelatorMove::MulLeft { index, other, inverse } => {
                self.check_relator(index)?;
                self.check_relator(other)?;
                if index == other {
                    return Err(TietzeError::SameIndex(index));
                }
                let o = if inverse {
                    self.relators[other].inverse()
                } else {
                    self.relators[other].clone()
                };
                let r = &self.relators[index];
                let prod = if matches!(mv, RelatorMove::MulRight { .. }) {
                    r.mul(&o)
                } else {
                    o.mul(r)
                };
                (index, prod)
            }
            RelatorMove::Conjugate { index, by } => {
                self.check_relator(index)?;
                self.check_gen(by.gen())?;
                let b = Word::from_letters(vec![by]);
                (index, b.inverse().concat(&self.relators[index]).concat(&b))
            }
        };
        let core = replacement.cyclic_core();
        if core.is_empty() {
            return Err(TietzeError::DegenerateRelator(index));
        }
        self.relators[index] = core;
        self.history.push(Move::Relator(mv));
        Ok(())
    }

    /// Cuts `carve` letters (starting at cyclic position `start`) out of a
    /// relator: a new generator `y` equal to that segment is introduced and
    /// the segment is replaced by `y`, shortening the relator by `carve - 1`.
    pub fn break_relator(&mut self, relator: usize, start: usize, carve: usize) -> Result<u32, TietzeError> {
        self.check_relator(relator)?;
        let r = self.relators[relator].cyclic_core();
        if r.len() < 5 {
            return Err(TietzeError::TooShort {
                index: relator,
                len: r.len(),
            });
        }
        if carve < 2 || carve + 2 > r.len() {
            return Err(TietzeError::BadCarve { carve, len: r.len() });
        }
        let rotated = r.rotate(start);
        let segment = rotated.subword(0, carve);
        let rest = rotated.subword(carve, rotated.len());
        let y = self.introduce(&segment)?;
        self.relators[relator] = Word::generator(y).concat(&rest);
        self.history.push(Move::Break { relator, start, carve });
        Ok(y)
    }

    /// Free product with a trivial group given by a preset balanced
    /// presentation. New generators map to the empty word. Each preset
    /// relator is rotated and possibly inverted at random.
    pub fn pad_with_trivial_group(&mut self, rng: &mut Rng, preset: usize) -> Result<(), TietzeError> {
        let presets = trivial_group_presets();
        let (q, rels) = presets.get(preset).ok_or(TietzeError::UnknownPreset(preset))?;
        let offset = self.gens as i32;
        for r in rels {
            let shifted: Vec<i32> = r.letters().iter().map(|l| l.signed().signum() * (l.gen() as i32 + offset)).collect();
            let mut w = Word::from_signed(&shifted)?.rotate(rng.below(r.len()));
            if rng.coin() {
                w = w.inverse();
            }
            self.relators.push(w);
        }
        self.gens += q;
        self.psi.entries.extend(std::iter::repeat_n(Word::empty(), *q));
        self.history.push(Move::Pad { preset });
        Ok(())
    }
}
