//! Property suites and independent oracles shared by the integration tests.

#![allow(dead_code)]

use std::collections::BTreeSet;

use dehncrypt::adversary::{class2_coords, Class2Coords, IntegerLattice};
use dehncrypt::presentations::surface_genus_two;
use dehncrypt::tietze::{NielsenMove, RelatorMove};
use dehncrypt::{Letter, Presentation, Rng, SymmetrizedSet, TietzeSession, Word};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

pub fn word_strategy(gens: i32, max_len: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec(prop_oneof![-gens..=-1, 1..=gens], 0..max_len)
        .prop_map(|v| Word::from_signed(&v).unwrap())
}

fn run<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let mut runner = TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    });
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

pub fn reduction_idempotent() -> Result<(), String> {
    run(512, word_strategy(4, 40), |w| {
        let r = w.free_reduce();
        prop_assert!(r.is_reduced());
        prop_assert_eq!(r.free_reduce(), r.clone());
        prop_assert!(w.concat(&w.inverse()).free_reduce().is_empty());
        prop_assert_eq!(w.inverse().inverse(), w.clone());
        let (core, conj) = r.cyclic_reduce();
        prop_assert!(core.is_cyclically_reduced());
        prop_assert_eq!(conj.concat(&core).concat(&conj.inverse()).free_reduce(), r);
        Ok(())
    })
}

pub fn symmetrization_closed() -> Result<(), String> {
    let rels = prop::collection::vec(word_strategy(3, 12), 1..4);
    run(256, rels, |rels| {
        let rels: Vec<Word> = rels.into_iter().map(|r| r.cyclic_core()).filter(|r| !r.is_empty()).collect();
        let set = SymmetrizedSet::from_relators(&rels);
        for m in &set.members() {
            prop_assert!(m.is_cyclically_reduced());
            prop_assert!(set.contains(&m.inverse()));
            for k in 0..m.len() {
                prop_assert!(set.contains(&m.rotate(k)));
            }
        }
        for r in &rels {
            prop_assert!(set.contains(r));
        }
        Ok(())
    })
}

pub fn class2_homomorphism() -> Result<(), String> {
    run(512, (word_strategy(4, 24), word_strategy(4, 24)), |(u, v)| {
        let cu = class2_coords(&u, 4).unwrap();
        let cv = class2_coords(&v, 4).unwrap();
        let product = class2_coords(&u.concat(&v), 4).unwrap();
        prop_assert_eq!(&product, &cu.compose(&cv));
        prop_assert_eq!(&product, &class2_coords(&u.mul(&v), 4).unwrap());
        let back = class2_coords(&u.inverse(), 4).unwrap().compose(&cu);
        prop_assert_eq!(back, Class2Coords::zero(4));
        Ok(())
    })
}

/// Rank over the rationals by fraction-free elimination.
pub fn rational_rank(rows: &[Vec<i64>]) -> usize {
    let mut m: Vec<Vec<i128>> = rows.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&i| m[i][c] != 0) else { continue };
        m.swap(rank, p);
        for i in rank + 1..m.len() {
            let (a, b) = (m[rank][c], m[i][c]);
            if b == 0 {
                continue;
            }
            let pivot = m[rank].clone();
            for (x, p) in m[i].iter_mut().zip(&pivot) {
                *x = a * *x - b * p;
            }
            let g = m[i].iter().fold(0i128, |g, &x| gcd(g, x.abs()));
            if g > 1 {
                m[i].iter_mut().for_each(|x| *x /= g);
            }
        }
        rank += 1;
    }
    rank
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Whether `target` is an integer combination of `rows` with coefficients in `-bound..=bound`.
pub fn bounded_combination(rows: &[Vec<i64>], target: &[i64], bound: i64) -> bool {
    fn go(rows: &[Vec<i64>], rest: Vec<i64>, bound: i64) -> bool {
        match rows.split_first() {
            None => rest.iter().all(|&x| x == 0),
            Some((r, tail)) => (-bound..=bound).any(|c| {
                let next = rest.iter().zip(r).map(|(t, x)| t - c * x).collect();
                go(tail, next, bound)
            }),
        }
    }
    go(rows, target.to_vec(), bound)
}

pub fn lattice_matches_brute_force() -> Result<(), String> {
    let case = (1usize..=4).prop_flat_map(|d| {
        let row = prop::collection::vec(-9i64..=9, d);
        (
            prop::collection::vec(row.clone(), 0..=3),
            row,
            prop::collection::vec(-10i64..=10, 3),
        )
    });
    run(400, case, |(rows, free, coeffs)| {
        let d = free.len();
        let lattice = IntegerLattice::from_rows(d, rows.clone()).unwrap();
        let combo: Vec<i64> = (0..d)
            .map(|j| rows.iter().zip(&coeffs).map(|(r, c)| r[j] * c).sum())
            .collect();
        prop_assert!(lattice.contains(&combo).unwrap());
        prop_assert!(lattice.rank() <= rows.len());
        prop_assert_eq!(lattice.rank(), rational_rank(&rows));
        let inside = lattice.contains(&free).unwrap();
        if bounded_combination(&rows, &free, 10) {
            prop_assert!(inside);
        }
        if inside {
            let mut with = rows.clone();
            with.push(free.clone());
            prop_assert_eq!(rational_rank(&with), rational_rank(&rows));
        }
        Ok(())
    })
}

/// One random Tietze move; moves whose preconditions fail are skipped.
pub fn random_move(session: &mut TietzeSession, rng: &mut Rng) {
    let k = session.gens();
    let m = session.relators().len();
    match rng.below(4) {
        0 => {
            let len = rng.inclusive(1, 3);
            let s = dehncrypt::words::random_reduced_word(rng, k, len);
            session.t1_introduce(&s).unwrap();
        }
        1 => {
            let target = rng.inclusive(1, k) as u32;
            let by = rng.inclusive(1, k) as u32;
            let mv = match rng.below(3) {
                0 => NielsenMove::RightMul { target, by, inverse: rng.coin() },
                1 => NielsenMove::LeftMul { target, by, inverse: rng.coin() },
                _ => NielsenMove::Invert { target },
            };
            let _ = session.t3_nielsen(mv);
        }
        2 => {
            let index = rng.below(m);
            let other = rng.below(m);
            let mv = match rng.below(4) {
                0 => RelatorMove::Invert { index },
                1 => RelatorMove::MulRight { index, other, inverse: rng.coin() },
                2 => RelatorMove::MulLeft { index, other, inverse: rng.coin() },
                _ => RelatorMove::Conjugate {
                    index,
                    by: Letter::new(rng.inclusive(1, k) as u32, rng.coin()),
                },
            };
            let _ = session.t4_prime(mv);
        }
        _ => {
            let index = rng.below(m);
            let len = session.relators()[index].len();
            if len >= 6 {
                let start = rng.below(len);
                session.break_relator(index, start, 3).unwrap();
            }
        }
    }
}

/// Every relator of the transformed presentation maps under the
/// substitution to the identity of the original group.
pub fn tietze_keystone() -> Result<(), String> {
    let original = surface_genus_two();
    let solver = dehncrypt::DehnSolver::new(original.clone()).unwrap();
    run(64, (any::<u64>(), 1usize..=10), |(seed, moves)| {
        let mut rng = Rng::new(seed);
        let mut session = TietzeSession::new(&original);
        for _ in 0..moves {
            random_move(&mut session, &mut rng);
        }
        prop_assert_eq!(session.psi().len(), session.gens());
        for r in session.relators() {
            prop_assert!(!r.is_empty());
            let image = session.psi().apply(r).unwrap();
            prop_assert!(solver.word_problem(&image).unwrap().is_trivial());
        }
        Ok(())
    })
}

/// Products of conjugated relators are trivial in the genus-two surface group.
pub fn dehn_accepts_consequences() -> Result<(), String> {
    let p = surface_genus_two();
    let solver = dehncrypt::DehnSolver::new(p.clone()).unwrap();
    let factor = (word_strategy(4, 6), any::<bool>(), any::<usize>());
    run(256, prop::collection::vec(factor, 0..4), |factors| {
        let r = &p.relators()[0];
        let mut w = Word::empty();
        for (c, inv, rot) in factors {
            let s = if inv { r.inverse() } else { r.clone() }.rotate(rot % r.len());
            w = w.concat(&c.inverse().concat(&s).concat(&c));
        }
        let v = solver.word_problem(&w).unwrap();
        prop_assert!(v.is_trivial());
        prop_assert!(v.steps <= w.len());
        Ok(())
    })
}

pub type Suite = (&'static str, fn() -> Result<(), String>);

pub fn suites() -> Vec<Suite> {
    vec![
        ("reduction_idempotent", reduction_idempotent),
        ("symmetrization_closed", symmetrization_closed),
        ("class2_homomorphism", class2_homomorphism),
        ("lattice_matches_brute_force", lattice_matches_brute_force),
        ("tietze_keystone", tietze_keystone),
        ("dehn_accepts_consequences", dehn_accepts_consequences),
    ]
}

/// Longest common prefix of two distinct words among all cyclic
/// permutations of the relators and their inverses, by exhaustive comparison.
pub fn brute_max_piece(p: &Presentation) -> usize {
    let mut forms = BTreeSet::new();
    for r in p.relators() {
        let r = r.cyclic_core();
        for base in [r.clone(), r.inverse()] {
            for k in 0..base.len() {
                forms.insert(base.rotate(k).to_signed());
            }
        }
    }
    let forms: Vec<Vec<i32>> = forms.into_iter().collect();
    let mut best = 0;
    for (i, a) in forms.iter().enumerate() {
        for b in &forms[i + 1..] {
            best = best.max(a.iter().zip(b).take_while(|(x, y)| x == y).count());
        }
    }
    best
}
