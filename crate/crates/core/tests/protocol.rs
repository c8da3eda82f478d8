use std::time::Instant;

use dehncrypt::adversary::{AbelianTest, VerdictKind};
use dehncrypt::codec::decrypt_word;
use dehncrypt::format;
use dehncrypt::words::{random_commutator_word, random_reduced_word};
use dehncrypt::*;

fn key(seed: u64) -> KeyPair {
    keygen(&mut Rng::new(seed), &ProtocolParams::default()).unwrap()
}

fn bits(n: usize, seed: u64) -> Vec<bool> {
    let mut rng = Rng::new(seed);
    (0..n).map(|_| rng.coin()).collect()
}

#[test]
fn round_trip() {
    let kp = key(21);
    let plain = bits(300, 1);
    let ct = encrypt(&kp.public, &ProtocolParams::default(), &plain, 4).unwrap();
    let back = decrypt(&kp.private, &ct).unwrap();
    for (i, (a, b)) in plain.iter().zip(&back).enumerate() {
        if *a {
            assert!(*b, "bit {i} was encoded as 1 but decoded as 0");
        }
    }
    let errors = plain.iter().zip(&back).filter(|(a, b)| a != b).count();
    assert!(errors <= 3, "{errors} errors");
}

#[test]
fn keys_and_ciphertexts_survive_serialization() {
    let kp = key(22);
    let pub_text = format::write_public(&kp.public);
    let priv_text = format::write_private(&kp.private);
    let public = format::parse_public(&pub_text).unwrap();
    let private = format::parse_private(&priv_text).unwrap();
    assert_eq!(public, kp.public);
    assert_eq!(format::write_public(&public), pub_text);
    assert_eq!(format::write_private(&private), priv_text);
    assert_eq!(format::public_hash(&public), *private.pubhash());

    let plain = bits(40, 2);
    let ct = encrypt(&public, &ProtocolParams::default(), &plain, 8).unwrap();
    let ct_text = format::write_ciphertext(&ct);
    let parsed = format::parse_ciphertext(&ct_text).unwrap();
    assert_eq!(parsed, ct);
    assert_eq!(decrypt(&private, &parsed).unwrap(), decrypt(&kp.private, &ct).unwrap());
}

#[test]
fn encryption_ignores_thread_count() {
    let kp = key(23);
    let plain = bits(64, 3);
    let params = ProtocolParams::default();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| encrypt(&kp.public, &params, &plain, 99).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(4));
    assert_eq!(format::write_ciphertext(&one), format::write_ciphertext(&run(3)));
}

#[test]
fn shuffle_preserves_the_private_verdict() {
    let kp = key(24);
    let enc = Encoder::new(&kp.public, &ProtocolParams::default()).unwrap();
    let mut rng = Rng::new(5);
    let k = kp.public.gens();
    let mut agreements = 0;
    for i in 0..500 {
        let w = match i % 3 {
            0 => random_reduced_word(&mut rng, k, 20),
            1 => enc.encode_one(&mut rng),
            _ => {
                let r = rng.choose(enc.factors()).clone();
                let c = random_reduced_word(&mut rng, k, 3);
                c.inverse().concat(&r).concat(&c).concat(&random_reduced_word(&mut rng, k, 2))
            }
        };
        let s = enc.shuffle(&w, 6, 2, &mut rng);
        assert_eq!(decrypt_word(&kp.private, &w).unwrap(), decrypt_word(&kp.private, &s).unwrap(), "{w}");
        agreements += 1;
    }
    assert_eq!(agreements, 500);
}

#[test]
fn shuffling_random_commutators_keeps_length() {
    let kp = key(25);
    let enc = Encoder::new(&kp.public, &ProtocolParams::default()).unwrap();
    let mut rng = Rng::new(6);
    let (mut before, mut after) = (0usize, 0usize);
    for _ in 0..200 {
        let u = random_commutator_word(&mut rng, kp.public.gens(), 65..=85).unwrap();
        let w = Word::commutator(&Word::generator(kp.public.special), &u);
        let p = rng.inclusive(5, 12);
        before += w.len();
        after += enc.shuffle(&w, w.len().div_ceil(2), enc.inserts_for(p), &mut rng).len();
    }
    let ratio = after as f64 / before as f64;
    assert!((1.0 / 1.5..=1.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn ciphertext_words_evade_the_abelian_attack() {
    let kp = key(26);
    let test = AbelianTest::new(&kp.public.presentation);
    let ct = encrypt(&kp.public, &ProtocolParams::default(), &bits(100, 7), 1).unwrap();
    for w in &ct.words {
        assert_eq!(test.attack(w).unwrap().kind, VerdictKind::Inconclusive, "{w}");
    }
}

#[test]
fn decryption_edge_cases() {
    let kp = key(27);
    assert!(decrypt(&kp.private, &Ciphertext::default()).unwrap().is_empty());
    for r in kp.public.presentation.relators() {
        assert!(decrypt_word(&kp.private, r).unwrap());
    }
    let stray = Word::generator(kp.public.gens() as u32 + 1);
    assert!(decrypt_word(&kp.private, &stray).is_err());
}

#[test]
fn dehn_time_grows_at_most_quadratically() {
    let kp = key(28);
    let k = kp.private.presentation().gens();
    let solver = kp.private.solver();
    let mut rng = Rng::new(9);
    let mut time = |n: usize| {
        let words: Vec<Word> = (0..20).map(|_| random_reduced_word(&mut rng, k, n)).collect();
        let t = Instant::now();
        for w in &words {
            solver.word_problem(w).unwrap();
        }
        t.elapsed().as_secs_f64()
    };
    time(500);
    let small = time(2_000).max(1e-4);
    let large = time(8_000);
    assert!(large / small < 16.0 * 4.0, "{small} -> {large}");
}
