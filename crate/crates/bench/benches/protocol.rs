use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use dehncrypt::adversary::Class2Test;
use dehncrypt::{decrypt, encrypt, keygen, ProtocolParams, Rng};

fn protocol(c: &mut Criterion) {
    let params = ProtocolParams::default();
    c.bench_function("keygen", |b| {
        let mut seed = 0;
        b.iter(|| {
            seed += 1;
            keygen(&mut Rng::new(seed), &params).unwrap()
        })
    });

    let kp = keygen(&mut Rng::new(0), &params).unwrap();
    let mut rng = Rng::new(3);
    let bits: Vec<bool> = (0..64).map(|_| rng.coin()).collect();
    c.bench_function("encrypt_64", |b| b.iter(|| encrypt(&kp.public, &params, black_box(&bits), 7).unwrap()));
    let ct = encrypt(&kp.public, &params, &bits, 7).unwrap();
    c.bench_function("decrypt_64", |b| b.iter(|| decrypt(&kp.private, black_box(&ct)).unwrap()));

    let mut group = c.benchmark_group("attacks");
    group.sample_size(10);
    group.bench_function("class2_lattice", |b| b.iter(|| Class2Test::new(black_box(&kp.public.presentation))));
    group.finish();
}

criterion_group!(benches, protocol);
criterion_main!(benches);
