use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use num_complex::Complex64;

use scma_core::channel::{sample_channel, snr_to_n0, superpose, trial_rng};
use scma_core::detector::{fn_update, mpad_block, MpaWorkspace, UnitObservation};
use scma_core::mapper::encode_block;
use scma_core::sim::{Scheme, SimSystem, SweepConfig};

struct Fixture {
    sys: SimSystem,
    y: Vec<Complex64>,
    gains: Vec<Vec<Complex64>>,
    n0: f64,
}

fn fixture(scheme: Scheme, snr_db: f64) -> Fixture {
    let cfg = SweepConfig::new(scheme, vec![snr_db]);
    let sys = SimSystem::build(&cfg).unwrap();
    let mut rng = trial_rng(1, 0, 0);
    let m = sys.config.block_bits();
    let blocks: Vec<_> = (0..sys.users())
        .map(|j| {
            let bits: Vec<u8> = (0..m).map(|i| ((i + j) % 2) as u8).collect();
            encode_block(j, &bits, &sys.config, &sys.mapper, &sys.families).unwrap()
        })
        .collect();
    let k = sys.resources();
    let channel = sample_channel(sys.users(), sys.config.n * k, k, cfg.fading, &mut rng);
    let n0 = snr_to_n0(snr_db, &sys.config).n0;
    let y = superpose(&blocks, &channel, n0, &mut rng).unwrap();
    Fixture {
        sys,
        y,
        gains: channel.gains,
        n0,
    }
}

fn bench_fn_update(c: &mut Criterion) {
    let f = fixture(Scheme::Hcpi, 10.0);
    let alphabet = &f.sys.alphabet;
    let q = alphabet.len();
    let users = alphabet.graph().xi(0).to_vec();
    let gains: Vec<Complex64> = users.iter().map(|&j| f.gains[j][0]).collect();
    let uniform = vec![1.0 / q as f64; q];
    let incoming: Vec<&[f64]> = users.iter().map(|_| uniform.as_slice()).collect();
    c.bench_function("fn_update_q9_df3", |b| {
        b.iter(|| fn_update(0, black_box(f.y[0]), &gains, f.n0, alphabet, &incoming))
    });
}

fn bench_mc_mpa(c: &mut Criterion) {
    let mut group = c.benchmark_group("mc_mpa_unit");
    for (name, scheme) in [("cscma", Scheme::Cscma), ("hcpi", Scheme::Hcpi)] {
        let f = fixture(scheme, 10.0);
        let k = f.sys.resources();
        let mut ws = MpaWorkspace::new(&f.sys.alphabet);
        group.bench_function(name, |b| {
            b.iter(|| {
                let obs = UnitObservation::of_block(&f.y, &f.gains, 0, k);
                ws.run(0, black_box(&obs), f.n0, &f.sys.alphabet, 6)
            })
        });
    }
    group.finish();
}

fn bench_block(c: &mut Criterion) {
    let f = fixture(Scheme::Hcpi, 10.0);
    let mut ws = MpaWorkspace::new(&f.sys.alphabet);
    c.bench_function("mpad_block_hcpi_n4", |b| {
        b.iter(|| {
            mpad_block(
                black_box(&f.y),
                &f.gains,
                f.n0,
                &f.sys.config,
                &f.sys.mapper,
                &f.sys.alphabet,
                6,
                &mut ws,
            )
        })
    });
}

criterion_group!(benches, bench_fn_update, bench_mc_mpa, bench_block);
criterion_main!(benches);
