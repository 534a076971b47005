//! Token showup and station verification against growing blocklists.

use aidkit::blocklist::Blocklist;
use aidkit::games::kit::KitScheme;
use aidkit::protocol::{CardSystem, PhoneSystem, SystemParams};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

const BL_SIZES: [usize; 4] = [0, 128, 512, 1024];

fn bench_system<S: KitScheme>(c: &mut Criterion) {
    let params = SystemParams::default();
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let rs = S::setup_rs(&mut rng);
    let pk = S::public_key(&rs);
    let mut token = S::setup_token(&pk);
    let req = S::prepare_reg(&mut token, &mut rng).unwrap();
    let (resp, _) = S::process_reg(&rs, 2, &req, &mut rng).unwrap();
    S::finish_reg(&mut token, &resp, &mut rng).unwrap();
    let pool: Vec<_> = (0..1024).map(|_| S::random_revocation(&mut rng)).collect();

    let mut group = c.benchmark_group(format!("{}_showup", S::NAME));
    group.sample_size(10);
    let mut epoch = 0;
    for size in BL_SIZES {
        let bl = Blocklist::from_entries(pool[..size].iter().cloned());
        group.bench_with_input(BenchmarkId::from_parameter(size), &bl, |b, bl| {
            b.iter(|| {
                epoch += 1;
                S::showup(&params, &mut token, epoch, bl, &mut rng)
                    .unwrap()
                    .unwrap()
            })
        });
    }
    group.finish();

    let mut group = c.benchmark_group(format!("{}_verify", S::NAME));
    group.sample_size(10);
    for size in BL_SIZES {
        let bl = Blocklist::from_entries(pool[..size].iter().cloned());
        epoch += 1;
        let showup = S::showup(&params, &mut token, epoch, &bl, &mut rng)
            .unwrap()
            .unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(size), &bl, |b, bl| {
            b.iter(|| assert!(S::verify_ent(&params, &pk, epoch, &showup, bl)))
        });
    }
    group.finish();
}

fn card(c: &mut Criterion) {
    bench_system::<CardSystem>(c);
}

fn phone(c: &mut Criterion) {
    bench_system::<PhoneSystem>(c);
}

criterion_group!(benches, card, phone);
criterion_main!(benches);
