use brwlab::engine::{simulate_tree, BrwParams};
use brwlab::laws::{BranchingLaw, DisplacementSpec};
use brwlab::rwalk::renewal_r;
use brwlab::seed::rng_from_seed;
use brwlab::spine::sample_spine_step;
use brwlab::thermo::partition_trace;
use criterion::{black_box, criterion_group, criterion_main, Criterion};

fn tree(c: &mut Criterion) {
    let params = BrwParams::new(BranchingLaw::default(), 10).unwrap();
    let mut seed = 0u64;
    c.bench_function("simulate_tree n=10", |b| {
        b.iter(|| {
            seed += 1;
            simulate_tree(&params, seed).unwrap()
        })
    });
    let betas: Vec<f64> = (1..=40).map(|i| i as f64 * 0.1).collect();
    c.bench_function("partition_trace n=10, 40 betas", |b| {
        b.iter(|| {
            seed += 1;
            partition_trace(&params, &betas, seed).unwrap()
        })
    });
}

fn laws(c: &mut Criterion) {
    let spec = DisplacementSpec::default();
    let law = BranchingLaw::hyp2(spec.clone());
    let mut rng = rng_from_seed(7);
    c.bench_function("sample_x", |b| b.iter(|| spec.sample_x(&mut rng)));
    c.bench_function("sample_child_displacement", |b| {
        b.iter(|| spec.sample_child_displacement(&mut rng))
    });
    c.bench_function("sample_spine_step", |b| b.iter(|| sample_spine_step(&law, &mut rng)));
}

fn walks(c: &mut Criterion) {
    let spec = DisplacementSpec::default();
    c.bench_function("renewal_r x=50, 100 walks", |b| {
        b.iter(|| renewal_r(&spec, black_box(&[50.0]), 100, 1_000_000, 3, 1).unwrap())
    });
}

criterion_group!(benches, tree, laws, walks);
criterion_main!(benches);
