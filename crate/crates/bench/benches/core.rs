use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use gree_bench::{entangled_states, random_states};
use gree_core::fock::{fock_apply_squeeze, fock_relative_entropy_with, fock_thermal, SqueezeKind};
use gree_core::gree::{gree, gree_tmst, GreeOptions};
use gree_core::{cm_to_em, em_to_cm, relative_entropy, williamson};

fn transforms(c: &mut Criterion) {
    for n in [1, 2, 3] {
        let states = random_states(n, 16, 1);
        c.bench_function(&format!("williamson/n={n}"), |b| {
            b.iter(|| states.iter().map(|s| williamson(s.matrix()).unwrap().gammas[0]).sum::<f64>())
        });
        c.bench_function(&format!("cm_to_em/n={n}"), |b| {
            b.iter(|| states.iter().map(|s| cm_to_em(s).unwrap().matrix()[(0, 0)]).sum::<f64>())
        });
        let ems: Vec<_> = states.iter().map(|s| cm_to_em(s).unwrap()).collect();
        c.bench_function(&format!("em_to_cm/n={n}"), |b| {
            b.iter(|| ems.iter().map(|m| em_to_cm(m).unwrap().matrix()[(0, 0)]).sum::<f64>())
        });
        c.bench_function(&format!("relative_entropy/n={n}"), |b| {
            b.iter(|| {
                states
                    .iter()
                    .zip(ems.iter().rev())
                    .map(|(s, m)| relative_entropy(s, m).map(|r| r.value).unwrap_or(0.0))
                    .sum::<f64>()
            })
        });
    }
}

fn gree_search(c: &mut Criterion) {
    let mut group = c.benchmark_group("gree");
    group.sample_size(10);
    let opts = GreeOptions::default();
    for (name, state) in entangled_states() {
        group.bench_function(name, |b| b.iter(|| gree(&state, &opts).unwrap().value));
    }
    group.bench_function("tmst_closed_form", |b| b.iter(|| gree_tmst(1.5, 0.9).unwrap().value));
    group.finish();
}

fn fock(c: &mut Criterion) {
    let mut group = c.benchmark_group("fock");
    group.sample_size(10);
    let d = 30;
    let base = fock_thermal(1.2, d).unwrap().product(&fock_thermal(0.9, d).unwrap());
    group.bench_function("two_mode_squeeze/d=30", |b| {
        b.iter(|| fock_apply_squeeze(&base, SqueezeKind::TwoMode, 0.4, &[0, 1]).unwrap().trace())
    });
    let rho = fock_apply_squeeze(&base, SqueezeKind::TwoMode, 0.4, &[0, 1]).unwrap();
    group.bench_function("relative_entropy/d=30", |b| {
        b.iter_batched(|| base.clone(), |s| fock_relative_entropy_with(&rho, &s, false).unwrap().value, BatchSize::LargeInput)
    });
    group.finish();
}

criterion_group!(benches, transforms, gree_search, fock);
criterion_main!(benches);
