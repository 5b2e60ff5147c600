use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use superspin::darkstates::find_dark_states;
use superspin::evolution::{evolve_with, IntegratorConfig};
use superspin::liealg::{close_algebra, default_max_dim, directional_ops};
use superspin::oracle::OracleModel;
use superspin::{build_gamma_waveguide, build_partition, Spacing, SuperspinState};
use superspin_bench::inverted;

/// Generator applied to a state spread over every manifold.
fn apply_generator(c: &mut Criterion) {
    let mut group = c.benchmark_group("lindbladian_apply");
    for n_sites in [12, 24, 36] {
        let (lind, rho0) = inverted(n_sites, 2, 3);
        let cfg = IntegratorConfig::default().with_t_max(0.2).with_samples(2);
        let rho = evolve_with(&rho0, &lind, &cfg, |_, _| Ok(())).unwrap();
        let mut out = SuperspinState::zeros(lind.basis().clone());
        group.bench_with_input(BenchmarkId::new("2pi_3", n_sites), &n_sites, |b, _| {
            b.iter(|| lind.apply(black_box(&rho), &mut out).unwrap())
        });
    }
    group.finish();
}

fn oracle_apply(c: &mut Criterion) {
    let spacing = Spacing::new(2, 3).unwrap();
    let model =
        OracleModel::from_coupling(&build_gamma_waveguide(8, spacing, 1.0, None).unwrap(), 0.0)
            .unwrap();
    let lind = model.lindbladian().unwrap();
    let rho = SuperspinState::fully_inverted(model.site_basis());
    let mut out = SuperspinState::zeros(lind.basis().clone());
    c.bench_function("oracle_apply/N8", |b| {
        b.iter(|| lind.apply(black_box(&rho), &mut out).unwrap())
    });
}

fn rk4_burst(c: &mut Criterion) {
    let (lind, rho0) = inverted(15, 2, 3);
    let mut cfg = IntegratorConfig::default().with_t_max(0.1).with_samples(2);
    cfg.full_positivity_check = false;
    c.bench_function("rk4_burst/N15_100_steps", |b| {
        b.iter(|| evolve_with(black_box(&rho0), &lind, &cfg, |_, _| Ok(())).unwrap())
    });
}

fn lie_closure(c: &mut Criterion) {
    let mut group = c.benchmark_group("close_algebra");
    for n_sites in [24, 96, 384] {
        let (l, r) = directional_ops(n_sites, Spacing::new(3, 4).unwrap().kd()).unwrap();
        group.bench_with_input(BenchmarkId::new("3pi_4", n_sites), &n_sites, |b, &n| {
            b.iter(|| {
                close_algebra(black_box(&[l.clone(), r.clone()]), default_max_dim(n)).unwrap()
            })
        });
    }
    group.finish();
}

fn dark_states(c: &mut Criterion) {
    let part = build_partition(18, Spacing::new(2, 3).unwrap()).unwrap();
    c.bench_function("find_dark_states/N18_m3", |b| {
        b.iter(|| find_dark_states(black_box(&part), 3).unwrap())
    });
}

criterion_group!(
    benches,
    apply_generator,
    oracle_apply,
    rk4_burst,
    lie_closure,
    dark_states
);
criterion_main!(benches);
