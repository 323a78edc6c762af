use criterion::{criterion_group, criterion_main, Criterion};
use nlslab::decomp::decompose;
use nlslab::propagate::Propagator;
use nlslab::tridiag::SymTridiag;
use nlslab_bench::{beating_state, excited_family, hamiltonian, spectrum};
use std::hint::black_box;

fn bench_tridiag(c: &mut Criterion) {
    let ham = hamiltonian(64.0, 2000);
    let op = ham.operator();
    let rhs = vec![1.0; op.len()];
    c.bench_function("tridiag factor+solve n=2000", |b| {
        b.iter(|| {
            let f = op.factor_real(black_box(-5.0)).unwrap();
            f.solve(black_box(&rhs))
        })
    });
}

fn bench_bound_modes(c: &mut Criterion) {
    let ham = hamiltonian(64.0, 2000);
    c.bench_function("bound pair n=2000", |b| b.iter(|| ham.bound_modes().unwrap()));
}

fn bench_full_spectrum(c: &mut Criterion) {
    let ham = hamiltonian(48.0, 400);
    let mut group = c.benchmark_group("spectrum");
    group.sample_size(20);
    group.bench_function("full diagonalization n=400", |b| {
        b.iter(|| nlslab::spectral::LinearSpectrum::build(black_box(&ham)).unwrap())
    });
    group.finish();
}

fn bench_step(c: &mut Criterion) {
    let spec = spectrum(64.0, 2000);
    let prop = Propagator::new(&spec, 1.0, 0.01, None).unwrap();
    let state = beating_state(&spec);
    let mut group = c.benchmark_group("propagation");
    group.sample_size(40);
    group.bench_function("split step n=2000", |b| {
        b.iter_batched(
            || state.clone(),
            |mut w| {
                prop.step(&mut w);
                w
            },
            criterion::BatchSize::LargeInput,
        )
    });
    group.finish();
}

fn bench_decompose(c: &mut Criterion) {
    let ham = hamiltonian(64.0, 2000);
    let spec = nlslab::spectral::LinearSpectrum::build(&ham).unwrap();
    let family = excited_family(&ham, 1.0);
    let state = beating_state(&spec);
    c.bench_function("mode split n=2000", |b| {
        b.iter(|| decompose(&spec, &family, black_box(&state), None).unwrap())
    });
}

fn bench_continuation(c: &mut Criterion) {
    let ham = hamiltonian(48.0, 800);
    let mut group = c.benchmark_group("branches");
    group.sample_size(30);
    group.bench_function("excited family to 1.0 n=800", |b| {
        b.iter(|| excited_family(black_box(&ham), 1.0))
    });
    group.finish();
}

fn bench_solve_shifted(c: &mut Criterion) {
    let ham = hamiltonian(64.0, 2000);
    let op = ham.operator();
    let rhs = vec![num_complex::Complex64::ONE; op.len()];
    c.bench_function("complex shifted solve n=2000", |b| {
        b.iter(|| {
            let f = op.factor(black_box(num_complex::Complex64::new(3.0, 0.5))).unwrap();
            f.solve(black_box(&rhs))
        })
    });
}

criterion_group!(
    solvers,
    bench_tridiag,
    bench_solve_shifted,
    bench_bound_modes,
    bench_full_spectrum,
    bench_continuation,
    bench_step,
    bench_decompose
);
criterion_main!(solvers);
