use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use fidsim_core::classical::{sample_random_state, ClassicalIntegrator, IntegrationParams, run_classical_ensemble};
use fidsim_core::quantum::{sample_typical_state, ChebyshevPropagator, HilbertSpec, PropagatorWork, SpinHamiltonian};
use fidsim_core::rng::{self, Domain};
use fidsim_core::{
    build_dipolar_couplings, build_nearest_neighbor, rescale_for_quantum, Coupling, FieldDirection, LatticeSpec,
    Spin, SpinKind,
};

fn field_routes(c: &mut Criterion) {
    let spec = LatticeSpec::cubic(7).unwrap();
    let table = build_dipolar_couplings(&spec, FieldDirection::D100, SpinKind::Classical).unwrap();
    let state = sample_random_state(spec.site_count(), &mut rng::stream(1, Domain::Classical, 0));
    let sparse = ClassicalIntegrator::with_sparse_fields(&table).unwrap();
    let conv = ClassicalIntegrator::with_convolution_fields(&table).unwrap();
    let mut g = c.benchmark_group("dipolar_fields_7cubed");
    g.bench_function("neighbour_sum", |b| b.iter(|| sparse.fields(black_box(&state)).unwrap()));
    g.bench_function("convolution", |b| b.iter(|| conv.fields(black_box(&state)).unwrap()));
    g.finish();
}

fn classical_ensemble(c: &mut Criterion) {
    let spec = LatticeSpec::cubic(5).unwrap();
    let table = build_dipolar_couplings(&spec, FieldDirection::D111, SpinKind::Classical).unwrap();
    let params = IntegrationParams::new(0.05, 10.0, 64, 3);
    let mut g = c.benchmark_group("classical");
    g.sample_size(10);
    g.bench_function("ensemble_5cubed_64x200_steps", |b| {
        b.iter(|| run_classical_ensemble(&table, &params, 5.0).unwrap())
    });
    g.finish();
}

fn quantum_kernels(c: &mut Criterion) {
    let chain = LatticeSpec::chain(12).unwrap();
    let classical = build_nearest_neighbor(&chain, Coupling::new(-0.41, -0.41, 0.82), SpinKind::Classical).unwrap();
    let mut g = c.benchmark_group("quantum");
    g.sample_size(10);
    for spin in [Spin::HALF, Spin::ONE] {
        let n = if spin == Spin::HALF { 16 } else { 10 };
        let spec = LatticeSpec::chain(n).unwrap();
        let t = build_nearest_neighbor(&spec, Coupling::new(-0.41, -0.41, 0.82), SpinKind::Classical).unwrap();
        let table = rescale_for_quantum(&t, spin).unwrap();
        let hs = HilbertSpec::new(n, spin).unwrap();
        let ham = SpinHamiltonian::new(&table, &hs).unwrap();
        let psi = sample_typical_state(&hs, &mut rng::stream(1, Domain::Quantum, 0));
        let mut out = psi.clone();
        g.bench_function(format!("matvec_s{}_n{n}", spin.twice()), |b| {
            b.iter(|| ham.apply_into(black_box(&psi.amplitudes), &mut out.amplitudes))
        });
    }
    let table = rescale_for_quantum(&classical, Spin::HALF).unwrap();
    let hs = HilbertSpec::new(12, Spin::HALF).unwrap();
    let prop = ChebyshevPropagator::new(SpinHamiltonian::new(&table, &hs).unwrap(), 0.2).unwrap();
    let mut psi = sample_typical_state(&hs, &mut rng::stream(2, Domain::Quantum, 0));
    let mut work = PropagatorWork::new(hs.dim());
    g.bench_function("chebyshev_step_shalf_n12_dt0.2", |b| b.iter(|| prop.step(&mut psi.amplitudes, &mut work)));
    g.finish();
}

criterion_group!(benches, field_routes, classical_ensemble, quantum_kernels);
criterion_main!(benches);
