use fidsim_core::analysis::second_moment;
use fidsim_core::quantum::*;
use fidsim_core::*;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn quantum_chain(n: usize, c: Coupling, spin: Spin) -> CouplingTable {
    let cl = build_nearest_neighbor(&LatticeSpec::chain(n).unwrap(), c, SpinKind::Classical).unwrap();
    rescale_for_quantum(&cl, spin).unwrap()
}

const FIG2: Coupling = Coupling { x: -0.41, y: -0.41, z: 0.82 };

#[test]
fn chebyshev_matches_spectral_evolution() {
    let table = quantum_chain(8, FIG2, Spin::HALF);
    let spec = HilbertSpec::new(8, Spin::HALF).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let psi = sample_typical_state(&spec, &mut rng);
    let dt = 0.1;
    let snaps = propagate(&psi, &table, &spec, dt, 20).unwrap();
    let exact = ExactSpectrum::new(&table, &spec).unwrap();
    for k in [1, 7, 20] {
        let want = exact.evolve(&psi, k as f64 * dt).unwrap();
        let fidelity = want.inner(&snaps[k]).norm();
        assert!(fidelity > 1.0 - 1e-8, "step {k}: fidelity {fidelity}");
        let dist: f64 = want.amplitudes.iter().zip(&snaps[k].amplitudes).map(|(a, b)| (a - b).norm_sqr()).sum();
        assert!(dist.sqrt() < 1e-10);
    }
}

#[test]
fn propagation_conserves_norm_energy_and_mz() {
    let table = quantum_chain(6, FIG2, Spin::ONE);
    let spec = HilbertSpec::new(6, Spin::ONE).unwrap();
    let ham = SpinHamiltonian::new(&table, &spec).unwrap();
    assert!(ham.conserves_total_sz());
    let tau = compute_tau(&table).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let psi = sample_typical_state(&spec, &mut rng);
    let e0 = ham.expectation(&psi).unwrap();
    let mz0 = expectation_mz(&psi, &spec);
    let snaps = propagate(&psi, &table, &spec, 0.25, 80).unwrap();
    let last = snaps.last().unwrap();
    let t_over_tau = 20.0 / tau;
    assert!((last.norm_sqr() - 1.0).abs() < 1e-8 * t_over_tau);
    let scale = ham.spectral_bound();
    assert!((ham.expectation(last).unwrap() - e0).abs() < 1e-8 * t_over_tau * scale);
    assert!((expectation_mz(last, &spec) - mz0).abs() < 1e-10);
}

#[test]
fn step_size_does_not_change_the_trajectory() {
    let table = quantum_chain(6, FIG2, Spin::HALF);
    let spec = HilbertSpec::new(6, Spin::HALF).unwrap();
    let psi = StateVector::basis(spec.dim(), 5);
    let a = propagate(&psi, &table, &spec, 0.05, 40).unwrap();
    let b = propagate(&psi, &table, &spec, 1.0, 2).unwrap();
    let f = a[40].inner(&b[2]).norm();
    assert!(f > 1.0 - 1e-12);
}

#[test]
fn typicality_agrees_with_exact_on_a_spin_one_chain() {
    let table = quantum_chain(6, FIG2, Spin::ONE);
    let spec = HilbertSpec::new(6, Spin::ONE).unwrap();
    let est = quantum_correlation(&table, &spec, &QuantumParams::new(0.1, 15.0, 40, 21)).unwrap();
    let exact = exact_correlation_small(&table, &spec, &est.series.times).unwrap();
    let mut worst: f64 = 0.0;
    for k in 1..est.series.len() {
        worst = worst.max((est.series.values[k] - exact.values[k]).abs() / est.series.stderr[k]);
    }
    assert!(worst < 4.5, "max z {worst}");
    // C_raw(0) = N S(S+1)/3
    assert!((exact.normalization - 6.0 * 2.0 / 3.0).abs() < 1e-10);
    assert!((est.series.normalization - 4.0).abs() < 0.2);
    assert!(est.diagnostics.max_norm_drift < 1e-10);
}

#[test]
fn ising_chain_closed_form() {
    // Spin m precesses in J(S^z_{m-1} + S^z_{m+1}); for S = 1/2 this gives
    // C(t) = cos²(Jt/2).
    let j = 0.8;
    let spec_l = LatticeSpec::chain(7).unwrap();
    let table = build_nearest_neighbor(&spec_l, Coupling::new(0.0, 0.0, j), SpinKind::Quantum(Spin::HALF)).unwrap();
    let spec = HilbertSpec::new(7, Spin::HALF).unwrap();
    let times: Vec<f64> = (0..80).map(|k| 0.25 * k as f64).collect();
    let exact = exact_correlation_small(&table, &spec, &times).unwrap();
    let est = quantum_correlation(&table, &spec, &QuantumParams::new(0.25, 19.75, 8, 3)).unwrap();
    for (k, &t) in times.iter().enumerate() {
        let want = (0.5 * j * t).cos().powi(2);
        assert!((exact.values[k] - want).abs() < 1e-12);
        if k > 0 {
            assert!((est.series.values[k] - want).abs() < 5.0 * est.series.stderr[k]);
        }
    }
}

#[test]
fn typicality_is_reproducible() {
    let table = quantum_chain(8, FIG2, Spin::HALF);
    let spec = HilbertSpec::new(8, Spin::HALF).unwrap();
    let p = QuantumParams::new(0.2, 4.0, 6, 99);
    let a = quantum_correlation(&table, &spec, &p).unwrap();
    let b = rayon::ThreadPoolBuilder::new()
        .num_threads(2)
        .build()
        .unwrap()
        .install(|| quantum_correlation(&table, &spec, &p).unwrap());
    assert_eq!(a.series, b.series);
}

#[test]
fn second_moment_matches_trace_formula() {
    // -C''(0) = Σ W_ab² (E_a - E_b)² / Σ W_ab² with W = ⟨a|M_x|b⟩
    let table = quantum_chain(6, Coupling::new(0.0, -1.0, 1.0), Spin::HALF);
    let spec = HilbertSpec::new(6, Spin::HALF).unwrap();
    let exact = ExactSpectrum::new(&table, &spec).unwrap();
    let mx = dense_mx(&spec).unwrap();
    let w = exact.vectors.transpose() * mx * &exact.vectors;
    let (mut num, mut den) = (0.0, 0.0);
    for a in 0..spec.dim() {
        for b in 0..spec.dim() {
            let w2 = w[(a, b)].powi(2);
            num += w2 * (exact.energies[a] - exact.energies[b]).powi(2);
            den += w2;
        }
    }
    let times: Vec<f64> = (0..40).map(|k| 0.01 * k as f64).collect();
    let c = exact_correlation_small(&table, &spec, &times).unwrap();
    let (m2, _) = second_moment(&c).unwrap();
    assert!((m2 - num / den).abs() < 1e-6 * num / den);
}

#[test]
fn resource_caps() {
    assert!(matches!(HilbertSpec::new(40, Spin::FIVE_HALVES), Err(Error::ResourceCap(_))));
    let spec = HilbertSpec::new(14, Spin::HALF).unwrap();
    assert!(matches!(spec.require_dense_cap(), Err(Error::ResourceCap(_))));
    let table = quantum_chain(14, FIG2, Spin::HALF);
    assert!(matches!(dense_hamiltonian(&table, &spec), Err(Error::ResourceCap(_))));
}

#[test]
fn mx_is_hermitian_and_real() {
    let spec = HilbertSpec::new(4, Spin::FIVE_HALVES).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let a = sample_typical_state(&spec, &mut rng);
    let b = sample_typical_state(&spec, &mut rng);
    let lhs = a.inner(&apply_mx(&b, &spec).unwrap());
    let rhs = apply_mx(&a, &spec).unwrap().inner(&b);
    assert!((lhs - rhs).norm() < 1e-12);
    let real = StateVector { amplitudes: vec![Complex64::new(1.0, 0.0); spec.dim()] };
    assert!(apply_mx(&real, &spec).unwrap().amplitudes.iter().all(|z| z.im == 0.0));
}
