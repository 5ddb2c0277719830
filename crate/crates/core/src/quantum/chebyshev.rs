//! Chebyshev expansion of e^{-iHt}:
//! e^{-iHt} = Σ_k (2 - δ_k0) (-i)^k J_k(Rt) T_k(H/R), with R ≥ ‖H‖.

use num_complex::Complex64;

use super::hamiltonian::SpinHamiltonian;
use super::hilbert::{HilbertSpec, StateVector};
use crate::error::{Error, Result};
use crate::lattice_model::{compute_tau, CouplingTable};

/// Terms with |J_k| below this are dropped.
const TRUNCATION: f64 = 1e-15;
/// Headroom on the spectral bound.
const BOUND_MARGIN: f64 = 1.01;

/// J_0(x) .. J_K(x) for x ≥ 0, with K the first order above x where |J_k|
/// falls below `tol`. Miller's backward recurrence normalized by
/// J_0 + 2 Σ J_2k = 1.
pub fn bessel_j_sequence(x: f64, tol: f64) -> Vec<f64> {
    assert!(x >= 0.0 && x.is_finite());
    if x == 0.0 {
        return vec![1.0];
    }
    let start = ((1.5 * x + 20.0 * x.cbrt() + 40.0) as usize) | 1;
    let mut j = vec![0.0f64; start + 2];
    j[start] = 1e-30;
    for k in (1..=start).rev() {
        j[k - 1] = 2.0 * k as f64 / x * j[k] - j[k + 1];
        if j[k - 1].abs() > 1e200 {
            for v in &mut j[k - 1..] {
                *v *= 1e-200;
            }
        }
    }
    let norm = j[0] + 2.0 * j.iter().skip(2).step_by(2).sum::<f64>();
    for v in &mut j {
        *v /= norm;
    }
    let mut keep = j.len();
    for k in (x.ceil() as usize)..j.len() - 1 {
        if j[k].abs() < tol && j[k + 1].abs() < tol {
            keep = k;
            break;
        }
    }
    j.truncate(keep.max(1));
    j
}

/// Fixed-step propagator e^{-iH·dt}.
#[derive(Clone, Debug)]
pub struct ChebyshevPropagator {
    ham: SpinHamiltonian,
    dt: f64,
    bound: f64,
    coeffs: Vec<Complex64>,
}

/// Work vectors for [`ChebyshevPropagator::step`].
#[derive(Clone, Debug)]
pub struct PropagatorWork {
    acc: Vec<Complex64>,
    prev: Vec<Complex64>,
    cur: Vec<Complex64>,
    next: Vec<Complex64>,
}

impl PropagatorWork {
    pub fn new(dim: usize) -> Self {
        let z = vec![Complex64::new(0.0, 0.0); dim];
        PropagatorWork { acc: z.clone(), prev: z.clone(), cur: z.clone(), next: z }
    }
}

impl ChebyshevPropagator {
    pub fn new(ham: SpinHamiltonian, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParams(format!("time step must be positive, got {dt}")));
        }
        let bound = (ham.spectral_bound() * BOUND_MARGIN).max(f64::MIN_POSITIVE);
        let bessel = bessel_j_sequence(bound * dt, TRUNCATION);
        let mut phase = Complex64::new(1.0, 0.0);
        let coeffs = bessel
            .iter()
            .enumerate()
            .map(|(k, &jk)| {
                let c = phase * jk * if k == 0 { 1.0 } else { 2.0 };
                phase *= Complex64::new(0.0, -1.0);
                c
            })
            .collect();
        Ok(ChebyshevPropagator { ham, dt, bound, coeffs })
    }

    pub fn hamiltonian(&self) -> &SpinHamiltonian {
        &self.ham
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Matrix-vector products per step.
    pub fn n_terms(&self) -> usize {
        self.coeffs.len()
    }

    /// psi ← e^{-iH·dt} psi
    pub fn step(&self, psi: &mut [Complex64], w: &mut PropagatorWork) {
        if self.ham.is_zero() {
            return;
        }
        let scale = 1.0 / self.bound;
        w.prev.copy_from_slice(psi);
        let c0 = self.coeffs[0];
        for (a, v) in w.acc.iter_mut().zip(psi.iter()) {
            *a = c0 * v;
        }
        if self.coeffs.len() > 1 {
            self.ham.apply_into(&w.prev, &mut w.cur);
            let c1 = self.coeffs[1];
            for (a, v) in w.acc.iter_mut().zip(w.cur.iter_mut()) {
                *v *= scale;
                *a += c1 * *v;
            }
        }
        for &ck in self.coeffs.iter().skip(2) {
            self.ham.apply_into(&w.cur, &mut w.next);
            for ((a, n), p) in w.acc.iter_mut().zip(w.next.iter_mut()).zip(&w.prev) {
                *n = *n * (2.0 * scale) - p;
                *a += ck * *n;
            }
            std::mem::swap(&mut w.prev, &mut w.cur);
            std::mem::swap(&mut w.cur, &mut w.next);
        }
        psi.copy_from_slice(&w.acc);
    }
}

/// Snapshots e^{-iH·k·dt}|ψ⟩ for k = 0..=n_steps.
pub fn propagate(
    state: &StateVector,
    table: &CouplingTable,
    spec: &HilbertSpec,
    dt: f64,
    n_steps: usize,
) -> Result<Vec<StateVector>> {
    if state.dim() != spec.dim() {
        return Err(Error::DimensionMismatch { expected: spec.dim(), found: state.dim() });
    }
    let prop = ChebyshevPropagator::new(SpinHamiltonian::new(table, spec)?, dt)?;
    let mut work = PropagatorWork::new(spec.dim());
    let mut psi = state.clone();
    let n0 = psi.norm_sqr();
    let tau = compute_tau(table).unwrap_or(f64::INFINITY);
    let mut out = vec![psi.clone()];
    for k in 1..=n_steps {
        prop.step(&mut psi.amplitudes, &mut work);
        check_norm(psi.norm_sqr(), n0, k as f64 * dt / tau)?;
        out.push(psi.clone());
    }
    Ok(out)
}

/// Norm budget: 1e-8 relative per unit τ (at least 1e-8 overall).
pub(crate) fn check_norm(norm_sqr: f64, initial: f64, t_over_tau: f64) -> Result<()> {
    let allowed = 1e-8 * t_over_tau.max(1.0) * initial;
    let drift = (norm_sqr - initial).abs();
    if !(drift <= allowed) {
        return Err(Error::NumericalFailure(format!(
            "norm drift {drift:.3e} at t/τ = {t_over_tau:.3} exceeds {allowed:.3e}; reduce dt"
        )));
    }
    Ok(())
}
