//! Matrix-free action of H = Σ_{m<n} J^x S^x_m S^x_n + J^y S^y_m S^y_n + J^z S^z_m S^z_n
//! on the product S^z basis.
//!
//! With S^± = S^x ± iS^y every pair term is real in this basis:
//! J^x S^x S^x + J^y S^y S^y = (J^x+J^y)/4 (S^+S^- + S^-S^+) + (J^x-J^y)/4 (S^+S^+ + S^-S^-).

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use super::hilbert::{HilbertSpec, StateVector};
use super::operators::{ladder_elements, SpinOperatorSet};
use crate::error::{Error, Result};
use crate::lattice_model::{Coupling, CouplingTable};

const CHUNK: usize = 1 << 12;

#[derive(Clone, Copy, Debug, Default)]
struct OffDiagonal {
    len: usize,
    terms: [(isize, f64); 4],
}

#[derive(Clone, Debug)]
struct PairTerm {
    m: usize,
    n: usize,
    /// d² entries indexed by k_m·d + k_n: diagonal element
    diag: Vec<f64>,
    /// d² entries: up to four off-diagonal (index offset, amplitude) pairs
    offdiag: Vec<OffDiagonal>,
}

/// Pair terms of a quantum coupling table, ready to act on state vectors.
#[derive(Clone, Debug)]
pub struct SpinHamiltonian {
    spec: HilbertSpec,
    terms: Vec<PairTerm>,
    ladder: Vec<f64>,
    /// Σ over pairs of the pair term's operator norm; bounds the spectrum.
    spectral_bound: f64,
    /// Whether J^x = J^y on every pair (total S^z conserved).
    axial: bool,
}

impl SpinHamiltonian {
    pub fn new(table: &CouplingTable, spec: &HilbertSpec) -> Result<Self> {
        let spin = table.quantum_spin()?;
        if spin != spec.spin() {
            return Err(Error::SpinTagMismatch {
                expected: format!("quantum({})", spec.spin()),
                found: table.kind().to_string(),
            });
        }
        if table.site_count() != spec.n_sites() {
            return Err(Error::DimensionMismatch { expected: spec.n_sites(), found: table.site_count() });
        }
        let d = spec.local_dim();
        let ladder = ladder_elements(spin);
        let mut terms = Vec::new();
        let mut spectral_bound = 0.0;
        let mut axial = true;
        for b in table.bonds() {
            if b.coupling.is_zero() {
                continue;
            }
            axial &= b.coupling.x == b.coupling.y;
            let wm = spec.weight(b.m) as isize;
            let wn = spec.weight(b.n) as isize;
            let pm = 0.25 * (b.coupling.x + b.coupling.y);
            let pp = 0.25 * (b.coupling.x - b.coupling.y);
            let mut diag = vec![0.0; d * d];
            let mut offdiag = vec![OffDiagonal::default(); d * d];
            for km in 0..d {
                for kn in 0..d {
                    let slot = km * d + kn;
                    diag[slot] = b.coupling.z * spec.mz(km) * spec.mz(kn);
                    let up = |k: usize| (k + 1 < d).then(|| ladder[k]); // source digit k+1
                    let down = |k: usize| (k > 0).then(|| ladder[k - 1]); // source digit k-1
                    let mut push = |dm: isize, dn: isize, a: Option<f64>, c: Option<f64>, coef: f64| {
                        if coef != 0.0 {
                            if let (Some(a), Some(c)) = (a, c) {
                                let o = &mut offdiag[slot];
                                o.terms[o.len] = (dm * wm + dn * wn, coef * a * c);
                                o.len += 1;
                            }
                        }
                    };
                    // S+_m S-_n, S-_m S+_n, S+_m S+_n, S-_m S-_n
                    push(1, -1, up(km), down(kn), pm);
                    push(-1, 1, down(km), up(kn), pm);
                    push(1, 1, up(km), up(kn), pp);
                    push(-1, -1, down(km), down(kn), pp);
                }
            }
            spectral_bound += pair_operator_norm(spin_ops(spec), b.coupling);
            terms.push(PairTerm { m: b.m, n: b.n, diag, offdiag });
        }
        Ok(SpinHamiltonian { spec: *spec, terms, ladder, spectral_bound, axial })
    }

    pub fn spec(&self) -> &HilbertSpec {
        &self.spec
    }

    pub fn spectral_bound(&self) -> f64 {
        self.spectral_bound
    }

    pub fn conserves_total_sz(&self) -> bool {
        self.axial
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// out = H·psi
    pub fn apply_into(&self, psi: &[Complex64], out: &mut [Complex64]) {
        let spec = self.spec;
        let d = spec.local_dim();
        out.par_chunks_mut(CHUNK).enumerate().for_each(|(c, chunk)| {
            let start = c * CHUNK;
            let mut digits = initial_digits(&spec, start);
            for (off, o) in chunk.iter_mut().enumerate() {
                let idx = start + off;
                let v = psi[idx];
                let mut acc = Complex64::new(0.0, 0.0);
                for t in &self.terms {
                    let slot = digits[t.m] * d + digits[t.n];
                    acc += v * t.diag[slot];
                    let o = &t.offdiag[slot];
                    for &(delta, amp) in &o.terms[..o.len] {
                        acc += psi[(idx as isize + delta) as usize] * amp;
                    }
                }
                *o = acc;
                increment(&mut digits, d);
            }
        });
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        self.check(psi)?;
        let mut out = StateVector::zeros(psi.dim());
        self.apply_into(&psi.amplitudes, &mut out.amplitudes);
        Ok(out)
    }

    /// out = M_x·psi with M_x = Σ_n S^x_n.
    pub fn apply_mx_into(&self, psi: &[Complex64], out: &mut [Complex64]) {
        apply_mx_raw(&self.spec, &self.ladder, psi, out)
    }

    /// ⟨psi|H|psi⟩
    pub fn expectation(&self, psi: &StateVector) -> Result<f64> {
        let h = self.apply(psi)?;
        Ok(psi.inner(&h).re)
    }

    fn check(&self, psi: &StateVector) -> Result<()> {
        if psi.dim() != self.spec.dim() {
            return Err(Error::DimensionMismatch { expected: self.spec.dim(), found: psi.dim() });
        }
        Ok(())
    }
}

fn spin_ops(spec: &HilbertSpec) -> SpinOperatorSet {
    SpinOperatorSet::new(spec.spin())
}

/// Largest |eigenvalue| of J^x S^xS^x + J^y S^yS^y + J^z S^zS^z on two sites.
fn pair_operator_norm(ops: SpinOperatorSet, c: Coupling) -> f64 {
    let d = ops.dim();
    let dd = d * d;
    let mut h = DMatrix::<f64>::zeros(dd, dd);
    for (j, m) in [c.x, c.y, c.z].into_iter().zip(ops.components()) {
        for a in 0..d {
            for b in 0..d {
                for a2 in 0..d {
                    for b2 in 0..d {
                        h[(a * d + b, a2 * d + b2)] += j * (m[a][a2] * m[b][b2]).re;
                    }
                }
            }
        }
    }
    SymmetricEigen::new(h).eigenvalues.iter().fold(0.0f64, |a, e| a.max(e.abs()))
}

fn initial_digits(spec: &HilbertSpec, index: usize) -> Vec<usize> {
    (0..spec.n_sites()).map(|m| spec.digit(index, m)).collect()
}

fn increment(digits: &mut [usize], d: usize) {
    for k in digits.iter_mut() {
        *k += 1;
        if *k < d {
            return;
        }
        *k = 0;
    }
}

fn apply_mx_raw(spec: &HilbertSpec, ladder: &[f64], psi: &[Complex64], out: &mut [Complex64]) {
    let d = spec.local_dim();
    let weights: Vec<usize> = (0..spec.n_sites()).map(|m| spec.weight(m)).collect();
    out.par_chunks_mut(CHUNK).enumerate().for_each(|(c, chunk)| {
        let start = c * CHUNK;
        let mut digits = initial_digits(spec, start);
        for (off, o) in chunk.iter_mut().enumerate() {
            let idx = start + off;
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, &w) in digits.iter().zip(&weights) {
                // ⟨k|S+|k+1⟩ ψ[k+1] + ⟨k|S-|k-1⟩ ψ[k-1]
                if k + 1 < d {
                    acc += psi[idx + w] * ladder[*k];
                }
                if *k > 0 {
                    acc += psi[idx - w] * ladder[k - 1];
                }
            }
            *o = acc * 0.5;
            increment(&mut digits, d);
        }
    });
}

/// H|ψ⟩ computed term by term without materializing H.
pub fn apply_hamiltonian(state: &StateVector, table: &CouplingTable, spec: &HilbertSpec) -> Result<StateVector> {
    SpinHamiltonian::new(table, spec)?.apply(state)
}

/// M_x|ψ⟩ with M_x = Σ_n S^x_n.
pub fn apply_mx(state: &StateVector, spec: &HilbertSpec) -> Result<StateVector> {
    if state.dim() != spec.dim() {
        return Err(Error::DimensionMismatch { expected: spec.dim(), found: state.dim() });
    }
    let mut out = StateVector::zeros(spec.dim());
    apply_mx_raw(spec, &ladder_elements(spec.spin()), &state.amplitudes, &mut out.amplitudes);
    Ok(out)
}

/// ⟨ψ|M_z|ψ⟩
pub fn expectation_mz(state: &StateVector, spec: &HilbertSpec) -> f64 {
    let d = spec.local_dim();
    let mut digits = vec![0usize; spec.n_sites()];
    let mut total = 0.0;
    for a in &state.amplitudes {
        let mz: f64 = digits.iter().map(|&k| spec.mz(k)).sum();
        total += a.norm_sqr() * mz;
        increment(&mut digits, d);
    }
    total
}
