//! Exact infinite-temperature correlation by full diagonalization, for small
//! Hilbert spaces: C(t) = Σ_ab |⟨a|M_x|b⟩|² cos((E_a - E_b)t) / Σ_ab |⟨a|M_x|b⟩|².

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::dense::{dense_hamiltonian, dense_mx};
use super::hilbert::{HilbertSpec, StateVector};
use crate::error::{Error, Result};
use crate::lattice_model::CouplingTable;
use crate::series::CorrelationSeries;

/// Eigendecomposition of a small Hamiltonian.
#[derive(Clone, Debug)]
pub struct ExactSpectrum {
    pub energies: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl ExactSpectrum {
    pub fn new(table: &CouplingTable, spec: &HilbertSpec) -> Result<Self> {
        let h = dense_hamiltonian(table, spec)?;
        let eig = SymmetricEigen::new(h);
        Ok(ExactSpectrum { energies: eig.eigenvalues.iter().copied().collect(), vectors: eig.eigenvectors })
    }

    /// e^{-iHt}|ψ⟩
    pub fn evolve(&self, state: &StateVector, t: f64) -> Result<StateVector> {
        let dim = self.energies.len();
        if state.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: state.dim() });
        }
        let v = &self.vectors;
        let coeffs: Vec<Complex64> = (0..dim)
            .map(|a| {
                let c: Complex64 = (0..dim).map(|i| state.amplitudes[i] * v[(i, a)]).sum();
                c * Complex64::from_polar(1.0, -self.energies[a] * t)
            })
            .collect();
        let amplitudes = (0..dim).map(|i| (0..dim).map(|a| coeffs[a] * v[(i, a)]).sum()).collect();
        Ok(StateVector { amplitudes })
    }
}

/// Exact normalized C(t) on the given times.
pub fn exact_correlation_small(table: &CouplingTable, spec: &HilbertSpec, times: &[f64]) -> Result<CorrelationSeries> {
    let spectrum = ExactSpectrum::new(table, spec)?;
    let mx = dense_mx(spec)?;
    let v = &spectrum.vectors;
    let w = v.transpose() * mx * v;
    let e = &spectrum.energies;
    let dim = e.len();

    // (ΔE, |W_ab|²) over a ≤ b, off-diagonal pairs counted twice
    let mut weights = Vec::with_capacity(dim * (dim + 1) / 2);
    let mut total = 0.0;
    for a in 0..dim {
        for b in a..dim {
            let w2 = w[(a, b)] * w[(a, b)];
            if w2 == 0.0 {
                continue;
            }
            let m = if a == b { 1.0 } else { 2.0 };
            weights.push((e[a] - e[b], m * w2));
            total += m * w2;
        }
    }
    if total == 0.0 {
        return Err(Error::NumericalFailure("M_x has vanishing norm".into()));
    }
    let values = match uniform_step(times) {
        Some(h) => cosine_sums_uniform(&weights, times[0], h, times.len()),
        None => times.iter().map(|&t| weights.iter().map(|&(de, w2)| w2 * (de * t).cos()).sum()).collect(),
    };
    let values: Vec<f64> = values.into_iter().map(|v: f64| v / total).collect();
    let stderr = vec![0.0; times.len()];
    let mut series = CorrelationSeries::new(times.to_vec(), values, stderr)?;
    series.normalization = total / dim as f64;
    series.meta.insert("method".into(), "exact".into());
    series.meta.insert("spin".into(), table.kind().to_string());
    series.meta.insert("dimension".into(), dim.to_string());
    Ok(series)
}

fn uniform_step(times: &[f64]) -> Option<f64> {
    if times.len() < 3 {
        return None;
    }
    let h = times[1] - times[0];
    let ok = h > 0.0 && times.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-12 * h.max(w[1].abs()));
    ok.then_some(h)
}

/// Σ_p w_p cos(ΔE_p t_k) on t_k = t0 + k h via cos((k+1)x) = 2cos(x)cos(kx) - cos((k-1)x).
fn cosine_sums_uniform(weights: &[(f64, f64)], t0: f64, h: f64, n: usize) -> Vec<f64> {
    let mut prev: Vec<f64> = weights.iter().map(|&(de, _)| (de * (t0 - h)).cos()).collect();
    let mut cur: Vec<f64> = weights.iter().map(|&(de, _)| (de * t0).cos()).collect();
    let two_cos: Vec<f64> = weights.iter().map(|&(de, _)| 2.0 * (de * h).cos()).collect();
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        out.push(weights.iter().zip(&cur).map(|(&(_, w), c)| w * c).sum());
        for ((p, c), tc) in prev.iter_mut().zip(cur.iter_mut()).zip(&two_cos) {
            let next = tc * *c - *p;
            *p = *c;
            *c = next;
        }
    }
    out
}
