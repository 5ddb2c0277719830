//! Dense matrices built from Kronecker products of single-site operators.
//! Independent of the matrix-free code path; used as an oracle.

use nalgebra::DMatrix;

use super::hilbert::HilbertSpec;
use super::operators::SpinOperatorSet;
use crate::error::{Error, Result};
use crate::lattice_model::CouplingTable;

fn digits_of(spec: &HilbertSpec, index: usize) -> Vec<usize> {
    (0..spec.n_sites()).map(|m| spec.digit(index, m)).collect()
}

/// H as a dense real symmetric matrix (the Hamiltonian is real in the S^z basis).
pub fn dense_hamiltonian(table: &CouplingTable, spec: &HilbertSpec) -> Result<DMatrix<f64>> {
    spec.require_dense_cap()?;
    let ops = SpinOperatorSet::new(spec.spin());
    let d = spec.local_dim();
    let dim = spec.dim();
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for col in 0..dim {
        let dg = digits_of(spec, col);
        for b in table.bonds() {
            let (km, kn) = (dg[b.m], dg[b.n]);
            let (wm, wn) = (spec.weight(b.m), spec.weight(b.n));
            for a in 0..d {
                for c in 0..d {
                    let mut v = num_complex::Complex64::new(0.0, 0.0);
                    for (j, op) in [b.coupling.x, b.coupling.y, b.coupling.z].into_iter().zip(ops.components()) {
                        v += op[a][km] * op[c][kn] * j;
                    }
                    if v.norm() == 0.0 {
                        continue;
                    }
                    if v.im.abs() > 1e-14 {
                        return Err(Error::NumericalFailure("Hamiltonian element is not real".into()));
                    }
                    let row = col + a * wm + c * wn - km * wm - kn * wn;
                    h[(row, col)] += v.re;
                }
            }
        }
    }
    Ok(h)
}

/// M_x = Σ_n S^x_n as a dense real matrix.
pub fn dense_mx(spec: &HilbertSpec) -> Result<DMatrix<f64>> {
    spec.require_dense_cap()?;
    let ops = SpinOperatorSet::new(spec.spin());
    let d = spec.local_dim();
    let dim = spec.dim();
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    for col in 0..dim {
        let dg = digits_of(spec, col);
        for (site, &k) in dg.iter().enumerate() {
            let w = spec.weight(site);
            for a in 0..d {
                let v = ops.sx[a][k].re;
                if v != 0.0 {
                    m[(col + a * w - k * w, col)] += v;
                }
            }
        }
    }
    Ok(m)
}
