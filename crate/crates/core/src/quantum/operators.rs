use num_complex::Complex64;

use crate::spin::Spin;

type CMatrix = Vec<Vec<Complex64>>;

/// Dense single-site spin matrices in the S^z basis, ordered by digit
/// k = S - m_z (k = 0 is the fully up state).
#[derive(Clone, Debug, PartialEq)]
pub struct SpinOperatorSet {
    pub spin: Spin,
    pub sx: CMatrix,
    pub sy: CMatrix,
    pub sz: CMatrix,
}

impl SpinOperatorSet {
    pub fn new(spin: Spin) -> Self {
        let d = spin.local_dim();
        let s = spin.value();
        let zero = Complex64::new(0.0, 0.0);
        let mut sx = vec![vec![zero; d]; d];
        let mut sy = vec![vec![zero; d]; d];
        let mut sz = vec![vec![zero; d]; d];
        for k in 0..d {
            sz[k][k] = Complex64::new(s - k as f64, 0.0);
        }
        // ⟨k|S+|k+1⟩ = sqrt(S(S+1) - m(m+1)) with m = S - k - 1
        for k in 0..d - 1 {
            let m = s - k as f64 - 1.0;
            let c = (spin.casimir() - m * (m + 1.0)).sqrt();
            // S+ = Sx + iSy, S- = Sx - iSy
            sx[k][k + 1] = Complex64::new(0.5 * c, 0.0);
            sx[k + 1][k] = Complex64::new(0.5 * c, 0.0);
            sy[k][k + 1] = Complex64::new(0.0, -0.5 * c);
            sy[k + 1][k] = Complex64::new(0.0, 0.5 * c);
        }
        SpinOperatorSet { spin, sx, sy, sz }
    }

    pub fn dim(&self) -> usize {
        self.spin.local_dim()
    }

    pub fn components(&self) -> [&CMatrix; 3] {
        [&self.sx, &self.sy, &self.sz]
    }
}

/// ⟨k|S+|k+1⟩ for k in 0..2S.
pub(crate) fn ladder_elements(spin: Spin) -> Vec<f64> {
    let s = spin.value();
    (0..spin.local_dim() - 1)
        .map(|k| {
            let m = s - k as f64 - 1.0;
            (spin.casimir() - m * (m + 1.0)).sqrt()
        })
        .collect()
}
