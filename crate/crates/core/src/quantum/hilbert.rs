use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::spin::Spin;

/// Dense dimension limit for the exact oracle (12 spins 1/2).
pub const DENSE_DIM_CAP: usize = 4096;
/// Dimension limit for state propagation (2 state vectors plus 4 work
/// vectors of 16 bytes per amplitude).
pub const PROPAGATION_DIM_CAP: usize = 30_000_000;

/// Product basis of S^z eigenstates on N sites of spin S. A basis index
/// encodes site m as the base-(2S+1) digit of weight (2S+1)^m; digit k
/// means m_z = S - k.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HilbertSpec {
    n_sites: usize,
    spin: Spin,
    dim: usize,
}

impl HilbertSpec {
    pub fn new(n_sites: usize, spin: Spin) -> Result<Self> {
        if n_sites == 0 {
            return Err(Error::InvalidParams("need at least one site".into()));
        }
        let d = spin.local_dim();
        let mut dim: usize = 1;
        for _ in 0..n_sites {
            dim = dim.checked_mul(d).ok_or_else(|| {
                Error::ResourceCap(format!("({d})^{n_sites} overflows the address space"))
            })?;
        }
        Ok(HilbertSpec { n_sites, spin, dim })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn spin(&self) -> Spin {
        self.spin
    }

    pub fn local_dim(&self) -> usize {
        self.spin.local_dim()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Weight of site m's digit in a basis index.
    pub fn weight(&self, m: usize) -> usize {
        self.local_dim().pow(m as u32)
    }

    pub fn digit(&self, index: usize, m: usize) -> usize {
        (index / self.weight(m)) % self.local_dim()
    }

    /// m_z value of digit k.
    pub fn mz(&self, k: usize) -> f64 {
        self.spin.value() - k as f64
    }

    /// Memory for `vectors` complex vectors of this dimension, in bytes.
    pub fn memory_bytes(&self, vectors: usize) -> usize {
        self.dim.saturating_mul(16).saturating_mul(vectors)
    }

    pub fn require_propagation_cap(&self) -> Result<()> {
        if self.dim > PROPAGATION_DIM_CAP {
            return Err(Error::ResourceCap(format!(
                "dimension {} exceeds the propagation cap {PROPAGATION_DIM_CAP} (~{:.1} GB per sample)",
                self.dim,
                self.memory_bytes(6) as f64 / 1e9
            )));
        }
        Ok(())
    }

    pub fn require_dense_cap(&self) -> Result<()> {
        if self.dim > DENSE_DIM_CAP {
            return Err(Error::ResourceCap(format!(
                "dimension {} exceeds the dense-oracle cap {DENSE_DIM_CAP}",
                self.dim
            )));
        }
        Ok(())
    }
}

/// Complex amplitudes over the product basis of a [`HilbertSpec`].
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    pub amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn zeros(dim: usize) -> Self {
        StateVector { amplitudes: vec![Complex64::new(0.0, 0.0); dim] }
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut s = Self::zeros(dim);
        s.amplitudes[index] = Complex64::new(1.0, 0.0);
        s
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalize(&mut self) {
        let inv = 1.0 / self.norm();
        for a in &mut self.amplitudes {
            *a *= inv;
        }
    }

    /// ⟨self|other⟩
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn is_finite(&self) -> bool {
        self.amplitudes.iter().all(|a| a.re.is_finite() && a.im.is_finite())
    }
}

/// Random pure state: i.i.d. complex Gaussian amplitudes, normalized. Its
/// expectation values average to Tr(A)/D over draws.
pub fn sample_typical_state<R: Rng + ?Sized>(spec: &HilbertSpec, rng: &mut R) -> StateVector {
    let amplitudes = (0..spec.dim())
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im)
        })
        .collect();
    let mut s = StateVector { amplitudes };
    s.normalize();
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digits_and_weights() {
        let h = HilbertSpec::new(3, Spin::ONE).unwrap();
        assert_eq!(h.dim(), 27);
        // index = 2 + 1·3 + 0·9
        assert_eq!(h.digit(5, 0), 2);
        assert_eq!(h.digit(5, 1), 1);
        assert_eq!(h.digit(5, 2), 0);
        assert_eq!(h.mz(0), 1.0);
        assert_eq!(h.mz(2), -1.0);
    }

    #[test]
    fn caps() {
        assert!(HilbertSpec::new(12, Spin::HALF).unwrap().require_dense_cap().is_ok());
        assert!(HilbertSpec::new(13, Spin::HALF).unwrap().require_dense_cap().is_err());
        assert!(HilbertSpec::new(8, Spin::FIVE_HALVES).unwrap().require_propagation_cap().is_ok());
        assert!(HilbertSpec::new(10, Spin::FIVE_HALVES).unwrap().require_propagation_cap().is_err());
        assert!(HilbertSpec::new(200, Spin::HALF).is_err());
    }
}
