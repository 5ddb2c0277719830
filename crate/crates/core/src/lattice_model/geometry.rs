use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A periodic hypercubic lattice with 1 to 3 axes. Sites are numbered in
/// row-major order (last axis fastest).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeSpec {
    dims: Vec<usize>,
}

impl LatticeSpec {
    pub fn new(dims: &[usize]) -> Result<Self> {
        if dims.is_empty() || dims.len() > 3 {
            return Err(Error::InvalidLattice(format!(
                "expected 1 to 3 axes, got {}",
                dims.len()
            )));
        }
        if dims.iter().any(|&l| l == 0) {
            return Err(Error::InvalidLattice("every extent must be at least 1".into()));
        }
        let n: usize = dims.iter().product();
        if n < 2 {
            return Err(Error::InvalidLattice("a lattice needs at least 2 sites".into()));
        }
        Ok(LatticeSpec { dims: dims.to_vec() })
    }

    pub fn chain(n: usize) -> Result<Self> {
        Self::new(&[n])
    }

    pub fn square(l: usize) -> Result<Self> {
        Self::new(&[l, l])
    }

    pub fn cubic(l: usize) -> Result<Self> {
        Self::new(&[l, l, l])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn n_axes(&self) -> usize {
        self.dims.len()
    }

    pub fn site_count(&self) -> usize {
        self.dims.iter().product()
    }

    /// Dimensions padded to three axes with trailing extents of 1.
    pub fn dims3(&self) -> [usize; 3] {
        let mut out = [1; 3];
        out[..self.dims.len()].copy_from_slice(&self.dims);
        out
    }

    pub fn coords(&self, site: usize) -> [usize; 3] {
        let [_, l1, l2] = self.dims3();
        [site / (l1 * l2), (site / l2) % l1, site % l2]
    }

    pub fn site(&self, coords: [usize; 3]) -> usize {
        let [_, l1, l2] = self.dims3();
        (coords[0] * l1 + coords[1]) * l2 + coords[2]
    }

    /// Site reached from `site` by the periodic shift `delta`.
    pub fn shifted(&self, site: usize, delta: [i64; 3]) -> usize {
        let dims = self.dims3();
        let c = self.coords(site);
        let mut out = [0; 3];
        for a in 0..3 {
            let l = dims[a] as i64;
            out[a] = (c[a] as i64 + delta[a]).rem_euclid(l) as usize;
        }
        self.site(out)
    }

    /// Shortest periodic displacement from `m` to `n`, each component in
    /// (-L/2, L/2]. Unique for odd extents.
    pub fn min_image(&self, m: usize, n: usize) -> [i64; 3] {
        let dims = self.dims3();
        let cm = self.coords(m);
        let cn = self.coords(n);
        let mut d = [0i64; 3];
        for a in 0..3 {
            let l = dims[a] as i64;
            let mut x = (cn[a] as i64 - cm[a] as i64).rem_euclid(l);
            if 2 * x > l {
                x -= l;
            }
            d[a] = x;
        }
        d
    }

    pub fn all_odd(&self) -> bool {
        self.dims.iter().all(|l| l % 2 == 1)
    }
}
