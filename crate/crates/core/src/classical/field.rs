//! Local-field evaluation h_m = Σ_n (J^x_{mn} S^x_n, J^y_{mn} S^y_n, J^z_{mn} S^z_n)
//! for a batch of configurations.
//!
//! Two interchangeable routes: an explicit neighbor sum, and (for
//! translation-invariant tables with many neighbors) a circular convolution
//! evaluated with lattice DFTs.

use super::batch::SpinBatch;
use super::dft::{Dft3, Direction, LineScratch};
use crate::error::{Error, Result};
use crate::lattice_model::{Coupling, CouplingTable};

/// Tables with at least this many neighbors per site use the convolution route.
const CONVOLUTION_MIN_NEIGHBORS: usize = 24;

#[derive(Clone, Debug)]
pub(crate) enum FieldSolver {
    Sparse(SparseField),
    Convolution(ConvolutionField),
}

#[derive(Clone, Debug)]
pub(crate) struct SparseField {
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    couplings: Vec<Coupling>,
}

#[derive(Clone, Debug)]
pub(crate) struct ConvolutionField {
    dft: Dft3,
    /// Kernel spectra divided by the site count, one per component.
    spectrum: [Vec<f64>; 3],
}

#[derive(Clone, Debug, Default)]
pub(crate) struct FieldScratch {
    re: Vec<f64>,
    im: Vec<f64>,
    line: LineScratch,
}

impl FieldSolver {
    pub fn for_table(table: &CouplingTable) -> Self {
        let n = table.site_count();
        let per_site = 2 * table.bonds().len() / n;
        if per_site >= CONVOLUTION_MIN_NEIGHBORS {
            if let Ok(conv) = ConvolutionField::new(table) {
                return FieldSolver::Convolution(conv);
            }
        }
        FieldSolver::Sparse(SparseField::new(table))
    }

    pub fn sparse(table: &CouplingTable) -> Self {
        FieldSolver::Sparse(SparseField::new(table))
    }

    pub fn convolution(table: &CouplingTable) -> Result<Self> {
        ConvolutionField::new(table).map(FieldSolver::Convolution)
    }

    pub fn fields(&self, s: &SpinBatch, h: &mut SpinBatch, scratch: &mut FieldScratch) {
        match self {
            FieldSolver::Sparse(f) => f.fields(s, h),
            FieldSolver::Convolution(f) => f.fields(s, h, scratch),
        }
    }
}

impl SparseField {
    pub fn new(table: &CouplingTable) -> Self {
        let mut offsets = vec![0];
        let mut neighbors = Vec::new();
        let mut couplings = Vec::new();
        for list in table.adjacency() {
            for nb in list {
                neighbors.push(nb.site);
                couplings.push(nb.coupling);
            }
            offsets.push(neighbors.len());
        }
        SparseField { offsets, neighbors, couplings }
    }

    fn fields(&self, s: &SpinBatch, h: &mut SpinBatch) {
        let p = s.lanes;
        for m in 0..s.n_sites {
            let out = m * p..(m + 1) * p;
            let (hx, hy, hz) = (&mut h.x[out.clone()], &mut h.y[out.clone()], &mut h.z[out]);
            hx.fill(0.0);
            hy.fill(0.0);
            hz.fill(0.0);
            for e in self.offsets[m]..self.offsets[m + 1] {
                let n = self.neighbors[e];
                let c = self.couplings[e];
                let src = n * p..(n + 1) * p;
                for (o, v) in hx.iter_mut().zip(&s.x[src.clone()]) {
                    *o += c.x * v;
                }
                for (o, v) in hy.iter_mut().zip(&s.y[src.clone()]) {
                    *o += c.y * v;
                }
                for (o, v) in hz.iter_mut().zip(&s.z[src]) {
                    *o += c.z * v;
                }
            }
        }
    }
}

impl ConvolutionField {
    pub fn new(table: &CouplingTable) -> Result<Self> {
        if !table.is_translation_invariant() {
            return Err(Error::InvalidParams(
                "convolution route needs a translation-invariant table".into(),
            ));
        }
        let spec = table.spec();
        let n = spec.site_count();
        let dft = Dft3::new(spec.dims3());
        let mut kernel = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        for nb in &table.adjacency()[0] {
            kernel[0][nb.site] += nb.coupling.x;
            kernel[1][nb.site] += nb.coupling.y;
            kernel[2][nb.site] += nb.coupling.z;
        }
        let mut line = LineScratch::default();
        let mut spectrum = [Vec::new(), Vec::new(), Vec::new()];
        for (c, k) in kernel.into_iter().enumerate() {
            let scale = k.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(f64::MIN_POSITIVE);
            let mut re = k;
            let mut im = vec![0.0; n];
            dft.transform(&mut re, &mut im, 1, Direction::Forward, &mut line);
            // Even kernels have real spectra.
            if im.iter().any(|v| v.abs() > 1e-9 * scale * n as f64) {
                return Err(Error::InvalidParams("coupling kernel is not inversion symmetric".into()));
            }
            spectrum[c] = re.into_iter().map(|v| v / n as f64).collect();
        }
        Ok(ConvolutionField { dft, spectrum })
    }

    /// Pairs of lanes are packed into one complex transform: lane q in the
    /// real part, lane q + P in the imaginary part. The real kernel spectrum
    /// keeps the two from mixing.
    fn fields(&self, s: &SpinBatch, h: &mut SpinBatch, scratch: &mut FieldScratch) {
        let n = s.n_sites;
        let lanes = s.lanes;
        let p = lanes.div_ceil(2);
        let len = n * p;
        scratch.re.resize(len, 0.0);
        scratch.im.resize(len, 0.0);
        let comps: [(&Vec<f64>, &mut Vec<f64>); 3] = [(&s.x, &mut h.x), (&s.y, &mut h.y), (&s.z, &mut h.z)];
        for (c, (src, dst)) in comps.into_iter().enumerate() {
            for m in 0..n {
                for q in 0..p {
                    scratch.re[m * p + q] = src[m * lanes + q];
                    scratch.im[m * p + q] = if q + p < lanes { src[m * lanes + q + p] } else { 0.0 };
                }
            }
            self.dft.transform(&mut scratch.re, &mut scratch.im, p, Direction::Forward, &mut scratch.line);
            let spec = &self.spectrum[c];
            for m in 0..n {
                let k = spec[m];
                for q in 0..p {
                    scratch.re[m * p + q] *= k;
                    scratch.im[m * p + q] *= k;
                }
            }
            self.dft.transform(&mut scratch.re, &mut scratch.im, p, Direction::Inverse, &mut scratch.line);
            for m in 0..n {
                for q in 0..p {
                    dst[m * lanes + q] = scratch.re[m * p + q];
                    if q + p < lanes {
                        dst[m * lanes + q + p] = scratch.im[m * p + q];
                    }
                }
            }
        }
    }
}
