//! C(t) = Tr[M_x(t) M_x] / D estimated from random pure states:
//! ⟨ψ|e^{iHt} M_x e^{-iHt} M_x|ψ⟩ = ⟨M_x ψ(t)|φ(t)⟩ with φ(t) = e^{-iHt} M_x ψ.

use num_complex::Complex64;
use rayon::prelude::*;

use super::chebyshev::{check_norm, ChebyshevPropagator, PropagatorWork};
use super::hamiltonian::SpinHamiltonian;
use super::hilbert::{sample_typical_state, HilbertSpec};
use crate::error::{Error, Result};
use crate::lattice_model::{compute_tau, CouplingTable};
use crate::rng::{stream, Domain};
use crate::series::{CorrelationSeries, RatioAccumulator};

/// Below this dimension samples run in parallel; above it the matrix-vector
/// products are parallel instead.
const PARALLEL_SAMPLES_BELOW: usize = 1 << 16;
/// Vectors of length D held per sample.
pub const VECTORS_PER_SAMPLE: usize = 7;

#[derive(Clone, Debug)]
pub struct QuantumParams {
    /// Output grid step; also the propagation step.
    pub dt: f64,
    pub t_max: f64,
    pub n_samples: usize,
    pub seed: u64,
}

impl QuantumParams {
    pub fn new(dt: f64, t_max: f64, n_samples: usize, seed: u64) -> Self {
        QuantumParams { dt, t_max, n_samples, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParams(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_max >= 0.0 && self.t_max.is_finite()) {
            return Err(Error::InvalidParams(format!("t_max must be non-negative, got {}", self.t_max)));
        }
        if self.n_samples == 0 {
            return Err(Error::InvalidParams("at least one sample is required".into()));
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.t_max / self.dt).round() as usize
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct QuantumDiagnostics {
    /// max over samples and times of |‖ψ(t)‖² - 1|
    pub max_norm_drift: f64,
    /// max over t of |mean Im num(t)| / normalization
    pub max_imaginary: f64,
    /// the same, in units of its standard error
    pub max_imaginary_z: f64,
    pub terms_per_step: usize,
}

#[derive(Clone, Debug)]
pub struct QuantumEstimate {
    pub series: CorrelationSeries,
    pub diagnostics: QuantumDiagnostics,
}

struct SampleResult {
    numerator: Vec<f64>,
    imaginary: Vec<f64>,
    denominator: f64,
    norm_drift: f64,
}

/// Typicality estimate of the normalized C(t) on the grid k·dt, k = 0..=t_max/dt.
pub fn quantum_correlation(table: &CouplingTable, spec: &HilbertSpec, params: &QuantumParams) -> Result<QuantumEstimate> {
    params.validate()?;
    spec.require_propagation_cap()?;
    let ham = SpinHamiltonian::new(table, spec)?;
    let tau = compute_tau(table).unwrap_or(f64::INFINITY);
    let prop = ChebyshevPropagator::new(ham, params.dt)?;
    let n_steps = params.n_steps();

    let run = |i: usize| run_sample(&prop, spec, params, i, n_steps, tau);
    let results: Vec<Result<SampleResult>> = if spec.dim() < PARALLEL_SAMPLES_BELOW {
        (0..params.n_samples).into_par_iter().map(run).collect()
    } else {
        (0..params.n_samples).map(run).collect()
    };

    let mut acc = RatioAccumulator::new(n_steps + 1);
    let mut im_acc = RatioAccumulator::new(n_steps + 1);
    let mut diagnostics = QuantumDiagnostics { terms_per_step: prop.n_terms(), ..Default::default() };
    for r in results {
        let r = r?;
        acc.push(&r.numerator, r.denominator);
        im_acc.push(&r.imaginary, r.denominator);
        diagnostics.max_norm_drift = diagnostics.max_norm_drift.max(r.norm_drift);
    }
    let (values, stderr) = acc.ratio();
    let (im_values, im_stderr) = im_acc.ratio();
    let typical_scale = 1.0 / (spec.dim() as f64 * params.n_samples as f64).sqrt();
    for (k, (&v, &e)) in im_values.iter().zip(&im_stderr).enumerate() {
        diagnostics.max_imaginary = diagnostics.max_imaginary.max(v.abs());
        if e > 0.0 {
            diagnostics.max_imaginary_z = diagnostics.max_imaginary_z.max(v.abs() / e);
        }
        // Im C(t) averages to zero; a single sample carries O(1/√D) noise,
        // which also floors the band when few samples make e unreliable.
        let allowed = 1e-6f64.max(6.0 * e.max(typical_scale));
        if v.abs() > allowed {
            return Err(Error::NumericalFailure(format!(
                "imaginary part {v:.3e} at t = {} exceeds {allowed:.3e}",
                k as f64 * params.dt
            )));
        }
    }

    let mut series = CorrelationSeries::uniform(params.dt, values, stderr)?;
    series.normalization = acc.mean_y();
    series.meta.insert("method".into(), "typicality".into());
    series.meta.insert("spin".into(), table.kind().to_string());
    series.meta.insert("dt".into(), format!("{:?}", params.dt));
    series.meta.insert("samples".into(), params.n_samples.to_string());
    series.meta.insert("seed".into(), params.seed.to_string());
    series.meta.insert("dimension".into(), spec.dim().to_string());
    Ok(QuantumEstimate { series, diagnostics })
}

fn run_sample(
    prop: &ChebyshevPropagator,
    spec: &HilbertSpec,
    params: &QuantumParams,
    index: usize,
    n_steps: usize,
    tau: f64,
) -> Result<SampleResult> {
    let ham = prop.hamiltonian();
    let dim = spec.dim();
    let mut rng = stream(params.seed, Domain::Quantum, index as u64);
    let mut psi = sample_typical_state(spec, &mut rng).amplitudes;
    let mut phi = vec![Complex64::new(0.0, 0.0); dim];
    let mut chi = vec![Complex64::new(0.0, 0.0); dim];
    let mut work = PropagatorWork::new(dim);
    ham.apply_mx_into(&psi, &mut phi);

    let norm0 = norm_sqr(&psi);
    let phi0 = norm_sqr(&phi);
    let mut numerator = Vec::with_capacity(n_steps + 1);
    let mut imaginary = Vec::with_capacity(n_steps + 1);
    let mut norm_drift: f64 = 0.0;
    for k in 0..=n_steps {
        if k > 0 {
            prop.step(&mut psi, &mut work);
            prop.step(&mut phi, &mut work);
            let t = k as f64 * params.dt / tau;
            let n = norm_sqr(&psi);
            check_norm(n, norm0, t)?;
            check_norm(norm_sqr(&phi), phi0, t)?;
            norm_drift = norm_drift.max((n - norm0).abs());
        }
        ham.apply_mx_into(&psi, &mut chi);
        let z: Complex64 = chi.iter().zip(&phi).map(|(a, b)| a.conj() * b).sum();
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NumericalFailure(format!("non-finite amplitude at step {k}; reduce dt")));
        }
        numerator.push(z.re);
        imaginary.push(z.im);
    }
    Ok(SampleResult { denominator: numerator[0], numerator, imaginary, norm_drift })
}

fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum()
}
