use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::batch::SpinBatch;
use super::field::FieldSolver;
use super::integrator::{energy_batch, rk4_step_batch, Rk4Work};
use super::state::random_unit_vector;
use crate::error::{Error, Result};
use crate::lattice_model::CouplingTable;
use crate::rng::{self, Domain};
use crate::series::{CorrelationSeries, RatioAccumulator};

/// Conservation limits checked at the end of every trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftTolerance {
    /// max_m | |S_m| - 1 |
    pub spin_norm: f64,
    /// |E(T) - E(0)| / |E(0)|
    pub energy_relative: f64,
    /// Absolute limit in units of N·(rms local-field coupling), used instead
    /// when E(0) is close to zero.
    pub energy_absolute_per_site: f64,
}

/// The default catches unstable steps. RK4 truncation alone drifts by
/// ~1e-5 over T = 200 at dt·|h| ≈ 0.07, so `strict` needs a smaller dt.
impl Default for DriftTolerance {
    fn default() -> Self {
        DriftTolerance { spin_norm: 1e-4, energy_relative: 1e-4, energy_absolute_per_site: 1e-4 }
    }
}

impl DriftTolerance {
    pub fn strict() -> Self {
        DriftTolerance { spin_norm: 1e-7, energy_relative: 1e-6, energy_absolute_per_site: 1e-8 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegrationParams {
    pub dt: f64,
    /// Trajectory length T.
    pub total_time: f64,
    pub n_realizations: usize,
    pub seed: u64,
    /// Realizations integrated in lockstep.
    pub batch_size: usize,
    pub tolerance: DriftTolerance,
}

impl IntegrationParams {
    pub fn new(dt: f64, total_time: f64, n_realizations: usize, seed: u64) -> Self {
        IntegrationParams {
            dt,
            total_time,
            n_realizations,
            seed,
            batch_size: 64,
            tolerance: DriftTolerance::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParams("dt must be positive".into()));
        }
        if !(self.total_time >= self.dt) {
            return Err(Error::InvalidParams("T must be at least dt".into()));
        }
        if self.n_realizations == 0 {
            return Err(Error::InvalidParams("need at least one realization".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidParams("batch size must be positive".into()));
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.total_time / self.dt).round() as usize
    }
}

/// Worst-case conservation errors over the ensemble.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnsembleDiagnostics {
    pub max_spin_norm_drift: f64,
    /// Largest |ΔE|/|E(0)| among trajectories with E(0) above the absolute floor.
    pub max_energy_drift_relative: f64,
    pub max_energy_drift_absolute: f64,
    /// Largest |M_z(T) - M_z(0)|.
    pub max_mz_drift: f64,
}

impl EnsembleDiagnostics {
    fn merge(&mut self, o: &EnsembleDiagnostics) {
        self.max_spin_norm_drift = self.max_spin_norm_drift.max(o.max_spin_norm_drift);
        self.max_energy_drift_relative = self.max_energy_drift_relative.max(o.max_energy_drift_relative);
        self.max_energy_drift_absolute = self.max_energy_drift_absolute.max(o.max_energy_drift_absolute);
        self.max_mz_drift = self.max_mz_drift.max(o.max_mz_drift);
    }
}

#[derive(Clone, Debug)]
pub struct ClassicalEnsemble {
    pub series: CorrelationSeries,
    pub diagnostics: EnsembleDiagnostics,
}

/// Infinite-temperature C(t) = ⟨M_x(τ) M_x(τ+t)⟩ of a classical lattice.
///
/// Each realization starts from independent uniformly random spins, is
/// integrated with RK4 for time T, and contributes the sliding-window time
/// average of M_x(τ)M_x(τ+t) for lags 0..=t_max on the dt grid. The ensemble
/// average is normalized to C(0) = 1 as a ratio of means.
pub fn classical_correlation(
    table: &CouplingTable,
    params: &IntegrationParams,
    t_max: f64,
) -> Result<CorrelationSeries> {
    run_classical_ensemble(table, params, t_max).map(|e| e.series)
}

pub fn run_classical_ensemble(
    table: &CouplingTable,
    params: &IntegrationParams,
    t_max: f64,
) -> Result<ClassicalEnsemble> {
    table.require_classical()?;
    params.validate()?;
    if !(t_max >= 0.0) || t_max > 0.5 * params.total_time + 1e-9 * params.dt {
        return Err(Error::InvalidParams(format!(
            "t_max = {t_max} must lie in [0, T/2] = [0, {}]",
            0.5 * params.total_time
        )));
    }
    let n_steps = params.n_steps();
    let n_lags = (t_max / params.dt).round() as usize + 1;

    let solver = FieldSolver::for_table(table);
    let field_scale = {
        let adj = table.adjacency();
        adj[0].iter().map(|nb| nb.coupling.norm_sq()).sum::<f64>().sqrt()
    };
    let n = params.n_realizations;
    let lanes = params.batch_size.min(n);
    let n_batches = n.div_ceil(lanes);
    let chunk = 2 * rayon::current_num_threads().max(1);

    let mut acc = RatioAccumulator::new(n_lags);
    let mut diagnostics = EnsembleDiagnostics::default();
    let mut start = 0;
    while start < n_batches {
        let end = (start + chunk).min(n_batches);
        let results: Vec<Result<BatchResult>> = (start..end)
            .into_par_iter()
            .map(|b| {
                run_batch(
                    table.site_count(),
                    &solver,
                    params,
                    b * lanes,
                    lanes,
                    n_steps,
                    n_lags,
                    field_scale,
                )
            })
            .collect();
        for r in results {
            let r = r?;
            for (q, corr) in r.correlations.iter().enumerate() {
                if r.first + q < n {
                    acc.push(corr, corr[0]);
                }
            }
            diagnostics.merge(&r.diagnostics);
        }
        start = end;
    }

    let (values, stderr) = acc.ratio();
    let mut series = CorrelationSeries::uniform(params.dt, values, stderr)?;
    series.values[0] = 1.0;
    series.normalization = acc.mean_y();
    series.meta.insert("method".into(), "classical".into());
    series.meta.insert("spin".into(), table.kind().to_string());
    series.meta.insert("dt".into(), format!("{:?}", params.dt));
    series.meta.insert("T".into(), format!("{:?}", params.total_time));
    series.meta.insert("realizations".into(), n.to_string());
    series.meta.insert("seed".into(), params.seed.to_string());
    Ok(ClassicalEnsemble { series, diagnostics })
}

struct BatchResult {
    first: usize,
    correlations: Vec<Vec<f64>>,
    diagnostics: EnsembleDiagnostics,
}

#[allow(clippy::too_many_arguments)]
fn run_batch(
    n_sites: usize,
    solver: &FieldSolver,
    params: &IntegrationParams,
    first: usize,
    lanes: usize,
    n_steps: usize,
    n_lags: usize,
    field_scale: f64,
) -> Result<BatchResult> {
    let states: Vec<Vec<[f64; 3]>> = (0..lanes)
        .map(|q| {
            let mut r = rng::stream(params.seed, Domain::Classical, (first + q) as u64);
            (0..n_sites).map(|_| random_unit_vector(&mut r)).collect()
        })
        .collect();
    let mut s = SpinBatch::from_states(&states);
    let mut work = Rk4Work::new(n_sites, lanes);
    let mut field = SpinBatch::zeros(n_sites, lanes);

    let mut e0 = vec![0.0; lanes];
    energy_batch(solver, &s, &mut field, &mut work.scratch, &mut e0);
    let mut mz0 = vec![0.0; lanes];
    s.total_z(&mut mz0);

    // M_x trajectory, [step][lane]
    let mut mx = vec![0.0; (n_steps + 1) * lanes];
    s.total_x(&mut mx[..lanes]);
    for k in 1..=n_steps {
        rk4_step_batch(solver, &mut s, params.dt, &mut work);
        let row = &mut mx[k * lanes..(k + 1) * lanes];
        s.total_x(row);
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalFailure(format!(
                "non-finite magnetization at step {k} (realizations {first}..{}); reduce dt",
                first + lanes
            )));
        }
    }

    let mut diagnostics = EnsembleDiagnostics::default();
    let mut buf = vec![0.0; lanes];
    s.norm_drift(&mut buf);
    diagnostics.max_spin_norm_drift = buf.iter().copied().fold(0.0, f64::max);
    let mut e1 = vec![0.0; lanes];
    energy_batch(solver, &s, &mut field, &mut work.scratch, &mut e1);
    s.total_z(&mut buf);
    diagnostics.max_mz_drift = buf.iter().zip(&mz0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);

    let tol = params.tolerance;
    let floor = tol.energy_absolute_per_site * n_sites as f64 * field_scale;
    for q in 0..lanes {
        let de = (e1[q] - e0[q]).abs();
        diagnostics.max_energy_drift_absolute = diagnostics.max_energy_drift_absolute.max(de);
        let ok = if e0[q].abs() * tol.energy_relative > floor {
            let rel = de / e0[q].abs();
            diagnostics.max_energy_drift_relative = diagnostics.max_energy_drift_relative.max(rel);
            rel <= tol.energy_relative
        } else {
            de <= floor
        };
        if !ok {
            return Err(Error::NumericalFailure(format!(
                "energy drift {de:.3e} (E0 = {:.6e}) in realization {} exceeds tolerance; reduce dt",
                e0[q],
                first + q
            )));
        }
    }
    if diagnostics.max_spin_norm_drift > tol.spin_norm {
        return Err(Error::NumericalFailure(format!(
            "spin length drift {:.3e} exceeds {:.1e}; reduce dt",
            diagnostics.max_spin_norm_drift, tol.spin_norm
        )));
    }

    Ok(BatchResult { first, correlations: autocorrelate(&mx, lanes, n_steps + 1, n_lags), diagnostics })
}

/// Sliding-window averages (1/(K-l)) Σ_k M[k] M[k+l] per lane.
fn autocorrelate(mx: &[f64], lanes: usize, len: usize, n_lags: usize) -> Vec<Vec<f64>> {
    let mut sums = vec![0.0; n_lags * lanes];
    for lag in 0..n_lags {
        let out = &mut sums[lag * lanes..(lag + 1) * lanes];
        for k in 0..len - lag {
            let a = &mx[k * lanes..(k + 1) * lanes];
            let b = &mx[(k + lag) * lanes..(k + lag + 1) * lanes];
            for q in 0..lanes {
                out[q] += a[q] * b[q];
            }
        }
        let w = 1.0 / (len - lag) as f64;
        for v in out.iter_mut() {
            *v *= w;
        }
    }
    (0..lanes)
        .map(|q| (0..n_lags).map(|l| sums[l * lanes + q]).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn autocorrelation_of_constant_and_alternating() {
        // lane 0: constant 2, lane 1: alternating ±1
        let len = 6;
        let mut mx = vec![0.0; len * 2];
        for k in 0..len {
            mx[2 * k] = 2.0;
            mx[2 * k + 1] = if k % 2 == 0 { 1.0 } else { -1.0 };
        }
        let c = autocorrelate(&mx, 2, len, 3);
        assert_eq!(c[0], vec![4.0, 4.0, 4.0]);
        assert_eq!(c[1], vec![1.0, -1.0, 1.0]);
    }
}
