use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use fidsim_core::analysis::{fit_long_time_tail, to_physical_units, FitWindow, TailFit};
use fidsim_core::classical::{run_classical_ensemble, DriftTolerance, IntegrationParams};
use fidsim_core::quantum::{exact_correlation_small, quantum_correlation, HilbertSpec, QuantumParams, VECTORS_PER_SAMPLE};
use fidsim_core::{
    build_dipolar_couplings, build_nearest_neighbor, compute_neff, compute_tau, rescale_for_classical,
    rescale_for_quantum, CorrelationSeries, CouplingTable, DipolarConstants, Error, Spin, SpinKind,
};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{CouplingSource, ExperimentConfig, Method};
use crate::CliError;

/// Coupling table for the configured lattice and spin kind. Nearest-neighbour
/// values are classical-scale; dipolar tables are built for the quantum spin
/// and rescaled for classical runs.
pub fn build_table(config: &ExperimentConfig) -> Result<CouplingTable, CliError> {
    let spec = config.lattice_spec()?;
    let s = config.spin.s;
    let table = match config.couplings.source {
        CouplingSource::NearestNeighbor => {
            let classical = build_nearest_neighbor(&spec, config.coupling_values(), SpinKind::Classical)?;
            match config.kind() {
                SpinKind::Classical => classical,
                SpinKind::Quantum(s) => rescale_for_quantum(&classical, s)?,
            }
        }
        CouplingSource::Dipolar => {
            let quantum = build_dipolar_couplings(&spec, config.couplings.direction, SpinKind::Quantum(s))?;
            match config.kind() {
                SpinKind::Classical => rescale_for_classical(&quantum, s)?,
                SpinKind::Quantum(_) => quantum,
            }
        }
    };
    Ok(table)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnosis {
    pub tau: f64,
    pub n_eff: f64,
    pub spin: Spin,
    pub agreement_expected: bool,
    /// None where no criterion applies (S ≥ 1)
    pub long_time_reliable: Option<bool>,
}

impl Diagnosis {
    pub fn verdict_lines(&self) -> Vec<String> {
        let yes_no = |b: bool| if b { "expected" } else { "not expected" };
        let mut v = vec![format!(
            "quantitative classical-quantum agreement: {} (S = {}, n_eff = {:.2}, threshold {})",
            yes_no(self.agreement_expected),
            self.spin,
            self.n_eff,
            if self.spin == Spin::HALF { 4 } else { 2 }
        )];
        match self.long_time_reliable {
            Some(b) => v.push(format!(
                "long-time constants from classical simulation: {} (threshold n_eff >= 9)",
                if b { "reliable" } else { "unreliable" }
            )),
            None => v.push("long-time constants from classical simulation: no criterion for S >= 1".into()),
        }
        v
    }
}

pub fn diagnose(config: &ExperimentConfig) -> Result<Diagnosis, CliError> {
    config.validate()?;
    let table = build_table(config)?;
    let tau = compute_tau(&table)?;
    let n_eff = compute_neff(&table)?;
    let spin = config.spin.s;
    let half = spin == Spin::HALF;
    Ok(Diagnosis {
        tau,
        n_eff,
        spin,
        agreement_expected: n_eff >= if half { 4.0 } else { 2.0 },
        long_time_reliable: half.then_some(n_eff >= 9.0),
    })
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub series: CorrelationSeries,
    pub fit: Result<TailFit, String>,
    pub diagnosis: Diagnosis,
    pub files: Vec<PathBuf>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    fidsim_version: &'a str,
    preset: Option<&'a str>,
    seed: u64,
    config_sha256: String,
    couplings_sha256: String,
    files: Vec<(String, String)>,
}

pub fn run(config: &ExperimentConfig) -> Result<RunOutcome, CliError> {
    let diagnosis = diagnose(config)?;
    let table = build_table(config)?;
    let (mut series, drift_line) = simulate(config, &table)?;
    series.meta.insert("couplings_sha256".into(), table.content_hash());
    if let Some(p) = &config.preset {
        series.meta.insert("preset".into(), p.clone());
    }

    let fit = if config.analysis.fit {
        let window = config.analysis.window.map(|[t_lo, t_hi]| FitWindow { t_lo, t_hi });
        fit_long_time_tail(&series, window, None).map_err(|e| e.to_string())
    } else {
        Err("disabled".into())
    };

    let dir = &config.output.dir;
    fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    let mut write = |name: &str, text: &str| -> Result<(), CliError> {
        let path = dir.join(name);
        fs::write(&path, text)?;
        files.push(path);
        Ok(())
    };
    write("config.toml", &config.canonical().to_toml())?;
    write("couplings.txt", &table.to_text())?;
    write("series.csv", &series.to_csv())?;
    let fit_json = match &fit {
        Ok(f) => f.to_json(),
        Err(e) => serde_json::to_string_pretty(&serde_json::json!({ "error": e })).expect("json"),
    };
    write("fit.json", &fit_json)?;
    write("report.txt", &report(config, &series, &fit, &diagnosis, &drift_line))?;

    let manifest = Manifest {
        fidsim_version: env!("CARGO_PKG_VERSION"),
        preset: config.preset.as_deref(),
        seed: config.seed,
        config_sha256: config.content_hash(),
        couplings_sha256: table.content_hash(),
        files: files.iter().map(|p| Ok((file_name(p), sha256_file(p)?))).collect::<Result<_, CliError>>()?,
    };
    let path = dir.join("manifest.json");
    fs::write(&path, serde_json::to_string_pretty(&manifest).expect("json"))?;
    files.push(path);
    Ok(RunOutcome { series, fit, diagnosis, files })
}

fn simulate(config: &ExperimentConfig, table: &CouplingTable) -> Result<(CorrelationSeries, String), CliError> {
    let r = &config.run;
    let t_max = config.t_max();
    match config.method() {
        Method::Classical => {
            let mut params = IntegrationParams::new(r.dt, r.total_time, r.realizations, config.seed);
            params.batch_size = r.batch_size;
            params.tolerance = DriftTolerance {
                spin_norm: r.norm_tolerance,
                energy_relative: r.energy_tolerance,
                energy_absolute_per_site: r.energy_tolerance,
            };
            let e = run_classical_ensemble(table, &params, t_max)?;
            let d = e.diagnostics;
            let line = format!(
                "max spin-length drift {:.3e}, max relative energy drift {:.3e}, max M_z drift {:.3e}",
                d.max_spin_norm_drift, d.max_energy_drift_relative, d.max_mz_drift
            );
            Ok((e.series, line))
        }
        Method::Typicality => {
            let spec = HilbertSpec::new(table.site_count(), config.spin.s)?;
            check_memory(config, &spec)?;
            let params = QuantumParams::new(r.dt, t_max, r.samples, config.seed);
            let e = quantum_correlation(table, &spec, &params)?;
            let d = &e.diagnostics;
            let line = format!(
                "max norm drift {:.3e}, max |Im C| {:.3e} ({:.2} standard errors), {} Chebyshev terms per step",
                d.max_norm_drift, d.max_imaginary, d.max_imaginary_z, d.terms_per_step
            );
            Ok((e.series, line))
        }
        Method::Exact => {
            let spec = HilbertSpec::new(table.site_count(), config.spin.s)?;
            let n = (t_max / r.dt).round() as usize;
            let times: Vec<f64> = (0..=n).map(|k| k as f64 * r.dt).collect();
            Ok((exact_correlation_small(table, &spec, &times)?, "exact diagonalization".into()))
        }
    }
}

/// Refuses typicality runs whose state vectors would exceed the memory budget.
fn check_memory(config: &ExperimentConfig, spec: &HilbertSpec) -> Result<(), CliError> {
    const HINT: &str = "use a smaller lattice (--lattice)";
    if let Err(e) = spec.require_propagation_cap() {
        return Err(Error::ResourceCap(format!("{e}; {HINT}")).into());
    }
    let need = spec.memory_bytes(VECTORS_PER_SAMPLE) as f64;
    let limit = config.run.memory_limit_gb * 1e9;
    if need > limit {
        return Err(Error::ResourceCap(format!(
            "typicality on D = {} needs about {:.1} GB of state vectors, above the {:.1} GB limit; \
             {HINT} or raise run.memory_limit_gb",
            spec.dim(),
            need / 1e9,
            config.run.memory_limit_gb
        ))
        .into());
    }
    Ok(())
}

fn report(
    config: &ExperimentConfig,
    series: &CorrelationSeries,
    fit: &Result<TailFit, String>,
    diagnosis: &Diagnosis,
    drift_line: &str,
) -> String {
    let mut s = String::new();
    let dims: Vec<String> = config.lattice.dims.iter().map(|d| d.to_string()).collect();
    let _ = writeln!(s, "preset: {}", config.preset.as_deref().unwrap_or("(none)"));
    let _ = writeln!(s, "lattice: {}", dims.join("x"));
    match config.couplings.source {
        CouplingSource::Dipolar => {
            let _ = writeln!(s, "couplings: dipolar, field along {}", config.couplings.direction);
        }
        CouplingSource::NearestNeighbor => {
            let [x, y, z] = config.couplings.values;
            let _ = writeln!(s, "couplings: nearest neighbour (Jx, Jy, Jz) = ({x}, {y}, {z}) for classical spins");
        }
    }
    let _ = writeln!(s, "spin: {} (S = {})", config.kind(), config.spin.s);
    let _ = writeln!(s, "method: {:?}, dt {}, t_max {}, seed {}", config.method(), config.run.dt, config.t_max(), config.seed);
    let _ = writeln!(s, "tau: {:.6}", diagnosis.tau);
    let _ = writeln!(s, "n_eff: {:.4}", diagnosis.n_eff);
    for v in diagnosis.verdict_lines() {
        let _ = writeln!(s, "{v}");
    }
    let _ = writeln!(s, "integration: {drift_line}");
    let _ = writeln!(s, "C_raw(0): {:.6}", series.normalization);
    match fit {
        Ok(f) => {
            let _ = writeln!(
                s,
                "tail fit on [{:.3}, {:.3}]: A = {:.6}, gamma = {:.6}, omega = {:.6}, phi = {:.6}, rms residual = {:.4}{}",
                f.window.t_lo,
                f.window.t_hi,
                f.amplitude,
                f.gamma,
                f.omega,
                f.phase,
                f.rms_residual,
                if f.high_residual { " (high: tail not of damped-cosine form)" } else { "" }
            );
            if config.couplings.source == CouplingSource::Dipolar {
                if let Ok(c) = DipolarConstants::new(config.couplings.gyromagnetic_ratio, config.couplings.lattice_period_angstrom) {
                    let p = to_physical_units(f, &c);
                    let _ = writeln!(s, "direction  gamma (1/ms)  omega (rad/ms)");
                    let _ = writeln!(s, "{:<9}  {:>11.2}  {:>14.2}", config.couplings.direction.to_string(), p.gamma, p.omega);
                }
            }
        }
        Err(e) => {
            let _ = writeln!(s, "tail fit: not available ({e})");
        }
    }
    s
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

fn sha256_file(p: &Path) -> Result<String, CliError> {
    Ok(hex::encode(Sha256::digest(fs::read(p)?)))
}
