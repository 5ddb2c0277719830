//! Experiment configuration. Files are TOML with the sections below; every
//! key is optional and falls back to the documented default.
//!
//! ```toml
//! seed = 1                      # master seed of all random streams
//!
//! [lattice]
//! dims = [12]                   # 1-3 periodic extents
//!
//! [couplings]
//! source = "nearest-neighbor"   # or "dipolar"
//! values = [-0.41, -0.41, 0.82] # (Jx, Jy, Jz) for classical spins;
//!                               # quantum runs divide by sqrt(S(S+1))
//! direction = "111"             # dipolar only: "100", "110", "111"
//! gyromagnetic_ratio = 25166.2  # dipolar only, rad s^-1 Oe^-1
//! lattice_period_angstrom = 2.72
//!
//! [spin]
//! kind = "classical"            # or "quantum"
//! s = "1/2"                     # quantum spin; for classical runs the spin
//!                               # being modelled (dipolar rescaling, verdicts)
//!
//! [run]
//! method = "classical"          # "typicality" or "exact" for quantum spins;
//!                               # defaults follow spin.kind
//! dt = 0.05                     # step and output grid
//! total_time = 200.0            # classical trajectory length T
//! t_max = 20.0                  # last lag; classical runs clamp to T/2
//! realizations = 1000           # classical ensemble size
//! samples = 4                   # random states for typicality
//! workers = 0                   # threads; 0 = all cores
//! batch_size = 64               # classical realizations per vector batch
//! norm_tolerance = 1e-4         # classical spin-length drift guard
//! energy_tolerance = 1e-4       # classical energy drift guard, relative to E(0)
//!                                # (or to N·|h| when E(0) is near zero)
//! memory_limit_gb = 4.0         # quantum state-vector budget
//!
//! [analysis]
//! fit = true                    # fit the long-time tail
//! window = [2.0, 8.0]           # fit window; automatic when absent
//!
//! [output]
//! dir = "fidsim-out"
//! ```

use std::path::PathBuf;

use fidsim_core::{Coupling, FieldDirection, LatticeSpec, Spin, SpinKind};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub preset: Option<String>,
    pub seed: u64,
    pub lattice: LatticeSection,
    pub couplings: CouplingSection,
    pub spin: SpinSection,
    pub run: RunSection,
    pub analysis: AnalysisSection,
    pub output: OutputSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LatticeSection {
    pub dims: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingSource {
    NearestNeighbor,
    Dipolar,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CouplingSection {
    pub source: CouplingSource,
    pub values: [f64; 3],
    pub direction: FieldDirection,
    pub gyromagnetic_ratio: f64,
    pub lattice_period_angstrom: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KindName {
    Classical,
    Quantum,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpinSection {
    pub kind: KindName,
    pub s: Spin,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Classical,
    Typicality,
    Exact,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub method: Option<Method>,
    pub dt: f64,
    pub total_time: f64,
    pub t_max: Option<f64>,
    pub realizations: usize,
    pub samples: usize,
    pub workers: usize,
    pub batch_size: usize,
    pub norm_tolerance: f64,
    pub energy_tolerance: f64,
    pub memory_limit_gb: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisSection {
    pub fit: bool,
    pub window: Option<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
}

pub const DEFAULT_T_MAX: f64 = 20.0;

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            preset: None,
            seed: 1,
            lattice: LatticeSection::default(),
            couplings: CouplingSection::default(),
            spin: SpinSection::default(),
            run: RunSection::default(),
            analysis: AnalysisSection::default(),
            output: OutputSection::default(),
        }
    }
}

impl Default for LatticeSection {
    fn default() -> Self {
        LatticeSection { dims: vec![12] }
    }
}

impl Default for CouplingSection {
    fn default() -> Self {
        CouplingSection {
            source: CouplingSource::NearestNeighbor,
            values: [-0.41, -0.41, 0.82],
            direction: FieldDirection::D111,
            gyromagnetic_ratio: 25166.2,
            lattice_period_angstrom: 2.72,
        }
    }
}

impl Default for SpinSection {
    fn default() -> Self {
        SpinSection { kind: KindName::Classical, s: Spin::HALF }
    }
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            method: None,
            dt: 0.05,
            total_time: 200.0,
            t_max: None,
            realizations: 1000,
            samples: 4,
            workers: 0,
            batch_size: 64,
            norm_tolerance: 1e-4,
            energy_tolerance: 1e-4,
            memory_limit_gb: 4.0,
        }
    }
}

impl Default for AnalysisSection {
    fn default() -> Self {
        AnalysisSection { fit: true, window: None }
    }
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { dir: PathBuf::from("fidsim-out") }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn kind(&self) -> SpinKind {
        match self.spin.kind {
            KindName::Classical => SpinKind::Classical,
            KindName::Quantum => SpinKind::Quantum(self.spin.s),
        }
    }

    pub fn method(&self) -> Method {
        self.run.method.unwrap_or(match self.spin.kind {
            KindName::Classical => Method::Classical,
            KindName::Quantum => Method::Typicality,
        })
    }

    pub fn lattice_spec(&self) -> Result<LatticeSpec, CliError> {
        Ok(LatticeSpec::new(&self.lattice.dims)?)
    }

    pub fn coupling_values(&self) -> Coupling {
        let [x, y, z] = self.couplings.values;
        Coupling::new(x, y, z)
    }

    /// Last lag of the output series.
    pub fn t_max(&self) -> f64 {
        let t = self.run.t_max.unwrap_or(DEFAULT_T_MAX);
        match self.method() {
            Method::Classical if self.run.t_max.is_none() => t.min(0.5 * self.run.total_time),
            _ => t,
        }
    }

    /// The configuration with the fields that cannot change results (output
    /// directory, worker count) reset to their defaults.
    pub fn canonical(&self) -> ExperimentConfig {
        let mut c = self.clone();
        c.output = OutputSection::default();
        c.run.workers = 0;
        c
    }

    /// SHA-256 of the canonical TOML text.
    pub fn content_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        hex::encode(Sha256::digest(self.canonical().to_toml().as_bytes()))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let spec = self.lattice_spec()?;
        let bad = |m: String| Err(CliError::Config(m));
        let method = self.method();
        match (self.spin.kind, method) {
            (KindName::Classical, Method::Classical) | (KindName::Quantum, Method::Typicality | Method::Exact) => {}
            (k, m) => return bad(format!("method {m:?} cannot run {k:?} spins")),
        }
        if self.couplings.source == CouplingSource::Dipolar {
            if spec.n_axes() != 3 || !spec.all_odd() || spec.dims().iter().any(|&l| l < 3) {
                return bad(format!("dipolar couplings need three odd extents >= 3, got {:?}", spec.dims()));
            }
            let c = &self.couplings;
            if !(c.gyromagnetic_ratio > 0.0 && c.lattice_period_angstrom > 0.0) {
                return bad("gyromagnetic_ratio and lattice_period_angstrom must be positive".into());
            }
        } else if self.couplings.values.iter().any(|v| !v.is_finite()) {
            return bad("coupling values must be finite".into());
        }
        let r = &self.run;
        if !(r.dt > 0.0 && r.dt.is_finite()) {
            return bad(format!("run.dt must be positive, got {}", r.dt));
        }
        let t_max = self.t_max();
        if !(t_max >= 0.0 && t_max.is_finite()) {
            return bad(format!("run.t_max must be non-negative, got {t_max}"));
        }
        if method == Method::Classical {
            if !(r.total_time >= r.dt) {
                return bad(format!("run.total_time = {} must be at least dt", r.total_time));
            }
            if t_max > 0.5 * r.total_time {
                return bad(format!("run.t_max = {t_max} exceeds total_time / 2 = {}", 0.5 * r.total_time));
            }
            if r.realizations == 0 || r.batch_size == 0 {
                return bad("run.realizations and run.batch_size must be positive".into());
            }
            if !(r.norm_tolerance > 0.0 && r.energy_tolerance > 0.0) {
                return bad("drift tolerances must be positive".into());
            }
        }
        if method == Method::Typicality && r.samples == 0 {
            return bad("run.samples must be positive".into());
        }
        if let Some([lo, hi]) = self.analysis.window {
            if !(lo < hi && lo >= 0.0) {
                return bad(format!("analysis.window [{lo}, {hi}] is empty"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let c = ExperimentConfig::default();
        assert_eq!(ExperimentConfig::from_toml(&c.to_toml()).unwrap(), c);
        assert_eq!(ExperimentConfig::from_toml("").unwrap(), c);
        c.validate().unwrap();
    }

    #[test]
    fn sections_parse() {
        let text = r#"
seed = 5
[lattice]
dims = [7, 7, 7]
[couplings]
source = "dipolar"
direction = "100"
[spin]
kind = "classical"
[run]
realizations = 10
"#;
        let c = ExperimentConfig::from_toml(text).unwrap();
        assert_eq!(c.couplings.direction, FieldDirection::D100);
        assert_eq!(c.method(), Method::Classical);
        assert_eq!(c.t_max(), 20.0);
        c.validate().unwrap();
    }

    #[test]
    fn unknown_keys_and_inconsistent_methods_are_rejected() {
        assert!(ExperimentConfig::from_toml("[run]\nstep = 1").is_err());
        let mut c = ExperimentConfig::default();
        c.run.method = Some(Method::Exact);
        assert!(c.validate().is_err());
        c.spin.kind = KindName::Quantum;
        c.validate().unwrap();
        c.couplings.source = CouplingSource::Dipolar;
        assert!(c.validate().is_err());
    }

    #[test]
    fn hash_ignores_output_location() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        b.output.dir = "elsewhere".into();
        b.run.workers = 3;
        assert_eq!(a.content_hash(), b.content_hash());
        b.seed = 2;
        assert_ne!(a.content_hash(), b.content_hash());
    }
}
