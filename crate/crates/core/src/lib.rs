//! Infinite-temperature spin autocorrelation functions (NMR free induction
//! decays) for classical and quantum spin lattices.
//!
//! - [`lattice_model`]: lattices, coupling tables, τ and n_eff
//! - [`classical`]: RK4 ensembles of classical spins
//! - [`quantum`]: typicality propagation and an exact dense oracle
//! - [`analysis`]: tail fits, unit conversion, series comparison

pub mod analysis;
pub mod classical;
pub mod error;
pub mod lattice_model;
pub mod quantum;
pub mod rng;
pub mod series;
pub mod spin;

pub use error::{Error, Result};
pub use lattice_model::{
    build_dipolar_couplings, build_nearest_neighbor, compute_neff, compute_tau,
    rescale_for_classical, rescale_for_quantum, Coupling, CouplingTable, DipolarConstants,
    FieldDirection, LatticeSpec, Units,
};
pub use series::CorrelationSeries;
pub use spin::{Spin, SpinKind};
