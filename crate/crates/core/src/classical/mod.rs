//! Classical spin dynamics: RK4 integration of dS_m/dt = S_m × h_m and
//! ensemble estimation of the infinite-temperature autocorrelation of M_x.

mod batch;
mod dft;
mod ensemble;
mod field;
mod integrator;
mod state;

pub use ensemble::{
    classical_correlation, run_classical_ensemble, ClassicalEnsemble, DriftTolerance,
    EnsembleDiagnostics, IntegrationParams,
};
pub use state::{
    energy, local_field, rk4_step, sample_random_state, ClassicalIntegrator, ClassicalSpinState,
};
