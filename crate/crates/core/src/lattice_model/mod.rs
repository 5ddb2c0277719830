//! Lattice geometry, coupling tables, and the diagnostics τ and n_eff.

mod builders;
mod diagnostics;
mod geometry;
mod table;

pub use builders::{
    build_dipolar_couplings, build_nearest_neighbor, dipolar_coupling, rescale_for_classical,
    rescale_for_quantum, DipolarConstants, FieldDirection, HBAR_ERG_S,
};
pub use diagnostics::{compute_neff, compute_tau};
pub use geometry::LatticeSpec;
pub use table::{Bond, Coupling, CouplingTable, Neighbor, Units};
