//! Quantum spin-S dynamics on the product S^z basis: matrix-free Hamiltonian
//! action, Chebyshev propagation, typicality estimate of C(t) and an exact
//! diagonalization route for small systems.

mod chebyshev;
mod dense;
mod exact;
mod hamiltonian;
mod hilbert;
mod operators;
mod typicality;

pub use chebyshev::{bessel_j_sequence, propagate, ChebyshevPropagator, PropagatorWork};
pub use dense::{dense_hamiltonian, dense_mx};
pub use exact::{exact_correlation_small, ExactSpectrum};
pub use hamiltonian::{apply_hamiltonian, apply_mx, expectation_mz, SpinHamiltonian};
pub use hilbert::{sample_typical_state, HilbertSpec, StateVector, DENSE_DIM_CAP, PROPAGATION_DIM_CAP};
pub use operators::SpinOperatorSet;
pub use typicality::{quantum_correlation, QuantumDiagnostics, QuantumEstimate, QuantumParams, VECTORS_PER_SAMPLE};
