//! Dense state-vector and density-matrix primitives over named registers.

mod cq;
mod density;
mod info;
mod layout;
mod spectrum;
mod state;

pub use cq::{CqEntry, CqState, QuantumPart};
pub use density::DensityMatrix;
pub use info::{
    conditional_mutual_information, cq_entropy, mutual_information, trace_distance, von_neumann_entropy,
    RegisterEntropy,
};
pub use layout::{qubits_for, Register, RegisterLayout, MAX_QUBITS};
pub use spectrum::{
    density_spectrum, hermitian_spectrum, shannon_entropy, spectrum_entropy, CMatrix, EIGEN_ZERO,
    NEGATIVE_TOLERANCE, STATE_TOLERANCE,
};
pub use state::PureState;

