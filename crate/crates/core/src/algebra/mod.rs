//! Dense complex operator algebra for multi-spin registers.

mod density;
mod fidelity;
mod layout;
mod operator;
pub mod spin;
mod superop;

pub(crate) use density::partial_trace_matrix;
pub use density::{DensityOperator, Hygiene};
pub use fidelity::{choi_process_fidelity, state_fidelity};
pub use layout::{HilbertLayout, Subsystem};
pub use operator::{embed, embed_product, Operator};
pub use superop::{unvectorize, vectorize, HermitianBasis, Superoperator};

/// Tolerances used when validating density operators.
pub mod tol {
    pub const TRACE: f64 = 1e-9;
    pub const HERMITIAN: f64 = 1e-10;
    pub const MIN_EIGENVALUE: f64 = -1e-9;
    pub const NORMALIZATION: f64 = 1e-10;
    pub const UNITARY: f64 = 1e-10;
    pub const TRACE_PRESERVING: f64 = 1e-6;
}
