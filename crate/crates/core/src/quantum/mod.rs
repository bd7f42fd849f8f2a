//! Complex Hermitian linear algebra for density operators, tests and POVMs.

mod linalg;
mod measurement;
mod operator;
mod ops;
pub mod random;

pub use linalg::{eig_hermitian, Eigen};
pub use measurement::{hayashi_nagaoka_check, measure, outcome_probabilities, pretty_good_measurement, Povm};
pub use operator::{CMatrix, DensityOperator, HermitianOperator, C64};
pub use ops::{partial_trace, partial_trace_operator, tensor, tensor_operator, trace_product};

pub(crate) use linalg::{eig_hermitian_matrix, inverse_sqrt_on_support};

/// Entrywise Hermiticity slack.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Slack on the smallest eigenvalue and on the trace of a density operator.
pub const DENSITY_TOL: f64 = 1e-10;
/// Slack for POVM positivity and completeness.
pub const POVM_TOL: f64 = 1e-9;
/// Relative eigenvalue cutoff defining the support in pseudo-inverses.
pub const SUPPORT_CUTOFF: f64 = 1e-10;
