//! Verification laboratory.
//!
//! Turns the analytical ingredients of the method into measured numbers on
//! concrete shapes and meshes: sharp inequality constants as generalized
//! eigenvalue extremes, h-convergence and interpolation error studies,
//! polynomial patch tests, and deterministic CSV reports of all of it.

mod constants;
mod eig;
mod report;
mod studies;

pub use constants::{
    builtin_shape, constant_estimate, shape_label, ConstantEstimate, ConstantQuantity, ShapeKind,
};
pub use eig::{complement_basis, generalized_eig_sym};
pub use report::{constants_csv, convergence_csv, format_float, solution_csv};
pub use studies::{
    convergence_study, interpolation_study, patch_polynomial, patch_test, ConvergenceReport,
    StudyRow, EXACT_FLOOR, PATCH_TOLERANCE,
};
