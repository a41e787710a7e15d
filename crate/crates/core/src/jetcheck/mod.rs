//! Determining equations evaluated on randomized jet-space samples.

pub mod euler_op;
mod jet;
mod oneform;
mod residuals;
pub mod suite;

pub use euler_op::{euler_operator, DtDensity, Divergence, ExplicitOnly, JetFunctional, PlainDensity, StateProduct};
pub use jet::{sample_jet, sample_jets, JetPoint, SecondOrder};
pub use oneform::{oneform_reduced, oneform_residual};
pub use residuals::{
    density_at, determining_system_residuals, euler_from_partials, euler_residuals, flux_consistency,
    material_time_derivative, split_from_partials, DeterminingReport, EulerResiduals,
};

/// Pass threshold on the analytic path.
pub const PASS_TOL: f64 = 1e-9;
/// Falsification threshold.
pub const FAIL_TOL: f64 = 1e-3;

/// The density being certified; perturbation knobs live on the spec.
pub type DensityExpression = crate::integrals::DensitySpec;

#[cfg(test)]
mod tests;
