//! Classified densities, moving fluxes, moving-domain integrals and balance residuals.

mod density;
mod local;
mod moving;
mod series;
mod triviality;

pub use density::{
    entropy_flux_potential, DensityPartials, DensitySpec, DensityVariant, FluxForm, PointFields, TOL_GEOM,
};
pub use local::local_conservation_residual;
pub use moving::{bernoulli, boundary_flux, circulation, domain_integral, polyline_flux, sample_point, PointSample};
pub use series::{observe_circulation, BalanceTracker, IntegralSeries};
pub use triviality::{is_trivial_density, TRIVIAL_TOL};
