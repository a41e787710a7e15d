use crate::error::Result;
use crate::jetcheck::{euler_operator, JetFunctional, JetPoint};
use crate::manifold::ChartMetric;

/// Threshold below which every Euler operator of T counts as vanishing.
pub const TRIVIAL_TOL: f64 = 1e-10;

/// True iff E_u(T), E_ρ(T), E_S(T) all vanish at every probe jet.
pub fn is_trivial_density<F: JetFunctional>(f: &F, chart: &ChartMetric, jets: &[JetPoint]) -> Result<bool> {
    for jet in jets {
        if euler_operator(f, chart, jet)?.iter().any(|v| v.abs() > TRIVIAL_TOL) {
            return Ok(false);
        }
    }
    Ok(true)
}
