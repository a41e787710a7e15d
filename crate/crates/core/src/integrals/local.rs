use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fluid::{Eos, FluidState};
use crate::solver::{euler_rhs, GridGeometry, SpatialOrder};

use super::DensitySpec;

/// Refuse attached fields that do not repeat across periodic seams.
fn check_periodic_field(spec: &DensitySpec, geom: &GridGeometry) -> Result<()> {
    let Some(field) = spec.field() else { return Ok(()) };
    let chart = &geom.chart;
    for x in chart.probe_points(3) {
        for a in (0..chart.dim).filter(|a| chart.periodic[*a]) {
            let mut y = x.clone();
            y[a] += chart.extent(a);
            let dv = field.value(&x).iter().zip(field.value(&y)).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
            let dp = field.potential().map_or(0.0, |p| ((p.value)(&x) - (p.value)(&y)).abs());
            if dv.max(dp) > 1e-9 {
                return Err(Error::Classification(format!(
                    "field `{}` does not repeat across the periodic axis {a} of chart {}; grid residuals need a non-periodic chart",
                    field.label, chart.name
                )));
            }
        }
    }
    Ok(())
}

/// ∂_tT + ∇_i(Tu^i + Φ^i) at every grid node, with ∂_t(u, ρ, S) from the discrete fluid equations.
pub fn local_conservation_residual(spec: &DensitySpec, state: &FluidState, geom: &GridGeometry, eos: &Eos, order: SpatialOrder) -> Result<Vec<f64>> {
    check_periodic_field(spec, geom)?;
    let n = state.dim();
    let rhs = euler_rhs(state, geom, eos, order)?;
    let per_point = (0..state.len())
        .into_par_iter()
        .map(|p| {
            let conn = &geom.conn[p];
            let pf = spec.point_fields(&geom.chart, conn)?;
            let u = state.velocity(p);
            let d = spec.partials(eos, state.t, conn, &pf, &u, state.rho[p], state.s[p])?;
            let mut dt = d.t_t + d.t_r * rhs.rho[p] + d.t_s * rhs.s[p];
            for i in 0..n {
                dt += d.t_u[i] * rhs.u[i][p];
            }
            let phi = spec.flux(eos, state.t, conn, &pf, state.rho[p], state.s[p])?.vector(&u);
            let v: Vec<f64> = (0..n).map(|i| d.value * u[i] + phi[i]).collect();
            Ok((dt, v))
        })
        .collect::<Result<Vec<_>>>()?;
    let vec_field: Vec<Vec<f64>> = (0..n).map(|i| per_point.iter().map(|(_, v)| v[i]).collect()).collect();
    let div = geom.divergence(&vec_field, order);
    Ok(per_point.iter().zip(&div).map(|((dt, _), d)| dt + d).collect())
}
