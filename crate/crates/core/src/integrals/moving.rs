use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fluid::{Eos, FluidState};
use crate::manifold::{ChartMetric, Connection};
use crate::solver::{wrapped, GridGeometry, InterpKind, InterpStencil, MarkerKind, MarkerSet};

use super::DensitySpec;

/// Fluid fields and geometry at an off-grid chart point. The connection carries the
/// unwrapped coordinates so attached fields see the covering-space point.
#[derive(Clone, Debug)]
pub struct PointSample {
    pub conn: Connection,
    pub u: Vec<f64>,
    pub rho: f64,
    pub s: f64,
}

pub fn sample_point(state: &FluidState, chart: &ChartMetric, x: &[f64]) -> Result<PointSample> {
    let st = InterpStencil::new(&state.grid, x, InterpKind::Cubic)?;
    let mut conn = chart.connection(&wrapped(chart, x))?;
    conn.x = x.to_vec();
    Ok(PointSample { conn, u: state.u.iter().map(|c| st.apply(c)).collect(), rho: st.apply(&state.rho), s: st.apply(&state.s) })
}

fn density_at(spec: &DensitySpec, eos: &Eos, chart: &ChartMetric, t: f64, p: &PointSample) -> Result<f64> {
    let pf = spec.point_fields(chart, &p.conn)?;
    spec.value(eos, t, &p.conn, &pf, &p.u, p.rho, p.s)
}

/// Σ_k T(x_k) w_k over interior markers.
pub fn domain_integral(markers: &MarkerSet, spec: &DensitySpec, state: &FluidState, geom: &GridGeometry, eos: &Eos) -> Result<f64> {
    if markers.kind != MarkerKind::DomainInterior {
        return Err(Error::Geometry("domain integral needs interior markers".into()));
    }
    if markers.is_empty() {
        return Err(Error::Geometry("empty marker set".into()));
    }
    let vals = markers
        .positions
        .par_iter()
        .zip(&markers.weights)
        .map(|(x, w)| Ok(density_at(spec, eos, &geom.chart, state.t, &sample_point(state, &geom.chart, x)?)? * w))
        .collect::<Result<Vec<f64>>>()?;
    Ok(vals.iter().sum())
}

/// ∮ g(Φ, ν) dA for a closed counter-clockwise 2-D polyline, midpoint rule: each segment
/// contributes √g (Φ¹Δx² − Φ²Δx¹) at its midpoint.
pub fn polyline_flux(
    boundary: &MarkerSet,
    chart: &ChartMetric,
    phi: impl Fn(&[f64], &Connection) -> Result<Vec<f64>> + Sync,
) -> Result<f64> {
    if boundary.positions.first().is_some_and(|x| x.len() != 2) || chart.dim != 2 {
        return Err(Error::Dimension { expected: 2, got: chart.dim });
    }
    if !boundary.closed {
        return Err(Error::Geometry("boundary flux needs a closed polyline".into()));
    }
    boundary.check_simple()?;
    let vals = (0..boundary.segment_count())
        .into_par_iter()
        .map(|k| {
            let (a, b) = boundary.segment_ends(k);
            let mid = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
            let mut conn = chart.connection(&wrapped(chart, &mid))?;
            conn.x = mid.to_vec();
            let f = phi(&mid, &conn)?;
            Ok(conn.sqrt_det_g * (f[0] * (b[1] - a[1]) - f[1] * (b[0] - a[0])))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(vals.iter().sum())
}

/// Moving flux of a density through a transported boundary.
pub fn boundary_flux(boundary: &MarkerSet, spec: &DensitySpec, state: &FluidState, geom: &GridGeometry, eos: &Eos) -> Result<f64> {
    if spec.has_zero_flux() {
        return Ok(0.0);
    }
    let chart = &geom.chart;
    polyline_flux(boundary, chart, |mid, _| {
        let p = sample_point(state, chart, mid)?;
        let pf = spec.point_fields(chart, &p.conn)?;
        Ok(spec.flux(eos, state.t, &p.conn, &pf, p.rho, p.s)?.vector(&p.u))
    })
}

/// Σ segments g(u, Δx) with u and g at the segment midpoint.
pub fn circulation(curve: &MarkerSet, state: &FluidState, geom: &GridGeometry) -> Result<f64> {
    if curve.kind != MarkerKind::Curve {
        return Err(Error::Geometry("circulation needs a curve marker set".into()));
    }
    if curve.segment_count() == 0 {
        return Err(Error::Geometry("degenerate curve".into()));
    }
    let vals = (0..curve.segment_count())
        .into_par_iter()
        .map(|k| {
            let (a, b) = curve.segment_ends(k);
            let mid: Vec<f64> = a.iter().zip(b).map(|(p, q)| 0.5 * (p + q)).collect();
            let d: Vec<f64> = a.iter().zip(b).map(|(p, q)| q - p).collect();
            if d.iter().all(|v| *v == 0.0) {
                return Err(Error::Geometry(format!("zero-length segment {k} in circulation curve")));
            }
            let p = sample_point(state, &geom.chart, &mid)?;
            Ok(p.conn.inner(&p.u, &d))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(vals.iter().sum())
}

/// ½g(u,u) − e − ρ⁻¹P at a point; its endpoint difference drives open-curve circulation.
pub fn bernoulli(state: &FluidState, geom: &GridGeometry, eos: &Eos, x: &[f64]) -> Result<f64> {
    let p = sample_point(state, &geom.chart, x)?;
    let (pr, _, _) = eos.pressure(p.rho, p.s)?;
    Ok(0.5 * p.conn.inner(&p.u, &p.u) - eos.internal_energy(p.rho, p.s)? - pr / p.rho)
}
