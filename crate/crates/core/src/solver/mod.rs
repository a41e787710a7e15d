//! Covariant compressible Euler solver on periodic structured grids, with Lagrangian markers.

mod markers;
mod stencil;

pub use markers::{wrapped, MarkerKind, MarkerSet};
pub use stencil::{derivative, gradient, interpolate, InterpKind, InterpStencil, SpatialOrder};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fluid::{Eos, FluidState, Grid};
use crate::manifold::{ChartMetric, Connection};

/// Time stepping controls.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub dt: f64,
    #[serde(default = "default_cfl")]
    pub cfl_target: f64,
    #[serde(default = "default_order")]
    pub order: SpatialOrder,
    pub t_end: f64,
    /// steps between snapshots
    #[serde(default = "default_every")]
    pub snapshot_every: usize,
}

fn default_cfl() -> f64 {
    0.5
}
fn default_order() -> SpatialOrder {
    SpatialOrder::Second
}
fn default_every() -> usize {
    10
}

impl SolverConfig {
    pub fn new(dt: f64, t_end: f64) -> Self {
        SolverConfig { dt, cfl_target: default_cfl(), order: default_order(), t_end, snapshot_every: default_every() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::config("solver.dt", "must be positive"));
        }
        if !(self.cfl_target > 0.0 && self.cfl_target <= 1.0) {
            return Err(Error::config("solver.cfl_target", "must lie in (0, 1]"));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::config("solver.t_end", "must be non-negative"));
        }
        if self.snapshot_every == 0 {
            return Err(Error::config("solver.snapshot_every", "must be at least 1"));
        }
        Ok(())
    }

    /// Number of steps reaching t_end.
    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }
}

/// Chart geometry sampled at every grid node.
#[derive(Clone, Debug)]
pub struct GridGeometry {
    pub chart: ChartMetric,
    pub grid: Grid,
    pub conn: Vec<Connection>,
}

impl GridGeometry {
    pub fn new(chart: &ChartMetric, grid: &Grid) -> Result<Self> {
        if chart.dim != grid.dim() {
            return Err(Error::Dimension { expected: chart.dim, got: grid.dim() });
        }
        let conn = (0..grid.len()).into_par_iter().map(|i| chart.connection(&grid.point(i))).collect::<Result<Vec<_>>>()?;
        Ok(GridGeometry { chart: chart.clone(), grid: grid.clone(), conn })
    }

    pub fn sqrt_g(&self) -> Vec<f64> {
        self.conn.iter().map(|c| c.sqrt_det_g).collect()
    }

    /// Σ_k f_k √g_k w_k with trapezoid node weights.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        (0..self.grid.len()).map(|i| f[i] * self.conn[i].sqrt_det_g * self.grid.quadrature_weight(i)).sum()
    }

    /// ∇_i v^i = g^{-1/2} ∂_i(√g v^i) in flux form.
    pub fn divergence(&self, v: &[Vec<f64>], order: SpatialOrder) -> Vec<f64> {
        let sg = self.sqrt_g();
        let mut div = vec![0.0; self.grid.len()];
        for (a, va) in v.iter().enumerate() {
            let flux: Vec<f64> = va.iter().zip(&sg).map(|(x, s)| x * s).collect();
            let d = derivative(&self.grid, &flux, a, order);
            div.iter_mut().zip(&d).for_each(|(o, x)| *o += x);
        }
        div.iter_mut().zip(&sg).for_each(|(o, s)| *o /= s);
        div
    }

    /// (i, a, point) = ∇_a u^i on the grid.
    pub fn covariant_gradient(&self, u: &[Vec<f64>], order: SpatialOrder) -> Vec<Vec<Vec<f64>>> {
        let n = u.len();
        let mut d: Vec<Vec<Vec<f64>>> = u.iter().map(|ui| gradient(&self.grid, ui, order)).collect();
        if self.chart.flat {
            return d;
        }
        for i in 0..n {
            for a in 0..n {
                d[i][a].par_iter_mut().enumerate().for_each(|(p, v)| {
                    let c = &self.conn[p];
                    for k in 0..n {
                        *v += c.gamma.get(i, a, k) * u[k][p];
                    }
                });
            }
        }
        d
    }
}

/// Time derivatives of (u, ρ, S), stored as a state whose t-component is 1.
pub type Rhs = FluidState;

fn check_density(state: &FluidState) -> Result<()> {
    if let Some((i, r)) = state.rho.iter().enumerate().find(|(_, r)| !(**r > 0.0)) {
        if r.is_finite() {
            return Err(Error::NonPositiveDensity { index: i, x: state.grid.point(i), value: *r });
        }
        return Err(Error::NonFinite { field: "rho".into(), index: i, x: state.grid.point(i) });
    }
    Ok(())
}

/// du^i/dt = −u^j∇_ju^i − ρ⁻¹g^{ij}(P_ρ∂_jρ + P_S∂_jS), dρ/dt = −∇_i(ρu^i), dS/dt = −u^i∂_iS.
pub fn euler_rhs(state: &FluidState, geom: &GridGeometry, eos: &Eos, order: SpatialOrder) -> Result<Rhs> {
    check_density(state)?;
    let grid = &state.grid;
    let n = grid.dim();
    let m = grid.len();
    let cov = geom.covariant_gradient(&state.u, order);
    let drho = gradient(grid, &state.rho, order);
    let ds = gradient(grid, &state.s, order);
    let rho_u: Vec<Vec<f64>> = state.u.iter().map(|ui| ui.iter().zip(&state.rho).map(|(a, b)| a * b).collect()).collect();
    let div_rho_u = geom.divergence(&rho_u, order);
    let point = |p: usize| -> Result<[f64; 5]> {
        let c = &geom.conn[p];
        let rho = state.rho[p];
        let (_, p_r, p_s) = eos.pressure(rho, state.s[p])?;
        let mut out = [0.0; 5];
        for i in 0..n {
            let mut v = 0.0;
            for j in 0..n {
                v -= state.u[j][p] * cov[i][j][p];
                v -= c.g_inv[(i, j)] * (p_r * drho[j][p] + p_s * ds[j][p]) / rho;
            }
            out[i] = v;
        }
        out[n] = -div_rho_u[p];
        out[n + 1] = -(0..n).map(|a| state.u[a][p] * ds[a][p]).sum::<f64>();
        Ok(out)
    };
    let vals = (0..m).into_par_iter().map(point).collect::<Result<Vec<_>>>()?;
    let col = |k: usize| vals.iter().map(|v| v[k]).collect::<Vec<f64>>();
    Ok(FluidState { grid: grid.clone(), t: 1.0, u: (0..n).map(col).collect(), rho: col(n), s: col(n + 1) })
}

/// Largest dt with cfl · min(metric spacing / (|u| + c_s)).
pub fn max_stable_dt(state: &FluidState, geom: &GridGeometry, eos: &Eos, cfl: f64) -> Result<f64> {
    let n = state.dim();
    let h = &state.grid.spacing;
    let worst = (0..state.len())
        .into_par_iter()
        .map(|p| -> Result<f64> {
            let c = &geom.conn[p];
            let (_, p_r, _) = eos.pressure(state.rho[p], state.s[p])?;
            let u = state.velocity(p);
            let speed = c.inner(&u, &u).sqrt() + p_r.max(0.0).sqrt();
            let hm = (0..n).map(|a| h[a] * c.g[(a, a)].sqrt()).fold(f64::INFINITY, f64::min);
            Ok(if speed > 0.0 { hm / speed } else { f64::INFINITY })
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    Ok(cfl * worst)
}

/// RK4 integrator for the fluid and any attached marker sets.
#[derive(Clone, Debug)]
pub struct Solver {
    pub geom: GridGeometry,
    pub eos: Eos,
    pub cfg: SolverConfig,
}

impl Solver {
    pub fn new(chart: &ChartMetric, grid: &Grid, eos: Eos, cfg: SolverConfig) -> Result<Self> {
        cfg.validate()?;
        eos.validate("eos")?;
        Ok(Solver { geom: GridGeometry::new(chart, grid)?, eos, cfg })
    }

    pub fn rhs(&self, state: &FluidState) -> Result<Rhs> {
        euler_rhs(state, &self.geom, &self.eos, self.cfg.order)
    }

    pub fn check_cfl(&self, state: &FluidState) -> Result<()> {
        let suggested = max_stable_dt(state, &self.geom, &self.eos, self.cfg.cfl_target)?;
        if self.cfg.dt > suggested {
            return Err(Error::Cfl { dt: self.cfg.dt, suggested });
        }
        Ok(())
    }

    pub fn step(&self, state: &FluidState) -> Result<FluidState> {
        self.step_with_markers(state, &mut [])
    }

    /// One RK4 step; markers are integrated with the same stages.
    pub fn step_with_markers(&self, state: &FluidState, markers: &mut [MarkerSet]) -> Result<FluidState> {
        self.check_cfl(state)?;
        let dt = self.cfg.dt;
        let mut stage_state = state.clone();
        let mut stage_markers: Vec<MarkerSet> = markers.to_vec();
        let mut acc_state = state.clone();
        let mut acc_markers: Vec<MarkerSet> = markers.to_vec();
        for (k, (c_next, b)) in [(0.5, 1.0 / 6.0), (0.5, 1.0 / 3.0), (1.0, 1.0 / 3.0), (0.0, 1.0 / 6.0)].into_iter().enumerate() {
            let f = self.rhs(&stage_state)?;
            let mv = marker_rates(&self.geom, self.cfg.order, &stage_state, &stage_markers)?;
            acc_state = acc_state.axpy(b * dt, &f);
            for (acc, v) in acc_markers.iter_mut().zip(&mv) {
                apply_marker_update(acc, v, b * dt);
            }
            if k < 3 {
                stage_state = state.axpy(c_next * dt, &f);
                stage_markers = markers.to_vec();
                for (s, v) in stage_markers.iter_mut().zip(&mv) {
                    apply_marker_update(s, v, c_next * dt);
                }
            }
        }
        acc_state.t = state.t + dt;
        acc_state.validate()?;
        for m in acc_markers.iter_mut() {
            m.refresh_arc_elements(&self.geom.chart)?;
        }
        markers.clone_from_slice(&acc_markers);
        Ok(acc_state)
    }

    /// Interpolated velocity at every marker of one set.
    pub fn marker_velocity(&self, state: &FluidState, markers: &MarkerSet) -> Result<Vec<Vec<f64>>> {
        Ok(marker_rates(&self.geom, self.cfg.order, state, std::slice::from_ref(markers))?.remove(0).0)
    }

    /// Integrate to t_end; `observe` sees the initial state and every snapshot.
    pub fn run(
        &self,
        state: FluidState,
        markers: &mut [MarkerSet],
        mut observe: impl FnMut(usize, &FluidState, &[MarkerSet]) -> Result<()>,
    ) -> Result<FluidState> {
        let mut s = state;
        observe(0, &s, markers)?;
        for k in 1..=self.cfg.steps() {
            s = self.step_with_markers(&s, markers)?;
            if k % self.cfg.snapshot_every == 0 {
                observe(k, &s, markers)?;
            }
        }
        Ok(s)
    }
}

type MarkerRate = (Vec<Vec<f64>>, Vec<f64>);

/// dx/dt per marker and, for interior sets, dw/dt = (∇_iu^i)w per marker.
fn marker_rates(geom: &GridGeometry, order: SpatialOrder, state: &FluidState, markers: &[MarkerSet]) -> Result<Vec<MarkerRate>> {
    if markers.is_empty() {
        return Ok(vec![]);
    }
    let div = if markers.iter().any(|m| m.kind == MarkerKind::DomainInterior) {
        Some(geom.divergence(&state.u, order))
    } else {
        None
    };
    markers
        .iter()
        .map(|m| {
            let rows = m
                .positions
                .par_iter()
                .enumerate()
                .map(|(k, x)| {
                    let st = InterpStencil::new(&state.grid, x, InterpKind::Cubic)
                        .map_err(|_| Error::MarkerLost { index: k, x: x.clone() })?;
                    let v: Vec<f64> = state.u.iter().map(|ui| st.apply(ui)).collect();
                    let w = match (&div, m.kind) {
                        (Some(d), MarkerKind::DomainInterior) => st.apply(d) * m.weights[k],
                        _ => 0.0,
                    };
                    Ok((v, w))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(rows.into_iter().unzip())
        })
        .collect()
}

/// RK4 transport of markers through a frozen velocity field.
pub fn advect_markers(markers: &mut MarkerSet, state: &FluidState, geom: &GridGeometry, order: SpatialOrder, dt: f64) -> Result<()> {
    let start = markers.clone();
    let mut stage = start.clone();
    let mut acc = start.clone();
    for (k, (c_next, b)) in [(0.5, 1.0 / 6.0), (0.5, 1.0 / 3.0), (1.0, 1.0 / 3.0), (0.0, 1.0 / 6.0)].into_iter().enumerate() {
        let r = marker_rates(geom, order, state, std::slice::from_ref(&stage))?.remove(0);
        apply_marker_update(&mut acc, &r, b * dt);
        if k < 3 {
            stage = start.clone();
            apply_marker_update(&mut stage, &r, c_next * dt);
        }
    }
    acc.refresh_arc_elements(&geom.chart)?;
    *markers = acc;
    Ok(())
}

fn apply_marker_update(m: &mut MarkerSet, rate: &MarkerRate, h: f64) {
    for (x, v) in m.positions.iter_mut().zip(&rate.0) {
        x.iter_mut().zip(v).for_each(|(a, b)| *a += h * b);
    }
    if m.kind == MarkerKind::DomainInterior {
        m.weights.iter_mut().zip(&rate.1).for_each(|(w, r)| *w += h * r);
    }
}

#[cfg(test)]
mod tests;
