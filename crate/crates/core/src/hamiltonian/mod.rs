//! The covariant Hamiltonian operator of the fluid, the density-to-symmetry map and
//! the linearised (symmetry determining) equations evaluated along stored runs.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fluid::{Eos, FluidState};
use crate::integrals::DensitySpec;
use crate::solver::{euler_rhs, gradient, GridGeometry, SpatialOrder};

/// (δT/δu, δT/δρ, δT/δS) on the grid. `d_u[i][p]` carries a lower index.
#[derive(Clone, Debug, PartialEq)]
pub struct VariationalTriple {
    pub d_u: Vec<Vec<f64>>,
    pub d_rho: Vec<f64>,
    pub d_s: Vec<f64>,
}

impl VariationalTriple {
    pub fn zeros(n: usize, m: usize) -> Self {
        VariationalTriple { d_u: vec![vec![0.0; m]; n], d_rho: vec![0.0; m], d_s: vec![0.0; m] }
    }
}

/// Evolutionary generator η̂^u ∂_u + η̂^ρ ∂_ρ + η̂^S ∂_S; `eta_u[i][p]` is a vector component.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetryGenerator {
    pub eta_u: Vec<Vec<f64>>,
    pub eta_rho: Vec<f64>,
    pub eta_s: Vec<f64>,
    /// name of the point transformation it came from, when known
    pub point_form: Option<String>,
}

impl SymmetryGenerator {
    pub fn is_zero(&self) -> bool {
        self.eta_u.iter().flatten().chain(&self.eta_rho).chain(&self.eta_s).all(|v| *v == 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.eta_u.iter().flatten().chain(&self.eta_rho).chain(&self.eta_s).fold(0.0, |m, v| m.max(v.abs()))
    }

    fn check_finite(&self, state: &FluidState) -> Result<()> {
        let fields = self.eta_u.iter().chain([&self.eta_rho, &self.eta_s]);
        for (k, f) in fields.enumerate() {
            if let Some(p) = f.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { field: format!("generator component {k}"), index: p, x: state.grid.point(p) });
            }
        }
        Ok(())
    }
}

fn check_density(state: &FluidState) -> Result<()> {
    match state.rho.iter().position(|r| !(*r > 0.0)) {
        Some(p) => Err(Error::NonPositiveDensity { index: p, x: state.grid.point(p), value: state.rho[p] }),
        None => Ok(()),
    }
}

/// (p, i, j) layout flattened: ∂_iu_j − ∂_ju_i with u lowered pointwise.
fn vorticity(state: &FluidState, geom: &GridGeometry, order: SpatialOrder) -> Vec<Vec<Vec<f64>>> {
    let n = state.dim();
    let m = state.len();
    let low: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..m).map(|p| (0..n).map(|k| geom.conn[p].g[(j, k)] * state.u[k][p]).sum()).collect())
        .collect();
    // d[j][i] = ∂_i u_j
    let d: Vec<Vec<Vec<f64>>> = low.iter().map(|f| gradient(&state.grid, f, order)).collect();
    (0..n).map(|i| (0..n).map(|j| (0..m).map(|p| d[j][i][p] - d[i][j][p]).collect()).collect()).collect()
}

fn raise_field(geom: &GridGeometry, w: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = w.len();
    let m = geom.grid.len();
    (0..n).map(|i| (0..m).map(|p| (0..n).map(|j| geom.conn[p].g_inv[(i, j)] * w[j][p]).sum()).collect()).collect()
}

/// 𝓗 applied to a triple with central differences, returned as (u̇, ρ̇, Ṡ) in a state
/// whose t-component is 1.
pub fn apply_hamiltonian(triple: &VariationalTriple, state: &FluidState, geom: &GridGeometry, order: SpatialOrder) -> Result<FluidState> {
    check_density(state)?;
    let grad_b = gradient(&state.grid, &triple.d_rho, order);
    hamiltonian_with_gradient(triple, &grad_b, state, geom, order)
}

fn hamiltonian_with_gradient(
    triple: &VariationalTriple,
    grad_b: &[Vec<f64>],
    state: &FluidState,
    geom: &GridGeometry,
    order: SpatialOrder,
) -> Result<FluidState> {
    let n = state.dim();
    let m = state.len();
    let omega = vorticity(state, geom, order);
    let ds = gradient(&state.grid, &state.s, order);
    let a_up = raise_field(geom, &triple.d_u);
    let div_a = geom.divergence(&a_up, order);
    let low: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|p| {
            let rho = state.rho[p];
            (0..n)
                .map(|i| {
                    let curl: f64 = (0..n).map(|j| a_up[j][p] * omega[i][j][p]).sum();
                    (curl + ds[i][p] * triple.d_s[p]) / rho - grad_b[i][p]
                })
                .collect()
        })
        .collect();
    let low_t: Vec<Vec<f64>> = (0..n).map(|i| low.iter().map(|v| v[i]).collect()).collect();
    let u = raise_field(geom, &low_t);
    let rho_dot = div_a.iter().map(|d| -d).collect();
    let s_dot = (0..m).map(|p| -(0..n).map(|i| ds[i][p] * a_up[i][p]).sum::<f64>() / state.rho[p]).collect();
    Ok(FluidState { grid: state.grid.clone(), t: 1.0, u, rho: rho_dot, s: s_dot })
}

/// Pointwise partials (T_u, T_ρ, T_S) of a kinematic density.
pub fn variational_triple(spec: &DensitySpec, state: &FluidState, eos: &Eos, geom: &GridGeometry) -> Result<VariationalTriple> {
    let parts = pointwise_partials(spec, state, eos, geom)?;
    let n = state.dim();
    Ok(VariationalTriple {
        d_u: (0..n).map(|i| parts.iter().map(|d| d.t_u[i]).collect()).collect(),
        d_rho: parts.iter().map(|d| d.t_r).collect(),
        d_s: parts.iter().map(|d| d.t_s).collect(),
    })
}

fn pointwise_partials(spec: &DensitySpec, state: &FluidState, eos: &Eos, geom: &GridGeometry) -> Result<Vec<crate::integrals::DensityPartials>> {
    check_density(state)?;
    (0..state.len())
        .into_par_iter()
        .map(|p| {
            let conn = &geom.conn[p];
            let pf = spec.point_fields(&geom.chart, conn)?;
            spec.partials(eos, state.t, conn, &pf, &state.velocity(p), state.rho[p], state.s[p])
        })
        .collect()
}

/// η̂ = −𝓗(δT). The gradient of δT/δρ is taken by the chain rule through the pointwise
/// partials and grouped with the entropy term, so Casimir densities give exact zeros.
pub fn symmetry_from_density(spec: &DensitySpec, state: &FluidState, eos: &Eos, geom: &GridGeometry, order: SpatialOrder) -> Result<SymmetryGenerator> {
    let parts = pointwise_partials(spec, state, eos, geom)?;
    let n = state.dim();
    let m = state.len();
    let triple = VariationalTriple {
        d_u: (0..n).map(|i| parts.iter().map(|d| d.t_u[i]).collect()).collect(),
        d_rho: parts.iter().map(|d| d.t_r).collect(),
        d_s: vec![0.0; m],
    };
    let cov = geom.covariant_gradient(&state.u, order);
    let drho = gradient(&state.grid, &state.rho, order);
    let ds = gradient(&state.grid, &state.s, order);
    // ∇_i T_ρ − ρ⁻¹T_S ∇_i S, with the ∇S coefficient formed as (ρT_ρS − T_S)/ρ
    let grad_b: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..m)
                .map(|p| {
                    let d = &parts[p];
                    let rho = state.rho[p];
                    let mut v = d.ex_r[i] + d.t_rr * drho[i][p] + (rho * d.t_rs - d.t_s) / rho * ds[i][p];
                    for k in 0..n {
                        v += d.t_ur[k] * cov[k][i][p];
                    }
                    v
                })
                .collect()
        })
        .collect();
    // the entropy row of 𝓗 only sees δT/δS through the ∇S term folded in above
    let h = hamiltonian_with_gradient(&triple, &grad_b, state, geom, order)?;
    let neg = |f: Vec<f64>| f.into_iter().map(|v| if v == 0.0 { 0.0 } else { -v }).collect::<Vec<f64>>();
    let gen = SymmetryGenerator {
        eta_u: h.u.into_iter().map(neg).collect(),
        eta_rho: neg(h.rho),
        eta_s: neg(h.s),
        point_form: point_form_name(spec),
    };
    gen.check_finite(state)?;
    Ok(gen)
}

fn point_form_name(spec: &DensitySpec) -> Option<String> {
    use crate::integrals::DensityVariant as V;
    let name = match &spec.variant {
        V::Mass | V::VolumetricEntropy { .. } => "casimir",
        V::Energy => "time-translation",
        V::Momentum { .. } => "isometry",
        V::GalileanMomentum { .. } => "galilean-boost",
        V::SimilarityEnergy { .. } => "similarity-scaling",
        V::GalileanEnergy { .. } => "galilean-dilation",
        V::NonIsentropicEnergy { .. } => "generalized-time-translation",
        V::NonIsentropicMomentum { .. } => "generalized-isometry",
    };
    Some(name.to_string())
}

/// max |𝓗(δE) − euler_rhs| over the grid.
pub fn hamiltonian_flow_residual(state: &FluidState, eos: &Eos, geom: &GridGeometry, order: SpatialOrder) -> Result<f64> {
    let triple = variational_triple(&DensitySpec::energy(), state, eos, geom)?;
    let h = apply_hamiltonian(&triple, state, geom, order)?;
    let rhs = euler_rhs(state, geom, eos, order)?;
    Ok(h.max_diff(&rhs))
}

/// Maxima of the three linearised equations.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct DeterminingResidual {
    pub velocity: f64,
    pub density: f64,
    pub entropy: f64,
}

impl DeterminingResidual {
    pub fn max(&self) -> f64 {
        self.velocity.max(self.density).max(self.entropy)
    }
}

/// Interior nodes: two cells away from every non-periodic edge.
pub fn interior_nodes(state: &FluidState) -> Vec<usize> {
    let g = &state.grid;
    (0..g.len())
        .filter(|&p| g.multi_index(p).iter().enumerate().all(|(a, &i)| g.periodic[a] || (i >= 2 && i + 2 < g.dims[a])))
        .collect()
}

/// The linearised Euler equations applied to a generator along a stored run, with a centred
/// time difference between neighbouring snapshots. `generator` is re-evaluated on each one.
pub fn symmetry_determining_residual<G>(
    generator: G,
    snapshots: &[FluidState],
    eos: &Eos,
    geom: &GridGeometry,
    order: SpatialOrder,
) -> Result<DeterminingResidual>
where
    G: Fn(&FluidState) -> Result<SymmetryGenerator>,
{
    if snapshots.len() < 3 {
        return Err(Error::TooFewSnapshots(snapshots.len()));
    }
    let gens = snapshots.iter().map(&generator).collect::<Result<Vec<_>>>()?;
    let mut out = DeterminingResidual::default();
    for k in 1..snapshots.len() - 1 {
        let dt = snapshots[k + 1].t - snapshots[k - 1].t;
        if !(dt > 0.0) {
            return Err(Error::Series(format!("snapshot times not increasing at index {k}")));
        }
        let r = linearised_residual(&gens[k - 1], &gens[k], &gens[k + 1], dt, &snapshots[k], eos, geom, order)?;
        out.velocity = out.velocity.max(r.velocity);
        out.density = out.density.max(r.density);
        out.entropy = out.entropy.max(r.entropy);
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn linearised_residual(
    before: &SymmetryGenerator,
    gen: &SymmetryGenerator,
    after: &SymmetryGenerator,
    dt: f64,
    state: &FluidState,
    eos: &Eos,
    geom: &GridGeometry,
    order: SpatialOrder,
) -> Result<DeterminingResidual> {
    check_density(state)?;
    let n = state.dim();
    let m = state.len();
    let grid = &state.grid;
    let press = (0..m).map(|p| eos.pressure(state.rho[p], state.s[p])).collect::<Result<Vec<_>>>()?;
    let p_field: Vec<f64> = press.iter().map(|v| v.0).collect();
    let lin: Vec<f64> = (0..m).map(|p| press[p].1 * gen.eta_rho[p] + press[p].2 * gen.eta_s[p]).collect();
    let dp = gradient(grid, &p_field, order);
    let dlin = gradient(grid, &lin, order);
    let cov_u = geom.covariant_gradient(&state.u, order);
    let cov_eta = geom.covariant_gradient(&gen.eta_u, order);
    let ds = gradient(grid, &state.s, order);
    let deta_s = gradient(grid, &gen.eta_s, order);
    // ρ̂ equation in flux form: D_tη^ρ + ∇_i(η^ρu^i + ρη^i)
    let flux: Vec<Vec<f64>> =
        (0..n).map(|i| (0..m).map(|p| gen.eta_rho[p] * state.u[i][p] + state.rho[p] * gen.eta_u[i][p]).collect()).collect();
    let div_flux = geom.divergence(&flux, order);
    let nodes = interior_nodes(state);
    let per = nodes
        .par_iter()
        .map(|&p| {
            let c = &geom.conn[p];
            let rho = state.rho[p];
            let mut vel = 0.0f64;
            for i in 0..n {
                let mut v = (after.eta_u[i][p] - before.eta_u[i][p]) / dt;
                for j in 0..n {
                    v += state.u[j][p] * cov_eta[i][j][p] + gen.eta_u[j][p] * cov_u[i][j][p];
                    v += c.g_inv[(i, j)] * (-gen.eta_rho[p] * dp[j][p] / (rho * rho) + dlin[j][p] / rho);
                }
                vel = vel.max(v.abs());
            }
            let den = (after.eta_rho[p] - before.eta_rho[p]) / dt + div_flux[p];
            let mut ent = (after.eta_s[p] - before.eta_s[p]) / dt;
            for j in 0..n {
                ent += gen.eta_u[j][p] * ds[j][p] + state.u[j][p] * deta_s[j][p];
            }
            DeterminingResidual { velocity: vel, density: den.abs(), entropy: ent.abs() }
        })
        .collect::<Vec<_>>();
    Ok(per.into_iter().fold(DeterminingResidual::default(), |a, b| DeterminingResidual {
        velocity: a.velocity.max(b.velocity),
        density: a.density.max(b.density),
        entropy: a.entropy.max(b.entropy),
    }))
}

/// ⟨A, 𝓗B⟩ + ⟨𝓗A, B⟩ and the product of the two norms it is compared against.
pub fn antisymmetry_defect(a: &VariationalTriple, b: &VariationalTriple, state: &FluidState, geom: &GridGeometry, order: SpatialOrder) -> Result<(f64, f64)> {
    let ha = apply_hamiltonian(a, state, geom, order)?;
    let hb = apply_hamiltonian(b, state, geom, order)?;
    let pair = |x: &VariationalTriple, y: &FluidState| {
        let m = state.len();
        let f: Vec<f64> = (0..m)
            .map(|p| x.d_u.iter().zip(&y.u).map(|(xi, yi)| xi[p] * yi[p]).sum::<f64>() + x.d_rho[p] * y.rho[p] + x.d_s[p] * y.s[p])
            .collect();
        geom.integrate(&f)
    };
    let norm = |x: &VariationalTriple| {
        let f: Vec<f64> = (0..state.len())
            .map(|p| x.d_u.iter().map(|c| c[p] * c[p]).sum::<f64>() + x.d_rho[p].powi(2) + x.d_s[p].powi(2))
            .collect();
        geom.integrate(&f).sqrt()
    };
    Ok(((pair(a, &hb) + pair(b, &ha)).abs(), norm(a) * norm(b)))
}
