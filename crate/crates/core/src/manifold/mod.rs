//! Coordinate-chart Riemannian geometry.
//!
//! Curvature convention: [∇_i, ∇_j] a^k = −R_{ijl}^k a^l, hence
//! R_{ijl}^k = −(∂_iΓ^k_{jl} − ∂_jΓ^k_{il} + Γ^k_{im}Γ^m_{jl} − Γ^k_{jm}Γ^m_{il}),
//! Ricci R_{ij} = R_{ikj}^k and scalar R = g^{ij}R_{ij} (unit sphere: R = 2).
//! For covectors the same convention reads [∇_i, ∇_j] b_k = R_{ijk}^l b_l.

mod builtin;
mod fields;

pub use builtin::{builtin_field, potential_from_expr, BuiltinChart};
pub use fields::{FieldJet, Potential, PotentialJet, VectorFieldSpec};

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub type MetricFn = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;
/// Returns [∂_k g] for k = 0..n.
pub type MetricDerivFn = Arc<dyn Fn(&[f64]) -> Vec<DMatrix<f64>> + Send + Sync>;
/// Returns [∂_k ∂_l g] flattened as k·n + l.
pub type MetricSecondDerivFn = Arc<dyn Fn(&[f64]) -> Vec<DMatrix<f64>> + Send + Sync>;
pub type DistanceFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A coordinate chart carrying a Riemannian metric.
#[derive(Clone)]
pub struct ChartMetric {
    pub name: String,
    pub dim: usize,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub periodic: Vec<bool>,
    /// Finite-difference step for derived geometry.
    pub h_geom: f64,
    /// Metric is the identity everywhere.
    pub flat: bool,
    metric_fn: MetricFn,
    metric_deriv_fn: Option<MetricDerivFn>,
    metric_second_deriv_fn: Option<MetricSecondDerivFn>,
    singular_distance: Option<DistanceFn>,
}

impl fmt::Debug for ChartMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ChartMetric")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("lower", &self.lower)
            .field("upper", &self.upper)
            .field("periodic", &self.periodic)
            .field("h_geom", &self.h_geom)
            .field("analytic_first", &self.metric_deriv_fn.is_some())
            .field("analytic_second", &self.metric_second_deriv_fn.is_some())
            .finish()
    }
}

/// h_geom as a fraction of the largest domain extent.
pub const H_GEOM_REL: f64 = 1e-4;

impl ChartMetric {
    pub fn new(
        name: impl Into<String>,
        lower: Vec<f64>,
        upper: Vec<f64>,
        periodic: Vec<bool>,
        metric_fn: MetricFn,
    ) -> Result<Self> {
        let dim = lower.len();
        if dim < 2 {
            return Err(Error::Geometry(format!("chart dimension must be at least 2, got {dim}")));
        }
        if upper.len() != dim || periodic.len() != dim {
            return Err(Error::Dimension { expected: dim, got: upper.len().min(periodic.len()) });
        }
        if lower.iter().zip(&upper).any(|(a, b)| !(b > a)) {
            return Err(Error::Geometry("chart box must have upper > lower on every axis".into()));
        }
        let extent = lower.iter().zip(&upper).map(|(a, b)| b - a).fold(0.0, f64::max);
        Ok(ChartMetric {
            name: name.into(),
            dim,
            lower,
            upper,
            periodic,
            h_geom: H_GEOM_REL * extent,
            flat: false,
            metric_fn,
            metric_deriv_fn: None,
            metric_second_deriv_fn: None,
            singular_distance: None,
        })
    }

    pub fn with_metric_deriv(mut self, f: MetricDerivFn) -> Self {
        self.metric_deriv_fn = Some(f);
        self
    }

    pub fn with_metric_second_deriv(mut self, f: MetricSecondDerivFn) -> Self {
        self.metric_second_deriv_fn = Some(f);
        self
    }

    pub fn with_singular_distance(mut self, f: DistanceFn) -> Self {
        self.singular_distance = Some(f);
        self
    }

    pub fn with_flat(mut self, flat: bool) -> Self {
        self.flat = flat;
        self
    }

    pub fn with_h_geom(mut self, h: f64) -> Self {
        self.h_geom = h;
        self
    }

    /// Same chart with all analytic metric derivatives dropped.
    pub fn finite_difference_only(&self) -> Self {
        let mut c = self.clone();
        c.metric_deriv_fn = None;
        c.metric_second_deriv_fn = None;
        c
    }

    pub fn has_analytic_first(&self) -> bool {
        self.metric_deriv_fn.is_some()
    }

    pub fn has_analytic_second(&self) -> bool {
        self.metric_second_deriv_fn.is_some() && self.metric_deriv_fn.is_some()
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.upper[axis] - self.lower[axis]
    }

    /// Map periodic coordinates into [lower, upper).
    pub fn wrap(&self, x: &mut [f64]) {
        for a in 0..self.dim {
            if self.periodic[a] {
                let l = self.extent(a);
                let mut v = (x[a] - self.lower[a]).rem_euclid(l);
                if v >= l {
                    v -= l;
                }
                x[a] = self.lower[a] + v;
            }
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim
            && (0..self.dim).all(|a| {
                self.periodic[a]
                    || (x[a] >= self.lower[a] - 1e-12 && x[a] <= self.upper[a] + 1e-12)
            })
    }

    /// Domain and singular-locus check.
    pub fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::Dimension { expected: self.dim, got: x.len() });
        }
        if !self.contains(x) {
            return Err(Error::OutsideDomain { x: x.to_vec() });
        }
        if let Some(d) = &self.singular_distance {
            let dist = d(x);
            if dist < self.h_geom {
                return Err(Error::ChartSingular { x: x.to_vec(), distance: dist });
            }
        }
        Ok(())
    }

    /// Raw metric components (no checks).
    pub fn metric_raw(&self, x: &[f64]) -> DMatrix<f64> {
        (self.metric_fn)(x)
    }

    /// Metric with symmetry and positive-definiteness checks.
    pub fn metric(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let g = self.metric_raw(x);
        check_metric(x, &g)?;
        Ok(g)
    }

    /// ∂_k g_ij, analytic when available, otherwise central differences with h_geom.
    pub fn metric_derivs(&self, x: &[f64]) -> Vec<DMatrix<f64>> {
        match &self.metric_deriv_fn {
            Some(f) => f(x),
            None => self.metric_derivs_fd(x, self.h_geom),
        }
    }

    /// Central-difference metric derivatives with an explicit step.
    pub fn metric_derivs_fd(&self, x: &[f64], h: f64) -> Vec<DMatrix<f64>> {
        let n = self.dim;
        let mut out = Vec::with_capacity(n);
        let mut xp = x.to_vec();
        for k in 0..n {
            xp[k] = x[k] + h;
            let gp = self.metric_raw(&xp);
            xp[k] = x[k] - h;
            let gm = self.metric_raw(&xp);
            xp[k] = x[k];
            out.push((gp - gm) / (2.0 * h));
        }
        out
    }

    /// Metric data and Levi-Civita connection at x.
    pub fn connection(&self, x: &[f64]) -> Result<Connection> {
        self.check_point(x)?;
        let g = self.metric(x)?;
        let dg = self.metric_derivs(x);
        Ok(Connection::from_parts(x.to_vec(), g, dg))
    }

    /// ∂_m Γ^i_{jk}, flattened as ((m·n + i)·n + j)·n + k.
    pub fn christoffel_derivs(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim;
        if let (true, Some(second)) = (self.has_analytic_first(), &self.metric_second_deriv_fn) {
            let g = self.metric(x)?;
            let g_inv = invert(&g, x)?;
            let dg = self.metric_derivs(x);
            let ddg = second(x);
            let mut out = vec![0.0; n * n * n * n];
            for m in 0..n {
                // ∂_m g^{il} = −g^{ia} ∂_m g_{ab} g^{bl}
                let dginv = -(&g_inv * &dg[m] * &g_inv);
                for i in 0..n {
                    for j in 0..n {
                        for k in 0..n {
                            let mut acc = 0.0;
                            for l in 0..n {
                                let a = dg[j][(l, k)] + dg[k][(l, j)] - dg[l][(j, k)];
                                let da = ddg[m * n + j][(l, k)] + ddg[m * n + k][(l, j)]
                                    - ddg[m * n + l][(j, k)];
                                acc += dginv[(i, l)] * a + g_inv[(i, l)] * da;
                            }
                            out[((m * n + i) * n + j) * n + k] = 0.5 * acc;
                        }
                    }
                }
            }
            Ok(out)
        } else {
            let h = self.h_geom;
            let mut out = vec![0.0; n * n * n * n];
            let mut xp = x.to_vec();
            for m in 0..n {
                xp[m] = x[m] + h;
                let gp = self.connection_unchecked(&xp)?;
                xp[m] = x[m] - h;
                let gm = self.connection_unchecked(&xp)?;
                xp[m] = x[m];
                for idx in 0..n * n * n {
                    out[m * n * n * n + idx] = (gp.gamma.data[idx] - gm.gamma.data[idx]) / (2.0 * h);
                }
            }
            Ok(out)
        }
    }

    fn connection_unchecked(&self, x: &[f64]) -> Result<Connection> {
        let g = self.metric(x)?;
        let dg = self.metric_derivs(x);
        Ok(Connection::from_parts(x.to_vec(), g, dg))
    }

    /// Full geometry including curvature.
    pub fn geometry(&self, x: &[f64]) -> Result<GeometryEval> {
        let conn = self.connection(x)?;
        let dgamma = self.christoffel_derivs(x)?;
        let curvature = Curvature::from_connection(&conn, &dgamma);
        Ok(GeometryEval { conn, curvature })
    }

    /// Interior probe points on a regular lattice (margin keeps clear of edges).
    pub fn probe_points(&self, per_axis: usize) -> Vec<Vec<f64>> {
        let n = self.dim;
        let total = per_axis.pow(n as u32);
        let mut pts = Vec::with_capacity(total);
        for idx in 0..total {
            let mut rem = idx;
            let mut x = vec![0.0; n];
            for a in 0..n {
                let i = rem % per_axis;
                rem /= per_axis;
                let frac = (i as f64 + 0.5) / per_axis as f64;
                let margin = if self.periodic[a] { 0.0 } else { 0.05 };
                x[a] = self.lower[a] + self.extent(a) * (margin + (1.0 - 2.0 * margin) * frac);
            }
            pts.push(x);
        }
        pts
    }
}

fn check_metric(x: &[f64], g: &DMatrix<f64>) -> Result<()> {
    let asym = (g - g.transpose()).abs().max();
    let scale = g.abs().max().max(1.0);
    if !(asym <= 1e-12 * scale) {
        return Err(Error::NotSymmetric { x: x.to_vec(), asymmetry: asym });
    }
    if g.iter().any(|v| !v.is_finite()) || g.clone().cholesky().is_none() {
        let eig = g.clone().symmetric_eigenvalues();
        return Err(Error::NotPositiveDefinite { x: x.to_vec(), eigenvalues: eig.iter().copied().collect() });
    }
    Ok(())
}

fn invert(g: &DMatrix<f64>, x: &[f64]) -> Result<DMatrix<f64>> {
    match g.clone().cholesky() {
        Some(c) => Ok(c.inverse()),
        None => Err(Error::NotPositiveDefinite {
            x: x.to_vec(),
            eigenvalues: g.clone().symmetric_eigenvalues().iter().copied().collect(),
        }),
    }
}

/// Γ^i_{jk} stored at ((i·n + j)·n + k).
#[derive(Clone, Debug, PartialEq)]
pub struct Christoffel {
    pub n: usize,
    pub data: Vec<f64>,
}

impl Christoffel {
    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[(i * self.n + j) * self.n + k]
    }
}

/// R_{ijk}^l stored at (((i·n + j)·n + k)·n + l).
#[derive(Clone, Debug, PartialEq)]
pub struct Riemann {
    pub n: usize,
    pub data: Vec<f64>,
}

impl Riemann {
    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.data[((i * self.n + j) * self.n + k) * self.n + l]
    }

    /// R_{ijkl} = R_{ijk}^m g_{ml}.
    pub fn lowered(&self, g: &DMatrix<f64>) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n * n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        out[((i * n + j) * n + k) * n + l] =
                            (0..n).map(|m| self.get(i, j, k, m) * g[(m, l)]).sum();
                    }
                }
            }
        }
        out
    }
}

/// Metric, inverse, volume density and connection at one point.
#[derive(Clone, Debug)]
pub struct Connection {
    pub x: Vec<f64>,
    pub g: DMatrix<f64>,
    pub g_inv: DMatrix<f64>,
    pub sqrt_det_g: f64,
    /// ∂_k g_ij
    pub dg: Vec<DMatrix<f64>>,
    pub gamma: Christoffel,
}

impl Connection {
    pub fn from_parts(x: Vec<f64>, g: DMatrix<f64>, dg: Vec<DMatrix<f64>>) -> Self {
        let n = g.nrows();
        let chol = g.clone().cholesky().expect("metric checked positive definite");
        let g_inv = chol.inverse();
        let sqrt_det_g = chol.l().diagonal().iter().product::<f64>();
        let mut data = vec![0.0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in j..n {
                    let mut acc = 0.0;
                    for l in 0..n {
                        acc += g_inv[(i, l)] * (dg[j][(l, k)] + dg[k][(l, j)] - dg[l][(j, k)]);
                    }
                    data[(i * n + j) * n + k] = 0.5 * acc;
                    data[(i * n + k) * n + j] = 0.5 * acc;
                }
            }
        }
        Connection { x, g, g_inv, sqrt_det_g, dg, gamma: Christoffel { n, data } }
    }

    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    pub fn lower(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n).map(|i| (0..n).map(|j| self.g[(i, j)] * v[j]).sum()).collect()
    }

    pub fn raise(&self, w: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n).map(|i| (0..n).map(|j| self.g_inv[(i, j)] * w[j]).sum()).collect()
    }

    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        let n = self.dim();
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += self.g[(i, j)] * a[i] * b[j];
            }
        }
        s
    }
}

/// Riemann, Ricci and scalar curvature.
#[derive(Clone, Debug)]
pub struct Curvature {
    pub riemann: Riemann,
    pub ricci: DMatrix<f64>,
    pub scalar: f64,
}

impl Curvature {
    /// Build from Γ and ∂Γ (layout of [`ChartMetric::christoffel_derivs`]).
    pub fn from_connection(conn: &Connection, dgamma: &[f64]) -> Self {
        let n = conn.dim();
        let gam = &conn.gamma;
        let dg = |m: usize, i: usize, j: usize, k: usize| dgamma[((m * n + i) * n + j) * n + k];
        let mut data = vec![0.0; n * n * n * n];
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    for k in 0..n {
                        let mut v = dg(i, k, j, l) - dg(j, k, i, l);
                        for m in 0..n {
                            v += gam.get(k, i, m) * gam.get(m, j, l) - gam.get(k, j, m) * gam.get(m, i, l);
                        }
                        data[((i * n + j) * n + l) * n + k] = -v;
                    }
                }
            }
        }
        let riemann = Riemann { n, data };
        let mut ricci = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                ricci[(i, j)] = (0..n).map(|k| riemann.get(i, k, j, k)).sum();
            }
        }
        let scalar = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| conn.g_inv[(i, j)] * ricci[(i, j)]).sum();
        Curvature { riemann, ricci, scalar }
    }
}

/// Geometry at a point: connection plus curvature.
#[derive(Clone, Debug)]
pub struct GeometryEval {
    pub conn: Connection,
    pub curvature: Curvature,
}

impl std::ops::Deref for GeometryEval {
    type Target = Connection;
    fn deref(&self) -> &Connection {
        &self.conn
    }
}

impl GeometryEval {
    pub fn riemann(&self) -> &Riemann {
        &self.curvature.riemann
    }
    pub fn ricci(&self) -> &DMatrix<f64> {
        &self.curvature.ricci
    }
    pub fn scalar_curvature(&self) -> f64 {
        self.curvature.scalar
    }
}

/// Γ^i_{jk} at x.
pub fn christoffel(chart: &ChartMetric, x: &[f64]) -> Result<Christoffel> {
    Ok(chart.connection(x)?.gamma)
}

/// Riemann, Ricci and scalar curvature at x.
pub fn riemann(chart: &ChartMetric, x: &[f64]) -> Result<Curvature> {
    Ok(chart.geometry(x)?.curvature)
}

/// ∇_j u^i with divergence and curl.
#[derive(Clone, Debug)]
pub struct CovariantGradient {
    /// (i, j) = ∇_j u^i
    pub grad: DMatrix<f64>,
    pub div: f64,
    /// (i, j) = ∇^i u^j − ∇^j u^i
    pub curl: DMatrix<f64>,
}

/// ∇_j u^i = ∂_j u^i + Γ^i_{jk} u^k, where `du[(i, j)] = ∂_j u^i`.
pub fn covariant_derivative_vector(conn: &Connection, u: &[f64], du: &DMatrix<f64>) -> CovariantGradient {
    let n = conn.dim();
    let mut grad = du.clone();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                grad[(i, j)] += conn.gamma.get(i, j, k) * u[k];
            }
        }
    }
    let div = grad.trace();
    // ∇^i u^j = g^{ik} ∇_k u^j
    let mut up = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            up[(i, j)] = (0..n).map(|k| conn.g_inv[(i, k)] * grad[(j, k)]).sum();
        }
    }
    let curl = &up - up.transpose();
    CovariantGradient { grad, div, curl }
}

/// ∇_i ζ_j with the index lowered: (i, j) entry.
fn lowered_covariant_derivative(chart: &ChartMetric, field: &VectorFieldSpec, x: &[f64]) -> Result<DMatrix<f64>> {
    let conn = chart.connection(x)?;
    Ok(field.jet(chart, &conn).cov_down)
}

/// (L_ζ g)_{ij} = ∇_i ζ_j + ∇_j ζ_i.
pub fn killing_residual(chart: &ChartMetric, field: &VectorFieldSpec, x: &[f64]) -> Result<DMatrix<f64>> {
    let d = lowered_covariant_derivative(chart, field, x)?;
    Ok(&d + d.transpose())
}

/// L_ξ g − λ g.
pub fn homothety_residual(chart: &ChartMetric, field: &VectorFieldSpec, lambda: f64, x: &[f64]) -> Result<DMatrix<f64>> {
    let g = chart.metric(x)?;
    Ok(killing_residual(chart, field, x)? - g * lambda)
}

/// 2∇^{[i}χ^{j]} = ∇^i χ^j − ∇^j χ^i.
pub fn curl_free_residual(chart: &ChartMetric, field: &VectorFieldSpec, x: &[f64]) -> Result<DMatrix<f64>> {
    let conn = chart.connection(x)?;
    let d = field.jet(chart, &conn).cov_down;
    // raise both indices of ∇_i χ_j
    let up = &conn.g_inv * &d * &conn.g_inv;
    Ok(&up - up.transpose())
}

/// max |∇_k g_ij| with ∂g taken by central differences (independent of the analytic path).
pub fn metric_compatibility_residual(chart: &ChartMetric, x: &[f64]) -> Result<f64> {
    let conn = chart.connection(x)?;
    let n = chart.dim;
    let dg = chart.metric_derivs_fd(x, chart.h_geom);
    let mut worst: f64 = 0.0;
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut v = dg[k][(i, j)];
                for l in 0..n {
                    v -= conn.gamma.get(l, k, i) * conn.g[(l, j)] + conn.gamma.get(l, k, j) * conn.g[(i, l)];
                }
                worst = worst.max(v.abs());
            }
        }
    }
    Ok(worst)
}

/// Largest violation of R_{ijk}^l = −R_{jik}^l and of the first Bianchi identity.
pub fn riemann_identity_residuals(curv: &Curvature) -> (f64, f64) {
    let r = &curv.riemann;
    let n = r.n;
    let mut anti: f64 = 0.0;
    let mut bianchi: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    anti = anti.max((r.get(i, j, k, l) + r.get(j, i, k, l)).abs());
                    bianchi = bianchi.max((r.get(i, j, k, l) + r.get(j, k, i, l) + r.get(k, i, j, l)).abs());
                }
            }
        }
    }
    (anti, bianchi)
}

#[cfg(test)]
mod tests;
