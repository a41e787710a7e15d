//! Covariant spatial Euler operators by automatic differentiation.
//!
//! For F(x, v, ∂v) with v = (u^1..u^n, ρ, S), the operator is
//! E_a(F) = g^{-1/2} [∂(√g F)/∂v_a − ∂_j ∂(√g F)/∂(∂_j v_a)].
//! Partials in v and ∂v come from dual numbers; the outer ∂_j is a sixth-order central
//! difference along a linear realisation of the jet.

use num_dual::{Dual, Dual64};

use crate::error::Result;
use crate::expr::{FieldExpr, Scalar, ScalarFn};
use crate::fluid::Eos;
use crate::integrals::DensitySpec;
use crate::manifold::{ChartMetric, Connection};

use super::JetPoint;

/// Step of the outer finite difference.
pub const EULER_FD_STEP: f64 = 1e-3;

const C6: [f64; 3] = [3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0];

/// A scalar functional of first-order jets. `dv[a*n + j]` is the coordinate derivative ∂_j v_a.
pub trait JetFunctional: Sync {
    fn eval<D: Scalar>(&self, t: f64, conn: &Connection, v: &[D], dv: &[D]) -> Result<D>;
}

/// Coordinate first derivatives of the jet: ∂_j u^i = ∇_j u^i − Γ^i_{jk}u^k.
pub fn coordinate_derivatives(jet: &JetPoint) -> Vec<f64> {
    let n = jet.dim();
    let mut c = vec![0.0; (n + 2) * n];
    for i in 0..n {
        for j in 0..n {
            let mut v = jet.grad_u[(i, j)];
            for k in 0..n {
                v -= jet.geom.gamma.get(i, j, k) * jet.u[k];
            }
            c[i * n + j] = v;
        }
    }
    for j in 0..n {
        c[n * n + j] = jet.grad_rho[j];
        c[(n + 1) * n + j] = jet.grad_s[j];
    }
    c
}

fn base_values(jet: &JetPoint) -> Vec<f64> {
    let mut v = jet.u.clone();
    v.push(jet.rho);
    v.push(jet.s);
    v
}

/// ∂(√g F)/∂w at a point, where `w` selects v_a (`deriv_index < m`) or ∂v (`m + a*n + j`).
fn weighted_partial<F: JetFunctional>(f: &F, t: f64, conn: &Connection, v: &[f64], dv: &[f64], which: usize) -> Result<f64> {
    let m = v.len();
    let vd: Vec<Dual64> =
        v.iter().enumerate().map(|(a, x)| Dual64::new(*x, if a == which { 1.0 } else { 0.0 })).collect();
    let dvd: Vec<Dual64> =
        dv.iter().enumerate().map(|(k, x)| Dual64::new(*x, if m + k == which { 1.0 } else { 0.0 })).collect();
    Ok(f.eval(t, conn, &vd, &dvd)?.eps * conn.sqrt_det_g)
}

/// (E_{u^i} for i < n, E_ρ, E_S) at the jet.
pub fn euler_operator<F: JetFunctional>(f: &F, chart: &ChartMetric, jet: &JetPoint) -> Result<Vec<f64>> {
    let n = jet.dim();
    let m = n + 2;
    let v0 = base_values(jet);
    let c = coordinate_derivatives(jet);
    let x0 = jet.x().to_vec();
    let conn0 = &jet.geom.conn;
    let h = EULER_FD_STEP;
    let mut out = vec![0.0; m];
    for (a, o) in out.iter_mut().enumerate() {
        *o = weighted_partial(f, jet.t, conn0, &v0, &c, a)?;
    }
    for j in 0..n {
        let mut stencil = Vec::with_capacity(6);
        for (k, s) in [1.0, -1.0, 2.0, -2.0, 3.0, -3.0].into_iter().enumerate() {
            let mut x = x0.clone();
            x[j] += s * h;
            let conn = chart.connection(&x)?;
            let v: Vec<f64> = (0..m).map(|a| v0[a] + c[a * n + j] * s * h).collect();
            let vals = (0..m).map(|a| weighted_partial(f, jet.t, &conn, &v, &c, m + a * n + j)).collect::<Result<Vec<f64>>>()?;
            stencil.push((k, vals));
        }
        for a in 0..m {
            let at = |k: usize| stencil[k].1[a];
            let d = (C6[0] * (at(0) - at(1)) + C6[1] * (at(2) - at(3)) + C6[2] * (at(4) - at(5))) / h;
            out[a] -= d;
        }
    }
    for o in out.iter_mut() {
        *o /= conn0.sqrt_det_g;
    }
    Ok(out)
}

/// Time derivatives of (u, ρ, S) from the fluid equations, on generic scalars.
pub fn fluid_time_derivatives<D: Scalar>(eos: &Eos, conn: &Connection, v: &[D], dv: &[D]) -> Vec<D> {
    let n = conn.dim();
    let (rho, s) = (v[n], v[n + 1]);
    let grad_u = |i: usize, j: usize| -> D {
        let mut g = dv[i * n + j];
        for k in 0..n {
            g += v[k] * conn.gamma.get(i, j, k);
        }
        g
    };
    let p_r = eos.pressure_deriv(rho, s, 1, 0);
    let p_s = eos.pressure_deriv(rho, s, 0, 1);
    let dp: Vec<D> = (0..n).map(|j| p_r * dv[n * n + j] + p_s * dv[(n + 1) * n + j]).collect();
    let mut out = Vec::with_capacity(n + 2);
    for i in 0..n {
        let mut acc = D::from(0.0);
        for j in 0..n {
            acc -= v[j] * grad_u(i, j);
            acc -= dp[j] * conn.g_inv[(i, j)] / rho;
        }
        out.push(acc);
    }
    let mut div = D::from(0.0);
    let mut adv_r = D::from(0.0);
    let mut adv_s = D::from(0.0);
    for i in 0..n {
        div += grad_u(i, i);
        adv_r += v[i] * dv[n * n + i];
        adv_s += v[i] * dv[(n + 1) * n + i];
    }
    out.push(-(rho * div + adv_r));
    out.push(-adv_s);
    out
}

/// F = D_t T for a classified density: directional derivative of T along (1, v_t).
pub struct DtDensity<'a> {
    pub spec: &'a DensitySpec,
    pub eos: &'a Eos,
    pub chart: &'a ChartMetric,
}

impl JetFunctional for DtDensity<'_> {
    fn eval<D: Scalar>(&self, t: f64, conn: &Connection, v: &[D], dv: &[D]) -> Result<D> {
        let n = conn.dim();
        let pf = self.spec.point_fields(self.chart, conn)?;
        let vt = fluid_time_derivatives(self.eos, conn, v, dv);
        let lifted: Vec<Dual<D>> = v.iter().zip(&vt).map(|(a, b)| Dual::new(*a, *b)).collect();
        let tt = Dual::new(D::from(t), D::from(1.0));
        let val = self.spec.value_generic(self.eos, tt, conn, &pf, &lifted[..n], lifted[n], lifted[n + 1])?;
        Ok(val.eps)
    }
}

/// F = T itself for a classified density.
pub struct PlainDensity<'a> {
    pub spec: &'a DensitySpec,
    pub eos: &'a Eos,
    pub chart: &'a ChartMetric,
}

impl JetFunctional for PlainDensity<'_> {
    fn eval<D: Scalar>(&self, t: f64, conn: &Connection, v: &[D], _dv: &[D]) -> Result<D> {
        let n = conn.dim();
        let pf = self.spec.point_fields(self.chart, conn)?;
        self.spec.value_generic(self.eos, D::from(t), conn, &pf, &v[..n], v[n], v[n + 1])
    }
}

/// φ(v) = c · Π f_k(v_{a_k}), a product of registry functions of jet variables.
#[derive(Clone, Debug)]
pub struct StateProduct {
    pub coef: f64,
    pub factors: Vec<(usize, ScalarFn)>,
}

impl StateProduct {
    pub fn eval<D: Scalar>(&self, v: &[D]) -> D {
        let mut acc = D::from(self.coef);
        for (a, f) in &self.factors {
            acc *= f.eval_generic(v[*a]);
        }
        acc
    }
}

/// F = ∇_i Θ^i with Θ^i = A^i(x) φ(v): a total divergence.
#[derive(Clone, Debug)]
pub struct Divergence {
    pub a: Vec<FieldExpr>,
    pub phi: StateProduct,
}

impl JetFunctional for Divergence {
    fn eval<D: Scalar>(&self, _t: f64, conn: &Connection, v: &[D], dv: &[D]) -> Result<D> {
        let n = conn.dim();
        let x = &conn.x;
        let phi = self.phi.eval(v);
        // ∇_iA^i = ∂_iA^i + Γ^k_{ki}A^i
        let mut div_a = 0.0;
        let avals: Vec<f64> = self.a.iter().map(|e| e.value(x)).collect();
        for i in 0..n {
            div_a += self.a[i].gradient(x)[i];
            for k in 0..n {
                div_a += conn.gamma.get(k, k, i) * avals[i];
            }
        }
        let mut out = phi * div_a;
        // A^i ∂_iφ with ∂_iφ = Σ_a φ_{v_a} ∂_i v_a, taken as a directional derivative
        for i in 0..n {
            if avals[i] == 0.0 {
                continue;
            }
            let lifted: Vec<Dual<D>> = (0..v.len()).map(|a| Dual::new(v[a], dv[a * n + i])).collect();
            out += self.phi.eval(&lifted).eps * avals[i];
        }
        Ok(out)
    }
}

/// F = f(x) with no field dependence.
#[derive(Clone, Debug)]
pub struct ExplicitOnly {
    pub f: FieldExpr,
}

impl JetFunctional for ExplicitOnly {
    fn eval<D: Scalar>(&self, t: f64, conn: &Connection, _v: &[D], _dv: &[D]) -> Result<D> {
        Ok(D::from(self.f.value(&conn.x) * (1.0 + t)))
    }
}

/// max |a − b| over two residual vectors.
pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
