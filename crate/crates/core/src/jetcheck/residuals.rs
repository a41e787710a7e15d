use nalgebra::DMatrix;

use crate::error::Result;
use crate::fluid::{Eos, PressureJet};
use crate::integrals::{DensityPartials, DensitySpec, PointFields};
use crate::manifold::ChartMetric;

use super::jet::dot;
use super::JetPoint;

/// (E_u, E_ρ, E_S) of D_tT; E_u carries a lower index.
#[derive(Clone, Debug, PartialEq)]
pub struct EulerResiduals {
    pub e_u: Vec<f64>,
    pub e_rho: f64,
    pub e_s: f64,
}

impl EulerResiduals {
    pub fn max_abs(&self) -> f64 {
        self.e_u.iter().fold(self.e_rho.abs().max(self.e_s.abs()), |m, v| m.max(v.abs()))
    }

    pub fn as_vec(&self) -> Vec<f64> {
        let mut v = self.e_u.clone();
        v.push(self.e_rho);
        v.push(self.e_s);
        v
    }
}

/// The seven split determining equations at one jet.
#[derive(Clone, Debug)]
pub struct DeterminingReport {
    pub eq1: f64,
    pub eq2: Vec<f64>,
    pub eq3: DMatrix<f64>,
    pub eq4: f64,
    pub eq5: DMatrix<f64>,
    pub eq6: Vec<f64>,
    /// index (i*n + j)*n + k
    pub eq7: Vec<f64>,
}

impl DeterminingReport {
    /// max |·| of each equation.
    pub fn maxima(&self) -> [f64; 7] {
        let m = |v: &[f64]| v.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        [
            self.eq1.abs(),
            m(&self.eq2),
            self.eq3.abs().max(),
            self.eq4.abs(),
            self.eq5.abs().max(),
            m(&self.eq6),
            m(&self.eq7),
        ]
    }

    pub fn max_abs(&self) -> f64 {
        self.maxima().into_iter().fold(0.0, f64::max)
    }

    /// Euler residuals rebuilt from the split equations contracted with jet monomials.
    pub fn recombine(&self, jet: &JetPoint) -> EulerResiduals {
        let n = jet.dim();
        let gi = &jet.geom.g_inv;
        let rho = jet.rho;
        let up_rho = jet.geom.raise(&jet.grad_rho);
        let up_s = jet.geom.raise(&jet.grad_s);
        // (j, k) = ∇^j u^k
        let du_up = DMatrix::from_fn(n, n, |j, k| (0..n).map(|l| gi[(j, l)] * jet.grad_u[(k, l)]).sum::<f64>());
        let t3 = self.eq3.component_mul(&du_up).sum();
        let t5 = self.eq5.component_mul(&du_up).sum();
        let e_rho = self.eq1 - t3 / rho + dot(&self.eq2, &up_s) / (rho * rho);
        let e_s = self.eq4 - dot(&self.eq2, &up_rho) / (rho * rho) + t5;
        let e_u = (0..n)
            .map(|i| {
                let mut v = self.eq6[i];
                for j in 0..n {
                    v += self.eq3[(i, j)] * up_rho[j] / rho - self.eq5[(i, j)] * up_s[j];
                    for k in 0..n {
                        v += self.eq7[(i * n + j) * n + k] * du_up[(j, k)];
                    }
                }
                v
            })
            .collect();
        EulerResiduals { e_u, e_rho, e_s }
    }
}

/// Density partials and field data at the jet.
pub fn density_at(spec: &DensitySpec, chart: &ChartMetric, jet: &JetPoint, eos: &Eos) -> Result<(DensityPartials, PointFields)> {
    let pf = spec.point_fields(chart, &jet.geom.conn)?;
    let d = spec.partials(eos, jet.t, &jet.geom.conn, &pf, &jet.u, jet.rho, jet.s)?;
    Ok((d, pf))
}

/// D_tT with time derivatives eliminated through the fluid equations.
pub fn material_time_derivative(spec: &DensitySpec, chart: &ChartMetric, jet: &JetPoint, eos: &Eos) -> Result<f64> {
    let (d, _) = density_at(spec, chart, jet, eos)?;
    Ok(dt_from_partials(&d, jet, &eos.jet(jet.rho, jet.s)))
}

fn dt_from_partials(d: &DensityPartials, jet: &JetPoint, p: &PressureJet) -> f64 {
    let n = jet.dim();
    let up_rho = jet.geom.raise(&jet.grad_rho);
    let up_s = jet.geom.raise(&jet.grad_s);
    let mut out = d.t_t;
    for i in 0..n {
        let adv: f64 = (0..n).map(|j| jet.u[j] * jet.grad_u[(i, j)]).sum();
        out -= d.t_u[i] * (adv + (p.p_r * up_rho[i] + p.p_s * up_s[i]) / jet.rho);
    }
    out - d.t_r * jet.div_rho_u() - d.t_s * dot(&jet.u, &jet.grad_s)
}

/// The three closed-form Euler residuals of D_tT, term by term.
pub fn euler_residuals(spec: &DensitySpec, chart: &ChartMetric, jet: &JetPoint, eos: &Eos) -> Result<EulerResiduals> {
    let (d, _) = density_at(spec, chart, jet, eos)?;
    Ok(euler_from_partials(&d, jet, &eos.jet(jet.rho, jet.s)))
}

pub fn euler_from_partials(d: &DensityPartials, jet: &JetPoint, p: &PressureJet) -> EulerResiduals {
    let n = jet.dim();
    let gi = &jet.geom.g_inv;
    let rho = jet.rho;
    let u = &jet.u;
    let div = jet.div_u();
    let up_rho = jet.geom.raise(&jet.grad_rho);
    let up_s = jet.geom.raise(&jet.grad_s);
    // ∇^i T_{u^i}, explicit part only
    let div_tu: f64 = (0..n).flat_map(|i| (0..n).map(move |k| (i, k))).map(|(i, k)| gi[(i, k)] * d.ex_u[(k, i)]).sum();
    // T_{u^iu^j} ∇^i u^j
    let mut tuu_du = 0.0;
    for i in 0..n {
        for j in 0..n {
            let du_up: f64 = (0..n).map(|k| gi[(i, k)] * jet.grad_u[(j, k)]).sum();
            tuu_du += d.t_uu[(i, j)] * du_up;
        }
    }
    let bracket: Vec<f64> =
        (0..n).map(|k| rho * p.p_r * d.t_us[k] - rho * p.p_s * d.t_ur[k] + p.p_s * d.t_u[k]).collect();
    let r2 = rho * rho;

    let e_rho = d.t_tr + dot(u, &d.ex_r) + p.p_r * div_tu / rho - rho * d.t_rr * div
        + p.p_r * tuu_du / rho
        + dot(&bracket, &up_s) / r2;

    let e_s = d.t_ts + dot(u, &d.ex_s) + p.p_s * div_tu / rho - dot(&bracket, &up_rho) / r2
        + p.p_s * tuu_du / rho
        + (d.t_s - rho * d.t_rs) * div;

    let e_u = (0..n)
        .map(|i| {
            let mut v = d.t_tu[i] + rho * d.ex_r[i];
            for j in 0..n {
                v += u[j] * d.ex_u[(j, i)];
                v -= p.p_r * d.t_uu[(i, j)] * up_rho[j] / rho;
                v -= p.p_s * d.t_uu[(i, j)] * up_s[j] / rho;
                // (ρT_{u^jρ} − T_{u^j}) ∇_i u^j
                v += (rho * d.t_ur[j] - d.t_u[j]) * jet.grad_u[(j, i)];
            }
            v += rho * d.t_rr * jet.grad_rho[i];
            v += (rho * d.t_rs - d.t_s) * jet.grad_s[i];
            v += (d.t_u[i] - rho * d.t_ur[i]) * div;
            v
        })
        .collect();
    EulerResiduals { e_u, e_rho, e_s }
}

/// The seven split determining equations.
pub fn determining_system_residuals(spec: &DensitySpec, chart: &ChartMetric, jet: &JetPoint, eos: &Eos) -> Result<DeterminingReport> {
    let (d, _) = density_at(spec, chart, jet, eos)?;
    Ok(split_from_partials(&d, jet, &eos.jet(jet.rho, jet.s)))
}

pub fn split_from_partials(d: &DensityPartials, jet: &JetPoint, p: &PressureJet) -> DeterminingReport {
    let n = jet.dim();
    let g = &jet.geom.g;
    let gi = &jet.geom.g_inv;
    let rho = jet.rho;
    let u = &jet.u;
    let div_tu: f64 = (0..n).flat_map(|i| (0..n).map(move |k| (i, k))).map(|(i, k)| gi[(i, k)] * d.ex_u[(k, i)]).sum();
    let eq1 = d.t_tr + dot(u, &d.ex_r) + p.p_r * div_tu / rho;
    let eq2 = (0..n).map(|k| rho * p.p_r * d.t_us[k] - rho * p.p_s * d.t_ur[k] + p.p_s * d.t_u[k]).collect();
    let eq3 = DMatrix::from_fn(n, n, |j, k| rho * rho * d.t_rr * g[(j, k)] - p.p_r * d.t_uu[(j, k)]);
    let eq4 = d.t_ts + dot(u, &d.ex_s) + p.p_s * div_tu / rho;
    let eq5 = DMatrix::from_fn(n, n, |j, k| p.p_s * d.t_uu[(j, k)] / rho + g[(j, k)] * (d.t_s - rho * d.t_rs));
    let eq6 = (0..n)
        .map(|k| d.t_tu[k] + rho * d.ex_r[k] + (0..n).map(|j| u[j] * d.ex_u[(j, k)]).sum::<f64>())
        .collect();
    let mut eq7 = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                eq7[(i * n + j) * n + k] =
                    g[(j, k)] * (d.t_u[i] - rho * d.t_ur[i]) + g[(i, j)] * (rho * d.t_ur[k] - d.t_u[k]);
            }
        }
    }
    DeterminingReport { eq1, eq2, eq3, eq4, eq5, eq6, eq7 }
}

/// D_tT + ∇_i(Tu^i) + ∇_iΦ^i evaluated through the jet.
pub fn flux_consistency(spec: &DensitySpec, chart: &ChartMetric, jet: &JetPoint, eos: &Eos) -> Result<f64> {
    let (d, pf) = density_at(spec, chart, jet, eos)?;
    let p = eos.jet(jet.rho, jet.s);
    let n = jet.dim();
    let dt = dt_from_partials(&d, jet, &p);
    let mut grad_t = d.ex.clone();
    for i in 0..n {
        for k in 0..n {
            grad_t[i] += d.t_u[k] * jet.grad_u[(k, i)];
        }
        grad_t[i] += d.t_r * jet.grad_rho[i] + d.t_s * jet.grad_s[i];
    }
    let div_tu = d.value * jet.div_u() + dot(&jet.u, &grad_t);
    let flux = spec.flux(eos, jet.t, &jet.geom.conn, &pf, jet.rho, jet.s)?;
    let div_phi = flux.divergence(&jet.u, &jet.grad_rho, &jet.grad_s, jet.div_u());
    Ok(dt + div_tu + div_phi)
}
