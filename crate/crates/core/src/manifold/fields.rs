use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use super::{ChartMetric, Connection};
use crate::error::Result;

pub type VecFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
pub type MatFn = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;
pub type ScalarFieldFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Scalar potential ψ with coordinate gradient ∂_iψ and optional Hessian ∂_i∂_jψ.
#[derive(Clone)]
pub struct Potential {
    pub value: ScalarFieldFn,
    pub grad: VecFn,
    pub hessian: Option<MatFn>,
}

/// A vector field on a chart, optionally the metric gradient of a potential.
#[derive(Clone)]
pub struct VectorFieldSpec {
    pub label: String,
    value_fn: VecFn,
    deriv_fn: Option<MatFn>,
    potential: Option<Potential>,
}

impl fmt::Debug for VectorFieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VectorFieldSpec")
            .field("label", &self.label)
            .field("analytic_deriv", &self.deriv_fn.is_some())
            .field("potential", &self.potential.is_some())
            .finish()
    }
}

/// ζ at a point: components, lowered components, ∇_kζ_i and divergence.
#[derive(Clone, Debug)]
pub struct FieldJet {
    pub up: Vec<f64>,
    pub down: Vec<f64>,
    /// (k, i) = ∇_k ζ_i
    pub cov_down: DMatrix<f64>,
    pub div: f64,
}

/// ψ at a point: value, ψ_i = ∂_iψ and ∇_k∇_iψ.
#[derive(Clone, Debug)]
pub struct PotentialJet {
    pub value: f64,
    pub grad: Vec<f64>,
    /// (k, i) = ∇_k ∇_i ψ
    pub hess: DMatrix<f64>,
}

impl VectorFieldSpec {
    pub fn new(label: impl Into<String>, value_fn: VecFn) -> Self {
        VectorFieldSpec { label: label.into(), value_fn, deriv_fn: None, potential: None }
    }

    /// `f(x)[(i, j)] = ∂_j ζ^i`.
    pub fn with_deriv(mut self, f: MatFn) -> Self {
        self.deriv_fn = Some(f);
        self
    }

    pub fn with_potential(mut self, p: Potential) -> Self {
        self.potential = Some(p);
        self
    }

    /// ζ = g^{-1}∂ψ for a potential on the given chart.
    pub fn gradient_of(label: impl Into<String>, chart: &ChartMetric, p: Potential) -> Self {
        let c = chart.clone();
        let grad = p.grad.clone();
        let value_fn: VecFn = Arc::new(move |x: &[f64]| {
            let g = c.metric_raw(x);
            let gi = g.try_inverse().expect("metric invertible");
            let d = grad(x);
            let n = d.len();
            (0..n).map(|i| (0..n).map(|j| gi[(i, j)] * d[j]).sum()).collect()
        });
        VectorFieldSpec { label: label.into(), value_fn, deriv_fn: None, potential: Some(p) }
    }

    pub fn value(&self, x: &[f64]) -> Vec<f64> {
        (self.value_fn)(x)
    }

    pub fn potential(&self) -> Option<&Potential> {
        self.potential.as_ref()
    }

    pub fn has_analytic_deriv(&self) -> bool {
        self.deriv_fn.is_some()
    }

    /// (i, j) = ∂_j ζ^i; fourth-order central differences with step h when no closed form is attached.
    pub fn derivative(&self, x: &[f64], h: f64) -> DMatrix<f64> {
        if let Some(d) = &self.deriv_fn {
            return d(x);
        }
        let n = x.len();
        let mut out = DMatrix::zeros(n, n);
        let mut xp = x.to_vec();
        for j in 0..n {
            let mut eval = |s: f64| {
                xp[j] = x[j] + s * h;
                let v = self.value(&xp);
                xp[j] = x[j];
                v
            };
            let (p2, p1, m1, m2) = (eval(2.0), eval(1.0), eval(-1.0), eval(-2.0));
            for i in 0..n {
                out[(i, j)] = (-p2[i] + 8.0 * p1[i] - 8.0 * m1[i] + m2[i]) / (12.0 * h);
            }
        }
        out
    }

    /// Covariant data at the connection's point.
    pub fn jet(&self, chart: &ChartMetric, conn: &Connection) -> FieldJet {
        let x = &conn.x;
        let n = conn.dim();
        let up = self.value(x);
        let down = conn.lower(&up);
        let d = self.derivative(x, chart.h_geom);
        // ∇_k ζ^l = ∂_k ζ^l + Γ^l_{km} ζ^m
        let mut cov_up = DMatrix::zeros(n, n); // (l, k)
        for l in 0..n {
            for k in 0..n {
                let mut v = d[(l, k)];
                for m in 0..n {
                    v += conn.gamma.get(l, k, m) * up[m];
                }
                cov_up[(l, k)] = v;
            }
        }
        let div = cov_up.trace();
        let mut cov_down = DMatrix::zeros(n, n);
        for k in 0..n {
            for i in 0..n {
                cov_down[(k, i)] = (0..n).map(|l| conn.g[(i, l)] * cov_up[(l, k)]).sum();
            }
        }
        FieldJet { up, down, cov_down, div }
    }

    /// Potential data at the connection's point, if the field has a potential.
    pub fn potential_jet(&self, chart: &ChartMetric, conn: &Connection) -> Option<PotentialJet> {
        let p = self.potential.as_ref()?;
        let x = &conn.x;
        let n = conn.dim();
        let value = (p.value)(x);
        let grad = (p.grad)(x);
        let second = match &p.hessian {
            Some(h) => h(x),
            None => {
                let h = chart.h_geom;
                let mut out = DMatrix::zeros(n, n);
                let mut xp = x.to_vec();
                for j in 0..n {
                    let mut eval = |s: f64| {
                        xp[j] = x[j] + s * h;
                        let v = (p.grad)(&xp);
                        xp[j] = x[j];
                        v
                    };
                    let (p2, p1, m1, m2) = (eval(2.0), eval(1.0), eval(-1.0), eval(-2.0));
                    for i in 0..n {
                        out[(i, j)] = (-p2[i] + 8.0 * p1[i] - 8.0 * m1[i] + m2[i]) / (12.0 * h);
                    }
                }
                0.5 * (&out + out.transpose())
            }
        };
        let mut hess = second;
        for k in 0..n {
            for i in 0..n {
                for m in 0..n {
                    hess[(k, i)] -= conn.gamma.get(m, k, i) * grad[m];
                }
            }
        }
        Some(PotentialJet { value, grad, hess })
    }

    /// max |ζ − g^{-1}∂ψ| over the points (0 if there is no potential).
    pub fn check_potential(&self, chart: &ChartMetric, points: &[Vec<f64>]) -> Result<f64> {
        let Some(p) = &self.potential else { return Ok(0.0) };
        let mut worst: f64 = 0.0;
        for x in points {
            let conn = chart.connection(x)?;
            let up = conn.raise(&(p.grad)(x));
            let v = self.value(x);
            for i in 0..up.len() {
                worst = worst.max((up[i] - v[i]).abs());
            }
        }
        Ok(worst)
    }
}
