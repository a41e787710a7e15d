use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::error::Result;
use crate::manifold::{ChartMetric, GeometryEval};

/// Second-order jet data. `hess_u[(i*n + j)*n + k] = ∇_j∇_k u^i`; Hessians of ρ, S are symmetric.
#[derive(Clone, Debug)]
pub struct SecondOrder {
    pub hess_u: Vec<f64>,
    pub hess_rho: DMatrix<f64>,
    pub hess_s: DMatrix<f64>,
}

/// A point of jet space. Derivatives are covariant; gradients of scalars are covectors.
#[derive(Clone, Debug)]
pub struct JetPoint {
    pub t: f64,
    pub geom: GeometryEval,
    pub u: Vec<f64>,
    pub rho: f64,
    pub s: f64,
    /// (i, j) = ∇_j u^i
    pub grad_u: DMatrix<f64>,
    pub grad_rho: Vec<f64>,
    pub grad_s: Vec<f64>,
    pub second: Option<SecondOrder>,
}

impl JetPoint {
    pub fn dim(&self) -> usize {
        self.u.len()
    }

    pub fn x(&self) -> &[f64] {
        &self.geom.x
    }

    pub fn div_u(&self) -> f64 {
        self.grad_u.trace()
    }

    /// ∇_i(ρu^i)
    pub fn div_rho_u(&self) -> f64 {
        self.rho * self.div_u() + dot(&self.u, &self.grad_rho)
    }

    /// Curvature-forced antisymmetric part ∇_{[j}∇_{k]}u^i = −½ R_{jkl}^i u^l.
    pub fn curvature_part(geom: &GeometryEval, u: &[f64]) -> Vec<f64> {
        let n = u.len();
        let r = geom.riemann();
        let mut a = vec![0.0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    a[(i * n + j) * n + k] = -0.5 * (0..n).map(|l| r.get(j, k, l, i) * u[l]).sum::<f64>();
                }
            }
        }
        a
    }

    /// Max deviation of the stored order-2 antisymmetric parts from the curvature constraint.
    pub fn curvature_constraint_residual(&self) -> f64 {
        let Some(sec) = &self.second else { return 0.0 };
        let n = self.dim();
        let a = Self::curvature_part(&self.geom, &self.u);
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let anti = 0.5 * (sec.hess_u[(i * n + j) * n + k] - sec.hess_u[(i * n + k) * n + j]);
                    worst = worst.max((anti - a[(i * n + j) * n + k]).abs());
                }
            }
        }
        for m in [&sec.hess_rho, &sec.hess_s] {
            worst = worst.max((m - m.transpose()).abs().max());
        }
        worst
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Interior point of the chart: periodic axes uniform over the period, others 2% away from the edges.
fn sample_point(chart: &ChartMetric, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..chart.dim)
        .map(|a| {
            let m = if chart.periodic[a] { 0.0 } else { 0.02 * chart.extent(a) };
            rng.random_range(chart.lower[a] + m..chart.upper[a] - m)
        })
        .collect()
}

/// One jet from its own counter-based stream.
pub fn sample_jet(chart: &ChartMetric, seed: u64, index: u64, order: usize) -> Result<JetPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let n = chart.dim;
    let half = Normal::new(0.0, 0.5).expect("valid normal");
    let normal = |rng: &mut ChaCha8Rng| -> f64 { StandardNormal.sample(rng) };
    let geom = loop {
        let x = sample_point(chart, &mut rng);
        match chart.geometry(&x) {
            Ok(g) => break g,
            Err(crate::error::Error::ChartSingular { .. }) => continue,
            Err(e) => return Err(e),
        }
    };
    let t = rng.random_range(0.0..1.0);
    let u: Vec<f64> = (0..n).map(|_| normal(&mut rng)).collect();
    let rho = rng.random_range(0.5..2.0);
    let s = rng.random_range(-1.0..1.0);
    let grad_u = DMatrix::from_fn(n, n, |_, _| normal(&mut rng));
    let grad_rho: Vec<f64> = (0..n).map(|_| half.sample(&mut rng)).collect();
    let grad_s: Vec<f64> = (0..n).map(|_| half.sample(&mut rng)).collect();
    let second = if order >= 2 {
        let anti = JetPoint::curvature_part(&geom, &u);
        let mut hess_u = vec![0.0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in j..n {
                    let v = normal(&mut rng);
                    hess_u[(i * n + j) * n + k] = v + anti[(i * n + j) * n + k];
                    if k != j {
                        hess_u[(i * n + k) * n + j] = v + anti[(i * n + k) * n + j];
                    }
                }
            }
        }
        let sym = |rng: &mut ChaCha8Rng| {
            let mut m = DMatrix::zeros(n, n);
            for j in 0..n {
                for k in j..n {
                    let v = normal(rng);
                    m[(j, k)] = v;
                    m[(k, j)] = v;
                }
            }
            m
        };
        let hess_rho = sym(&mut rng);
        let hess_s = sym(&mut rng);
        Some(SecondOrder { hess_u, hess_rho, hess_s })
    } else {
        None
    };
    Ok(JetPoint { t, geom, u, rho, s, grad_u, grad_rho, grad_s, second })
}

/// `count` reproducible jets; jet k depends only on (seed, k).
pub fn sample_jets(chart: &ChartMetric, count: usize, seed: u64, order: usize) -> Result<Vec<JetPoint>> {
    (0..count as u64).map(|k| sample_jet(chart, seed, k, order)).collect()
}
