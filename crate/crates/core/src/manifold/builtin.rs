//! Built-in charts and their catalogued vector fields.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use nalgebra::DMatrix;

use super::fields::{Potential, VectorFieldSpec};
use super::ChartMetric;
use crate::error::{Error, Result};
use crate::expr::FieldExpr;

/// Names of the built-in charts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BuiltinChart {
    /// flat n-torus [0, 2π)ⁿ, periodic
    FlatTorus,
    /// dr² + f(r)²(dθ² + …), f = R + cos r, periodic
    TorusOfRevolution,
    /// unit sphere dθ² + sin²θ dφ², θ ∈ [0.2, π − 0.2]
    UnitSphere,
    /// flat [−π, π)ⁿ, not periodic
    FlatPatch,
}

impl BuiltinChart {
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "flat_torus" | "M1" => Some(BuiltinChart::FlatTorus),
            "torus_of_revolution" | "M2" => Some(BuiltinChart::TorusOfRevolution),
            "unit_sphere" | "M3" => Some(BuiltinChart::UnitSphere),
            "flat_patch" | "M4" => Some(BuiltinChart::FlatPatch),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BuiltinChart::FlatTorus => "flat_torus",
            BuiltinChart::TorusOfRevolution => "torus_of_revolution",
            BuiltinChart::UnitSphere => "unit_sphere",
            BuiltinChart::FlatPatch => "flat_patch",
        }
    }
}

fn identity_metric(n: usize) -> ChartMetric {
    assert_dim(n);
    ChartMetric::new("flat", vec![0.0; n], vec![TAU; n], vec![true; n], Arc::new(move |_x: &[f64]| DMatrix::identity(n, n)))
        .expect("valid box")
}

fn assert_dim(n: usize) {
    assert!(n >= 2, "chart dimension must be at least 2");
}

fn zero_derivs(n: usize, count: usize) -> Arc<dyn Fn(&[f64]) -> Vec<DMatrix<f64>> + Send + Sync> {
    Arc::new(move |_x: &[f64]| vec![DMatrix::zeros(n, n); count])
}

impl ChartMetric {
    /// Flat n-torus [0, 2π)ⁿ.
    pub fn flat_torus(n: usize) -> Self {
        let mut c = identity_metric(n)
            .with_metric_deriv(zero_derivs(n, n))
            .with_metric_second_deriv(zero_derivs(n, n * n))
            .with_flat(true);
        c.name = "flat_torus".into();
        c
    }

    /// Flat non-periodic patch [−π, π)ⁿ.
    pub fn flat_patch(n: usize) -> Self {
        assert_dim(n);
        ChartMetric::new("flat_patch", vec![-PI; n], vec![PI; n], vec![false; n], Arc::new(move |_x: &[f64]| DMatrix::identity(n, n)))
            .expect("valid box")
            .with_metric_deriv(zero_derivs(n, n))
            .with_metric_second_deriv(zero_derivs(n, n * n))
            .with_flat(true)
    }

    /// g = dr² + f(r)² Σ_{a≥1} (dx^a)², f = R + cos r; at n = 2 the torus of revolution.
    pub fn torus_of_revolution(n: usize, major_radius: f64) -> Result<Self> {
        assert_dim(n);
        if !(major_radius > 1.0) {
            return Err(Error::Geometry(format!("torus major radius must exceed 1, got {major_radius}")));
        }
        let r0 = major_radius;
        let metric = Arc::new(move |x: &[f64]| {
            let f = r0 + x[0].cos();
            let mut g = DMatrix::identity(n, n);
            for a in 1..n {
                g[(a, a)] = f * f;
            }
            g
        });
        let d1 = Arc::new(move |x: &[f64]| {
            let f = r0 + x[0].cos();
            let fp = -x[0].sin();
            let mut out = vec![DMatrix::zeros(n, n); n];
            for a in 1..n {
                out[0][(a, a)] = 2.0 * f * fp;
            }
            out
        });
        let d2 = Arc::new(move |x: &[f64]| {
            let f = r0 + x[0].cos();
            let fp = -x[0].sin();
            let fpp = -x[0].cos();
            let mut out = vec![DMatrix::zeros(n, n); n * n];
            for a in 1..n {
                out[0][(a, a)] = 2.0 * (fp * fp + f * fpp);
            }
            out
        });
        Ok(ChartMetric::new("torus_of_revolution", vec![0.0; n], vec![TAU; n], vec![true; n], metric)?
            .with_metric_deriv(d1)
            .with_metric_second_deriv(d2))
    }

    /// Unit sphere chart (θ, φ), θ ∈ [margin, π − margin], φ periodic.
    pub fn unit_sphere(margin: f64) -> Result<Self> {
        if !(margin > 0.0 && margin < PI / 2.0) {
            return Err(Error::Geometry(format!("sphere margin must lie in (0, π/2), got {margin}")));
        }
        let metric = Arc::new(|x: &[f64]| {
            let s = x[0].sin();
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, s * s])
        });
        let d1 = Arc::new(|x: &[f64]| {
            vec![DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, (2.0 * x[0]).sin()]), DMatrix::zeros(2, 2)]
        });
        let d2 = Arc::new(|x: &[f64]| {
            vec![
                DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 2.0 * (2.0 * x[0]).cos()]),
                DMatrix::zeros(2, 2),
                DMatrix::zeros(2, 2),
                DMatrix::zeros(2, 2),
            ]
        });
        Ok(ChartMetric::new("unit_sphere", vec![margin, 0.0], vec![PI - margin, TAU], vec![false, true], metric)?
            .with_metric_deriv(d1)
            .with_metric_second_deriv(d2)
            .with_singular_distance(Arc::new(|x: &[f64]| x[0].min(PI - x[0]))))
    }

    /// Built-in chart by name with optional parameters (`major_radius`, `theta_margin`, `h_geom_rel`).
    pub fn builtin(name: &str, n: usize, params: &BTreeMap<String, f64>) -> Result<Self> {
        let kind = BuiltinChart::from_name(name)
            .ok_or_else(|| Error::config("chart.name", format!("unknown chart `{name}`")))?;
        if n < 2 {
            return Err(Error::config("chart.dim", "dimension must be at least 2"));
        }
        let known: &[&str] = match kind {
            BuiltinChart::TorusOfRevolution => &["major_radius", "h_geom_rel"],
            BuiltinChart::UnitSphere => &["theta_margin", "h_geom_rel"],
            _ => &["h_geom_rel"],
        };
        for k in params.keys() {
            if !known.contains(&k.as_str()) {
                return Err(Error::config(format!("chart.params.{k}"), "unknown parameter"));
            }
        }
        let mut chart = match kind {
            BuiltinChart::FlatTorus => ChartMetric::flat_torus(n),
            BuiltinChart::FlatPatch => ChartMetric::flat_patch(n),
            BuiltinChart::TorusOfRevolution => {
                ChartMetric::torus_of_revolution(n, params.get("major_radius").copied().unwrap_or(2.0))?
            }
            BuiltinChart::UnitSphere => {
                if n != 2 {
                    return Err(Error::config("chart.dim", "the sphere chart is two-dimensional"));
                }
                ChartMetric::unit_sphere(params.get("theta_margin").copied().unwrap_or(0.2))?
            }
        };
        if let Some(rel) = params.get("h_geom_rel") {
            if !(*rel > 0.0) {
                return Err(Error::config("chart.params.h_geom_rel", "must be positive"));
            }
            let extent = (0..n).map(|a| chart.extent(a)).fold(0.0, f64::max);
            chart.h_geom = rel * extent;
        }
        Ok(chart)
    }

    /// Midpoint of the coordinate box.
    pub fn center(&self) -> Vec<f64> {
        (0..self.dim).map(|a| 0.5 * (self.lower[a] + self.upper[a])).collect()
    }
}

fn parse_index(s: &str, n: usize, name: &str) -> Result<usize> {
    let k: usize = s.parse().map_err(|_| Error::config("field", format!("bad axis in `{name}`")))?;
    if k >= n {
        return Err(Error::config("field", format!("axis {k} out of range in `{name}`")));
    }
    Ok(k)
}

/// Potential from a registry field expression.
pub fn potential_from_expr(expr: FieldExpr) -> Potential {
    let e1 = expr.clone();
    let e2 = expr.clone();
    Potential {
        value: Arc::new(move |x: &[f64]| expr.value(x)),
        grad: Arc::new(move |x: &[f64]| e1.gradient(x)),
        hessian: Some(Arc::new(move |x: &[f64]| {
            let n = x.len();
            DMatrix::from_row_slice(n, n, &e2.hessian(x))
        })),
    }
}

/// Catalogued vector fields:
/// `translation_k`, `rotation_ij`, `dilation`, `quadratic_k`, and the aliases
/// `radial` (= ∂ along axis 0), `axial` / `azimuthal` (= ∂ along axis 1).
/// Potentials are attached on flat charts only (translation: x^k, dilation: ½|x − c|²).
pub fn builtin_field(chart: &ChartMetric, name: &str) -> Result<VectorFieldSpec> {
    let n = chart.dim;
    let name_owned = name.to_string();
    let translation = |k: usize| {
        let f = VectorFieldSpec::new(
            name_owned.clone(),
            Arc::new(move |_x: &[f64]| {
                let mut v = vec![0.0; n];
                v[k] = 1.0;
                v
            }),
        )
        .with_deriv(Arc::new(move |_x: &[f64]| DMatrix::zeros(n, n)));
        if chart.flat {
            f.with_potential(Potential {
                value: Arc::new(move |x: &[f64]| x[k]),
                grad: Arc::new(move |_x: &[f64]| {
                    let mut v = vec![0.0; n];
                    v[k] = 1.0;
                    v
                }),
                hessian: Some(Arc::new(move |_x: &[f64]| DMatrix::zeros(n, n))),
            })
        } else {
            f
        }
    };
    if let Some(rest) = name.strip_prefix("translation_") {
        return Ok(translation(parse_index(rest, n, name)?));
    }
    match name {
        "radial" => return Ok(translation(0)),
        "axial" | "azimuthal" => return Ok(translation(1)),
        _ => {}
    }
    let c = chart.center();
    if let Some(rest) = name.strip_prefix("rotation_") {
        if rest.len() != 2 {
            return Err(Error::config("field", format!("rotation needs two axes, e.g. rotation_01, got `{name}`")));
        }
        let i = parse_index(&rest[0..1], n, name)?;
        let j = parse_index(&rest[1..2], n, name)?;
        if i == j {
            return Err(Error::config("field", "rotation axes must differ"));
        }
        let cc = c.clone();
        return Ok(VectorFieldSpec::new(
            name,
            Arc::new(move |x: &[f64]| {
                let mut v = vec![0.0; n];
                v[i] = -(x[j] - cc[j]);
                v[j] = x[i] - cc[i];
                v
            }),
        )
        .with_deriv(Arc::new(move |_x: &[f64]| {
            let mut d = DMatrix::zeros(n, n);
            d[(i, j)] = -1.0;
            d[(j, i)] = 1.0;
            d
        })));
    }
    if name == "dilation" {
        let c1 = c.clone();
        let f = VectorFieldSpec::new(
            name,
            Arc::new(move |x: &[f64]| x.iter().zip(&c1).map(|(a, b)| a - b).collect()),
        )
        .with_deriv(Arc::new(move |_x: &[f64]| DMatrix::identity(n, n)));
        if chart.flat {
            let (c2, c3) = (c.clone(), c.clone());
            return Ok(f.with_potential(Potential {
                value: Arc::new(move |x: &[f64]| 0.5 * x.iter().zip(&c2).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()),
                grad: Arc::new(move |x: &[f64]| x.iter().zip(&c3).map(|(a, b)| a - b).collect()),
                hessian: Some(Arc::new(move |_x: &[f64]| DMatrix::identity(n, n))),
            }));
        }
        return Ok(f);
    }
    if let Some(rest) = name.strip_prefix("quadratic_") {
        let k = parse_index(rest, n, name)?;
        return Ok(VectorFieldSpec::new(
            name,
            Arc::new(move |x: &[f64]| {
                let mut v = vec![0.0; n];
                v[k] = x[k] * x[k];
                v
            }),
        )
        .with_deriv(Arc::new(move |x: &[f64]| {
            let mut d = DMatrix::zeros(n, n);
            d[(k, k)] = 2.0 * x[k];
            d
        })));
    }
    Err(Error::config("field", format!("unknown vector field `{name}`")))
}
