//! Expression registry: one-variable functions with closed-form derivatives and
//! separable multi-variable fields built from them.

use num_dual::DualNum;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scalar type accepted by every generic evaluator (f64 or a nest of dual numbers over f64).
pub trait Scalar: DualNum<Primitive = f64> + Copy + Send + Sync {}
impl<T: DualNum<Primitive = f64> + Copy + Send + Sync> Scalar for T {}

/// Real part of any scalar.
pub fn re<D: Scalar>(x: D) -> f64 {
    num_dual::DualStruct::re(&x)
}

fn one() -> f64 {
    1.0
}

/// A registered function of one real variable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScalarFn {
    /// c
    Const { value: f64 },
    /// Σ c_k x^k
    Poly { coeffs: Vec<f64> },
    /// Σ c x^p, terms given as [c, p]
    PowerSum { terms: Vec<[f64; 2]> },
    /// scale·exp(rate·x) + offset
    Exp {
        #[serde(default = "one")]
        scale: f64,
        #[serde(default = "one")]
        rate: f64,
        #[serde(default)]
        offset: f64,
    },
    /// amplitude·sin(freq·x + phase) + offset
    Sin {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "one")]
        freq: f64,
        #[serde(default)]
        phase: f64,
        #[serde(default)]
        offset: f64,
    },
    /// amplitude·cos(freq·x + phase) + offset
    Cos {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "one")]
        freq: f64,
        #[serde(default)]
        phase: f64,
        #[serde(default)]
        offset: f64,
    },
    /// amplitude·exp(kappa·(cos(x − center) − 1)), a smooth periodic bump
    ExpCos {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "one")]
        kappa: f64,
        #[serde(default)]
        center: f64,
    },
    /// Σ terms
    Sum { terms: Vec<ScalarFn> },
}

impl ScalarFn {
    pub fn constant(value: f64) -> Self {
        ScalarFn::Const { value }
    }

    pub fn identity() -> Self {
        ScalarFn::Poly { coeffs: vec![0.0, 1.0] }
    }

    pub fn poly(coeffs: &[f64]) -> Self {
        ScalarFn::Poly { coeffs: coeffs.to_vec() }
    }

    pub fn power(c: f64, p: f64) -> Self {
        ScalarFn::PowerSum { terms: vec![[c, p]] }
    }

    pub fn exp(scale: f64, rate: f64, offset: f64) -> Self {
        ScalarFn::Exp { scale, rate, offset }
    }

    pub fn sin(amplitude: f64, freq: f64, phase: f64, offset: f64) -> Self {
        ScalarFn::Sin { amplitude, freq, phase, offset }
    }

    pub fn cos(amplitude: f64, freq: f64, phase: f64, offset: f64) -> Self {
        ScalarFn::Cos { amplitude, freq, phase, offset }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.deriv(x, 0)
    }

    /// k-th derivative at x.
    pub fn deriv(&self, x: f64, k: usize) -> f64 {
        self.deriv_generic(x, k)
    }

    /// Value and first three derivatives.
    pub fn derivs3(&self, x: f64) -> [f64; 4] {
        [self.deriv(x, 0), self.deriv(x, 1), self.deriv(x, 2), self.deriv(x, 3)]
    }

    pub fn eval_generic<D: Scalar>(&self, x: D) -> D {
        self.deriv_generic(x, 0)
    }

    /// k-th derivative evaluated on a generic scalar. ExpCos supports k ≤ 3.
    pub fn deriv_generic<D: Scalar>(&self, x: D, k: usize) -> D {
        match self {
            ScalarFn::Const { value } => {
                if k == 0 {
                    D::from(*value)
                } else {
                    D::from(0.0)
                }
            }
            ScalarFn::Poly { coeffs } => {
                if k >= coeffs.len() {
                    return D::from(0.0);
                }
                let mut acc = D::from(0.0);
                for m in (k..coeffs.len()).rev() {
                    let mut fall = 1.0;
                    for j in 0..k {
                        fall *= (m - j) as f64;
                    }
                    acc = acc * x + coeffs[m] * fall;
                }
                acc
            }
            ScalarFn::PowerSum { terms } => {
                let mut acc = D::from(0.0);
                for [c, p] in terms {
                    let mut fall = 1.0;
                    for j in 0..k {
                        fall *= p - j as f64;
                    }
                    if fall == 0.0 {
                        continue;
                    }
                    acc += pow_generic(x, p - k as f64) * (c * fall);
                }
                acc
            }
            ScalarFn::Exp { scale, rate, offset } => {
                let v = (x * *rate).exp() * (scale * rate.powi(k as i32));
                if k == 0 {
                    v + *offset
                } else {
                    v
                }
            }
            ScalarFn::Sin { amplitude, freq, phase, offset } => {
                let arg = x * *freq + *phase + k as f64 * std::f64::consts::FRAC_PI_2;
                let v = arg.sin() * (amplitude * freq.powi(k as i32));
                if k == 0 {
                    v + *offset
                } else {
                    v
                }
            }
            ScalarFn::Cos { amplitude, freq, phase, offset } => {
                let arg = x * *freq + *phase + (k as f64 + 1.0) * std::f64::consts::FRAC_PI_2;
                let v = arg.sin() * (amplitude * freq.powi(k as i32));
                if k == 0 {
                    v + *offset
                } else {
                    v
                }
            }
            ScalarFn::ExpCos { amplitude, kappa, center } => {
                let d = x - *center;
                let (s, c) = (d.sin(), d.cos());
                let f = ((c - 1.0) * *kappa).exp() * *amplitude;
                let p1 = s * (-*kappa);
                let p2 = c * (-*kappa);
                let p3 = s * *kappa;
                match k {
                    0 => f,
                    1 => f * p1,
                    2 => f * (p2 + p1 * p1),
                    3 => f * (p3 + p1 * p2 * 3.0 + p1 * p1 * p1),
                    _ => D::from(f64::NAN),
                }
            }
            ScalarFn::Sum { terms } => {
                let mut acc = D::from(0.0);
                for t in terms {
                    acc += t.deriv_generic(x, k);
                }
                acc
            }
        }
    }

    /// Structurally constant (all derivatives vanish identically).
    pub fn is_constant(&self) -> bool {
        match self {
            ScalarFn::Const { .. } => true,
            ScalarFn::Poly { coeffs } => coeffs.iter().skip(1).all(|c| *c == 0.0),
            ScalarFn::PowerSum { terms } => terms.iter().all(|[c, p]| *c == 0.0 || *p == 0.0),
            ScalarFn::Exp { scale, rate, .. } => *scale == 0.0 || *rate == 0.0,
            ScalarFn::Sin { amplitude, freq, .. } | ScalarFn::Cos { amplitude, freq, .. } => {
                *amplitude == 0.0 || *freq == 0.0
            }
            ScalarFn::ExpCos { amplitude, kappa, .. } => *amplitude == 0.0 || *kappa == 0.0,
            ScalarFn::Sum { terms } => terms.iter().all(|t| t.is_constant()),
        }
    }

    /// Terms c·x^p when the function is a power sum (polynomials and constants included).
    pub fn as_power_terms(&self) -> Option<Vec<[f64; 2]>> {
        match self {
            ScalarFn::Const { value } => Some(vec![[*value, 0.0]]),
            ScalarFn::Poly { coeffs } => Some(
                coeffs
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| **c != 0.0)
                    .map(|(k, c)| [*c, k as f64])
                    .collect(),
            ),
            ScalarFn::PowerSum { terms } => Some(terms.clone()),
            ScalarFn::Sum { terms } => {
                let mut out = Vec::new();
                for t in terms {
                    out.extend(t.as_power_terms()?);
                }
                Some(out)
            }
            _ => None,
        }
    }

    /// Largest polynomial-style validity issue: non-integer powers need x > 0.
    pub fn needs_positive_argument(&self) -> bool {
        match self {
            ScalarFn::PowerSum { terms } => terms.iter().any(|[_, p]| p.fract() != 0.0 || *p < 0.0),
            ScalarFn::Sum { terms } => terms.iter().any(|t| t.needs_positive_argument()),
            _ => false,
        }
    }

    pub fn validate(&self, path: &str) -> Result<()> {
        let bad = |m: &str| Err(Error::config(path, m));
        match self {
            ScalarFn::Const { value } if !value.is_finite() => bad("value must be finite"),
            ScalarFn::Poly { coeffs } if coeffs.iter().any(|c| !c.is_finite()) => {
                bad("coefficients must be finite")
            }
            ScalarFn::PowerSum { terms } if terms.iter().flatten().any(|c| !c.is_finite()) => {
                bad("terms must be finite")
            }
            ScalarFn::Sum { terms } => {
                for (i, t) in terms.iter().enumerate() {
                    t.validate(&format!("{path}.terms[{i}]"))?;
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

impl ScalarFn {
    /// c·f as a registry expression.
    pub fn scaled(self, c: f64) -> ScalarFn {
        match self {
            ScalarFn::Const { value } => ScalarFn::Const { value: c * value },
            ScalarFn::Poly { coeffs } => ScalarFn::Poly { coeffs: coeffs.iter().map(|a| c * a).collect() },
            ScalarFn::PowerSum { terms } => ScalarFn::PowerSum { terms: terms.iter().map(|[a, p]| [c * a, *p]).collect() },
            ScalarFn::Exp { scale, rate, offset } => ScalarFn::Exp { scale: c * scale, rate, offset: c * offset },
            ScalarFn::Sin { amplitude, freq, phase, offset } => {
                ScalarFn::Sin { amplitude: c * amplitude, freq, phase, offset: c * offset }
            }
            ScalarFn::Cos { amplitude, freq, phase, offset } => {
                ScalarFn::Cos { amplitude: c * amplitude, freq, phase, offset: c * offset }
            }
            ScalarFn::ExpCos { amplitude, kappa, center } => ScalarFn::ExpCos { amplitude: c * amplitude, kappa, center },
            ScalarFn::Sum { terms } => ScalarFn::Sum { terms: terms.into_iter().map(|t| t.scaled(c)).collect() },
        }
    }
}

/// x^p with integer exponents routed through powi so negative bases work.
pub fn pow_generic<D: Scalar>(x: D, p: f64) -> D {
    if p == 0.0 {
        D::from(1.0)
    } else if p.fract() == 0.0 && p.abs() <= 64.0 {
        x.powi(p as i32)
    } else {
        x.powf(p)
    }
}

/// One factor f(x[axis]) of a separable term.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisFactor {
    pub axis: usize,
    #[serde(rename = "fn")]
    pub func: ScalarFn,
}

/// coef · Π f_a(x[axis_a])
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldTerm {
    #[serde(default = "one")]
    pub coef: f64,
    #[serde(default)]
    pub factors: Vec<AxisFactor>,
}

/// Sum of separable terms: a scalar field on chart coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct FieldExpr {
    #[serde(default)]
    pub terms: Vec<FieldTerm>,
}

impl FieldExpr {
    pub fn constant(c: f64) -> Self {
        FieldExpr { terms: vec![FieldTerm { coef: c, factors: vec![] }] }
    }

    /// Add coef·f(x[axis]).
    pub fn plus(mut self, coef: f64, axis: usize, func: ScalarFn) -> Self {
        self.terms.push(FieldTerm { coef, factors: vec![AxisFactor { axis, func }] });
        self
    }

    /// Add coef·Π f(x[axis]).
    pub fn plus_product(mut self, coef: f64, factors: Vec<(usize, ScalarFn)>) -> Self {
        self.terms.push(FieldTerm {
            coef,
            factors: factors.into_iter().map(|(axis, func)| AxisFactor { axis, func }).collect(),
        });
        self
    }

    pub fn max_axis(&self) -> Option<usize> {
        self.terms.iter().flat_map(|t| t.factors.iter().map(|f| f.axis)).max()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coef * t.factors.iter().map(|f| f.func.value(x[f.axis])).product::<f64>())
            .sum()
    }

    /// ∂_i of the field.
    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        let mut g = vec![0.0; n];
        for (i, gi) in g.iter_mut().enumerate() {
            *gi = self.mixed(x, &[i]);
        }
        g
    }

    /// ∂_i∂_j of the field, row-major n×n.
    pub fn hessian(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        let mut h = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                h[i * n + j] = self.mixed(x, &[i, j]);
            }
        }
        h
    }

    /// Mixed partial derivative along the listed axes.
    pub fn mixed(&self, x: &[f64], axes: &[usize]) -> f64 {
        let mut total = 0.0;
        for t in &self.terms {
            // axes not covered by any factor kill the term
            let mut counts = vec![0usize; x.len()];
            for a in axes {
                counts[*a] += 1;
            }
            let mut covered = vec![false; x.len()];
            let mut prod = t.coef;
            // each axis's derivative order applies to the product of that axis's factors;
            // a Leibniz expansion is needed when an axis has several factors
            let mut per_axis: Vec<Vec<&ScalarFn>> = vec![Vec::new(); x.len()];
            for f in &t.factors {
                per_axis[f.axis].push(&f.func);
                covered[f.axis] = true;
            }
            for a in 0..x.len() {
                if counts[a] > 0 && !covered[a] {
                    prod = 0.0;
                    break;
                }
                if per_axis[a].is_empty() {
                    continue;
                }
                prod *= leibniz(&per_axis[a], x[a], counts[a]);
            }
            total += prod;
        }
        total
    }
}

/// k-th derivative of a product of one-variable functions.
fn leibniz(fs: &[&ScalarFn], x: f64, k: usize) -> f64 {
    match fs.len() {
        0 => {
            if k == 0 {
                1.0
            } else {
                0.0
            }
        }
        1 => fs[0].deriv(x, k),
        _ => {
            let mut acc = 0.0;
            let mut binom = 1.0;
            for j in 0..=k {
                acc += binom * fs[0].deriv(x, j) * leibniz(&fs[1..], x, k - j);
                binom = binom * (k - j) as f64 / (j + 1) as f64;
            }
            acc
        }
    }
}
