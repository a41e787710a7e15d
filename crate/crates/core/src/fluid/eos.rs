use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{pow_generic, Scalar, ScalarFn};

/// Reference density at which quadrature-based internal energy vanishes.
pub const RHO_REF: f64 = 1.0;

/// Tolerance of the dimension-dependent exponent predicate.
pub const SPECIAL_GAMMA_TOL: f64 = 1e-12;

fn const_one() -> ScalarFn {
    ScalarFn::constant(1.0)
}

/// One term c·ρ^p·b(S) of a general pressure law.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EosTerm {
    pub coef: f64,
    pub power: f64,
    #[serde(default = "const_one")]
    pub entropy: ScalarFn,
}

/// Declarative EOS block; the polytropic exponent may be left to its dimension default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case", deny_unknown_fields)]
pub enum EosConfig {
    General {
        terms: Vec<EosTerm>,
    },
    Polytropic {
        sigma: ScalarFn,
        #[serde(default)]
        gamma: Option<f64>,
        #[serde(default)]
        sigma0: f64,
    },
    IsobaricEntropy {
        kappa: ScalarFn,
    },
    Barotropic {
        pressure: ScalarFn,
    },
}

/// Equation of state P(ρ, S).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum Eos {
    /// P = Σ c ρ^p b(S)
    General { terms: Vec<EosTerm> },
    /// P = σ(S) ρ^γ + σ₀
    Polytropic { sigma: ScalarFn, gamma: f64, sigma0: f64 },
    /// P = κ(S)
    IsobaricEntropy { kappa: ScalarFn },
    /// P = P(ρ)
    Barotropic { pressure: ScalarFn },
}

/// P and its partials through second order at one state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PressureJet {
    pub p: f64,
    pub p_r: f64,
    pub p_s: f64,
    pub p_rr: f64,
    pub p_rs: f64,
    pub p_ss: f64,
}

/// Polytropic data recognised from any variant.
#[derive(Clone, Debug, PartialEq)]
pub struct PolytropicForm {
    pub sigma: ScalarFn,
    pub gamma: f64,
    pub sigma0: f64,
}

fn falling(p: f64, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (p - j as f64))
}

/// d^k/dρ^k of c·ρ^p, generic.
fn power_deriv<D: Scalar>(rho: D, p: f64, k: usize) -> D {
    let f = falling(p, k);
    if f == 0.0 {
        D::from(0.0)
    } else {
        pow_generic(rho, p - k as f64) * f
    }
}

/// ∂_S^k of ∫_{ρ₀}^{ρ} r^{p-2} dr, i.e. (ρ^{p−1} − 1)/(p−1) or ln ρ.
fn energy_kernel<D: Scalar>(rho: D, p: f64) -> D {
    if (p - 1.0).abs() < 1e-14 {
        rho.ln()
    } else {
        (pow_generic(rho, p - 1.0) - 1.0) / (p - 1.0)
    }
}

/// The dimension-dependent exponent 1 + 2/n.
pub fn special_gamma(n: usize) -> f64 {
    1.0 + 2.0 / n as f64
}

impl EosConfig {
    pub fn build(&self, n: usize) -> Result<Eos> {
        let eos = match self.clone() {
            EosConfig::General { terms } => Eos::General { terms },
            EosConfig::Polytropic { sigma, gamma, sigma0 } => {
                Eos::Polytropic { sigma, gamma: gamma.unwrap_or_else(|| special_gamma(n)), sigma0 }
            }
            EosConfig::IsobaricEntropy { kappa } => Eos::IsobaricEntropy { kappa },
            EosConfig::Barotropic { pressure } => Eos::Barotropic { pressure },
        };
        eos.validate("eos")?;
        Ok(eos)
    }
}

impl Eos {
    pub fn polytropic(sigma: f64, gamma: f64) -> Self {
        Eos::Polytropic { sigma: ScalarFn::constant(sigma), gamma, sigma0: 0.0 }
    }

    pub fn barotropic(pressure: ScalarFn) -> Self {
        Eos::Barotropic { pressure }
    }

    pub fn isobaric(kappa: ScalarFn) -> Self {
        Eos::IsobaricEntropy { kappa }
    }

    pub fn general(terms: Vec<(f64, f64, ScalarFn)>) -> Self {
        Eos::General {
            terms: terms.into_iter().map(|(coef, power, entropy)| EosTerm { coef, power, entropy }).collect(),
        }
    }

    pub fn variant_name(&self) -> &'static str {
        match self {
            Eos::General { .. } => "general",
            Eos::Polytropic { .. } => "polytropic",
            Eos::IsobaricEntropy { .. } => "isobaric_entropy",
            Eos::Barotropic { .. } => "barotropic",
        }
    }

    /// Structural checks plus sampled non-triviality (P_ρ or P_S nonzero somewhere).
    pub fn validate(&self, path: &str) -> Result<()> {
        match self {
            Eos::General { terms } => {
                if terms.is_empty() {
                    return Err(Error::config(format!("{path}.terms"), "at least one term is required"));
                }
                for (i, t) in terms.iter().enumerate() {
                    if !t.coef.is_finite() || !t.power.is_finite() {
                        return Err(Error::config(format!("{path}.terms[{i}]"), "coef and power must be finite"));
                    }
                    t.entropy.validate(&format!("{path}.terms[{i}].entropy"))?;
                }
            }
            Eos::Polytropic { sigma, gamma, sigma0 } => {
                sigma.validate(&format!("{path}.sigma"))?;
                if !gamma.is_finite() || !sigma0.is_finite() {
                    return Err(Error::config(path, "gamma and sigma0 must be finite"));
                }
                for k in 0..=40 {
                    let s = -2.0 + 0.1 * k as f64;
                    if sigma.value(s) <= 0.0 {
                        return Err(Error::config(format!("{path}.sigma"), format!("sigma must be positive, sigma({s}) <= 0")));
                    }
                }
            }
            Eos::IsobaricEntropy { kappa } => {
                kappa.validate(&format!("{path}.kappa"))?;
                if kappa.is_constant() {
                    return Err(Error::config(format!("{path}.kappa"), "kappa must depend on S"));
                }
            }
            Eos::Barotropic { pressure } => pressure.validate(&format!("{path}.pressure"))?,
        }
        if !self.is_nontrivial() {
            return Err(Error::config(path, "pressure must depend on rho or S (P_rho and P_S both vanish)"));
        }
        Ok(())
    }

    /// ∂_ρ^kr ∂_S^ks P at (ρ, S), generic.
    pub fn pressure_deriv<D: Scalar>(&self, rho: D, s: D, kr: usize, ks: usize) -> D {
        match self {
            Eos::General { terms } => {
                let mut acc = D::from(0.0);
                for t in terms {
                    acc += power_deriv(rho, t.power, kr) * t.entropy.deriv_generic(s, ks) * t.coef;
                }
                acc
            }
            Eos::Polytropic { sigma, gamma, sigma0 } => {
                let mut v = power_deriv(rho, *gamma, kr) * sigma.deriv_generic(s, ks);
                if kr == 0 && ks == 0 {
                    v += *sigma0;
                }
                v
            }
            Eos::IsobaricEntropy { kappa } => {
                if kr == 0 {
                    kappa.deriv_generic(s, ks)
                } else {
                    D::from(0.0)
                }
            }
            Eos::Barotropic { pressure } => {
                if ks == 0 {
                    pressure.deriv_generic(rho, kr)
                } else {
                    D::from(0.0)
                }
            }
        }
    }

    pub fn pressure_generic<D: Scalar>(&self, rho: D, s: D) -> D {
        self.pressure_deriv(rho, s, 0, 0)
    }

    /// (P, P_ρ, P_S); refuses ρ ≤ 0.
    pub fn pressure(&self, rho: f64, s: f64) -> Result<(f64, f64, f64)> {
        if rho <= 0.0 || !rho.is_finite() {
            return Err(Error::InvalidDensity(rho));
        }
        Ok((self.pressure_deriv(rho, s, 0, 0), self.pressure_deriv(rho, s, 1, 0), self.pressure_deriv(rho, s, 0, 1)))
    }

    pub fn jet(&self, rho: f64, s: f64) -> PressureJet {
        let d = |kr, ks| self.pressure_deriv(rho, s, kr, ks);
        PressureJet { p: d(0, 0), p_r: d(1, 0), p_s: d(0, 1), p_rr: d(2, 0), p_rs: d(1, 1), p_ss: d(0, 2) }
    }

    /// ∂_S^ks e in closed form, when the variant has one.
    pub fn energy_deriv_closed<D: Scalar>(&self, rho: D, s: D, ks: usize) -> Option<D> {
        match self {
            Eos::General { terms } => {
                let mut acc = D::from(0.0);
                for t in terms {
                    acc += energy_kernel(rho, t.power) * t.entropy.deriv_generic(s, ks) * t.coef;
                }
                Some(acc)
            }
            Eos::Polytropic { sigma, gamma, sigma0 } => {
                let main = if (gamma - 1.0).abs() < 1e-14 {
                    rho.ln()
                } else {
                    pow_generic(rho, gamma - 1.0) / (gamma - 1.0)
                };
                let mut v = main * sigma.deriv_generic(s, ks);
                if ks == 0 {
                    v -= rho.recip() * *sigma0;
                }
                Some(v)
            }
            Eos::IsobaricEntropy { kappa } => Some(-kappa.deriv_generic(s, ks) / rho),
            Eos::Barotropic { pressure } => {
                if ks > 0 {
                    return Some(D::from(0.0));
                }
                let terms = pressure.as_power_terms()?;
                let mut acc = D::from(0.0);
                for [c, p] in terms {
                    acc += energy_kernel(rho, p) * c;
                }
                Some(acc)
            }
        }
    }

    pub fn has_closed_form_energy(&self) -> bool {
        self.energy_deriv_closed(1.0, 0.0, 0).is_some()
    }

    /// e = ∫_{ρ₀}^{ρ} r⁻² P(r, S) dr by double-exponential quadrature.
    pub fn internal_energy_quadrature(&self, rho: f64, s: f64) -> Result<f64> {
        if rho <= 0.0 || !rho.is_finite() {
            return Err(Error::InvalidDensity(rho));
        }
        if rho == RHO_REF {
            return Ok(0.0);
        }
        let out = quadrature::integrate(|r| self.pressure_deriv(r, s, 0, 0) / (r * r), RHO_REF, rho, 1e-13);
        let scale = out.integral.abs().max(1.0);
        if !out.integral.is_finite() || out.error_estimate > 1e-9 * scale {
            return Err(Error::Numeric(format!(
                "internal energy quadrature did not converge at rho={rho}, S={s} (error estimate {:e})",
                out.error_estimate
            )));
        }
        Ok(out.integral)
    }

    /// Internal energy e(ρ, S), closed form when available.
    pub fn internal_energy(&self, rho: f64, s: f64) -> Result<f64> {
        if rho <= 0.0 || !rho.is_finite() {
            return Err(Error::InvalidDensity(rho));
        }
        match self.energy_deriv_closed(rho, s, 0) {
            Some(e) => Ok(e),
            None => self.internal_energy_quadrature(rho, s),
        }
    }

    /// (e, e_S, e_SS).
    pub fn energy_s_partials(&self, rho: f64, s: f64) -> Result<(f64, f64, f64)> {
        let e = self.internal_energy(rho, s)?;
        // only the quadrature-backed barotropic variant lacks a closed form, and there e_S = 0
        let es = self.energy_deriv_closed(rho, s, 1).unwrap_or(0.0);
        let ess = self.energy_deriv_closed(rho, s, 2).unwrap_or(0.0);
        Ok((e, es, ess))
    }

    /// Generic e when a closed form exists.
    pub fn energy_generic<D: Scalar>(&self, rho: D, s: D) -> Option<D> {
        self.energy_deriv_closed(rho, s, 0)
    }

    /// P_ρ ≡ 0 structurally.
    pub fn is_isobaric(&self) -> bool {
        match self {
            Eos::IsobaricEntropy { .. } => true,
            Eos::General { terms } => terms.iter().all(|t| t.power == 0.0 || t.coef == 0.0),
            Eos::Polytropic { sigma, gamma, .. } => *gamma == 0.0 || sigma.is_constant() && sigma.value(0.0) == 0.0,
            Eos::Barotropic { pressure } => pressure.is_constant(),
        }
    }

    /// P_S ≡ 0 structurally.
    pub fn is_barotropic(&self) -> bool {
        match self {
            Eos::Barotropic { .. } => true,
            Eos::Polytropic { sigma, .. } => sigma.is_constant(),
            Eos::IsobaricEntropy { kappa } => kappa.is_constant(),
            Eos::General { terms } => terms.iter().all(|t| t.coef == 0.0 || t.entropy.is_constant()),
        }
    }

    /// Recognise P = σ(S)ρ^γ + σ₀ in any variant.
    pub fn as_polytropic(&self) -> Option<PolytropicForm> {
        match self {
            Eos::Polytropic { sigma, gamma, sigma0 } => {
                Some(PolytropicForm { sigma: sigma.clone(), gamma: *gamma, sigma0: *sigma0 })
            }
            Eos::Barotropic { pressure } => {
                let terms = pressure.as_power_terms()?;
                let mut main: Option<(f64, f64)> = None;
                let mut offset = 0.0;
                for [c, p] in terms {
                    if c == 0.0 {
                        continue;
                    }
                    if p == 0.0 {
                        offset += c;
                    } else {
                        match main {
                            None => main = Some((c, p)),
                            Some((c0, p0)) if p0 == p => main = Some((c0 + c, p)),
                            Some(_) => return None,
                        }
                    }
                }
                let (c, p) = main?;
                Some(PolytropicForm { sigma: ScalarFn::constant(c), gamma: p, sigma0: offset })
            }
            Eos::General { terms } => {
                let mut main: Option<&EosTerm> = None;
                let mut offset = 0.0;
                for t in terms {
                    if t.coef == 0.0 {
                        continue;
                    }
                    if t.power == 0.0 {
                        if !t.entropy.is_constant() {
                            return None;
                        }
                        offset += t.coef * t.entropy.value(0.0);
                    } else if main.is_some() {
                        return None;
                    } else {
                        main = Some(t);
                    }
                }
                let t = main?;
                Some(PolytropicForm { sigma: t.entropy.clone().scaled(t.coef), gamma: t.power, sigma0: offset })
            }
            Eos::IsobaricEntropy { .. } => None,
        }
    }

    /// Polytropic with γ = 1 + 2/n.
    pub fn is_special_polytropic(&self, n: usize) -> bool {
        self.as_polytropic().is_some_and(|f| (f.gamma - special_gamma(n)).abs() <= SPECIAL_GAMMA_TOL)
    }

    /// Additive pressure constant σ₀ when the law is polytropic, else 0.
    pub fn sigma0(&self) -> f64 {
        self.as_polytropic().map_or(0.0, |f| f.sigma0)
    }

    /// P_ρ or P_S nonzero at some sampled state in ρ ∈ [0.5, 2], S ∈ [−1, 1].
    pub fn is_nontrivial(&self) -> bool {
        for i in 0..=6 {
            for j in 0..=6 {
                let rho = 0.5 + 0.25 * i as f64;
                let s = -1.0 + j as f64 / 3.0;
                let pr = self.pressure_deriv(rho, s, 1, 0);
                let ps = self.pressure_deriv(rho, s, 0, 1);
                if pr.abs() > 1e-14 || ps.abs() > 1e-14 {
                    return true;
                }
            }
        }
        false
    }

    /// Squared sound speed max(P_ρ, 0).
    pub fn sound_speed_sq(&self, rho: f64, s: f64) -> f64 {
        self.pressure_deriv(rho, s, 1, 0).max(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn catalogue() -> Vec<Eos> {
        vec![
            Eos::polytropic(1.0, 2.0),
            Eos::Polytropic { sigma: ScalarFn::exp(1.0, 0.5, 0.0), gamma: 1.4, sigma0: 0.3 },
            Eos::isobaric(ScalarFn::poly(&[2.0, 1.0, 0.5])),
            Eos::barotropic(ScalarFn::identity()),
            Eos::barotropic(ScalarFn::PowerSum { terms: vec![[1.0, 1.4], [0.5, 2.0], [0.1, 0.0]] }),
            Eos::barotropic(ScalarFn::exp(0.3, 1.0, 0.0)),
            Eos::general(vec![(1.0, 1.4, ScalarFn::poly(&[1.0, 0.3])), (0.2, 2.0, ScalarFn::exp(1.0, 0.5, 0.0))]),
            Eos::general(vec![(1.0, 1.0, ScalarFn::sin(0.5, 1.0, 0.0, 1.0)), (0.7, -0.5, ScalarFn::identity())]),
        ]
    }

    #[test]
    fn pressure_examples() {
        let e = EosConfig::Polytropic { sigma: ScalarFn::constant(1.0), gamma: None, sigma0: 0.0 }.build(2).unwrap();
        assert_eq!(e.pressure(2.0, 0.0).unwrap(), (4.0, 4.0, 0.0));
        assert_eq!(Eos::isobaric(ScalarFn::identity()).pressure(5.0, 3.0).unwrap(), (3.0, 0.0, 1.0));
        assert_eq!(Eos::barotropic(ScalarFn::identity()).pressure(7.0, 0.4).unwrap(), (7.0, 1.0, 0.0));
        assert!(matches!(e.pressure(0.0, 0.0), Err(Error::InvalidDensity(_))));
        assert!(matches!(e.internal_energy(-1.0, 0.0), Err(Error::InvalidDensity(_))));
    }

    #[test]
    fn energy_examples() {
        assert!((Eos::polytropic(1.0, 2.0).internal_energy(3.0, 0.0).unwrap() - 3.0).abs() < 1e-15);
        assert!((Eos::isobaric(ScalarFn::identity()).internal_energy(2.0, 4.0).unwrap() + 2.0).abs() < 1e-15);
        let b = Eos::barotropic(ScalarFn::identity());
        assert_eq!(b.internal_energy(RHO_REF, 0.0).unwrap(), 0.0);
        assert!((b.internal_energy(3.0, 0.0).unwrap() - 3.0f64.ln()).abs() < 1e-15);
        assert!((b.internal_energy_quadrature(3.0, 0.0).unwrap() - 3.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn partials_match_central_differences() {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(5);
        for eos in catalogue() {
            for _ in 0..200 {
                let rho: f64 = rand::Rng::random_range(&mut rng, 0.5..2.0);
                let s: f64 = rand::Rng::random_range(&mut rng, -1.0..1.0);
                let j = eos.jet(rho, s);
                let h = 1e-5;
                let p = |r: f64, s: f64| eos.pressure_deriv(r, s, 0, 0);
                let dr = (p(rho + h, s) - p(rho - h, s)) / (2.0 * h);
                let ds = (p(rho, s + h) - p(rho, s - h)) / (2.0 * h);
                assert!((dr - j.p_r).abs() <= 1e-6 * j.p_r.abs().max(1.0), "{eos:?}");
                assert!((ds - j.p_s).abs() <= 1e-6 * j.p_s.abs().max(1.0), "{eos:?}");
                let pr = |r: f64, s: f64| eos.pressure_deriv(r, s, 1, 0);
                let ps = |r: f64, s: f64| eos.pressure_deriv(r, s, 0, 1);
                assert!(((pr(rho + h, s) - pr(rho - h, s)) / (2.0 * h) - j.p_rr).abs() <= 1e-6 * j.p_rr.abs().max(1.0));
                assert!(((pr(rho, s + h) - pr(rho, s - h)) / (2.0 * h) - j.p_rs).abs() <= 1e-6 * j.p_rs.abs().max(1.0));
                assert!(((ps(rho, s + h) - ps(rho, s - h)) / (2.0 * h) - j.p_ss).abs() <= 1e-6 * j.p_ss.abs().max(1.0));
            }
        }
    }

    #[test]
    fn energy_derivative_and_paths_agree() {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(6);
        for eos in catalogue() {
            for _ in 0..1000 {
                let rho: f64 = rand::Rng::random_range(&mut rng, 0.5..2.0);
                let s: f64 = rand::Rng::random_range(&mut rng, -1.0..1.0);
                let h = 1e-5 * rho;
                let de = (eos.internal_energy(rho + h, s).unwrap() - eos.internal_energy(rho - h, s).unwrap()) / (2.0 * h);
                let target = eos.pressure(rho, s).unwrap().0 / (rho * rho);
                assert!((de - target).abs() <= 1e-6 * target.abs().max(1.0), "{eos:?}: {de} vs {target}");
            }
            if eos.has_closed_form_energy() {
                for _ in 0..50 {
                    let rho: f64 = rand::Rng::random_range(&mut rng, 0.5..2.0);
                    let s: f64 = rand::Rng::random_range(&mut rng, -1.0..1.0);
                    let closed = eos.internal_energy(rho, s).unwrap() - eos.internal_energy(RHO_REF, s).unwrap();
                    let quad = eos.internal_energy_quadrature(rho, s).unwrap();
                    assert!((closed - quad).abs() <= 1e-8, "{eos:?}: {closed} vs {quad}");
                }
            }
        }
    }

    #[test]
    fn energy_entropy_partials() {
        let eos = &catalogue()[6];
        let (rho, s, h) = (1.3, 0.2, 1e-5);
        let (_, es, ess) = eos.energy_s_partials(rho, s).unwrap();
        let e = |s: f64| eos.internal_energy(rho, s).unwrap();
        assert!(((e(s + h) - e(s - h)) / (2.0 * h) - es).abs() < 1e-8);
        assert!(((e(s + h) - 2.0 * e(s) + e(s - h)) / (h * h) - ess).abs() < 1e-4);
    }

    #[test]
    fn classification_predicates() {
        let poly = Eos::polytropic(1.0, 2.0);
        assert!(poly.is_barotropic() && poly.is_special_polytropic(2) && !poly.is_special_polytropic(3));
        assert!(Eos::polytropic(1.0, 5.0 / 3.0).is_special_polytropic(3));
        assert!(!Eos::polytropic(1.0, 1.7).is_special_polytropic(2));
        let iso = Eos::isobaric(ScalarFn::identity());
        assert!(iso.is_isobaric() && !iso.is_barotropic() && iso.as_polytropic().is_none());
        let baro = Eos::barotropic(ScalarFn::PowerSum { terms: vec![[3.0, 2.0], [0.5, 0.0]] });
        let form = baro.as_polytropic().unwrap();
        assert_eq!((form.gamma, form.sigma0, form.sigma.value(0.0)), (2.0, 0.5, 3.0));
        assert!(baro.is_special_polytropic(2));
        let gen = &catalogue()[6];
        assert!(!gen.is_barotropic() && !gen.is_isobaric() && gen.as_polytropic().is_none());
        let single = Eos::general(vec![(2.0, 2.0, ScalarFn::exp(1.0, 1.0, 0.0))]);
        let f = single.as_polytropic().unwrap();
        assert!((f.sigma.value(0.5) - 2.0 * 0.5f64.exp()).abs() < 1e-15);
        assert!(!Eos::barotropic(ScalarFn::exp(1.0, 1.0, 0.0)).is_special_polytropic(2));
    }

    #[test]
    fn validation_rejects_bad_laws() {
        assert!(Eos::isobaric(ScalarFn::constant(2.0)).validate("eos").is_err());
        assert!(Eos::barotropic(ScalarFn::constant(2.0)).validate("eos").is_err());
        let neg = Eos::Polytropic { sigma: ScalarFn::identity(), gamma: 2.0, sigma0: 0.0 };
        assert!(neg.validate("eos").is_err());
        for e in catalogue() {
            e.validate("eos").unwrap();
        }
    }

    #[test]
    fn config_round_trip() {
        let text = r#"
variant = "general"
[[terms]]
coef = 1.0
power = 1.4
entropy = { kind = "poly", coeffs = [1.0, 0.3] }
[[terms]]
coef = 0.2
power = 2.0
entropy = { kind = "exp", rate = 0.5 }
"#;
        let cfg: EosConfig = toml::from_str(text).unwrap();
        assert_eq!(cfg.build(2).unwrap(), catalogue()[6]);
        let bad = "variant = \"polytropic\"\nsigma = { kind = \"const\", value = 1.0 }\ngama = 2.0\n";
        assert!(toml::from_str::<EosConfig>(bad).is_err());
    }

    proptest! {
        #[test]
        fn special_polytropic_energy_relation(rho in 0.5f64..2.0, sigma in 0.1f64..3.0, n in 2usize..4) {
            let g = special_gamma(n);
            let eos = Eos::polytropic(sigma, g);
            let (p, _, _) = eos.pressure(rho, 0.0).unwrap();
            let e = eos.internal_energy(rho, 0.0).unwrap();
            // ρ e = n P / 2 for γ = 1 + 2/n
            prop_assert!((rho * e - 0.5 * n as f64 * p).abs() < 1e-12 * p.max(1.0));
        }
    }
}
