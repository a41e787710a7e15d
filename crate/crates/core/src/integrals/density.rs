use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::expr::{re, Scalar, ScalarFn};
use crate::fluid::{special_gamma, Eos};
use crate::manifold::{
    curl_free_residual, homothety_residual, killing_residual, ChartMetric, Connection, FieldJet, PotentialJet,
    VectorFieldSpec,
};

/// Residual bound for the Killing/homothety/curl-free requirements.
pub const TOL_GEOM: f64 = 1e-6;

/// The nine classified kinematic densities with their geometric data.
#[derive(Clone, Debug)]
pub enum DensityVariant {
    Mass,
    VolumetricEntropy { f: ScalarFn },
    Energy,
    Momentum { zeta: VectorFieldSpec },
    /// `psi` carries the potential ψ; its value is ∇ψ.
    GalileanMomentum { psi: VectorFieldSpec },
    SimilarityEnergy { xi: VectorFieldSpec, lambda: f64 },
    /// `theta` carries the potential θ; its value is ∇θ.
    GalileanEnergy { theta: VectorFieldSpec, lambda: f64 },
    NonIsentropicMomentum { zeta: VectorFieldSpec, f: ScalarFn },
    NonIsentropicEnergy { f: ScalarFn },
}

/// A density plus optional perturbation knobs used by falsification probes.
#[derive(Clone, Debug)]
pub struct DensitySpec {
    pub variant: DensityVariant,
    /// multiplies e inside the energy density
    pub energy_scale: f64,
    /// multiplies the whole moving flux
    pub flux_scale: f64,
}

/// Field data of a spec at one point.
#[derive(Clone, Debug, Default)]
pub struct PointFields {
    pub field: Option<FieldJet>,
    pub potential: Option<PotentialJet>,
}

/// T and every partial the determining equations use. Covectors carry lower indices.
#[derive(Clone, Debug)]
pub struct DensityPartials {
    pub value: f64,
    pub t_t: f64,
    pub t_r: f64,
    pub t_s: f64,
    pub t_tr: f64,
    pub t_ts: f64,
    pub t_rr: f64,
    pub t_rs: f64,
    pub t_ss: f64,
    pub t_u: Vec<f64>,
    pub t_tu: Vec<f64>,
    pub t_ur: Vec<f64>,
    pub t_us: Vec<f64>,
    pub t_uu: DMatrix<f64>,
    /// ∇_k T through explicit x only
    pub ex: Vec<f64>,
    pub ex_r: Vec<f64>,
    pub ex_s: Vec<f64>,
    /// (k, i) = explicit ∇_k T_{u^i}
    pub ex_u: DMatrix<f64>,
}

impl DensityPartials {
    fn zero(n: usize) -> Self {
        DensityPartials {
            value: 0.0,
            t_t: 0.0,
            t_r: 0.0,
            t_s: 0.0,
            t_tr: 0.0,
            t_ts: 0.0,
            t_rr: 0.0,
            t_rs: 0.0,
            t_ss: 0.0,
            t_u: vec![0.0; n],
            t_tu: vec![0.0; n],
            t_ur: vec![0.0; n],
            t_us: vec![0.0; n],
            t_uu: DMatrix::zeros(n, n),
            ex: vec![0.0; n],
            ex_r: vec![0.0; n],
            ex_s: vec![0.0; n],
            ex_u: DMatrix::zeros(n, n),
        }
    }
}

/// Φ = a(t,ρ,S)·V(x) + b(t,ρ,S)·u. `a` and `b` hold (value, ∂_ρ, ∂_S).
#[derive(Clone, Debug)]
pub struct FluxForm {
    pub a: [f64; 3],
    pub v: Vec<f64>,
    pub div_v: f64,
    pub b: [f64; 3],
}

impl FluxForm {
    fn zero(n: usize) -> Self {
        FluxForm { a: [0.0; 3], v: vec![0.0; n], div_v: 0.0, b: [0.0; 3] }
    }

    /// Φ^i.
    pub fn vector(&self, u: &[f64]) -> Vec<f64> {
        self.v.iter().zip(u).map(|(v, u)| self.a[0] * v + self.b[0] * u).collect()
    }

    /// ∇_iΦ^i given ∇ρ, ∇S and div u.
    pub fn divergence(&self, u: &[f64], grad_rho: &[f64], grad_s: &[f64], div_u: f64) -> f64 {
        let mut out = self.a[0] * self.div_v + self.b[0] * div_u;
        for i in 0..u.len() {
            out += self.v[i] * (self.a[1] * grad_rho[i] + self.a[2] * grad_s[i]);
            out += u[i] * (self.b[1] * grad_rho[i] + self.b[2] * grad_s[i]);
        }
        out
    }

    fn scaled(mut self, c: f64) -> Self {
        for k in 0..3 {
            self.a[k] *= c;
            self.b[k] *= c;
        }
        self
    }
}

/// h(S) = ∫₀^S f(s) P_S(ρ₀, s) ds with its first three derivatives.
pub fn entropy_flux_potential(f: &ScalarFn, eos: &Eos, s: f64) -> Result<[f64; 4]> {
    let ps = |s: f64, k: usize| eos.pressure_deriv(1.0, s, 0, k + 1);
    let integrand = |x: f64| f.value(x) * ps(x, 0);
    let h0 = if s == 0.0 {
        0.0
    } else {
        let out = quadrature::integrate(integrand, 0.0, s, 1e-13);
        if !out.integral.is_finite() || out.error_estimate > 1e-9 * out.integral.abs().max(1.0) {
            return Err(Error::Numeric(format!("h(S) quadrature did not converge at S={s}")));
        }
        out.integral
    };
    let [f0, f1, f2, _] = f.derivs3(s);
    let (p1, p2, p3) = (ps(s, 0), ps(s, 1), ps(s, 2));
    Ok([h0, f0 * p1, f1 * p1 + f0 * p2, f2 * p1 + 2.0 * f1 * p2 + f0 * p3])
}

/// Third-order Taylor lift of h around re(s); exact on nests of up to three dual layers.
fn lift<D: Scalar>(h: [f64; 4], s: D) -> D {
    let d = s - re(s);
    d * (d * (d * (h[3] / 6.0) + h[2] / 2.0) + h[1]) + h[0]
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl DensitySpec {
    pub fn new(variant: DensityVariant) -> Self {
        DensitySpec { variant, energy_scale: 1.0, flux_scale: 1.0 }
    }

    pub fn mass() -> Self {
        Self::new(DensityVariant::Mass)
    }

    pub fn energy() -> Self {
        Self::new(DensityVariant::Energy)
    }

    pub fn volumetric_entropy(f: ScalarFn) -> Self {
        Self::new(DensityVariant::VolumetricEntropy { f })
    }

    pub fn momentum(zeta: VectorFieldSpec) -> Self {
        Self::new(DensityVariant::Momentum { zeta })
    }

    pub fn name(&self) -> &'static str {
        match &self.variant {
            DensityVariant::Mass => "mass",
            DensityVariant::VolumetricEntropy { .. } => "volumetric_entropy",
            DensityVariant::Energy => "energy",
            DensityVariant::Momentum { .. } => "momentum",
            DensityVariant::GalileanMomentum { .. } => "galilean_momentum",
            DensityVariant::SimilarityEnergy { .. } => "similarity_energy",
            DensityVariant::GalileanEnergy { .. } => "galilean_energy",
            DensityVariant::NonIsentropicMomentum { .. } => "non_isentropic_momentum",
            DensityVariant::NonIsentropicEnergy { .. } => "non_isentropic_energy",
        }
    }

    /// Vector field attached to the spec, if any.
    pub fn field(&self) -> Option<&VectorFieldSpec> {
        match &self.variant {
            DensityVariant::Momentum { zeta } | DensityVariant::NonIsentropicMomentum { zeta, .. } => Some(zeta),
            DensityVariant::GalileanMomentum { psi } => Some(psi),
            DensityVariant::SimilarityEnergy { xi, .. } => Some(xi),
            DensityVariant::GalileanEnergy { theta, .. } => Some(theta),
            _ => None,
        }
    }

    fn uses_potential(&self) -> bool {
        matches!(self.variant, DensityVariant::GalileanMomentum { .. } | DensityVariant::GalileanEnergy { .. })
    }

    /// Zero flux in every state (Mass and VolumetricEntropy).
    pub fn has_zero_flux(&self) -> bool {
        matches!(self.variant, DensityVariant::Mass | DensityVariant::VolumetricEntropy { .. })
    }

    pub fn point_fields(&self, chart: &ChartMetric, conn: &Connection) -> Result<PointFields> {
        let Some(field) = self.field() else { return Ok(PointFields::default()) };
        if self.uses_potential() {
            let pot = field.potential_jet(chart, conn).ok_or_else(|| {
                Error::Classification(format!("{} requires a field given by a scalar potential", self.name()))
            })?;
            Ok(PointFields { field: Some(field.jet(chart, conn)), potential: Some(pot) })
        } else {
            Ok(PointFields { field: Some(field.jet(chart, conn)), potential: None })
        }
    }

    /// Pairing checks for the chart and pressure law.
    pub fn check_compatibility(&self, eos: &Eos, chart: &ChartMetric, probes: &[Vec<f64>]) -> Result<()> {
        let n = chart.dim;
        let worst = |f: &dyn Fn(&[f64]) -> Result<DMatrix<f64>>| -> Result<f64> {
            let mut w: f64 = 0.0;
            for x in probes {
                w = w.max(f(x)?.abs().max());
            }
            Ok(w)
        };
        let need_killing = |z: &VectorFieldSpec, what: &str| -> Result<()> {
            let r = worst(&|x| killing_residual(chart, z, x))?;
            if r > TOL_GEOM {
                return Err(Error::Classification(format!(
                    "{what} requires a Killing vector (L_zeta g = 0); field `{}` has residual {r:e} on chart {}",
                    z.label, chart.name
                )));
            }
            Ok(())
        };
        let need_homothety = |z: &VectorFieldSpec, lambda: f64, what: &str| -> Result<()> {
            let r = worst(&|x| homothety_residual(chart, z, lambda, x))?;
            if r > TOL_GEOM {
                return Err(Error::Classification(format!(
                    "{what} requires L_xi g = lambda g with constant lambda = {lambda}; field `{}` has residual {r:e}",
                    z.label
                )));
            }
            Ok(())
        };
        let need_special = |what: &str| -> Result<()> {
            if !eos.is_special_polytropic(n) {
                let found = eos.as_polytropic().map_or("not polytropic".to_string(), |f| format!("gamma = {}", f.gamma));
                return Err(Error::Classification(format!(
                    "{what} requires a polytropic pressure P = sigma(S) rho^gamma with gamma = 1 + 2/n = {} ({found})",
                    special_gamma(n)
                )));
            }
            Ok(())
        };
        let need_isobaric = |what: &str| -> Result<()> {
            if !eos.is_isobaric() {
                return Err(Error::Classification(format!(
                    "{what} requires an isobaric-entropy pressure P = kappa(S) with P_rho = 0 (found {})",
                    eos.variant_name()
                )));
            }
            Ok(())
        };
        let need_gradient = |z: &VectorFieldSpec, what: &str| -> Result<()> {
            if z.potential().is_none() {
                return Err(Error::Classification(format!("{what} requires a field given by a scalar potential")));
            }
            let r = worst(&|x| curl_free_residual(chart, z, x))?;
            if r > TOL_GEOM {
                return Err(Error::Classification(format!("{what} requires a curl-free field; residual {r:e}")));
            }
            Ok(())
        };
        match &self.variant {
            DensityVariant::Mass | DensityVariant::Energy => Ok(()),
            DensityVariant::VolumetricEntropy { f } => {
                if f.is_constant() {
                    return Err(Error::Classification("volumetric entropy requires a non-constant f(S)".into()));
                }
                Ok(())
            }
            DensityVariant::Momentum { zeta } => need_killing(zeta, "momentum"),
            DensityVariant::GalileanMomentum { psi } => {
                need_gradient(psi, "Galilean momentum")?;
                need_killing(psi, "Galilean momentum")
            }
            DensityVariant::SimilarityEnergy { xi, lambda } => {
                need_homothety(xi, *lambda, "similarity energy")?;
                if *lambda != 0.0 {
                    need_special("similarity energy")?;
                }
                Ok(())
            }
            DensityVariant::GalileanEnergy { theta, lambda } => {
                need_gradient(theta, "Galilean energy")?;
                need_homothety(theta, *lambda, "Galilean energy")?;
                if *lambda != 0.0 {
                    need_special("Galilean energy")?;
                }
                Ok(())
            }
            DensityVariant::NonIsentropicMomentum { zeta, f } => {
                if f.is_constant() {
                    return Err(Error::Classification("non-isentropic momentum requires a non-constant f(S)".into()));
                }
                need_isobaric("non-isentropic momentum")?;
                need_killing(zeta, "non-isentropic momentum")
            }
            DensityVariant::NonIsentropicEnergy { f } => {
                if f.is_constant() {
                    return Err(Error::Classification("non-isentropic energy requires a non-constant f(S)".into()));
                }
                need_isobaric("non-isentropic energy")
            }
        }
    }

    /// All partials at one state.
    #[allow(clippy::too_many_arguments)]
    pub fn partials(
        &self,
        eos: &Eos,
        t: f64,
        conn: &Connection,
        pf: &PointFields,
        u: &[f64],
        rho: f64,
        s: f64,
    ) -> Result<DensityPartials> {
        let n = conn.dim();
        let nf = n as f64;
        let mut d = DensityPartials::zero(n);
        let ud = conn.lower(u);
        let uu = dot(u, &ud);
        let jet = || pf.field.as_ref().expect("point fields computed for this spec");
        let pot = || pf.potential.as_ref().expect("potential computed for this spec");
        match &self.variant {
            DensityVariant::Mass => {
                d.value = rho;
                d.t_r = 1.0;
            }
            DensityVariant::VolumetricEntropy { f } => {
                let [f0, f1, f2, _] = f.derivs3(s);
                d.value = rho * f0;
                d.t_r = f0;
                d.t_s = rho * f1;
                d.t_rs = f1;
                d.t_ss = rho * f2;
            }
            DensityVariant::Energy => {
                let c = self.energy_scale;
                let (e, es, ess) = eos.energy_s_partials(rho, s)?;
                let pj = eos.jet(rho, s);
                d.value = rho * (0.5 * uu + c * e);
                d.t_r = 0.5 * uu + c * (e + pj.p / rho);
                d.t_rr = c * pj.p_r / rho;
                d.t_s = c * rho * es;
                d.t_rs = c * (es + pj.p_s / rho);
                d.t_ss = c * rho * ess;
                d.t_u = ud.iter().map(|v| rho * v).collect();
                d.t_ur = ud.clone();
                d.t_uu = &conn.g * rho;
            }
            DensityVariant::Momentum { .. } => momentum_like(&mut d, jet(), u, rho, [1.0, 0.0, 0.0]),
            DensityVariant::NonIsentropicMomentum { f, .. } => {
                momentum_like(&mut d, jet(), u, rho, [f.value(s), f.deriv(s, 1), f.deriv(s, 2)])
            }
            DensityVariant::GalileanMomentum { .. } => {
                galilean_like(&mut d, pot(), u, rho, t, n);
            }
            DensityVariant::SimilarityEnergy { lambda, .. } => {
                let lam = *lambda;
                momentum_like(&mut d, jet(), u, rho, [1.0, 0.0, 0.0]);
                let pj = eos.jet(rho, s);
                let pbar = pj.p - eos.sigma0();
                let k = 0.5 * lam;
                d.value -= k * t * (rho * uu + nf * pbar);
                d.t_t = -k * (rho * uu + nf * pbar);
                d.t_r -= k * t * (uu + nf * pj.p_r);
                d.t_tr = -k * (uu + nf * pj.p_r);
                d.t_rr = -k * t * nf * pj.p_rr;
                d.t_s = -k * t * nf * pj.p_s;
                d.t_ts = -k * nf * pj.p_s;
                d.t_rs = -k * t * nf * pj.p_rs;
                d.t_ss = -k * t * nf * pj.p_ss;
                for i in 0..n {
                    d.t_u[i] -= lam * t * rho * ud[i];
                    d.t_tu[i] = -lam * rho * ud[i];
                    d.t_ur[i] -= lam * t * ud[i];
                }
                d.t_uu = &conn.g * (-lam * t * rho);
            }
            DensityVariant::GalileanEnergy { lambda, .. } => {
                let lam = *lambda;
                galilean_like(&mut d, pot(), u, rho, t, n);
                let pj = eos.jet(rho, s);
                let pbar = pj.p - eos.sigma0();
                let q = 0.25 * lam;
                d.value += q * t * t * (rho * uu + nf * pbar);
                d.t_t += 2.0 * q * t * (rho * uu + nf * pbar);
                d.t_r += q * t * t * (uu + nf * pj.p_r);
                d.t_tr += 2.0 * q * t * (uu + nf * pj.p_r);
                d.t_rr = q * t * t * nf * pj.p_rr;
                d.t_s = q * t * t * nf * pj.p_s;
                d.t_ts = 2.0 * q * t * nf * pj.p_s;
                d.t_rs = q * t * t * nf * pj.p_rs;
                d.t_ss = q * t * t * nf * pj.p_ss;
                for i in 0..n {
                    d.t_u[i] += 2.0 * q * t * t * rho * ud[i];
                    d.t_tu[i] += 4.0 * q * t * rho * ud[i];
                    d.t_ur[i] += 2.0 * q * t * t * ud[i];
                }
                d.t_uu = &conn.g * (2.0 * q * t * t * rho);
            }
            DensityVariant::NonIsentropicEnergy { f } => {
                let [f0, f1, f2, _] = f.derivs3(s);
                let h = entropy_flux_potential(f, eos, s)?;
                d.value = 0.5 * rho * uu * f0 - h[0];
                d.t_r = 0.5 * uu * f0;
                d.t_s = 0.5 * rho * uu * f1 - h[1];
                d.t_rs = 0.5 * uu * f1;
                d.t_ss = 0.5 * rho * uu * f2 - h[2];
                for i in 0..n {
                    d.t_u[i] = rho * f0 * ud[i];
                    d.t_ur[i] = f0 * ud[i];
                    d.t_us[i] = rho * f1 * ud[i];
                }
                d.t_uu = &conn.g * (rho * f0);
            }
        }
        Ok(d)
    }

    /// Pointwise density value.
    #[allow(clippy::too_many_arguments)]
    pub fn value(&self, eos: &Eos, t: f64, conn: &Connection, pf: &PointFields, u: &[f64], rho: f64, s: f64) -> Result<f64> {
        Ok(self.partials(eos, t, conn, pf, u, rho, s)?.value)
    }

    /// Moving flux in a·V + b·u form.
    #[allow(clippy::too_many_arguments)]
    pub fn flux(&self, eos: &Eos, t: f64, conn: &Connection, pf: &PointFields, rho: f64, s: f64) -> Result<FluxForm> {
        let n = conn.dim();
        let mut fl = FluxForm::zero(n);
        let pressure = |shift: f64| {
            let pj = eos.jet(rho, s);
            [pj.p - shift, pj.p_r, pj.p_s]
        };
        let set_field = |fl: &mut FluxForm| {
            let j = pf.field.as_ref().expect("point fields computed for this spec");
            fl.v = j.up.clone();
            fl.div_v = j.div;
        };
        let set_gradient = |fl: &mut FluxForm| {
            let p = pf.potential.as_ref().expect("potential computed for this spec");
            fl.v = conn.raise(&p.grad);
            fl.div_v = (0..n).flat_map(|k| (0..n).map(move |i| (k, i))).map(|(k, i)| conn.g_inv[(k, i)] * p.hess[(k, i)]).sum();
        };
        match &self.variant {
            DensityVariant::Mass | DensityVariant::VolumetricEntropy { .. } => {}
            DensityVariant::Energy => fl.b = pressure(0.0),
            DensityVariant::Momentum { .. } => {
                fl.a = pressure(0.0);
                set_field(&mut fl);
            }
            DensityVariant::GalileanMomentum { .. } => {
                fl.a = pressure(0.0).map(|v| -t * v);
                set_gradient(&mut fl);
            }
            DensityVariant::SimilarityEnergy { lambda, .. } => {
                let p = pressure(eos.sigma0());
                fl.a = p;
                fl.b = p.map(|v| -t * lambda * v);
                set_field(&mut fl);
            }
            DensityVariant::GalileanEnergy { lambda, .. } => {
                let p = pressure(eos.sigma0());
                fl.a = p.map(|v| -t * v);
                fl.b = p.map(|v| 0.5 * lambda * t * t * v);
                set_gradient(&mut fl);
            }
            DensityVariant::NonIsentropicMomentum { f, .. } => {
                let h = entropy_flux_potential(f, eos, s)?;
                fl.a = [h[0], 0.0, h[1]];
                set_field(&mut fl);
            }
            DensityVariant::NonIsentropicEnergy { f } => {
                let h = entropy_flux_potential(f, eos, s)?;
                fl.b = [h[0], 0.0, h[1]];
            }
        }
        Ok(fl.scaled(self.flux_scale))
    }

    /// Density evaluated on generic scalars (automatic-differentiation oracle). Field data are
    /// taken at the connection's point.
    #[allow(clippy::too_many_arguments)]
    pub fn value_generic<D: Scalar>(
        &self,
        eos: &Eos,
        t: D,
        conn: &Connection,
        pf: &PointFields,
        u: &[D],
        rho: D,
        s: D,
    ) -> Result<D> {
        let n = conn.dim();
        let nf = n as f64;
        let g = &conn.g;
        let mut uu = D::from(0.0);
        for i in 0..n {
            for j in 0..n {
                uu += u[i] * u[j] * g[(i, j)];
            }
        }
        let contract = |w: &[f64]| -> D {
            let mut acc = D::from(0.0);
            for i in 0..n {
                acc += u[i] * w[i];
            }
            acc
        };
        let pbar = |eos: &Eos| eos.pressure_generic(rho, s) - eos.sigma0();
        let jet = || pf.field.as_ref().expect("point fields computed for this spec");
        let pot = || pf.potential.as_ref().expect("potential computed for this spec");
        let energy = || {
            eos.energy_generic(rho, s)
                .ok_or_else(|| Error::Numeric("no closed-form internal energy for generic evaluation".into()))
        };
        Ok(match &self.variant {
            DensityVariant::Mass => rho,
            DensityVariant::VolumetricEntropy { f } => rho * f.eval_generic(s),
            DensityVariant::Energy => rho * (uu * 0.5 + energy()? * self.energy_scale),
            DensityVariant::Momentum { .. } => rho * contract(&jet().down),
            DensityVariant::GalileanMomentum { .. } => {
                let p = pot();
                rho * (t * (-contract(&p.grad)) + p.value)
            }
            DensityVariant::SimilarityEnergy { lambda, .. } => {
                rho * contract(&jet().down) - t * (rho * uu + pbar(eos) * nf) * (0.5 * lambda)
            }
            DensityVariant::GalileanEnergy { lambda, .. } => {
                let p = pot();
                rho * (t * (-contract(&p.grad)) + p.value) + t * t * (rho * uu + pbar(eos) * nf) * (0.25 * lambda)
            }
            DensityVariant::NonIsentropicMomentum { f, .. } => rho * contract(&jet().down) * f.eval_generic(s),
            DensityVariant::NonIsentropicEnergy { f } => {
                let h = entropy_flux_potential(f, eos, re(s))?;
                rho * uu * f.eval_generic(s) * 0.5 - lift(h, s)
            }
        })
    }
}

/// ρ g(u, ζ) F(S) with F given as (F, F', F'').
fn momentum_like(d: &mut DensityPartials, jet: &FieldJet, u: &[f64], rho: f64, ff: [f64; 3]) {
    let n = u.len();
    let uz = dot(u, &jet.down);
    d.value = rho * uz * ff[0];
    d.t_r = uz * ff[0];
    d.t_s = rho * uz * ff[1];
    d.t_rs = uz * ff[1];
    d.t_ss = rho * uz * ff[2];
    for i in 0..n {
        d.t_u[i] = rho * jet.down[i] * ff[0];
        d.t_ur[i] = jet.down[i] * ff[0];
        d.t_us[i] = rho * jet.down[i] * ff[1];
    }
    for k in 0..n {
        let udz: f64 = (0..n).map(|i| u[i] * jet.cov_down[(k, i)]).sum();
        d.ex[k] = rho * udz * ff[0];
        d.ex_r[k] = udz * ff[0];
        d.ex_s[k] = rho * udz * ff[1];
        for i in 0..n {
            d.ex_u[(k, i)] = rho * jet.cov_down[(k, i)] * ff[0];
        }
    }
}

/// ρ(ψ − t u⌟∇ψ).
fn galilean_like(d: &mut DensityPartials, p: &PotentialJet, u: &[f64], rho: f64, t: f64, n: usize) {
    let up = dot(u, &p.grad);
    d.value = rho * (p.value - t * up);
    d.t_t = -rho * up;
    d.t_r = p.value - t * up;
    d.t_tr = -up;
    for i in 0..n {
        d.t_u[i] = -t * rho * p.grad[i];
        d.t_tu[i] = -rho * p.grad[i];
        d.t_ur[i] = -t * p.grad[i];
    }
    for k in 0..n {
        let uh: f64 = (0..n).map(|i| u[i] * p.hess[(k, i)]).sum();
        d.ex[k] = rho * (p.grad[k] - t * uh);
        d.ex_r[k] = p.grad[k] - t * uh;
        for i in 0..n {
            d.ex_u[(k, i)] = -t * rho * p.hess[(k, i)];
        }
    }
}
