//! The certification catalogue: compatible and forbidden (density, pressure law, chart) pairings.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::expr::ScalarFn;
use crate::fluid::{special_gamma, Eos};
use crate::integrals::{DensitySpec, DensityVariant};
use crate::manifold::{builtin_field, ChartMetric};

use super::{determining_system_residuals, euler_residuals, flux_consistency, sample_jet, FAIL_TOL, PASS_TOL};

/// One pairing of the catalogue.
#[derive(Clone, Debug)]
pub struct Case {
    pub label: String,
    pub spec: DensitySpec,
    pub eos_label: String,
    pub eos: Eos,
    pub chart: ChartMetric,
    /// true when the pairing is allowed and residuals must vanish
    pub compatible: bool,
}

/// Maxima over a jet batch.
#[derive(Clone, Debug, Serialize)]
pub struct CaseReport {
    pub label: String,
    pub variant: String,
    pub eos: String,
    pub chart: String,
    pub n: usize,
    pub jets: usize,
    pub max_euler: f64,
    pub max_split: f64,
    pub max_flux: f64,
    /// jets whose largest Euler residual exceeds the falsification threshold
    pub above_fail: usize,
    /// jets landing strictly between the two thresholds
    pub in_gap: usize,
    pub compatible: bool,
    pub compatibility: std::result::Result<(), String>,
}

impl CaseReport {
    pub fn passed(&self) -> bool {
        if self.compatible {
            self.max_euler <= PASS_TOL && self.max_flux <= PASS_TOL
        } else {
            self.max_euler >= FAIL_TOL
        }
    }
}

/// The four test charts of dimension n.
pub fn chart(name: &str, n: usize) -> Result<ChartMetric> {
    ChartMetric::builtin(name, n, &Default::default())
}

/// Pressure laws of every class used by the catalogue.
pub fn eos_catalogue(n: usize) -> Vec<(&'static str, Eos)> {
    vec![
        ("polytropic_1.4", Eos::Polytropic { sigma: ScalarFn::exp(1.0, 0.4, 0.0), gamma: 1.4, sigma0: 0.0 }),
        ("polytropic_special", Eos::Polytropic { sigma: ScalarFn::exp(1.0, 0.4, 0.0), gamma: special_gamma(n), sigma0: 0.0 }),
        ("general", general_eos()),
        ("barotropic", Eos::barotropic(ScalarFn::PowerSum { terms: vec![[1.0, 1.4], [0.5, 2.0]] })),
        ("isobaric", Eos::isobaric(ScalarFn::sin(0.5, 1.0, 0.0, 1.0))),
    ]
}

/// P = ρ^1.4 (1 + 0.3S) + 0.2 ρ² e^{0.5S}
pub fn general_eos() -> Eos {
    Eos::general(vec![(1.0, 1.4, ScalarFn::poly(&[1.0, 0.3])), (0.2, 2.0, ScalarFn::exp(1.0, 0.5, 0.0))])
}

fn entropy_weight() -> ScalarFn {
    ScalarFn::poly(&[0.5, 1.0, 0.25])
}

fn push(out: &mut Vec<Case>, spec: DensitySpec, eos: (&str, Eos), chart: &ChartMetric, compatible: bool) {
    let name = if spec.energy_scale == 1.0 { spec.name().to_string() } else { format!("{}_scaled_{}", spec.name(), spec.energy_scale) };
    let label = format!("{name}/{}/{}/n{}", eos.0, chart.name, chart.dim);
    out.push(Case { label, spec, eos_label: eos.0.to_string(), eos: eos.1, chart: chart.clone(), compatible });
}

/// Every variant with every allowed pressure-law class, on M1 and M2 (plus M4 for the
/// potential and homothety variants).
pub fn positive_cases(n: usize) -> Result<Vec<Case>> {
    let m1 = chart("M1", n)?;
    let m2 = chart("M2", n)?;
    let m4 = chart("M4", n)?;
    let all = eos_catalogue(n);
    let special = all[1].clone();
    let isobaric = all[4].clone();
    let f = entropy_weight();
    let mut out = Vec::new();
    for c in [&m1, &m2] {
        let killing = builtin_field(c, if c.flat { "rotation_01" } else { "azimuthal" })?;
        let translation = builtin_field(c, if c.flat { "translation_0" } else { "azimuthal" })?;
        for e in &all {
            push(&mut out, DensitySpec::mass(), e.clone(), c, true);
            push(&mut out, DensitySpec::volumetric_entropy(f.clone()), e.clone(), c, true);
            push(&mut out, DensitySpec::energy(), e.clone(), c, true);
            push(&mut out, DensitySpec::momentum(killing.clone()), e.clone(), c, true);
            let sim0 = DensityVariant::SimilarityEnergy { xi: translation.clone(), lambda: 0.0 };
            push(&mut out, DensitySpec::new(sim0), e.clone(), c, true);
        }
        for z in [&killing, &translation] {
            let v = DensityVariant::NonIsentropicMomentum { zeta: z.clone(), f: f.clone() };
            push(&mut out, DensitySpec::new(v), isobaric.clone(), c, true);
        }
        push(&mut out, DensitySpec::new(DensityVariant::NonIsentropicEnergy { f: f.clone() }), isobaric.clone(), c, true);
    }
    for c in [&m1, &m4] {
        let translation = builtin_field(c, "translation_1")?;
        let dilation = builtin_field(c, "dilation")?;
        for e in &all {
            push(&mut out, DensitySpec::new(DensityVariant::GalileanMomentum { psi: translation.clone() }), e.clone(), c, true);
            let g0 = DensityVariant::GalileanEnergy { theta: translation.clone(), lambda: 0.0 };
            push(&mut out, DensitySpec::new(g0), e.clone(), c, true);
        }
        let sim = DensityVariant::SimilarityEnergy { xi: dilation.clone(), lambda: 2.0 };
        push(&mut out, DensitySpec::new(sim), special.clone(), c, true);
        let gal = DensityVariant::GalileanEnergy { theta: dilation.clone(), lambda: 2.0 };
        push(&mut out, DensitySpec::new(gal), special.clone(), c, true);
    }
    Ok(out)
}

/// Pairings the classification forbids.
pub fn negative_cases(n: usize) -> Result<Vec<Case>> {
    let m1 = chart("M1", n)?;
    let m2 = chart("M2", n)?;
    let all = eos_catalogue(n);
    let poly = |g: f64| (if g < 2.0 { "polytropic_1.7" } else { "polytropic_2.3" }, Eos::polytropic(1.0, g));
    let special = all[1].clone();
    let general = all[2].clone();
    let barotropic = ("barotropic_exp", Eos::barotropic(ScalarFn::exp(1.0, 1.0, 0.0)));
    let isobaric = all[4].clone();
    let f = entropy_weight();
    let dilation = builtin_field(&m1, "dilation")?;
    let sim = |lambda: f64| DensitySpec::new(DensityVariant::SimilarityEnergy { xi: dilation.clone(), lambda });
    let gal = DensitySpec::new(DensityVariant::GalileanEnergy { theta: dilation.clone(), lambda: 2.0 });
    let nie = DensitySpec::new(DensityVariant::NonIsentropicEnergy { f: f.clone() });
    let nim = DensitySpec::new(DensityVariant::NonIsentropicMomentum { zeta: builtin_field(&m1, "translation_0")?, f });
    let mut perturbed = DensitySpec::energy();
    perturbed.energy_scale = 1.01;

    let mut out = Vec::new();
    push(&mut out, sim(2.0), poly(1.7), &m1, false);
    push(&mut out, sim(2.0), poly(2.3), &m1, false);
    push(&mut out, sim(2.0), general.clone(), &m1, false);
    push(&mut out, sim(2.0), isobaric, &m1, false);
    let mut wrong_lambda = special.clone();
    wrong_lambda.0 = "polytropic_special_lambda_1";
    push(&mut out, sim(1.0), wrong_lambda, &m1, false);
    push(&mut out, gal.clone(), poly(1.7), &m1, false);
    push(&mut out, gal, barotropic.clone(), &m1, false);
    push(&mut out, nie.clone(), special, &m1, false);
    push(&mut out, nie, general.clone(), &m1, false);
    push(&mut out, nim, barotropic, &m1, false);
    push(&mut out, DensitySpec::momentum(builtin_field(&m1, "quadratic_0")?), general.clone(), &m1, false);
    push(&mut out, DensitySpec::momentum(builtin_field(&m2, "radial")?), general.clone(), &m2, false);
    push(&mut out, DensitySpec::new(DensityVariant::GalileanMomentum { psi: dilation }), general.clone(), &m1, false);
    push(&mut out, perturbed.clone(), general.clone(), &m1, false);
    push(&mut out, perturbed, general, &m2, false);
    Ok(out)
}

/// Evaluate a case over `count` jets of the given seed.
pub fn run_case(case: &Case, count: usize, seed: u64) -> Result<CaseReport> {
    let per_jet = (0..count as u64)
        .into_par_iter()
        .map(|k| {
            let jet = sample_jet(&case.chart, seed, k, 1)?;
            let e = euler_residuals(&case.spec, &case.chart, &jet, &case.eos)?.max_abs();
            let s = determining_system_residuals(&case.spec, &case.chart, &jet, &case.eos)?.max_abs();
            let f = flux_consistency(&case.spec, &case.chart, &jet, &case.eos)?.abs();
            Ok((e, s, f))
        })
        .collect::<Result<Vec<_>>>()?;
    let fold = |k: usize| per_jet.iter().map(|r| [r.0, r.1, r.2][k]).fold(0.0, f64::max);
    let probes = case.chart.probe_points(4);
    let compatibility = case.spec.check_compatibility(&case.eos, &case.chart, &probes).map_err(|e| e.to_string());
    Ok(CaseReport {
        label: case.label.clone(),
        variant: case.spec.name().to_string(),
        eos: case.eos_label.clone(),
        chart: case.chart.name.clone(),
        n: case.chart.dim,
        jets: count,
        max_euler: fold(0),
        max_split: fold(1),
        max_flux: fold(2),
        above_fail: per_jet.iter().filter(|r| r.0 >= FAIL_TOL).count(),
        in_gap: per_jet.iter().filter(|r| r.0 > PASS_TOL && r.0 < FAIL_TOL).count(),
        compatible: case.compatible,
        compatibility,
    })
}
