//! The subcommands: each reads a built scenario, writes CSV series and a JSON summary.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::ScalarFn;
use crate::fluid::{snapshot, FluidState};
use crate::hamiltonian::{
    antisymmetry_defect, hamiltonian_flow_residual, symmetry_determining_residual, symmetry_from_density, VariationalTriple,
};
use crate::integrals::{is_trivial_density, DensitySpec, DensityVariant, IntegralSeries};
use crate::jetcheck::suite::{run_case, Case};
use crate::jetcheck::{
    determining_system_residuals, euler_residuals, flux_consistency, oneform_reduced, oneform_residual, sample_jet, sample_jets,
    PlainDensity,
};
use crate::manifold::{
    builtin_field, curl_free_residual, homothety_residual, killing_residual, metric_compatibility_residual, riemann,
    riemann_identity_residuals, BuiltinChart,
};
use crate::solver::{GridGeometry, SolverConfig};

use super::report::{Check, Report, RunOptions};
use super::run::{run_simulation, RunResult};
use super::Built;

/// The scenario subcommands.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Simulate,
    VerifyDensities,
    VerifyCirculation,
    VerifyDetermining,
    VerifyHamiltonian,
    GeometryReport,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::VerifyDensities => "verify-densities",
            Command::VerifyCirculation => "verify-circulation",
            Command::VerifyDetermining => "verify-determining",
            Command::VerifyHamiltonian => "verify-hamiltonian",
            Command::GeometryReport => "geometry-report",
        }
    }

    pub const ALL: [Command; 6] = [
        Command::Simulate,
        Command::VerifyDensities,
        Command::VerifyCirculation,
        Command::VerifyDetermining,
        Command::VerifyHamiltonian,
        Command::GeometryReport,
    ];

    pub fn from_name(name: &str) -> Option<Self> {
        Command::ALL.into_iter().find(|c| c.name() == name)
    }

    pub fn run(self, b: &Built, opts: &RunOptions) -> Result<Report> {
        match self {
            Command::Simulate => simulate(b, opts),
            Command::VerifyDensities => verify_densities(b, opts),
            Command::VerifyCirculation => verify_circulation(b, opts),
            Command::VerifyDetermining => verify_determining(b, opts),
            Command::VerifyHamiltonian => verify_hamiltonian(b, opts),
            Command::GeometryReport => geometry_report(b, opts),
        }
    }
}

fn new_report(b: &Built, cmd: Command, opts: &RunOptions) -> Result<Report> {
    let sc = &b.scenario;
    let dir = opts.out_dir.join(&sc.name).join(cmd.name());
    Report::new(&sc.name, cmd.name(), opts.seed.unwrap_or(sc.jets.seed), sc.expect, sc.tolerances.clone(), &dir)
}

fn gate(b: &Built, opts: &RunOptions) -> Result<()> {
    if opts.allow_incompatible {
        return Ok(());
    }
    b.check_compatibility()
}

fn series_csv(series: &IntegralSeries) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    series.write_csv(&mut buf)?;
    Ok(buf)
}

fn file_label(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '-' { c } else { '_' }).collect()
}

fn resolutions(b: &Built) -> Vec<usize> {
    let g = &b.scenario.grid;
    std::iter::once(g.n).chain(g.refine).collect()
}

fn write_run(report: &mut Report, run: &RunResult) -> Result<()> {
    for (label, s) in &run.balances {
        report.artifact(&format!("balance_{}_N{}.csv", file_label(label), run.n), &series_csv(s)?)?;
    }
    for (name, s, _) in &run.circulations {
        report.artifact(&format!("circulation_{}_N{}.csv", file_label(name), run.n), &series_csv(s)?)?;
    }
    let mut snap = Vec::new();
    snapshot::write_binary(&run.final_state, &mut snap)?;
    report.artifact(&format!("final_N{}.snap", run.n), &snap)?;
    Ok(())
}

#[derive(Serialize)]
struct SeriesSummary {
    label: String,
    n: usize,
    relative_drift: f64,
    relative_residual: f64,
    max_abs_integral: f64,
}

fn summarize(label: &str, n: usize, s: &IntegralSeries) -> SeriesSummary {
    SeriesSummary {
        label: label.to_string(),
        n,
        relative_drift: s.relative_drift(),
        relative_residual: s.relative_residual(),
        max_abs_integral: s.max_abs_integral(),
    }
}

fn balance_checks(report: &mut Report, b: &Built, runs: &[RunResult]) {
    let tol = b.scenario.tolerances.clone();
    let mut rows = Vec::new();
    for (label, spec) in &b.densities {
        for run in runs {
            let Some(s) = run.balance(label) else { continue };
            rows.push(summarize(label, run.n, s));
            if spec.has_zero_flux() {
                report.check(Check::at_most(format!("{label} drift N={}", run.n), s.relative_drift(), tol.integral_drift));
            } else {
                report.check(Check::at_most(format!("{label} balance N={}", run.n), s.relative_residual(), tol.balance));
            }
        }
        if let [coarse, fine] = runs {
            if let (Some(a), Some(c)) = (coarse.balance(label), fine.balance(label)) {
                if !spec.has_zero_flux() {
                    let ratio = a.max_abs_residual() / c.max_abs_residual();
                    report.check(Check::at_least(format!("{label} refinement ratio"), ratio, tol.refinement_ratio));
                }
            }
        }
    }
    report.detail("balances", rows);
}

fn circulation_checks(report: &mut Report, b: &Built, runs: &[RunResult]) {
    let tol = b.scenario.tolerances.clone();
    let mut rows = Vec::new();
    for curve in &b.scenario.curves {
        let name = curve.name();
        for run in runs {
            let Some((_, s, closed)) = run.circulations.iter().find(|(l, _, _)| l == name) else { continue };
            rows.push(summarize(name, run.n, s));
            if *closed {
                report.check(Check::at_most(format!("{name} circulation drift N={}", run.n), s.relative_drift(), tol.circulation_drift));
            } else {
                report.check(Check::at_most(format!("{name} circulation balance N={}", run.n), s.relative_residual(), tol.balance));
            }
        }
        if let [coarse, fine] = runs {
            if let (Some(a), Some(c)) = (coarse.circulation(name), fine.circulation(name)) {
                let open = coarse.circulations.iter().any(|(l, _, closed)| l == name && !closed);
                if open {
                    let order = (a.max_abs_residual() / c.max_abs_residual()).ln() / (fine.n as f64 / coarse.n as f64).ln();
                    report.check(Check::at_least(format!("{name} circulation balance order"), order, tol.min_order));
                }
            }
        }
    }
    report.detail("circulations", rows);
}

/// Run the solver with markers; check integral drift, flux balances and circulation.
pub fn simulate(b: &Built, opts: &RunOptions) -> Result<Report> {
    gate(b, opts)?;
    let mut report = new_report(b, Command::Simulate, opts)?;
    let runs = resolutions(b)
        .into_iter()
        .map(|n| run_simulation(b, n, b.scenario.solver.clone(), false))
        .collect::<Result<Vec<_>>>()?;
    for run in &runs {
        write_run(&mut report, run)?;
    }
    balance_checks(&mut report, b, &runs);
    circulation_checks(&mut report, b, &runs);
    report.finish()
}

fn case_for(b: &Built, label: &str, spec: &DensitySpec) -> Case {
    let probes = b.chart.probe_points(4);
    let compatible = spec.check_compatibility(&b.eos, &b.chart, &probes).is_ok();
    Case {
        label: label.to_string(),
        spec: spec.clone(),
        eos_label: b.eos.variant_name().to_string(),
        eos: b.eos.clone(),
        chart: b.chart.clone(),
        compatible,
    }
}

/// Euler residuals of each density over seeded jets, plus a triviality probe.
pub fn verify_densities(b: &Built, opts: &RunOptions) -> Result<Report> {
    gate(b, opts)?;
    let mut report = new_report(b, Command::VerifyDensities, opts)?;
    let tol = b.scenario.tolerances.clone();
    let seed = report.seed;
    let count = b.scenario.jets.count;
    let probe = sample_jets(&b.chart, count.min(50), seed ^ 0x5eed, 1)?;
    let mut csv = csv::Writer::from_writer(Vec::new());
    let cerr = |e: csv::Error| Error::Series(e.to_string());
    csv.write_record(["label", "variant", "eos", "chart", "jets", "max_euler", "max_split", "max_flux", "above_fail", "in_gap", "compatible", "trivial"])
        .map_err(cerr)?;
    let mut rows = Vec::new();
    for (label, spec) in &b.densities {
        let case = case_for(b, label, spec);
        let r = run_case(&case, count, seed)?;
        let trivial = is_trivial_density(&PlainDensity { spec, eos: &b.eos, chart: &b.chart }, &b.chart, &probe)?;
        report.check(Check::at_most(format!("{label} euler residual"), r.max_euler, tol.jet_pass));
        report.check(Check::at_most(format!("{label} trivial"), if trivial { 1.0 } else { 0.0 }, 0.0));
        csv.write_record([
            label.clone(),
            r.variant.clone(),
            r.eos.clone(),
            r.chart.clone(),
            r.jets.to_string(),
            format!("{:e}", r.max_euler),
            format!("{:e}", r.max_split),
            format!("{:e}", r.max_flux),
            r.above_fail.to_string(),
            r.in_gap.to_string(),
            r.compatible.to_string(),
            trivial.to_string(),
        ])
        .map_err(cerr)?;
        rows.push(r);
    }
    let bytes = csv.into_inner().map_err(|e| Error::Series(e.to_string()))?;
    report.artifact("densities.csv", &bytes)?;
    report.detail("cases", rows);
    report.finish()
}

#[derive(Serialize)]
struct DeterminingRow {
    label: String,
    equations: [f64; 7],
    recombination: f64,
    flux: f64,
}

/// The split determining system, its recombination into the Euler residuals and the
/// flux identity, over seeded jets.
pub fn verify_determining(b: &Built, opts: &RunOptions) -> Result<Report> {
    gate(b, opts)?;
    let mut report = new_report(b, Command::VerifyDetermining, opts)?;
    let tol = b.scenario.tolerances.clone();
    let seed = report.seed;
    let count = b.scenario.jets.count;
    let mut rows = Vec::new();
    for (label, spec) in &b.densities {
        let per_jet = (0..count as u64)
            .into_par_iter()
            .map(|k| {
                let jet = sample_jet(&b.chart, seed, k, 1)?;
                let det = determining_system_residuals(spec, &b.chart, &jet, &b.eos)?;
                let e = euler_residuals(spec, &b.chart, &jet, &b.eos)?;
                let re = det.recombine(&jet);
                let recomb = e.as_vec().iter().zip(re.as_vec()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
                let flux = flux_consistency(spec, &b.chart, &jet, &b.eos)?.abs();
                Ok((det.maxima(), recomb, flux))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut eq = [0.0f64; 7];
        let (mut recomb, mut flux) = (0.0f64, 0.0f64);
        for (m, r, f) in &per_jet {
            for k in 0..7 {
                eq[k] = eq[k].max(m[k]);
            }
            recomb = recomb.max(*r);
            flux = flux.max(*f);
        }
        for (k, v) in eq.iter().enumerate() {
            report.check(Check::at_most(format!("{label} determining eq {}", k + 1), *v, tol.jet_pass));
        }
        report.check(Check::at_most(format!("{label} recombination"), recomb, tol.jet_pass));
        report.check(Check::at_most(format!("{label} flux identity"), flux, tol.jet_pass));
        rows.push(DeterminingRow { label: label.clone(), equations: eq, recombination: recomb, flux });
    }
    let mut csv = csv::Writer::from_writer(Vec::new());
    let cerr = |e: csv::Error| Error::Series(e.to_string());
    csv.write_record(["label", "eq1", "eq2", "eq3", "eq4", "eq5", "eq6", "eq7", "recombination", "flux"]).map_err(cerr)?;
    for r in &rows {
        let mut rec = vec![r.label.clone()];
        rec.extend(r.equations.iter().map(|v| format!("{v:e}")));
        rec.push(format!("{:e}", r.recombination));
        rec.push(format!("{:e}", r.flux));
        csv.write_record(rec).map_err(cerr)?;
    }
    report.artifact("determining.csv", &csv.into_inner().map_err(|e| Error::Series(e.to_string()))?)?;
    report.detail("densities", rows);
    report.finish()
}

/// Circulation one-form residual over order-2 jets, then transported curves on the grid.
pub fn verify_circulation(b: &Built, opts: &RunOptions) -> Result<Report> {
    let mut report = new_report(b, Command::VerifyCirculation, opts)?;
    let tol = b.scenario.tolerances.clone();
    let seed = report.seed;
    let count = b.scenario.jets.count;
    let per_jet = (0..count as u64)
        .into_par_iter()
        .map(|k| {
            let jet = sample_jet(&b.chart, seed, k, 2)?;
            let r = oneform_residual(&jet, &b.eos)?;
            let red = oneform_reduced(&jet, &b.eos);
            Ok((r.abs().max(), (&r - &red).abs().max()))
        })
        .collect::<Result<Vec<_>>>()?;
    let max_res = per_jet.iter().map(|v| v.0).fold(0.0, f64::max);
    let max_red = per_jet.iter().map(|v| v.1).fold(0.0, f64::max);
    report.detail("oneform_max", max_res);
    report.detail("oneform_minus_baroclinic_max", max_red);
    if b.eos.is_barotropic() {
        report.check(Check::at_most("circulation one-form residual", max_res, tol.jet_pass));
    } else {
        // the residual must be exactly the baroclinic term
        report.check(Check::at_most("one-form residual minus baroclinic term", max_red, tol.jet_pass));
    }
    if !b.scenario.curves.is_empty() {
        let runs = resolutions(b)
            .into_iter()
            .map(|n| run_simulation(b, n, b.scenario.solver.clone(), false))
            .collect::<Result<Vec<_>>>()?;
        for run in &runs {
            for (name, s, _) in &run.circulations {
                report.artifact(&format!("circulation_{}_N{}.csv", file_label(name), run.n), &series_csv(s)?)?;
            }
        }
        circulation_checks(&mut report, b, &runs);
    }
    report.finish()
}

fn entropy_weight(b: &Built) -> ScalarFn {
    b.densities
        .iter()
        .find_map(|(_, s)| match &s.variant {
            DensityVariant::VolumetricEntropy { f } => Some(f.clone()),
            _ => None,
        })
        .unwrap_or_else(|| ScalarFn::poly(&[0.5, 1.0, 0.25]))
}

/// Seeded smooth perturbation of the initial state.
fn perturbed(state: &FluidState, seed: u64, k: u64) -> FluidState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k);
    let c: Vec<f64> = (0..6).map(|_| rng.random_range(-0.1..0.1)).collect();
    let mut s = state.clone();
    for p in 0..s.len() {
        let x = s.grid.point(p);
        let (a, b) = (x[0], x[1 % x.len()]);
        s.u[0][p] += c[0] * b.sin() + c[1];
        let last = s.u.len() - 1;
        s.u[last][p] += c[2] * a.cos();
        s.rho[p] *= 1.0 + c[3] * (a + b).cos();
        s.s[p] += c[4] * a.sin() * b.cos() + c[5];
    }
    s
}

#[derive(Serialize)]
struct FlowRow {
    n: usize,
    residual: f64,
}

/// Flow agreement with the solver, Casimir zeros and symmetry determining residuals.
pub fn verify_hamiltonian(b: &Built, opts: &RunOptions) -> Result<Report> {
    let mut report = new_report(b, Command::VerifyHamiltonian, opts)?;
    let sc = &b.scenario;
    let tol = sc.tolerances.clone();
    let order = sc.solver.order;
    let n0 = sc.grid.n;
    let n1 = sc.grid.refine.unwrap_or(2 * n0);

    let mut flow = Vec::new();
    for n in [n0, n1] {
        let geom = GridGeometry::new(&b.chart, &b.grid(n)?)?;
        flow.push(FlowRow { n, residual: hamiltonian_flow_residual(&b.initial_state(n)?, &b.eos, &geom, order)? });
    }
    let flow_order = (flow[0].residual / flow[1].residual).ln() / (n1 as f64 / n0 as f64).ln();
    report.check(Check::at_least("hamiltonian flow order", flow_order, tol.min_order));
    report.detail("flow", &flow);

    let geom = GridGeometry::new(&b.chart, &b.grid(n0)?)?;
    let base = b.initial_state(n0)?;
    let casimirs = [DensitySpec::mass(), DensitySpec::volumetric_entropy(entropy_weight(b))];
    for spec in &casimirs {
        let mut worst = 0.0f64;
        for k in 0..=sc.hamiltonian.random_states as u64 {
            let s = if k == 0 { base.clone() } else { perturbed(&base, report.seed, k) };
            worst = worst.max(symmetry_from_density(spec, &s, &b.eos, &geom, order)?.max_abs());
        }
        report.check(Check::at_most(format!("{} generator max", spec.name()), worst, 0.0));
    }

    let mut generators: Vec<(String, DensitySpec)> = vec![("energy".into(), DensitySpec::energy())];
    for (label, spec) in &b.densities {
        if matches!(spec.variant, DensityVariant::Momentum { .. }) {
            generators.push((label.clone(), spec.clone()));
        }
    }
    let mut det_rows = Vec::new();
    for (label, spec) in &generators {
        let mut r = Vec::new();
        for n in [n0, n1] {
            // dt shrinks with h so the centred time difference refines with the grid
            let dt = sc.solver.dt * n0 as f64 / n as f64;
            let mut cfg = SolverConfig::new(dt, sc.hamiltonian.t_end);
            cfg.order = order;
            cfg.snapshot_every = sc.hamiltonian.snapshot_every;
            let run = run_hamiltonian_snapshots(b, n, cfg)?;
            let g = GridGeometry::new(&b.chart, &b.grid(n)?)?;
            let src = |s: &FluidState| symmetry_from_density(spec, s, &b.eos, &g, order);
            r.push(symmetry_determining_residual(src, &run, &b.eos, &g, order)?.max());
        }
        report.check(Check::at_least(format!("{label} symmetry residual ratio"), r[0] / r[1], tol.refinement_ratio));
        det_rows.push((label.clone(), r));
    }
    report.detail("symmetry_residuals", det_rows);

    if b.chart.periodic.iter().all(|p| *p) && b.chart.dim == 2 {
        let pts = geom.grid.points();
        let triple = |c: f64| VariationalTriple {
            d_u: vec![pts.iter().map(|x| (x[1] + c).sin()).collect(), pts.iter().map(|x| (x[0] - c).cos()).collect()],
            d_rho: pts.iter().map(|x| (x[0] + x[1] + c).cos()).collect(),
            d_s: pts.iter().map(|x| (2.0 * x[0] + c).sin()).collect(),
        };
        let (d, norms) = antisymmetry_defect(&triple(0.3), &triple(1.1), &base, &geom, order)?;
        report.detail("antisymmetry_relative_defect", d / norms);
    }
    report.finish()
}

fn run_hamiltonian_snapshots(b: &Built, n: usize, cfg: SolverConfig) -> Result<Vec<FluidState>> {
    let grid = b.grid(n)?;
    let solver = crate::solver::Solver::new(&b.chart, &grid, b.eos.clone(), cfg)?;
    let mut snaps = Vec::new();
    solver.run(b.initial_state(n)?, &mut [], |_, s, _| {
        snaps.push(s.clone());
        Ok(())
    })?;
    Ok(snaps)
}

#[derive(Serialize)]
struct FieldRow {
    field: String,
    killing: f64,
    homothety_2: f64,
    curl_free: f64,
}

/// Connection and curvature identities at probe points, scalar curvature and the
/// Killing/homothety status of the catalogued fields.
pub fn geometry_report(b: &Built, opts: &RunOptions) -> Result<Report> {
    let mut report = new_report(b, Command::GeometryReport, opts)?;
    let chart = &b.chart;
    let n = chart.dim;
    let mut points = chart.probe_points(5);
    let mut rng = ChaCha8Rng::seed_from_u64(report.seed);
    for _ in 0..50 {
        points.push(
            (0..n)
                .map(|a| {
                    let m = if chart.periodic[a] { 0.0 } else { 0.02 * chart.extent(a) };
                    rng.random_range(chart.lower[a] + m..chart.upper[a] - m)
                })
                .collect(),
        );
    }
    let fd = chart.finite_difference_only();
    let (mut anti, mut bianchi, mut compat, mut inverse, mut sym) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let (mut anti_fd, mut bianchi_fd, mut r_diff) = (0.0f64, 0.0f64, 0.0f64);
    let mut csv = csv::Writer::from_writer(Vec::new());
    let cerr = |e: csv::Error| Error::Series(e.to_string());
    let mut header: Vec<String> = (0..n).map(|a| format!("x{a}")).collect();
    header.extend(["scalar_curvature".into(), "scalar_curvature_fd".into()]);
    csv.write_record(&header).map_err(cerr)?;
    let mut scalars = Vec::new();
    for x in &points {
        let geo = chart.geometry(x)?;
        let (a, bi) = riemann_identity_residuals(&geo.curvature);
        anti = anti.max(a);
        bianchi = bianchi.max(bi);
        compat = compat.max(metric_compatibility_residual(chart, x)?);
        inverse = inverse.max((&geo.g_inv * &geo.g - nalgebra::DMatrix::identity(n, n)).abs().max());
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    sym = sym.max((geo.gamma.get(i, j, k) - geo.gamma.get(i, k, j)).abs());
                }
            }
        }
        let cfd = riemann(&fd, x)?;
        let (a, bi) = riemann_identity_residuals(&cfd);
        anti_fd = anti_fd.max(a);
        bianchi_fd = bianchi_fd.max(bi);
        r_diff = r_diff.max((cfd.scalar - geo.scalar_curvature()).abs());
        scalars.push(geo.scalar_curvature());
        let mut rec: Vec<String> = x.iter().map(|v| format!("{v:e}")).collect();
        rec.push(format!("{:e}", geo.scalar_curvature()));
        rec.push(format!("{:e}", cfd.scalar));
        csv.write_record(rec).map_err(cerr)?;
    }
    report.check(Check::at_most("christoffel symmetry", sym, 1e-14));
    report.check(Check::at_most("metric inverse", inverse, 1e-12));
    report.check(Check::at_most("metric compatibility (finite differences)", compat, 1e-6));
    report.check(Check::at_most("riemann antisymmetry", anti, 1e-10));
    report.check(Check::at_most("first bianchi identity", bianchi, 1e-10));
    report.check(Check::at_most("riemann antisymmetry, finite-difference path", anti_fd, 1e-6));
    report.check(Check::at_most("first bianchi identity, finite-difference path", bianchi_fd, 1e-6));
    report.check(Check::at_most("scalar curvature, analytic vs finite-difference path", r_diff, 1e-4));
    let kind = BuiltinChart::from_name(&b.scenario.chart.name);
    if kind == Some(BuiltinChart::UnitSphere) {
        let worst = scalars.iter().map(|r| (r - 2.0).abs()).fold(0.0, f64::max);
        report.check(Check::at_most("sphere scalar curvature minus 2", worst, 1e-6));
    }
    if chart.flat {
        let worst = scalars.iter().map(|r| r.abs()).fold(0.0, f64::max);
        report.check(Check::at_most("flat scalar curvature", worst, 1e-12));
    }
    report.artifact("curvature.csv", &csv.into_inner().map_err(|e| Error::Series(e.to_string()))?)?;

    let mut names: Vec<String> = (0..n).map(|k| format!("translation_{k}")).collect();
    names.extend(["rotation_01".into(), "dilation".into(), "quadratic_0".into()]);
    let mut rows = Vec::new();
    for name in names {
        let Ok(f) = builtin_field(chart, &name) else { continue };
        let mut row = FieldRow { field: name.clone(), killing: 0.0, homothety_2: 0.0, curl_free: 0.0 };
        for x in &points {
            row.killing = row.killing.max(killing_residual(chart, &f, x)?.abs().max());
            row.homothety_2 = row.homothety_2.max(homothety_residual(chart, &f, 2.0, x)?.abs().max());
            row.curl_free = row.curl_free.max(curl_free_residual(chart, &f, x)?.abs().max());
        }
        let expected_killing = match kind {
            Some(BuiltinChart::FlatTorus) | Some(BuiltinChart::FlatPatch) => name.starts_with("translation_") || name.starts_with("rotation_"),
            Some(BuiltinChart::TorusOfRevolution) | Some(BuiltinChart::UnitSphere) => name == "translation_1",
            None => false,
        };
        if expected_killing {
            report.check(Check::at_most(format!("{name} killing residual"), row.killing, 1e-8));
        }
        if chart.flat && name == "dilation" {
            report.check(Check::at_most("dilation homothety residual (lambda = 2)", row.homothety_2, 1e-8));
        }
        rows.push(row);
    }
    report.detail("fields", rows);
    report.detail("points", points.len());
    report.finish()
}
