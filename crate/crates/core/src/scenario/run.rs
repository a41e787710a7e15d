//! Solver runs with attached markers and balance tracking.

use crate::error::Result;
use crate::fluid::FluidState;
use crate::integrals::{observe_circulation, BalanceTracker, IntegralSeries};
use crate::solver::{MarkerSet, Solver, SolverConfig};

use super::Built;

/// Series and final state of one run.
#[derive(Clone, Debug)]
pub struct RunResult {
    pub n: usize,
    pub dt: f64,
    pub balances: Vec<(String, IntegralSeries)>,
    pub circulations: Vec<(String, IntegralSeries, bool)>,
    pub final_state: FluidState,
    pub snapshots: Vec<FluidState>,
}

impl RunResult {
    pub fn balance(&self, label: &str) -> Option<&IntegralSeries> {
        self.balances.iter().find(|(l, _)| l == label).map(|(_, s)| s)
    }

    pub fn circulation(&self, name: &str) -> Option<&IntegralSeries> {
        self.circulations.iter().find(|(l, _, _)| l == name).map(|(_, s, _)| s)
    }
}

/// Run the scenario at n nodes per axis with the given solver settings. Every density is
/// tracked over the transported domain at the snapshot cadence; circulation is cheap and is
/// recorded after every step.
pub fn run_simulation(b: &Built, n: usize, cfg: SolverConfig, keep_snapshots: bool) -> Result<RunResult> {
    let grid = b.grid(n)?;
    let every = cfg.snapshot_every;
    let solver = Solver::new(&b.chart, &grid, b.eos.clone(), SolverConfig { snapshot_every: 1, ..cfg.clone() })?;
    let state = b.initial_state(n)?;
    let domain = b.domain(n)?;
    let curves = b.curves(n)?;
    let mut markers: Vec<MarkerSet> = Vec::new();
    if let Some((i, bd)) = &domain {
        markers.push(i.clone());
        markers.push(bd.clone());
    }
    let first_curve = markers.len();
    markers.extend(curves.iter().map(|(_, c)| c.clone()));

    let specs: Vec<_> = if domain.is_some() { b.densities.iter().map(|(_, s)| s.clone()).collect() } else { vec![] };
    let mut tracker = BalanceTracker::new(specs);
    let mut circ = vec![IntegralSeries::default(); curves.len()];
    let mut snapshots = Vec::new();
    let final_state = solver.run(state, &mut markers, |step, s, m| {
        for (k, series) in circ.iter_mut().enumerate() {
            observe_circulation(series, &m[first_curve + k], s, &solver.geom, &b.eos)?;
        }
        if step % every != 0 {
            return Ok(());
        }
        if domain.is_some() {
            tracker.observe(s, &m[0], &m[1], &solver.geom, &b.eos)?;
        }
        if keep_snapshots {
            snapshots.push(s.clone());
        }
        Ok(())
    })?;
    let balances = if domain.is_some() {
        b.densities.iter().map(|(l, _)| l.clone()).zip(tracker.finish()?).collect()
    } else {
        vec![]
    };
    let circulations = curves
        .iter()
        .zip(circ)
        .map(|((name, set), mut s)| {
            s.finish()?;
            Ok((name.clone(), s, set.closed))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RunResult { n, dt: cfg.dt, balances, circulations, final_state, snapshots })
}
