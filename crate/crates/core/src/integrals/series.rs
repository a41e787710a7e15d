use serde::Serialize;

use crate::error::{Error, Result};
use crate::fluid::{Eos, FluidState};
use crate::solver::{GridGeometry, MarkerSet};

use super::moving::{bernoulli, boundary_flux, circulation, domain_integral};
use super::DensitySpec;

/// Integral, flux and balance residual at each snapshot time. Residuals use centered time
/// differences and are absent at the two endpoints.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct IntegralSeries {
    pub times: Vec<f64>,
    pub integrals: Vec<f64>,
    pub fluxes: Vec<f64>,
    pub residuals: Vec<Option<f64>>,
}

impl IntegralSeries {
    pub fn push(&mut self, t: f64, integral: f64, flux: f64) {
        self.times.push(t);
        self.integrals.push(integral);
        self.fluxes.push(flux);
        self.residuals.push(None);
    }

    /// residual_k = (I_{k+1} − I_{k−1})/(t_{k+1} − t_{k−1}) + F_k.
    pub fn finish(&mut self) -> Result<()> {
        let m = self.times.len();
        if m < 3 {
            return Err(Error::TooFewSnapshots(m));
        }
        self.residuals = vec![None; m];
        for k in 1..m - 1 {
            let dt = self.times[k + 1] - self.times[k - 1];
            if !(dt > 0.0) {
                return Err(Error::Series(format!("snapshot times not increasing at index {k}")));
            }
            self.residuals[k] = Some((self.integrals[k + 1] - self.integrals[k - 1]) / dt + self.fluxes[k]);
        }
        Ok(())
    }

    pub fn from_samples(times: Vec<f64>, integrals: Vec<f64>, fluxes: Vec<f64>) -> Result<Self> {
        if times.len() != integrals.len() || times.len() != fluxes.len() {
            return Err(Error::Series("times, integrals and fluxes differ in length".into()));
        }
        let residuals = vec![None; times.len()];
        let mut s = IntegralSeries { times, integrals, fluxes, residuals };
        s.finish()?;
        Ok(s)
    }

    pub fn max_abs_residual(&self) -> f64 {
        self.residuals.iter().flatten().fold(0.0, |m, r| m.max(r.abs()))
    }

    pub fn max_abs_integral(&self) -> f64 {
        self.integrals.iter().fold(0.0, |m, r| m.max(r.abs()))
    }

    /// max|residual| / max|integral|.
    pub fn relative_residual(&self) -> f64 {
        self.max_abs_residual() / self.max_abs_integral()
    }

    /// max_k |I_k − I_0| / |I_0|.
    pub fn relative_drift(&self) -> f64 {
        let i0 = self.integrals[0];
        self.integrals.iter().fold(0.0f64, |m, v| m.max((v - i0).abs())) / i0.abs()
    }

    /// Rows of (t, integral, flux, residual) with an empty residual at the endpoints.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let err = |e: csv::Error| Error::Series(e.to_string());
        out.write_record(["t", "integral", "flux", "residual"]).map_err(err)?;
        for k in 0..self.times.len() {
            let r = self.residuals[k].map(|v| format!("{v:e}")).unwrap_or_default();
            out.write_record([format!("{:e}", self.times[k]), format!("{:e}", self.integrals[k]), format!("{:e}", self.fluxes[k]), r])
                .map_err(err)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Accumulates moving-domain balances for several densities over a run.
#[derive(Clone, Debug)]
pub struct BalanceTracker {
    pub specs: Vec<DensitySpec>,
    pub series: Vec<IntegralSeries>,
}

impl BalanceTracker {
    pub fn new(specs: Vec<DensitySpec>) -> Self {
        let series = vec![IntegralSeries::default(); specs.len()];
        BalanceTracker { specs, series }
    }

    pub fn observe(&mut self, state: &FluidState, interior: &MarkerSet, boundary: &MarkerSet, geom: &GridGeometry, eos: &Eos) -> Result<()> {
        for (spec, series) in self.specs.iter().zip(self.series.iter_mut()) {
            let i = domain_integral(interior, spec, state, geom, eos)?;
            let f = boundary_flux(boundary, spec, state, geom, eos)?;
            series.push(state.t, i, f);
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<Vec<IntegralSeries>> {
        for s in self.series.iter_mut() {
            s.finish()?;
        }
        Ok(self.series)
    }
}

/// Circulation balance along a transported curve: the flux slot holds −[½g(u,u) − e − ρ⁻¹P]
/// between the endpoints (zero on closed curves).
pub fn observe_circulation(series: &mut IntegralSeries, curve: &MarkerSet, state: &FluidState, geom: &GridGeometry, eos: &Eos) -> Result<()> {
    let c = circulation(curve, state, geom)?;
    let f = if curve.closed {
        0.0
    } else {
        let end = bernoulli(state, geom, eos, curve.positions.last().expect("curve has markers"))?;
        let start = bernoulli(state, geom, eos, &curve.positions[0])?;
        -(end - start)
    };
    series.push(state.t, c, f);
    Ok(())
}
