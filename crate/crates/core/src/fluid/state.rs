use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::ChartMetric;

/// Structured lattice over a chart box. Periodic axes use N cells of size extent/N;
/// non-periodic axes place N nodes on [a, b] inclusive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub dims: Vec<usize>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub periodic: Vec<bool>,
    pub spacing: Vec<f64>,
}

impl Grid {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, periodic: Vec<bool>, dims: Vec<usize>) -> Result<Self> {
        let n = dims.len();
        if lower.len() != n || upper.len() != n || periodic.len() != n {
            return Err(Error::Dimension { expected: n, got: lower.len() });
        }
        let mut spacing = Vec::with_capacity(n);
        for a in 0..n {
            if dims[a] < 5 {
                return Err(Error::config(format!("grid.dims[{a}]"), "at least 5 points per axis are required"));
            }
            let ext = upper[a] - lower[a];
            spacing.push(if periodic[a] { ext / dims[a] as f64 } else { ext / (dims[a] - 1) as f64 });
        }
        Ok(Grid { dims, lower, upper, periodic, spacing })
    }

    /// Uniform N per axis over the chart domain.
    pub fn for_chart(chart: &ChartMetric, n_per_axis: usize) -> Result<Self> {
        Grid::new(chart.lower.clone(), chart.upper.clone(), chart.periodic.clone(), vec![n_per_axis; chart.dim])
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major: the last axis varies fastest.
    pub fn index(&self, multi: &[usize]) -> usize {
        multi.iter().zip(&self.dims).fold(0, |acc, (i, n)| acc * n + i)
    }

    pub fn multi_index(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim()];
        for a in (0..self.dim()).rev() {
            out[a] = idx % self.dims[a];
            idx /= self.dims[a];
        }
        out
    }

    /// Stride of axis a in linear index units.
    pub fn stride(&self, axis: usize) -> usize {
        self.dims[axis + 1..].iter().product()
    }

    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        self.lower[axis] + i as f64 * self.spacing[axis]
    }

    pub fn point(&self, idx: usize) -> Vec<f64> {
        self.multi_index(idx).iter().enumerate().map(|(a, &i)| self.coord(a, i)).collect()
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    /// Coordinate volume element of one cell (trapezoid weights at non-periodic edges are applied separately).
    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    /// Trapezoid quadrature weight of node idx (coordinate measure).
    pub fn quadrature_weight(&self, idx: usize) -> f64 {
        let m = self.multi_index(idx);
        let mut w = self.cell_volume();
        for a in 0..self.dim() {
            if !self.periodic[a] && (m[a] == 0 || m[a] == self.dims[a] - 1) {
                w *= 0.5;
            }
        }
        w
    }

    pub fn min_spacing(&self) -> f64 {
        self.spacing.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Same box with a different resolution.
    pub fn with_dims(&self, dims: Vec<usize>) -> Result<Self> {
        Grid::new(self.lower.clone(), self.upper.clone(), self.periodic.clone(), dims)
    }
}

/// Grid-resident fluid fields u^i, ρ, S at time t.
#[derive(Clone, Debug, PartialEq)]
pub struct FluidState {
    pub grid: Grid,
    pub t: f64,
    /// u[i][point] = u^i
    pub u: Vec<Vec<f64>>,
    pub rho: Vec<f64>,
    pub s: Vec<f64>,
}

impl FluidState {
    pub fn uniform(grid: Grid, u: &[f64], rho: f64, s: f64) -> Self {
        let m = grid.len();
        FluidState { u: u.iter().map(|c| vec![*c; m]).collect(), rho: vec![rho; m], s: vec![s; m], grid, t: 0.0 }
    }

    /// Sample closures at every grid point.
    pub fn from_fn(
        grid: Grid,
        t: f64,
        u: impl Fn(&[f64]) -> Vec<f64>,
        rho: impl Fn(&[f64]) -> f64,
        s: impl Fn(&[f64]) -> f64,
    ) -> Self {
        let n = grid.dim();
        let m = grid.len();
        let mut uf = vec![vec![0.0; m]; n];
        let mut rf = vec![0.0; m];
        let mut sf = vec![0.0; m];
        for idx in 0..m {
            let x = grid.point(idx);
            let v = u(&x);
            for i in 0..n {
                uf[i][idx] = v[i];
            }
            rf[idx] = rho(&x);
            sf[idx] = s(&x);
        }
        FluidState { grid, t, u: uf, rho: rf, s: sf }
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    pub fn velocity(&self, idx: usize) -> Vec<f64> {
        self.u.iter().map(|c| c[idx]).collect()
    }

    /// ρ > 0 and every field finite.
    pub fn validate(&self) -> Result<()> {
        for idx in 0..self.len() {
            let r = self.rho[idx];
            if !r.is_finite() {
                return Err(Error::NonFinite { field: "rho".into(), index: idx, x: self.grid.point(idx) });
            }
            if r <= 0.0 {
                return Err(Error::NonPositiveDensity { index: idx, x: self.grid.point(idx), value: r });
            }
            if !self.s[idx].is_finite() {
                return Err(Error::NonFinite { field: "S".into(), index: idx, x: self.grid.point(idx) });
            }
            for (i, c) in self.u.iter().enumerate() {
                if !c[idx].is_finite() {
                    return Err(Error::NonFinite { field: format!("u{i}"), index: idx, x: self.grid.point(idx) });
                }
            }
        }
        Ok(())
    }

    /// self + a·other, field by field (same grid assumed).
    pub fn axpy(&self, a: f64, other: &FluidState) -> FluidState {
        let comb = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p + a * q).collect::<Vec<_>>();
        FluidState {
            grid: self.grid.clone(),
            t: self.t + a * other.t,
            u: self.u.iter().zip(&other.u).map(|(p, q)| comb(p, q)).collect(),
            rho: comb(&self.rho, &other.rho),
            s: comb(&self.s, &other.s),
        }
    }

    /// Max abs difference over all fields.
    pub fn max_diff(&self, other: &FluidState) -> f64 {
        let d = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        let mut m = d(&self.rho, &other.rho).max(d(&self.s, &other.s));
        for (p, q) in self.u.iter().zip(&other.u) {
            m = m.max(d(p, q));
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trip_and_spacing() {
        let g = Grid::new(vec![0.0, -1.0], vec![1.0, 1.0], vec![true, false], vec![8, 5]).unwrap();
        assert_eq!(g.spacing, vec![0.125, 0.5]);
        for idx in 0..g.len() {
            assert_eq!(g.index(&g.multi_index(idx)), idx);
        }
        assert_eq!(g.point(g.index(&[2, 4])), vec![0.25, 1.0]);
        assert_eq!(g.stride(0), 5);
        let total: f64 = (0..g.len()).map(|i| g.quadrature_weight(i)).sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn validation_reports_location() {
        let g = Grid::new(vec![0.0; 2], vec![1.0; 2], vec![true; 2], vec![6, 6]).unwrap();
        let mut s = FluidState::uniform(g, &[0.0, 0.0], 1.0, 0.0);
        s.validate().unwrap();
        s.rho[7] = -0.1;
        match s.validate() {
            Err(Error::NonPositiveDensity { index, .. }) => assert_eq!(index, 7),
            other => panic!("{other:?}"),
        }
        s.rho[7] = 1.0;
        s.u[1][3] = f64::NAN;
        assert!(matches!(s.validate(), Err(Error::NonFinite { .. })));
    }
}
