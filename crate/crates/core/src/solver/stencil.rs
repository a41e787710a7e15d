use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fluid::Grid;

/// Order of the central difference stencils.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum SpatialOrder {
    Second,
    Fourth,
}

impl TryFrom<u8> for SpatialOrder {
    type Error = String;
    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            2 => Ok(SpatialOrder::Second),
            4 => Ok(SpatialOrder::Fourth),
            _ => Err(format!("spatial order must be 2 or 4, got {v}")),
        }
    }
}

impl From<SpatialOrder> for u8 {
    fn from(o: SpatialOrder) -> u8 {
        match o {
            SpatialOrder::Second => 2,
            SpatialOrder::Fourth => 4,
        }
    }
}

/// ∂f/∂x^axis on the grid. Periodic axes wrap; non-periodic edges fall back to second-order
/// one-sided differences (and second-order central one node in, for the fourth-order stencil).
pub fn derivative(grid: &Grid, f: &[f64], axis: usize, order: SpatialOrder) -> Vec<f64> {
    let n = grid.dims[axis];
    let stride = grid.stride(axis);
    let h = grid.spacing[axis];
    let periodic = grid.periodic[axis];
    let mut out = vec![0.0; f.len()];
    // one line along `axis` per (outer, inner) pair
    let outer = f.len() / (n * stride);
    let lines: Vec<usize> = (0..outer).flat_map(|o| (0..stride).map(move |r| o * n * stride + r)).collect();
    let line_out: Vec<Vec<f64>> = lines
        .par_iter()
        .map(|&base| {
            let at = |i: isize| f[base + i.rem_euclid(n as isize) as usize * stride];
            let mut d = vec![0.0; n];
            for (i, o) in d.iter_mut().enumerate() {
                let ii = i as isize;
                let interior2 = periodic || (i >= 1 && i + 1 < n);
                let interior4 = periodic || (i >= 2 && i + 2 < n);
                *o = match order {
                    SpatialOrder::Fourth if interior4 => {
                        (2.0 / 3.0 * (at(ii + 1) - at(ii - 1)) - (at(ii + 2) - at(ii - 2)) / 12.0) / h
                    }
                    _ if interior2 => 0.5 * (at(ii + 1) - at(ii - 1)) / h,
                    _ if i == 0 => (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h),
                    _ => (3.0 * at(ii) - 4.0 * at(ii - 1) + at(ii - 2)) / (2.0 * h),
                };
            }
            d
        })
        .collect();
    for (base, d) in lines.iter().zip(line_out) {
        for (i, v) in d.into_iter().enumerate() {
            out[base + i * stride] = v;
        }
    }
    out
}

/// All first derivatives: result[axis][point].
pub fn gradient(grid: &Grid, f: &[f64], order: SpatialOrder) -> Vec<Vec<f64>> {
    (0..grid.dim()).map(|a| derivative(grid, f, a, order)).collect()
}

/// Interpolation scheme for off-grid evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InterpKind {
    /// multilinear, exact on fields linear per cell
    Linear,
    /// tensor-product cubic Lagrange on four nodes per axis
    Cubic,
}

/// Grid nodes and weights reproducing the interpolant at one point.
#[derive(Clone, Debug)]
pub struct InterpStencil {
    pub nodes: Vec<(usize, f64)>,
}

impl InterpStencil {
    pub fn new(grid: &Grid, x: &[f64], kind: InterpKind) -> Result<Self> {
        let n = grid.dim();
        let width: usize = match kind {
            InterpKind::Linear => 2,
            InterpKind::Cubic => 4,
        };
        let mut nodes = Vec::with_capacity(width.pow(n as u32));
        nodes.push((0usize, 1.0f64));
        for a in 0..n {
            let na = grid.dims[a];
            let mut s = (x[a] - grid.lower[a]) / grid.spacing[a];
            if grid.periodic[a] {
                s = s.rem_euclid(na as f64);
            } else if !(s >= -1e-12 && s <= (na - 1) as f64 + 1e-12) {
                return Err(Error::OutsideDomain { x: x.to_vec() });
            }
            let i0 = s.floor() as isize;
            let mut ax = [(0isize, 0.0f64); 4];
            match kind {
                InterpKind::Linear => {
                    let i0 = if grid.periodic[a] { i0 } else { i0.clamp(0, na as isize - 2) };
                    let fr = s - i0 as f64;
                    ax[0] = (i0, 1.0 - fr);
                    ax[1] = (i0 + 1, fr);
                }
                InterpKind::Cubic => {
                    let first = if grid.periodic[a] { i0 - 1 } else { (i0 - 1).clamp(0, na as isize - 4) };
                    for (k, slot) in ax.iter_mut().enumerate() {
                        let mut w = 1.0;
                        for m in 0..4 {
                            if m != k {
                                w *= (s - (first + m as isize) as f64) / (k as f64 - m as f64);
                            }
                        }
                        *slot = (first + k as isize, w);
                    }
                }
            }
            let stride = grid.stride(a);
            let prev = nodes.len();
            for p in 0..prev {
                let (idx, w) = nodes[p];
                for &(i, wi) in &ax[1..width] {
                    nodes.push((idx + i.rem_euclid(na as isize) as usize * stride, w * wi));
                }
                let (i, wi) = ax[0];
                nodes[p] = (idx + i.rem_euclid(na as isize) as usize * stride, w * wi);
            }
        }
        Ok(InterpStencil { nodes })
    }

    pub fn apply(&self, f: &[f64]) -> f64 {
        self.nodes.iter().map(|&(i, w)| w * f[i]).sum()
    }
}

/// Value of a grid field at an arbitrary chart point.
pub fn interpolate(grid: &Grid, f: &[f64], x: &[f64], kind: InterpKind) -> Result<f64> {
    Ok(InterpStencil::new(grid, x, kind)?.apply(f))
}
