use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fluid::Grid;
use crate::manifold::ChartMetric;

/// What a marker set represents.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarkerKind {
    DomainInterior,
    DomainBoundary,
    Curve,
}

/// Lagrangian markers. Positions are chart points kept unwrapped across periodic seams;
/// boundary and curve markers are ordered along the polyline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkerSet {
    pub kind: MarkerKind,
    pub positions: Vec<Vec<f64>>,
    /// volume weights (interior, √g included) or metric arc elements of the segment
    /// starting at each marker (boundary, curve)
    pub weights: Vec<f64>,
    pub closed: bool,
}

impl MarkerSet {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Polar midpoint quadrature of a coordinate disk: `rings` radial cells, 4·rings sectors.
    pub fn disk_interior(chart: &ChartMetric, center: &[f64], radius: f64, rings: usize) -> Result<Self> {
        check_2d(chart)?;
        if !(radius > 0.0) || rings == 0 {
            return Err(Error::Geometry("disk needs a positive radius and at least one ring".into()));
        }
        let sectors = 4 * rings;
        let dr = radius / rings as f64;
        let dth = TAU / sectors as f64;
        let mut positions = Vec::with_capacity(rings * sectors);
        let mut weights = Vec::with_capacity(rings * sectors);
        for j in 0..rings {
            let r = (j as f64 + 0.5) * dr;
            for k in 0..sectors {
                // stagger alternate rings by half a sector
                let th = (k as f64 + 0.5 * (j % 2) as f64) * dth;
                let x = vec![center[0] + r * th.cos(), center[1] + r * th.sin()];
                let sg = chart.connection(&wrapped(chart, &x))?.sqrt_det_g;
                weights.push(r * dr * dth * sg);
                positions.push(x);
            }
        }
        Ok(MarkerSet { kind: MarkerKind::DomainInterior, positions, weights, closed: false })
    }

    /// Counter-clockwise closed polyline on a coordinate circle.
    pub fn circle(chart: &ChartMetric, center: &[f64], radius: f64, segments: usize, kind: MarkerKind) -> Result<Self> {
        check_2d(chart)?;
        if segments < 3 {
            return Err(Error::Geometry("a closed curve needs at least three markers".into()));
        }
        let positions = (0..segments)
            .map(|k| {
                let th = TAU * k as f64 / segments as f64;
                vec![center[0] + radius * th.cos(), center[1] + radius * th.sin()]
            })
            .collect();
        let mut m = MarkerSet { kind, positions, weights: vec![], closed: true };
        m.refresh_arc_elements(chart)?;
        m.check_simple()?;
        Ok(m)
    }

    /// Closed polygon boundary, each edge subdivided into `per_edge` segments.
    pub fn polygon_boundary(chart: &ChartMetric, vertices: &[Vec<f64>], per_edge: usize) -> Result<Self> {
        check_2d(chart)?;
        if vertices.len() < 3 || per_edge == 0 {
            return Err(Error::Geometry("a polygon needs at least three vertices".into()));
        }
        let mut positions = Vec::new();
        for (k, a) in vertices.iter().enumerate() {
            let b = &vertices[(k + 1) % vertices.len()];
            for m in 0..per_edge {
                let s = m as f64 / per_edge as f64;
                positions.push(vec![a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]);
            }
        }
        let mut m = MarkerSet { kind: MarkerKind::DomainBoundary, positions, weights: vec![], closed: true };
        m.refresh_arc_elements(chart)?;
        m.check_simple()?;
        if m.signed_area() < 0.0 {
            m.positions.reverse();
            m.refresh_arc_elements(chart)?;
        }
        Ok(m)
    }

    /// Lattice cloud filling a polygon: nodes of spacing h inside, weight h²√g (first order).
    pub fn polygon_interior(chart: &ChartMetric, vertices: &[Vec<f64>], h: f64) -> Result<Self> {
        check_2d(chart)?;
        if !(h > 0.0) {
            return Err(Error::Geometry("cloud spacing must be positive".into()));
        }
        let lo = [0, 1].map(|a| vertices.iter().map(|v| v[a]).fold(f64::INFINITY, f64::min));
        let hi = [0, 1].map(|a| vertices.iter().map(|v| v[a]).fold(f64::NEG_INFINITY, f64::max));
        let mut positions = Vec::new();
        let mut weights = Vec::new();
        let mut y = lo[1] + 0.5 * h;
        while y < hi[1] {
            let mut x = lo[0] + 0.5 * h;
            while x < hi[0] {
                if point_in_polygon(&[x, y], vertices) {
                    let sg = chart.connection(&wrapped(chart, &[x, y]))?.sqrt_det_g;
                    positions.push(vec![x, y]);
                    weights.push(h * h * sg);
                }
                x += h;
            }
            y += h;
        }
        if positions.is_empty() {
            return Err(Error::Geometry("polygon contains no interior markers at this spacing".into()));
        }
        Ok(MarkerSet { kind: MarkerKind::DomainInterior, positions, weights, closed: false })
    }

    /// Open polyline from a to b with `segments` segments.
    pub fn segment(chart: &ChartMetric, a: &[f64], b: &[f64], segments: usize) -> Result<Self> {
        if segments == 0 {
            return Err(Error::Geometry("a curve needs at least one segment".into()));
        }
        let positions = (0..=segments)
            .map(|k| {
                let s = k as f64 / segments as f64;
                a.iter().zip(b).map(|(p, q)| p + s * (q - p)).collect()
            })
            .collect();
        let mut m = MarkerSet { kind: MarkerKind::Curve, positions, weights: vec![], closed: false };
        m.refresh_arc_elements(chart)?;
        Ok(m)
    }

    /// Number of polyline segments.
    pub fn segment_count(&self) -> usize {
        if self.closed {
            self.len()
        } else {
            self.len().saturating_sub(1)
        }
    }

    /// Endpoints of segment k.
    pub fn segment_ends(&self, k: usize) -> (&[f64], &[f64]) {
        (&self.positions[k], &self.positions[(k + 1) % self.len()])
    }

    /// Recompute metric arc elements from positions (midpoint metric).
    pub fn refresh_arc_elements(&mut self, chart: &ChartMetric) -> Result<()> {
        if self.kind == MarkerKind::DomainInterior {
            return Ok(());
        }
        let mut w = Vec::with_capacity(self.segment_count());
        for k in 0..self.segment_count() {
            let (a, b) = self.segment_ends(k);
            let mid: Vec<f64> = a.iter().zip(b).map(|(p, q)| 0.5 * (p + q)).collect();
            let d: Vec<f64> = a.iter().zip(b).map(|(p, q)| q - p).collect();
            let conn = chart.connection(&wrapped(chart, &mid))?;
            let len = conn.inner(&d, &d).sqrt();
            if !(len > 0.0) {
                return Err(Error::Geometry(format!("degenerate segment {k} of a marker curve")));
            }
            w.push(len);
        }
        self.weights = w;
        Ok(())
    }

    /// Shoelace area in chart coordinates (closed 2-D polylines).
    pub fn signed_area(&self) -> f64 {
        let mut a = 0.0;
        for k in 0..self.len() {
            let (p, q) = self.segment_ends(k);
            a += p[0] * q[1] - q[0] * p[1];
        }
        0.5 * a
    }

    /// Refuse self-intersecting polylines.
    pub fn check_simple(&self) -> Result<()> {
        if self.kind == MarkerKind::DomainInterior || self.positions[0].len() != 2 {
            return Ok(());
        }
        let m = self.segment_count();
        // sweep over segments ordered by their smallest x¹
        let span = |k: usize| {
            let (a, b) = self.segment_ends(k);
            (a[0].min(b[0]), a[0].max(b[0]))
        };
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&p, &q| span(p).0.total_cmp(&span(q).0));
        for (pos, &i) in order.iter().enumerate() {
            let (a, b) = self.segment_ends(i);
            let hi = span(i).1;
            for &j in &order[pos + 1..] {
                if span(j).0 > hi {
                    break;
                }
                let (lo_k, hi_k) = (i.min(j), i.max(j));
                let adjacent = hi_k == lo_k + 1 || (self.closed && lo_k == 0 && hi_k == m - 1);
                if adjacent {
                    continue;
                }
                let (c, d) = self.segment_ends(j);
                if segments_cross(a, b, c, d) {
                    return Err(Error::Geometry(format!("marker polyline self-intersects (segments {lo_k} and {hi_k})")));
                }
            }
        }
        Ok(())
    }

    /// Every marker at least `cells` grid spacings inside the non-periodic edges.
    pub fn check_margin(&self, grid: &Grid, cells: f64) -> Result<()> {
        for (k, x) in self.positions.iter().enumerate() {
            for a in 0..grid.dim() {
                if grid.periodic[a] {
                    continue;
                }
                let m = cells * grid.spacing[a];
                if x[a] < grid.lower[a] + m || x[a] > grid.upper[a] - m {
                    return Err(Error::MarkerLost { index: k, x: x.clone() });
                }
            }
        }
        Ok(())
    }
}

fn check_2d(chart: &ChartMetric) -> Result<()> {
    if chart.dim != 2 {
        return Err(Error::Dimension { expected: 2, got: chart.dim });
    }
    Ok(())
}

/// Point folded into the chart box along periodic axes.
pub fn wrapped(chart: &ChartMetric, x: &[f64]) -> Vec<f64> {
    let mut y = x.to_vec();
    chart.wrap(&mut y);
    y
}

fn orient(a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn segments_cross(a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> bool {
    let (d1, d2) = (orient(c, d, a), orient(c, d, b));
    let (d3, d4) = (orient(a, b, c), orient(a, b, d));
    (d1 * d2 < 0.0) && (d3 * d4 < 0.0)
}

fn point_in_polygon(p: &[f64], v: &[Vec<f64>]) -> bool {
    let mut inside = false;
    let mut j = v.len() - 1;
    for i in 0..v.len() {
        if (v[i][1] > p[1]) != (v[j][1] > p[1]) && p[0] < (v[j][0] - v[i][0]) * (p[1] - v[i][1]) / (v[j][1] - v[i][1]) + v[i][0] {
            inside = !inside;
        }
        j = i;
    }
    inside
}
