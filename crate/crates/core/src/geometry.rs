//! Uniform cell grids and exact ball/box intersection measures.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A uniform grid of cubic cells of side `h`; cell `k` is centred at
/// `origin + k h` (row-major, last axis fastest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellGrid {
    pub origin: Vec<f64>,
    pub h: f64,
    pub shape: Vec<usize>,
}

impl CellGrid {
    pub fn new(origin: Vec<f64>, h: f64, shape: Vec<usize>) -> Result<Self> {
        if origin.len() != shape.len() || origin.is_empty() {
            return Err(Error::DegenerateLattice(format!(
                "origin has {} coordinates but shape has {} axes",
                origin.len(),
                shape.len()
            )));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::DegenerateLattice(format!("spacing h = {h} must be positive")));
        }
        if shape.iter().any(|&m| m == 0) {
            return Err(Error::DegenerateLattice("empty axis".into()));
        }
        Ok(CellGrid { origin, h, shape })
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim() as i32)
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for k in (0..self.dim()).rev() {
            idx[k] = flat % self.shape[k];
            flat /= self.shape[k];
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.shape).fold(0, |acc, (&i, &m)| acc * m + i)
    }

    pub fn center(&self, flat: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        self.center_into(flat, &mut x);
        x
    }

    pub fn center_into(&self, mut flat: usize, out: &mut [f64]) {
        for k in (0..self.dim()).rev() {
            let i = flat % self.shape[k];
            flat /= self.shape[k];
            out[k] = self.origin[k] + i as f64 * self.h;
        }
    }

    /// Nearest cell to `x`, if `x` lies inside the closed cell box.
    pub fn locate(&self, x: &[f64]) -> Option<usize> {
        let mut idx = Vec::with_capacity(self.dim());
        for k in 0..self.dim() {
            let f = ((x[k] - self.origin[k]) / self.h).round();
            if f < 0.0 || f >= self.shape[k] as f64 {
                return None;
            }
            idx.push(f as usize);
        }
        Some(self.flat_index(&idx))
    }

    /// Lower and upper corners of the union of all cells.
    pub fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        let lo = self.origin.iter().map(|o| o - 0.5 * self.h).collect();
        let hi = self
            .origin
            .iter()
            .zip(&self.shape)
            .map(|(o, &m)| o + (m as f64 - 0.5) * self.h)
            .collect();
        (lo, hi)
    }

    /// Whether the closed ball `B_r(x)` lies in the closed cell box.
    pub fn contains_ball(&self, x: &[f64], r: f64) -> bool {
        let (lo, hi) = self.bounds();
        (0..self.dim()).all(|k| x[k] - r >= lo[k] - 1e-12 * self.h && x[k] + r <= hi[k] + 1e-12 * self.h)
    }

    /// Flat indices of cells whose centres lie in the closed ball `B_r(x)`.
    pub fn cells_in_ball(&self, x: &[f64], r: f64) -> Vec<usize> {
        let n = self.dim();
        let mut lo = vec![0usize; n];
        let mut hi = vec![0usize; n];
        for k in 0..n {
            let a = ((x[k] - r - self.origin[k]) / self.h).ceil().max(0.0);
            let b = ((x[k] + r - self.origin[k]) / self.h).floor().min(self.shape[k] as f64 - 1.0);
            if b < a {
                return Vec::new();
            }
            lo[k] = a as usize;
            hi[k] = b as usize;
        }
        let mut out = Vec::new();
        let mut idx = lo.clone();
        let r2 = r * r * (1.0 + 1e-12);
        loop {
            let d2: f64 = (0..n)
                .map(|k| {
                    let c = self.origin[k] + idx[k] as f64 * self.h - x[k];
                    c * c
                })
                .sum();
            if d2 <= r2 {
                out.push(self.flat_index(&idx));
            }
            let mut k = n;
            loop {
                if k == 0 {
                    return out;
                }
                k -= 1;
                if idx[k] < hi[k] {
                    idx[k] += 1;
                    break;
                }
                idx[k] = lo[k];
            }
        }
    }
}

/// Euclidean distance.
#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Distance from `x` to the nearest and farthest points of the box `[lo, hi]`.
pub fn box_distance_range(x: &[f64], lo: &[f64], hi: &[f64]) -> (f64, f64) {
    let mut dmin = 0.0;
    let mut dmax = 0.0;
    for k in 0..x.len() {
        let a = lo[k] - x[k];
        let b = x[k] - hi[k];
        let near = a.max(b).max(0.0);
        let far = (x[k] - lo[k]).abs().max((hi[k] - x[k]).abs());
        dmin += near * near;
        dmax += far * far;
    }
    (dmin.sqrt(), dmax.sqrt())
}

/// Signed area of `{0 <= X <= x, 0 <= Y <= y} ∩ B_r(0)`, odd in each argument.
fn quadrant_area(x: f64, y: f64, r: f64) -> f64 {
    let sx = x.signum();
    let sy = y.signum();
    let x = x.abs().min(r);
    let y = y.abs().min(r);
    if x == 0.0 || y == 0.0 {
        return 0.0;
    }
    // ∫_0^t sqrt(r² - X²) dX written as quarter disk minus a circular
    // segment, which stays accurate when t is close to r.
    let prim = |t: f64| {
        let theta = ((r - t) * (r + t)).max(0.0).sqrt().atan2(t);
        let seg = if theta < 1e-2 {
            let u = 2.0 * theta;
            u * u * u / 12.0 - u.powi(5) / 240.0 + u.powi(7) / 10080.0
        } else {
            theta - 0.5 * (2.0 * theta).sin()
        };
        0.25 * std::f64::consts::PI * r * r - 0.5 * r * r * seg
    };
    let xc = ((r - y) * (r + y)).max(0.0).sqrt();
    let a = x.min(xc);
    sx * sy * (y * a + prim(x) - prim(a))
}

/// Exact area of `B_r(c) ∩ [lo, hi]` in the plane.
pub fn disk_rect_area(c: &[f64], r: f64, lo: &[f64], hi: &[f64]) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    let (x0, x1) = (lo[0] - c[0], hi[0] - c[0]);
    let (y0, y1) = (lo[1] - c[1], hi[1] - c[1]);
    let v = quadrant_area(x1, y1, r) - quadrant_area(x0, y1, r) - quadrant_area(x1, y0, r)
        + quadrant_area(x0, y0, r);
    v.max(0.0)
}

/// Volume of `B_r(c) ∩ [lo, hi]`: exact for `n = 2`, midpoint sampling with
/// `sub^n` subcells otherwise (exact when the box is inside or outside the ball).
pub fn ball_box_volume(c: &[f64], r: f64, lo: &[f64], hi: &[f64], sub: usize) -> f64 {
    let n = c.len();
    let (dmin, dmax) = box_distance_range(c, lo, hi);
    let vol: f64 = (0..n).map(|k| hi[k] - lo[k]).product();
    if dmin >= r {
        return 0.0;
    }
    if dmax <= r {
        return vol;
    }
    if n == 2 {
        return disk_rect_area(c, r, lo, hi);
    }
    let total = sub.pow(n as u32);
    let mut hits = 0usize;
    let mut p = vec![0.0; n];
    for m in 0..total {
        let mut t = m;
        for k in 0..n {
            let i = t % sub;
            t /= sub;
            p[k] = lo[k] + (i as f64 + 0.5) / sub as f64 * (hi[k] - lo[k]);
        }
        if dist(&p, c) <= r {
            hits += 1;
        }
    }
    vol * hits as f64 / total as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn disk_inside_and_quarter() {
        let a = disk_rect_area(&[0.0, 0.0], 1.0, &[-2.0, -2.0], &[2.0, 2.0]);
        assert!((a - PI).abs() < 1e-14);
        let q = disk_rect_area(&[0.0, 0.0], 1.0, &[0.0, 0.0], &[2.0, 2.0]);
        assert!((q - PI / 4.0).abs() < 1e-14);
        // Half disk.
        let hd = disk_rect_area(&[0.0, 0.0], 1.0, &[-3.0, 0.0], &[3.0, 3.0]);
        assert!((hd - PI / 2.0).abs() < 1e-14);
        assert_eq!(disk_rect_area(&[5.0, 5.0], 1.0, &[0.0, 0.0], &[1.0, 1.0]), 0.0);
    }

    #[test]
    fn disk_rect_matches_sampling() {
        let c = [0.13, -0.27];
        let (lo, hi) = ([0.0, -0.5], [0.6, 0.1]);
        let exact = disk_rect_area(&c, 0.45, &lo, &hi);
        let m = 1000;
        let mut hits = 0;
        for i in 0..m {
            for j in 0..m {
                let x = lo[0] + (i as f64 + 0.5) / m as f64 * 0.6;
                let y = lo[1] + (j as f64 + 0.5) / m as f64 * 0.6;
                if (x - c[0]).powi(2) + (y - c[1]).powi(2) <= 0.45f64.powi(2) {
                    hits += 1;
                }
            }
        }
        let approx = 0.36 * hits as f64 / (m * m) as f64;
        assert!((exact - approx).abs() < 1e-3, "{exact} {approx}");
    }

    #[test]
    fn grid_indexing_roundtrip() {
        let g = CellGrid::new(vec![0.0, 1.0, 2.0], 0.5, vec![3, 4, 5]).unwrap();
        for f in 0..g.len() {
            assert_eq!(g.flat_index(&g.multi_index(f)), f);
        }
        assert_eq!(g.center(g.flat_index(&[1, 2, 3])), vec![0.5, 2.0, 3.5]);
        assert_eq!(g.locate(&[0.6, 2.1, 3.4]), Some(g.flat_index(&[1, 2, 3])));
        assert_eq!(g.locate(&[-1.0, 2.1, 3.4]), None);
    }

    #[test]
    fn cells_in_ball_closed() {
        let g = CellGrid::new(vec![0.0, 0.0], 1.0, vec![5, 5]).unwrap();
        let cells = g.cells_in_ball(&[2.0, 2.0], 1.0);
        assert_eq!(cells.len(), 5);
    }
}
