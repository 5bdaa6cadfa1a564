//! Lattice discretisation of a domain with an exterior collar, grid
//! functions, pair weights, the discrete operator and energy, and tails.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{dist, CellGrid};
use crate::kernel::KernelSpec;
use crate::measure::Measure;
use crate::params::Params;
use crate::quadrature::{adaptive_simpson, unit_sphere_area};

/// Shape of the continuous domain represented by the interior nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Domain {
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
}

impl Domain {
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Domain::Box { lo, hi } => x.iter().zip(lo.iter().zip(hi)).all(|(c, (a, b))| *c >= *a && *c <= *b),
            Domain::Ball { center, radius } => dist(x, center) <= *radius,
        }
    }

    /// Distance from `x` to the boundary (0 outside).
    pub fn dist_to_boundary(&self, x: &[f64]) -> f64 {
        if !self.contains(x) {
            return 0.0;
        }
        match self {
            Domain::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(c, (a, b))| (c - a).min(b - c))
                .fold(f64::INFINITY, f64::min),
            Domain::Ball { center, radius } => radius - dist(x, center),
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            Domain::Box { lo, hi } => dist(lo, hi),
            Domain::Ball { radius, .. } => 2.0 * radius,
        }
    }
}

/// Uniform lattice of nodes (cell centres) covering the domain plus a collar
/// of exterior nodes. Row-major node order, last axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    grid: CellGrid,
    collar: usize,
    interior: Vec<bool>,
    interior_nodes: Vec<usize>,
    slot: Vec<usize>,
    domain: Domain,
}

pub const NOT_INTERIOR: usize = usize::MAX;

impl Lattice {
    /// Nodes `lo + k h` inside the closed box `[lo, hi]` are interior; `collar`
    /// further layers of exterior nodes surround them. The continuous domain
    /// is the union of interior cells, `[lo - h/2, hi + h/2]` when `hi - lo`
    /// is a multiple of `h`.
    pub fn build(lo: &[f64], hi: &[f64], h: f64, collar: usize) -> Result<Lattice> {
        if lo.len() != hi.len() || lo.len() < 2 {
            return Err(Error::DegenerateLattice("box corners must have the same dimension n >= 2".into()));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::DegenerateLattice(format!("spacing h = {h} must be positive")));
        }
        if lo.iter().zip(hi).any(|(a, b)| !(b > a)) {
            return Err(Error::DegenerateLattice(format!("degenerate box {lo:?} .. {hi:?}")));
        }
        if collar < 2 {
            return Err(invalid(format!("collar of {collar} cells is below the minimum of 2")));
        }
        let counts: Vec<usize> = lo
            .iter()
            .zip(hi)
            .map(|(a, b)| ((b - a) / h + 1e-9).floor() as usize + 1)
            .collect();
        if let Some(m) = counts.iter().find(|&&m| m < 4) {
            return Err(Error::LatticeTooSmall(format!("only {m} nodes along an axis (need at least 4)")));
        }
        let shape: Vec<usize> = counts.iter().map(|m| m + 2 * collar).collect();
        let origin: Vec<f64> = lo.iter().map(|a| a - collar as f64 * h).collect();
        let grid = CellGrid::new(origin, h, shape)?;
        let interior: Vec<bool> = (0..grid.len())
            .map(|i| {
                let idx = grid.multi_index(i);
                idx.iter().zip(&counts).all(|(&k, &m)| k >= collar && k < collar + m)
            })
            .collect();
        let dlo = lo.iter().map(|a| a - 0.5 * h).collect();
        let dhi = lo.iter().zip(&counts).map(|(a, &m)| a + (m as f64 - 0.5) * h).collect();
        Lattice::assemble(grid, collar, interior, Domain::Box { lo: dlo, hi: dhi })
    }

    fn assemble(grid: CellGrid, collar: usize, interior: Vec<bool>, domain: Domain) -> Result<Lattice> {
        let interior_nodes: Vec<usize> = (0..grid.len()).filter(|&i| interior[i]).collect();
        if interior_nodes.is_empty() {
            return Err(Error::DegenerateLattice("no interior nodes".into()));
        }
        let mut slot = vec![NOT_INTERIOR; grid.len()];
        for (k, &i) in interior_nodes.iter().enumerate() {
            slot[i] = k;
        }
        for &i in &interior_nodes {
            let idx = grid.multi_index(i);
            if idx.iter().zip(&grid.shape).any(|(&k, &m)| k < 2 || k + 2 >= m) {
                return Err(Error::LatticeTooSmall("interior nodes must keep a collar of at least 2 cells".into()));
            }
        }
        Ok(Lattice { grid, collar, interior, interior_nodes, slot, domain })
    }

    /// Same nodes, interior restricted to the closed ball `B_r(c)`.
    pub fn with_ball_interior(&self, center: &[f64], radius: f64) -> Result<Lattice> {
        let interior: Vec<bool> = (0..self.len()).map(|i| dist(&self.grid.center(i), center) <= radius).collect();
        Lattice::assemble(
            self.grid.clone(),
            self.collar,
            interior,
            Domain::Ball { center: center.to_vec(), radius },
        )
    }

    pub fn grid(&self) -> &CellGrid {
        &self.grid
    }

    pub fn h(&self) -> f64 {
        self.grid.h
    }

    pub fn n(&self) -> usize {
        self.grid.dim()
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn shape(&self) -> &[usize] {
        &self.grid.shape
    }

    pub fn collar(&self) -> usize {
        self.collar
    }

    pub fn interior_nodes(&self) -> &[usize] {
        &self.interior_nodes
    }

    pub fn is_interior(&self, i: usize) -> bool {
        self.interior[i]
    }

    /// Position of node `i` among the interior nodes, or [`NOT_INTERIOR`].
    pub fn slot(&self, i: usize) -> usize {
        self.slot[i]
    }

    pub fn coords(&self, i: usize) -> Vec<f64> {
        self.grid.center(i)
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn diameter(&self) -> f64 {
        self.domain.diameter()
    }

    pub fn dist_to_boundary(&self, x: &[f64]) -> f64 {
        self.domain.dist_to_boundary(x)
    }

    /// Corners of the truncation box (union of all lattice cells).
    pub fn outer_box(&self) -> (Vec<f64>, Vec<f64>) {
        self.grid.bounds()
    }

    /// Nearest node to `x`, if inside the lattice.
    pub fn locate(&self, x: &[f64]) -> Option<usize> {
        self.grid.locate(x)
    }

    /// Nodal masses of `m`; fails when mass lands on a non-interior node.
    pub fn nodal_masses(&self, m: &Measure) -> Result<Vec<f64>> {
        let masses = m.nodal_masses(&self.grid)?;
        if let Some(i) = (0..self.len()).find(|&i| !self.interior[i] && masses[i] != 0.0) {
            return Err(Error::InvalidMeasure(format!(
                "measure charges node {:?} outside the domain",
                self.coords(i)
            )));
        }
        Ok(masses)
    }

    /// Cell-centred density representing `values` on interior nodes only.
    pub fn density_measure(&self, values: &[f64]) -> Result<Measure> {
        let v = values
            .iter()
            .enumerate()
            .map(|(i, &x)| if self.interior[i] { x } else { 0.0 })
            .collect();
        Measure::from_density(self.grid.clone(), v)
    }

    /// Interior nodes in the closed ball `B_r(x)`.
    pub fn nodes_in_ball(&self, x: &[f64], r: f64) -> Vec<usize> {
        self.grid.cells_in_ball(x, r)
    }
}

/// Values on every lattice node plus the constant taken beyond the lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    lattice: Arc<Lattice>,
    values: Vec<f64>,
    far: f64,
}

impl GridFunction {
    pub fn new(lattice: Arc<Lattice>, values: Vec<f64>, far: f64) -> Result<Self> {
        if values.len() != lattice.len() {
            return Err(Error::LatticeMismatch(format!(
                "{} values for {} nodes",
                values.len(),
                lattice.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) || !far.is_finite() {
            return Err(invalid("grid function values must be finite"));
        }
        Ok(GridFunction { lattice, values, far })
    }

    pub fn zeros(lattice: Arc<Lattice>) -> Self {
        let n = lattice.len();
        GridFunction { lattice, values: vec![0.0; n], far: 0.0 }
    }

    pub fn constant(lattice: Arc<Lattice>, c: f64) -> Self {
        let n = lattice.len();
        GridFunction { lattice, values: vec![c; n], far: c }
    }

    /// `f` sampled at every node; `far` beyond the lattice.
    pub fn from_fn(lattice: Arc<Lattice>, f: impl Fn(&[f64]) -> f64, far: f64) -> Self {
        let values = (0..lattice.len()).map(|i| f(&lattice.coords(i))).collect();
        GridFunction { lattice, values, far }
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn far(&self) -> f64 {
        self.far
    }

    pub fn set_far(&mut self, far: f64) {
        self.far = far;
    }

    pub fn same_lattice(&self, other: &GridFunction) -> Result<()> {
        if Arc::ptr_eq(&self.lattice, &other.lattice) || *self.lattice == *other.lattice {
            Ok(())
        } else {
            Err(Error::LatticeMismatch("grid functions live on different lattices".into()))
        }
    }

    /// Pointwise map, applied to the far constant too.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction { lattice: self.lattice.clone(), values: self.values.iter().map(|&v| f(v)).collect(), far: f(self.far) }
    }

    pub fn scaled(&self, lambda: f64) -> GridFunction {
        self.map(|v| lambda * v)
    }

    pub fn add(&self, other: &GridFunction) -> Result<GridFunction> {
        self.same_lattice(other)?;
        Ok(GridFunction {
            lattice: self.lattice.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
            far: self.far + other.far,
        })
    }

    /// Multilinear interpolation onto the nodes of `target`; points outside
    /// this lattice take the far constant.
    pub fn interpolate(&self, target: Arc<Lattice>) -> Result<GridFunction> {
        let g = self.lattice.grid();
        let n = g.dim();
        if target.n() != n {
            return Err(Error::LatticeMismatch(format!("{n}-dimensional data on a {}-dimensional lattice", target.n())));
        }
        let mut x = vec![0.0; n];
        let mut base = vec![0usize; n];
        let mut frac = vec![0.0; n];
        let mut corner = vec![0usize; n];
        let values = (0..target.len())
            .map(|i| {
                target.grid().center_into(i, &mut x);
                for k in 0..n {
                    let f = (x[k] - g.origin[k]) / g.h;
                    if f < -1e-9 || f > (g.shape[k] - 1) as f64 + 1e-9 {
                        return self.far;
                    }
                    let b = (f.floor().max(0.0) as usize).min(g.shape[k].saturating_sub(2));
                    base[k] = b;
                    frac[k] = (f - b as f64).clamp(0.0, 1.0);
                }
                (0..1usize << n)
                    .map(|bits| {
                        let mut w = 1.0;
                        for k in 0..n {
                            let up = bits >> k & 1 == 1;
                            corner[k] = (base[k] + up as usize).min(g.shape[k] - 1);
                            w *= if up { frac[k] } else { 1.0 - frac[k] };
                        }
                        if w == 0.0 {
                            0.0
                        } else {
                            w * self.values[g.flat_index(&corner)]
                        }
                    })
                    .sum()
            })
            .collect();
        GridFunction::new(target, values, self.far)
    }

    pub fn sup_norm_interior(&self) -> f64 {
        self.lattice.interior_nodes().iter().map(|&i| self.values[i].abs()).fold(0.0, f64::max)
    }

    /// Copy with non-interior nodes and the far constant taken from `ext`.
    pub fn with_exterior(&self, ext: &Exterior) -> Result<GridFunction> {
        let mut out = self.clone();
        match ext {
            Exterior::Constant(g) => {
                for i in 0..out.values.len() {
                    if !self.lattice.is_interior(i) {
                        out.values[i] = *g;
                    }
                }
                out.far = *g;
            }
            Exterior::Function(f) => {
                if f.values.len() != out.values.len() {
                    return Err(Error::LatticeMismatch("exterior data lives on a different lattice".into()));
                }
                for i in 0..out.values.len() {
                    if !self.lattice.is_interior(i) {
                        out.values[i] = f.values[i];
                    }
                }
                out.far = f.far;
            }
        }
        Ok(out)
    }
}

/// Exterior data: a constant, or the non-interior values of a grid function.
#[derive(Debug, Clone, PartialEq)]
pub enum Exterior {
    Constant(f64),
    Function(GridFunction),
}

impl Exterior {
    pub fn zero() -> Self {
        Exterior::Constant(0.0)
    }
}

/// Pair weights `w_ij` (translation-invariant table times an optional
/// coefficient) and exterior weights `W_i` for interior nodes.
#[derive(Debug, Clone)]
pub struct PairWeights {
    lattice: Arc<Lattice>,
    table: Vec<f64>,
    center: usize,
    obase: Vec<usize>,
    row_len: usize,
    exterior: Vec<f64>,
    row_sums: Vec<f64>,
    coef: Option<Vec<f64>>,
}

/// `|d|^{-(n+sp)}` on the unit lattice, with 4^n-subcell averaging for
/// neighbours (max-norm 1) and zero on the diagonal.
fn unit_weight(d: &[i64], a: f64) -> f64 {
    let maxn = d.iter().map(|c| c.abs()).max().unwrap_or(0);
    if maxn == 0 {
        return 0.0;
    }
    let norm2 = |v: &[f64]| v.iter().map(|c| c * c).sum::<f64>();
    if maxn >= 2 {
        let v: Vec<f64> = d.iter().map(|&c| c as f64).collect();
        return norm2(&v).powf(-a / 2.0);
    }
    // Differences of subcell centres: k/4 with k in -3..=3, multiplicity 4 - |k|.
    let n = d.len();
    let mut total = 0.0;
    let mut k = vec![-3i64; n];
    let mut v = vec![0.0; n];
    loop {
        let mut mult = 1.0;
        for m in 0..n {
            mult *= (4 - k[m].abs()) as f64;
            v[m] = d[m] as f64 + k[m] as f64 / 4.0;
        }
        total += mult * norm2(&v).powf(-a / 2.0);
        let mut m = n;
        loop {
            if m == 0 {
                return total / 16f64.powi(n as i32);
            }
            m -= 1;
            if k[m] < 3 {
                k[m] += 1;
                break;
            }
            k[m] = -3;
        }
    }
}

/// `∫_{R^n \ B} |y - x|^{-(n+sp)} a(x, y) dy` for the box `B = [lo, hi]`
/// through the divergence theorem: `(1/sp) ∮ (y-x)·ν |y-x|^{-(n+sp)} a dA`.
fn exterior_weight(x: &[f64], lo: &[f64], hi: &[f64], sp: f64, coef: &dyn Fn(&[f64]) -> f64) -> f64 {
    let n = x.len();
    let a = n as f64 + sp;
    let mut total = 0.0;
    let mut y = vec![0.0; n];
    for k in 0..n {
        for (plane, sign) in [(lo[k], -1.0), (hi[k], 1.0)] {
            y[k] = plane;
            let normal = sign * (plane - x[k]);
            let free: Vec<usize> = (0..n).filter(|&m| m != k).collect();
            total += normal * face_integral(x, lo, hi, &free, 0, &mut y, a, coef);
        }
    }
    total / sp
}

#[allow(clippy::too_many_arguments)]
fn face_integral(
    x: &[f64],
    lo: &[f64],
    hi: &[f64],
    free: &[usize],
    level: usize,
    y: &mut [f64],
    a: f64,
    coef: &dyn Fn(&[f64]) -> f64,
) -> f64 {
    if level == free.len() {
        let d2: f64 = x.iter().zip(y.iter()).map(|(p, q)| (p - q) * (p - q)).sum();
        return d2.powf(-a / 2.0) * coef(y);
    }
    let m = free[level];
    let foot = x[m].clamp(lo[m], hi[m]);
    let mut piece = |from: f64, to: f64| {
        if to <= from {
            return 0.0;
        }
        adaptive_simpson(
            |t| {
                y[m] = t;
                face_integral(x, lo, hi, free, level + 1, y, a, coef)
            },
            from,
            to,
            1e-10,
            0.0,
        )
    };
    piece(lo[m], foot) + piece(foot, hi[m])
}

impl PairWeights {
    /// Builds the weights for `k` on `lat`.
    pub fn assemble(lat: Arc<Lattice>, k: &KernelSpec) -> Result<PairWeights> {
        let prm = k.params();
        if prm.n() != lat.n() {
            return Err(Error::LatticeMismatch(format!("kernel dimension {} vs lattice {}", prm.n(), lat.n())));
        }
        let n = lat.n();
        let h = lat.h();
        let sp = prm.sp();
        let a = n as f64 + sp;
        let shape = lat.shape().to_vec();
        let tshape: Vec<usize> = shape.iter().map(|m| 2 * m - 1).collect();
        let tgrid_len: usize = tshape.iter().product();
        let scale = h.powf(n as f64 - sp);
        let mut table = vec![0.0; tgrid_len];
        let mut d = vec![0i64; n];
        for (t, w) in table.iter_mut().enumerate() {
            let mut r = t;
            for m in (0..n).rev() {
                d[m] = (r % tshape[m]) as i64 - (shape[m] as i64 - 1);
                r /= tshape[m];
            }
            *w = scale * unit_weight(&d, a);
        }
        let center = {
            let c: Vec<usize> = shape.iter().map(|m| m - 1).collect();
            c.iter().zip(&tshape).fold(0, |acc, (&i, &m)| acc * m + i)
        };
        let obase: Vec<usize> = (0..lat.len())
            .map(|i| {
                let idx = lat.grid().multi_index(i);
                idx.iter().zip(&tshape).fold(0, |acc, (&i, &m)| acc * m + i)
            })
            .collect();
        let row_len = *shape.last().expect("n >= 2");
        let (blo, bhi) = lat.outer_box();
        let nint = lat.interior_nodes().len();
        let custom = !k.has_default_kernel();
        let mut exterior = Vec::with_capacity(nint);
        for &i in lat.interior_nodes() {
            let x = lat.coords(i);
            let w = if custom {
                exterior_weight(&x, &blo, &bhi, sp, &|y: &[f64]| k.coefficient(&x, y))
            } else {
                exterior_weight(&x, &blo, &bhi, sp, &|_: &[f64]| 1.0)
            };
            exterior.push(h.powi(n as i32) * w);
        }
        let coef = if custom {
            let nn = lat.len();
            let mut c = vec![0.0; nint * nn];
            for (s, &i) in lat.interior_nodes().iter().enumerate() {
                let x = lat.coords(i);
                for j in 0..nn {
                    if j != i {
                        c[s * nn + j] = k.coefficient(&x, &lat.coords(j));
                    }
                }
            }
            Some(c)
        } else {
            None
        };
        let mut pw = PairWeights { lattice: lat, table, center, obase, row_len, exterior, row_sums: Vec::new(), coef };
        pw.row_sums = (0..nint)
            .map(|s| {
                let i = pw.lattice.interior_nodes()[s];
                let mut acc = 0.0;
                pw.for_each_row(i, |_, w, c| {
                    acc += match c {
                        None => w.iter().sum::<f64>(),
                        Some(c) => w.iter().zip(c).map(|(a, b)| a * b).sum::<f64>(),
                    }
                });
                acc
            })
            .collect();
        Ok(pw)
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    /// `w_ij` for an interior node `i` and any node `j`.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        let base = self.table[self.obase[j] + self.center - self.obase[i]];
        match &self.coef {
            None => base,
            Some(c) => {
                let s = self.lattice.slot(i);
                if s == NOT_INTERIOR {
                    let sj = self.lattice.slot(j);
                    base * c[sj * self.lattice.len() + i]
                } else {
                    base * c[s * self.lattice.len() + j]
                }
            }
        }
    }

    /// `W_i` for the interior slot `s`.
    pub fn exterior_weight(&self, s: usize) -> f64 {
        self.exterior[s]
    }

    /// `Σ_j w_ij` over all lattice nodes, for the interior slot `s`.
    pub fn row_sum(&self, s: usize) -> f64 {
        self.row_sums[s]
    }

    /// Visits the weights from interior node `i` to every node, one lattice
    /// row at a time: `f(first node of row, table weights, coefficients)`.
    #[inline]
    pub fn for_each_row(&self, i: usize, mut f: impl FnMut(usize, &[f64], Option<&[f64]>)) {
        let nn = self.lattice.len();
        let l = self.row_len;
        let shift = self.center - self.obase[i];
        let coef = self.coef.as_ref().map(|c| {
            let s = self.lattice.slot(i);
            &c[s * nn..(s + 1) * nn]
        });
        for start in (0..nn).step_by(l) {
            let t = self.obase[start] + shift;
            f(start, &self.table[t..t + l], coef.map(|c| &c[start..start + l]));
        }
    }
}

/// `2 Σ_j Φ(u_i - u_j) w_ij + 2 Φ(u_i - g) W_i` on interior nodes, zero elsewhere.
pub fn apply_operator(u: &GridFunction, w: &PairWeights, k: &KernelSpec) -> Result<GridFunction> {
    let lat = w.lattice();
    if u.values.len() != lat.len() {
        return Err(Error::LatticeMismatch("operand and weights live on different lattices".into()));
    }
    let mut out = vec![0.0; lat.len()];
    for (s, &i) in lat.interior_nodes().iter().enumerate() {
        let ui = u.values[i];
        let mut acc = 0.0;
        w.for_each_row(i, |start, wr, c| {
            let uj = &u.values[start..start + wr.len()];
            match c {
                None => {
                    for (wv, v) in wr.iter().zip(uj) {
                        acc += k.phi(ui - v) * wv;
                    }
                }
                Some(c) => {
                    for ((wv, v), cv) in wr.iter().zip(uj).zip(c) {
                        acc += k.phi(ui - v) * wv * cv;
                    }
                }
            }
        });
        out[i] = 2.0 * acc + 2.0 * k.phi(ui - u.far) * w.exterior_weight(s);
    }
    GridFunction::new(lat.clone(), out, 0.0)
}

/// Discrete energy with nodal masses `mu` (one per node).
pub fn energy_nodal(u: &GridFunction, mu: &[f64], w: &PairWeights, k: &KernelSpec) -> f64 {
    let lat = w.lattice();
    let mut pairs = 0.0;
    let mut ext = 0.0;
    let mut lin = 0.0;
    for (s, &i) in lat.interior_nodes().iter().enumerate() {
        let ui = u.values[i];
        w.for_each_row(i, |start, wr, c| {
            for (o, &wv) in wr.iter().enumerate() {
                let j = start + o;
                if wv == 0.0 {
                    continue;
                }
                let factor = if lat.is_interior(j) { 1.0 } else { 2.0 };
                let cv = c.map_or(1.0, |c| c[o]);
                pairs += factor * k.psi(ui - u.values[j]) * wv * cv;
            }
        });
        ext += 2.0 * k.psi(ui - u.far) * w.exterior_weight(s);
        lin += ui * mu[i];
    }
    pairs + ext - lin
}

/// Discrete energy of `u` against the nodal masses of `m`.
pub fn energy(u: &GridFunction, m: &Measure, w: &PairWeights, k: &KernelSpec) -> Result<f64> {
    let mu = w.lattice().nodal_masses(m)?;
    Ok(energy_nodal(u, &mu, w, k))
}

/// `Tail(f; x, r)` with the default kernel: lattice cells outside the closed
/// ball plus the exact contribution of the far constant.
pub fn tail(f: &GridFunction, x: &[f64], r: f64, prm: &Params) -> Result<f64> {
    if !(r > 0.0) {
        return Err(invalid(format!("tail radius r = {r} must be positive")));
    }
    let lat = f.lattice();
    let n = lat.n();
    let sp = prm.sp();
    let p = prm.p();
    let a = n as f64 + sp;
    let vol = lat.grid().cell_volume();
    let gp = f.far.abs().powf(p - 1.0);
    let mut acc = gp * unit_sphere_area(n) * r.powf(-sp) / sp;
    let mut c = vec![0.0; n];
    for (j, &v) in f.values.iter().enumerate() {
        lat.grid().center_into(j, &mut c);
        let d = dist(&c, x);
        if d > r {
            acc += (v.abs().powf(p - 1.0) - gp) * d.powf(-a) * vol;
        }
    }
    Ok((r.powf(sp) * acc.max(0.0)).powf(1.0 / (p - 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn prm(s: f64, p: f64) -> Params {
        Params::new(2, s, p, 1.0).unwrap()
    }

    fn unit(h: f64) -> Arc<Lattice> {
        Arc::new(Lattice::build(&[0.0, 0.0], &[1.0, 1.0], h, 2).unwrap())
    }

    #[test]
    fn build_examples() {
        let l = unit(0.25);
        assert_eq!(l.interior_nodes().len(), 25);
        assert_eq!(l.shape(), &[9, 9]);
        assert!(matches!(Lattice::build(&[0.0, 0.0], &[1.0, 1.0], 0.6, 2), Err(Error::LatticeTooSmall(_))));
        let r = Lattice::build(&[0.0, 0.0], &[2.0, 1.0], 0.25, 2).unwrap();
        assert_eq!(r.interior_nodes().len(), 45);
        assert_eq!(r.shape(), &[13, 9]);
        assert!(Lattice::build(&[0.0, 0.0], &[0.0, 1.0], 0.25, 2).is_err());
        // Row-major, last axis fastest.
        assert_eq!(r.coords(1), vec![-0.5, -0.25]);
    }

    #[test]
    fn interpolation_reproduces_bilinear_data() {
        let f = |x: &[f64]| 1.0 + 2.0 * x[0] - x[1] + 0.5 * x[0] * x[1];
        let coarse = GridFunction::from_fn(unit(0.25), f, 7.0);
        let wide = Arc::new(Lattice::build(&[-1.0, 0.0], &[1.0, 1.0], 0.125, 2).unwrap());
        let fine = coarse.interpolate(wide.clone()).unwrap();
        for i in 0..wide.len() {
            let x = wide.coords(i);
            let want = if x[0] < -0.5 - 1e-12 { 7.0 } else { f(&x) };
            assert!((fine.values()[i] - want).abs() < 1e-12, "{x:?}");
        }
    }

    #[test]
    fn weight_formula_and_symmetry() {
        let lat = unit(0.1);
        let k = KernelSpec::fractional_p_laplacian(prm(0.5, 2.0));
        let w = PairWeights::assemble(lat.clone(), &k).unwrap();
        let i = lat.locate(&[0.2, 0.3]).unwrap();
        let j = lat.locate(&[0.5, 0.7]).unwrap();
        let d: f64 = 0.5;
        let expect = d.powf(-3.0) * 0.1f64.powi(4);
        assert!((w.weight(i, j) - expect).abs() < 1e-12 * expect);
        assert_eq!(w.weight(i, j), w.weight(j, i));
        assert_eq!(w.weight(i, i), 0.0);
        // Neighbours are averaged, so they differ from the point value.
        let nb = lat.locate(&[0.3, 0.3]).unwrap();
        let pt = 0.1f64.powf(-3.0) * 0.1f64.powi(4);
        assert!(w.weight(i, nb) > 0.0 && (w.weight(i, nb) - pt).abs() > 1e-3 * pt);
    }

    #[test]
    fn annulus_sums_converge() {
        let x = [0.0, 0.0];
        let k = |h: f64| {
            let lat = Arc::new(Lattice::build(&[-1.0, -1.0], &[1.0, 1.0], h, 2).unwrap());
            let spec = KernelSpec::fractional_p_laplacian(prm(0.5, 2.0));
            let w = PairWeights::assemble(lat.clone(), &spec).unwrap();
            let i = lat.locate(&x).unwrap();
            (0..lat.len())
                .filter(|&j| {
                    let d = dist(&lat.coords(j), &x);
                    (0.25..=0.5).contains(&d)
                })
                .map(|j| w.weight(i, j) / h.powi(2))
                .sum::<f64>()
        };
        let exact = 2.0 * PI * (1.0 / 0.25 - 1.0 / 0.5);
        let (a, b) = (k(1.0 / 40.0), k(1.0 / 80.0));
        assert!((a - b).abs() / b < 0.02, "{a} {b}");
        assert!((b - exact).abs() / exact < 0.02, "{b} {exact}");
    }

    #[test]
    fn exterior_weight_matches_polar_oracle() {
        let lat = unit(0.125);
        let spec = KernelSpec::fractional_p_laplacian(prm(0.5, 2.0));
        let w = PairWeights::assemble(lat.clone(), &spec).unwrap();
        let (lo, hi) = lat.outer_box();
        for x in [[0.5, 0.5], [0.125, 0.75]] {
            let i = lat.locate(&x).unwrap();
            let s = lat.slot(i);
            // ∫_0^{2π} ρ(θ)^{-sp}/sp dθ, ρ the ray length to the box boundary.
            let rho = |th: f64| {
                let (c, sn) = (th.cos(), th.sin());
                let tx = if c > 0.0 { (hi[0] - x[0]) / c } else if c < 0.0 { (lo[0] - x[0]) / c } else { f64::INFINITY };
                let ty = if sn > 0.0 { (hi[1] - x[1]) / sn } else if sn < 0.0 { (lo[1] - x[1]) / sn } else { f64::INFINITY };
                tx.min(ty)
            };
            let oracle = 0.125 * 0.125 * adaptive_simpson(|th| 1.0 / rho(th), 0.0, 2.0 * PI, 1e-12, 0.0);
            assert!((w.exterior_weight(s) - oracle).abs() < 1e-8 * oracle, "{} {oracle}", w.exterior_weight(s));
        }
    }

    #[test]
    fn exterior_weight_matches_lattice_sum() {
        // W_i stands for the pair weights of the nodes beyond the lattice.
        let h = 0.125;
        let lat = unit(h);
        let w = PairWeights::assemble(lat.clone(), &KernelSpec::fractional_p_laplacian(prm(0.5, 2.0))).unwrap();
        let (lo, hi) = lat.outer_box();
        let x = [0.25, 0.5];
        let s = lat.slot(lat.locate(&x).unwrap());
        let reach = 600i64;
        let mut sum = 0.0;
        for a in -reach..=reach {
            for b in -reach..=reach {
                let y = [x[0] + a as f64 * h, x[1] + b as f64 * h];
                let inside = (0..2).all(|m| y[m] > lo[m] && y[m] < hi[m]);
                if !inside {
                    sum += h * ((a * a + b * b) as f64).powf(-1.5);
                }
            }
        }
        // Beyond the square of half-width reach·h: about ∫ |y|^{-3} dy h^2 over
        // the complement of the inscribed disc.
        sum += h * h * 2.0 * PI / (reach as f64 * h);
        assert!((w.exterior_weight(s) - sum).abs() < 0.02 * sum, "{} {sum}", w.exterior_weight(s));
    }

    #[test]
    fn operator_basics() {
        let lat = unit(0.2);
        for p in [1.5, 2.0, 3.0] {
            let k = KernelSpec::fractional_p_laplacian(prm(0.5, p));
            let w = PairWeights::assemble(lat.clone(), &k).unwrap();
            let z = apply_operator(&GridFunction::zeros(lat.clone()), &w, &k).unwrap();
            assert!(z.values().iter().all(|&v| v == 0.0));
            let c = apply_operator(&GridFunction::constant(lat.clone(), 2.5), &w, &k).unwrap();
            assert!(c.values().iter().all(|&v| v.abs() < 1e-12));
        }
        let k = KernelSpec::fractional_p_laplacian(prm(0.5, 2.0));
        let w = PairWeights::assemble(lat.clone(), &k).unwrap();
        let u = GridFunction::from_fn(lat.clone(), |x| x[0] * x[1], 0.0);
        let v = GridFunction::from_fn(lat.clone(), |x| (3.0 * x[0]).sin(), 0.3);
        let lhs = apply_operator(&u.add(&v).unwrap(), &w, &k).unwrap();
        let a = apply_operator(&u, &w, &k).unwrap();
        let b = apply_operator(&v, &w, &k).unwrap();
        for i in 0..lat.len() {
            assert!((lhs.values()[i] - a.values()[i] - b.values()[i]).abs() < 1e-12 * (1.0 + lhs.values()[i].abs()));
        }
    }

    #[test]
    fn energy_quadratic_identity() {
        let lat = unit(0.2);
        let k = KernelSpec::fractional_p_laplacian(prm(0.6, 2.0));
        let w = PairWeights::assemble(lat.clone(), &k).unwrap();
        let u = GridFunction::from_fn(lat.clone(), |x| x[0] - x[1] * x[1], 0.0)
            .with_exterior(&Exterior::zero())
            .unwrap();
        let mu: Vec<f64> = (0..lat.len()).map(|i| if lat.is_interior(i) { (i % 7) as f64 * 0.01 } else { 0.0 }).collect();
        let au = apply_operator(&u, &w, &k).unwrap();
        let quad: f64 = au.values().iter().zip(u.values()).map(|(a, b)| a * b).sum();
        let lin: f64 = mu.iter().zip(u.values()).map(|(a, b)| a * b).sum();
        let e = energy_nodal(&u, &mu, &w, &k);
        assert!((e - (0.5 * quad - lin)).abs() < 1e-10 * (1.0 + e.abs()), "{e} {}", 0.5 * quad - lin);
        let z = GridFunction::zeros(lat.clone());
        assert_eq!(energy_nodal(&z, &mu, &w, &k), 0.0);
    }

    #[test]
    fn tail_examples() {
        let lat = Arc::new(Lattice::build(&[-1.0, -1.0], &[1.0, 1.0], 0.05, 2).unwrap());
        let p = prm(0.5, 2.0);
        let one = GridFunction::constant(lat.clone(), 1.0);
        for r in [0.1, 0.4] {
            let t = tail(&one, &[0.0, 0.0], r, &p).unwrap();
            assert!((t - 2.0 * PI).abs() < 1e-12, "{t}");
        }
        let bump = GridFunction::from_fn(lat.clone(), |x| if dist(x, &[0.0, 0.0]) <= 0.3 { 1.0 } else { 0.0 }, 0.0);
        assert_eq!(tail(&bump, &[0.0, 0.0], 0.3, &p).unwrap(), 0.0);
        let f = GridFunction::from_fn(lat.clone(), |x| (x[0] + 2.0 * x[1]).cos(), 0.0);
        let p3 = prm(0.5, 3.0);
        let a = tail(&f, &[0.1, 0.0], 0.2, &p3).unwrap();
        let b = tail(&f.scaled(3.0), &[0.1, 0.0], 0.2, &p3).unwrap();
        assert!((b - 3.0 * a).abs() < 1e-12 * b);
    }
}
