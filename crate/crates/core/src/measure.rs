//! Finite Radon measures as point masses plus a piecewise-constant density.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{dist, CellGrid};
use crate::quadrature::{adaptive_simpson, unit_sphere_area};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub x: Vec<f64>,
    pub mass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    #[default]
    Nonnegative,
    Signed,
}

/// Density values per cell of a [`CellGrid`] (value times `h^n` is the cell mass).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Density {
    #[serde(flatten)]
    pub grid: CellGrid,
    pub values: Vec<f64>,
}

/// A finite measure: atoms plus an optional cell density.
///
/// An empty measure with no atoms and no density has dimension 0 and is
/// compatible with every dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMeasure", into = "RawMeasure")]
pub struct Measure {
    atoms: Vec<Atom>,
    density: Option<Density>,
    sign: Sign,
}

#[derive(Serialize, Deserialize)]
struct RawMeasure {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    atoms: Vec<Atom>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    density: Option<Density>,
    #[serde(default)]
    sign: Sign,
}

impl TryFrom<RawMeasure> for Measure {
    type Error = Error;
    fn try_from(r: RawMeasure) -> Result<Self> {
        Measure::new(r.atoms, r.density, r.sign)
    }
}

impl From<Measure> for RawMeasure {
    fn from(m: Measure) -> Self {
        RawMeasure { atoms: m.atoms, density: m.density, sign: m.sign }
    }
}

impl Measure {
    pub fn new(atoms: Vec<Atom>, density: Option<Density>, sign: Sign) -> Result<Self> {
        let mut dim = 0;
        for a in &atoms {
            if a.x.is_empty() || (dim != 0 && a.x.len() != dim) {
                return Err(Error::InvalidMeasure("atoms have inconsistent dimensions".into()));
            }
            dim = a.x.len();
            if !a.mass.is_finite() || a.x.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidMeasure("non-finite atom".into()));
            }
            if sign == Sign::Nonnegative && a.mass < 0.0 {
                return Err(Error::InvalidMeasure(format!("negative atom mass {} in a nonnegative measure", a.mass)));
            }
        }
        if let Some(d) = &density {
            let g = CellGrid::new(d.grid.origin.clone(), d.grid.h, d.grid.shape.clone())
                .map_err(|e| Error::InvalidMeasure(e.to_string()))?;
            if dim != 0 && g.dim() != dim {
                return Err(Error::InvalidMeasure("density and atoms have different dimensions".into()));
            }
            if d.values.len() != g.len() {
                return Err(Error::InvalidMeasure(format!(
                    "density has {} values for {} cells",
                    d.values.len(),
                    g.len()
                )));
            }
            if d.values.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidMeasure("non-finite density value".into()));
            }
            if sign == Sign::Nonnegative && d.values.iter().any(|&v| v < 0.0) {
                return Err(Error::InvalidMeasure("negative density in a nonnegative measure".into()));
            }
        }
        Ok(Measure { atoms, density, sign })
    }

    pub fn zero() -> Self {
        Measure { atoms: Vec::new(), density: None, sign: Sign::Nonnegative }
    }

    pub fn dirac(x: Vec<f64>, mass: f64) -> Result<Self> {
        let sign = if mass < 0.0 { Sign::Signed } else { Sign::Nonnegative };
        Measure::new(vec![Atom { x, mass }], None, sign)
    }

    pub fn atoms_only(atoms: Vec<Atom>) -> Result<Self> {
        let sign = if atoms.iter().any(|a| a.mass < 0.0) { Sign::Signed } else { Sign::Nonnegative };
        Measure::new(atoms, None, sign)
    }

    pub fn from_density(grid: CellGrid, values: Vec<f64>) -> Result<Self> {
        let sign = if values.iter().any(|&v| v < 0.0) { Sign::Signed } else { Sign::Nonnegative };
        Measure::new(Vec::new(), Some(Density { grid, values }), sign)
    }

    /// Constant density `value` on every cell of `grid`.
    pub fn uniform(grid: CellGrid, value: f64) -> Result<Self> {
        let values = vec![value; grid.len()];
        Measure::from_density(grid, values)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn density(&self) -> Option<&Density> {
        self.density.as_ref()
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    /// Ambient dimension, or 0 for an empty measure.
    pub fn dim(&self) -> usize {
        self.atoms
            .first()
            .map(|a| a.x.len())
            .or_else(|| self.density.as_ref().map(|d| d.grid.dim()))
            .unwrap_or(0)
    }

    pub fn check_dim(&self, n: usize) -> Result<()> {
        let d = self.dim();
        if d == 0 || d == n {
            Ok(())
        } else {
            Err(Error::InvalidMeasure(format!("measure lives in dimension {d}, expected {n}")))
        }
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.iter().all(|a| a.mass == 0.0)
            && self.density.as_ref().is_none_or(|d| d.values.iter().all(|&v| v == 0.0))
    }

    /// `Σ atom masses + Σ cell values · h^n`.
    pub fn total_mass(&self) -> f64 {
        let a: f64 = self.atoms.iter().map(|a| a.mass).sum();
        let d = self.density.as_ref().map_or(0.0, |d| d.values.iter().sum::<f64>() * d.grid.cell_volume());
        a + d
    }

    pub fn total_variation(&self) -> f64 {
        let a: f64 = self.atoms.iter().map(|a| a.mass.abs()).sum();
        let d = self
            .density
            .as_ref()
            .map_or(0.0, |d| d.values.iter().map(|v| v.abs()).sum::<f64>() * d.grid.cell_volume());
        a + d
    }

    fn ball_mass_rule(&self, x: &[f64], t: f64, closed: bool) -> f64 {
        let inside = |d: f64| if closed { d <= t } else { d < t };
        let mut m: f64 = self.atoms.iter().filter(|a| inside(dist(&a.x, x))).map(|a| a.mass.abs()).sum();
        if let Some(d) = &self.density {
            let vol = d.grid.cell_volume();
            for c in d.grid.cells_in_ball(x, t) {
                let v = d.values[c];
                if v != 0.0 && (closed || dist(&d.grid.center(c), x) < t) {
                    m += v.abs() * vol;
                }
            }
        }
        m
    }

    /// `|μ|(closed B_t(x))`, density cells counted when their centre is in the ball.
    pub fn ball_mass(&self, x: &[f64], t: f64) -> f64 {
        self.ball_mass_rule(x, t, true)
    }

    /// `|μ|(open B_t(x))` with the same cell-centre rule.
    pub fn ball_mass_open(&self, x: &[f64], t: f64) -> f64 {
        self.ball_mass_rule(x, t, false)
    }

    /// `λ μ`.
    pub fn scaled(&self, lambda: f64) -> Measure {
        let atoms = self.atoms.iter().map(|a| Atom { x: a.x.clone(), mass: lambda * a.mass }).collect();
        let density = self
            .density
            .as_ref()
            .map(|d| Density { grid: d.grid.clone(), values: d.values.iter().map(|v| lambda * v).collect() });
        let sign = if lambda < 0.0 { Sign::Signed } else { self.sign };
        Measure { atoms, density, sign }
    }

    /// `μ + ν`. Densities must share a grid.
    pub fn add(&self, other: &Measure) -> Result<Measure> {
        if self.dim() != 0 && other.dim() != 0 && self.dim() != other.dim() {
            return Err(Error::InvalidMeasure("cannot add measures of different dimension".into()));
        }
        let mut atoms = self.atoms.clone();
        atoms.extend(other.atoms.iter().cloned());
        let density = match (&self.density, &other.density) {
            (None, None) => None,
            (Some(d), None) | (None, Some(d)) => Some(d.clone()),
            (Some(a), Some(b)) => {
                if a.grid != b.grid {
                    return Err(Error::InvalidMeasure("densities live on different grids".into()));
                }
                Some(Density {
                    grid: a.grid.clone(),
                    values: a.values.iter().zip(&b.values).map(|(x, y)| x + y).collect(),
                })
            }
        };
        let sign = if self.sign == Sign::Signed || other.sign == Sign::Signed {
            Sign::Signed
        } else {
            Sign::Nonnegative
        };
        Measure::new(atoms, density, sign)
    }

    /// `χ_{B̄_t(x)} μ` with the cell-centre rule.
    pub fn restrict_to_ball(&self, x: &[f64], t: f64) -> Measure {
        let atoms = self.atoms.iter().filter(|a| dist(&a.x, x) <= t).cloned().collect();
        let density = self.density.as_ref().map(|d| {
            let mut values = vec![0.0; d.values.len()];
            for c in d.grid.cells_in_ball(x, t) {
                values[c] = d.values[c];
            }
            Density { grid: d.grid.clone(), values }
        });
        Measure { atoms, density, sign: self.sign }
    }

    /// Largest distance from `x` to the support (atoms and nonzero cells, whole cells).
    pub fn support_radius(&self, x: &[f64]) -> f64 {
        let mut r = self.atoms.iter().filter(|a| a.mass != 0.0).map(|a| dist(&a.x, x)).fold(0.0, f64::max);
        if let Some(d) = &self.density {
            let half = 0.5 * d.grid.h;
            let mut c = vec![0.0; d.grid.dim()];
            for (i, &v) in d.values.iter().enumerate() {
                if v != 0.0 {
                    d.grid.center_into(i, &mut c);
                    let far: f64 = c.iter().zip(x).map(|(a, b)| ((a - b).abs() + half).powi(2)).sum();
                    r = r.max(far.sqrt());
                }
            }
        }
        r
    }

    /// Nodal masses on `grid`: each atom and each density cell goes to the
    /// nearest cell centre. Fails if some mass falls outside the grid.
    pub fn nodal_masses(&self, grid: &CellGrid) -> Result<Vec<f64>> {
        self.check_dim(grid.dim())?;
        let mut out = vec![0.0; grid.len()];
        for a in &self.atoms {
            let k = grid
                .locate(&a.x)
                .ok_or_else(|| Error::InvalidMeasure(format!("atom at {:?} lies outside the lattice", a.x)))?;
            out[k] += a.mass;
        }
        if let Some(d) = &self.density {
            let vol = d.grid.cell_volume();
            if d.grid.h == grid.h && d.grid.shape == grid.shape && d.grid.origin == grid.origin {
                for (o, v) in out.iter_mut().zip(&d.values) {
                    *o += v * vol;
                }
            } else {
                let mut c = vec![0.0; d.grid.dim()];
                for (i, &v) in d.values.iter().enumerate() {
                    if v == 0.0 {
                        continue;
                    }
                    d.grid.center_into(i, &mut c);
                    let k = grid
                        .locate(&c)
                        .ok_or_else(|| Error::InvalidMeasure(format!("density cell at {c:?} lies outside the lattice")))?;
                    out[k] += v * vol;
                }
            }
        }
        Ok(out)
    }
}

/// Standard mollifier `ρ_j(x) = j^n ρ(j x)` with `ρ = C exp(-1/(1-|x|^2))` on the unit ball.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MollifierSchedule {
    n: usize,
    j: u32,
    norm: f64,
}

impl MollifierSchedule {
    pub fn new(n: usize, j: u32) -> Result<Self> {
        if j == 0 {
            return Err(crate::error::invalid("mollifier index j must be >= 1"));
        }
        let radial = adaptive_simpson(
            |r| if r >= 1.0 { 0.0 } else { (-1.0 / (1.0 - r * r)).exp() * r.powi(n as i32 - 1) },
            0.0,
            1.0,
            1e-13,
            1e-300,
        );
        Ok(MollifierSchedule { n, j, norm: 1.0 / (unit_sphere_area(n) * radial) })
    }

    pub fn radius(&self) -> f64 {
        1.0 / self.j as f64
    }

    pub fn index(&self) -> u32 {
        self.j
    }

    /// `ρ_j(z)`.
    pub fn eval(&self, z: &[f64]) -> f64 {
        let j = self.j as f64;
        let r2: f64 = z.iter().map(|c| c * c).sum::<f64>() * j * j;
        if r2 >= 1.0 {
            0.0
        } else {
            j.powi(self.n as i32) * self.norm * (-1.0 / (1.0 - r2)).exp()
        }
    }
}

/// `μ * ρ_j` sampled on `target` as a density. Each source is renormalised on
/// the target nodes so total mass is preserved exactly.
pub fn mollify(m: &Measure, sched: &MollifierSchedule, target: &CellGrid) -> Result<Measure> {
    m.check_dim(target.dim())?;
    let r = sched.radius();
    let vol = target.cell_volume();
    let mut values = vec![0.0; target.len()];
    let spread = |x: &[f64], mass: f64, values: &mut [f64]| -> Result<()> {
        if mass == 0.0 {
            return Ok(());
        }
        if !target.contains_ball(x, r) {
            return Err(Error::LatticeTooSmall(format!(
                "mollified support B_{r}({x:?}) leaves the target lattice"
            )));
        }
        let cells = target.cells_in_ball(x, r);
        let mut c = vec![0.0; target.dim()];
        let weights: Vec<f64> = cells
            .iter()
            .map(|&k| {
                target.center_into(k, &mut c);
                let z: Vec<f64> = c.iter().zip(x).map(|(a, b)| a - b).collect();
                sched.eval(&z)
            })
            .collect();
        let total: f64 = weights.iter().sum();
        if total > 0.0 {
            for (&k, w) in cells.iter().zip(&weights) {
                values[k] += mass * w / total / vol;
            }
        } else {
            let k = target.locate(x).expect("ball inside grid");
            values[k] += mass / vol;
        }
        Ok(())
    };
    for a in m.atoms() {
        spread(&a.x, a.mass, &mut values)?;
    }
    if let Some(d) = m.density() {
        let cv = d.grid.cell_volume();
        let mut c = vec![0.0; d.grid.dim()];
        for (i, &v) in d.values.iter().enumerate() {
            if v != 0.0 {
                d.grid.center_into(i, &mut c);
                let x = c.clone();
                spread(&x, v * cv, &mut values)?;
            }
        }
    }
    let sign = m.sign();
    Measure::new(Vec::new(), Some(Density { grid: target.clone(), values }), sign)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeakLimitBall {
    pub x: Vec<f64>,
    pub t: f64,
    pub limit_closed: f64,
    pub tail_max_open: f64,
    pub excess: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeakLimitReport {
    pub tail_from: usize,
    pub balls: Vec<WeakLimitBall>,
    pub pass: bool,
}

/// Checks `max_{j in tail} |μ_j|(B) <= |μ|(B̄) + 1e-6` for open balls `B`,
/// the tail being the second half of the sequence.
pub fn weak_limit_check(seq: &[Measure], limit: &Measure, balls: &[(Vec<f64>, f64)]) -> Result<WeakLimitReport> {
    if seq.is_empty() {
        return Err(crate::error::invalid("weak_limit_check needs a nonempty sequence"));
    }
    let tail_from = seq.len() / 2;
    let rows: Vec<WeakLimitBall> = balls
        .iter()
        .map(|(x, t)| {
            let limit_closed = limit.ball_mass(x, *t);
            let tail_max_open = seq[tail_from..].iter().map(|m| m.ball_mass_open(x, *t)).fold(0.0, f64::max);
            let excess = tail_max_open - limit_closed;
            WeakLimitBall { x: x.clone(), t: *t, limit_closed, tail_max_open, excess, pass: excess <= 1e-6 }
        })
        .collect();
    let pass = rows.iter().all(|b| b.pass);
    Ok(WeakLimitReport { tail_from, balls: rows, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn unit_square(m: usize) -> CellGrid {
        let h = 1.0 / m as f64;
        CellGrid::new(vec![0.5 * h, 0.5 * h], h, vec![m, m]).unwrap()
    }

    #[test]
    fn ball_mass_examples() {
        let d = Measure::dirac(vec![0.0, 0.0], 1.0).unwrap();
        assert_eq!(d.ball_mass(&[0.0, 0.0], 1.0), 1.0);
        let far = Measure::dirac(vec![5.0, 5.0], 1.0).unwrap();
        assert_eq!(far.ball_mass(&[0.0, 0.0], 1.0), 0.0);
        let mut prev = f64::INFINITY;
        for m in [100, 200, 400, 800] {
            let u = Measure::uniform(unit_square(m), 1.0).unwrap();
            let err = (u.ball_mass(&[0.5, 0.5], 0.1) - PI * 0.01).abs();
            assert!(err <= prev * 1.5 + 1e-12);
            prev = err;
        }
        assert!(prev < 2e-4, "{prev}");
    }

    #[test]
    fn closed_versus_open() {
        let d = Measure::dirac(vec![1.0, 0.0], 2.0).unwrap();
        assert_eq!(d.ball_mass(&[0.0, 0.0], 1.0), 2.0);
        assert_eq!(d.ball_mass_open(&[0.0, 0.0], 1.0), 0.0);
    }

    #[test]
    fn json_roundtrip_and_validation() {
        let text = r#"{"atoms":[{"x":[0.1,0.2],"mass":0.5}],
            "density":{"origin":[0.0,0.0],"h":0.5,"shape":[2,2],"values":[1,2,3,4]},"sign":"nonnegative"}"#;
        let m: Measure = serde_json::from_str(text).unwrap();
        assert!((m.total_mass() - (0.5 + 10.0 * 0.25)).abs() < 1e-15);
        let back: Measure = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(back, m);
        let bad = r#"{"atoms":[{"x":[0.0,0.0],"mass":-1}],"sign":"nonnegative"}"#;
        assert!(serde_json::from_str::<Measure>(bad).is_err());
        let short = r#"{"density":{"origin":[0.0,0.0],"h":0.5,"shape":[2,2],"values":[1]}}"#;
        assert!(serde_json::from_str::<Measure>(short).is_err());
    }

    #[test]
    fn mollifier_unit_mass() {
        let s = MollifierSchedule::new(2, 3).unwrap();
        let m = 600;
        let h = 2.0 / m as f64;
        let mut tot = 0.0;
        for i in 0..m {
            for j in 0..m {
                let z = [-1.0 + (i as f64 + 0.5) * h, -1.0 + (j as f64 + 0.5) * h];
                tot += s.eval(&z) * h * h;
            }
        }
        assert!((tot - 1.0).abs() < 1e-6, "{tot}");
    }

    #[test]
    fn mollify_dirac() {
        let h = 0.02;
        let grid = CellGrid::new(vec![-1.0, -1.0], h, vec![101, 101]).unwrap();
        let d = Measure::dirac(vec![0.0, 0.0], 1.0).unwrap();
        let s = MollifierSchedule::new(2, 4).unwrap();
        let md = mollify(&d, &s, &grid).unwrap();
        assert!((md.total_mass() - 1.0).abs() < 1e-12);
        assert!((md.ball_mass(&[0.0, 0.0], 0.5) - 1.0).abs() < 1e-12);
        assert!(md.ball_mass(&[0.0, 0.0], 0.1) < 1.0);
        assert!(mollify(&Measure::zero(), &s, &grid).unwrap().is_zero());
        let off = Measure::dirac(vec![0.5, 0.0], 1.0).unwrap();
        let s1 = MollifierSchedule::new(2, 1).unwrap();
        assert!(matches!(mollify(&off, &s1, &grid), Err(Error::LatticeTooSmall(_))));
    }

    #[test]
    fn weak_limit_examples() {
        let h = 0.01;
        let grid = CellGrid::new(vec![-1.0, -1.0], h, vec![201, 201]).unwrap();
        let d = Measure::dirac(vec![0.0, 0.0], 1.0).unwrap();
        let seq: Vec<Measure> = (2..8)
            .map(|j| mollify(&d, &MollifierSchedule::new(2, j).unwrap(), &grid).unwrap())
            .collect();
        let rep = weak_limit_check(&seq, &d, &[(vec![0.0, 0.0], 0.5), (vec![0.5, 0.0], 0.5)]).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.balls[0].limit_closed, 1.0);
        assert!((rep.balls[0].tail_max_open - 1.0).abs() < 1e-12);
        assert!(rep.balls[1].tail_max_open < 0.6);
        let zeros = vec![Measure::zero(); 3];
        let rep = weak_limit_check(&zeros, &Measure::zero(), &[(vec![0.0, 0.0], 1.0)]).unwrap();
        assert!(rep.pass && rep.balls[0].excess == 0.0);
    }
}
