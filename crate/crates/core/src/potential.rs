//! Truncated Wolff and Riesz potentials, fractional maximal functions, and
//! the Riesz/Bessel kernels with their convolutions.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{invalid, Error, Result};
use crate::geometry::{ball_box_volume, box_distance_range, dist};
use crate::measure::Measure;
use crate::params::Params;
use crate::quadrature::{golden_section_max, integrate_dt_over_t, logspace, unit_ball_volume, unit_sphere_area};
use crate::special::h_eta_unchecked;

/// Subcells per axis used for partial cells when `n >= 3`.
const SUBCELLS: usize = 8;

/// `t ↦ |μ|(B_t(x))` for a fixed centre, with density cells measured by
/// their exact intersection with the ball (so the profile is continuous
/// apart from atom jumps).
#[derive(Debug, Clone)]
pub struct MassProfile {
    n: usize,
    /// `(distance, |mass|)` sorted by distance.
    atoms: Vec<(f64, f64)>,
    /// Per cell `(dmin, dmax, |value| * vol)` sorted by `dmax`, with geometry.
    cells: Vec<(f64, f64, f64)>,
    boxes: Vec<f64>,
    cell_density: Vec<f64>,
    full_prefix: Vec<f64>,
    diag: f64,
    x: Vec<f64>,
    /// Below this radius the mass is `c_small t^n` (no atoms, density cone).
    t_small: f64,
    c_small: f64,
    r0: f64,
    total: f64,
    atom_at_x: bool,
}

impl MassProfile {
    pub fn new(m: &Measure, x: &[f64]) -> Self {
        let n = x.len();
        let mut atoms: Vec<(f64, f64)> = m
            .atoms()
            .iter()
            .filter(|a| a.mass != 0.0)
            .map(|a| (dist(&a.x, x), a.mass.abs()))
            .collect();
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let atom_at_x = atoms.first().is_some_and(|a| a.0 == 0.0);
        let mut raw = Vec::new();
        let mut diag = 0.0;
        let mut t_small = f64::INFINITY;
        if let Some(d) = m.density() {
            let h = d.grid.h;
            let vol = d.grid.cell_volume();
            diag = h * (n as f64).sqrt();
            let mut c = vec![0.0; n];
            for (i, &v) in d.values.iter().enumerate() {
                if v == 0.0 {
                    continue;
                }
                d.grid.center_into(i, &mut c);
                let lo: Vec<f64> = c.iter().map(|a| a - 0.5 * h).collect();
                let hi: Vec<f64> = c.iter().map(|a| a + 0.5 * h).collect();
                let (dmin, dmax) = box_distance_range(x, &lo, &hi);
                if dmin > 0.0 {
                    t_small = t_small.min(dmin);
                } else {
                    for k in 0..n {
                        for e in [x[k] - lo[k], hi[k] - x[k]] {
                            if e > 0.0 {
                                t_small = t_small.min(e);
                            }
                        }
                    }
                }
                raw.push((dmin, dmax, v.abs() * vol, lo, hi, v.abs()));
            }
        }
        if let Some(a) = atoms.iter().find(|a| a.0 > 0.0) {
            t_small = t_small.min(a.0);
        }
        raw.sort_by(|a, b| a.1.total_cmp(&b.1));
        let mut full_prefix = Vec::with_capacity(raw.len() + 1);
        full_prefix.push(0.0);
        let mut acc = 0.0;
        let mut cells = Vec::with_capacity(raw.len());
        let mut boxes = Vec::with_capacity(raw.len() * 2 * n);
        let mut cell_density = Vec::with_capacity(raw.len());
        for (dmin, dmax, mass, lo, hi, dens) in raw {
            acc += mass;
            full_prefix.push(acc);
            cells.push((dmin, dmax, mass));
            boxes.extend(lo);
            boxes.extend(hi);
            cell_density.push(dens);
        }
        let r0 = atoms
            .last()
            .map_or(0.0, |a| a.0)
            .max(cells.last().map_or(0.0, |c| c.1));
        let total = atoms.iter().map(|a| a.1).sum::<f64>() + acc;
        let mut prof = MassProfile {
            n,
            atoms,
            cells,
            boxes,
            cell_density,
            full_prefix,
            diag,
            x: x.to_vec(),
            t_small,
            c_small: 0.0,
            r0,
            total,
            atom_at_x,
        };
        if prof.t_small.is_finite() && !prof.cells.is_empty() {
            prof.c_small = prof.density_mass(prof.t_small) / prof.t_small.powi(n as i32);
        }
        prof
    }

    /// Density part of the mass of the closed ball.
    pub fn density_mass(&self, t: f64) -> f64 {
        if self.cells.is_empty() || t <= 0.0 {
            return 0.0;
        }
        let full = self.cells.partition_point(|c| c.1 <= t);
        let mut m = self.full_prefix[full];
        let n = self.n;
        for k in full..self.cells.len() {
            let (dmin, dmax, _) = self.cells[k];
            if dmax > t + self.diag {
                break;
            }
            if dmin < t {
                let b = &self.boxes[2 * n * k..2 * n * (k + 1)];
                m += self.cell_density[k] * ball_box_volume(&self.x, t, &b[..n], &b[n..], SUBCELLS);
            }
        }
        m
    }

    /// Atomic part of the mass of the closed ball.
    pub fn atom_mass(&self, t: f64) -> f64 {
        self.atoms.iter().take_while(|a| a.0 <= t).map(|a| a.1).sum()
    }

    /// `|μ|(closed B_t(x))`.
    pub fn mass(&self, t: f64) -> f64 {
        self.atom_mass(t) + self.density_mass(t)
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    /// Radius beyond which the profile is constant.
    pub fn support_radius(&self) -> f64 {
        self.r0
    }

    pub fn has_density(&self) -> bool {
        !self.cells.is_empty()
    }

    /// `∫_0^T [M(t)/t^{n-σ}]^κ dt/t`.
    pub fn radial_integral(&self, sigma: f64, kappa: f64, t_max: f64, tol: f64) -> f64 {
        let n = self.n as f64;
        let alpha = (n - sigma) * kappa;
        if self.total == 0.0 {
            return 0.0;
        }
        if self.atom_at_x {
            return f64::INFINITY;
        }
        let closed_piece = |mass: f64, a: f64, b: f64| -> f64 {
            if mass == 0.0 || a >= b {
                return 0.0;
            }
            let tail = if b.is_infinite() { 0.0 } else { b.powf(-alpha) };
            mass.powf(kappa) * (a.powf(-alpha) - tail) / alpha
        };
        let mut total = 0.0;
        let t_small = self.t_small.min(t_max);
        if self.has_density() && self.c_small > 0.0 {
            total += self.c_small.powf(kappa) * t_small.powf(sigma * kappa) / (sigma * kappa);
        }
        let upper = self.r0.min(t_max);
        let mut breaks: Vec<f64> = vec![t_small];
        breaks.extend(self.atoms.iter().map(|a| a.0).filter(|&d| d > t_small && d < upper));
        breaks.push(upper.max(t_small));
        for w in breaks.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b <= a {
                continue;
            }
            let atoms = self.atom_mass(a);
            if !self.has_density() {
                total += closed_piece(atoms, a, b);
            } else {
                total += integrate_dt_over_t(
                    |t| {
                        let m = atoms + self.density_mass(t);
                        if m <= 0.0 {
                            0.0
                        } else {
                            (m * t.powf(sigma - n)).powf(kappa)
                        }
                    },
                    a,
                    b,
                    tol,
                    0.0,
                );
            }
        }
        if t_max > self.r0 {
            total += closed_piece(self.total, self.r0.max(t_small), t_max);
        }
        total
    }

    /// `sup_{0<t<=T} M(t) / (t^{n-σ} h_η(t))`.
    pub fn maximal(&self, sigma: f64, eta: f64, t_max: f64) -> f64 {
        if self.total == 0.0 {
            return 0.0;
        }
        if self.atom_at_x {
            return f64::INFINITY;
        }
        let n = self.n as f64;
        let ratio = |t: f64| self.mass(t) / (t.powf(n - sigma) * h_eta_unchecked(eta, t));
        let mut best = 0.0f64;
        for a in self.atoms.iter().take_while(|a| a.0 <= t_max) {
            best = best.max(ratio(a.0));
        }
        if self.has_density() {
            let lo = (self.t_small.min(t_max) * 1e-3).max(1e-300);
            let grid = logspace(lo, t_max, 400);
            let vals: Vec<f64> = grid.iter().map(|&t| ratio(t)).collect();
            let (k, &v) = vals
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .expect("nonempty grid");
            best = best.max(v);
            let a = grid[k.saturating_sub(1)];
            let b = grid[(k + 1).min(grid.len() - 1)];
            if b > a {
                let (_, r) = golden_section_max(ratio, a, b, 1e-10);
                best = best.max(r);
            }
        }
        best.max(ratio(t_max))
    }
}

fn check_t(t: f64) -> Result<()> {
    if t > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("truncation radius T = {t} must be positive")))
    }
}

/// `W^T_{s,p}[μ](x)` with the order `s` and exponent `p` of `prm`.
pub fn wolff(m: &Measure, x: &[f64], prm: &Params, t: f64, tol: f64) -> Result<f64> {
    wolff_order(m, x, prm.n(), prm.s(), prm.p(), t, tol)
}

/// `W^T_{s,p}[μ](x) = ∫_0^T [|μ|(B_t)/t^{n-sp}]^{1/(p-1)} dt/t` for an explicit order.
pub fn wolff_order(m: &Measure, x: &[f64], n: usize, s: f64, p: f64, t: f64, tol: f64) -> Result<f64> {
    check_t(t)?;
    m.check_dim(n)?;
    if !(s > 0.0 && p > 1.0 && s * p < n as f64) {
        return Err(invalid(format!("Wolff order needs 0 < sp < n, got s = {s}, p = {p}")));
    }
    Ok(MassProfile::new(m, x).radial_integral(s * p, 1.0 / (p - 1.0), t, tol))
}

/// `I^T_s[μ](x) = ∫_0^T |μ|(B_t)/t^{n-s} dt/t`.
pub fn riesz(m: &Measure, x: &[f64], n: usize, s_order: f64, t: f64, tol: f64) -> Result<f64> {
    check_t(t)?;
    m.check_dim(n)?;
    if !(s_order > 0.0 && s_order < n as f64) {
        return Err(invalid(format!("Riesz order {s_order} must lie in (0, n)")));
    }
    Ok(MassProfile::new(m, x).radial_integral(s_order, 1.0, t, tol))
}

/// `M^η_{s,T}[μ](x) = sup_{0<t<=T} |μ|(B̄_t(x)) / (t^{n-s} h_η(t))`.
pub fn frac_max(m: &Measure, x: &[f64], n: usize, s_order: f64, eta: f64, t: f64) -> Result<f64> {
    check_t(t)?;
    m.check_dim(n)?;
    if !(s_order >= 0.0 && s_order <= n as f64) || !(eta >= 0.0) {
        return Err(invalid(format!("fractional maximal order {s_order} or exponent {eta} out of range")));
    }
    Ok(MassProfile::new(m, x).maximal(s_order, eta, t))
}

/// Both sides of the maximal-function bounds at one point: for `σ ∈ (0,1)`,
/// `[M_{s,σT}]^{1/(p-1)} <= max{σ^{(s-n)/(p-1)},1}/(-ln σ) W^T_{s/p,p}` and
/// `M_{s,σT} <= max{σ^{s-n},1}/(-ln σ) I^T_s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Domination {
    pub maximal: f64,
    pub wolff: f64,
    pub riesz: f64,
    pub wolff_rhs: f64,
    pub riesz_rhs: f64,
}

impl Domination {
    /// Largest relative excess of a left side over its right side; `<= 0`
    /// when both bounds hold.
    pub fn excess(&self, p: f64) -> f64 {
        let rel = |lhs: f64, rhs: f64| if rhs > 0.0 { (lhs - rhs) / rhs } else if lhs > 0.0 { f64::INFINITY } else { 0.0 };
        rel(self.maximal.powf(1.0 / (p - 1.0)), self.wolff_rhs).max(rel(self.maximal, self.riesz_rhs))
    }
}

#[allow(clippy::too_many_arguments)]
pub fn domination(m: &Measure, x: &[f64], n: usize, s: f64, p: f64, sigma: f64, t: f64, tol: f64) -> Result<Domination> {
    check_t(t)?;
    m.check_dim(n)?;
    let nf = n as f64;
    if !(s > 0.0 && s < nf && p > 1.0 && sigma > 0.0 && sigma < 1.0) {
        return Err(invalid(format!("domination needs 0 < s < n, p > 1, 0 < sigma < 1; got s = {s}, p = {p}, sigma = {sigma}")));
    }
    let profile = MassProfile::new(m, x);
    let maximal = profile.maximal(s, 0.0, sigma * t);
    let wolff = profile.radial_integral(s, 1.0 / (p - 1.0), t, tol);
    let riesz = profile.radial_integral(s, 1.0, t, tol);
    let log = -sigma.ln();
    Ok(Domination {
        maximal,
        wolff,
        riesz,
        wolff_rhs: sigma.powf((s - nf) / (p - 1.0)).max(1.0) / log * wolff,
        riesz_rhs: sigma.powf(s - nf).max(1.0) / log * riesz,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialKind {
    Wolff,
    Riesz,
    Fracmax,
}

/// A single potential evaluation request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialQuery {
    pub kind: PotentialKind,
    pub x: Vec<f64>,
    /// `None` means `T = ∞`.
    pub t: Option<f64>,
    pub s_order: f64,
    #[serde(default)]
    pub eta: f64,
}

impl PotentialQuery {
    /// Evaluates the query. For Wolff, `s_order` is the Wolff order and `p` comes from `prm`.
    pub fn eval(&self, m: &Measure, prm: &Params, tol: f64) -> Result<f64> {
        let t = self.t.unwrap_or(f64::INFINITY);
        match self.kind {
            PotentialKind::Wolff => wolff_order(m, &self.x, prm.n(), self.s_order, prm.p(), t, tol),
            PotentialKind::Riesz => riesz(m, &self.x, prm.n(), self.s_order, t, tol),
            PotentialKind::Fracmax => {
                if t.is_infinite() {
                    return Err(invalid("fractional maximal function needs finite T"));
                }
                frac_max(m, &self.x, prm.n(), self.s_order, self.eta, t)
            }
        }
    }
}

/// Radial Bessel kernel `G_s(r)` via the subordination integral.
pub fn bessel_radial(n: usize, s: f64, r: f64, tol: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(invalid(format!("Bessel order {s} must be positive")));
    }
    let nf = n as f64;
    let pref = (4.0 * std::f64::consts::PI).powf(-nf / 2.0) / gamma(s / 2.0);
    if r == 0.0 {
        if s <= nf {
            return Err(Error::SingularPoint(format!("G_{s} is singular at the origin in dimension {n}")));
        }
        return Ok(pref * gamma((s - nf) / 2.0));
    }
    let r2 = r * r;
    let lo = (r2 / 4000.0).max(1e-300);
    let hi = 800.0f64.max(4.0 * (nf + s));
    let v = integrate_dt_over_t(
        |t| (-t - r2 / (4.0 * t)).exp() * t.powf((s - nf) / 2.0),
        lo,
        hi,
        tol,
        0.0,
    );
    Ok(pref * v)
}

/// `G_s(x)` for a point `x ≠ 0`.
pub fn bessel_kernel(n: usize, s_order: f64, x: &[f64], tol: f64) -> Result<f64> {
    if x.len() != n {
        return Err(invalid("point dimension mismatch"));
    }
    bessel_radial(n, s_order, x.iter().map(|c| c * c).sum::<f64>().sqrt(), tol)
}

/// `I_s(x) = (n-s)^{-1} |x|^{-(n-s)}`.
pub fn riesz_kernel(n: usize, s: f64, r: f64) -> f64 {
    if r == 0.0 {
        f64::INFINITY
    } else {
        r.powf(s - n as f64) / (n as f64 - s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "s", rename_all = "snake_case")]
pub enum ConvolutionKernel {
    Riesz(f64),
    Bessel(f64),
}

impl ConvolutionKernel {
    pub fn order(&self) -> f64 {
        match *self {
            ConvolutionKernel::Riesz(s) | ConvolutionKernel::Bessel(s) => s,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        match *self {
            ConvolutionKernel::Riesz(s) if !(s > 0.0 && s < n as f64) => {
                Err(invalid(format!("Riesz kernel order {s} must lie in (0, n)")))
            }
            ConvolutionKernel::Bessel(s) if !(s > 0.0) => Err(invalid(format!("Bessel kernel order {s} must be positive"))),
            _ => Ok(()),
        }
    }

    pub fn radial(&self, n: usize, r: f64, tol: f64) -> f64 {
        match *self {
            ConvolutionKernel::Riesz(s) => riesz_kernel(n, s, r),
            ConvolutionKernel::Bessel(s) => bessel_radial(n, s, r, tol).unwrap_or(f64::INFINITY),
        }
    }

    /// `∫_{B_ρ(0)} K(y) dy`.
    pub fn ball_integral(&self, n: usize, rho: f64, tol: f64) -> f64 {
        let area = unit_sphere_area(n);
        match *self {
            ConvolutionKernel::Riesz(s) => area * rho.powf(s) / (s * (n as f64 - s)),
            ConvolutionKernel::Bessel(_) => {
                let lo = rho * 1e-12;
                let head = {
                    // G_s(r) ~ I_s(r) near the origin for s < n.
                    let s = self.order().min(n as f64 - 1e-9);
                    let c = gamma((n as f64 - s) / 2.0)
                        / (std::f64::consts::PI.powf(n as f64 / 2.0) * 2f64.powf(s) * gamma(s / 2.0));
                    area * c * lo.powf(s) / s
                };
                head + area * integrate_dt_over_t(|r| self.radial(n, r, tol) * r.powi(n as i32), lo, rho, tol, 0.0)
            }
        }
    }

    /// `∫_{cell} K(x - y) dy` for a cube of side `h` centred at `c`, with
    /// near-field subdivision.
    pub fn cell_integral(&self, x: &[f64], c: &[f64], h: f64, tol: f64) -> f64 {
        let n = x.len();
        let vol = h.powi(n as i32);
        let d = dist(x, c);
        if d > 2.0 * h {
            return vol * self.radial(n, d, tol);
        }
        let sub = 4usize;
        let hs = h / sub as f64;
        let svol = hs.powi(n as i32);
        let mut total = 0.0;
        let mut p = vec![0.0; n];
        for m in 0..sub.pow(n as u32) {
            let mut t = m;
            for k in 0..n {
                let i = t % sub;
                t /= sub;
                p[k] = c[k] - 0.5 * h + (i as f64 + 0.5) * hs;
            }
            let r = dist(&p, x);
            if r < 1e-9 * hs {
                let rho = (svol / unit_ball_volume(n)).powf(1.0 / n as f64);
                total += self.ball_integral(n, rho, tol);
            } else {
                total += svol * self.radial(n, r, tol);
            }
        }
        total
    }
}

/// `(K * μ)(x)` by direct summation over atoms and density cells.
pub fn kernel_potential(kernel: ConvolutionKernel, m: &Measure, x: &[f64], tol: f64) -> Result<f64> {
    let n = x.len();
    kernel.validate(n)?;
    m.check_dim(n)?;
    let mut total = 0.0;
    for a in m.atoms() {
        if a.mass != 0.0 {
            total += a.mass * kernel.radial(n, dist(&a.x, x), tol);
        }
    }
    if let Some(d) = m.density() {
        let mut c = vec![0.0; n];
        for (i, &v) in d.values.iter().enumerate() {
            if v != 0.0 {
                d.grid.center_into(i, &mut c);
                total += v * kernel.cell_integral(x, &c, d.grid.h, tol);
            }
        }
    }
    Ok(total)
}

/// Log-log interpolation table of a radial kernel on `[r_min, r_max]`.
#[derive(Debug, Clone)]
pub struct RadialTable {
    log_r: Vec<f64>,
    log_v: Vec<f64>,
}

impl RadialTable {
    pub fn new(kernel: ConvolutionKernel, n: usize, r_min: f64, r_max: f64, nodes: usize, tol: f64) -> Self {
        let rs = logspace(r_min, r_max, nodes.max(2));
        let log_v = rs.iter().map(|&r| kernel.radial(n, r, tol).max(1e-300).ln()).collect();
        RadialTable { log_r: rs.iter().map(|r| r.ln()).collect(), log_v }
    }

    pub fn eval(&self, r: f64) -> f64 {
        let lr = r.ln();
        let k = self.log_r.partition_point(|&x| x <= lr).clamp(1, self.log_r.len() - 1);
        let (a, b) = (self.log_r[k - 1], self.log_r[k]);
        let w = (lr - a) / (b - a);
        (self.log_v[k - 1] + w * (self.log_v[k] - self.log_v[k - 1])).exp()
    }
}

/// `∫_{a<|y|<b} K(y) dy`.
#[cfg(test)]
fn radial_mass_of_kernel(kernel: ConvolutionKernel, n: usize, a: f64, b: f64, tol: f64) -> f64 {
    unit_sphere_area(n) * integrate_dt_over_t(|r| kernel.radial(n, r, tol) * r.powi(n as i32), a, b, tol, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::CellGrid;
    use std::f64::consts::PI;

    fn prm(s: f64, p: f64) -> Params {
        Params::new(2, s, p, 1.0).unwrap()
    }

    #[test]
    fn domination_of_a_dirac() {
        let m = Measure::dirac(vec![0.0, 0.0], 1.0).unwrap();
        let d = domination(&m, &[0.3, 0.0], 2, 1.0, 2.0, 0.5, 1.0, 1e-10).unwrap();
        assert!((d.maximal - 1.0 / 0.3).abs() < 1e-12);
        assert!((d.wolff - (1.0 / 0.3 - 1.0)).abs() < 1e-8);
        assert!((d.wolff_rhs - 2.0 / 2f64.ln() * d.wolff).abs() < 1e-12);
        assert!(d.excess(2.0) < 0.0);
        // The ball of radius σT misses the atom: nothing to dominate.
        let far = domination(&m, &[0.9, 0.0], 2, 1.0, 2.0, 0.5, 1.0, 1e-10).unwrap();
        assert_eq!(far.maximal, 0.0);
    }

    #[test]
    fn wolff_dirac_closed_forms() {
        let d = Measure::dirac(vec![0.0, 0.0], 1.0).unwrap();
        let w = wolff(&d, &[0.5, 0.0], &prm(0.5, 2.0), 1.0, 1e-10).unwrap();
        assert!((w - 1.0).abs() < 1e-12, "{w}");
        let x = [2f64.powi(-4) * 0.6, 2f64.powi(-4) * 0.8];
        let w = wolff(&d, &x, &prm(0.5, 3.0), 16.0, 1e-10).unwrap();
        assert!((w - 6.0).abs() < 1e-12, "{w}");
        assert_eq!(wolff(&Measure::zero(), &x, &prm(0.5, 3.0), 16.0, 1e-10).unwrap(), 0.0);
        assert_eq!(wolff(&d, &[0.0, 0.0], &prm(0.5, 2.0), 1.0, 1e-10).unwrap(), f64::INFINITY);
        assert!(wolff(&d, &[0.5, 0.0], &prm(0.5, 2.0), 0.0, 1e-10).is_err());
    }

    #[test]
    fn riesz_dirac_closed_forms() {
        let d = Measure::dirac(vec![0.0, 0.0], 1.0).unwrap();
        let v = riesz(&d, &[0.0, 0.5], 2, 1.0, 1.0, 1e-10).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        assert_eq!(riesz(&d, &[0.0, 1.5], 2, 1.0, 1.0, 1e-10).unwrap(), 0.0);
        let v = riesz(&d, &[0.0, 0.5], 2, 1.0, f64::INFINITY, 1e-10).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn frac_max_dirac() {
        let d = Measure::dirac(vec![0.0, 0.0], 1.0).unwrap();
        assert_eq!(frac_max(&d, &[0.5, 0.0], 2, 1.0, 0.0, 1.0).unwrap(), 2.0);
        let v = frac_max(&d, &[0.25, 0.0], 2, 1.0, 1.0, 0.5).unwrap();
        assert!((v - 5.545177444479562).abs() < 1e-12, "{v}");
        assert_eq!(frac_max(&Measure::zero(), &[0.25, 0.0], 2, 1.0, 1.0, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn profile_of_uniform_density_is_exact() {
        let h = 0.1;
        let g = CellGrid::new(vec![-0.95, -0.95], h, vec![20, 20]).unwrap();
        let u = Measure::uniform(g, 1.0).unwrap();
        for x in [[0.0, 0.0], [0.03, -0.41], [0.95, 0.95]] {
            let prof = MassProfile::new(&u, &x);
            for t in [0.01, 0.05, 0.2, 0.5] {
                let exact = crate::geometry::disk_rect_area(&x, t, &[-1.0, -1.0], &[1.0, 1.0]);
                assert!((prof.mass(t) - exact).abs() < 1e-12, "{x:?} {t}");
            }
        }
    }

    #[test]
    fn wolff_of_uniform_density_matches_radial_formula() {
        // Interior point: |μ|(B_t) = π t² until the ball leaves the square.
        let g = CellGrid::new(vec![-0.975, -0.975], 0.05, vec![40, 40]).unwrap();
        let u = Measure::uniform(g, 1.0).unwrap();
        let p = prm(0.5, 1.5);
        let t = 0.5;
        let w = wolff(&u, &[0.0, 0.0], &p, t, 1e-10).unwrap();
        // ∫_0^T (π t^{sp})^{1/(p-1)} dt/t = π^2 T^{2 sp} / (2 sp) with sp = 0.75.
        let exact = PI.powi(2) * t.powf(1.5) / 1.5;
        assert!((w - exact).abs() < 1e-8 * exact, "{w} {exact}");
    }

    #[test]
    fn bessel_mass_and_monotonicity() {
        for s in [0.5, 1.0, 1.5] {
            let total = radial_mass_of_kernel(ConvolutionKernel::Bessel(s), 2, 1e-9, 60.0, 1e-9)
                + ConvolutionKernel::Bessel(s).ball_integral(2, 1e-9, 1e-9);
            assert!((total - 1.0).abs() < 1e-4, "{s}: {total}");
        }
        let a = bessel_kernel(2, 1.0, &[0.1, 0.0], 1e-10).unwrap();
        let b = bessel_kernel(2, 1.0, &[0.3, 0.0], 1e-10).unwrap();
        assert!(a > b && b > 0.0);
        assert!(matches!(bessel_kernel(2, 1.0, &[0.0, 0.0], 1e-10), Err(Error::SingularPoint(_))));
    }

    #[test]
    fn riesz_convolution_of_disk() {
        let d = Measure::dirac(vec![0.0, 0.0], 1.0).unwrap();
        let v = kernel_potential(ConvolutionKernel::Riesz(1.0), &d, &[0.3, 0.4], 1e-10).unwrap();
        assert!((v - 2.0).abs() < 1e-14);
        let m = 200;
        let h = 2.0 / m as f64;
        let g = CellGrid::new(vec![-1.0 + 0.5 * h, -1.0 + 0.5 * h], h, vec![m, m]).unwrap();
        let values = (0..g.len())
            .map(|i| if dist(&g.center(i), &[0.0, 0.0]) <= 1.0 { 1.0 } else { 0.0 })
            .collect();
        let disk = Measure::from_density(g, values).unwrap();
        let v = kernel_potential(ConvolutionKernel::Riesz(1.0), &disk, &[0.0, 0.0], 1e-8).unwrap();
        assert!((v - 2.0 * PI).abs() < 0.01 * 2.0 * PI, "{v}");
    }
}
