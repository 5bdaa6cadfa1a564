use serde::{Deserialize, Serialize};

use super::dirichlet::{DirichletSolver, SolveConfig};
use crate::error::{invalid, Error, Result};
use crate::grid::{energy_nodal, Exterior, GridFunction};
use crate::measure::Measure;
use crate::potential::{frac_max, wolff};
use crate::special::ReactionSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LaneEmdenConfig {
    pub solve: SolveConfig,
    pub max_iterations: usize,
    /// Stop once the sup-norm increment and the relative energy change fall below this.
    pub tol: f64,
    /// Empirical two-sided constant used by the bound check, when known.
    pub c0_emp: Option<f64>,
    /// Relative tolerance of the Wolff potentials in the bound check.
    pub potential_tol: f64,
}

impl Default for LaneEmdenConfig {
    fn default() -> Self {
        LaneEmdenConfig { solve: SolveConfig::default(), max_iterations: 200, tol: 1e-8, c0_emp: None, potential_tol: 1e-8 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LaneEmdenReport {
    pub iterations: usize,
    pub converged: bool,
    pub diverged: bool,
    pub monotone: bool,
    /// Sup-norm increments between consecutive iterates.
    pub increments: Vec<f64>,
    pub sup_norms: Vec<f64>,
    /// Multiplier of `C0 W` in the pointwise bound.
    pub bound_factor: f64,
    pub c0_emp: Option<f64>,
    /// Statistics of `u / (factor · W)` over interior nodes with finite potential.
    pub bound_ratio_max: f64,
    pub bound_ratio_mean: f64,
    /// Whether `u <= factor · C0 · W` at every such node, when `C0` is known.
    pub bound_holds: Option<bool>,
    #[serde(skip)]
    pub u: GridFunction,
}

/// `max{2^{(2-p)/(p-1)}, 1}`.
fn two_power(p: f64) -> f64 {
    2f64.powf((2.0 - p) / (p - 1.0)).max(1.0)
}

/// `c_p = max{1, 4^{(2-p)/(p-1)}}`.
pub fn exponential_constant(p: f64) -> f64 {
    4f64.powf((2.0 - p) / (p - 1.0)).max(1.0)
}

/// `γ max{2^{(2-p)/(p-1)}, 1} / (γ - p + 1)`.
pub fn power_bound_factor(gamma: f64, p: f64) -> f64 {
    gamma * two_power(p) / (gamma - p + 1.0)
}

struct Iteration {
    u: GridFunction,
    iterations: usize,
    converged: bool,
    diverged: bool,
    monotone: bool,
    increments: Vec<f64>,
    sup_norms: Vec<f64>,
}

/// `u_0` solves with data `μ`, then `u_m` with `P(u_{m-1}) dx + μ`.
fn monotone_iteration(
    solver: &DirichletSolver,
    m: &Measure,
    reaction: &ReactionSpec,
    cfg: &LaneEmdenConfig,
) -> Result<Iteration> {
    if m.total_mass() < 0.0 || m.atoms().iter().any(|a| a.mass < 0.0) {
        return Err(Error::InvalidMeasure("monotone iteration needs a nonnegative measure".into()));
    }
    let lat = solver.lattice().clone();
    let mu = lat.nodal_masses(m)?;
    let vol = lat.grid().cell_volume();
    let slack = 10.0 * cfg.solve.tol;
    let mut it = Iteration {
        u: GridFunction::zeros(lat.clone()),
        iterations: 0,
        converged: false,
        diverged: false,
        monotone: true,
        increments: Vec::new(),
        sup_norms: Vec::new(),
    };
    let mut data = mu.clone();
    let mut prev_energy: Option<f64> = None;
    let mut doublings = 0;
    while it.iterations < cfg.max_iterations {
        let out = solver.solve_nodal(&data, &Exterior::zero(), &cfg.solve, Some(&it.u))?;
        it.iterations += 1;
        if !out.converged {
            return Err(Error::NotConverged(format!("inner solve stalled at iteration {}", it.iterations)));
        }
        let next = out.u;
        let sup = next.sup_norm_interior();
        if !sup.is_finite() || sup > 1e100 {
            it.diverged = true;
            it.sup_norms.push(sup);
            it.u = next;
            break;
        }
        let mut inc: f64 = 0.0;
        for &i in lat.interior_nodes() {
            let d = next.values()[i] - it.u.values()[i];
            if d < -slack {
                it.monotone = false;
            }
            inc = inc.max(d.abs());
        }
        if let Some(&last) = it.sup_norms.last() {
            if last > 0.0 && sup >= 2.0 * last {
                doublings += 1;
            } else {
                doublings = 0;
            }
        }
        it.increments.push(inc);
        it.sup_norms.push(sup);
        let energy = energy_nodal(&next, &data, solver.weights(), solver.kernel());
        it.u = next;
        if doublings >= 5 {
            it.diverged = true;
            break;
        }
        let energy_settled = match prev_energy {
            Some(e0) => (energy - e0).abs() <= cfg.tol * energy.abs().max(f64::MIN_POSITIVE),
            None => sup == 0.0,
        };
        prev_energy = Some(energy);
        if inc < cfg.tol && energy_settled {
            it.converged = true;
            break;
        }
        for &i in lat.interior_nodes() {
            data[i] = mu[i] + reaction.eval(it.u.values()[i]) * vol;
        }
    }
    Ok(it)
}

/// Ratio statistics of `u` against `factor · W^{2 diam}[ω]`.
fn bound_statistics(
    u: &GridFunction,
    omega: &Measure,
    solver: &DirichletSolver,
    factor: f64,
    cfg: &LaneEmdenConfig,
) -> Result<(f64, f64, Option<bool>)> {
    let lat = u.lattice();
    let prm = solver.kernel().params();
    let radius = 2.0 * lat.diameter();
    let (mut max, mut sum, mut count) = (0.0f64, 0.0, 0usize);
    for &i in lat.interior_nodes() {
        let w = wolff(omega, &lat.coords(i), prm, radius, cfg.potential_tol)?;
        if !w.is_finite() {
            continue;
        }
        let ratio = if w > 0.0 {
            u.values()[i] / (factor * w)
        } else if u.values()[i] <= 10.0 * cfg.solve.tol {
            0.0
        } else {
            f64::INFINITY
        };
        max = max.max(ratio);
        sum += ratio;
        count += 1;
    }
    let mean = if count > 0 { sum / count as f64 } else { 0.0 };
    let holds = cfg.c0_emp.map(|c0| max <= c0 * (1.0 + 1e-9));
    Ok((max, mean, holds))
}

fn report(it: Iteration, factor: f64, stats: (f64, f64, Option<bool>), cfg: &LaneEmdenConfig) -> LaneEmdenReport {
    LaneEmdenReport {
        iterations: it.iterations,
        converged: it.converged,
        diverged: it.diverged,
        monotone: it.monotone,
        increments: it.increments,
        sup_norms: it.sup_norms,
        bound_factor: factor,
        c0_emp: cfg.c0_emp,
        bound_ratio_max: stats.0,
        bound_ratio_mean: stats.1,
        bound_holds: stats.2,
        u: it.u,
    }
}

/// Monotone iteration for `-L u = u^γ + μ` with zero exterior data.
pub fn lane_emden_power(
    m: &Measure,
    gamma: f64,
    solver: &DirichletSolver,
    cfg: &LaneEmdenConfig,
) -> Result<LaneEmdenReport> {
    let prm = *solver.kernel().params();
    let reaction = ReactionSpec::power(gamma, &prm)?;
    let factor = power_bound_factor(gamma, prm.p());
    let it = monotone_iteration(solver, m, &reaction, cfg)?;
    let stats = if it.diverged { (f64::INFINITY, f64::INFINITY, Some(false)) } else { bound_statistics(&it.u, m, solver, factor, cfg)? };
    Ok(report(it, factor, stats, cfg))
}

/// Monotone iteration for `-L u = H_l(a u^β) + μ` with zero exterior data.
/// The bound is checked against `ω₁ = μ + δ ‖M‖^{-1} χ_Ω`, where `‖M‖` is
/// the sup over interior nodes of the `η`-fractional maximal function of
/// `χ_Ω` with `η = (p-1)(β-1)/β`.
pub fn lane_emden_exponential(
    m: &Measure,
    l: u32,
    a: f64,
    beta: f64,
    delta: f64,
    solver: &DirichletSolver,
    cfg: &LaneEmdenConfig,
) -> Result<LaneEmdenReport> {
    let prm = *solver.kernel().params();
    let reaction = ReactionSpec::exponential(l, a, beta, &prm)?;
    if !(delta >= 0.0) {
        return Err(invalid(format!("smallness parameter delta = {delta} must be nonnegative")));
    }
    let lat = solver.lattice().clone();
    let factor = 2.0 * exponential_constant(prm.p());
    let omega = if delta > 0.0 {
        let indicator: Vec<f64> = (0..lat.len()).map(|i| if lat.is_interior(i) { 1.0 } else { 0.0 }).collect();
        let chi = lat.density_measure(&indicator)?;
        let eta = (prm.p() - 1.0) * (beta - 1.0) / beta;
        let radius = 2.0 * lat.diameter();
        let mut sup: f64 = 0.0;
        for &i in lat.interior_nodes() {
            sup = sup.max(frac_max(&chi, &lat.coords(i), prm.n(), prm.sp(), eta, radius)?);
        }
        m.add(&chi.scaled(delta / sup))?
    } else {
        m.clone()
    };
    let it = monotone_iteration(solver, m, &reaction, cfg)?;
    let stats = if it.diverged { (f64::INFINITY, f64::INFINITY, Some(false)) } else { bound_statistics(&it.u, &omega, solver, factor, cfg)? };
    Ok(report(it, factor, stats, cfg))
}

/// Bound sequence of the power iteration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Recursion {
    pub sequence: Vec<f64>,
    /// Least fixed point of `c = A (C4 c^r + 1)`, if there is one.
    pub limit: Option<f64>,
    /// Whether `C4` is below the smallness threshold.
    pub small: bool,
    pub threshold: f64,
    /// `γ max{2^{(2-p)/(p-1)}, 1} C_* / (γ - p + 1)`.
    pub bound: f64,
    /// Set when `small`: every term stays below `bound`.
    pub bound_holds: Option<bool>,
}

/// `c_0 = C_*`, `c_{m+1} = C_* max{2^{(2-p)/(p-1)}, 1} (C4 c_m^{γ/(p-1)} + 1)`.
pub fn scalar_recursion(c_star: f64, c4: f64, gamma: f64, p: f64, k: usize) -> Result<Recursion> {
    if !(c_star > 0.0) || !(c4 >= 0.0) || !(p > 1.0) || !(gamma > p - 1.0) || k == 0 {
        return Err(invalid("recursion needs C_* > 0, C4 >= 0, p > 1, gamma > p - 1 and k >= 1"));
    }
    let a = c_star * two_power(p);
    let r = gamma / (p - 1.0);
    let next = |c: f64| a * (c4 * c.powf(r) + 1.0);
    let mut sequence = vec![c_star];
    for _ in 0..k {
        let c = next(*sequence.last().expect("nonempty"));
        sequence.push(c);
        if !c.is_finite() {
            break;
        }
    }
    let threshold = ((gamma - p + 1.0) / (gamma * a)).powf(r) * ((p - 1.0) / (gamma - p + 1.0));
    let small = c4 <= threshold * (1.0 + 1e-12);
    let bound = power_bound_factor(gamma, p) * c_star;
    let bound_holds = small.then(|| sequence.iter().all(|&c| c <= bound * (1.0 + 1e-12)));
    let limit = if c4 == 0.0 {
        Some(a)
    } else {
        // g(c) = next(c) - c is convex with minimum at c_min.
        let g = |c: f64| next(c) - c;
        let c_min = (1.0 / (a * c4 * r)).powf(1.0 / (r - 1.0));
        let g_min = g(c_min);
        if g_min > 1e-12 * c_min {
            None
        } else if g_min >= -1e-12 * c_min {
            Some(c_min)
        } else {
            let (mut lo, mut hi) = (0.0, c_min);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if g(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Some(0.5 * (lo + hi))
        }
    };
    Ok(Recursion { sequence, limit, small, threshold, bound, bound_holds })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recursion_tangent_case() {
        let r = scalar_recursion(1.0, 0.25, 2.0, 2.0, 50).unwrap();
        assert!((r.limit.unwrap() - 2.0).abs() < 1e-10);
        assert!(r.small && r.bound_holds == Some(true));
        assert!((r.threshold - 0.25).abs() < 1e-15 && r.bound == 2.0);
        assert!(r.sequence.windows(2).all(|w| w[1] > w[0]));
        assert!(r.sequence.iter().all(|&c| c < 2.0));
    }

    #[test]
    fn recursion_degenerate_and_divergent() {
        let r = scalar_recursion(1.5, 0.0, 2.0, 1.5, 10).unwrap();
        let a = 1.5 * 2f64.powf(1.0);
        assert!(r.sequence[1..].iter().all(|&c| (c - a).abs() < 1e-15));
        let d = scalar_recursion(1.0, 0.5, 2.0, 2.0, 50).unwrap();
        assert!(!d.small && d.limit.is_none() && d.bound_holds.is_none());
        assert!(d.sequence.iter().any(|&c| c > 2.0));
        assert!(d.sequence.last().unwrap() > &1e6);
        let sub = scalar_recursion(1.0, 0.1, 2.0, 2.0, 2000).unwrap();
        let lim = sub.limit.unwrap();
        assert!((sub.sequence.last().unwrap() - lim).abs() < 1e-12);
        assert!((0.1 * lim * lim + 1.0 - lim).abs() < 1e-12);
    }

    #[test]
    fn factors() {
        assert_eq!(power_bound_factor(3.0, 2.0), 1.5);
        assert_eq!(exponential_constant(2.0), 1.0);
        assert!((exponential_constant(1.5) - 4.0).abs() < 1e-12);
    }
}
