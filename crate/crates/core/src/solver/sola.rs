use serde::Serialize;

use super::dirichlet::{DirichletSolver, SolveConfig};
use crate::error::{invalid, Result};
use crate::geometry::dist;
use crate::grid::{Exterior, GridFunction};
use crate::measure::{mollify, Measure, MollifierSchedule};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolaStage {
    pub index: u32,
    pub radius: f64,
    pub total_mass: f64,
    pub sweeps: usize,
    pub converged: bool,
    /// `L^q` and `L^1` distances to the previous stage's solution.
    pub lq_distance: Option<f64>,
    pub l1_distance: Option<f64>,
    /// Discrete fractional seminorm of order `s/2` and exponent `q`.
    pub seminorm: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolaReport {
    pub q: f64,
    pub stages: Vec<SolaStage>,
    pub converged: bool,
    /// Running minimum of the consecutive `L^q` distances.
    pub envelope: Vec<f64>,
    /// Whether the consecutive `L^1` distances decrease.
    pub l1_decreasing: bool,
    #[serde(skip)]
    pub u: GridFunction,
}

fn lq_distance(u: &GridFunction, v: &GridFunction, q: f64) -> f64 {
    let lat = u.lattice();
    let vol = lat.grid().cell_volume();
    let sum: f64 = lat.interior_nodes().iter().map(|&i| (u.values()[i] - v.values()[i]).abs().powf(q)).sum();
    (sum * vol).powf(1.0 / q)
}

fn seminorm(u: &GridFunction, order: f64, q: f64) -> f64 {
    let lat = u.lattice();
    let n = lat.n() as f64;
    let vol = lat.grid().cell_volume();
    let nodes = lat.interior_nodes();
    let coords: Vec<Vec<f64>> = nodes.iter().map(|&i| lat.coords(i)).collect();
    let mut sum = 0.0;
    for (a, &i) in nodes.iter().enumerate() {
        for (b, &j) in nodes.iter().enumerate().skip(a + 1) {
            let d = dist(&coords[a], &coords[b]);
            sum += 2.0 * (u.values()[i] - u.values()[j]).abs().powf(q) * d.powf(-(n + order * q));
        }
    }
    (sum * vol * vol).powf(1.0 / q)
}

/// Solves with the mollified data `μ_j` for every index in `schedule`.
pub fn sola_solve(
    m: &Measure,
    solver: &DirichletSolver,
    schedule: &[u32],
    q: f64,
    cfg: &SolveConfig,
) -> Result<SolaReport> {
    let prm = *solver.kernel().params();
    if schedule.is_empty() || schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("mollifier schedule must be nonempty and increasing"));
    }
    if !(q > 0.0 && q < prm.q_bar()) {
        return Err(invalid(format!("exponent q = {q} outside (0, {})", prm.q_bar())));
    }
    let lat = solver.lattice().clone();
    let mut stages: Vec<SolaStage> = Vec::new();
    let mut prev: Option<GridFunction> = None;
    let mut converged = true;
    for &j in schedule {
        let sched = MollifierSchedule::new(lat.n(), j)?;
        let mj = mollify(m, &sched, lat.grid())?;
        let mu = lat.nodal_masses(&mj)?;
        let out = solver.solve_nodal(&mu, &Exterior::zero(), cfg, prev.as_ref())?;
        converged &= out.converged;
        let (lq, l1) = match &prev {
            Some(v) => (Some(lq_distance(&out.u, v, q)), Some(lq_distance(&out.u, v, 1.0))),
            None => (None, None),
        };
        stages.push(SolaStage {
            index: j,
            radius: sched.radius(),
            total_mass: mj.total_mass(),
            sweeps: out.sweeps,
            converged: out.converged,
            lq_distance: lq,
            l1_distance: l1,
            seminorm: seminorm(&out.u, 0.5 * prm.s(), q),
        });
        prev = Some(out.u);
    }
    let mut envelope = Vec::new();
    let mut best = f64::INFINITY;
    for d in stages.iter().filter_map(|s| s.lq_distance) {
        best = best.min(d);
        envelope.push(best);
    }
    let l1: Vec<f64> = stages.iter().filter_map(|s| s.l1_distance).collect();
    let l1_decreasing = l1.windows(2).all(|w| w[1] <= w[0]);
    Ok(SolaReport { q, stages, converged, envelope, l1_decreasing, u: prev.expect("schedule is nonempty") })
}
