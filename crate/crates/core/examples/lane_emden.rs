//! Monotone iteration for -Lu = u^3 + μ: small point masses give a bounded
//! solution, large ones blow up. The scalar bound recursion shows the same
//! threshold in miniature.

use std::sync::Arc;

use wolfflab::grid::Lattice;
use wolfflab::solver::{lane_emden_power, scalar_recursion, DirichletSolver, LaneEmdenConfig};
use wolfflab::{KernelSpec, Measure, Params};

fn main() -> wolfflab::Result<()> {
    let prm = Params::new(2, 0.8, 2.0, 1.0)?;
    let lat = Arc::new(Lattice::build(&[-1.0, -1.0], &[1.0, 1.0], 0.1, 2)?);
    let solver = DirichletSolver::new(lat, KernelSpec::fractional_p_laplacian(prm))?;
    for mass in [5.0, 15.0, 50.0, 150.0] {
        let m = Measure::dirac(vec![0.0, 0.0], mass)?;
        let rep = lane_emden_power(&m, 3.0, &solver, &LaneEmdenConfig::default())?;
        let last = rep.sup_norms.last().copied().unwrap_or(0.0);
        let state = if rep.converged { "converged" } else if rep.diverged { "diverged" } else { "stopped" };
        println!("mass {mass:>5}: {state} after {} iterations, sup u = {last:.4e}, monotone {}", rep.iterations, rep.monotone);
    }
    for c4 in [0.1, 0.25, 0.3] {
        let r = scalar_recursion(1.0, c4, 2.0, 2.0, 60)?;
        println!(
            "C4 = {c4}: small {}, limit {:?}, c_60 = {:.4}",
            r.small,
            r.limit,
            r.sequence.last().copied().unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
