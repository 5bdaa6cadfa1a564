//! Fractional p-Laplacian with a point mass on the square, for three values
//! of p, with the energy trace of the coordinate descent.

use std::sync::Arc;

use wolfflab::grid::{Exterior, Lattice};
use wolfflab::solver::{DirichletSolver, SolveConfig};
use wolfflab::{KernelSpec, Measure, Params};

fn main() -> wolfflab::Result<()> {
    let lat = Arc::new(Lattice::build(&[-1.0, -1.0], &[1.0, 1.0], 0.1, 2)?);
    let m = Measure::dirac(vec![0.0, 0.0], 1.0)?;
    for p in [1.5, 2.0, 2.5] {
        let prm = Params::new(2, 0.6, p, 1.0)?;
        let solver = DirichletSolver::new(lat.clone(), KernelSpec::fractional_p_laplacian(prm))?;
        let cfg = SolveConfig { track_energy: true, ..SolveConfig::with_tol(1e-9) };
        let out = solver.solve(&m, &Exterior::zero(), &cfg)?;
        let profile: Vec<String> = [0.1, 0.3, 0.5, 0.7, 0.9]
            .iter()
            .map(|&x| format!("{:.4e}", out.u.values()[lat.locate(&[x, 0.0]).expect("node")]))
            .collect();
        let trace = &out.energy_trace;
        println!(
            "p = {p}: {} sweeps (relaxation {:.2}), energy {:.6e} -> {:.6e}, u along the axis {}",
            out.sweeps,
            out.relaxation,
            trace[0],
            trace[trace.len() - 1],
            profile.join(" ")
        );
    }
    Ok(())
}
