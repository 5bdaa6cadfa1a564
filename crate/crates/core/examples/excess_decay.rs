//! Homogeneous solutions with smooth exterior data: the excess on shrinking
//! balls decays like a power of the radius.

use std::sync::Arc;

use wolfflab::estimate::excess_decay_probe;
use wolfflab::grid::{Exterior, GridFunction, Lattice};
use wolfflab::solver::{DirichletSolver, SolveConfig};
use wolfflab::{KernelSpec, Measure, Params};

fn main() -> wolfflab::Result<()> {
    let prm = Params::new(2, 0.5, 2.0, 1.0)?;
    let lat = Arc::new(Lattice::build(&[-1.0, -1.0], &[1.0, 1.0], 0.05, 2)?);
    let solver = DirichletSolver::new(lat.clone(), KernelSpec::fractional_p_laplacian(prm))?;
    let data: [(&str, fn(&[f64]) -> f64); 2] = [("x + y/2", |x| x[0] + 0.5 * x[1]), ("x^2 - y^2", |x| x[0] * x[0] - x[1] * x[1])];
    for (name, g) in data {
        let ext = Exterior::Function(GridFunction::from_fn(lat.clone(), g, 0.0));
        let u = solver.solve(&Measure::zero(), &ext, &SolveConfig::with_tol(1e-10))?.u;
        let fit = excess_decay_probe(&u, &[0.0, 0.0], &[0.8, 0.56, 0.4, 0.28, 0.2], &prm)?;
        let ex: Vec<String> = fit.excesses.iter().map(|e| format!("{e:.3e}")).collect();
        println!("{name}: excess {} alpha {:?}", ex.join(" "), fit.alpha);
    }
    Ok(())
}
