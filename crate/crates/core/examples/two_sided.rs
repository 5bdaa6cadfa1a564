//! Ratio of the solution to the Wolff potential of its data, from below and
//! from above, for a point mass and a uniform density.

use std::sync::Arc;

use wolfflab::estimate::{verify_two_sided, VerifyOptions};
use wolfflab::grid::{Exterior, Lattice};
use wolfflab::solver::{DirichletSolver, SolveConfig};
use wolfflab::{KernelSpec, Measure, Params};

fn main() -> wolfflab::Result<()> {
    let lat = Arc::new(Lattice::build(&[-1.0, -1.0], &[1.0, 1.0], 1.0 / 12.0, 2)?);
    let indicator: Vec<f64> = (0..lat.len()).map(|i| if lat.is_interior(i) { 1.0 } else { 0.0 }).collect();
    let measures = [("dirac", Measure::dirac(vec![0.0, 0.0], 1.0)?), ("uniform", lat.density_measure(&indicator)?)];
    for (s, p) in [(0.5, 2.0), (0.7, 1.5)] {
        let prm = Params::new(2, s, p, 1.0)?;
        let solver = DirichletSolver::new(lat.clone(), KernelSpec::fractional_p_laplacian(prm))?;
        for (name, m) in &measures {
            let u = solver.solve(m, &Exterior::zero(), &SolveConfig::with_tol(1e-9))?.u;
            let rep = verify_two_sided(&u, m, &prm, &VerifyOptions::default())?;
            let band = |b: Option<(f64, f64)>| b.map_or("-".to_string(), |(lo, hi)| format!("[{lo:.3e}, {hi:.3e}]"));
            println!(
                "s = {s}, p = {p}, {name:7}: u/W_lower in {}, u/W_upper in {}, C0 = {:.3e} over {} nodes",
                band(rep.lower_band),
                band(rep.upper_band),
                rep.c0_emp.unwrap_or(f64::NAN),
                rep.nodes_used
            );
        }
    }
    Ok(())
}
