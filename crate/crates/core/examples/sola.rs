//! Solutions as limits of approximations: mollify a point mass at shrinking
//! radii, solve each problem and watch consecutive iterates settle.

use std::sync::Arc;

use wolfflab::grid::Lattice;
use wolfflab::solver::{sola_solve, DirichletSolver, SolveConfig};
use wolfflab::{KernelSpec, Measure, Params};

fn main() -> wolfflab::Result<()> {
    let prm = Params::new(2, 0.5, 1.8, 1.0)?;
    let lat = Arc::new(Lattice::build(&[-1.0, -1.0], &[1.0, 1.0], 0.08, 2)?);
    let solver = DirichletSolver::new(lat, KernelSpec::fractional_p_laplacian(prm))?;
    let m = Measure::atoms_only(vec![
        wolfflab::measure::Atom { x: vec![-0.3, 0.0], mass: 0.6 },
        wolfflab::measure::Atom { x: vec![0.4, 0.2], mass: 0.4 },
    ])?;
    let q = 0.5 * prm.q_bar();
    let rep = sola_solve(&m, &solver, &[3, 4, 6, 8], q, &SolveConfig::with_tol(1e-9))?;
    println!("q = {q:.3} (bound {:.3})", prm.q_bar());
    for st in &rep.stages {
        println!(
            "j = {} radius {:.4} mass {:.4} sweeps {:4} L^q step {}",
            st.index,
            st.radius,
            st.total_mass,
            st.sweeps,
            st.lq_distance.map_or("-".into(), |d| format!("{d:.3e}"))
        );
    }
    println!("L^1 steps decreasing: {}, all converged: {}", rep.l1_decreasing, rep.converged);
    Ok(())
}
