//! Wolff, Riesz and fractional maximal potentials of a point mass and of a
//! uniform disk, next to the closed forms available for the point mass.

use wolfflab::geometry::CellGrid;
use wolfflab::potential::{domination, frac_max, riesz, wolff};
use wolfflab::{Measure, Params};

fn main() -> wolfflab::Result<()> {
    let prm = Params::new(2, 0.5, 2.0, 1.0)?;
    let dirac = Measure::dirac(vec![0.0, 0.0], 1.0)?;
    let t = 1.0;
    // For n - sp = 1 and p = 2 the truncated Wolff potential of δ_0 at
    // distance d < T is 1/d - 1/T.
    println!("{:>6} {:>12} {:>12} {:>12} {:>12}", "|x|", "wolff", "exact", "riesz", "fracmax");
    for d in [0.05, 0.1, 0.2, 0.4, 0.8] {
        let x = [d, 0.0];
        let w = wolff(&dirac, &x, &prm, t, 1e-10)?;
        let r = riesz(&dirac, &x, 2, 1.0, t, 1e-10)?;
        let m = frac_max(&dirac, &x, 2, 1.0, 0.0, t)?;
        println!("{d:>6} {w:>12.6} {:>12.6} {r:>12.6} {m:>12.6}", 1.0 / d - 1.0 / t);
    }

    // A disk of radius 0.3 with unit density on a fine cell grid.
    let grid = CellGrid::new(vec![-0.5, -0.5], 0.01, vec![100, 100])?;
    let values = (0..grid.len()).map(|c| if grid.center(c).iter().map(|v| v * v).sum::<f64>() < 0.09 { 1.0 } else { 0.0 }).collect();
    let disk = Measure::from_density(grid, values)?;
    println!("\ndisk mass {:.5} (pi 0.09 = {:.5})", disk.total_mass(), std::f64::consts::PI * 0.09);
    for d in [0.0, 0.2, 0.4, 1.0] {
        let x = [d, 0.0];
        let dom = domination(&disk, &x, 2, 1.0, 2.0, 0.5, t, 1e-8)?;
        println!(
            "|x| = {d:.1}: W = {:.5}, I = {:.5}, M(T/2) = {:.5}, bounds {:.5} / {:.5}",
            dom.wolff, dom.riesz, dom.maximal, dom.wolff_rhs, dom.riesz_rhs
        );
    }
    Ok(())
}
