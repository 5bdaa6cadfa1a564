//! Riesz and Bessel capacities of balls and a box, the scaling law of the
//! Riesz capacity, and the capacity condition for a point mass.

use wolfflab::capacity::{capacity_condition, orlicz_capacity, CapacityProblem, Integrand, TestSet};
use wolfflab::potential::ConvolutionKernel;
use wolfflab::Measure;

fn main() -> wolfflab::Result<()> {
    let q = 1.5;
    let riesz = ConvolutionKernel::Riesz(1.0);
    let mut prev: Option<f64> = None;
    for r in [0.1, 0.2, 0.4, 0.8] {
        let ball = TestSet::Ball { x: vec![0.0, 0.0], r };
        let cp = CapacityProblem::for_set(riesz, Integrand::power(q)?, &ball, 4)?;
        let res = orlicz_capacity(&cp, 1e-4)?;
        let slope = prev.map_or(String::new(), |c| format!(" slope {:.4}", (res.value / c).log2()));
        println!("r = {r}: cap {:.5e} (dual {:.5e}, {} iterations){slope}", res.value, res.dual_bound, res.iterations);
        prev = Some(res.value);
    }
    println!("expected slope n - s q = {}", 2.0 - q);

    let bessel = ConvolutionKernel::Bessel(1.6);
    let sets = vec![
        TestSet::Ball { x: vec![0.0, 0.0], r: 0.1 },
        TestSet::Ball { x: vec![0.0, 0.0], r: 0.3 },
        TestSet::Box { lo: vec![-0.1, -0.3], hi: vec![0.5, 0.3] },
    ];
    let m = Measure::dirac(vec![0.0, 0.0], 2.0)?;
    let rep = capacity_condition(&m, bessel, &Integrand::power(q)?, &sets, 1.0, 4, 1e-3)?;
    for e in &rep.entries {
        println!("mass {:.3} cap {:.4e} ratio {:.3}", e.mass, e.capacity, e.ratio);
    }
    println!("max ratio {:.3}, condition at delta = 1 holds: {}", rep.max_ratio, rep.passes);
    Ok(())
}
