//! Truncated exponentials, the functions Q_p and their conjugates, and the
//! Fenchel-Young gap.

use wolfflab::special::{fenchel_young_gap, h_eta, q_p_eval, q_p_star, trunc_exp_h};
use wolfflab::{Params, ReactionSpec};

fn main() -> wolfflab::Result<()> {
    for l in [1, 2, 3] {
        let v: Vec<String> = [0.5, 1.0, 2.0].iter().map(|&t| format!("{:.5}", trunc_exp_h(l, t).unwrap())).collect();
        println!("H_{l}(0.5, 1, 2) = {}", v.join(", "));
    }
    println!("h_0.5(2) = {:.5}", h_eta(0.5, 2.0)?);
    for p in [2.0, 3.0] {
        let prm = Params::new(2, 0.3, p, 1.0)?;
        let r = ReactionSpec::Exponential { l: 1, a: 1.0, beta: 1.0 };
        for t in [0.5, 1.0, std::f64::consts::E] {
            let (star, arg) = q_p_star(&r, &prm, t)?;
            println!(
                "p = {p}: Q({t:.3}) = {:.6}, Q*({t:.3}) = {star:.6} attained at {arg:.4}, gap(t, 1) = {:.3e}",
                q_p_eval(&r, &prm, t)?,
                fenchel_young_gap(&r, &prm, t, 1.0)?
            );
        }
    }
    Ok(())
}
