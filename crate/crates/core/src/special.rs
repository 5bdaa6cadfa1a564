//! Scalar special functions: truncated exponentials, reactions, the
//! logarithmic weight `h_η`, the series `Q_p` and its convex conjugate.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, Result};
use crate::params::Params;
use crate::quadrature::{golden_section_max, logspace};

/// `H_l(t) = e^t - Σ_{j<l} t^j / j!` for `t >= 0`.
pub fn trunc_exp_h(l: u32, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(invalid(format!("truncated exponential needs t >= 0, got {t}")));
    }
    Ok(trunc_exp_unchecked(l, t))
}

pub(crate) fn trunc_exp_unchecked(l: u32, t: f64) -> f64 {
    if t == 0.0 {
        return if l == 0 { 1.0 } else { 0.0 };
    }
    if t > 40.0 + l as f64 {
        let mut partial = 0.0;
        let mut term = 1.0;
        for j in 0..l {
            if j > 0 {
                term *= t / j as f64;
            }
            partial += term;
        }
        return t.exp() - partial;
    }
    // Direct tail series: no cancellation for small t.
    let mut term = 1.0;
    for j in 1..=l {
        term *= t / j as f64;
    }
    let mut sum = 0.0;
    let mut j = l as f64;
    loop {
        sum += term;
        j += 1.0;
        term *= t / j;
        if term < 1e-17 * sum && j > t {
            break;
        }
    }
    sum
}

/// The reaction term `P(u)` of a Lane-Emden problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReactionSpec {
    Zero,
    Power { gamma: f64 },
    Exponential { l: u32, a: f64, beta: f64 },
}

impl ReactionSpec {
    pub fn power(gamma: f64, prm: &Params) -> Result<Self> {
        let r = ReactionSpec::Power { gamma };
        r.validate(prm)?;
        Ok(r)
    }

    pub fn exponential(l: u32, a: f64, beta: f64, prm: &Params) -> Result<Self> {
        let r = ReactionSpec::Exponential { l, a, beta };
        r.validate(prm)?;
        Ok(r)
    }

    pub fn validate(&self, prm: &Params) -> Result<()> {
        let p = prm.p();
        match *self {
            ReactionSpec::Zero => Ok(()),
            ReactionSpec::Power { gamma } => {
                if gamma > p - 1.0 && gamma.is_finite() {
                    Ok(())
                } else {
                    Err(invalid(format!("power reaction needs gamma > p - 1 = {}, got {gamma}", p - 1.0)))
                }
            }
            ReactionSpec::Exponential { l, a, beta } => {
                if l < 1 {
                    return Err(invalid("exponential reaction needs l >= 1"));
                }
                if !(a > 0.0) {
                    return Err(invalid(format!("exponential reaction needs a > 0, got {a}")));
                }
                if !(beta >= 1.0) {
                    return Err(invalid(format!("exponential reaction needs beta >= 1, got {beta}")));
                }
                if !(l as f64 * beta > p - 1.0) {
                    return Err(invalid(format!("exponential reaction needs l*beta > p - 1, got {}", l as f64 * beta)));
                }
                Ok(())
            }
        }
    }

    /// `P(t)` for `t >= 0`: `0`, `t^γ`, or `H_l(a t^β)`.
    pub fn eval(&self, t: f64) -> f64 {
        let t = t.max(0.0);
        match *self {
            ReactionSpec::Zero => 0.0,
            ReactionSpec::Power { gamma } => t.powf(gamma),
            ReactionSpec::Exponential { l, a, beta } => trunc_exp_unchecked(l, a * t.powf(beta)),
        }
    }
}

pub fn reaction_eval(r: &ReactionSpec, t: f64) -> f64 {
    r.eval(t)
}

/// `h_η(t) = (-ln t)^{-η}` on `(0, 1/2]` and `(ln 2)^{-η}` beyond.
pub fn h_eta(eta: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(invalid(format!("h_eta needs t > 0, got {t}")));
    }
    if !(eta >= 0.0) {
        return Err(invalid(format!("h_eta needs eta >= 0, got {eta}")));
    }
    Ok(h_eta_unchecked(eta, t))
}

#[inline]
pub(crate) fn h_eta_unchecked(eta: f64, t: f64) -> f64 {
    if eta == 0.0 {
        1.0
    } else if t <= 0.5 {
        (-t.ln()).powf(-eta)
    } else {
        std::f64::consts::LN_2.powf(-eta)
    }
}

fn exponential_parts(r: &ReactionSpec) -> Result<(u32, f64)> {
    match *r {
        ReactionSpec::Exponential { l, beta, .. } => Ok((l, beta)),
        _ => Err(invalid("Q_p is defined for exponential reactions only")),
    }
}

/// `Q_p(t)`: `H_l(t^β)` when `p = 2`, else `Σ_{q>=l} (1/q!) (t/q)^{βq/(p-1)}`.
pub fn q_p_eval(r: &ReactionSpec, prm: &Params, t: f64) -> Result<f64> {
    let (l, beta) = exponential_parts(r)?;
    if !(t >= 0.0) {
        return Err(invalid(format!("Q_p needs t >= 0, got {t}")));
    }
    Ok(q_p_series(l, beta, prm.p(), t))
}

fn q_p_series(l: u32, beta: f64, p: f64, t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    if p == 2.0 {
        return trunc_exp_unchecked(l, t.powf(beta));
    }
    let e = beta / (p - 1.0);
    let lt = t.ln();
    let log_term = |q: f64| -ln_gamma(q + 1.0) + e * q * (lt - q.ln());
    let mut sum = 0.0;
    let mut q = l as f64;
    let mut cur = log_term(q).exp();
    for _ in 0..100_000 {
        sum += cur;
        let next = log_term(q + 1.0).exp();
        let ratio = log_term(q + 2.0) - log_term(q + 1.0);
        let ratio = ratio.exp();
        // Terms decay superexponentially once the ratio drops below one, and
        // the ratio itself keeps decreasing, so a geometric bound is valid.
        if ratio < 1.0 && next < 1e-14 * (sum + 1e-300) {
            let remainder = next / (1.0 - ratio);
            if remainder < 1e-12 * sum.max(1e-300) || remainder < 1e-300 {
                sum += remainder.min(next);
                break;
            }
        }
        q += 1.0;
        cur = next;
        if !sum.is_finite() {
            break;
        }
    }
    sum
}

/// `Q_p*(t) = sup_{τ >= 0} (t τ - Q_p(τ))`. Returns `(value, maximizer)`.
pub fn q_p_star(r: &ReactionSpec, prm: &Params, t: f64) -> Result<(f64, f64)> {
    let (l, beta) = exponential_parts(r)?;
    if !(t >= 0.0) {
        return Err(invalid(format!("Q_p* needs t >= 0, got {t}")));
    }
    Ok(conjugate_scan(|x| q_p_series(l, beta, prm.p(), x), t))
}

fn conjugate_scan<Q: Fn(f64) -> f64>(q: Q, t: f64) -> (f64, f64) {
    if t == 0.0 {
        return (0.0, 0.0);
    }
    let obj = |x: f64| {
        let v = t * x - q(x);
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    };
    let mut tmax = 1.0;
    while tmax < 1e8 && obj(2.0 * tmax) >= obj(tmax) {
        tmax *= 2.0;
    }
    tmax *= 2.0;
    let grid = logspace(1e-8, tmax, 2048);
    let mut best = (0.0, 0.0);
    let mut best_i = None;
    for (i, &x) in grid.iter().enumerate() {
        let v = obj(x);
        if v > best.1 {
            best = (x, v);
            best_i = Some(i);
        }
    }
    let Some(i) = best_i else {
        return (0.0, 0.0);
    };
    let lo = if i == 0 { 0.0 } else { grid[i - 1] };
    let hi = grid[(i + 1).min(grid.len() - 1)];
    let (x, v) = golden_section_max(obj, lo, hi, 1e-14);
    if v >= best.1 {
        (v, x)
    } else {
        (best.1, best.0)
    }
}

/// Fenchel-Young gap `Q_p(τ) + Q_p*(t) - tτ`, nonnegative up to the
/// accuracy of the conjugate scan.
pub fn fenchel_young_gap(r: &ReactionSpec, prm: &Params, t: f64, tau: f64) -> Result<f64> {
    let q = q_p_eval(r, prm, tau)?;
    let (star, _) = q_p_star(r, prm, t)?;
    Ok(q + star - t * tau)
}

/// Piecewise-linear table of `Q_p*` on a log grid, for repeated evaluation
/// inside capacity optimization.
#[derive(Debug, Clone)]
pub struct ConjugateTable {
    ts: Vec<f64>,
    vals: Vec<f64>,
}

impl ConjugateTable {
    pub fn new(r: &ReactionSpec, prm: &Params, t_max: f64, nodes: usize) -> Result<Self> {
        let mut ts = vec![0.0];
        ts.extend(logspace(1e-6 * t_max.max(1e-6), t_max, nodes.max(8)));
        let vals = ts
            .iter()
            .map(|&t| q_p_star(r, prm, t).map(|v| v.0))
            .collect::<Result<Vec<_>>>()?;
        Ok(ConjugateTable { ts, vals })
    }

    /// Interpolated value; linear extrapolation past the last node.
    pub fn eval(&self, t: f64) -> f64 {
        let t = t.max(0.0);
        let k = self.ts.partition_point(|&x| x <= t).clamp(1, self.ts.len() - 1);
        let (t0, t1) = (self.ts[k - 1], self.ts[k]);
        let (v0, v1) = (self.vals[k - 1], self.vals[k]);
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }

    /// Slope of the active segment, a subgradient of the interpolant.
    pub fn slope(&self, t: f64) -> f64 {
        let t = t.max(0.0);
        let k = self.ts.partition_point(|&x| x <= t).clamp(1, self.ts.len() - 1);
        (self.vals[k] - self.vals[k - 1]) / (self.ts[k] - self.ts[k - 1])
    }

    /// Node abscissae and values.
    pub fn nodes(&self) -> (&[f64], &[f64]) {
        (&self.ts, &self.vals)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn prm(p: f64) -> Params {
        Params::new(2, 0.5, p, 1.0).unwrap()
    }

    #[test]
    fn truncated_exponential() {
        assert!((trunc_exp_h(1, 1.0).unwrap() - 1.718281828459045).abs() < 1e-15);
        assert_eq!(trunc_exp_h(2, 0.0).unwrap(), 0.0);
        assert!((trunc_exp_h(2, 1.0).unwrap() - 0.7182818284590451).abs() < 1e-15);
        assert!(trunc_exp_h(1, -1.0).is_err());
        // Small argument keeps full relative precision.
        let v = trunc_exp_h(3, 1e-5).unwrap();
        assert!((v / (1e-15 / 6.0) - 1.0).abs() < 1e-4);
        assert!((trunc_exp_h(2, 60.0).unwrap() - (60f64.exp() - 61.0)).abs() / 60f64.exp() < 1e-14);
    }

    #[test]
    fn reactions() {
        let p = prm(2.0);
        assert_eq!(ReactionSpec::power(3.0, &p).unwrap().eval(2.0), 8.0);
        // l = beta = 1 needs p < 2.
        assert!(ReactionSpec::exponential(1, 1.0, 1.0, &p).is_err());
        let r = ReactionSpec::exponential(1, 1.0, 1.0, &prm(1.5)).unwrap();
        assert!((r.eval(1.0) - (E - 1.0)).abs() < 1e-14);
        let r = ReactionSpec::exponential(1, 2.0, 2.0, &p).unwrap();
        assert!((r.eval(1.0) - (E * E - 1.0)).abs() < 1e-13);
        assert!(ReactionSpec::power(0.5, &p).is_err());
        assert!(ReactionSpec::exponential(1, 1.0, 0.5, &p).is_err());
        assert!(ReactionSpec::exponential(1, 1.0, 1.0, &prm(3.0)).is_err());
    }

    #[test]
    fn log_weight() {
        assert_eq!(h_eta(0.0, 0.37).unwrap(), 1.0);
        assert!((h_eta(1.0, 0.25).unwrap() - 0.7213475204444817).abs() < 1e-15);
        assert!((h_eta(2.0, 0.9).unwrap() - 2.0813689810056077).abs() < 1e-14);
        assert!(h_eta(1.0, 0.0).is_err());
        // Continuous at 1/2.
        assert!((h_eta(1.3, 0.5).unwrap() - h_eta(1.3, 0.5000001).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn q_series() {
        let r = ReactionSpec::Exponential { l: 1, a: 1.0, beta: 1.0 };
        assert!((q_p_eval(&r, &prm(2.0), 1.0).unwrap() - (E - 1.0)).abs() < 1e-14);
        let q3 = q_p_eval(&r, &Params::new(2, 0.5, 3.0, 1.0).unwrap(), 1.0).unwrap();
        assert!((q3 - 1.2848349076975232).abs() < 1e-12, "{q3}");
        assert_eq!(q_p_eval(&r, &prm(1.5), 0.0).unwrap(), 0.0);
    }

    #[test]
    fn conjugate_examples() {
        let r = ReactionSpec::Exponential { l: 1, a: 1.0, beta: 1.0 };
        let p = prm(2.0);
        assert_eq!(q_p_star(&r, &p, 0.0).unwrap().0, 0.0);
        assert!(q_p_star(&r, &p, 1.0).unwrap().0.abs() < 1e-12);
        let (v, x) = q_p_star(&r, &p, E).unwrap();
        assert!((v - 1.0).abs() < 1e-8, "{v}");
        assert!((x - 1.0).abs() < 1e-5);
    }

    #[test]
    fn fenchel_young() {
        let r = ReactionSpec::Exponential { l: 1, a: 1.0, beta: 1.0 };
        let p = prm(2.0);
        // Equality at the conjugate pair (e, 1).
        assert!(fenchel_young_gap(&r, &p, E, 1.0).unwrap().abs() < 1e-8);
        assert!(fenchel_young_gap(&r, &p, 2.0, 3.0).unwrap() > 1.0);
        assert!(fenchel_young_gap(&r, &p, 0.0, 0.0).unwrap().abs() < 1e-15);
    }

    #[test]
    fn conjugate_table_interpolates() {
        let r = ReactionSpec::Exponential { l: 1, a: 1.0, beta: 1.0 };
        let p = prm(2.0);
        let tab = ConjugateTable::new(&r, &p, 20.0, 400).unwrap();
        for t in [0.5f64, 2.0, 7.0, 15.0] {
            let exact = if t <= 1.0 { 0.0 } else { t * t.ln() - t + 1.0 };
            assert!((tab.eval(t) - exact).abs() < 5e-3 * (1.0 + exact), "{t}");
        }
    }
}
