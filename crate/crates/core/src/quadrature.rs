//! Small numerical building blocks shared by the potential, grid and
//! capacity code: adaptive Simpson with Richardson correction, log-scale
//! integration, golden-section search and ball/sphere measures.

use statrs::function::gamma::gamma;
use std::f64::consts::PI;

const MAX_DEPTH: u32 = 40;

/// Volume of the unit ball in R^n.
pub fn unit_ball_volume(n: usize) -> f64 {
    let nf = n as f64;
    PI.powf(nf / 2.0) / gamma(nf / 2.0 + 1.0)
}

/// Surface area of the unit sphere S^{n-1} in R^n.
pub fn unit_sphere_area(n: usize) -> f64 {
    let nf = n as f64;
    2.0 * PI.powf(nf / 2.0) / gamma(nf / 2.0)
}

/// Adaptive Simpson rule with Richardson extrapolation on every accepted
/// panel. The error target is `max(rel * I, abs)` with `I` a coarse estimate
/// of `∫|f|`, split in half at every bisection.
pub fn adaptive_simpson<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, rel: f64, abs: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    // Four initial panels so that a symmetric integrand cannot fool the first
    // error estimate.
    let n0 = 4;
    let step = (b - a) / n0 as f64;
    let mut panels = Vec::with_capacity(n0);
    let mut lo = a;
    let mut flo = f(lo);
    let mut scale = 0.0;
    for k in 0..n0 {
        let hi = if k + 1 == n0 { b } else { a + step * (k + 1) as f64 };
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        let fhi = f(hi);
        scale += ((hi - lo) / 6.0 * (flo.abs() + 4.0 * fm.abs() + fhi.abs())).abs();
        panels.push((lo, flo, mid, fm, hi, fhi));
        lo = hi;
        flo = fhi;
    }
    let eps = (rel * scale).max(abs) / n0 as f64;
    panels
        .into_iter()
        .map(|(lo, flo, mid, fm, hi, fhi)| {
            let whole = (hi - lo) / 6.0 * (flo + 4.0 * fm + fhi);
            simpson_rec(&mut f, lo, flo, mid, fm, hi, fhi, whole, eps, 0)
        })
        .sum()
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    fa: f64,
    m: f64,
    fm: f64,
    b: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: u32,
) -> f64 {
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let refined = left + right;
    let diff = refined - whole;
    if depth >= MAX_DEPTH || diff.abs() <= 15.0 * eps || !diff.is_finite() {
        return refined + diff / 15.0;
    }
    simpson_rec(f, a, fa, lm, flm, m, fm, left, 0.5 * eps, depth + 1)
        + simpson_rec(f, m, fm, rm, frm, b, fb, right, 0.5 * eps, depth + 1)
}

/// Integrates `g(t) dt / t` over `[a, b]` (`0 < a < b < inf`) on a logarithmic
/// grid: the substitution `t = e^u` is applied and the range is split into
/// panels of width at most `ln 2` before adaptive refinement. The error
/// target is relative to a coarse estimate of the whole integral.
pub fn integrate_dt_over_t<F: FnMut(f64) -> f64>(mut g: F, a: f64, b: f64, rel: f64, abs: f64) -> f64 {
    debug_assert!(a > 0.0 && b >= a);
    if b <= a {
        return 0.0;
    }
    let (ua, ub) = (a.ln(), b.ln());
    let panels = ((ub - ua) / std::f64::consts::LN_2).ceil().max(1.0) as usize;
    let width = (ub - ua) / panels as f64;
    let mut scale = 0.0;
    let mut coarse = Vec::with_capacity(4 * panels + 1);
    for k in 0..=4 * panels {
        let u = ua + 0.25 * width * k as f64;
        let v = g(u.exp());
        coarse.push(v);
        scale += v.abs() * 0.25 * width;
    }
    let eps = (rel * scale).max(abs) / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let lo = ua + width * k as f64;
        let hi = if k + 1 == panels { ub } else { lo + width };
        total += adaptive_simpson(|u| g(u.exp()), lo, hi, 0.0, eps);
    }
    total
}

/// Golden-section search for the maximum of a unimodal function on `[a, b]`.
/// Returns `(argmax, max)`.
pub fn golden_section_max<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, xtol: f64) -> (f64, f64) {
    let invphi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - invphi * (b - a);
    let mut d = a + invphi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iters = 0;
    while (b - a).abs() > xtol * (1.0 + a.abs().max(b.abs())) && iters < 200 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
        iters += 1;
    }
    let (fa, fb) = (f(a), f(b));
    let mut best = (c, fc);
    for cand in [(d, fd), (a, fa), (b, fb)] {
        if cand.1 > best.1 {
            best = cand;
        }
    }
    best
}

/// Golden-section search for the minimum of a unimodal function on `[a, b]`.
pub fn golden_section_min<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, xtol: f64) -> (f64, f64) {
    let (x, v) = golden_section_max(|t| -f(t), a, b, xtol);
    (x, -v)
}

/// Root of a nondecreasing function on a bracket `[lo, hi]` with
/// `f(lo) <= 0 <= f(hi)`, by bisection.
pub fn bisect_increasing<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, xtol: f64) -> f64 {
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= xtol * (1.0 + mid.abs()) || mid == lo || mid == hi {
            return mid;
        }
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `n` points logarithmically spaced from `a` to `b` inclusive.
pub fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    let (la, lb) = (a.ln(), b.ln());
    (0..n)
        .map(|k| (la + (lb - la) * k as f64 / (n - 1) as f64).exp())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_and_sphere_measures() {
        assert!((unit_ball_volume(2) - PI).abs() < 1e-12);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-12);
        assert!((unit_sphere_area(2) - 2.0 * PI).abs() < 1e-12);
        assert!((unit_sphere_area(3) - 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn simpson_polynomial_and_kink() {
        let v = adaptive_simpson(|x| x * x * x - 2.0 * x, 0.0, 3.0, 1e-12, 0.0);
        assert!((v - (81.0 / 4.0 - 9.0)).abs() < 1e-10);
        let v = adaptive_simpson(|x: f64| (x - 0.3).abs(), 0.0, 1.0, 1e-10, 1e-14);
        assert!((v - (0.045 + 0.245)).abs() < 1e-9);
    }

    #[test]
    fn log_integration_of_power() {
        // int_1^8 t^{-1} dt/t = 1 - 1/8
        let v = integrate_dt_over_t(|t| 1.0 / t, 1.0, 8.0, 1e-12, 0.0);
        assert!((v - 0.875).abs() < 1e-10);
    }

    #[test]
    fn golden_section_finds_peak() {
        let (x, v) = golden_section_max(|t| -(t - 0.7) * (t - 0.7) + 2.0, 0.0, 3.0, 1e-10);
        assert!((x - 0.7).abs() < 1e-6);
        assert!((v - 2.0).abs() < 1e-10);
    }
}
