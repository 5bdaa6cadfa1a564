//! The nonlinearity `Φ` with its primitive `Ψ`, and the pair kernel `K`.

use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Result};
use crate::params::Params;
use crate::quadrature::{adaptive_simpson, logspace};

pub type ScalarMap = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type PairMap = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq)]
enum PowerKind {
    Linear,
    Sqrt,
    ThreeHalves,
    Square,
    General,
}

impl PowerKind {
    fn of(p: f64) -> Self {
        if p == 2.0 {
            PowerKind::Linear
        } else if p == 1.5 {
            PowerKind::Sqrt
        } else if p == 2.5 {
            PowerKind::ThreeHalves
        } else if p == 3.0 {
            PowerKind::Square
        } else {
            PowerKind::General
        }
    }
}

#[derive(Clone)]
enum PhiMap {
    Power(PowerKind),
    Custom(ScalarMap),
}

#[derive(Clone)]
enum KernelMap {
    Default,
    Custom(PairMap),
}

/// `Φ` and `K` together with the parameters whose bounds they satisfy.
#[derive(Clone)]
pub struct KernelSpec {
    params: Params,
    phi: PhiMap,
    kernel: KernelMap,
}

impl fmt::Debug for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KernelSpec")
            .field("params", &self.params)
            .field("phi", &match &self.phi {
                PhiMap::Power(k) => format!("power({k:?})"),
                PhiMap::Custom(_) => "custom".into(),
            })
            .field("kernel", &match self.kernel {
                KernelMap::Default => "default",
                KernelMap::Custom(_) => "custom",
            })
            .finish()
    }
}

impl KernelSpec {
    /// `Φ(t) = |t|^{p-2} t` and `K(x, y) = |x - y|^{-(n+sp)}`.
    pub fn fractional_p_laplacian(params: Params) -> Self {
        KernelSpec { params, phi: PhiMap::Power(PowerKind::of(params.p())), kernel: KernelMap::Default }
    }

    /// Replaces `Φ`. The map must be nondecreasing and satisfy
    /// `Λ^{-1}|t|^p <= Φ(t) t <= Λ|t|^p` on a sampled grid.
    pub fn with_phi(mut self, phi: ScalarMap) -> Result<Self> {
        let p = self.params.p();
        let lam = self.params.lambda();
        let mut ts: Vec<f64> = logspace(1e-3, 1e3, 61).into_iter().flat_map(|t| [t, -t]).collect();
        ts.push(0.0);
        ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut prev = f64::NEG_INFINITY;
        for &t in &ts {
            let v = phi(t);
            if !v.is_finite() {
                return Err(invalid(format!("phi({t}) is not finite")));
            }
            if v < prev {
                return Err(invalid(format!("phi must be nondecreasing; decreases near t = {t}")));
            }
            prev = v;
            if t != 0.0 {
                let prod = v * t;
                let base = t.abs().powf(p);
                let slack = 1e-12 * base;
                if prod < base / lam - slack || prod > base * lam + slack {
                    return Err(invalid(format!("phi violates growth bounds at t = {t}")));
                }
            }
        }
        self.phi = PhiMap::Custom(phi);
        Ok(self)
    }

    /// Replaces `K`. The kernel must satisfy
    /// `Λ^{-1} |x-y|^{-(n+sp)} <= K(x,y) <= Λ |x-y|^{-(n+sp)}` on sampled pairs.
    /// It is used in symmetrized form `(K(x,y) + K(y,x)) / 2`.
    pub fn with_kernel(mut self, kernel: PairMap) -> Result<Self> {
        let n = self.params.n();
        let lam = self.params.lambda();
        let a = self.params.dim() + self.params.sp();
        for i in 0..40usize {
            let x: Vec<f64> = (0..n).map(|k| ((i * 7 + k * 3) % 11) as f64 / 11.0).collect();
            let r = 10f64.powf(-2.0 + 3.0 * (i as f64) / 39.0);
            let y: Vec<f64> = (0..n)
                .map(|k| x[k] + r * if k == i % n { 1.0 } else { 0.0 })
                .collect();
            let base = r.powf(-a);
            for v in [kernel(&x, &y), kernel(&y, &x)] {
                if !(v >= base / lam * (1.0 - 1e-12) && v <= base * lam * (1.0 + 1e-12)) {
                    return Err(invalid(format!("kernel violates ellipticity bounds at distance {r}")));
                }
            }
        }
        self.kernel = KernelMap::Custom(kernel);
        Ok(self)
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    /// `true` when `Φ` is the identity (the `p = 2` power case).
    pub fn is_linear(&self) -> bool {
        matches!(self.phi, PhiMap::Power(PowerKind::Linear))
    }

    pub fn has_default_kernel(&self) -> bool {
        matches!(self.kernel, KernelMap::Default)
    }

    #[inline]
    pub fn phi(&self, t: f64) -> f64 {
        match &self.phi {
            PhiMap::Power(kind) => power_phi(*kind, self.params.p(), t),
            PhiMap::Custom(f) => f(t),
        }
    }

    /// `Φ'(t)`; infinite at `t = 0` for `p < 2`.
    #[inline]
    pub fn phi_prime(&self, t: f64) -> f64 {
        match &self.phi {
            PhiMap::Power(kind) => {
                let a = t.abs();
                match kind {
                    PowerKind::Linear => 1.0,
                    PowerKind::Sqrt => 0.5 / a.sqrt(),
                    PowerKind::ThreeHalves => 1.5 * a.sqrt(),
                    PowerKind::Square => 2.0 * a,
                    PowerKind::General => {
                        let p = self.params.p();
                        (p - 1.0) * a.powf(p - 2.0)
                    }
                }
            }
            PhiMap::Custom(f) => {
                let h = 1e-6 * (1.0 + t.abs());
                (f(t + h) - f(t - h)) / (2.0 * h)
            }
        }
    }

    /// `(Φ(t), Φ'(t))` with `|t|` floored at `floor` inside the derivative,
    /// so that zero weights never meet an infinite slope.
    #[inline]
    pub fn phi_and_slope(&self, t: f64, floor: f64) -> (f64, f64) {
        match &self.phi {
            PhiMap::Power(kind) => {
                let a = t.abs().max(floor);
                match kind {
                    PowerKind::Linear => (t, 1.0),
                    PowerKind::Sqrt => {
                        let r = a.sqrt();
                        (if t < 0.0 { -t.abs().sqrt() } else { t.sqrt() }, 0.5 / r)
                    }
                    PowerKind::ThreeHalves => {
                        let r = t.abs().sqrt();
                        (t * r, 1.5 * r)
                    }
                    PowerKind::Square => (t * t.abs(), 2.0 * t.abs()),
                    PowerKind::General => {
                        let p = self.params.p();
                        let d = (p - 1.0) * a.powf(p - 2.0);
                        (power_phi(*kind, p, t), d)
                    }
                }
            }
            PhiMap::Custom(_) => (self.phi(t), self.phi_prime(t).max(floor)),
        }
    }

    /// `(Σ_k w_k Φ(t - u_k), Σ_k w_k Φ'(t - u_k))`, slopes floored as in
    /// [`KernelSpec::phi_and_slope`]. Hot loop of the nonlinear solver.
    pub fn weighted_sums(&self, t: f64, u: &[f64], w: &[f64], floor: f64) -> (f64, f64) {
        match &self.phi {
            PhiMap::Power(PowerKind::Linear) => lanes(t, u, w, |x| (x, 1.0)),
            PhiMap::Power(PowerKind::Sqrt) => {
                let root_floor = floor.sqrt();
                lanes(t, u, w, |x| {
                    let r = x.abs().sqrt();
                    (r.copysign(x), 0.5 / r.max(root_floor))
                })
            }
            PhiMap::Power(PowerKind::ThreeHalves) => lanes(t, u, w, |x| {
                let r = x.abs().sqrt();
                (x * r, 1.5 * r)
            }),
            PhiMap::Power(PowerKind::Square) => lanes(t, u, w, |x| (x * x.abs(), 2.0 * x.abs())),
            _ => lanes(t, u, w, |x| self.phi_and_slope(x, floor)),
        }
    }

    /// `Ψ(t) = ∫_0^{|t|} Φ(τ) dτ`.
    pub fn psi(&self, t: f64) -> f64 {
        let a = t.abs();
        match &self.phi {
            PhiMap::Power(kind) => match kind {
                PowerKind::Linear => 0.5 * a * a,
                PowerKind::Sqrt => a * a.sqrt() / 1.5,
                PowerKind::ThreeHalves => a * a * a.sqrt() / 2.5,
                PowerKind::Square => a * a * a / 3.0,
                PowerKind::General => {
                    let p = self.params.p();
                    a.powf(p) / p
                }
            },
            PhiMap::Custom(f) => {
                if a == 0.0 {
                    0.0
                } else {
                    adaptive_simpson(|tau| f(tau), 0.0, a, 1e-12, 1e-300)
                }
            }
        }
    }

    /// Symmetrized kernel value `(K(x,y) + K(y,x)) / 2`.
    #[inline]
    pub fn kernel(&self, x: &[f64], y: &[f64]) -> f64 {
        match &self.kernel {
            KernelMap::Default => {
                let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                d2.powf(-(self.params.dim() + self.params.sp()) / 2.0)
            }
            KernelMap::Custom(k) => 0.5 * (k(x, y) + k(y, x)),
        }
    }

    /// Kernel value divided by the default kernel, i.e. the coefficient
    /// `a(x,y)` in `K = a |x-y|^{-(n+sp)}`; identically 1 for the default kernel.
    pub fn coefficient(&self, x: &[f64], y: &[f64]) -> f64 {
        match &self.kernel {
            KernelMap::Default => 1.0,
            KernelMap::Custom(k) => {
                let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                0.5 * (k(x, y) + k(y, x)) * d2.powf((self.params.dim() + self.params.sp()) / 2.0)
            }
        }
    }
}

/// Four independent accumulators so the loop body can use vector lanes.
#[inline(always)]
fn lanes(t: f64, u: &[f64], w: &[f64], g: impl Fn(f64) -> (f64, f64)) -> (f64, f64) {
    let (mut f, mut d) = ([0.0; 4], [0.0; 4]);
    let (uc, wc) = (u.chunks_exact(4), w.chunks_exact(4));
    let (ur, wr) = (uc.remainder(), wc.remainder());
    for (uu, ww) in uc.zip(wc) {
        for k in 0..4 {
            let (a, b) = g(t - uu[k]);
            f[k] += a * ww[k];
            d[k] += b * ww[k];
        }
    }
    let (mut fs, mut ds) = ((f[0] + f[1]) + (f[2] + f[3]), (d[0] + d[1]) + (d[2] + d[3]));
    for (v, wv) in ur.iter().zip(wr) {
        let (a, b) = g(t - v);
        fs += a * wv;
        ds += b * wv;
    }
    (fs, ds)
}

#[inline]
fn power_phi(kind: PowerKind, p: f64, t: f64) -> f64 {
    match kind {
        PowerKind::Linear => t,
        PowerKind::Sqrt => {
            let r = t.abs().sqrt();
            if t < 0.0 {
                -r
            } else {
                r
            }
        }
        PowerKind::ThreeHalves => t * t.abs().sqrt(),
        PowerKind::Square => t * t.abs(),
        PowerKind::General => {
            if t == 0.0 {
                0.0
            } else {
                t * t.abs().powf(p - 2.0)
            }
        }
    }
}

/// `Φ(t)` of `k`.
pub fn phi_eval(t: f64, k: &KernelSpec) -> f64 {
    k.phi(t)
}

/// `Ψ(t)` of `k`.
pub fn psi_eval(t: f64, k: &KernelSpec) -> f64 {
    k.psi(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(p: f64) -> KernelSpec {
        KernelSpec::fractional_p_laplacian(Params::new(2, 0.5, p, 1.0).unwrap())
    }

    #[test]
    fn phi_examples() {
        assert_eq!(phi_eval(3.0, &spec(2.0)), 3.0);
        assert!((phi_eval(4.0, &spec(1.5)) - 2.0).abs() < 1e-15);
        assert!((phi_eval(-4.0, &spec(1.5)) + 2.0).abs() < 1e-15);
        assert!((phi_eval(2.0, &spec(1.7)) - 2f64.powf(0.7)).abs() < 1e-14);
    }

    #[test]
    fn psi_examples() {
        assert!((psi_eval(2.0, &spec(2.0)) - 2.0).abs() < 1e-15);
        assert_eq!(psi_eval(0.0, &spec(1.3)), 0.0);
        assert!((psi_eval(4.0, &spec(1.5)) - 16.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn custom_phi_matches_power() {
        let p = 1.5;
        let k = spec(p).with_phi(Arc::new(|t: f64| t.signum() * t.abs().sqrt())).unwrap();
        assert!((k.psi(4.0) - 16.0 / 3.0).abs() < 1e-9);
        assert!((k.phi_prime(4.0) - 0.25).abs() < 1e-6);
    }

    #[test]
    fn rejects_nonmonotone_phi() {
        let prm = Params::new(2, 0.5, 2.0, 4.0).unwrap();
        let k = KernelSpec::fractional_p_laplacian(prm);
        // Within the Λ-band but decreasing between 1 and 1.3.
        let bad = Arc::new(|t: f64| if t.abs() > 1.0 && t.abs() < 1.3 { t / 2.0 } else { t });
        assert!(k.clone().with_phi(bad).is_err());
        let outside = Arc::new(|t: f64| 10.0 * t);
        assert!(k.with_phi(outside).is_err());
    }

    #[test]
    fn custom_kernel_band() {
        let prm = Params::new(2, 0.5, 2.0, 2.0).unwrap();
        let ok = KernelSpec::fractional_p_laplacian(prm)
            .with_kernel(Arc::new(|x: &[f64], y: &[f64]| {
                let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                (1.5 + 0.4 * (x[0] - y[1]).sin()) * d2.powf(-1.5)
            }))
            .unwrap();
        let x = [0.1, 0.2];
        let y = [0.4, -0.3];
        assert_eq!(ok.kernel(&x, &y), ok.kernel(&y, &x));
        let bad = KernelSpec::fractional_p_laplacian(prm)
            .with_kernel(Arc::new(|x: &[f64], y: &[f64]| {
                let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                3.0 * d2.powf(-1.5)
            }));
        assert!(bad.is_err());
    }
}
