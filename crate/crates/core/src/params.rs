use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// The quadruple `(n, s, p, Λ)` governing every formula of the lab.
///
/// Constructed through [`Params::new`], which enforces `n >= 2`, `0 < s < 1`,
/// `1 < p < n/s` and `Λ >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct Params {
    n: usize,
    s: f64,
    p: f64,
    lambda: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct RawParams {
    n: usize,
    s: f64,
    p: f64,
    #[serde(default = "default_lambda")]
    lambda: f64,
}

fn default_lambda() -> f64 {
    1.0
}

impl TryFrom<RawParams> for Params {
    type Error = crate::Error;
    fn try_from(r: RawParams) -> Result<Self> {
        Params::new(r.n, r.s, r.p, r.lambda)
    }
}

impl From<Params> for RawParams {
    fn from(p: Params) -> Self {
        RawParams { n: p.n, s: p.s, p: p.p, lambda: p.lambda }
    }
}

impl Params {
    pub fn new(n: usize, s: f64, p: f64, lambda: f64) -> Result<Self> {
        if n < 2 {
            return Err(invalid(format!("dimension n = {n} must be at least 2")));
        }
        if !(s > 0.0 && s < 1.0) {
            return Err(invalid(format!("fractional order s = {s} must lie in (0, 1)")));
        }
        if !(p > 1.0 && s * p < n as f64) {
            return Err(invalid(format!("growth exponent p = {p} must lie in (1, n/s) = (1, {})", n as f64 / s)));
        }
        if !(lambda >= 1.0 && lambda.is_finite()) {
            return Err(invalid(format!("ellipticity constant {lambda} must be >= 1")));
        }
        Ok(Params { n, s, p, lambda })
    }

    /// Same `(n, Λ)` with a different `(s, p)` pair.
    pub fn with_sp(&self, s: f64, p: f64) -> Result<Self> {
        Params::new(self.n, s, p, self.lambda)
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn s(&self) -> f64 {
        self.s
    }
    pub fn p(&self) -> f64 {
        self.p
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn dim(&self) -> f64 {
        self.n as f64
    }
    pub fn sp(&self) -> f64 {
        self.s * self.p
    }

    /// Weak-Lebesgue integrability exponent `n(p-1)/(n-sp)` of measure-data solutions.
    pub fn q0(&self) -> f64 {
        self.dim() * (self.p - 1.0) / (self.dim() - self.sp())
    }

    /// Upper integrability exponent `n(p-1)/(n-s)` used for approximating solutions.
    pub fn q_bar(&self) -> f64 {
        self.dim() * (self.p - 1.0) / (self.dim() - self.s)
    }

    /// `true` in the strongly singular range `p <= 2 - s/n`.
    pub fn strongly_singular(&self) -> bool {
        self.p <= 2.0 - self.s / self.dim()
    }

    /// `max{2^{(2-p)/(p-1)}, 1}`, the quasi-triangle constant of the Wolff potential.
    pub fn wolff_split_constant(&self) -> f64 {
        2f64.powf((2.0 - self.p) / (self.p - 1.0)).max(1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_exponents() {
        let p = Params::new(2, 0.5, 2.0, 1.0).unwrap();
        assert_eq!(p.sp(), 1.0);
        assert!((p.q0() - 2.0).abs() < 1e-15);
        assert!((p.q_bar() - 4.0 / 3.0).abs() < 1e-15);
        assert!(!p.strongly_singular());
        let p = Params::new(2, 0.7, 1.5, 1.0).unwrap();
        assert!(p.strongly_singular());
        assert!(p.q0() > 0.0 && p.q_bar() > 0.0);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(Params::new(1, 0.5, 2.0, 1.0).is_err());
        assert!(Params::new(2, 1.0, 1.5, 1.0).is_err());
        assert!(Params::new(2, 0.5, 1.0, 1.0).is_err());
        assert!(Params::new(2, 0.5, 4.0, 1.0).is_err());
        assert!(Params::new(2, 0.5, 2.0, 0.5).is_err());
    }

    #[test]
    fn serde_validates() {
        let ok: Params = serde_json::from_str(r#"{"n":2,"s":0.5,"p":2.0}"#).unwrap();
        assert_eq!(ok.lambda(), 1.0);
        assert!(serde_json::from_str::<Params>(r#"{"n":2,"s":0.5,"p":9.0}"#).is_err());
    }
}
