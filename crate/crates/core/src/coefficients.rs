//! Coefficients of the quadratic Hamiltonian
//!
//! ```text
//! i ψ_t = -a ψ_xx + b x² ψ - i c x ψ_x - i d ψ - f x ψ + i g ψ_x
//! ```
//!
//! together with the derived characteristic coefficients τ, σ and the
//! gauge factor λ.

use std::fmt;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::quad::{self, QuadOptions};
use crate::scalar::Real;

/// Which autonomous target equation the transformed wave function obeys:
/// the free particle (`Riccati`, c₀ = 0) or the oscillator (`Ermakov`, c₀ = 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    Riccati,
    Ermakov,
}

impl Regime {
    pub fn c0(self) -> u8 {
        match self {
            Regime::Riccati => 0,
            Regime::Ermakov => 1,
        }
    }

    pub fn from_c0(c0: u8) -> Result<Self> {
        match c0 {
            0 => Ok(Regime::Riccati),
            1 => Ok(Regime::Ermakov),
            _ => Err(Error::Invalid(format!("c0 must be 0 or 1, got {c0}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Preset {
    Free,
    Oscillator,
    Driven(Expr),
}

/// The six coefficient functions, the regime flag and the time domain.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSet<T> {
    pub a: Expr,
    pub b: Expr,
    pub c: Expr,
    pub d: Expr,
    pub f: Expr,
    pub g: Expr,
    pub regime: Regime,
    domain: (T, T),
    da: Expr,
    dd: Expr,
}

/// Coefficient values at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientValues<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
    pub f: T,
    pub g: T,
}

pub const DEFAULT_DOMAIN: (f64, f64) = (-10.0, 10.0);

impl<T: Real> CoefficientSet<T> {
    pub fn new(a: Expr, b: Expr, c: Expr, d: Expr, f: Expr, g: Expr, regime: Regime) -> Self {
        let da = a.derivative();
        let dd = d.derivative();
        CoefficientSet {
            a,
            b,
            c,
            d,
            f,
            g,
            regime,
            domain: (T::lit(DEFAULT_DOMAIN.0), T::lit(DEFAULT_DOMAIN.1)),
            da,
            dd,
        }
    }

    /// Builds one of the named coefficient sets. The regime defaults to
    /// Riccati; use [`CoefficientSet::with_regime`] to switch.
    pub fn preset(preset: Preset) -> Self {
        let z = Expr::zero;
        match preset {
            Preset::Free => Self::new(Expr::one(), z(), z(), z(), z(), z(), Regime::Riccati),
            Preset::Oscillator => Self::new(Expr::one(), Expr::one(), z(), z(), z(), z(), Regime::Riccati),
            Preset::Driven(f) => Self::new(Expr::one(), Expr::one(), z(), z(), f, z(), Regime::Riccati),
        }
    }

    pub fn free() -> Self {
        Self::preset(Preset::Free)
    }

    pub fn oscillator() -> Self {
        Self::preset(Preset::Oscillator)
    }

    pub fn with_regime(mut self, regime: Regime) -> Self {
        self.regime = regime;
        self
    }

    /// Sets the closed time domain; it must contain `t = 0`.
    pub fn with_domain(mut self, t_min: T, t_max: T) -> Result<Self> {
        if !(t_min <= T::zero() && T::zero() <= t_max && t_min < t_max) {
            return Err(Error::Invalid(format!("domain [{t_min}, {t_max}] must contain 0")));
        }
        self.domain = (t_min, t_max);
        Ok(self)
    }

    pub fn domain(&self) -> (T, T) {
        self.domain
    }

    pub fn c0(&self) -> u8 {
        self.regime.c0()
    }

    pub fn in_domain(&self, t: T) -> bool {
        self.domain.0 <= t && t <= self.domain.1
    }

    fn check_domain(&self, t: T) -> Result<()> {
        if self.in_domain(t) {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "t = {t} outside the domain [{}, {}]",
                self.domain.0, self.domain.1
            )))
        }
    }

    pub fn values(&self, t: T) -> Result<CoefficientValues<T>> {
        Ok(CoefficientValues {
            a: self.a.eval(t)?,
            b: self.b.eval(t)?,
            c: self.c.eval(t)?,
            d: self.d.eval(t)?,
            f: self.f.eval(t)?,
            g: self.g.eval(t)?,
        })
    }

    pub fn a_prime(&self, t: T) -> Result<T> {
        self.da.eval(t)
    }

    pub fn d_prime(&self, t: T) -> Result<T> {
        self.dd.eval(t)
    }

    pub fn is_free(&self) -> bool {
        self.a.constant_value() == Some(1.0)
            && [&self.b, &self.c, &self.d, &self.f, &self.g]
                .iter()
                .all(|e| e.is_identically_zero())
    }

    pub fn is_oscillator(&self) -> bool {
        self.a.constant_value() == Some(1.0)
            && self.b.constant_value() == Some(1.0)
            && [&self.c, &self.d, &self.f, &self.g]
                .iter()
                .all(|e| e.is_identically_zero())
    }

    pub fn is_undriven(&self) -> bool {
        self.f.is_identically_zero() && self.g.is_identically_zero()
    }

    /// c − 2d when it does not depend on time.
    fn gauge_rate(&self) -> Option<f64> {
        Some(self.c.constant_value()? - 2.0 * self.d.constant_value()?)
    }

    /// Characteristic coefficients (τ, σ) at `t`.
    pub fn tau_sigma(&self, t: T) -> Result<(T, T)> {
        self.check_domain(t)?;
        let v = self.values(t)?;
        if v.a == T::zero() {
            return Err(Error::domain(format!("a(t) vanishes at t = {t}")));
        }
        let a_log = self.a_prime(t)? / v.a;
        let two = T::lit(2.0);
        let tau = a_log - two * v.c + T::lit(4.0) * v.d;
        let mut sigma = v.a * v.b - v.c * v.d + v.d * v.d;
        if !self.d.is_identically_zero() {
            if v.d == T::zero() {
                return Err(Error::domain(format!("d(t) vanishes at t = {t}")));
            }
            let d_log = self.d_prime(t)? / v.d;
            sigma += v.d / two * (a_log - d_log);
        }
        Ok((tau, sigma))
    }

    /// Gauge factor λ(t) = exp(-∫₀ᵗ (c - 2d) ds).
    pub fn lambda(&self, t: T) -> Result<T> {
        self.check_domain(t)?;
        if t == T::zero() {
            return Ok(T::one());
        }
        if let Some(k) = self.gauge_rate() {
            return Ok(if k == 0.0 { T::one() } else { (-T::lit(k) * t).exp() });
        }
        let integral = self.integrate_c_minus_2d(T::zero(), t)?;
        Ok((-integral).exp())
    }

    /// ∫ₛᵗ (c − 2d) dr.
    pub fn integrate_c_minus_2d(&self, s: T, t: T) -> Result<T> {
        let two = T::lit(2.0);
        let opts = QuadOptions::with_tol(T::lit(1e-10));
        let r = quad::integrate(|r| Ok(self.c.eval(r)? - two * self.d.eval(r)?), s, t, &opts)?;
        Ok(r.value)
    }
}

impl<T: Real> fmt::Display for CoefficientSet<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "a = {}, b = {}, c = {}, d = {}, f = {}, g = {}, c0 = {}",
            self.a,
            self.b,
            self.c,
            self.d,
            self.f,
            self.g,
            self.c0()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn custom(a: &str, b: &str, c: &str, d: &str) -> CoefficientSet<f64> {
        let p = |s: &str| Expr::parse(s).unwrap();
        CoefficientSet::new(p(a), p(b), p(c), p(d), Expr::zero(), Expr::zero(), Regime::Riccati)
    }

    #[test]
    fn tau_sigma_presets() {
        let free = CoefficientSet::<f64>::free();
        let osc = CoefficientSet::<f64>::oscillator();
        for t in [-3.0, 0.0, 0.4, 7.5] {
            assert_eq!(free.tau_sigma(t).unwrap(), (0.0, 0.0));
            assert_eq!(osc.tau_sigma(t).unwrap(), (0.0, 1.0));
        }
    }

    #[test]
    fn tau_from_log_derivative_of_a() {
        let cs = custom("exp(2*t)", "0", "0", "0");
        let (tau, sigma) = cs.tau_sigma(0.0).unwrap();
        assert!((tau - 2.0).abs() < 1e-15);
        assert_eq!(sigma, 0.0);
    }

    #[test]
    fn sigma_with_nonzero_d() {
        // a = 1 + t, b = 2, c = 0.5, d = exp(t):
        // σ = ab - cd + d² + d/2 (1/(1+t) - 1)
        let cs = custom("1 + t", "2", "0.5", "exp(t)");
        let t = 0.3f64;
        let (a, d) = (1.0 + t, t.exp());
        let expect = a * 2.0 - 0.5 * d + d * d + d / 2.0 * (1.0 / a - 1.0);
        let (tau, sigma) = cs.tau_sigma(t).unwrap();
        assert!((sigma - expect).abs() < 1e-14);
        assert!((tau - (1.0 / a - 1.0 + 4.0 * d)).abs() < 1e-14);
    }

    #[test]
    fn singular_coefficients_rejected() {
        let cs = custom("t", "1", "0", "0");
        assert!(matches!(cs.tau_sigma(0.0), Err(Error::Domain(_))));
        let cs = custom("1", "1", "0", "t");
        assert!(matches!(cs.tau_sigma(0.0), Err(Error::Domain(_))));
        assert!(cs.tau_sigma(0.5).is_ok());
        let cs = CoefficientSet::<f64>::free().with_domain(-1.0, 1.0).unwrap();
        assert!(matches!(cs.tau_sigma(1.5), Err(Error::Domain(_))));
        assert!(CoefficientSet::<f64>::free().with_domain(0.5, 1.0).is_err());
    }

    #[test]
    fn lambda_examples() {
        let osc = CoefficientSet::<f64>::oscillator();
        assert_eq!(osc.lambda(5.0).unwrap(), 1.0);
        let cs = custom("1", "0", "2", "0");
        assert!((cs.lambda(1.0).unwrap() - (-2.0f64).exp()).abs() < 1e-12);
        assert_eq!(cs.lambda(0.0).unwrap(), 1.0);
        let cs = custom("1", "0", "0", "1");
        assert!((cs.lambda(1.0).unwrap() - 2.0f64.exp()).abs() < 1e-10);
        let cs = custom("1", "0", "sin(t)", "0");
        assert!((cs.lambda(2.0).unwrap() - (2.0f64.cos() - 1.0).exp()).abs() < 1e-12);
    }

    #[test]
    fn driven_preset_is_oscillator_plus_force() {
        let f = Expr::parse("sin(t)").unwrap();
        let cs = CoefficientSet::<f64>::preset(Preset::Driven(f.clone()));
        assert_eq!(cs.f, f);
        assert_eq!(cs.b, Expr::one());
        assert!(!cs.is_undriven());
        assert!(CoefficientSet::<f64>::oscillator().is_oscillator());
        assert!(CoefficientSet::<f64>::free().is_free());
    }

    proptest! {
        #[test]
        fn lambda_multiplicative(s in 0.05f64..2.0, frac in 0.05f64..0.95) {
            let cs = custom("1", "0", "0.3 + sin(t)", "0.2*cos(3*t)");
            let t = s + 3.0 * frac;
            let s_part = cs.lambda(s).unwrap();
            let rest = (-cs.integrate_c_minus_2d(s, t).unwrap()).exp();
            let whole = cs.lambda(t).unwrap();
            prop_assert!((whole - s_part * rest).abs() < 1e-9);
        }
    }
}
