//! Parameter trajectories of the quadratic transformation: the fundamental
//! solution built from the characteristic data, the general Riccati- and
//! Ermakov-type solutions, explicit formulas for the free and oscillator
//! cases, and finite-difference residuals of the defining ODE system.

use std::sync::Arc;

use crate::characteristic::{CharPoint, CharacteristicData};
use crate::coefficients::{CoefficientSet, Regime};
use crate::error::{Error, Result};
use crate::quad::{self, QuadOptions};
use crate::scalar::Real;

/// One point (μ, α, β, γ, δ, ε, κ) of the parameter manifold at time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParameters<T> {
    pub t: T,
    pub mu: T,
    pub alpha: T,
    pub beta: T,
    pub gamma: T,
    pub delta: T,
    pub epsilon: T,
    pub kappa: T,
}

impl<T: Real> KernelParameters<T> {
    /// μ = β = 1, everything else 0, at t = 0.
    pub fn trivial() -> Self {
        Self::from_array(
            T::zero(),
            [
                T::one(),
                T::zero(),
                T::one(),
                T::zero(),
                T::zero(),
                T::zero(),
                T::zero(),
            ],
        )
    }

    /// Builds from `[μ, α, β, γ, δ, ε, κ]`.
    pub fn from_array(t: T, v: [T; 7]) -> Self {
        KernelParameters {
            t,
            mu: v[0],
            alpha: v[1],
            beta: v[2],
            gamma: v[3],
            delta: v[4],
            epsilon: v[5],
            kappa: v[6],
        }
    }

    pub fn to_array(&self) -> [T; 7] {
        [
            self.mu,
            self.alpha,
            self.beta,
            self.gamma,
            self.delta,
            self.epsilon,
            self.kappa,
        ]
    }

    pub fn at_time(mut self, t: T) -> Self {
        self.t = t;
        self
    }

    /// Largest componentwise absolute difference.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.to_array()
            .iter()
            .zip(other.to_array().iter())
            .map(|(a, b)| (*a - *b).abs())
            .fold(T::zero(), T::max)
    }
}

/// Fundamental solution (α₀ … κ₀) at one time, with the standard solutions
/// and the gauge factor it was built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FundamentalPoint<T> {
    pub t: T,
    pub mu0: T,
    pub mu0_prime: T,
    pub mu1: T,
    pub lambda: T,
    pub alpha0: T,
    pub beta0: T,
    pub gamma0: T,
    pub delta0: T,
    pub epsilon0: T,
    pub kappa0: T,
}

/// Evaluation handle for the fundamental solution over a characteristic
/// solve. Cheap to clone.
#[derive(Debug, Clone)]
pub struct FundamentalSolution<T> {
    cd: Arc<CharacteristicData<T>>,
}

const DRIVE_TOL: f64 = 1e-9;

fn near_zero<T: Real>(x: T, scale: T) -> bool {
    x.abs() <= T::lit(16.0) * T::epsilon() * scale
}

impl<T: Real> FundamentalSolution<T> {
    /// Solves the characteristic equation with default settings.
    pub fn new(cs: &CoefficientSet<T>) -> Result<Self> {
        Ok(Self::from_characteristic(CharacteristicData::new(cs)?))
    }

    pub fn from_characteristic(cd: CharacteristicData<T>) -> Self {
        FundamentalSolution { cd: Arc::new(cd) }
    }

    pub fn characteristic(&self) -> &CharacteristicData<T> {
        &self.cd
    }

    pub fn coefficients(&self) -> &CoefficientSet<T> {
        self.cd.coefficients()
    }

    /// d(0) / (2 a(0)), the constant part of γ₀.
    fn gamma_shift(&self) -> Result<T> {
        let d0 = self.coefficients().d.eval(T::zero())?;
        Ok(d0 / (T::lit(2.0) * self.cd.a0()))
    }

    /// Evaluates (α₀, …, κ₀) and λ at `t ≠ 0`.
    pub fn at(&self, t: T) -> Result<FundamentalPoint<T>> {
        if t == T::zero() {
            return Err(Error::singular(0.0, "the fundamental solution is singular at t = 0"));
        }
        let cs = self.coefficients();
        let p = self.cd.eval(t)?;
        // away from the origin, where μ₀ ≈ μ₀' t, μ₀ is known to the
        // integration tolerance only
        let reach = (p.dmu0 * t).abs();
        if near_zero(p.mu0, T::one() + reach) || p.mu0.abs() <= self.cd.tol() * reach {
            return Err(Error::singular(t.as_f64(), "μ₀ vanishes (caustic)"));
        }
        let v = cs.values(t)?;
        let lambda = cs.lambda(t)?;
        let two = T::lit(2.0);
        let four = T::lit(4.0);
        let alpha0 = p.dmu0 / (four * v.a * p.mu0) - v.d / (two * v.a);
        let beta0 = -lambda / p.mu0;
        let gamma0 = p.mu1 / (two * p.mu0) + self.gamma_shift()?;
        let (delta0, epsilon0, kappa0) = if cs.is_undriven() {
            (T::zero(), T::zero(), T::zero())
        } else {
            self.driven_terms(t, &p, lambda)?
        };
        Ok(FundamentalPoint {
            t,
            mu0: p.mu0,
            mu0_prime: p.dmu0,
            mu1: p.mu1,
            lambda,
            alpha0,
            beta0,
            gamma0,
            delta0,
            epsilon0,
            kappa0,
        })
    }

    /// μ₀ δ₀ at `s`, which stays finite at s = 0.
    fn mu0_delta0(&self, s: T) -> Result<T> {
        if s == T::zero() {
            return Ok(T::zero());
        }
        let cs = self.coefficients();
        let two = T::lit(2.0);
        let opts = QuadOptions::with_tol(T::lit(DRIVE_TOL));
        let inner = quad::integrate(
            |r| {
                let v = cs.values(r)?;
                let p = self.cd.eval(r)?;
                let drive = v.f - v.d * v.g / v.a;
                Ok((drive * p.mu0 + v.g * p.dmu0 / (two * v.a)) / cs.lambda(r)?)
            },
            T::zero(),
            s,
            &opts,
        )?;
        Ok(cs.lambda(s)? * inner.value)
    }

    fn driven_terms(&self, t: T, p: &CharPoint<T>, lambda: T) -> Result<(T, T, T)> {
        let sign0 = self.cd.a0().signum();
        let crosses = self
            .cd
            .nodes_towards(t)
            .iter()
            .map(|(_, q)| q.dmu0)
            .chain(std::iter::once(p.dmu0))
            .any(|d| d.signum() != sign0 || d == T::zero());
        if crosses {
            return Err(Error::Quadrature(format!(
                "μ₀' vanishes between 0 and t = {t}; the driven terms are undefined"
            )));
        }
        let cs = self.coefficients();
        let two = T::lit(2.0);
        let four = T::lit(4.0);
        let eight = T::lit(8.0);
        let opts = QuadOptions::with_tol(T::lit(DRIVE_TOL));

        let pt = self.mu0_delta0(t)?;
        let delta0 = pt / p.mu0;
        let v = cs.values(t)?;

        let eps_int = quad::integrate(
            |s| {
                let v = cs.values(s)?;
                let q = self.cd.eval(s)?;
                let (_, sigma) = cs.tau_sigma(s)?;
                let lam = cs.lambda(s)?;
                let drive = v.f - v.d * v.g / v.a;
                let ps = self.mu0_delta0(s)?;
                Ok(eight * v.a * sigma * lam * ps / (q.dmu0 * q.dmu0) + two * v.a * lam * drive / q.dmu0)
            },
            T::zero(),
            t,
            &opts,
        )?
        .value;
        let epsilon0 = -two * v.a * lambda * delta0 / p.dmu0 + eps_int;

        let kappa_int = quad::integrate(
            |s| {
                let v = cs.values(s)?;
                let q = self.cd.eval(s)?;
                let (_, sigma) = cs.tau_sigma(s)?;
                let drive = v.f - v.d * v.g / v.a;
                let ps = self.mu0_delta0(s)?;
                Ok(-four * v.a * sigma * ps * ps / (q.dmu0 * q.dmu0) - two * v.a * ps * drive / q.dmu0)
            },
            T::zero(),
            t,
            &opts,
        )?
        .value;
        let kappa0 = v.a * p.mu0 * delta0 * delta0 / p.dmu0 + kappa_int;
        Ok((delta0, epsilon0, kappa0))
    }

    /// 2 μ₀ (α(0) + γ₀) written without the 1/μ₀ pole, at a characteristic
    /// point.
    fn regular_denominator(&self, alpha_init: T, p: &CharPoint<T>, shift: T) -> T {
        T::lit(2.0) * p.mu0 * (alpha_init + shift) + p.mu1
    }

    /// General solution for the regime of the coefficient set.
    pub fn general(&self, init: &KernelParameters<T>, t: T) -> Result<KernelParameters<T>> {
        match self.coefficients().regime {
            Regime::Riccati => riccati_general(self, init, t),
            Regime::Ermakov => ermakov_general(self, init, t),
        }
    }

    /// The trajectory t ↦ general(init, t) as a closure.
    pub fn trajectory<'a>(
        &'a self,
        init: KernelParameters<T>,
    ) -> impl Fn(T) -> Result<KernelParameters<T>> + Send + Sync + 'a {
        move |t| self.general(&init, t)
    }

    /// Continuous angle of (M, β(0)²μ₀) from 0 to `t`, where M is the
    /// regularized denominator of the Riccati-type solution. Equals
    /// arctan(β(0)²/(2(α(0)+γ₀))) on the principal branch near t = 0.
    fn ermakov_angle(&self, beta_sq: T, alpha_init: T, t: T, end: &CharPoint<T>) -> Result<T> {
        let shift = self.gamma_shift()?;
        let angle_of = |q: &CharPoint<T>| {
            let m = self.regular_denominator(alpha_init, q, shift);
            (beta_sq * q.mu0).atan2(m)
        };
        let pi = T::PI();
        let two_pi = T::TAU();
        let wrap = |mut d: T| {
            while d > pi {
                d -= two_pi;
            }
            while d < -pi {
                d += two_pi;
            }
            d
        };
        let mut prev = T::zero();
        let mut total = T::zero();
        for (_, q) in self.cd.nodes_towards(t).iter() {
            let phi = angle_of(q);
            total += wrap(phi - prev);
            prev = phi;
        }
        total += wrap(angle_of(end) - prev);
        Ok(total)
    }
}

/// True when `t` is zero to rounding, where μ₀ ≈ 2a(0)t cannot be told
/// apart from a caustic but the general solution equals its initial data.
fn at_origin<T: Real>(fs: &FundamentalSolution<T>, t: T) -> bool {
    near_zero(t * fs.characteristic().a0(), T::one())
}

fn check_init<T: Real>(init: &KernelParameters<T>) -> Result<()> {
    if init.beta == T::zero() {
        return Err(Error::Invalid("initial β must be nonzero".into()));
    }
    if init.to_array().iter().any(|v| !v.is_finite()) {
        return Err(Error::Invalid("initial data must be finite".into()));
    }
    Ok(())
}

/// General solution of the Riccati-type system (c₀ = 0) for the given
/// initial data at t = 0.
pub fn riccati_general<T: Real>(
    fs: &FundamentalSolution<T>,
    init: &KernelParameters<T>,
    t: T,
) -> Result<KernelParameters<T>> {
    check_init(init)?;
    if at_origin(fs, t) {
        return Ok(init.at_time(t));
    }
    let fp = fs.at(t)?;
    let two = T::lit(2.0);
    let shift = fs.gamma_shift()?;
    let cp = CharPoint {
        mu0: fp.mu0,
        dmu0: fp.mu0_prime,
        mu1: fp.mu1,
        dmu1: T::zero(),
    };
    // m = 2 μ₀ (α(0) + γ₀)
    let m = fs.regular_denominator(init.alpha, &cp, shift);
    if near_zero(m, T::one() + (two * fp.mu0 * init.alpha).abs()) {
        return Err(Error::singular(t.as_f64(), "α(0) + γ₀ vanishes"));
    }
    let lam = fp.lambda;
    let shifted = init.delta + fp.epsilon0;
    let ratio = fp.mu0 / m; // 1 / (2 (α(0) + γ₀))
    Ok(KernelParameters {
        t,
        mu: init.mu * m,
        alpha: fp.alpha0 - lam * lam / (two * fp.mu0 * m),
        beta: init.beta * lam / m,
        gamma: init.gamma - init.beta * init.beta * ratio / two,
        delta: fp.delta0 + lam * shifted / m,
        epsilon: init.epsilon - init.beta * shifted * ratio,
        kappa: init.kappa + fp.kappa0 - shifted * shifted * ratio / two,
    })
}

/// General solution of the Ermakov-type system (c₀ = 1) for the given
/// initial data at t = 0. Requires a(0) > 0.
///
/// μ and β are continued through zeros of μ₀ with the positive root, and the
/// arctangent in γ is unwrapped continuously from its principal value at
/// t = 0.
pub fn ermakov_general<T: Real>(
    fs: &FundamentalSolution<T>,
    init: &KernelParameters<T>,
    t: T,
) -> Result<KernelParameters<T>> {
    check_init(init)?;
    if !(fs.characteristic().a0() > T::zero()) {
        return Err(Error::domain("the Ermakov-type solution requires a(0) > 0"));
    }
    if at_origin(fs, t) {
        return Ok(init.at_time(t));
    }
    let fp = fs.at(t)?;
    let two = T::lit(2.0);
    let shift = fs.gamma_shift()?;
    let cp = CharPoint {
        mu0: fp.mu0,
        dmu0: fp.mu0_prime,
        mu1: fp.mu1,
        dmu1: T::zero(),
    };
    let m = fs.regular_denominator(init.alpha, &cp, shift);
    let b = init.beta;
    let b2 = b * b;
    let b3 = b2 * b;
    // n² = μ₀² (β(0)⁴ + 4 (α(0) + γ₀)²)
    let n2 = b2 * b2 * fp.mu0 * fp.mu0 + m * m;
    let n = n2.sqrt();
    let lam = fp.lambda;
    let shifted = init.delta + fp.epsilon0;
    let theta = fs.ermakov_angle(b2, init.alpha, t, &cp)?;
    Ok(KernelParameters {
        t,
        mu: init.mu * n,
        alpha: fp.alpha0 - lam * lam * m / (two * fp.mu0 * n2),
        beta: b * lam / n,
        gamma: init.gamma - theta / two,
        delta: fp.delta0 + lam * (init.epsilon * b3 * fp.mu0 + m * shifted) / n2,
        epsilon: (init.epsilon * m - b * fp.mu0 * shifted) / n,
        kappa: init.kappa + fp.kappa0 - init.epsilon * b3 * shifted * fp.mu0 * fp.mu0 / n2
            + m * fp.mu0 * (init.epsilon * init.epsilon * b2 - shifted * shifted) / (two * n2),
    })
}

/// Dispatches on the regime of the fundamental solution's coefficients.
pub fn general_solution<T: Real>(
    fs: &FundamentalSolution<T>,
    init: &KernelParameters<T>,
    t: T,
) -> Result<KernelParameters<T>> {
    fs.general(init, t)
}

/// Preset cases with explicit solution formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClosedFormCase {
    /// Free particle, Riccati regime.
    FreeToFree,
    /// Oscillator, Riccati regime.
    OscToFree,
    /// Free particle, Ermakov regime.
    FreeToOsc,
    /// Oscillator, Ermakov regime.
    OscToOsc,
}

impl ClosedFormCase {
    pub fn for_coefficients<T: Real>(cs: &CoefficientSet<T>) -> Option<Self> {
        match (cs.is_free(), cs.is_oscillator(), cs.regime) {
            (true, _, Regime::Riccati) => Some(ClosedFormCase::FreeToFree),
            (true, _, Regime::Ermakov) => Some(ClosedFormCase::FreeToOsc),
            (_, true, Regime::Riccati) => Some(ClosedFormCase::OscToFree),
            (_, true, Regime::Ermakov) => Some(ClosedFormCase::OscToOsc),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ClosedFormCase::FreeToFree => "free_to_free",
            ClosedFormCase::OscToFree => "osc_to_free",
            ClosedFormCase::FreeToOsc => "free_to_osc",
            ClosedFormCase::OscToOsc => "osc_to_osc",
        }
    }
}

/// Explicit parameter formulas for the preset cases.
pub fn closed_form_params<T: Real>(
    case: ClosedFormCase,
    init: &KernelParameters<T>,
    t: T,
) -> Result<KernelParameters<T>> {
    check_init(init)?;
    let KernelParameters {
        mu,
        alpha,
        beta,
        gamma,
        delta,
        epsilon,
        kappa,
        ..
    } = *init;
    let one = T::one();
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let b2 = beta * beta;
    let b3 = b2 * beta;
    let b4 = b2 * b2;
    let singular = |den: T| -> Result<()> {
        if near_zero(den, one + (alpha * t).abs()) {
            Err(Error::singular(t.as_f64(), "closed-form denominator vanishes"))
        } else {
            Ok(())
        }
    };
    let out = match case {
        ClosedFormCase::FreeToFree => {
            let den = one + four * alpha * t;
            singular(den)?;
            KernelParameters {
                t,
                mu: mu * den,
                alpha: alpha / den,
                beta: beta / den,
                gamma: gamma - b2 * t / den,
                delta: delta / den,
                epsilon: epsilon - two * beta * delta * t / den,
                kappa: kappa - delta * delta * t / den,
            }
        }
        ClosedFormCase::OscToFree => {
            let (s, c) = (two * t).sin_cos();
            let den = two * alpha * s + c;
            singular(den)?;
            KernelParameters {
                t,
                mu: mu * den,
                alpha: (two * alpha * c - s) / (two * den),
                beta: beta / den,
                gamma: gamma - b2 * s / (two * den),
                delta: delta / den,
                epsilon: epsilon - beta * delta * s / den,
                kappa: kappa - delta * delta * s / (two * den),
            }
        }
        ClosedFormCase::FreeToOsc => {
            let lin = four * alpha * t + one;
            let q = four * b4 * t * t + lin * lin;
            let rq = q.sqrt();
            KernelParameters {
                t,
                mu: mu * rq,
                alpha: (b4 * t + alpha * lin) / q,
                beta: beta / rq,
                // the vector (lin, 2β²t) never crosses the negative axis
                gamma: gamma - (two * b2 * t).atan2(lin) / two,
                delta: (two * epsilon * b3 * t + delta * lin) / q,
                epsilon: (epsilon * lin - two * beta * delta * t) / rq,
                kappa: kappa + t * lin * (epsilon * epsilon * b2 - delta * delta) / q
                    - t * t * four * epsilon * delta * b3 / q,
            }
        }
        ClosedFormCase::OscToOsc => {
            let (s, c) = (two * t).sin_cos();
            let (s4, c4) = (four * t).sin_cos();
            let lin = two * alpha * s + c;
            let q = b4 * s * s + lin * lin;
            let rq = q.sqrt();
            // continuous angle; it agrees with 2t at every multiple of π/2
            let wrapped = (b2 * s).atan2(lin);
            let turns = ((two * t - wrapped) / T::TAU()).round();
            let theta = wrapped + turns * T::TAU();
            KernelParameters {
                t,
                mu: mu * rq,
                alpha: (alpha * c4 + s4 * (b4 + four * alpha * alpha - one) / four) / q,
                beta: beta / rq,
                gamma: gamma - theta / two,
                delta: (delta * lin + epsilon * b3 * s) / q,
                epsilon: (epsilon * lin - beta * delta * s) / rq,
                kappa: kappa
                    + s * s * (epsilon * b2 * (alpha * epsilon - beta * delta) - alpha * delta * delta) / q
                    + s4 * (epsilon * epsilon * b2 - delta * delta) / (four * q),
            }
        }
    };
    Ok(out)
}

/// Step of the central differences used by [`system_residual`].
pub const RESIDUAL_STEP: f64 = 1e-3;

/// 6th-order central first derivative of every component.
fn central_derivative<T, F>(traj: &F, t: T, h: T) -> Result<[T; 7]>
where
    T: Real,
    F: Fn(T) -> Result<KernelParameters<T>>,
{
    const W: [(f64, f64); 6] = [
        (-3.0, -1.0),
        (-2.0, 9.0),
        (-1.0, -45.0),
        (1.0, 45.0),
        (2.0, -9.0),
        (3.0, 1.0),
    ];
    let mut out = [T::zero(); 7];
    for (k, w) in W {
        let p = traj(t + T::lit(k) * h)?.to_array();
        for (o, v) in out.iter_mut().zip(p) {
            *o += T::lit(w) * v;
        }
    }
    let denom = T::lit(60.0) * h;
    Ok(out.map(|v| v / denom))
}

/// Absolute residuals of the six defining equations at `t`, in the order
/// α, β, γ, δ, ε, κ, with derivatives from 6th-order central differences.
pub fn system_residual<T, F>(cs: &CoefficientSet<T>, traj: F, t: T) -> Result<[T; 6]>
where
    T: Real,
    F: Fn(T) -> Result<KernelParameters<T>>,
{
    let d = central_derivative(&traj, t, T::lit(RESIDUAL_STEP))?;
    let p = traj(t)?;
    let v = cs.values(t)?;
    let c0 = T::lit(f64::from(cs.c0()));
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let (al, be, de, ep) = (p.alpha, p.beta, p.delta, p.epsilon);
    let drift = v.c + four * v.a * al;
    Ok([
        (d[1] + v.b + two * v.c * al + four * v.a * al * al - c0 * v.a * be.powi(4)).abs(),
        (d[2] + drift * be).abs(),
        (d[3] + v.a * be * be).abs(),
        (d[4] + drift * de - v.f - two * v.g * al - two * c0 * v.a * be.powi(3) * ep).abs(),
        (d[5] - (v.g - two * v.a * de) * be).abs(),
        (d[6] - v.g * de + v.a * de * de - c0 * v.a * be * be * ep * ep).abs(),
    ])
}

/// |μ'/μ − (4aα + 2d)| at `t`, with μ' from 6th-order central differences.
pub fn alpha_link_residual<T, F>(cs: &CoefficientSet<T>, traj: F, t: T) -> Result<T>
where
    T: Real,
    F: Fn(T) -> Result<KernelParameters<T>>,
{
    let d = central_derivative(&traj, t, T::lit(RESIDUAL_STEP))?;
    let p = traj(t)?;
    let v = cs.values(t)?;
    Ok((d[0] / p.mu - (T::lit(4.0) * v.a * p.alpha + T::lit(2.0) * v.d)).abs())
}

/// |β(t)μ(t) − β(0)μ(0)λ(t)|.
pub fn gauge_residual<T: Real>(
    cs: &CoefficientSet<T>,
    init: &KernelParameters<T>,
    p: &KernelParameters<T>,
) -> Result<T> {
    Ok((p.beta * p.mu - init.beta * init.mu * cs.lambda(p.t)?).abs())
}
