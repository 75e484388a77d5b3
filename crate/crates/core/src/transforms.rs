//! Executable transformations between solution spaces.
//!
//! Every element is a point map `(x, t) ↦ (P, ξ, τ)` acting on a source
//! solution χ by
//!
//! ```text
//! ψ(x, t) = P(x, t) · χ(ξ(x, t), τ(x, t))
//! ```
//!
//! and ψ solves the target equation whenever χ solves the source one.

use std::collections::VecDeque;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_complex::Complex;

use crate::coefficients::{CoefficientSet, Regime};
use crate::error::{Error, Result};
use crate::kernel::{FundamentalSolution, KernelParameters};
use crate::scalar::Real;
use crate::states::{Grid, GridState};

/// Shrink factor applied to validity intervals bounded by a singularity.
pub const VALIDITY_MARGIN: f64 = 0.9;

/// The equation a solution belongs to.
#[derive(Clone)]
pub enum Context<T> {
    /// iψ_t = −ψ_xx
    Free,
    /// iψ_t = −ψ_xx + x²ψ
    Oscillator,
    Equation(Arc<CoefficientSet<T>>),
}

impl<T: Real> Context<T> {
    /// Collapses coefficient sets equal to a preset onto the named variant.
    pub fn from_coefficients(cs: &CoefficientSet<T>) -> Self {
        if cs.is_free() {
            Context::Free
        } else if cs.is_oscillator() {
            Context::Oscillator
        } else {
            Context::Equation(Arc::new(cs.clone()))
        }
    }

    /// The equation χ solves after the Ansatz in the given regime.
    pub fn autonomous(regime: Regime) -> Self {
        match regime {
            Regime::Riccati => Context::Free,
            Regime::Ermakov => Context::Oscillator,
        }
    }

    pub fn coefficients(&self) -> CoefficientSet<T> {
        match self {
            Context::Free => CoefficientSet::free(),
            Context::Oscillator => CoefficientSet::oscillator(),
            Context::Equation(cs) => (**cs).clone(),
        }
    }
}

impl<T: Real> PartialEq for Context<T> {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Context::Free, Context::Free) | (Context::Oscillator, Context::Oscillator) => true,
            (Context::Equation(a), Context::Equation(b)) => {
                a.a == b.a && a.b == b.b && a.c == b.c && a.d == b.d && a.f == b.f && a.g == b.g
            }
            _ => false,
        }
    }
}

impl<T: Real> fmt::Debug for Context<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Context::Free => write!(f, "Free"),
            Context::Oscillator => write!(f, "Oscillator"),
            Context::Equation(cs) => write!(f, "Equation({cs})"),
        }
    }
}

/// Image of one space-time point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointMap<T> {
    pub prefactor: Complex<T>,
    pub xi: T,
    pub tau: T,
}

pub type Trajectory<T> = Arc<dyn Fn(T) -> Result<KernelParameters<T>> + Send + Sync>;

/// Last few values of a map keyed by time. Sampling a grid evaluates the
/// same time once per point, and a trajectory may be costly.
struct TimeMemo<T, V> {
    slots: Mutex<VecDeque<(T, V)>>,
}

impl<T: Real, V: Clone> TimeMemo<T, V> {
    const CAPACITY: usize = 32;

    fn new() -> Self {
        TimeMemo {
            slots: Mutex::new(VecDeque::with_capacity(Self::CAPACITY)),
        }
    }

    fn get_or<F: FnOnce() -> Result<V>>(&self, t: T, compute: F) -> Result<V> {
        if let Some((_, v)) = self.lock().iter().find(|(k, _)| *k == t) {
            return Ok(v.clone());
        }
        let v = compute()?;
        let mut slots = self.lock();
        if slots.len() == Self::CAPACITY {
            slots.pop_front();
        }
        slots.push_back((t, v.clone()));
        Ok(v)
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, VecDeque<(T, V)>> {
        self.slots.lock().unwrap_or_else(|e| e.into_inner())
    }
}

fn memoized<T: Real>(traj: Trajectory<T>) -> Trajectory<T> {
    let memo = TimeMemo::new();
    Arc::new(move |t| memo.get_or(t, || traj(t)))
}

#[derive(Clone)]
enum Kind<T> {
    Ansatz(Trajectory<T>),
    /// Inverse of an Ansatz; `(t_lo, t_hi)` is the original time interval.
    AnsatzInverse(Trajectory<T>, (T, T), Arc<TimeMemo<T, T>>),
    Galilei {
        v: T,
        x0: T,
        t0: T,
        phase: T,
    },
    Dilatation(T),
    Expansion(T),
    ExpansionSingular,
    OscToFree,
    FreeToOsc,
    OscReflection(T),
    Composite(Vec<TransformElement<T>>),
}

/// An invertible map between solution spaces with its contexts and the
/// time interval on which it is defined.
#[derive(Clone)]
pub struct TransformElement<T> {
    kind: Kind<T>,
    source: Context<T>,
    target: Context<T>,
    validity: (T, T),
}

impl<T: Real> fmt::Debug for TransformElement<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}[{:?} -> {:?} on ({}, {})]",
            self.name(),
            self.source,
            self.target,
            self.validity.0,
            self.validity.1
        )
    }
}

fn unbounded<T: Real>() -> (T, T) {
    (T::neg_infinity(), T::infinity())
}

impl<T: Real> TransformElement<T> {
    fn primitive(kind: Kind<T>, source: Context<T>, target: Context<T>, validity: (T, T)) -> Self {
        TransformElement {
            kind,
            source,
            target,
            validity,
        }
    }

    /// Ansatz with an explicit parameter trajectory. χ solves the free
    /// (c₀ = 0) or oscillator (c₀ = 1) equation, ψ the equation of `cs`.
    pub fn ansatz(cs: &CoefficientSet<T>, trajectory: Trajectory<T>, validity: (T, T)) -> Result<Self> {
        if !(validity.0 < validity.1 && validity.0.is_finite() && validity.1.is_finite()) {
            return Err(Error::Invalid("an Ansatz needs a finite validity interval".into()));
        }
        Ok(Self::primitive(
            Kind::Ansatz(memoized(trajectory)),
            Context::autonomous(cs.regime),
            Context::from_coefficients(cs),
            validity,
        ))
    }

    /// Ansatz driven by the general solution for the given initial data.
    pub fn ansatz_from_solution(
        fs: &FundamentalSolution<T>,
        init: KernelParameters<T>,
        validity: (T, T),
    ) -> Result<Self> {
        let owned = fs.clone();
        let traj: Trajectory<T> = Arc::new(move |t| owned.general(&init, t));
        Self::ansatz(fs.coefficients(), traj, validity)
    }

    /// ψ = exp(i(Vx/2 − V²t/4)) χ(x − Vt + x₀, t − t₀).
    pub fn galilei(v: T, x0: T, t0: T) -> Self {
        Self::galilei_with_phase(v, x0, t0, T::zero())
    }

    /// Galilei element with an extra constant phase.
    pub fn galilei_with_phase(v: T, x0: T, t0: T, phase: T) -> Self {
        Self::primitive(
            Kind::Galilei { v, x0, t0, phase },
            Context::Free,
            Context::Free,
            unbounded(),
        )
    }

    /// ψ = χ(lx, l²t), l ≠ 0.
    pub fn dilatation(l: T) -> Result<Self> {
        if l == T::zero() || !l.is_finite() {
            return Err(Error::Invalid("dilatation factor must be finite and nonzero".into()));
        }
        Ok(Self::primitive(
            Kind::Dilatation(l),
            Context::Free,
            Context::Free,
            unbounded(),
        ))
    }

    /// ψ = (1+mt)^{−1/2} exp(imx²/(4(1+mt))) χ(x/(1+mt), t/(1+mt)).
    pub fn expansion(m: T) -> Self {
        let margin = T::lit(VALIDITY_MARGIN);
        let validity = if m > T::zero() {
            (-margin / m, T::infinity())
        } else if m < T::zero() {
            (T::neg_infinity(), -margin / m)
        } else {
            unbounded()
        };
        Self::primitive(Kind::Expansion(m), Context::Free, Context::Free, validity)
    }

    /// ψ = (2t)^{−1/2} exp(ix²/(4t)) χ(−x/(2t), −1/(4t)) for t > 0.
    pub fn expansion_singular() -> Self {
        Self::primitive(
            Kind::ExpansionSingular,
            Context::Free,
            Context::Free,
            (T::zero(), T::infinity()),
        )
    }

    /// ψ = e^{−(i/2)x² tan 2t} / √cos 2t · χ(x / cos 2t, tan(2t)/2): sends
    /// free solutions χ to oscillator solutions ψ.
    pub fn osc_to_free() -> Self {
        let edge = T::lit(VALIDITY_MARGIN) * T::FRAC_PI_4();
        Self::primitive(Kind::OscToFree, Context::Free, Context::Oscillator, (-edge, edge))
    }

    /// ψ = (4t²+1)^{−1/4} exp(itx²/(4t²+1)) χ(x/√(4t²+1), ½ arctan 2t):
    /// sends oscillator solutions χ to free solutions ψ.
    pub fn free_to_osc() -> Self {
        Self::primitive(Kind::FreeToOsc, Context::Oscillator, Context::Free, unbounded())
    }

    /// ψ = χ(−x, t − π/4) on oscillator solutions.
    pub fn oscillator_reflection() -> Self {
        Self::reflection_with_shift(T::FRAC_PI_4())
    }

    fn reflection_with_shift(shift: T) -> Self {
        Self::primitive(
            Kind::OscReflection(shift),
            Context::Oscillator,
            Context::Oscillator,
            unbounded(),
        )
    }

    /// Parameter-free elements by name: `osc_to_free`, `free_to_osc`,
    /// `oscillator_reflection`, `expansion_singular`.
    pub fn named(name: &str) -> Result<Self> {
        match name {
            "osc_to_free" => Ok(Self::osc_to_free()),
            "free_to_osc" => Ok(Self::free_to_osc()),
            "oscillator_reflection" => Ok(Self::oscillator_reflection()),
            "expansion_singular" => Ok(Self::expansion_singular()),
            other => Err(Error::Invalid(format!("unknown transform `{other}`"))),
        }
    }

    /// The identity on solutions of `ctx`.
    pub fn identity(ctx: Context<T>) -> Self {
        Self::primitive(Kind::Composite(Vec::new()), ctx.clone(), ctx, unbounded())
    }

    pub fn source(&self) -> &Context<T> {
        &self.source
    }

    pub fn target(&self) -> &Context<T> {
        &self.target
    }

    pub fn validity(&self) -> (T, T) {
        self.validity
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            Kind::Ansatz(_) => "ansatz",
            Kind::AnsatzInverse(..) => "ansatz_inverse",
            Kind::Galilei { .. } => "galilei",
            Kind::Dilatation(_) => "dilatation",
            Kind::Expansion(_) => "expansion",
            Kind::ExpansionSingular => "expansion_singular",
            Kind::OscToFree => "osc_to_free",
            Kind::FreeToOsc => "free_to_osc",
            Kind::OscReflection(_) => "oscillator_reflection",
            Kind::Composite(_) => "composite",
        }
    }

    fn check_time(&self, t: T) -> Result<()> {
        let (lo, hi) = self.validity;
        let inside = if hi.is_infinite() && lo.is_infinite() {
            true
        } else {
            // open at finite ends
            (lo.is_infinite() || t > lo) && (hi.is_infinite() || t < hi)
        };
        if inside && t.is_finite() {
            Ok(())
        } else {
            Err(Error::singular(
                t.as_f64(),
                format!("outside the validity interval of {}", self.name()),
            ))
        }
    }

    /// Maps `(x, t)` to the prefactor and the source coordinates.
    pub fn map(&self, x: T, t: T) -> Result<PointMap<T>> {
        self.check_time(t)?;
        let one = T::one();
        let two = T::lit(2.0);
        let four = T::lit(4.0);
        let unit = |phase: T| Complex::from_polar(one, phase);
        let real = |r: T| Complex::new(r, T::zero());
        let out = match &self.kind {
            Kind::Ansatz(traj) => {
                let kp = traj(t)?;
                if !(kp.mu > T::zero()) || kp.beta == T::zero() {
                    return Err(Error::singular(t.as_f64(), "μ ≤ 0 or β = 0 along the Ansatz"));
                }
                PointMap {
                    prefactor: unit(kp.alpha * x * x + kp.delta * x + kp.kappa) / kp.mu.sqrt(),
                    xi: kp.beta * x + kp.epsilon,
                    tau: -kp.gamma,
                }
            }
            Kind::AnsatzInverse(traj, span, times) => {
                // here (x, t) are the autonomous coordinates (ξ, τ)
                let s = times.get_or(t, || invert_time(traj.as_ref(), t, *span))?;
                let kp = traj(s)?;
                let y = (x - kp.epsilon) / kp.beta;
                PointMap {
                    prefactor: unit(-(kp.alpha * y * y + kp.delta * y + kp.kappa)) * kp.mu.sqrt(),
                    xi: y,
                    tau: s,
                }
            }
            Kind::Galilei { v, x0, t0, phase } => PointMap {
                prefactor: unit(*v * x / two - *v * *v * t / four + *phase),
                xi: x - *v * t + *x0,
                tau: t - *t0,
            },
            Kind::Dilatation(l) => PointMap {
                prefactor: real(one),
                xi: *l * x,
                tau: *l * *l * t,
            },
            Kind::Expansion(m) => {
                let den = one + *m * t;
                if !(den > T::zero()) {
                    return Err(Error::singular(t.as_f64(), "1 + mt ≤ 0"));
                }
                PointMap {
                    prefactor: unit(*m * x * x / (four * den)) / den.sqrt(),
                    xi: x / den,
                    tau: t / den,
                }
            }
            Kind::ExpansionSingular => PointMap {
                prefactor: unit(x * x / (four * t)) / (two * t).sqrt(),
                xi: -x / (two * t),
                tau: -one / (four * t),
            },
            Kind::OscToFree => {
                let (s, c) = (two * t).sin_cos();
                PointMap {
                    prefactor: unit(-x * x * s / (two * c)) / c.sqrt(),
                    xi: x / c,
                    tau: s / (two * c),
                }
            }
            Kind::FreeToOsc => {
                let q = four * t * t + one;
                PointMap {
                    prefactor: unit(t * x * x / q) / q.sqrt().sqrt(),
                    xi: x / q.sqrt(),
                    tau: (two * t).atan() / two,
                }
            }
            Kind::OscReflection(shift) => PointMap {
                prefactor: real(one),
                xi: -x,
                tau: t - *shift,
            },
            Kind::Composite(parts) => {
                let mut acc = PointMap {
                    prefactor: real(one),
                    xi: x,
                    tau: t,
                };
                for part in parts {
                    let m = part.map(acc.xi, acc.tau)?;
                    acc = PointMap {
                        prefactor: acc.prefactor * m.prefactor,
                        xi: m.xi,
                        tau: m.tau,
                    };
                }
                acc
            }
        };
        Ok(out)
    }

    /// ψ(x, t) for the source solution `chi(ξ, τ)`.
    pub fn apply<F>(&self, chi: F, x: T, t: T) -> Result<Complex<T>>
    where
        F: Fn(T, T) -> Result<Complex<T>>,
    {
        let m = self.map(x, t)?;
        Ok(m.prefactor * chi(m.xi, m.tau)?)
    }

    /// Samples the image of `chi` on a grid at time `t`.
    pub fn apply_grid<F>(&self, chi: F, grid: &Grid<T>, t: T) -> Result<GridState<T>>
    where
        F: Fn(T, T) -> Result<Complex<T>> + Sync,
    {
        GridState::sample(grid, t, |x| self.apply(&chi, x, t))
    }
}

/// `t1 ∘ t2`: the image of χ under `t2` is fed to `t1`. Requires the target
/// of `t2` to be the source of `t1`.
pub fn compose<T: Real>(t1: &TransformElement<T>, t2: &TransformElement<T>) -> Result<TransformElement<T>> {
    if t2.target != t1.source {
        return Err(Error::ContextMismatch(format!(
            "cannot feed {:?} into {:?}",
            t2.target, t1.source
        )));
    }
    let mut parts = Vec::new();
    for el in [t1, t2] {
        match &el.kind {
            Kind::Composite(inner) => parts.extend(inner.iter().cloned()),
            _ => parts.push(el.clone()),
        }
    }
    Ok(TransformElement {
        kind: Kind::Composite(parts),
        source: t2.source.clone(),
        target: t1.target.clone(),
        validity: t1.validity,
    })
}

/// The inverse element: it maps target solutions back to source solutions.
pub fn invert<T: Real>(te: &TransformElement<T>) -> Result<TransformElement<T>> {
    let swap = |kind: Kind<T>, validity: (T, T)| TransformElement {
        kind,
        source: te.target.clone(),
        target: te.source.clone(),
        validity,
    };
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    Ok(match &te.kind {
        Kind::Galilei { v, x0, t0, phase } => {
            let (v, x0, t0, phase) = (*v, *x0, *t0, *phase);
            TransformElement::galilei_with_phase(-v, v * t0 - x0, -t0, -(phase + v * v * t0 / four - v * x0 / two))
        }
        Kind::Dilatation(l) => TransformElement::dilatation(T::one() / *l)?,
        Kind::Expansion(m) => TransformElement::expansion(-*m),
        Kind::ExpansionSingular => {
            return Err(Error::NotInvertible(
                "the singular expansion is not continuous at t = 0".into(),
            ))
        }
        Kind::OscToFree => {
            // τ = tan(2t)/2 over the validity interval
            let edge = (two * te.validity.1).tan() / two;
            swap(Kind::FreeToOsc, (-edge, edge))
        }
        Kind::FreeToOsc => {
            let edge = T::lit(VALIDITY_MARGIN) * T::FRAC_PI_4();
            swap(Kind::OscToFree, (-edge, edge))
        }
        Kind::OscReflection(shift) => TransformElement::reflection_with_shift(-*shift),
        Kind::Ansatz(traj) => {
            let (lo, hi) = te.validity;
            let g_lo = -traj(lo)?.gamma;
            let g_hi = -traj(hi)?.gamma;
            swap(
                Kind::AnsatzInverse(traj.clone(), (lo, hi), Arc::new(TimeMemo::new())),
                (g_lo.min(g_hi), g_lo.max(g_hi)),
            )
        }
        Kind::AnsatzInverse(traj, span, _) => swap(Kind::Ansatz(traj.clone()), *span),
        Kind::Composite(parts) => {
            if parts.iter().any(|p| matches!(p.kind, Kind::ExpansionSingular)) {
                return Err(Error::NotInvertible("composite contains a singular element".into()));
            }
            let inv = parts.iter().rev().map(invert).collect::<Result<Vec<_>>>()?;
            let validity = inv.first().map(|p| p.validity).unwrap_or_else(unbounded);
            swap(Kind::Composite(inv), validity)
        }
    })
}

/// Solves −γ(s) = τ for s in `span` by bisection; γ is monotone there.
fn invert_time<T, F>(traj: &F, tau: T, span: (T, T)) -> Result<T>
where
    T: Real,
    F: Fn(T) -> Result<KernelParameters<T>> + ?Sized,
{
    let f = |s: T| -> Result<T> { Ok(-traj(s)?.gamma - tau) };
    let (mut lo, mut hi) = span;
    let mut f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo == T::zero() {
        return Ok(lo);
    }
    if f_hi == T::zero() {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::singular(
            tau.as_f64(),
            "new time outside the range of the Ansatz",
        ));
    }
    for _ in 0..200 {
        let mid = (lo + hi) / T::lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid)?;
        if f_mid == T::zero() {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) / T::lit(2.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::oscillator_state;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, PI};

    fn textbook_chi(n: usize) -> impl Fn(f64, f64) -> Result<Complex<f64>> {
        move |x, t| {
            oscillator_state(
                n,
                &KernelParameters::from_array(t, [1.0, 0.0, 1.0, -t, 0.0, 0.0, 0.0]),
                x,
            )
        }
    }

    fn gauss_free(x: f64, t: f64) -> Result<Complex<f64>> {
        // free Gaussian packet exp(−x²/(2(1+2it)))/√(1+2it)
        let w = Complex::new(1.0, 2.0 * t);
        Ok((-(x * x) / (w * 2.0)).exp() / w.sqrt())
    }

    #[test]
    fn named_values() {
        let te = TransformElement::osc_to_free();
        let m = te.map(1.0, FRAC_PI_8).unwrap();
        let expect = Complex::from_polar(2f64.powf(0.25), -0.5);
        assert!((m.prefactor - expect).norm() < 1e-14);
        assert!((m.xi - 2f64.sqrt()).abs() < 1e-14);
        assert!((m.tau - 0.5).abs() < 1e-14);

        let m = TransformElement::free_to_osc().map(0.0, 1.0).unwrap();
        assert!((m.prefactor.re - 5f64.powf(-0.25)).abs() < 1e-15);
        assert!((m.tau - 0.5 * 2f64.atan()).abs() < 1e-15);

        let m = TransformElement::expansion(1.0).map(2.0, 1.0).unwrap();
        let expect = Complex::from_polar(2f64.powf(-0.5), 0.5);
        assert!((m.prefactor - expect).norm() < 1e-15);
        assert_eq!((m.xi, m.tau), (1.0, 0.5));

        let m = TransformElement::galilei(2.0, 0.0, 0.0).map(1.0, 1.0).unwrap();
        assert!((m.prefactor - Complex::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn identities() {
        for te in [
            TransformElement::galilei(0.0, 0.0, 0.0),
            TransformElement::dilatation(1.0).unwrap(),
            TransformElement::expansion(0.0),
            TransformElement::identity(Context::Free),
        ] {
            let m = te.map(0.7, 0.3).unwrap();
            assert_eq!((m.xi, m.tau), (0.7, 0.3), "{te:?}");
            assert!((m.prefactor - Complex::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn validity_and_singular_times() {
        let te = TransformElement::<f64>::osc_to_free();
        assert!(matches!(te.map(0.0, FRAC_PI_4), Err(Error::SingularTime { .. })));
        assert!(matches!(
            TransformElement::<f64>::expansion(-1.0).map(0.0, 1.0),
            Err(Error::SingularTime { .. })
        ));
        assert!(TransformElement::<f64>::expansion_singular().map(1.0, 0.0).is_err());
    }

    #[test]
    fn context_mismatch() {
        let r = compose(
            &TransformElement::<f64>::osc_to_free(),
            &TransformElement::osc_to_free(),
        );
        assert!(matches!(r, Err(Error::ContextMismatch(_))));
        assert!(compose(
            &TransformElement::<f64>::free_to_osc(),
            &TransformElement::osc_to_free()
        )
        .is_ok());
    }

    #[test]
    fn local_inverses_on_textbook_state() {
        // oscillator solution → free solution → oscillator solution
        let round = compose(&TransformElement::osc_to_free(), &TransformElement::free_to_osc()).unwrap();
        let chi = textbook_chi(0);
        for t in [-0.35, -0.1, 0.0, 0.2, 0.38] {
            for x in [-3.0, -0.5, 0.0, 1.2, 4.0] {
                let a = round.apply(&chi, x, t).unwrap();
                assert!((a - chi(x, t).unwrap()).norm() < 1e-12, "t={t} x={x}");
            }
        }
    }

    #[test]
    fn inverse_laws() {
        let elements = vec![
            TransformElement::galilei_with_phase(1.3, -0.4, 0.25, 0.1),
            TransformElement::dilatation(1.7).unwrap(),
            TransformElement::expansion(0.8),
            TransformElement::osc_to_free(),
            TransformElement::free_to_osc(),
        ];
        for te in elements {
            let inv = invert(&te).unwrap();
            let left = compose(&te, &inv).unwrap();
            let chi: Box<dyn Fn(f64, f64) -> Result<Complex<f64>>> = match te.target() {
                Context::Free => Box::new(gauss_free),
                _ => Box::new(textbook_chi(1)),
            };
            for t in [0.05, 0.3] {
                for x in [-1.5, 0.2, 2.0] {
                    let a = left.apply(&chi, x, t).unwrap();
                    assert!((a - chi(x, t).unwrap()).norm() < 1e-12, "{te:?} t={t} x={x}");
                }
            }
        }
        let sing = TransformElement::<f64>::expansion_singular();
        assert!(matches!(invert(&sing), Err(Error::NotInvertible(_))));
        let comp = compose(&TransformElement::galilei(1.0, 0.0, 0.0), &sing).unwrap();
        assert!(matches!(invert(&comp), Err(Error::NotInvertible(_))));
    }

    #[test]
    fn reflection_and_inverse() {
        let te = TransformElement::<f64>::oscillator_reflection();
        let m = te.map(1.0, 1.0).unwrap();
        assert_eq!((m.xi, m.tau), (-1.0, 1.0 - PI / 4.0));
        let inv = invert(&te).unwrap();
        let id = compose(&te, &inv).unwrap().map(0.3, 0.2).unwrap();
        assert!((id.xi - 0.3).abs() < 1e-15 && (id.tau - 0.2).abs() < 1e-15);
    }

    #[test]
    fn ansatz_inverse_by_bisection() {
        let cs = CoefficientSet::<f64>::oscillator()
            .with_regime(Regime::Ermakov)
            .with_domain(-2.0, 2.0)
            .unwrap();
        let fs = FundamentalSolution::new(&cs).unwrap();
        let init = KernelParameters::from_array(0.0, [1.0, 0.3, 1.2, 0.0, 0.5, -0.2, 0.1]);
        let te = TransformElement::ansatz_from_solution(&fs, init, (-1.0, 1.0)).unwrap();
        assert_eq!(te.source(), &Context::Oscillator);
        assert_eq!(te.target(), &Context::Oscillator);
        let inv = invert(&te).unwrap();
        let round = compose(&te, &inv).unwrap();
        for (x, t) in [(0.4, 0.3), (-1.1, -0.6), (2.0, 0.9)] {
            let m = round.map(x, t).unwrap();
            assert!((m.xi - x).abs() < 1e-10 && (m.tau - t).abs() < 1e-10, "{m:?}");
            assert!((m.prefactor - Complex::new(1.0, 0.0)).norm() < 1e-10);
        }
    }
}
