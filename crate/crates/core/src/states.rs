//! Hermite–Gauss oscillator states, the Green function, grid propagation and
//! the quadratic dynamic invariant.

use std::io::{self, Write};

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::format::format_real;
use crate::kernel::{FundamentalPoint, KernelParameters};
use crate::scalar::Real;
use crate::stencil;

/// Highest supported level n.
pub const MAX_LEVEL: usize = 200;

/// Edge amplitude above which [`propagate`] refuses the initial data.
pub const EDGE_DECAY: f64 = 1e-12;

/// Physicists' Hermite polynomial Hₙ(x) by the three-term recurrence.
pub fn hermite<T: Real>(n: usize, x: T) -> T {
    let two = T::lit(2.0);
    let mut prev = T::one();
    if n == 0 {
        return prev;
    }
    let mut cur = two * x;
    for k in 1..n {
        let next = two * x * cur - two * T::from_count(k) * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Normalized Hermite function Hₙ(x) e^{−x²/2} / √(2ⁿ n! √π).
///
/// Uses the normalized recurrence with the Gaussian factor kept in log
/// space, so it neither overflows nor underflows prematurely.
pub fn hermite_function<T: Real>(n: usize, x: T) -> Result<T> {
    if n > MAX_LEVEL {
        return Err(Error::Overflow(n));
    }
    let big = T::lit(1e30);
    let mut log_scale = -x * x / T::lit(2.0);
    let mut prev = T::zero();
    let mut cur = T::PI().powf(T::lit(-0.25));
    for k in 0..n {
        let kf = T::from_count(k);
        let k1 = kf + T::one();
        let next = (T::lit(2.0) / k1).sqrt() * x * cur - (kf / k1).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > big {
            prev = prev / big;
            cur = cur / big;
            log_scale += big.ln();
        }
    }
    Ok(cur * log_scale.exp())
}

/// ψₙ(x) of the family generated by the parameters `kp`:
///
/// ```text
/// ψₙ = exp(i(αx² + δx + κ) + i(2n+1)γ) / √μ · φₙ(βx + ε)
/// ```
///
/// with φₙ the normalized Hermite function.
pub fn oscillator_state<T: Real>(n: usize, kp: &KernelParameters<T>, x: T) -> Result<Complex<T>> {
    if !(kp.mu > T::zero()) {
        return Err(Error::domain(format!("μ = {} must be positive", kp.mu)));
    }
    if kp.beta == T::zero() {
        return Err(Error::Invalid("β must be nonzero".into()));
    }
    let amp = hermite_function(n, kp.beta * x + kp.epsilon)? / kp.mu.sqrt();
    let level = T::from_count(2 * n + 1);
    let phase = kp.alpha * x * x + kp.delta * x + kp.kappa + level * kp.gamma;
    Ok(Complex::from_polar(amp, phase))
}

/// Green function G(x, y, t) built from the fundamental solution at t.
/// The square root of 2πiμ₀ is taken on the principal branch.
pub fn green_function<T: Real>(fp: &FundamentalPoint<T>, x: T, y: T) -> Result<Complex<T>> {
    let pref = green_prefactor(fp)?;
    let phase = fp.alpha0 * x * x + fp.beta0 * x * y + fp.gamma0 * y * y + fp.delta0 * x + fp.epsilon0 * y + fp.kappa0;
    Ok(pref * Complex::from_polar(T::one(), phase))
}

fn green_prefactor<T: Real>(fp: &FundamentalPoint<T>) -> Result<Complex<T>> {
    if fp.mu0 == T::zero() {
        return Err(Error::singular(fp.t.as_f64(), "μ₀ vanishes"));
    }
    let arg = Complex::new(T::zero(), T::TAU() * fp.mu0);
    Ok(arg.sqrt().inv())
}

/// Uniform grid `x0 + k·dx`, `k = 0..len`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid<T> {
    pub x0: T,
    pub dx: T,
    pub len: usize,
}

impl<T: Real> Grid<T> {
    pub fn new(x0: T, dx: T, len: usize) -> Result<Self> {
        if !(dx > T::zero()) || len < 8 {
            return Err(Error::Invalid(format!(
                "grid needs dx > 0 and at least 8 points (dx = {dx}, len = {len})"
            )));
        }
        Ok(Grid { x0, dx, len })
    }

    /// Grid covering `[lo, hi]` with spacing `dx`; `hi` is included when it
    /// falls on the lattice.
    pub fn span(lo: T, hi: T, dx: T) -> Result<Self> {
        if !(hi > lo) {
            return Err(Error::Invalid(format!("empty grid [{lo}, {hi}]")));
        }
        let steps = ((hi - lo) / dx + T::lit(1e-9)).floor();
        let len = steps
            .to_usize()
            .ok_or_else(|| Error::Invalid("grid too large".into()))?
            + 1;
        Self::new(lo, dx, len)
    }

    pub fn x(&self, k: usize) -> T {
        self.x0 + self.dx * T::from_count(k)
    }

    pub fn points(&self) -> impl Iterator<Item = T> + '_ {
        (0..self.len).map(move |k| self.x(k))
    }
}

/// Samples of a wave function on a uniform grid at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct GridState<T> {
    pub x0: T,
    pub dx: T,
    pub t: T,
    pub values: Vec<Complex<T>>,
}

impl<T: Real> GridState<T> {
    pub fn new(x0: T, dx: T, t: T, values: Vec<Complex<T>>) -> Result<Self> {
        Grid::new(x0, dx, values.len())?;
        Ok(GridState { x0, dx, t, values })
    }

    /// Samples `f` at every grid point.
    pub fn sample<F>(grid: &Grid<T>, t: T, f: F) -> Result<Self>
    where
        F: Fn(T) -> Result<Complex<T>> + Sync,
    {
        let values = (0..grid.len)
            .into_par_iter()
            .map(|k| f(grid.x(k)))
            .collect::<Result<Vec<_>>>()?;
        Ok(GridState {
            x0: grid.x0,
            dx: grid.dx,
            t,
            values,
        })
    }

    pub fn grid(&self) -> Grid<T> {
        Grid {
            x0: self.x0,
            dx: self.dx,
            len: self.values.len(),
        }
    }

    pub fn x(&self, k: usize) -> T {
        self.x0 + self.dx * T::from_count(k)
    }

    pub fn norm(&self) -> T {
        norm(self)
    }

    /// Largest |ψ| over the grid.
    pub fn sup(&self) -> T {
        self.values.iter().map(|v| v.norm()).fold(T::zero(), T::max)
    }

    /// Largest pointwise |ψ − φ|; the grids must match.
    pub fn sup_distance(&self, other: &Self) -> Result<T> {
        if self.values.len() != other.values.len() {
            return Err(Error::Invalid("grids differ in length".into()));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (*a - *b).norm())
            .fold(T::zero(), T::max))
    }

    /// Writes `x,re,im,abs2` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "x,re,im,abs2")?;
        for (k, v) in self.values.iter().enumerate() {
            writeln!(
                w,
                "{},{},{},{}",
                format_real(self.x(k)),
                format_real(v.re),
                format_real(v.im),
                format_real(v.norm_sqr())
            )?;
        }
        Ok(())
    }
}

/// Trapezoid weights: `dx` inside, `dx/2` at both ends.
fn trapezoid<T: Real, I: Iterator<Item = T>>(values: I, len: usize, dx: T) -> T {
    let half = T::lit(0.5);
    values
        .enumerate()
        .map(|(k, v)| if k == 0 || k + 1 == len { v * half } else { v })
        .sum::<T>()
        * dx
}

/// √(∫|ψ|² dx) by the trapezoid rule.
pub fn norm<T: Real>(gs: &GridState<T>) -> T {
    trapezoid(gs.values.iter().map(|v| v.norm_sqr()), gs.values.len(), gs.dx).sqrt()
}

/// ψ(x, t) = ∫ G(x, y, t) ψ(y, 0) dy by the trapezoid rule over the initial
/// grid, evaluated on `target`.
pub fn propagate<T: Real>(fp: &FundamentalPoint<T>, initial: &GridState<T>, target: &Grid<T>) -> Result<GridState<T>> {
    let n = initial.values.len();
    let edge = initial.values[0].norm().max(initial.values[n - 1].norm());
    if !(edge < T::lit(EDGE_DECAY)) {
        return Err(Error::Truncation { edge: edge.as_f64() });
    }
    let pref = green_prefactor(fp)?;
    let half = T::lit(0.5);
    // y-dependent part of the kernel folded into the data once
    let folded: Vec<(T, Complex<T>)> = initial
        .values
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let y = initial.x(k);
            let w = if k == 0 || k + 1 == n {
                half * initial.dx
            } else {
                initial.dx
            };
            let phase = fp.gamma0 * y * y + fp.epsilon0 * y;
            (y, *v * Complex::from_polar(w, phase))
        })
        .collect();
    let values = (0..target.len)
        .into_par_iter()
        .map(|k| {
            let x = target.x(k);
            let s: Complex<T> = folded
                .iter()
                .map(|(y, u)| *u * Complex::from_polar(T::one(), fp.beta0 * x * *y))
                .fold(Complex::new(T::zero(), T::zero()), |a, b| a + b);
            let outer = fp.alpha0 * x * x + fp.delta0 * x + fp.kappa0;
            pref * Complex::from_polar(T::one(), outer) * s
        })
        .collect();
    Ok(GridState {
        x0: target.x0,
        dx: target.dx,
        t: fp.t,
        values,
    })
}

/// E(t)ψ for the dynamic invariant
///
/// ```text
/// E = (λ/2) [ (p − 2αx − δ)² / β² + (βx + ε)² ],   p = −i ∂/∂x
/// ```
///
/// with derivatives from 4th-order finite differences.
pub fn invariant_apply<T: Real>(kp: &KernelParameters<T>, lambda: T, gs: &GridState<T>) -> Result<GridState<T>> {
    if kp.beta == T::zero() {
        return Err(Error::Invalid("β must be nonzero".into()));
    }
    let (d1, d2) = stencil::derivatives(&gs.values, gs.dx);
    let two = T::lit(2.0);
    let i = Complex::new(T::zero(), T::one());
    let b2 = kp.beta * kp.beta;
    let values = gs
        .values
        .iter()
        .enumerate()
        .map(|(k, &psi)| {
            let x = gs.x(k);
            let shift = two * kp.alpha * x + kp.delta;
            // (p − A)²ψ = −ψ'' + 2iAψ' + iA'ψ + A²ψ with A' = 2α
            let kinetic = -d2[k] + i * d1[k] * (two * shift) + i * psi * (two * kp.alpha) + psi * (shift * shift);
            let xi = kp.beta * x + kp.epsilon;
            (kinetic / b2 + psi * (xi * xi)) * (lambda / two)
        })
        .collect();
    Ok(GridState {
        x0: gs.x0,
        dx: gs.dx,
        t: gs.t,
        values,
    })
}

/// ⟨ψ, Eψ⟩ / ⟨ψ, ψ⟩ with trapezoid integrals.
pub fn invariant_expectation<T: Real>(kp: &KernelParameters<T>, lambda: T, gs: &GridState<T>) -> Result<T> {
    let e = invariant_apply(kp, lambda, gs)?;
    let n = gs.values.len();
    let num = trapezoid(
        gs.values.iter().zip(&e.values).map(|(p, q)| (p.conj() * q).re),
        n,
        gs.dx,
    );
    let den = trapezoid(gs.values.iter().map(|v| v.norm_sqr()), n, gs.dx);
    if den == T::zero() {
        return Err(Error::Invalid("zero state has no expectation".into()));
    }
    Ok(num / den)
}
