//! Standard solutions of the characteristic equation
//!
//! ```text
//! μ'' - τ(t) μ' + 4 σ(t) μ = 0
//! ```
//!
//! with μ₀(0) = 0, μ₀'(0) = 2a(0) and μ₁(0) = 1, μ₁'(0) = 0. Both solutions
//! are integrated together from t = 0 towards each end of the coefficient
//! domain and stored as dense output.

use std::sync::Arc;

use crate::coefficients::CoefficientSet;
use crate::error::{Error, Result};
use crate::ode::{self, hermite_cubic, OdeOptions};
use crate::quad::{self, QuadOptions};
use crate::scalar::Real;

pub const DEFAULT_GRID_STEP: f64 = 1e-3;
pub const DEFAULT_RK_TOL: f64 = 1e-10;

/// Values and first derivatives of both standard solutions at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharPoint<T> {
    pub mu0: T,
    pub dmu0: T,
    pub mu1: T,
    pub dmu1: T,
}

#[derive(Debug, Clone)]
pub struct CharacteristicData<T> {
    coefficients: Arc<CoefficientSet<T>>,
    a0: T,
    /// Ascending node times; `nodes[origin] == 0`.
    nodes: Vec<T>,
    // [μ₀, μ₀', μ₁, μ₁'] and its time derivative at every node
    y: Vec<[T; 4]>,
    dy: Vec<[T; 4]>,
    origin: usize,
    tol: T,
}

/// Integrates both standard solutions over the coefficient domain.
pub fn solve_characteristic<T: Real>(cs: &CoefficientSet<T>, grid_step: T, rk_tol: T) -> Result<CharacteristicData<T>> {
    if !(grid_step > T::zero()) {
        return Err(Error::Invalid(format!("grid_step must be positive, got {grid_step}")));
    }
    if !(rk_tol >= T::lit(1e-14) && rk_tol <= T::lit(1e-6)) {
        return Err(Error::Invalid(format!(
            "rk_tol must lie in [1e-14, 1e-6], got {rk_tol}"
        )));
    }
    let a0 = cs.a.eval(T::zero())?;
    if a0 == T::zero() {
        return Err(Error::domain("a(0) = 0: the standard solution μ₀ is degenerate"));
    }
    let four = T::lit(4.0);
    let rhs = |t: T, y: &[T; 4]| -> Result<[T; 4]> {
        let (tau, sigma) = cs.tau_sigma(t)?;
        Ok([
            y[1],
            tau * y[1] - four * sigma * y[0],
            y[3],
            tau * y[3] - four * sigma * y[2],
        ])
    };
    let opts = OdeOptions {
        tol: rk_tol,
        max_step: grid_step,
        ..OdeOptions::default()
    };
    let y0 = [T::zero(), T::lit(2.0) * a0, T::one(), T::zero()];
    let (t_min, t_max) = cs.domain();
    let fwd = ode::integrate(rhs, T::zero(), y0, t_max, &opts)?;
    let bwd = ode::integrate(rhs, T::zero(), y0, t_min, &opts)?;

    let n = fwd.t.len() + bwd.t.len() - 1;
    let mut nodes = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    let mut dy = Vec::with_capacity(n);
    for i in (1..bwd.t.len()).rev() {
        nodes.push(bwd.t[i]);
        y.push(bwd.y[i]);
        dy.push(bwd.dy[i]);
    }
    let origin = nodes.len();
    nodes.extend_from_slice(&fwd.t);
    y.extend_from_slice(&fwd.y);
    dy.extend_from_slice(&fwd.dy);

    Ok(CharacteristicData {
        coefficients: Arc::new(cs.clone()),
        a0,
        nodes,
        y,
        dy,
        origin,
        tol: rk_tol,
    })
}

impl<T: Real> CharacteristicData<T> {
    /// Solves with the default node spacing and tolerance.
    pub fn new(cs: &CoefficientSet<T>) -> Result<Self> {
        solve_characteristic(cs, T::lit(DEFAULT_GRID_STEP), T::lit(DEFAULT_RK_TOL))
    }

    pub fn coefficients(&self) -> &CoefficientSet<T> {
        &self.coefficients
    }

    pub fn a0(&self) -> T {
        self.a0
    }

    /// Integration tolerance: values of μ₀, μ₁ below it are not resolved.
    pub fn tol(&self) -> T {
        self.tol
    }

    pub fn domain(&self) -> (T, T) {
        (self.nodes[0], self.nodes[self.nodes.len() - 1])
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Index of the interval `[nodes[i], nodes[i+1]]` containing `t`.
    fn locate(&self, t: T) -> Result<usize> {
        let (lo, hi) = self.domain();
        if !(lo <= t && t <= hi) {
            return Err(Error::domain(format!(
                "t = {t} outside the characteristic domain [{lo}, {hi}]"
            )));
        }
        let i = self.nodes.partition_point(|&s| s <= t);
        Ok(i.saturating_sub(1).min(self.nodes.len() - 2))
    }

    fn component(&self, i: usize, k: usize, t: T) -> T {
        hermite_cubic(
            self.nodes[i],
            self.nodes[i + 1],
            self.y[i][k],
            self.y[i + 1][k],
            self.dy[i][k],
            self.dy[i + 1][k],
            t,
        )
    }

    pub fn eval(&self, t: T) -> Result<CharPoint<T>> {
        let i = self.locate(t)?;
        Ok(CharPoint {
            mu0: self.component(i, 0, t),
            dmu0: self.component(i, 1, t),
            mu1: self.component(i, 2, t),
            dmu1: self.component(i, 3, t),
        })
    }

    /// (μ₀, μ₀') at `t`.
    pub fn mu0(&self, t: T) -> Result<(T, T)> {
        let p = self.eval(t)?;
        Ok((p.mu0, p.dmu0))
    }

    /// (μ₁, μ₁') at `t`.
    pub fn mu1(&self, t: T) -> Result<(T, T)> {
        let p = self.eval(t)?;
        Ok((p.mu1, p.dmu1))
    }

    /// Node times strictly between 0 and `t`, in order of travel from 0.
    pub fn nodes_towards(&self, t: T) -> Vec<(T, CharPoint<T>)> {
        let point = |i: usize| {
            let y = self.y[i];
            (
                self.nodes[i],
                CharPoint {
                    mu0: y[0],
                    dmu0: y[1],
                    mu1: y[2],
                    dmu1: y[3],
                },
            )
        };
        if t > T::zero() {
            (self.origin + 1..self.nodes.len())
                .take_while(|&i| self.nodes[i] < t)
                .map(point)
                .collect()
        } else {
            (0..self.origin)
                .rev()
                .take_while(|&i| self.nodes[i] > t)
                .map(point)
                .collect()
        }
    }

    /// |μ₀μ₁' − μ₀'μ₁ + 2a(0) exp(∫₀ᵗ τ ds)|, with the integral of τ taken by
    /// adaptive quadrature.
    pub fn wronskian_residual(&self, t: T) -> Result<T> {
        let p = self.eval(t)?;
        let cs = &self.coefficients;
        let int_tau = quad::integrate(
            |s| cs.tau_sigma(s).map(|(tau, _)| tau),
            T::zero(),
            t,
            &QuadOptions::with_tol(T::lit(1e-12)),
        )?
        .value;
        let w = p.mu0 * p.dmu1 - p.dmu0 * p.mu1;
        Ok((w + T::lit(2.0) * self.a0 * int_tau.exp()).abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::Regime;
    use crate::expr::Expr;
    use std::f64::consts::PI;

    fn osc() -> CharacteristicData<f64> {
        CharacteristicData::new(&CoefficientSet::oscillator().with_domain(-3.0, 3.0).unwrap()).unwrap()
    }

    #[test]
    fn free_particle_closed_form() {
        let cd = CharacteristicData::new(&CoefficientSet::<f64>::free().with_domain(-2.0, 2.0).unwrap()).unwrap();
        for t in [-1.7, -0.3, 0.0, 0.5, 1.0, 1.999] {
            let p = cd.eval(t).unwrap();
            assert!((p.mu0 - 2.0 * t).abs() < 1e-10, "t={t}");
            assert!((p.mu1 - 1.0).abs() < 1e-10);
            assert!((p.dmu0 - 2.0).abs() < 1e-10);
            assert!(p.dmu1.abs() < 1e-10);
        }
    }

    #[test]
    fn oscillator_closed_form() {
        let cd = osc();
        let t = PI / 5.0;
        let p = cd.eval(t).unwrap();
        assert!((p.mu0 - (2.0 * t).sin()).abs() < 1e-9);
        assert!((p.mu1 - (2.0 * t).cos()).abs() < 1e-9);
        let (m0, _) = cd.mu0(PI / 8.0).unwrap();
        assert!((m0 - 0.5f64.sqrt()).abs() < 1e-9);
        let (m0, dm0) = cd.mu0(-1.1).unwrap();
        assert!((m0 - (-2.2f64).sin()).abs() < 1e-9);
        assert!((dm0 - 2.0 * (-2.2f64).cos()).abs() < 1e-9);
    }

    #[test]
    fn initial_conditions_exact() {
        let cs = CoefficientSet::<f64>::new(
            Expr::parse("2 + sin(t)").unwrap(),
            Expr::one(),
            Expr::zero(),
            Expr::zero(),
            Expr::zero(),
            Expr::zero(),
            Regime::Riccati,
        )
        .with_domain(-1.0, 1.0)
        .unwrap();
        let cd = CharacteristicData::new(&cs).unwrap();
        let p = cd.eval(0.0).unwrap();
        assert_eq!((p.mu0, p.dmu0, p.mu1, p.dmu1), (0.0, 4.0, 1.0, 0.0));
        assert_eq!(cd.wronskian_residual(0.0).unwrap(), 0.0);
    }

    #[test]
    fn wronskian_identity() {
        let cd = osc();
        assert!(cd.wronskian_residual(0.7).unwrap() < 1e-9);
        let free = CharacteristicData::new(&CoefficientSet::<f64>::free().with_domain(0.0, 2.0).unwrap()).unwrap();
        assert!(free.wronskian_residual(1.0).unwrap() < 1e-12);

        let cs = CoefficientSet::<f64>::new(
            Expr::parse("1 + 0.5*sin(t)").unwrap(),
            Expr::parse("1 + 0.2*t").unwrap(),
            Expr::parse("0.3").unwrap(),
            Expr::parse("0.1*exp(t)").unwrap(),
            Expr::zero(),
            Expr::zero(),
            Regime::Riccati,
        )
        .with_domain(-1.0, 1.5)
        .unwrap();
        let cd = CharacteristicData::new(&cs).unwrap();
        for t in [-0.9, -0.2, 0.4, 1.3] {
            assert!(cd.wronskian_residual(t).unwrap() < 1e-7, "t={t}");
        }
    }

    #[test]
    fn node_spacing_bounded_by_grid_step() {
        let cs = CoefficientSet::<f64>::oscillator().with_domain(-1.0, 1.0).unwrap();
        let cd = solve_characteristic(&cs, 0.01, 1e-10).unwrap();
        assert!(cd.nodes.windows(2).all(|w| w[1] - w[0] <= 0.01 + 1e-12 && w[1] > w[0]));
        assert_eq!(cd.nodes[cd.origin], 0.0);
    }

    #[test]
    fn dense_output_between_nodes() {
        let cd = osc();
        let mut worst = 0.0f64;
        for k in 0..997 {
            let t = -2.9 + k as f64 * 0.005_81;
            let p = cd.eval(t).unwrap();
            worst = worst
                .max((p.mu0 - (2.0 * t).sin()).abs())
                .max((p.dmu0 - 2.0 * (2.0 * t).cos()).abs());
        }
        assert!(worst < 10.0 * DEFAULT_RK_TOL, "worst = {worst:e}");
    }

    #[test]
    fn tolerance_controls_accuracy() {
        // With a loose node spacing the step size is set by the tolerance.
        let cs = CoefficientSet::<f64>::oscillator().with_domain(0.0, 3.0).unwrap();
        let deviation = |tol: f64| {
            let cd = solve_characteristic(&cs, 10.0, tol).unwrap();
            cd.nodes
                .iter()
                .zip(&cd.y)
                .map(|(&t, y)| (y[0] - (2.0 * t).sin()).abs().max((y[2] - (2.0 * t).cos()).abs()))
                .fold(0.0, f64::max)
        };
        let mut tol = 1e-6;
        let mut prev = deviation(tol);
        for _ in 0..8 {
            tol /= 2.0;
            let dev = deviation(tol);
            assert!(dev < prev, "tol={tol:e}: {dev:e} !< {prev:e}");
            prev = dev;
        }
    }

    #[test]
    fn bad_arguments_rejected() {
        let cs = CoefficientSet::<f64>::free();
        assert!(matches!(solve_characteristic(&cs, 0.0, 1e-10), Err(Error::Invalid(_))));
        assert!(matches!(solve_characteristic(&cs, 1e-3, 1e-3), Err(Error::Invalid(_))));
        let cs = CoefficientSet::<f64>::new(
            Expr::parse("sin(t)").unwrap(),
            Expr::one(),
            Expr::zero(),
            Expr::zero(),
            Expr::zero(),
            Expr::zero(),
            Regime::Riccati,
        )
        .with_domain(-1.0, 2.0)
        .unwrap();
        // a(0) = 0 leaves the normalization of the first solution undefined
        assert!(matches!(solve_characteristic(&cs, 1e-3, 1e-10), Err(Error::Domain(_))));
    }

    #[test]
    fn single_precision_oscillator() {
        let cs = CoefficientSet::<f32>::oscillator().with_domain(-1.0, 1.0).unwrap();
        let cd = solve_characteristic(&cs, 1e-2, 1e-6).unwrap();
        let p = cd.eval(0.6).unwrap();
        assert!((p.mu0 - 1.2f32.sin()).abs() < 1e-4);
    }
}
