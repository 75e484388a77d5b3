//! Numerical oracles: the PDE residual of the quadratic Schrödinger equation
//! and the check suite run on scenarios.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex;
use rayon::prelude::*;

use crate::characteristic::CharacteristicData;
use crate::coefficients::{CoefficientSet, Regime};
use crate::error::{Error, Result};
use crate::format::format_real;
use crate::kernel::{
    alpha_link_residual, closed_form_params, gauge_residual, system_residual, ClosedFormCase, FundamentalSolution,
    KernelParameters,
};
use crate::scalar::Real;
use crate::scenario::Scenario;
use crate::states::{self, invariant_apply, oscillator_state, Grid, GridState};
use crate::stencil;
use crate::transforms::{compose, invert, Context, TransformElement};

/// Space-time field ψ(x, t).
pub type Field<T> = Arc<dyn Fn(T, T) -> Result<Complex<T>> + Send + Sync>;

/// Default time step of residual blocks.
pub const DEFAULT_DT: f64 = 1e-3;

/// Samples on a uniform (x, t) lattice, stored one time level after another.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeBlock<T> {
    pub grid: Grid<T>,
    pub t0: T,
    pub dt: T,
    pub levels: usize,
    pub values: Vec<Complex<T>>,
}

impl<T: Real> SpaceTimeBlock<T> {
    /// Samples `f` on `levels` time levels centred on `t_mid`.
    pub fn sample<F>(grid: &Grid<T>, t_mid: T, dt: T, levels: usize, f: F) -> Result<Self>
    where
        F: Fn(T, T) -> Result<Complex<T>> + Sync,
    {
        let t0 = t_mid - dt * T::from_count(levels.saturating_sub(1)) / T::lit(2.0);
        let mut values = Vec::with_capacity(levels * grid.len);
        for j in 0..levels {
            let t = t0 + dt * T::from_count(j);
            values.extend(GridState::sample(grid, t, |x| f(x, t))?.values);
        }
        Ok(SpaceTimeBlock {
            grid: *grid,
            t0,
            dt,
            levels,
            values,
        })
    }

    pub fn level(&self, j: usize) -> &[Complex<T>] {
        &self.values[j * self.grid.len..(j + 1) * self.grid.len]
    }

    pub fn time(&self, j: usize) -> T {
        self.t0 + self.dt * T::from_count(j)
    }
}

/// Relative L² residual of
///
/// ```text
/// iψ_t + aψ_xx − bx²ψ + icxψ_x + idψ + fxψ − igψ_x
/// ```
///
/// normalized by ‖iψ_t‖, over the inner time levels. 4th-order differences
/// in x and 2nd-order central differences in t. With `interior` the two
/// outermost points on each side are skipped; otherwise one-sided stencils
/// cover them.
pub fn pde_residual<T: Real>(cs: &CoefficientSet<T>, block: &SpaceTimeBlock<T>, interior: bool) -> Result<T> {
    let nx = block.grid.len;
    if block.levels < 5 || nx < 9 {
        return Err(Error::GridTooCoarse(format!(
            "need at least 5 time levels and 9 points, got {} and {nx}",
            block.levels
        )));
    }
    if block.values.len() != block.levels * nx {
        return Err(Error::Invalid("block size does not match its lattice".into()));
    }
    let i = Complex::new(T::zero(), T::one());
    let two = T::lit(2.0);
    let skip = if interior { 2 } else { 0 };
    let mut res2 = T::zero();
    let mut ref2 = T::zero();
    for j in 1..block.levels - 1 {
        let t = block.time(j);
        let v = cs.values(t)?;
        let now = block.level(j);
        let (d1, d2) = stencil::derivatives(now, block.grid.dx);
        let before = block.level(j - 1);
        let after = block.level(j + 1);
        for k in skip..nx - skip {
            let x = block.grid.x(k);
            let dt_term = i * (after[k] - before[k]) / (two * block.dt);
            let r = dt_term + d2[k] * v.a - now[k] * (v.b * x * x)
                + i * d1[k] * (v.c * x)
                + i * now[k] * v.d
                + now[k] * (v.f * x)
                - i * d1[k] * v.g;
            res2 += r.norm_sqr();
            ref2 += dt_term.norm_sqr();
        }
    }
    if ref2 == T::zero() {
        return Err(Error::Invalid(
            "ψ_t vanishes on the block; relative residual undefined".into(),
        ));
    }
    Ok((res2 / ref2).sqrt())
}

/// ψₙ of the Hermite–Gauss family for `cs`, built from the Ermakov-type
/// general solution.
pub fn hermite_gauss_field<T: Real>(cs: &CoefficientSet<T>, n: usize, init: KernelParameters<T>) -> Result<Field<T>> {
    let cs = cs.clone().with_regime(Regime::Ermakov);
    if let Some(case) = ClosedFormCase::for_coefficients(&cs) {
        return Ok(closed_form_field(case, n, init));
    }
    let fs = FundamentalSolution::new(&cs)?;
    Ok(Arc::new(move |x, t| oscillator_state(n, &fs.general(&init, t)?, x)))
}

/// ψₙ with parameters from the explicit preset formulas.
pub fn closed_form_field<T: Real>(case: ClosedFormCase, n: usize, init: KernelParameters<T>) -> Field<T> {
    Arc::new(move |x, t| oscillator_state(n, &closed_form_params(case, &init, t)?, x))
}

/// A sample solution of the equation named by `ctx`.
pub fn context_solution<T: Real>(ctx: &Context<T>, n: usize, init: KernelParameters<T>) -> Result<Field<T>> {
    hermite_gauss_field(&ctx.coefficients(), n, init)
}

/// Relative PDE residual of the image of `chi` under `te` on `grid`, around
/// time `t` with the default time step.
pub fn transform_residual<T: Real>(te: &TransformElement<T>, chi: &Field<T>, grid: &Grid<T>, t: T) -> Result<T> {
    let block = SpaceTimeBlock::sample(grid, t, T::lit(DEFAULT_DT), 5, |x, s| te.apply(chi.as_ref(), x, s))?;
    pde_residual(&te.target().coefficients(), &block, true)
}

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
    pub note: Option<String>,
}

impl CheckResult {
    fn from_value(name: &str, threshold: f64, value: Result<f64>) -> Self {
        match value {
            Ok(v) => CheckResult {
                name: name.to_string(),
                value: v,
                threshold,
                pass: v.is_finite() && v < threshold,
                note: None,
            },
            Err(e) => CheckResult {
                name: name.to_string(),
                value: f64::NAN,
                threshold,
                pass: false,
                note: Some(e.to_string()),
            },
        }
    }
}

/// Results of a suite run, sorted by check name.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub checks: Vec<CheckResult>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("check,value,threshold,pass\n");
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                c.name,
                format_real(c.value),
                format_real(c.threshold),
                c.pass
            );
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let _ = write!(
                out,
                "{:<20} {:>5}  value {:<12.4e} threshold {:.1e}",
                c.name,
                if c.pass { "PASS" } else { "FAIL" },
                c.value,
                c.threshold
            );
            if let Some(note) = &c.note {
                let _ = write!(out, "  ({note})");
            }
            out.push('\n');
        }
        let failed = self.checks.iter().filter(|c| !c.pass).count();
        let _ = writeln!(out, "{} checks, {} failed", self.checks.len(), failed);
        out
    }
}

/// Every check the suite knows, with its default threshold.
pub const CHECKS: [(&str, f64); 10] = [
    ("alpha_link", 1e-6),
    ("closed_form", 1e-9),
    ("eigen", 1e-4),
    ("gauge", 1e-8),
    ("norm", 1e-8),
    ("pde_residual", 1e-4),
    ("propagator", 1e-6),
    ("system_residual", 1e-6),
    ("transform_roundtrip", 1e-8),
    ("wronskian", 1e-7),
];

fn default_threshold(name: &str) -> Option<f64> {
    CHECKS.iter().find(|(n, _)| *n == name).map(|(_, v)| *v)
}

/// Checks run when a scenario does not list any.
pub fn applicable_checks(sc: &Scenario) -> Vec<&'static str> {
    let ermakov = sc.coefficients.regime == Regime::Ermakov;
    let closed = ClosedFormCase::for_coefficients(&sc.coefficients).is_some();
    CHECKS
        .iter()
        .map(|(n, _)| *n)
        .filter(|n| match *n {
            "closed_form" => closed,
            "eigen" | "norm" | "pde_residual" | "propagator" => ermakov,
            _ => true,
        })
        .collect()
}

struct SuiteContext {
    sc: Scenario,
    fs: FundamentalSolution<f64>,
    grid: Grid<f64>,
    times: Vec<f64>,
}

impl SuiteContext {
    fn trajectory(&self) -> impl Fn(f64) -> Result<KernelParameters<f64>> + Sync + '_ {
        move |t| self.fs.general(&self.sc.init, t)
    }

    fn max_over_times<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(f64) -> Result<f64> + Sync,
    {
        let vals = self.times.par_iter().map(|&t| f(t)).collect::<Result<Vec<_>>>()?;
        Ok(vals.into_iter().fold(0.0, f64::max))
    }

    fn require_ermakov(&self) -> Result<()> {
        if self.sc.coefficients.regime == Regime::Ermakov {
            Ok(())
        } else {
            Err(Error::Invalid("check needs the Ermakov regime (c0 = 1)".into()))
        }
    }

    fn state(&self, t: f64) -> Result<(KernelParameters<f64>, GridState<f64>)> {
        let kp = self.fs.general(&self.sc.init, t)?;
        let gs = GridState::sample(&self.grid, t, |x| oscillator_state(self.sc.level, &kp, x))?;
        Ok((kp, gs))
    }

    fn run(&self, name: &str) -> Result<f64> {
        let cs = &self.sc.coefficients;
        match name {
            "wronskian" => self.max_over_times(|t| self.fs.characteristic().wronskian_residual(t)),
            "closed_form" => {
                let case = ClosedFormCase::for_coefficients(cs)
                    .ok_or_else(|| Error::Invalid("no closed form for these coefficients".into()))?;
                self.max_over_times(|t| {
                    let a = self.fs.general(&self.sc.init, t)?;
                    let b = closed_form_params(case, &self.sc.init, t)?;
                    Ok(a.max_abs_diff(&b))
                })
            }
            "system_residual" => self.max_over_times(|t| {
                let r = system_residual(cs, self.trajectory(), t)?;
                Ok(r.into_iter().fold(0.0, f64::max))
            }),
            "alpha_link" => self.max_over_times(|t| alpha_link_residual(cs, self.trajectory(), t)),
            "gauge" => self.max_over_times(|t| {
                let p = self.fs.general(&self.sc.init, t)?;
                gauge_residual(cs, &self.sc.init, &p)
            }),
            "norm" => {
                self.require_ermakov()?;
                let vals = self
                    .times
                    .par_iter()
                    .map(|&t| {
                        let (kp, gs) = self.state(t)?;
                        Ok(gs.norm().powi(2) * kp.mu * kp.beta.abs())
                    })
                    .collect::<Result<Vec<f64>>>()?;
                let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                Ok(hi - lo)
            }
            "eigen" => {
                self.require_ermakov()?;
                let level = self.sc.level as f64 + 0.5;
                self.max_over_times(|t| {
                    let (kp, gs) = self.state(t)?;
                    let lambda = cs.lambda(t)?;
                    let e = invariant_apply(&kp, lambda, &gs)?;
                    let n = gs.values.len();
                    let (mut num, mut den) = (0.0, 0.0);
                    for k in 2..n - 2 {
                        num += (e.values[k] - gs.values[k] * (lambda * level)).norm_sqr();
                        den += gs.values[k].norm_sqr();
                    }
                    Ok((num / den).sqrt())
                })
            }
            "pde_residual" => {
                self.require_ermakov()?;
                let field = |x: f64, t: f64| oscillator_state(self.sc.level, &self.fs.general(&self.sc.init, t)?, x);
                self.max_over_times(|t| {
                    let block = SpaceTimeBlock::sample(&self.grid, t, DEFAULT_DT, 5, field)?;
                    pde_residual(cs, &block, true)
                })
            }
            "propagator" => {
                self.require_ermakov()?;
                let (_, initial) = self.state(0.0)?;
                let times: Vec<f64> = self.times.iter().copied().filter(|t| *t != 0.0).collect();
                let vals = times
                    .iter()
                    .map(|&t| {
                        let fp = self.fs.at(t)?;
                        let moved = states::propagate(&fp, &initial, &self.grid)?;
                        let (_, exact) = self.state(t)?;
                        moved.sup_distance(&exact)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(vals.into_iter().fold(0.0, f64::max))
            }
            "transform_roundtrip" => {
                let te = match &self.sc.transform {
                    Some(name) => TransformElement::named(name)?,
                    None => TransformElement::ansatz_from_solution(&self.fs, self.sc.init, self.time_span())?,
                };
                let round = compose(&te, &invert(&te)?)?;
                let stride = (self.grid.len / 16).max(1);
                self.max_over_times(|t| {
                    let mut worst: f64 = 0.0;
                    for x in self.grid.points().step_by(stride) {
                        let m = round.map(x, t)?;
                        let dev = (m.prefactor - Complex::new(1.0, 0.0))
                            .norm()
                            .max((m.xi - x).abs())
                            .max((m.tau - t).abs());
                        worst = worst.max(dev);
                    }
                    Ok(worst)
                })
            }
            other => Err(Error::Invalid(format!("unknown check {other}"))),
        }
    }

    /// Validity interval of the scenario's Ansatz: the time window widened
    /// by half a step.
    fn time_span(&self) -> (f64, f64) {
        let lo = self.times.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.times.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let pad = 0.5 * self.sc.step.abs().max(1e-6);
        (lo - pad, hi + pad)
    }
}

/// Runs the scenario's checks, each independently; errors are recorded as
/// failed checks.
pub fn run_suite(sc: &Scenario) -> Report {
    let names: Vec<String> = match &sc.checks {
        Some(list) => list.clone(),
        None if sc.is_empty() => Vec::new(),
        None => applicable_checks(sc).into_iter().map(String::from).collect(),
    };
    if names.is_empty() {
        return Report::default();
    }
    let threshold = |name: &str| {
        sc.thresholds
            .get(name)
            .copied()
            .or_else(|| default_threshold(name))
            .unwrap_or(f64::NAN)
    };
    let ctx = build_context(sc);
    let mut checks: Vec<CheckResult> = names
        .par_iter()
        .map(|name| {
            let value = match &ctx {
                Ok(ctx) => ctx.run(name),
                Err(e) => Err(e.clone()),
            };
            CheckResult::from_value(name, threshold(name), value)
        })
        .collect();
    checks.sort_by(|a, b| a.name.cmp(&b.name));
    Report { checks }
}

fn build_context(sc: &Scenario) -> Result<SuiteContext> {
    let cd = CharacteristicData::new(&sc.coefficients)?;
    let fs = FundamentalSolution::from_characteristic(cd);
    let (lo, hi, dx) = sc.grid;
    let grid = Grid::span(lo, hi, dx)?;
    Ok(SuiteContext {
        sc: sc.clone(),
        fs,
        grid,
        times: sc.times()?,
    })
}

/// Convenience: the suite's default thresholds as a map.
pub fn default_thresholds() -> BTreeMap<&'static str, f64> {
    CHECKS.iter().copied().collect()
}
