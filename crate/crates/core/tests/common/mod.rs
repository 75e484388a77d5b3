//! Shared oracles for the integration tests.
//!
//! The parameter system is integrated here with its own RK4 step-doubling
//! scheme, written from the equations and independent of the library's
//! solvers.

#![allow(dead_code)]

use oscgroup::{CoefficientSet, Expr, KernelParameters, Regime};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Coefficients (a, b, c, d, f, g) at time t.
pub type CoeffFn = dyn Fn(f64) -> [f64; 6] + Sync;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Initial data with |values| ≤ 2, μ(0), β(0) ∈ [0.2, 2].
pub fn random_init(rng: &mut ChaCha8Rng) -> KernelParameters<f64> {
    let mut u = || rng.gen_range(-2.0..=2.0);
    let v = [0.0, u(), 0.0, u(), u(), u(), u()];
    let mut p = KernelParameters::from_array(0.0, v);
    p.mu = rng.gen_range(0.2..=2.0);
    p.beta = rng.gen_range(0.2..=2.0);
    p
}

/// Milder initial data for states that must fit a grid on [−8, 8].
pub fn random_state_init(rng: &mut ChaCha8Rng) -> KernelParameters<f64> {
    KernelParameters {
        t: 0.0,
        mu: rng.gen_range(0.5..=2.0),
        alpha: rng.gen_range(-0.5..=0.5),
        beta: rng.gen_range(0.7..=1.5),
        gamma: rng.gen_range(-2.0..=2.0),
        delta: rng.gen_range(-1.0..=1.0),
        epsilon: rng.gen_range(-1.0..=1.0),
        kappa: rng.gen_range(-2.0..=2.0),
    }
}

/// Right-hand side for y = (μ, α, β, γ, δ, ε, κ):
///
/// ```text
/// μ' = μ (4aα + 2d)
/// α' = −b − 2cα − 4aα² + c₀ aβ⁴
/// β' = −(c + 4aα) β
/// γ' = −aβ²
/// δ' = −(c + 4aα) δ + f + 2gα + 2c₀ aβ³ε
/// ε' = (g − 2aδ) β
/// κ' = gδ − aδ² + c₀ aβ²ε²
/// ```
pub fn system_rhs(k: [f64; 6], c0: f64, y: &[f64; 7]) -> [f64; 7] {
    let [a, b, c, d, f, g] = k;
    let [mu, al, be, _ga, de, ep, _ka] = *y;
    let drift = c + 4.0 * a * al;
    [
        mu * (4.0 * a * al + 2.0 * d),
        -b - 2.0 * c * al - 4.0 * a * al * al + c0 * a * be.powi(4),
        -drift * be,
        -a * be * be,
        -drift * de + f + 2.0 * g * al + 2.0 * c0 * a * be.powi(3) * ep,
        (g - 2.0 * a * de) * be,
        g * de - a * de * de + c0 * a * be * be * ep * ep,
    ]
}

fn rk4_step(coef: &CoeffFn, c0: f64, t: f64, y: &[f64; 7], h: f64) -> [f64; 7] {
    let add = |y: &[f64; 7], k: &[f64; 7], s: f64| {
        let mut out = *y;
        for i in 0..7 {
            out[i] += s * k[i];
        }
        out
    };
    let k1 = system_rhs(coef(t), c0, y);
    let k2 = system_rhs(coef(t + h / 2.0), c0, &add(y, &k1, h / 2.0));
    let k3 = system_rhs(coef(t + h / 2.0), c0, &add(y, &k2, h / 2.0));
    let k4 = system_rhs(coef(t + h), c0, &add(y, &k3, h));
    let mut out = *y;
    for i in 0..7 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Integrates the system from t = 0 to each of `times` (sorted, same sign)
/// with RK4 step doubling and local extrapolation.
pub fn rk_oracle(coef: &CoeffFn, c0: f64, init: &KernelParameters<f64>, times: &[f64], tol: f64) -> Vec<[f64; 7]> {
    let mut y = init.to_array();
    let mut t = 0.0;
    let mut h = 1e-3 * times.last().copied().unwrap_or(1.0).signum();
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        while (target - t).abs() > 1e-15 {
            if (t + h - target) * h.signum() > 0.0 {
                h = target - t;
            }
            let full = rk4_step(coef, c0, t, &y, h);
            let half = rk4_step(coef, c0, t, &y, h / 2.0);
            let two = rk4_step(coef, c0, t + h / 2.0, &half, h / 2.0);
            let mut err: f64 = 0.0;
            for i in 0..7 {
                err = err.max((two[i] - full[i]).abs() / 15.0 / (1.0 + two[i].abs()));
            }
            if err <= tol {
                t += h;
                for i in 0..7 {
                    y[i] = two[i] + (two[i] - full[i]) / 15.0;
                }
            }
            let grow = if err == 0.0 {
                4.0
            } else {
                (0.9 * (tol / err).powf(0.2)).clamp(0.1, 4.0)
            };
            h *= grow;
        }
        t = target;
        out.push(y);
    }
    out
}

/// a = 1 + 0.3 sin t, b = 0.5 + 0.2 cos t, c = 0.1 t, d = 0.05,
/// f = sin 2t, g = 0.2 cos t.
pub const GENERAL: [&str; 6] = [
    "1 + 0.3*sin(t)",
    "0.5 + 0.2*cos(t)",
    "0.1*t",
    "0.05",
    "sin(2*t)",
    "0.2*cos(t)",
];

pub fn coefficient_set(exprs: [&str; 6], regime: Regime, domain: (f64, f64)) -> CoefficientSet<f64> {
    let e: Vec<Expr> = exprs.iter().map(|s| Expr::parse(s).unwrap()).collect();
    CoefficientSet::new(
        e[0].clone(),
        e[1].clone(),
        e[2].clone(),
        e[3].clone(),
        e[4].clone(),
        e[5].clone(),
        regime,
    )
    .with_domain(domain.0, domain.1)
    .unwrap()
}

/// Plain closure over the same expressions, for the RK oracle.
pub fn coefficient_fn(exprs: [&str; 6]) -> impl Fn(f64) -> [f64; 6] + Sync {
    let e: Vec<Expr> = exprs.iter().map(|s| Expr::parse(s).unwrap()).collect();
    move |t| {
        let mut out = [0.0; 6];
        for (slot, ex) in out.iter_mut().zip(&e) {
            *slot = ex.eval(t).unwrap();
        }
        out
    }
}

pub const OSCILLATOR: [&str; 6] = ["1", "1", "0", "0", "0", "0"];
pub const FREE: [&str; 6] = ["1", "0", "0", "0", "0", "0"];
