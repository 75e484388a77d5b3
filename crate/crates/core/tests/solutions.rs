mod common;

use oscgroup::{oscillator_state, CoefficientSet, Error, FundamentalSolution, KernelParameters, Regime};

use common::*;

fn rel_diff(got: &[f64; 7], want: &[f64; 7]) -> f64 {
    got.iter()
        .zip(want)
        .map(|(g, w)| (g - w).abs() / (1.0 + w.abs()))
        .fold(0.0, f64::max)
}

fn oracle_agreement(exprs: [&str; 6], regime: Regime, times: &[f64], seed: u64) -> f64 {
    let cs = coefficient_set(exprs, regime, (-1.0, 1.0));
    let fs = FundamentalSolution::new(&cs).unwrap();
    let coef = coefficient_fn(exprs);
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..6 {
        let init = random_state_init(&mut r);
        let oracle = rk_oracle(&coef, regime.c0() as f64, &init, times, 1e-12);
        for (&t, want) in times.iter().zip(&oracle) {
            let got = fs.general(&init, t).unwrap();
            worst = worst.max(rel_diff(&got.to_array(), want));
        }
    }
    worst
}

#[test]
fn general_coefficients_forward_in_time() {
    let times: Vec<f64> = (1..=10).map(|k| 0.05 * k as f64).collect();
    for regime in [Regime::Riccati, Regime::Ermakov] {
        let worst = oracle_agreement(GENERAL, regime, &times, 11);
        assert!(worst < 1e-7, "{regime:?}: {worst:e}");
    }
}

#[test]
fn general_coefficients_backward_in_time() {
    let times: Vec<f64> = (1..=10).map(|k| -0.05 * k as f64).collect();
    for regime in [Regime::Riccati, Regime::Ermakov] {
        let worst = oracle_agreement(GENERAL, regime, &times, 12);
        assert!(worst < 1e-7, "{regime:?}: {worst:e}");
    }
}

#[test]
fn driven_oscillator_matches_oracle() {
    let exprs = ["1", "1", "0", "0", "sin(t)", "0.3"];
    let times: Vec<f64> = (1..=7).map(|k| 0.1 * k as f64).collect();
    let worst = oracle_agreement(exprs, Regime::Ermakov, &times, 13);
    assert!(worst < 1e-7, "{worst:e}");
}

#[test]
fn single_precision_tracks_double() {
    let init64 = KernelParameters {
        mu: 1.3,
        alpha: 0.2,
        beta: 0.9,
        gamma: 0.4,
        delta: -0.3,
        epsilon: 0.5,
        kappa: 0.1,
        ..KernelParameters::trivial()
    };
    let init32 = KernelParameters::<f32>::from_array(0.0, init64.to_array().map(|v| v as f32));
    for exprs in [OSCILLATOR, GENERAL] {
        let cs64 = coefficient_set(exprs, Regime::Ermakov, (-1.0, 1.0));
        let e = [
            cs64.a.clone(),
            cs64.b.clone(),
            cs64.c.clone(),
            cs64.d.clone(),
            cs64.f.clone(),
            cs64.g.clone(),
        ];
        let [a, b, c, d, f, g] = e;
        let cs32 = CoefficientSet::<f32>::new(a, b, c, d, f, g, Regime::Ermakov)
            .with_domain(-1.0, 1.0)
            .unwrap();
        let fs64 = FundamentalSolution::new(&cs64).unwrap();
        let fs32 = FundamentalSolution::new(&cs32).unwrap();
        for t in [-0.5f32, 0.1, 0.35, 0.6] {
            let p32 = fs32.general(&init32, t).unwrap();
            let p64 = fs64.general(&init64, t as f64).unwrap();
            let lifted = p32.to_array().map(|v| v as f64);
            let diff = rel_diff(&lifted, &p64.to_array());
            assert!(diff < 1e-4, "{exprs:?} at {t}: {diff:e}");
            for x in [-1.0f32, 0.0, 0.7] {
                let s32 = oscillator_state(2, &p32, x).unwrap();
                let s64 = oscillator_state(2, &p64, x as f64).unwrap();
                let gap = ((s32.re as f64 - s64.re).powi(2) + (s32.im as f64 - s64.im).powi(2)).sqrt();
                assert!(gap < 1e-3 * (1.0 + s64.norm()), "{exprs:?} at ({x}, {t}): {gap:e}");
            }
        }
    }
}

#[test]
fn caustic_is_reported() {
    // μ₀ = sin 2t for the oscillator: the kernel is singular at π/2
    let cs = coefficient_set(OSCILLATOR, Regime::Ermakov, (-2.0, 2.0));
    let fs = FundamentalSolution::new(&cs).unwrap();
    assert!(matches!(
        fs.at(std::f64::consts::FRAC_PI_2),
        Err(Error::SingularTime { .. })
    ));
    assert!(fs.at(1.0).is_ok());
}
