//! Line-based scenario files.
//!
//! ```text
//! # comment
//! preset = oscillator        # free | oscillator | driven
//! f = sin(t)                 # coefficient overrides a..g
//! c0 = 1
//! init.beta = 1.2
//! t0 = 0
//! t1 = pi/4
//! step = 0.05
//! grid = -8:8:1/64
//! checks = eigen, norm
//! transform = osc_to_free    # element for transform_roundtrip
//! ```
//!
//! Numeric values are constant expressions, so `pi/4` and `1/64` are
//! accepted.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::coefficients::{CoefficientSet, Preset, Regime};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::kernel::KernelParameters;
use crate::transforms::TransformElement;
use crate::verify::CHECKS;

pub const DEFAULT_GRID: (f64, f64, f64) = (-8.0, 8.0, 1.0 / 64.0);

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub coefficients: CoefficientSet<f64>,
    pub init: KernelParameters<f64>,
    pub t0: f64,
    pub t1: f64,
    pub step: f64,
    /// `(lo, hi, dx)`
    pub grid: (f64, f64, f64),
    /// `None` runs every applicable check.
    pub checks: Option<Vec<String>>,
    /// Level n of the Hermite–Gauss state used by state checks.
    pub level: usize,
    pub thresholds: BTreeMap<String, f64>,
    /// Named element for `transform_roundtrip`; the scenario's own Ansatz
    /// when absent.
    pub transform: Option<String>,
    keys: usize,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            coefficients: CoefficientSet::oscillator().with_regime(Regime::Ermakov),
            init: KernelParameters::trivial(),
            t0: 0.0,
            t1: 1.0,
            step: 0.1,
            grid: DEFAULT_GRID,
            checks: None,
            level: 0,
            thresholds: BTreeMap::new(),
            transform: None,
            keys: 0,
        }
    }
}

/// Evaluates a constant expression such as `pi/4`.
pub fn parse_real(s: &str) -> Result<f64> {
    let e = Expr::parse(s.trim())?;
    if e.constant_value().is_none() {
        return Err(Error::Invalid(format!("`{s}` must not depend on t")));
    }
    e.eval(0.0)
}

/// Parses `lo:hi:step`.
pub fn parse_range(s: &str) -> Result<(f64, f64, f64)> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::Invalid(format!("expected lo:hi:step, got `{s}`")));
    }
    let lo = parse_real(parts[0])?;
    let hi = parse_real(parts[1])?;
    let step = parse_real(parts[2])?;
    if !(step > 0.0 && hi > lo) {
        return Err(Error::Invalid(format!("range `{s}` needs lo < hi and step > 0")));
    }
    Ok((lo, hi, step))
}

/// Applies one `name = value` assignment to the initial data.
pub fn set_init(init: &mut KernelParameters<f64>, name: &str, value: f64) -> Result<()> {
    let slot = match name {
        "mu" => &mut init.mu,
        "alpha" => &mut init.alpha,
        "beta" => &mut init.beta,
        "gamma" => &mut init.gamma,
        "delta" => &mut init.delta,
        "epsilon" => &mut init.epsilon,
        "kappa" => &mut init.kappa,
        _ => return Err(Error::Invalid(format!("unknown initial parameter `{name}`"))),
    };
    *slot = value;
    Ok(())
}

/// Parses `mu=1,alpha=0.3,...`; unspecified entries keep their trivial values.
pub fn parse_init(s: &str) -> Result<KernelParameters<f64>> {
    let mut init = KernelParameters::trivial();
    for item in s.split(',').map(str::trim).filter(|i| !i.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::Invalid(format!("expected name=value, got `{item}`")))?;
        set_init(&mut init, k.trim(), parse_real(v)?)?;
    }
    Ok(init)
}

/// Parses a preset name; `driven` takes the forcing expression `f`.
pub fn parse_preset(name: &str, forcing: Option<Expr>) -> Result<Preset> {
    match name {
        "free" => Ok(Preset::Free),
        "oscillator" => Ok(Preset::Oscillator),
        "driven" => Ok(Preset::Driven(
            forcing.unwrap_or_else(|| Expr::parse("sin(t)").expect("literal")),
        )),
        other => Err(Error::Invalid(format!("unknown preset `{other}`"))),
    }
}

/// Coefficients from a preset name (default `oscillator`) with per-name
/// overrides among `a b c d f g`, on the time domain `(lo, hi)`.
pub fn build_coefficients(
    preset: Option<&str>,
    overrides: &BTreeMap<&str, Expr>,
    regime: Regime,
    (lo, hi): (f64, f64),
) -> Result<CoefficientSet<f64>> {
    let forcing = overrides.get("f").cloned();
    let mut cs = CoefficientSet::<f64>::preset(parse_preset(preset.unwrap_or("oscillator"), forcing)?);
    for (name, e) in overrides {
        let slot = match *name {
            "a" => &mut cs.a,
            "b" => &mut cs.b,
            "c" => &mut cs.c,
            "d" => &mut cs.d,
            "f" => &mut cs.f,
            "g" => &mut cs.g,
            other => return Err(Error::Invalid(format!("unknown coefficient `{other}`"))),
        };
        *slot = e.clone();
    }
    // rebuild so cached derivatives follow the overrides
    let cs = CoefficientSet::new(cs.a, cs.b, cs.c, cs.d, cs.f, cs.g, regime);
    cs.with_domain(lo, hi)
}

impl Scenario {
    /// True when the file assigned no keys at all.
    pub fn is_empty(&self) -> bool {
        self.keys == 0
    }

    /// Sample times `t0, t0 + step, …` up to `t1`.
    pub fn times(&self) -> Result<Vec<f64>> {
        if !(self.step > 0.0) || !(self.t1 >= self.t0) {
            return Err(Error::Invalid("times need t0 ≤ t1 and step > 0".into()));
        }
        let n = ((self.t1 - self.t0) / self.step + 1e-9).floor() as usize;
        Ok((0..=n).map(|k| self.t0 + self.step * k as f64).collect())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut sc = Scenario::default();
        let mut preset: Option<String> = None;
        let mut overrides: BTreeMap<&'static str, Expr> = BTreeMap::new();
        let mut regime = Regime::Ermakov;
        let mut domain = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at = |e: Error| Error::Invalid(format!("line {}: {e}", lineno + 1));
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| at(Error::Invalid("expected `key = value`".into())))?;
            let (key, value) = (key.trim(), value.trim());
            sc.keys += 1;
            match key {
                "preset" => preset = Some(value.to_string()),
                "a" | "b" | "c" | "d" | "f" | "g" => {
                    let name = ["a", "b", "c", "d", "f", "g"]
                        .into_iter()
                        .find(|k| *k == key)
                        .expect("matched");
                    overrides.insert(name, Expr::parse(value).map_err(at)?);
                }
                "c0" => {
                    let c0: u8 = value
                        .parse()
                        .map_err(|_| at(Error::Invalid(format!("c0 must be 0 or 1, got `{value}`"))))?;
                    regime = Regime::from_c0(c0).map_err(at)?;
                }
                "t0" => sc.t0 = parse_real(value).map_err(at)?,
                "t1" => sc.t1 = parse_real(value).map_err(at)?,
                "step" => sc.step = parse_real(value).map_err(at)?,
                "grid" => sc.grid = parse_range(value).map_err(at)?,
                "domain" => {
                    let parts: Vec<&str> = value.split(':').collect();
                    if parts.len() != 2 {
                        return Err(at(Error::Invalid("domain is lo:hi".into())));
                    }
                    domain = Some((parse_real(parts[0]).map_err(at)?, parse_real(parts[1]).map_err(at)?));
                }
                "n" => {
                    sc.level = value
                        .parse()
                        .map_err(|_| at(Error::Invalid(format!("n must be a level, got `{value}`"))))?
                }
                "checks" => {
                    let list: Vec<String> = value
                        .split(',')
                        .map(|s| s.trim().to_string())
                        .filter(|s| !s.is_empty())
                        .collect();
                    if let Some(bad) = list.iter().find(|c| !CHECKS.iter().any(|(n, _)| n == c)) {
                        return Err(at(Error::Invalid(format!("unknown check `{bad}`"))));
                    }
                    sc.checks = Some(list);
                }
                "transform" => {
                    TransformElement::<f64>::named(value).map_err(at)?;
                    sc.transform = Some(value.to_string());
                }
                _ if key.starts_with("init.") => {
                    let v = parse_real(value).map_err(at)?;
                    set_init(&mut sc.init, &key[5..], v).map_err(at)?;
                }
                _ if key.starts_with("threshold.") => {
                    let name = &key[10..];
                    if !CHECKS.iter().any(|(n, _)| *n == name) {
                        return Err(at(Error::Invalid(format!("unknown check `{name}`"))));
                    }
                    sc.thresholds.insert(name.to_string(), parse_real(value).map_err(at)?);
                }
                _ => return Err(at(Error::Invalid(format!("unknown key `{key}`")))),
            }
        }
        let (lo, hi) = domain.unwrap_or((sc.t0.min(0.0) - 1.0, sc.t1.max(0.0) + 1.0));
        sc.coefficients = build_coefficients(preset.as_deref(), &overrides, regime, (lo, hi))?;
        sc.times()?;
        Ok(sc)
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_file() {
        let sc = Scenario::parse(
            "# textbook\npreset = oscillator\nc0 = 1\ninit.beta = 1.2 # squeeze\n\
             t0 = 0\nt1 = pi/4\nstep = pi/40\ngrid = -8:8:1/64\nchecks = eigen, norm\nn = 2\n\
             threshold.eigen = 1e-3\n",
        )
        .unwrap();
        assert!(sc.coefficients.is_oscillator());
        assert_eq!(sc.coefficients.regime, Regime::Ermakov);
        assert_eq!(sc.init.beta, 1.2);
        assert_eq!(sc.times().unwrap().len(), 11);
        assert_eq!(sc.grid, (-8.0, 8.0, 1.0 / 64.0));
        assert_eq!(
            sc.checks.as_deref(),
            Some(&["eigen".to_string(), "norm".to_string()][..])
        );
        assert_eq!(sc.level, 2);
        assert_eq!(sc.thresholds["eigen"], 1e-3);
    }

    #[test]
    fn overrides_and_driven() {
        let sc = Scenario::parse("preset = driven\nf = cos(t)\nc = 0.1\nc0 = 0").unwrap();
        assert_eq!(sc.coefficients.f, Expr::parse("cos(t)").unwrap());
        assert_eq!(sc.coefficients.regime, Regime::Riccati);
        assert!((sc.coefficients.lambda(1.0).unwrap() - (-0.1f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn empty_and_errors() {
        assert!(Scenario::parse("\n# nothing\n").unwrap().is_empty());
        for bad in [
            "foo = 1",
            "c0 = 2",
            "grid = 1:0:1",
            "checks = nope",
            "init.zeta = 1",
            "t1 = t",
            "preset",
            "transform = warp",
        ] {
            assert!(Scenario::parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn init_strings() {
        let p = parse_init("mu=1,alpha=0.3,beta=1.2,gamma=0,delta=0.5,epsilon=-0.2,kappa=0").unwrap();
        assert_eq!(p.to_array(), [1.0, 0.3, 1.2, 0.0, 0.5, -0.2, 0.0]);
        assert!(parse_init("beta").is_err());
        assert_eq!(parse_range("-8:8:1/64").unwrap(), (-8.0, 8.0, 0.015625));
    }
}
