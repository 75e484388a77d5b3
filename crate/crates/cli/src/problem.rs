//! Flags shared by the subcommands and their resolution against an optional
//! scenario file.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::sync::Arc;

use clap::Args;
use oscgroup::characteristic::{solve_characteristic, DEFAULT_GRID_STEP};
use oscgroup::scenario::{build_coefficients, parse_init, parse_real};
use oscgroup::verify::{closed_form_field, Field};
use oscgroup::{
    oscillator_state, ClosedFormCase, CoefficientSet, Expr, FundamentalSolution, KernelParameters, Regime, Scenario,
};

use crate::CliError;

#[derive(Debug, Args)]
pub struct ProblemArgs {
    /// Scenario file supplying defaults for everything below
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// free | oscillator | driven
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub d: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub f: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub g: Option<String>,
    /// 0 for the Riccati-type system, 1 for the Ermakov-type system
    #[arg(long)]
    pub c0: Option<u8>,
    /// Initial data, e.g. "mu=1,alpha=0.3,beta=1.2"
    #[arg(long, allow_hyphen_values = true, conflicts_with = "trivial_init")]
    pub init: Option<String>,
    /// μ = β = 1, everything else 0
    #[arg(long)]
    pub trivial_init: bool,
    /// Tolerance of the characteristic integration
    #[arg(long)]
    pub tol: Option<f64>,
}

/// Flags merged with the scenario defaults. Coefficients get their time
/// domain once the command knows which times it needs.
pub struct Problem {
    pub scenario: Scenario,
    coefficients: CoefficientSet<f64>,
    pub init: KernelParameters<f64>,
    tol: Option<f64>,
}

impl ProblemArgs {
    pub fn resolve(&self) -> Result<Problem, CliError> {
        let scenario = match &self.scenario {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
                Scenario::parse(&text)?
            }
            None => Scenario::default(),
        };
        let regime = match self.c0 {
            Some(c0) => Regime::from_c0(c0)?,
            None => scenario.coefficients.regime,
        };
        let named = [
            ("a", &self.a),
            ("b", &self.b),
            ("c", &self.c),
            ("d", &self.d),
            ("f", &self.f),
            ("g", &self.g),
        ];
        let mut overrides = BTreeMap::new();
        for (name, value) in named {
            if let Some(v) = value {
                overrides.insert(name, Expr::parse(v)?);
            }
        }
        let coefficients = if self.preset.is_some() || !overrides.is_empty() || self.scenario.is_none() {
            build_coefficients(self.preset.as_deref(), &overrides, regime, (-1.0, 1.0))?
        } else {
            scenario.coefficients.clone().with_regime(regime)
        };
        let init = if self.trivial_init {
            KernelParameters::trivial()
        } else if let Some(s) = &self.init {
            parse_init(s)?
        } else {
            scenario.init
        };
        if let Some(tol) = self.tol {
            if !(tol > 0.0) {
                return Err(CliError::Usage(format!("--tol must be positive, got {tol}")));
            }
        }
        Ok(Problem {
            scenario,
            coefficients,
            init,
            tol: self.tol,
        })
    }
}

impl Problem {
    /// Coefficients on a domain covering `0` and every time in `times`.
    pub fn coefficients(&self, times: &[f64]) -> Result<CoefficientSet<f64>, CliError> {
        let lo = times.iter().copied().fold(0.0, f64::min) - 1.0;
        let hi = times.iter().copied().fold(0.0, f64::max) + 1.0;
        Ok(self.coefficients.clone().with_domain(lo, hi)?)
    }

    pub fn fundamental(&self, cs: &CoefficientSet<f64>) -> Result<FundamentalSolution<f64>, CliError> {
        Ok(match self.tol {
            Some(tol) => FundamentalSolution::from_characteristic(solve_characteristic(cs, DEFAULT_GRID_STEP, tol)?),
            None => FundamentalSolution::new(cs)?,
        })
    }

    /// ψₙ for the problem's coefficients and initial data. Presets use the
    /// explicit formulas unless a tolerance asks for the integrated route.
    pub fn state(&self, cs: &CoefficientSet<f64>, n: usize) -> Result<Field<f64>, CliError> {
        if cs.regime != Regime::Ermakov {
            return Err(CliError::Usage(
                "oscillator states need the Ermakov-type system (--c0 1)".into(),
            ));
        }
        if self.tol.is_none() {
            if let Some(case) = ClosedFormCase::for_coefficients(cs) {
                return Ok(closed_form_field(case, n, self.init));
            }
        }
        let fs = self.fundamental(cs)?;
        let init = self.init;
        Ok(Arc::new(move |x, t| oscillator_state(n, &fs.general(&init, t)?, x)))
    }
}

/// Spells `π` as `pi`, with an explicit product after a digit or `)` so
/// that `2π` reads as `2*pi`.
fn spell_pi(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 4);
    for c in s.chars() {
        if c == 'π' {
            if out.ends_with(|p: char| p.is_ascii_digit() || p == ')' || p == '.') {
                out.push('*');
            }
            out.push_str("pi");
        } else {
            out.push(c);
        }
    }
    out
}

/// A real given as a constant expression.
pub fn real(s: &str) -> Result<f64, CliError> {
    Ok(parse_real(&spell_pi(s))?)
}

/// `lo:hi:step` with constant expressions.
pub fn range(s: &str) -> Result<(f64, f64, f64), CliError> {
    Ok(oscgroup::scenario::parse_range(&spell_pi(s))?)
}

/// `lo, lo + step, …` up to `hi`.
pub fn range_points((lo, hi, step): (f64, f64, f64)) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=n).map(|k| lo + step * k as f64).collect()
}
