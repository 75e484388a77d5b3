use std::fs;
use std::path::Path;

use oscgroup::format::format_real;
use oscgroup::verify::{context_solution, transform_residual};
use oscgroup::{
    green_function, propagate as propagate_state, run_suite, Grid, GridState, KernelParameters, Scenario,
    TransformElement,
};

use crate::problem::{range, range_points, real, Problem, ProblemArgs};
use crate::{write_output, CliError};

const PARAM_HEADER: &str = "t,mu,alpha,beta,gamma,delta,epsilon,kappa";

fn grid_of(problem: &Problem, grid: Option<&str>) -> Result<Grid<f64>, CliError> {
    let (lo, hi, dx) = match grid {
        Some(g) => range(g)?,
        None => problem.scenario.grid,
    };
    Ok(Grid::span(lo, hi, dx)?)
}

pub fn solve(
    args: &ProblemArgs,
    t0: Option<&str>,
    t1: Option<&str>,
    step: Option<&str>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let problem = args.resolve()?;
    let sc = &problem.scenario;
    let t0 = t0.map(real).transpose()?.unwrap_or(sc.t0);
    let t1 = t1.map(real).transpose()?.unwrap_or(sc.t1);
    let step = step.map(real).transpose()?.unwrap_or(sc.step);
    if !(step > 0.0) || !(t1 >= t0) {
        return Err(CliError::Usage("need t0 ≤ t1 and step > 0".into()));
    }
    let times = range_points((t0, t1, step));
    let cs = problem.coefficients(&times)?;
    let fs = problem.fundamental(&cs)?;
    let rows = times
        .iter()
        .map(|&t| fs.general(&problem.init, t))
        .collect::<oscgroup::Result<Vec<KernelParameters<f64>>>>()?;
    write_output(out, |w| {
        writeln!(w, "{PARAM_HEADER}")?;
        for p in &rows {
            let cols: Vec<String> = std::iter::once(p.t).chain(p.to_array()).map(format_real).collect();
            writeln!(w, "{}", cols.join(","))?;
        }
        Ok(())
    })
}

pub fn wavefunction(
    args: &ProblemArgs,
    n: Option<usize>,
    t: &str,
    grid: Option<&str>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let problem = args.resolve()?;
    let t = real(t)?;
    let grid = grid_of(&problem, grid)?;
    let cs = problem.coefficients(&[t])?;
    let field = problem.state(&cs, n.unwrap_or(problem.scenario.level))?;
    let gs = GridState::sample(&grid, t, |x| field(x, t))?;
    write_output(out, |w| gs.write_csv(w))?;
    eprintln!("norm {}", format_real(gs.norm()));
    Ok(())
}

pub fn green(args: &ProblemArgs, t: &str, grid: Option<&str>, out: Option<&Path>) -> Result<(), CliError> {
    let problem = args.resolve()?;
    let t = real(t)?;
    let grid = grid_of(&problem, grid)?;
    let cs = problem.coefficients(&[t])?;
    let fp = problem.fundamental(&cs)?.at(t)?;
    let mut rows = Vec::with_capacity(grid.len * grid.len);
    for x in grid.points() {
        for y in grid.points() {
            rows.push((x, y, green_function(&fp, x, y)?));
        }
    }
    write_output(out, |w| {
        writeln!(w, "x,y,re,im,abs2")?;
        for (x, y, g) in &rows {
            writeln!(
                w,
                "{},{},{},{},{}",
                format_real(*x),
                format_real(*y),
                format_real(g.re),
                format_real(g.im),
                format_real(g.norm_sqr())
            )?;
        }
        Ok(())
    })
}

pub fn propagate(
    args: &ProblemArgs,
    n: Option<usize>,
    t: &str,
    grid: Option<&str>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let problem = args.resolve()?;
    let t = real(t)?;
    let grid = grid_of(&problem, grid)?;
    let cs = problem.coefficients(&[t])?;
    let field = problem.state(&cs, n.unwrap_or(problem.scenario.level))?;
    let initial = GridState::sample(&grid, 0.0, |x| field(x, 0.0))?;
    let fp = problem.fundamental(&cs)?.at(t)?;
    let moved = propagate_state(&fp, &initial, &grid)?;
    write_output(out, |w| moved.write_csv(w))?;
    let exact = GridState::sample(&grid, t, |x| field(x, t))?;
    eprintln!(
        "sup distance to the exact state {}",
        format_real(moved.sup_distance(&exact)?)
    );
    Ok(())
}

/// Parameters of the parametrized group elements.
pub struct ElementParams {
    pub v: f64,
    pub x0: f64,
    pub shift: f64,
    pub phase: f64,
    pub l: f64,
    pub m: f64,
}

pub fn transform(
    args: &ProblemArgs,
    kind: &str,
    params: &ElementParams,
    n: Option<usize>,
    t: &str,
    grid: Option<&str>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let problem = args.resolve()?;
    let t = real(t)?;
    let grid = grid_of(&problem, grid)?;
    let n = n.unwrap_or(problem.scenario.level);
    let (te, source_init) = match kind {
        "galilei" => (
            TransformElement::galilei_with_phase(params.v, params.x0, params.shift, params.phase),
            problem.init,
        ),
        "dilatation" => (TransformElement::dilatation(params.l)?, problem.init),
        "expansion" => (TransformElement::expansion(params.m), problem.init),
        "ansatz" => {
            let cs = problem.coefficients(&[t])?;
            let fs = problem.fundamental(&cs)?;
            let te = TransformElement::ansatz_from_solution(&fs, problem.init, cs.domain())?;
            // the Ansatz carries the initial data; χ is the textbook state
            (te, KernelParameters::trivial())
        }
        other => (TransformElement::named(other)?, problem.init),
    };
    let chi = context_solution(te.source(), n, source_init)?;
    let image = te.apply_grid(chi.as_ref(), &grid, t)?;
    write_output(out, |w| image.write_csv(w))?;
    match transform_residual(&te, &chi, &grid, t) {
        Ok(r) => eprintln!("{} image residual {}", te.name(), format_real(r)),
        Err(e) => eprintln!("{} image residual unavailable: {e}", te.name()),
    }
    Ok(())
}

pub fn density(
    args: &ProblemArgs,
    n: Option<usize>,
    times: &str,
    grid: Option<&str>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let problem = args.resolve()?;
    let times = range_points(range(times)?);
    let grid = grid_of(&problem, grid)?;
    let cs = problem.coefficients(&times)?;
    let field = problem.state(&cs, n.unwrap_or(problem.scenario.level))?;
    let frames = times
        .iter()
        .map(|&t| GridState::sample(&grid, t, |x| field(x, t)))
        .collect::<oscgroup::Result<Vec<_>>>()?;
    write_output(out, |w| {
        writeln!(w, "t,x,abs2")?;
        for gs in &frames {
            for (k, v) in gs.values.iter().enumerate() {
                writeln!(
                    w,
                    "{},{},{}",
                    format_real(gs.t),
                    format_real(gs.x(k)),
                    format_real(v.norm_sqr())
                )?;
            }
        }
        Ok(())
    })
}

pub fn verify(scenario: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let text = fs::read_to_string(scenario)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", scenario.display())))?;
    let sc = Scenario::parse(&text)?;
    let report = run_suite(&sc);
    print!("{}", report.to_text());
    if let Some(path) = out {
        write_output(Some(path), |w| w.write_all(report.to_csv().as_bytes()))?;
    }
    let failed = report.checks.iter().filter(|c| !c.pass).count();
    if failed > 0 {
        return Err(CliError::Checks(failed));
    }
    Ok(())
}
