//! Command-line front end: threshold reports, branch sweeps, solution counts,
//! profiles, identity checks and Fermi–Dirac evaluation.
//!
//! Settings resolve as flag > config file > built-in default; `GELFAND_LAB_JOBS`
//! stands in for an absent `--jobs`. Exit status is 0 on success, 1 when a
//! certificate fails or the numerics do, 2 on usage errors.

pub mod output;
pub mod svg;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;

pub use output::{branch_csv, fmt_f64, profiles_csv, read_branch_csv, BRANCH_HEADER};
pub use svg::{emit_svg, Axis, Marker};

use crate::criteria::{threshold_report, uniqueness_lambda0, Lambda0Options, ReportOptions};
use crate::error::Error;
use crate::geometry::DomainGeometry;
use crate::nonlinearity::fermi_dirac_derivative;
use crate::nonlinearity::NonlinearitySpec;
use crate::ode::Tolerances;
use crate::pohozaev::{combined_residual, energy_residual, nonexistence_chain, pohozaev_residual};
use crate::radial::{geometric_grid, LambdaSweep, RadialSolution, RadialSolver, COUNT_RANGE, COUNT_SAMPLES, OVERFLOW_LIMIT};

/// All settings of one invocation; also the schema of the `--config` file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub subcommand: Option<String>,
    pub f: Option<String>,
    pub d: Option<usize>,
    pub ball: Option<f64>,
    #[serde(rename = "box")]
    pub half_sides: Option<Vec<f64>>,
    pub a_min: Option<f64>,
    pub a_max: Option<f64>,
    pub samples: Option<usize>,
    pub lambda: Option<f64>,
    pub kappa: Option<f64>,
    pub mass: Option<f64>,
    pub mu: Option<f64>,
    pub lambda_from_amplitude: Option<f64>,
    pub amplitude: Option<f64>,
    pub perturb: Option<f64>,
    pub eta1: Option<f64>,
    pub mu_max: Option<f64>,
    pub optimize_eta1: Option<bool>,
    pub delta: Option<f64>,
    pub u: Option<f64>,
    pub order: Option<u32>,
    pub format: Option<String>,
    pub axis: Option<String>,
    pub markers: Option<bool>,
    pub output: Option<PathBuf>,
    pub tol: Option<f64>,
    pub atol: Option<f64>,
    pub subdivisions: Option<usize>,
    pub jobs: Option<usize>,
}

macro_rules! overlay {
    ($top:expr, $base:expr, $($field:ident),*) => {
        RunConfig { $($field: $top.$field.or($base.$field)),* }
    };
}

impl RunConfig {
    /// Fields set in `self` win over those in `base`.
    pub fn overlay(self, base: RunConfig) -> RunConfig {
        overlay!(
            self, base, subcommand, f, d, ball, half_sides, a_min, a_max, samples, lambda, kappa, mass, mu,
            lambda_from_amplitude, amplitude, perturb, eta1, mu_max, optimize_eta1, delta, u, order, format, axis,
            markers, output, tol, atol, subdivisions, jobs
        )
    }
}

#[derive(Parser, Debug)]
#[command(name = "gelfand-lab", version, about = "Bifurcation and threshold toolkit for Gelfand-type problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct Common {
    /// Nonlinearity: exp | power:P | purepower:P | fermi:DELTA
    #[arg(long = "f", value_name = "SPEC")]
    f: Option<String>,
    /// Space dimension
    #[arg(long)]
    d: Option<usize>,
    /// Ball radius
    #[arg(long, value_name = "R", conflicts_with = "half_sides")]
    ball: Option<f64>,
    /// Box half-sides, comma separated
    #[arg(long = "box", value_name = "H1,H2,...", value_delimiter = ',')]
    half_sides: Option<Vec<f64>>,
    /// Relative integrator tolerance
    #[arg(long)]
    tol: Option<f64>,
    /// Absolute integrator tolerance
    #[arg(long)]
    atol: Option<f64>,
    /// Output points per integrator step (multiple of 4)
    #[arg(long)]
    subdivisions: Option<usize>,
    /// JSON file with default settings
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Worker threads for sweeps
    #[arg(long, env = "GELFAND_LAB_JOBS")]
    jobs: Option<usize>,
    /// Write the result here instead of stdout
    #[arg(long, short = 'o', value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Threshold constants of one nonlinearity and domain (JSON)
    Thresholds {
        #[command(flatten)]
        common: Common,
        /// Shift μ at which G and H are evaluated
        #[arg(long, allow_hyphen_values = true)]
        mu: Option<f64>,
        /// Parameter η₁ in (η, (d−2)/(2d)) [default: midpoint]
        #[arg(long)]
        eta1: Option<f64>,
        /// Also check mass non-existence for this M
        #[arg(long)]
        mass: Option<f64>,
        /// Upper end of the μ-range for λ₀ [default: 1]
        #[arg(long)]
        mu_max: Option<f64>,
        /// Choose η₁ to maximize λ₀
        #[arg(long)]
        optimize_eta1: bool,
    },
    /// Branch sweep over amplitudes (CSV, JSON or SVG)
    Branch {
        #[command(flatten)]
        common: Common,
        /// Smallest amplitude u(0) [default: 1e-3]
        #[arg(long)]
        a_min: Option<f64>,
        /// Largest amplitude u(0) [default: 1e4]
        #[arg(long)]
        a_max: Option<f64>,
        /// Geometrically spaced amplitudes [default: 2000]
        #[arg(long)]
        samples: Option<usize>,
        /// csv | json | svg
        #[arg(long)]
        format: Option<String>,
        /// Horizontal axis of the diagram: lambda | kappa | M
        #[arg(long)]
        axis: Option<String>,
        /// Mark λ₀ and the turning point on the diagram
        #[arg(long)]
        markers: bool,
    },
    /// Number of radial solutions at a given λ (JSON)
    Count {
        #[command(flatten)]
        common: Common,
        /// Value of λ
        #[arg(long)]
        lambda: Option<f64>,
        /// Smallest amplitude u(0) [default: 1e-8]
        #[arg(long)]
        a_min: Option<f64>,
        /// Largest amplitude u(0) [default: 1e4]
        #[arg(long)]
        a_max: Option<f64>,
        /// Geometrically spaced amplitudes [default: 4096]
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Solution profiles for one target (CSV or JSON)
    Solve {
        #[command(flatten)]
        common: Common,
        /// Non-local multiplicative problem with coupling κ
        #[arg(long)]
        kappa: Option<f64>,
        /// Non-local additive problem with mass M
        #[arg(long)]
        mass: Option<f64>,
        /// Local additive problem with shift μ
        #[arg(long, allow_hyphen_values = true)]
        mu: Option<f64>,
        /// Local multiplicative problem through amplitude u(0) = A
        #[arg(long, value_name = "A")]
        lambda_from_amplitude: Option<f64>,
        /// csv | json
        #[arg(long)]
        format: Option<String>,
    },
    /// Pohožaev, energy and chain checks on one solution (JSON)
    Pohozaev {
        #[command(flatten)]
        common: Common,
        /// Amplitude of a multiplicative solution (default 1)
        #[arg(long)]
        amplitude: Option<f64>,
        /// Shift of an additive solution instead
        #[arg(long, allow_hyphen_values = true, conflicts_with = "amplitude")]
        mu: Option<f64>,
        /// Add eps (1 − r²/R²) to the profile before checking
        #[arg(long, allow_hyphen_values = true)]
        perturb: Option<f64>,
    },
    /// Fermi–Dirac function f_δ(u) or its derivatives
    Fermi {
        #[command(flatten)]
        common: Common,
        /// Index δ ≥ 0
        #[arg(long)]
        delta: Option<f64>,
        /// Argument u
        #[arg(long, allow_hyphen_values = true)]
        u: Option<f64>,
        /// Derivative order 0, 1 or 2
        #[arg(long)]
        order: Option<u32>,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Lib(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) | Failure::Lib(Error::InvalidInput(_) | Error::OutsideDomain { .. }) => 2,
            _ => 1,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Lib(e) => write!(f, "error: {e}"),
            Failure::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

type Outcome = std::result::Result<i32, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

impl Common {
    fn to_config(&self) -> RunConfig {
        RunConfig {
            f: self.f.clone(),
            d: self.d,
            ball: self.ball,
            half_sides: self.half_sides.clone(),
            tol: self.tol,
            atol: self.atol,
            subdivisions: self.subdivisions,
            jobs: self.jobs,
            output: self.output.clone(),
            ..RunConfig::default()
        }
    }
}

/// Merged settings plus the derived numeric options.
struct Ctx {
    cfg: RunConfig,
    tol: Tolerances,
    subdivisions: usize,
}

impl Ctx {
    fn new(flags: RunConfig, config: Option<&PathBuf>, name: &str) -> std::result::Result<Ctx, Failure> {
        let file = match config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
                serde_json::from_str::<RunConfig>(&text).map_err(|e| usage(format!("bad config {}: {e}", path.display())))?
            }
            None => RunConfig::default(),
        };
        if let Some(sub) = &file.subcommand {
            if sub != name {
                return Err(usage(format!("config file is for subcommand {sub:?}, not {name:?}")));
            }
        }
        let cfg = flags.overlay(file);
        let def = Tolerances::default();
        let tol = Tolerances { rtol: cfg.tol.unwrap_or(def.rtol), atol: cfg.atol.unwrap_or(def.atol) };
        if !(tol.rtol > 0.0 && tol.rtol < 1.0 && tol.atol > 0.0 && tol.atol.is_finite()) {
            return Err(usage(format!("tolerances must satisfy 0 < tol < 1, atol > 0 (got {}, {})", tol.rtol, tol.atol)));
        }
        let subdivisions = cfg.subdivisions.unwrap_or(4);
        if subdivisions == 0 || !subdivisions.is_multiple_of(4) {
            return Err(usage(format!("--subdivisions must be a positive multiple of 4, got {subdivisions}")));
        }
        if cfg.jobs == Some(0) {
            return Err(usage("--jobs must be positive"));
        }
        Ok(Ctx { cfg, tol, subdivisions })
    }

    fn spec(&self) -> std::result::Result<NonlinearitySpec, Failure> {
        self.cfg.f.as_deref().unwrap_or("exp").parse::<NonlinearitySpec>().map_err(|e| usage(e.to_string()))
    }

    fn geometry(&self) -> std::result::Result<DomainGeometry, Failure> {
        match (&self.cfg.half_sides, self.cfg.ball) {
            (Some(_), Some(_)) => Err(usage("give either --ball or --box, not both")),
            (Some(h), None) => {
                if let Some(d) = self.cfg.d {
                    if d != h.len() {
                        return Err(usage(format!("--d {d} but {} box half-sides", h.len())));
                    }
                }
                DomainGeometry::cuboid(h.clone()).map_err(|e| usage(e.to_string()))
            }
            (None, r) => DomainGeometry::ball(self.cfg.d.unwrap_or(3), r.unwrap_or(1.0)).map_err(|e| usage(e.to_string())),
        }
    }

    fn radius(&self) -> std::result::Result<f64, Failure> {
        self.geometry()?.ball_radius().ok_or_else(|| usage("radial solutions need a ball (--ball R); boxes are for thresholds only"))
    }

    fn solver(&self) -> std::result::Result<RadialSolver, Failure> {
        let r = self.radius()?;
        let s = RadialSolver::new(self.spec()?, self.cfg.d.unwrap_or(3))?
            .with_radius(r)?
            .with_tolerances(self.tol)?
            .with_subdivisions(self.subdivisions)?
            .with_jobs(self.cfg.jobs);
        Ok(s)
    }

    fn amplitude_range(&self, lo: f64, hi: f64) -> std::result::Result<(f64, f64), Failure> {
        let (a, b) = (self.cfg.a_min.unwrap_or(lo), self.cfg.a_max.unwrap_or(hi));
        if !(a > 0.0 && b > a && b.is_finite()) {
            return Err(usage(format!("need 0 < a_min < a_max, got [{a}, {b}]")));
        }
        Ok((a, b))
    }

    fn format(&self, allowed: &[&str]) -> std::result::Result<String, Failure> {
        let f = self.cfg.format.clone().unwrap_or_else(|| allowed[0].to_string());
        if allowed.contains(&f.as_str()) {
            Ok(f)
        } else {
            Err(usage(format!("unknown format {f:?} (expected one of {})", allowed.join(", "))))
        }
    }

    fn emit(&self, text: &str, out: &mut dyn Write) -> std::result::Result<(), Failure> {
        match &self.cfg.output {
            Some(p) => std::fs::write(p, text).map_err(|e| Failure::Io(format!("{}: {e}", p.display()))),
            None => out.write_all(text.as_bytes()).map_err(|e| Failure::Io(e.to_string())),
        }
    }

    fn comment(&self, err: &mut dyn Write) {
        let _ = writeln!(err, "{}", output::tolerance_comment(&self.tol, self.subdivisions));
    }

    fn json(&self, body: &impl Serialize) -> std::result::Result<String, Failure> {
        Ok(output::pretty(&output::with_metadata(body, &self.tol, self.subdivisions)?))
    }
}

/// Runs one invocation; returns the process exit status.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(text.as_bytes());
                    0
                }
                _ => {
                    let _ = err.write_all(text.as_bytes());
                    2
                }
            };
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "{f}");
            if let Failure::Usage(_) = f {
                let _ = writeln!(err, "run `gelfand-lab --help` for usage");
            }
            f.code()
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    match cmd {
        Command::Thresholds { common, mu, eta1, mass, mu_max, optimize_eta1 } => {
            let flags = RunConfig { mu, eta1, mass, mu_max, optimize_eta1: optimize_eta1.then_some(true), ..common.to_config() };
            thresholds(&Ctx::new(flags, common.config.as_ref(), "thresholds")?, out)
        }
        Command::Branch { common, a_min, a_max, samples, format, axis, markers } => {
            let flags = RunConfig { a_min, a_max, samples, format, axis, markers: markers.then_some(true), ..common.to_config() };
            branch(&Ctx::new(flags, common.config.as_ref(), "branch")?, out, err)
        }
        Command::Count { common, lambda, a_min, a_max, samples } => {
            let flags = RunConfig { lambda, a_min, a_max, samples, ..common.to_config() };
            count(&Ctx::new(flags, common.config.as_ref(), "count")?, out)
        }
        Command::Solve { common, kappa, mass, mu, lambda_from_amplitude, format } => {
            let targets_on_line = kappa.is_some() || mass.is_some() || mu.is_some() || lambda_from_amplitude.is_some();
            let flags = RunConfig { kappa, mass, mu, lambda_from_amplitude, format, ..common.to_config() };
            let mut ctx = Ctx::new(flags, common.config.as_ref(), "solve")?;
            if targets_on_line {
                ctx.cfg.kappa = kappa;
                ctx.cfg.mass = mass;
                ctx.cfg.mu = mu;
                ctx.cfg.lambda_from_amplitude = lambda_from_amplitude;
            }
            solve(&ctx, out, err)
        }
        Command::Pohozaev { common, amplitude, mu, perturb } => {
            let flags = RunConfig { amplitude, mu, perturb, ..common.to_config() };
            let mut ctx = Ctx::new(flags, common.config.as_ref(), "pohozaev")?;
            if amplitude.is_some() {
                ctx.cfg.mu = None;
            }
            if mu.is_some() {
                ctx.cfg.amplitude = None;
            }
            pohozaev(&ctx, out)
        }
        Command::Fermi { common, delta, u, order } => {
            let flags = RunConfig { delta, u, order, ..common.to_config() };
            fermi(&Ctx::new(flags, common.config.as_ref(), "fermi")?, out, err)
        }
    }
}

fn thresholds(ctx: &Ctx, out: &mut dyn Write) -> Outcome {
    let spec = ctx.spec()?;
    let geom = ctx.geometry()?;
    let c = &ctx.cfg;
    let opts = ReportOptions {
        mu: c.mu,
        eta1: c.eta1,
        mass: c.mass,
        mu_max: c.mu_max.unwrap_or(1.0),
        optimize_eta1: c.optimize_eta1.unwrap_or(false),
    };
    let report = threshold_report(&spec, &geom, opts);
    ctx.emit(&ctx.json(&report)?, out)?;
    // the constants rest on (Sc1); without it the certificate fails
    Ok(if report.supercritical { 0 } else { 1 })
}

fn branch(ctx: &Ctx, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let solver = ctx.solver()?;
    let (lo, hi) = ctx.amplitude_range(1e-3, 1e4)?;
    let samples = ctx.cfg.samples.unwrap_or(2000);
    if samples == 0 {
        return Err(usage("--samples must be positive"));
    }
    let format = ctx.format(&["csv", "json", "svg"])?;
    let axis: Axis = ctx.cfg.axis.as_deref().unwrap_or("lambda").parse().map_err(|e: Error| usage(e.to_string()))?;
    let amps = geometric_grid(lo, hi, samples);
    let sweep = solver.sweep_branch(&amps)?;
    let (overflow, other): (Vec<_>, Vec<_>) =
        sweep.failures.iter().partition(|f| f.reason.contains("exceeds the overflow threshold"));
    for f in other {
        let _ = writeln!(err, "# skipped a={}: {}", fmt_f64(f.parameter), f.reason);
    }
    if let Some(first) = overflow.first() {
        let _ = writeln!(
            err,
            "# skipped {} amplitudes from a={}: f exceeds the overflow threshold {}",
            overflow.len(),
            fmt_f64(first.parameter),
            fmt_f64(OVERFLOW_LIMIT)
        );
    }
    let text = match format.as_str() {
        "csv" => {
            ctx.comment(err);
            branch_csv(&sweep.points)
        }
        "json" => ctx.json(&json!({ "points": sweep.points, "failures": sweep.failures }))?,
        _ => {
            ctx.comment(err);
            let mut marks = Vec::new();
            if ctx.cfg.markers.unwrap_or(false) && axis == Axis::Lambda {
                let geom = ctx.geometry()?;
                match uniqueness_lambda0(solver.spec(), &geom, Lambda0Options::default()) {
                    Ok(r) if r.lambda0.is_finite() => marks.push(Marker { label: "λ₀".into(), value: r.lambda0 }),
                    Ok(_) => {}
                    Err(e) => {
                        let _ = writeln!(err, "# no λ₀ marker: {e}");
                    }
                }
                let ls = LambdaSweep {
                    amplitudes: sweep.points.iter().map(|p| p.a).collect(),
                    lambdas: sweep.points.iter().map(|p| p.lambda).collect(),
                };
                match solver.turning_point(&ls) {
                    Ok((_, l)) => marks.push(Marker { label: "λ*".into(), value: l }),
                    Err(e) => {
                        let _ = writeln!(err, "# no λ* marker: {e}");
                    }
                }
            }
            emit_svg(&sweep.points, axis, &marks)?
        }
    };
    ctx.emit(&text, out)?;
    Ok(0)
}

fn count(ctx: &Ctx, out: &mut dyn Write) -> Outcome {
    let solver = ctx.solver()?;
    let lambda = ctx.cfg.lambda.ok_or_else(|| usage("count needs --lambda"))?;
    let range = ctx.amplitude_range(COUNT_RANGE.0, COUNT_RANGE.1)?;
    let c = solver.count_solutions(lambda, range, ctx.cfg.samples.unwrap_or(COUNT_SAMPLES))?;
    let mut v = output::with_metadata(&c, &ctx.tol, ctx.subdivisions)?;
    v["lambda"] = json!(lambda);
    if c.tangency {
        v["note"] = json!("tangency - count uncertain");
    }
    ctx.emit(&output::pretty(&v), out)?;
    Ok(0)
}

fn solve(ctx: &Ctx, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let c = &ctx.cfg;
    let given = [c.kappa.is_some(), c.mass.is_some(), c.mu.is_some(), c.lambda_from_amplitude.is_some()];
    if given.iter().filter(|g| **g).count() != 1 {
        return Err(usage("solve needs exactly one of --kappa, --mass, --mu, --lambda-from-amplitude"));
    }
    let format = ctx.format(&["csv", "json"])?;
    let solver = ctx.solver()?;
    let sols: Vec<RadialSolution> = if let Some(k) = c.kappa {
        solver.solve_nonlocal_mult(k)?
    } else if let Some(m) = c.mass {
        solver.solve_nonlocal_add(m)?
    } else if let Some(mu) = c.mu {
        vec![solver.solve_add_local(mu)?]
    } else {
        vec![solver.solve_mult_local(c.lambda_from_amplitude.expect("checked above"))?]
    };
    let text = if format == "csv" {
        ctx.comment(err);
        if sols.is_empty() {
            let _ = writeln!(err, "# no solution found");
        }
        for (k, s) in sols.iter().enumerate() {
            let _ = writeln!(
                err,
                "# solution {k}: amplitude={} problem={}",
                fmt_f64(s.amplitude),
                serde_json::to_string(&s.problem).unwrap_or_default()
            );
        }
        profiles_csv(&sols)
    } else {
        ctx.json(&json!({ "solutions": sols }))?
    };
    ctx.emit(&text, out)?;
    Ok(0)
}

fn pohozaev(ctx: &Ctx, out: &mut dyn Write) -> Outcome {
    let solver = ctx.solver()?;
    let c = &ctx.cfg;
    let sol = match c.mu {
        Some(mu) => solver.solve_add_local(mu)?,
        None => solver.solve_mult_local(c.amplitude.unwrap_or(1.0))?,
    };
    let eps = c.perturb.unwrap_or(0.0);
    if !eps.is_finite() {
        return Err(usage("--perturb must be finite"));
    }
    let checked = if eps != 0.0 { sol.perturbed(eps) } else { sol };
    let body = json!({
        "nonlinearity": checked.spec.id(),
        "d": checked.d,
        "radius": checked.radius,
        "amplitude": checked.amplitude,
        "problem": checked.problem,
        "perturb": eps,
        "identity": pohozaev_residual(&checked),
        "energy": energy_residual(&checked),
        "combined": combined_residual(&checked),
        "chain": nonexistence_chain(&checked)?,
    });
    ctx.emit(&ctx.json(&body)?, out)?;
    Ok(0)
}

fn fermi(ctx: &Ctx, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let delta = ctx.cfg.delta.ok_or_else(|| usage("fermi needs --delta"))?;
    let u = ctx.cfg.u.ok_or_else(|| usage("fermi needs --u"))?;
    let order = ctx.cfg.order.unwrap_or(0);
    let v = fermi_dirac_derivative(delta, order, u)?;
    ctx.comment(err);
    ctx.emit(&format!("{}\n", fmt_f64(v)), out)?;
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("gelfand-lab").chain(args.iter().copied());
        let code = run(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn fermi_ln2() {
        let (code, out, err) = call(&["fermi", "--delta", "0", "--u", "0"]);
        assert_eq!(code, 0, "{err}");
        assert!((out.trim().parse::<f64>().unwrap() - 2f64.ln()).abs() < 1e-12);
        assert!(err.contains("rtol="));
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(call(&["frobnicate"]).0, 2);
        let (code, _, err) = call(&["count", "--bogus"]);
        assert_eq!(code, 2);
        assert!(err.contains("Usage"));
        assert_eq!(call(&[]).0, 2);
        assert_eq!(call(&["count", "--f", "exp"]).0, 2);
        assert_eq!(call(&["count", "--lambda", "1", "--box", "1,1,1"]).0, 2);
        assert_eq!(call(&["solve", "--kappa", "1", "--mu", "0"]).0, 2);
        assert_eq!(call(&["fermi", "--delta", "-1", "--u", "0"]).0, 2);
        assert_eq!(call(&["branch", "--format", "png"]).0, 2);
        assert_eq!(call(&["thresholds", "--f", "sin"]).0, 2);
        assert_eq!(call(&["thresholds", "--tol", "2"]).0, 2);
        assert_eq!(call(&["--help"]).0, 0);
    }

    #[test]
    fn thresholds_report() {
        let (code, out, _) = call(&["thresholds", "--f", "exp", "--d", "3", "--ball", "1"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert!((v["C_nonmul"].as_f64().unwrap() - 3.20824).abs() < 1e-5);
        assert!((v["kappa_bound"].as_f64().unwrap() - 40.32).abs() < 0.01);
        assert_eq!(v["tolerances"]["rtol"], 1e-10);
        let (code, out, _) = call(&["thresholds", "--f", "exp", "--box", "1,1,1"]);
        assert_eq!(code, 0);
        assert!(out.contains("\"d\": 3"));
    }

    #[test]
    fn subcritical_thresholds_fail_certificate() {
        let (code, out, _) = call(&["thresholds", "--f", "power:2", "--d", "3"]);
        assert_eq!(code, 1);
        assert!(out.contains("\"supercritical\": false"));
    }

    #[test]
    fn count_above_turning_point() {
        let (code, out, _) = call(&["count", "--f", "exp", "--d", "3", "--ball", "1", "--lambda", "3.5", "--samples", "512"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["count"], 0);
    }

    #[test]
    fn config_file_precedence() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        std::fs::write(&path, r#"{"subcommand": "fermi", "delta": 1.0, "u": 3.0}"#).unwrap();
        let p = path.to_str().unwrap();
        let (code, from_file, _) = call(&["fermi", "--config", p]);
        assert_eq!(code, 0);
        let (_, direct, _) = call(&["fermi", "--delta", "1", "--u", "3"]);
        assert_eq!(from_file, direct);
        let (_, flag_wins, _) = call(&["fermi", "--config", p, "--u", "0"]);
        let (_, at_zero, _) = call(&["fermi", "--delta", "1", "--u", "0"]);
        assert_eq!(flag_wins, at_zero);
        assert_eq!(call(&["count", "--config", p]).0, 2);
        std::fs::write(&path, r#"{"nonsense": 1}"#).unwrap();
        assert_eq!(call(&["fermi", "--config", p]).0, 2);
    }

    #[test]
    fn overlay_prefers_top() {
        let top = RunConfig { d: Some(4), ..Default::default() };
        let base = RunConfig { d: Some(3), f: Some("exp".into()), ..Default::default() };
        let m = top.overlay(base);
        assert_eq!((m.d, m.f.as_deref()), (Some(4), Some("exp")));
    }
}
