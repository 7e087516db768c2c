//! Radial solutions on balls by shooting from the centre.
//!
//! The profile `w` solves `w″ + (d−1)/s w′ + f(w + shift) = 0`, `w(0) = a`,
//! `w′(0) = 0`, up to its first zero `s₀`. The multiplicative problem
//! `Δu + λ f(u) = 0` on the ball of radius `R` follows by scaling,
//! `u(r) = w(s₀ r/R)` and `λ = (s₀/R)²`, so one initial-value solve per
//! amplitude suffices. A shift breaks that scaling, so the additive problem
//! root-finds the amplitude with `s₀(a; μ) = R` instead.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::unit_sphere_area;
use crate::nonlinearity::NonlinearitySpec;
use crate::ode::{dopri_step, step_factor, Step, Tolerances};
use crate::optimize::{bisect, golden_max, log_grid, linear_grid};
use crate::quadrature::{boole, boole_cumulative};

/// Default number of amplitude samples for solution counting.
pub const COUNT_SAMPLES: usize = 4096;
/// Default amplitude range for solution counting.
pub const COUNT_RANGE: (f64, f64) = (1e-8, 1e4);
/// Amplitudes with `f(a + shift)` above this are skipped.
pub const OVERFLOW_LIMIT: f64 = 1e300;
/// `|λ′(a)|` below this at a root flags the count as uncertain.
pub const TANGENCY_SLOPE: f64 = 1e-8;

/// Which of the four problems a profile solves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Problem {
    /// `Δu + λ f(u) = 0`
    MultLocal { lambda: f64 },
    /// `Δu + f(u + μ) = 0`
    AddLocal { mu: f64 },
    /// `Δu + κ f(u) / ∫f(u) = 0`, with the equivalent `λ`
    MultNonLocal { kappa: f64, lambda: f64 },
    /// `Δu + f(u + μ) = 0` with `∫f(u + μ) = M`
    AddNonLocal { mass: f64, mu: f64 },
}

impl Problem {
    /// Multiplier `λ` for the multiplicative problems.
    pub fn lambda(&self) -> Option<f64> {
        match *self {
            Problem::MultLocal { lambda } | Problem::MultNonLocal { lambda, .. } => Some(lambda),
            _ => None,
        }
    }

    /// Shift `μ` for the additive problems.
    pub fn mu(&self) -> Option<f64> {
        match *self {
            Problem::AddLocal { mu } | Problem::AddNonLocal { mu, .. } => Some(mu),
            _ => None,
        }
    }
}

/// First zero of a shot and the slope there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Endpoint {
    pub s0: f64,
    /// `w′(s₀)`
    pub slope: f64,
}

/// A shot with its profile on a grid of `4m + 1` points ending at `s₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct Shot {
    pub s0: f64,
    pub s: Vec<f64>,
    pub w: Vec<f64>,
    pub wp: Vec<f64>,
}

/// A radial profile on the ball of radius `radius`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialSolution {
    pub d: usize,
    pub radius: f64,
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub uprime: Vec<f64>,
    pub amplitude: f64,
    pub problem: Problem,
    #[serde(serialize_with = "serialize_spec")]
    pub spec: NonlinearitySpec,
}

fn serialize_spec<S: serde::Serializer>(spec: &NonlinearitySpec, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&spec.id())
}

impl RadialSolution {
    /// Right-hand side `λ f(u)` or `f(u + μ)` of `−Δu`.
    pub fn source(&self, u: f64) -> f64 {
        match self.problem {
            Problem::MultLocal { lambda } | Problem::MultNonLocal { lambda, .. } => lambda * self.spec.f_extended(u),
            Problem::AddLocal { mu } | Problem::AddNonLocal { mu, .. } => self.spec.f_extended(u + mu),
        }
    }

    /// `∫_Ω g(r, u, u′) dx` by composite Boole quadrature on the solution grid.
    pub fn integrate(&self, g: impl Fn(f64, f64, f64) -> f64) -> f64 {
        let dm1 = self.d as i32 - 1;
        let y: Vec<f64> = (0..self.r.len())
            .map(|i| g(self.r[i], self.u[i], self.uprime[i]) * self.r[i].powi(dm1))
            .collect();
        unit_sphere_area(self.d) * boole(&self.r, &y)
    }

    /// `|∂Ω|`
    pub fn surface(&self) -> f64 {
        unit_sphere_area(self.d) * self.radius.powi(self.d as i32 - 1)
    }

    /// Total outward flux `−|∂Ω| u′(R)`.
    pub fn boundary_flux(&self) -> f64 {
        -self.surface() * self.uprime.last().copied().unwrap_or(f64::NAN)
    }

    /// `∫_Ω (source) dx`, i.e. `κ` or `M`.
    pub fn source_integral(&self) -> f64 {
        self.integrate(|_, u, _| self.source(u))
    }

    /// Sup-norm residual of the integrated equation
    /// `u′(r) + r^{1−d} ∫₀^r t^{d−1} S(u(t)) dt = 0`, divided by `r`, at panel ends.
    pub fn ode_residual(&self) -> f64 {
        let dm1 = self.d as i32 - 1;
        let y: Vec<f64> = self.r.iter().zip(&self.u).map(|(&r, &u)| self.source(u) * r.powi(dm1)).collect();
        boole_cumulative(&self.r, &y)
            .into_iter()
            .map(|(i, integral)| {
                let r = self.r[i];
                (self.uprime[i] + integral / r.powi(dm1)).abs() / r
            })
            .fold(0.0, f64::max)
    }

    /// True when `u′ < 0` for `r > 0` and the sampled `u` never increases
    /// (points near the centre may coincide in floating point).
    pub fn is_decreasing(&self) -> bool {
        self.uprime[1..].iter().all(|&v| v < 0.0) && self.u.windows(2).all(|w| w[1] <= w[0])
    }

    /// The profile plus `eps (1 − r²/R²)`; no longer a solution for `eps ≠ 0`.
    pub fn perturbed(&self, eps: f64) -> RadialSolution {
        let r2 = self.radius * self.radius;
        let mut out = self.clone();
        for i in 0..out.r.len() {
            let r = out.r[i];
            out.u[i] += eps * (1.0 - r * r / r2);
            out.uprime[i] -= 2.0 * eps * r / r2;
        }
        out
    }
}

/// `κ = λ ∫_Ω f(u) dx` of a multiplicative solution.
pub fn compute_kappa(sol: &RadialSolution) -> Result<f64> {
    match sol.problem {
        Problem::MultLocal { .. } | Problem::MultNonLocal { .. } => Ok(sol.source_integral()),
        _ => Err(Error::invalid("kappa is defined for multiplicative solutions")),
    }
}

/// `M = ∫_Ω f(u + μ) dx` of an additive solution.
pub fn compute_mass(sol: &RadialSolution) -> Result<f64> {
    match sol.problem {
        Problem::AddLocal { .. } | Problem::AddNonLocal { .. } => Ok(sol.source_integral()),
        _ => Err(Error::invalid("the mass is defined for additive solutions")),
    }
}

/// One point of a bifurcation diagram.
///
/// Multiplicative points carry `λ`, `κ = λ∫f(u)` and `M = ∫f(u)`; additive
/// points carry `μ` and `M = ∫f(u + μ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct BranchPoint {
    pub a: f64,
    pub lambda: Option<f64>,
    pub kappa: Option<f64>,
    #[serde(rename = "M")]
    pub mass: Option<f64>,
    pub mu: Option<f64>,
    pub sup_norm: f64,
    pub boundary_flux: f64,
}

impl BranchPoint {
    pub fn from_solution(sol: &RadialSolution) -> BranchPoint {
        let flux = sol.boundary_flux();
        match sol.problem {
            Problem::MultLocal { lambda } | Problem::MultNonLocal { lambda, .. } => {
                let m = sol.integrate(|_, u, _| sol.spec.f_extended(u));
                BranchPoint {
                    a: sol.amplitude,
                    lambda: Some(lambda),
                    kappa: Some(lambda * m),
                    mass: Some(m),
                    mu: None,
                    sup_norm: sol.amplitude,
                    boundary_flux: flux,
                }
            }
            Problem::AddLocal { mu } | Problem::AddNonLocal { mu, .. } => BranchPoint {
                a: sol.amplitude,
                lambda: None,
                kappa: None,
                mass: Some(sol.source_integral()),
                mu: Some(mu),
                sup_norm: sol.amplitude,
                boundary_flux: flux,
            },
        }
    }
}

/// An amplitude (or shift) at which a sweep produced no point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepFailure {
    pub parameter: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchSweep {
    pub points: Vec<BranchPoint>,
    pub failures: Vec<SweepFailure>,
}

/// `λ(a)` sampled on a geometric amplitude grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaSweep {
    pub amplitudes: Vec<f64>,
    /// `None` where the shot was skipped or failed.
    pub lambdas: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionCount {
    pub count: usize,
    /// Amplitudes `u(0)` of the radial solutions found.
    pub roots: Vec<f64>,
    /// A root is near-tangent (`|λ′(a)| < 1e-8`): the count is uncertain.
    pub tangency: bool,
    /// Samples skipped for overflow or failure.
    pub skipped: usize,
}

/// Shooting solver for one nonlinearity, dimension and ball radius.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialSolver {
    spec: NonlinearitySpec,
    d: usize,
    radius: f64,
    tol: Tolerances,
    subdivisions: usize,
    jobs: Option<usize>,
}

impl RadialSolver {
    pub fn new(spec: NonlinearitySpec, d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::invalid(format!("dimension must be >= 2, got {d}")));
        }
        Ok(RadialSolver { spec, d, radius: 1.0, tol: Tolerances::default(), subdivisions: 4, jobs: None })
    }

    pub fn with_radius(mut self, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::invalid(format!("radius must be positive, got {radius}")));
        }
        self.radius = radius;
        Ok(self)
    }

    pub fn with_tolerances(mut self, tol: Tolerances) -> Result<Self> {
        if !(tol.rtol > 0.0 && tol.atol > 0.0 && tol.rtol < 1.0) {
            return Err(Error::invalid(format!("bad tolerances rtol = {}, atol = {}", tol.rtol, tol.atol)));
        }
        self.tol = tol;
        Ok(self)
    }

    /// Output points per integrator step; must be a positive multiple of 4.
    pub fn with_subdivisions(mut self, n: usize) -> Result<Self> {
        if n == 0 || !n.is_multiple_of(4) {
            return Err(Error::invalid(format!("subdivisions must be a positive multiple of 4, got {n}")));
        }
        self.subdivisions = n;
        Ok(self)
    }

    /// Worker threads for sweeps; `None` uses the global pool.
    pub fn with_jobs(mut self, jobs: Option<usize>) -> Self {
        self.jobs = jobs.filter(|&j| j > 0);
        self
    }

    pub fn spec(&self) -> &NonlinearitySpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tol
    }

    fn par_map<T: Sync, U: Send>(&self, items: &[T], f: impl Fn(&T) -> U + Sync + Send) -> Vec<U> {
        match self.jobs {
            Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
                Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
                Err(_) => items.iter().map(f).collect(),
            },
            None => items.par_iter().map(f).collect(),
        }
    }

    /// First zero `s₀` of the profile started at `a` (with optional shift) and the slope there.
    pub fn shoot(&self, a: f64, shift: Option<f64>) -> Result<Endpoint> {
        let shot = self.shoot_scaled(a, shift.unwrap_or(0.0), false)?;
        Ok(Endpoint { s0: shot.s0, slope: shot.wp[shot.wp.len() - 1] })
    }

    /// [`RadialSolver::shoot`] with the profile recorded.
    pub fn shoot_profile(&self, a: f64, shift: Option<f64>) -> Result<Shot> {
        self.shoot_scaled(a, shift.unwrap_or(0.0), true)
    }
    fn shoot_scaled(&self, a: f64, shift: f64, record: bool) -> Result<Shot> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::invalid(format!("amplitude must be positive, got {a}")));
        }
        let c = a + shift;
        if self.spec.is_exponential() && c.is_finite() && c.exp() > OVERFLOW_LIMIT {
            return self.integrate(a, Frame::LogExp { c }, record);
        }
        self.integrate(a, Frame::Direct { shift }, record)
    }

    fn integrate(&self, a: f64, frame: Frame, record: bool) -> Result<Shot> {
        let spec = &self.spec;
        let dm = self.d as f64;
        let tol = self.tol;
        let sub = self.subdivisions;
        let (f0, fp0) = match frame {
            Frame::Direct { shift } => {
                let f0 = spec.f(a + shift)?;
                if !(f0.is_finite() && f0 <= OVERFLOW_LIMIT) {
                    return Err(Error::invalid(format!("f({}) overflows", a + shift)));
                }
                (f0, spec.fprime(a + shift)?)
            }
            // the stretched variable t = s e^{c/2} normalizes f(a + shift) to 1
            Frame::LogExp { .. } => (1.0, 1.0),
        };
        let len = 1.0 / fp0.max(f0 / a).sqrt();
        // centre series in the natural length variable: (w, dw/ds)
        let series = |s: f64| {
            let s2 = s * s;
            [
                a - f0 * s2 / (2.0 * dm) + (f0 * s2) * (fp0 * s2) / (8.0 * dm * (dm + 2.0)),
                -f0 * s / dm + (f0 * s) * (fp0 * s2) / (2.0 * dm * (dm + 2.0)),
            ]
        };
        let t_init = 1e-8 * len;
        let mut rhs = |x: f64, y: &[f64; 2]| match frame {
            Frame::Direct { shift } => [y[1], -(dm - 1.0) / x * y[1] - spec.f_extended(y[0] + shift)],
            // τ = ln t, q = dw/dτ: q′ = −(d−2)q − t² e^{w−a}
            Frame::LogExp { .. } => [y[1], -(dm - 2.0) * y[1] - (y[0] - a + 2.0 * x).exp()],
        };
        let (x_init, y_init, mut h, x_max) = match frame {
            Frame::Direct { .. } => (t_init, series(t_init), 1e-2 * len, 1e6 * len.max(1.0)),
            Frame::LogExp { c } => {
                let y = series(t_init);
                (t_init.ln(), [y[0], y[1] * t_init], 0.1, 1e6f64.ln() + 0.5 * c)
            }
        };
        let to_s = |x: f64| match frame {
            Frame::Direct { .. } => x,
            Frame::LogExp { c } => (x - 0.5 * c).exp(),
        };
        let to_x = |s: f64| match frame {
            Frame::Direct { .. } => s,
            Frame::LogExp { c } => s.ln() + 0.5 * c,
        };
        let slope = |x: f64, q: f64| match frame {
            Frame::Direct { .. } => q,
            Frame::LogExp { c } => q * (0.5 * c - x).exp(),
        };
        let mut out = Shot { s0: f64::NAN, s: Vec::new(), w: Vec::new(), wp: Vec::new() };
        let push = |out: &mut Shot, x: f64, y: [f64; 2]| {
            out.s.push(to_s(x));
            out.w.push(y[0]);
            out.wp.push(slope(x, y[1]));
        };
        if record {
            out.s.push(0.0);
            out.w.push(a);
            out.wp.push(0.0);
            for i in 1..=sub {
                let t = t_init * i as f64 / sub as f64;
                let y = series(t);
                match frame {
                    Frame::Direct { .. } => push(&mut out, t, y),
                    Frame::LogExp { .. } => push(&mut out, t.ln(), [y[0], y[1] * t]),
                }
            }
        }
        // output points equally spaced in s within each step
        let record_step = |out: &mut Shot, st: &Step<2>| {
            let (s_a, s_b) = (to_s(st.s), to_s(st.s + st.h));
            for i in 1..sub {
                let x = to_x(s_a + (s_b - s_a) * i as f64 / sub as f64);
                let th = ((x - st.s) / st.h).clamp(0.0, 1.0);
                push(out, st.s + th * st.h, st.dense(th));
            }
            push(out, st.s + st.h, st.y1);
        };
        let mut x = x_init;
        let mut y = y_init;
        let mut k = rhs(x, &y);
        loop {
            if x > x_max {
                return Err(Error::NoZero { s_max: to_s(x_max) });
            }
            if h < 1e-14 * x.abs().max(t_init) {
                return Err(Error::StepUnderflow { s: to_s(x) });
            }
            let st = dopri_step(&mut rhs, x, &y, &k, h, &tol);
            if !(st.err <= 1.0) || !st.y1.iter().all(|v| v.is_finite()) {
                h *= if st.err.is_finite() { step_factor(st.err).min(0.9) } else { 0.2 };
                continue;
            }
            if st.y1[0] <= 0.0 {
                let hz = locate_zero(&mut rhs, &st, &k, &tol);
                let last = dopri_step(&mut rhs, x, &y, &k, hz, &tol);
                if record {
                    record_step(&mut out, &last);
                } else {
                    push(&mut out, x + hz, last.y1);
                }
                out.s0 = to_s(x + hz);
                if !(out.s0 > 0.0 && out.s0.is_finite() && out.wp.iter().all(|v| v.is_finite())) {
                    return Err(Error::invalid(format!("profile at amplitude {a} leaves floating-point range")));
                }
                return Ok(out);
            }
            if record {
                record_step(&mut out, &st);
            }
            x += h;
            y = st.y1;
            k = st.k_end;
            h *= step_factor(st.err);
        }
    }

    /// `λ(a) = (s₀(a)/R)²` for the multiplicative problem.
    pub fn lambda_of(&self, a: f64) -> Result<f64> {
        let s0 = self.shoot(a, None)?.s0;
        Ok((s0 / self.radius).powi(2))
    }

    /// Multiplicative local solution with amplitude `a`.
    pub fn solve_mult_local(&self, a: f64) -> Result<RadialSolution> {
        let shot = self.shoot_profile(a, None)?;
        let scale = shot.s0 / self.radius;
        let mut r: Vec<f64> = shot.s.iter().map(|s| s / scale).collect();
        *r.last_mut().expect("non-empty profile") = self.radius;
        Ok(RadialSolution {
            d: self.d,
            radius: self.radius,
            r,
            u: shot.w,
            uprime: shot.wp.iter().map(|v| v * scale).collect(),
            amplitude: a,
            problem: Problem::MultLocal { lambda: scale * scale },
            spec: self.spec,
        })
    }

    fn additive_solution(&self, a: f64, mu: f64) -> Result<RadialSolution> {
        let shot = self.shoot_profile(a, Some(mu))?;
        // rescale the (tiny) mismatch s₀ − R so the grid ends exactly at R
        let scale = shot.s0 / self.radius;
        let mut r: Vec<f64> = shot.s.iter().map(|s| s / scale).collect();
        *r.last_mut().expect("non-empty profile") = self.radius;
        Ok(RadialSolution {
            d: self.d,
            radius: self.radius,
            r,
            u: shot.w,
            uprime: shot.wp.iter().map(|v| v * scale).collect(),
            amplitude: a,
            problem: Problem::AddLocal { mu },
            spec: self.spec,
        })
    }

    /// Amplitude of the minimal additive solution: the first `a` (increasing)
    /// with `s₀(a; μ) = R`.
    pub fn additive_amplitude(&self, mu: f64) -> Result<f64> {
        let big_r = self.radius;
        let fmu = self.spec.f(mu)?;
        let s0 = |a: f64| self.shoot(a, Some(mu)).map(|e| e.s0);
        let dm = self.d as f64;
        // linearized guess s₀ ≈ √(2d a / f(μ)) puts the start near s₀ = R/2
        let mut a = (0.125 * big_r * big_r * fmu / dm).clamp(1e-300, 1.0);
        let mut lo_seen = f64::INFINITY;
        let mut hi_seen: f64 = 0.0;
        let mut cur = s0(a)?;
        for _ in 0..2000 {
            if cur < big_r {
                break;
            }
            a *= 0.5;
            cur = s0(a)?;
        }
        let factor = 10f64.powf(1.0 / 16.0);
        loop {
            lo_seen = lo_seen.min(cur);
            hi_seen = hi_seen.max(cur);
            let next_a = a * factor;
            let next = match s0(next_a) {
                Ok(v) if next_a <= 1e4 => v,
                _ => return Err(Error::NotAttainable { target: big_r, lo: lo_seen, hi: hi_seen }),
            };
            if next >= big_r {
                let (la, lb) = (a.ln(), next_a.ln());
                let x = bisect(|x| s0(x.exp()).map(|s| s - big_r).unwrap_or(f64::NAN), la, lb, 1e-14)?;
                return Ok(x.exp());
            }
            if next < 0.5 * hi_seen && hi_seen > 0.0 {
                // past the turning point without reaching R
                return Err(Error::NotAttainable { target: big_r, lo: lo_seen.min(next), hi: hi_seen });
            }
            a = next_a;
            cur = next;
        }
    }

    /// Minimal solution of `Δu + f(u + μ) = 0` on the ball.
    pub fn solve_add_local(&self, mu: f64) -> Result<RadialSolution> {
        let a = self.additive_amplitude(mu)?;
        self.additive_solution(a, mu)
    }

    /// One [`BranchPoint`] per amplitude; failures are recorded, not fatal.
    pub fn sweep_branch(&self, amplitudes: &[f64]) -> Result<BranchSweep> {
        if amplitudes.is_empty() {
            return Err(Error::invalid("empty amplitude list"));
        }
        let results = self.par_map(amplitudes, |&a| {
            self.check_overflow(a)?;
            self.solve_mult_local(a).map(|s| BranchPoint::from_solution(&s))
        });
        Ok(collect_sweep(amplitudes, results))
    }

    fn check_overflow(&self, u: f64) -> Result<()> {
        let f = self.spec.f(u)?;
        if !(f <= OVERFLOW_LIMIT) {
            return Err(Error::invalid(format!("f({u}) = {f:e} exceeds the overflow threshold {OVERFLOW_LIMIT:e}")));
        }
        Ok(())
    }

    /// Minimal additive solutions for each shift.
    pub fn sweep_additive(&self, mus: &[f64]) -> Result<BranchSweep> {
        if mus.is_empty() {
            return Err(Error::invalid("empty shift list"));
        }
        let results = self.par_map(mus, |&mu| self.solve_add_local(mu).map(|s| BranchPoint::from_solution(&s)));
        Ok(collect_sweep(mus, results))
    }

    /// `λ(a)` on `samples` geometric amplitudes in `[a_lo, a_hi]`.
    pub fn lambda_sweep(&self, a_lo: f64, a_hi: f64, samples: usize) -> Result<LambdaSweep> {
        if !(a_lo > 0.0 && a_hi > a_lo) {
            return Err(Error::invalid(format!("bad amplitude range [{a_lo}, {a_hi}]")));
        }
        if samples < 16 {
            return Err(Error::invalid(format!("need at least 16 samples, got {samples}")));
        }
        let amplitudes = geometric_grid(a_lo, a_hi, samples);
        let lambdas = self.par_map(&amplitudes, |&a| self.lambda_of(a).ok());
        Ok(LambdaSweep { amplitudes, lambdas })
    }

    /// All radial solutions of the multiplicative problem at `lambda`, found by
    /// sign changes of `λ(a) − lambda` on a geometric sweep.
    pub fn count_solutions(&self, lambda: f64, a_range: (f64, f64), samples: usize) -> Result<SolutionCount> {
        let sweep = self.lambda_sweep(a_range.0, a_range.1, samples)?;
        self.count_on(&sweep, lambda)
    }

    /// [`RadialSolver::count_solutions`] reusing a precomputed sweep.
    pub fn count_on(&self, sweep: &LambdaSweep, lambda: f64) -> Result<SolutionCount> {
        if !(lambda > 0.0) {
            return Err(Error::invalid(format!("lambda must be positive, got {lambda}")));
        }
        let g = |a: f64| self.lambda_of(a).map(|l| l - lambda).unwrap_or(f64::NAN);
        let (roots, tangency) = sign_change_roots(&sweep.amplitudes, &sweep.lambdas, lambda, g, |a| self.lambda_of(a).ok());
        let skipped = sweep.lambdas.iter().filter(|l| l.is_none()).count();
        Ok(SolutionCount { count: roots.len(), roots, tangency, skipped })
    }

    /// First interior local maximum of `λ(a)` on the sweep, refined by
    /// golden-section search in `ln a`: the turning point `(a*, λ*)`.
    pub fn turning_point(&self, sweep: &LambdaSweep) -> Result<(f64, f64)> {
        let l = &sweep.lambdas;
        for i in 1..l.len().saturating_sub(1) {
            if let (Some(p), Some(c), Some(n)) = (l[i - 1], l[i], l[i + 1]) {
                if c >= p && c > n {
                    let (lo, hi) = (sweep.amplitudes[i - 1].ln(), sweep.amplitudes[i + 1].ln());
                    let (x, v) = golden_max(|x| self.lambda_of(x.exp()).unwrap_or(f64::NEG_INFINITY), lo, hi, 1e-10);
                    return Ok((x.exp(), v.max(c)));
                }
            }
        }
        Err(Error::NoConvergence("no interior maximum of lambda(a) on the sweep".into()))
    }

    /// `κ(a)` from the boundary flux of the shot (no profile needed).
    pub fn kappa_of(&self, a: f64) -> Result<f64> {
        let e = self.shoot(a, None)?;
        let omega = unit_sphere_area(self.d);
        Ok(-omega * self.radius.powi(self.d as i32 - 2) * e.s0 * e.slope)
    }

    /// Radial solutions of the non-local multiplicative problem with coupling `kappa`.
    pub fn solve_nonlocal_mult(&self, kappa: f64) -> Result<Vec<RadialSolution>> {
        if !(kappa > 0.0) {
            return Err(Error::invalid(format!("kappa must be positive, got {kappa}")));
        }
        let amplitudes = geometric_grid(1e-6, COUNT_RANGE.1, 1024);
        let kappas = self.par_map(&amplitudes, |&a| self.kappa_of(a).ok());
        let g = |a: f64| self.kappa_of(a).map(|k| k - kappa).unwrap_or(f64::NAN);
        let (roots, _) = sign_change_roots(&amplitudes, &kappas, kappa, g, |a| self.kappa_of(a).ok());
        roots
            .into_iter()
            .map(|a| {
                let mut sol = self.solve_mult_local(a)?;
                let lambda = sol.problem.lambda().expect("multiplicative");
                sol.problem = Problem::MultNonLocal { kappa: compute_kappa(&sol)?, lambda };
                Ok(sol)
            })
            .collect()
    }

    /// `M(μ)` on the minimal additive branch, from the boundary flux.
    pub fn mass_of(&self, mu: f64) -> Result<f64> {
        let a = self.additive_amplitude(mu)?;
        let e = self.shoot(a, Some(mu))?;
        Ok(-unit_sphere_area(self.d) * self.radius.powi(self.d as i32 - 1) * e.slope)
    }

    /// Minimal-branch solutions of the non-local additive problem with mass `mass`.
    ///
    /// `μ` is searched below the a-priori bound `f⁻¹(M/|Ω|)`.
    pub fn solve_nonlocal_add(&self, mass: f64) -> Result<Vec<RadialSolution>> {
        if !(mass > 0.0) {
            return Err(Error::invalid(format!("mass must be positive, got {mass}")));
        }
        let omega = unit_sphere_area(self.d);
        let vol = omega * self.radius.powi(self.d as i32) / self.d as f64;
        let bar = self.spec.mu_bar();
        let mu_hi = crate::criteria::generalized_inverse(&self.spec, mass / vol)?;
        // walk down until M(μ) < mass
        let mut mu_lo = mu_hi;
        let mut step = 1.0;
        loop {
            mu_lo = if bar.is_finite() { bar + 0.5 * (mu_lo - bar) } else { mu_lo - step };
            step *= 2.0;
            match self.mass_of(mu_lo) {
                Ok(m) if m < mass => break,
                Ok(_) | Err(Error::NotAttainable { .. }) => {}
                Err(e) => return Err(e),
            }
            if (bar.is_finite() && mu_lo - bar < 1e-12) || mu_lo < -1e3 {
                return Ok(Vec::new());
            }
        }
        let mus = linear_grid(mu_lo, mu_hi, 48);
        let masses = self.par_map(&mus, |&mu| self.mass_of(mu).ok());
        let mut out = Vec::new();
        for i in 0..mus.len() - 1 {
            let (Some(m0), Some(m1)) = (masses[i], masses[i + 1]) else { continue };
            if (m0 - mass).signum() == (m1 - mass).signum() && m1 != mass {
                continue;
            }
            let g = |mu: f64| self.mass_of(mu).map(|m| m - mass).unwrap_or(f64::NAN);
            let mu = bisect(g, mus[i], mus[i + 1], 1e-13 * mus[i].abs().max(1.0))?;
            let mut sol = self.solve_add_local(mu)?;
            sol.problem = Problem::AddNonLocal { mass: compute_mass(&sol)?, mu };
            out.push(sol);
        }
        Ok(out)
    }
}

/// Independent variable and state of a shot.
#[derive(Debug, Clone, Copy)]
enum Frame {
    /// `s`, `(w, dw/ds)`
    Direct { shift: f64 },
    /// `τ = ln s + c/2`, `(w, dw/dτ)`, exponential only, `c = a + shift`
    LogExp { c: f64 },
}

/// Step size `hz ∈ (0, h]` at which a re-taken step from `st.s` lands on
/// `w = 0`: a dense-output bisection gives the start, Newton on the step
/// size (slope `w′` at the step end) polishes it, bisection guards the bracket.
fn locate_zero(
    rhs: &mut impl FnMut(f64, &[f64; 2]) -> [f64; 2],
    st: &Step<2>,
    k1: &[f64; 2],
    tol: &Tolerances,
) -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let m = 0.5 * (lo + hi);
        if st.dense(m)[0] > 0.0 {
            lo = m;
        } else {
            hi = m;
        }
    }
    let (mut blo, mut bhi) = (0.0, st.h);
    let mut hz = 0.5 * (lo + hi) * st.h;
    for _ in 0..40 {
        let y = dopri_step(rhs, st.s, &st.y0, k1, hz, tol).y1;
        if y[0] == 0.0 {
            break;
        }
        if y[0] > 0.0 {
            blo = hz;
        } else {
            bhi = hz;
        }
        let mut next = hz - y[0] / y[1];
        if !(next > blo && next < bhi) {
            next = 0.5 * (blo + bhi);
        }
        let done = (next - hz).abs() <= 1e-15 * (st.s + hz);
        hz = next;
        if done {
            break;
        }
    }
    hz
}

/// `samples` geometrically spaced points from `lo` to `hi`, both ends exact.
pub fn geometric_grid(lo: f64, hi: f64, samples: usize) -> Vec<f64> {
    let (l0, l1) = (lo.ln(), hi.ln());
    (0..samples)
        .map(|i| match i {
            0 => lo,
            _ if i + 1 == samples => hi,
            _ => (l0 + (l1 - l0) * i as f64 / (samples - 1) as f64).exp(),
        })
        .collect()
}

/// Log-spaced amplitudes with `per_decade` points per decade (both ends included).
pub fn amplitude_grid(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    log_grid(lo, hi, per_decade)
}

fn collect_sweep(params: &[f64], results: Vec<Result<BranchPoint>>) -> BranchSweep {
    let mut points = Vec::new();
    let mut failures = Vec::new();
    for (p, r) in params.iter().zip(results) {
        match r {
            Ok(bp) => points.push(bp),
            Err(e) => failures.push(SweepFailure { parameter: *p, reason: e.to_string() }),
        }
    }
    BranchSweep { points, failures }
}

/// Roots of `value(a) = target` bracketed by consecutive finite samples,
/// refined by bisection in `ln a`. Returns the roots and a tangency flag.
fn sign_change_roots(
    amplitudes: &[f64],
    values: &[Option<f64>],
    target: f64,
    g: impl Fn(f64) -> f64,
    value: impl Fn(f64) -> Option<f64>,
) -> (Vec<f64>, bool) {
    let mut roots = Vec::new();
    let mut tangency = false;
    let mut prev: Option<(f64, f64)> = None;
    for (&a, v) in amplitudes.iter().zip(values) {
        let Some(v) = *v else {
            prev = None;
            continue;
        };
        let diff = v - target;
        if let Some((pa, pd)) = prev {
            if diff == 0.0 || (pd != 0.0 && pd.signum() != diff.signum()) {
                let root = if diff == 0.0 {
                    Some(a.ln())
                } else {
                    bisect(|x| g(x.exp()), pa.ln(), a.ln(), 1e-13).ok()
                };
                if let Some(x) = root {
                    let r = x.exp();
                    let h = 1e-6 * r;
                    if let (Some(up), Some(dn)) = (value(r + h), value(r - h)) {
                        if ((up - dn) / (2.0 * h)).abs() < TANGENCY_SLOPE {
                            tangency = true;
                        }
                    }
                    roots.push(r);
                }
            }
        }
        prev = Some((a, diff));
    }
    (roots, tangency)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp_solver(d: usize) -> RadialSolver {
        RadialSolver::new(NonlinearitySpec::exponential(), d).unwrap()
    }

    /// d = 2 Gelfand: λ(a) = 8b/(1+b)² with b = e^{a/2} − 1.
    fn gelfand2(a: f64) -> f64 {
        let b = (0.5 * a).exp_m1();
        8.0 * b / ((1.0 + b) * (1.0 + b))
    }

    #[test]
    fn d2_exponential_matches_closed_form() {
        let s = exp_solver(2);
        for a in [0.01, 0.3, 1.0, 2.77, 5.0, 12.0] {
            let l = s.lambda_of(a).unwrap();
            assert!((l / gelfand2(a) - 1.0).abs() < 1e-8, "a={a} {l} {}", gelfand2(a));
        }
    }

    #[test]
    fn small_amplitude_limit() {
        let s = exp_solver(3);
        // f(0) = 1 dominates: w ≈ a − s²/6, so λ = s₀² ≈ 6a
        for a in [1e-6, 1e-4] {
            let l = s.lambda_of(a).unwrap();
            assert!((l / (6.0 * a) - 1.0).abs() < 2.0 * a, "{l}");
        }
        // for e^u − 1 the linearization w″ + (2/s)w′ + w = 0 takes over and s₀ → π
        let pp = RadialSolver::new(NonlinearitySpec::shifted_power(2.0).unwrap(), 3).unwrap();
        let e = pp.shoot(1e-8, Some(-1.0)).unwrap();
        assert!(e.s0 > 0.0);
    }

    #[test]
    fn profile_invariants() {
        let s = exp_solver(3);
        let sol = s.solve_mult_local(1.0).unwrap();
        let a = sol.amplitude;
        assert_eq!(sol.r[0], 0.0);
        assert_eq!(*sol.r.last().unwrap(), 1.0);
        assert!(sol.u.last().unwrap().abs() < 1e-9 * a);
        assert_eq!(sol.uprime[0], 0.0);
        assert!(sol.is_decreasing());
        assert!(sol.r.windows(2).all(|w| w[1] > w[0]));
        assert_eq!((sol.r.len() - 1) % 4, 0);
        let lambda = sol.problem.lambda().unwrap();
        assert!(sol.ode_residual() < 1e-8 * (lambda * a.exp()).max(1.0));
    }

    #[test]
    fn flux_matches_kappa_and_shot_flux() {
        let s = exp_solver(3);
        for a in [0.1, 1.0, 4.0] {
            let sol = s.solve_mult_local(a).unwrap();
            let k = compute_kappa(&sol).unwrap();
            assert!((k / sol.boundary_flux() - 1.0).abs() < 1e-6);
            assert!((k / s.kappa_of(a).unwrap() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn finer_output_grid_leaves_lambda_unchanged() {
        let coarse = exp_solver(3);
        let fine = exp_solver(3).with_subdivisions(8).unwrap();
        let a = coarse.solve_mult_local(2.0).unwrap();
        let b = fine.solve_mult_local(2.0).unwrap();
        let (la, lb) = (a.problem.lambda().unwrap(), b.problem.lambda().unwrap());
        assert!((la / lb - 1.0).abs() <= 1e-10);
        let (ka, kb) = (compute_kappa(&a).unwrap(), compute_kappa(&b).unwrap());
        assert!((ka / kb - 1.0).abs() < 1e-9);
    }

    #[test]
    fn critical_pure_power_never_reaches_zero() {
        let s = RadialSolver::new(NonlinearitySpec::pure_power(5.0).unwrap(), 3).unwrap();
        assert!(matches!(s.shoot(1.0, None), Err(Error::NoZero { .. })));
    }

    #[test]
    fn pure_power_scaling_law() {
        let p = 3.0;
        let s = RadialSolver::new(NonlinearitySpec::pure_power(p).unwrap(), 3).unwrap();
        let s1 = s.shoot(1.0, None).unwrap().s0;
        let s4 = s.shoot(4.0, None).unwrap().s0;
        assert!((s4 / (s1 * 4f64.powf(-(p - 1.0) / 2.0)) - 1.0).abs() < 1e-8);
        for a in [0.5, 2.0, 7.0] {
            let l = s.lambda_of(a).unwrap();
            assert!((l / (s1 * s1 * a.powf(-(p - 1.0))) - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn additive_exponential_reduces_to_multiplicative() {
        let s = exp_solver(3);
        let mu = -1.0;
        let add = s.solve_add_local(mu).unwrap();
        // same profile solves Δu + e^μ e^u = 0 with λ = e^μ
        let lam = s.lambda_of(add.amplitude).unwrap();
        assert!((lam / mu.exp() - 1.0).abs() < 1e-8);
        assert!(add.u.last().unwrap().abs() < 1e-9 * add.amplitude);
        assert!(add.ode_residual() < 1e-8 * add.source(add.amplitude).max(1.0));
        let m = compute_mass(&add).unwrap();
        assert!((m / add.boundary_flux() - 1.0).abs() < 1e-6);
        let mult = s.solve_mult_local(add.amplitude).unwrap();
        assert!((m / compute_kappa(&mult).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn additive_unreachable_radius_is_reported() {
        let s = exp_solver(3);
        // λ = e^4 > λ* ≈ 3.32 has no solution
        assert!(matches!(s.solve_add_local(4.0), Err(Error::NotAttainable { .. })));
    }

    #[test]
    fn counts_in_two_dimensions() {
        let s = exp_solver(2);
        let c = s.count_solutions(1.0, COUNT_RANGE, 1024).unwrap();
        assert_eq!(c.count, 2);
        // λ = 1 ⇔ b = 3 ± 2√2
        let exact: Vec<f64> = [3.0 - 8f64.sqrt(), 3.0 + 8f64.sqrt()].iter().map(|b| 2.0 * (1.0f64 + b).ln()).collect();
        for (r, e) in c.roots.iter().zip(&exact) {
            assert!((r - e).abs() < 1e-8 * e, "{r} vs {e}");
        }
    }

    #[test]
    fn too_few_samples_rejected() {
        assert!(exp_solver(3).count_solutions(1.0, COUNT_RANGE, 8).is_err());
    }

    #[test]
    fn sweep_is_ordered_and_records_failures() {
        let s = exp_solver(3).with_jobs(Some(2));
        let amps = [0.1, 1.0, 800.0, 2.0];
        let sw = s.sweep_branch(&amps).unwrap();
        assert_eq!(sw.points.iter().map(|p| p.a).collect::<Vec<_>>(), vec![0.1, 1.0, 2.0]);
        assert_eq!(sw.failures.len(), 1);
        assert_eq!(sw.failures[0].parameter, 800.0);
        assert!(s.sweep_branch(&[]).is_err());
    }

    #[test]
    fn exponential_turning_points() {
        let s3 = exp_solver(3);
        let sw = s3.lambda_sweep(1e-3, 1e4, 2000).unwrap();
        let (_, lstar) = s3.turning_point(&sw).unwrap();
        assert!((lstar - 3.322).abs() < 5e-3, "{lstar}");
        let s2 = exp_solver(2);
        let sw = s2.lambda_sweep(1e-3, 30.0, 400).unwrap();
        let (a, l) = s2.turning_point(&sw).unwrap();
        assert!((l - 2.0).abs() < 1e-9, "{l}");
        // b = 1 at the fold
        assert!((a - 2.0 * 2f64.ln()).abs() < 1e-4, "{a}");
    }

    #[test]
    fn exponential_singular_limit() {
        let s = exp_solver(3);
        for a in [1e2, 1e3] {
            let l = s.lambda_of(a).unwrap();
            assert!((l / 2.0 - 1.0).abs() < 0.05, "a={a} {l}");
        }
    }

    #[test]
    fn log_frame_agrees_across_the_switch() {
        let s = exp_solver(3);
        // e^{690} < 1e300 < e^{691}
        let below = s.lambda_of(690.0).unwrap();
        let above = s.lambda_of(691.0).unwrap();
        assert!((below - 2.0).abs() < 1e-9 && (above - 2.0).abs() < 1e-9, "{below} {above}");
        let sol = s.solve_mult_local(1000.0).unwrap();
        assert_eq!(*sol.r.last().unwrap(), 1.0);
        assert!(sol.u.last().unwrap().abs() < 1e-9 * 1000.0);
        assert!(sol.is_decreasing());
        let sw = s.sweep_branch(&[1.0, 1000.0]).unwrap();
        assert_eq!(sw.points.len(), 1);
        assert!(sw.failures[0].reason.contains("overflow"));
    }

    #[test]
    fn counts_in_three_dimensions() {
        let s = exp_solver(3);
        let sw = s.lambda_sweep(COUNT_RANGE.0, COUNT_RANGE.1, 1024).unwrap();
        let one = s.count_on(&sw, 0.5).unwrap();
        assert_eq!(one.count, 1);
        assert!(!one.tangency);
        assert!((s.lambda_of(one.roots[0]).unwrap() - 0.5).abs() < 1e-9);
        assert_eq!(s.count_on(&sw, 3.5).unwrap().count, 0);
        // near λ = 2 the branch oscillates: many solutions
        assert!(s.count_on(&sw, 2.0).unwrap().count >= 3);
    }

    #[test]
    fn shifted_power_additive_reduction() {
        let p = 5.0;
        let spec = NonlinearitySpec::shifted_power(p).unwrap();
        // λ* < 1 for d = 3, so μ = 0 needs a larger dimension
        let s = RadialSolver::new(spec, 6).unwrap();
        for mu in [0.0, -0.5] {
            let add = s.solve_add_local(mu).unwrap();
            // u = (1+μ) w with Δw + (1+μ)^{p−1}(1+w)^p = 0
            let scale = 1.0 + mu;
            let lam = s.lambda_of(add.amplitude / scale).unwrap();
            assert!((lam / scale.powf(p - 1.0) - 1.0).abs() < 1e-8, "mu={mu} {lam}");
            let mult = s.solve_mult_local(add.amplitude / scale).unwrap();
            let m = compute_mass(&add).unwrap();
            let k = compute_kappa(&mult).unwrap();
            // M = (1+μ)^p ∫(1+w)^p and κ = λ∫(1+w)^p (R = 1: no length rescale)
            assert!((m / (k * scale) - 1.0).abs() < 1e-6, "{m} {k}");
        }
    }

    #[test]
    fn fermi_additive_solution() {
        let spec = NonlinearitySpec::fermi(2.0).unwrap();
        let s = RadialSolver::new(spec, 6).unwrap();
        let sol = s.solve_add_local(-5.0).unwrap();
        assert!(sol.u.last().unwrap().abs() < 1e-9 * sol.amplitude.max(1.0));
        assert!(sol.is_decreasing());
        assert!(sol.ode_residual() < 1e-8 * sol.source(sol.amplitude).max(1.0));
        let m = compute_mass(&sol).unwrap();
        assert!((m / sol.boundary_flux() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn radius_scaling() {
        let s = exp_solver(3).with_radius(2.0).unwrap();
        let unit = exp_solver(3);
        let a = 1.3;
        assert!((s.lambda_of(a).unwrap() * 4.0 / unit.lambda_of(a).unwrap() - 1.0).abs() < 1e-12);
        let sol = s.solve_mult_local(a).unwrap();
        assert_eq!(*sol.r.last().unwrap(), 2.0);
        let k = compute_kappa(&sol).unwrap();
        assert!((k / sol.boundary_flux() - 1.0).abs() < 1e-6);
        assert!((k / s.kappa_of(a).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn energy_identity() {
        for (spec, d) in [
            (NonlinearitySpec::exponential(), 3),
            (NonlinearitySpec::shifted_power(5.0).unwrap(), 3),
            (NonlinearitySpec::fermi(2.0).unwrap(), 6),
        ] {
            let s = RadialSolver::new(spec, d).unwrap();
            for a in [0.1, 1.0, 5.0] {
                let sol = s.solve_mult_local(a).unwrap();
                let lhs = sol.integrate(|_, _, up| up * up);
                let rhs = sol.integrate(|_, u, _| u * sol.source(u));
                assert!((lhs / rhs - 1.0).abs() < 1e-6, "{spec} a={a}: {lhs} {rhs}");
            }
        }
    }

    #[test]
    fn kappa_small_amplitude_limit() {
        let s = exp_solver(3);
        let sol = s.solve_mult_local(1e-6).unwrap();
        // u ≈ 0 so κ ≈ λ|Ω| with λ ≈ 6a
        let k = compute_kappa(&sol).unwrap();
        assert!(k < 1e-4);
        let vol = 4.0 * std::f64::consts::PI / 3.0;
        assert!((k / (sol.problem.lambda().unwrap() * vol) - 1.0).abs() < 1e-5);
    }

    #[test]
    fn nonlocal_multiplicative() {
        let s = exp_solver(3);
        let sols = s.solve_nonlocal_mult(1.0).unwrap();
        assert_eq!(sols.len(), 1);
        let sol = &sols[0];
        let Problem::MultNonLocal { kappa, lambda } = sol.problem else { panic!("{:?}", sol.problem) };
        assert!((kappa - 1.0).abs() < 1e-8);
        // λ = κ / ∫f(u)
        let m = sol.integrate(|_, u, _| u.exp());
        assert!((lambda - kappa / m).abs() < 1e-8 * lambda);
        let tiny = s.solve_nonlocal_mult(1e-3).unwrap();
        assert_eq!(tiny.len(), 1);
        assert!(tiny[0].amplitude < sol.amplitude && tiny[0].amplitude < 1e-3);
        assert!(s.solve_nonlocal_mult(40.33).unwrap().is_empty());
        assert!(s.solve_nonlocal_mult(0.0).is_err());
    }

    #[test]
    fn nonlocal_additive_matches_multiplicative_for_exp() {
        let s = exp_solver(3);
        let mass = 5.0;
        let add = s.solve_nonlocal_add(mass).unwrap();
        assert_eq!(add.len(), 1);
        let Problem::AddNonLocal { mass: m, mu } = add[0].problem else { panic!() };
        assert!((m / mass - 1.0).abs() < 1e-8, "{m}");
        let mult = s.solve_nonlocal_mult(mass).unwrap();
        assert_eq!(mult.len(), 1);
        assert!((mult[0].amplitude / add[0].amplitude - 1.0).abs() < 1e-6);
        assert!((mult[0].problem.lambda().unwrap() / mu.exp() - 1.0).abs() < 1e-6);
        // dM/dμ > 0 near μ̄ = −∞ on the minimal branch
        let (m1, m2) = (s.mass_of(-6.0).unwrap(), s.mass_of(-5.9).unwrap());
        assert!(m2 > m1);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(24))]

        #[test]
        fn branch_point_identities(ln_a in -6.0f64..6.0, d in 3usize..6) {
            let s = exp_solver(d);
            let sol = s.solve_mult_local(ln_a.exp()).unwrap();
            let bp = BranchPoint::from_solution(&sol);
            let (lambda, kappa, m) = (bp.lambda.unwrap(), bp.kappa.unwrap(), bp.mass.unwrap());
            proptest::prop_assert!((kappa / (lambda * m) - 1.0).abs() < 1e-12);
            proptest::prop_assert!((bp.boundary_flux / kappa - 1.0).abs() < 1e-6);
            proptest::prop_assert!(sol.u.last().unwrap().abs() <= 1e-9 * sol.amplitude);
            proptest::prop_assert!(sol.is_decreasing());
            proptest::prop_assert!(sol.ode_residual() <= 1e-8 * (lambda * sol.amplitude.exp()).max(1.0));
        }

        #[test]
        fn lambda_below_nonexistence_bound(ln_a in -4.0f64..8.0, d in 3usize..5, p in 2.0f64..6.0) {
            let pi2 = std::f64::consts::PI.powi(2);
            for spec in [NonlinearitySpec::exponential(), NonlinearitySpec::shifted_power(p).unwrap()] {
                let s = RadialSolver::new(spec, d).unwrap();
                let geom = crate::geometry::DomainGeometry::ball(d, 1.0).unwrap();
                let bound = crate::criteria::nonexistence_lambda_bound(&spec, &geom).unwrap();
                if let Ok(l) = s.lambda_of(ln_a.exp()) {
                    proptest::prop_assert!(l < bound, "{spec} d={d}: {l} >= {bound} ({pi2})");
                }
            }
        }
    }
}
