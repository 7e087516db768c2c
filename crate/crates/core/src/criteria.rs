//! Threshold constants and the conditions they certify.
//!
//! Everything here is a floating-point estimate over documented grids: suprema
//! and infima over unbounded sets are geometric scans (512 points per decade)
//! refined by golden-section search, see [`crate::optimize`].

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::DomainGeometry;
use crate::nonlinearity::{fermi_dirac, fermi_dirac_derivative, Normalization, NonlinearitySpec};
use crate::optimize::{bisect, linear_grid, log_grid, scan_max, scan_max_log, scan_min_log, Extremum, POINTS_PER_DECADE};
use crate::quadrature::gl_panel;

/// Required gap between `η` and `(d−2)/(2d)`.
pub const SUPERCRITICAL_MARGIN: f64 = 1e-6;

/// Relative cancellation error above which `ℋ` switches to its integral form.
const H_CANCELLATION_LIMIT: f64 = 1e-6;

/// `(d−2)/(2d)`.
pub fn critical_ratio(d: usize) -> f64 {
    (d as f64 - 2.0) / (2.0 * d as f64)
}

/// `d + 2 + (d−2) ln((d−2)/(2d))`, the closed form of the sharp constant for `e^u`.
pub fn exp_sharp_constant(d: usize) -> f64 {
    let df = d as f64;
    df + 2.0 + (df - 2.0) * ((df - 2.0) / (2.0 * df)).ln()
}

fn nan_on_err(r: Result<f64>) -> f64 {
    r.unwrap_or(f64::NAN)
}

/// Rejects a supremum that is still climbing at the top of its scan range.
fn check_bounded(ext: &Extremum, hi: f64, f: impl Fn(f64) -> f64, what: &str) -> Result<()> {
    if ext.at_upper_edge {
        let rise = f(hi) - f(hi / 10.0);
        if rise > 1e-6 {
            return Err(Error::Unbounded(format!("{what} still increasing at {hi:e} (rise {rise:e})")));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EtaEstimate {
    pub eta: f64,
    pub supercritical: bool,
    /// `(d−2)/(2d)`
    pub threshold: f64,
    /// Grid point where the maximum was attained.
    pub argmax: f64,
}

/// Estimates `η = limsup F(u)/(u f(u))` (with `F(0) = 0`) as the maximum over
/// `u ∈ [10³, 10⁸]`.
pub fn estimate_eta(spec: &NonlinearitySpec, d: usize) -> Result<EtaEstimate> {
    estimate_eta_on(spec, d, 1e3, 1e8)
}

/// [`estimate_eta`] on an explicit range `[lo, hi]`.
pub fn estimate_eta_on(spec: &NonlinearitySpec, d: usize, lo: f64, hi: f64) -> Result<EtaEstimate> {
    if d < 3 {
        return Err(Error::invalid(format!("growth exponent needs d >= 3, got {d}")));
    }
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::invalid(format!("bad range [{lo}, {hi}]")));
    }
    let ext = scan_max_log(lo, hi, POINTS_PER_DECADE, |u| {
        nan_on_err(spec.primitive_over_uf(u, Normalization::AtZero))
    })?;
    let threshold = critical_ratio(d);
    Ok(EtaEstimate {
        eta: ext.value,
        supercritical: ext.value < threshold - SUPERCRITICAL_MARGIN,
        threshold,
        argmax: ext.x,
    })
}

/// `Λ = inf_{u>0} f(u)/u`.
pub fn lambda_inf_ratio(spec: &NonlinearitySpec) -> Result<f64> {
    let ext = scan_min_log(1e-8, 1e8, POINTS_PER_DECADE, |u| {
        nan_on_err(spec.ln_f(u).map(|l| (l - u.ln()).exp()))
    })?;
    if ext.at_lower_edge || !(ext.value > 0.0) {
        return Err(Error::CertificateFails(format!(
            "inf f(u)/u over u > 0 is not positive for {spec} (approaches {:e} as u -> 0)",
            ext.value
        )));
    }
    Ok(ext.value)
}

/// `λ₁/Λ`: no non-trivial non-negative solution exists above this `λ`.
pub fn nonexistence_lambda_bound(spec: &NonlinearitySpec, geom: &DomainGeometry) -> Result<f64> {
    Ok(geom.first_eigenvalue()? / lambda_inf_ratio(spec)?)
}

fn ln_ratio(spec: &NonlinearitySpec, s: f64) -> f64 {
    nan_on_err(spec.ln_f(s).map(|l| l - s.ln()))
}

/// Smallest `μ*` with `Λ(μ*) = inf_{s≥μ*} f(s)/s > λ₁`; the additive local
/// problem has no positive bounded solution for `μ > μ*`.
///
/// `f(s)/s` is unimodal on `s > 0` for convex `f ≥ 0`, so `Λ(μ)` is flat up to
/// the global minimizer and equals `f(μ)/μ` after it.
pub fn additive_nonexistence_mu(spec: &NonlinearitySpec, geom: &DomainGeometry) -> Result<f64> {
    let ln_l1 = geom.first_eigenvalue()?.ln();
    if !(ln_ratio(spec, 1e8) > ln_ratio(spec, 1e4) + 1.0) {
        return Err(Error::CertificateFails(format!("f(u)/u does not grow without bound for {spec}")));
    }
    let ext = scan_min_log(1e-8, 1e8, POINTS_PER_DECADE, |s| ln_ratio(spec, s))?;
    let s_min = if ext.at_lower_edge { 0.0 } else { ext.x };
    if !ext.at_lower_edge && ext.value > ln_l1 {
        return Ok(0.0);
    }
    let lo = if s_min > 0.0 { s_min } else { 1e-12 };
    let g = |mu: f64| ln_ratio(spec, mu) - ln_l1;
    let mut hi = lo.max(1.0) * 2.0;
    while !(g(hi) > 0.0) {
        hi *= 2.0;
        if hi > 1e3 {
            return Err(Error::NoConvergence(format!("no mu in ({lo}, 1e3] with Lambda(mu) > lambda_1")));
        }
    }
    bisect(g, lo, hi, 1e-13 * hi)
}

/// Smallest `C` with `2d F(u) ≤ (d−2) u f(u) + C f(u)` for all `u ≥ 0` (`F(0) = 0`).
pub fn compute_c_nonmul(spec: &NonlinearitySpec, d: usize) -> Result<f64> {
    if d < 3 {
        return Err(Error::invalid(format!("the constant C needs d >= 3, got {d}")));
    }
    let (df, hi) = (d as f64, 1e8);
    let obj = |u: f64| match spec.primitive_over_f_split(u, Normalization::AtZero) {
        Ok((k, rest)) => u * (2.0 * df / k - (df - 2.0)) + 2.0 * df * rest,
        Err(_) => f64::NAN,
    };
    let ext = scan_max_log(1e-8, hi, POINTS_PER_DECADE, obj)?;
    check_bounded(&ext, hi, obj, "2dF/f - (d-2)u")?;
    // u = 0 contributes 0
    Ok(ext.value.max(0.0))
}

/// `C |∂Ω| / α`: no bounded solution of the non-local multiplicative problem above this `κ`.
pub fn kappa_nonexistence_bound(spec: &NonlinearitySpec, geom: &DomainGeometry) -> Result<f64> {
    let c = compute_c_nonmul(spec, geom.dim())?;
    Ok(c * geom.surface() / geom.star_shape_alpha())
}

fn check_eta1(eta1: f64) -> Result<()> {
    if !(eta1 > 0.0 && eta1 < 0.5) {
        return Err(Error::invalid(format!("eta1 must lie in (0, 1/2), got {eta1}")));
    }
    Ok(())
}

/// `ℋ(v, μ, η₁)` defined by
/// `v²ℋ = F(v+μ) − F(μ) − f(μ)v − η₁ v [f(v+μ) − f(μ)]` with `F(μ̄) = 0`.
///
/// Where the direct formula loses more than `1e-6` to cancellation it is
/// replaced by the equivalent `ℋ = ∫₀¹ (1 − η₁ − x) f′(μ + v x) dx`.
pub fn script_h(spec: &NonlinearitySpec, v: f64, mu: f64, eta1: f64) -> Result<f64> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::invalid(format!("v must be positive, got {v}")));
    }
    check_eta1(eta1)?;
    let norm = Normalization::AtMuBar;
    let (fm, fz) = (spec.f(mu)?, spec.f(v + mu)?);
    let (big_fm, big_fz) = (spec.primitive(mu, norm)?, spec.primitive(v + mu, norm)?);
    let v2 = v * v;
    let num = big_fz - big_fm - fm * v - eta1 * v * (fz - fm);
    if !num.is_finite() {
        // overflow: rebuild from the scaled form
        let lf = spec.ln_f(v + mu)?;
        return Ok(scaled_h(spec, v, mu, eta1)? * (lf - 2.0 * v.ln()).exp());
    }
    let direct = num / v2;
    let noise = 4.0 * f64::EPSILON * (big_fz.abs() + big_fm.abs() + fm * v + eta1 * v * (fz + fm)) / v2;
    if noise <= H_CANCELLATION_LIMIT * direct.abs() {
        return Ok(direct);
    }
    let mut failure = None;
    let val = gl_panel(0.0, 1.0, |x| match spec.fprime(mu + v * x) {
        Ok(fp) => (1.0 - eta1 - x) * fp,
        Err(e) => {
            failure = Some(e);
            0.0
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(val),
    }
}

/// `v²ℋ(v, μ, η₁) / f(v+μ)`, finite for all `v` and with the sign of `ℋ`.
pub fn scaled_h(spec: &NonlinearitySpec, v: f64, mu: f64, eta1: f64) -> Result<f64> {
    let norm = Normalization::AtMuBar;
    let r = (spec.ln_f(mu)? - spec.ln_f(v + mu)?).exp();
    let pz = spec.primitive_over_f(v + mu, norm)?;
    let pm = spec.primitive_over_f(mu, norm)?;
    Ok(pz - r * (pm + v) - eta1 * v * (1.0 - r))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HEstimate {
    /// `H(μ, η₁) = sup_{v>0} ℋ(v, μ, η₁)`
    pub h: f64,
    pub argmax: f64,
    /// `ℋ < 0` on the scanned grid beyond this point.
    pub v_cut: f64,
}

/// `H(μ, η₁) = sup_{v>0} ℋ(v, μ, η₁)`.
pub fn compute_h(spec: &NonlinearitySpec, mu: f64, eta1: f64) -> Result<HEstimate> {
    check_eta1(eta1)?;
    spec.f(mu)?;
    let grid = log_grid(1e-6, 1e8, POINTS_PER_DECADE);
    let mut last_nonneg = None;
    for (i, &v) in grid.iter().enumerate() {
        let s = scaled_h(spec, v, mu, eta1)?;
        if !(s < 0.0) {
            last_nonneg = Some(i);
        }
    }
    let v_cut = match last_nonneg {
        Some(i) if i + 1 == grid.len() => {
            return Err(Error::CertificateFails(format!(
                "H(v, {mu}, {eta1}) is not negative for large v (eta1 too close to eta?)"
            )))
        }
        Some(i) => grid[i + 1],
        None => grid[0],
    };
    if v_cut <= grid[0] {
        return Ok(HEstimate { h: script_h(spec, grid[0], mu, eta1)?, argmax: grid[0], v_cut });
    }
    let ext = scan_max_log(grid[0], v_cut, POINTS_PER_DECADE, |v| nan_on_err(script_h(spec, v, mu, eta1)))?;
    Ok(HEstimate { h: ext.value, argmax: ext.x, v_cut })
}

/// Residuals of the two candidate scalings
/// `ℋ(v, μ, η₁) = (1+μ)^k ℋ(v/(1+μ), 0, η₁)` for `f = (1+u)^p`, `k ∈ {p+1, p−1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerScalingCheck {
    pub residual_p_plus_1: f64,
    pub residual_p_minus_1: f64,
}

impl PowerScalingCheck {
    /// The exponent whose relative residual is below `tol`, if exactly one is.
    pub fn holding_exponent(&self, p: f64, tol: f64) -> Option<f64> {
        match (self.residual_p_plus_1 < tol, self.residual_p_minus_1 < tol) {
            (true, false) => Some(p + 1.0),
            (false, true) => Some(p - 1.0),
            _ => None,
        }
    }
}

pub fn power_scaling_check(p: f64, v: f64, mu: f64, eta1: f64) -> Result<PowerScalingCheck> {
    let spec = NonlinearitySpec::shifted_power(p)?;
    let lhs = script_h(&spec, v, mu, eta1)?;
    let base = script_h(&spec, v / (1.0 + mu), 0.0, eta1)?;
    let rel = |k: f64| ((1.0 + mu).powf(k) * base - lhs).abs() / lhs.abs();
    Ok(PowerScalingCheck { residual_p_plus_1: rel(p + 1.0), residual_p_minus_1: rel(p - 1.0) })
}

/// Options for [`uniqueness_lambda0`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lambda0Options {
    /// Defaults to the midpoint of `(η, (d−2)/(2d))`.
    pub eta1: Option<f64>,
    /// Upper end `m` of the `μ`-range `[0, m]` over which `H(μ, η₁)` is maximized.
    pub mu_max: f64,
    /// Maximize `λ₀` over a 32-point `η₁` grid instead of using one `η₁`.
    pub optimize_eta1: bool,
}

impl Default for Lambda0Options {
    fn default() -> Self {
        Lambda0Options { eta1: None, mu_max: 1.0, optimize_eta1: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lambda0Report {
    /// `+∞` when `H ≤ 0` (uniqueness unconditional in the scanned range).
    pub lambda0: f64,
    pub eta: f64,
    pub eta1: f64,
    /// `max_{μ∈[0,m]} H(μ, η₁)`
    pub h: f64,
    pub mu_max: f64,
    pub notes: Vec<String>,
}

fn sup_h_over_mu(spec: &NonlinearitySpec, eta1: f64, mu_max: f64) -> Result<f64> {
    let lo = if spec.mu_bar() >= 0.0 { spec.mu_bar() + 1e-6 * mu_max.max(1e-6) } else { 0.0 };
    if mu_max <= lo {
        return Ok(compute_h(spec, lo.max(mu_max), eta1)?.h);
    }
    let grid = linear_grid(lo, mu_max, 16);
    let mut err = None;
    let ext = scan_max(
        &grid,
        |mu| match compute_h(spec, mu, eta1) {
            Ok(h) => h.h,
            Err(e) => {
                err.get_or_insert(e);
                f64::NAN
            }
        },
        |x| x,
        |x| x,
    );
    if let Some(e) = err {
        return Err(e);
    }
    Ok(ext?.value)
}

/// Uniqueness threshold `λ₀ = ((d−2)/(2d) − η₁) / (C_P H)` below which the
/// multiplicative local problem has at most one solution.
///
/// `H` is `max_{μ∈[0,m]} H(μ, η₁)`, the value `μ` standing in for the frozen
/// minimal solution; the `ε`-dependent correction of the uniform bound is
/// neglected (`ε = 0`).
pub fn uniqueness_lambda0(spec: &NonlinearitySpec, geom: &DomainGeometry, opts: Lambda0Options) -> Result<Lambda0Report> {
    let d = geom.dim();
    let c = critical_ratio(d);
    let eta = estimate_eta(spec, d)?;
    if !eta.supercritical {
        return Err(Error::CertificateFails(format!(
            "growth is not supercritical: eta = {} vs (d-2)/(2d) = {c}",
            eta.eta
        )));
    }
    if !(opts.mu_max >= 0.0) {
        return Err(Error::invalid("mu_max must be >= 0"));
    }
    let cp = geom.poincare_constant()?;
    let one = |eta1: f64| -> Result<(f64, f64)> {
        let h = sup_h_over_mu(spec, eta1, opts.mu_max)?;
        let lambda0 = if h > 0.0 { (c - eta1) / (cp * h) } else { f64::INFINITY };
        Ok((lambda0, h))
    };
    let mut notes = vec!["epsilon-dependent part of the uniform bound neglected (epsilon = 0)".to_string()];
    let (eta1, (lambda0, h)) = if opts.optimize_eta1 {
        let mut best: Option<(f64, (f64, f64))> = None;
        for i in 1..=32 {
            let e1 = eta.eta + (c - eta.eta) * i as f64 / 33.0;
            let r = one(e1)?;
            if best.is_none_or(|(_, (l, _))| r.0 > l) {
                best = Some((e1, r));
            }
        }
        notes.push("eta1 chosen to maximize lambda0 over 32 grid values".into());
        best.expect("non-empty grid")
    } else {
        let e1 = opts.eta1.unwrap_or(0.5 * (eta.eta + c));
        if !(e1 > eta.eta && e1 < c) {
            return Err(Error::invalid(format!(
                "eta1 = {e1} outside the admissible interval ({}, {c})",
                eta.eta
            )));
        }
        (e1, one(e1)?)
    };
    if lambda0.is_infinite() {
        notes.push("H <= 0: uniqueness unconditional in scanned range".into());
    }
    Ok(Lambda0Report { lambda0, eta: eta.eta, eta1, h, mu_max: opts.mu_max, notes })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CdtReport {
    /// `C_P H(μ, η₁)`; absent when `H` could not be computed.
    pub lhs: Option<f64>,
    /// `(d−2)/(2d) − η₁`
    pub rhs: f64,
    pub holds: bool,
}

/// Tests `C_P H(μ, η₁) < (d−2)/(2d) − η₁`.
pub fn check_cdt_addloc(spec: &NonlinearitySpec, geom: &DomainGeometry, mu: f64, eta1: f64) -> Result<CdtReport> {
    let rhs = critical_ratio(geom.dim()) - eta1;
    let cp = geom.poincare_constant()?;
    match compute_h(spec, mu, eta1) {
        Ok(h) => {
            let lhs = cp * h.h;
            Ok(CdtReport { lhs: Some(lhs), rhs, holds: lhs < rhs })
        }
        Err(e) if e.is_certificate_failure() && rhs <= 0.0 => Ok(CdtReport { lhs: None, rhs, holds: false }),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GEstimate {
    pub g: f64,
    /// Maximizing `z` (`+∞` side of the grid when the supremum is a limit).
    pub argmax_z: f64,
}

/// `G(μ) = sup_{z>μ} [2d(F(z) − F(μ)) − (d−2) f(z)(z − μ)] / f(z)` with `F(μ̄) = 0`.
pub fn compute_g(spec: &NonlinearitySpec, mu: f64, d: usize) -> Result<GEstimate> {
    if !(d >= 3 || (d == 2 && spec.is_exponential())) {
        return Err(Error::invalid(format!("G is defined for d >= 3 (or d = 2 with e^u); got d = {d}")));
    }
    let df = d as f64;
    let norm = Normalization::AtMuBar;
    let pm = spec.primitive_over_f(mu, norm)?;
    let lfm = spec.ln_f(mu)?;
    let obj = |y: f64| {
        let z = mu + y;
        let r = spec.ln_f(z).map(|lz| (lfm - lz).exp());
        let pz = spec.primitive_over_f(z, norm);
        match (r, pz) {
            (Ok(r), Ok(pz)) => 2.0 * df * (pz - pm * r) - (df - 2.0) * y,
            _ => f64::NAN,
        }
    };
    let scale = if spec.mu_bar().is_finite() { mu - spec.mu_bar() } else { 1.0 };
    let (lo, hi) = (1e-8 * scale, 1e8 * scale);
    let ext = scan_max_log(lo, hi, POINTS_PER_DECADE, obj)?;
    check_bounded(&ext, hi, obj, "G objective")?;
    if ext.value <= 0.0 {
        return Ok(GEstimate { g: 0.0, argmax_z: mu });
    }
    Ok(GEstimate { g: ext.value, argmax_z: mu + ext.x })
}

/// `f⁻¹(t) = sup{s : f(s) ≤ t}`, to `1e-12` relative in `s`.
pub fn generalized_inverse(spec: &NonlinearitySpec, t: f64) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::invalid(format!("t = {t} is not in the range of f (needs t > 0)")));
    }
    let lt = t.ln();
    let g = |s: f64| nan_on_err(spec.ln_f(s)) - lt;
    let bar = spec.mu_bar();
    let mut lo = if bar.is_finite() { bar + 1.0 } else { 0.0 };
    let mut width = 1.0;
    while !(g(lo) <= 0.0) {
        lo = if bar.is_finite() { bar + 0.5 * (lo - bar) } else { lo - width };
        width *= 2.0;
        if (bar.is_finite() && lo - bar < 1e-300) || lo < -1e300 {
            return Err(Error::invalid(format!("t = {t} below the range of f")));
        }
    }
    let mut hi = lo + 1.0;
    let mut width = 1.0;
    while !(g(hi) > 0.0) {
        width *= 2.0;
        hi = lo + width;
        if hi > 1e300 {
            return Err(Error::NoConvergence(format!("f never exceeds {t}")));
        }
    }
    bisect(g, lo, hi, 1e-12 * hi.abs().max(lo.abs()).max(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MassCheck {
    pub mass: f64,
    /// `f⁻¹(M/|Ω|)`
    pub mu_bound: f64,
    /// `G(f⁻¹(M/|Ω|))`
    pub g: f64,
    /// `|∂Ω|/α · G(f⁻¹(M/|Ω|))`
    pub rhs: f64,
    pub holds: bool,
}

/// Checks `G` is non-decreasing on `n + 1` points of `[lo, hi]` (relative slack `1e-9`).
pub fn g_non_decreasing(spec: &NonlinearitySpec, d: usize, lo: f64, hi: f64, n: usize) -> Result<bool> {
    let mut prev: Option<f64> = None;
    for mu in linear_grid(lo, hi, n) {
        let g = compute_g(spec, mu, d)?.g;
        if let Some(p) = prev {
            if g < p - 1e-9 * p.abs().max(1.0) {
                return Ok(false);
            }
        }
        prev = Some(g);
    }
    Ok(true)
}

/// `M > |∂Ω|/α · (G∘f⁻¹)(M/|Ω|)`: when true the non-local additive problem
/// with mass `M` has no bounded solution.
pub fn mass_nonexistence_check(spec: &NonlinearitySpec, geom: &DomainGeometry, mass: f64) -> Result<MassCheck> {
    if !(mass > 0.0) {
        return Err(Error::invalid(format!("mass must be positive, got {mass}")));
    }
    let d = geom.dim();
    let mu_bound = generalized_inverse(spec, mass / geom.volume())?;
    let bar = spec.mu_bar();
    let lo = if bar.is_finite() { bar + 0.125 * (mu_bound - bar) } else { mu_bound - 8.0 };
    if !g_non_decreasing(spec, d, lo, mu_bound, 8)? {
        return Err(Error::CertificateFails(format!("G is not non-decreasing on [{lo}, {mu_bound}]")));
    }
    let g = compute_g(spec, mu_bound, d)?.g;
    let rhs = geom.surface() / geom.star_shape_alpha() * g;
    Ok(MassCheck { mass, mu_bound, g, rhs, holds: mass > rhs })
}

fn fermi_dimension_ok(d: usize) -> Result<()> {
    if (d as f64) <= 2.0 * (1.0 + 2f64.sqrt()) {
        return Err(Error::CertificateFails(format!("requires d > 2(1+sqrt 2) ~ 4.83, got d = {d}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GdEstimate {
    pub g_d: f64,
    pub argmax_z: f64,
    /// Upper end of the scanned range; the integrand is negative beyond it.
    pub z_max: f64,
}

/// `G_d = sup_z [4 f_{d/2}(z) − (d−2) z f_{d/2−1}(z)]`.
pub fn fermi_g_d(d: usize) -> Result<GdEstimate> {
    fermi_dimension_ok(d)?;
    let df = d as f64;
    let obj = |z: f64| -> f64 {
        let a = fermi_dirac(0.5 * df, z);
        let b = fermi_dirac(0.5 * df - 1.0, z);
        match (a, b) {
            (Ok(a), Ok(b)) => 4.0 * a - (df - 2.0) * z * b,
            _ => f64::NAN,
        }
    };
    // leading coefficient 8/(d+2) − 2(d−2)/d is negative here; find where it wins
    let mut z_max = 1.0;
    while !(obj(z_max) < 0.0 && obj(2.0 * z_max) < 0.0) {
        z_max *= 2.0;
        if z_max > 1e8 {
            return Err(Error::NoConvergence(format!("no sign change of the G_d integrand for d = {d}")));
        }
    }
    z_max *= 2.0;
    let grid = linear_grid(-50.0, z_max, 4096);
    let ext = scan_max(&grid, obj, |x| x, |x| x)?;
    Ok(GdEstimate { g_d: ext.value, argmax_z: ext.x, z_max })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FermiMassCheck {
    /// `α M²`
    pub lhs: f64,
    /// `|∂Ω| [G_d |Ω| + (d−2) M f⁻¹(M/|Ω|)]`
    pub rhs: f64,
    pub g_d: f64,
    pub holds: bool,
}

/// `α M² > |∂Ω| [G_d |Ω| + (d−2) M f⁻¹(M/|Ω|)]` for `f = f_{d/2−1}`; true means no
/// bounded solution with mass `M`.
pub fn fermi_mass_check(d: usize, geom: &DomainGeometry, mass: f64) -> Result<FermiMassCheck> {
    if geom.dim() != d {
        return Err(Error::invalid(format!("domain dimension {} differs from d = {d}", geom.dim())));
    }
    if !(mass > 0.0) {
        return Err(Error::invalid(format!("mass must be positive, got {mass}")));
    }
    let g_d = fermi_g_d(d)?.g_d;
    let spec = NonlinearitySpec::fermi(0.5 * d as f64 - 1.0)?;
    let vol = geom.volume();
    let inv = generalized_inverse(&spec, mass / vol)?;
    let lhs = geom.star_shape_alpha() * mass * mass;
    let rhs = geom.surface() * (g_d * vol + (d as f64 - 2.0) * mass * inv);
    Ok(FermiMassCheck { lhs, rhs, g_d, holds: lhs > rhs })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sc2Estimate {
    pub eta: f64,
    pub threshold: f64,
    pub holds: bool,
}

/// `η = limsup f′/(u f″ + 2 f′)` for `f = f_{d/2−1}`, as the maximum over `u ∈ [10², 10⁵]`.
pub fn check_sc2(d: usize) -> Result<Sc2Estimate> {
    if d < 3 {
        return Err(Error::invalid(format!("needs d >= 3, got {d}")));
    }
    let delta = 0.5 * d as f64 - 1.0;
    let ext = scan_max_log(1e2, 1e5, POINTS_PER_DECADE, |u| {
        let fp = fermi_dirac_derivative(delta, 1, u);
        let fpp = fermi_dirac_derivative(delta, 2, u);
        match (fp, fpp) {
            (Ok(a), Ok(b)) => a / (u * b + 2.0 * a),
            _ => f64::NAN,
        }
    })?;
    let threshold = critical_ratio(d);
    Ok(Sc2Estimate { eta: ext.value, threshold, holds: ext.value < threshold })
}

/// Inputs of [`threshold_report`] beyond the nonlinearity and domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportOptions {
    /// Shift at which `H` and `G` are evaluated (default 0, or `μ̄ + 1` when 0 is outside the domain).
    pub mu: Option<f64>,
    pub eta1: Option<f64>,
    pub mass: Option<f64>,
    pub mu_max: f64,
    pub optimize_eta1: bool,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions { mu: None, eta1: None, mass: None, mu_max: 1.0, optimize_eta1: false }
    }
}

/// Every computable constant for one nonlinearity and domain. Fields whose
/// hypotheses fail are `null`, with the reason in `notes`.
#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdReport {
    pub d: usize,
    pub geometry: String,
    pub nonlinearity: String,
    pub mu: f64,
    pub mass: Option<f64>,
    pub critical_ratio: f64,
    pub eta: Option<f64>,
    pub supercritical: bool,
    pub eta1: Option<f64>,
    pub Lambda: Option<f64>,
    pub lambda_nonexistence: Option<f64>,
    pub C_nonmul: Option<f64>,
    pub kappa_bound: Option<f64>,
    pub H_mu_eta1: Option<f64>,
    pub cdt_addloc_holds: Option<bool>,
    pub lambda0: Option<f64>,
    pub G_mu: Option<f64>,
    pub mass_bound_holds: Option<bool>,
    pub notes: Vec<String>,
}

fn keep<T>(r: Result<T>, field: &str, notes: &mut Vec<String>) -> Option<T> {
    match r {
        Ok(v) => Some(v),
        Err(e) => {
            notes.push(format!("{field}: {e}"));
            None
        }
    }
}

pub fn threshold_report(spec: &NonlinearitySpec, geom: &DomainGeometry, opts: ReportOptions) -> ThresholdReport {
    let d = geom.dim();
    let mut notes = Vec::new();
    let mu = opts.mu.unwrap_or(if spec.mu_bar() >= 0.0 { spec.mu_bar() + 1.0 } else { 0.0 });
    let eta = if d >= 3 { keep(estimate_eta(spec, d), "eta", &mut notes) } else { None };
    let supercritical = eta.is_some_and(|e| e.supercritical);
    let lambda = keep(lambda_inf_ratio(spec), "Lambda", &mut notes);
    let lambda_nonexistence = lambda.and_then(|l| keep(geom.first_eigenvalue().map(|l1| l1 / l), "lambda_nonexistence", &mut notes));
    let c_nonmul = if d >= 3 { keep(compute_c_nonmul(spec, d), "C_nonmul", &mut notes) } else { None };
    let kappa_bound = c_nonmul.map(|c| c * geom.surface() / geom.star_shape_alpha());

    let mut eta1 = None;
    let mut h = None;
    let mut cdt = None;
    let mut lambda0 = None;
    if supercritical {
        let l0 = keep(
            uniqueness_lambda0(spec, geom, Lambda0Options { eta1: opts.eta1, mu_max: opts.mu_max, optimize_eta1: opts.optimize_eta1 }),
            "lambda0",
            &mut notes,
        );
        if let Some(r) = &l0 {
            lambda0 = Some(r.lambda0);
            eta1 = Some(r.eta1);
            notes.extend(r.notes.iter().cloned());
        } else {
            eta1 = opts.eta1;
        }
        if let Some(e1) = eta1 {
            h = keep(compute_h(spec, mu, e1).map(|h| h.h), "H_mu_eta1", &mut notes);
            cdt = keep(check_cdt_addloc(spec, geom, mu, e1).map(|c| c.holds), "cdt_addloc", &mut notes);
        }
    } else if d >= 3 {
        notes.push("eta1, H, lambda0: growth not certified supercritical".into());
    }
    let g_mu = if d >= 3 || spec.is_exponential() { keep(compute_g(spec, mu, d).map(|g| g.g), "G_mu", &mut notes) } else { None };
    let mass_bound_holds = opts
        .mass
        .and_then(|m| keep(mass_nonexistence_check(spec, geom, m).map(|c| c.holds), "mass_bound_holds", &mut notes));

    ThresholdReport {
        d,
        geometry: geom.id(),
        nonlinearity: spec.id(),
        mu,
        mass: opts.mass,
        critical_ratio: critical_ratio(d),
        eta: eta.map(|e| e.eta),
        supercritical,
        eta1,
        Lambda: lambda,
        lambda_nonexistence,
        C_nonmul: c_nonmul,
        kappa_bound,
        H_mu_eta1: h,
        cdt_addloc_holds: cdt,
        lambda0,
        G_mu: g_mu,
        mass_bound_holds,
        notes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, PI};

    fn exp() -> NonlinearitySpec {
        NonlinearitySpec::exponential()
    }

    fn ball(d: usize) -> DomainGeometry {
        DomainGeometry::ball(d, 1.0).unwrap()
    }

    #[test]
    fn eta_examples() {
        let e = estimate_eta(&exp(), 3).unwrap();
        assert!(e.eta < 1e-2 && e.supercritical);
        let p5 = estimate_eta(&NonlinearitySpec::shifted_power(5.0).unwrap(), 3).unwrap();
        assert!(!p5.supercritical);
        assert!((p5.eta - 1.0 / 6.0).abs() < 1e-3);
        let p6 = estimate_eta(&NonlinearitySpec::shifted_power(6.0).unwrap(), 3).unwrap();
        assert!(p6.supercritical);
        assert!((p6.eta - 1.0 / 7.0).abs() < 1e-3);
        let fd = estimate_eta(&NonlinearitySpec::fermi(2.0).unwrap(), 6).unwrap();
        assert!(fd.supercritical);
        assert!((fd.eta - 0.25).abs() < 1e-3, "{}", fd.eta);
        // critical pure power fails by the margin rule
        assert!(!estimate_eta(&NonlinearitySpec::pure_power(5.0).unwrap(), 3).unwrap().supercritical);
        assert!(estimate_eta(&exp(), 2).is_err());
    }

    #[test]
    fn eta_converges_as_the_range_moves_out() {
        let spec = NonlinearitySpec::shifted_power(6.0).unwrap();
        let mut prev = f64::INFINITY;
        for lo in [1e2, 1e3, 1e4, 1e5, 1e6] {
            let e = estimate_eta_on(&spec, 3, lo, 1e8).unwrap().eta;
            assert!(e <= prev + 1e-3);
            prev = e;
        }
        assert!((prev - 1.0 / 7.0).abs() < 1e-5);
    }

    #[test]
    fn inf_ratio_examples() {
        assert!((lambda_inf_ratio(&exp()).unwrap() - E).abs() < 1e-10);
        let sp = NonlinearitySpec::shifted_power(5.0).unwrap();
        assert!((lambda_inf_ratio(&sp).unwrap() - 1.25f64.powi(5) / 0.25).abs() < 1e-8);
        let pp = NonlinearitySpec::pure_power(5.0).unwrap();
        assert!(lambda_inf_ratio(&pp).unwrap_err().is_certificate_failure());
        let b = nonexistence_lambda_bound(&exp(), &ball(3)).unwrap();
        assert!((b - PI * PI / E).abs() < 1e-8);
    }

    #[test]
    fn additive_threshold_examples() {
        // e^μ/μ = π² by Newton in ln form, μ − ln μ = 2 ln π
        let mut mu: f64 = 3.0;
        for _ in 0..50 {
            mu -= (mu - mu.ln() - 2.0 * PI.ln()) / (1.0 - 1.0 / mu);
        }
        let got = additive_nonexistence_mu(&exp(), &ball(3)).unwrap();
        assert!((got - mu).abs() < 1e-9, "{got} vs {mu}");
        let pp = NonlinearitySpec::pure_power(5.0).unwrap();
        let got = additive_nonexistence_mu(&pp, &ball(3)).unwrap();
        assert!((got - PI.sqrt()).abs() < 1e-9);
        let fd = NonlinearitySpec::fermi(2.0).unwrap();
        let got = additive_nonexistence_mu(&fd, &ball(6)).unwrap();
        assert!(got.is_finite());
    }

    #[test]
    fn sharp_exponential_constant() {
        for d in 3..=10 {
            let c = compute_c_nonmul(&exp(), d).unwrap();
            assert!((c - exp_sharp_constant(d)).abs() < 1e-6, "d={d}");
        }
        assert!((exp_sharp_constant(3) - (5.0 - 6f64.ln())).abs() < 1e-15);
        let pp = NonlinearitySpec::pure_power(5.0).unwrap();
        assert!(compute_c_nonmul(&pp, 3).unwrap().abs() < 1e-8);
        let sp = NonlinearitySpec::shifted_power(5.0).unwrap();
        let c = compute_c_nonmul(&sp, 3).unwrap();
        assert!(c <= 1.0 + 1e-12 && c > 0.999, "{c}");
    }

    #[test]
    fn kappa_bounds() {
        let k = kappa_nonexistence_bound(&exp(), &ball(3)).unwrap();
        assert!((k - (5.0 - 6f64.ln()) * 4.0 * PI).abs() < 1e-5);
        let cube = DomainGeometry::cuboid(vec![1.0; 3]).unwrap();
        let k = kappa_nonexistence_bound(&exp(), &cube).unwrap();
        assert!((k - (5.0 - 6f64.ln()) * 24.0).abs() < 1e-5);
    }

    #[test]
    fn script_h_limits_and_homogeneity() {
        let eta1 = 0.1;
        let h = script_h(&exp(), 1e-6, 0.0, eta1).unwrap();
        assert!((h - 0.4).abs() < 1e-6);
        let sp = NonlinearitySpec::shifted_power(5.0).unwrap();
        assert!((script_h(&sp, 1e-6, 0.0, eta1).unwrap() - 2.0).abs() < 1e-5);
        let ratio = script_h(&exp(), 1.0, -2.0, eta1).unwrap() / script_h(&exp(), 1.0, 0.0, eta1).unwrap();
        assert!((ratio / (-2f64).exp() - 1.0).abs() < 1e-12);
        // direct closed form at a moderate v
        let v: f64 = 2.0;
        let closed = ((v.exp() - 1.0 - v) - eta1 * v * (v.exp() - 1.0)) / (v * v);
        assert!((script_h(&exp(), v, 0.0, eta1).unwrap() - closed).abs() < 1e-13);
    }

    #[test]
    fn script_h_is_continuous_across_the_switch() {
        let sp = NonlinearitySpec::fermi(2.0).unwrap();
        let vals: Vec<f64> = log_grid(1e-7, 1e-1, 64).iter().map(|&v| script_h(&sp, v, 0.3, 0.2).unwrap()).collect();
        for w in vals.windows(2) {
            assert!((w[1] - w[0]).abs() < 1e-3 * w[0].abs());
        }
    }

    #[test]
    fn h_examples() {
        let h0 = compute_h(&exp(), 0.0, 0.1).unwrap();
        assert!(h0.h >= 0.4 && h0.h <= 0.1 * 7f64.exp() / 2.0);
        let h5 = compute_h(&exp(), -5.0, 0.1).unwrap();
        assert!((h5.h / ((-5f64).exp() * h0.h) - 1.0).abs() < 1e-8);
        let fd = NonlinearitySpec::fermi(2.0).unwrap();
        let a = compute_h(&fd, -20.0, 0.3).unwrap().h;
        let b = compute_h(&fd, -10.0, 0.3).unwrap().h;
        assert!(a < b && a > 0.0);
    }

    #[test]
    fn power_law_scaling_exponent_is_p_minus_one() {
        for (v, mu) in [(0.5, 1.0), (3.0, 0.5), (10.0, 2.0)] {
            let chk = power_scaling_check(5.0, v, mu, 0.1).unwrap();
            assert_eq!(chk.holding_exponent(5.0, 1e-10), Some(4.0), "{chk:?}");
        }
    }

    #[test]
    fn lambda0_examples() {
        let opts = Lambda0Options { eta1: Some(1.0 / 12.0), ..Default::default() };
        let r1 = uniqueness_lambda0(&exp(), &ball(3), opts).unwrap();
        let h = compute_h(&exp(), 1.0, 1.0 / 12.0).unwrap().h;
        let expect = (1.0 / 6.0 - 1.0 / 12.0) * PI * PI / h;
        assert!((r1.lambda0 / expect - 1.0).abs() < 1e-10);
        let r2 = uniqueness_lambda0(&exp(), &DomainGeometry::ball(3, 2.0).unwrap(), opts).unwrap();
        assert!((r2.lambda0 * 4.0 / r1.lambda0 - 1.0).abs() < 1e-10);
        let bad = Lambda0Options { eta1: Some(1.0 / 6.0), ..Default::default() };
        assert!(uniqueness_lambda0(&exp(), &ball(3), bad).is_err());
        let best = uniqueness_lambda0(&exp(), &ball(3), Lambda0Options { optimize_eta1: true, ..Default::default() }).unwrap();
        assert!(best.lambda0 >= r1.lambda0);
    }

    #[test]
    fn cdt_addloc_examples() {
        assert!(check_cdt_addloc(&exp(), &ball(3), -10.0, 0.1).unwrap().holds);
        assert!(!check_cdt_addloc(&exp(), &ball(3), 5.0, 0.1).unwrap().holds);
        assert!(!check_cdt_addloc(&exp(), &ball(3), 0.0, 1.0 / 6.0).unwrap().holds);
    }

    #[test]
    fn g_examples() {
        let c3 = 5.0 - 6f64.ln();
        for mu in [-5.0, 0.0, 5.0] {
            assert!((compute_g(&exp(), mu, 3).unwrap().g - c3).abs() < 1e-8);
            assert!((compute_g(&exp(), mu, 2).unwrap().g - 4.0).abs() < 1e-8);
        }
        let pp = NonlinearitySpec::pure_power(5.0).unwrap();
        let g1 = compute_g(&pp, 1.0, 3).unwrap().g;
        for mu in [0.5, 2.0, 4.0] {
            assert!((compute_g(&pp, mu, 3).unwrap().g / (mu * g1) - 1.0).abs() < 1e-6);
        }
        assert!(compute_g(&NonlinearitySpec::shifted_power(5.0).unwrap(), 0.0, 2).is_err());
    }

    #[test]
    fn generalized_inverse_examples() {
        assert!(generalized_inverse(&exp(), 1.0).unwrap().abs() < 1e-12);
        let pp = NonlinearitySpec::pure_power(5.0).unwrap();
        assert!((generalized_inverse(&pp, 32.0).unwrap() - 2.0).abs() < 1e-10);
        let f0 = NonlinearitySpec::fermi(0.0).unwrap();
        assert!(generalized_inverse(&f0, 2f64.ln()).unwrap().abs() < 1e-10);
        assert!(generalized_inverse(&pp, 0.0).is_err());
        for t in [1e-3, 0.7, 5.0, 1e4] {
            let s = generalized_inverse(&f0, t).unwrap();
            assert!((f0.f(s).unwrap() / t - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn mass_check_examples() {
        assert!(mass_nonexistence_check(&exp(), &ball(3), 50.0).unwrap().holds);
        assert!(!mass_nonexistence_check(&exp(), &ball(3), 30.0).unwrap().holds);
    }

    #[test]
    fn fermi_constants() {
        for d in [6, 10] {
            let g = fermi_g_d(d).unwrap();
            assert!(g.g_d.is_finite() && g.g_d > 0.0 && g.argmax_z.is_finite());
        }
        assert!(fermi_g_d(4).unwrap_err().is_certificate_failure());
        assert!(fermi_mass_check(6, &ball(6), 1e6).unwrap().holds);
        assert!(!fermi_mass_check(6, &ball(6), 1e-8).unwrap().holds);
        let cube = DomainGeometry::cuboid(vec![1.0; 6]).unwrap();
        assert!(fermi_mass_check(6, &cube, 1e6).unwrap().holds);
    }

    #[test]
    fn sc2_examples() {
        let s = check_sc2(6).unwrap();
        assert!(s.holds && (s.eta - 0.25).abs() < 1e-3);
        let s = check_sc2(12).unwrap();
        assert!(s.holds && (s.eta - 1.0 / 7.0).abs() < 1e-3);
        let s = check_sc2(4).unwrap();
        assert!(!s.holds && (s.eta - 1.0 / 3.0).abs() < 1e-3);
    }

    #[test]
    fn report_for_exponential_ball() {
        let r = threshold_report(&exp(), &ball(3), ReportOptions::default());
        assert!(r.supercritical);
        assert!((r.C_nonmul.unwrap() - 3.20824).abs() < 1e-5);
        assert!((r.kappa_bound.unwrap() - 40.32).abs() < 1e-2);
        assert!(r.lambda0.unwrap() > 0.0);
        let json = serde_json::to_value(&r).unwrap();
        for k in ["eta", "eta1", "Lambda", "C_nonmul", "H_mu_eta1", "lambda0", "kappa_bound", "G_mu", "mass_bound_holds"] {
            assert!(json.get(k).is_some(), "{k}");
        }
    }
}
