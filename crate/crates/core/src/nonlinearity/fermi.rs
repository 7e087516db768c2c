//! Complete Fermi–Dirac integrals `f_δ(u) = ∫₀^∞ t^δ / (1 + e^{t−u}) dt`
//! and their `u`-derivatives, by composite Gauss–Legendre quadrature.
//!
//! The integrand's knee sits at `t = u`, so for `u > 8` the range is split there. Below
//! the knee the occupation `1/(1+e^{t−u})` is written as `1 − 1/(1+e^{u−t})`
//! and the `1` part integrated exactly, leaving an integrand that decays
//! exponentially away from `t = u` on both sides. Panels are 8 wide with 64
//! nodes. The upper tail is truncated once the bound
//! `∫_T^∞ t^δ e^{u−t} dt ≤ e^{u−T} T^δ / (1 − δ/T)` drops below `1e-14` of
//! the running total. A panel touching `t = 0` is integrated in the variable
//! `y` with `t = b y⁴`, which removes the `t^δ` endpoint singularity.

use crate::error::{Error, Result};
use crate::quadrature::gl_panel;

const PANEL_WIDTH: f64 = 8.0;
const KNEE_WINDOW: f64 = 40.0;
const TAIL_REL: f64 = 1e-14;
const MAX_PANELS: usize = 20_000;

/// Logistic pair `(1/(1+e^x), 1/(1+e^{−x}))`, each computed without cancellation.
#[inline]
fn occupations(x: f64) -> (f64, f64) {
    if x >= 0.0 {
        let e = (-x).exp();
        let s = 1.0 / (1.0 + e);
        (e * s, s)
    } else {
        let e = x.exp();
        let s = 1.0 / (1.0 + e);
        (s, e * s)
    }
}

/// `k`-th `u`-derivative of the occupation `1/(1+e^{t−u})` as a function of `x = t − u`.
#[inline]
fn kernel(order: u32, x: f64) -> f64 {
    let (occ, vac) = occupations(x);
    match order {
        0 => occ,
        1 => occ * vac,
        2 => occ * vac * (vac - occ),
        _ => unreachable!("kernel order > 2"),
    }
}

fn is_integer(delta: f64) -> bool {
    delta.fract() == 0.0
}

/// `∫_a^b t^δ g(t) dt` split into panels of width at most 8.
fn panels(delta: f64, a: f64, b: f64, g: &impl Fn(f64) -> f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let n = ((b - a) / PANEL_WIDTH).ceil().max(1.0) as usize;
    let w = (b - a) / n as f64;
    let mut sum = 0.0;
    for i in 0..n {
        let lo = a + i as f64 * w;
        let hi = if i + 1 == n { b } else { lo + w };
        sum += panel(delta, lo, hi, g);
    }
    sum
}

fn panel(delta: f64, lo: f64, hi: f64, g: &impl Fn(f64) -> f64) -> f64 {
    if lo == 0.0 && !is_integer(delta) {
        let b = hi;
        gl_panel(0.0, 1.0, |y| {
            let y2 = y * y;
            let t = b * y2 * y2;
            t.powf(delta) * g(t) * 4.0 * b * y2 * y
        })
    } else if is_integer(delta) {
        let k = delta as i32;
        gl_panel(lo, hi, |t| t.powi(k) * g(t))
    } else {
        gl_panel(lo, hi, |t| t.powf(delta) * g(t))
    }
}

/// `ln` of the tail bound `∫_T^∞ t^δ e^{u−t} dt`, or `+∞` when `T` is too small for it.
fn ln_tail_bound(delta: f64, u: f64, t: f64) -> f64 {
    if t <= 2.0 * delta || t <= 0.0 {
        return f64::INFINITY;
    }
    (u - t) + delta * t.ln() - (1.0 - delta / t).ln()
}

/// `∫_c^∞ t^δ K(t−u) dt` with adaptive truncation of the tail.
fn upper_range(delta: f64, order: u32, u: f64, c: f64, running: f64) -> Result<f64> {
    let g = |t: f64| kernel(order, t - u);
    let mut sum = 0.0;
    let mut lo = c;
    let min_end = c.max(u) + KNEE_WINDOW;
    for _ in 0..MAX_PANELS {
        let hi = lo + PANEL_WIDTH;
        sum += panel(delta, lo, hi, &g);
        lo = hi;
        if lo < min_end {
            continue;
        }
        let total = (running + sum).abs();
        let ln_bound = ln_tail_bound(delta, u, lo);
        let ln_target = if total > 0.0 { (TAIL_REL * total).ln() } else { -745.0 };
        if ln_bound < ln_target {
            return Ok(sum);
        }
    }
    Err(Error::NoConvergence(format!(
        "Fermi-Dirac tail did not converge (delta = {delta}, u = {u})"
    )))
}

fn kernel_integral(delta: f64, order: u32, u: f64) -> Result<f64> {
    // For small u the knee sits inside the first panel and the plain
    // integrand is smooth enough; splitting there would put a panel edge next
    // to the t^δ singularity.
    if u > PANEL_WIDTH {
        let lo = (u - KNEE_WINDOW).max(0.0);
        let below = if order == 0 {
            // 1/(1+e^{t-u}) - 1 = -1/(1+e^{u-t})
            let g = |t: f64| -occupations(t - u).1;
            u.powf(delta + 1.0) / (delta + 1.0) + panels(delta, lo, u, &g)
        } else {
            let g = |t: f64| kernel(order, t - u);
            panels(delta, lo, u, &g)
        };
        let above = upper_range(delta, order, u, u, below)?;
        Ok(below + above)
    } else {
        upper_range(delta, order, u, 0.0, 0.0)
    }
}

fn check_args(delta: f64, u: f64) -> Result<()> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::invalid(format!("Fermi-Dirac index must be >= 0, got {delta}")));
    }
    if !u.is_finite() {
        return Err(Error::invalid(format!("Fermi-Dirac argument must be finite, got {u}")));
    }
    Ok(())
}

/// `f_δ(u)` for `δ ≥ 0`.
pub fn fermi_dirac(delta: f64, u: f64) -> Result<f64> {
    check_args(delta, u)?;
    kernel_integral(delta, 0, u)
}

/// `d^k f_δ / du^k` for `k ≤ 2`.
///
/// Uses `f_δ′ = δ f_{δ−1}` while the lowered index stays non-negative and
/// integrates the differentiated occupation directly otherwise.
pub fn fermi_dirac_derivative(delta: f64, order: u32, u: f64) -> Result<f64> {
    check_args(delta, u)?;
    if order > 2 {
        return Err(Error::invalid("only derivatives up to order 2 are supported"));
    }
    if order == 0 {
        return kernel_integral(delta, 0, u);
    }
    if delta >= 1.0 {
        return Ok(delta * fermi_dirac_derivative(delta - 1.0, order - 1, u)?);
    }
    if delta == 0.0 && order >= 1 {
        // f_0 = ln(1+e^u): exact derivatives
        let (occ, vac) = occupations(-u);
        return Ok(match order {
            1 => occ,
            _ => occ * vac,
        });
    }
    kernel_integral(delta, order, u)
}
