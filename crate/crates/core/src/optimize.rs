//! One-dimensional scans, golden-section refinement and bisection.
//!
//! Suprema over unbounded sets are taken in two stages: a geometric grid scan
//! followed by golden-section refinement inside the best grid cell's
//! neighbourhood. The objectives handled here are smooth and unimodal beyond
//! some point, and the scan protects against locking onto a local optimum.

use crate::error::{Error, Result};

/// Default density of geometric grids.
pub const POINTS_PER_DECADE: usize = 512;

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Geometric grid from `lo` to `hi` (inclusive) with `per_decade` points per decade.
pub fn log_grid(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && per_decade > 0);
    let decades = (hi / lo).log10();
    let n = ((decades * per_decade as f64).ceil() as usize).max(1);
    let (llo, lhi) = (lo.ln(), hi.ln());
    (0..=n)
        .map(|i| {
            if i == 0 {
                lo
            } else if i == n {
                hi
            } else {
                (llo + (lhi - llo) * i as f64 / n as f64).exp()
            }
        })
        .collect()
}

/// Uniform grid with `n + 1` points.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect()
}

/// Golden-section search for the maximum of `f` on `[a, b]`.
pub fn golden_max(mut f: impl FnMut(f64) -> f64, mut a: f64, mut b: f64, xtol: f64) -> (f64, f64) {
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        if (b - a).abs() <= xtol {
            break;
        }
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Outcome of a scan-and-refine search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub x: f64,
    pub value: f64,
    /// The best grid point was the first one.
    pub at_lower_edge: bool,
    /// The best grid point was the last one.
    pub at_upper_edge: bool,
}

/// Maximizes `f` over the points of `grid`, then refines with golden-section
/// search between the neighbours of the best point. `to_param`/`from_param`
/// map the grid to the variable the refinement works in (e.g. `ln`/`exp`).
pub fn scan_max(
    grid: &[f64],
    mut f: impl FnMut(f64) -> f64,
    to_param: impl Fn(f64) -> f64,
    from_param: impl Fn(f64) -> f64,
) -> Result<Extremum> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &x) in grid.iter().enumerate() {
        let v = f(x);
        if !v.is_finite() {
            continue;
        }
        if best.is_none_or(|(_, bv)| v > bv) {
            best = Some((i, v));
        }
    }
    let (i, v) = best.ok_or_else(|| Error::NoConvergence("objective not finite on the scan grid".into()))?;
    let last = grid.len() - 1;
    let mut ext = Extremum {
        x: grid[i],
        value: v,
        at_lower_edge: i == 0,
        at_upper_edge: i == last,
    };
    if i > 0 && i < last {
        let (a, b) = (to_param(grid[i - 1]), to_param(grid[i + 1]));
        let tol = 1e-12 * (b - a).abs().max(1e-300) + 1e-14 * a.abs().max(b.abs());
        let (p, fp) = golden_max(|p| {
            let y = f(from_param(p));
            if y.is_finite() { y } else { f64::NEG_INFINITY }
        }, a, b, tol);
        if fp > ext.value {
            ext.x = from_param(p);
            ext.value = fp;
        }
    }
    Ok(ext)
}

/// [`scan_max`] on a geometric grid, refining in `ln x`.
pub fn scan_max_log(lo: f64, hi: f64, per_decade: usize, f: impl FnMut(f64) -> f64) -> Result<Extremum> {
    let grid = log_grid(lo, hi, per_decade);
    scan_max(&grid, f, f64::ln, f64::exp)
}

/// Minimization counterpart of [`scan_max_log`].
pub fn scan_min_log(lo: f64, hi: f64, per_decade: usize, mut f: impl FnMut(f64) -> f64) -> Result<Extremum> {
    let mut e = scan_max_log(lo, hi, per_decade, |x| -f(x))?;
    e.value = -e.value;
    Ok(e)
}

/// Bisection for a sign change of `f` on `[a, b]`, stopping when the bracket
/// is below `xtol`.
pub fn bisect(mut f: impl FnMut(f64) -> f64, mut a: f64, mut b: f64, xtol: f64) -> Result<f64> {
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.is_nan() || fb.is_nan() || fa.signum() == fb.signum() {
        return Err(Error::NoConvergence(format!(
            "no sign change on [{a}, {b}] (f = {fa}, {fb})"
        )));
    }
    for _ in 0..400 {
        let m = 0.5 * (a + b);
        if (b - a).abs() <= xtol || m == a || m == b {
            return Ok(m);
        }
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(1e-2, 1e2, 10);
        assert_eq!(g.len(), 41);
        assert_eq!(g[0], 1e-2);
        assert_eq!(*g.last().unwrap(), 1e2);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn golden_finds_parabola_vertex() {
        let (x, v) = golden_max(|x| -(x - 0.3) * (x - 0.3) + 2.0, -1.0, 1.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-6);
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn scan_reports_edges() {
        let e = scan_max_log(1.0, 10.0, 16, |x| x).unwrap();
        assert!(e.at_upper_edge && !e.at_lower_edge);
        let e = scan_min_log(1e-3, 1e3, 64, |u| u.exp() / u).unwrap();
        assert!((e.x - 1.0).abs() < 1e-6);
        assert!((e.value - std::f64::consts::E).abs() < 1e-13);
    }

    #[test]
    fn bisect_root_and_missing_bracket() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
        assert!(bisect(|x| x * x + 1.0, 0.0, 2.0, 1e-14).is_err());
    }
}
