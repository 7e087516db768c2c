//! Gauss–Legendre rules and the composite Boole rule used on solution grids.

use std::sync::OnceLock;

/// Number of nodes of the fixed panel rule.
pub const GL_NODES: usize = 64;

/// Nodes and weights of an `n`-point Gauss–Legendre rule on [-1, 1].
///
/// Nodes come from Newton iteration on the three-term Legendre recurrence,
/// started at the Tricomi approximation.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn panel_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(GL_NODES))
}

/// Integrates `g` over `[a, b]` with the 64-point panel rule.
pub fn gl_panel(a: f64, b: f64, mut g: impl FnMut(f64) -> f64) -> f64 {
    let (x, w) = panel_rule();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut sum = 0.0;
    for (xi, wi) in x.iter().zip(w) {
        sum += wi * g(mid + half * xi);
    }
    sum * half
}

/// Composite Boole rule on a grid made of consecutive groups of four equal
/// sub-intervals. `x.len()` must be `4m + 1`.
pub fn boole(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    debug_assert!(x.len() >= 5 && (x.len() - 1).is_multiple_of(4));
    let mut sum = 0.0;
    let mut i = 0;
    while i + 4 < x.len() {
        let h = (x[i + 4] - x[i]) / 4.0;
        sum += 2.0 * h / 45.0
            * (7.0 * y[i] + 32.0 * y[i + 1] + 12.0 * y[i + 2] + 32.0 * y[i + 3] + 7.0 * y[i + 4]);
        i += 4;
    }
    sum
}

/// Running Boole integral evaluated at every panel end (`x[4k]`).
pub fn boole_cumulative(x: &[f64], y: &[f64]) -> Vec<(usize, f64)> {
    let mut out = Vec::with_capacity(x.len() / 4 + 1);
    out.push((0, 0.0));
    let mut sum = 0.0;
    let mut i = 0;
    while i + 4 < x.len() {
        let h = (x[i + 4] - x[i]) / 4.0;
        sum += 2.0 * h / 45.0
            * (7.0 * y[i] + 32.0 * y[i + 1] + 12.0 * y[i + 2] + 32.0 * y[i + 3] + 7.0 * y[i + 4]);
        i += 4;
        out.push((i, sum));
    }
    out
}
