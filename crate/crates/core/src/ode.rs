//! Dormand–Prince 5(4) stepping with the standard continuous extension.
//!
//! The driver loop lives with the caller (the shooting code needs event
//! handling and custom output); this module only supplies single steps,
//! error norms and dense output.

/// Integrator tolerances.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { rtol: 1e-10, atol: 1e-12 }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// One attempted step together with what is needed for dense output.
#[derive(Debug, Clone, Copy)]
pub struct Step<const N: usize> {
    pub s: f64,
    pub h: f64,
    pub y0: [f64; N],
    pub y1: [f64; N],
    /// Derivative at the end of the step (FSAL stage).
    pub k_end: [f64; N],
    /// Weighted RMS error estimate; the step is acceptable when `<= 1`.
    pub err: f64,
    cont: [[f64; N]; 5],
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// Takes one Dormand–Prince step of size `h` from `(s, y)` where `k1 = rhs(s, y)`.
pub fn dopri_step<const N: usize>(
    rhs: &mut impl FnMut(f64, &[f64; N]) -> [f64; N],
    s: f64,
    y: &[f64; N],
    k1: &[f64; N],
    h: f64,
    tol: &Tolerances,
) -> Step<N> {
    let k2 = rhs(s + C2 * h, &axpy(y, h, &[(A21, k1)]));
    let k3 = rhs(s + C3 * h, &axpy(y, h, &[(A31, k1), (A32, &k2)]));
    let k4 = rhs(s + C4 * h, &axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
    let k5 = rhs(
        s + C5 * h,
        &axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
    );
    let k6 = rhs(
        s + h,
        &axpy(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
    );
    let y1 = axpy(y, h, &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
    let k7 = rhs(s + h, &y1);

    let mut acc = 0.0;
    for i in 0..N {
        let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let sc = tol.atol + tol.rtol * y[i].abs().max(y1[i].abs());
        acc += (e / sc).powi(2);
    }
    let err = (acc / N as f64).sqrt();

    let mut cont = [[0.0; N]; 5];
    for i in 0..N {
        let ydiff = y1[i] - y[i];
        let bspl = h * k1[i] - ydiff;
        cont[0][i] = y[i];
        cont[1][i] = ydiff;
        cont[2][i] = bspl;
        cont[3][i] = ydiff - h * k7[i] - bspl;
        cont[4][i] = h
            * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
    }
    Step { s, h, y0: *y, y1, k_end: k7, err, cont }
}

impl<const N: usize> Step<N> {
    /// Continuous extension at `s + theta * h`, `theta` in [0, 1].
    pub fn dense(&self, theta: f64) -> [f64; N] {
        let t1 = 1.0 - theta;
        let c = &self.cont;
        let mut out = [0.0; N];
        for i in 0..N {
            out[i] = c[0][i]
                + theta * (c[1][i] + t1 * (c[2][i] + theta * (c[3][i] + t1 * c[4][i])));
        }
        out
    }
}

/// Step-size factor from an error estimate.
pub fn step_factor(err: f64) -> f64 {
    if err == 0.0 {
        return 5.0;
    }
    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_over_one_period() {
        let tol = Tolerances::default();
        let mut rhs = |_s: f64, y: &[f64; 2]| [y[1], -y[0]];
        let mut s = 0.0;
        let mut y = [1.0, 0.0];
        let mut k = rhs(s, &y);
        let mut h: f64 = 0.01;
        let end = 2.0 * std::f64::consts::PI;
        while s < end {
            let hh = h.min(end - s);
            let st = dopri_step(&mut rhs, s, &y, &k, hh, &tol);
            if st.err <= 1.0 {
                s += hh;
                y = st.y1;
                k = st.k_end;
            }
            h = hh * step_factor(st.err);
        }
        assert!((y[0] - 1.0).abs() < 1e-9);
        assert!(y[1].abs() < 1e-9);
    }

    #[test]
    fn dense_output_matches_endpoints_and_interior() {
        let tol = Tolerances::default();
        let mut rhs = |_s: f64, y: &[f64; 1]| [y[0]];
        let y0 = [1.0];
        let k1 = rhs(0.0, &y0);
        let st = dopri_step(&mut rhs, 0.0, &y0, &k1, 0.05, &tol);
        assert_eq!(st.dense(0.0)[0], 1.0);
        assert!((st.dense(1.0)[0] - st.y1[0]).abs() < 1e-15);
        let e = (st.dense(0.5)[0] - 0.025f64.exp()).abs();
        assert!(e < 1e-9, "{e}");
    }
}
