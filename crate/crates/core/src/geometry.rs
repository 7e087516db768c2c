//! Geometric and spectral constants of balls and axis-aligned boxes centred
//! at the origin.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shape of a supported domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    Ball { radius: f64 },
    Box { half_sides: Vec<f64> },
}

/// A strictly star-shaped domain centred at the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainGeometry {
    kind: DomainKind,
    d: usize,
}

impl DomainGeometry {
    pub fn ball(d: usize, radius: f64) -> Result<Self> {
        if d < 2 {
            return Err(Error::invalid(format!("dimension must be >= 2, got {d}")));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::invalid(format!("ball radius must be positive, got {radius}")));
        }
        Ok(DomainGeometry { kind: DomainKind::Ball { radius }, d })
    }

    /// Box `prod_i [-h_i, h_i]`; the dimension is the number of half-sides.
    pub fn cuboid(half_sides: Vec<f64>) -> Result<Self> {
        let d = half_sides.len();
        if d < 2 {
            return Err(Error::invalid(format!("box needs at least 2 half-sides, got {d}")));
        }
        if let Some(h) = half_sides.iter().find(|h| !(**h > 0.0 && h.is_finite())) {
            return Err(Error::invalid(format!("box half-sides must be positive, got {h}")));
        }
        Ok(DomainGeometry { kind: DomainKind::Box { half_sides }, d })
    }

    pub fn kind(&self) -> &DomainKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Radius for balls, `None` for boxes.
    pub fn ball_radius(&self) -> Option<f64> {
        match self.kind {
            DomainKind::Ball { radius } => Some(radius),
            DomainKind::Box { .. } => None,
        }
    }

    /// First Dirichlet eigenvalue of the Laplacian.
    pub fn first_eigenvalue(&self) -> Result<f64> {
        match &self.kind {
            DomainKind::Ball { radius } => {
                let nu = self.d as f64 / 2.0 - 1.0;
                let j = bessel_first_zero(nu)?;
                Ok((j / radius).powi(2))
            }
            DomainKind::Box { half_sides } => Ok(half_sides
                .iter()
                .map(|h| (PI / (2.0 * h)).powi(2))
                .sum()),
        }
    }

    /// Best constant `C_P` in `∫u² ≤ C_P ∫|∇u|²`, i.e. `1/λ₁`.
    pub fn poincare_constant(&self) -> Result<f64> {
        Ok(1.0 / self.first_eigenvalue()?)
    }

    /// `inf_{∂Ω} x·ν`.
    pub fn star_shape_alpha(&self) -> f64 {
        match &self.kind {
            DomainKind::Ball { radius } => *radius,
            DomainKind::Box { half_sides } => half_sides.iter().cloned().fold(f64::INFINITY, f64::min),
        }
    }

    /// `(|Ω|, |∂Ω|)`.
    pub fn measures(&self) -> (f64, f64) {
        match &self.kind {
            DomainKind::Ball { radius } => {
                let omega = unit_sphere_area(self.d);
                let d = self.d as i32;
                (omega * radius.powi(d) / self.d as f64, omega * radius.powi(d - 1))
            }
            DomainKind::Box { half_sides } => {
                let sides: Vec<f64> = half_sides.iter().map(|h| 2.0 * h).collect();
                let volume: f64 = sides.iter().product();
                let surface: f64 = (0..sides.len())
                    .map(|i| {
                        2.0 * sides
                            .iter()
                            .enumerate()
                            .filter(|(j, _)| *j != i)
                            .map(|(_, s)| s)
                            .product::<f64>()
                    })
                    .sum();
                (volume, surface)
            }
        }
    }

    pub fn volume(&self) -> f64 {
        self.measures().0
    }

    pub fn surface(&self) -> f64 {
        self.measures().1
    }

    /// Short identifier, e.g. `ball:1` or `box:1,2,3`.
    pub fn id(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for DomainGeometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            DomainKind::Ball { radius } => write!(f, "ball:{radius}:d{}", self.d),
            DomainKind::Box { half_sides } => {
                let s: Vec<String> = half_sides.iter().map(|h| h.to_string()).collect();
                write!(f, "box:{}", s.join(","))
            }
        }
    }
}

/// Area `ω_{d−1}` of the unit sphere in `R^d`, from `ω_{n+1} = 2π ω_{n−1} / n`.
pub fn unit_sphere_area(d: usize) -> f64 {
    assert!(d >= 1);
    // areas of S^0 and S^1
    let (mut even, mut odd) = (2.0, 2.0 * PI);
    if d == 1 {
        return even;
    }
    let mut n = 2;
    while n < d {
        // S^{n} from S^{n-2}
        let next = 2.0 * PI * even / (n - 1) as f64;
        even = odd;
        odd = next;
        n += 1;
    }
    odd
}

/// Bessel `J_ν(x)` divided by its leading factor `(x/2)^ν / Γ(ν+1)`.
///
/// The ascending series is summed until terms drop below `1e-17` of the
/// largest term; the positive prefactor does not affect zeros.
pub fn bessel_j_reduced(nu: f64, x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut biggest: f64 = 1.0;
    for k in 1..500 {
        let kf = k as f64;
        term *= q / (kf * (kf + nu));
        sum += term;
        biggest = biggest.max(term.abs());
        if term.abs() < 1e-17 * biggest && kf > 0.25 * x {
            break;
        }
    }
    sum
}

/// First positive zero `j_{ν,1}` of the Bessel function of the first kind.
pub fn bessel_first_zero(nu: f64) -> Result<f64> {
    if !(nu >= 0.0 && nu.is_finite()) {
        return Err(Error::invalid(format!("Bessel order must be >= 0, got {nu}")));
    }
    // j_{ν,1} > ν; step forward until the reduced series changes sign
    let mut lo = nu.max(1e-3);
    let step = 0.05;
    let mut flo = bessel_j_reduced(nu, lo);
    let limit = nu + 12.0 + 2.0 * nu.cbrt();
    let mut hi = lo + step;
    loop {
        let fhi = bessel_j_reduced(nu, hi);
        if fhi.signum() != flo.signum() {
            break;
        }
        lo = hi;
        flo = fhi;
        hi += step;
        if hi > limit {
            return Err(Error::NoConvergence(format!("no Bessel zero bracketed for ν = {nu}")));
        }
    }
    let f_lo = flo;
    let mut a = lo;
    let mut b = hi;
    while b - a > 1e-14 * b {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        let fm = bessel_j_reduced(nu, m);
        if fm.signum() == f_lo.signum() {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}
