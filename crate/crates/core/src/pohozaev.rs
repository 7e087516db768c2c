//! Rellich–Pohožaev identities on radial solutions and the inequality chain
//! behind the non-local non-existence bounds.
//!
//! On a ball of radius `R` the boundary integrals are single boundary values
//! times `|∂Ω|`, with `x·ν = R` and `|∇u| = |u′(R)|`.

use serde::Serialize;

use crate::criteria::compute_c_nonmul;
use crate::error::{Error, Result};
use crate::nonlinearity::Normalization;
use crate::radial::{Problem, RadialSolution};

/// Relative slack for links that rest on quadrature.
pub const LINK_SLACK: f64 = 1e-6;
/// Links within this relative distance are reported as equalities.
pub const EQUALITY_TOL: f64 = 1e-10;

/// Both sides of `(d−2)/2 ∫|∇u|² + 1/2 ∫_{∂Ω}|∇u|²(x·ν) = volume_term`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityReport {
    pub dirichlet_energy: f64,
    pub boundary_term: f64,
    pub volume_term: f64,
    /// left side minus right side
    pub residual: f64,
    /// `|residual|` over the magnitude of the left side
    pub relative_residual: f64,
}

impl IdentityReport {
    fn new(d: usize, dirichlet_energy: f64, boundary_term: f64, volume_term: f64) -> Self {
        let lhs = 0.5 * (d as f64 - 2.0) * dirichlet_energy + 0.5 * boundary_term;
        let residual = lhs - volume_term;
        IdentityReport {
            dirichlet_energy,
            boundary_term,
            volume_term,
            residual,
            relative_residual: residual.abs() / lhs.abs().max(volume_term.abs()),
        }
    }
}

/// `∫_Ω |∇u|² dx`.
pub fn dirichlet_energy(sol: &RadialSolution) -> f64 {
    sol.integrate(|_, _, up| up * up)
}

/// `∫_{∂Ω} |∇u|² (x·ν) dσ = |∂Ω| R u′(R)²`.
pub fn boundary_term(sol: &RadialSolution) -> f64 {
    let up = sol.uprime.last().copied().unwrap_or(f64::NAN);
    sol.surface() * sol.radius * up * up
}

/// `G(u)` with `G′ = source`, `G(0) = 0`.
fn source_primitive(sol: &RadialSolution, u: f64) -> f64 {
    let spec = &sol.spec;
    match sol.problem {
        Problem::MultLocal { lambda } | Problem::MultNonLocal { lambda, .. } => {
            lambda * spec.primitive(u.max(0.0), Normalization::AtZero).unwrap_or(f64::NAN)
        }
        Problem::AddLocal { mu } | Problem::AddNonLocal { mu, .. } => {
            let g = |v: f64| spec.primitive(v, Normalization::AtMuBar).unwrap_or(f64::NAN);
            g(u.max(0.0) + mu) - g(mu)
        }
    }
}

/// `∫_Ω G(u) dx`.
fn primitive_integral(sol: &RadialSolution) -> f64 {
    sol.integrate(|_, u, _| source_primitive(sol, u))
}

fn identity(sol: &RadialSolution) -> IdentityReport {
    let volume = sol.d as f64 * primitive_integral(sol);
    IdentityReport::new(sol.d, dirichlet_energy(sol), boundary_term(sol), volume)
}

/// Pohožaev identity of `Δu + λ f(u) = 0`, right side `d λ ∫F(u)`
/// (equivalently `d κ ∫F(u) / ∫f(u)` in the non-local form).
pub fn pohozaev_residual_mult(sol: &RadialSolution) -> Result<IdentityReport> {
    match sol.problem {
        Problem::MultLocal { .. } | Problem::MultNonLocal { .. } => Ok(identity(sol)),
        _ => Err(Error::invalid("multiplicative identity needs a multiplicative solution")),
    }
}

/// Pohožaev identity of `Δu + f(u + μ) = 0`, right side `d ∫(F(u + μ) − F(μ))`.
pub fn pohozaev_residual_add(sol: &RadialSolution) -> Result<IdentityReport> {
    match sol.problem {
        Problem::AddLocal { .. } | Problem::AddNonLocal { .. } => Ok(identity(sol)),
        _ => Err(Error::invalid("additive identity needs an additive solution")),
    }
}

/// Either identity, chosen by the solution's problem.
pub fn pohozaev_residual(sol: &RadialSolution) -> IdentityReport {
    identity(sol)
}

/// Energy identity `∫|∇u|² = ∫ u · source(u)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyReport {
    pub dirichlet_energy: f64,
    pub source_moment: f64,
    pub residual: f64,
    pub relative_residual: f64,
}

pub fn energy_residual(sol: &RadialSolution) -> EnergyReport {
    let e = dirichlet_energy(sol);
    let m = sol.integrate(|_, u, _| u * sol.source(u));
    EnergyReport { dirichlet_energy: e, source_moment: m, residual: e - m, relative_residual: (e - m).abs() / e.abs().max(m.abs()) }
}

/// Pohožaev minus `(d−2)/2` times the energy identity:
/// `∫_{∂Ω}|∇u|²(x·ν) = ∫[2d G(u) − (d−2) u g(u)]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CombinedReport {
    pub boundary_term: f64,
    pub volume_term: f64,
    pub residual: f64,
    pub relative_residual: f64,
}

pub fn combined_residual(sol: &RadialSolution) -> CombinedReport {
    let dm = sol.d as f64;
    let b = boundary_term(sol);
    let v = sol.integrate(|_, u, _| 2.0 * dm * source_primitive(sol, u) - (dm - 2.0) * u * sol.source(u));
    CombinedReport { boundary_term: b, volume_term: v, residual: b - v, relative_residual: (b - v).abs() / b.abs().max(v.abs()) }
}

/// One inequality `lhs ≤ rhs` of the chain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainLink {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    /// `|lhs − rhs| ≤ 1e−10 · max(|lhs|, |rhs|)`
    pub equality: bool,
}

impl ChainLink {
    fn le(name: &str, lhs: f64, rhs: f64) -> Self {
        let scale = lhs.abs().max(rhs.abs());
        ChainLink {
            name: name.to_string(),
            lhs,
            rhs,
            holds: lhs <= rhs + LINK_SLACK * scale,
            equality: (lhs - rhs).abs() <= EQUALITY_TOL * scale,
        }
    }

    fn eq(name: &str, lhs: f64, rhs: f64) -> Self {
        let mut link = Self::le(name, lhs, rhs);
        link.holds = (lhs - rhs).abs() <= LINK_SLACK * lhs.abs().max(rhs.abs());
        link
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainReport {
    pub links: Vec<ChainLink>,
    pub holds: bool,
}

impl ChainReport {
    pub fn link(&self, name: &str) -> Option<&ChainLink> {
        self.links.iter().find(|l| l.name == name)
    }
}

/// Evaluates each link of the flux / Cauchy–Schwarz / star-shape chain.
///
/// With `T` the total flux (`κ`, or `M` for additive solutions), `B` the
/// boundary term and `α = R`:
/// `T² ≤ |∂Ω| ∫_{∂Ω}|∇u·ν|²`, `α ∫_{∂Ω}|∇u·ν|² ≤ B`, `B = ∫[2dG − (d−2)u g]`,
/// hence `∫[2dG − (d−2)u g] ≥ α T²/|∂Ω|`. Multiplicative solutions add the
/// constant bound `∫[2dF − (d−2)uf] ≤ C ∫f` and the final `κ ≤ C|∂Ω|/α`
/// whenever `C` is finite.
pub fn nonexistence_chain(sol: &RadialSolution) -> Result<ChainReport> {
    let area = sol.surface();
    let alpha = sol.radius;
    let up = sol.uprime.last().copied().unwrap_or(f64::NAN);
    let total = sol.source_integral();
    let flux = sol.boundary_flux();
    let normal_sq = area * up * up;
    let b = boundary_term(sol);
    let comb = combined_residual(sol);
    let mut links = vec![
        ChainLink::eq("flux", total, flux),
        ChainLink::le("cauchy_schwarz", flux * flux, area * normal_sq),
        ChainLink::le("star_shape", alpha * normal_sq, b),
        ChainLink::eq("pohozaev", b, comb.volume_term),
        ChainLink::le("lower_bound", alpha * total * total / area, comb.volume_term),
    ];
    if let Some(lambda) = sol.problem.lambda() {
        let spec = &sol.spec;
        match compute_c_nonmul(spec, sol.d) {
            Ok(c) => {
                let mass = sol.integrate(|_, u, _| spec.f_extended(u));
                links.push(ChainLink::le("constant_bound", comb.volume_term / lambda, c * mass));
                links.push(ChainLink::le("kappa_bound", total, c * area / alpha));
            }
            Err(e) if e.is_certificate_failure() => {}
            Err(e) => return Err(e),
        }
    }
    let holds = links.iter().all(|l| l.holds);
    Ok(ChainReport { links, holds })
}
