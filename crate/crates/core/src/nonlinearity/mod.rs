//! The nonlinearities `f`, their derivatives and primitives.
//!
//! The primitive's additive constant is an explicit argument
//! ([`Normalization`]): the multiplicative problems use `F(0) = 0`, the
//! additive ones `F(μ̄) = 0` where `μ̄` is the left end of positivity.

mod fermi;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use fermi::{fermi_dirac, fermi_dirac_derivative};

use crate::error::{Error, Result};

/// Family of the nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum Variant {
    /// `e^u`
    Exponential,
    /// `(1+u)^p` on `u > −1`
    ShiftedPower { p: f64 },
    /// `u^p` on `u > 0`
    PurePower { p: f64 },
    /// Fermi–Dirac integral `f_δ`
    FermiDirac { delta: f64 },
}

/// Additive constant of the primitive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Normalization {
    /// `F(0) = 0`
    AtZero,
    /// `F(μ̄) = 0`
    AtMuBar,
}

/// Outcome of rewriting `Δu + f(u+μ) = 0` as `Δv + λ f(v) = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reduction {
    Lambda(f64),
    NotReducible,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonlinearitySpec {
    variant: Variant,
}

impl NonlinearitySpec {
    pub fn new(variant: Variant) -> Result<Self> {
        match variant {
            Variant::ShiftedPower { p } | Variant::PurePower { p } if !(p > 1.0 && p.is_finite()) => {
                Err(Error::invalid(format!("power exponent must be > 1, got {p}")))
            }
            Variant::FermiDirac { delta } if !(delta >= 0.0 && delta.is_finite()) => {
                Err(Error::invalid(format!("Fermi-Dirac index must be >= 0, got {delta}")))
            }
            _ => Ok(NonlinearitySpec { variant }),
        }
    }

    pub fn exponential() -> Self {
        NonlinearitySpec { variant: Variant::Exponential }
    }

    pub fn shifted_power(p: f64) -> Result<Self> {
        Self::new(Variant::ShiftedPower { p })
    }

    pub fn pure_power(p: f64) -> Result<Self> {
        Self::new(Variant::PurePower { p })
    }

    pub fn fermi(delta: f64) -> Result<Self> {
        Self::new(Variant::FermiDirac { delta })
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn is_exponential(&self) -> bool {
        matches!(self.variant, Variant::Exponential)
    }

    /// Left end `μ̄` of the positivity interval (`−∞` when unbounded).
    pub fn mu_bar(&self) -> f64 {
        match self.variant {
            Variant::Exponential | Variant::FermiDirac { .. } => f64::NEG_INFINITY,
            Variant::ShiftedPower { .. } => -1.0,
            Variant::PurePower { .. } => 0.0,
        }
    }

    fn check_domain(&self, u: f64) -> Result<()> {
        if u.is_nan() {
            return Err(Error::invalid("argument is NaN"));
        }
        let bar = self.mu_bar();
        if u <= bar {
            return Err(Error::OutsideDomain { what: self.to_string(), value: u, bound: bar });
        }
        Ok(())
    }

    /// `f(u)`.
    pub fn f(&self, u: f64) -> Result<f64> {
        self.check_domain(u)?;
        Ok(match self.variant {
            Variant::Exponential => u.exp(),
            Variant::ShiftedPower { p } => (1.0 + u).powf(p),
            Variant::PurePower { p } => u.powf(p),
            Variant::FermiDirac { delta } => fermi_dirac(delta, u)?,
        })
    }

    /// `f′(u)`.
    pub fn fprime(&self, u: f64) -> Result<f64> {
        self.check_domain(u)?;
        Ok(match self.variant {
            Variant::Exponential => u.exp(),
            Variant::ShiftedPower { p } => p * (1.0 + u).powf(p - 1.0),
            Variant::PurePower { p } => p * u.powf(p - 1.0),
            Variant::FermiDirac { delta } => fermi_dirac_derivative(delta, 1, u)?,
        })
    }

    /// `f″(u)`.
    pub fn fsecond(&self, u: f64) -> Result<f64> {
        self.check_domain(u)?;
        Ok(match self.variant {
            Variant::Exponential => u.exp(),
            Variant::ShiftedPower { p } => p * (p - 1.0) * (1.0 + u).powf(p - 2.0),
            Variant::PurePower { p } => p * (p - 1.0) * u.powf(p - 2.0),
            Variant::FermiDirac { delta } => fermi_dirac_derivative(delta, 2, u)?,
        })
    }

    /// `ln f(u)`, finite where `f(u)` itself would overflow.
    pub fn ln_f(&self, u: f64) -> Result<f64> {
        self.check_domain(u)?;
        Ok(match self.variant {
            Variant::Exponential => u,
            Variant::ShiftedPower { p } => p * (1.0 + u).ln(),
            Variant::PurePower { p } => p * u.ln(),
            Variant::FermiDirac { delta } => fermi_dirac(delta, u)?.ln(),
        })
    }

    /// Value of the `AtMuBar` primitive at zero, i.e. `F_{μ̄}(0)`.
    fn primitive_at_zero(&self) -> Result<f64> {
        Ok(match self.variant {
            Variant::Exponential => 1.0,
            Variant::ShiftedPower { p } => 1.0 / (p + 1.0),
            Variant::PurePower { .. } => 0.0,
            Variant::FermiDirac { delta } => fermi_dirac(delta + 1.0, 0.0)? / (delta + 1.0),
        })
    }

    /// The primitive `F` under the requested normalization.
    pub fn primitive(&self, u: f64, norm: Normalization) -> Result<f64> {
        if matches!(self.variant, Variant::PurePower { .. }) && u == 0.0 {
            return Ok(0.0);
        }
        self.check_domain(u)?;
        let at_bar = match self.variant {
            Variant::Exponential => {
                return Ok(match norm {
                    Normalization::AtMuBar => u.exp(),
                    Normalization::AtZero => u.exp_m1(),
                })
            }
            Variant::ShiftedPower { p } => (1.0 + u).powf(p + 1.0) / (p + 1.0),
            Variant::PurePower { p } => u.powf(p + 1.0) / (p + 1.0),
            Variant::FermiDirac { delta } => fermi_dirac(delta + 1.0, u)? / (delta + 1.0),
        };
        Ok(match norm {
            Normalization::AtMuBar => at_bar,
            Normalization::AtZero => at_bar - self.primitive_at_zero()?,
        })
    }

    /// `F(u) / f(u)` evaluated without forming the (possibly overflowing) factors.
    pub fn primitive_over_f(&self, u: f64, norm: Normalization) -> Result<f64> {
        self.check_domain(u)?;
        Ok(match (self.variant, norm) {
            (Variant::Exponential, Normalization::AtMuBar) => 1.0,
            (Variant::Exponential, Normalization::AtZero) => -(-u).exp_m1(),
            (Variant::ShiftedPower { p }, Normalization::AtMuBar) => (1.0 + u) / (p + 1.0),
            (Variant::ShiftedPower { p }, Normalization::AtZero) => {
                ((1.0 + u) - (1.0 + u).powf(-p)) / (p + 1.0)
            }
            (Variant::PurePower { p }, _) => u / (p + 1.0),
            (Variant::FermiDirac { .. }, _) => self.primitive(u, norm)? / self.f(u)?,
        })
    }

    /// `F(u) / (u f(u))` for `u > 0`; exact constant for the pure power.
    pub fn primitive_over_uf(&self, u: f64, norm: Normalization) -> Result<f64> {
        if !(u > 0.0) {
            return Err(Error::invalid(format!("F/(u f) needs u > 0, got {u}")));
        }
        Ok(match (self.variant, norm) {
            (Variant::PurePower { p }, _) => 1.0 / (p + 1.0),
            (Variant::Exponential, Normalization::AtZero) => -(-u).exp_m1() / u,
            _ => self.primitive_over_f(u, norm)? / u,
        })
    }

    /// Splits `F(u)/f(u) = u/k + rest(u)` with `rest` bounded, returning `(k, rest)`
    /// (`k = ∞` when there is no linear part). Lets callers cancel the linear
    /// growth exactly instead of subtracting two numbers of size `u`.
    pub fn primitive_over_f_split(&self, u: f64, norm: Normalization) -> Result<(f64, f64)> {
        self.check_domain(u)?;
        Ok(match (self.variant, norm) {
            (Variant::ShiftedPower { p }, Normalization::AtMuBar) => (p + 1.0, 1.0 / (p + 1.0)),
            (Variant::ShiftedPower { p }, Normalization::AtZero) => {
                (p + 1.0, -(-p * u.ln_1p()).exp_m1() / (p + 1.0))
            }
            (Variant::PurePower { p }, _) => (p + 1.0, 0.0),
            _ => (f64::INFINITY, self.primitive_over_f(u, norm)?),
        })
    }

    /// Total extension of `f` used inside ODE right-hand sides, where trial
    /// stages may step slightly past `μ̄`: power laws are continued by zero.
    pub fn f_extended(&self, u: f64) -> f64 {
        match self.variant {
            Variant::Exponential => u.exp(),
            Variant::ShiftedPower { p } => (1.0 + u).max(0.0).powf(p),
            Variant::PurePower { p } => u.max(0.0).powf(p),
            Variant::FermiDirac { delta } => fermi_dirac(delta, u).unwrap_or(f64::NAN),
        }
    }

    /// `λ` such that the additive problem with shift `μ` becomes the
    /// multiplicative one, when such a rewriting exists.
    pub fn reduce_additive(&self, mu: f64) -> Result<Reduction> {
        self.check_domain(mu)?;
        Ok(match self.variant {
            Variant::Exponential => Reduction::Lambda(mu.exp()),
            Variant::ShiftedPower { p } => Reduction::Lambda((1.0 + mu).powf(p - 1.0)),
            _ => Reduction::NotReducible,
        })
    }

    /// Short identifier matching the CLI selector syntax.
    pub fn id(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for NonlinearitySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.variant {
            Variant::Exponential => write!(f, "exp"),
            Variant::ShiftedPower { p } => write!(f, "power:{p}"),
            Variant::PurePower { p } => write!(f, "purepower:{p}"),
            Variant::FermiDirac { delta } => write!(f, "fermi:{delta}"),
        }
    }
}

impl FromStr for NonlinearitySpec {
    type Err = Error;

    /// Parses `exp`, `power:p`, `purepower:p` or `fermi:delta`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let num = |a: Option<&str>| -> Result<f64> {
            let a = a.ok_or_else(|| Error::invalid(format!("`{name}` needs a parameter, e.g. `{name}:2`")))?;
            a.parse::<f64>()
                .map_err(|_| Error::invalid(format!("bad numeric parameter `{a}` in `{s}`")))
        };
        match name {
            "exp" if arg.is_none() => Ok(Self::exponential()),
            "power" => Self::shifted_power(num(arg)?),
            "purepower" => Self::pure_power(num(arg)?),
            "fermi" => Self::fermi(num(arg)?),
            _ => Err(Error::invalid(format!(
                "unknown nonlinearity `{s}` (expected exp | power:p | purepower:p | fermi:delta)"
            ))),
        }
    }
}
