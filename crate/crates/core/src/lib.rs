//! Numerical toolkit for supercritical semilinear elliptic bifurcation
//! problems of Gelfand type: radial branches on balls, threshold constants,
//! Pohožaev-type integral identities and Fermi–Dirac nonlinearities.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
pub mod nonlinearity;
pub mod ode;
pub mod cli;
pub mod criteria;
pub mod optimize;
pub mod pohozaev;
pub mod quadrature;
pub mod radial;

pub use error::{Error, Result};
pub use geometry::{DomainGeometry, DomainKind};
pub use nonlinearity::{Normalization, NonlinearitySpec, Reduction, Variant};
