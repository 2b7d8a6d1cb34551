//! Bivariate polynomial core over exact and floating coefficient fields.

pub mod bipoly;
pub mod parse;
pub mod resultant;
pub mod roots;
pub mod unipoly;

pub use bipoly::{BiPoly, Exps};
pub use parse::{parse_exact, ParseError};
pub use resultant::resultant_w;
pub use roots::{roots_with_multiplicity_exact, roots_with_multiplicity_float, RootError, RootValue};
pub use unipoly::UniPoly;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::scalar::{BigComplex, GaussRat};

/// Coefficient backend of a polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    Exact,
    /// Complex floating point with the given mantissa bits (53 selects `f64`).
    Float(u32),
}

impl Default for Backend {
    fn default() -> Self {
        Backend::Float(53)
    }
}

/// A polynomial tagged with its backend.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyPoly {
    Exact(BiPoly<GaussRat>),
    F64(BiPoly<Complex64>),
    Big(BiPoly<BigComplex>),
}

impl AnyPoly {
    pub fn backend(&self) -> Backend {
        match self {
            AnyPoly::Exact(_) => Backend::Exact,
            AnyPoly::F64(_) => Backend::Float(53),
            AnyPoly::Big(p) => Backend::Float(p.any_coeff().map_or(53, |c| c.prec())),
        }
    }

    pub fn support(&self) -> Vec<Exps> {
        match self {
            AnyPoly::Exact(p) => p.support(),
            AnyPoly::F64(p) => p.support(),
            AnyPoly::Big(p) => p.support(),
        }
    }

    pub fn degree(&self) -> Option<u32> {
        match self {
            AnyPoly::Exact(p) => p.degree(),
            AnyPoly::F64(p) => p.degree(),
            AnyPoly::Big(p) => p.degree(),
        }
    }

    pub fn as_exact(&self) -> Option<&BiPoly<GaussRat>> {
        match self {
            AnyPoly::Exact(p) => Some(p),
            _ => None,
        }
    }
}

/// The accepted expression grammar is described in [`parse`].
pub fn parse_poly(text: &str, backend: Backend) -> Result<AnyPoly, ParseError> {
    let p = parse_exact(text)?;
    Ok(match backend {
        Backend::Exact => AnyPoly::Exact(p),
        Backend::Float(53) => AnyPoly::F64(p.convert(&Complex64::new(0.0, 0.0))),
        Backend::Float(bits) => AnyPoly::Big(p.convert(&BigComplex::zero(bits))),
    })
}

/// Resultant on a tagged polynomial pair; only the exact backend is supported.
pub fn resultant_any(p: &AnyPoly, q: &AnyPoly) -> Result<UniPoly<GaussRat>, BackendError> {
    match (p, q) {
        (AnyPoly::Exact(a), AnyPoly::Exact(b)) => Ok(resultant_w(a, b)),
        _ => Err(BackendError("resultants require the exact backend".into())),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{0}")]
pub struct BackendError(pub String);
