//! Structure of a polynomial map at the line at infinity.

pub mod newton;
mod profile;

pub use newton::{newton_certificate, NewtonCertificate, NewtonError, NewtonFailure};
pub use profile::{
    escape_exponents, indeterminacy_points, newton_exponent, profile, profile_with_seed, serialize_root_value,
    topological_degree,
    topological_degree_random, EllSource, FormulaCheck, IndPoint, InfinityError, InfinityProfile, Regime,
};

use num_complex::Complex64;
use thiserror::Error;

use crate::algebra::{parse_exact, BiPoly, ParseError};
use crate::scalar::{BigComplex, GaussRat};
use crate::ExactPoly;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MapError {
    #[error("deg f1 must exceed deg f2 (got deg f1 = {d1}, deg f2 = {d2})")]
    DegreeOrder { d1: i64, d2: i64 },
    #[error("deg f2 must be at least 1")]
    ConstantF2,
    #[error("the coefficient of z^{0} in f1 must be nonzero: X = [1:0:0] would be indeterminate")]
    XIndeterminate(u32),
    #[error("cannot parse {which}: {source}")]
    Parse {
        which: &'static str,
        #[source]
        source: ParseError,
    },
}

/// A validated polynomial map `(f1, f2)` with exact coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneMap {
    pub f1: ExactPoly,
    pub f2: ExactPoly,
    pub d: u32,
    pub d2: u32,
}

impl PlaneMap {
    pub fn new(f1: ExactPoly, f2: ExactPoly) -> Result<Self, MapError> {
        let d1 = f1.degree().map_or(-1, |d| d as i64);
        let d2 = f2.degree().map_or(-1, |d| d as i64);
        if d1 <= d2 {
            return Err(MapError::DegreeOrder { d1, d2 });
        }
        if d2 < 1 {
            return Err(MapError::ConstantF2);
        }
        let d = d1 as u32;
        if f1.coeff(d, 0).is_none() {
            return Err(MapError::XIndeterminate(d));
        }
        Ok(PlaneMap { f1, f2, d, d2: d2 as u32 })
    }

    pub fn parse(f1: &str, f2: &str) -> Result<Self, MapError> {
        let p1 = parse_exact(f1).map_err(|source| MapError::Parse { which: "f1", source })?;
        let p2 = parse_exact(f2).map_err(|source| MapError::Parse { which: "f2", source })?;
        PlaneMap::new(p1, p2)
    }

    /// `f1, f2` with double precision coefficients.
    pub fn to_f64(&self) -> (BiPoly<Complex64>, BiPoly<Complex64>) {
        let like = Complex64::new(0.0, 0.0);
        (self.f1.convert(&like), self.f2.convert(&like))
    }

    pub fn to_big(&self, prec: u32) -> (BiPoly<BigComplex>, BiPoly<BigComplex>) {
        let like = BigComplex::zero(prec);
        (self.f1.convert(&like), self.f2.convert(&like))
    }

    /// `f(z, w)` exactly.
    pub fn eval_exact(&self, z: &GaussRat, w: &GaussRat) -> (GaussRat, GaussRat) {
        (self.f1.eval(z, w), self.f2.eval(z, w))
    }

    /// `(f1(z + a w, w), f2(z + a w, w))`.
    pub fn translated(&self, a: &GaussRat) -> (ExactPoly, ExactPoly) {
        (self.f1.translate_var(a), self.f2.translate_var(a))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_messages() {
        let e = PlaneMap::parse("z^2", "w^2").unwrap_err();
        assert!(e.to_string().contains("deg f1 must exceed deg f2"));
        assert!(matches!(PlaneMap::parse("z^2*w", "w").unwrap_err(), MapError::XIndeterminate(3)));
        assert!(matches!(PlaneMap::parse("z^2", "3").unwrap_err(), MapError::ConstantF2));
        assert!(matches!(PlaneMap::parse("z^", "w").unwrap_err(), MapError::Parse { which: "f1", .. }));
    }

    #[test]
    fn degrees() {
        let f = PlaneMap::parse("z^2*(w - z)^2", "w^2 + z^3").unwrap();
        assert_eq!((f.d, f.d2), (4, 3));
    }
}
