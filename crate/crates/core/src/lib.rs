//! Escape dynamics of polynomial maps of `C^2` whose line at infinity is
//! attracted to a point, with attracting indeterminacy points.

pub mod algebra;
pub mod infinity;
pub mod orbit;
pub mod scalar;
pub mod slice;
pub mod symbol;

use num_complex::Complex64;

pub use algebra::{BiPoly, UniPoly};
pub use scalar::{BigComplex, GaussRat};

/// Polynomial with exact Gaussian rational coefficients.
pub type ExactPoly = BiPoly<GaussRat>;
/// Polynomial with double precision complex coefficients.
pub type FloatPoly = BiPoly<Complex64>;
/// Polynomial with arbitrary precision complex coefficients.
pub type BigPoly = BiPoly<BigComplex>;
