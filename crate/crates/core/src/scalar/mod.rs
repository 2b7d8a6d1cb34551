//! Coefficient fields shared by the polynomial core.
//!
//! [`Coeff`] is the ring interface every backend provides. [`CFloat`] adds the
//! approximate operations the numeric algorithms need. It is implemented for
//! `Complex<T>` with any `num_traits::Float` as well as for [`BigComplex`].

mod bigc;
mod gauss;
mod xcomplex;

pub use bigc::{ensure_exponent_range, float_exp, float_log2_abs, BigComplex};
pub use gauss::{rat_string, GaussRat};
pub use xcomplex::XComplex;

use num_complex::Complex;
use num_traits::Float;
use std::fmt::Debug;

/// Commutative field of polynomial coefficients.
///
/// Constants are built "like" an existing value so that arbitrary precision
/// types can inherit their precision.
pub trait Coeff: Clone + Debug + Send + Sync + 'static {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn inv(&self) -> Option<Self>;
    fn from_gauss(g: &GaussRat, like: &Self) -> Self;

    /// Ordering key for balanced summation (ascending); exact types return 0.
    fn sort_key(&self) -> f64 {
        0.0
    }

    fn div(&self, o: &Self) -> Option<Self> {
        o.inv().map(|x| self.mul(&x))
    }

    fn from_i64(n: i64, like: &Self) -> Self {
        Self::from_gauss(&GaussRat::from_int(n), like)
    }

    fn mul_i64(&self, n: i64) -> Self {
        self.mul(&Self::from_i64(n, self))
    }

    fn pow_u(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = self.one_like();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }
}

/// Approximate complex field with a known working precision.
pub trait CFloat: Coeff {
    /// Mantissa bits.
    fn prec(&self) -> u32;
    fn from_f64(re: f64, im: f64, like: &Self) -> Self;
    fn to_f64(&self) -> (f64, f64);
    /// `log2|z|`, `-inf` at zero; never overflows.
    fn log2_abs(&self) -> f64;
    fn conj(&self) -> Self;
    /// `2^k * self`.
    fn scale_pow2(&self, k: i32) -> Self;

    fn eps(&self) -> f64 {
        (2.0f64).powi(1 - self.prec() as i32)
    }

    /// `|self|` when representable in f64.
    fn abs_f64(&self) -> f64 {
        self.log2_abs().exp2()
    }

    /// `2^{log2_r} * e^{i theta}`.
    fn from_log2_polar(log2_r: f64, theta: f64, like: &Self) -> Self {
        let k = log2_r.floor();
        let m = (log2_r - k).exp2();
        Self::from_f64(m * theta.cos(), m * theta.sin(), like).scale_pow2(k as i32)
    }
}

impl Coeff for GaussRat {
    fn zero_like(&self) -> Self {
        GaussRat::zero()
    }
    fn one_like(&self) -> Self {
        GaussRat::one()
    }
    fn is_zero(&self) -> bool {
        GaussRat::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        GaussRat::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        GaussRat::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        GaussRat::mul(self, o)
    }
    fn neg(&self) -> Self {
        GaussRat::neg(self)
    }
    fn inv(&self) -> Option<Self> {
        GaussRat::inv(self)
    }
    fn from_gauss(g: &GaussRat, _like: &Self) -> Self {
        g.clone()
    }
}

impl<T> Coeff for Complex<T>
where
    T: Float + Debug + Send + Sync + 'static,
{
    fn zero_like(&self) -> Self {
        Complex::new(T::zero(), T::zero())
    }
    fn one_like(&self) -> Self {
        Complex::new(T::one(), T::zero())
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn add(&self, o: &Self) -> Self {
        *self + *o
    }
    fn sub(&self, o: &Self) -> Self {
        *self - *o
    }
    fn mul(&self, o: &Self) -> Self {
        *self * *o
    }
    fn neg(&self) -> Self {
        -*self
    }
    fn inv(&self) -> Option<Self> {
        if Coeff::is_zero(self) {
            None
        } else {
            Some(Complex::new(T::one(), T::zero()) / *self)
        }
    }
    fn from_gauss(g: &GaussRat, _like: &Self) -> Self {
        let (re, im) = g.to_f64();
        Complex::new(T::from(re).unwrap(), T::from(im).unwrap())
    }
    fn sort_key(&self) -> f64 {
        self.norm().to_f64().unwrap()
    }
}

impl<T> CFloat for Complex<T>
where
    T: Float + Debug + Send + Sync + 'static,
{
    fn prec(&self) -> u32 {
        let eps = T::epsilon().to_f64().unwrap();
        (1.0 - eps.log2()).round() as u32
    }
    fn from_f64(re: f64, im: f64, _like: &Self) -> Self {
        Complex::new(T::from(re).unwrap(), T::from(im).unwrap())
    }
    fn to_f64(&self) -> (f64, f64) {
        (self.re.to_f64().unwrap(), self.im.to_f64().unwrap())
    }
    fn log2_abs(&self) -> f64 {
        self.norm().to_f64().unwrap().log2()
    }
    fn conj(&self) -> Self {
        Complex::conj(self)
    }
    fn scale_pow2(&self, k: i32) -> Self {
        let s = T::from((2.0f64).powi(k)).unwrap();
        Complex::new(self.re * s, self.im * s)
    }
}

impl Coeff for BigComplex {
    fn zero_like(&self) -> Self {
        BigComplex::zero(self.prec())
    }
    fn one_like(&self) -> Self {
        BigComplex::one(self.prec())
    }
    fn is_zero(&self) -> bool {
        BigComplex::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        BigComplex::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        BigComplex::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        BigComplex::mul(self, o)
    }
    fn neg(&self) -> Self {
        BigComplex::neg(self)
    }
    fn inv(&self) -> Option<Self> {
        BigComplex::inv(self)
    }
    fn div(&self, o: &Self) -> Option<Self> {
        BigComplex::div(self, o)
    }
    fn from_gauss(g: &GaussRat, like: &Self) -> Self {
        BigComplex::from_gauss(g, like.prec())
    }
    fn mul_i64(&self, n: i64) -> Self {
        BigComplex::mul_i64(self, n)
    }
    fn pow_u(&self, e: u32) -> Self {
        BigComplex::pow_u(self, e)
    }
    fn sort_key(&self) -> f64 {
        BigComplex::log2_abs(self)
    }
}

impl CFloat for BigComplex {
    fn prec(&self) -> u32 {
        BigComplex::prec(self)
    }
    fn from_f64(re: f64, im: f64, like: &Self) -> Self {
        BigComplex::from_f64(re, im, like.prec())
    }
    fn to_f64(&self) -> (f64, f64) {
        BigComplex::to_f64(self)
    }
    fn log2_abs(&self) -> f64 {
        BigComplex::log2_abs(self)
    }
    fn conj(&self) -> Self {
        BigComplex::conj(self)
    }
    fn scale_pow2(&self, k: i32) -> Self {
        self.mul_pow2(k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn generic_square<C: Coeff>(x: &C) -> C {
        x.mul(x)
    }

    #[test]
    fn backends_agree() {
        let g = GaussRat::from_ratio(3, 2).add(&GaussRat::i());
        let exact = generic_square(&g);
        let f64v = generic_square(&Complex::<f64>::from_gauss(&g, &Complex::new(0.0, 0.0)));
        let f32v = generic_square(&Complex::<f32>::from_gauss(&g, &Complex::new(0.0, 0.0)));
        let big = generic_square(&BigComplex::from_gauss(&g, 200));
        let (re, im) = exact.to_f64();
        assert!((f64v.re - re).abs() < 1e-15 && (f64v.im - im).abs() < 1e-15);
        assert!((f32v.re as f64 - re).abs() < 1e-6);
        let (br, bi) = big.to_f64();
        assert_eq!((br, bi), (re, im));
    }

    #[test]
    fn precision_bits() {
        assert_eq!(Complex::new(0.0f64, 0.0).prec(), 53);
        assert_eq!(Complex::new(0.0f32, 0.0).prec(), 24);
        assert_eq!(BigComplex::zero(300).prec(), 300);
    }

    #[test]
    fn polar_of_tiny_radius() {
        let z = BigComplex::from_log2_polar(-5000.25, 1.0, &BigComplex::zero(80));
        assert!((z.log2_abs() + 5000.25).abs() < 1e-9);
    }
}
