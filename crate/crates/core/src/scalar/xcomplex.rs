//! Complex numbers with an f64 mantissa and a wide binary exponent.

use super::bigc::BigComplex;
use super::gauss::GaussRat;
use super::{CFloat, Coeff};

/// `(re + i im) * 2^exp` with `max(|re|, |im|)` in `[0.5, 1)`, or zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct XComplex {
    pub re: f64,
    pub im: f64,
    pub exp: i64,
}

const ZERO_EXP: i64 = i64::MIN / 4;

fn pow2(k: i64) -> f64 {
    f64::from_bits(((k + 1023) as u64) << 52)
}

impl XComplex {
    pub const ZERO: XComplex = XComplex { re: 0.0, im: 0.0, exp: ZERO_EXP };

    pub fn new(re: f64, im: f64) -> Self {
        XComplex { re, im, exp: 0 }.normalized()
    }

    pub fn from_parts(re: f64, im: f64, exp: i64) -> Self {
        XComplex { re, im, exp }.normalized()
    }

    fn normalized(self) -> Self {
        let m = self.re.abs().max(self.im.abs());
        if m == 0.0 || !m.is_finite() {
            return if m == 0.0 { XComplex::ZERO } else { XComplex { re: f64::NAN, im: f64::NAN, exp: 0 } };
        }
        let (m, pre) = if m < f64::MIN_POSITIVE { (m * pow2(600), -600) } else { (m, 0) };
        let e = ((m.to_bits() >> 52) & 0x7ff) as i64 - 1022;
        let s = pow2(-e) * if pre != 0 { pow2(600) } else { 1.0 };
        XComplex { re: self.re * s, im: self.im * s, exp: self.exp + e + pre }
    }

    pub fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    pub fn from_big(z: &BigComplex) -> Self {
        let l = z.log2_abs();
        if l == f64::NEG_INFINITY {
            return XComplex::ZERO;
        }
        let k = l.floor() as i64;
        let (re, im) = z.mul_pow2(-(k as i32)).to_f64();
        XComplex::from_parts(re, im, k)
    }

    pub fn to_big(&self, prec: u32) -> BigComplex {
        if self.is_zero() {
            return BigComplex::zero(prec);
        }
        BigComplex::from_f64(self.re, self.im, prec).mul_pow2(self.exp as i32)
    }

    pub fn log2_abs(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        self.re.hypot(self.im).log2() + self.exp as f64
    }

    /// Unit vector in the direction of `self`.
    pub fn direction(&self) -> (f64, f64) {
        let r = self.re.hypot(self.im);
        (self.re / r, self.im / r)
    }

    /// Value as a plain f64 pair (may overflow or underflow).
    pub fn to_f64(&self) -> (f64, f64) {
        if self.is_zero() {
            return (0.0, 0.0);
        }
        let s = if self.exp > 1023 {
            f64::INFINITY
        } else if self.exp < -1074 {
            0.0
        } else {
            2f64.powi(self.exp as i32)
        };
        (self.re * s, self.im * s)
    }

    pub fn add(&self, o: &Self) -> Self {
        if self.is_zero() {
            return *o;
        }
        if o.is_zero() {
            return *self;
        }
        let (hi, lo) = if self.exp >= o.exp { (self, o) } else { (o, self) };
        let d = hi.exp - lo.exp;
        if d > 120 {
            return *hi;
        }
        let s = pow2(-d);
        XComplex { re: hi.re + lo.re * s, im: hi.im + lo.im * s, exp: hi.exp }.normalized()
    }

    pub fn neg(&self) -> Self {
        XComplex { re: -self.re, im: -self.im, exp: self.exp }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return XComplex::ZERO;
        }
        XComplex {
            re: self.re * o.re - self.im * o.im,
            im: self.re * o.im + self.im * o.re,
            exp: self.exp + o.exp,
        }
        .normalized()
    }

    pub fn mul_f64(&self, x: f64) -> Self {
        XComplex { re: self.re * x, im: self.im * x, exp: self.exp }.normalized()
    }

    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.re * self.re + self.im * self.im;
        Some(XComplex { re: self.re / n, im: -self.im / n, exp: -self.exp }.normalized())
    }

    /// `ln(1 + z)`, accurate for small `z`.
    pub fn ln1p(&self) -> Self {
        if self.is_zero() || self.exp < -1000 {
            return *self;
        }
        let (x, y) = self.to_f64();
        if !(x.is_finite() && y.is_finite()) {
            let l = self.log2_abs() * std::f64::consts::LN_2;
            return XComplex::new(l, self.im.atan2(self.re));
        }
        let re = 0.5 * (2.0 * x + x * x + y * y).ln_1p();
        let im = y.atan2(1.0 + x);
        XComplex::new(re, im)
    }

    /// `e^z - 1`, accurate for small `z`.
    pub fn expm1(&self) -> Self {
        if self.is_zero() || self.exp < -1000 {
            return *self;
        }
        let (x, y) = self.to_f64();
        let h = (0.5 * y).sin();
        XComplex::new(x.exp_m1() * y.cos() - 2.0 * h * h, x.exp() * y.sin())
    }

    /// `e^z` for moderate `z`.
    pub fn exp_of(&self) -> Self {
        let (x, y) = self.to_f64();
        let k = (x / std::f64::consts::LN_2).floor();
        let m = (x - k * std::f64::consts::LN_2).exp();
        XComplex::from_parts(m * y.cos(), m * y.sin(), k as i64)
    }
}

impl Coeff for XComplex {
    fn zero_like(&self) -> Self {
        XComplex::ZERO
    }
    fn one_like(&self) -> Self {
        XComplex::new(1.0, 0.0)
    }
    fn is_zero(&self) -> bool {
        XComplex::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        XComplex::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        XComplex::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        XComplex::mul(self, o)
    }
    fn neg(&self) -> Self {
        XComplex::neg(self)
    }
    fn inv(&self) -> Option<Self> {
        XComplex::inv(self)
    }
    fn from_gauss(g: &GaussRat, _like: &Self) -> Self {
        XComplex::from_big(&BigComplex::from_gauss(g, 64))
    }
    fn sort_key(&self) -> f64 {
        self.log2_abs()
    }
}

impl CFloat for XComplex {
    fn prec(&self) -> u32 {
        53
    }
    fn from_f64(re: f64, im: f64, _like: &Self) -> Self {
        XComplex::new(re, im)
    }
    fn to_f64(&self) -> (f64, f64) {
        XComplex::to_f64(self)
    }
    fn log2_abs(&self) -> f64 {
        XComplex::log2_abs(self)
    }
    fn conj(&self) -> Self {
        XComplex { re: self.re, im: -self.im, exp: self.exp }
    }
    fn scale_pow2(&self, k: i32) -> Self {
        XComplex { re: self.re, im: self.im, exp: self.exp + k as i64 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_beyond_f64_range() {
        let a = XComplex::from_parts(0.75, 0.25, -5000);
        let b = XComplex::from_parts(0.5, -0.5, 7000);
        let p = a.mul(&b);
        assert!((p.log2_abs() - (a.log2_abs() + b.log2_abs())).abs() < 1e-12);
        let q = p.mul(&b.inv().unwrap());
        let d = q.sub(&a);
        assert!(d.log2_abs() - a.log2_abs() < -50.0);
    }

    #[test]
    fn addition_aligns_exponents() {
        let a = XComplex::new(1.0, 0.0);
        let b = XComplex::from_parts(1.0, 0.0, -30);
        let s = a.add(&b).to_f64();
        assert!((s.0 - (1.0 + 2f64.powi(-30))).abs() < 1e-15);
        assert_eq!(a.add(&XComplex::from_parts(1.0, 0.0, -200)), a);
    }

    #[test]
    fn big_roundtrip() {
        let z = BigComplex::from_f64(0.3, -0.7, 128).mul_pow2(-100_000);
        let x = XComplex::from_big(&z);
        assert!((x.log2_abs() - z.log2_abs()).abs() < 1e-12);
        assert!(x.to_big(128).rel_dist(&z) < 1e-15);
    }

    #[test]
    fn small_argument_functions() {
        let z = XComplex::new(1e-9, 2e-9);
        let l = z.ln1p().to_f64();
        assert!((l.0 - 1e-9).abs() < 1e-17 && (l.1 - 2e-9).abs() < 1e-17);
        let e = z.expm1().to_f64();
        assert!((e.0 - 1e-9).abs() < 1e-17 && (e.1 - 2e-9).abs() < 1e-17);
        let w = XComplex::new(0.3, 1.1);
        let r = w.expm1().ln1p().to_f64();
        assert!((r.0 - 0.3).abs() < 1e-14 && (r.1 - 1.1).abs() < 1e-14);
    }
}
