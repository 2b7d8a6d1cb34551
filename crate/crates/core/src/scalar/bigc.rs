use std::cell::Cell;
use std::fmt;

use gmp_mpfr_sys::mpfr;
use rug::{Assign, Float};

use super::gauss::GaussRat;

thread_local! {
    static RANGE_SET: Cell<bool> = const { Cell::new(false) };
}

/// Widens the MPFR exponent range of the calling thread to its maximum.
///
/// Orbits near infinity have magnitudes like `exp(4^25)`, far beyond the
/// default range, and the range is per thread.
#[inline]
pub fn ensure_exponent_range() {
    RANGE_SET.with(|c| {
        if !c.get() {
            unsafe {
                mpfr::set_emax(mpfr::get_emax_max());
                mpfr::set_emin(mpfr::get_emin_min());
            }
            c.set(true);
        }
    });
}

/// Binary exponent of a nonzero regular float, as a wide integer.
pub fn float_exp(x: &Float) -> i64 {
    unsafe { mpfr::get_exp(x.as_raw()) as i64 }
}

/// `log2|x|` as f64, valid for exponents beyond the f64 range; `-inf` at zero.
pub fn float_log2_abs(x: &Float) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    if !x.is_finite() {
        return f64::INFINITY;
    }
    let mut e: std::os::raw::c_long = 0;
    let m = unsafe { mpfr::get_d_2exp(&mut e, x.as_raw(), mpfr::rnd_t::RNDN) };
    m.abs().log2() + e as f64
}

/// Complex number with two MPFR floats at a shared precision.
#[derive(Clone, PartialEq)]
pub struct BigComplex {
    pub re: Float,
    pub im: Float,
}

impl fmt::Debug for BigComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (r, i) = self.to_f64();
        write!(f, "BigComplex({:e}, {:e}; {} bits)", r, i, self.prec())
    }
}

impl BigComplex {
    pub fn zero(prec: u32) -> Self {
        ensure_exponent_range();
        BigComplex { re: Float::new(prec), im: Float::new(prec) }
    }

    pub fn one(prec: u32) -> Self {
        Self::from_f64(1.0, 0.0, prec)
    }

    pub fn from_f64(re: f64, im: f64, prec: u32) -> Self {
        ensure_exponent_range();
        BigComplex { re: Float::with_val(prec, re), im: Float::with_val(prec, im) }
    }

    pub fn from_floats(re: Float, im: Float) -> Self {
        ensure_exponent_range();
        let p = re.prec().max(im.prec());
        let mut z = BigComplex { re, im };
        if z.re.prec() != p {
            z.re.set_prec(p);
        }
        if z.im.prec() != p {
            z.im.set_prec(p);
        }
        z
    }

    pub fn from_gauss(g: &GaussRat, prec: u32) -> Self {
        ensure_exponent_range();
        BigComplex { re: Float::with_val(prec, &g.re), im: Float::with_val(prec, &g.im) }
    }

    /// `exp(log_r) * e^{i theta}`; handles radii outside the f64 range.
    pub fn from_polar(log_r: &Float, theta: &Float, prec: u32) -> Self {
        ensure_exponent_range();
        let r = Float::with_val(prec, log_r.exp_ref());
        let (s, c) = Float::with_val(prec, theta).sin_cos(Float::new(prec));
        BigComplex { re: Float::with_val(prec, &r * &c), im: r * s }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec()
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        ensure_exponent_range();
        let mut z = self.clone();
        z.re.set_prec(prec);
        z.im.set_prec(prec);
        z
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }

    pub fn add(&self, o: &Self) -> Self {
        ensure_exponent_range();
        let p = self.prec().max(o.prec());
        BigComplex {
            re: Float::with_val(p, &self.re + &o.re),
            im: Float::with_val(p, &self.im + &o.im),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        ensure_exponent_range();
        let p = self.prec().max(o.prec());
        BigComplex {
            re: Float::with_val(p, &self.re - &o.re),
            im: Float::with_val(p, &self.im - &o.im),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        ensure_exponent_range();
        let p = self.prec().max(o.prec());
        let re = Float::with_val(p, self.re.mul_sub_mul_ref(&o.re, &self.im, &o.im));
        let im = Float::with_val(p, self.re.mul_add_mul_ref(&o.im, &self.im, &o.re));
        BigComplex { re, im }
    }

    pub fn sqr(&self) -> Self {
        self.mul(self)
    }

    pub fn neg(&self) -> Self {
        BigComplex { re: Float::with_val(self.prec(), -&self.re), im: Float::with_val(self.prec(), -&self.im) }
    }

    pub fn conj(&self) -> Self {
        BigComplex { re: self.re.clone(), im: Float::with_val(self.prec(), -&self.im) }
    }

    pub fn mul_real(&self, x: &Float) -> Self {
        ensure_exponent_range();
        let p = self.prec();
        BigComplex { re: Float::with_val(p, &self.re * x), im: Float::with_val(p, &self.im * x) }
    }

    pub fn mul_f64(&self, x: f64) -> Self {
        ensure_exponent_range();
        let p = self.prec();
        BigComplex { re: Float::with_val(p, &self.re * x), im: Float::with_val(p, &self.im * x) }
    }

    pub fn mul_i64(&self, n: i64) -> Self {
        ensure_exponent_range();
        let p = self.prec();
        BigComplex { re: Float::with_val(p, &self.re * n), im: Float::with_val(p, &self.im * n) }
    }

    pub fn norm_sqr(&self) -> Float {
        ensure_exponent_range();
        Float::with_val(self.prec(), self.re.mul_add_mul_ref(&self.re, &self.im, &self.im))
    }

    pub fn abs(&self) -> Float {
        ensure_exponent_range();
        Float::with_val(self.prec(), self.re.hypot_ref(&self.im))
    }

    pub fn arg(&self) -> Float {
        ensure_exponent_range();
        Float::with_val(self.prec(), self.im.atan2_ref(&self.re))
    }

    /// Natural log of the modulus at full precision.
    pub fn ln_abs(&self) -> Float {
        self.abs().ln()
    }

    /// `log2|z|` as f64; `-inf` at zero.
    pub fn log2_abs(&self) -> f64 {
        let a = float_log2_abs(&self.re);
        let b = float_log2_abs(&self.im);
        let m = a.max(b);
        if m == f64::NEG_INFINITY {
            return m;
        }
        let n = a.min(b);
        m + 0.5 * (1.0 + (2.0f64).powf(2.0 * (n - m))).log2()
    }

    /// `ln|z|` as f64.
    pub fn ln_abs_f64(&self) -> f64 {
        self.log2_abs() * std::f64::consts::LN_2
    }

    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        ensure_exponent_range();
        let p = self.prec();
        let n = self.norm_sqr();
        Some(BigComplex {
            re: Float::with_val(p, &self.re / &n),
            im: Float::with_val(p, -&self.im) / &n,
        })
    }

    pub fn div(&self, o: &Self) -> Option<Self> {
        if o.is_zero() {
            return None;
        }
        ensure_exponent_range();
        let p = self.prec().max(o.prec()) + 8;
        let a = self.with_prec(p);
        let b = o.with_prec(p);
        let n = b.norm_sqr();
        let re = Float::with_val(p, a.re.mul_add_mul_ref(&b.re, &a.im, &b.im)) / &n;
        let im = Float::with_val(p, a.im.mul_sub_mul_ref(&b.re, &a.re, &b.im)) / &n;
        Some(BigComplex { re, im }.with_prec(self.prec().max(o.prec())))
    }

    /// Principal complex logarithm.
    pub fn ln(&self) -> Self {
        BigComplex { re: self.ln_abs(), im: self.arg() }
    }

    pub fn exp(&self) -> Self {
        BigComplex::from_polar(&self.re, &self.im, self.prec())
    }

    pub fn pow_u(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = BigComplex::one(self.prec());
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.sqr();
            }
        }
        acc
    }

    /// Principal square root.
    pub fn sqrt(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        ensure_exponent_range();
        let p = self.prec();
        let r = self.abs();
        let mut a = Float::with_val(p, &r + &self.re);
        a /= 2u32;
        let mut b = Float::with_val(p, &r - &self.re);
        b /= 2u32;
        let re = a.sqrt();
        let mut im = b.sqrt();
        if self.im.is_sign_negative() {
            im = -im;
        }
        BigComplex { re, im }
    }

    /// Multiplies by `2^k` exactly.
    pub fn mul_pow2(&self, k: i32) -> Self {
        ensure_exponent_range();
        let mut z = self.clone();
        if k >= 0 {
            z.re <<= k as u32;
            z.im <<= k as u32;
        } else {
            z.re >>= (-k) as u32;
            z.im >>= (-k) as u32;
        }
        z
    }

    /// Relative distance `|a-b| / max(|a|,|b|)` as f64 (0 when both vanish).
    pub fn rel_dist(&self, o: &Self) -> f64 {
        let d = self.sub(o).log2_abs();
        let m = self.log2_abs().max(o.log2_abs());
        if m == f64::NEG_INFINITY {
            return 0.0;
        }
        (2.0f64).powf(d - m)
    }

    /// `self = self * t + c` without allocating; `scratch` must have the
    /// precision of `self`.
    pub fn horner_step(&mut self, t: &Self, c: &Self, scratch: &mut (Float, Float)) {
        self.mul_assign_with(t, scratch);
        self.re += &c.re;
        self.im += &c.im;
    }

    /// `self *= o` without allocating.
    pub fn mul_assign_with(&mut self, o: &Self, scratch: &mut (Float, Float)) {
        scratch.0.assign(self.re.mul_sub_mul_ref(&o.re, &self.im, &o.im));
        scratch.1.assign(self.re.mul_add_mul_ref(&o.im, &self.im, &o.re));
        std::mem::swap(&mut self.re, &mut scratch.0);
        std::mem::swap(&mut self.im, &mut scratch.1);
    }

    pub fn add_assign(&mut self, o: &Self) {
        self.re += &o.re;
        self.im += &o.im;
    }

    pub fn assign(&mut self, o: &Self) {
        self.re.assign(&o.re);
        self.im.assign(&o.im);
    }

    pub fn round_to(&self, prec: u32) -> Self {
        ensure_exponent_range();
        BigComplex { re: Float::with_val(prec, &self.re), im: Float::with_val(prec, &self.im) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wide_exponents_survive() {
        let x = BigComplex::from_f64(1e-300, 0.0, 64);
        let mut y = x.clone();
        for _ in 0..12 {
            y = y.sqr();
        }
        assert!(!y.is_zero());
        let expect = 4096.0 * (1e-300f64).log2();
        assert!((y.log2_abs() - expect).abs() < 1e-6 * expect.abs());
    }

    #[test]
    fn division_roundtrip() {
        let a = BigComplex::from_f64(1.5, -2.0, 128);
        let b = BigComplex::from_f64(-0.25, 3.0, 128);
        let q = a.div(&b).unwrap();
        assert!(q.mul(&b).rel_dist(&a) < 1e-35);
    }

    #[test]
    fn sqrt_and_log() {
        let a = BigComplex::from_f64(-4.0, 0.0, 100);
        let s = a.sqrt();
        assert!(s.rel_dist(&BigComplex::from_f64(0.0, 2.0, 100)) < 1e-28);
        let z = BigComplex::from_f64(0.3, 0.7, 100);
        assert!(z.ln().exp().rel_dist(&z) < 1e-28);
    }
}
