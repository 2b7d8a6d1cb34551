use std::cmp::Ordering;
use std::fmt;

use rug::{Integer, Rational};

/// Exact Gaussian rational `re + im*i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct GaussRat {
    pub re: Rational,
    pub im: Rational,
}

impl GaussRat {
    pub fn new(re: Rational, im: Rational) -> Self {
        GaussRat { re, im }
    }

    pub fn from_int(n: i64) -> Self {
        GaussRat::new(Rational::from(n), Rational::new())
    }

    pub fn from_ratio(p: i64, q: i64) -> Self {
        GaussRat::new(Rational::from((p, q)), Rational::new())
    }

    pub fn i() -> Self {
        GaussRat::new(Rational::new(), Rational::from(1))
    }

    pub fn zero() -> Self {
        GaussRat::default()
    }

    pub fn one() -> Self {
        GaussRat::from_int(1)
    }

    pub fn is_zero(&self) -> bool {
        self.re.cmp0() == Ordering::Equal && self.im.cmp0() == Ordering::Equal
    }

    pub fn is_real(&self) -> bool {
        self.im.cmp0() == Ordering::Equal
    }

    pub fn add(&self, o: &Self) -> Self {
        GaussRat::new(Rational::from(&self.re + &o.re), Rational::from(&self.im + &o.im))
    }

    pub fn sub(&self, o: &Self) -> Self {
        GaussRat::new(Rational::from(&self.re - &o.re), Rational::from(&self.im - &o.im))
    }

    pub fn mul(&self, o: &Self) -> Self {
        let rr = Rational::from(&self.re * &o.re);
        let ii = Rational::from(&self.im * &o.im);
        let ri = Rational::from(&self.re * &o.im);
        let ir = Rational::from(&self.im * &o.re);
        GaussRat::new(rr - ii, ri + ir)
    }

    pub fn neg(&self) -> Self {
        GaussRat::new(Rational::from(-&self.re), Rational::from(-&self.im))
    }

    pub fn conj(&self) -> Self {
        GaussRat::new(self.re.clone(), Rational::from(-&self.im))
    }

    /// Squared modulus, always rational.
    pub fn norm_sqr(&self) -> Rational {
        Rational::from(self.re.square_ref()) + Rational::from(self.im.square_ref())
    }

    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm_sqr();
        Some(GaussRat::new(
            Rational::from(&self.re / &n),
            Rational::from(-&self.im) / &n,
        ))
    }

    pub fn div(&self, o: &Self) -> Option<Self> {
        o.inv().map(|x| self.mul(&x))
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = GaussRat::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }

    /// Least common multiple of the denominators of both parts.
    pub fn denom_lcm(&self) -> Integer {
        self.re.denom().clone().lcm(self.im.denom())
    }

    /// Rounds each part to the nearest integer.
    pub fn round_gauss_int(re: &Rational, im: &Rational) -> GaussRat {
        let r = Rational::from(Integer::from(re.round_ref()));
        let i = Rational::from(Integer::from(im.round_ref()));
        GaussRat::new(r, i)
    }

    /// Serializes as `"p/q"` pairs used by reports.
    pub fn re_string(&self) -> String {
        rat_string(&self.re)
    }

    pub fn im_string(&self) -> String {
        rat_string(&self.im)
    }
}

impl serde::Serialize for GaussRat {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("GaussRat", 2)?;
        st.serialize_field("re", &self.re_string())?;
        st.serialize_field("im", &self.im_string())?;
        st.end()
    }
}

pub fn rat_string(q: &Rational) -> String {
    if *q.denom() == 1 {
        format!("{}/1", q.numer())
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

fn fmt_rat(q: &Rational) -> String {
    if *q.denom() == 1 {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl fmt::Display for GaussRat {
    /// Prints in the expression grammar, parenthesized unless a plain non-negative rational.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let re0 = self.re.cmp0() == Ordering::Equal;
        let im0 = self.im.cmp0() == Ordering::Equal;
        match (re0, im0) {
            (_, true) => {
                if self.re.cmp0() == Ordering::Less {
                    write!(f, "({})", fmt_rat(&self.re))
                } else {
                    write!(f, "{}", fmt_rat(&self.re))
                }
            }
            (true, false) => write!(f, "({}*i)", fmt_rat(&self.im)),
            (false, false) => write!(f, "({} + {}*i)", fmt_rat(&self.re), fmt_rat(&self.im)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_ops() {
        let a = GaussRat::new(Rational::from((1, 2)), Rational::from(3));
        let b = GaussRat::new(Rational::from(-2), Rational::from((1, 3)));
        let q = a.div(&b).unwrap();
        assert_eq!(q.mul(&b), a);
        assert_eq!(a.add(&b).sub(&b), a);
        assert!(GaussRat::zero().inv().is_none());
    }

    #[test]
    fn i_squared() {
        assert_eq!(GaussRat::i().mul(&GaussRat::i()), GaussRat::from_int(-1));
        assert_eq!(GaussRat::i().pow(4), GaussRat::one());
    }

    #[test]
    fn display() {
        assert_eq!(GaussRat::from_ratio(-1, 2).to_string(), "(-1/2)");
        assert_eq!(GaussRat::i().to_string(), "(1*i)");
        assert_eq!(GaussRat::from_int(7).to_string(), "7");
    }
}
