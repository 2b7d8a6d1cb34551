use std::fmt;

use crate::scalar::Coeff;

/// Dense univariate polynomial, coefficients in ascending degree.
#[derive(Clone, Debug, PartialEq)]
pub struct UniPoly<C> {
    coeffs: Vec<C>,
}

impl<C: Coeff> UniPoly<C> {
    pub fn new(mut coeffs: Vec<C>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn zero() -> Self {
        UniPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: C) -> Self {
        UniPoly::new(vec![c])
    }

    /// The monomial `t`, with coefficients shaped like `like`.
    pub fn var(like: &C) -> Self {
        UniPoly::new(vec![like.zero_like(), like.one_like()])
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, k: usize) -> Option<&C> {
        self.coeffs.get(k)
    }

    pub fn leading(&self) -> Option<&C> {
        self.coeffs.last()
    }

    /// Horner evaluation.
    pub fn eval(&self, x: &C) -> C {
        let mut it = self.coeffs.iter().rev();
        let Some(first) = it.next() else {
            return x.zero_like();
        };
        let mut acc = first.clone();
        for c in it {
            acc = acc.mul(x).add(c);
        }
        acc
    }

    /// Value and first derivative by Horner.
    pub fn eval_with_deriv(&self, x: &C) -> (C, C) {
        let mut it = self.coeffs.iter().rev();
        let Some(first) = it.next() else {
            return (x.zero_like(), x.zero_like());
        };
        let mut p = first.clone();
        let mut dp = x.zero_like();
        for c in it {
            dp = dp.mul(x).add(&p);
            p = p.mul(x).add(c);
        }
        (p, dp)
    }

    pub fn derivative(&self) -> Self {
        UniPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c.mul_i64(k as i64))
                .collect(),
        )
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            out.push(match (self.coeffs.get(k), o.coeffs.get(k)) {
                (Some(a), Some(b)) => a.add(b),
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b.clone(),
                (None, None) => unreachable!(),
            });
        }
        UniPoly::new(out)
    }

    pub fn neg(&self) -> Self {
        UniPoly { coeffs: self.coeffs.iter().map(|c| c.neg()).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return UniPoly::zero();
        }
        let z = self.coeffs[0].zero_like();
        let mut out = vec![z; self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        UniPoly::new(out)
    }

    pub fn scale(&self, c: &C) -> Self {
        UniPoly::new(self.coeffs.iter().map(|a| a.mul(c)).collect())
    }

    pub fn pow(&self, e: u32) -> Self {
        let one = match self.coeffs.first() {
            Some(c) => UniPoly::constant(c.one_like()),
            None => return if e == 0 { panic!("0^0 is undefined for the zero polynomial") } else { UniPoly::zero() },
        };
        let mut acc = one;
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Euclidean division over a field; `None` when dividing by zero.
    pub fn div_rem(&self, d: &Self) -> Option<(Self, Self)> {
        let dd = d.degree()?;
        let lc_inv = d.leading()?.inv()?;
        let mut r = self.coeffs.clone();
        let Some(nd) = self.degree() else {
            return Some((UniPoly::zero(), UniPoly::zero()));
        };
        if nd < dd {
            return Some((UniPoly::zero(), self.clone()));
        }
        let zero = d.coeffs[0].zero_like();
        let mut q = vec![zero; nd - dd + 1];
        for k in (dd..=nd).rev() {
            let c = r[k].mul(&lc_inv);
            if c.is_zero() {
                continue;
            }
            for (j, dc) in d.coeffs.iter().enumerate() {
                r[k - dd + j] = r[k - dd + j].sub(&c.mul(dc));
            }
            q[k - dd] = c;
        }
        r.truncate(dd);
        Some((UniPoly::new(q), UniPoly::new(r)))
    }

    /// Exact quotient in a polynomial ring over a field, `None` if not divisible.
    pub fn div_exact(&self, d: &Self) -> Option<Self> {
        let (q, r) = self.div_rem(d)?;
        r.is_zero().then_some(q)
    }

    pub fn monic(&self) -> Self {
        match self.leading().and_then(|c| c.inv()) {
            Some(inv) => self.scale(&inv),
            None => self.clone(),
        }
    }

    /// Monic greatest common divisor by the Euclidean algorithm (exact fields).
    pub fn gcd(&self, o: &Self) -> Self {
        let mut a = self.clone();
        let mut b = o.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b).expect("nonzero divisor");
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Coefficient map into another field.
    pub fn map<D: Coeff>(&self, f: impl Fn(&C) -> D) -> UniPoly<D> {
        UniPoly::new(self.coeffs.iter().map(f).collect())
    }
}

impl<C: Coeff + fmt::Display> fmt::Display for UniPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}*t")?,
                _ => write!(f, "{c}*t^{k}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::GaussRat;

    fn q(v: &[i64]) -> UniPoly<GaussRat> {
        UniPoly::new(v.iter().map(|&n| GaussRat::from_int(n)).collect())
    }

    #[test]
    fn trims_and_degrees() {
        assert_eq!(q(&[1, 2, 0, 0]).degree(), Some(1));
        assert_eq!(q(&[0, 0]).degree(), None);
    }

    #[test]
    fn division_identity() {
        let a = q(&[1, 0, -3, 2, 5]);
        let b = q(&[2, 1, 1]);
        let (qq, r) = a.div_rem(&b).unwrap();
        assert_eq!(qq.mul(&b).add(&r), a);
        assert!(r.degree().unwrap_or(0) < 2);
    }

    #[test]
    fn gcd_of_shared_factor() {
        let f = q(&[-1, 1]);
        let a = f.mul(&q(&[2, 0, 1]));
        let b = f.mul(&q(&[3, 1]));
        assert_eq!(a.gcd(&b), f);
    }

    #[test]
    fn derivative_and_eval() {
        let p = q(&[1, 2, 3]);
        assert_eq!(p.derivative(), q(&[2, 6]));
        let (v, dv) = p.eval_with_deriv(&GaussRat::from_int(2));
        assert_eq!(v, GaussRat::from_int(17));
        assert_eq!(dv, GaussRat::from_int(14));
    }
}
