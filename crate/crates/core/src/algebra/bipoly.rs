use std::collections::BTreeMap;
use std::fmt;

use super::unipoly::UniPoly;
use crate::scalar::{Coeff, GaussRat};

/// Exponent pair `(r, s)` of the monomial `z^r w^s`.
pub type Exps = (u32, u32);

/// Sparse bivariate polynomial in `z` and `w`.
///
/// Zero coefficients are never stored, so the support is exactly the key set.
#[derive(Clone, Debug, PartialEq)]
pub struct BiPoly<C> {
    terms: BTreeMap<Exps, C>,
}

impl<C: Coeff> Default for BiPoly<C> {
    fn default() -> Self {
        BiPoly::zero()
    }
}

impl<C: Coeff> BiPoly<C> {
    pub fn zero() -> Self {
        BiPoly { terms: BTreeMap::new() }
    }

    pub fn constant(c: C) -> Self {
        BiPoly::monomial(c, 0, 0)
    }

    pub fn monomial(c: C, r: u32, s: u32) -> Self {
        let mut p = BiPoly::zero();
        p.add_term((r, s), c);
        p
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Exps, C)>) -> Self {
        let mut p = BiPoly::zero();
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    /// Adds `c * z^r w^s`, dropping the entry if it cancels.
    pub fn add_term(&mut self, e: Exps, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.remove(&e) {
            Some(old) => {
                let s = old.add(&c);
                if !s.is_zero() {
                    self.terms.insert(e, s);
                }
            }
            None => {
                self.terms.insert(e, c);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exps, &C)> {
        self.terms.iter()
    }

    pub fn coeff(&self, r: u32, s: u32) -> Option<&C> {
        self.terms.get(&(r, s))
    }

    pub fn support(&self) -> Vec<Exps> {
        self.terms.keys().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; `None` stands for the sentinel `-inf` of the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|&(r, s)| r + s).max()
    }

    pub fn deg_z(&self) -> Option<u32> {
        self.terms.keys().map(|&(r, _)| r).max()
    }

    pub fn deg_w(&self) -> Option<u32> {
        self.terms.keys().map(|&(_, s)| s).max()
    }

    /// Some coefficient, used as a prototype for constants.
    pub fn any_coeff(&self) -> Option<&C> {
        self.terms.values().next()
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut p = self.clone();
        for (e, c) in &o.terms {
            p.add_term(*e, c.clone());
        }
        p
    }

    pub fn neg(&self) -> Self {
        BiPoly { terms: self.terms.iter().map(|(e, c)| (*e, c.neg())).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut p = BiPoly::zero();
        for (&(r1, s1), a) in &self.terms {
            for (&(r2, s2), b) in &o.terms {
                p.add_term((r1 + r2, s1 + s2), a.mul(b));
            }
        }
        p
    }

    pub fn scale(&self, c: &C) -> Self {
        BiPoly::from_terms(self.terms.iter().map(|(e, a)| (*e, a.mul(c))))
    }

    /// `self^e`; `one` supplies the unit for `e = 0`.
    pub fn pow(&self, e: u32, one: &C) -> Self {
        let mut acc = BiPoly::constant(one.clone());
        let mut base = self.clone();
        let mut k = e;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Value at `(z, w)`, summing monomials in ascending magnitude.
    pub fn eval(&self, z: &C, w: &C) -> C {
        let Some(dz) = self.deg_z() else {
            return z.zero_like();
        };
        let dw = self.deg_w().unwrap_or(0);
        let zp = powers(z, dz);
        let wp = powers(w, dw);
        let mut addends: Vec<C> = self
            .terms
            .iter()
            .map(|(&(r, s), c)| c.mul(&zp[r as usize]).mul(&wp[s as usize]))
            .collect();
        sum_balanced(&mut addends, z)
    }

    /// Homogeneous part of total degree `k`.
    pub fn homogeneous_part(&self, k: u32) -> Self {
        BiPoly::from_terms(
            self.terms
                .iter()
                .filter(|(&(r, s), _)| r + s == k)
                .map(|(e, c)| (*e, c.clone())),
        )
    }

    /// `p^+(t, 1)`: the top-degree homogeneous part with `z -> t`, `w -> 1`.
    pub fn top_form(&self) -> Option<UniPoly<C>> {
        let d = self.degree()?;
        let proto = self.any_coeff()?.zero_like();
        let mut coeffs = vec![proto; d as usize + 1];
        for (&(r, s), c) in &self.terms {
            if r + s == d {
                coeffs[r as usize] = c.clone();
            }
        }
        Some(UniPoly::new(coeffs))
    }

    /// `p(z + a*w, w)`, expanded.
    pub fn translate_var(&self, a: &C) -> Self {
        let mut out = BiPoly::zero();
        for (&(r, s), c) in &self.terms {
            let ap = powers(a, r);
            for k in 0..=r {
                let b = binomial(r, k);
                let coef = c.mul(&ap[(r - k) as usize]).mul_i64(b);
                out.add_term((k, s + r - k), coef);
            }
        }
        out
    }

    /// Views the polynomial as `sum_s c_s(z) w^s` and returns `[c_0, c_1, ...]`.
    pub fn coeffs_in_w(&self) -> Vec<UniPoly<C>> {
        let Some(dw) = self.deg_w() else {
            return Vec::new();
        };
        let dz = self.deg_z().unwrap_or(0) as usize;
        let proto = self.any_coeff().unwrap().zero_like();
        let mut rows = vec![vec![proto; dz + 1]; dw as usize + 1];
        for (&(r, s), c) in &self.terms {
            rows[s as usize][r as usize] = c.clone();
        }
        rows.into_iter().map(UniPoly::new).collect()
    }

    /// Partial derivative in `z`.
    pub fn d_z(&self) -> Self {
        BiPoly::from_terms(
            self.terms
                .iter()
                .filter(|(&(r, _), _)| r > 0)
                .map(|(&(r, s), c)| ((r - 1, s), c.mul_i64(r as i64))),
        )
    }

    /// Partial derivative in `w`.
    pub fn d_w(&self) -> Self {
        BiPoly::from_terms(
            self.terms
                .iter()
                .filter(|(&(_, s), _)| s > 0)
                .map(|(&(r, s), c)| ((r, s - 1), c.mul_i64(s as i64))),
        )
    }

    pub fn map<D: Coeff>(&self, f: impl Fn(&C) -> D) -> BiPoly<D> {
        BiPoly::from_terms(self.terms.iter().map(|(e, c)| (*e, f(c))))
    }
}

impl BiPoly<GaussRat> {
    /// Converts the exact coefficients into another backend.
    pub fn convert<D: Coeff>(&self, like: &D) -> BiPoly<D> {
        self.map(|c| D::from_gauss(c, like))
    }

    pub fn var_z() -> Self {
        BiPoly::monomial(GaussRat::one(), 1, 0)
    }

    pub fn var_w() -> Self {
        BiPoly::monomial(GaussRat::one(), 0, 1)
    }
}

/// `[1, x, x^2, ..., x^n]`.
pub fn powers<C: Coeff>(x: &C, n: u32) -> Vec<C> {
    let mut v = Vec::with_capacity(n as usize + 1);
    v.push(x.one_like());
    for k in 1..=n as usize {
        let next = v[k - 1].mul(x);
        v.push(next);
    }
    v
}

/// Sums addends in ascending order of magnitude key.
pub fn sum_balanced<C: Coeff>(addends: &mut [C], like: &C) -> C {
    if addends.len() > 1 && addends.iter().any(|a| a.sort_key() != 0.0) {
        addends.sort_by(|a, b| a.sort_key().total_cmp(&b.sort_key()));
    }
    let mut acc = like.zero_like();
    for a in addends.iter() {
        acc = acc.add(a);
    }
    acc
}

pub fn binomial(n: u32, k: u32) -> i64 {
    let k = k.min(n - k);
    let mut b: i64 = 1;
    for j in 0..k {
        b = b * (n - j) as i64 / (j + 1) as i64;
    }
    b
}

fn fmt_mono(f: &mut fmt::Formatter<'_>, r: u32, s: u32) -> fmt::Result {
    let mut parts = Vec::new();
    match r {
        0 => {}
        1 => parts.push("z".to_string()),
        _ => parts.push(format!("z^{r}")),
    }
    match s {
        0 => {}
        1 => parts.push("w".to_string()),
        _ => parts.push(format!("w^{s}")),
    }
    write!(f, "{}", parts.join("*"))
}

impl fmt::Display for BiPoly<GaussRat> {
    /// Prints in the map-file expression grammar; reparsing gives the same support.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (&(r, s), c)) in self.terms.iter().rev().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            if r == 0 && s == 0 {
                write!(f, "{c}")?;
            } else if *c == GaussRat::one() {
                fmt_mono(f, r, s)?;
            } else {
                write!(f, "{c}*")?;
                fmt_mono(f, r, s)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z() -> BiPoly<GaussRat> {
        BiPoly::var_z()
    }
    fn w() -> BiPoly<GaussRat> {
        BiPoly::var_w()
    }
    fn one() -> GaussRat {
        GaussRat::one()
    }

    #[test]
    fn expansion_of_e1_first_coordinate() {
        let p = z().pow(2, &one()).mul(&w().sub(&z()).pow(2, &one()));
        assert_eq!(p.support(), vec![(2, 2), (3, 1), (4, 0)]);
        assert_eq!(p.coeff(3, 1), Some(&GaussRat::from_int(-2)));
        assert_eq!(p.degree(), Some(4));
    }

    #[test]
    fn zero_polynomial_has_no_degree() {
        let p = z().sub(&z());
        assert!(p.is_zero());
        assert_eq!(p.degree(), None);
        assert_eq!(p.eval(&GaussRat::from_int(3), &GaussRat::from_int(1)), GaussRat::zero());
    }

    #[test]
    fn top_form_examples() {
        let p = z().pow(2, &one()).mul(&w().sub(&z()).pow(2, &one()));
        let t = p.top_form().unwrap();
        let expect: Vec<GaussRat> = [0, 0, 1, -2, 1].iter().map(|&n| GaussRat::from_int(n)).collect();
        assert_eq!(t.coeffs(), expect.as_slice());
        let q = w().pow(2, &one()).add(&z().pow(3, &one()));
        assert_eq!(q.top_form().unwrap().degree(), Some(3));
        let c = BiPoly::constant(GaussRat::from_int(5));
        assert_eq!(c.top_form().unwrap().coeffs(), &[GaussRat::from_int(5)]);
    }

    #[test]
    fn translation_examples() {
        assert_eq!(z().translate_var(&one()), z().add(&w()));
        let p = z().pow(2, &one()).mul(&w().sub(&z()).pow(2, &one()));
        let expect = z().add(&w()).pow(2, &one()).mul(&z().pow(2, &one()));
        assert_eq!(p.translate_var(&one()), expect);
        let w3 = w().pow(3, &one());
        assert_eq!(w3.translate_var(&GaussRat::from_int(7)), w3);
    }

    #[test]
    fn eval_examples() {
        let p = z().pow(2, &one()).mul(&w().sub(&z()).pow(2, &one()));
        assert_eq!(p.eval(&GaussRat::from_int(1), &GaussRat::from_int(2)), GaussRat::one());
        let q = w().pow(2, &one()).add(&z().pow(3, &one()));
        assert_eq!(q.eval(&GaussRat::from_int(2), &GaussRat::from_int(3)), GaussRat::from_int(17));
    }

    #[test]
    fn partial_derivatives() {
        let p = z().pow(3, &one()).mul(&w().pow(2, &one()));
        assert_eq!(p.d_z(), BiPoly::monomial(GaussRat::from_int(3), 2, 2));
        assert_eq!(p.d_w(), BiPoly::monomial(GaussRat::from_int(2), 3, 1));
    }
}
