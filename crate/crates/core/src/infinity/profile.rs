use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rug::{Integer, Rational};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use super::newton::{newton_certificate, NewtonCertificate, NewtonError};
use super::PlaneMap;
use crate::algebra::roots::EXACT_ROOT_BITS;
use crate::algebra::{resultant_w, roots_with_multiplicity_exact, BiPoly, Exps, RootError, RootValue};
use crate::scalar::{BigComplex, GaussRat};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InfinityError {
    #[error("X = [1:0:0] is indeterminate: the coefficient of z^{0} in f1 vanishes")]
    XIndeterminate(u32),
    #[error(transparent)]
    Roots(#[from] RootError),
    #[error("indeterminacy point {index}: {source}")]
    Newton {
        index: usize,
        #[source]
        source: NewtonError,
    },
    #[error("degenerate target ({0}, {1}) for the topological degree")]
    Degenerate(String, String),
    #[error("no generic target found after {0} attempts")]
    NoGenericTarget(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EllSource {
    Newton,
    Empirical,
    User,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndPoint {
    /// Position `a` of `[a:1:0]` in the chart `u = z/w`.
    pub u_pos: RootValue,
    pub d_i: u32,
    /// Certified or user supplied exponent; `None` when undetermined.
    pub ell: Option<u32>,
    /// Fitted exponent for points without a certificate.
    pub ell_estimate: Option<f64>,
    pub certificate: Option<NewtonCertificate>,
    pub ell_source: EllSource,
    /// Why the Newton search failed, when it did.
    pub newton_failure: Option<String>,
    /// The support after translation was read off a 212-bit approximation.
    pub numeric_support: bool,
}

impl IndPoint {
    /// Exponent as a real, preferring the exact value.
    pub fn ell_value(&self) -> Option<f64> {
        self.ell.map(f64::from).or(self.ell_estimate)
    }

    pub fn u_f64(&self) -> (f64, f64) {
        self.u_pos.to_f64()
    }
}

pub fn serialize_root_value<S: Serializer>(r: &RootValue, s: S) -> Result<S::Ok, S::Error> {
    let mut st = s.serialize_struct("Complex", 3)?;
    match r {
        RootValue::Exact(g) => {
            st.serialize_field("re", &g.re_string())?;
            st.serialize_field("im", &g.im_string())?;
            st.serialize_field("exact", &true)?;
        }
        RootValue::Approx(z) => {
            let (re, im) = z.to_f64();
            st.serialize_field("re", &re)?;
            st.serialize_field("im", &im)?;
            st.serialize_field("exact", &false)?;
        }
    }
    st.end()
}

impl Serialize for IndPoint {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        struct U<'a>(&'a RootValue);
        impl Serialize for U<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                serialize_root_value(self.0, s)
            }
        }
        let mut st = s.serialize_struct("IndPoint", 8)?;
        st.serialize_field("u_pos", &U(&self.u_pos))?;
        st.serialize_field("d_i", &self.d_i)?;
        match self.ell {
            Some(l) => st.serialize_field("ell_i", &format!("{l}/1"))?,
            None => st.serialize_field("ell_i", "undetermined")?,
        }
        st.serialize_field("ell_estimate", &self.ell_estimate)?;
        st.serialize_field("certificate", &self.certificate)?;
        st.serialize_field("ell_source", &self.ell_source)?;
        st.serialize_field("newton_failure", &self.newton_failure)?;
        st.serialize_field("numeric_support", &self.numeric_support)?;
        st.end()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Pluripolar,
    Continuous,
    Critical,
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum FormulaCheck {
    Verified,
    Failed { expected: u64, got: u64 },
    Unavailable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InfinityProfile {
    pub points: Vec<IndPoint>,
    pub d: u32,
    pub d_t: u64,
    pub generic_rate: Option<f64>,
    pub rho: Option<f64>,
    pub regime: Regime,
    pub formula_check: FormulaCheck,
    /// Resultant degrees of the sampled targets.
    pub degree_votes: Vec<u64>,
    pub seed: u64,
}

impl InfinityProfile {
    pub fn m(&self) -> usize {
        self.points.len()
    }

    pub fn local_degrees(&self) -> Vec<u32> {
        self.points.iter().map(|p| p.d_i).collect()
    }

    /// Exponents as reals; `None` if any is unknown.
    pub fn exponents(&self) -> Option<Vec<f64>> {
        self.points.iter().map(|p| p.ell_value()).collect()
    }
}

/// Roots of `f1^+(t, 1)` with multiplicities, the exponent fields left empty.
pub fn indeterminacy_points(f: &PlaneMap) -> Result<Vec<IndPoint>, InfinityError> {
    if f.f1.coeff(f.d, 0).is_none() {
        return Err(InfinityError::XIndeterminate(f.d));
    }
    let top = f.f1.top_form().expect("nonzero f1");
    let mut roots = roots_with_multiplicity_exact(&top)?;
    roots.sort_by(|a, b| {
        let (x, y) = (a.0.to_f64(), b.0.to_f64());
        let key = |p: (f64, f64)| (p.0 * p.0 + p.1 * p.1, p.0, p.1);
        let (kx, ky) = (key(x), key(y));
        kx.partial_cmp(&ky).unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(roots
        .into_iter()
        .map(|(u_pos, mult)| IndPoint {
            u_pos,
            d_i: mult as u32,
            ell: None,
            ell_estimate: None,
            certificate: None,
            ell_source: EllSource::Empirical,
            newton_failure: None,
            numeric_support: false,
        })
        .collect())
}

/// Certificate for the indeterminacy point `[0:1:0]`.
pub fn newton_exponent(f1: &BiPoly<GaussRat>, f2: &BiPoly<GaussRat>, d: u32) -> Result<NewtonCertificate, NewtonError> {
    newton_certificate(&f1.support(), &f2.support(), d)
}

fn numeric_support(p: &BiPoly<BigComplex>) -> Vec<Exps> {
    let top = p.terms().map(|(_, c)| c.log2_abs()).fold(f64::NEG_INFINITY, f64::max);
    let cut = top - (EXACT_ROOT_BITS as f64) * 0.7;
    p.terms().filter(|(_, c)| c.log2_abs() > cut).map(|(e, _)| *e).collect()
}

fn complete_point(f: &PlaneMap, index: usize, mut p: IndPoint) -> Result<IndPoint, InfinityError> {
    let res = match &p.u_pos {
        RootValue::Exact(a) => {
            let (g1, g2) = f.translated(a);
            newton_exponent(&g1, &g2, f.d)
        }
        RootValue::Approx(a) => {
            let (b1, b2) = f.to_big(EXACT_ROOT_BITS);
            let (g1, g2) = (b1.translate_var(a), b2.translate_var(a));
            p.numeric_support = true;
            newton_certificate(&numeric_support(&g1), &numeric_support(&g2), f.d)
        }
    };
    match res {
        Ok(cert) => {
            assert!(cert.ell() < f.d, "certified exponent {} exceeds d - 1", cert.ell());
            p.ell = Some(cert.ell());
            p.certificate = Some(cert);
            p.ell_source = EllSource::Newton;
        }
        Err(NewtonError::HypothesesNotMet(fail)) => {
            p.newton_failure = Some(fail.describe().to_string());
            p.ell_source = EllSource::Empirical;
        }
        Err(e @ NewtonError::Ambiguous(_)) => return Err(InfinityError::Newton { index, source: e }),
    }
    Ok(p)
}

/// Indeterminacy points with their Newton exponents.
pub fn escape_exponents(f: &PlaneMap) -> Result<Vec<IndPoint>, InfinityError> {
    let pts = indeterminacy_points(f)?;
    pts.into_par_iter().enumerate().map(|(i, p)| complete_point(f, i, p)).collect()
}

/// Degree of `Res_w(f1 - q1, f2 - q2)`.
pub fn topological_degree(f: &PlaneMap, q: &(GaussRat, GaussRat)) -> Result<u64, InfinityError> {
    let p1 = f.f1.sub(&BiPoly::constant(q.0.clone()));
    let p2 = f.f2.sub(&BiPoly::constant(q.1.clone()));
    let r = resultant_w(&p1, &p2);
    match r.degree() {
        Some(k) => Ok(k as u64),
        None => Err(InfinityError::Degenerate(q.0.to_string(), q.1.to_string())),
    }
}

fn random_gauss(rng: &mut ChaCha8Rng) -> GaussRat {
    let re = Rational::from((rng.gen_range(-97i64..=97), rng.gen_range(1i64..=31)));
    let im = Rational::from((rng.gen_range(-97i64..=97), rng.gen_range(1i64..=31)));
    GaussRat::new(re, im)
}

/// Resultant degree agreed on by two independent random targets, retried up
/// to five times.
pub fn topological_degree_random(f: &PlaneMap, rng: &mut ChaCha8Rng) -> Result<u64, InfinityError> {
    const ATTEMPTS: usize = 5;
    for _ in 0..ATTEMPTS {
        let q = (random_gauss(rng), random_gauss(rng));
        let q2 = (random_gauss(rng), random_gauss(rng));
        match (topological_degree(f, &q), topological_degree(f, &q2)) {
            (Ok(a), Ok(b)) if a == b => return Ok(a),
            _ => continue,
        }
    }
    Err(InfinityError::NoGenericTarget(ATTEMPTS))
}

/// Exact comparison of `prod l_i^{d_i}` with `prod d_i^{d_i}`.
fn regime_exact(ells: &[u32], ds: &[u32]) -> Regime {
    let mut num = Integer::from(1);
    let mut den = Integer::from(1);
    for (&l, &d) in ells.iter().zip(ds) {
        num *= Integer::from(Integer::u_pow_u(l, d));
        den *= Integer::from(Integer::u_pow_u(d, d));
    }
    match num.cmp(&den) {
        std::cmp::Ordering::Greater => Regime::Pluripolar,
        std::cmp::Ordering::Less => Regime::Continuous,
        std::cmp::Ordering::Equal => Regime::Critical,
    }
}

pub fn profile(f: &PlaneMap) -> Result<InfinityProfile, InfinityError> {
    profile_with_seed(f, 0)
}

/// Full profile; the seed drives the random resultant targets.
pub fn profile_with_seed(f: &PlaneMap, seed: u64) -> Result<InfinityProfile, InfinityError> {
    let points = escape_exponents(f)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut votes = Vec::with_capacity(3);
    for _ in 0..3 {
        votes.push(topological_degree_random(f, &mut rng)?);
    }
    let d_t = majority(&votes);
    let ds: Vec<u32> = points.iter().map(|p| p.d_i).collect();
    let d = f.d;
    let logs = |g: &dyn Fn(&IndPoint) -> Option<f64>| -> Option<f64> {
        let mut acc = 0.0;
        for p in &points {
            acc += p.d_i as f64 / d as f64 * g(p)?.ln();
        }
        Some(acc)
    };
    let generic_rate = logs(&|p| p.ell_value()).map(f64::exp);
    let rho = logs(&|p| p.ell_value().map(|l| l / p.d_i as f64)).map(f64::exp);
    let exact: Option<Vec<u32>> = points.iter().map(|p| p.ell).collect();
    let regime = match (&exact, rho) {
        (Some(ells), _) => regime_exact(ells, &ds),
        (None, Some(r)) if r > 1.0 => Regime::Pluripolar,
        (None, Some(r)) if r < 1.0 => Regime::Continuous,
        _ => Regime::Undetermined,
    };
    let formula_check = match &exact {
        Some(ells) => {
            let expected: u64 = ells.iter().zip(&ds).map(|(&l, &di)| l as u64 * di as u64).sum();
            if expected == d_t {
                FormulaCheck::Verified
            } else {
                FormulaCheck::Failed { expected, got: d_t }
            }
        }
        None => FormulaCheck::Unavailable,
    };
    Ok(InfinityProfile { points, d, d_t, generic_rate, rho, regime, formula_check, degree_votes: votes, seed })
}

fn majority(v: &[u64]) -> u64 {
    let mut best = (v[0], 0);
    for &x in v {
        let c = v.iter().filter(|&&y| y == x).count();
        if c > best.1 {
            best = (x, c);
        }
    }
    best.0
}
