//! Univariate roots with multiplicities.
//!
//! The floating path is Aberth–Ehrlich simultaneous iteration started from
//! the Newton polygon of the coefficient moduli. The exact path splits the
//! polynomial by Yun's squarefree decomposition, solves each factor
//! numerically and recognizes Gaussian rational roots exactly.

use rug::{Integer, Rational};
use thiserror::Error;

use super::unipoly::UniPoly;
use crate::scalar::{BigComplex, CFloat, GaussRat};

/// Working precision for roots of exact polynomials.
pub const EXACT_ROOT_BITS: u32 = 212;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RootError {
    #[error("root finder did not converge within {0} iterations")]
    NonConvergence(usize),
    #[error("zero polynomial has no well-defined roots")]
    ZeroPolynomial,
}

/// A root of an exact polynomial, exact when it is a Gaussian rational.
#[derive(Debug, Clone, PartialEq)]
pub enum RootValue {
    Exact(GaussRat),
    Approx(BigComplex),
}

impl RootValue {
    pub fn is_exact(&self) -> bool {
        matches!(self, RootValue::Exact(_))
    }

    pub fn to_big(&self, prec: u32) -> BigComplex {
        match self {
            RootValue::Exact(g) => BigComplex::from_gauss(g, prec),
            RootValue::Approx(z) => z.with_prec(prec),
        }
    }

    pub fn to_f64(&self) -> (f64, f64) {
        match self {
            RootValue::Exact(g) => g.to_f64(),
            RootValue::Approx(z) => z.to_f64(),
        }
    }
}

/// Simultaneous approximation of all roots (with repetition) of `p`.
pub fn aberth<C: CFloat>(p: &UniPoly<C>, max_iter: usize) -> Result<Vec<C>, RootError> {
    let n = p.degree().ok_or(RootError::ZeroPolynomial)?;
    let coeffs = p.coeffs();
    let like = coeffs[0].clone();
    let low = coeffs.iter().take_while(|c| c.is_zero()).count();
    let mut out: Vec<C> = (0..low).map(|_| like.zero_like()).collect();
    if low == n {
        return Ok(out);
    }
    let q = UniPoly::new(coeffs[low..].to_vec());
    let m = n - low;
    if m == 1 {
        let c = q.coeffs();
        out.push(c[0].neg().div(&c[1]).expect("nonzero leading coefficient"));
        return Ok(out);
    }
    let dq = q.derivative();
    let mut z = initial_guesses(&q);
    let mut done = vec![false; m];
    let eps = like.eps();
    // Moduli of coefficients, for the backward-error stopping test.
    let mods: Vec<f64> = q.coeffs().iter().map(|c| c.log2_abs()).collect();
    for _ in 0..max_iter {
        let mut all = true;
        for k in 0..m {
            if done[k] {
                continue;
            }
            let (v, dv) = (q.eval(&z[k]), dq.eval(&z[k]));
            if v.is_zero() || below_rounding(&v, &z[k], &mods, eps) {
                done[k] = true;
                continue;
            }
            all = false;
            let Some(newton) = v.div(&dv) else {
                // Critical point: nudge off it.
                z[k] = z[k].add(&C::from_f64(eps.sqrt(), eps.sqrt(), &like).mul(&z[k].add(&like.one_like())));
                continue;
            };
            let mut s = like.zero_like();
            for j in 0..m {
                if j != k {
                    match z[k].sub(&z[j]).inv() {
                        Some(r) => s = s.add(&r),
                        None => z[k] = z[k].add(&C::from_f64(eps.sqrt(), 0.0, &like).mul(&z[k].add(&like.one_like()))),
                    }
                }
            }
            let denom = like.one_like().sub(&newton.mul(&s));
            let w = newton.div(&denom).unwrap_or(newton.clone());
            z[k] = z[k].sub(&w);
            // A small Aberth step alone can mean two iterates stuck together.
            if newton.log2_abs() <= z[k].log2_abs() + (eps * 4.0).log2() {
                done[k] = true;
            }
        }
        if all {
            out.extend(z);
            return Ok(out);
        }
    }
    Err(RootError::NonConvergence(max_iter))
}

/// `|q(z)|` is within the rounding noise of a Horner evaluation.
fn below_rounding<C: CFloat>(v: &C, z: &C, mods: &[f64], eps: f64) -> bool {
    let lz = z.log2_abs();
    let mut bound = f64::NEG_INFINITY;
    for (k, &lm) in mods.iter().enumerate() {
        if lm == f64::NEG_INFINITY {
            continue;
        }
        let t = lm + k as f64 * lz;
        bound = log2_add(bound, t);
    }
    let n = mods.len() as f64;
    v.log2_abs() <= bound + (4.0 * n * eps).log2()
}

fn log2_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (1.0 + (lo - hi).exp2()).log2()
}

/// Starting points on circles whose radii come from the upper convex hull of
/// `(k, log2|a_k|)`.
fn initial_guesses<C: CFloat>(q: &UniPoly<C>) -> Vec<C> {
    let c = q.coeffs();
    let like = c[0].clone();
    let pts: Vec<(usize, f64)> = c
        .iter()
        .enumerate()
        .filter(|(_, a)| !a.is_zero())
        .map(|(k, a)| (k, a.log2_abs()))
        .collect();
    let mut hull: Vec<(usize, f64)> = Vec::new();
    for p in pts {
        while hull.len() >= 2 {
            let (x1, y1) = hull[hull.len() - 2];
            let (x2, y2) = hull[hull.len() - 1];
            let cross = (x2 as f64 - x1 as f64) * (p.1 - y1) - (y2 - y1) * (p.0 as f64 - x1 as f64);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let mut out = Vec::new();
    let sigma = 0.7;
    for w in hull.windows(2) {
        let (i, yi) = w[0];
        let (j, yj) = w[1];
        let cnt = j - i;
        let log_r = (yi - yj) / cnt as f64;
        for m in 0..cnt {
            let theta = 2.0 * std::f64::consts::PI * m as f64 / cnt as f64
                + 2.0 * std::f64::consts::PI * i as f64 / c.len() as f64
                + sigma;
            out.push(C::from_log2_polar(log_r, theta, &like));
        }
    }
    out
}

/// Roots with multiplicities for a floating polynomial.
///
/// Approximations of an `m`-fold root scatter by about `eps^{1/m}` times a
/// conditioning factor. The largest group of nearest neighbours fitting that
/// radius merges, and its mean is polished on `q^(m-1)`.
pub fn roots_with_multiplicity_float<C: CFloat>(q: &UniPoly<C>) -> Result<Vec<(C, usize)>, RootError> {
    let n = q.degree().ok_or(RootError::ZeroPolynomial)?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let like = q.coeffs()[0].clone();
    let iters = 200 + 4 * n + like.prec() as usize;
    let roots = aberth(q, iters)?;
    let mut used = vec![false; roots.len()];
    let mut out = Vec::new();
    for k in 0..roots.len() {
        if used[k] {
            continue;
        }
        let mut near: Vec<(usize, f64)> = (0..roots.len())
            .filter(|&j| !used[j])
            .map(|j| (j, roots[j].sub(&roots[k]).abs_f64()))
            .collect();
        near.sort_by(|x, y| x.1.total_cmp(&y.1));
        // Largest cluster whose spread matches an m-fold root at this precision.
        let mut group = vec![k];
        for m in (2..=near.len()).rev() {
            let cand: Vec<usize> = near[..m].iter().map(|x| x.0).collect();
            let centre = mean(&roots, &cand, &like);
            let tol = cluster_tol(q, &centre, m);
            if cand.iter().all(|&j| roots[j].sub(&centre).abs_f64() <= tol) {
                group = cand;
                break;
            }
        }
        for &j in &group {
            used[j] = true;
        }
        let centre = mean(&roots, &group, &like);
        out.push((polish(q, centre, group.len()), group.len()));
    }
    Ok(out)
}

/// Radius within which rounding can scatter an `m`-fold root at `c`:
/// `4 (4 n eps * sum |a_i||c|^i / |q^(m)(c)/m!|)^(1/m)`, matching the
/// backward-error stop of the iteration.
fn cluster_tol<C: CFloat>(q: &UniPoly<C>, c: &C, m: usize) -> f64 {
    let lc = c.log2_abs().max(-1e300);
    let terms: Vec<f64> = q.coeffs().iter().enumerate().map(|(i, a)| a.log2_abs() + i as f64 * lc).collect();
    let top = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let log_s = top + terms.iter().map(|t| (t - top).exp2()).sum::<f64>().log2();
    let mut d = q.clone();
    let mut log_fact = 0.0;
    for k in 1..=m {
        d = d.derivative();
        log_fact += (k as f64).log2();
    }
    let log_t = d.eval(c).log2_abs() - log_fact;
    let noise = (4.0 * q.coeffs().len() as f64 * c.eps()).log2();
    (2.0 + (noise + log_s - log_t) / m as f64).exp2()
}

/// Newton on `q^(m-1)`, where a cluster of `m` roots becomes a simple root.
fn polish<C: CFloat>(q: &UniPoly<C>, start: C, m: usize) -> C {
    if m < 2 {
        return start;
    }
    let mut d = q.clone();
    for _ in 1..m {
        d = d.derivative();
    }
    let radius = cluster_tol(q, &start, m);
    let mut z = start.clone();
    for _ in 0..8 {
        let (v, dv) = d.eval_with_deriv(&z);
        let Some(step) = v.div(&dv) else { break };
        z = z.sub(&step);
        if step.abs_f64() <= start.eps() * (1.0 + z.abs_f64()) {
            break;
        }
    }
    if z.sub(&start).abs_f64() <= radius {
        z
    } else {
        start
    }
}

fn mean<C: CFloat>(roots: &[C], idx: &[usize], like: &C) -> C {
    let mut s = like.zero_like();
    for &i in idx {
        s = s.add(&roots[i]);
    }
    s.mul(&C::from_f64(1.0 / idx.len() as f64, 0.0, like))
}

/// Squarefree factors `(g_i, i)` with `q = lc * prod g_i^i` (Yun).
pub fn squarefree_decomposition(q: &UniPoly<GaussRat>) -> Vec<(UniPoly<GaussRat>, usize)> {
    let f = q.monic();
    let mut out = Vec::new();
    if f.degree().unwrap_or(0) == 0 {
        return out;
    }
    let df = f.derivative();
    let a0 = f.gcd(&df);
    let mut b = f.div_exact(&a0).expect("gcd divides");
    let c = df.div_exact(&a0).expect("gcd divides");
    let mut d = c.sub(&b.derivative());
    let mut i = 1;
    while b.degree().unwrap_or(0) > 0 {
        let a = b.gcd(&d);
        let nb = b.div_exact(&a).expect("gcd divides");
        let nc = d.div_exact(&a).expect("gcd divides");
        if a.degree().unwrap_or(0) > 0 {
            out.push((a, i));
        }
        d = nc.sub(&nb.derivative());
        b = nb;
        i += 1;
    }
    out
}

/// Multiplies by the common denominator so that all coefficients lie in `Z[i]`.
fn clear_denominators(g: &UniPoly<GaussRat>) -> UniPoly<GaussRat> {
    let mut l = Integer::from(1);
    for c in g.coeffs() {
        l = l.lcm(&c.denom_lcm());
    }
    let s = GaussRat::new(Rational::from(l), Rational::new());
    g.scale(&s)
}

/// Roots of an exact polynomial with multiplicities; Gaussian rational roots
/// are returned exactly, the others at [`EXACT_ROOT_BITS`] bits.
pub fn roots_with_multiplicity_exact(q: &UniPoly<GaussRat>) -> Result<Vec<(RootValue, usize)>, RootError> {
    if q.is_zero() {
        return Err(RootError::ZeroPolynomial);
    }
    let mut out = Vec::new();
    for (g, mult) in squarefree_decomposition(q) {
        let gi = clear_denominators(&g);
        let lc = gi.leading().unwrap().clone();
        let gb = g.map(|c| BigComplex::from_gauss(c, EXACT_ROOT_BITS));
        let deg = g.degree().unwrap();
        let approx = aberth(&gb, 400 + 8 * deg)?;
        for x in approx {
            let lcx = BigComplex::from_gauss(&lc, EXACT_ROOT_BITS).mul(&x);
            let (Some(re), Some(im)) = (lcx.re.to_rational(), lcx.im.to_rational()) else {
                out.push((RootValue::Approx(x), mult));
                continue;
            };
            let cand = GaussRat::round_gauss_int(&re, &im).div(&lc).unwrap();
            if gi.eval(&cand).is_zero() {
                out.push((RootValue::Exact(cand), mult));
            } else {
                out.push((RootValue::Approx(x), mult));
            }
        }
    }
    Ok(out)
}
