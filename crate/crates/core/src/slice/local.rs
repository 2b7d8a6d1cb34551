//! Chart expressions translated to the box centres, `u = a_i + t`.
//!
//! With exact centres the translated polynomials are exact, so steps between
//! boxes are computed as `t' = (H1 - a_j v^e H2) / (v^e H2)` without the
//! cancellation of `U - a_j`.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use crate::algebra::bipoly::{binomial, powers};
use crate::algebra::roots::EXACT_ROOT_BITS;
use crate::algebra::{BiPoly, RootValue, UniPoly};
use crate::orbit::{BoxSystem, ChartMap};
use rug::Float;

use crate::scalar::{ensure_exponent_range, BigComplex, Coeff, GaussRat};

/// `p(a + t, v)`, expanded.
pub fn shift_first<C: Coeff>(p: &BiPoly<C>, a: &C) -> BiPoly<C> {
    let mut out = BiPoly::zero();
    for (&(r, s), c) in p.terms() {
        let ap = powers(a, r);
        for k in 0..=r {
            out.add_term((k, s), c.mul(&ap[(r - k) as usize]).mul_i64(binomial(r, k)));
        }
    }
    out
}

/// `p(t, b + v)`, expanded.
pub fn shift_second<C: Coeff>(p: &BiPoly<C>, b: &C) -> BiPoly<C> {
    let mut out = BiPoly::zero();
    for (&(r, s), c) in p.terms() {
        let bp = powers(b, s);
        for k in 0..=s {
            out.add_term((r, k), c.mul(&bp[(s - k) as usize]).mul_i64(binomial(s, k)));
        }
    }
    out
}

fn d_first<C: Coeff>(p: &BiPoly<C>) -> BiPoly<C> {
    p.d_z()
}

fn d_second<C: Coeff>(p: &BiPoly<C>) -> BiPoly<C> {
    p.d_w()
}

/// `v^e * p`.
pub(crate) fn times_v<C: Coeff>(p: &BiPoly<C>, e: u32) -> BiPoly<C> {
    BiPoly::from_terms(p.terms().map(|(&(r, s), c)| ((r, s + e), c.clone())))
}

/// Rows `sum_r c_{r,s} t^r` of a polynomial in `(t, v)`, by power of `v`.
#[derive(Debug, Clone)]
pub struct Dense<C> {
    pub rows: Vec<(u32, Vec<C>)>,
    pub deg_v: u32,
}

impl<C: Coeff> Dense<C> {
    pub fn from_bipoly(p: &BiPoly<C>) -> Self {
        let mut rows: Vec<(u32, Vec<C>)> = Vec::new();
        for (&(r, s), c) in p.terms() {
            let row = match rows.iter_mut().find(|x| x.0 == s) {
                Some(x) => x,
                None => {
                    rows.push((s, Vec::new()));
                    rows.last_mut().unwrap()
                }
            };
            if row.1.len() <= r as usize {
                row.1.resize(r as usize + 1, c.zero_like());
            }
            row.1[r as usize] = c.clone();
        }
        rows.sort_by_key(|x| x.0);
        let deg_v = rows.last().map_or(0, |x| x.0);
        Dense { rows, deg_v }
    }

    pub fn map<D: Coeff>(&self, f: impl Fn(&C) -> D) -> Dense<D> {
        Dense { rows: self.rows.iter().map(|(s, cs)| (*s, cs.iter().map(&f).collect())).collect(), deg_v: self.deg_v }
    }

    pub fn to_bipoly(&self) -> BiPoly<C> {
        let mut out = BiPoly::zero();
        for (s, cs) in &self.rows {
            for (r, c) in cs.iter().enumerate() {
                if !c.is_zero() {
                    out.add_term((r as u32, *s), c.clone());
                }
            }
        }
        out
    }

    /// Horner in `t` per row; `vp` holds the powers of `v`.
    pub fn eval(&self, t: &C, vp: &[C]) -> C {
        let mut acc: Option<C> = None;
        for (s, cs) in &self.rows {
            let mut it = cs.iter().rev();
            let mut h = it.next().unwrap().clone();
            for c in it {
                h = h.mul(t).add(c);
            }
            let term = if *s == 0 { h } else { h.mul(&vp[*s as usize]) };
            acc = Some(match acc {
                Some(a) => a.add(&term),
                None => term,
            });
        }
        acc.unwrap_or_else(|| t.zero_like())
    }
}

impl Dense<BigComplex> {
    /// Allocation-light evaluation at the precision of `t`.
    pub fn eval_big(&self, t: &BigComplex, vp: &[BigComplex]) -> BigComplex {
        ensure_exponent_range();
        let prec = t.prec();
        let mut scratch = (Float::new(prec), Float::new(prec));
        let mut acc = BigComplex::zero(prec);
        let mut h = BigComplex::zero(prec);
        for (s, cs) in &self.rows {
            let mut it = cs.iter().rev();
            h.assign(it.next().unwrap());
            for c in it {
                h.horner_step(t, c, &mut scratch);
            }
            if *s != 0 {
                h.mul_assign_with(&vp[*s as usize], &mut scratch);
            }
            acc.add_assign(&h);
        }
        acc
    }
}

/// Numerator of `U - tau` and its partial derivatives, in local coordinates.
#[derive(Debug, Clone)]
pub struct Target<P> {
    pub k: P,
    pub k_t: P,
    pub k_v: P,
}

/// Translated chart polynomials of one box.
#[derive(Debug, Clone)]
pub struct LocalBox<P> {
    pub p2: P,
    pub p2_t: P,
    pub p2_v: P,
    /// `P1 - a_j v^e P2` for every box `j`.
    pub targets: Vec<Target<P>>,
}

impl<P> LocalBox<P> {
    fn map<Q>(&self, f: impl Fn(&P) -> Q) -> LocalBox<Q> {
        LocalBox {
            p2: f(&self.p2),
            p2_t: f(&self.p2_t),
            p2_v: f(&self.p2_v),
            targets: self.targets.iter().map(|t| Target { k: f(&t.k), k_t: f(&t.k_t), k_v: f(&t.k_v) }).collect(),
        }
    }
}

type Numeric = LocalBox<Dense<BigComplex>>;

fn build<C: Coeff>(h1: &BiPoly<C>, h2: &BiPoly<C>, centres: &[C], e: u32) -> Vec<LocalBox<Dense<C>>> {
    centres
        .iter()
        .map(|a| {
            let p1 = shift_first(h1, a);
            let p2 = shift_first(h2, a);
            let vp2 = times_v(&p2, e);
            let targets = centres
                .iter()
                .map(|b| {
                    let k = p1.sub(&vp2.scale(b));
                    Target {
                        k_t: Dense::from_bipoly(&d_first(&k)),
                        k_v: Dense::from_bipoly(&d_second(&k)),
                        k: Dense::from_bipoly(&k),
                    }
                })
                .collect();
            LocalBox {
                p2_t: Dense::from_bipoly(&d_first(&p2)),
                p2_v: Dense::from_bipoly(&d_second(&p2)),
                p2: Dense::from_bipoly(&p2),
                targets,
            }
        })
        .collect()
}

/// Local charts of all boxes, cached per precision.
#[derive(Debug)]
pub struct LocalCharts {
    exact: Option<Vec<LocalBox<Dense<GaussRat>>>>,
    approx: Option<Vec<Numeric>>,
    pub e: u32,
    pub d: u32,
    pub d2: u32,
    pub radius: Vec<f64>,
    pub height: Vec<f64>,
    pub centres: Vec<RootValue>,
    cache: RwLock<HashMap<u32, Arc<Vec<Numeric>>>>,
}

impl LocalCharts {
    pub fn new(f: &ChartMap, boxes: &BoxSystem) -> Self {
        let centres: Vec<RootValue> = boxes.boxes.iter().map(|b| b.center.clone()).collect();
        let e = f.e();
        let exact_centres: Option<Vec<GaussRat>> = centres
            .iter()
            .map(|c| match c {
                RootValue::Exact(g) => Some(g.clone()),
                RootValue::Approx(_) => None,
            })
            .collect();
        let (exact, approx) = match exact_centres {
            Some(cs) => (Some(build(&f.h1, &f.h2, &cs, e)), None),
            None => {
                let like = BigComplex::zero(EXACT_ROOT_BITS);
                let cs: Vec<BigComplex> = centres.iter().map(|c| c.to_big(EXACT_ROOT_BITS)).collect();
                (None, Some(build(&f.h1.convert(&like), &f.h2.convert(&like), &cs, e)))
            }
        };
        LocalCharts {
            exact,
            approx,
            e,
            d: f.d(),
            d2: f.d2(),
            radius: boxes.boxes.iter().map(|b| b.r).collect(),
            height: boxes.boxes.iter().map(|b| b.r_prime).collect(),
            centres,
            cache: RwLock::new(HashMap::new()),
        }
    }

    pub fn m(&self) -> usize {
        self.centres.len()
    }

    pub fn at(&self, prec: u32) -> Arc<Vec<Numeric>> {
        if let Some(p) = self.cache.read().unwrap().get(&prec) {
            return p.clone();
        }
        let like = BigComplex::zero(prec);
        let polys: Vec<Numeric> = match (&self.exact, &self.approx) {
            (Some(ex), _) => ex.iter().map(|b| b.map(|p| p.map(|c| BigComplex::from_gauss(c, like.prec())))).collect(),
            (None, Some(ap)) => ap.iter().map(|b| b.map(|p| p.map(|c| c.with_prec(prec)))).collect(),
            _ => unreachable!(),
        };
        let arc = Arc::new(polys);
        self.cache.write().unwrap().insert(prec, arc.clone());
        arc
    }

    pub fn centre_big(&self, i: usize, prec: u32) -> BigComplex {
        self.centres[i].to_big(prec)
    }
}

/// Where a step is aimed: the local coordinate `t'` of the result is taken
/// relative to `centre(box) + offset`.
#[derive(Debug, Clone)]
pub struct Aim {
    pub target: usize,
    pub offset: Option<BigComplex>,
}

/// One local step with the quantities of the linearization.
#[derive(Debug, Clone)]
pub struct LocalStep {
    /// `U - a_target - offset`.
    pub t: BigComplex,
    pub v: BigComplex,
    /// `dt'/dt`, `v dt'/dv`, `d ln V/dt`, `d ln V / d ln v`.
    pub a: BigComplex,
    pub b: BigComplex,
    pub c: BigComplex,
    pub e: BigComplex,
}

pub fn local_step(lc: &LocalCharts, src: usize, aim: &Aim, t: &BigComplex, v: &BigComplex) -> Option<LocalStep> {
    let prec = t.prec().max(v.prec());
    let polys = lc.at(prec);
    let bx = &polys[src];
    let tg = &bx.targets[aim.target];
    let vp = powers(v, lc.d.max(lc.d2 + 1));
    let p2 = bx.p2.eval_big(t, &vp);
    let p2_t = bx.p2_t.eval_big(t, &vp);
    let p2_v = bx.p2_v.eval_big(t, &vp);
    let ve = vp[lc.e as usize].clone();
    let mut k = tg.k.eval_big(t, &vp);
    let mut k_t = tg.k_t.eval_big(t, &vp);
    let mut k_v = tg.k_v.eval_big(t, &vp);
    if let Some(off) = &aim.offset {
        // subtract off * v^e * P2
        let ove = off.mul(&ve);
        k = k.sub(&ove.mul(&p2));
        k_t = k_t.sub(&ove.mul(&p2_t));
        let dve = if lc.e > 0 { vp[lc.e as usize - 1].mul_i64(lc.e as i64) } else { BigComplex::zero(prec) };
        k_v = k_v.sub(&off.mul(&dve.mul(&p2).add(&ve.mul(&p2_v))));
    }
    let den = ve.mul(&p2);
    let inv_den = den.inv()?;
    let inv_p2 = p2.inv()?;
    let tn = k.mul(&inv_den);
    // (K_t P2 - K P2_t) / (v^e P2^2) = K_t / den - t' P2_t / P2
    let p2t_n = p2_t.mul(&inv_p2);
    let a = k_t.mul(&inv_den).sub(&tn.mul(&p2t_n));
    let p2v_n = v.mul(&p2_v).mul(&inv_p2);
    let b = v.mul(&k_v).mul(&inv_den).sub(&tn.mul(&p2v_n)).sub(&tn.mul_i64(lc.e as i64));
    let c = p2t_n.neg();
    let e = BigComplex::from_f64(lc.d2 as f64, 0.0, prec).sub(&p2v_n);
    let vn = vp[lc.d as usize].mul(&inv_den);
    Some(LocalStep { t: tn, v: vn, a, b, c, e })
}

/// Only the new point, without derivatives.
pub fn local_map(lc: &LocalCharts, src: usize, aim: &Aim, t: &BigComplex, v: &BigComplex) -> Option<(BigComplex, BigComplex)> {
    local_map_den(lc, src, aim, t, v).map(|x| (x.0, x.1))
}

/// `K(., v) - offset v^e P2(., v)` as a polynomial in `t`; its roots in the
/// disk are the points of the level mapped onto the aimed line.
pub fn aim_poly(lc: &LocalCharts, src: usize, aim: &Aim, v: &BigComplex) -> UniPoly<BigComplex> {
    let prec = v.prec();
    let polys = lc.at(prec);
    let bx = &polys[src];
    let n = lc.d as usize;
    let vp = powers(v, lc.d.max(lc.d2 + 1).max(bx.targets[aim.target].k.deg_v).max(bx.p2.deg_v + lc.e));
    let mut c = vec![BigComplex::zero(prec); n + 1];
    for (s, cs) in &bx.targets[aim.target].k.rows {
        for (r, a) in cs.iter().enumerate() {
            c[r] = c[r].add(&a.mul(&vp[*s as usize]));
        }
    }
    if let Some(off) = &aim.offset {
        for (s, cs) in &bx.p2.rows {
            for (r, a) in cs.iter().enumerate() {
                c[r] = c[r].sub(&off.mul(a).mul(&vp[(*s + lc.e) as usize]));
            }
        }
    }
    UniPoly::new(c)
}

/// New point together with the chart denominator `v^e P2(t, v)`, whose
/// argument the homogeneous lift picks up at this step.
pub fn local_map_den(
    lc: &LocalCharts,
    src: usize,
    aim: &Aim,
    t: &BigComplex,
    v: &BigComplex,
) -> Option<(BigComplex, BigComplex, BigComplex)> {
    let prec = t.prec().max(v.prec());
    let polys = lc.at(prec);
    let bx = &polys[src];
    let vp = powers(v, lc.d);
    let p2 = bx.p2.eval_big(t, &vp);
    let ve = &vp[lc.e as usize];
    let mut k = bx.targets[aim.target].k.eval_big(t, &vp);
    let den = ve.mul(&p2);
    if let Some(off) = &aim.offset {
        k = k.sub(&off.mul(&den));
    }
    let inv = den.inv()?;
    Some((k.mul(&inv), vp[lc.d as usize].mul(&inv), den))
}
