//! Points in the affine chart and in the chart `(u, v) = (z/w, 1/w)` at
//! infinity, and one application of the map in either chart.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use rug::Float;
use thiserror::Error;

use crate::algebra::{BiPoly, UniPoly};
use crate::infinity::PlaneMap;
use crate::scalar::{float_log2_abs, BigComplex, GaussRat};

/// Norm above which points are carried in the chart at infinity.
pub const CHART_SWITCH: f64 = 1e4;
/// Relative disagreement between full and half precision that forces escalation.
pub const ESCALATION_TOL: f64 = 1e-6;
pub const DEFAULT_PRECISION_CAP: u32 = 4096;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OrbitError {
    #[error("precision exhausted at {bits} bits")]
    LostPrecision { bits: u32 },
    #[error("orbit is not escaping")]
    NotEscaping,
    #[error("partial Green series diverges: {0}")]
    DivergentSeries(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("box certification failed: {check} at u = {witness_u:?}, v = {witness_v:?}")]
    CertificationFailed { check: String, witness_u: (f64, f64), witness_v: (f64, f64) },
}

/// Coefficients of the map and of its chart expressions at one precision.
#[derive(Debug)]
pub struct ChartPolys {
    pub f1: BiPoly<BigComplex>,
    pub f2: BiPoly<BigComplex>,
    /// `H1(u, v) = v^d f1(u/v, 1/v)`, stored with exponents `(r, s)` of `u^r v^s`.
    pub h1: BiPoly<BigComplex>,
    pub h2: BiPoly<BigComplex>,
}

/// A map prepared for iteration in both charts.
#[derive(Debug)]
pub struct ChartMap {
    pub map: PlaneMap,
    pub h1: BiPoly<GaussRat>,
    pub h2: BiPoly<GaussRat>,
    cache: RwLock<HashMap<u32, Arc<ChartPolys>>>,
}

/// `v^deg p(u/v, 1/v)` as a polynomial in `(u, v)`.
pub fn homogenize_chart(p: &BiPoly<GaussRat>, deg: u32) -> BiPoly<GaussRat> {
    BiPoly::from_terms(p.terms().map(|(&(r, s), c)| ((r, deg - r - s), c.clone())))
}

impl ChartMap {
    pub fn new(map: &PlaneMap) -> Self {
        let h1 = homogenize_chart(&map.f1, map.d);
        let h2 = homogenize_chart(&map.f2, map.d2);
        ChartMap { map: map.clone(), h1, h2, cache: RwLock::new(HashMap::new()) }
    }

    pub fn d(&self) -> u32 {
        self.map.d
    }

    pub fn d2(&self) -> u32 {
        self.map.d2
    }

    /// `d - d2`, the power of `v` in the denominator of the new `u`.
    pub fn e(&self) -> u32 {
        self.map.d - self.map.d2
    }

    pub fn polys(&self, prec: u32) -> Arc<ChartPolys> {
        if let Some(p) = self.cache.read().unwrap().get(&prec) {
            return p.clone();
        }
        let like = BigComplex::zero(prec);
        let p = Arc::new(ChartPolys {
            f1: self.map.f1.convert(&like),
            f2: self.map.f2.convert(&like),
            h1: self.h1.convert(&like),
            h2: self.h2.convert(&like),
        });
        self.cache.write().unwrap().insert(prec, p.clone());
        p
    }

    /// `(H1(u, v), H2(u, v))`.
    pub fn eval_h(&self, u: &BigComplex, v: &BigComplex) -> (BigComplex, BigComplex) {
        let p = self.polys(u.prec().max(v.prec()));
        (p.h1.eval(u, v), p.h2.eval(u, v))
    }

    /// One step in the chart at infinity without precision control.
    /// Returns `None` when `H2` vanishes.
    pub fn chart_step(&self, u: &BigComplex, v: &BigComplex) -> Option<(BigComplex, BigComplex)> {
        let (h1, h2) = self.eval_h(u, v);
        let vd2 = v.pow_u(self.d2());
        let ve = v.pow_u(self.e());
        let nu = h1.div(&ve.mul(&h2))?;
        let nv = vd2.div(&h2)?;
        Some((nu, nv))
    }

    /// `H1(., v) - tau v^e H2(., v)` as a polynomial in `u`; its roots are the
    /// points of the line `{v}` mapped into the line `{u = tau}`.
    pub fn level_poly(&self, v: &BigComplex, tau: &BigComplex) -> UniPoly<BigComplex> {
        let prec = v.prec().max(tau.prec());
        let p = self.polys(prec);
        let n = self.d() as usize;
        let mut c = vec![BigComplex::zero(prec); n + 1];
        let vp = crate::algebra::bipoly::powers(v, self.d());
        for (&(r, s), a) in p.h1.terms() {
            c[r as usize] = c[r as usize].add(&a.mul(&vp[s as usize]));
        }
        let tv = tau.mul(&vp[self.e() as usize]);
        for (&(r, s), a) in p.h2.terms() {
            c[r as usize] = c[r as usize].sub(&a.mul(&vp[s as usize]).mul(&tv));
        }
        UniPoly::new(c)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Rep {
    Affine { z: BigComplex, w: BigComplex },
    Infinity { u: BigComplex, v: BigComplex },
}

/// A point of `C^2` in whichever chart keeps it well scaled.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartPoint {
    pub rep: Rep,
    pub prec: u32,
}

fn ln2() -> f64 {
    std::f64::consts::LN_2
}

impl ChartPoint {
    pub fn affine(z: BigComplex, w: BigComplex) -> Self {
        let prec = z.prec().max(w.prec());
        let mut p = ChartPoint { rep: Rep::Affine { z: z.with_prec(prec), w: w.with_prec(prec) }, prec };
        p.normalize_chart();
        p
    }

    pub fn affine_f64(z: (f64, f64), w: (f64, f64), prec: u32) -> Self {
        ChartPoint::affine(BigComplex::from_f64(z.0, z.1, prec), BigComplex::from_f64(w.0, w.1, prec))
    }

    pub fn infinity(u: BigComplex, v: BigComplex) -> Self {
        let prec = u.prec().max(v.prec());
        ChartPoint { rep: Rep::Infinity { u: u.with_prec(prec), v: v.with_prec(prec) }, prec }
    }

    /// `ln max(|z|, |w|)`.
    pub fn log_norm(&self) -> f64 {
        match &self.rep {
            Rep::Affine { z, w } => z.log2_abs().max(w.log2_abs()) * ln2(),
            Rep::Infinity { u, v } => (u.log2_abs().max(0.0) - v.log2_abs()) * ln2(),
        }
    }

    /// `ln max(|z|, |w|)` at the point's precision.
    pub fn log_norm_hp(&self) -> Float {
        let p = self.prec;
        match &self.rep {
            Rep::Affine { z, w } => {
                if z.log2_abs() >= w.log2_abs() {
                    z.ln_abs()
                } else {
                    w.ln_abs()
                }
            }
            Rep::Infinity { u, v } => {
                let lv = v.ln_abs();
                if u.log2_abs() > 0.0 {
                    Float::with_val(p, u.ln_abs() - lv)
                } else {
                    -lv
                }
            }
        }
    }

    /// Chart coordinates, when `w != 0`.
    pub fn uv(&self) -> Option<(BigComplex, BigComplex)> {
        match &self.rep {
            Rep::Infinity { u, v } => Some((u.clone(), v.clone())),
            Rep::Affine { z, w } => {
                let v = w.inv()?;
                Some((z.mul(&v), v))
            }
        }
    }

    /// Affine coordinates, overflowing into huge MPFR exponents if needed.
    pub fn zw(&self) -> Option<(BigComplex, BigComplex)> {
        match &self.rep {
            Rep::Affine { z, w } => Some((z.clone(), w.clone())),
            Rep::Infinity { u, v } => {
                let w = v.inv()?;
                Some((u.mul(&w), w))
            }
        }
    }

    /// Membership in `V(X) = {|u| >= 1/eps, |z| >= radius}`.
    pub fn in_vx(&self, eps: f64, radius: f64) -> bool {
        let (lu, lz) = match &self.rep {
            Rep::Infinity { u, v } => (u.log2_abs(), u.log2_abs() - v.log2_abs()),
            Rep::Affine { z, w } => (z.log2_abs() - w.log2_abs(), z.log2_abs()),
        };
        lu >= (1.0 / eps).log2() && lz >= radius.log2()
    }

    fn normalize_chart(&mut self) {
        let ln = self.log_norm();
        match &self.rep {
            Rep::Affine { z, w } if ln > CHART_SWITCH.ln() && !w.is_zero() => {
                let v = w.inv().unwrap();
                self.rep = Rep::Infinity { u: z.mul(&v), v };
            }
            Rep::Infinity { u, v } if ln <= CHART_SWITCH.ln() => {
                let w = v.inv().unwrap();
                self.rep = Rep::Affine { z: u.mul(&w), w };
            }
            _ => {}
        }
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        let rep = match &self.rep {
            Rep::Affine { z, w } => Rep::Affine { z: z.with_prec(prec), w: w.with_prec(prec) },
            Rep::Infinity { u, v } => Rep::Infinity { u: u.with_prec(prec), v: v.with_prec(prec) },
        };
        ChartPoint { rep, prec }
    }

    fn rel_dist(&self, o: &ChartPoint) -> f64 {
        match (&self.rep, &o.rep) {
            (Rep::Affine { z, w }, Rep::Affine { z: z2, w: w2 }) => z.rel_dist(z2).max(w.rel_dist(w2)),
            (Rep::Infinity { u, v }, Rep::Infinity { u: u2, v: v2 }) => u.rel_dist(u2).max(v.rel_dist(v2)),
            _ => f64::INFINITY,
        }
    }
}

fn raw_step(f: &ChartMap, p: &ChartPoint) -> ChartPoint {
    let prec = p.prec;
    let next = match &p.rep {
        Rep::Affine { z, w } => {
            let polys = f.polys(prec);
            ChartPoint { rep: Rep::Affine { z: polys.f1.eval(z, w), w: polys.f2.eval(z, w) }, prec }
        }
        Rep::Infinity { u, v } => match f.chart_step(u, v) {
            Some((nu, nv)) => ChartPoint { rep: Rep::Infinity { u: nu, v: nv }, prec },
            None => {
                // f2 vanishes: the image lies on {w = 0}.
                let (h1, _) = f.eval_h(u, v);
                let z = h1.div(&v.pow_u(f.d())).unwrap_or(h1);
                ChartPoint { rep: Rep::Affine { z, w: BigComplex::zero(prec) }, prec }
            }
        },
    };
    let mut next = next;
    next.normalize_chart();
    next
}

/// One application of `f` with precision escalation: the step is accepted
/// when a re-evaluation at half precision agrees to relative `1e-6`;
/// otherwise the working precision doubles up to `cap`.
pub fn step(f: &ChartMap, p: &ChartPoint, cap: u32) -> Result<ChartPoint, OrbitError> {
    let mut prec = p.prec;
    loop {
        let full = raw_step(f, &p.with_prec(prec));
        let half = raw_step(f, &p.with_prec((prec / 2).max(16)));
        let ln = full.log_norm();
        let ok = full.rel_dist(&half) <= ESCALATION_TOL && !ln.is_nan() && ln < f64::INFINITY;
        if ok {
            return Ok(full);
        }
        if prec * 2 > cap {
            return Err(OrbitError::LostPrecision { bits: prec });
        }
        prec *= 2;
    }
}

/// `log2` of a float that may exceed the f64 exponent range.
pub fn log2_wide(x: &Float) -> f64 {
    float_log2_abs(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e1() -> ChartMap {
        ChartMap::new(&PlaneMap::parse("z^2*(w - z)^2", "w^2 + z^3").unwrap())
    }

    #[test]
    fn affine_step_into_chart() {
        let f = e1();
        let p = ChartPoint::affine_f64((1e6, 0.0), (1.0, 0.0), 128);
        let q = step(&f, &p, 4096).unwrap();
        assert!(matches!(q.rep, Rep::Infinity { .. }));
        assert!(q.in_vx(0.1, 10.0));
        assert!((q.log_norm() - 24.0 * 10f64.ln()).abs() < 1e-5);
    }

    #[test]
    fn fixed_origin_stays_affine() {
        let f = e1();
        let p = ChartPoint::affine_f64((0.0, 0.0), (0.0, 0.0), 53);
        let q = step(&f, &p, 4096).unwrap();
        assert!(matches!(q.rep, Rep::Affine { .. }));
        assert_eq!(q.log_norm(), f64::NEG_INFINITY);
    }

    #[test]
    fn chart_level_update() {
        // f2 = w^2 + z^3 has degree 3, so log|v'| = 3 log|v| - log|H2| with H2(u, 0) = u^3.
        let f = e1();
        let prec = 128;
        let lv = Float::with_val(prec, -50);
        let v = BigComplex::from_polar(&lv, &Float::new(prec), prec);
        let p = ChartPoint::infinity(BigComplex::from_f64(0.5, 0.0, prec), v);
        let q = step(&f, &p, 4096).unwrap();
        let Rep::Infinity { v, .. } = &q.rep else { panic!("left the chart") };
        assert!((v.ln_abs_f64() - (-150.0 + 8f64.ln())).abs() < 1e-9);
    }

    #[test]
    fn chart_agrees_with_affine_evaluation() {
        let f = e1();
        let prec = 512;
        let p = ChartPoint::affine_f64((3.0, 1.0), (700.0, -20.0), prec);
        let (z, w) = p.zw().unwrap();
        let polys = f.polys(prec);
        let (z1, w1) = (polys.f1.eval(&z, &w), polys.f2.eval(&z, &w));
        let chart = ChartPoint::infinity(z.div(&w).unwrap(), w.inv().unwrap());
        let q = step(&f, &chart, 4096).unwrap();
        let (z2, w2) = q.zw().unwrap();
        assert!(z1.rel_dist(&z2) < 1e-100 && w1.rel_dist(&w2) < 1e-100);
    }
}
