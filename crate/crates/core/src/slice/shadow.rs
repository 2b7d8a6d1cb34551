//! Orbits constrained to a word, refined by multiple shooting.
//!
//! The unknowns are the local coordinates `t_j` in box `alpha(j)` and the
//! levels `v_j` (`v_0` fixed). A Newton step linearizes every transition in
//! `(dt, eta = dv / v)` and is solved by a backward Riccati sweep, which keeps
//! the strongly expanding `t` direction well conditioned.

use super::local::{local_step, Aim, LocalCharts, LocalStep};
use crate::scalar::BigComplex;

const MAX_NEWTON: usize = 80;

/// A finite orbit in local coordinates; `t[j]` is relative to the centre of
/// `boxes[j]`.
#[derive(Debug, Clone)]
pub struct ShadowOrbit {
    pub boxes: Vec<usize>,
    pub t: Vec<BigComplex>,
    pub v: Vec<BigComplex>,
}

impl ShadowOrbit {
    pub fn len(&self) -> usize {
        self.boxes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    pub fn prec(&self) -> u32 {
        self.t[0].prec()
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        ShadowOrbit {
            boxes: self.boxes.clone(),
            t: self.t.iter().map(|x| x.with_prec(prec)).collect(),
            v: self.v.iter().map(|x| x.with_prec(prec)).collect(),
        }
    }

    /// Every point in its box.
    pub fn boxed(&self, lc: &LocalCharts) -> bool {
        let slack = 1.0 + 1e-9;
        self.boxes.iter().enumerate().all(|(j, &b)| {
            self.t[j].log2_abs() <= (lc.radius[b] * slack).log2()
                && (j == 0 || self.v[j].log2_abs() <= (lc.height[b] * slack).log2())
        })
    }

    /// Same orbit up to relative tolerance `2^-bits` in every coordinate.
    pub fn same_as(&self, o: &ShadowOrbit, bits: f64) -> bool {
        self.boxes == o.boxes
            && self.t.iter().zip(&o.t).all(|(a, b)| close(a, b, bits))
    }
}

fn close(a: &BigComplex, b: &BigComplex, bits: f64) -> bool {
    let d = a.sub(b).log2_abs();
    let m = a.log2_abs().max(b.log2_abs());
    d == f64::NEG_INFINITY || d - m < -bits
}

fn aim_at(o: &ShadowOrbit, j: usize, term: &Aim) -> Aim {
    if j + 1 < o.len() {
        Aim { target: o.boxes[j + 1], offset: None }
    } else {
        term.clone()
    }
}

/// Forward images of every orbit point; `None` if a step hits a pole.
pub fn transitions(lc: &LocalCharts, o: &ShadowOrbit, term: &Aim) -> Option<Vec<LocalStep>> {
    (0..o.len()).map(|j| local_step(lc, o.boxes[j], &aim_at(o, j, term), &o.t[j], &o.v[j])).collect()
}

/// Residual size in bits: `max log2` of the relative defects.
pub fn defect(lc: &LocalCharts, o: &ShadowOrbit, term: &Aim) -> Option<f64> {
    let st = transitions(lc, o, term)?;
    let k = o.len();
    let mut worst = f64::NEG_INFINITY;
    for j in 0..k {
        if j + 1 < k {
            let du = o.t[j + 1].sub(&st[j].t).log2_abs() - scale(lc, o, j + 1);
            let dv = o.v[j + 1].sub(&st[j].v).log2_abs() - o.v[j + 1].log2_abs();
            worst = worst.max(du).max(dv);
        } else {
            worst = worst.max(st[j].t.log2_abs() - lc.radius[term.target].log2());
        }
    }
    Some(worst)
}

/// Magnitude against which corrections of `t_j` are measured.
fn scale(lc: &LocalCharts, o: &ShadowOrbit, j: usize) -> f64 {
    let floor = lc.radius[o.boxes[j]].log2() - o.prec() as f64;
    o.t[j].log2_abs().max(floor)
}

/// One Newton correction; returns the largest relative update in bits.
fn newton_step(lc: &LocalCharts, o: &mut ShadowOrbit, term: &Aim) -> Option<f64> {
    let k = o.len();
    let prec = o.prec();
    let st = transitions(lc, o, term)?;
    let zero = BigComplex::zero(prec);
    let mut ru = vec![zero.clone(); k];
    let mut rho = vec![zero.clone(); k];
    for j in 0..k.saturating_sub(1) {
        ru[j] = o.t[j + 1].sub(&st[j].t);
        rho[j] = o.v[j + 1].div(&st[j].v)?.ln();
    }
    // backward sweep: dt_j = p_j eta_j + q_j
    let mut p = vec![zero.clone(); k + 1];
    let mut q = vec![zero.clone(); k + 1];
    q[k] = st[k - 1].t.neg();
    for j in (0..k).rev() {
        let s = &st[j];
        let den = s.a.sub(&p[j + 1].mul(&s.c));
        p[j] = p[j + 1].mul(&s.e).sub(&s.b).div(&den)?;
        q[j] = q[j + 1].sub(&p[j + 1].mul(&rho[j])).add(&ru[j]).div(&den)?;
    }
    let mut worst = f64::NEG_INFINITY;
    let mut dt = q[0].clone();
    let mut eta = zero;
    for j in 0..k {
        worst = worst.max(dt.log2_abs() - scale(lc, o, j));
        if j > 0 {
            worst = worst.max(eta.log2_abs());
            o.v[j] = o.v[j].mul(&eta.exp());
        }
        o.t[j] = o.t[j].add(&dt);
        if j + 1 < k {
            let s = &st[j];
            let eta_n = s.c.mul(&dt).add(&s.e.mul(&eta)).sub(&rho[j]);
            dt = p[j + 1].mul(&eta_n).add(&q[j + 1]);
            eta = eta_n;
        }
    }
    Some(worst)
}

/// Newton iteration to full working precision. Returns the final defect in
/// bits, or `None` when the iteration fails to settle.
pub fn polish(lc: &LocalCharts, o: &mut ShadowOrbit, term: &Aim) -> Option<f64> {
    let target = -(o.prec() as f64) + 12.0;
    let mut prev = f64::INFINITY;
    let mut stalls = 0;
    for _ in 0..MAX_NEWTON {
        if defect(lc, o, term)? < target {
            return defect(lc, o, term);
        }
        let mut trial = o.clone();
        let Some(w) = newton_step(lc, &mut trial, term) else {
            break;
        };
        *o = trial;
        if !w.is_finite() && w > 0.0 {
            return None;
        }
        if w < target {
            return defect(lc, o, term);
        }
        if w >= prev - 0.5 {
            stalls += 1;
            if stalls > 12 {
                break;
            }
        } else {
            stalls = 0;
        }
        prev = w;
    }
    let d = defect(lc, o, term)?;
    (d < -(o.prec() as f64) / 2.0).then_some(d)
}

/// Raises the working precision and re-polishes.
pub fn refine(lc: &LocalCharts, o: &ShadowOrbit, term: &Aim, prec: u32) -> Option<ShadowOrbit> {
    let mut r = o.with_prec(prec);
    let term = Aim { target: term.target, offset: term.offset.as_ref().map(|x| x.with_prec(prec)) };
    polish(lc, &mut r, &term).map(|_| r)
}
