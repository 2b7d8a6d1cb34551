//! Argument-principle count of the constrained roots.
//!
//! Along a word the composition is lifted to homogeneous coordinates,
//! `T_k = lambda_k (Phi - c)` with `lambda_k = prod_j (v_j^e P2_j)^{d^{k-1-j}}`,
//! so the zero count inside a contour is a weighted sum of factor windings.
//! The chart polynomials are re-expanded around a chain through the contour
//! centre, which leaves only deviations to evaluate on the nodes; these fit
//! an f64 mantissa with a wide exponent however deep the cluster sits.

use std::f64::consts::{FRAC_PI_2, TAU};

use rayon::prelude::*;

use super::local::{local_map, shift_first, shift_second, times_v, Aim, Dense, LocalCharts};
use super::shadow::transitions;
use super::solve::{solve, Mode};
use crate::algebra::bipoly::powers;
use crate::algebra::BiPoly;
use crate::scalar::{BigComplex, CFloat, XComplex};

/// Result of the boundary integral.
#[derive(Debug, Clone, serde::Serialize)]
pub struct Winding {
    pub count: i64,
    pub contours: usize,
    /// Nodes per full circle.
    pub nodes: usize,
    pub max_residual: f64,
    pub precision: u32,
}

const MIN_NODES: usize = 1 << 12;
const MAX_NODES: usize = 1 << 16;
/// Rays along which a contour radius is bracketed.
const RAYS: usize = 8;

fn aim_along(word: &[usize], j: usize, term: &Aim) -> Aim {
    if j + 1 < word.len() {
        Aim { target: word[j + 1], offset: None }
    } else {
        term.clone()
    }
}

/// One step expanded around the chain point `(t*, v*)`, in the deviations
/// `s = t - t*` and `omega = v - v*`.
struct Step {
    /// Numerator of `t' - t'*`; for the last step, of the final coordinate.
    n: Dense<XComplex>,
    /// `P2 - P2*`.
    dp2: Dense<XComplex>,
    p2s: XComplex,
    vs: XComplex,
    vse: XComplex,
    deg: u32,
}

struct Circle {
    centre: BigComplex,
    /// Centre relative to the chain start.
    shift: XComplex,
    lr: f64,
    prec: u32,
    chain: Chain,
}

struct Chain {
    steps: Vec<Step>,
    /// Chain coordinate in the last box.
    t_end: XComplex,
}

fn split_constant(p: BiPoly<BigComplex>) -> (BigComplex, BiPoly<BigComplex>, u32) {
    let mut c = None;
    let rest = BiPoly::from_terms(p.terms().filter_map(|(&e, v)| {
        if e == (0, 0) {
            c = Some(v.clone());
            None
        } else {
            Some((e, v.clone()))
        }
    }));
    let deg = rest.deg_w().unwrap_or(0);
    (c.unwrap_or_else(|| BigComplex::zero(64)), rest, deg)
}

fn to_x(p: &BiPoly<BigComplex>) -> Dense<XComplex> {
    Dense::from_bipoly(&p.map(XComplex::from_big))
}

fn chain(lc: &LocalCharts, word: &[usize], v0: &BigComplex, term: &Aim, centre: &BigComplex, prec: u32) -> Option<Chain> {
    let polys = lc.at(prec);
    let k = word.len();
    let mut t = centre.with_prec(prec);
    let mut v = v0.with_prec(prec);
    let mut steps = Vec::with_capacity(k);
    for j in 0..k {
        let mut aim = aim_along(word, j, term);
        aim.offset = aim.offset.map(|x| x.with_prec(prec));
        let bx = &polys[word[j]];
        let (tn, vn) = local_map(lc, word[j], &aim, &t, &v)?;
        let last = j + 1 == k;
        let zero = BigComplex::zero(prec);
        let mut tau = aim.offset.clone().unwrap_or_else(|| zero.clone());
        if !last {
            tau = tau.add(&tn);
        }
        let p2 = bx.p2.to_bipoly();
        let n = bx.targets[aim.target].k.to_bipoly().sub(&times_v(&p2, lc.e).scale(&tau));
        let n = shift_second(&shift_first(&n, &t), &v);
        let (c0, rest, dn) = split_constant(n);
        let n = if last { rest.add(&BiPoly::constant(c0)) } else { rest };
        let (p2s, dp2, dp) = split_constant(shift_second(&shift_first(&p2, &t), &v));
        steps.push(Step {
            n: to_x(&n),
            dp2: to_x(&dp2),
            p2s: XComplex::from_big(&p2s),
            vs: XComplex::from_big(&v),
            vse: XComplex::from_big(&v.pow_u(lc.e)),
            deg: dn.max(dp),
        });
        if !last {
            t = tn;
            v = vn;
        }
    }
    Some(Chain { steps, t_end: XComplex::from_big(&t) })
}

fn polar(log2_r: f64, theta: f64) -> XComplex {
    let k = log2_r.floor();
    let m = (log2_r - k).exp2();
    XComplex::from_parts(m * theta.cos(), m * theta.sin(), k as i64)
}

fn nonzero_direction(z: &XComplex) -> Option<(f64, f64)> {
    (!z.is_zero() && z.is_finite()).then(|| z.direction())
}

/// Follows the deviation `s0` through the first `m` steps. With `dirs`, also
/// records the factor directions; the result is the deviation after the
/// last step taken, or the final coordinate when all steps are taken.
fn run(lc: &LocalCharts, ch: &Chain, s0: XComplex, m: usize, mut dirs: Option<&mut Vec<(f64, f64)>>) -> Option<XComplex> {
    let mut s = s0;
    let mut nu = XComplex::ZERO;
    for st in &ch.steps[..m] {
        let om = if nu.is_zero() { XComplex::ZERO } else { st.vs.mul(&nu.expm1()) };
        let op = powers(&om, st.deg);
        let n = st.n.eval(&s, &op);
        let dp = st.dp2.eval(&s, &op);
        let p2 = st.p2s.add(&dp);
        let den = st.vse.mul(&nu.mul_f64(lc.e as f64).exp_of()).mul(&p2);
        if let Some(d) = dirs.as_deref_mut() {
            d.push(nonzero_direction(&den)?);
        }
        s = n.mul(&den.inv()?);
        if !s.is_finite() {
            return None;
        }
        nu = nu.mul_f64(lc.d2 as f64).sub(&dp.mul(&st.p2s.inv()?).ln1p());
    }
    if let Some(d) = dirs {
        if m == ch.steps.len() {
            d.push(nonzero_direction(&s)?);
        }
    }
    Some(s)
}

/// Angular intervals of circle `i` on the boundary of the union of disks.
fn exposed_arcs(circles: &[Circle], i: usize) -> Vec<(f64, f64)> {
    let ci = &circles[i];
    let mut covered: Vec<(f64, f64)> = Vec::new();
    for (j, cj) in circles.iter().enumerate() {
        if j == i {
            continue;
        }
        let diff = cj.centre.sub(&ci.centre);
        // distance and radius of disk j in units of radius i
        let ld = diff.log2_abs() - ci.lr;
        let lq = cj.lr - ci.lr;
        if ld == f64::NEG_INFINITY {
            if lq > 0.0 || (lq == 0.0 && j < i) {
                return Vec::new();
            }
            continue;
        }
        if lq >= log2_add(ld, 0.0) {
            // coincident circles: the first one is kept
            if -lq >= log2_add(ld, 0.0) - 1e-9 && j > i {
                continue;
            }
            return Vec::new();
        }
        if ld >= log2_add(0.0, lq) || log2_add(lq, ld) <= 0.0 {
            continue;
        }
        let (d, q) = (ld.exp2(), lq.exp2());
        let alpha = ((1.0 + d * d - q * q) / (2.0 * d)).clamp(-1.0, 1.0).acos();
        let (x, y) = XComplex::from_big(&diff).direction();
        let lo = (y.atan2(x) - alpha).rem_euclid(TAU);
        let hi = lo + 2.0 * alpha;
        if hi > TAU {
            covered.push((lo, TAU));
            covered.push((0.0, hi - TAU));
        } else {
            covered.push((lo, hi));
        }
    }
    covered.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut arcs = Vec::new();
    let mut at = 0.0;
    for (lo, hi) in covered {
        if lo > at {
            arcs.push((at, lo));
        }
        at = f64::max(at, hi);
    }
    if at < TAU {
        arcs.push((at, TAU));
    }
    arcs
}

/// Zeros of `T_k` inside the union of the disks, from the argument change
/// along the exposed arcs, each taken counterclockwise about its own circle.
/// The node density doubles until every factor rounds with residual below
/// `1/4` and no increment exceeds a quarter turn.
fn union_winding(lc: &LocalCharts, circles: &[Circle], k: usize) -> Option<(i64, usize, f64)> {
    let arcs: Vec<(usize, f64, f64)> =
        (0..circles.len()).flat_map(|i| exposed_arcs(circles, i).into_iter().map(move |(a, b)| (i, a, b))).collect();
    let mut n = MIN_NODES;
    'grow: while n <= MAX_NODES {
        let mut pts: Vec<(usize, f64)> = Vec::new();
        let mut spans = Vec::with_capacity(arcs.len());
        for &(i, a, b) in &arcs {
            let m = (((b - a) / TAU) * n as f64).ceil().max(1.0) as usize;
            spans.push((pts.len(), m + 1));
            pts.extend((0..=m).map(|q| (i, a + (b - a) * q as f64 / m as f64)));
        }
        let dirs: Option<Vec<Vec<(f64, f64)>>> = pts
            .par_iter()
            .map(|&(i, th)| {
                let c = &circles[i];
                let mut d = Vec::with_capacity(k + 1);
                run(lc, &c.chain, c.shift.add(&polar(c.lr, th)), k, Some(&mut d)).map(|_| d)
            })
            .collect();
        let Some(dirs) = dirs else {
            n *= 2;
            continue;
        };
        let mut total: i64 = 0;
        let mut worst_res: f64 = 0.0;
        for f in 0..=k {
            let mut sum = 0.0;
            for &(start, len) in &spans {
                for node in start..start + len - 1 {
                    let (a, b) = (dirs[node][f], dirs[node + 1][f]);
                    let d = (a.0 * b.1 - a.1 * b.0).atan2(a.0 * b.0 + a.1 * b.1);
                    if d.abs() >= FRAC_PI_2 {
                        n *= 2;
                        continue 'grow;
                    }
                    sum += d;
                }
            }
            let w = sum / TAU;
            let res = (w - w.round()).abs();
            if res >= 0.25 {
                n *= 2;
                continue 'grow;
            }
            worst_res = worst_res.max(res);
            let weight = if f < k { (lc.d as i64).pow((k - 1 - f) as u32) } else { 1 };
            total += weight * w.round() as i64;
        }
        return Some((total, n, worst_res));
    }
    None
}

/// Argument-principle count of the constrained roots.
///
/// The contours follow the finest clusters: for `alpha = w b` every orbit of
/// the prefix `w` aimed near the centre of box `b` gets the largest circle on
/// which the coordinate in box `b` stays within twice its radius. Inside, the
/// last step lands on the terminal line only from within box `b`. Chains
/// joined inside that sublevel set around a critical point share one circle
/// about their mean; otherwise the boundary of the union of circles is used.
pub fn winding_count(lc: &LocalCharts, word: &[usize], v: &BigComplex, term: &Aim) -> Option<Winding> {
    let k = word.len();
    let base = v.prec();
    if k == 1 {
        let zero = BigComplex::zero(base);
        let ch = chain(lc, word, v, term, &zero, base)?;
        let c = Circle { centre: zero, shift: XComplex::ZERO, lr: lc.radius[word[0]].log2(), prec: base, chain: ch };
        let (w, n, res) = union_winding(lc, &[c], 1)?;
        return Some(Winding { count: w, contours: 1, nodes: n, max_residual: res, precision: base });
    }
    let prefix = &word[..k - 1];
    let last = word[k - 1];
    // slightly off the centre, which may be a critical value
    let off = BigComplex::from_log2_polar(lc.radius[last].log2() - 8.0, 0.7, &BigComplex::zero(base));
    let near = Aim { target: last, offset: Some(off.clone()) };
    let chains = solve(lc, prefix, v, &near, Mode::All)?;
    let target = (2.0 * lc.radius[last]).log2();
    let cap = lc.radius[word[0]].log2();
    let contour = |centre: &BigComplex, basis: &BigComplex, prec: u32, est: f64| -> Option<Circle> {
        let ch = chain(lc, word, v, term, basis, prec)?;
        let shift = XComplex::from_big(&centre.with_prec(prec).sub(&basis.with_prec(prec)));
        let mut lr = f64::INFINITY;
        for ray in 0..RAYS {
            let th = TAU * (ray as f64 + 0.5) / RAYS as f64;
            let excess = |lr: f64| -> f64 {
                run(lc, &ch, shift.add(&polar(lr, th)), k - 1, None)
                    .map_or(f64::INFINITY, |s| ch.t_end.add(&s).log2_abs() - target)
            };
            lr = lr.min(bisect_log(&excess, est, cap)?);
        }
        Some(Circle { centre: centre.clone(), shift, lr, prec, chain: ch })
    };
    let mut circles: Vec<Circle> = Vec::new();
    for (o, _) in &chains {
        // linear estimate of the circle, then the precision that resolves it
        let steps = transitions(lc, o, &near)?;
        let gain: f64 = steps.iter().map(|s| s.a.log2_abs()).sum();
        let est = (target - gain).min(cap);
        let gap = (o.t[0].log2_abs() - est).max(0.0);
        let prec = base.max(((96.0 + gap) / 32.0).ceil() as u32 * 32);
        circles.push(contour(&o.t[0], &o.t[0], prec, est)?);
    }
    // chains around one critical orbit are grown into a group while the
    // group mean lands nearer the centre than the chains themselves
    let lim = off.log2_abs();
    let mean = |g: &[usize]| -> BigComplex {
        let prec = g.iter().map(|&i| circles[i].prec).max().unwrap();
        let mut c = BigComplex::zero(prec);
        for &i in g {
            c = c.add(&circles[i].centre.with_prec(prec));
        }
        c.mul_f64(1.0 / g.len() as f64)
    };
    let lands_near = |c: &BigComplex| -> bool {
        let (mut t, mut vv) = (c.clone(), v.with_prec(c.prec()));
        for j in 0..k - 1 {
            match local_map(lc, word[j], &Aim { target: word[j + 1], offset: None }, &t, &vv) {
                Some((a, b)) => (t, vv) = (a, b),
                None => return false,
            }
        }
        t.log2_abs() < lim
    };
    let mut groups: Vec<Vec<usize>> = (0..circles.len()).map(|i| vec![i]).collect();
    let mut centres: Vec<BigComplex> = circles.iter().map(|c| c.centre.clone()).collect();
    let spread = |g: &[usize], c: &BigComplex| -> f64 {
        g.iter().map(|&i| log2_add(circles[i].centre.sub(c).log2_abs(), circles[i].lr)).fold(f64::NEG_INFINITY, f64::max)
    };
    let mut extent: Vec<f64> = circles.iter().map(|c| c.lr).collect();
    let mut rejected: std::collections::HashSet<(Vec<usize>, Vec<usize>)> = Default::default();
    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for a in 0..groups.len() {
            for b in a + 1..groups.len() {
                if rejected.contains(&(groups[a].clone(), groups[b].clone())) {
                    continue;
                }
                let d = centres[a].sub(&centres[b]).log2_abs();
                if d < log2_add(extent[a], extent[b]) + 1.0 && best.is_none_or(|x| d < x.0) {
                    best = Some((d, a, b));
                }
            }
        }
        let Some((_, a, b)) = best else { break };
        let mut g = groups[a].clone();
        g.extend(&groups[b]);
        let c = mean(&g);
        if lands_near(&c) {
            extent[a] = spread(&g, &c);
            groups[a] = g;
            centres[a] = c;
            groups.remove(b);
            centres.remove(b);
            extent.remove(b);
        } else {
            rejected.insert((groups[a].clone(), groups[b].clone()));
        }
    }
    let mut slots: Vec<Option<Circle>> = circles.into_iter().map(Some).collect();
    let mut contours: Vec<Circle> = Vec::new();
    for g in groups {
        if g.len() > 1 {
            let pts: Vec<BigComplex> = g.iter().map(|&i| slots[i].as_ref().unwrap().centre.clone()).collect();
            let prec = g.iter().map(|&i| slots[i].as_ref().unwrap().prec).max().unwrap();
            let est = g.iter().map(|&i| slots[i].as_ref().unwrap().lr).fold(f64::NEG_INFINITY, f64::max);
            if let Some(c) = centred(&contour, &pts, prec, est) {
                contours.push(c);
                continue;
            }
        }
        contours.extend(g.iter().map(|&i| slots[i].take().unwrap()));
    }
    let (count, nodes, res) = union_winding(lc, &contours, k)?;
    Some(Winding {
        count,
        contours: contours.len(),
        nodes,
        max_residual: res,
        precision: contours.iter().map(|c| c.prec).max().unwrap_or(base),
    })
}

/// Circle about the mean of `pts` enclosing all of them, or `None` when the
/// mean itself lands outside, as in a ring of chains around a pole.
fn centred(
    contour: &dyn Fn(&BigComplex, &BigComplex, u32, f64) -> Option<Circle>,
    pts: &[BigComplex],
    prec: u32,
    est: f64,
) -> Option<Circle> {
    let mut c = BigComplex::zero(prec);
    for p in pts {
        c = c.add(&p.with_prec(prec));
    }
    let c = c.mul_f64(1.0 / pts.len() as f64);
    // expanded about the nearest chain, whose orbit stays in the boxes
    let basis = pts.iter().min_by(|a, b| a.sub(&c).log2_abs().total_cmp(&b.sub(&c).log2_abs()))?;
    let mut circle = contour(&c, basis, prec, est)?;
    let reach = pts.iter().map(|p| p.sub(&c).log2_abs()).fold(f64::NEG_INFINITY, f64::max);
    circle.lr = circle.lr.max(reach + 0.25);
    Some(circle)
}

/// Root of an increasing function of `log2 rho` near `guess`, capped at `cap`.
fn bisect_log(excess: &dyn Fn(f64) -> f64, guess: f64, cap: f64) -> Option<f64> {
    let mut hi = (guess + 4.0).min(cap);
    if excess(hi) <= 0.0 {
        let mut lo = hi;
        while lo < cap {
            hi = (lo + 4.0).min(cap);
            if excess(hi) > 0.0 {
                break;
            }
            lo = hi;
        }
        if excess(hi) <= 0.0 {
            return Some(cap);
        }
        return Some(refine_bisect(excess, lo, hi));
    }
    let mut lo = hi - 8.0;
    let mut span = 8.0;
    while excess(lo) > 0.0 {
        hi = lo;
        span *= 2.0;
        lo -= span;
        if lo < -1e8 {
            return None;
        }
    }
    Some(refine_bisect(excess, lo, hi))
}

fn refine_bisect(excess: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if excess(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn log2_add(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    m + (1.0 + (a.min(b) - m).exp2()).log2()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::infinity::{profile, PlaneMap};
    use crate::orbit::{build_boxes, BoxParams, ChartMap};

    fn charts(h1: &str, h2: &str) -> LocalCharts {
        let f = PlaneMap::parse(h1, h2).unwrap();
        let p = profile(&f).unwrap();
        let cm = ChartMap::new(&f);
        let bx = build_boxes(&p, &cm, BoxParams::default()).unwrap();
        LocalCharts::new(&cm, &bx)
    }

    fn follow(lc: &LocalCharts, word: &[usize], t: &BigComplex, v: &BigComplex, term: &Aim) -> BigComplex {
        let (mut t, mut v) = (t.clone(), v.clone());
        for j in 0..word.len() {
            let (a, b) = local_map(lc, word[j], &aim_along(word, j, term), &t, &v).unwrap();
            t = a;
            v = b;
        }
        t
    }

    #[test]
    fn expansion_matches_direct_evaluation() {
        let lc = charts("z^2*(w - z)^2", "w^2 + z^3");
        let prec = 256;
        let v = BigComplex::from_f64(1e-2, 0.0, prec);
        let term = Aim { target: 0, offset: Some(BigComplex::from_f64(0.025, 0.0, prec)) };
        let word = [0, 0, 0, 0];
        let centre = BigComplex::from_f64(3e-7, 1e-7, prec);
        let ch = chain(&lc, &word, &v, &term, &centre, prec).unwrap();
        for (lr, th) in [(-21.0, 0.3), (-20.0, 2.0), (-19.5, -1.0), (-23.0, 0.0)] {
            let s0 = polar(lr, th);
            let z = centre.add(&s0.to_big(prec));
            let direct = follow(&lc, &word, &z, &v, &term);
            let x = run(&lc, &ch, s0, 4, None).unwrap().to_big(prec);
            assert!(x.rel_dist(&direct) < 1e-10, "{lr} {th}: {:?} vs {:?}", x.to_f64(), direct.to_f64());
        }
    }
}
