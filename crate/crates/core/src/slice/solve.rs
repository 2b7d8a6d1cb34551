//! Recursive pull-back of a vertical line through a word of boxes.
//!
//! For `alpha = i w` the branches of the level through box `i` onto the
//! centre of box `w(0)` give the image levels; the atoms of `w` at those
//! levels are pulled back one step and the whole orbit is polished.

use super::local::{aim_poly, local_map, Aim, LocalCharts};
use super::shadow::{polish, ShadowOrbit};
use crate::algebra::roots::aberth;
use crate::scalar::BigComplex;

/// Orbits are treated as equal below this many bits of relative distance.
const SAME_BITS: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    All,
    /// Stop at the first constrained orbit.
    First,
}

/// Roots of the aimed level polynomial inside the disk of box `src`.
pub fn disk_roots(lc: &LocalCharts, src: usize, aim: &Aim, v: &BigComplex) -> Option<Vec<BigComplex>> {
    let p = aim_poly(lc, src, aim, v);
    if p.is_zero() {
        return None;
    }
    let roots = aberth(&p, 2000).ok()?;
    let lim = (lc.radius[src] * (1.0 + 1e-9)).log2();
    Some(roots.into_iter().filter(|x| x.log2_abs() <= lim).collect())
}

/// Groups nearly equal values; returns representatives and member lists.
fn group(values: &[BigComplex], bits: f64) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, x) in values.iter().enumerate() {
        match groups.iter_mut().find(|g| {
            let y = &values[g[0]];
            let d = x.sub(y).log2_abs();
            d == f64::NEG_INFINITY || d - x.log2_abs().max(y.log2_abs()) < -bits
        }) {
            Some(g) => g.push(i),
            None => groups.push(vec![i]),
        }
    }
    groups
}

/// Orbits following `word` from level `v`, ending on the terminal line.
/// Seeds closer than this fraction of the working precision are one root
/// counted with multiplicity.
fn cluster_bits(lc: &LocalCharts, prec: u32) -> f64 {
    prec as f64 / (2.0 * lc.d as f64)
}

fn insert(out: &mut Vec<(ShadowOrbit, u32)>, o: ShadowOrbit, seed: &BigComplex, mult: u32, tol: f64) {
    match out.iter_mut().find(|x| x.0.same_as(&o, SAME_BITS)) {
        Some(x) => {
            if close_bits(&x.0.t[0], seed, tol) {
                x.1 += mult;
            }
        }
        None => out.push((o, mult)),
    }
}

fn close_bits(a: &BigComplex, b: &BigComplex, bits: f64) -> bool {
    let d = a.sub(b).log2_abs();
    d == f64::NEG_INFINITY || d - a.log2_abs().max(b.log2_abs()) < -bits
}

/// Orbits following `word` from level `v`, ending on the terminal line, with
/// their multiplicities as roots of `Phi - c`.
pub fn solve(lc: &LocalCharts, word: &[usize], v: &BigComplex, term: &Aim, mode: Mode) -> Option<Vec<(ShadowOrbit, u32)>> {
    let i = word[0];
    let prec = v.prec();
    let tol = cluster_bits(lc, prec);
    let mut out: Vec<(ShadowOrbit, u32)> = Vec::new();
    if word.len() == 1 {
        for t in disk_roots(lc, i, term, v)? {
            let mut o = ShadowOrbit { boxes: vec![i], t: vec![t.clone()], v: vec![v.clone()] };
            if polish(lc, &mut o, term).is_some() && o.boxed(lc) {
                insert(&mut out, o, &t, 1, tol);
                if mode == Mode::First {
                    break;
                }
            }
        }
        return Some(out);
    }
    let j = word[1];
    let to_centre = Aim { target: j, offset: None };
    let branches = disk_roots(lc, i, &to_centre, v)?;
    let levels: Vec<BigComplex> =
        branches.iter().map(|t| local_map(lc, i, &to_centre, t, v).map(|x| x.1)).collect::<Option<_>>()?;
    let groups = group(&levels, (prec as f64) / 4.0);
    let reps: Vec<BigComplex> = groups.iter().map(|g| levels[g[0]].clone()).collect();
    for (gi, level) in reps.iter().enumerate() {
        if level.log2_abs() > lc.height[j].log2() {
            continue;
        }
        let subs = solve(lc, &word[1..], level, term, mode)?;
        for (s, ms) in subs {
            let aim = Aim { target: j, offset: Some(s.t[0].clone()) };
            for t0 in disk_roots(lc, i, &aim, v)? {
                let Some((_, v1)) = local_map(lc, i, &to_centre, &t0, v) else { continue };
                let nearest = reps
                    .iter()
                    .enumerate()
                    .map(|(k, l)| (k, v1.sub(l).log2_abs() - l.log2_abs()))
                    .min_by(|a, b| a.1.total_cmp(&b.1))
                    .map(|x| x.0);
                if nearest != Some(gi) {
                    continue;
                }
                let mut boxes = vec![i];
                boxes.extend_from_slice(&s.boxes);
                let seed = t0.clone();
                let mut t = vec![t0];
                t.extend(s.t.iter().cloned());
                let mut vv = vec![v.clone()];
                vv.extend(s.v.iter().cloned());
                let mut o = ShadowOrbit { boxes, t, v: vv };
                if polish(lc, &mut o, term).is_some() && o.boxed(lc) {
                    insert(&mut out, o, &seed, ms, tol);
                    if mode == Mode::First {
                        return Some(out);
                    }
                }
            }
        }
    }
    Some(out)
}
