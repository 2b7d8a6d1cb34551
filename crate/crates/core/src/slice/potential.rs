//! Logarithmic potentials of slice measures and the diagnostics on them.

use std::io;

use rug::Float;
use serde::{Serialize, Serializer};

use super::shadow::refine;
use super::{Slicer, SliceError, SliceMeasure, TransformPlan};
use crate::scalar::BigComplex;
use crate::symbol::SymbolWord;

/// Sampled `u(zeta) = sum_i w_i log|zeta - u_i|`; `-inf` at atoms.
#[derive(Debug, Clone, Serialize)]
pub struct PotentialProfile {
    pub plan: TransformPlan,
    pub grid: Vec<(f64, f64)>,
    #[serde(serialize_with = "ser_values")]
    pub values: Vec<f64>,
}

fn ser_values<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        if x.is_finite() {
            seq.serialize_element(x)?;
        } else {
            seq.serialize_element("-inf")?;
        }
    }
    seq.end()
}

impl PotentialProfile {
    /// Columns `zeta_re, zeta_im, u`.
    pub fn write_csv<W: io::Write>(&self, w: W) -> csv::Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["zeta_re", "zeta_im", "u"])?;
        for (z, u) in self.grid.iter().zip(&self.values) {
            let us = if u.is_finite() { u.to_string() } else { "-inf".into() };
            wr.write_record([z.0.to_string(), z.1.to_string(), us])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// `zeta - centre` at working precision.
fn local_point(sm: &SliceMeasure, zeta: (f64, f64), prec: u32) -> BigComplex {
    let p = prec.max(crate::algebra::roots::EXACT_ROOT_BITS);
    BigComplex::from_f64(zeta.0, zeta.1, p).sub(&sm.centre.to_big(p)).with_prec(prec)
}

fn potential_local(sm: &SliceMeasure, z: &BigComplex, prec: u32) -> f64 {
    let n = sm.degree_product as f64;
    let mut acc = 0.0;
    for (t, m) in sm.local_atoms() {
        let d = z.with_prec(prec).sub(&t.with_prec(prec));
        if d.is_zero() {
            return f64::NEG_INFINITY;
        }
        acc += m as f64 / n * d.ln_abs_f64();
    }
    acc
}

pub fn potential_at(sm: &SliceMeasure, zeta: (f64, f64)) -> f64 {
    let prec = sm.plan.precision;
    potential_local(sm, &local_point(sm, zeta, prec), prec)
}

pub fn canonical_potential(sm: &SliceMeasure, grid: &[(f64, f64)]) -> PotentialProfile {
    PotentialProfile { plan: sm.plan.clone(), grid: grid.to_vec(), values: grid.iter().map(|&z| potential_at(sm, z)).collect() }
}

/// Average of `u` over `n` equally spaced points of a circle.
pub fn mean_on_circle(sm: &SliceMeasure, centre: (f64, f64), radius: f64, n: usize) -> f64 {
    let s: f64 = (0..n)
        .map(|k| {
            let th = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            potential_at(sm, (centre.0 + radius * th.cos(), centre.1 + radius * th.sin()))
        })
        .sum();
    s / n as f64
}

/// Sample points of the test circle `|u - centre| = radius`, local coordinates.
fn circle(radius: f64, n: usize, prec: u32) -> Vec<BigComplex> {
    (0..n)
        .map(|k| {
            let th = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / n as f64;
            BigComplex::from_f64(radius * th.cos(), radius * th.sin(), prec)
        })
        .collect()
}

/// `u` in high precision along a set of local points.
fn potential_hp(sm: &SliceMeasure, pts: &[BigComplex], prec: u32) -> Vec<Float> {
    let n = sm.degree_product;
    pts.iter()
        .map(|z| {
            let mut acc = Float::with_val(prec, 0);
            for (t, m) in sm.local_atoms() {
                let d = z.with_prec(prec).sub(&t.with_prec(prec));
                let term = d.ln_abs() * m;
                acc += term;
            }
            acc / n
        })
        .collect()
}

fn log10_sup(a: &[Float], b: &[Float]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = Float::with_val(x.prec().max(y.prec()), x - y);
            crate::orbit::chart::log2_wide(&d) * std::f64::consts::LN_2 / std::f64::consts::LN_10
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `log2` of the potential error due to the atom precision.
fn noise_floor(sm: &SliceMeasure, radius: f64) -> f64 {
    let top = sm.local_atoms().map(|(t, _)| t.log2_abs()).fold(f64::NEG_INFINITY, f64::max);
    top - radius.log2() - sm.orbits.first().map_or(0, |o| o.0.prec()) as f64 + 8.0
}

/// Re-polishes every orbit at a higher precision.
fn refined(slicer: &Slicer, sm: &SliceMeasure, prec: u32) -> Result<SliceMeasure, SliceError> {
    let mut plan = sm.plan.clone();
    plan.precision = prec;
    let r = slicer.resolve(&plan)?;
    let mut out = sm.clone();
    out.plan = plan;
    out.orbits = sm
        .orbits
        .iter()
        .map(|(o, m)| refine(&slicer.lc, o, &r.term, prec).map(|x| (x, *m)))
        .collect::<Option<_>>()
        .ok_or_else(|| SliceError::PrecisionExhausted(format!("refinement to {prec} bits")))?;
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub k: usize,
    pub word: SymbolWord,
    pub atoms: usize,
    /// `log10 sup |u_{k+1} - u_k|` on the test circle.
    pub log10_d: Option<f64>,
    /// `D_{k} / D_{k-1}`.
    pub ratio: Option<f64>,
    /// `log10 sup |u_k^{c1} - u_k^{c2}|`.
    pub log10_gap: Option<f64>,
    /// `min u_k` over the atoms of depth `k + 1`.
    pub slice_min: Option<f64>,
    pub resolved: bool,
    pub precision: u32,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceTable {
    pub level: (f64, f64),
    pub test_radius: f64,
    pub terminals: Vec<(f64, f64)>,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    pub fn d_values(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.log10_d).collect()
    }
}

const CIRCLE_NODES: usize = 64;
const MAX_BITS: u32 = 1 << 14;

/// Differences of the potentials of successive pull-backs on the circle of
/// radius `test_radius` around the centre of `word(0)`. Potentials are
/// evaluated at a precision fine enough to see the difference; when the
/// difference is below the noise left by the atoms, the atoms are refined.
pub fn convergence_diagnostic(
    slicer: &Slicer,
    word_prefix: &dyn Fn(usize) -> SymbolWord,
    k_max: usize,
    level: (f64, f64),
    terminals: &[(f64, f64)],
    test_radius: f64,
) -> Result<ConvergenceTable, SliceError> {
    if k_max == 0 {
        return Err(SliceError::InvalidPlan("k_max must be at least 1".into()));
    }
    let plan_for = |k: usize, c: Option<(f64, f64)>| {
        let mut p = TransformPlan::new(word_prefix(k), level).without_winding();
        p.terminal = c;
        p
    };
    let c1 = terminals.first().copied();
    let c2 = terminals.get(1).copied();
    let mut ms: Vec<SliceMeasure> = (1..=k_max).map(|k| slicer.measure(&plan_for(k, c1))).collect::<Result<_, _>>()?;
    let mut alt: Vec<Option<SliceMeasure>> = match c2 {
        Some(c) => (1..=k_max).map(|k| slicer.measure(&plan_for(k, Some(c))).map(Some)).collect::<Result<_, _>>()?,
        None => vec![None; k_max],
    };
    let mut rows = Vec::new();
    let mut prev_d: Option<f64> = None;
    for k in 1..=k_max {
        let mut resolved = true;
        let mut row_prec = ms[k - 1].plan.precision;
        let mut log10_d = None;
        if k < k_max {
            loop {
                let prec = ms[k - 1].plan.precision.max(ms[k].plan.precision);
                let eval = eval_bits(&ms[k - 1], test_radius).max(eval_bits(&ms[k], test_radius));
                let pts = circle(test_radius, CIRCLE_NODES, eval);
                let d = log10_sup(&potential_hp(&ms[k - 1], &pts, eval), &potential_hp(&ms[k], &pts, eval));
                let floor = noise_floor(&ms[k - 1], test_radius).max(noise_floor(&ms[k], test_radius))
                    * std::f64::consts::LOG10_2;
                row_prec = prec;
                if d > floor {
                    log10_d = Some(d);
                    break;
                }
                if prec * 2 > MAX_BITS {
                    resolved = false;
                    log10_d = Some(d);
                    break;
                }
                ms[k - 1] = refined(slicer, &ms[k - 1], prec * 2)?;
                ms[k] = refined(slicer, &ms[k], prec * 2)?;
            }
        }
        let mut log10_gap = None;
        if let Some(b) = alt[k - 1].as_mut() {
            loop {
                let a = &ms[k - 1];
                let prec = a.plan.precision.max(b.plan.precision);
                let eval = eval_bits(a, test_radius).max(eval_bits(b, test_radius));
                let pts = circle(test_radius, CIRCLE_NODES, eval);
                let g = log10_sup(&potential_hp(a, &pts, eval), &potential_hp(b, &pts, eval));
                let floor =
                    noise_floor(a, test_radius).max(noise_floor(b, test_radius)) * std::f64::consts::LOG10_2;
                if g > floor || prec * 2 > MAX_BITS {
                    resolved &= g > floor;
                    log10_gap = Some(g);
                    break;
                }
                ms[k - 1] = refined(slicer, &ms[k - 1], prec * 2)?;
                *b = refined(slicer, b, prec * 2)?;
            }
        }
        let slice_min = (k < k_max).then(|| {
            let next = &ms[k];
            let cur = &ms[k - 1];
            let prec = cur.plan.precision;
            next.local_atoms()
                .map(|(t, _)| potential_local(cur, t, prec))
                .fold(f64::INFINITY, f64::min)
        });
        let ratio = match (prev_d, log10_d) {
            (Some(a), Some(b)) => Some(10f64.powf(b - a)),
            _ => None,
        };
        prev_d = log10_d;
        rows.push(ConvergenceRow {
            k,
            word: word_prefix(k),
            atoms: ms[k - 1].atoms.len(),
            log10_d,
            ratio,
            log10_gap,
            slice_min,
            resolved,
            precision: row_prec,
        });
    }
    Ok(ConvergenceTable { level, test_radius, terminals: terminals.to_vec(), rows })
}

/// Enough bits to resolve `log|zeta - t|` against `log|zeta|` for every atom.
fn eval_bits(sm: &SliceMeasure, radius: f64) -> u32 {
    let lo = sm.local_atoms().map(|(t, _)| t.log2_abs()).fold(f64::INFINITY, f64::min);
    let gap = (radius.log2() - lo).max(0.0).min(1e6);
    sm.plan.precision + 64 + (2.0 * gap).ceil() as u32
}

#[derive(Debug, Clone, Serialize)]
pub struct LelongEstimate {
    pub radii: Vec<f64>,
    /// `max u` on `|u - centre| = rho`.
    pub maxima: Vec<f64>,
    pub slope: f64,
}

/// Least-squares slope of `M(rho)` against `log rho`.
pub fn lelong_slope(radii: &[f64], m: &dyn Fn(f64) -> f64) -> LelongEstimate {
    let maxima: Vec<f64> = radii.iter().map(|&r| m(r)).collect();
    let xs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = maxima.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&maxima).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    LelongEstimate { radii: radii.to_vec(), maxima, slope: sxy / sxx }
}

/// Maximum of the potential of `sm` on `|u - centre| = rho`.
pub fn circle_max(sm: &SliceMeasure, rho: f64, n: usize) -> f64 {
    let prec = sm.plan.precision;
    circle(rho, n, prec).iter().map(|z| potential_local(sm, z, prec)).fold(f64::NEG_INFINITY, f64::max)
}

/// Lelong number proxy at the centre of `word(0)`: the slice measure at level
/// `|v0| = rho` is sampled on the circle of the same radius.
pub fn lelong_estimate(slicer: &Slicer, word: &SymbolWord, radii: &[f64]) -> Result<LelongEstimate, SliceError> {
    if radii.len() < 2 {
        return Err(SliceError::InvalidPlan("at least two radii are needed".into()));
    }
    let ms: Vec<SliceMeasure> = radii
        .iter()
        .map(|&r| slicer.measure(&TransformPlan::new(word.clone(), (r, 0.0)).without_winding()))
        .collect::<Result<_, _>>()?;
    let maxima: Vec<f64> = ms.iter().zip(radii).map(|(m, &r)| circle_max(m, r, CIRCLE_NODES)).collect();
    let lookup = |r: f64| maxima[radii.iter().position(|&x| x == r).unwrap()];
    Ok(lelong_slope(radii, &lookup))
}
