//! Escape-rate estimates, partial Green functions and spectrum scans.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rug::Float;
use serde::Serialize;

use super::boxes::{level_preimages, BoxSystem};
use super::chart::{ChartMap, ChartPoint, OrbitError};
use super::iterate::{iterate, itinerary_string, Classification, IterOptions, OrbitRecord};
use crate::scalar::BigComplex;

/// Sliding-window estimate `(L_n / L_{n-w})^{1/w}` with `L_n = ln ||f^n p||`
/// and `w = min(tail, n)`, minimized and maximized over the last `tail`
/// indices. The ratio cancels the additive constant in `ln L_n`.
pub fn escape_rate(rec: &OrbitRecord, tail: usize) -> Result<(f64, f64), OrbitError> {
    if tail < 1 {
        return Err(OrbitError::InvalidParams("tail must be positive".into()));
    }
    if !rec.classification.is_escaping() || rec.n_steps < tail {
        return Err(OrbitError::NotEscaping);
    }
    let l = &rec.log_norms;
    let n = rec.n_steps;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for k in n + 1 - tail..=n {
        let a = k.saturating_sub(tail);
        let w = (k - a) as f64;
        if l[a] <= 0.0 || l[k] <= 0.0 {
            continue;
        }
        let r = ((l[k].ln() - l[a].ln()) / w).exp();
        lo = lo.min(r);
        hi = hi.max(r);
    }
    if lo.is_finite() {
        Ok((lo, hi))
    } else {
        Err(OrbitError::NotEscaping)
    }
}

/// `exp((1/n) ln ln ||f^n p||)`, the literal finite-n rate.
pub fn loglog_rate(rec: &OrbitRecord, n: usize) -> Option<f64> {
    let l = *rec.log_norms.get(n)?;
    (n > 0 && l > 0.0).then(|| (l.ln() / n as f64).exp())
}

/// Min and max of [`loglog_rate`] over the last `tail` indices.
pub fn literal_escape_rate(rec: &OrbitRecord, tail: usize) -> Result<(f64, f64), OrbitError> {
    if !rec.classification.is_escaping() || rec.n_steps < tail {
        return Err(OrbitError::NotEscaping);
    }
    let vals: Vec<f64> = (rec.n_steps + 1 - tail..=rec.n_steps).filter_map(|n| loglog_rate(rec, n)).collect();
    if vals.is_empty() {
        return Err(OrbitError::NotEscaping);
    }
    Ok((vals.iter().copied().fold(f64::INFINITY, f64::min), vals.iter().copied().fold(f64::NEG_INFINITY, f64::max)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GreenSeries {
    /// `g_n = L_n / prod_{j<n} l_{alpha(j)}`.
    pub g: Vec<f64>,
    /// `|g_{n+1} - g_n| prod_{j<=n} l_{alpha(j)} = |L_{n+1} - l_{alpha(n)} L_n|`.
    pub cauchy: Vec<f64>,
    pub median: f64,
    /// `max cauchy / median` and `median / min cauchy`.
    pub spread: (f64, f64),
}

impl GreenSeries {
    /// All Cauchy products within a factor 2 of their median.
    pub fn stable(&self) -> bool {
        self.spread.0 <= 2.0 && self.spread.1 <= 2.0
    }
}

/// Partial Green function along the itinerary of `rec`, from index `n0`.
pub fn partial_green(rec: &OrbitRecord, ell: &[f64], n0: usize) -> Result<GreenSeries, OrbitError> {
    if !rec.classification.is_escaping() {
        return Err(OrbitError::NotEscaping);
    }
    let symbols = rec.symbol_prefix();
    let n = symbols.len().min(rec.n_steps);
    if n <= n0 + 1 {
        return Err(OrbitError::DivergentSeries("itinerary too short".into()));
    }
    let factors: Vec<f64> = symbols[..n].iter().map(|&s| ell[s as usize - 1]).collect();
    if factors.iter().any(|&x| x <= 1.0) {
        return Err(OrbitError::DivergentSeries("an exponent along the itinerary is at most 1".into()));
    }
    let mut g = Vec::with_capacity(n + 1);
    let mut prod = 1.0;
    for k in 0..=n {
        g.push(rec.log_norms[k] / prod);
        if k < n {
            prod *= factors[k];
        }
    }
    let cauchy: Vec<f64> = match &rec.log_norms_hp {
        Some(hp) => (n0..n)
            .map(|k| {
                let p = hp[k].prec().max(64);
                let t = Float::with_val(p, &hp[k] * factors[k]);
                Float::with_val(p, &hp[k + 1] - &t).abs().to_f64()
            })
            .collect(),
        None => (n0..n).map(|k| (rec.log_norms[k + 1] - factors[k] * rec.log_norms[k]).abs()).collect(),
    };
    let mut sorted = cauchy.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    let max = sorted[sorted.len() - 1];
    let min = sorted[0];
    Ok(GreenSeries { g, cauchy, median, spread: (max / median, median / min) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sampler {
    pub count: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumRow {
    pub point_id: usize,
    pub z0: (f64, f64),
    pub w0: (f64, f64),
    pub classification: Classification,
    pub rate: Option<(f64, f64)>,
    pub itinerary: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumResult {
    pub rows: Vec<SpectrumRow>,
    /// `(bin lower edge, count)` with bins of width [`BIN_WIDTH`].
    pub histogram: Vec<(f64, usize)>,
    pub violations: Vec<usize>,
    pub allowed: Vec<(f64, f64)>,
    pub delta: f64,
}

impl SpectrumResult {
    /// Columns `point_id, z0_re, z0_im, w0_re, w0_im, classification,
    /// rate_lower, rate_upper, itinerary`; rates are empty when undefined.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> csv::Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record([
            "point_id",
            "z0_re",
            "z0_im",
            "w0_re",
            "w0_im",
            "classification",
            "rate_lower",
            "rate_upper",
            "itinerary",
        ])?;
        for r in &self.rows {
            let (lo, hi) = r.rate.map_or((String::new(), String::new()), |(a, b)| (a.to_string(), b.to_string()));
            wr.write_record([
                r.point_id.to_string(),
                r.z0.0.to_string(),
                r.z0.1.to_string(),
                r.w0.0.to_string(),
                r.w0.1.to_string(),
                r.classification.as_str().to_string(),
                lo,
                hi,
                r.itinerary.clone(),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }
}

pub const BIN_WIDTH: f64 = 0.05;
pub const SPECTRUM_DELTA: f64 = 0.15;

/// A point with `r_min <= ||p|| <= r_max`: the norm is drawn uniformly, one
/// coordinate attains it, the other is uniform in the disk of that radius.
pub fn sample_point<R: Rng>(rng: &mut R, r_min: f64, r_max: f64) -> ((f64, f64), (f64, f64)) {
    let rho = rng.gen_range(r_min..=r_max);
    let t1 = rng.gen_range(0.0..std::f64::consts::TAU);
    let t2 = rng.gen_range(0.0..std::f64::consts::TAU);
    let s = rho * rng.gen::<f64>().sqrt();
    let a = (rho * t1.cos(), rho * t1.sin());
    let b = (s * t2.cos(), s * t2.sin());
    if rng.gen::<bool>() {
        (a, b)
    } else {
        (b, a)
    }
}

/// Escape rates of random points; midpoints outside
/// `[min l - delta, max l + delta] U [d - delta, d + delta]` are violations.
pub fn spectrum_scan(
    f: &ChartMap,
    boxes: &BoxSystem,
    ell: &[f64],
    sampler: Sampler,
    n: usize,
    tail: usize,
    prec: u32,
    opts: IterOptions,
) -> SpectrumResult {
    let rows: Vec<SpectrumRow> = (0..sampler.count)
        .into_par_iter()
        .map(|id| {
            let mut rng = ChaCha8Rng::seed_from_u64(sampler.seed ^ id as u64);
            let (z0, w0) = sample_point(&mut rng, sampler.r_min, sampler.r_max);
            let p = ChartPoint::affine_f64(z0, w0, prec);
            let rec = iterate(f, &p, n, boxes, opts);
            let rate = escape_rate(&rec, tail).ok();
            SpectrumRow {
                point_id: id,
                z0,
                w0,
                classification: rec.classification,
                rate,
                itinerary: itinerary_string(&rec.itinerary),
            }
        })
        .collect();
    let d = f.d() as f64;
    let lmin = ell.iter().copied().fold(f64::INFINITY, f64::min);
    let lmax = ell.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let delta = SPECTRUM_DELTA;
    let allowed = vec![(lmin - delta, lmax + delta), (d - delta, d + delta)];
    let mut hist: BTreeMap<i64, usize> = BTreeMap::new();
    let mut violations = Vec::new();
    for row in &rows {
        let Some((lo, hi)) = row.rate else { continue };
        let mid = 0.5 * (lo + hi);
        *hist.entry((mid / BIN_WIDTH).floor() as i64).or_default() += 1;
        if !allowed.iter().any(|&(a, b)| mid >= a && mid <= b) {
            violations.push(row.point_id);
        }
    }
    let histogram = hist.into_iter().map(|(k, c)| (k as f64 * BIN_WIDTH, c)).collect();
    SpectrumResult { rows, histogram, violations, allowed, delta }
}

/// `ln ||f(p)|| / ln ||p||` averaged over points of box `i` at `|v| = level`
/// whose images lie on the centre lines of the boxes (so away from `X`).
pub fn empirical_exponent(f: &ChartMap, boxes: &BoxSystem, i: usize, level: f64, prec: u32) -> Option<f64> {
    let b = &boxes.boxes[i];
    let c = b.center_big(prec);
    let mut acc = Vec::new();
    for (k, tgt) in boxes.boxes.iter().enumerate() {
        let tau = tgt.center_big(prec);
        let theta = 0.7 + k as f64;
        let v = BigComplex::from_f64(level * theta.cos(), level * theta.sin(), prec);
        for u in level_preimages(f, &c, b.r, &v, &tau) {
            let p = ChartPoint::infinity(u.clone(), v.clone());
            if let Some((nu, nv)) = f.chart_step(&u, &v) {
                let q = ChartPoint::infinity(nu, nv);
                acc.push(q.log_norm() / p.log_norm());
            }
        }
    }
    (!acc.is_empty()).then(|| acc.iter().sum::<f64>() / acc.len() as f64)
}

/// Number of rows per classification.
pub fn classification_counts(rows: &[SpectrumRow]) -> BTreeMap<&'static str, usize> {
    let mut m = BTreeMap::new();
    for r in rows {
        *m.entry(r.classification.as_str()).or_default() += 1;
    }
    m
}
