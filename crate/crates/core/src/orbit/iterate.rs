use rug::Float;
use serde::Serialize;

use super::boxes::BoxSystem;
use super::chart::{step, ChartMap, ChartPoint, OrbitError, CHART_SWITCH, DEFAULT_PRECISION_CAP};

/// Iteration stops once `ln ||f^n p||` exceeds this, well inside the MPFR
/// exponent range.
pub const LOG_NORM_LIMIT: f64 = 1e17;
/// Number of trailing gap-free symbols that makes an orbit `boxed`.
pub const BOXED_TAIL: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    BoundedCandidate,
    BasinOfX,
    Boxed,
    /// Escaping, but neither absorbed by `V(X)` nor ending inside the boxes.
    Transient,
    LostPrecision,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::BoundedCandidate => "bounded_candidate",
            Classification::BasinOfX => "basin_of_X",
            Classification::Boxed => "boxed",
            Classification::Transient => "transient",
            Classification::LostPrecision => "lost_precision",
        }
    }

    pub fn is_escaping(&self) -> bool {
        !matches!(self, Classification::BoundedCandidate | Classification::LostPrecision)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterOptions {
    pub cap: u32,
    /// Keep `ln ||f^n p||` at working precision as well.
    pub keep_hp: bool,
}

impl Default for IterOptions {
    fn default() -> Self {
        IterOptions { cap: DEFAULT_PRECISION_CAP, keep_hp: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitRecord {
    /// `ln ||f^n p||` for `n = 0..=n_steps`.
    pub log_norms: Vec<f64>,
    #[serde(skip)]
    pub log_norms_hp: Option<Vec<Float>>,
    /// 1-based box index of `f^n p`, `None` outside the boxes.
    #[serde(serialize_with = "ser_itinerary")]
    pub itinerary: Vec<Option<u32>>,
    pub classification: Classification,
    pub n_steps: usize,
    pub vx_entry: Option<usize>,
    pub final_precision: u32,
}

fn ser_itinerary<S: serde::Serializer>(it: &[Option<u32>], s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&itinerary_string(it))
}

/// Symbols as digits with `-` for gaps.
pub fn itinerary_string(it: &[Option<u32>]) -> String {
    it.iter()
        .map(|x| match x {
            Some(l) if *l < 10 => char::from_digit(*l, 10).unwrap(),
            Some(l) => (b'a' + (*l - 10) as u8) as char,
            None => '-',
        })
        .collect()
}

impl OrbitRecord {
    /// Leading symbols up to the first gap.
    pub fn symbol_prefix(&self) -> Vec<u32> {
        self.itinerary.iter().map_while(|x| *x).collect()
    }
}

pub fn iterate(f: &ChartMap, p: &ChartPoint, n_max: usize, boxes: &BoxSystem, opts: IterOptions) -> OrbitRecord {
    let mut cur = p.clone();
    let mut log_norms = vec![cur.log_norm()];
    let mut hp = opts.keep_hp.then(|| vec![cur.log_norm_hp()]);
    let mut itinerary = vec![boxes.locate_point(&cur).map(|i| i as u32 + 1)];
    let mut vx_entry = boxes.in_vx(&cur).then_some(0);
    let mut lost = false;
    let mut n = 0;
    while n < n_max && log_norms[n] < LOG_NORM_LIMIT {
        match step(f, &cur, opts.cap) {
            Ok(q) => cur = q,
            Err(_) => {
                lost = true;
                break;
            }
        }
        n += 1;
        log_norms.push(cur.log_norm());
        if let Some(h) = hp.as_mut() {
            h.push(cur.log_norm_hp());
        }
        itinerary.push(boxes.locate_point(&cur).map(|i| i as u32 + 1));
        if vx_entry.is_none() && boxes.in_vx(&cur) {
            vx_entry = Some(n);
        }
    }
    let tail = &itinerary[itinerary.len().saturating_sub(BOXED_TAIL)..];
    let classification = if lost {
        Classification::LostPrecision
    } else if vx_entry.is_some() {
        Classification::BasinOfX
    } else if log_norms.iter().all(|&l| l < CHART_SWITCH.ln()) {
        Classification::BoundedCandidate
    } else if tail.iter().all(|x| x.is_some()) {
        Classification::Boxed
    } else {
        Classification::Transient
    };
    OrbitRecord {
        log_norms,
        log_norms_hp: hp,
        itinerary,
        classification,
        n_steps: n,
        vx_entry,
        final_precision: cur.prec,
    }
}

/// Convenience wrapper returning an error on precision loss.
pub fn iterate_checked(
    f: &ChartMap,
    p: &ChartPoint,
    n_max: usize,
    boxes: &BoxSystem,
    opts: IterOptions,
) -> Result<OrbitRecord, OrbitError> {
    let rec = iterate(f, p, n_max, boxes, opts);
    if rec.classification == Classification::LostPrecision {
        return Err(OrbitError::LostPrecision { bits: rec.final_precision });
    }
    Ok(rec)
}
