//! Single constrained atoms as global points, for forward iteration.

use serde::Serialize;

use super::shadow::{refine, ShadowOrbit};
use super::{Mode, Resolved, Slicer, SliceError, TransformPlan};
use crate::orbit::{ChartPoint, IterOptions};
use crate::symbol::SymbolWord;

/// Upper limit on the forward precision.
pub const POINT_BITS_CAP: u32 = 1 << 20;

#[derive(Debug, Clone, Serialize)]
pub struct ConstrainedPoint {
    pub word: SymbolWord,
    #[serde(skip)]
    pub point: ChartPoint,
    #[serde(skip)]
    pub shadow: ShadowOrbit,
    /// Precision needed to follow the word in global coordinates.
    pub required_bits: u32,
    pub bits: u32,
    pub capped: bool,
}

impl ConstrainedPoint {
    /// `ln ||f^j p||` along the shadow orbit, `j < k`.
    pub fn shadow_log_norms(&self, slicer: &Slicer) -> Vec<f64> {
        shadow_log_norms(slicer, &self.shadow)
    }

    /// Options for forward iteration: the step check compares against half
    /// precision, so the cap leaves room for two doublings.
    pub fn iterate_options(&self) -> IterOptions {
        IterOptions { cap: self.bits.max(64) * 4, keep_hp: false }
    }
}

/// `ln ||.||` of the points of a shadow orbit.
pub fn shadow_log_norms(slicer: &Slicer, o: &ShadowOrbit) -> Vec<f64> {
    o.boxes
        .iter()
        .enumerate()
        .map(|(j, &b)| {
            let c = slicer.lc.centre_big(b, o.prec());
            let u = c.add(&o.t[j]);
            u.ln_abs_f64().max(0.0) - o.v[j].ln_abs_f64()
        })
        .collect()
}

/// First constrained orbit of `word`, doubling the solver precision while
/// none is found.
pub fn first_orbit(slicer: &Slicer, word: &SymbolWord, level: (f64, f64)) -> Result<(Resolved, ShadowOrbit), SliceError> {
    let mut plan = TransformPlan::new(word.clone(), level).without_winding();
    loop {
        let r = slicer.resolve(&plan)?;
        if let Some((o, _)) = slicer.orbits(&plan, Mode::First)?.into_iter().next() {
            return Ok((r, o));
        }
        if plan.precision * 2 > SOLVER_BITS_CAP {
            return Err(SliceError::SolverFailed(format!("no constrained atom for word {word}")));
        }
        plan.precision *= 2;
    }
}

/// Bits for global iteration along a shadow orbit: `u_j = a + t_j` must
/// resolve `t_j`, and relative errors grow at most by `d` per step.
pub fn forward_bits(slicer: &Slicer, o: &ShadowOrbit) -> u32 {
    let gap = o
        .boxes
        .iter()
        .enumerate()
        .map(|(j, &b)| {
            let (x, y) = slicer.boxes.boxes[b].center_f64();
            let a = (x * x + y * y).sqrt();
            if a == 0.0 {
                0.0
            } else {
                (a.log2() - o.t[j].log2_abs()).max(0.0)
            }
        })
        .fold(0.0, f64::max);
    let growth = o.len() as f64 * (slicer.lc.d as f64).log2().ceil();
    (64.0 + gap + growth).ceil() as u32
}

/// Largest solver precision tried before giving up on a word.
pub const SOLVER_BITS_CAP: u32 = 4096;

/// One atom of the pull-back along `word`, as a point at the precision needed
/// to reproduce the word under forward iteration.
pub fn constrained_point(slicer: &Slicer, word: &SymbolWord, level: (f64, f64)) -> Result<ConstrainedPoint, SliceError> {
    let (r, shadow) = first_orbit(slicer, word, level)?;
    let required = forward_bits(slicer, &shadow);
    let bits = required.min(POINT_BITS_CAP);
    let shadow = if bits > shadow.prec() {
        refine(&slicer.lc, &shadow, &r.term, bits)
            .ok_or_else(|| SliceError::PrecisionExhausted(format!("refinement of word {word} to {bits} bits")))?
    } else {
        shadow
    };
    let c = slicer.lc.centre_big(r.word[0], bits);
    let u = c.add(&shadow.t[0].with_prec(bits));
    let point = ChartPoint::infinity(u, r.v0.with_prec(bits));
    Ok(ConstrainedPoint { word: word.clone(), point, shadow, required_bits: required, bits, capped: required > bits })
}
