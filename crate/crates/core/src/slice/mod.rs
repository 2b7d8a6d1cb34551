//! Pull-back of vertical lines through words of boxes: slice measures, their
//! logarithmic potentials and the diagnostics built on them.

pub mod local;
mod point;
mod potential;
pub mod shadow;
pub mod solve;
mod winding;

use rug::Rational;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::algebra::RootValue;
use crate::orbit::{BoxSystem, ChartMap};
use crate::scalar::{ensure_exponent_range, rat_string, BigComplex};
use crate::symbol::SymbolWord;
pub use local::{Aim, LocalCharts};
pub use point::{constrained_point, first_orbit, forward_bits, shadow_log_norms, ConstrainedPoint, SOLVER_BITS_CAP};
pub use potential::{
    canonical_potential, convergence_diagnostic, lelong_estimate, lelong_slope, mean_on_circle, ConvergenceRow,
    ConvergenceTable, LelongEstimate, PotentialProfile,
};
pub use shadow::ShadowOrbit;
pub use solve::Mode;
pub use winding::{winding_count, Winding};

/// Working precision of the solver.
pub const DEFAULT_BITS: u32 = 128;

#[derive(Debug, Clone, PartialEq, Error, Serialize)]
pub enum SliceError {
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error("winding mismatch: {found} constrained roots, boundary integral gives {expected}")]
    WindingMismatch { found: u64, expected: i64 },
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("preimage solver failed: {0}")]
    SolverFailed(String),
}

/// Which atoms to compute: the pull-back of `{u = c}` to the level `v0` of
/// box `word(0)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransformPlan {
    pub word: SymbolWord,
    pub level: (f64, f64),
    /// `None` places the line at `centre(word(k-1)) + min(0.05, r / 2)`.
    pub terminal: Option<(f64, f64)>,
    pub precision: u32,
    pub winding: bool,
}

impl TransformPlan {
    pub fn new(word: SymbolWord, level: (f64, f64)) -> Self {
        TransformPlan { word, level, terminal: None, precision: DEFAULT_BITS, winding: true }
    }

    pub fn with_terminal(mut self, c: (f64, f64)) -> Self {
        self.terminal = Some(c);
        self
    }

    pub fn without_winding(mut self) -> Self {
        self.winding = false;
        self
    }
}

/// A plan checked against the boxes.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub word: Vec<usize>,
    pub v0: BigComplex,
    pub term: Aim,
    pub c: (f64, f64),
}

#[derive(Debug, Clone, Serialize)]
pub struct SliceAtom {
    #[serde(serialize_with = "ser_pair")]
    pub u: (f64, f64),
    /// `log2 |u - centre|`, exact even below f64 resolution.
    pub log2_offset: f64,
    #[serde(serialize_with = "ser_rat")]
    pub weight: Rational,
    pub multiplicity: u32,
}

fn ser_pair<S: Serializer>(p: &(f64, f64), s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeStruct;
    let mut st = s.serialize_struct("complex", 2)?;
    st.serialize_field("re", &p.0)?;
    st.serialize_field("im", &p.1)?;
    st.end()
}

fn ser_rat<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&rat_string(r))
}

#[derive(Debug, Clone, Serialize)]
pub struct SliceMeasure {
    pub plan: TransformPlan,
    pub box_index: u32,
    #[serde(serialize_with = "ser_pair")]
    pub terminal: (f64, f64),
    pub atoms: Vec<SliceAtom>,
    #[serde(serialize_with = "ser_rat")]
    pub total_mass: Rational,
    /// `prod_j d_{word(j)}`.
    pub degree_product: u64,
    pub winding_count: Option<i64>,
    pub winding: Option<Winding>,
    #[serde(skip)]
    pub orbits: Vec<(ShadowOrbit, u32)>,
    #[serde(skip)]
    pub centre: RootValue,
}

impl SliceMeasure {
    /// A measure with atoms `u_i` of multiplicity `m_i` and weights
    /// `m_i / sum m`, not tied to any map.
    pub fn from_points(points: &[((f64, f64), u32)], prec: u32) -> SliceMeasure {
        let n: u64 = points.iter().map(|p| p.1 as u64).sum();
        let zero = BigComplex::zero(prec);
        let orbits: Vec<(ShadowOrbit, u32)> = points
            .iter()
            .map(|&(u, m)| {
                let t = BigComplex::from_f64(u.0, u.1, prec);
                (ShadowOrbit { boxes: vec![0], t: vec![t], v: vec![zero.clone()] }, m)
            })
            .collect();
        let atoms: Vec<SliceAtom> = points
            .iter()
            .map(|&(u, m)| SliceAtom {
                u,
                log2_offset: BigComplex::from_f64(u.0, u.1, prec).log2_abs(),
                weight: Rational::from((m, n.max(1))),
                multiplicity: m,
            })
            .collect();
        let mut plan = TransformPlan::new(SymbolWord::default(), (0.0, 0.0)).without_winding();
        plan.precision = prec;
        SliceMeasure {
            plan,
            box_index: 0,
            terminal: (0.0, 0.0),
            total_mass: atoms.iter().fold(Rational::new(), |acc, a| acc + &a.weight),
            atoms,
            degree_product: n,
            winding_count: None,
            winding: None,
            orbits,
            centre: RootValue::Exact(crate::scalar::GaussRat::zero()),
        }
    }

    /// Retained roots counted with multiplicity.
    pub fn root_count(&self) -> u64 {
        self.orbits.iter().map(|o| o.1 as u64).sum()
    }

    /// Atoms relative to the box centre, at the working precision.
    pub fn local_atoms(&self) -> impl Iterator<Item = (&BigComplex, u32)> {
        self.orbits.iter().map(|(o, m)| (&o.t[0], *m))
    }
}

/// Solver state shared across plans on one map.
#[derive(Debug)]
pub struct Slicer<'a> {
    pub f: &'a ChartMap,
    pub boxes: &'a BoxSystem,
    pub lc: LocalCharts,
}

impl<'a> Slicer<'a> {
    pub fn new(f: &'a ChartMap, boxes: &'a BoxSystem) -> Self {
        ensure_exponent_range();
        Slicer { f, boxes, lc: LocalCharts::new(f, boxes) }
    }

    pub fn resolve(&self, plan: &TransformPlan) -> Result<Resolved, SliceError> {
        let m = self.boxes.m();
        if plan.word.is_empty() {
            return Err(SliceError::InvalidPlan("empty word".into()));
        }
        if let Err(e) = plan.word.validate(m) {
            return Err(SliceError::InvalidPlan(e.to_string()));
        }
        if plan.precision < 64 {
            return Err(SliceError::InvalidPlan("precision below 64 bits".into()));
        }
        let word: Vec<usize> = plan.word.letters().iter().map(|&a| a as usize - 1).collect();
        let prec = plan.precision;
        let v0 = BigComplex::from_f64(plan.level.0, plan.level.1, prec);
        let b0 = &self.boxes.boxes[word[0]];
        if v0.is_zero() || v0.log2_abs() > b0.r_prime.log2() {
            return Err(SliceError::InvalidPlan(format!(
                "level must satisfy 0 < |v0| <= {} for box {}",
                b0.r_prime,
                word[0] + 1
            )));
        }
        let last = &self.boxes.boxes[*word.last().unwrap()];
        let c = plan.terminal.unwrap_or_else(|| {
            let (x, y) = last.center_f64();
            (x + (0.05f64).min(last.r / 2.0), y)
        });
        let cb = BigComplex::from_f64(c.0, c.1, prec);
        let (target, dist) = self
            .boxes
            .boxes
            .iter()
            .enumerate()
            .map(|(k, b)| (k, cb.sub(&b.center_big(prec)).log2_abs()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if dist > self.boxes.boxes[target].r.log2() {
            return Err(SliceError::InvalidPlan(format!("terminal line u = {c:?} is not within r of a box centre")));
        }
        let offset = cb.sub(&self.lc.centre_big(target, prec.max(crate::algebra::roots::EXACT_ROOT_BITS))).with_prec(prec);
        Ok(Resolved { word, v0, term: Aim { target, offset: Some(offset) }, c })
    }

    /// Constrained orbits of a plan.
    pub fn orbits(&self, plan: &TransformPlan, mode: Mode) -> Result<Vec<(ShadowOrbit, u32)>, SliceError> {
        let r = self.resolve(plan)?;
        solve::solve(&self.lc, &r.word, &r.v0, &r.term, mode)
            .ok_or_else(|| SliceError::SolverFailed(format!("word {}", plan.word)))
    }

    pub fn degree_product(&self, word: &[usize]) -> u64 {
        word.iter().map(|&i| self.boxes.boxes[i].degree as u64).product()
    }

    pub fn measure(&self, plan: &TransformPlan) -> Result<SliceMeasure, SliceError> {
        let r = self.resolve(plan)?;
        let orbits = solve::solve(&self.lc, &r.word, &r.v0, &r.term, Mode::All)
            .ok_or_else(|| SliceError::SolverFailed(format!("word {}", plan.word)))?;
        let dprod = self.degree_product(&r.word);
        let b0 = &self.boxes.boxes[r.word[0]];
        let prec = plan.precision;
        let centre = b0.center_big(prec);
        let atoms: Vec<SliceAtom> = orbits
            .iter()
            .map(|(o, mult)| SliceAtom {
                u: centre.add(&o.t[0]).to_f64(),
                log2_offset: o.t[0].log2_abs(),
                weight: Rational::from((*mult, dprod)),
                multiplicity: *mult,
            })
            .collect();
        let total_mass = atoms.iter().fold(Rational::new(), |acc, a| acc + &a.weight);
        let found: u64 = orbits.iter().map(|o| o.1 as u64).sum();
        let winding = if plan.winding {
            let w = winding_count(&self.lc, &r.word, &r.v0, &r.term).ok_or_else(|| {
                SliceError::PrecisionExhausted(format!("boundary integral unresolved at {} nodes", 1 << 16))
            })?;
            if w.count != found as i64 {
                return Err(SliceError::WindingMismatch { found, expected: w.count });
            }
            Some(w)
        } else {
            None
        };
        Ok(SliceMeasure {
            plan: plan.clone(),
            box_index: r.word[0] as u32 + 1,
            terminal: r.c,
            atoms,
            total_mass,
            degree_product: dprod,
            winding_count: winding.as_ref().map(|w| w.count),
            winding,
            orbits,
            centre: b0.center.clone(),
        })
    }
}

/// Atoms of the pull-back of the terminal line along `plan.word`.
pub fn constrained_preimages(f: &ChartMap, boxes: &BoxSystem, plan: &TransformPlan) -> Result<SliceMeasure, SliceError> {
    Slicer::new(f, boxes).measure(plan)
}
