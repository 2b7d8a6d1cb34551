//! Newton-polygon certificates for escape exponents at `[0:1:0]`.

use serde::Serialize;
use thiserror::Error;

use crate::algebra::Exps;

/// Why the polygon hypotheses fail, in the order they are checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NewtonFailure {
    /// `(d, 0)` is not in the support of `f1`.
    NoPureZPower,
    /// No `(r1, s1)` in the support of `f1` with `r1 + s1 = d`, `r1, s1 > 0`.
    NoInteriorVertex,
    /// No `(0, s0)` in the support of `f2` with `0 < s0 < d`.
    NoPureWPower,
    /// Every candidate polygon misses part of the supports.
    NotContained,
    /// Every candidate segment meets the support of `f2` outside `(0, s0)`.
    SegmentMeetsSupport,
}

impl NewtonFailure {
    pub fn describe(&self) -> &'static str {
        match self {
            NewtonFailure::NoPureZPower => "no pure z power of top degree in f1",
            NewtonFailure::NoInteriorVertex => "no interior vertex",
            NewtonFailure::NoPureWPower => "no admissible pure w power in f2",
            NewtonFailure::NotContained => "supports not contained in the 4-gon",
            NewtonFailure::SegmentMeetsSupport => "segment meets the support of f2",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NewtonError {
    #[error("Newton hypotheses not met: {}", .0.describe())]
    HypothesesNotMet(NewtonFailure),
    #[error("ambiguous escape exponent: candidates {0:?}")]
    Ambiguous(Vec<u32>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NewtonChecks {
    pub vertices_in_support: bool,
    pub supports_contained: bool,
    pub segment_avoided: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NewtonCertificate {
    pub r0: u32,
    pub s0: u32,
    pub r1: u32,
    pub s1: u32,
    pub polygon: [Exps; 4],
    pub segment: [Exps; 2],
    pub checks: NewtonChecks,
}

impl NewtonCertificate {
    /// The certified escape exponent.
    pub fn ell(&self) -> u32 {
        self.s0
    }
}

fn cross(o: Exps, a: Exps, p: Exps) -> i64 {
    let (ox, oy) = (o.0 as i64, o.1 as i64);
    (a.0 as i64 - ox) * (p.1 as i64 - oy) - (a.1 as i64 - oy) * (p.0 as i64 - ox)
}

fn in_triangle(a: Exps, b: Exps, c: Exps, p: Exps) -> bool {
    cross(a, b, p) >= 0 && cross(b, c, p) >= 0 && cross(c, a, p) >= 0
}

/// Closed 4-gon `(0,0), (r0,0), (r1,s1), (0,s0)`; star-shaped from the origin
/// because `(r1, s1)` lies in the open quadrant.
fn in_polygon(r0: u32, r1: u32, s1: u32, s0: u32, p: Exps) -> bool {
    let o = (0, 0);
    in_triangle(o, (r0, 0), (r1, s1), p) || in_triangle(o, (r1, s1), (0, s0), p)
}

fn on_segment(a: Exps, b: Exps, p: Exps) -> bool {
    cross(a, b, p) == 0 && p.0 >= a.0.min(b.0) && p.0 <= a.0.max(b.0) && p.1 >= a.1.min(b.1) && p.1 <= a.1.max(b.1)
}

/// Searches all admissible `(s0, r1, s1)` for the supports `pi1` of `f1` and
/// `pi2` of `f2`, with `r0 = d = deg f1`.
pub fn newton_certificate(pi1: &[Exps], pi2: &[Exps], d: u32) -> Result<NewtonCertificate, NewtonError> {
    use NewtonFailure::*;
    let r0 = d;
    if !pi1.contains(&(r0, 0)) {
        return Err(NewtonError::HypothesesNotMet(NoPureZPower));
    }
    let verts: Vec<Exps> = pi1.iter().copied().filter(|&(r, s)| r + s == r0 && s > 0 && r > 0).collect();
    if verts.is_empty() {
        return Err(NewtonError::HypothesesNotMet(NoInteriorVertex));
    }
    let s0s: Vec<u32> = pi2.iter().filter(|&&(r, s)| r == 0 && s > 0 && s < r0).map(|&(_, s)| s).collect();
    if s0s.is_empty() {
        return Err(NewtonError::HypothesesNotMet(NoPureWPower));
    }
    let mut contained_any = false;
    let mut found: Vec<NewtonCertificate> = Vec::new();
    for &s0 in &s0s {
        for &(r1, s1) in &verts {
            let inside = pi1.iter().chain(pi2.iter()).all(|&p| in_polygon(r0, r1, s1, s0, p));
            if !inside {
                continue;
            }
            contained_any = true;
            let avoids = pi2.iter().filter(|&&p| p != (0, s0)).all(|&p| !on_segment((0, s0), (r1, s1), p));
            if !avoids {
                continue;
            }
            if found.iter().all(|c| c.s0 != s0) {
                found.push(NewtonCertificate {
                    r0,
                    s0,
                    r1,
                    s1,
                    polygon: [(0, 0), (r0, 0), (r1, s1), (0, s0)],
                    segment: [(0, s0), (r1, s1)],
                    checks: NewtonChecks { vertices_in_support: true, supports_contained: true, segment_avoided: true },
                });
            }
        }
    }
    match found.len() {
        0 if contained_any => Err(NewtonError::HypothesesNotMet(SegmentMeetsSupport)),
        0 => Err(NewtonError::HypothesesNotMet(NotContained)),
        1 => Ok(found.pop().unwrap()),
        _ => {
            let mut v: Vec<u32> = found.iter().map(|c| c.s0).collect();
            v.sort_unstable();
            Err(NewtonError::Ambiguous(v))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_one_first_point() {
        let c = newton_certificate(&[(2, 2), (3, 1), (4, 0)], &[(0, 2), (3, 0)], 4).unwrap();
        assert_eq!((c.r0, c.s0, c.r1, c.s1), (4, 2, 2, 2));
    }

    #[test]
    fn single_point_support_has_no_vertex() {
        let e = newton_certificate(&[(3, 0)], &[(0, 2)], 3).unwrap_err();
        assert_eq!(e, NewtonError::HypothesesNotMet(NewtonFailure::NoInteriorVertex));
    }

    #[test]
    fn cubic_with_three_points() {
        let c = newton_certificate(&[(3, 0), (1, 2)], &[(0, 2)], 3).unwrap();
        assert_eq!((c.r0, c.s0, c.r1, c.s1), (3, 2, 1, 2));
    }

    #[test]
    fn segment_hit_is_reported() {
        // (1, 2) lies on the segment from (0, 1) to (2, 3)
        let e = newton_certificate(&[(5, 0), (2, 3)], &[(0, 1), (1, 2)], 5).unwrap_err();
        assert_eq!(e, NewtonError::HypothesesNotMet(NewtonFailure::SegmentMeetsSupport));
    }

    #[test]
    fn lower_pure_powers_are_not_contained() {
        let c = newton_certificate(&[(4, 0), (1, 3)], &[(0, 1), (0, 2)], 4).unwrap();
        assert_eq!(c.ell(), 2);
    }

    #[test]
    fn missing_top_power() {
        let e = newton_certificate(&[(2, 2)], &[(0, 1)], 4).unwrap_err();
        assert_eq!(e, NewtonError::HypothesesNotMet(NewtonFailure::NoPureZPower));
    }
}
