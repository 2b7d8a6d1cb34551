//! Bidisks at the indeterminacy points, with sampled horizontal-like checks.

use serde::Serialize;

use super::chart::{ChartMap, ChartPoint, OrbitError};
use crate::algebra::roots::{aberth, EXACT_ROOT_BITS};
use crate::algebra::RootValue;
use crate::infinity::InfinityProfile;
use crate::scalar::BigComplex;

/// Precision of the sampled certification checks.
const CHECK_BITS: u32 = 128;
const MAX_HALVINGS: u32 = 20;
const MAX_RADIUS_DOUBLINGS: u32 = 24;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoxParams {
    pub r_scale: f64,
    pub grid_n: usize,
    pub eps: f64,
}

impl Default for BoxParams {
    fn default() -> Self {
        BoxParams { r_scale: 1.0, grid_n: 12, eps: 0.1 }
    }
}

/// `{|u - center| <= r, |v| <= r_prime}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxSpec {
    #[serde(serialize_with = "ser_root")]
    pub center: RootValue,
    /// Local topological degree `d_i` of the indeterminacy point.
    pub degree: u32,
    pub r: f64,
    pub r_prime: f64,
    #[serde(skip)]
    center_big: BigComplex,
}

fn ser_root<S: serde::Serializer>(r: &RootValue, s: S) -> Result<S::Ok, S::Error> {
    crate::infinity::serialize_root_value(r, s)
}

impl BoxSpec {
    pub fn new(center: RootValue, degree: u32, r: f64, r_prime: f64) -> Self {
        let center_big = center.to_big(EXACT_ROOT_BITS);
        BoxSpec { center, degree, r, r_prime, center_big }
    }

    pub fn center_big(&self, prec: u32) -> BigComplex {
        self.center_big.with_prec(prec.max(EXACT_ROOT_BITS))
    }

    pub fn center_f64(&self) -> (f64, f64) {
        self.center.to_f64()
    }

    pub fn contains(&self, u: &BigComplex, v: &BigComplex) -> bool {
        v.log2_abs() <= self.r_prime.log2() && self.dist_u(u) <= self.r
    }

    /// `|u - center|`.
    pub fn dist_u(&self, u: &BigComplex) -> f64 {
        u.sub(&self.center_big(u.prec())).log2_abs().exp2()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certification {
    pub sampled: bool,
    pub grid_n: usize,
    pub vertical_boundary_samples: usize,
    pub crossing_levels: usize,
    pub vx_samples: usize,
    pub halvings: Vec<u32>,
    pub radius_doublings: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxSystem {
    pub boxes: Vec<BoxSpec>,
    pub vx_eps: f64,
    /// Lower bound on `|z|` in `V(X)`, enlarged until `V(X)` is sampled forward invariant.
    pub vx_radius: f64,
    pub certification: Certification,
}

impl BoxSystem {
    pub fn m(&self) -> usize {
        self.boxes.len()
    }

    /// 0-based index of the box containing the chart point `(u, v)`.
    pub fn locate(&self, u: &BigComplex, v: &BigComplex) -> Option<usize> {
        self.boxes.iter().position(|b| b.contains(u, v))
    }

    pub fn locate_point(&self, p: &ChartPoint) -> Option<usize> {
        let (u, v) = p.uv()?;
        self.locate(&u, &v)
    }

    pub fn in_vx(&self, p: &ChartPoint) -> bool {
        p.in_vx(self.vx_eps, self.vx_radius)
    }
}

fn unit(theta: f64, prec: u32) -> BigComplex {
    BigComplex::from_f64(theta.cos(), theta.sin(), prec)
}

/// Points `u` of the disk around `center` with `|u - center| <= r` whose image
/// under one step from level `v` has `u' = tau`.
pub fn level_preimages(f: &ChartMap, center: &BigComplex, r: f64, v: &BigComplex, tau: &BigComplex) -> Vec<BigComplex> {
    let q = f.level_poly(v, tau);
    let roots = aberth(&q, 500).unwrap_or_default();
    roots.into_iter().filter(|u| u.sub(center).log2_abs().exp2() <= r).collect()
}

fn vx_invariant(f: &ChartMap, eps: f64, radius: f64) -> Option<(BigComplex, BigComplex)> {
    let prec = CHECK_BITS;
    let n_arg = 12;
    for a in 0..6 {
        for b in 0..6 {
            let lu = (1.0 / eps) * 2f64.powi(a);
            let lz = radius * 2f64.powi(b);
            if lz < lu {
                continue;
            }
            for k in 0..n_arg {
                for l in 0..n_arg {
                    let ta = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n_arg as f64;
                    let tb = 2.0 * std::f64::consts::PI * (l as f64 + 0.6) / n_arg as f64;
                    let u = unit(ta, prec).mul_f64(lu);
                    let z = unit(tb, prec).mul_f64(lz);
                    let v = u.div(&z).unwrap();
                    let Some((nu, nv)) = f.chart_step(&u, &v) else { continue };
                    if !ChartPoint::infinity(nu, nv).in_vx(eps, radius) {
                        return Some((u, v));
                    }
                }
            }
        }
    }
    None
}

fn vertical_boundary_fails(f: &ChartMap, b: &BoxSpec, n: usize, eps: f64, radius: f64) -> Option<(BigComplex, BigComplex)> {
    let prec = CHECK_BITS;
    let c = b.center_big(prec);
    for k in 0..n {
        let theta = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
        let u = c.add(&unit(theta, prec).mul_f64(b.r));
        for j in 0..n {
            let rad = b.r_prime * (j + 1) as f64 / n as f64;
            let phi = 2.399_963 * j as f64;
            let v = unit(phi, prec).mul_f64(rad);
            let ok = match f.chart_step(&u, &v) {
                Some((nu, nv)) => ChartPoint::infinity(nu, nv).in_vx(eps, radius),
                None => true,
            };
            if !ok {
                return Some((u, v));
            }
        }
    }
    None
}

fn crossing_fails(f: &ChartMap, bi: &BoxSpec, bj: &BoxSpec, n: usize) -> Option<(BigComplex, BigComplex)> {
    let prec = CHECK_BITS;
    let ci = bi.center_big(prec);
    let tau = bj.center_big(prec);
    for k in 0..n {
        let rad = bi.r_prime * if k % 2 == 0 { 1.0 } else { 0.25 };
        let v = unit(2.0 * std::f64::consts::PI * k as f64 / n as f64, prec).mul_f64(rad);
        let hits = level_preimages(f, &ci, bi.r, &v, &tau);
        let meets = hits.iter().any(|u| {
            f.chart_step(u, &v).is_some_and(|(nu, nv)| bj.contains(&nu, &nv))
        });
        if !meets {
            return Some((ci.clone(), v));
        }
    }
    None
}

fn witness(check: &str, p: (BigComplex, BigComplex)) -> OrbitError {
    OrbitError::CertificationFailed { check: check.into(), witness_u: p.0.to_f64(), witness_v: p.1.to_f64() }
}

/// Boxes of radius `r_scale * (min distance) / 3` around the indeterminacy
/// points, heights halved from `0.1` until the sampled checks pass.
pub fn build_boxes(profile: &InfinityProfile, f: &ChartMap, params: BoxParams) -> Result<BoxSystem, OrbitError> {
    if params.grid_n == 0 || params.eps <= 0.0 || params.r_scale <= 0.0 {
        return Err(OrbitError::InvalidParams("grid_n, eps and r_scale must be positive".into()));
    }
    if profile.points.is_empty() {
        return Err(OrbitError::InvalidParams("no indeterminacy points".into()));
    }
    let centers: Vec<(f64, f64)> = profile.points.iter().map(|p| p.u_f64()).collect();
    let dist = |a: (f64, f64), b: (f64, f64)| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt();
    let inv_eps = 1.0 / params.eps;
    let base = if centers.len() == 1 {
        let c = centers[0];
        (inv_eps - dist(c, (0.0, 0.0))) / 3.0
    } else {
        let mut m = f64::INFINITY;
        for i in 0..centers.len() {
            for j in 0..i {
                m = m.min(dist(centers[i], centers[j]));
            }
        }
        m / 3.0
    };
    let r = params.r_scale * base;
    for &c in &centers {
        if dist(c, (0.0, 0.0)) + r >= inv_eps {
            return Err(OrbitError::InvalidParams("boxes meet V(X); decrease eps".into()));
        }
    }

    let mut radius = inv_eps;
    let mut doublings = 0;
    while let Some(wit) = vx_invariant(f, params.eps, radius) {
        doublings += 1;
        if doublings > MAX_RADIUS_DOUBLINGS {
            return Err(witness("forward invariance of V(X)", wit));
        }
        radius *= 2.0;
    }

    let mut boxes: Vec<BoxSpec> =
        profile.points.iter().map(|p| BoxSpec::new(p.u_pos.clone(), p.d_i, r, 0.1)).collect();
    let mut halvings = vec![0u32; boxes.len()];
    let n = params.grid_n;
    loop {
        let mut changed = false;
        for i in 0..boxes.len() {
            if let Some(wit) = vertical_boundary_fails(f, &boxes[i], n, params.eps, radius) {
                if halvings[i] >= MAX_HALVINGS {
                    return Err(witness("vertical boundary maps into V(X)", wit));
                }
                boxes[i].r_prime /= 2.0;
                halvings[i] += 1;
                changed = true;
            }
        }
        if changed {
            continue;
        }
        for i in 0..boxes.len() {
            for j in 0..boxes.len() {
                if let Some(wit) = crossing_fails(f, &boxes[i], &boxes[j], n.min(8)) {
                    if halvings[i] >= MAX_HALVINGS {
                        return Err(witness("image of a horizontal line meets every box", wit));
                    }
                    boxes[i].r_prime /= 2.0;
                    halvings[i] += 1;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let m = boxes.len();
    Ok(BoxSystem {
        boxes,
        vx_eps: params.eps,
        vx_radius: radius,
        certification: Certification {
            sampled: true,
            grid_n: n,
            vertical_boundary_samples: m * n * n,
            crossing_levels: m * m * n.min(8),
            vx_samples: 6 * 6 * 144,
            halvings,
            radius_doublings: doublings,
        },
    })
}
