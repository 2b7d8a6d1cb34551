mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::Rational;

use common::{setup, E1, E2};
use plane_escape::orbit::iterate;
use plane_escape::scalar::BigComplex;
use plane_escape::slice::{
    canonical_potential, constrained_point, convergence_diagnostic, lelong_slope, mean_on_circle, SliceError,
    SliceMeasure, Slicer, TransformPlan,
};
use plane_escape::symbol::SymbolWord;

fn word(s: &str) -> SymbolWord {
    s.parse().unwrap()
}

#[test]
fn single_letter_gives_two_half_atoms() {
    let s = setup(E1);
    let sl = Slicer::new(&s.chart, &s.boxes);
    let ms = sl.measure(&TransformPlan::new(word("1"), (1e-2, 0.0)).with_terminal((0.05, 0.0))).unwrap();
    let mult: u32 = ms.atoms.iter().map(|a| a.multiplicity).sum();
    assert_eq!(mult, 2);
    for a in &ms.atoms {
        assert_eq!(a.weight, Rational::from((a.multiplicity, 2)));
    }
    assert_eq!(ms.winding_count, Some(2));
    assert_eq!(ms.total_mass, 1);
}

#[test]
fn three_letters_wind_eight_times() {
    let s = setup(E1);
    let sl = Slicer::new(&s.chart, &s.boxes);
    let ms = sl.measure(&TransformPlan::new(word("111"), (1e-2, 0.0))).unwrap();
    assert_eq!(ms.winding_count, Some(8));
    assert_eq!(ms.degree_product, 8);
    assert_eq!(ms.total_mass, 1);
}

#[test]
fn invalid_plans() {
    let s = setup(E1);
    let sl = Slicer::new(&s.chart, &s.boxes);
    let bad = |p: TransformPlan| matches!(sl.measure(&p), Err(SliceError::InvalidPlan(_)));
    assert!(bad(TransformPlan::new(word("13"), (1e-2, 0.0))));
    assert!(bad(TransformPlan::new(SymbolWord::default(), (1e-2, 0.0))));
    assert!(bad(TransformPlan::new(word("1"), (0.5, 0.0))));
    assert!(bad(TransformPlan::new(word("1"), (1e-2, 0.0)).with_terminal((0.5, 0.0))));
    assert!(matches!(constrained_point(&sl, &SymbolWord::default(), (1e-2, 0.0)), Err(SliceError::InvalidPlan(_))));
}

#[test]
fn synthetic_potentials() {
    let one = SliceMeasure::from_points(&[((0.3, 0.1), 1)], 128);
    let p = canonical_potential(&one, &[(1.3, 0.1), (0.3, 2.1)]);
    assert!(p.values[0].abs() < 1e-15);
    assert!((p.values[1] - 2f64.ln()).abs() < 1e-15);
    let pair = SliceMeasure::from_points(&[((0.7, 0.0), 1), ((-0.7, 0.0), 1)], 128);
    assert_eq!(pair.total_mass, 1);
    let p = canonical_potential(&pair, &[(0.0, 0.0), (0.7, 0.0)]);
    assert!((p.values[0] - 0.7f64.ln()).abs() < 1e-15);
    assert_eq!(p.values[1], f64::NEG_INFINITY);
    let mut csv = Vec::new();
    p.write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("zeta_re,zeta_im,u\n"));
    assert!(text.contains("-inf"));
}

#[test]
fn synthetic_lelong_slopes() {
    let dirac = lelong_slope(&[1e-1, 1e-2, 1e-3], &|r: f64| r.ln());
    assert!((dirac.slope - 1.0).abs() < 1e-12);
    // Uniform measure on |s| = rho0 has potential log max(|zeta|, rho0).
    let rho0: f64 = 0.2;
    let ring = SliceMeasure::from_points(
        &(0..64)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / 64.0;
                ((rho0 * t.cos(), rho0 * t.sin()), 1)
            })
            .collect::<Vec<_>>(),
        128,
    );
    let m = |r: f64| mean_on_circle(&ring, (0.0, 0.0), r, 997);
    let inside = lelong_slope(&[0.1, 0.05, 0.02], &m);
    assert!(inside.slope.abs() < 1e-6, "{inside:?}");
    let outside = lelong_slope(&[0.8, 0.6, 0.4], &m);
    assert!((outside.slope - 1.0).abs() < 1e-6, "{outside:?}");
}

/// Jensen: the circle mean of `log|zeta - a|` is `log max(r, |a - c|)`.
fn jensen_mean(ms: &SliceMeasure, c: (f64, f64), r: f64) -> f64 {
    ms.atoms
        .iter()
        .map(|a| {
            let d = ((a.u.0 - c.0).powi(2) + (a.u.1 - c.1).powi(2)).sqrt();
            a.weight.to_f64() * d.max(r).ln()
        })
        .sum()
}

#[test]
fn mean_value_deficit_on_the_test_circle() {
    let s = setup(E1);
    let sl = Slicer::new(&s.chart, &s.boxes);
    let ms = sl.measure(&TransformPlan::new(word("11"), (1e-2, 0.0))).unwrap();
    let r = s.boxes.boxes[0].r / 2.0;
    let mean = mean_on_circle(&ms, (0.0, 0.0), r, 4096);
    assert!((mean - jensen_mean(&ms, (0.0, 0.0), r)).abs() < 1e-9);
    let centre = canonical_potential(&ms, &[(0.0, 0.0)]).values[0];
    assert!(mean > centre + 1.0);
}

#[test]
fn potentials_are_subharmonic() {
    let s = setup(E1);
    let sl = Slicer::new(&s.chart, &s.boxes);
    let ms = sl.measure(&TransformPlan::new(word("12"), (1e-2, 0.0))).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    for _ in 0..50 {
        let c = (rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3));
        let r = rng.gen_range(1e-3..5e-2);
        let near = ms.atoms.iter().any(|a| (((a.u.0 - c.0).powi(2) + (a.u.1 - c.1).powi(2)).sqrt() - r).abs() < 1e-3);
        if near {
            continue;
        }
        let mean = mean_on_circle(&ms, c, r, 512);
        let centre = canonical_potential(&ms, &[c]).values[0];
        assert!(mean >= centre - 1e-9, "circle {c:?} {r}: {mean} < {centre}");
    }
}

#[test]
fn compatibility_with_one_application() {
    let s = setup(E1);
    let sl = Slicer::new(&s.chart, &s.boxes);
    let ms = sl.measure(&TransformPlan::new(word("12"), (1e-2, 0.0)).without_winding()).unwrap();
    let centre = ms.centre.to_big(256);
    for (t, _) in ms.local_atoms() {
        let u = centre.add(&t.with_prec(256));
        let v = BigComplex::from_f64(1e-2, 0.0, 256);
        let (nu, nv) = s.chart.chart_step(&u, &v).unwrap();
        let image = sl.measure(&TransformPlan::new(word("2"), nv.to_f64()).without_winding()).unwrap();
        let (x, y) = nu.to_f64();
        let dist = image
            .atoms
            .iter()
            .map(|a| ((a.u.0 - x).powi(2) + (a.u.1 - y).powi(2)).sqrt())
            .fold(f64::INFINITY, f64::min);
        assert!(dist < 1e-6, "image atom off by {dist}");
    }
}

#[test]
fn single_row_table() {
    let s = setup(E2);
    let sl = Slicer::new(&s.chart, &s.boxes);
    let w = word("1");
    let tab = convergence_diagnostic(&sl, &|k| w.prefix(k), 1, (1e-2, 0.0), &[], s.boxes.boxes[0].r / 2.0).unwrap();
    assert_eq!(tab.rows.len(), 1);
    assert!(tab.rows[0].ratio.is_none() && tab.rows[0].log10_d.is_none());
}

#[test]
fn constrained_points_follow_their_words() {
    let s = setup(E1);
    let sl = Slicer::new(&s.chart, &s.boxes);
    for (w, need) in [("212", 3), ("1111111111", 8)] {
        let w = word(w);
        let level = if w.letters()[0] == 2 { 5e-3 } else { 1e-2 };
        let cp = constrained_point(&sl, &w, (level, 0.0)).unwrap();
        let rec = iterate(&s.chart, &cp.point, w.len(), &s.boxes, cp.iterate_options());
        let hits = (0..w.len()).filter(|&j| rec.itinerary[j] == Some(w.letters()[j])).count();
        assert!(hits >= need, "{w}: itinerary {:?}", rec.itinerary);
    }
}

#[test]
fn measure_serializes() {
    let s = setup(E1);
    let sl = Slicer::new(&s.chart, &s.boxes);
    let ms = sl.measure(&TransformPlan::new(word("2"), (5e-3, 0.0))).unwrap();
    let v = serde_json::to_value(&ms).unwrap();
    assert_eq!(v["total_mass"], "1/1");
    assert_eq!(v["winding_count"], 2);
    assert_eq!(v["plan"]["word"], "2");
    assert!(v["atoms"][0]["u"]["re"].as_f64().unwrap() > 0.9);
}
