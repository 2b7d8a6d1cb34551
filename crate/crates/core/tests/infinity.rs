use plane_escape::infinity::{profile, FormulaCheck, PlaneMap, Regime};

const E1: (&str, &str) = ("z^2*(w - z)^2", "w^2 + z^3");
const E2: (&str, &str) = ("z^3*(w - z)^4", "w^2 + z^3");
const E3: (&str, &str) = ("z^3 + z*w^2", "w^2");
const EX2: (&str, &str) = ("z*(z - w)^6*(z + w)", "z^4 + z^3*(z - w)^2 + (z + w)^3");

fn prof(m: (&str, &str)) -> plane_escape::infinity::InfinityProfile {
    profile(&PlaneMap::parse(m.0, m.1).unwrap()).unwrap()
}

#[test]
fn example_one_profile() {
    let p = prof(E1);
    let u: Vec<_> = p.points.iter().map(|x| x.u_f64()).collect();
    assert_eq!(u, vec![(0.0, 0.0), (1.0, 0.0)]);
    assert_eq!(p.local_degrees(), vec![2, 2]);
    assert_eq!(p.points.iter().map(|x| x.ell).collect::<Vec<_>>(), vec![Some(2), Some(3)]);
    assert_eq!((p.d, p.d_t), (4, 10));
    assert!((p.generic_rate.unwrap() - 6f64.sqrt()).abs() < 1e-12);
    assert!((p.rho.unwrap() - 1.5f64.sqrt()).abs() < 1e-12);
    assert_eq!(p.regime, Regime::Pluripolar);
    assert_eq!(p.formula_check, FormulaCheck::Verified);
}

#[test]
fn example_two_family_member() {
    let p = prof(E2);
    assert_eq!((p.d, p.d_t), (7, 18));
    assert_eq!(p.regime, Regime::Continuous);
    let rate = 2f64.powf(3.0 / 7.0) * 3f64.powf(4.0 / 7.0);
    assert!((p.generic_rate.unwrap() - rate).abs() < 1e-12);
}

#[test]
fn three_point_cubic() {
    let p = prof(E3);
    assert_eq!((p.d, p.d_t), (3, 6));
    assert_eq!(p.regime, Regime::Pluripolar);
    assert!((p.generic_rate.unwrap() - 2.0).abs() < 1e-12);
    assert!((p.rho.unwrap() - 2.0).abs() < 1e-12);
}

#[test]
fn second_example_exponents() {
    let p = prof(EX2);
    let got: Vec<_> = p.points.iter().map(|x| (x.u_f64().0, x.d_i, x.ell)).collect();
    assert_eq!(got, vec![(0.0, 1, Some(3)), (-1.0, 1, Some(5)), (1.0, 6, Some(4))]);
    assert_eq!(p.points[0].certificate.as_ref().unwrap().s0, 3);
    assert_eq!(p.d_t, 32);
    assert_eq!(p.formula_check, FormulaCheck::Verified);
}

#[test]
fn json_mirrors_profile() {
    let v = serde_json::to_value(prof(E1)).unwrap();
    assert_eq!(v["d_t"], 10);
    assert_eq!(v["regime"], "pluripolar");
    assert_eq!(v["points"][1]["u_pos"]["re"], "1/1");
    assert_eq!(v["points"][1]["ell_i"], "3/1");
    assert_eq!(v["formula_check"]["status"], "verified");
}
