#![allow(dead_code)]

use plane_escape::infinity::{profile, InfinityProfile, PlaneMap};
use plane_escape::orbit::{build_boxes, BoxParams, BoxSystem, ChartMap};

pub const E1: (&str, &str) = ("z^2*(w - z)^2", "w^2 + z^3");
pub const E2: (&str, &str) = ("z^3*(w - z)^4", "w^2 + z^3");
pub const E3: (&str, &str) = ("z^3 + z*w^2", "w^2");
pub const EX2: (&str, &str) = ("z*(z - w)^6*(z + w)", "z^4 + z^3*(z - w)^2 + (z + w)^3");

pub struct Setup {
    pub map: PlaneMap,
    pub profile: InfinityProfile,
    pub chart: ChartMap,
    pub boxes: BoxSystem,
}

pub fn setup(m: (&str, &str)) -> Setup {
    let map = PlaneMap::parse(m.0, m.1).unwrap();
    let profile = profile(&map).unwrap();
    let chart = ChartMap::new(&map);
    let boxes = build_boxes(&profile, &chart, BoxParams::default()).unwrap();
    Setup { map, profile, chart, boxes }
}

/// Member `(z^c (w - z)^d, w^a + z^b)` of the first example family.
pub fn family(c: u32, d: u32, a: u32, b: u32) -> PlaneMap {
    PlaneMap::parse(&format!("z^{c}*(w - z)^{d}"), &format!("w^{a} + z^{b}")).unwrap()
}
