//! Iteration near infinity, boxes at the indeterminacy points, itineraries
//! and escape rates.

pub mod boxes;
pub mod chart;
pub mod iterate;
pub mod rate;

pub use boxes::{build_boxes, level_preimages, BoxParams, BoxSpec, BoxSystem, Certification};
pub use chart::{step, ChartMap, ChartPoint, OrbitError, Rep, DEFAULT_PRECISION_CAP};
pub use iterate::{iterate, iterate_checked, itinerary_string, Classification, IterOptions, OrbitRecord};
pub use rate::{
    classification_counts, empirical_exponent, escape_rate, literal_escape_rate, loglog_rate, partial_green, sample_point, spectrum_scan,
    GreenSeries, Sampler, SpectrumResult, SpectrumRow,
};
