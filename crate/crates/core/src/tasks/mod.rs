//! Sketched-domain applications: quadrant occupancy over a video and
//! nearest-centroid digit classification.

pub mod classify;
pub mod occupancy;

pub use classify::{
    accuracy, binarize_template, classify_direct, classify_sketched, ClassifierReport, Domain,
    TemplateBinarization,
};
pub use occupancy::{
    normalize_to_max, occupancy_estimate, occupancy_true, pearson, OccupancySeries,
};

/// Index of the largest score, smallest index on ties. NaN scores never win.
pub fn argmax_first(scores: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &s) in scores.iter().enumerate() {
        match best {
            Some((_, b)) if !(s > b) => {}
            _ if s.is_nan() => {}
            _ => best = Some((i, s)),
        }
    }
    best.map(|(i, _)| i).or((!scores.is_empty()).then_some(0))
}
