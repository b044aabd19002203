use serde::Serialize;

use crate::error::Result;
use crate::signal::Signal;
use crate::sketch::{spe_estimate, DropSketch, SignTemplate};

/// Occupancy of quadrant `quadrant` over time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OccupancySeries {
    pub quadrant: u8,
    pub values: Vec<f64>,
    pub normalized: bool,
}

impl OccupancySeries {
    pub fn new(quadrant: u8, values: Vec<f64>) -> Self {
        Self {
            quadrant,
            values,
            normalized: false,
        }
    }

    /// Frame of the largest value (first on ties).
    pub fn peak(&self) -> Option<usize> {
        crate::tasks::argmax_first(&self.values)
    }
}

/// `⟨u, x⟩²`.
pub fn occupancy_true(u: &Signal, x: &Signal) -> Result<f64> {
    let p = u.dot(x)?;
    Ok(p * p)
}

/// Sketched-domain occupancy. Because a sign template is invariant to the
/// scale of the signal it came from, this approximates `⟨u/‖u‖, x⟩²` for
/// the indicator `u` that produced the template.
pub fn occupancy_estimate(template: &SignTemplate, b: &DropSketch) -> Result<f64> {
    spe_estimate(template, b)
}

/// Divides by the maximum value. A series whose maximum is not positive is
/// returned unchanged and left unflagged.
pub fn normalize_to_max(series: &OccupancySeries) -> OccupancySeries {
    let max = series.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(max > 0.0) {
        return OccupancySeries {
            normalized: false,
            ..series.clone()
        };
    }
    OccupancySeries {
        quadrant: series.quadrant,
        values: series.values.iter().map(|v| v / max).collect(),
        normalized: true,
    }
}

/// Pearson correlation; `None` when either series is constant.
pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return None;
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return None;
    }
    Some(sab / (saa * sbb).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::video::{quadrant_counts, quadrant_indicator, VideoSpec};
    use crate::sketch::sign_template;

    #[test]
    fn normalize_examples() {
        let s = OccupancySeries::new(1, vec![2.0, 4.0, 1.0]);
        let n = normalize_to_max(&s);
        assert_eq!(n.values, vec![0.5, 1.0, 0.25]);
        assert!(n.normalized);
        assert_eq!(normalize_to_max(&n).values, n.values);
        let z = normalize_to_max(&OccupancySeries::new(2, vec![0.0; 3]));
        assert_eq!(z.values, vec![0.0; 3]);
        assert!(!z.normalized);
    }

    #[test]
    fn true_occupancy_indicator_algebra() {
        let spec = VideoSpec {
            disk_radius: 12.0,
            ..VideoSpec::desk()
        };
        let (w, h) = (spec.width, spec.height);
        let frame = spec.frame(3); // 45°: disk fully inside the top-right quadrant
        let ones = frame.count_ones() as f64;
        let x = frame.to_signal();
        let counts = quadrant_counts(&frame, w, h);
        assert_eq!(counts[0] + counts[2] + counts[3], 0);
        let mut linear = 0.0;
        for j in 1..=4u8 {
            let u = quadrant_indicator(j, w, h).unwrap().mask.to_signal();
            let q = occupancy_true(&u, &x).unwrap();
            if j == 2 {
                assert_eq!(q, ones * ones);
            } else {
                assert_eq!(q, 0.0);
            }
            linear += u.dot(&x).unwrap();
        }
        assert_eq!(linear, ones);
        let zero = Signal::zeros(w * h).unwrap();
        let u = quadrant_indicator(1, w, h).unwrap().mask.to_signal();
        assert_eq!(occupancy_true(&u, &zero).unwrap(), 0.0);
    }

    #[test]
    fn estimate_of_zero_sketch() {
        let t = sign_template(&DropSketch::new(vec![1.0, -1.0, 2.0]).unwrap());
        let b = DropSketch::new(vec![0.0; 3]).unwrap();
        assert_eq!(occupancy_estimate(&t, &b).unwrap(), 0.0);
    }

    #[test]
    fn pearson_basics() {
        assert_eq!(pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]), Some(1.0));
        assert_eq!(pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]), Some(-1.0));
        assert_eq!(pearson(&[1.0, 1.0], &[0.0, 1.0]), None);
    }
}
