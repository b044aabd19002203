//! Synthetic video of a disk orbiting the frame center, and quadrant masks.
//!
//! Pixel `(r, c)` has its center at `(c + 0.5, r + 0.5)` with `y` pointing
//! down; the frame center is `(width / 2, height / 2)`. Angles are measured
//! counter-clockwise from the `+x` axis as seen on screen.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::signal::BinarySignal;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VideoSpec {
    pub frame_count: usize,
    pub width: usize,
    pub height: usize,
    /// Pixels.
    pub disk_radius: f64,
    /// Distance from the frame center to the disk center, pixels.
    pub orbit_radius: f64,
    /// Radians.
    pub start_angle: f64,
}

impl Default for VideoSpec {
    fn default() -> Self {
        Self::desk()
    }
}

impl VideoSpec {
    pub const DISK_RADIUS_FRACTION: f64 = 0.21;
    pub const ORBIT_RADIUS_FRACTION: f64 = 0.28;

    /// Square video with the default disk geometry scaled to `side`.
    pub fn square(side: usize, frame_count: usize) -> Self {
        Self {
            frame_count,
            width: side,
            height: side,
            disk_radius: Self::DISK_RADIUS_FRACTION * side as f64,
            orbit_radius: Self::ORBIT_RADIUS_FRACTION * side as f64,
            start_angle: 0.0,
        }
    }

    /// 24 frames of 128×128.
    pub fn desk() -> Self {
        Self::square(128, 24)
    }

    /// 24 frames of 950×950.
    pub fn full_scale() -> Self {
        Self::square(950, 24)
    }

    pub fn dim(&self) -> usize {
        self.width * self.height
    }

    pub fn validate(&self) -> Result<()> {
        if self.frame_count == 0 || self.width == 0 || self.height == 0 {
            return Err(invalid("video needs at least one frame of positive size"));
        }
        let finite = [self.disk_radius, self.orbit_radius, self.start_angle]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.disk_radius <= 0.0 || self.orbit_radius < 0.0 {
            return Err(invalid("disk and orbit radii must be finite, disk radius positive"));
        }
        let half = self.width.min(self.height) as f64 / 2.0;
        if self.orbit_radius + self.disk_radius > half {
            return Err(invalid(format!(
                "disk leaves the frame: orbit {} + radius {} > {half}",
                self.orbit_radius, self.disk_radius
            )));
        }
        Ok(())
    }

    /// Disk center of frame `t` in pixel coordinates `(x, y)`.
    pub fn disk_center(&self, t: usize) -> (f64, f64) {
        let angle = self.start_angle
            + 2.0 * std::f64::consts::PI * t as f64 / self.frame_count as f64;
        (
            self.width as f64 / 2.0 + self.orbit_radius * angle.cos(),
            self.height as f64 / 2.0 - self.orbit_radius * angle.sin(),
        )
    }

    pub fn frame(&self, t: usize) -> BinarySignal {
        let (cx, cy) = self.disk_center(t);
        let r2 = self.disk_radius * self.disk_radius;
        let w = self.width;
        BinarySignal::from_fn(self.dim(), |p| {
            let dx = (p % w) as f64 + 0.5 - cx;
            let dy = (p / w) as f64 + 0.5 - cy;
            dx * dx + dy * dy <= r2
        })
        .expect("validated non-empty frame")
    }
}

/// All frames of the rotating-disk video.
pub fn gen_disk_video(spec: &VideoSpec) -> Result<Vec<BinarySignal>> {
    spec.validate()?;
    Ok((0..spec.frame_count)
        .into_par_iter()
        .map(|t| spec.frame(t))
        .collect())
}

/// Quadrant (1..=4) containing pixel `(row, col)`.
///
/// 1 = top-left, 2 = top-right, 3 = bottom-left, 4 = bottom-right. For odd
/// sizes the center row goes to the top quadrants and the center column to
/// the left ones.
pub fn quadrant_of(row: usize, col: usize, width: usize, height: usize) -> u8 {
    let top = row < height.div_ceil(2);
    let left = col < width.div_ceil(2);
    match (top, left) {
        (true, true) => 1,
        (true, false) => 2,
        (false, true) => 3,
        (false, false) => 4,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadrantIndicator {
    pub quadrant: u8,
    pub mask: BinarySignal,
}

pub fn quadrant_indicator(j: u8, width: usize, height: usize) -> Result<QuadrantIndicator> {
    if !(1..=4).contains(&j) {
        return Err(invalid(format!("quadrant must be 1..=4, got {j}")));
    }
    if width == 0 || height == 0 {
        return Err(invalid("frame must have positive size"));
    }
    let mask = BinarySignal::from_fn(width * height, |p| {
        quadrant_of(p / width, p % width, width, height) == j
    })?;
    Ok(QuadrantIndicator { quadrant: j, mask })
}

/// Ones of `frame` falling in each quadrant.
pub fn quadrant_counts(frame: &BinarySignal, width: usize, height: usize) -> [usize; 4] {
    let mut counts = [0; 4];
    for p in frame.ones() {
        counts[quadrant_of(p / width, p % width, width, height) as usize - 1] += 1;
    }
    counts
}

/// Writes a binary frame as a plain-text portable graymap (white = 1).
pub fn write_pgm(frame: &BinarySignal, width: usize, height: usize, path: &Path) -> Result<()> {
    if frame.dim() != width * height {
        return Err(invalid("frame size does not match width × height"));
    }
    let mut out = format!("P2\n{width} {height}\n1\n");
    for row in frame.bits().chunks(width) {
        let line: Vec<String> = row.iter().map(|b| b.to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    std::fs::File::create(path)
        .and_then(|mut f| f.write_all(out.as_bytes()))
        .map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_count_and_binary() {
        let spec = VideoSpec::square(64, 24);
        let frames = gen_disk_video(&spec).unwrap();
        assert_eq!(frames.len(), 24);
        assert!(frames.iter().all(|f| f.dim() == 64 * 64));
    }

    #[test]
    fn invalid_geometry() {
        let mut spec = VideoSpec::desk();
        spec.orbit_radius = 50.0;
        assert!(gen_disk_video(&spec).is_err());
        spec = VideoSpec::desk();
        spec.frame_count = 0;
        assert!(spec.validate().is_err());
        spec = VideoSpec::desk();
        spec.disk_radius = 0.0;
        assert!(spec.validate().is_err());
    }

    #[test]
    fn ones_count_tracks_disk_area() {
        for spec in [VideoSpec::desk(), VideoSpec::square(64, 24)] {
            let area = std::f64::consts::PI * spec.disk_radius * spec.disk_radius;
            let counts: Vec<usize> = gen_disk_video(&spec).unwrap().iter().map(|f| f.count_ones()).collect();
            for &c in &counts {
                assert!((c as f64 - area).abs() <= 0.02 * area, "{c} vs {area}");
            }
            // sub-pixel offsets change the count by a few pixels, not more
            let spread = counts.iter().max().unwrap() - counts.iter().min().unwrap();
            assert!(spread <= 12, "{spread}");
        }
    }

    #[test]
    fn half_turn_is_point_reflection() {
        let spec = VideoSpec::desk();
        let n = spec.width;
        for t in 0..12 {
            let a = spec.frame(t);
            let b = spec.frame(t + 12);
            let (ax, ay) = spec.disk_center(t);
            let (bx, by) = spec.disk_center(t + 12);
            assert!((ax + bx - n as f64).abs() < 1e-9 && (ay + by - n as f64).abs() < 1e-9);
            // pixel (r, c) ↦ (n-1-r, n-1-c)
            let reflected: Vec<u8> = a.bits().iter().rev().copied().collect();
            let diff = reflected.iter().zip(b.bits()).filter(|(x, y)| x != y).count();
            assert!(diff <= 2, "frame {t}: {diff} pixels differ");
        }
    }

    #[test]
    fn quadrants_tiny_frame() {
        for j in 1..=4 {
            let q = quadrant_indicator(j, 2, 2).unwrap();
            assert_eq!(q.mask.count_ones(), 1);
        }
        assert_eq!(quadrant_indicator(1, 2, 2).unwrap().mask.bits(), &[1, 0, 0, 0]);
        assert_eq!(quadrant_indicator(4, 2, 2).unwrap().mask.bits(), &[0, 0, 0, 1]);
        assert!(quadrant_indicator(0, 2, 2).is_err());
        assert!(quadrant_indicator(5, 2, 2).is_err());
    }

    #[test]
    fn quadrants_partition_odd_frame() {
        let (w, h) = (7, 5);
        let masks: Vec<_> = (1..=4).map(|j| quadrant_indicator(j, w, h).unwrap().mask).collect();
        for p in 0..w * h {
            assert_eq!(masks.iter().map(|m| m.bits()[p] as u32).sum::<u32>(), 1);
        }
        // center row/column go to the lower-index quadrant
        assert_eq!(masks[0].count_ones(), 4 * 3);
        assert_eq!(masks[3].count_ones(), 3 * 2);
    }

    #[test]
    fn full_scale_quadrant_size() {
        let q = quadrant_indicator(3, 950, 950).unwrap();
        assert_eq!(q.mask.count_ones(), 225_625);
    }

    #[test]
    fn quadrant_counts_sum_to_ones() {
        let spec = VideoSpec::desk();
        let f = spec.frame(5);
        let counts = quadrant_counts(&f, spec.width, spec.height);
        assert_eq!(counts.iter().sum::<usize>(), f.count_ones());
    }
}
