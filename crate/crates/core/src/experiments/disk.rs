//! Quadrant occupancy of a rotating disk, estimated from sketches of whole
//! frames.

use serde::{Deserialize, Serialize};

use crate::datasets::video::{gen_disk_video, quadrant_counts, quadrant_indicator, VideoSpec};
use crate::error::{invalid, Result};
use crate::experiments::{Channel, OpuSettings};
use crate::opu::{self, calibrate_from_intensities, check_sparsity, Calibration, SparsityCheck};
use crate::signal::{BinarySignal, SparseSignal};
use crate::sketch::{project, sign_template, GaussianEnsemble, Pairing, RopSketch};
use crate::tasks::occupancy::{normalize_to_max, occupancy_estimate, pearson, OccupancySeries};
use crate::tasks::argmax_first;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiskConfig {
    pub video: VideoSpec,
    /// Sketch size `m`.
    pub pairs: usize,
    pub seed: u64,
    pub channel: Channel,
    pub opu: OpuSettings,
    /// Fraction of the disk that must lie in one quadrant for a frame to
    /// count toward the argmax check.
    pub dominance: f64,
}

impl Default for DiskConfig {
    fn default() -> Self {
        Self::desk()
    }
}

impl DiskConfig {
    /// 128×128, 24 frames, ideal channel, `m = 2000`.
    pub fn desk() -> Self {
        Self {
            video: VideoSpec::desk(),
            pairs: 2000,
            seed: 0,
            channel: Channel::Ideal,
            opu: OpuSettings::default(),
            dominance: 0.7,
        }
    }
}

/// Raw measurements: the four quadrant indicators, then every frame.
#[derive(Debug, Clone, PartialEq)]
pub struct DiskMeasurements {
    pub indicators: Vec<RopSketch>,
    pub frames: Vec<RopSketch>,
    pub calibration: Option<Calibration>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OccupancyRow {
    pub t: usize,
    pub quadrant: u8,
    pub q_true: f64,
    pub q_est: f64,
    pub q_est_normalized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadrantSummary {
    pub quadrant: u8,
    pub pearson: f64,
    pub peak_frame_true: usize,
    pub peak_frame_est: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiskReport {
    pub rows: Vec<OccupancyRow>,
    pub quadrants: Vec<QuadrantSummary>,
    /// Frames with at least `dominance` of the disk inside one quadrant.
    pub dominant_frames: usize,
    /// Of those, frames whose largest estimate is that quadrant.
    pub dominant_correct: usize,
    pub calibration: Option<Calibration>,
    /// Inputs outside the device's trusted sparsity range (name, fraction).
    pub sparsity_warnings: Vec<(String, f64)>,
}

impl DiskReport {
    pub fn dominant_accuracy(&self) -> f64 {
        if self.dominant_frames == 0 {
            return f64::NAN;
        }
        self.dominant_correct as f64 / self.dominant_frames as f64
    }

    pub fn min_pearson(&self) -> f64 {
        self.quadrants.iter().map(|q| q.pearson).fold(f64::INFINITY, f64::min)
    }
}

fn indicators(spec: &VideoSpec) -> Result<Vec<BinarySignal>> {
    (1..=4)
        .map(|j| quadrant_indicator(j, spec.width, spec.height).map(|q| q.mask))
        .collect()
}

/// Sketches indicators and frames through the configured channel.
pub fn measure_disk(cfg: &DiskConfig, frames: &[BinarySignal]) -> Result<DiskMeasurements> {
    let spec = &cfg.video;
    let ens = GaussianEnsemble::new(cfg.seed, spec.dim(), cfg.pairs)?;
    let mut inputs: Vec<SparseSignal> = indicators(spec)?.iter().map(SparseSignal::from).collect();
    inputs.extend(frames.iter().map(SparseSignal::from));
    let proj = project(&ens, &inputs)?;

    let (sketches, calibration) = match cfg.channel {
        Channel::Ideal => (
            (0..inputs.len()).map(|s| proj.rop(s)).collect::<Result<Vec<_>>>()?,
            None,
        ),
        Channel::OpuSim => {
            let (saturation, calibration) = match cfg.opu.saturation {
                Some(c) => (c, None),
                None => {
                    let pool = (0..inputs.len())
                        .flat_map(|s| proj.of(s).iter().map(|p| p * p))
                        .collect();
                    let cal = calibrate_from_intensities(pool, cfg.opu.target_saturation)?;
                    (cal.saturation, Some(cal))
                }
            };
            let opu_cfg = cfg.opu.config(saturation, cfg.opu.noise_seed);
            opu_cfg.validate()?;
            let sketches = (0..inputs.len())
                .map(|s| Ok(opu::read_out(&opu_cfg, proj.of(s), s as u64)?.sketch))
                .collect::<Result<Vec<_>>>()?;
            (sketches, calibration)
        }
        Channel::OpuFile => {
            return Err(invalid("recorded sketches are read from file, not measured"));
        }
    };
    let mut sketches = sketches;
    let frames_rop = sketches.split_off(4);
    Ok(DiskMeasurements {
        indicators: sketches,
        frames: frames_rop,
        calibration,
    })
}

/// Compares estimated and true occupancy for given measurements.
pub fn evaluate_disk(
    cfg: &DiskConfig,
    frames: &[BinarySignal],
    measurements: &DiskMeasurements,
    pairing: Pairing,
) -> Result<DiskReport> {
    let spec = &cfg.video;
    if measurements.indicators.len() != 4 || measurements.frames.len() != frames.len() {
        return Err(invalid(format!(
            "expected 4 indicator and {} frame measurements, got {} and {}",
            frames.len(),
            measurements.indicators.len(),
            measurements.frames.len()
        )));
    }
    let masks = indicators(spec)?;
    let templates: Vec<_> = measurements
        .indicators
        .iter()
        .map(|r| sign_template(&r.debias(pairing)))
        .collect();
    let frame_drops: Vec<_> = measurements.frames.iter().map(|r| r.debias(pairing)).collect();

    let mut truth: Vec<Vec<f64>> = (0..4).map(|_| Vec::with_capacity(frames.len())).collect();
    let mut est: Vec<Vec<f64>> = (0..4).map(|_| Vec::with_capacity(frames.len())).collect();
    for (frame, b) in frames.iter().zip(&frame_drops) {
        let counts = quadrant_counts(frame, spec.width, spec.height);
        for j in 0..4 {
            // ⟨u_j, x_t⟩ is the number of disk pixels in quadrant j
            let c = counts[j] as f64;
            truth[j].push(c * c);
            est[j].push(occupancy_estimate(&templates[j], b)?);
        }
    }

    let est_norm: Vec<OccupancySeries> = (0..4)
        .map(|j| normalize_to_max(&OccupancySeries::new(j as u8 + 1, est[j].clone())))
        .collect();
    let mut rows = Vec::with_capacity(4 * frames.len());
    for t in 0..frames.len() {
        for j in 0..4 {
            rows.push(OccupancyRow {
                t,
                quadrant: j as u8 + 1,
                q_true: truth[j][t],
                q_est: est[j][t],
                q_est_normalized: est_norm[j].values[t],
            });
        }
    }
    let quadrants = (0..4)
        .map(|j| QuadrantSummary {
            quadrant: j as u8 + 1,
            pearson: pearson(&truth[j], &est[j]).unwrap_or(f64::NAN),
            peak_frame_true: argmax_first(&truth[j]).unwrap_or(0),
            peak_frame_est: argmax_first(&est[j]).unwrap_or(0),
        })
        .collect();

    let mut dominant_frames = 0;
    let mut dominant_correct = 0;
    for (t, frame) in frames.iter().enumerate() {
        let counts = quadrant_counts(frame, spec.width, spec.height);
        let total: usize = counts.iter().sum();
        let (best, &most) = counts.iter().enumerate().max_by_key(|(_, &c)| c).unwrap();
        if total > 0 && most as f64 >= cfg.dominance * total as f64 {
            dominant_frames += 1;
            let per_frame: Vec<f64> = (0..4).map(|j| est[j][t]).collect();
            if argmax_first(&per_frame) == Some(best) {
                dominant_correct += 1;
            }
        }
    }

    let mut sparsity_warnings = Vec::new();
    if cfg.channel != Channel::Ideal {
        for (j, m) in masks.iter().enumerate() {
            if let SparsityCheck::OutOfRange(f) = check_sparsity(m) {
                sparsity_warnings.push((format!("quadrant {}", j + 1), f));
            }
        }
        for (t, f) in frames.iter().enumerate() {
            if let SparsityCheck::OutOfRange(s) = check_sparsity(f) {
                sparsity_warnings.push((format!("frame {t}"), s));
            }
        }
    }

    Ok(DiskReport {
        rows,
        quadrants,
        dominant_frames,
        dominant_correct,
        calibration: measurements.calibration,
        sparsity_warnings,
    })
}

/// Generates the video, sketches it, and evaluates occupancy.
pub fn run_disk(cfg: &DiskConfig) -> Result<DiskReport> {
    let frames = gen_disk_video(&cfg.video)?;
    let measurements = measure_disk(cfg, &frames)?;
    evaluate_disk(cfg, &frames, &measurements, cfg.opu.pairing)
}
