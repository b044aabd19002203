//! Full-scale calibration of the simulated device from sample inputs.

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::datasets::mnist::GrayDataset;
use crate::datasets::video::{gen_disk_video, VideoSpec};
use crate::error::{invalid, Result};
use crate::experiments::OpuSettings;
use crate::opu::{calibrate_saturation, Calibration, OpuConfig};
use crate::rng::seeded;
use crate::signal::BinarySignal;
use crate::sketch::GaussianEnsemble;

/// Inputs pooled to set the full scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", deny_unknown_fields)]
pub enum SampleSource {
    /// Uniformly random binary inputs with a fixed fraction of ones.
    Random { dim: usize, density: f64 },
    /// Frames of the disk video.
    Disk { video: VideoSpec },
    /// Leading training images, binarized.
    Mnist { threshold: u8 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CalibrateConfig {
    pub source: SampleSource,
    /// Maximum number of inputs drawn from the source.
    pub samples: usize,
    pub sample_seed: u64,
    pub pairs: usize,
    pub seed: u64,
    pub opu: OpuSettings,
}

impl Default for CalibrateConfig {
    fn default() -> Self {
        Self {
            source: SampleSource::Random {
                dim: 1024,
                density: 0.5,
            },
            samples: 100,
            sample_seed: 0,
            pairs: 1000,
            seed: 0,
            opu: OpuSettings::default(),
        }
    }
}

/// Draws the calibration inputs. `train` is required for the MNIST source.
pub fn gather_samples(cfg: &CalibrateConfig, train: Option<&GrayDataset>) -> Result<Vec<BinarySignal>> {
    match &cfg.source {
        SampleSource::Random { dim, density } => random_binary(*dim, *density, cfg.samples, cfg.sample_seed),
        SampleSource::Disk { video } => {
            let mut frames = gen_disk_video(video)?;
            frames.truncate(cfg.samples);
            Ok(frames)
        }
        SampleSource::Mnist { threshold } => {
            let train = train.ok_or_else(|| invalid("the mnist sample source needs the training images"))?;
            let count = cfg.samples.min(train.len());
            Ok((0..count)
                .map(|i| crate::datasets::mnist::binarize(train.images.image(i), *threshold))
                .collect())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrateReport {
    pub calibration: Calibration,
    pub config: OpuConfig,
    pub delta: f64,
    pub noise_bound: f64,
}

/// Calibrates `C` on `samples` under the ensemble `(seed, pairs)` and
/// returns the resulting device configuration.
pub fn run_calibrate(
    samples: &[BinarySignal],
    pairs: usize,
    seed: u64,
    settings: &OpuSettings,
) -> Result<CalibrateReport> {
    let first = samples.first().ok_or_else(|| invalid("calibration needs at least one sample"))?;
    let ens = GaussianEnsemble::new(seed, first.dim(), pairs)?;
    let calibration = calibrate_saturation(samples, &ens, settings.target_saturation)?;
    let config = settings.config(calibration.saturation, settings.noise_seed);
    config.validate()?;
    Ok(CalibrateReport {
        calibration,
        config,
        delta: config.delta(),
        noise_bound: config.noise_bound(),
    })
}

/// `count` binary signals of length `dim`, each with `round(density·dim)`
/// ones at uniformly random positions.
pub fn random_binary(dim: usize, density: f64, count: usize, seed: u64) -> Result<Vec<BinarySignal>> {
    if dim == 0 || !(0.0..=1.0).contains(&density) {
        return Err(invalid(format!("need dim > 0 and density in [0, 1], got {dim}, {density}")));
    }
    let ones = (density * dim as f64).round() as usize;
    let mut rng = seeded(seed);
    (0..count)
        .map(|_| {
            let mut bits = vec![0u8; dim];
            for i in sample(&mut rng, dim, ones) {
                bits[i] = 1;
            }
            BinarySignal::new(bits)
        })
        .collect()
}
