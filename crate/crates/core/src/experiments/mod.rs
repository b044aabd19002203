//! End-to-end experiment drivers shared by the command-line tool, the
//! benchmarks, and the acceptance tests. Each driver is deterministic given
//! its configuration.

pub mod calibrate;
pub mod disk;
pub mod mnist;
pub mod spe;

use serde::{Deserialize, Serialize};

use crate::opu::OpuConfig;
use crate::sketch::Pairing;

/// Source of sketches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Channel {
    /// Exact Gaussian rank-one projections.
    Ideal,
    /// Simulated quantized, noisy device.
    OpuSim,
    /// Device measurements recorded to a sketch file.
    OpuFile,
}

impl std::fmt::Display for Channel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Channel::Ideal => "ideal",
            Channel::OpuSim => "opu-sim",
            Channel::OpuFile => "opu-file",
        })
    }
}

impl std::str::FromStr for Channel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ideal" => Ok(Channel::Ideal),
            "opu-sim" => Ok(Channel::OpuSim),
            "opu-file" => Ok(Channel::OpuFile),
            other => Err(format!("unknown channel {other:?} (ideal, opu-sim, opu-file)")),
        }
    }
}

/// Device settings for the simulated channel. The full scale is either
/// fixed or calibrated from the experiment's own inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OpuSettings {
    /// Fixed full scale `C`; calibrated when absent.
    pub saturation: Option<f64>,
    pub target_saturation: f64,
    pub bit_depth: u32,
    pub noise_envelope: f64,
    pub noise_seed: u64,
    pub pairing: Pairing,
}

impl Default for OpuSettings {
    fn default() -> Self {
        Self {
            saturation: None,
            target_saturation: 0.01,
            bit_depth: 8,
            noise_envelope: 4.0,
            noise_seed: 0,
            pairing: Pairing::Consecutive,
        }
    }
}

impl OpuSettings {
    pub fn config(&self, saturation: f64, noise_seed: u64) -> OpuConfig {
        OpuConfig {
            saturation,
            bit_depth: self.bit_depth,
            noise_envelope: self.noise_envelope,
            noise_seed,
            pairing: self.pairing,
        }
    }
}

/// Median of a non-empty sample (mean of the two middle values for even
/// sizes).
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
