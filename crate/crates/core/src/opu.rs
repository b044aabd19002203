//! Simulated optical processing unit.
//!
//! The device encodes a binary input, forms the intensities `(a_i^T x)^2`
//! by multiple scattering, and reads them through a saturating uniform
//! quantizer. The simulator reproduces that channel:
//!
//! ```text
//! y_i = Q_b(max(0, (a_i^T x)^2 + η_i))
//! Q_b(t) = δ⌊t/δ⌋ for 0 <= t <= C, C for t > C,   δ = C·2^-b
//! ```
//!
//! with `η_i` uniform on `[-Eδ, Eδ]`, addressed by `(noise_seed, shot, i)`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rng;
use crate::signal::{BinarySignal, SparseSignal};
use crate::sketch::{project, DropSketch, GaussianEnsemble, Pairing, RopSketch, SensingRows};

/// Lower and upper fraction of ones for which the noise model is trusted.
pub const SPARSITY_RANGE: (f64, f64) = (0.20, 0.80);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpuConfig {
    /// Quantizer full scale `C`.
    pub saturation: f64,
    #[serde(default = "default_bit_depth")]
    pub bit_depth: u32,
    /// Noise half-width in units of the bin width.
    #[serde(default = "default_noise_envelope")]
    pub noise_envelope: f64,
    #[serde(default)]
    pub noise_seed: u64,
    #[serde(default)]
    pub pairing: Pairing,
}

fn default_bit_depth() -> u32 {
    8
}

fn default_noise_envelope() -> f64 {
    4.0
}

impl OpuConfig {
    /// Eight-bit device with the default ±4δ noise envelope.
    pub fn new(saturation: f64) -> Self {
        Self {
            saturation,
            bit_depth: default_bit_depth(),
            noise_envelope: default_noise_envelope(),
            noise_seed: 0,
            pairing: Pairing::Consecutive,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.saturation > 0.0 && self.saturation.is_finite()) {
            return Err(invalid(format!(
                "saturation must be positive and finite, got {}",
                self.saturation
            )));
        }
        if !(1..=62).contains(&self.bit_depth) {
            return Err(invalid(format!(
                "bit depth must be in 1..=62, got {}",
                self.bit_depth
            )));
        }
        if !(self.noise_envelope >= 0.0 && self.noise_envelope.is_finite()) {
            return Err(invalid(format!(
                "noise envelope must be nonnegative, got {}",
                self.noise_envelope
            )));
        }
        if self.delta() <= 0.0 {
            return Err(invalid("bin width underflows to zero"));
        }
        Ok(())
    }

    /// Bin width `δ = C·2^-b`.
    pub fn delta(&self) -> f64 {
        self.saturation / (1u64 << self.bit_depth) as f64
    }

    /// Hard bound on `|η|`.
    pub fn noise_bound(&self) -> f64 {
        self.noise_envelope * self.delta()
    }

    /// Additive noise for measurement `row` of shot `shot`.
    pub fn noise(&self, shot: u64, row: u64) -> f64 {
        if self.noise_envelope == 0.0 {
            return 0.0;
        }
        let u = rng::unit_f64(rng::hash3(self.noise_seed, shot, row));
        self.noise_bound() * (2.0 * u - 1.0)
    }
}

/// Saturating uniform quantizer.
pub fn quantize(t: f64, cfg: &OpuConfig) -> Result<f64> {
    cfg.validate()?;
    if !t.is_finite() {
        return Err(invalid(format!("quantizer input {t} is not finite")));
    }
    if t < 0.0 {
        return Err(invalid(format!("quantizer input {t} is negative")));
    }
    Ok(quantize_unchecked(t, cfg.saturation, cfg.delta()))
}

/// Returns the largest grid point `kδ <= t` (as evaluated in floating point),
/// or `c` past saturation.
#[inline]
pub(crate) fn quantize_unchecked(t: f64, c: f64, delta: f64) -> f64 {
    if t > c {
        return c;
    }
    let mut k = (t / delta).floor();
    while k > 0.0 && k * delta > t {
        k -= 1.0;
    }
    while (k + 1.0) * delta <= t {
        k += 1.0;
    }
    k * delta
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SparsityCheck {
    InRange,
    OutOfRange(f64),
}

impl SparsityCheck {
    pub fn is_in_range(&self) -> bool {
        matches!(self, SparsityCheck::InRange)
    }
}

/// Whether the fraction of ones lies in the range where the device noise
/// model holds. Out-of-range inputs are still measured.
pub fn check_sparsity(x: &BinarySignal) -> SparsityCheck {
    let s = x.sparsity();
    if (SPARSITY_RANGE.0..=SPARSITY_RANGE.1).contains(&s) {
        SparsityCheck::InRange
    } else {
        SparsityCheck::OutOfRange(s)
    }
}

/// Quantized measurements of one input.
#[derive(Debug, Clone, PartialEq)]
pub struct OpuMeasurement {
    pub sketch: RopSketch,
    pub saturated: usize,
}

impl OpuMeasurement {
    pub fn saturation_fraction(&self) -> f64 {
        self.saturated as f64 / self.sketch.len() as f64
    }

    pub fn debias(&self, pairing: Pairing) -> DropSketch {
        self.sketch.debias(pairing)
    }
}

/// Simulated device: a hidden ensemble read through the quantized channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Opu {
    ensemble: GaussianEnsemble,
    config: OpuConfig,
}

impl Opu {
    pub fn new(ensemble: GaussianEnsemble, config: OpuConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self { ensemble, config })
    }

    pub fn config(&self) -> &OpuConfig {
        &self.config
    }

    pub fn ensemble(&self) -> &GaussianEnsemble {
        &self.ensemble
    }

    pub fn measure(&self, x: &BinarySignal, shot: u64) -> Result<OpuMeasurement> {
        Ok(self.measure_batch(std::slice::from_ref(x), shot)?.remove(0))
    }

    /// Measures `xs[s]` as shot `first_shot + s`.
    pub fn measure_batch(&self, xs: &[BinarySignal], first_shot: u64) -> Result<Vec<OpuMeasurement>> {
        let sparse: Vec<SparseSignal> = xs.iter().map(SparseSignal::from).collect();
        let p = project(&self.ensemble, &sparse)?;
        (0..xs.len())
            .map(|s| self.read_out(p.of(s), first_shot + s as u64))
            .collect()
    }

    /// Device readout of precomputed projections `a_i^T x`, `i < proj.len()`.
    pub fn read_out(&self, proj: &[f64], shot: u64) -> Result<OpuMeasurement> {
        read_out(&self.config, proj, shot)
    }

    pub fn drop_sketch(&self, x: &BinarySignal, shot: u64) -> Result<DropSketch> {
        Ok(self.measure(x, shot)?.debias(self.config.pairing))
    }
}

/// Quantized, noisy readout of projections `a_i^T x` under `cfg`.
pub fn read_out(cfg: &OpuConfig, proj: &[f64], shot: u64) -> Result<OpuMeasurement> {
    let c = cfg.saturation;
    let delta = cfg.delta();
    let mut saturated = 0;
    let values = proj
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let t = (p * p + cfg.noise(shot, i as u64)).max(0.0);
            if t > c {
                saturated += 1;
            }
            quantize_unchecked(t, c, delta)
        })
        .collect();
    Ok(OpuMeasurement {
        sketch: RopSketch::new(values)?,
        saturated,
    })
}

/// Measurement of `x` on a device built from `ens` and `cfg` (shot 0).
pub fn opu_measure(ens: &GaussianEnsemble, x: &BinarySignal, cfg: &OpuConfig) -> Result<OpuMeasurement> {
    Opu::new(*ens, *cfg)?.measure(x, 0)
}

/// Debiased device sketch of `x`, paired per `cfg.pairing` (shot 0).
pub fn opu_drop(ens: &GaussianEnsemble, x: &BinarySignal, cfg: &OpuConfig) -> Result<DropSketch> {
    Opu::new(*ens, *cfg)?.drop_sketch(x, 0)
}

/// Result of choosing the quantizer full scale from sample inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub saturation: f64,
    pub target_fraction: f64,
    /// Fraction of pooled noiseless intensities strictly above `saturation`.
    pub measured_fraction: f64,
    pub pool_size: usize,
}

/// Sets `C` to the `(1 - target)` empirical quantile of the intensities
/// `(a_i^T x)^2` pooled over `samples` and every row of `ens`.
pub fn calibrate_saturation(
    samples: &[BinarySignal],
    ens: &GaussianEnsemble,
    target: f64,
) -> Result<Calibration> {
    if samples.is_empty() {
        return Err(invalid("calibration needs at least one sample"));
    }
    let sparse: Vec<SparseSignal> = samples.iter().map(SparseSignal::from).collect();
    let p = project(ens, &sparse)?;
    let mut pool = Vec::with_capacity(samples.len() * ens.row_count());
    for s in 0..samples.len() {
        pool.extend(p.of(s).iter().map(|v| v * v));
    }
    calibrate_from_intensities(pool, target)
}

/// Quantile calibration over an explicit intensity pool.
pub fn calibrate_from_intensities(mut pool: Vec<f64>, target: f64) -> Result<Calibration> {
    if pool.is_empty() {
        return Err(invalid("calibration pool is empty"));
    }
    if !(target > 0.0 && target < 1.0) {
        return Err(invalid(format!("target saturation must lie in (0, 1), got {target}")));
    }
    if let Some(v) = pool.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(invalid(format!("intensity {v} is not a finite nonnegative value")));
    }
    let n = pool.len();
    let allowed = (target * n as f64).floor() as usize;
    let rank = n - 1 - allowed.min(n - 1);
    let (_, &mut c, _) = pool.select_nth_unstable_by(rank, f64::total_cmp);
    if c <= 0.0 {
        return Err(invalid("calibrated saturation is zero; the sample pool carries no energy"));
    }
    let above = pool.iter().filter(|&&v| v > c).count();
    Ok(Calibration {
        saturation: c,
        target_fraction: target,
        measured_fraction: above as f64 / n as f64,
        pool_size: n,
    })
}
