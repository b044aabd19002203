//! Nearest-centroid digit classification in the direct and sketched domains.
//!
//! Sketch sizes share one ensemble per seed: the ensemble with `m` pairs is
//! the `2m`-row prefix of the one with the largest `m`, so projections are
//! computed once and every smaller sketch is read from their prefix.

use serde::{Deserialize, Serialize};

use crate::datasets::mnist::{class_centroids, split_indices, LabeledDataset, Mnist, CLASSES};
use crate::error::{invalid, Result};
use crate::experiments::{Channel, OpuSettings};
use crate::opu::{self, calibrate_from_intensities, OpuConfig};
use crate::signal::{BinarySignal, Signal, SparseSignal};
use crate::sketch::{project, sign_template, GaussianEnsemble, Pairing, RopSketch, SignTemplate};
use crate::sketch_file::SketchFile;
use crate::tasks::classify::{
    accuracy, binarize_template, classify_direct, classify_sketched, Domain, TemplateBinarization,
};

/// Expected direct-domain accuracy at threshold 128; missing it by more
/// than the tolerance triggers the threshold sweep.
pub const REFERENCE_DIRECT_ACCURACY: f64 = 0.821;

/// Shots `TEMPLATE_SHOT + j` carry the class templates; test item `k` is
/// shot `k`.
const TEMPLATE_SHOT: u64 = 1 << 40;

/// Test images projected together.
const CHUNK: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitMode {
    /// Pool both files and draw a seeded random split.
    Seeded,
    /// Use the distributed training and test files as-is.
    Canonical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MnistConfig {
    pub threshold: u8,
    pub split: SplitMode,
    pub split_seed: u64,
    pub n_train: usize,
    pub n_test: usize,
    /// Sketch sizes `m`.
    pub pairs: Vec<usize>,
    /// Ensemble seeds; one accuracy row per (channel, m, seed).
    pub seeds: Vec<u64>,
    pub channels: Vec<Channel>,
    pub opu: OpuSettings,
    pub template_rule: TemplateBinarization,
    /// Training images pooled to calibrate the simulated full scale.
    pub calibration_samples: usize,
    /// Thresholds evaluated in the direct domain when the direct accuracy
    /// misses the reference by more than `tolerance` (or always, if
    /// `always_sweep`).
    pub sweep_thresholds: Vec<u8>,
    pub tolerance: f64,
    pub always_sweep: bool,
}

impl Default for MnistConfig {
    fn default() -> Self {
        Self {
            threshold: 128,
            split: SplitMode::Seeded,
            split_seed: 0,
            n_train: 60_000,
            n_test: 10_000,
            pairs: vec![200, 400, 800, 1600, 3200],
            seeds: vec![0, 1, 2, 3, 4],
            channels: vec![Channel::Ideal, Channel::OpuSim],
            opu: OpuSettings::default(),
            template_rule: TemplateBinarization::CosineOptimal,
            calibration_samples: 1000,
            sweep_thresholds: vec![64, 96, 128, 160],
            tolerance: 0.02,
            always_sweep: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AccuracyRow {
    pub domain: String,
    pub threshold: u8,
    pub m: usize,
    pub seed: u64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MnistReport {
    pub rows: Vec<AccuracyRow>,
    pub direct_accuracy: f64,
    pub mean_sparsity: f64,
    pub sweep_triggered: bool,
}

impl MnistReport {
    /// Mean accuracy over seeds for one domain and sketch size.
    pub fn mean_accuracy(&self, domain: Domain, m: usize) -> Option<f64> {
        let name = domain.to_string();
        let acc: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.domain == name && r.m == m)
            .map(|r| r.accuracy)
            .collect();
        (!acc.is_empty()).then(|| acc.iter().sum::<f64>() / acc.len() as f64)
    }
}

/// Binarized train/test split with unit class centroids.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub train: LabeledDataset,
    pub test: LabeledDataset,
    pub units: Vec<Signal>,
}

pub fn prepare(data: &Mnist, cfg: &MnistConfig, threshold: u8) -> Result<Prepared> {
    let (train, test) = match cfg.split {
        SplitMode::Canonical => {
            let train = data.train.binarize(threshold);
            let test = data.test.binarize(threshold);
            if cfg.n_train > train.len() || cfg.n_test > test.len() {
                return Err(invalid(format!(
                    "canonical split has {} / {} images, {} / {} requested",
                    train.len(),
                    test.len(),
                    cfg.n_train,
                    cfg.n_test
                )));
            }
            let tr: Vec<usize> = (0..cfg.n_train).collect();
            let te: Vec<usize> = (0..cfg.n_test).collect();
            (train.subset(&tr), test.subset(&te))
        }
        SplitMode::Seeded => {
            let all = data.train.clone().concat(data.test.clone())?.binarize(threshold);
            let (tr, te) = split_indices(all.len(), cfg.n_train, cfg.n_test, cfg.split_seed)?;
            (all.subset(&tr), all.subset(&te))
        }
    };
    let units = class_centroids(&train)?;
    Ok(Prepared { train, test, units })
}

pub fn direct_accuracy(p: &Prepared) -> Result<f64> {
    let predictions = p
        .test
        .images
        .iter()
        .map(|x| classify_direct(&p.units, &x.to_signal()))
        .collect::<Result<Vec<_>>>()?;
    accuracy(&predictions, &p.test.labels)
}

fn templates_from(proj_rop: impl Iterator<Item = Result<RopSketch>>, pairing: Pairing) -> Result<Vec<SignTemplate>> {
    proj_rop.map(|r| Ok(sign_template(&r?.debias(pairing)))).collect()
}

/// Per-seed sketched accuracies for every configured channel and size.
fn sketched_rows(p: &Prepared, cfg: &MnistConfig, seed: u64) -> Result<Vec<AccuracyRow>> {
    let m_max = *cfg.pairs.iter().max().ok_or_else(|| invalid("no sketch sizes"))?;
    let n = p.test.dim();
    let ens = GaussianEnsemble::new(seed, n, m_max)?;
    let pairing = cfg.opu.pairing;
    let want_ideal = cfg.channels.contains(&Channel::Ideal);
    let want_opu = cfg.channels.contains(&Channel::OpuSim);

    // Templates for each m.
    let mut ideal_templates: Vec<Vec<SignTemplate>> = Vec::new();
    let mut opu_templates: Vec<Vec<SignTemplate>> = Vec::new();
    let mut opu_configs: Vec<OpuConfig> = Vec::new();
    if want_ideal {
        let units: Vec<SparseSignal> = p.units.iter().map(SparseSignal::from).collect();
        let proj = project(&ens, &units)?;
        for &m in &cfg.pairs {
            ideal_templates.push(templates_from(
                (0..CLASSES).map(|j| proj.rop_prefix(j, 2 * m)),
                pairing,
            )?);
        }
    }
    if want_opu {
        let binary: Vec<BinarySignal> = p
            .units
            .iter()
            .map(|u| binarize_template(u, cfg.template_rule))
            .collect::<Result<_>>()?;
        let sparse: Vec<SparseSignal> = binary.iter().map(SparseSignal::from).collect();
        let proj_u = project(&ens, &sparse)?;
        let cal_count = cfg.calibration_samples.min(p.train.len()).max(1);
        let cal: Vec<SparseSignal> = p.train.images[..cal_count].iter().map(SparseSignal::from).collect();
        let proj_cal = project(&ens, &cal)?;
        let noise_seed = cfg.opu.noise_seed.wrapping_add(seed);
        for &m in &cfg.pairs {
            let rows = 2 * m;
            let saturation = match cfg.opu.saturation {
                Some(c) => c,
                None => {
                    let pool = (0..cal_count)
                        .flat_map(|s| proj_cal.of(s)[..rows].iter().map(|v| v * v))
                        .collect();
                    calibrate_from_intensities(pool, cfg.opu.target_saturation)?.saturation
                }
            };
            let opu_cfg = cfg.opu.config(saturation, noise_seed);
            opu_cfg.validate()?;
            opu_templates.push(templates_from(
                (0..CLASSES).map(|j| {
                    Ok(opu::read_out(&opu_cfg, &proj_u.of(j)[..rows], TEMPLATE_SHOT + j as u64)?.sketch)
                }),
                pairing,
            )?);
            opu_configs.push(opu_cfg);
        }
    }

    let sizes = cfg.pairs.len();
    let mut ideal_pred: Vec<Vec<usize>> = (0..sizes).map(|_| Vec::with_capacity(p.test.len())).collect();
    let mut opu_pred: Vec<Vec<usize>> = (0..sizes).map(|_| Vec::with_capacity(p.test.len())).collect();
    for (c, chunk) in p.test.images.chunks(CHUNK).enumerate() {
        let sparse: Vec<SparseSignal> = chunk.iter().map(SparseSignal::from).collect();
        let proj = project(&ens, &sparse)?;
        for s in 0..chunk.len() {
            let shot = (c * CHUNK + s) as u64;
            for (i, &m) in cfg.pairs.iter().enumerate() {
                let rows = 2 * m;
                if want_ideal {
                    let b = proj.rop_prefix(s, rows)?.debias(pairing);
                    ideal_pred[i].push(classify_sketched(&ideal_templates[i], &b)?);
                }
                if want_opu {
                    let y = opu::read_out(&opu_configs[i], &proj.of(s)[..rows], shot)?;
                    opu_pred[i].push(classify_sketched(&opu_templates[i], &y.debias(pairing))?);
                }
            }
        }
    }

    let mut rows = Vec::new();
    for (i, &m) in cfg.pairs.iter().enumerate() {
        if want_ideal {
            rows.push(AccuracyRow {
                domain: Domain::SketchedIdeal.to_string(),
                threshold: cfg.threshold,
                m,
                seed,
                accuracy: accuracy(&ideal_pred[i], &p.test.labels)?,
            });
        }
        if want_opu {
            rows.push(AccuracyRow {
                domain: Domain::SketchedOpu.to_string(),
                threshold: cfg.threshold,
                m,
                seed,
                accuracy: accuracy(&opu_pred[i], &p.test.labels)?,
            });
        }
    }
    Ok(rows)
}

fn validate(cfg: &MnistConfig) -> Result<()> {
    if cfg.pairs.is_empty() || cfg.pairs.contains(&0) {
        return Err(invalid("sketch sizes must be a non-empty list of positive integers"));
    }
    if cfg.channels.contains(&Channel::OpuFile) {
        return Err(invalid("the opu-file channel is evaluated with run_mnist_recorded"));
    }
    if cfg.n_test == 0 || cfg.n_train == 0 {
        return Err(invalid("train and test sets must be non-empty"));
    }
    Ok(())
}

/// Direct-domain accuracy, an optional threshold sweep, and sketched
/// accuracies for every (channel, m, seed).
pub fn run_mnist(data: &Mnist, cfg: &MnistConfig) -> Result<MnistReport> {
    validate(cfg)?;
    let prepared = prepare(data, cfg, cfg.threshold)?;
    let direct = direct_accuracy(&prepared)?;
    let mut rows = vec![AccuracyRow {
        domain: Domain::Direct.to_string(),
        threshold: cfg.threshold,
        m: 0,
        seed: cfg.split_seed,
        accuracy: direct,
    }];

    let sweep_triggered =
        cfg.always_sweep || (direct - REFERENCE_DIRECT_ACCURACY).abs() > cfg.tolerance;
    if sweep_triggered {
        for &t in &cfg.sweep_thresholds {
            let acc = if t == cfg.threshold {
                direct
            } else {
                direct_accuracy(&prepare(data, cfg, t)?)?
            };
            rows.push(AccuracyRow {
                domain: format!("{}-sweep", Domain::Direct),
                threshold: t,
                m: 0,
                seed: cfg.split_seed,
                accuracy: acc,
            });
        }
    }

    if !cfg.channels.is_empty() {
        for &seed in &cfg.seeds {
            rows.extend(sketched_rows(&prepared, cfg, seed)?);
        }
    }
    Ok(MnistReport {
        rows,
        direct_accuracy: direct,
        mean_sparsity: prepared.test.mean_sparsity(),
        sweep_triggered,
    })
}

/// Simulated-device measurements in recorded-file order: the ten binarized
/// class templates, then every test image.
pub fn record_opu_sketches(p: &Prepared, cfg: &MnistConfig, pairs: usize, seed: u64) -> Result<SketchFile> {
    let ens = GaussianEnsemble::new(seed, p.test.dim(), pairs)?;
    let mut inputs: Vec<BinarySignal> = p
        .units
        .iter()
        .map(|u| binarize_template(u, cfg.template_rule))
        .collect::<Result<_>>()?;
    inputs.extend(p.test.images.iter().cloned());
    let sparse: Vec<SparseSignal> = inputs.iter().map(SparseSignal::from).collect();
    let cal_count = cfg.calibration_samples.min(p.train.len()).max(1);
    let cal: Vec<SparseSignal> = p.train.images[..cal_count].iter().map(SparseSignal::from).collect();
    let saturation = match cfg.opu.saturation {
        Some(c) => c,
        None => {
            let proj_cal = project(&ens, &cal)?;
            let pool = (0..cal_count).flat_map(|s| proj_cal.of(s).iter().map(|v| v * v)).collect();
            calibrate_from_intensities(pool, cfg.opu.target_saturation)?.saturation
        }
    };
    let opu_cfg = cfg.opu.config(saturation, cfg.opu.noise_seed.wrapping_add(seed));
    opu_cfg.validate()?;
    let proj = project(&ens, &sparse)?;
    let records = (0..inputs.len())
        .map(|s| {
            let shot = if s < CLASSES {
                TEMPLATE_SHOT + s as u64
            } else {
                (s - CLASSES) as u64
            };
            Ok(opu::read_out(&opu_cfg, proj.of(s), shot)?.sketch)
        })
        .collect::<Result<Vec<_>>>()?;
    SketchFile::new(pairs, records)
}

/// Sketched accuracy from recorded device measurements (ten templates, then
/// the test images in split order).
pub fn run_mnist_recorded(p: &Prepared, file: &SketchFile, pairing: Pairing, threshold: u8, seed: u64) -> Result<AccuracyRow> {
    if file.records.len() != CLASSES + p.test.len() {
        return Err(invalid(format!(
            "sketch file holds {} records, expected {} templates + {} test images",
            file.records.len(),
            CLASSES,
            p.test.len()
        )));
    }
    let templates = templates_from(file.records[..CLASSES].iter().cloned().map(Ok), pairing)?;
    let predictions = file.records[CLASSES..]
        .iter()
        .map(|r| classify_sketched(&templates, &r.debias(pairing)))
        .collect::<Result<Vec<_>>>()?;
    Ok(AccuracyRow {
        domain: Domain::SketchedOpuFile.to_string(),
        threshold,
        m: file.pairs,
        seed,
        accuracy: accuracy(&predictions, &p.test.labels)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::idx::IdxImages;
    use crate::datasets::mnist::GrayDataset;

    /// Ten 8×8 "digits": class j lights row j mod 8 and column j mod 8, plus
    /// per-image noise pixels.
    fn synthetic(count: usize, salt: usize) -> GrayDataset {
        let mut pixels = Vec::with_capacity(count * 64);
        let mut labels = Vec::with_capacity(count);
        for k in 0..count {
            let j = k % 10;
            labels.push(j as u8);
            for p in 0..64 {
                let (r, c) = (p / 8, p % 8);
                let on = r == j % 8 || c == (j * 3 + 1) % 8 || (p * 31 + k * 17 + salt) % 23 == 0;
                pixels.push(if on { 200 } else { 10 });
            }
        }
        GrayDataset::new(
            IdxImages {
                count,
                rows: 8,
                cols: 8,
                pixels,
            },
            labels,
        )
        .unwrap()
    }

    fn data() -> Mnist {
        Mnist {
            train: synthetic(400, 0),
            test: synthetic(100, 5),
        }
    }

    fn cfg() -> MnistConfig {
        MnistConfig {
            n_train: 400,
            n_test: 100,
            pairs: vec![50, 200],
            seeds: vec![1, 2],
            calibration_samples: 50,
            ..MnistConfig::default()
        }
    }

    #[test]
    fn rows_per_channel_size_seed() {
        let r = run_mnist(&data(), &cfg()).unwrap();
        let direct = r.rows.iter().filter(|r| r.domain == "direct").count();
        let sweep = r.rows.iter().filter(|r| r.domain == "direct-sweep").count();
        assert_eq!(direct, 1);
        assert_eq!(sweep, if r.sweep_triggered { 4 } else { 0 });
        assert_eq!(r.rows.len(), 1 + sweep + 2 * 2 * 2);
        assert!(r.direct_accuracy > 0.6, "{}", r.direct_accuracy);
        assert!(r.mean_accuracy(Domain::SketchedIdeal, 200).unwrap() > 0.5);
    }

    #[test]
    fn canonical_split_uses_files() {
        let c = MnistConfig {
            split: SplitMode::Canonical,
            channels: vec![],
            ..cfg()
        };
        let p = prepare(&data(), &c, 128).unwrap();
        assert_eq!(p.test.labels, data().test.labels);
        let too_many = MnistConfig { n_test: 101, ..c };
        assert!(prepare(&data(), &too_many, 128).is_err());
    }

    #[test]
    fn recorded_channel_matches_simulation() {
        let c = MnistConfig {
            pairs: vec![120],
            seeds: vec![3],
            channels: vec![Channel::OpuSim],
            always_sweep: false,
            tolerance: 1.0,
            ..cfg()
        };
        let sim = run_mnist(&data(), &c).unwrap();
        let p = prepare(&data(), &c, c.threshold).unwrap();
        let file = record_opu_sketches(&p, &c, 120, 3).unwrap();
        let decoded = SketchFile::decode(&file.encode()).unwrap();
        let rec = run_mnist_recorded(&p, &decoded, c.opu.pairing, c.threshold, 3).unwrap();
        assert_eq!(rec.accuracy, sim.mean_accuracy(Domain::SketchedOpu, 120).unwrap());
        assert_eq!(rec.domain, "sketched-opu-file");
    }

    #[test]
    fn recorded_channel_checks_record_count() {
        let c = cfg();
        let p = prepare(&data(), &c, c.threshold).unwrap();
        let file = SketchFile::new(2, vec![RopSketch::new(vec![1.0; 4]).unwrap(); 3]).unwrap();
        assert!(run_mnist_recorded(&p, &file, Pairing::Consecutive, 128, 0).is_err());
    }

    #[test]
    fn invalid_configs() {
        let d = data();
        assert!(run_mnist(&d, &MnistConfig { pairs: vec![], ..cfg() }).is_err());
        assert!(run_mnist(&d, &MnistConfig { pairs: vec![0], ..cfg() }).is_err());
        assert!(run_mnist(&d, &MnistConfig { channels: vec![Channel::OpuFile], ..cfg() }).is_err());
        assert!(run_mnist(&d, &MnistConfig { n_train: 10_000, ..cfg() }).is_err());
    }
}
