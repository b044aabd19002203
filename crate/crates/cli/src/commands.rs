use std::fmt;
use std::path::Path;

use qsketch::datasets::mnist::Mnist;
use qsketch::datasets::video::gen_disk_video;
use qsketch::experiments::calibrate::{gather_samples, run_calibrate, SampleSource};
use qsketch::experiments::disk::{evaluate_disk, measure_disk, DiskMeasurements};
use qsketch::experiments::mnist::{prepare, record_opu_sketches, run_mnist, run_mnist_recorded, MnistConfig};
use qsketch::experiments::spe::run_spe_bench;
use qsketch::experiments::Channel;
use qsketch::report::write_csv;
use qsketch::{Error, SketchFile};
use serde::Serialize;

use crate::config::RunConfig;

/// A failed run, grouped by what the user has to fix.
#[derive(Debug)]
pub enum Failure {
    Config(anyhow::Error),
    Data(anyhow::Error),
    Runtime(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Data(_) => 3,
            Failure::Runtime(_) => 4,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (kind, e) = match self {
            Failure::Config(e) => ("configuration error", e),
            Failure::Data(e) => ("data error", e),
            Failure::Runtime(e) => ("error", e),
        };
        write!(f, "{kind}: {e:#}")
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) => Failure::Config(e.into()),
            Error::Parse { .. } | Error::SketchFile(_) | Error::Io { .. } => Failure::Data(e.into()),
            Error::Csv(_) => Failure::Runtime(e.into()),
        }
    }
}

pub type Outcome = Result<(), Failure>;

fn output<T: Serialize>(path: &Path, rows: &[T]) -> Outcome {
    write_csv(path, rows).map_err(|e| Failure::Runtime(e.into()))
}

fn write_sketches(path: &Path, file: &SketchFile) -> Outcome {
    file.write(path).map_err(|e| Failure::Runtime(e.into()))?;
    eprintln!("wrote {} sketches to {}", file.records.len(), path.display());
    Ok(())
}

pub fn disk(rc: &RunConfig) -> Outcome {
    let cfg = rc.disk.as_ref().expect("resolved disk section");
    let frames = gen_disk_video(&cfg.video)?;
    let measurements = if cfg.channel == Channel::OpuFile {
        let path = rc.data.sketches.as_ref().expect("checked at resolution");
        let mut file = SketchFile::read(path)?;
        if file.pairs != cfg.pairs || file.records.len() != 4 + frames.len() {
            return Err(Failure::Data(anyhow::anyhow!(
                "{} holds {} sketches of m = {}; expected {} (4 quadrants + {} frames) of m = {}",
                path.display(),
                file.records.len(),
                file.pairs,
                4 + frames.len(),
                frames.len(),
                cfg.pairs
            )));
        }
        let frame_sketches = file.records.split_off(4);
        DiskMeasurements {
            indicators: file.records,
            frames: frame_sketches,
            calibration: None,
        }
    } else {
        measure_disk(cfg, &frames)?
    };
    if rc.export_sketches {
        let mut records = measurements.indicators.clone();
        records.extend(measurements.frames.iter().cloned());
        write_sketches(&rc.out.join("disk_sketches.qsk"), &SketchFile::new(cfg.pairs, records)?)?;
    }
    let report = evaluate_disk(cfg, &frames, &measurements, cfg.opu.pairing)?;
    for (name, f) in &report.sparsity_warnings {
        eprintln!("warning: {name} has {:.1}% ones, outside the device's trusted range", 100.0 * f);
    }
    if let Some(c) = &report.calibration {
        eprintln!(
            "calibrated C = {} ({:.2}% of {} intensities above)",
            c.saturation,
            100.0 * c.measured_fraction,
            c.pool_size
        );
    }
    output(&rc.out.join("disk_occupancy.csv"), &report.rows)?;
    output(&rc.out.join("disk_summary.csv"), &report.quadrants)?;
    for q in &report.quadrants {
        println!(
            "quadrant {}: pearson {:.4}, peak frame true {} / estimated {}",
            q.quadrant, q.pearson, q.peak_frame_true, q.peak_frame_est
        );
    }
    println!(
        "dominant-quadrant argmax: {}/{} frames",
        report.dominant_correct, report.dominant_frames
    );
    Ok(())
}

fn load_mnist(dir: &Path) -> Result<Mnist, Failure> {
    Mnist::load(dir).map_err(|e| Failure::Data(anyhow::Error::new(e).context(format!("loading MNIST from {}", dir.display()))))
}

pub fn mnist(rc: &RunConfig) -> Outcome {
    let cfg = rc.mnist.as_ref().expect("resolved mnist section");
    let data = load_mnist(&rc.data.mnist_dir)?;
    let simulated = MnistConfig {
        channels: cfg.channels.iter().copied().filter(|c| *c != Channel::OpuFile).collect(),
        ..cfg.clone()
    };
    let mut report = run_mnist(&data, &simulated)?;
    let needs_prepared = rc.export_sketches || cfg.channels.contains(&Channel::OpuFile);
    if needs_prepared {
        let prepared = prepare(&data, cfg, cfg.threshold)?;
        let seed = *cfg
            .seeds
            .first()
            .ok_or_else(|| Failure::Config(anyhow::anyhow!("at least one seed is required")))?;
        if cfg.channels.contains(&Channel::OpuFile) {
            let path = rc.data.sketches.as_ref().expect("checked at resolution");
            let file = SketchFile::read(path)?;
            let row = run_mnist_recorded(&prepared, &file, cfg.opu.pairing, cfg.threshold, seed)
                .map_err(|e| Failure::Data(anyhow::Error::new(e).context(path.display().to_string())))?;
            report.rows.push(row);
        }
        if rc.export_sketches {
            let m = *cfg.pairs.iter().max().expect("validated by run_mnist");
            let file = record_opu_sketches(&prepared, cfg, m, seed)?;
            write_sketches(&rc.out.join("mnist_sketches.qsk"), &file)?;
        }
    }
    if report.sweep_triggered {
        eprintln!(
            "direct accuracy {:.4}: threshold sweep {:?} included",
            report.direct_accuracy, cfg.sweep_thresholds
        );
    }
    output(&rc.out.join("mnist_accuracy.csv"), &report.rows)?;
    println!(
        "direct accuracy {:.4} (mean test-image sparsity {:.3})",
        report.direct_accuracy, report.mean_sparsity
    );
    let mut domains: Vec<&str> = Vec::new();
    for r in &report.rows {
        if r.m > 0 && !domains.contains(&r.domain.as_str()) {
            domains.push(&r.domain);
        }
    }
    for d in domains {
        for &m in &cfg.pairs {
            let acc: Vec<f64> = report
                .rows
                .iter()
                .filter(|r| r.domain == d && r.m == m)
                .map(|r| r.accuracy)
                .collect();
            if !acc.is_empty() {
                println!("{d} m={m}: mean accuracy {:.4} over {} seed(s)", acc.iter().sum::<f64>() / acc.len() as f64, acc.len());
            }
        }
    }
    Ok(())
}

pub fn spe_bench(rc: &RunConfig) -> Outcome {
    let cfg = rc.spe_bench.as_ref().expect("resolved spe-bench section");
    let rows = run_spe_bench(cfg)?;
    output(&rc.out.join("spe_bench.csv"), &rows)?;
    for r in rows.iter().filter(|r| r.signal == "sparse") {
        println!(
            "n={} k={} m={}: median |err| {:.5}, max {:.5}, mean signed {:+.5}",
            r.n, r.k, r.m, r.median_abs_err, r.max_abs_err, r.mean_signed_err
        );
    }
    Ok(())
}

#[derive(Serialize)]
struct CalibrationRow {
    saturation: f64,
    bit_depth: u32,
    delta: f64,
    noise_envelope: f64,
    noise_bound: f64,
    noise_seed: u64,
    target_fraction: f64,
    measured_fraction: f64,
    pool_size: usize,
    pairs: usize,
    seed: u64,
}

pub fn calibrate(rc: &RunConfig) -> Outcome {
    let cfg = rc.calibrate.as_ref().expect("resolved calibrate section");
    let train = match cfg.source {
        SampleSource::Mnist { .. } => Some(load_mnist(&rc.data.mnist_dir)?.train),
        _ => None,
    };
    let samples = gather_samples(cfg, train.as_ref())?;
    let r = run_calibrate(&samples, cfg.pairs, cfg.seed, &cfg.opu)?;
    output(
        &rc.out.join("calibrate.csv"),
        &[CalibrationRow {
            saturation: r.config.saturation,
            bit_depth: r.config.bit_depth,
            delta: r.delta,
            noise_envelope: r.config.noise_envelope,
            noise_bound: r.noise_bound,
            noise_seed: r.config.noise_seed,
            target_fraction: r.calibration.target_fraction,
            measured_fraction: r.calibration.measured_fraction,
            pool_size: r.calibration.pool_size,
            pairs: cfg.pairs,
            seed: cfg.seed,
        }],
    )?;
    let toml = toml::to_string(&r.config).map_err(|e| Failure::Runtime(e.into()))?;
    print!("{toml}");
    println!("# delta = {}", r.delta);
    println!("# noise bound = {}", r.noise_bound);
    println!(
        "# saturation target {} measured {} over {} intensities",
        r.calibration.target_fraction, r.calibration.measured_fraction, r.calibration.pool_size
    );
    Ok(())
}
