//! Quadratic random sketches of signals: rank-one projections, their
//! debiased differences, sign-product estimates of squared correlations, and
//! a simulator for an optical device that computes them with a quantized,
//! noisy sensor.
//!
//! ```
//! use qsketch::{drop_sketch, rop, sign_template, spe_estimate, GaussianEnsemble, Signal};
//!
//! let ens = GaussianEnsemble::new(7, 4, 4000)?;
//! let u = Signal::new(vec![1.0, 0.0, 0.0, 0.0])?;
//! let x = Signal::new(vec![0.6, 0.8, 0.0, 0.0])?;
//! let t = sign_template(&drop_sketch(&rop(&ens, &u)?));
//! let est = spe_estimate(&t, &drop_sketch(&rop(&ens, &x)?))?;
//! assert!((est - 0.36).abs() < 0.1);
//! # Ok::<(), qsketch::Error>(())
//! ```

pub mod datasets;
pub mod error;
pub mod experiments;
pub mod opu;
pub mod report;
pub mod rng;
pub mod signal;
pub mod sketch;
pub mod sketch_file;
pub mod tasks;

pub use error::{Error, ParseErrorKind, Result};
pub use opu::{
    calibrate_saturation, check_sparsity, opu_drop, opu_measure, quantize, Calibration, Opu, OpuConfig,
    OpuMeasurement, SparsityCheck,
};
pub use signal::{BinarySignal, Signal, SparseSignal};
pub use sketch::{
    drop_batch, drop_correlation, drop_from_values, drop_sketch, project, rop, sample_complexity, sign_template,
    spe_estimate, DenseRows, DropSketch, GaussianEnsemble, Pairing, Projections, RopSketch, SensingRows,
    SignTemplate, SpeParams, KAPPA,
};
pub use sketch_file::SketchFile;
