//! Monte Carlo distortion of the sign-product estimate over a grid of
//! signal sizes and sketch sizes.
//!
//! Each trial draws a unit `k`-sparse `x`, a dense unit `u` with
//! `⟨u, x⟩² = correlation`, and one ensemble with the largest `m`; smaller
//! sketch sizes reuse that ensemble's prefix, so the errors at different `m`
//! are measured on the same trials.

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::experiments::median;
use crate::rng::{hash3, seeded};
use crate::signal::{Signal, SparseSignal};
use crate::sketch::{project, sign_template, spe_estimate, GaussianEnsemble, Pairing};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeCase {
    pub n: usize,
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpeBenchConfig {
    pub cases: Vec<SpeCase>,
    pub pairs: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    /// Target `⟨u, x⟩²` for the dense probe `u`.
    pub correlation: f64,
    /// Also report the all-zero signal.
    pub include_zero: bool,
    pub pairing: Pairing,
}

impl Default for SpeBenchConfig {
    fn default() -> Self {
        Self {
            cases: vec![SpeCase { n: 1, k: 1 }, SpeCase { n: 1024, k: 16 }],
            pairs: vec![500, 1000, 2000, 4000, 8000],
            trials: 100,
            seed: 0,
            correlation: 0.5,
            include_zero: true,
            pairing: Pairing::Consecutive,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpeRow {
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub trials: usize,
    pub seed: u64,
    /// `sparse` or `zero`.
    pub signal: String,
    pub median_abs_err: f64,
    pub max_abs_err: f64,
    pub mean_signed_err: f64,
    pub mean_truth: f64,
}

/// Unit `k`-sparse signal and a unit probe at squared correlation `c2`.
pub fn trial_signals(n: usize, k: usize, c2: f64, seed: u64) -> Result<(Signal, Signal)> {
    let mut rng = seeded(seed);
    let mut x = vec![0.0; n];
    loop {
        for i in sample(&mut rng, n, k) {
            x[i] = rng.sample::<f64, _>(StandardNormal);
        }
        if x.iter().any(|&v| v != 0.0) {
            break;
        }
    }
    let x = Signal::new(x)?.normalized()?;
    if n == 1 {
        return Ok((x.clone(), x));
    }
    let w = loop {
        let w: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let p = crate::signal::dot(&w, x.as_slice());
        let w: Vec<f64> = w.iter().zip(x.as_slice()).map(|(wi, xi)| wi - p * xi).collect();
        if let Ok(w) = Signal::new(w)?.normalized() {
            break w;
        }
    };
    let (a, b) = (c2.sqrt(), (1.0 - c2).sqrt());
    let u: Vec<f64> = x.as_slice().iter().zip(w.as_slice()).map(|(xi, wi)| a * xi + b * wi).collect();
    Ok((Signal::new(u)?.normalized()?, x))
}

fn validate(cfg: &SpeBenchConfig) -> Result<()> {
    if cfg.cases.is_empty() || cfg.pairs.is_empty() || cfg.trials == 0 {
        return Err(invalid("the grid and the trial count must be non-empty"));
    }
    if cfg.pairs.contains(&0) {
        return Err(invalid("sketch sizes must be positive"));
    }
    for c in &cfg.cases {
        if c.k == 0 || c.k > c.n {
            return Err(invalid(format!("case n={}, k={} needs 1 <= k <= n", c.n, c.k)));
        }
    }
    if !(0.0..=1.0).contains(&cfg.correlation) {
        return Err(invalid(format!("correlation must lie in [0, 1], got {}", cfg.correlation)));
    }
    Ok(())
}

fn summarize(case: SpeCase, m: usize, cfg: &SpeBenchConfig, signal: &str, est: &[f64], truth: &[f64]) -> SpeRow {
    let err: Vec<f64> = est.iter().zip(truth).map(|(e, t)| e - t).collect();
    let abs: Vec<f64> = err.iter().map(|e| e.abs()).collect();
    let t = est.len() as f64;
    SpeRow {
        n: case.n,
        k: case.k,
        m,
        trials: est.len(),
        seed: cfg.seed,
        signal: signal.to_string(),
        median_abs_err: median(&abs),
        max_abs_err: abs.iter().cloned().fold(0.0, f64::max),
        mean_signed_err: err.iter().sum::<f64>() / t,
        mean_truth: truth.iter().sum::<f64>() / t,
    }
}

pub fn run_spe_bench(cfg: &SpeBenchConfig) -> Result<Vec<SpeRow>> {
    validate(cfg)?;
    let m_max = *cfg.pairs.iter().max().unwrap();
    let mut rows = Vec::new();
    for &case in &cfg.cases {
        let sizes = cfg.pairs.len();
        let mut est: Vec<Vec<f64>> = (0..sizes).map(|_| Vec::with_capacity(cfg.trials)).collect();
        let mut zero_est: Vec<Vec<f64>> = (0..sizes).map(|_| Vec::with_capacity(cfg.trials)).collect();
        let mut truth = Vec::with_capacity(cfg.trials);
        for t in 0..cfg.trials {
            let trial_seed = hash3(cfg.seed, (case.n as u64) << 32 | case.k as u64, t as u64);
            let (u, x) = trial_signals(case.n, case.k, cfg.correlation, trial_seed)?;
            let p = u.dot(&x)?;
            truth.push(p * p);
            let ens = GaussianEnsemble::new(trial_seed, case.n, m_max)?;
            let zero = Signal::zeros(case.n)?;
            let inputs = [SparseSignal::from(&u), SparseSignal::from(&x), SparseSignal::from(&zero)];
            let proj = project(&ens, &inputs)?;
            for (i, &m) in cfg.pairs.iter().enumerate() {
                let tu = sign_template(&proj.rop_prefix(0, 2 * m)?.debias(cfg.pairing));
                let bx = proj.rop_prefix(1, 2 * m)?.debias(cfg.pairing);
                est[i].push(spe_estimate(&tu, &bx)?);
                if cfg.include_zero {
                    let bz = proj.rop_prefix(2, 2 * m)?.debias(cfg.pairing);
                    zero_est[i].push(spe_estimate(&tu, &bz)?);
                }
            }
        }
        let zeros = vec![0.0; cfg.trials];
        for (i, &m) in cfg.pairs.iter().enumerate() {
            rows.push(summarize(case, m, cfg, "sparse", &est[i], &truth));
            if cfg.include_zero {
                rows.push(summarize(case, m, cfg, "zero", &zero_est[i], &zeros));
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SpeBenchConfig {
        SpeBenchConfig {
            cases: vec![SpeCase { n: 1, k: 1 }, SpeCase { n: 64, k: 4 }],
            pairs: vec![50, 200],
            trials: 10,
            ..SpeBenchConfig::default()
        }
    }

    #[test]
    fn trial_signals_have_requested_geometry() {
        let (u, x) = trial_signals(256, 8, 0.5, 11).unwrap();
        assert!((u.norm() - 1.0).abs() < 1e-12);
        assert!((x.norm() - 1.0).abs() < 1e-12);
        assert_eq!(x.as_slice().iter().filter(|&&v| v != 0.0).count(), 8);
        assert!((u.dot(&x).unwrap().powi(2) - 0.5).abs() < 1e-12);
        let (u1, x1) = trial_signals(1, 1, 0.5, 3).unwrap();
        assert_eq!(u1, x1);
    }

    #[test]
    fn zero_rows_are_exact_and_grid_complete() {
        let rows = run_spe_bench(&small()).unwrap();
        assert_eq!(rows.len(), 2 * 2 * 2);
        for r in rows.iter().filter(|r| r.signal == "zero") {
            assert_eq!(r.max_abs_err, 0.0);
            assert_eq!(r.mean_truth, 0.0);
        }
        assert!(rows.iter().all(|r| r.trials == 10));
    }

    #[test]
    fn degenerate_case_shrinks_with_m() {
        let cfg = SpeBenchConfig {
            cases: vec![SpeCase { n: 1, k: 1 }],
            pairs: vec![100, 10_000],
            trials: 20,
            include_zero: false,
            ..SpeBenchConfig::default()
        };
        let rows = run_spe_bench(&cfg).unwrap();
        assert!(rows[1].median_abs_err < rows[0].median_abs_err);
        assert!(rows[1].median_abs_err < 0.03, "{:?}", rows[1]);
    }

    #[test]
    fn deterministic() {
        assert_eq!(run_spe_bench(&small()).unwrap(), run_spe_bench(&small()).unwrap());
    }

    #[test]
    fn rejects_bad_grid() {
        let bad = SpeBenchConfig {
            cases: vec![SpeCase { n: 4, k: 5 }],
            ..small()
        };
        assert!(run_spe_bench(&bad).is_err());
        assert!(run_spe_bench(&SpeBenchConfig { trials: 0, ..small() }).is_err());
        assert!(run_spe_bench(&SpeBenchConfig { correlation: 1.5, ..small() }).is_err());
    }
}
