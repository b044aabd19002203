//! Ideal quadratic sketching.
//!
//! A sketch of `x` is built from `2m` Gaussian rows `a_i`: the rank-one
//! projections `(a_i^T x)^2` (length `2m`), and their debiased pairwise
//! differences (length `m`). Projecting a debiased sketch onto the sign
//! pattern of another one approximates a squared inner product between the
//! underlying signals without reconstructing either.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rng;
use crate::signal::{check_dims, Signal, SparseSignal};

/// Rescaling constant of the sign product embedding: `1 / E|g1^2 - g2^2|`
/// for independent standard normals.
pub const KAPPA: f64 = std::f64::consts::FRAC_PI_4;

/// Rows generated together by the projection kernel.
const ROW_BLOCK: usize = 16;

/// Source of sensing rows `a_i`, addressable one at a time.
pub trait SensingRows: Sync {
    fn dim(&self) -> usize;
    fn row_count(&self) -> usize;
    /// Writes row `i` into `out` (`out.len() == self.dim()`).
    fn fill_row(&self, i: usize, out: &mut [f64]);

    fn row(&self, i: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.fill_row(i, &mut out);
        out
    }
}

/// Seeded Gaussian ensemble of `2m` rows in dimension `n`.
///
/// Rows are regenerated on demand; row `i` depends only on `(seed, i, n)`,
/// so an ensemble with fewer pairs is a prefix of one with more pairs under
/// the same seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GaussianEnsemble {
    seed: u64,
    dim: usize,
    pairs: usize,
}

impl GaussianEnsemble {
    pub fn new(seed: u64, dim: usize, pairs: usize) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("ensemble dimension must be positive"));
        }
        if pairs == 0 {
            return Err(invalid("ensemble pair count must be positive"));
        }
        if dim > u32::MAX as usize {
            return Err(invalid("ensemble dimension exceeds 2^32 - 1"));
        }
        Ok(Self { seed, dim, pairs })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of debiased measurements `m`; the ensemble holds `2m` rows.
    pub fn pairs(&self) -> usize {
        self.pairs
    }

    /// Same seed and dimension with a different pair count.
    pub fn with_pairs(&self, pairs: usize) -> Result<Self> {
        Self::new(self.seed, self.dim, pairs)
    }
}

impl SensingRows for GaussianEnsemble {
    fn dim(&self) -> usize {
        self.dim
    }

    fn row_count(&self) -> usize {
        2 * self.pairs
    }

    fn fill_row(&self, i: usize, out: &mut [f64]) {
        assert!(i < self.row_count(), "row {i} out of range");
        assert_eq!(out.len(), self.dim);
        rng::fill_normal(self.seed, i as u64, out);
    }
}

/// Explicit, materialized sensing matrix (row-major).
#[derive(Debug, Clone, PartialEq)]
pub struct DenseRows {
    dim: usize,
    data: Vec<f64>,
}

impl DenseRows {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if dim == 0 {
            return Err(invalid("sensing matrix needs at least one non-empty row"));
        }
        if let Some(i) = rows.iter().position(|r| r.len() != dim) {
            return Err(invalid(format!("row {i} has length {}, expected {dim}", rows[i].len())));
        }
        Ok(Self {
            dim,
            data: rows.concat(),
        })
    }

    /// Materializes every row of `rows`.
    pub fn collect<R: SensingRows>(rows: &R) -> Self {
        let dim = rows.dim();
        let mut data = vec![0.0; dim * rows.row_count()];
        for (i, chunk) in data.chunks_mut(dim).enumerate() {
            rows.fill_row(i, chunk);
        }
        Self { dim, data }
    }
}

impl SensingRows for DenseRows {
    fn dim(&self) -> usize {
        self.dim
    }

    fn row_count(&self) -> usize {
        self.data.len() / self.dim
    }

    fn fill_row(&self, i: usize, out: &mut [f64]) {
        out.copy_from_slice(&self.data[i * self.dim..(i + 1) * self.dim]);
    }
}

/// Inner products `⟨a_i, x_s⟩` for every row `i` of an ensemble and every
/// signal `s` in a batch.
#[derive(Debug, Clone, PartialEq)]
pub struct Projections {
    rows: usize,
    // signal-major: data[s * rows + i]
    data: Vec<f64>,
}

impl Projections {
    pub fn signal_count(&self) -> usize {
        if self.rows == 0 {
            0
        } else {
            self.data.len() / self.rows
        }
    }

    pub fn row_count(&self) -> usize {
        self.rows
    }

    /// Projections of signal `s` onto every row.
    pub fn of(&self, s: usize) -> &[f64] {
        &self.data[s * self.rows..(s + 1) * self.rows]
    }

    /// Rank-one projections of signal `s` using the first `rows` rows.
    pub fn rop_prefix(&self, s: usize, rows: usize) -> Result<RopSketch> {
        if rows > self.rows {
            return Err(invalid(format!("prefix of {rows} rows exceeds {}", self.rows)));
        }
        RopSketch::new(self.of(s)[..rows].iter().map(|p| p * p).collect())
    }

    pub fn rop(&self, s: usize) -> Result<RopSketch> {
        self.rop_prefix(s, self.rows)
    }
}

/// Projects a batch of signals onto every row of `rows`.
///
/// Each output entry is accumulated sequentially over increasing signal
/// index, independently of the block schedule and of the thread count.
pub fn project<R: SensingRows>(rows: &R, signals: &[SparseSignal]) -> Result<Projections> {
    let dim = rows.dim();
    for s in signals {
        check_dims(dim, s.dim())?;
    }
    let row_count = rows.row_count();
    let blocks = row_count.div_ceil(ROW_BLOCK);

    let per_block: Vec<Vec<f64>> = (0..blocks)
        .into_par_iter()
        .map_init(
            || (vec![0.0; dim * ROW_BLOCK], vec![0.0; dim]),
            |(block, row), b| {
                let start = b * ROW_BLOCK;
                let len = ROW_BLOCK.min(row_count - start);
                // transposed: block[j * ROW_BLOCK + k] = a_{start+k}[j]
                for k in 0..ROW_BLOCK {
                    if k < len {
                        rows.fill_row(start + k, row);
                        for (j, &v) in row.iter().enumerate() {
                            block[j * ROW_BLOCK + k] = v;
                        }
                    } else {
                        for j in 0..dim {
                            block[j * ROW_BLOCK + k] = 0.0;
                        }
                    }
                }
                let mut out = Vec::with_capacity(signals.len() * len);
                for s in signals {
                    let acc = accumulate_block(block, s);
                    out.extend_from_slice(&acc[..len]);
                }
                out
            },
        )
        .collect();

    let mut data = vec![0.0; signals.len() * row_count];
    for (b, chunk) in per_block.iter().enumerate() {
        let start = b * ROW_BLOCK;
        let len = ROW_BLOCK.min(row_count - start);
        for s in 0..signals.len() {
            data[s * row_count + start..s * row_count + start + len]
                .copy_from_slice(&chunk[s * len..(s + 1) * len]);
        }
    }
    Ok(Projections {
        rows: row_count,
        data,
    })
}

#[inline]
fn accumulate_block(block: &[f64], s: &SparseSignal) -> [f64; ROW_BLOCK] {
    let mut acc = [0.0f64; ROW_BLOCK];
    let (index, value) = s.parts();
    for (&j, &v) in index.iter().zip(value) {
        let j = j as usize * ROW_BLOCK;
        let a: &[f64; ROW_BLOCK] = block[j..j + ROW_BLOCK].try_into().unwrap();
        for k in 0..ROW_BLOCK {
            acc[k] += a[k] * v;
        }
    }
    acc
}

/// Nonnegative vector of `2m` rank-one projections `(a_i^T x)^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RopSketch {
    values: Vec<f64>,
}

impl RopSketch {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.len() % 2 != 0 {
            return Err(invalid(format!(
                "rank-one sketch length must be even and positive, got {}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(invalid(format!("rank-one sketch entry {i} is {}", values[i])));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn debias(&self, pairing: Pairing) -> DropSketch {
        let m = self.values.len() / 2;
        let v = &self.values;
        let values = match pairing {
            Pairing::Consecutive => (0..m).map(|i| v[2 * i] - v[2 * i + 1]).collect(),
            Pairing::Halves => (0..m).map(|i| v[i] - v[i + m]).collect(),
        };
        DropSketch { values }
    }
}

/// How the `2m` rank-one measurements are paired into `m` differences.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pairing {
    /// `a_{2i}` against `a_{2i+1}`.
    #[default]
    Consecutive,
    /// `a_i` against `a_{i+m}`: split the measurement vector in two halves.
    Halves,
}

/// Signed vector of `m` paired differences of rank-one projections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DropSketch {
    values: Vec<f64>,
}

impl DropSketch {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("debiased sketch must have at least one entry"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("debiased sketch entry {i} is not finite")));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// First `m` entries.
    pub fn truncated(&self, m: usize) -> Result<DropSketch> {
        if m == 0 || m > self.values.len() {
            return Err(invalid(format!("cannot truncate {} entries to {m}", self.values.len())));
        }
        Ok(DropSketch {
            values: self.values[..m].to_vec(),
        })
    }

    pub fn scaled(&self, c: f64) -> Result<DropSketch> {
        DropSketch::new(self.values.iter().map(|v| v * c).collect())
    }
}

/// Entrywise sign of a debiased sketch, with `sign(0) = 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignTemplate {
    signs: Vec<i8>,
}

impl SignTemplate {
    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    pub fn truncated(&self, m: usize) -> Result<SignTemplate> {
        if m == 0 || m > self.signs.len() {
            return Err(invalid(format!("cannot truncate {} signs to {m}", self.signs.len())));
        }
        Ok(SignTemplate {
            signs: self.signs[..m].to_vec(),
        })
    }
}

/// Parameters of the sign product embedding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeParams {
    /// Unspecified universal constant of the sample-complexity bound.
    pub complexity_constant: f64,
}

impl SpeParams {
    pub fn kappa(&self) -> f64 {
        KAPPA
    }
}

impl Default for SpeParams {
    fn default() -> Self {
        Self {
            complexity_constant: 1.0,
        }
    }
}

/// Rank-one projections of a single signal.
pub fn rop<R: SensingRows>(rows: &R, x: &Signal) -> Result<RopSketch> {
    let p = project(rows, &[SparseSignal::from(x)])?;
    p.rop(0)
}

/// Debiased sketch from a rank-one sketch, consecutive pairing.
pub fn drop_sketch(rop: &RopSketch) -> DropSketch {
    rop.debias(Pairing::Consecutive)
}

/// Debiased sketch from raw rank-one measurements.
pub fn drop_from_values(values: &[f64], pairing: Pairing) -> Result<DropSketch> {
    if values.len() % 2 != 0 {
        return Err(invalid(format!(
            "debiasing needs an even number of measurements, got {}",
            values.len()
        )));
    }
    Ok(RopSketch::new(values.to_vec())?.debias(pairing))
}

pub fn sign_template(b: &DropSketch) -> SignTemplate {
    SignTemplate {
        signs: b
            .values
            .iter()
            .map(|&v| {
                if v > 0.0 {
                    1
                } else if v < 0.0 {
                    -1
                } else {
                    0
                }
            })
            .collect(),
    }
}

/// `κ/m · ⟨t, b⟩`, the sign-product estimate of `⟨u, x⟩²` for unit `u`.
pub fn spe_estimate(t: &SignTemplate, b: &DropSketch) -> Result<f64> {
    if t.len() != b.len() {
        return Err(invalid(format!(
            "template length {} does not match sketch length {}",
            t.len(),
            b.len()
        )));
    }
    let mut acc = 0.0;
    for (&s, &v) in t.signs.iter().zip(&b.values) {
        match s {
            1 => acc += v,
            -1 => acc -= v,
            _ => {}
        }
    }
    Ok(KAPPA * acc / b.len() as f64)
}

/// `⟨bx, by⟩ / (4m)`, an unbiased estimate of `⟨x, y⟩²` under a Gaussian
/// ensemble: `E[B(x)B(y)] = 2 E[(a^T x)^2 (a^T y)^2] - 2‖x‖²‖y‖² = 4⟨x, y⟩²`.
pub fn drop_correlation(bx: &DropSketch, by: &DropSketch) -> Result<f64> {
    if bx.len() != by.len() {
        return Err(invalid(format!(
            "sketch lengths differ: {} vs {}",
            bx.len(),
            by.len()
        )));
    }
    let acc = crate::signal::dot(&bx.values, &by.values);
    Ok(acc / (4.0 * bx.len() as f64))
}

/// `⌈C · δ⁻² · k · ln(n / (kδ))⌉` measurements for the embedding to hold
/// over `k`-sparse signals; the log factor is clamped at 1 when
/// `n / (kδ) <= e`.
pub fn sample_complexity(k: usize, n: usize, delta: f64, params: &SpeParams) -> Result<usize> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid(format!("distortion must lie in (0, 1), got {delta}")));
    }
    if k == 0 || k > n {
        return Err(invalid(format!("sparsity must satisfy 1 <= k <= n, got k={k}, n={n}")));
    }
    if !(params.complexity_constant > 0.0 && params.complexity_constant.is_finite()) {
        return Err(invalid("complexity constant must be positive"));
    }
    let ratio = n as f64 / (k as f64 * delta);
    let log_factor = if ratio <= std::f64::consts::E {
        1.0
    } else {
        ratio.ln()
    };
    let m = params.complexity_constant * k as f64 * log_factor / (delta * delta);
    Ok(m.ceil() as usize)
}

/// Debiased sketches of a batch of signals under one ensemble.
pub fn drop_batch<R: SensingRows>(
    rows: &R,
    signals: &[SparseSignal],
    pairing: Pairing,
) -> Result<Vec<DropSketch>> {
    if rows.row_count() % 2 != 0 {
        return Err(invalid("debiasing needs an even number of rows"));
    }
    let p = project(rows, signals)?;
    (0..signals.len())
        .map(|s| Ok(p.rop(s)?.debias(pairing)))
        .collect()
}
