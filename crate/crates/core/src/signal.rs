use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Dense real signal of dimension `n >= 1` with finite entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Signal {
    values: Vec<f64>,
}

impl Signal {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("signal dimension must be at least 1"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("signal entry {i} is not finite")));
        }
        Ok(Self { values })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(vec![0.0; n])
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dot(&self, other: &Signal) -> Result<f64> {
        check_dims(self.dim(), other.dim())?;
        Ok(dot(&self.values, &other.values))
    }

    pub fn scaled(&self, c: f64) -> Result<Signal> {
        Signal::new(self.values.iter().map(|v| v * c).collect())
    }

    /// `self / ‖self‖`; fails on the zero signal.
    pub fn normalized(&self) -> Result<Signal> {
        let norm = self.norm();
        if norm == 0.0 {
            return Err(invalid("cannot normalize the zero signal"));
        }
        Signal::new(self.values.iter().map(|v| v / norm).collect())
    }
}

/// Signal over {0, 1}: the only input an optical unit can encode.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BinarySignal {
    bits: Vec<u8>,
}

impl BinarySignal {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.is_empty() {
            return Err(invalid("signal dimension must be at least 1"));
        }
        if let Some(i) = bits.iter().position(|&b| b > 1) {
            return Err(invalid(format!(
                "entry {i} is {}, binary signals hold only 0 or 1",
                bits[i]
            )));
        }
        Ok(Self { bits })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize) -> bool) -> Result<Self> {
        Self::new((0..n).map(|i| f(i) as u8).collect())
    }

    /// Accepts a real signal only if every entry is exactly 0 or 1.
    pub fn from_signal(x: &Signal) -> Result<Self> {
        let mut bits = Vec::with_capacity(x.dim());
        for (i, &v) in x.as_slice().iter().enumerate() {
            bits.push(match v {
                v if v == 0.0 => 0,
                v if v == 1.0 => 1,
                _ => {
                    return Err(invalid(format!(
                        "entry {i} is {v}; the optical channel only encodes binary inputs"
                    )))
                }
            });
        }
        Self::new(bits)
    }

    pub fn dim(&self) -> usize {
        self.bits.len()
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    /// Fraction of ones.
    pub fn sparsity(&self) -> f64 {
        self.count_ones() as f64 / self.dim() as f64
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| (b == 1).then_some(i))
    }

    pub fn to_signal(&self) -> Signal {
        Signal {
            values: self.bits.iter().map(|&b| b as f64).collect(),
        }
    }
}

/// Nonzero entries of a signal in increasing index order.
///
/// Projection kernels iterate over this view. Skipped zeros contribute
/// exactly `±0.0` to a sum, so results are bit-identical to the dense
/// sequential dot product.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSignal {
    dim: usize,
    index: Vec<u32>,
    value: Vec<f64>,
}

impl SparseSignal {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.index.len()
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.index
            .iter()
            .zip(&self.value)
            .map(|(&i, &v)| (i as usize, v))
    }

    pub(crate) fn parts(&self) -> (&[u32], &[f64]) {
        (&self.index, &self.value)
    }
}

impl From<&Signal> for SparseSignal {
    fn from(x: &Signal) -> Self {
        let (index, value) = x
            .as_slice()
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(i, &v)| (i as u32, v))
            .unzip();
        Self {
            dim: x.dim(),
            index,
            value,
        }
    }
}

impl From<&BinarySignal> for SparseSignal {
    fn from(x: &BinarySignal) -> Self {
        let index: Vec<u32> = x.ones().map(|i| i as u32).collect();
        let value = vec![1.0; index.len()];
        Self {
            dim: x.dim(),
            index,
            value,
        }
    }
}

pub(crate) fn check_dims(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(invalid(format!("dimension mismatch: {a} vs {b}")));
    }
    Ok(())
}

/// Sequential dot product; the accumulation order is part of the contract.
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}
