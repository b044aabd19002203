use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::signal::{BinarySignal, Signal};
use crate::sketch::{spe_estimate, DropSketch, SignTemplate};
use crate::tasks::argmax_first;

/// Where a classification was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Domain {
    Direct,
    SketchedIdeal,
    SketchedOpu,
    SketchedOpuFile,
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Domain::Direct => "direct",
            Domain::SketchedIdeal => "sketched-ideal",
            Domain::SketchedOpu => "sketched-opu",
            Domain::SketchedOpuFile => "sketched-opu-file",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierReport {
    pub domain: Domain,
    /// Sketch size; 0 in the direct domain.
    pub m: usize,
    pub predictions: Vec<usize>,
    pub accuracy: f64,
}

impl ClassifierReport {
    pub fn new(domain: Domain, m: usize, predictions: Vec<usize>, labels: &[u8]) -> Result<Self> {
        let accuracy = accuracy(&predictions, labels)?;
        Ok(Self {
            domain,
            m,
            predictions,
            accuracy,
        })
    }
}

/// `argmax_j ⟨u_j, x⟩²`, smallest `j` on ties.
pub fn classify_direct(units: &[Signal], x: &Signal) -> Result<usize> {
    let scores = units
        .iter()
        .map(|u| u.dot(x).map(|p| p * p))
        .collect::<Result<Vec<_>>>()?;
    argmax_first(&scores).ok_or_else(|| invalid("no class templates"))
}

/// `argmax_j κ/m ⟨t_j, b_x⟩`, smallest `j` on ties.
pub fn classify_sketched(templates: &[SignTemplate], bx: &DropSketch) -> Result<usize> {
    let scores = templates
        .iter()
        .map(|t| spe_estimate(t, bx))
        .collect::<Result<Vec<_>>>()?;
    argmax_first(&scores).ok_or_else(|| invalid("no class templates"))
}

pub fn accuracy(predictions: &[usize], labels: &[u8]) -> Result<f64> {
    if predictions.len() != labels.len() {
        return Err(invalid(format!(
            "{} predictions for {} labels",
            predictions.len(),
            labels.len()
        )));
    }
    if labels.is_empty() {
        return Err(invalid("accuracy of an empty test set"));
    }
    let correct = predictions
        .iter()
        .zip(labels)
        .filter(|(&p, &l)| p == l as usize)
        .count();
    Ok(correct as f64 / labels.len() as f64)
}

/// Rule turning a real, nonnegative class template into a binary input the
/// optical channel can encode.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "rule", content = "fraction")]
pub enum TemplateBinarization {
    /// Ones where the entry is at least the template's median.
    Median,
    /// Ones on the `k` largest entries, with `k` maximizing the cosine
    /// similarity between the resulting indicator and the template.
    #[default]
    CosineOptimal,
    /// Ones on the given fraction of largest entries.
    TopFraction(f64),
}

impl fmt::Display for TemplateBinarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TemplateBinarization::Median => f.write_str("median"),
            TemplateBinarization::CosineOptimal => f.write_str("cosine-optimal"),
            TemplateBinarization::TopFraction(p) => write!(f, "top-fraction:{p}"),
        }
    }
}

pub fn binarize_template(u: &Signal, rule: TemplateBinarization) -> Result<BinarySignal> {
    let v = u.as_slice();
    let n = v.len();
    // indices by decreasing value, ties by index
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| v[b].total_cmp(&v[a]).then(a.cmp(&b)));
    let k = match rule {
        TemplateBinarization::Median => {
            let mut sorted = v.to_vec();
            sorted.sort_by(f64::total_cmp);
            let median = if n % 2 == 1 {
                sorted[n / 2]
            } else {
                0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
            };
            return BinarySignal::from_fn(n, |i| v[i] >= median);
        }
        TemplateBinarization::TopFraction(p) => {
            if !(p > 0.0 && p <= 1.0) {
                return Err(invalid(format!("top fraction must lie in (0, 1], got {p}")));
            }
            ((p * n as f64).round() as usize).clamp(1, n)
        }
        TemplateBinarization::CosineOptimal => {
            let mut best = (f64::NEG_INFINITY, 1);
            let mut prefix = 0.0;
            for (i, &idx) in order.iter().enumerate() {
                prefix += v[idx];
                let score = prefix / ((i + 1) as f64).sqrt();
                if score > best.0 {
                    best = (score, i + 1);
                }
            }
            best.1
        }
    };
    let mut bits = vec![0u8; n];
    for &i in &order[..k] {
        bits[i] = 1;
    }
    BinarySignal::new(bits)
}
