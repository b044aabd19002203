use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;

use crate::datasets::idx::{read_images, read_labels, IdxImages};
use crate::error::{invalid, Error, ParseErrorKind, Result};
use crate::rng;
use crate::signal::{BinarySignal, Signal};

pub const CLASSES: usize = 10;
pub const DEFAULT_THRESHOLD: u8 = 128;

pub const TRAIN_IMAGES: &str = "train-images-idx3-ubyte";
pub const TRAIN_LABELS: &str = "train-labels-idx1-ubyte";
pub const TEST_IMAGES: &str = "t10k-images-idx3-ubyte";
pub const TEST_LABELS: &str = "t10k-labels-idx1-ubyte";

/// Grayscale images with class labels, before binarization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayDataset {
    pub images: IdxImages,
    pub labels: Vec<u8>,
}

impl GrayDataset {
    pub fn new(images: IdxImages, labels: Vec<u8>) -> Result<Self> {
        if images.count != labels.len() {
            return Err(Error::Parse {
                offset: 0,
                kind: ParseErrorKind::DimensionMismatch(format!(
                    "{} images but {} labels",
                    images.count,
                    labels.len()
                )),
            });
        }
        Ok(Self { images, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn binarize(&self, threshold: u8) -> LabeledDataset {
        LabeledDataset {
            width: self.images.cols,
            height: self.images.rows,
            images: self.images.iter().map(|img| binarize(img, threshold)).collect(),
            labels: self.labels.clone(),
        }
    }

    /// Concatenation of two datasets with identical image size.
    pub fn concat(mut self, other: GrayDataset) -> Result<Self> {
        if (self.images.rows, self.images.cols) != (other.images.rows, other.images.cols) {
            return Err(invalid("cannot concatenate datasets with different image sizes"));
        }
        self.images.count += other.images.count;
        self.images.pixels.extend(other.images.pixels);
        self.labels.extend(other.labels);
        Ok(self)
    }
}

/// The four MNIST files: the canonical 60 000-image training file and
/// 10 000-image test file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mnist {
    pub train: GrayDataset,
    pub test: GrayDataset,
}

impl Mnist {
    pub fn paths(dir: &Path) -> [PathBuf; 4] {
        [TRAIN_IMAGES, TRAIN_LABELS, TEST_IMAGES, TEST_LABELS].map(|f| dir.join(f))
    }

    /// Loads the standard file names from `dir`.
    pub fn load(dir: &Path) -> Result<Self> {
        let [tri, trl, tei, tel] = Self::paths(dir);
        Ok(Self {
            train: GrayDataset::new(read_images(&tri)?, read_labels(&trl)?)?,
            test: GrayDataset::new(read_images(&tei)?, read_labels(&tel)?)?,
        })
    }

    /// All images, training file first.
    pub fn combined(self) -> Result<GrayDataset> {
        self.train.concat(self.test)
    }
}

/// Labeled binary images of one size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledDataset {
    pub width: usize,
    pub height: usize,
    pub images: Vec<BinarySignal>,
    pub labels: Vec<u8>,
}

impl LabeledDataset {
    pub fn new(width: usize, height: usize, images: Vec<BinarySignal>, labels: Vec<u8>) -> Result<Self> {
        if images.len() != labels.len() {
            return Err(invalid(format!("{} images but {} labels", images.len(), labels.len())));
        }
        if let Some(i) = images.iter().position(|x| x.dim() != width * height) {
            return Err(invalid(format!(
                "image {i} has dimension {}, expected {}",
                images[i].dim(),
                width * height
            )));
        }
        if let Some(i) = labels.iter().position(|&l| l as usize >= CLASSES) {
            return Err(invalid(format!("label {} at {i} outside 0..=9", labels[i])));
        }
        Ok(Self {
            width,
            height,
            images,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.width * self.height
    }

    pub fn subset(&self, indices: &[usize]) -> LabeledDataset {
        LabeledDataset {
            width: self.width,
            height: self.height,
            images: indices.iter().map(|&i| self.images[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    pub fn mean_sparsity(&self) -> f64 {
        self.images.iter().map(BinarySignal::sparsity).sum::<f64>() / self.len() as f64
    }

    pub fn class_counts(&self) -> [usize; CLASSES] {
        let mut counts = [0; CLASSES];
        for &l in &self.labels {
            counts[l as usize] += 1;
        }
        counts
    }
}

/// `1` where the pixel is at least `threshold`.
pub fn binarize(image: &[u8], threshold: u8) -> BinarySignal {
    BinarySignal::new(image.iter().map(|&p| (p >= threshold) as u8).collect())
        .expect("non-empty image")
}

/// Disjoint index sets of the requested sizes from a seeded permutation.
pub fn split_indices(len: usize, n_train: usize, n_test: usize, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if n_train.checked_add(n_test).map_or(true, |total| total > len) {
        return Err(invalid(format!(
            "split of {n_train} + {n_test} exceeds dataset size {len}"
        )));
    }
    let mut perm: Vec<usize> = (0..len).collect();
    perm.shuffle(&mut rng::seeded(seed));
    let test = perm[n_train..n_train + n_test].to_vec();
    perm.truncate(n_train);
    Ok((perm, test))
}

pub fn split(ds: &LabeledDataset, n_train: usize, n_test: usize, seed: u64) -> Result<(LabeledDataset, LabeledDataset)> {
    let (train, test) = split_indices(ds.len(), n_train, n_test, seed)?;
    Ok((ds.subset(&train), ds.subset(&test)))
}

/// Unit-norm class means `c_j / ‖c_j‖`, one per digit.
pub fn class_centroids(train: &LabeledDataset) -> Result<Vec<Signal>> {
    let n = train.dim();
    let mut sums = vec![vec![0u64; n]; CLASSES];
    let mut counts = [0usize; CLASSES];
    for (x, &l) in train.images.iter().zip(&train.labels) {
        counts[l as usize] += 1;
        let row = &mut sums[l as usize];
        for i in x.ones() {
            row[i] += 1;
        }
    }
    sums.into_iter()
        .zip(counts)
        .enumerate()
        .map(|(class, (sum, count))| {
            if count == 0 {
                return Err(invalid(format!("class {class} has no training images")));
            }
            let mean = Signal::new(sum.iter().map(|&s| s as f64 / count as f64).collect())?;
            mean.normalized().map_err(|_| {
                invalid(format!("class {class} centroid is zero; cannot normalize"))
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> LabeledDataset {
        let images = (0..40)
            .map(|k| BinarySignal::from_fn(6, |i| (i + k) % 3 == 0 || i == k % 6).unwrap())
            .collect();
        let labels = (0..40).map(|k| (k % 10) as u8).collect();
        LabeledDataset::new(3, 2, images, labels).unwrap()
    }

    #[test]
    fn binarize_boundary() {
        assert!(binarize(&[0; 9], 128).bits().iter().all(|&b| b == 0));
        assert_eq!(binarize(&[127, 128, 255], 128).bits(), &[0, 1, 1]);
    }

    #[test]
    fn dataset_invariants() {
        let x = BinarySignal::new(vec![0; 4]).unwrap();
        assert!(LabeledDataset::new(2, 2, vec![x.clone()], vec![]).is_err());
        assert!(LabeledDataset::new(2, 2, vec![x.clone()], vec![10]).is_err());
        assert!(LabeledDataset::new(3, 2, vec![x.clone()], vec![1]).is_err());
        assert!(LabeledDataset::new(2, 2, vec![x], vec![9]).is_ok());
    }

    #[test]
    fn split_is_deterministic_and_disjoint() {
        let (a, b) = split_indices(100, 60, 30, 5).unwrap();
        let (a2, b2) = split_indices(100, 60, 30, 5).unwrap();
        assert_eq!((&a, &b), (&a2, &b2));
        assert_eq!((a.len(), b.len()), (60, 30));
        let mut all: Vec<usize> = a.iter().chain(&b).copied().collect();
        all.sort_unstable();
        all.dedup();
        assert_eq!(all.len(), 90);
        let (c, _) = split_indices(100, 60, 30, 6).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn split_too_large() {
        assert!(split_indices(10, 8, 3, 0).is_err());
        assert!(split(&toy(), 30, 11, 0).is_err());
        let (tr, te) = split(&toy(), 30, 10, 0).unwrap();
        assert_eq!((tr.len(), te.len()), (30, 10));
    }

    #[test]
    fn centroids_are_unit_and_nonnegative() {
        let units = class_centroids(&toy()).unwrap();
        assert_eq!(units.len(), 10);
        for u in &units {
            assert!((u.norm() - 1.0).abs() <= 1e-12);
            assert!(u.as_slice().iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn single_image_class() {
        let mut ds = toy();
        ds.images.truncate(10);
        ds.labels.truncate(10);
        let units = class_centroids(&ds).unwrap();
        let x = ds.images[4].to_signal();
        assert_eq!(units[4], x.normalized().unwrap());
    }

    #[test]
    fn empty_class_is_named() {
        let mut ds = toy();
        ds.labels.iter_mut().for_each(|l| {
            if *l == 7 {
                *l = 3
            }
        });
        let err = class_centroids(&ds).unwrap_err().to_string();
        assert!(err.contains("class 7"), "{err}");
    }
}
