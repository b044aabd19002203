//! Data ingestion and synthesis.

pub mod idx;
pub mod mnist;
pub mod video;

pub use idx::{encode_idx, parse_idx, IdxData, IdxImages};
pub use mnist::{binarize, class_centroids, split, split_indices, GrayDataset, LabeledDataset, Mnist};
pub use video::{gen_disk_video, quadrant_counts, quadrant_indicator, QuadrantIndicator, VideoSpec};
