//! Distance-to-normality maps, Number of False Alarms (NFA) maps and their
//! merging into a final anomaly score AS = −log₁₀ NFA.

mod mahalanobis;
mod merge;
mod nfa;
pub(crate) mod pipeline;
mod stats;

pub use mahalanobis::{mahalanobis_map, MahalanobisMap};
pub use merge::{merge_channels, merge_scales};
pub use nfa::{block_nfa, pixel_nfa, BlockParams};
pub use pipeline::{detect, detect_feature_stack, detect_multilight, min_level_side};
pub use stats::{estimate_component_stats, ComponentStats, DEGENERATE_VARIANCE_REL};

use crate::config::DetectorConfig;
use crate::image::{Mask, Plane};

/// Per-pixel log₁₀ NFA for one channel (or a merge of several) at one scale.
#[derive(Debug, Clone, PartialEq)]
pub struct NfaMap {
    pub log10_nfa: Plane,
    /// Number of tests N_T behind each value.
    pub tests: f64,
    pub scale_index: usize,
    /// `None` once channels have been merged.
    pub channel_index: Option<usize>,
}

impl NfaMap {
    pub fn dims(&self) -> (usize, usize) {
        self.log10_nfa.dims()
    }

    /// AS = −log₁₀ NFA at every pixel.
    pub fn anomaly_score(&self) -> Plane {
        self.log10_nfa.map(|v| -v)
    }
}

/// Bookkeeping that does not enter the score itself.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    pub requested_scales: usize,
    pub used_scales: usize,
    /// Retained degrees of freedom, `[scale][channel]`.
    pub dof: Vec<Vec<usize>>,
    /// N_T of the finest scale, as used in the maps.
    pub tests_per_map: f64,
    /// N_T multiplied by channels × scales, i.e. with a multiplicity
    /// correction that the maps do not apply.
    pub tests_with_multiplicity: f64,
    /// Distance threshold of the block variant, per scale.
    pub block_tau: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct DetectionResult {
    /// AS = −log₁₀ NFA at full resolution.
    pub anomaly_score: Plane,
    /// Pixels with AS at or above the threshold.
    pub mask: Mask,
    pub threshold_as: f64,
    /// Channel-merged NFA map of each scale, at that scale's resolution.
    pub per_scale: Vec<NfaMap>,
    /// Unmerged maps, `[scale][channel]`.
    pub per_channel: Vec<Vec<NfaMap>>,
    pub config_echo: Option<DetectorConfig>,
    pub diagnostics: Diagnostics,
}

impl DetectionResult {
    pub fn dims(&self) -> (usize, usize) {
        self.anomaly_score.dims()
    }

    /// Number of pixels at or above the threshold.
    pub fn detections(&self) -> usize {
        self.mask.count()
    }
}
