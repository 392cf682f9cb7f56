//! Detector configuration and its `key = value` text form.
//!
//! The text form is TOML: top-level keys for the shared parameters plus one
//! table per variant-specific group (`[block]`, `[gabor]`, `[external]`,
//! `[multilight]`). Missing keys take their defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{ComponentSelection, GaborGeometry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    PatchPca,
    Gabor,
    External,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::PatchPca => "patch-pca",
            Variant::Gabor => "gabor",
            Variant::External => "external",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NfaKind {
    Pixel,
    Block,
}

impl NfaKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NfaKind::Pixel => "pixel",
            NfaKind::Block => "block",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlockConfig {
    /// Block side w.
    pub size: usize,
    pub stride: usize,
    /// Candidate p-value; the distance threshold is derived from it.
    pub p_value: f64,
}

impl Default for BlockConfig {
    fn default() -> Self {
        BlockConfig {
            size: 51,
            stride: 10,
            p_value: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaborConfig {
    pub sizes: Vec<usize>,
    pub orientations: usize,
    pub wavelengths: usize,
    pub odd_phase: bool,
    /// PCA-decorrelate the responses before the distance step.
    pub decorrelate: bool,
}

impl Default for GaborConfig {
    fn default() -> Self {
        let g = GaborGeometry::default();
        GaborConfig {
            sizes: g.sizes,
            orientations: g.orientations,
            wavelengths: g.wavelengths,
            odd_phase: g.odd_phase,
            decorrelate: false,
        }
    }
}

impl GaborConfig {
    pub fn geometry(&self) -> GaborGeometry {
        GaborGeometry {
            sizes: self.sizes.clone(),
            orientations: self.orientations,
            wavelengths: self.wavelengths,
            odd_phase: self.odd_phase,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExternalConfig {
    pub variance_fraction: f64,
}

impl Default for ExternalConfig {
    fn default() -> Self {
        ExternalConfig {
            variance_fraction: 0.9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MultilightConfig {
    pub enabled: bool,
    pub keep_last: usize,
}

impl Default for MultilightConfig {
    fn default() -> Self {
        MultilightConfig {
            enabled: false,
            keep_last: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorConfig {
    pub variant: Variant,
    pub nfa: NfaKind,
    /// Patch-PCA component count, or a variance fraction in (0, 1].
    pub m: ComponentSelection,
    /// Patch side s.
    pub patch_size: usize,
    pub scales: usize,
    /// Pixels with AS at or above this value are flagged.
    pub threshold_as: f64,
    pub seed: u64,
    pub block: BlockConfig,
    pub gabor: GaborConfig,
    pub external: ExternalConfig,
    pub multilight: MultilightConfig,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            variant: Variant::PatchPca,
            nfa: NfaKind::Pixel,
            m: ComponentSelection::Count(45),
            patch_size: 17,
            scales: 4,
            threshold_as: 0.0,
            seed: 0,
            block: BlockConfig::default(),
            gabor: GaborConfig::default(),
            external: ExternalConfig::default(),
            multilight: MultilightConfig::default(),
        }
    }
}

impl DetectorConfig {
    pub fn with_variant(variant: Variant) -> Self {
        DetectorConfig {
            variant,
            ..Default::default()
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: DetectorConfig =
            toml::from_str(text).map_err(|e| Error::Format(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(Error::NotFound(path.into()))
            }
            Err(e) => return Err(Error::io(path, e)),
        };
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is always serialisable")
    }

    /// Kernel side used as the block-NFA subsampling factor.
    pub fn subsampling_factor(&self) -> usize {
        match self.variant {
            Variant::PatchPca => self.patch_size,
            Variant::Gabor => self.gabor.sizes.iter().copied().max().unwrap_or(1),
            Variant::External => 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Parameter(msg));
        if self.patch_size % 2 == 0 || self.patch_size == 0 {
            return bad(format!("patch size must be odd, got {}", self.patch_size));
        }
        if self.scales == 0 {
            return bad("scales must be >= 1".into());
        }
        match self.m {
            ComponentSelection::Count(m) if m == 0 || m > self.patch_size * self.patch_size => {
                return bad(format!("m = {m} outside 1..={}", self.patch_size * self.patch_size))
            }
            ComponentSelection::VarianceFraction(f) if !(f > 0.0 && f <= 1.0) => {
                return bad(format!("variance fraction {f} outside (0, 1]"))
            }
            _ => {}
        }
        if !(self.block.p_value > 0.0 && self.block.p_value < 1.0) {
            return bad(format!("block p-value {} outside (0, 1)", self.block.p_value));
        }
        if self.block.stride == 0 || self.block.stride > self.block.size {
            return bad(format!(
                "block stride {} must lie in 1..={}",
                self.block.stride, self.block.size
            ));
        }
        if self.nfa == NfaKind::Block && self.block.size < self.subsampling_factor() {
            return bad(format!(
                "block size {} smaller than subsampling factor {}",
                self.block.size,
                self.subsampling_factor()
            ));
        }
        if self.gabor.sizes.iter().any(|s| s % 2 == 0) {
            return bad("gabor sizes must be odd".into());
        }
        if !(self.external.variance_fraction > 0.0 && self.external.variance_fraction <= 1.0) {
            return bad("external variance fraction outside (0, 1]".into());
        }
        if self.multilight.keep_last == 0 {
            return bad("keep-last must be >= 1".into());
        }
        if !self.threshold_as.is_finite() {
            return bad("threshold must be finite".into());
        }
        Ok(())
    }
}
