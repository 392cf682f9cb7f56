//! Feature front-ends: filters learned from the image itself (Patch-PCA), a
//! fixed Gabor bank, or externally computed feature maps. All of them end in
//! a [`FeatureStack`].

mod external;
mod gabor;
mod multilight;
mod patch_pca;

pub use external::{load_external_features, pca_reduce_features, ExternalManifest, MANIFEST_NAME};
pub use gabor::{make_gabor_bank, GaborGeometry};
pub use multilight::multilight_pca;
pub use patch_pca::{learn_patch_pca_filters, ComponentSelection, PATCH_SAMPLE_CAP};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::{convolve2d, Image, Plane};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterSource {
    PatchPca,
    Gabor,
}

/// Ordered set of square kernels.
#[derive(Debug, Clone)]
pub struct FilterBank {
    pub kernels: Vec<Plane>,
    pub source: FilterSource,
    /// Variance carried by each kernel; present for Patch-PCA banks, sorted
    /// descending.
    pub eigenvalues: Option<Vec<f64>>,
}

impl FilterBank {
    pub fn len(&self) -> usize {
        self.kernels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kernels.is_empty()
    }

    pub fn max_kernel_size(&self) -> usize {
        self.kernels.iter().map(Plane::height).max().unwrap_or(0)
    }

    /// Largest |⟨kᵢ, kⱼ⟩ − δᵢⱼ| over all kernel pairs.
    pub fn orthonormality_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.kernels.iter().enumerate() {
            for (j, b) in self.kernels.iter().enumerate().skip(i) {
                if a.dims() != b.dims() {
                    continue;
                }
                let dot: f64 = a.data().iter().zip(b.data()).map(|(x, y)| x * y).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }
}

/// Tiles kernels on a square grid, one cell per kernel, each rescaled to
/// [0, 1] on its own range. Cells are separated by a one-pixel 0.5 border.
pub fn kernel_montage(kernels: &[Plane]) -> Plane {
    let cell = kernels.iter().map(Plane::height).max().unwrap_or(0) + 1;
    let cols = (kernels.len() as f64).sqrt().ceil().max(1.0) as usize;
    let rows = kernels.len().div_ceil(cols).max(1);
    let mut out = Plane::filled(rows * cell + 1, cols * cell + 1, 0.5);
    for (i, k) in kernels.iter().enumerate() {
        let (lo, hi) = (k.min(), k.max());
        let span = if hi > lo { hi - lo } else { 1.0 };
        let off = (cell - 1 - k.height()) / 2;
        let (r0, c0) = ((i / cols) * cell + 1 + off, (i % cols) * cell + 1 + off);
        for r in 0..k.height() {
            for c in 0..k.width() {
                out.set(r0 + r, c0 + c, (k.get(r, c) - lo) / span);
            }
        }
    }
    out
}

/// Response maps per channel: `maps[c][i]` is component `i` of channel `c`.
#[derive(Debug, Clone)]
pub struct FeatureStack {
    maps: Vec<Vec<Plane>>,
}

impl FeatureStack {
    pub fn new(maps: Vec<Vec<Plane>>) -> Result<Self> {
        let first = maps
            .first()
            .and_then(|c| c.first())
            .ok_or_else(|| Error::Size("feature stack needs at least one map".into()))?;
        let dims = first.dims();
        let dof = maps[0].len();
        for channel in &maps {
            if channel.len() != dof {
                return Err(Error::Size("channels carry different map counts".into()));
            }
            if channel.iter().any(|m| m.dims() != dims) {
                return Err(Error::Size("feature maps must share dimensions".into()));
            }
        }
        Ok(FeatureStack { maps })
    }

    pub fn channel_count(&self) -> usize {
        self.maps.len()
    }

    /// Maps per channel.
    pub fn dof(&self) -> usize {
        self.maps[0].len()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.maps[0][0].dims()
    }

    pub fn channel(&self, c: usize) -> &[Plane] {
        &self.maps[c]
    }

    pub fn into_channels(self) -> Vec<Vec<Plane>> {
        self.maps
    }
}

/// Subtracts each channel's global mean, then correlates it with every
/// kernel of the bank.
pub fn apply_filter_bank(img: &Image, bank: &FilterBank) -> Result<FeatureStack> {
    if bank.is_empty() {
        return Err(Error::Parameter("filter bank is empty".into()));
    }
    let centered: Vec<Plane> = img
        .planes()
        .iter()
        .map(|p| {
            let mean = p.mean();
            p.map(|v| v - mean)
        })
        .collect();
    let maps = centered
        .par_iter()
        .map(|channel| {
            bank.kernels
                .par_iter()
                .map(|k| convolve2d(channel, k))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    FeatureStack::new(maps)
}
