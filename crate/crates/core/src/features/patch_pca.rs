//! Filters learned from the image under analysis: the principal axes of its
//! own s×s patches.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{FilterBank, FilterSource};
use crate::error::{Error, Result};
use crate::image::Plane;
use crate::numerics::symmetric_eig;

/// Patch count above which the covariance is estimated on a random subset.
pub const PATCH_SAMPLE_CAP: usize = 200_000;
/// Minimum number of interior patches, in units of s².
const MIN_PATCHES_PER_DIM: usize = 10;
const NO_TEXTURE_TRACE: f64 = 1e-12;
const SUBSET_CHUNK: usize = 4096;

/// How many principal components become kernels. Serialised as a bare
/// integer (count) or float (fraction).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(untagged)]
pub enum ComponentSelection {
    Count(usize),
    /// Smallest count whose cumulative eigenvalue share reaches the fraction.
    VarianceFraction(f64),
}

impl ComponentSelection {
    pub(crate) fn resolve(self, eigenvalues: &[f64]) -> Result<usize> {
        match self {
            ComponentSelection::Count(m) => {
                if m == 0 || m > eigenvalues.len() {
                    return Err(Error::Parameter(format!(
                        "component count {m} outside 1..={}",
                        eigenvalues.len()
                    )));
                }
                Ok(m)
            }
            ComponentSelection::VarianceFraction(f) => {
                if !(f > 0.0 && f <= 1.0) {
                    return Err(Error::Parameter(format!("variance fraction {f} outside (0, 1]")));
                }
                Ok(count_for_fraction(eigenvalues, f))
            }
        }
    }
}

/// Smallest r with Σ_{i<r} λᵢ ≥ f · Σ λᵢ (eigenvalues sorted descending,
/// negatives treated as zero).
pub(crate) fn count_for_fraction(eigenvalues: &[f64], fraction: f64) -> usize {
    let total: f64 = eigenvalues.iter().map(|l| l.max(0.0)).sum();
    let target = fraction * total - 1e-12 * total;
    let mut acc = 0.0;
    for (i, l) in eigenvalues.iter().enumerate() {
        acc += l.max(0.0);
        if acc >= target {
            return i + 1;
        }
    }
    eigenvalues.len()
}

/// Learns `selection` Patch-PCA kernels of side `s` from one channel.
///
/// The channel's global mean is removed, the s²×s² covariance of its interior
/// patches is formed (on a seeded random subset of [`PATCH_SAMPLE_CAP`]
/// patches for large images), and the leading eigenvectors become kernels.
pub fn learn_patch_pca_filters(
    channel: &Plane,
    s: usize,
    selection: ComponentSelection,
    seed: u64,
) -> Result<FilterBank> {
    if s % 2 == 0 || s == 0 {
        return Err(Error::Parameter(format!("patch side must be odd, got {s}")));
    }
    let (h, w) = channel.dims();
    if s > h || s > w {
        return Err(Error::Size(format!("patch side {s} exceeds image {h}x{w}")));
    }
    let n_patches = (h - s + 1) * (w - s + 1);
    if n_patches < MIN_PATCHES_PER_DIM * s * s {
        return Err(Error::Size(format!(
            "{h}x{w} image yields {n_patches} patches of side {s}; need at least {}",
            MIN_PATCHES_PER_DIM * s * s
        )));
    }
    if let ComponentSelection::Count(m) = selection {
        if m == 0 || m > s * s {
            return Err(Error::Parameter(format!("component count {m} outside 1..={}", s * s)));
        }
    }
    let mean = channel.mean();
    let centered = channel.map(|v| v - mean);

    let cov = if n_patches <= PATCH_SAMPLE_CAP {
        patch_covariance_all(&centered, s)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut picked = rand::seq::index::sample(&mut rng, n_patches, PATCH_SAMPLE_CAP).into_vec();
        picked.sort_unstable();
        patch_covariance_direct(&centered, s, &picked)
    };
    if cov.trace() <= NO_TEXTURE_TRACE {
        return Err(Error::no_texture());
    }
    let sd = symmetric_eig(&cov)?;
    let m = selection.resolve(&sd.eigenvalues)?;
    let kernels = (0..m)
        .map(|i| Plane::new(s, s, sd.eigenvector(i)).expect("s*s entries"))
        .collect();
    let eigenvalues = sd.eigenvalues[..m].iter().map(|l| l.max(0.0)).collect();
    Ok(FilterBank {
        kernels,
        source: FilterSource::PatchPca,
        eigenvalues: Some(eigenvalues),
    })
}

/// Covariance over every interior patch, computed per displacement with one
/// summed-area table each, so the cost is O(s² · H · W) instead of
/// O(s⁴ · H · W).
pub(crate) fn patch_covariance_all(centered: &Plane, s: usize) -> DMatrix<f64> {
    let (h, w) = centered.dims();
    let (rows, cols) = (h - s + 1, w - s + 1);
    let n = (rows * cols) as f64;
    let dim = s * s;
    let mut cov = DMatrix::zeros(dim, dim);
    let si = s as isize;
    let mut table = vec![0.0; (h + 1) * (w + 1)];

    for dr in 0..si {
        let dc_start = if dr == 0 { 0 } else { -(si - 1) };
        for dc in dc_start..si {
            // product image x[i, j] · x[i + dr, j + dc], zero outside range
            let stride = w + 1;
            for v in table.iter_mut().take(stride) {
                *v = 0.0;
            }
            for i in 0..h {
                let mut run = 0.0;
                table[(i + 1) * stride] = 0.0;
                for j in 0..w {
                    let (i2, j2) = (i as isize + dr, j as isize + dc);
                    let prod = if i2 < h as isize && j2 >= 0 && j2 < w as isize {
                        centered.get(i, j) * centered.get(i2 as usize, j2 as usize)
                    } else {
                        0.0
                    };
                    run += prod;
                    table[(i + 1) * stride + j + 1] = table[i * stride + j + 1] + run;
                }
            }
            let rect = |r0: usize, c0: usize| {
                let (r1, c1) = (r0 + rows, c0 + cols);
                table[r1 * stride + c1] - table[r0 * stride + c1] - table[r1 * stride + c0]
                    + table[r0 * stride + c0]
            };
            for a in 0..(si - dr) {
                for b in 0..si {
                    let b2 = b + dc;
                    if b2 < 0 || b2 >= si {
                        continue;
                    }
                    let v = rect(a as usize, b as usize) / n;
                    let p = (a * si + b) as usize;
                    let q = ((a + dr) * si + b2) as usize;
                    cov[(p, q)] = v;
                    cov[(q, p)] = v;
                }
            }
        }
    }
    cov
}

/// Covariance over an explicit list of patch positions (row-major index of
/// the patch's top-left corner), accumulated chunk by chunk.
pub(crate) fn patch_covariance_direct(centered: &Plane, s: usize, positions: &[usize]) -> DMatrix<f64> {
    let w = centered.width();
    let cols = w - s + 1;
    let dim = s * s;
    let mut cov = DMatrix::zeros(dim, dim);
    for chunk in positions.chunks(SUBSET_CHUNK) {
        let x = DMatrix::from_fn(chunk.len(), dim, |k, e| {
            let (r, c) = (chunk[k] / cols, chunk[k] % cols);
            centered.get(r + e / s, c + e % s)
        });
        cov += x.tr_mul(&x);
    }
    cov / positions.len() as f64
}
