use std::f64::consts::PI;

use super::{FilterBank, FilterSource};
use crate::error::{Error, Result};
use crate::image::Plane;

/// Geometry of a Gabor bank. Kernel count is
/// `sizes × orientations × wavelengths` (doubled with odd phase).
#[derive(Debug, Clone, PartialEq)]
pub struct GaborGeometry {
    /// Odd kernel sides.
    pub sizes: Vec<usize>,
    /// Orientations spread evenly over 180°.
    pub orientations: usize,
    /// Wavelengths per size: s/2, s/4, s/8, ...
    pub wavelengths: usize,
    /// Add sine-phase kernels next to the cosine ones.
    pub odd_phase: bool,
}

impl Default for GaborGeometry {
    fn default() -> Self {
        GaborGeometry {
            sizes: vec![7, 15, 23, 31],
            orientations: 6,
            wavelengths: 3,
            odd_phase: false,
        }
    }
}

impl GaborGeometry {
    pub fn kernel_count(&self) -> usize {
        let phases = if self.odd_phase { 2 } else { 1 };
        self.sizes.len() * self.orientations * self.wavelengths * phases
    }
}

/// Builds zero-mean, unit-norm Gabor kernels ordered by size, then
/// wavelength, then orientation. The Gaussian envelope has σ = s/6.
pub fn make_gabor_bank(geometry: &GaborGeometry) -> Result<FilterBank> {
    if geometry.sizes.is_empty() || geometry.orientations == 0 || geometry.wavelengths == 0 {
        return Err(Error::Parameter("gabor bank needs sizes, orientations and wavelengths".into()));
    }
    let mut kernels = Vec::with_capacity(geometry.kernel_count());
    for &s in &geometry.sizes {
        if s % 2 == 0 || s < 3 {
            return Err(Error::Parameter(format!("gabor size must be odd and >= 3, got {s}")));
        }
        for wi in 0..geometry.wavelengths {
            let wavelength = s as f64 / 2f64.powi(wi as i32 + 1);
            for oi in 0..geometry.orientations {
                let theta = PI * oi as f64 / geometry.orientations as f64;
                kernels.push(gabor_kernel(s, theta, wavelength, 0.0)?);
                if geometry.odd_phase {
                    kernels.push(gabor_kernel(s, theta, wavelength, -PI / 2.0)?);
                }
            }
        }
    }
    Ok(FilterBank {
        kernels,
        source: FilterSource::Gabor,
        eigenvalues: None,
    })
}

/// `exp(-(x'² + y'²) / 2σ²) · cos(2π x'/λ + φ)` with x' along direction θ
/// (θ = 0 varies along columns), then centered and normalised.
fn gabor_kernel(s: usize, theta: f64, wavelength: f64, phase: f64) -> Result<Plane> {
    let half = (s / 2) as f64;
    let sigma = s as f64 / 6.0;
    let (sin_t, cos_t) = theta.sin_cos();
    let mut k = Plane::from_fn(s, s, |r, c| {
        let x = c as f64 - half;
        let y = r as f64 - half;
        let xr = x * cos_t + y * sin_t;
        let yr = -x * sin_t + y * cos_t;
        (-(xr * xr + yr * yr) / (2.0 * sigma * sigma)).exp() * (2.0 * PI * xr / wavelength + phase).cos()
    });
    let mean = k.mean();
    k.data_mut().iter_mut().for_each(|v| *v -= mean);
    let norm = k.data().iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm < 1e-12 {
        return Err(Error::Parameter(format!(
            "degenerate gabor kernel (s={s}, wavelength={wavelength})"
        )));
    }
    k.data_mut().iter_mut().for_each(|v| *v /= norm);
    Ok(k)
}
