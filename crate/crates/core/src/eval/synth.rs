//! Deterministic synthetic textures with planted defects and exact masks.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::image::{convolve2d, Image, Mask, Plane};

const NOISE_MEAN: f64 = 0.5;
const NOISE_SD: f64 = 0.1;
const ENGRAVING_AMPLITUDE: f64 = 0.2;
const ENGRAVING_NOISE_SD: f64 = 0.05;
const LOWPASS_SIGMA: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Background {
    WhiteNoise,
    /// Gaussian-blurred noise renormalised to the white-noise level.
    LowPassNoise,
    /// Sinusoidal stripes plus mild noise.
    Engraving { wavelength: f64, angle_deg: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DefectShape {
    Rectangle,
    Ellipse,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DefectKind {
    /// Multiply the local noise variance.
    VarianceScale(f64),
    /// Rotate the stripes by this many degrees (engraving backgrounds only).
    Orientation(f64),
    /// Multiply the stripe frequency (engraving backgrounds only).
    Frequency(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DefectSpec {
    pub shape: DefectShape,
    pub kind: DefectKind,
    /// Top-left corner of the bounding box.
    pub row: usize,
    pub col: usize,
    pub height: usize,
    pub width: usize,
}

impl DefectSpec {
    /// Rectangle of scaled variance.
    pub fn variance_patch(row: usize, col: usize, side: usize, factor: f64) -> Self {
        DefectSpec {
            shape: DefectShape::Rectangle,
            kind: DefectKind::VarianceScale(factor),
            row,
            col,
            height: side,
            width: side,
        }
    }

    fn contains(&self, r: usize, c: usize) -> bool {
        if r < self.row || c < self.col || r >= self.row + self.height || c >= self.col + self.width {
            return false;
        }
        match self.shape {
            DefectShape::Rectangle => true,
            DefectShape::Ellipse => {
                let ry = self.height as f64 / 2.0;
                let rx = self.width as f64 / 2.0;
                let dy = (r as f64 + 0.5 - self.row as f64 - ry) / ry;
                let dx = (c as f64 + 0.5 - self.col as f64 - rx) / rx;
                dx * dx + dy * dy <= 1.0
            }
        }
    }
}

/// Builds a `height`×`width` gray image and the exact mask of its defect.
pub fn synth_anomaly(
    seed: u64,
    height: usize,
    width: usize,
    background: Background,
    defect: &DefectSpec,
) -> Result<(Image, Mask)> {
    if height == 0 || width == 0 {
        return Err(Error::Parameter("image must be non-empty".into()));
    }
    if defect.row + defect.height > height || defect.col + defect.width > width {
        return Err(Error::Parameter(format!(
            "defect {}x{} at ({}, {}) does not fit a {height}x{width} image",
            defect.height, defect.width, defect.row, defect.col
        )));
    }
    let mut mask = Mask::empty(height, width);
    for r in defect.row..defect.row + defect.height {
        for c in defect.col..defect.col + defect.width {
            mask.set(r, c, defect.contains(r, c));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut white = || Plane::from_fn(height, width, |_, _| StandardNormal.sample(&mut rng));

    let variance_factor = |r: usize, c: usize| match defect.kind {
        DefectKind::VarianceScale(f) if mask.get(r, c) => f.sqrt(),
        _ => 1.0,
    };

    let plane = match background {
        Background::WhiteNoise => {
            let z = white();
            Plane::from_fn(height, width, |r, c| NOISE_MEAN + NOISE_SD * variance_factor(r, c) * z.get(r, c))
        }
        Background::LowPassNoise => {
            let z = lowpass(&white())?;
            Plane::from_fn(height, width, |r, c| NOISE_MEAN + NOISE_SD * variance_factor(r, c) * z.get(r, c))
        }
        Background::Engraving {
            wavelength,
            angle_deg,
        } => {
            if wavelength <= 0.0 {
                return Err(Error::Parameter("engraving wavelength must be positive".into()));
            }
            let z = white();
            // random phase keeps seeds distinct
            let phase = rng.random_range(0.0..2.0 * PI);
            Plane::from_fn(height, width, |r, c| {
                let inside = mask.get(r, c);
                let (mut lambda, mut theta) = (wavelength, angle_deg);
                if inside {
                    match defect.kind {
                        DefectKind::Orientation(d) => theta += d,
                        DefectKind::Frequency(f) => lambda /= f,
                        DefectKind::VarianceScale(_) => {}
                    }
                }
                let t = theta.to_radians();
                let u = c as f64 * t.cos() + r as f64 * t.sin();
                NOISE_MEAN
                    + ENGRAVING_AMPLITUDE * (2.0 * PI * u / lambda + phase).sin()
                    + ENGRAVING_NOISE_SD * variance_factor(r, c) * z.get(r, c)
            })
        }
    };
    Ok((Image::gray(plane)?, mask))
}

fn lowpass(z: &Plane) -> Result<Plane> {
    let radius = (3.0 * LOWPASS_SIGMA).ceil() as usize;
    let side = 2 * radius + 1;
    let k = Plane::from_fn(side, side, |r, c| {
        let (y, x) = (r as f64 - radius as f64, c as f64 - radius as f64);
        (-(x * x + y * y) / (2.0 * LOWPASS_SIGMA * LOWPASS_SIGMA)).exp()
    });
    let norm = k.data().iter().map(|v| v * v).sum::<f64>().sqrt();
    // unit-L2 kernel keeps white noise at unit variance
    convolve2d(z, &k.map(|v| v / norm))
}
