use super::convolve::reflect_index;
use super::{Image, Plane};
use crate::error::{Error, Result};

const BLUR_SIGMA: f64 = 1.0;
const BLUR_RADIUS: usize = 2;

/// Levels of successively halved images; level 0 is the input.
#[derive(Debug, Clone)]
pub struct Pyramid {
    pub levels: Vec<Image>,
    /// Scale count asked for before clamping.
    pub requested_scales: usize,
}

impl Pyramid {
    pub fn scale_count(&self) -> usize {
        self.levels.len()
    }

    pub fn was_clamped(&self) -> bool {
        self.levels.len() < self.requested_scales
    }
}

/// Smallest side a level may have to host an `s`×`s` kernel: 2s + 1.
pub fn min_side_for_kernel(s: usize) -> usize {
    2 * s + 1
}

fn gaussian_taps() -> [f64; 2 * BLUR_RADIUS + 1] {
    let mut taps = [0.0; 2 * BLUR_RADIUS + 1];
    for (i, t) in taps.iter_mut().enumerate() {
        let x = i as f64 - BLUR_RADIUS as f64;
        *t = (-x * x / (2.0 * BLUR_SIGMA * BLUR_SIGMA)).exp();
    }
    let sum: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= sum);
    taps
}

/// 5×5 Gaussian blur (σ = 1, applied separably with reflect borders) followed
/// by keeping every other row and column starting at 0.
pub fn downsample_half(img: &Image) -> Result<Image> {
    let (h, w) = img.dims();
    if h < 2 || w < 2 {
        return Err(Error::Size(format!("cannot halve a {h}x{w} image")));
    }
    let planes = img.planes().iter().map(downsample_plane).collect();
    Image::from_planes(planes)
}

fn downsample_plane(plane: &Plane) -> Plane {
    let taps = gaussian_taps();
    let (h, w) = plane.dims();
    let (oh, ow) = (h.div_ceil(2), w.div_ceil(2));
    let r = BLUR_RADIUS as isize;

    // horizontal pass only on kept columns
    let mut horiz = vec![0.0; h * ow];
    for row in 0..h {
        let src = plane.row(row);
        for oc in 0..ow {
            let c = (2 * oc) as isize;
            let mut acc = 0.0;
            for (t, &k) in taps.iter().enumerate() {
                acc += k * src[reflect_index(c + t as isize - r, w)];
            }
            horiz[row * ow + oc] = acc;
        }
    }
    Plane::from_fn(oh, ow, |or, oc| {
        let rr = (2 * or) as isize;
        let mut acc = 0.0;
        for (t, &k) in taps.iter().enumerate() {
            acc += k * horiz[reflect_index(rr + t as isize - r, h) * ow + oc];
        }
        acc
    })
}

/// Nearest-neighbour upsampling to exactly `height`×`width`.
pub fn upsample_to(map: &Plane, height: usize, width: usize) -> Result<Plane> {
    let (h, w) = map.dims();
    if height < h || width < w {
        return Err(Error::Size(format!(
            "cannot upsample {h}x{w} to smaller {height}x{width}"
        )));
    }
    if (height, width) == (h, w) {
        return Ok(map.clone());
    }
    Ok(Plane::from_fn(height, width, |r, c| {
        map.get(r * h / height, c * w / width)
    }))
}

/// Builds up to `n_scales` levels, stopping before any level whose smaller
/// side would fall below `min_side`. Level 0 is always present.
pub fn build_pyramid(img: &Image, n_scales: usize, min_side: usize) -> Result<Pyramid> {
    let requested_scales = n_scales.max(1);
    let mut levels = vec![img.clone()];
    while levels.len() < requested_scales {
        let last = levels.last().expect("non-empty");
        let (h, w) = last.dims();
        let (nh, nw) = (h.div_ceil(2), w.div_ceil(2));
        if h < 2 || w < 2 || nh.min(nw) < min_side {
            break;
        }
        levels.push(downsample_half(last)?);
    }
    Ok(Pyramid {
        levels,
        requested_scales,
    })
}
