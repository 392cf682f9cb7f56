use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::image::{Image, Plane};
use crate::numerics::symmetric_eig;

/// PCA across `k` aligned shots of the same scene under different lights.
///
/// Every pixel contributes one k-vector; the returned image holds the last
/// `keep_last` principal components (smallest variance last), where local
/// defects tend to concentrate.
pub fn multilight_pca(images: &[Image], keep_last: usize) -> Result<Image> {
    let k = images.len();
    if k == 0 {
        return Err(Error::Parameter("multilight needs at least one image".into()));
    }
    if keep_last == 0 || keep_last > k {
        return Err(Error::Parameter(format!("keep_last must lie in 1..={k}, got {keep_last}")));
    }
    let dims = images[0].dims();
    for (i, img) in images.iter().enumerate() {
        if img.dims() != dims {
            return Err(Error::Size(format!(
                "image {i} is {}x{}, expected {}x{}",
                img.height(),
                img.width(),
                dims.0,
                dims.1
            )));
        }
        if img.channels() != 1 {
            return Err(Error::Size(format!("image {i} has {} channels, expected 1", img.channels())));
        }
    }
    let (h, w) = dims;
    let n = h * w;
    let means: Vec<f64> = images.iter().map(|im| im.channel(0).mean()).collect();
    let x = DMatrix::from_fn(n, k, |p, i| images[i].channel(0).data()[p] - means[i]);
    let cov = x.tr_mul(&x) / n as f64;
    let cov = (&cov + cov.transpose()) * 0.5;
    let sd = symmetric_eig(&cov)?;
    let basis = sd.eigenvectors.columns(k - keep_last, keep_last).into_owned();
    let projected = &x * basis;
    let planes = (0..keep_last)
        .map(|j| Plane::new(h, w, projected.column(j).iter().copied().collect()))
        .collect::<Result<Vec<_>>>()?;
    Image::from_planes(planes)
}
