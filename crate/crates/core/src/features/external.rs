//! Ingestion of feature maps computed elsewhere (for example by a pretrained
//! network) and PCA reduction of a stack to a variance budget.
//!
//! Manifest layout, stored as `manifest.txt` in the feature directory:
//!
//! ```text
//! count=<m>
//! dims=<H>x<W>
//! map_000.pfm
//! ...
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;

use super::patch_pca::count_for_fraction;
use super::FeatureStack;
use crate::error::{Error, Result};
use crate::image::{load_pfm, Plane};
use crate::numerics::symmetric_eig;

pub const MANIFEST_NAME: &str = "manifest.txt";

/// Relative eigenvalue below which a component is dropped as zero-variance.
const ZERO_VARIANCE_REL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExternalManifest {
    pub count: usize,
    pub height: usize,
    pub width: usize,
    pub files: Vec<String>,
}

impl ExternalManifest {
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let count = lines
            .next()
            .and_then(|l| l.strip_prefix("count="))
            .and_then(|v| v.trim().parse::<usize>().ok())
            .ok_or_else(|| Error::Format("manifest line 1 must be count=<m>".into()))?;
        let dims = lines
            .next()
            .and_then(|l| l.strip_prefix("dims="))
            .ok_or_else(|| Error::Format("manifest line 2 must be dims=<H>x<W>".into()))?;
        let (h, w) = dims
            .split_once('x')
            .and_then(|(h, w)| Some((h.trim().parse::<usize>().ok()?, w.trim().parse::<usize>().ok()?)))
            .ok_or_else(|| Error::Format(format!("bad dims entry {dims:?}")))?;
        let files: Vec<String> = lines.map(str::to_string).collect();
        if files.len() != count {
            return Err(Error::Format(format!(
                "manifest declares {count} maps but lists {}",
                files.len()
            )));
        }
        if count == 0 || h == 0 || w == 0 {
            return Err(Error::Format("manifest declares an empty stack".into()));
        }
        Ok(ExternalManifest {
            count,
            height: h,
            width: w,
            files,
        })
    }

    pub fn render(&self) -> String {
        let mut out = format!("count={}\ndims={}x{}\n", self.count, self.height, self.width);
        for f in &self.files {
            out.push_str(f);
            out.push('\n');
        }
        out
    }
}

/// Reads `dir/manifest.txt` and the PFM maps it lists into a one-channel
/// stack with dof equal to the map count.
pub fn load_external_features(dir: impl AsRef<Path>) -> Result<FeatureStack> {
    let dir = dir.as_ref();
    let manifest_path = dir.join(MANIFEST_NAME);
    let text = match fs::read_to_string(&manifest_path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(Error::NotFound(manifest_path)),
        Err(e) => return Err(Error::io(manifest_path, e)),
    };
    let manifest = ExternalManifest::parse(&text)?;
    let mut maps = Vec::with_capacity(manifest.count);
    for name in &manifest.files {
        let path: PathBuf = dir.join(name);
        let img = load_pfm(&path)?;
        if img.channels() != 1 {
            return Err(Error::Format(format!("{name}: expected a single-channel PFM")));
        }
        if img.dims() != (manifest.height, manifest.width) {
            return Err(Error::Format(format!(
                "{name}: dims {}x{} differ from manifest {}x{}",
                img.height(),
                img.width(),
                manifest.height,
                manifest.width
            )));
        }
        maps.push(img.into_planes().remove(0));
    }
    FeatureStack::new(vec![maps])
}

/// Per channel, projects the per-pixel feature vectors onto their principal
/// axes and keeps the smallest leading set whose eigenvalue share reaches
/// `variance_fraction`. Zero-variance axes are always dropped. The output maps
/// are mutually decorrelated.
pub fn pca_reduce_features(fs: &FeatureStack, variance_fraction: f64) -> Result<FeatureStack> {
    if !(variance_fraction > 0.0 && variance_fraction <= 1.0) {
        return Err(Error::Parameter(format!(
            "variance fraction {variance_fraction} outside (0, 1]"
        )));
    }
    let (h, w) = fs.dims();
    let n = h * w;
    let m = fs.dof();
    let mut channels = Vec::with_capacity(fs.channel_count());
    for c in 0..fs.channel_count() {
        let maps = fs.channel(c);
        let means: Vec<f64> = maps.iter().map(Plane::mean).collect();
        let x = DMatrix::from_fn(n, m, |p, i| maps[i].data()[p] - means[i]);
        let cov = x.tr_mul(&x) / n as f64;
        let cov = (&cov + cov.transpose()) * 0.5;
        let sd = symmetric_eig(&cov)?;
        let max_ev = sd.eigenvalues[0].max(0.0);
        let nonzero = sd
            .eigenvalues
            .iter()
            .take_while(|&&l| l > ZERO_VARIANCE_REL * max_ev)
            .count();
        if nonzero == 0 {
            return Err(Error::no_texture());
        }
        let keep = count_for_fraction(&sd.eigenvalues, variance_fraction).min(nonzero);
        let basis = sd.eigenvectors.columns(0, keep).into_owned();
        let projected = &x * basis;
        let reduced = (0..keep)
            .map(|k| Plane::new(h, w, projected.column(k).iter().copied().collect()))
            .collect::<Result<Vec<_>>>()?;
        channels.push(reduced);
    }
    FeatureStack::new(channels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::save_float_map;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn write_stack(dir: &Path, count: usize, h: usize, w: usize, listed: usize) {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut files = Vec::new();
        for i in 0..count {
            let name = format!("f{i:03}.pfm");
            let p = Plane::from_fn(h, w, |_, _| StandardNormal.sample(&mut rng));
            save_float_map(&p, dir.join(&name)).unwrap();
            files.push(name);
        }
        files.truncate(listed);
        let manifest = ExternalManifest {
            count,
            height: h,
            width: w,
            files,
        };
        fs::write(dir.join(MANIFEST_NAME), manifest.render()).unwrap();
    }

    #[test]
    fn manifest_parsing() {
        let m = ExternalManifest::parse("count=2\ndims=4x5\na.pfm\nb.pfm\n").unwrap();
        assert_eq!((m.count, m.height, m.width), (2, 4, 5));
        assert!(matches!(ExternalManifest::parse("count=3\ndims=4x5\na.pfm\n"), Err(Error::Format(_))));
        assert!(matches!(ExternalManifest::parse("dims=4x5\n"), Err(Error::Format(_))));
        assert!(matches!(ExternalManifest::parse("count=1\ndims=4by5\na\n"), Err(Error::Format(_))));
    }

    #[test]
    fn loads_stack() {
        let dir = tempfile::tempdir().unwrap();
        write_stack(dir.path(), 256, 64, 64, 256);
        let fs = load_external_features(dir.path()).unwrap();
        assert_eq!(fs.dof(), 256);
        assert_eq!(fs.channel_count(), 1);
        assert_eq!(fs.dims(), (64, 64));
    }

    #[test]
    fn dimension_mismatch_is_format_error() {
        let dir = tempfile::tempdir().unwrap();
        write_stack(dir.path(), 2, 8, 8, 2);
        fs::write(dir.path().join(MANIFEST_NAME), "count=2\ndims=8x9\nf000.pfm\nf001.pfm\n").unwrap();
        assert!(matches!(load_external_features(dir.path()), Err(Error::Format(_))));
        fs::write(dir.path().join(MANIFEST_NAME), "count=3\ndims=8x8\nf000.pfm\nf001.pfm\n").unwrap();
        assert!(matches!(load_external_features(dir.path()), Err(Error::Format(_))));
    }

    #[test]
    fn full_fraction_preserves_dof() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let maps: Vec<Plane> = (0..6)
            .map(|_| Plane::from_fn(32, 32, |_, _| StandardNormal.sample(&mut rng)))
            .collect();
        let fs = FeatureStack::new(vec![maps.clone()]).unwrap();
        assert_eq!(pca_reduce_features(&fs, 1.0).unwrap().dof(), 6);

        // a duplicated map adds a zero-variance axis that is pruned
        let mut dup = maps;
        dup.push(dup[0].clone());
        let fs = FeatureStack::new(vec![dup]).unwrap();
        assert_eq!(pca_reduce_features(&fs, 1.0).unwrap().dof(), 6);
    }
}
