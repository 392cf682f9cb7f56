use super::ComponentStats;
use crate::error::{Error, Result};
use crate::features::FeatureStack;
use crate::image::Plane;

/// Squared Mahalanobis distance D to the image's own normal statistics,
/// under a diagonal covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct MahalanobisMap {
    pub values: Plane,
    pub dof: usize,
}

/// D(i, j) = Σ over retained components of (aₖ(i, j) − μₖ)² / σₖ².
pub fn mahalanobis_map(fs: &FeatureStack, channel: usize, stats: &ComponentStats) -> Result<MahalanobisMap> {
    if channel >= fs.channel_count() {
        return Err(Error::Contract(format!("channel {channel} out of range")));
    }
    if stats.component_count() != fs.dof() {
        return Err(Error::Contract(format!(
            "stats describe {} components, stack has {}",
            stats.component_count(),
            fs.dof()
        )));
    }
    if stats.dof() == 0 {
        return Err(Error::Contract("no retained components".into()));
    }
    let maps = fs.channel(channel);
    let (h, w) = fs.dims();
    let mut acc = vec![0.0; h * w];
    for &k in &stats.retained {
        let mu = stats.means[k];
        let inv_var = 1.0 / stats.variances[k];
        for (d, &a) in acc.iter_mut().zip(maps[k].data()) {
            let z = a - mu;
            *d += z * z * inv_var;
        }
    }
    Ok(MahalanobisMap {
        values: Plane::new(h, w, acc)?,
        dof: stats.dof(),
    })
}
