use crate::error::{DegenerateCode, Error, Result};
use crate::features::FeatureStack;

/// Components whose variance falls below this fraction of the largest one are
/// pruned.
pub const DEGENERATE_VARIANCE_REL: f64 = 1e-10;

/// Per-component normal statistics of one channel, estimated on the image
/// itself.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentStats {
    pub means: Vec<f64>,
    pub variances: Vec<f64>,
    /// Indices of the components kept for the distance.
    pub retained: Vec<usize>,
}

impl ComponentStats {
    pub fn dof(&self) -> usize {
        self.retained.len()
    }

    pub fn component_count(&self) -> usize {
        self.means.len()
    }
}

pub fn estimate_component_stats(fs: &FeatureStack, channel: usize) -> Result<ComponentStats> {
    if channel >= fs.channel_count() {
        return Err(Error::Contract(format!(
            "channel {channel} out of range for {} channels",
            fs.channel_count()
        )));
    }
    let maps = fs.channel(channel);
    let mut means = Vec::with_capacity(maps.len());
    let mut variances = Vec::with_capacity(maps.len());
    for m in maps {
        if !m.is_finite() {
            return Err(Error::Contract("feature map contains non-finite values".into()));
        }
        means.push(m.mean());
        variances.push(m.variance());
    }
    let max_var = variances.iter().copied().fold(0.0, f64::max);
    let eps = DEGENERATE_VARIANCE_REL * max_var;
    let retained: Vec<usize> = (0..variances.len())
        .filter(|&i| variances[i] > 0.0 && variances[i] >= eps)
        .collect();
    if retained.is_empty() {
        return Err(Error::Degenerate {
            code: DegenerateCode::AllComponentsDegenerate,
            context: String::new(),
        });
    }
    Ok(ComponentStats {
        means,
        variances,
        retained,
    })
}
