use rayon::prelude::*;

use super::nfa::block_tau;
use super::{
    block_nfa, estimate_component_stats, mahalanobis_map, merge_channels, merge_scales, pixel_nfa,
    BlockParams, DetectionResult, NfaMap,
};
use crate::config::{DetectorConfig, NfaKind, Variant};
use crate::error::{Error, Result};
use crate::features::{
    apply_filter_bank, learn_patch_pca_filters, make_gabor_bank, multilight_pca, pca_reduce_features,
    FeatureStack, FilterBank,
};
use crate::image::{build_pyramid, min_side_for_kernel, Image};

/// Minimum patch count per s² needed to learn Patch-PCA filters on a level.
const MIN_PATCHES_PER_DIM: f64 = 10.0;

/// Smallest side a pyramid level may have under `cfg`: it must host the
/// largest kernel (2s + 1), leave enough patches to learn Patch-PCA filters,
/// and fit one NFA block.
pub fn min_level_side(cfg: &DetectorConfig) -> usize {
    let mut side = match cfg.variant {
        Variant::PatchPca => {
            let s = cfg.patch_size;
            let learn = s - 1 + (MIN_PATCHES_PER_DIM.sqrt() * s as f64).ceil() as usize;
            min_side_for_kernel(s).max(learn)
        }
        Variant::Gabor => min_side_for_kernel(cfg.subsampling_factor()),
        Variant::External => 1,
    };
    if cfg.nfa == NfaKind::Block {
        side = side.max(cfg.block.size);
    }
    side
}

pub(crate) fn level_seed(seed: u64, scale: usize, channel: usize) -> u64 {
    seed ^ ((scale as u64) << 32) ^ channel as u64
}

struct ChannelScore {
    nfa: NfaMap,
    dof: usize,
    tau: Option<f64>,
}

fn score_channel(fs: &FeatureStack, channel: usize, cfg: &DetectorConfig) -> Result<ChannelScore> {
    let stats = estimate_component_stats(fs, channel)?;
    let dm = mahalanobis_map(fs, channel, &stats)?;
    let (nfa, tau) = match cfg.nfa {
        NfaKind::Pixel => (pixel_nfa(&dm)?, None),
        NfaKind::Block => {
            let params = BlockParams {
                size: cfg.block.size,
                stride: cfg.block.stride,
                p_value: cfg.block.p_value,
                subsampling: cfg.subsampling_factor(),
            };
            (block_nfa(&dm, &params)?, Some(block_tau(params.p_value, dm.dof)?))
        }
    };
    Ok(ChannelScore { nfa, dof: dm.dof, tau })
}

fn channel_features(
    img: &Image,
    channel: usize,
    scale: usize,
    cfg: &DetectorConfig,
    gabor: Option<&FilterBank>,
) -> Result<FeatureStack> {
    let single = Image::gray(img.channel(channel).clone())?;
    match cfg.variant {
        Variant::PatchPca => {
            let bank = learn_patch_pca_filters(
                img.channel(channel),
                cfg.patch_size,
                cfg.m,
                level_seed(cfg.seed, scale, channel),
            )?;
            apply_filter_bank(&single, &bank)
        }
        Variant::Gabor => {
            let fs = apply_filter_bank(&single, gabor.expect("gabor bank built"))?;
            if cfg.gabor.decorrelate {
                pca_reduce_features(&fs, 1.0)
            } else {
                Ok(fs)
            }
        }
        Variant::External => unreachable!("external features do not come from an image"),
    }
}

fn assemble(
    per_channel: Vec<Vec<ChannelScore>>,
    height: usize,
    width: usize,
    cfg: &DetectorConfig,
    requested_scales: usize,
) -> Result<DetectionResult> {
    let per_scale = per_channel
        .iter()
        .map(|scores| {
            let maps: Vec<NfaMap> = scores.iter().map(|s| s.nfa.clone()).collect();
            merge_channels(&maps)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut result = merge_scales(&per_scale, height, width, cfg.threshold_as)?;
    let channels = per_channel[0].len();
    let d = &mut result.diagnostics;
    d.requested_scales = requested_scales;
    d.used_scales = per_scale.len();
    d.dof = per_channel.iter().map(|s| s.iter().map(|c| c.dof).collect()).collect();
    d.tests_with_multiplicity = d.tests_per_map * (channels * per_scale.len()) as f64;
    d.block_tau = per_channel
        .iter()
        .filter_map(|s| s.first().and_then(|c| c.tau))
        .collect();
    result.per_channel = per_channel
        .into_iter()
        .map(|s| s.into_iter().map(|c| c.nfa).collect())
        .collect();
    result.config_echo = Some(cfg.clone());
    Ok(result)
}

/// Full multi-scale pipeline on an image: pyramid, per-scale per-channel
/// features, statistics, distances and NFA, channel merge, scale merge.
///
/// Degenerate-input errors carry the scale and channel they arose at.
pub fn detect(img: &Image, cfg: &DetectorConfig) -> Result<DetectionResult> {
    cfg.validate()?;
    if cfg.variant == Variant::External {
        return Err(Error::Parameter(
            "external variant scores a feature stack; use detect_feature_stack".into(),
        ));
    }
    let gabor = match cfg.variant {
        Variant::Gabor => Some(make_gabor_bank(&cfg.gabor.geometry())?),
        _ => None,
    };
    let pyramid = build_pyramid(img, cfg.scales, min_level_side(cfg))?;
    let jobs: Vec<(usize, usize)> = (0..pyramid.scale_count())
        .flat_map(|s| (0..img.channels()).map(move |c| (s, c)))
        .collect();
    let scores = jobs
        .par_iter()
        .map(|&(scale, channel)| {
            let level = &pyramid.levels[scale];
            let fs = channel_features(level, channel, scale, cfg, gabor.as_ref())
                .map_err(|e| e.with_provenance(scale, channel))?;
            let mut sc = score_channel(&fs, 0, cfg).map_err(|e| e.with_provenance(scale, channel))?;
            sc.nfa.scale_index = scale;
            sc.nfa.channel_index = Some(channel);
            Ok(sc)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut per_channel: Vec<Vec<ChannelScore>> = (0..pyramid.scale_count()).map(|_| Vec::new()).collect();
    for sc in scores {
        per_channel[sc.nfa.scale_index].push(sc);
    }
    let (h, w) = img.dims();
    assemble(per_channel, h, w, cfg, pyramid.requested_scales)
}

/// Single-scale scoring of a ready-made feature stack. With the external
/// variant the stack is first PCA-reduced to the configured variance share.
pub fn detect_feature_stack(fs: &FeatureStack, cfg: &DetectorConfig) -> Result<DetectionResult> {
    cfg.validate()?;
    let reduced;
    let fs = if cfg.variant == Variant::External {
        reduced = pca_reduce_features(fs, cfg.external.variance_fraction)?;
        &reduced
    } else {
        fs
    };
    let scores = (0..fs.channel_count())
        .into_par_iter()
        .map(|c| {
            let mut sc = score_channel(fs, c, cfg).map_err(|e| e.with_provenance(0, c))?;
            sc.nfa.channel_index = Some(c);
            Ok(sc)
        })
        .collect::<Result<Vec<_>>>()?;
    let (h, w) = fs.dims();
    assemble(vec![scores], h, w, cfg, 1)
}

/// Multi-illumination preprocessing followed by [`detect`] on the last
/// `cfg.multilight.keep_last` principal components.
pub fn detect_multilight(images: &[Image], cfg: &DetectorConfig) -> Result<DetectionResult> {
    let projected = multilight_pca(images, cfg.multilight.keep_last)?;
    detect(&projected, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::ComponentSelection;
    use crate::image::Plane;
    use crate::DegenerateCode;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn noise(h: usize, w: usize, seed: u64) -> Plane {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Plane::from_fn(h, w, |_, _| StandardNormal.sample(&mut rng))
    }

    fn small_cfg() -> DetectorConfig {
        DetectorConfig {
            patch_size: 5,
            m: ComponentSelection::Count(8),
            scales: 3,
            ..Default::default()
        }
    }

    #[test]
    fn min_side_rules() {
        let cfg = DetectorConfig::default();
        assert_eq!(min_level_side(&cfg), 70);
        let gabor = DetectorConfig::with_variant(Variant::Gabor);
        assert_eq!(min_level_side(&gabor), 63);
        let block = DetectorConfig {
            nfa: NfaKind::Block,
            patch_size: 5,
            ..Default::default()
        };
        assert_eq!(min_level_side(&block), 51);
    }

    #[test]
    fn constant_image_reports_provenance() {
        let img = Image::gray(Plane::filled(96, 96, 0.5)).unwrap();
        let err = detect(&img, &small_cfg()).unwrap_err();
        match err {
            Error::Degenerate { code, context } => {
                assert_eq!(code, DegenerateCode::NoTexture);
                assert!(context.contains("scale 0"), "{context}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn runs_and_is_deterministic() {
        let img = Image::from_planes(vec![noise(96, 80, 1), noise(96, 80, 2)]).unwrap();
        let cfg = small_cfg();
        let a = detect(&img, &cfg).unwrap();
        let b = detect(&img, &cfg).unwrap();
        assert_eq!(a.anomaly_score, b.anomaly_score);
        assert_eq!(a.dims(), (96, 80));
        assert_eq!(a.diagnostics.used_scales, 3);
        assert_eq!(a.per_channel[0].len(), 2);
        assert_eq!(a.diagnostics.dof[0], vec![8, 8]);
        // the final score dominates every scale/channel score
        for (s, maps) in a.per_channel.iter().enumerate() {
            for m in maps {
                let up = crate::image::upsample_to(&m.log10_nfa, 96, 80).unwrap();
                for (fin, v) in a.anomaly_score.data().iter().zip(up.data()) {
                    assert!(*fin >= -v, "scale {s}");
                }
            }
        }
    }

    #[test]
    fn external_variant_requires_stack() {
        let img = Image::gray(noise(64, 64, 3)).unwrap();
        let cfg = DetectorConfig::with_variant(Variant::External);
        assert!(matches!(detect(&img, &cfg), Err(Error::Parameter(_))));

        let maps: Vec<Plane> = (0..12).map(|i| noise(40, 40, 10 + i)).collect();
        let fs = FeatureStack::new(vec![maps]).unwrap();
        let res = detect_feature_stack(&fs, &cfg).unwrap();
        let dof = res.diagnostics.dof[0][0];
        assert!(dof >= 1 && dof <= 12);
    }
}
