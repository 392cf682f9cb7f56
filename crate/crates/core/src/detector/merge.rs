use super::{DetectionResult, Diagnostics, NfaMap};
use crate::error::{Error, Result};
use crate::image::{upsample_to, Plane};

/// Pixelwise minimum of log₁₀ NFA over the channels of one scale.
pub fn merge_channels(maps: &[NfaMap]) -> Result<NfaMap> {
    let first = maps
        .first()
        .ok_or_else(|| Error::Contract("merge_channels needs at least one map".into()))?;
    if maps.iter().any(|m| m.dims() != first.dims()) {
        return Err(Error::Contract("channel maps differ in size".into()));
    }
    let mut out = first.log10_nfa.clone();
    for m in &maps[1..] {
        for (o, &v) in out.data_mut().iter_mut().zip(m.log10_nfa.data()) {
            if v < *o {
                *o = v;
            }
        }
    }
    Ok(NfaMap {
        log10_nfa: out,
        tests: first.tests,
        scale_index: first.scale_index,
        channel_index: if maps.len() == 1 { first.channel_index } else { None },
    })
}

/// Upsamples every scale to `height`×`width`, keeps the pixelwise minimum
/// log₁₀ NFA and turns it into AS = −log₁₀ NFA, thresholded at
/// `threshold_as`.
pub fn merge_scales(per_scale: &[NfaMap], height: usize, width: usize, threshold_as: f64) -> Result<DetectionResult> {
    if per_scale.is_empty() {
        return Err(Error::Contract("merge_scales needs at least one map".into()));
    }
    let mut merged = Plane::filled(height, width, f64::INFINITY);
    for m in per_scale {
        let up = upsample_to(&m.log10_nfa, height, width)?;
        for (o, &v) in merged.data_mut().iter_mut().zip(up.data()) {
            if v < *o {
                *o = v;
            }
        }
    }
    let anomaly_score = merged.map(|v| -v);
    let mask = anomaly_score.threshold(threshold_as);
    Ok(DetectionResult {
        anomaly_score,
        mask,
        threshold_as,
        per_scale: per_scale.to_vec(),
        per_channel: Vec::new(),
        config_echo: None,
        diagnostics: Diagnostics {
            requested_scales: per_scale.len(),
            used_scales: per_scale.len(),
            tests_per_map: per_scale[0].tests,
            ..Default::default()
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn map(h: usize, w: usize, f: impl FnMut(usize, usize) -> f64) -> NfaMap {
        NfaMap {
            log10_nfa: Plane::from_fn(h, w, f),
            tests: (h * w) as f64,
            scale_index: 0,
            channel_index: Some(0),
        }
    }

    #[test]
    fn channel_merge() {
        let a = map(3, 3, |_, _| 5.0);
        let b = map(3, 3, |_, _| -3.0);
        let m = merge_channels(&[a.clone(), b]).unwrap();
        assert!(m.log10_nfa.data().iter().all(|&v| v == -3.0));
        assert_eq!(m.channel_index, None);
        assert_eq!(merge_channels(&[a.clone()]).unwrap(), a);
        assert!(merge_channels(&[a, map(2, 3, |_, _| 0.0)]).is_err());
    }

    #[test]
    fn single_scale_score() {
        let a = map(4, 4, |r, c| (r * 4 + c) as f64 - 8.0);
        let res = merge_scales(&[a.clone()], 4, 4, 0.0).unwrap();
        assert_eq!(res.anomaly_score, a.anomaly_score());
        assert_eq!(res.detections(), 9);
    }

    #[test]
    fn coarse_detection_survives() {
        let fine = map(8, 8, |_, _| 2.0);
        let mut coarse = map(4, 4, |_, _| 2.0);
        coarse.log10_nfa.set(1, 2, -4.0);
        coarse.scale_index = 1;
        let res = merge_scales(&[fine, coarse], 8, 8, 0.0).unwrap();
        assert_eq!(res.detections(), 4);
        assert_eq!(res.anomaly_score.get(2, 4), 4.0);
        assert_eq!(res.anomaly_score.get(3, 5), 4.0);
    }

    proptest! {
        #[test]
        fn merge_is_max_score_and_order_free(vals in prop::collection::vec(-20.0f64..20.0, 3 * 36)) {
            let maps: Vec<NfaMap> = (0..3).map(|k| map(6, 6, |r, c| vals[k * 36 + r * 6 + c])).collect();
            let fwd = merge_channels(&maps).unwrap();
            let rev: Vec<NfaMap> = maps.iter().rev().cloned().collect();
            prop_assert_eq!(&fwd.log10_nfa, &merge_channels(&rev).unwrap().log10_nfa);
            let twice = merge_channels(&[fwd.clone(), fwd.clone()]).unwrap();
            prop_assert_eq!(&twice.log10_nfa, &fwd.log10_nfa);
            let res = merge_scales(&maps, 6, 6, 0.0).unwrap();
            for i in 0..36 {
                let best = maps.iter().map(|m| -m.log10_nfa.data()[i]).fold(f64::NEG_INFINITY, f64::max);
                prop_assert_eq!(res.anomaly_score.data()[i], best);
            }
        }
    }
}
