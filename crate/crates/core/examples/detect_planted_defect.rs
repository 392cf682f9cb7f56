//! End-to-end detection of a planted defect, writing the usual outputs.
//!
//! Usage: `cargo run --release --example detect_planted_defect [OUT_DIR]`

use std::path::PathBuf;

use anodet::detector::detect;
use anodet::eval::{synth_anomaly, Background, DefectSpec};
use anodet::image::{save_float_map, save_heatmap, save_mask};
use anodet::DetectorConfig;

fn main() -> anodet::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("anodet_planted"));
    std::fs::create_dir_all(&out).map_err(|e| anodet::Error::Io {
        path: out.clone(),
        source: e,
    })?;

    // 32x32 square of doubled variance in white noise
    let defect = DefectSpec::variance_patch(100, 140, 32, 2.0);
    let (img, truth) = synth_anomaly(4, 256, 256, Background::WhiteNoise, &defect)?;

    let cfg = DetectorConfig::default();
    let res = detect(&img, &cfg)?;
    let d = &res.diagnostics;
    println!("scales used {} of {}", d.used_scales, d.requested_scales);
    println!("max AS {:.2}", res.anomaly_score.max());
    println!(
        "{} pixels flagged, IoU with the plant {:.3}",
        res.detections(),
        res.mask.iou(&truth)
    );

    save_float_map(&res.anomaly_score, out.join("as.pfm"))?;
    save_heatmap(&res.anomaly_score, out.join("heatmap.png"))?;
    save_mask(&res.mask, out.join("mask.png"))?;
    println!("outputs in {}", out.display());
    Ok(())
}
