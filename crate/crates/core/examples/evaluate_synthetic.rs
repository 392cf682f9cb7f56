//! Pixel AUROC, class gap and the AS = 0 operating point on a small set of
//! synthetic defects.

use anodet::eval::{evaluate_images, synth_anomaly, Background, DefectKind, DefectShape, DefectSpec};
use anodet::DetectorConfig;

fn main() -> anodet::Result<()> {
    let mut set = Vec::new();
    for seed in 0..6u64 {
        let defect = DefectSpec {
            shape: if seed % 2 == 0 { DefectShape::Rectangle } else { DefectShape::Ellipse },
            kind: DefectKind::VarianceScale(3.0),
            row: 40 + 10 * seed as usize,
            col: 60,
            height: 36,
            width: 40,
        };
        let (img, mask) = synth_anomaly(seed, 192, 192, Background::WhiteNoise, &defect)?;
        set.push((format!("synthetic/{seed:03}"), img, mask));
    }

    let cfg = DetectorConfig::default();
    let report = evaluate_images(set.iter().map(|(n, i, m)| (n.clone(), i, m)), &cfg)?;
    print!("{}", report.summary());
    println!("\n{}", report.to_csv());
    Ok(())
}
