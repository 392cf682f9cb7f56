//! Scoring feature maps computed elsewhere (for example by a network):
//! write them as PFM files plus a manifest, load them back and detect.

use anodet::detector::detect_feature_stack;
use anodet::features::{load_external_features, ExternalManifest, MANIFEST_NAME};
use anodet::image::{save_float_map, Plane};
use anodet::{DetectorConfig, Variant};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn main() -> anodet::Result<()> {
    let dir = std::env::temp_dir().join("anodet_external_features");
    std::fs::create_dir_all(&dir).map_err(|e| anodet::Error::Io {
        path: dir.clone(),
        source: e,
    })?;

    let (h, w, count) = (64, 64, 16);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut files = Vec::new();
    for i in 0..count {
        let mut map = Plane::from_fn(h, w, |_, _| StandardNormal.sample(&mut rng));
        if i < 4 {
            // a shared offset in a few maps marks the anomaly
            for r in 20..30 {
                for c in 40..50 {
                    map.set(r, c, map.get(r, c) + 4.0);
                }
            }
        }
        let name = format!("feat_{i:02}.pfm");
        save_float_map(&map, dir.join(&name))?;
        files.push(name);
    }
    let manifest = ExternalManifest {
        count,
        height: h,
        width: w,
        files,
    };
    std::fs::write(dir.join(MANIFEST_NAME), manifest.render()).map_err(|e| anodet::Error::Io {
        path: dir.join(MANIFEST_NAME),
        source: e,
    })?;

    let fs = load_external_features(&dir)?;
    let cfg = DetectorConfig::with_variant(Variant::External);
    let res = detect_feature_stack(&fs, &cfg)?;
    println!(
        "{count} maps reduced to {} components; {} pixels flagged, max AS {:.2}",
        res.diagnostics.dof[0][0],
        res.detections(),
        res.anomaly_score.max()
    );
    Ok(())
}
