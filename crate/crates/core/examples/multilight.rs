//! Multi-illumination preprocessing. Under a Lambertian model every
//! normal pixel lives in a three-dimensional space across lights (albedo and
//! two slope terms). A glossy spot whose response to the light angle is
//! nonlinear leaves that space and shows up in the trailing components.

use anodet::detector::detect_multilight;
use anodet::eval::{synth_anomaly, Background, DefectSpec};
use anodet::features::{multilight_pca, ComponentSelection};
use anodet::image::{Image, Plane};
use anodet::DetectorConfig;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

const SIDE: usize = 160;

fn main() -> anodet::Result<()> {
    let none = DefectSpec::variance_patch(0, 0, 0, 1.0);
    let (albedo, _) = synth_anomaly(1, SIDE, SIDE, Background::WhiteNoise, &none)?;
    let (gx, _) = synth_anomaly(2, SIDE, SIDE, Background::LowPassNoise, &none)?;
    let (gy, _) = synth_anomaly(3, SIDE, SIDE, Background::LowPassNoise, &none)?;
    // the glossy spot and its exact mask
    let spot = DefectSpec::variance_patch(70, 60, 20, 1.0);
    let (_, truth) = synth_anomaly(4, SIDE, SIDE, Background::WhiteNoise, &spot)?;

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let sensor = Normal::new(0.0, 0.005).expect("valid sd");
    let lights: Vec<Image> = (0..6)
        .map(|k| {
            let theta = k as f64 * std::f64::consts::PI / 3.0;
            let gloss = theta.cos().max(0.0).powi(4);
            Image::gray(Plane::from_fn(SIDE, SIDE, |r, c| {
                let lambert = albedo.channel(0).get(r, c)
                    + theta.cos() * (gx.channel(0).get(r, c) - 0.5)
                    + theta.sin() * (gy.channel(0).get(r, c) - 0.5);
                let shine = if truth.get(r, c) { 0.2 * gloss } else { 0.0 };
                lambert + shine + sensor.sample(&mut rng)
            }))
        })
        .collect::<anodet::Result<_>>()?;

    let projected = multilight_pca(&lights, 3)?;
    println!("6 lights projected to {} channels", projected.channels());

    let mut cfg = DetectorConfig::default();
    cfg.multilight.enabled = true;
    cfg.multilight.keep_last = 3;
    cfg.patch_size = 9;
    cfg.m = ComponentSelection::Count(20);
    let res = detect_multilight(&lights, &cfg)?;
    println!(
        "{} pixels flagged, IoU with the spot {:.3}, max AS {:.2}",
        res.detections(),
        res.mask.iou(&truth),
        res.anomaly_score.max()
    );
    Ok(())
}
