//! Mean number of pixels with NFA <= δ on pure noise, with the background
//! model exact (injected Gaussian features) and through the full pipeline.

use anodet::eval::{calibrate_noise_with, CalibrationOptions, NoiseSource};
use anodet::{DetectorConfig, NfaKind};

fn main() -> anodet::Result<()> {
    let cfg = DetectorConfig::default();

    let exact = CalibrationOptions {
        source: NoiseSource::InjectedFeatures { dof: 45 },
        ..CalibrationOptions::new(200, 1)
    };
    print!("{}", calibrate_noise_with(&cfg, &exact)?.to_csv());

    let pipeline = CalibrationOptions {
        nfa_kinds: vec![NfaKind::Pixel],
        ..CalibrationOptions::new(50, 1)
    };
    print!("\n{}", calibrate_noise_with(&cfg, &pipeline)?.to_csv());
    Ok(())
}
