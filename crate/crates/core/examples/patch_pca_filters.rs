//! Learns Patch-PCA filters from a striped texture and inspects them.

use anodet::eval::{synth_anomaly, Background, DefectSpec};
use anodet::features::{apply_filter_bank, learn_patch_pca_filters, ComponentSelection};

fn main() -> anodet::Result<()> {
    let bg = Background::Engraving {
        wavelength: 9.0,
        angle_deg: 30.0,
    };
    let (img, _) = synth_anomaly(1, 160, 160, bg, &DefectSpec::variance_patch(0, 0, 0, 1.0))?;

    let bank = learn_patch_pca_filters(img.channel(0), 17, ComponentSelection::VarianceFraction(0.9), 0)?;
    let ev = bank.eigenvalues.as_deref().unwrap_or(&[]);
    println!("{} components carry 90% of the patch variance", bank.len());
    println!("leading eigenvalues: {:.4?}", &ev[..ev.len().min(5)]);
    println!("orthonormality error: {:.2e}", bank.orthonormality_error());

    let fs = apply_filter_bank(&img, &bank)?;
    let var: Vec<f64> = fs.channel(0).iter().take(5).map(|m| m.variance()).collect();
    println!("response variances: {var:.4?}");
    Ok(())
}
