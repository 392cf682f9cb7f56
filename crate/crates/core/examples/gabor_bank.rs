//! The default Gabor bank and its montage.

use anodet::features::{kernel_montage, make_gabor_bank, GaborGeometry};
use anodet::image::save_gray;

fn main() -> anodet::Result<()> {
    let geometry = GaborGeometry::default();
    let bank = make_gabor_bank(&geometry)?;
    println!(
        "{} kernels: sizes {:?}, {} orientations, {} wavelengths per size",
        bank.len(),
        geometry.sizes,
        geometry.orientations,
        geometry.wavelengths
    );
    let k = &bank.kernels[0];
    let norm: f64 = k.data().iter().map(|v| v * v).sum::<f64>().sqrt();
    println!("first kernel: {}x{}, mean {:.1e}, norm {norm:.6}", k.height(), k.width(), k.mean());

    let out = std::env::temp_dir().join("anodet_gabor_montage.png");
    save_gray(&kernel_montage(&bank.kernels), &out)?;
    println!("montage written to {}", out.display());
    Ok(())
}
