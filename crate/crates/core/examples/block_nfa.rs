//! Pixel versus block NFA on a distance map with a dense cluster of mild
//! outliers.

use anodet::detector::{block_nfa, pixel_nfa, BlockParams, MahalanobisMap};
use anodet::image::Plane;
use anodet::numerics::chi2_isf;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution};

fn main() -> anodet::Result<()> {
    let dof = 10;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let chi = ChiSquared::new(dof as f64).expect("valid dof");
    // every pixel of a 40x40 square slightly above the 1% quantile
    let tau = chi2_isf(0.01, dof)?;
    let values = Plane::from_fn(200, 200, |r, c| {
        if (80..120).contains(&r) && (80..120).contains(&c) {
            tau * 1.05
        } else {
            chi.sample(&mut rng)
        }
    });
    let dm = MahalanobisMap { values, dof };

    let pix = pixel_nfa(&dm)?;
    println!("pixel NFA: best AS {:.2}", pix.anomaly_score().max());

    let params = BlockParams {
        size: 31,
        stride: 5,
        p_value: 0.01,
        subsampling: 1,
    };
    let blk = block_nfa(&dm, &params)?;
    let as_map = blk.anomaly_score();
    println!(
        "block NFA: best AS {:.2}, {} pixels with AS >= 0",
        as_map.max(),
        as_map.threshold(0.0).count()
    );
    Ok(())
}
