//! Reflect-padded correlation and the Gaussian pyramid used for scales.

use anodet::image::{build_pyramid, convolve2d, upsample_to, Image, Plane};

fn main() -> anodet::Result<()> {
    let ramp = Plane::from_fn(200, 300, |r, c| ((r as f64) * 0.05).sin() + (c as f64) * 0.01);
    let img = Image::gray(ramp)?;

    // 3x3 box filter
    let box3 = Plane::filled(3, 3, 1.0 / 9.0);
    let smooth = convolve2d(img.channel(0), &box3)?;
    println!("box filter keeps the size: {:?} -> {:?}", img.dims(), smooth.dims());

    let pyr = build_pyramid(&img, 4, 35)?;
    for (i, level) in pyr.levels.iter().enumerate() {
        println!("level {i}: {:?}", level.dims());
    }
    if pyr.was_clamped() {
        println!("asked for {} scales, got {}", pyr.requested_scales, pyr.scale_count());
    }

    let coarse = pyr.levels.last().expect("level 0 always exists").channel(0);
    let back = upsample_to(coarse, 200, 300)?;
    println!("nearest-neighbour upsampling back to {:?}", back.dims());
    Ok(())
}
