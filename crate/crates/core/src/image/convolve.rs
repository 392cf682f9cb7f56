use super::Plane;
use crate::error::{Error, Result};

/// Mirror an out-of-range index back into `0..n` without repeating the edge
/// sample (`d c b | a b c d | c b a`).
#[inline]
pub fn reflect_index(i: isize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let n = n as isize;
    let period = 2 * (n - 1);
    let mut i = i.rem_euclid(period);
    if i >= n {
        i = period - i;
    }
    i as usize
}

pub(crate) fn reflect_pad(plane: &Plane, pad: usize) -> Plane {
    let (h, w) = plane.dims();
    let (ph, pw) = (h + 2 * pad, w + 2 * pad);
    let mut data = Vec::with_capacity(ph * pw);
    for r in 0..ph {
        let src = plane.row(reflect_index(r as isize - pad as isize, h));
        for c in 0..pw {
            data.push(src[reflect_index(c as isize - pad as isize, w)]);
        }
    }
    Plane::new(ph, pw, data).expect("padded dims are consistent")
}

/// Same-size 2-D correlation (the kernel is not flipped) with reflect padding.
///
/// Accumulation order is fixed: kernel row, then kernel column, then output
/// column, so results do not depend on how callers schedule the work.
pub fn convolve2d(channel: &Plane, kernel: &Plane) -> Result<Plane> {
    let (kh, kw) = kernel.dims();
    if kh != kw {
        return Err(Error::Parameter(format!("kernel must be square, got {kh}x{kw}")));
    }
    if kh % 2 == 0 {
        return Err(Error::Parameter(format!("kernel size must be odd, got {kh}")));
    }
    let (h, w) = channel.dims();
    if kh > h.min(w) {
        return Err(Error::Size(format!(
            "kernel {kh}x{kh} larger than image {h}x{w}"
        )));
    }
    let pad = kh / 2;
    let padded = reflect_pad(channel, pad);
    let mut out = vec![0.0; h * w];
    for (r, out_row) in out.chunks_exact_mut(w).enumerate() {
        for a in 0..kh {
            let src = padded.row(r + a);
            for (b, &k) in kernel.row(a).iter().enumerate() {
                if k == 0.0 {
                    continue;
                }
                for (o, &x) in out_row.iter_mut().zip(&src[b..b + w]) {
                    *o += k * x;
                }
            }
        }
    }
    Plane::new(h, w, out)
}
