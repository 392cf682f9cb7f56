//! Reference implementations used as oracles. They share no code with the
//! library: χ² probabilities come from adaptive Gauss–Kronrod quadrature of
//! the density, binomial tails from direct summation.

#![allow(dead_code)]

use std::path::Path;

use anodet::image::{save_gray, save_mask, Image, Mask};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// (Kronrod estimate, |Kronrod − Gauss|) on [a, b].
fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive bisection until each piece meets `tol` relative to the running
/// total.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let mut stack = vec![(a, b, 0usize)];
    let mut pieces = Vec::new();
    while let Some((lo, hi, depth)) = stack.pop() {
        let (v, err) = gk15(&f, lo, hi);
        if err <= tol * v.abs().max(1e-300) || depth > 40 {
            pieces.push(v);
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid, depth + 1));
            stack.push((mid, hi, depth + 1));
        }
    }
    // sum small pieces first
    pieces.sort_by(|x, y| x.abs().total_cmp(&y.abs()));
    pieces.iter().sum()
}

/// ln Γ(m/2) for integer m, from exact factorial products.
pub fn ln_gamma_half_int(m: usize) -> f64 {
    if m % 2 == 0 {
        // Γ(k) = (k-1)!
        (1..m / 2).map(|i| (i as f64).ln()).sum()
    } else {
        // Γ(j + 1/2) = √π Π_{i=1..j} (i − 1/2)
        let j = m / 2;
        0.5 * std::f64::consts::PI.ln() + (1..=j).map(|i| (i as f64 - 0.5).ln()).sum::<f64>()
    }
}

fn chi2_ln_density(x: f64, m: usize) -> f64 {
    let k = m as f64 / 2.0;
    (k - 1.0) * x.ln() - x / 2.0 - k * std::f64::consts::LN_2 - ln_gamma_half_int(m)
}

/// P(X ≤ d) for X ~ χ²(m), integrating over u = √x so the integrand is
/// smooth at the origin for every m.
pub fn chi2_cdf_oracle(d: f64, m: usize) -> f64 {
    if d <= 0.0 {
        return 0.0;
    }
    let k = m as f64 / 2.0;
    let c = std::f64::consts::LN_2 - k * std::f64::consts::LN_2 - ln_gamma_half_int(m);
    let g = |u: f64| {
        if u == 0.0 {
            return if m == 1 { c.exp() } else { 0.0 };
        }
        (c + (m as f64 - 1.0) * u.ln() - u * u / 2.0).exp()
    };
    integrate(g, 0.0, d.sqrt(), 1e-14)
}

/// ln P(X > d) for X ~ χ²(m). Above the mode the tail is integrated with the
/// density rescaled by its value at d, which keeps deep tails representable.
pub fn chi2_ln_sf_oracle(d: f64, m: usize) -> f64 {
    let mode = (m as f64 - 2.0).max(0.0);
    if d <= mode.max(1.0) {
        return (1.0 - chi2_cdf_oracle(d, m)).ln();
    }
    let base = chi2_ln_density(d, m);
    let g = |x: f64| (chi2_ln_density(x, m) - base).exp();
    let mut total = 0.0;
    let mut lo = d;
    let mut width = 8.0;
    loop {
        let piece = integrate(g, lo, lo + width, 1e-14);
        total += piece;
        if piece < 1e-18 * total {
            break;
        }
        lo += width;
        width *= 2.0;
    }
    base + total.ln()
}

/// log₁₀ P(X ≥ k) for X ~ Binomial(n, p) by summing the pmf terms, each
/// built from a running product of ratios.
pub fn binomial_tail_oracle(n: u64, k: u64, p: f64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    if p == 1.0 {
        return 0.0;
    }
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    let mut ln_c = 0.0;
    let mut terms = Vec::with_capacity((n + 1) as usize);
    for i in 0..=n {
        if i > 0 {
            ln_c += ((n - i + 1) as f64).ln() - (i as f64).ln();
        }
        if i >= k {
            terms.push(ln_c + i as f64 * lp + (n - i) as f64 * lq);
        }
    }
    let top = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = terms.iter().map(|t| (t - top).exp()).sum();
    (top + sum.ln()) / std::f64::consts::LN_10
}

/// Kolmogorov–Smirnov distance between a sample and the χ²(m) law, with
/// the CDF accumulated by quadrature between consecutive sorted values.
pub fn ks_distance_chi2(values: &[f64], m: usize) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let ln_f = |x: f64| if x <= 0.0 { f64::NEG_INFINITY } else { chi2_ln_density(x, m) };
    let mut cdf = chi2_cdf_oracle(v[0], m);
    let mut worst: f64 = 0.0;
    for i in 0..v.len() {
        if i > 0 && v[i] > v[i - 1] {
            cdf += integrate(|x| ln_f(x).exp(), v[i - 1], v[i], 1e-10);
        }
        let lo = i as f64 / n;
        let hi = (i + 1) as f64 / n;
        worst = worst.max((cdf - lo).abs()).max((hi - cdf).abs());
    }
    worst
}

/// P(X ≥ k) for X ~ Poisson(λ), summing pmf terms from a log-space
/// recurrence: the tail itself above the mean, the complement below it.
pub fn poisson_upper_tail(lambda: f64, k: u64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let ln_lambda = lambda.ln();
    let mut ln_pmf = -lambda;
    let mut below = 0.0;
    for i in 0..k {
        below += ln_pmf.exp();
        ln_pmf += ln_lambda - ((i + 1) as f64).ln();
    }
    if (k as f64) <= lambda {
        return 1.0 - below;
    }
    let mut tail = 0.0;
    let mut i = k;
    loop {
        let t = ln_pmf.exp();
        tail += t;
        if t < 1e-18 * tail || i > k + 1_000_000 {
            return tail;
        }
        i += 1;
        ln_pmf += ln_lambda - (i as f64).ln();
    }
}

pub fn write_png(img: &Image, path: &Path) {
    save_gray(img.channel(0), path).unwrap();
}

pub fn write_mask(mask: &Mask, path: &Path) {
    save_mask(mask, path).unwrap();
}
