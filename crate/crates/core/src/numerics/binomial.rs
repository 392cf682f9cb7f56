//! Upper tail of the binomial law, kept in the log domain.

use super::gamma::ln_gamma;
use super::LogProb;
use crate::error::{Error, Result};

/// Above this trial count the tail goes through the incomplete beta identity.
const DIRECT_SUM_MAX_N: u64 = 10_000;

const MAX_ITER: usize = 100_000;
const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;

/// log₁₀ P(X ≥ k) for X ~ Binomial(n, p).
pub fn binomial_tail(n: u64, k: u64, p: f64) -> Result<LogProb> {
    if k > n {
        return Err(Error::Domain(format!("binomial_tail: k = {k} exceeds n = {n}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("binomial_tail: p must lie in [0, 1], got {p}")));
    }
    if k == 0 || p == 1.0 {
        return Ok(LogProb::ONE);
    }
    if p == 0.0 {
        return Ok(LogProb::ZERO);
    }
    let ln_tail = if n <= DIRECT_SUM_MAX_N {
        ln_tail_by_summation(n, k, p)
    } else {
        ln_beta_inc_upper_tail(n, k, p)
    };
    Ok(LogProb::from_ln(ln_tail.min(0.0)))
}

fn ln_choose(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    (1..=k)
        .map(|j| ((n - k + j) as f64 / j as f64).ln())
        .sum()
}

fn ln_pmf(n: u64, i: u64, ln_p: f64, ln_q: f64) -> f64 {
    ln_choose(n, i) + i as f64 * ln_p + (n - i) as f64 * ln_q
}

/// Sums pmf terms outward from the one closest to the mode, so that every
/// partial ratio stays ≤ 1 and nothing overflows.
fn ln_tail_by_summation(n: u64, k: u64, p: f64) -> f64 {
    let q = 1.0 - p;
    let ln_p = p.ln();
    let ln_q = (-p).ln_1p();
    let odds = p / q;
    let mode = (((n + 1) as f64) * p).floor() as u64;

    if k > mode {
        // Terms decrease from i = k upwards.
        let mut ratio = 1.0;
        let mut sum = 1.0;
        for i in k..n {
            ratio *= (n - i) as f64 / (i + 1) as f64 * odds;
            sum += ratio;
            if ratio < sum * EPS {
                break;
            }
        }
        ln_pmf(n, k, ln_p, ln_q) + sum.ln()
    } else {
        // Complement: terms of the lower tail decrease from i = k - 1 downwards.
        let top = k - 1;
        let mut ratio = 1.0;
        let mut sum = 1.0;
        for i in (1..=top).rev() {
            ratio *= i as f64 / (n - i + 1) as f64 / odds;
            sum += ratio;
            if ratio < sum * EPS {
                break;
            }
        }
        let lower = (ln_pmf(n, top, ln_p, ln_q) + sum.ln()).exp();
        (-lower.min(1.0)).ln_1p()
    }
}

/// ln P(X ≥ k) through P(X ≥ k) = I_p(k, n − k + 1), with the regularized
/// incomplete beta evaluated by continued fraction. Requires 1 ≤ k ≤ n and
/// 0 < p < 1.
pub fn ln_beta_inc_upper_tail(n: u64, k: u64, p: f64) -> f64 {
    let a = k as f64;
    let b = (n - k + 1) as f64;
    let ln_front = a * p.ln() + b * (-p).ln_1p() - ln_beta(a, b);
    if p < (a + 1.0) / (a + b + 2.0) {
        ln_front + beta_continued_fraction(a, b, p).ln() - a.ln()
    } else {
        let complement = (ln_front + beta_continued_fraction(b, a, 1.0 - p).ln() - b.ln()).exp();
        (-complement.min(1.0)).ln_1p()
    }
}

fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_cases() {
        assert_eq!(binomial_tail(9, 0, 0.01).unwrap().value(), 0.0);
        assert!((binomial_tail(9, 9, 0.01).unwrap().value() + 18.0).abs() < 1e-12);
        let v = binomial_tail(10, 3, 0.5).unwrap().value();
        assert!((v - 0.945_312_5f64.log10()).abs() < 1e-14);
        assert!(matches!(binomial_tail(3, 4, 0.5), Err(Error::Domain(_))));
        assert_eq!(binomial_tail(5, 2, 0.0).unwrap(), LogProb::ZERO);
        assert_eq!(binomial_tail(5, 2, 1.0).unwrap(), LogProb::ONE);
    }

    #[test]
    fn monotone_in_k() {
        for &p in &[0.001, 0.01, 0.3, 0.9] {
            let mut prev = 0.0;
            for k in 0..=300 {
                let v = binomial_tail(300, k, p).unwrap().value();
                assert!(v <= prev + 1e-13, "p={p} k={k}");
                prev = v;
            }
        }
    }

    #[test]
    fn beta_route_agrees_with_summation() {
        for &(n, p) in &[(50u64, 0.01), (500, 0.1), (5000, 0.5), (10_000, 0.01)] {
            for k in [1, n / 100 + 1, n / 10, n / 2, n - 1, n] {
                if k == 0 {
                    continue;
                }
                let direct = ln_tail_by_summation(n, k, p);
                let beta = ln_beta_inc_upper_tail(n, k, p);
                assert!(
                    (direct - beta).abs() <= 1e-9 * (1.0 + direct.abs()),
                    "n={n} k={k} p={p}: {direct} vs {beta}"
                );
            }
        }
    }

    #[test]
    fn large_n_extreme_tail() {
        let v = binomial_tail(1_000_000, 900_000, 0.5).unwrap().value();
        assert!(v.is_finite() && v < -1000.0);
    }
}
