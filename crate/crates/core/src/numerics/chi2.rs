use super::gamma::ln_gamma_q;
use super::LogProb;
use crate::error::{Error, Result};

const ISF_BRACKET_WIDTH: f64 = 1e-12;

/// log₁₀ P(X > d) for X ~ χ²(dof), via Q(dof/2, d/2).
pub fn chi2_sf(d: f64, dof: usize) -> Result<LogProb> {
    if dof == 0 {
        return Err(Error::Domain("chi2_sf: degrees of freedom must be >= 1".into()));
    }
    if !(d >= 0.0) {
        return Err(Error::Domain(format!("chi2_sf: distance must be >= 0, got {d}")));
    }
    Ok(LogProb::from_ln(ln_gamma_q(0.5 * dof as f64, 0.5 * d)))
}

/// Inverse survival function: the `d` with P(X > d) = p for X ~ χ²(dof).
///
/// Bisection on [`chi2_sf`] in the log domain down to a bracket of width 1e-12.
pub fn chi2_isf(p: f64, dof: usize) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("chi2_isf: p must lie in (0, 1), got {p}")));
    }
    if dof == 0 {
        return Err(Error::Domain("chi2_isf: degrees of freedom must be >= 1".into()));
    }
    let target = p.log10();
    let sf = |d: f64| chi2_sf(d, dof).map(LogProb::value);

    let mut lo = 0.0;
    let mut hi = dof as f64;
    while sf(hi)? > target {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > ISF_BRACKET_WIDTH {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sf(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn survival_at_zero_is_one() {
        assert_eq!(chi2_sf(0.0, 45).unwrap().value(), 0.0);
        assert_eq!(chi2_sf(0.0, 1).unwrap().value(), 0.0);
    }

    #[test]
    fn two_dof_closed_form() {
        // P(X > d) = exp(-d/2); d = 2 ln 10 gives 0.1
        let d = 2.0 * 10f64.ln();
        assert!((chi2_sf(d, 2).unwrap().value() + 1.0).abs() < 1e-13);
        assert!((chi2_sf(4.605170186, 2).unwrap().value() + 1.0).abs() < 1e-9);
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(chi2_sf(-1.0, 3), Err(Error::Domain(_))));
        assert!(matches!(chi2_sf(1.0, 0), Err(Error::Domain(_))));
        assert!(matches!(chi2_sf(f64::NAN, 3), Err(Error::Domain(_))));
        assert!(matches!(chi2_isf(0.0, 3), Err(Error::Domain(_))));
        assert!(matches!(chi2_isf(1.0, 3), Err(Error::Domain(_))));
    }

    #[test]
    fn isf_round_trip() {
        for &m in &[1usize, 2, 10, 45, 72, 289] {
            for &p in &[0.5, 0.1, 0.01, 1e-6, 1e-30, 1e-200] {
                let d = chi2_isf(p, m).unwrap();
                let back = chi2_sf(d, m).unwrap().value();
                assert!((back - p.log10()).abs() <= 1e-10, "m={m} p={p} back={back}");
            }
        }
        let d = chi2_isf(0.01, 45).unwrap();
        assert!((chi2_sf(d, 45).unwrap().value() + 2.0).abs() <= 1e-10);
    }

    #[test]
    fn median_one_dof() {
        // Median of χ²(1), checked independently by quadrature in the test suite.
        assert!((chi2_isf(0.5, 1).unwrap() - 0.454_936_423_119_572_4).abs() < 1e-9);
    }

    #[test]
    fn deep_tail_does_not_underflow() {
        let lp = chi2_sf(5000.0, 45).unwrap().value();
        assert!(lp.is_finite() && lp < -300.0);
    }

    #[test]
    fn monotone_on_grid() {
        for &m in &[1usize, 2, 10, 45, 72] {
            let mut prev = f64::INFINITY;
            for i in 0..1000 {
                let d = i as f64 * 20.0 * m as f64 / 999.0;
                let v = chi2_sf(d, m).unwrap().value();
                assert!(v <= prev, "m={m} d={d}");
                prev = v;
            }
        }
    }
}
