use super::{MahalanobisMap, NfaMap};
use crate::error::{Error, Result};
use crate::image::Plane;
use crate::numerics::{binomial_tail, chi2_isf, chi2_sf};

/// Pixel test: log₁₀ NFA = log₁₀(H·W) + log₁₀ P(χ²(dof) > D).
pub fn pixel_nfa(dm: &MahalanobisMap) -> Result<NfaMap> {
    if !dm.values.is_finite() {
        return Err(Error::Contract("distance map contains non-finite values".into()));
    }
    let (h, w) = dm.values.dims();
    let tests = (h * w) as f64;
    let log_tests = tests.log10();
    let mut out = Vec::with_capacity(h * w);
    for &d in dm.values.data() {
        out.push(log_tests + chi2_sf(d.max(0.0), dm.dof)?.value());
    }
    Ok(NfaMap {
        log10_nfa: Plane::new(h, w, out)?,
        tests,
        scale_index: 0,
        channel_index: Some(0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockParams {
    /// Block side w.
    pub size: usize,
    pub stride: usize,
    /// Candidate p-value.
    pub p_value: f64,
    /// Subsampling factor g (grid spacing of independent samples).
    pub subsampling: usize,
}

impl BlockParams {
    pub fn trials(&self) -> u64 {
        ((self.size * self.size) / (self.subsampling * self.subsampling)) as u64
    }
}

/// Top-left offsets of blocks of side `w` laid every `stride` samples, the
/// last one pushed back against the border.
fn block_starts(len: usize, w: usize, stride: usize) -> Vec<usize> {
    let mut starts: Vec<usize> = (0..).step_by(stride).take_while(|&s| s + w <= len).collect();
    if starts.last().is_some_and(|&s| s + w < len) {
        starts.push(len - w);
    }
    starts
}

/// Block test on concentrations of candidate pixels (D > τ, with τ the χ²
/// quantile of `p_value`).
///
/// With n = ⌊w²/g²⌋ and k = ⌊|L_B|/g²⌋, a block scores
/// log₁₀ NFA_B = log₁₀(H·W·g²/w²) + log₁₀ P(Binomial(n, p) ≥ k), and each
/// pixel keeps the minimum over the blocks covering it.
pub fn block_nfa(dm: &MahalanobisMap, params: &BlockParams) -> Result<NfaMap> {
    let (h, w) = dm.values.dims();
    let bs = params.size;
    let g = params.subsampling;
    if g == 0 || bs < g {
        return Err(Error::Parameter(format!(
            "block size {bs} must be >= subsampling factor {g} >= 1"
        )));
    }
    if bs > h.min(w) {
        return Err(Error::Parameter(format!("block size {bs} exceeds image {h}x{w}")));
    }
    if params.stride == 0 || params.stride > bs {
        return Err(Error::Parameter(format!("stride {} must lie in 1..={bs}", params.stride)));
    }
    if !(params.p_value > 0.0 && params.p_value < 1.0) {
        return Err(Error::Parameter(format!("p-value {} outside (0, 1)", params.p_value)));
    }
    if !dm.values.is_finite() {
        return Err(Error::Contract("distance map contains non-finite values".into()));
    }
    let tau = chi2_isf(params.p_value, dm.dof)?;

    // summed-area table of candidates
    let stride = w + 1;
    let mut table = vec![0u32; (h + 1) * stride];
    for i in 0..h {
        let mut run = 0u32;
        for (j, &d) in dm.values.row(i).iter().enumerate() {
            run += (d > tau) as u32;
            table[(i + 1) * stride + j + 1] = table[i * stride + j + 1] + run;
        }
    }

    let n = params.trials();
    let g2 = (g * g) as u64;
    let tests = (h * w) as f64 * g2 as f64 / (bs * bs) as f64;
    let log_tests = tests.log10();
    let tails = (0..=n)
        .map(|k| binomial_tail(n, k, params.p_value).map(|t| log_tests + t.value()))
        .collect::<Result<Vec<f64>>>()?;

    let mut out = vec![f64::INFINITY; h * w];
    for &r0 in &block_starts(h, bs, params.stride) {
        for &c0 in &block_starts(w, bs, params.stride) {
            let (r1, c1) = (r0 + bs, c0 + bs);
            let count = table[r1 * stride + c1] + table[r0 * stride + c0]
                - table[r0 * stride + c1]
                - table[r1 * stride + c0];
            let k = (count as u64 / g2).min(n);
            let v = tails[k as usize];
            for r in r0..r1 {
                for o in &mut out[r * w + c0..r * w + c1] {
                    if v < *o {
                        *o = v;
                    }
                }
            }
        }
    }
    Ok(NfaMap {
        log10_nfa: Plane::new(h, w, out)?,
        tests,
        scale_index: 0,
        channel_index: Some(0),
    })
}

/// Distance threshold used by [`block_nfa`] for a given dof.
pub(crate) fn block_tau(p_value: f64, dof: usize) -> Result<f64> {
    chi2_isf(p_value, dof)
}
