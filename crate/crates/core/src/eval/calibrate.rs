//! Empirical false-alarm counts on pure-noise inputs.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::config::{DetectorConfig, NfaKind};
use crate::detector::{
    block_nfa, detect, estimate_component_stats, mahalanobis_map, pixel_nfa, BlockParams, NfaMap,
};
use crate::error::{Error, Result};
use crate::features::FeatureStack;
use crate::image::{Image, Plane};

/// NFA thresholds reported by [`calibrate_noise`].
pub const CALIBRATION_DELTAS: [f64; 4] = [0.01, 0.1, 1.0, 10.0];

pub const MIN_TRIALS: usize = 50;

/// What the detector is fed in each trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseSource {
    /// Gaussian-noise images through the full configured pipeline.
    Pipeline,
    /// `dof` i.i.d. standard-normal feature maps scored directly, so the
    /// χ² background model holds exactly. Block tests use g = 1.
    InjectedFeatures { dof: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationOptions {
    pub trials: usize,
    pub seed: u64,
    pub height: usize,
    pub width: usize,
    pub source: NoiseSource,
    pub nfa_kinds: Vec<NfaKind>,
}

impl CalibrationOptions {
    pub fn new(trials: usize, seed: u64) -> Self {
        CalibrationOptions {
            trials,
            seed,
            height: 128,
            width: 128,
            source: NoiseSource::Pipeline,
            nfa_kinds: vec![NfaKind::Pixel, NfaKind::Block],
        }
    }
}

/// Per-trial counts of pixels with NFA ≤ δ, for one NFA kind.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationSeries {
    pub nfa: NfaKind,
    /// `counts[t][d]` for trial `t` and `CALIBRATION_DELTAS[d]`.
    pub counts: Vec<[u64; 4]>,
}

impl CalibrationSeries {
    pub fn mean(&self, d: usize) -> f64 {
        self.counts.iter().map(|c| c[d] as f64).sum::<f64>() / self.counts.len() as f64
    }

    /// Sample standard deviation of the counts at `CALIBRATION_DELTAS[d]`.
    pub fn std_dev(&self, d: usize) -> f64 {
        let n = self.counts.len() as f64;
        let m = self.mean(d);
        let ss: f64 = self.counts.iter().map(|c| (c[d] as f64 - m).powi(2)).sum();
        (ss / (n - 1.0).max(1.0)).sqrt()
    }

    /// One-sided lower confidence bound on the expected count (normal
    /// approximation), `z` standard errors below the sample mean.
    pub fn lower_bound(&self, d: usize, z: f64) -> f64 {
        self.mean(d) - z * self.std_dev(d) / (self.counts.len() as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationTable {
    pub options: CalibrationOptions,
    pub series: Vec<CalibrationSeries>,
}

impl CalibrationTable {
    /// `nfa,delta,trials,mean_count,std_count` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let src = match self.options.source {
            NoiseSource::Pipeline => "pipeline".to_string(),
            NoiseSource::InjectedFeatures { dof } => format!("injected-dof{dof}"),
        };
        let _ = writeln!(
            out,
            "# source={src} size={}x{} seed={}",
            self.options.height, self.options.width, self.options.seed
        );
        out.push_str("nfa,delta,trials,mean_count,std_count\n");
        for s in &self.series {
            for (d, delta) in CALIBRATION_DELTAS.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{},{},{},{:.6},{:.6}",
                    s.nfa.as_str(),
                    delta,
                    s.counts.len(),
                    s.mean(d),
                    s.std_dev(d)
                );
            }
        }
        out
    }
}

fn noise_plane(rng: &mut ChaCha8Rng, h: usize, w: usize) -> Plane {
    Plane::from_fn(h, w, |_, _| StandardNormal.sample(rng))
}

fn count_below(map: &Plane) -> [u64; 4] {
    let mut counts = [0u64; 4];
    for &v in map.data() {
        for (d, delta) in CALIBRATION_DELTAS.iter().enumerate() {
            if v <= delta.log10() {
                counts[d] += 1;
            }
        }
    }
    counts
}

fn injected_trial(rng: &mut ChaCha8Rng, opts: &CalibrationOptions, dof: usize, cfg: &DetectorConfig, nfa: NfaKind) -> Result<NfaMap> {
    let maps = (0..dof).map(|_| noise_plane(rng, opts.height, opts.width)).collect();
    let fs = FeatureStack::new(vec![maps])?;
    let stats = estimate_component_stats(&fs, 0)?;
    let dm = mahalanobis_map(&fs, 0, &stats)?;
    match nfa {
        NfaKind::Pixel => pixel_nfa(&dm),
        NfaKind::Block => block_nfa(
            &dm,
            &BlockParams {
                size: cfg.block.size,
                stride: cfg.block.stride,
                p_value: cfg.block.p_value,
                subsampling: 1,
            },
        ),
    }
}

/// [`calibrate_noise_with`] on 128×128 Gaussian-noise images through the
/// full pipeline, for both pixel and block NFA.
pub fn calibrate_noise(cfg: &DetectorConfig, trials: usize, seed: u64) -> Result<CalibrationTable> {
    calibrate_noise_with(cfg, &CalibrationOptions::new(trials, seed))
}

/// Counts, for every trial and each δ in [`CALIBRATION_DELTAS`], the pixels
/// whose final NFA is at most δ. Trial `t` draws its noise from seed
/// `seed + t`, so the table does not depend on the thread count.
pub fn calibrate_noise_with(cfg: &DetectorConfig, opts: &CalibrationOptions) -> Result<CalibrationTable> {
    if opts.trials < MIN_TRIALS {
        return Err(Error::Parameter(format!(
            "calibration needs at least {MIN_TRIALS} trials, got {}",
            opts.trials
        )));
    }
    let mut series = Vec::with_capacity(opts.nfa_kinds.len());
    for &nfa in &opts.nfa_kinds {
        let run_cfg = DetectorConfig { nfa, ..cfg.clone() };
        run_cfg.validate()?;
        let counts = (0..opts.trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(t as u64));
                let log10_nfa = match opts.source {
                    NoiseSource::Pipeline => {
                        let img = Image::gray(noise_plane(&mut rng, opts.height, opts.width))?;
                        detect(&img, &run_cfg)?.anomaly_score.map(|v| -v)
                    }
                    NoiseSource::InjectedFeatures { dof } => {
                        injected_trial(&mut rng, opts, dof, &run_cfg, nfa)?.log10_nfa
                    }
                };
                Ok(count_below(&log10_nfa))
            })
            .collect::<Result<Vec<_>>>()?;
        series.push(CalibrationSeries { nfa, counts });
    }
    Ok(CalibrationTable {
        options: opts.clone(),
        series,
    })
}
