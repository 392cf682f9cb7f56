//! Pixel-level metrics over pooled score maps and ground-truth masks.

use crate::error::{Error, Result};
use crate::image::{Mask, Plane};

/// Scores of all pixels pooled across images, split by ground-truth class.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PooledScores {
    positives: Vec<f64>,
    negatives: Vec<f64>,
    sorted: bool,
}

impl PooledScores {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_maps(scores: &[Plane], masks: &[Mask]) -> Result<Self> {
        if scores.len() != masks.len() {
            return Err(Error::Contract(format!(
                "{} score maps vs {} masks",
                scores.len(),
                masks.len()
            )));
        }
        let mut pool = Self::new();
        for (i, (s, m)) in scores.iter().zip(masks).enumerate() {
            pool.push(s, m).map_err(|_| Error::Contract(format!("pair {i}: score and mask dims differ")))?;
        }
        Ok(pool)
    }

    pub fn push(&mut self, scores: &Plane, mask: &Mask) -> Result<()> {
        if scores.dims() != mask.dims() {
            return Err(Error::Contract("score and mask dims differ".into()));
        }
        for (&v, &l) in scores.data().iter().zip(mask.data()) {
            if l {
                self.positives.push(v);
            } else {
                self.negatives.push(v);
            }
        }
        self.sorted = false;
        Ok(())
    }

    pub fn positives(&self) -> usize {
        self.positives.len()
    }

    pub fn negatives(&self) -> usize {
        self.negatives.len()
    }

    fn check_classes(&self) -> Result<()> {
        if self.positives.is_empty() || self.negatives.is_empty() {
            return Err(Error::UndefinedMetric(format!(
                "need both classes, got {} positive and {} negative pixels",
                self.positives.len(),
                self.negatives.len()
            )));
        }
        Ok(())
    }

    fn sort(&mut self) {
        if !self.sorted {
            self.positives.sort_by(f64::total_cmp);
            self.negatives.sort_by(f64::total_cmp);
            self.sorted = true;
        }
    }

    /// Mann–Whitney estimate of P(positive > negative), ties counting ½.
    pub fn auc(&mut self) -> Result<f64> {
        self.check_classes()?;
        self.sort();
        let neg = &self.negatives;
        let (mut below, mut upto) = (0usize, 0usize);
        let mut wins = 0.0;
        for &v in &self.positives {
            while below < neg.len() && neg[below] < v {
                below += 1;
            }
            upto = upto.max(below);
            while upto < neg.len() && neg[upto] <= v {
                upto += 1;
            }
            wins += below as f64 + 0.5 * (upto - below) as f64;
        }
        Ok(wins / (self.positives.len() as f64 * neg.len() as f64))
    }

    /// Median positive score minus median negative score.
    pub fn gap(&mut self) -> Result<f64> {
        self.check_classes()?;
        self.sort();
        Ok(median_sorted(&self.positives) - median_sorted(&self.negatives))
    }

    /// (FPR, TPR) when flagging every pixel with score ≥ `threshold`.
    pub fn operating_point(&mut self, threshold: f64) -> Result<(f64, f64)> {
        self.check_classes()?;
        self.sort();
        let at_or_above = |v: &[f64]| v.len() - v.partition_point(|&x| x < threshold);
        Ok((
            at_or_above(&self.negatives) as f64 / self.negatives.len() as f64,
            at_or_above(&self.positives) as f64 / self.positives.len() as f64,
        ))
    }

    /// Every distinct operating point, from the highest threshold down.
    pub fn roc_curve(&mut self) -> Result<Vec<RocPoint>> {
        self.check_classes()?;
        self.sort();
        let (pos, neg) = (&self.positives, &self.negatives);
        let (np, nn) = (pos.len() as f64, neg.len() as f64);
        let (mut i, mut j) = (pos.len(), neg.len());
        let mut curve = Vec::new();
        while i > 0 || j > 0 {
            let t = match (i, j) {
                (0, _) => neg[j - 1],
                (_, 0) => pos[i - 1],
                _ => pos[i - 1].max(neg[j - 1]),
            };
            while i > 0 && pos[i - 1] == t {
                i -= 1;
            }
            while j > 0 && neg[j - 1] == t {
                j -= 1;
            }
            curve.push(RocPoint {
                threshold: t,
                fpr: (neg.len() - j) as f64 / nn,
                tpr: (pos.len() - i) as f64 / np,
            });
        }
        Ok(curve)
    }

    /// Highest Youden index TPR − FPR over all thresholds.
    pub fn max_youden(&mut self) -> Result<RocPoint> {
        let curve = self.roc_curve()?;
        Ok(curve
            .into_iter()
            .max_by(|a, b| a.youden().total_cmp(&b.youden()))
            .expect("curve is non-empty"))
    }

    /// TPR/FPR for each NFA threshold δ, flagging AS ≥ −log₁₀ δ.
    pub fn threshold_sweep(&mut self, deltas: &[f64]) -> Result<Vec<SweepRow>> {
        deltas
            .iter()
            .map(|&delta| {
                let (fpr, tpr) = self.operating_point(-delta.log10())?;
                Ok(SweepRow { delta, tpr, fpr })
            })
            .collect()
    }
}

fn median_sorted(v: &[f64]) -> f64 {
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Area under the ROC curve of pooled pixels, by the Mann–Whitney rank
/// statistic with tied scores given their average rank.
pub fn roc_auc(scores: &[Plane], masks: &[Mask]) -> Result<f64> {
    PooledScores::from_maps(scores, masks)?.auc()
}

/// Median score over anomalous pixels minus median over normal pixels.
pub fn gap_metric(scores: &[Plane], masks: &[Mask]) -> Result<f64> {
    PooledScores::from_maps(scores, masks)?.gap()
}

pub fn operating_point(scores: &[Plane], masks: &[Mask], threshold: f64) -> Result<(f64, f64)> {
    PooledScores::from_maps(scores, masks)?.operating_point(threshold)
}

pub fn roc_curve(scores: &[Plane], masks: &[Mask]) -> Result<Vec<RocPoint>> {
    PooledScores::from_maps(scores, masks)?.roc_curve()
}

pub fn max_youden(scores: &[Plane], masks: &[Mask]) -> Result<RocPoint> {
    PooledScores::from_maps(scores, masks)?.max_youden()
}

pub fn threshold_sweep(scores: &[Plane], masks: &[Mask], deltas: &[f64]) -> Result<Vec<SweepRow>> {
    PooledScores::from_maps(scores, masks)?.threshold_sweep(deltas)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

impl RocPoint {
    pub fn youden(&self) -> f64 {
        self.tpr - self.fpr
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    /// NFA threshold; pixels with NFA ≤ δ (AS ≥ −log₁₀ δ) are flagged.
    pub delta: f64,
    pub tpr: f64,
    pub fpr: f64,
}
