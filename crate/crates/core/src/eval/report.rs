//! Running the detector over labelled images and summarising the result.

use std::fmt::Write as _;

use super::dataset::LabeledSample;
use super::metrics::{PooledScores, RocPoint, SweepRow};
use crate::config::DetectorConfig;
use crate::detector::detect;
use crate::error::{Error, Result};
use crate::image::{load_image, load_mask, Image, Mask, Plane};

/// NFA thresholds of the sweep table.
pub const SWEEP_DELTAS: [f64; 7] = [1e-4, 1e-3, 0.01, 0.1, 1.0, 10.0, 100.0];

#[derive(Debug, Clone, PartialEq)]
pub struct ImageScore {
    pub name: String,
    pub defect_type: String,
    pub pixels: usize,
    pub positives: usize,
    /// Pixels at or above the detection threshold.
    pub detections: usize,
    /// `None` when the image holds a single class.
    pub auroc: Option<f64>,
    pub gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    /// `key=value` pairs identifying the run, e.g. variant and NFA kind.
    pub tags: Vec<(String, String)>,
    /// Pooled-pixel AUROC.
    pub roc_auc: f64,
    /// Mean of the defined per-image AUROCs.
    pub mean_image_auroc: Option<f64>,
    pub gap: f64,
    pub threshold_as: f64,
    /// Operating point at `threshold_as`.
    pub at_threshold: RocPoint,
    pub best_youden: RocPoint,
    pub sweep: Vec<SweepRow>,
    pub per_image: Vec<ImageScore>,
}

impl EvalReport {
    /// Youden index at the detection threshold over the best achievable one.
    pub fn youden_ratio(&self) -> f64 {
        self.at_threshold.youden() / self.best_youden.youden()
    }

    /// One row per image and a final `summary` row. The summary row carries
    /// the pooled AUROC in `auroc` and the per-image mean in
    /// `mean_image_auroc`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let tags: Vec<String> = self.tags.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let _ = writeln!(out, "# {}", tags.join(" "));
        out.push_str("name,defect_type,pixels,positives,detections,auroc,mean_image_auroc,gap\n");
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
        for s in &self.per_image {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},,{}",
                s.name,
                s.defect_type,
                s.pixels,
                s.positives,
                s.detections,
                opt(s.auroc),
                opt(s.gap)
            );
        }
        let _ = writeln!(
            out,
            "summary,all,{},{},{},{:.6},{},{:.6}",
            self.per_image.iter().map(|s| s.pixels).sum::<usize>(),
            self.per_image.iter().map(|s| s.positives).sum::<usize>(),
            self.per_image.iter().map(|s| s.detections).sum::<usize>(),
            self.roc_auc,
            opt(self.mean_image_auroc),
            self.gap
        );
        out
    }

    pub fn sweep_csv(&self) -> String {
        let mut out = String::from("delta,tpr,fpr\n");
        for r in &self.sweep {
            let _ = writeln!(out, "{},{:.6},{:.6}", r.delta, r.tpr, r.fpr);
        }
        out
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.tags {
            let _ = writeln!(out, "{k}: {v}");
        }
        let _ = writeln!(out, "images: {}", self.per_image.len());
        let _ = writeln!(out, "pixel AUROC (pooled): {:.4}", self.roc_auc);
        if let Some(m) = self.mean_image_auroc {
            let _ = writeln!(out, "pixel AUROC (per-image mean): {m:.4}");
        }
        let _ = writeln!(out, "gap (median AS difference): {:.4}", self.gap);
        let _ = writeln!(
            out,
            "AS >= {}: TPR {:.4}, FPR {:.6}, Youden {:.4} (best {:.4} at AS {:.3})",
            self.threshold_as,
            self.at_threshold.tpr,
            self.at_threshold.fpr,
            self.at_threshold.youden(),
            self.best_youden.youden(),
            self.best_youden.threshold
        );
        out
    }
}

/// Collects score maps one image at a time.
#[derive(Debug, Clone, Default)]
pub struct EvalAccumulator {
    pool: PooledScores,
    per_image: Vec<ImageScore>,
}

impl EvalAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: &str, defect_type: &str, score: &Plane, mask: &Mask, threshold_as: f64) -> Result<()> {
        let mut own = PooledScores::new();
        own.push(score, mask)?;
        self.pool.push(score, mask)?;
        self.per_image.push(ImageScore {
            name: name.to_string(),
            defect_type: defect_type.to_string(),
            pixels: score.len(),
            positives: mask.count(),
            detections: score.data().iter().filter(|&&v| v >= threshold_as).count(),
            auroc: own.auc().ok(),
            gap: own.gap().ok(),
        });
        Ok(())
    }

    pub fn finish(mut self, tags: Vec<(String, String)>, threshold_as: f64) -> Result<EvalReport> {
        let roc_auc = self.pool.auc()?;
        let gap = self.pool.gap()?;
        let (fpr, tpr) = self.pool.operating_point(threshold_as)?;
        let best_youden = self.pool.max_youden()?;
        let sweep = self.pool.threshold_sweep(&SWEEP_DELTAS)?;
        let defined: Vec<f64> = self.per_image.iter().filter_map(|s| s.auroc).collect();
        let mean_image_auroc = (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64);
        Ok(EvalReport {
            tags,
            roc_auc,
            mean_image_auroc,
            gap,
            threshold_as,
            at_threshold: RocPoint {
                threshold: threshold_as,
                fpr,
                tpr,
            },
            best_youden,
            sweep,
            per_image: self.per_image,
        })
    }
}

pub fn config_tags(cfg: &DetectorConfig) -> Vec<(String, String)> {
    vec![
        ("variant".into(), cfg.variant.as_str().into()),
        ("nfa".into(), cfg.nfa.as_str().into()),
        ("scales".into(), cfg.scales.to_string()),
        ("seed".into(), cfg.seed.to_string()),
    ]
}

/// Detects on each (name, image, mask) triple in order.
pub fn evaluate_images<'a, I>(items: I, cfg: &DetectorConfig) -> Result<EvalReport>
where
    I: IntoIterator<Item = (String, &'a Image, &'a Mask)>,
{
    let mut acc = EvalAccumulator::new();
    for (name, img, mask) in items {
        let res = detect(img, cfg)?;
        let defect_type = if mask.count() == 0 { "good" } else { "defect" };
        acc.add(&name, defect_type, &res.anomaly_score, mask, cfg.threshold_as)?;
    }
    acc.finish(config_tags(cfg), cfg.threshold_as)
}

fn load_sample(sample: &LabeledSample) -> Result<(Image, Mask)> {
    let img = load_image(&sample.image_path)?;
    let (h, w) = img.dims();
    let mask = match &sample.mask_path {
        Some(p) => {
            let m = load_mask(p)?;
            if m.dims() != (h, w) {
                return Err(Error::Layout {
                    offenders: vec![format!(
                        "mask {} is {}x{}, image is {h}x{w}",
                        p.display(),
                        m.dims().0,
                        m.dims().1
                    )],
                });
            }
            m
        }
        None => Mask::empty(h, w),
    };
    Ok((img, mask))
}

/// Runs the detector on every sample of a loaded dataset. `progress` is
/// called after each image with its index and score.
pub fn evaluate_dataset(
    samples: &[LabeledSample],
    cfg: &DetectorConfig,
    mut progress: impl FnMut(usize, &ImageScore),
) -> Result<EvalReport> {
    let mut acc = EvalAccumulator::new();
    for (i, s) in samples.iter().enumerate() {
        let (img, mask) = load_sample(s)?;
        let res = detect(&img, cfg)?;
        acc.add(&s.name(), &s.defect_type, &res.anomaly_score, &mask, cfg.threshold_as)?;
        progress(i, acc.per_image.last().expect("just pushed"));
    }
    let mut tags = config_tags(cfg);
    if let Some(c) = samples.first().map(|s| s.category.clone()) {
        tags.insert(0, ("category".into(), c));
    }
    acc.finish(tags, cfg.threshold_as)
}
