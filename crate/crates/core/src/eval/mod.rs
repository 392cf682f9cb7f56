//! Pixel-level evaluation, noise calibration, synthetic fixtures and dataset
//! ingestion.

mod calibrate;
mod dataset;
mod metrics;
mod report;
mod synth;

pub use calibrate::{
    calibrate_noise, calibrate_noise_with, CalibrationOptions, CalibrationSeries, CalibrationTable, NoiseSource,
    CALIBRATION_DELTAS, MIN_TRIALS,
};
pub use dataset::{load_dataset, LabeledSample, GOOD_TYPE};
pub use metrics::{
    gap_metric, max_youden, operating_point, roc_auc, roc_curve, threshold_sweep, PooledScores, RocPoint, SweepRow,
};
pub use report::{
    config_tags, evaluate_dataset, evaluate_images, EvalAccumulator, EvalReport, ImageScore, SWEEP_DELTAS,
};
pub use synth::{synth_anomaly, Background, DefectKind, DefectShape, DefectSpec};
