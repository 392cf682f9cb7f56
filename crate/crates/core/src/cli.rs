//! Command-line front end. [`run`] parses arguments, executes one
//! subcommand and returns the process exit code.
//!
//! Exit codes: 0 success, 1 usage, I/O or parameter error, 2 degenerate
//! input (for example an image without texture).

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::config::{DetectorConfig, NfaKind, Variant};
use crate::detector::pipeline::level_seed;
use crate::detector::{detect, detect_feature_stack, detect_multilight, DetectionResult};
use crate::error::{Error, Result};
use crate::eval::{calibrate_noise_with, evaluate_dataset, load_dataset, CalibrationOptions, NoiseSource};
use crate::features::{
    kernel_montage, learn_patch_pca_filters, load_external_features, make_gabor_bank, ComponentSelection, FilterBank,
};
use crate::image::{load_image, save_float_map, save_gray, save_heatmap, save_mask, Image};

pub const CONFIG_ENV: &str = "ANODET_CONFIG";

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_DEGENERATE: i32 = 2;

/// Largest orthonormality error accepted by `filters --self-check`.
const SELF_CHECK_TOL: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(name = "anodet", version, about = "A contrario anomaly detection in textured images")]
struct Cli {
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Score one image (or one aligned multi-light set) and write AS maps.
    Detect(DetectCmd),
    /// Run the detector over an MVTec-style dataset and report pixel AUROC.
    Evaluate(EvaluateCmd),
    /// Count false alarms on pure-noise inputs.
    Calibrate(CalibrateCmd),
    /// Dump a filter bank as PFM kernels plus a PNG montage.
    Filters(FiltersCmd),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum VariantArg {
    PatchPca,
    Gabor,
    External,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum NfaArg {
    Pixel,
    Block,
}

#[derive(Debug, Clone, Default, Args)]
struct DetectorArgs {
    /// Config file (TOML); falls back to $ANODET_CONFIG.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    variant: Option<VariantArg>,
    #[arg(long, value_enum)]
    nfa: Option<NfaArg>,
    /// Component count (integer) or variance fraction (0 < f <= 1).
    #[arg(long, value_parser = parse_selection)]
    m: Option<ComponentSelection>,
    #[arg(long)]
    patch_size: Option<usize>,
    #[arg(long)]
    scales: Option<usize>,
    #[arg(long)]
    block_size: Option<usize>,
    #[arg(long)]
    stride: Option<usize>,
    #[arg(long)]
    p_value: Option<f64>,
    /// Treat the inputs as one scene under different lights.
    #[arg(long)]
    multilight: bool,
    /// Trailing principal components kept by the multi-light projection.
    #[arg(long)]
    keep_last: Option<usize>,
    /// Decorrelate Gabor responses by PCA before scoring.
    #[arg(long)]
    decorrelate: bool,
    #[arg(long, allow_hyphen_values = true)]
    threshold_as: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct DetectCmd {
    /// Input images (PNG, PGM/PPM, PFM).
    inputs: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Score precomputed feature maps from this directory instead of images.
    #[arg(long)]
    features: Option<PathBuf>,
    /// Also write per-scale and per-channel maps here.
    #[arg(long)]
    debug_dir: Option<PathBuf>,
    #[command(flatten)]
    detector: DetectorArgs,
}

#[derive(Debug, Args)]
struct EvaluateCmd {
    /// Dataset root with test/ and ground_truth/.
    root: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    detector: DetectorArgs,
}

#[derive(Debug, Args)]
struct CalibrateCmd {
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Noise image side.
    #[arg(long, default_value_t = 128)]
    size: usize,
    /// Score this many i.i.d. Gaussian feature maps directly instead of
    /// running the pipeline on noise images.
    #[arg(long)]
    injected_dof: Option<usize>,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    detector: DetectorArgs,
}

#[derive(Debug, Args)]
struct FiltersCmd {
    /// Image to learn Patch-PCA filters from.
    input: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Channel of the input used for learning.
    #[arg(long, default_value_t = 0)]
    channel: usize,
    /// Verify kernel orthonormality (Patch-PCA) or unit norm and zero mean
    /// (Gabor) and fail if violated.
    #[arg(long)]
    self_check: bool,
    #[command(flatten)]
    detector: DetectorArgs,
}

fn parse_selection(s: &str) -> std::result::Result<ComponentSelection, String> {
    if let Ok(n) = s.parse::<usize>() {
        return Ok(ComponentSelection::Count(n));
    }
    match s.parse::<f64>() {
        Ok(f) if f > 0.0 && f <= 1.0 => Ok(ComponentSelection::VarianceFraction(f)),
        _ => Err(format!("expected a count or a fraction in (0, 1], got {s:?}")),
    }
}

impl DetectorArgs {
    /// Defaults, then the config file, then explicit flags.
    fn resolve(&self) -> Result<DetectorConfig> {
        let file = self
            .config
            .clone()
            .or_else(|| std::env::var_os(CONFIG_ENV).filter(|v| !v.is_empty()).map(PathBuf::from));
        let mut cfg = match file {
            Some(p) => DetectorConfig::from_file(p)?,
            None => DetectorConfig::default(),
        };
        if let Some(v) = self.variant {
            cfg.variant = match v {
                VariantArg::PatchPca => Variant::PatchPca,
                VariantArg::Gabor => Variant::Gabor,
                VariantArg::External => Variant::External,
            };
        }
        if let Some(n) = self.nfa {
            cfg.nfa = match n {
                NfaArg::Pixel => NfaKind::Pixel,
                NfaArg::Block => NfaKind::Block,
            };
        }
        if let Some(m) = self.m {
            cfg.m = m;
        }
        set(&mut cfg.patch_size, self.patch_size);
        set(&mut cfg.scales, self.scales);
        set(&mut cfg.block.size, self.block_size);
        set(&mut cfg.block.stride, self.stride);
        set(&mut cfg.block.p_value, self.p_value);
        set(&mut cfg.multilight.keep_last, self.keep_last);
        set(&mut cfg.threshold_as, self.threshold_as);
        set(&mut cfg.seed, self.seed);
        cfg.multilight.enabled |= self.multilight;
        cfg.gabor.decorrelate |= self.decorrelate;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

/// Parses `args` (program name first) and runs the subcommand.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let invoked = args.iter().map(|a| a.to_string_lossy()).collect::<Vec<_>>().join(" ");
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.jobs {
        Some(0) => Err(Error::Parameter("--jobs must be >= 1".into())),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| execute(&cli.command, &invoked)),
            Err(e) => Err(Error::Parameter(format!("thread pool: {e}"))),
        },
        None => execute(&cli.command, &invoked),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("anodet: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_degenerate() {
        EXIT_DEGENERATE
    } else {
        EXIT_ERROR
    }
}

fn execute(cmd: &Command, invoked: &str) -> Result<()> {
    match cmd {
        Command::Detect(c) => cmd_detect(c, invoked),
        Command::Evaluate(c) => cmd_evaluate(c, invoked),
        Command::Calibrate(c) => cmd_calibrate(c, invoked),
        Command::Filters(c) => cmd_filters(c, invoked),
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Config echo: comments naming the command, then the full TOML config.
fn config_echo(invoked: &str, cfg: &DetectorConfig, extra: &[String]) -> String {
    let mut out = format!("# invoked as: {invoked}\n");
    for line in extra {
        out.push_str(&format!("# {line}\n"));
    }
    out.push_str(&cfg.to_toml_string());
    out
}

fn diagnostics_lines(res: &DetectionResult) -> Vec<String> {
    let d = &res.diagnostics;
    let mut lines = vec![
        format!("scales used: {} of {} requested", d.used_scales, d.requested_scales),
        format!("dof per scale and channel: {:?}", d.dof),
        format!("tests per map: {}", d.tests_per_map),
        format!("tests with scale/channel multiplicity: {}", d.tests_with_multiplicity),
        format!("pixels at or above threshold: {}", res.detections()),
    ];
    if !d.block_tau.is_empty() {
        lines.push(format!("block distance threshold per scale: {:?}", d.block_tau));
    }
    lines
}

fn write_result(out: &Path, res: &DetectionResult, cfg: &DetectorConfig, debug: Option<&Path>, invoked: &str) -> Result<()> {
    create_dir(out)?;
    save_float_map(&res.anomaly_score, out.join("as.pfm"))?;
    save_mask(&res.mask, out.join("mask.png"))?;
    save_heatmap(&res.anomaly_score, out.join("heatmap.png"))?;
    write_text(&out.join("config.txt"), &config_echo(invoked, cfg, &diagnostics_lines(res)))?;
    if let Some(dir) = debug {
        create_dir(dir)?;
        for m in &res.per_scale {
            save_float_map(&m.anomaly_score(), dir.join(format!("scale{}_as.pfm", m.scale_index)))?;
        }
        for maps in &res.per_channel {
            for m in maps {
                let c = m.channel_index.unwrap_or(0);
                save_float_map(&m.anomaly_score(), dir.join(format!("scale{}_ch{c}_as.pfm", m.scale_index)))?;
            }
        }
    }
    Ok(())
}

fn stem_of(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "input".into())
}

fn cmd_detect(c: &DetectCmd, invoked: &str) -> Result<()> {
    let mut cfg = c.detector.resolve()?;
    let debug = c.debug_dir.as_deref();
    if let Some(dir) = &c.features {
        if !c.inputs.is_empty() {
            return Err(Error::Parameter("--features takes no image inputs".into()));
        }
        cfg.variant = Variant::External;
        let fs = load_external_features(dir)?;
        let res = detect_feature_stack(&fs, &cfg)?;
        return write_result(&c.out, &res, &cfg, debug, invoked);
    }
    if c.inputs.is_empty() {
        return Err(Error::Parameter("no input images".into()));
    }
    if cfg.variant == Variant::External {
        return Err(Error::Parameter("the external variant needs --features DIR".into()));
    }
    if cfg.multilight.enabled {
        if c.inputs.len() < 2 {
            return Err(Error::Parameter("--multilight needs at least two aligned images".into()));
        }
        let images = c.inputs.iter().map(load_image).collect::<Result<Vec<Image>>>()?;
        let res = detect_multilight(&images, &cfg)?;
        return write_result(&c.out, &res, &cfg, debug, invoked);
    }
    if let [single] = c.inputs.as_slice() {
        let res = detect(&load_image(single)?, &cfg)?;
        return write_result(&c.out, &res, &cfg, debug, invoked);
    }
    let mut stems: Vec<String> = c.inputs.iter().map(|p| stem_of(p)).collect();
    stems.sort();
    if stems.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Parameter("input file stems must be distinct".into()));
    }
    c.inputs
        .par_iter()
        .map(|p| {
            let stem = stem_of(p);
            let res = detect(&load_image(p)?, &cfg).map_err(|e| match e {
                Error::Degenerate { code, context } => Error::Degenerate {
                    code,
                    context: format!("{context} in {}", p.display()),
                },
                other => other,
            })?;
            write_result(&c.out.join(&stem), &res, &cfg, debug.map(|d| d.join(&stem)).as_deref(), invoked)
        })
        .collect::<Result<Vec<()>>>()?;
    Ok(())
}

fn cmd_evaluate(c: &EvaluateCmd, invoked: &str) -> Result<()> {
    let cfg = c.detector.resolve()?;
    let samples = load_dataset(&c.root)?;
    let n = samples.len();
    let report = evaluate_dataset(&samples, &cfg, |i, s| {
        eprintln!("[{}/{n}] {}", i + 1, s.name);
    })?;
    create_dir(&c.out)?;
    write_text(&c.out.join("report.csv"), &report.to_csv())?;
    write_text(&c.out.join("sweep.csv"), &report.sweep_csv())?;
    let summary = report.summary();
    write_text(&c.out.join("summary.txt"), &summary)?;
    write_text(
        &c.out.join("config.txt"),
        &config_echo(invoked, &cfg, &[format!("dataset: {}", c.root.display())]),
    )?;
    print!("{summary}");
    Ok(())
}

fn cmd_calibrate(c: &CalibrateCmd, invoked: &str) -> Result<()> {
    let cfg = c.detector.resolve()?;
    let opts = CalibrationOptions {
        height: c.size,
        width: c.size,
        source: match c.injected_dof {
            Some(dof) => NoiseSource::InjectedFeatures { dof },
            None => NoiseSource::Pipeline,
        },
        ..CalibrationOptions::new(c.trials, cfg.seed)
    };
    let table = calibrate_noise_with(&cfg, &opts)?;
    create_dir(&c.out)?;
    let csv = table.to_csv();
    write_text(&c.out.join("calibration.csv"), &csv)?;
    write_text(&c.out.join("config.txt"), &config_echo(invoked, &cfg, &[]))?;
    print!("{csv}");
    Ok(())
}

fn cmd_filters(c: &FiltersCmd, invoked: &str) -> Result<()> {
    let cfg = c.detector.resolve()?;
    let bank: FilterBank = match cfg.variant {
        Variant::PatchPca => {
            let path = c
                .input
                .as_ref()
                .ok_or_else(|| Error::Parameter("patch-pca filters are learned from an input image".into()))?;
            let img = load_image(path)?;
            if c.channel >= img.channels() {
                return Err(Error::Parameter(format!(
                    "channel {} out of range for {} channels",
                    c.channel,
                    img.channels()
                )));
            }
            learn_patch_pca_filters(img.channel(c.channel), cfg.patch_size, cfg.m, level_seed(cfg.seed, 0, c.channel))?
        }
        Variant::Gabor => make_gabor_bank(&cfg.gabor.geometry())?,
        Variant::External => return Err(Error::Parameter("external features have no filter bank".into())),
    };
    create_dir(&c.out)?;
    for (i, k) in bank.kernels.iter().enumerate() {
        save_float_map(k, c.out.join(format!("kernel_{i:03}.pfm")))?;
    }
    save_gray(&kernel_montage(&bank.kernels), c.out.join("montage.png"))?;
    if let Some(ev) = &bank.eigenvalues {
        let text: String = ev.iter().map(|v| format!("{v:e}\n")).collect();
        write_text(&c.out.join("eigenvalues.txt"), &text)?;
    }
    write_text(
        &c.out.join("config.txt"),
        &config_echo(invoked, &cfg, &[format!("kernels: {}", bank.len())]),
    )?;
    println!("{} kernels written to {}", bank.len(), c.out.display());
    if c.self_check {
        let err = match cfg.variant {
            Variant::PatchPca => bank.orthonormality_error(),
            _ => bank
                .kernels
                .iter()
                .map(|k| {
                    let norm = k.data().iter().map(|v| v * v).sum::<f64>().sqrt();
                    (norm - 1.0).abs().max(k.mean().abs())
                })
                .fold(0.0, f64::max),
        };
        println!("self-check: max deviation {err:.3e} (tolerance {SELF_CHECK_TOL:e})");
        if err > SELF_CHECK_TOL {
            return Err(Error::Contract(format!("self-check failed: deviation {err:e}")));
        }
    }
    Ok(())
}
