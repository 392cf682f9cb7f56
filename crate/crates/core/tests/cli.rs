mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use anodet::eval::{synth_anomaly, Background, DefectKind, DefectShape, DefectSpec};
use anodet::image::{load_pfm, Image, Plane};
use common::{write_mask, write_png};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use tempfile::TempDir;

fn anodet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_anodet"))
        .args(args)
        .env_remove("ANODET_CONFIG")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn noise_png(dir: &Path, name: &str, seed: u64, side: usize) -> PathBuf {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let plane = Plane::from_fn(side, side, |_, _| {
        let z: f64 = StandardNormal.sample(&mut rng);
        (0.5 + 0.1 * z).clamp(0.0, 1.0)
    });
    let path = dir.join(name);
    write_png(&Image::gray(plane).unwrap(), &path);
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn detect_writes_all_outputs() {
    let dir = TempDir::new().unwrap();
    let img = noise_png(dir.path(), "a.png", 1, 128);
    let out = dir.path().join("out");
    let o = anodet(&["detect", s(&img), "--out", s(&out), "--m", "20", "--patch-size", "9"]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["as.pfm", "mask.png", "heatmap.png", "config.txt"] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    let map = load_pfm(out.join("as.pfm")).unwrap();
    assert_eq!(map.dims(), (128, 128));
    let cfg = std::fs::read_to_string(out.join("config.txt")).unwrap();
    assert!(cfg.contains("# invoked as:"));
    assert!(cfg.contains("patch_size = 9") || cfg.contains("patch-size = 9"), "{cfg}");
}

#[test]
fn gabor_block_echoes_config() {
    let dir = TempDir::new().unwrap();
    let img = noise_png(dir.path(), "a.png", 2, 128);
    let out = dir.path().join("out");
    let o = anodet(&[
        "detect", s(&img), "--out", s(&out), "--variant", "gabor", "--nfa", "block", "--decorrelate",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let cfg = std::fs::read_to_string(out.join("config.txt")).unwrap();
    assert!(cfg.contains("variant = \"gabor\""), "{cfg}");
    assert!(cfg.contains("nfa = \"block\""), "{cfg}");
    assert!(cfg.contains("[block]"));
}

#[test]
fn constant_image_exits_degenerate() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("flat.png");
    write_png(&Image::gray(Plane::filled(96, 96, 0.4)).unwrap(), &path);
    let out = dir.path().join("out");
    let o = anodet(&["detect", s(&path), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no texture"), "{}", stderr(&o));
}

#[test]
fn bad_flag_exits_one() {
    let o = anodet(&["detect", "--no-such-flag"]);
    assert_eq!(o.status.code(), Some(1));
    let o = anodet(&["detect", "x.png", "--out", "o", "--patch-size", "8"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("odd"), "{}", stderr(&o));
}

#[test]
fn help_exits_zero() {
    let o = anodet(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    for sub in ["detect", "evaluate", "calibrate", "filters"] {
        assert!(text.contains(sub));
    }
}

#[test]
fn multiple_inputs_go_to_stem_dirs() {
    let dir = TempDir::new().unwrap();
    let a = noise_png(dir.path(), "first.png", 3, 96);
    let b = noise_png(dir.path(), "second.png", 4, 96);
    let out = dir.path().join("out");
    let o = anodet(&["detect", s(&a), s(&b), "--out", s(&out), "--m", "20", "--patch-size", "9"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(out.join("first/as.pfm").is_file());
    assert!(out.join("second/as.pfm").is_file());
}

#[test]
fn config_file_from_environment() {
    let dir = TempDir::new().unwrap();
    let img = noise_png(dir.path(), "a.png", 5, 96);
    let toml = dir.path().join("cfg.toml");
    std::fs::write(&toml, "patch_size = 7\nm = 12\nscales = 2\n").unwrap();
    let out = dir.path().join("out");
    let o = Command::new(env!("CARGO_BIN_EXE_anodet"))
        .args(["detect", s(&img), "--out", s(&out)])
        .env("ANODET_CONFIG", &toml)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let cfg = std::fs::read_to_string(out.join("config.txt")).unwrap();
    assert!(cfg.contains("scales = 2"), "{cfg}");
    assert!(cfg.contains("m = 12"), "{cfg}");

    // an explicit flag wins over the file
    let out2 = dir.path().join("out2");
    let o = Command::new(env!("CARGO_BIN_EXE_anodet"))
        .args(["detect", s(&img), "--out", s(&out2), "--scales", "1"])
        .env("ANODET_CONFIG", &toml)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let cfg = std::fs::read_to_string(out2.join("config.txt")).unwrap();
    assert!(cfg.contains("scales = 1"), "{cfg}");
}

fn write_dataset(root: &Path) {
    let side = 128;
    for (i, ty) in ["good", "good", "patch", "patch", "patch"].iter().enumerate() {
        let id = format!("{i:03}");
        let defect = DefectSpec {
            shape: if i % 2 == 0 { DefectShape::Rectangle } else { DefectShape::Ellipse },
            kind: DefectKind::VarianceScale(if *ty == "good" { 1.0 } else { 4.0 }),
            row: 40,
            col: 30 + 5 * i,
            height: 36,
            width: 40,
        };
        let (img, mask) = synth_anomaly(100 + i as u64, side, side, Background::WhiteNoise, &defect).unwrap();
        let img_dir = root.join("test").join(ty);
        std::fs::create_dir_all(&img_dir).unwrap();
        write_png(&img, &img_dir.join(format!("{id}.png")));
        if *ty != "good" {
            let gt = root.join("ground_truth").join(ty);
            std::fs::create_dir_all(&gt).unwrap();
            write_mask(&mask, &gt.join(format!("{id}_mask.png")));
        }
    }
}

#[test]
fn evaluate_synthetic_dataset() {
    let dir = TempDir::new().unwrap();
    let root = dir.path().join("cat");
    write_dataset(&root);
    let out = dir.path().join("eval");
    let o = anodet(&["evaluate", s(&root), "--out", s(&out), "--nfa", "block"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(out.join("report.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert!(header.starts_with('#') && header.contains("nfa=block"), "{header}");
    assert_eq!(csv.lines().count(), 2 + 5 + 1);
    assert!(out.join("sweep.csv").is_file());
    assert!(out.join("summary.txt").is_file());

    let o = anodet(&["evaluate", s(&root), "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(out.join("report.csv")).unwrap();
    let summary = csv.lines().last().unwrap();
    let auroc: f64 = summary.split(',').nth(5).unwrap().parse().unwrap();
    assert!(auroc >= 0.95, "pooled AUROC {auroc}");
}

#[test]
fn evaluate_rejects_missing_mask() {
    let dir = TempDir::new().unwrap();
    let root = dir.path().join("cat");
    write_dataset(&root);
    std::fs::remove_file(root.join("ground_truth/patch/003_mask.png")).unwrap();
    let o = anodet(&["evaluate", s(&root), "--out", s(&dir.path().join("eval"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("003"), "{}", stderr(&o));
}

#[test]
fn calibrate_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let run = |name: &str, jobs: &str| {
        let out = dir.path().join(name);
        let o = anodet(&[
            "--jobs", jobs, "calibrate", "--trials", "100", "--seed", "7", "--size", "64", "--injected-dof", "10",
            "--out", s(&out),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        std::fs::read_to_string(out.join("calibration.csv")).unwrap()
    };
    let a = run("a", "1");
    let b = run("b", "2");
    assert_eq!(a, b);
    assert!(a.contains("seed=7"));
    // two NFA kinds times four thresholds
    assert_eq!(a.lines().filter(|l| !l.starts_with('#')).count(), 1 + 8);
}

#[test]
fn gabor_filters_dump() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("bank");
    let o = anodet(&["filters", "--variant", "gabor", "--out", s(&out), "--self-check"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let kernels = std::fs::read_dir(&out)
        .unwrap()
        .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().starts_with("kernel_"))
        .count();
    assert_eq!(kernels, 72);
    assert!(out.join("montage.png").is_file());
}

#[test]
fn patch_pca_filters_self_check() {
    let dir = TempDir::new().unwrap();
    let img = noise_png(dir.path(), "a.png", 9, 128);
    let out = dir.path().join("bank");
    let o = anodet(&["filters", "--variant", "patch-pca", s(&img), "--out", s(&out), "--self-check"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(out.join("kernel_044.pfm").is_file());
    assert!(!out.join("kernel_045.pfm").exists());
    let ev = std::fs::read_to_string(out.join("eigenvalues.txt")).unwrap();
    let ev: Vec<f64> = ev.lines().map(|l| l.parse().unwrap()).collect();
    assert!(ev.windows(2).all(|w| w[0] >= w[1]));
}

#[test]
fn external_features_from_directory() {
    let dir = TempDir::new().unwrap();
    let feats = dir.path().join("feats");
    std::fs::create_dir_all(&feats).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for i in 0..4 {
        let p = Plane::from_fn(64, 64, |_, _| StandardNormal.sample(&mut rng));
        anodet::image::save_float_map(&p, feats.join(format!("f{i}.pfm"))).unwrap();
    }
    std::fs::write(feats.join("manifest.txt"), "count=4\ndims=64x64\nf0.pfm\nf1.pfm\nf2.pfm\nf3.pfm\n").unwrap();
    let out = dir.path().join("out");
    let o = anodet(&["detect", "--features", s(&feats), "--out", s(&out), "--scales", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let map = load_pfm(out.join("as.pfm")).unwrap();
    assert_eq!(map.dims(), (64, 64));
}
