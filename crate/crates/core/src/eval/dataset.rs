//! MVTec-style layout: `<root>/test/<type>/<nnn>.png` with masks at
//! `<root>/ground_truth/<type>/<nnn>_mask.png`; type `good` has none.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

pub const GOOD_TYPE: &str = "good";
const MASK_SUFFIX: &str = "_mask";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledSample {
    pub image_path: PathBuf,
    /// `None` for anomaly-free samples.
    pub mask_path: Option<PathBuf>,
    /// Name of the dataset root directory.
    pub category: String,
    pub defect_type: String,
    /// File stem, e.g. `003`.
    pub id: String,
}

impl LabeledSample {
    pub fn name(&self) -> String {
        format!("{}/{}", self.defect_type, self.id)
    }
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut entries = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|err| Error::io(dir, err)))
        .collect::<Result<Vec<_>>>()?;
    entries.sort();
    Ok(entries)
}

fn is_png(p: &Path) -> bool {
    p.is_file() && p.extension().is_some_and(|e| e.eq_ignore_ascii_case("png"))
}

fn stem(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Every test image paired with its mask, sorted by defect type then id.
///
/// Missing masks for defective images and masks without an image are
/// collected and reported together.
pub fn load_dataset(root: impl AsRef<Path>) -> Result<Vec<LabeledSample>> {
    let root = root.as_ref();
    if !root.is_dir() {
        return Err(Error::NotFound(root.to_path_buf()));
    }
    let test_dir = root.join("test");
    let gt_dir = root.join("ground_truth");
    if !test_dir.is_dir() {
        return Err(Error::EmptyDataset(root.to_path_buf()));
    }
    let category = root
        .canonicalize()
        .ok()
        .and_then(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
        .unwrap_or_default();

    let mut samples = Vec::new();
    let mut offenders = Vec::new();
    for type_dir in sorted_entries(&test_dir)?.into_iter().filter(|p| p.is_dir()) {
        let defect_type = type_dir.file_name().unwrap().to_string_lossy().into_owned();
        let good = defect_type == GOOD_TYPE;
        for image_path in sorted_entries(&type_dir)?.into_iter().filter(|p| is_png(p)) {
            let id = stem(&image_path);
            let mask_path = if good {
                None
            } else {
                let m = gt_dir.join(&defect_type).join(format!("{id}{MASK_SUFFIX}.png"));
                if !m.is_file() {
                    offenders.push(format!("missing mask {}", m.display()));
                }
                Some(m)
            };
            samples.push(LabeledSample {
                image_path,
                mask_path,
                category: category.clone(),
                defect_type: defect_type.clone(),
                id,
            });
        }
    }

    if gt_dir.is_dir() {
        for type_dir in sorted_entries(&gt_dir)?.into_iter().filter(|p| p.is_dir()) {
            let defect_type = type_dir.file_name().unwrap().to_string_lossy().into_owned();
            for mask in sorted_entries(&type_dir)?.into_iter().filter(|p| is_png(p)) {
                let s = stem(&mask);
                let image = s
                    .strip_suffix(MASK_SUFFIX)
                    .map(|id| test_dir.join(&defect_type).join(format!("{id}.png")));
                let paired = defect_type != GOOD_TYPE && image.as_ref().is_some_and(|p| p.is_file());
                if !paired {
                    offenders.push(format!("orphan mask {}", mask.display()));
                }
            }
        }
    }

    if !offenders.is_empty() {
        return Err(Error::Layout { offenders });
    }
    if samples.is_empty() {
        return Err(Error::EmptyDataset(root.to_path_buf()));
    }
    Ok(samples)
}
