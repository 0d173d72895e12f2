//! Edge-preservation and segmentation metrics.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imagecore::{canny_edges, to_grayscale, Image, LabelMap, UNCERTAIN_ID};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ApceConfig {
    /// High Canny thresholds, strictly increasing, in (0, 1].
    pub high_thresholds: Vec<f64>,
    /// Low threshold as a fraction of each high threshold.
    pub low_ratio: f64,
    /// Chebyshev radius within which a source edge matches.
    pub tolerance_radius: usize,
    /// Score an empty translated edge map as 0 instead of 1.
    pub strict: bool,
}

impl Default for ApceConfig {
    fn default() -> Self {
        ApceConfig {
            high_thresholds: (1..=9).map(|k| k as f64 / 10.0).collect(),
            low_ratio: 0.4,
            tolerance_radius: 1,
            strict: false,
        }
    }
}

impl ApceConfig {
    pub fn validate(&self) -> Result<()> {
        if self.high_thresholds.is_empty() {
            return Err(Error::InvalidParameter("apce needs at least one threshold".into()));
        }
        if self.high_thresholds.iter().any(|t| !(*t > 0.0 && *t <= 1.0)) {
            return Err(Error::InvalidParameter("apce thresholds must lie in (0, 1]".into()));
        }
        if self.high_thresholds.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("apce thresholds must be strictly increasing".into()));
        }
        if !(self.low_ratio > 0.0 && self.low_ratio <= 1.0) {
            return Err(Error::InvalidParameter("apce low_ratio must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

/// Precision of the translated image's Canny edges against the (dilated)
/// source edges at each high threshold.
pub fn apce_per_threshold(translated: &Image, source_ntir: &Image, cfg: &ApceConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    source_ntir.ensure_channels(1)?;
    translated.dims().ensure_same(source_ntir.dims())?;
    let gray = to_grayscale(translated);
    cfg.high_thresholds
        .iter()
        .map(|&high| {
            let low = cfg.low_ratio * high;
            let e_tr = canny_edges(&gray, low, high)?;
            let e_src = canny_edges(source_ntir, low, high)?.dilate(cfg.tolerance_radius);
            let n = e_tr.popcount();
            if n == 0 {
                return Ok(if cfg.strict { 0.0 } else { 1.0 });
            }
            Ok(e_tr.intersection(&e_src)?.popcount() as f64 / n as f64)
        })
        .collect()
}

/// Mean multi-threshold Canny edge precision, in [0, 1].
pub fn apce(translated: &Image, source_ntir: &Image, cfg: &ApceConfig) -> Result<f64> {
    let per = apce_per_threshold(translated, source_ntir, cfg)?;
    Ok(per.iter().sum::<f64>() / per.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegReport {
    /// IoU per class; classes absent from both maps are omitted.
    pub per_class: BTreeMap<u8, f64>,
    pub miou: f64,
}

/// Per-class IoU counts (intersection, union), ignoring uncertain ground truth.
pub fn iou_counts(pred: &LabelMap, gt: &LabelMap, classes: &[u8]) -> Result<BTreeMap<u8, (usize, usize)>> {
    pred.dims().ensure_same(gt.dims())?;
    let mut counts: BTreeMap<u8, (usize, usize)> = classes.iter().map(|&c| (c, (0, 0))).collect();
    for (&p, &g) in pred.ids().iter().zip(gt.ids()) {
        if g == UNCERTAIN_ID {
            continue;
        }
        if p == g {
            if let Some(e) = counts.get_mut(&p) {
                e.0 += 1;
                e.1 += 1;
            }
        } else {
            for c in [p, g] {
                if let Some(e) = counts.get_mut(&c) {
                    e.1 += 1;
                }
            }
        }
    }
    Ok(counts)
}

pub fn class_iou(pred: &LabelMap, gt: &LabelMap, classes: &[u8]) -> Result<SegReport> {
    if gt.ids().iter().all(|&g| g == UNCERTAIN_ID) {
        return Err(Error::NoValidPixels);
    }
    let per_class: BTreeMap<u8, f64> = iou_counts(pred, gt, classes)?
        .into_iter()
        .filter(|&(_, (_, union))| union > 0)
        .map(|(c, (inter, union))| (c, inter as f64 / union as f64))
        .collect();
    if per_class.is_empty() {
        return Err(Error::NoValidPixels);
    }
    let miou = per_class.values().sum::<f64>() / per_class.len() as f64;
    Ok(SegReport { per_class, miou })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imagecore::gaussian_blur;

    fn squares() -> Image {
        Image::from_fn(32, 32, 1, |r, c, _| if (8..24).contains(&r) && (8..24).contains(&c) { 0.9 } else { 0.1 })
            .unwrap()
    }

    #[test]
    fn self_consistency() {
        let src = squares();
        assert_eq!(apce(&src, &src, &ApceConfig::default()).unwrap(), 1.0);
    }

    #[test]
    fn constant_translation_convention() {
        let src = squares();
        let flat = Image::filled(32, 32, 3, 0.5).unwrap();
        assert_eq!(apce(&flat, &src, &ApceConfig::default()).unwrap(), 1.0);
        let strict = ApceConfig { strict: true, ..Default::default() };
        assert_eq!(apce(&flat, &src, &strict).unwrap(), 0.0);
    }

    #[test]
    fn shape_mismatch() {
        let a = Image::filled(8, 8, 1, 0.1).unwrap();
        let b = Image::filled(8, 9, 1, 0.1).unwrap();
        assert!(matches!(apce(&a, &b, &ApceConfig::default()), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn result_is_a_fraction() {
        let src = squares();
        let blurred = gaussian_blur(&src, 3.0).unwrap();
        let v = apce(&blurred, &src, &ApceConfig::default()).unwrap();
        assert!((0.0..=1.0).contains(&v));
    }

    #[test]
    fn iou_cases() {
        let gt = LabelMap::from_fn(4, 4, |_, c| if c < 2 { 1 } else { 0 }).unwrap();
        let r = class_iou(&gt, &gt, &[0, 1, 2]).unwrap();
        assert_eq!(r.per_class.len(), 2);
        assert_eq!(r.miou, 1.0);

        // Prediction covers half of the class-1 blob, no false positives.
        let pred = LabelMap::from_fn(4, 4, |_, c| if c < 1 { 1 } else { 0 }).unwrap();
        let r = class_iou(&pred, &gt, &[1]).unwrap();
        assert_eq!(r.per_class[&1], 0.5);

        let unsure = LabelMap::filled(4, 4, UNCERTAIN_ID).unwrap();
        assert_eq!(class_iou(&pred, &unsure, &[0, 1]), Err(Error::NoValidPixels));
    }

    #[test]
    fn uncertain_pixels_are_ignored() {
        let gt = LabelMap::new(1, 4, vec![1, 1, UNCERTAIN_ID, UNCERTAIN_ID]).unwrap();
        let pred = LabelMap::new(1, 4, vec![1, 1, 1, 2]).unwrap();
        let r = class_iou(&pred, &gt, &[1, 2]).unwrap();
        assert_eq!(r.per_class.get(&1), Some(&1.0));
        assert_eq!(r.per_class.get(&2), None);
    }
}
