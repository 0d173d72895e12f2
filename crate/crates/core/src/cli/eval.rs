use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use super::{pair_inputs, write_json, Context, ReportFormat};
use crate::error::Result;
use crate::io::{read_image, read_labels, write_atomic};
use crate::metrics::{apce_per_threshold, iou_counts};

#[derive(Debug, Clone, Serialize)]
pub struct ApceRow {
    pub file: String,
    pub apce: f64,
    pub per_threshold: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ApceReport {
    pub thresholds: Vec<f64>,
    pub images: Vec<ApceRow>,
    pub mean_apce: f64,
}

pub fn run_apce(ctx: &Context, translated: &Path, source: &Path, format: ReportFormat) -> Result<ApceReport> {
    let cfg = &ctx.config.apce;
    let pairs = pair_inputs(translated, source)?;
    let rows: Vec<ApceRow> = ctx.pool()?.install(|| {
        pairs
            .par_iter()
            .map(|(name, t, s)| {
                let per = apce_per_threshold(&read_image(t)?, &read_image(s)?, cfg)?;
                let apce = per.iter().sum::<f64>() / per.len() as f64;
                Ok(ApceRow { file: name.clone(), apce, per_threshold: per })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mean_apce = rows.iter().map(|r| r.apce).sum::<f64>() / rows.len() as f64;
    let report = ApceReport { thresholds: cfg.high_thresholds.clone(), images: rows, mean_apce };
    match format {
        ReportFormat::Json => write_json(&ctx.out("apce.json"), &report)?,
        ReportFormat::Csv => {
            let mut text = String::from("file,apce\n");
            for r in &report.images {
                writeln!(text, "{},{}", r.file, r.apce).unwrap();
            }
            writeln!(text, "mean,{}", report.mean_apce).unwrap();
            write_atomic(&ctx.out("apce.csv"), text.as_bytes())?;
        }
    }
    println!("mean apce over {} image(s): {:.6}", report.images.len(), report.mean_apce);
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct IouRow {
    pub file: String,
    /// IoU per class id; `null` where the class is absent from both maps.
    pub per_class: Vec<Option<f64>>,
    pub miou: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct IouReport {
    pub classes: Vec<u8>,
    pub images: Vec<IouRow>,
    /// Dataset-level IoU from counts accumulated over all images.
    pub per_class: Vec<Option<f64>>,
    pub miou: Option<f64>,
}

fn ratio((inter, union): (usize, usize)) -> Option<f64> {
    (union > 0).then(|| inter as f64 / union as f64)
}

fn mean_present(v: &[Option<f64>]) -> Option<f64> {
    let present: Vec<f64> = v.iter().flatten().copied().collect();
    (!present.is_empty()).then(|| present.iter().sum::<f64>() / present.len() as f64)
}

pub fn run_iou(
    ctx: &Context,
    pred: &Path,
    gt: &Path,
    classes: Option<&[u8]>,
    format: ReportFormat,
) -> Result<IouReport> {
    let classes: Vec<u8> = match classes {
        Some(c) => {
            let mut c = c.to_vec();
            c.sort_unstable();
            c.dedup();
            c
        }
        None => ctx.config.class_ids(),
    };
    let pairs = pair_inputs(pred, gt)?;
    let counts: Vec<(String, Vec<(usize, usize)>)> = ctx.pool()?.install(|| {
        pairs
            .par_iter()
            .map(|(name, p, g)| {
                let c = iou_counts(&read_labels(p)?, &read_labels(g)?, &classes)?;
                Ok((name.clone(), classes.iter().map(|k| c[k]).collect()))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut total = vec![(0usize, 0usize); classes.len()];
    let images = counts
        .iter()
        .map(|(name, c)| {
            for (t, &(i, u)) in total.iter_mut().zip(c) {
                t.0 += i;
                t.1 += u;
            }
            let per_class: Vec<Option<f64>> = c.iter().map(|&x| ratio(x)).collect();
            IouRow { file: name.clone(), miou: mean_present(&per_class), per_class }
        })
        .collect();
    let per_class: Vec<Option<f64>> = total.into_iter().map(ratio).collect();
    let report = IouReport { classes, images, miou: mean_present(&per_class), per_class };
    match format {
        ReportFormat::Json => write_json(&ctx.out("iou.json"), &report)?,
        ReportFormat::Csv => {
            let fmt = |v: &Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            let mut text = String::from("file");
            for c in &report.classes {
                write!(text, ",class_{c}").unwrap();
            }
            text.push_str(",miou\n");
            for r in &report.images {
                text.push_str(&r.file);
                for v in &r.per_class {
                    write!(text, ",{}", fmt(v)).unwrap();
                }
                writeln!(text, ",{}", fmt(&r.miou)).unwrap();
            }
            text.push_str("total");
            for v in &report.per_class {
                write!(text, ",{}", fmt(v)).unwrap();
            }
            writeln!(text, ",{}", fmt(&report.miou)).unwrap();
            write_atomic(&ctx.out("iou.csv"), text.as_bytes())?;
        }
    }
    match report.miou {
        Some(m) => println!("mIoU over {} image(s): {:.6}", report.images.len(), m),
        None => println!("mIoU over {} image(s): no scored classes", report.images.len()),
    }
    Ok(report)
}
