use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::{write_json, Context};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::imagecore::{BinaryMask, Image, LabelMap};
use crate::io::{read_image, read_labels, read_mask};
use crate::losses::{
    aggregate, appearance_consistency_a, appearance_consistency_b, artifact_bias_correction_terms,
    color_bias_correction_loss, ArtifactInputs, LossTerms, MeanAbsGradientGap, SobelSmoothL1,
};
use crate::trafficlight::{traffic_light_color_loss, traffic_light_luminance_loss, TlRegionMasks};

/// Input files of a loss evaluation. Relative paths resolve against the
/// manifest's directory.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LossManifest {
    pub x_ra: Option<PathBuf>,
    pub x_rb: Option<PathBuf>,
    pub x_fa: Option<PathBuf>,
    pub x_fb: Option<PathBuf>,
    pub x_rec_a: Option<PathBuf>,
    pub x_ab_mix: Option<PathBuf>,
    pub x_ba_mix: Option<PathBuf>,
    pub labels_a: Option<PathBuf>,
    pub labels_b: Option<PathBuf>,
    pub q_ao: Option<PathBuf>,
    pub q_bo: Option<PathBuf>,
    pub q_bf: Option<PathBuf>,
}

impl LossManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io { path: path.to_path_buf(), message: e.to_string() })?;
        let mut m: LossManifest =
            toml::from_str(&text).map_err(|e| Error::Parse { path: path.to_path_buf(), message: e.to_string() })?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in m.paths_mut() {
            if let Some(p) = p.as_mut() {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        Ok(m)
    }

    fn paths_mut(&mut self) -> [&mut Option<PathBuf>; 12] {
        [
            &mut self.x_ra,
            &mut self.x_rb,
            &mut self.x_fa,
            &mut self.x_fb,
            &mut self.x_rec_a,
            &mut self.x_ab_mix,
            &mut self.x_ba_mix,
            &mut self.labels_a,
            &mut self.labels_b,
            &mut self.q_ao,
            &mut self.q_bo,
            &mut self.q_bf,
        ]
    }
}

/// Loaded manifest inputs.
#[derive(Debug, Default)]
pub struct LossInputs {
    pub x_ra: Option<Image>,
    pub x_rb: Option<Image>,
    pub x_fa: Option<Image>,
    pub x_fb: Option<Image>,
    pub x_rec_a: Option<Image>,
    pub x_ab_mix: Option<Image>,
    pub x_ba_mix: Option<Image>,
    pub labels_a: Option<LabelMap>,
    pub labels_b: Option<LabelMap>,
    pub q_ao: Option<BinaryMask>,
    pub q_bo: Option<BinaryMask>,
    pub q_bf: Option<BinaryMask>,
}

fn load<T>(p: &Option<PathBuf>, f: fn(&Path) -> Result<T>) -> Result<Option<T>> {
    p.as_deref().map(f).transpose()
}

impl LossInputs {
    pub fn read(m: &LossManifest) -> Result<Self> {
        Ok(LossInputs {
            x_ra: load(&m.x_ra, read_image)?,
            x_rb: load(&m.x_rb, read_image)?,
            x_fa: load(&m.x_fa, read_image)?,
            x_fb: load(&m.x_fb, read_image)?,
            x_rec_a: load(&m.x_rec_a, read_image)?,
            x_ab_mix: load(&m.x_ab_mix, read_image)?,
            x_ba_mix: load(&m.x_ba_mix, read_image)?,
            labels_a: load(&m.labels_a, read_labels)?,
            labels_b: load(&m.labels_b, read_labels)?,
            q_ao: load(&m.q_ao, read_mask)?,
            q_bo: load(&m.q_bo, read_mask)?,
            q_bf: load(&m.q_bf, read_mask)?,
        })
    }
}

/// Evaluated terms plus a reason for every skipped one.
#[derive(Debug, Clone, Default)]
pub struct LossEvaluation {
    pub terms: LossTerms,
    pub skipped: Vec<(&'static str, String)>,
}

fn missing(names: &[(&str, bool)]) -> Option<String> {
    let absent: Vec<&str> = names.iter().filter(|(_, ok)| !ok).map(|(n, _)| *n).collect();
    (!absent.is_empty()).then(|| format!("missing input(s): {}", absent.join(", ")))
}

/// Evaluates every term whose inputs are present. Input errors (empty
/// regions, mismatched shapes) skip the affected term with a reason.
pub fn evaluate(inputs: &LossInputs, cfg: &RunConfig) -> LossEvaluation {
    let w = &cfg.weights;
    let cats = &cfg.categories;
    let mut ev = LossEvaluation::default();
    let record = |ev: &mut LossEvaluation, names: &[&'static str], r: Result<Vec<f64>>| match r {
        Ok(vals) => {
            for (n, v) in names.iter().zip(vals) {
                let slot = match *n {
                    "sla" => &mut ev.terms.sla,
                    "tla_cos" => &mut ev.terms.tla_cos,
                    "abc" => &mut ev.terms.abc,
                    "cbc" => &mut ev.terms.cbc,
                    "ac_a" => &mut ev.terms.ac_a,
                    "ac_b" => &mut ev.terms.ac_b,
                    "tll" => &mut ev.terms.tll,
                    _ => &mut ev.terms.tlc,
                };
                *slot = Some(v);
            }
        }
        Err(e) => {
            for n in names {
                ev.skipped.push((n, e.to_string()));
            }
        }
    };
    let gate = |need: &[(&str, bool)]| missing(need).map(Error::MissingInput);

    let abc_names = ["sla", "tla_cos", "abc"];
    let r = match (&inputs.x_fb, &inputs.x_ra, &inputs.labels_a) {
        (Some(x_fb), Some(x_ra), Some(la)) => (|| {
            let inp = ArtifactInputs {
                x_fb,
                x_ra,
                streetlight: &la.mask_of(cats.streetlight_id),
                traffic_light: &la.mask_of(cats.traffic_light_id),
                vegetation: &la.mask_of(cats.vegetation_id),
            };
            let t = artifact_bias_correction_terms(&inp, &MeanAbsGradientGap, w)?;
            Ok(vec![t.sla, t.tla_cos, t.abc])
        })(),
        _ => Err(gate(&[
            ("x_fb", inputs.x_fb.is_some()),
            ("x_ra", inputs.x_ra.is_some()),
            ("labels_a", inputs.labels_a.is_some()),
        ])
        .expect("some input is missing")),
    };
    record(&mut ev, &abc_names, r);

    let r = match (&inputs.x_rec_a, &inputs.x_ra, &inputs.labels_a) {
        (Some(rec), Some(x_ra), Some(la)) => {
            color_bias_correction_loss(&la.mask_of_any(&cats.soc_set), rec, x_ra, w).map(|v| vec![v])
        }
        _ => Err(gate(&[
            ("x_rec_a", inputs.x_rec_a.is_some()),
            ("x_ra", inputs.x_ra.is_some()),
            ("labels_a", inputs.labels_a.is_some()),
        ])
        .expect("some input is missing")),
    };
    record(&mut ev, &["cbc"], r);

    let r = match (&inputs.q_ao, &inputs.x_ab_mix, &inputs.x_rb) {
        (Some(q), Some(mix), Some(x_rb)) => appearance_consistency_a(q, mix, x_rb, w).map(|v| vec![v]),
        _ => Err(gate(&[
            ("q_ao", inputs.q_ao.is_some()),
            ("x_ab_mix", inputs.x_ab_mix.is_some()),
            ("x_rb", inputs.x_rb.is_some()),
        ])
        .expect("some input is missing")),
    };
    record(&mut ev, &["ac_a"], r);

    let r = match (&inputs.q_bo, &inputs.x_ba_mix, &inputs.x_ra, &inputs.x_rb) {
        (Some(q_bo), Some(mix), Some(x_ra), Some(x_rb)) => (|| {
            let pasted = match &inputs.q_bf {
                Some(q_bf) => q_bo.union(q_bf)?,
                None => q_bo.clone(),
            };
            let v = appearance_consistency_b(q_bo, &pasted.complement(), mix, x_ra, x_rb, &SobelSmoothL1, w)?;
            Ok(vec![v])
        })(),
        _ => Err(gate(&[
            ("q_bo", inputs.q_bo.is_some()),
            ("x_ba_mix", inputs.x_ba_mix.is_some()),
            ("x_ra", inputs.x_ra.is_some()),
            ("x_rb", inputs.x_rb.is_some()),
        ])
        .expect("some input is missing")),
    };
    record(&mut ev, &["ac_b"], r);

    let r = match (&inputs.x_fa, &inputs.x_rb, &inputs.labels_b) {
        (Some(x_fa), Some(x_rb), Some(lb)) => (|| {
            let masks = TlRegionMasks::from_thermal(x_rb, &lb.mask_of(cats.traffic_light_id))?;
            Ok(vec![traffic_light_luminance_loss(x_fa, &masks)?])
        })(),
        _ => Err(gate(&[
            ("x_fa", inputs.x_fa.is_some()),
            ("x_rb", inputs.x_rb.is_some()),
            ("labels_b", inputs.labels_b.is_some()),
        ])
        .expect("some input is missing")),
    };
    record(&mut ev, &["tll"], r);

    let r = match (&inputs.x_ra, &inputs.x_fa, &inputs.x_rb, &inputs.labels_a, &inputs.labels_b) {
        (Some(x_ra), Some(x_fa), Some(x_rb), Some(la), Some(lb)) => (|| {
            let p = &cfg.traffic_light;
            let m_ra = TlRegionMasks::from_color(x_ra, &la.mask_of(cats.traffic_light_id), p)?;
            let m_fa = TlRegionMasks::from_thermal(x_rb, &lb.mask_of(cats.traffic_light_id))?;
            Ok(vec![traffic_light_color_loss(x_ra, x_fa, &m_ra, &m_fa, p)?])
        })(),
        _ => Err(gate(&[
            ("x_ra", inputs.x_ra.is_some()),
            ("x_fa", inputs.x_fa.is_some()),
            ("x_rb", inputs.x_rb.is_some()),
            ("labels_a", inputs.labels_a.is_some()),
            ("labels_b", inputs.labels_b.is_some()),
        ])
        .expect("some input is missing")),
    };
    record(&mut ev, &["tlc"], r);
    ev
}

/// JSON report with a fixed key order; skipped terms read "skipped".
pub fn report_json(ev: &LossEvaluation) -> Value {
    let t = &ev.terms;
    let total = aggregate(t).ok().map(|r| r.total_partial);
    let mut map = Map::new();
    for (k, v) in [
        ("sla", t.sla),
        ("tla_cos", t.tla_cos),
        ("abc", t.abc),
        ("cbc", t.cbc),
        ("ac_a", t.ac_a),
        ("ac_b", t.ac_b),
        ("tll", t.tll),
        ("tlc", t.tlc),
        ("total_partial", total),
    ] {
        map.insert(k.to_string(), v.map_or_else(|| Value::from("skipped"), Value::from));
    }
    Value::Object(map)
}

pub fn run_loss(ctx: &Context, manifest: &Path) -> Result<Value> {
    let m = LossManifest::load(manifest)?;
    let inputs = LossInputs::read(&m)?;
    let ev = evaluate(&inputs, &ctx.config);
    for (name, reason) in &ev.skipped {
        eprintln!("skipped {name}: {reason}");
    }
    let report = report_json(&ev);
    write_json(&ctx.out("losses.json"), &report)?;
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    Ok(report)
}
