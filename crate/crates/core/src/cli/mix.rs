use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{same_size, write_json, Context};
use crate::error::Result;
use crate::imagecore::{connected_components, BBox, BinaryMask, ConnectedRegion, LabelMap};
use crate::io::{read_image, read_labels, write_image, write_mask};
use crate::oamix::{
    apply_flips_to_mask, build_mixing_masks, compose_mix_a, compose_mix_b, flip_tl_instances, mixed_labels,
    object_and_road_masks, select_regions, RegionDecision,
};
use crate::scheduler::Domain;
use crate::trafficlight::convert_flipped_targets;

#[derive(Debug, Clone)]
pub struct MixInputs {
    pub real_image: PathBuf,
    pub fake_image: PathBuf,
    pub real_labels: PathBuf,
    pub fake_labels: PathBuf,
    pub domain: Domain,
    pub target: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FlippedInstance {
    pub top: usize,
    pub left: usize,
    pub height: usize,
    pub width: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct MixSummary {
    pub domain: String,
    pub seed: u64,
    pub height: usize,
    pub width: usize,
    pub ala_factor: f64,
    pub pasted_pixels: usize,
    pub regions: Vec<RegionDecision>,
    pub flipped: Vec<FlippedInstance>,
}

/// Traffic-light instances lying inside the pasted area of a mix.
fn pasted_lights(labels: &LabelMap, tl_id: u8, pasted: &BinaryMask) -> Result<Vec<ConnectedRegion>> {
    let lights = labels.mask_of(tl_id).intersection(pasted)?;
    Ok(connected_components(&lights, tl_id))
}

pub fn run_mix(ctx: &Context, inputs: &MixInputs) -> Result<MixSummary> {
    let cfg = &ctx.config;
    let cats = &cfg.categories;
    let x_r = read_image(&inputs.real_image)?;
    let x_f = read_image(&inputs.fake_image)?;
    let l_r = read_labels(&inputs.real_labels)?;
    let l_f = read_labels(&inputs.fake_labels)?;
    same_size(&inputs.real_image, x_r.dims(), &inputs.fake_image, x_f.dims())?;
    same_size(&inputs.real_image, x_r.dims(), &inputs.real_labels, l_r.dims())?;
    same_size(&inputs.real_image, x_r.dims(), &inputs.fake_labels, l_f.dims())?;

    let (obj, road) = object_and_road_masks(&l_r, cats);
    let mut regions: Vec<RegionDecision> =
        select_regions(&l_f, &obj, &road, cats, false)?.into_iter().map(|(_, d)| d).collect();
    regions.extend(select_regions(&l_f.flip_horizontal(), &obj, &road, cats, true)?.into_iter().map(|(_, d)| d));
    let (q_o, q_f) = build_mixing_masks(&l_f, &obj, &road, cats)?;
    let labels = mixed_labels(&l_f, &l_r, &q_o, &q_f)?;
    let mut result = match inputs.domain {
        Domain::A => compose_mix_a(&x_f, &x_r, &q_o, &q_f)?,
        Domain::B => compose_mix_b(&x_f, &x_r, &q_o, &q_f, &road)?,
    };

    let mut flipped = Vec::new();
    let mut target = match &inputs.target {
        Some(p) => {
            let t = read_image(p)?;
            same_size(&inputs.real_image, x_r.dims(), p, t.dims())?;
            Some(t)
        }
        None => None,
    };
    if inputs.domain == Domain::B {
        let pasted = result.context.complement();
        let lights = pasted_lights(&labels, cats.traffic_light_id, &pasted)?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let (img, record) = flip_tl_instances(&result.mixed, &lights, &mut rng, cfg.mix.p_flip)?;
        result.mixed = img;
        result.q_orig = apply_flips_to_mask(&result.q_orig, &lights, &record)?;
        result.q_flip = apply_flips_to_mask(&result.q_flip, &lights, &record)?;
        result.context = apply_flips_to_mask(&result.context, &lights, &record)?;
        if let Some(t) = target.take() {
            target = Some(convert_flipped_targets(&t, &lights, &record, &cfg.traffic_light)?);
        }
        for &i in &record {
            let BBox { top, left, height, width } = lights[i].bbox;
            flipped.push(FlippedInstance { top, left, height, width });
        }
    }

    write_image(&ctx.out("mixed.png"), &result.mixed)?;
    write_mask(&ctx.out("q_orig.png"), &result.q_orig)?;
    write_mask(&ctx.out("q_flip.png"), &result.q_flip)?;
    write_mask(&ctx.out("context.png"), &result.context)?;
    if let Some(t) = &target {
        write_image(&ctx.out("target.png"), t)?;
    }
    let d = x_r.dims();
    let summary = MixSummary {
        domain: inputs.domain.to_string(),
        seed: cfg.seed,
        height: d.height,
        width: d.width,
        ala_factor: result.ala_factor,
        pasted_pixels: d.len() - result.context.popcount(),
        regions,
        flipped,
    };
    write_json(&ctx.out("mix.json"), &summary)?;
    Ok(summary)
}
