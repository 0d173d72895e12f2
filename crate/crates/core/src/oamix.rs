//! Occlusion-aware mixing of small-object regions from a fake image into a
//! real image of the same domain.
//!
//! The pasted set is built per category from connected regions of the fake
//! image's label map. A region is pasted only when it is large enough, does
//! not overlap any foreground object of the real image, and (for vehicles)
//! touches the real image's road. The same selection runs on the horizontally
//! mirrored fake frame; mirrored regions fill in wherever the original ones
//! do not already paste. In the thermal domain the pasted pixels are rescaled
//! so their mean matches the real frame's road temperature.

use rand::Rng;
use serde::Serialize;

use crate::categories::CategoryConfig;
use crate::error::{Error, Result};
use crate::imagecore::{connected_components, masked_mean, BBox, BinaryMask, ConnectedRegion, Image, LabelMap};

/// Output of one mixing step.
#[derive(Debug, Clone, PartialEq)]
pub struct MixResult {
    pub mixed: Image,
    /// Regions pasted from the fake frame as-is.
    pub q_orig: BinaryMask,
    /// Regions pasted from the mirrored fake frame (may overlap `q_orig`).
    pub q_flip: BinaryMask,
    /// Pixels kept from the real frame.
    pub context: BinaryMask,
    /// Luminance adjustment applied to pasted pixels; 1 for the color domain.
    pub ala_factor: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionOutcome {
    Pasted,
    TooSmall,
    OccludesObject,
    VehicleOffRoad,
}

/// Why a candidate region was or was not pasted.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionDecision {
    pub category: u8,
    pub area: usize,
    pub top: usize,
    pub left: usize,
    pub height: usize,
    pub width: usize,
    pub mirrored: bool,
    pub outcome: RegionOutcome,
}

/// Foreground-object and road masks of a real frame.
pub fn object_and_road_masks(labels: &LabelMap, cfg: &CategoryConfig) -> (BinaryMask, BinaryMask) {
    (labels.mask_of_any(&cfg.object_set), labels.mask_of(cfg.road_id))
}

fn classify(
    region: &ConnectedRegion,
    obj: &BinaryMask,
    road: &BinaryMask,
    cfg: &CategoryConfig,
    threshold: usize,
) -> Result<RegionOutcome> {
    if region.area <= threshold {
        return Ok(RegionOutcome::TooSmall);
    }
    if region.mask.intersects(obj)? {
        return Ok(RegionOutcome::OccludesObject);
    }
    if cfg.is_vehicle(region.category) && !region.mask.intersects(road)? {
        return Ok(RegionOutcome::VehicleOffRoad);
    }
    Ok(RegionOutcome::Pasted)
}

/// Evaluates every small-object region of `fake_labels` against the
/// real frame's object and road masks.
pub fn select_regions(
    fake_labels: &LabelMap,
    obj: &BinaryMask,
    road: &BinaryMask,
    cfg: &CategoryConfig,
    mirrored: bool,
) -> Result<Vec<(ConnectedRegion, RegionDecision)>> {
    let dims = fake_labels.dims();
    dims.ensure_same(obj.dims())?;
    dims.ensure_same(road.dims())?;
    let threshold = cfg.area_threshold.for_frame(dims);
    let mut out = Vec::new();
    for &category in &cfg.soc_set {
        for region in connected_components(&fake_labels.mask_of(category), category) {
            let outcome = classify(&region, obj, road, cfg, threshold)?;
            let BBox { top, left, height, width } = region.bbox;
            let decision = RegionDecision { category, area: region.area, top, left, height, width, mirrored, outcome };
            out.push((region, decision));
        }
    }
    Ok(out)
}

/// Union of all pasteable small-object regions of `fake_labels`.
pub fn build_mixing_mask(
    fake_labels: &LabelMap,
    obj: &BinaryMask,
    road: &BinaryMask,
    cfg: &CategoryConfig,
) -> Result<BinaryMask> {
    let mut q = BinaryMask::empty(fake_labels.dims());
    for (region, decision) in select_regions(fake_labels, obj, road, cfg, false)? {
        if decision.outcome == RegionOutcome::Pasted {
            q = q.union(&region.mask)?;
        }
    }
    Ok(q)
}

/// Mixing masks for the fake frame and its horizontal mirror, both checked
/// against the un-mirrored real masks.
pub fn build_mixing_masks(
    fake_labels: &LabelMap,
    obj: &BinaryMask,
    road: &BinaryMask,
    cfg: &CategoryConfig,
) -> Result<(BinaryMask, BinaryMask)> {
    let q_o = build_mixing_mask(fake_labels, obj, road, cfg)?;
    let q_f = build_mixing_mask(&fake_labels.flip_horizontal(), obj, road, cfg)?;
    Ok((q_o, q_f))
}

/// Pasted object layer: fake pixels on `q_o`, mirrored fake pixels on
/// `q_f \ q_o`, zero elsewhere.
pub fn pasted_objects(fake: &Image, q_o: &BinaryMask, q_f: &BinaryMask) -> Result<Image> {
    fake.dims().ensure_same(q_o.dims())?;
    fake.dims().ensure_same(q_f.dims())?;
    let mirrored = fake.flip_horizontal();
    let ch = fake.channels();
    let mut data = vec![0.0; fake.data().len()];
    for (i, px) in data.chunks_exact_mut(ch).enumerate() {
        if q_o.bits()[i] {
            px.copy_from_slice(fake.pixel_at(i));
        } else if q_f.bits()[i] {
            px.copy_from_slice(mirrored.pixel_at(i));
        }
    }
    Ok(Image::from_parts(fake.dims(), ch, data))
}

fn context_mask(q_o: &BinaryMask, q_f: &BinaryMask) -> Result<BinaryMask> {
    Ok(q_o.union(q_f)?.complement())
}

/// Color-domain mix: pasted objects over the real frame, no luminance change.
pub fn compose_mix_a(x_fa: &Image, x_ra: &Image, q_o: &BinaryMask, q_f: &BinaryMask) -> Result<MixResult> {
    x_fa.ensure_same_shape(x_ra)?;
    let objects = pasted_objects(x_fa, q_o, q_f)?;
    let context = context_mask(q_o, q_f)?;
    let ch = x_ra.channels();
    let mut data = objects.into_data();
    for i in context.set_indices() {
        data[i * ch..(i + 1) * ch].copy_from_slice(x_ra.pixel_at(i));
    }
    Ok(MixResult {
        mixed: Image::from_parts(x_ra.dims(), ch, data),
        q_orig: q_o.clone(),
        q_flip: q_f.clone(),
        context,
        ala_factor: 1.0,
    })
}

/// Luminance adjustment factor: road mean of the real frame over the mean
/// of the pasted object pixels.
pub fn ala_factor(objects: &Image, pasted: &BinaryMask, x_rb: &Image, road_b: &BinaryMask) -> Result<f64> {
    let road_mean = masked_mean(x_rb, road_b).map_err(|_| Error::EmptyMask("road of the real thermal frame"))?;
    let obj_mean = masked_mean(objects, pasted).map_err(|_| Error::EmptyMask("pasted objects"))?;
    if obj_mean <= 0.0 {
        return Err(Error::EmptyMask("pasted objects have zero mean"));
    }
    Ok(road_mean / obj_mean)
}

/// Thermal-domain mix from an already composed object layer.
pub fn compose_mix_b_from_objects(
    objects: &Image,
    x_rb: &Image,
    q_o: &BinaryMask,
    q_f: &BinaryMask,
    road_b: &BinaryMask,
) -> Result<MixResult> {
    objects.ensure_channels(1)?;
    x_rb.ensure_channels(1)?;
    objects.ensure_same_shape(x_rb)?;
    x_rb.dims().ensure_same(road_b.dims())?;
    let context = context_mask(q_o, q_f)?;
    let pasted = context.complement();
    if pasted.is_empty() {
        return Ok(MixResult {
            mixed: x_rb.clone(),
            q_orig: q_o.clone(),
            q_flip: q_f.clone(),
            context,
            ala_factor: 1.0,
        });
    }
    let factor = ala_factor(objects, &pasted, x_rb, road_b)?;
    let data = (0..x_rb.data().len())
        .map(|i| if context.bits()[i] { x_rb.data()[i] } else { (factor * objects.data()[i]).clamp(0.0, 1.0) })
        .collect();
    Ok(MixResult {
        mixed: Image::from_parts(x_rb.dims(), 1, data),
        q_orig: q_o.clone(),
        q_flip: q_f.clone(),
        context,
        ala_factor: factor,
    })
}

/// Thermal-domain mix with adaptive luminance adjustment.
pub fn compose_mix_b(
    x_fb: &Image,
    x_rb: &Image,
    q_o: &BinaryMask,
    q_f: &BinaryMask,
    road_b: &BinaryMask,
) -> Result<MixResult> {
    x_fb.ensure_channels(1)?;
    x_fb.ensure_same_shape(x_rb)?;
    let objects = pasted_objects(x_fb, q_o, q_f)?;
    compose_mix_b_from_objects(&objects, x_rb, q_o, q_f, road_b)
}

/// Indices (into the region list) of the instances that were flipped.
pub type FlipRecord = Vec<usize>;

fn flip_bbox<T: Copy>(data: &mut [T], width: usize, channels: usize, bbox: BBox) {
    let row_span = bbox.width * channels;
    for k in 0..bbox.height / 2 {
        let a = ((bbox.top + k) * width + bbox.left) * channels;
        let b = ((bbox.bottom() - k) * width + bbox.left) * channels;
        for j in 0..row_span {
            data.swap(a + j, b + j);
        }
    }
}

/// Flips each region's bounding box of `img` upside down with probability
/// `p_flip`, drawing one Bernoulli sample per region in order.
pub fn flip_tl_instances<R: Rng + ?Sized>(
    img: &Image,
    regions: &[ConnectedRegion],
    rng: &mut R,
    p_flip: f64,
) -> Result<(Image, FlipRecord)> {
    if !(0.0..=1.0).contains(&p_flip) {
        return Err(Error::InvalidParameter(format!("p_flip must lie in [0, 1], got {p_flip}")));
    }
    let record: FlipRecord =
        regions.iter().enumerate().filter_map(|(i, _)| rng.gen_bool(p_flip).then_some(i)).collect();
    Ok((apply_flips(img, regions, &record)?, record))
}

/// Replays a flip record on an image.
pub fn apply_flips(img: &Image, regions: &[ConnectedRegion], record: &[usize]) -> Result<Image> {
    let (width, ch) = (img.width(), img.channels());
    let mut data = img.data().to_vec();
    for &i in record {
        let region = regions.get(i).ok_or_else(|| Error::InvalidParameter(format!("flip record names region {i}")))?;
        img.dims().ensure_same(region.mask.dims())?;
        flip_bbox(&mut data, width, ch, region.bbox);
    }
    Ok(Image::from_parts(img.dims(), ch, data))
}

/// Replays a flip record on a label map.
pub fn apply_flips_to_labels(labels: &LabelMap, regions: &[ConnectedRegion], record: &[usize]) -> Result<LabelMap> {
    let dims = labels.dims();
    let mut ids = labels.ids().to_vec();
    for &i in record {
        let region = regions.get(i).ok_or_else(|| Error::InvalidParameter(format!("flip record names region {i}")))?;
        flip_bbox(&mut ids, dims.width, 1, region.bbox);
    }
    LabelMap::new(dims.height, dims.width, ids)
}

/// Replays a flip record on a mask.
pub fn apply_flips_to_mask(mask: &BinaryMask, regions: &[ConnectedRegion], record: &[usize]) -> Result<BinaryMask> {
    let dims = mask.dims();
    let mut bits = mask.bits().to_vec();
    for &i in record {
        let region = regions.get(i).ok_or_else(|| Error::InvalidParameter(format!("flip record names region {i}")))?;
        flip_bbox(&mut bits, dims.width, 1, region.bbox);
    }
    BinaryMask::new(dims.height, dims.width, bits)
}

/// Label map matching a mix: fake labels on `q_o`, mirrored fake labels on
/// `q_f \ q_o`, real labels on the context.
pub fn mixed_labels(fake: &LabelMap, real: &LabelMap, q_o: &BinaryMask, q_f: &BinaryMask) -> Result<LabelMap> {
    let dims = real.dims();
    dims.ensure_same(fake.dims())?;
    dims.ensure_same(q_o.dims())?;
    dims.ensure_same(q_f.dims())?;
    let mirrored = fake.flip_horizontal();
    let ids = (0..dims.len())
        .map(|i| {
            if q_o.bits()[i] {
                fake.ids()[i]
            } else if q_f.bits()[i] {
                mirrored.ids()[i]
            } else {
                real.ids()[i]
            }
        })
        .collect();
    LabelMap::new(dims.height, dims.width, ids)
}
