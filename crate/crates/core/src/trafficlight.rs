//! Traffic-light appearance: luminance ordering, position-aware color
//! features, and red/green color conversion of instances.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imagecore::{
    connected_components, masked_mean, masked_min, mean, rgb_pixel_to_hsv, to_grayscale, BinaryMask, ConnectedRegion,
    Image, LabelMap, UNCERTAIN_ID,
};

/// Guard added to a zero luminance denominator.
pub const LUMINANCE_EPS: f64 = 1e-6;

/// Half-open hue interval `[start, end)` on the unit hue circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HueRange {
    pub start: f64,
    pub end: f64,
}

impl HueRange {
    pub const fn new(start: f64, end: f64) -> Self {
        HueRange { start, end }
    }

    pub fn contains(&self, hue: f64) -> bool {
        hue >= self.start && hue < self.end
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TlColorParams {
    /// Floor added to the color-distance weight denominator.
    pub tau: f64,
    /// Instances taller than `aspect_threshold * width` are flipped before conversion.
    pub aspect_threshold: f64,
    pub red_hue_ranges: Vec<HueRange>,
    pub green_hue_ranges: Vec<HueRange>,
    pub min_saturation: f64,
    pub min_value: f64,
}

impl Default for TlColorParams {
    fn default() -> Self {
        TlColorParams {
            tau: 0.05,
            aspect_threshold: 2.0,
            red_hue_ranges: vec![HueRange::new(0.0, 1.0 / 18.0), HueRange::new(17.0 / 18.0, 1.0)],
            green_hue_ranges: vec![HueRange::new(2.0 / 9.0, 4.0 / 9.0)],
            min_saturation: 0.3,
            min_value: 0.3,
        }
    }
}

impl TlColorParams {
    pub fn validate(&self) -> Result<()> {
        if self.tau.is_nan() || self.tau <= 0.0 {
            return Err(Error::InvalidParameter(format!("tau must be positive, got {}", self.tau)));
        }
        if self.aspect_threshold.is_nan() || self.aspect_threshold <= 0.0 {
            return Err(Error::InvalidParameter("aspect_threshold must be positive".into()));
        }
        for r in self.red_hue_ranges.iter().chain(&self.green_hue_ranges) {
            if !(0.0..=1.0).contains(&r.start) || !(0.0..=1.0).contains(&r.end) || r.start >= r.end {
                return Err(Error::InvalidParameter(format!("bad hue range [{}, {})", r.start, r.end)));
            }
        }
        let overlap = self
            .red_hue_ranges
            .iter()
            .any(|r| self.green_hue_ranges.iter().any(|g| r.start < g.end && g.start < r.end));
        if overlap {
            return Err(Error::InvalidParameter("red and green hue ranges overlap".into()));
        }
        Ok(())
    }

    fn is_lit(&self, s: f64, v: f64) -> bool {
        s >= self.min_saturation && v >= self.min_value
    }

    fn is_red(&self, h: f64) -> bool {
        self.red_hue_ranges.iter().any(|r| r.contains(h))
    }

    fn is_green(&self, h: f64) -> bool {
        self.green_hue_ranges.iter().any(|r| r.contains(h))
    }
}

/// Bright/dark and upper/lower partitions of a traffic-light mask.
#[derive(Debug, Clone, PartialEq)]
pub struct TlRegionMasks {
    pub bright: BinaryMask,
    pub dark: BinaryMask,
    pub upper: BinaryMask,
    pub lower: BinaryMask,
}

impl TlRegionMasks {
    /// Partitions for a thermal frame: brightness split at the region mean.
    pub fn from_thermal(x_rb: &Image, tl_mask: &BinaryMask) -> Result<Self> {
        let (bright, dark) = bright_dark_masks(x_rb, tl_mask)?;
        let (upper, lower) = split_upper_lower(tl_mask);
        Ok(TlRegionMasks { bright, dark, upper, lower })
    }

    /// Partitions for a color frame: lit pixels found by hue detection.
    pub fn from_color(x_ra: &Image, tl_mask: &BinaryMask, params: &TlColorParams) -> Result<Self> {
        let bright = color_bright_mask(x_ra, tl_mask, params)?;
        let dark = tl_mask.difference(&bright)?;
        let (upper, lower) = split_upper_lower(tl_mask);
        Ok(TlRegionMasks { bright, dark, upper, lower })
    }
}

/// Splits traffic-light pixels at the region's mean luminance; pixels at or
/// above the mean are bright.
pub fn bright_dark_masks(x_rb: &Image, tl_mask: &BinaryMask) -> Result<(BinaryMask, BinaryMask)> {
    let mu = masked_mean(x_rb, tl_mask).map_err(|e| match e {
        Error::EmptyMask(_) => Error::EmptyMask("traffic light"),
        other => other,
    })?;
    let dims = tl_mask.dims();
    let mut bright = BinaryMask::empty(dims);
    let mut dark = BinaryMask::empty(dims);
    for i in tl_mask.set_indices() {
        let (r, c) = (i / dims.width, i % dims.width);
        if x_rb.data()[i] >= mu {
            bright.set(r, c, true);
        } else {
            dark.set(r, c, true);
        }
    }
    Ok((bright, dark))
}

/// Splits each traffic-light instance at its bounding-box vertical center:
/// rows strictly above the center are upper, the rest lower.
pub fn split_upper_lower(tl_mask: &BinaryMask) -> (BinaryMask, BinaryMask) {
    let dims = tl_mask.dims();
    let mut upper = BinaryMask::empty(dims);
    let mut lower = BinaryMask::empty(dims);
    for region in connected_components(tl_mask, 0) {
        // Doubled coordinates keep the half-row center integral.
        let center2 = 2 * region.bbox.top + region.bbox.height - 1;
        for i in region.mask.set_indices() {
            let (r, c) = (i / dims.width, i % dims.width);
            if 2 * r < center2 {
                upper.set(r, c, true);
            } else {
                lower.set(r, c, true);
            }
        }
    }
    (upper, lower)
}

/// Red and green lit pixels of a color crop.
pub fn detect_red_green(instance: &Image, params: &TlColorParams) -> Result<(BinaryMask, BinaryMask)> {
    instance.ensure_channels(3)?;
    let dims = instance.dims();
    let mut red = Vec::with_capacity(dims.len());
    let mut green = Vec::with_capacity(dims.len());
    for p in instance.data().chunks_exact(3) {
        let [h, s, v] = rgb_pixel_to_hsv(p[0], p[1], p[2]);
        let lit = params.is_lit(s, v);
        red.push(lit && params.is_red(h));
        green.push(lit && params.is_green(h));
    }
    Ok((BinaryMask::new(dims.height, dims.width, red)?, BinaryMask::new(dims.height, dims.width, green)?))
}

// A hue rotation by +1/3 in hexcone HSV with S and V fixed is the cyclic
// channel permutation (r, g, b) -> (b, r, g); -1/3 is (r, g, b) -> (g, b, r).
fn rotate_hue_forward(p: &mut [f64]) {
    p.rotate_right(1);
}

fn rotate_hue_backward(p: &mut [f64]) {
    p.rotate_left(1);
}

/// Color conversion of a traffic-light crop: tall crops are flipped upside
/// down, then the dominant lit color is swapped (red to green or green to
/// red) by a one-third hue rotation. Saturation and value are untouched.
pub fn convert_color(instance: &Image, params: &TlColorParams) -> Result<Image> {
    instance.ensure_channels(3)?;
    let aspect = instance.height() as f64 / instance.width() as f64;
    let oriented = if aspect > params.aspect_threshold { instance.flip_vertical() } else { instance.clone() };
    let (red, green) = detect_red_green(&oriented, params)?;
    let (targets, rotate): (&BinaryMask, fn(&mut [f64])) =
        if red.popcount() > green.popcount() { (&red, rotate_hue_forward) } else { (&green, rotate_hue_backward) };
    let mut data = oriented.into_data();
    for i in targets.set_indices() {
        rotate(&mut data[i * 3..i * 3 + 3]);
    }
    Image::new(instance.height(), instance.width(), 3, data)
}

/// Union over instances of the lit (red or green) pixels of a color frame.
pub fn color_bright_mask(x_ra: &Image, tl_mask: &BinaryMask, params: &TlColorParams) -> Result<BinaryMask> {
    x_ra.ensure_channels(3)?;
    x_ra.dims().ensure_same(tl_mask.dims())?;
    let mut bright = BinaryMask::empty(x_ra.dims());
    for region in connected_components(tl_mask, 0) {
        let b = region.bbox;
        let crop = x_ra.crop(b.top, b.left, b.height, b.width)?;
        let (red, green) = detect_red_green(&crop, params)?;
        for r in 0..b.height {
            for c in 0..b.width {
                let (fr, fc) = (b.top + r, b.left + c);
                if region.mask.get(fr, fc) && (red.get(r, c) || green.get(r, c)) {
                    bright.set(fr, fc, true);
                }
            }
        }
    }
    Ok(bright)
}

/// Applies the color conversion to the instances named in a flip record,
/// producing the supervision target for vertically flipped instances.
pub fn convert_flipped_targets(
    x_ra: &Image,
    regions: &[ConnectedRegion],
    record: &[usize],
    params: &TlColorParams,
) -> Result<Image> {
    let mut out = x_ra.clone();
    for &i in record {
        let region = regions.get(i).ok_or_else(|| Error::InvalidParameter(format!("flip record names region {i}")))?;
        let b = region.bbox;
        let converted = convert_color(&x_ra.crop(b.top, b.left, b.height, b.width)?, params)?;
        out.paste(&converted, b.top, b.left)?;
    }
    Ok(out)
}

/// Per-channel mean color of a masked region.
#[derive(Debug, Clone, PartialEq)]
pub struct ColorFeature(pub Vec<f64>);

impl ColorFeature {
    pub fn distance(&self, other: &ColorFeature) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    }
}

pub fn mean_color_feature(img: &Image, m: &BinaryMask) -> Result<ColorFeature> {
    img.dims().ensure_same(m.dims())?;
    let n = m.popcount();
    if n == 0 {
        return Err(Error::EmptyMask("color feature region"));
    }
    let ch = img.channels();
    let mut sums = vec![0.0; ch];
    for i in m.set_indices() {
        for (s, v) in sums.iter_mut().zip(img.pixel_at(i)) {
            *s += v;
        }
    }
    Ok(ColorFeature(sums.into_iter().map(|s| s / n as f64).collect()))
}

/// Weight on the lower-lamp distance.
pub fn beta_weight(d_ll: f64, d_lu: f64, tau: f64) -> f64 {
    1.0 / (d_ll.min(d_lu) + tau)
}

/// Distances entering the color loss; `None` where a sub-region is empty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TlColorTerms {
    pub d_uu: Option<f64>,
    pub d_ll: Option<f64>,
    pub d_lu: Option<f64>,
}

impl TlColorTerms {
    /// Upper distance plus weighted lower distance. A missing branch
    /// contributes zero; the weight uses whichever lower distances exist.
    pub fn loss(&self, tau: f64) -> f64 {
        let upper = self.d_uu.unwrap_or(0.0);
        let lower = match (self.d_ll, self.d_lu) {
            (Some(ll), Some(lu)) => beta_weight(ll, lu, tau) * ll,
            (Some(ll), None) => ll / (ll + tau),
            (None, _) => 0.0,
        };
        upper + lower
    }
}

fn optional_feature(img: &Image, a: &BinaryMask, b: &BinaryMask) -> Result<Option<ColorFeature>> {
    let m = a.intersection(b)?;
    if m.is_empty() {
        Ok(None)
    } else {
        mean_color_feature(img, &m).map(Some)
    }
}

pub fn traffic_light_color_terms(
    x_ra: &Image,
    x_fa: &Image,
    masks_ra: &TlRegionMasks,
    masks_fa: &TlRegionMasks,
) -> Result<TlColorTerms> {
    x_ra.ensure_same_shape(x_fa)?;
    let ub_ra = optional_feature(x_ra, &masks_ra.upper, &masks_ra.bright)?;
    let lb_ra = optional_feature(x_ra, &masks_ra.lower, &masks_ra.bright)?;
    let ub_fa = optional_feature(x_fa, &masks_fa.upper, &masks_fa.bright)?;
    let lb_fa = optional_feature(x_fa, &masks_fa.lower, &masks_fa.bright)?;
    let dist = |a: &Option<ColorFeature>, b: &Option<ColorFeature>| match (a, b) {
        (Some(a), Some(b)) => Some(a.distance(b)),
        _ => None,
    };
    Ok(TlColorTerms { d_uu: dist(&ub_fa, &ub_ra), d_ll: dist(&lb_fa, &lb_ra), d_lu: dist(&lb_fa, &ub_ra) })
}

/// Position-aware color loss between a real color frame and a fake one.
/// `masks_ra` partitions the real frame; `masks_fa` the fake frame (which
/// shares the thermal source's layout).
pub fn traffic_light_color_loss(
    x_ra: &Image,
    x_fa: &Image,
    masks_ra: &TlRegionMasks,
    masks_fa: &TlRegionMasks,
    params: &TlColorParams,
) -> Result<f64> {
    Ok(traffic_light_color_terms(x_ra, x_fa, masks_ra, masks_fa)?.loss(params.tau))
}

/// Relative amount by which the dark-lamp mean exceeds the darkest bright
/// pixel in the fake color frame.
pub fn traffic_light_luminance_loss(x_fa: &Image, masks: &TlRegionMasks) -> Result<f64> {
    let gray = to_grayscale(x_fa);
    let delta = masked_min(&gray, &masks.bright).map_err(|_| Error::EmptyMask("bright traffic light"))?;
    let mu = masked_mean(&gray, &masks.dark).map_err(|_| Error::EmptyMask("dark traffic light"))?;
    Ok((mu - delta).max(0.0) / delta.max(LUMINANCE_EPS))
}

/// Marks vegetation pixels brighter than the frame mean as uncertain.
pub fn vegetation_uncertainty_correction(labels: &LabelMap, x_fb: &Image, vegetation_id: u8) -> Result<LabelMap> {
    x_fb.ensure_channels(1)?;
    labels.dims().ensure_same(x_fb.dims())?;
    let mu = mean(x_fb);
    let ids = labels
        .ids()
        .iter()
        .zip(x_fb.data())
        .map(|(&id, &v)| if id == vegetation_id && v > mu { UNCERTAIN_ID } else { id })
        .collect();
    LabelMap::new(labels.dims().height, labels.dims().width, ids)
}
