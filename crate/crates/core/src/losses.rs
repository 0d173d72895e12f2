//! Forward evaluation of the bias-correction and appearance-consistency
//! losses and their aggregate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imagecore::{
    canny_edges_auto, masked_mean, masked_min, smooth_l1_loss, sobel_gradient, ssim_loss, to_grayscale, BinaryMask,
    Image,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LossWeights {
    /// Weight of the smooth-L1 term inside the masked image distance.
    pub lambda_sl1: f64,
    /// Weight of the structured-gradient penalty in the artifact loss.
    pub lambda_sga: f64,
    /// Required margin between streetlight and vegetation temperature.
    pub theta_tem: f64,
    /// Cosine-similarity target for traffic-light luminance patterns.
    pub theta_sim: f64,
    /// High Canny threshold for the edge map fed to the structured-gradient penalty.
    pub edge_high: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights { lambda_sl1: 10.0, lambda_sga: 0.5, theta_tem: 0.25, theta_sim: 0.8, edge_high: 0.3 }
    }
}

impl LossWeights {
    pub fn validate(&self) -> Result<()> {
        let all = [self.lambda_sl1, self.lambda_sga, self.theta_tem, self.theta_sim];
        if all.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidParameter("loss weights must be finite and non-negative".into()));
        }
        if self.theta_sim > 1.0 {
            return Err(Error::InvalidParameter(format!("theta_sim must lie in [0, 1], got {}", self.theta_sim)));
        }
        if !(0.0..=1.0).contains(&self.edge_high) {
            return Err(Error::InvalidParameter(format!("edge_high must lie in [0, 1], got {}", self.edge_high)));
        }
        Ok(())
    }
}

/// A replaceable penalty comparing two images (or maps).
///
/// Implementations must be deterministic, non-negative, and return 0 for
/// identical inputs.
pub trait PenaltyHook {
    fn penalty(&self, a: &Image, b: &Image) -> Result<f64>;
}

impl<F> PenaltyHook for F
where
    F: Fn(&Image, &Image) -> Result<f64>,
{
    fn penalty(&self, a: &Image, b: &Image) -> Result<f64> {
        self(a, b)
    }
}

/// Stand-in structured-gradient penalty: mean absolute difference between a
/// gradient map and an edge map. Not the original formulation.
#[derive(Debug, Clone, Copy, Default)]
pub struct MeanAbsGradientGap;

impl PenaltyHook for MeanAbsGradientGap {
    fn penalty(&self, gradient: &Image, edges: &Image) -> Result<f64> {
        gradient.ensure_same_shape(edges)?;
        let sum: f64 = gradient.data().iter().zip(edges.data()).map(|(a, b)| (a - b).abs()).sum();
        Ok(sum / gradient.data().len() as f64)
    }
}

/// Stand-in gradient-repair penalty: smooth L1 between the Sobel magnitudes
/// of the (grayscale) inputs. Not the original formulation.
#[derive(Debug, Clone, Copy, Default)]
pub struct SobelSmoothL1;

impl PenaltyHook for SobelSmoothL1 {
    fn penalty(&self, a: &Image, b: &Image) -> Result<f64> {
        let ga = sobel_gradient(&to_grayscale(a))?;
        let gb = sobel_gradient(&to_grayscale(b))?;
        smooth_l1_loss(&ga, &gb)
    }
}

/// A hook that always returns zero.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroPenalty;

impl PenaltyHook for ZeroPenalty {
    fn penalty(&self, _: &Image, _: &Image) -> Result<f64> {
        Ok(0.0)
    }
}

/// Masked image distance: SSIM loss plus weighted smooth L1, both computed
/// on the mask-multiplied images.
pub fn midf(mask: &BinaryMask, rec: &Image, ori: &Image, w: &LossWeights) -> Result<f64> {
    rec.ensure_same_shape(ori)?;
    let rec = rec.masked(mask)?;
    let ori = ori.masked(mask)?;
    Ok(ssim_loss(&rec, &ori)? + w.lambda_sl1 * smooth_l1_loss(&rec, &ori)?)
}

/// Masked image distance over the whole frame.
pub fn global_reconstruction_loss(rec: &Image, ori: &Image, w: &LossWeights) -> Result<f64> {
    midf(&BinaryMask::full(ori.dims()), rec, ori, w)
}

/// Bright part of a streetlight region: pixels at or above the region's mean
/// luminance in `gray`.
pub fn streetlight_bright_mask(gray: &Image, streetlight: &BinaryMask) -> Result<BinaryMask> {
    let mean = masked_mean(gray, streetlight).map_err(|_| Error::EmptyMask("streetlight"))?;
    let bits = streetlight.bits().iter().zip(gray.data()).map(|(&m, &v)| m && v >= mean).collect();
    BinaryMask::new(gray.height(), gray.width(), bits)
}

/// Hinge pushing the darkest bright-streetlight pixel above the vegetation
/// mean by `theta_tem`.
pub fn street_light_luminance_loss(
    x_fb: &Image,
    sl_bright: &BinaryMask,
    veg: &BinaryMask,
    w: &LossWeights,
) -> Result<f64> {
    let veg_mean = masked_mean(x_fb, veg).map_err(|_| Error::EmptyMask("vegetation"))?;
    let sl_min = masked_min(x_fb, sl_bright).map_err(|_| Error::EmptyMask("bright streetlight"))?;
    Ok((veg_mean - sl_min + w.theta_tem).max(0.0))
}

fn centered_region_vector(img: &Image, mask: &BinaryMask) -> Result<Vec<f64>> {
    let mean = masked_mean(img, mask).map_err(|_| Error::EmptyMask("traffic light"))?;
    Ok(img.data().iter().zip(mask.bits()).map(|(&v, &m)| if m { v - mean } else { 0.0 }).collect())
}

/// Cosine similarity between mean-centered traffic-light patterns of the
/// two images; `None` when either pattern is flat.
pub fn traffic_light_pattern_cosine(gray_ra: &Image, x_fb: &Image, tl_mask: &BinaryMask) -> Result<Option<f64>> {
    gray_ra.ensure_channels(1)?;
    gray_ra.ensure_same_shape(x_fb)?;
    let va = centered_region_vector(gray_ra, tl_mask)?;
    let vb = centered_region_vector(x_fb, tl_mask)?;
    let dot: f64 = va.iter().zip(&vb).map(|(a, b)| a * b).sum();
    let na = va.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nb = vb.iter().map(|v| v * v).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Ok(None);
    }
    Ok(Some((dot / (na * nb)).clamp(-1.0, 1.0)))
}

/// Hinge on the cosine similarity of traffic-light luminance patterns.
/// Flat patterns count as cosine 0.
pub fn traffic_light_luminance_adjust_loss(
    gray_ra: &Image,
    x_fb: &Image,
    tl_mask: &BinaryMask,
    w: &LossWeights,
) -> Result<f64> {
    let cos = traffic_light_pattern_cosine(gray_ra, x_fb, tl_mask)?.unwrap_or(0.0);
    Ok((w.theta_sim - cos).max(0.0))
}

/// Inputs to the artifact bias-correction loss.
#[derive(Debug, Clone, Copy)]
pub struct ArtifactInputs<'a> {
    /// Fake thermal image translated from the real color frame.
    pub x_fb: &'a Image,
    /// Real color frame (or its grayscale).
    pub x_ra: &'a Image,
    pub streetlight: &'a BinaryMask,
    pub traffic_light: &'a BinaryMask,
    pub vegetation: &'a BinaryMask,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArtifactTerms {
    pub sla: f64,
    pub tla_cos: f64,
    pub sga: f64,
    pub abc: f64,
}

/// Gradient map of the fake thermal image and edge map of the real color
/// frame, both restricted to the light regions.
pub fn light_region_maps(inputs: &ArtifactInputs<'_>, w: &LossWeights) -> Result<(Image, Image)> {
    let lights = inputs.streetlight.union(inputs.traffic_light)?;
    let gray_ra = to_grayscale(inputs.x_ra);
    let gradient = sobel_gradient(inputs.x_fb)?.masked(&lights)?;
    let edges = canny_edges_auto(&gray_ra, w.edge_high)?.intersection(&lights)?;
    let edge_img =
        Image::from_parts(edges.dims(), 1, edges.bits().iter().map(|&b| if b { 1.0 } else { 0.0 }).collect());
    Ok((gradient, edge_img))
}

pub fn artifact_bias_correction_terms(
    inputs: &ArtifactInputs<'_>,
    sga: &dyn PenaltyHook,
    w: &LossWeights,
) -> Result<ArtifactTerms> {
    inputs.x_fb.ensure_channels(1)?;
    inputs.x_fb.dims().ensure_same(inputs.x_ra.dims())?;
    let gray_ra = to_grayscale(inputs.x_ra);
    let bright = streetlight_bright_mask(&gray_ra, inputs.streetlight)?;
    let sla = street_light_luminance_loss(inputs.x_fb, &bright, inputs.vegetation, w)?;
    let tla_cos = traffic_light_luminance_adjust_loss(&gray_ra, inputs.x_fb, inputs.traffic_light, w)?;
    let (gradient, edges) = light_region_maps(inputs, w)?;
    let sga_value = sga.penalty(&gradient, &edges)?;
    Ok(ArtifactTerms { sla, tla_cos, sga: sga_value, abc: combine_artifact_terms(sla, tla_cos, sga_value, w) })
}

/// Weighted sum of the streetlight hinge, the traffic-light cosine hinge
/// and the structured-gradient penalty.
pub fn combine_artifact_terms(sla: f64, tla_cos: f64, sga: f64, w: &LossWeights) -> f64 {
    sla + tla_cos + w.lambda_sga * sga
}

pub fn artifact_bias_correction_loss(
    inputs: &ArtifactInputs<'_>,
    sga: &dyn PenaltyHook,
    w: &LossWeights,
) -> Result<f64> {
    Ok(artifact_bias_correction_terms(inputs, sga, w)?.abc)
}

/// Reconstruction distance restricted to small-object regions.
pub fn color_bias_correction_loss(m_soc: &BinaryMask, x_rec: &Image, x_ra: &Image, w: &LossWeights) -> Result<f64> {
    midf(m_soc, x_rec, x_ra, w)
}

/// Color-domain appearance consistency: translated mix against the real
/// thermal frame on the originally pasted regions.
pub fn appearance_consistency_a(q_ao: &BinaryMask, x_ab_mix: &Image, x_rb: &Image, w: &LossWeights) -> Result<f64> {
    midf(q_ao, x_ab_mix, x_rb, w)
}

/// Thermal-domain appearance consistency: object distance plus a gradient
/// repair penalty on the context.
pub fn appearance_consistency_b(
    q_bo: &BinaryMask,
    q_con: &BinaryMask,
    x_ba_mix: &Image,
    x_ra: &Image,
    x_rb: &Image,
    cgr: &dyn PenaltyHook,
    w: &LossWeights,
) -> Result<f64> {
    let object = midf(q_bo, x_ba_mix, x_ra, w)?;
    let context = cgr.penalty(&x_ba_mix.masked(q_con)?, &x_rb.masked(q_con)?)?;
    Ok(object + context)
}

/// Leaf loss values feeding the aggregate; `None` marks a term that was
/// not evaluated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LossTerms {
    pub sla: Option<f64>,
    pub tla_cos: Option<f64>,
    pub abc: Option<f64>,
    pub cbc: Option<f64>,
    pub ac_a: Option<f64>,
    pub ac_b: Option<f64>,
    pub tll: Option<f64>,
    pub tlc: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossReport {
    pub sla: f64,
    pub tla_cos: f64,
    pub abc: f64,
    pub cbc: f64,
    pub ac_a: f64,
    pub ac_b: f64,
    pub tll: f64,
    pub tlc: f64,
    pub total_partial: f64,
}

/// Names of the terms summed into `total_partial`.
pub const SUMMED_TERMS: [&str; 6] = ["abc", "cbc", "ac_a", "ac_b", "tll", "tlc"];

/// Sums bias correction, appearance consistency and traffic-light
/// appearance into the partial objective (the baseline GAN loss is external).
pub fn aggregate(terms: &LossTerms) -> Result<LossReport> {
    let need = |v: Option<f64>, name: &str| v.ok_or_else(|| Error::MissingTerm(name.to_string()));
    let (abc, cbc) = (need(terms.abc, "abc")?, need(terms.cbc, "cbc")?);
    let (ac_a, ac_b) = (need(terms.ac_a, "ac_a")?, need(terms.ac_b, "ac_b")?);
    let (tll, tlc) = (need(terms.tll, "tll")?, need(terms.tlc, "tlc")?);
    let bc = abc + cbc;
    let ac = ac_a + ac_b;
    let tla = tll + tlc;
    Ok(LossReport {
        sla: need(terms.sla, "sla")?,
        tla_cos: need(terms.tla_cos, "tla_cos")?,
        abc,
        cbc,
        ac_a,
        ac_b,
        tll,
        tlc,
        total_partial: bc + ac + tla,
    })
}
