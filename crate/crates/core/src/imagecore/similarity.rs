//! Image distances: structural dissimilarity and smooth L1.

use super::filter::{gaussian_kernel, separable, Border};
use super::raster::Image;
use crate::error::Result;

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;

/// Mean local SSIM over all pixels and channels.
///
/// Local statistics use an 11x11 Gaussian window (sigma 1.5). Near the border
/// the window is truncated to the image and its weights renormalized, so
/// images smaller than the window are handled.
pub fn ssim(a: &Image, b: &Image) -> Result<f64> {
    a.ensure_same_shape(b)?;
    let (h, w, ch) = (a.height(), a.width(), a.channels());
    let kernel = gaussian_kernel(SSIM_WINDOW, SSIM_SIGMA);
    let c1 = (SSIM_K1 * 1.0).powi(2);
    let c2 = (SSIM_K2 * 1.0).powi(2);
    let blur = |p: &[f64]| separable(p, h, w, &kernel, Border::Renormalize);

    let mut total = 0.0;
    for c in 0..ch {
        let x: Vec<f64> = a.data().iter().skip(c).step_by(ch).copied().collect();
        let y: Vec<f64> = b.data().iter().skip(c).step_by(ch).copied().collect();
        let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
        let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
        let xy: Vec<f64> = x.iter().zip(&y).map(|(p, q)| p * q).collect();
        let (mx, my) = (blur(&x), blur(&y));
        let (exx, eyy, exy) = (blur(&xx), blur(&yy), blur(&xy));
        for i in 0..h * w {
            let (ux, uy) = (mx[i], my[i]);
            let vx = exx[i] - ux * ux;
            let vy = eyy[i] - uy * uy;
            let cov = exy[i] - ux * uy;
            let num = (2.0 * ux * uy + c1) * (2.0 * cov + c2);
            let den = (ux * ux + uy * uy + c1) * (vx + vy + c2);
            total += num / den;
        }
    }
    Ok(total / (h * w * ch) as f64)
}

/// `1 - ssim(a, b)`, in [0, 2].
pub fn ssim_loss(a: &Image, b: &Image) -> Result<f64> {
    Ok((1.0 - ssim(a, b)?).clamp(0.0, 2.0))
}

/// Huber penalty with transition point 1.
pub fn huber(d: f64) -> f64 {
    let ad = d.abs();
    if ad < 1.0 {
        0.5 * d * d
    } else {
        ad - 0.5
    }
}

/// Mean Huber penalty over all samples.
pub fn smooth_l1_loss(a: &Image, b: &Image) -> Result<f64> {
    a.ensure_same_shape(b)?;
    let sum: f64 = a.data().iter().zip(b.data()).map(|(x, y)| huber(x - y)).sum();
    Ok(sum / a.data().len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn identical_images_score_zero() {
        let img = Image::from_fn(9, 13, 3, |r, c, ch| ((r * 7 + c * 3 + ch) % 11) as f64 / 10.0).unwrap();
        assert_eq!(ssim_loss(&img, &img).unwrap(), 0.0);
        assert_eq!(smooth_l1_loss(&img, &img).unwrap(), 0.0);
    }

    #[test]
    fn black_against_white_matches_closed_form() {
        // Constant images: every local window has zero variance and covariance,
        // so SSIM = c1 / (1 + c1).
        let a = Image::filled(16, 16, 1, 0.0).unwrap();
        let b = Image::filled(16, 16, 1, 1.0).unwrap();
        let c1 = 1e-4;
        let expected = 1.0 - c1 / (1.0 + c1);
        assert!((ssim_loss(&a, &b).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn smooth_l1_quadratic_and_linear_branches() {
        let a = Image::filled(2, 2, 1, 0.75).unwrap();
        let b = Image::filled(2, 2, 1, 0.25).unwrap();
        assert!((smooth_l1_loss(&a, &b).unwrap() - 0.125).abs() < 1e-15);
        assert_eq!(huber(2.0), 1.5);
        assert_eq!(huber(-2.0), 1.5);
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let a = Image::filled(2, 2, 1, 0.0).unwrap();
        let b = Image::filled(2, 3, 1, 0.0).unwrap();
        let c = Image::filled(2, 2, 3, 0.0).unwrap();
        assert!(matches!(ssim_loss(&a, &b), Err(Error::ShapeMismatch { .. })));
        assert!(matches!(smooth_l1_loss(&a, &c), Err(Error::ShapeMismatch { .. })));
    }
}
