//! Gradient maps and Canny edge detection.
//!
//! Gradient magnitudes are normalized by their image maximum, so Canny
//! thresholds are fractions of the strongest gradient in the frame.

use std::collections::VecDeque;

use super::filter::{gaussian_kernel, separable, Border};
use super::raster::{BinaryMask, Dims, Image};
use crate::error::{Error, Result};

pub const CANNY_SIGMA: f64 = 1.4;
pub const CANNY_KERNEL: usize = 5;
/// Hysteresis low threshold as a fraction of the high threshold.
pub const CANNY_LOW_RATIO: f64 = 0.4;

/// Gaussian smoothing of every channel with replicated borders.
///
/// The kernel spans `2 * ceil(3 sigma) + 1` taps.
pub fn gaussian_blur(img: &Image, sigma: f64) -> Result<Image> {
    if !sigma.is_finite() || sigma <= 0.0 {
        return Err(Error::InvalidParameter(format!("blur sigma must be positive, got {sigma}")));
    }
    let size = 2 * (3.0 * sigma).ceil() as usize + 1;
    Ok(blur_with(img, &gaussian_kernel(size, sigma)))
}

fn blur_with(img: &Image, kernel: &[f64]) -> Image {
    let (h, w, ch) = (img.height(), img.width(), img.channels());
    let mut data = vec![0.0; img.data().len()];
    for c in 0..ch {
        let plane: Vec<f64> = img.data().iter().skip(c).step_by(ch).copied().collect();
        for (i, v) in separable(&plane, h, w, kernel, Border::Replicate).into_iter().enumerate() {
            data[i * ch + c] = v.clamp(0.0, 1.0);
        }
    }
    Image::from_parts(img.dims(), ch, data)
}

/// Raw Sobel responses (gx, gy) with replicated borders.
fn sobel_components(plane: &[f64], dims: Dims) -> (Vec<f64>, Vec<f64>) {
    let Dims { height, width } = dims;
    let at = |r: isize, c: isize| {
        let r = r.clamp(0, height as isize - 1) as usize;
        let c = c.clamp(0, width as isize - 1) as usize;
        plane[r * width + c]
    };
    let mut gx = vec![0.0; plane.len()];
    let mut gy = vec![0.0; plane.len()];
    for r in 0..height as isize {
        for c in 0..width as isize {
            let i = r as usize * width + c as usize;
            gx[i] = (at(r - 1, c + 1) + 2.0 * at(r, c + 1) + at(r + 1, c + 1))
                - (at(r - 1, c - 1) + 2.0 * at(r, c - 1) + at(r + 1, c - 1));
            gy[i] = (at(r + 1, c - 1) + 2.0 * at(r + 1, c) + at(r + 1, c + 1))
                - (at(r - 1, c - 1) + 2.0 * at(r - 1, c) + at(r - 1, c + 1));
        }
    }
    (gx, gy)
}

fn normalized_magnitude(gx: &[f64], gy: &[f64]) -> Vec<f64> {
    let mag: Vec<f64> = gx.iter().zip(gy).map(|(x, y)| x.hypot(*y)).collect();
    let max = mag.iter().copied().fold(0.0, f64::max);
    if max > 0.0 {
        mag.into_iter().map(|m| m / max).collect()
    } else {
        mag
    }
}

/// Sobel gradient magnitude scaled to [0, 1] by the image maximum.
pub fn sobel_gradient(img: &Image) -> Result<Image> {
    img.ensure_channels(1)?;
    let (gx, gy) = sobel_components(img.data(), img.dims());
    Ok(Image::from_parts(img.dims(), 1, normalized_magnitude(&gx, &gy)))
}

/// Canny edges: 5x5 Gaussian (sigma 1.4), Sobel, non-maximum suppression,
/// then hysteresis between `low` and `high` (fractions of the peak gradient).
pub fn canny_edges(img: &Image, low: f64, high: f64) -> Result<BinaryMask> {
    if !(0.0..=1.0).contains(&low) || !(0.0..=1.0).contains(&high) || low > high {
        return Err(Error::BadThresholds { low, high });
    }
    img.ensure_channels(1)?;
    let dims = img.dims();
    let Dims { height, width } = dims;
    let smoothed = blur_with(img, &gaussian_kernel(CANNY_KERNEL, CANNY_SIGMA));
    let (gx, gy) = sobel_components(smoothed.data(), dims);
    let mag = normalized_magnitude(&gx, &gy);

    let at = |r: isize, c: isize| -> f64 {
        if r < 0 || c < 0 || r >= height as isize || c >= width as isize {
            0.0
        } else {
            mag[r as usize * width + c as usize]
        }
    };

    // Non-maximum suppression along the quantized gradient direction.
    let mut thin = vec![0.0; mag.len()];
    for r in 0..height {
        for c in 0..width {
            let i = r * width + c;
            let m = mag[i];
            if m <= 0.0 {
                continue;
            }
            // Image rows grow downward; flip gy so angles are counter-clockwise.
            let angle = (-gy[i]).atan2(gx[i]).to_degrees().rem_euclid(180.0);
            let (dr, dc): (isize, isize) = if !(22.5..157.5).contains(&angle) {
                (0, 1)
            } else if angle < 67.5 {
                (-1, 1)
            } else if angle < 112.5 {
                (1, 0)
            } else {
                (-1, -1)
            };
            let (ri, ci) = (r as isize, c as isize);
            if m >= at(ri + dr, ci + dc) && m >= at(ri - dr, ci - dc) {
                thin[i] = m;
            }
        }
    }

    // Hysteresis: keep weak pixels 8-connected to a strong one.
    let mut edges = vec![false; mag.len()];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for (i, &m) in thin.iter().enumerate() {
        if m > 0.0 && m >= high {
            edges[i] = true;
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        let (r, c) = ((i / width) as isize, (i % width) as isize);
        for dr in -1..=1 {
            for dc in -1..=1 {
                let (nr, nc) = (r + dr, c + dc);
                if nr < 0 || nc < 0 || nr >= height as isize || nc >= width as isize {
                    continue;
                }
                let n = nr as usize * width + nc as usize;
                if !edges[n] && thin[n] > 0.0 && thin[n] >= low {
                    edges[n] = true;
                    queue.push_back(n);
                }
            }
        }
    }
    Ok(BinaryMask::from_parts(dims, edges))
}

/// Canny with the low threshold tied to `high` by [`CANNY_LOW_RATIO`].
pub fn canny_edges_auto(img: &Image, high: f64) -> Result<BinaryMask> {
    canny_edges(img, CANNY_LOW_RATIO * high, high)
}
