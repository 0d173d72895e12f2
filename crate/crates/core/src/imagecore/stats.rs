use super::raster::{BinaryMask, Image};
use crate::error::{Error, Result};

/// ITU-R BT.601 luma weights.
pub const LUMA_WEIGHTS: [f64; 3] = [0.299, 0.587, 0.114];

/// Luma of a color image; single-channel images pass through unchanged.
pub fn to_grayscale(img: &Image) -> Image {
    if img.channels() == 1 {
        return img.clone();
    }
    let data = img
        .data()
        .chunks_exact(3)
        .map(|p| {
            let y = LUMA_WEIGHTS[0] * p[0] + LUMA_WEIGHTS[1] * p[1] + LUMA_WEIGHTS[2] * p[2];
            y.clamp(0.0, 1.0)
        })
        .collect();
    Image::from_parts(img.dims(), 1, data)
}

fn masked_values<'a>(img: &'a Image, mask: &'a BinaryMask) -> Result<impl Iterator<Item = f64> + 'a> {
    img.ensure_channels(1)?;
    img.dims().ensure_same(mask.dims())?;
    Ok(mask.set_indices().map(move |i| img.data()[i]))
}

pub fn masked_mean(img: &Image, mask: &BinaryMask) -> Result<f64> {
    let (sum, n) = masked_values(img, mask)?.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        return Err(Error::EmptyMask("masked mean"));
    }
    Ok(sum / n as f64)
}

pub fn masked_min(img: &Image, mask: &BinaryMask) -> Result<f64> {
    masked_values(img, mask)?.min_by(f64::total_cmp).ok_or(Error::EmptyMask("masked min"))
}

/// Mean over every sample of the image (all channels).
pub fn mean(img: &Image) -> f64 {
    img.data().iter().sum::<f64>() / img.data().len() as f64
}
