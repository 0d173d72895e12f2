//! Pixel containers: intensity images, category label maps and binary masks.
//!
//! All rasters are row-major. Images interleave channels per pixel (HWC).

use std::fmt;

use crate::error::{Error, Result};

/// Reserved category id for pixels excluded from supervision.
pub const UNCERTAIN_ID: u8 = 255;

/// Height and width of a raster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dims {
    pub height: usize,
    pub width: usize,
}

impl Dims {
    pub fn new(height: usize, width: usize) -> Self {
        Dims { height, width }
    }

    pub fn len(&self) -> usize {
        self.height * self.width
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub(crate) fn ensure_same(&self, other: Dims) -> Result<()> {
        if *self == other {
            Ok(())
        } else {
            Err(Error::shape(self, other))
        }
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.height, self.width)
    }
}

/// Unit-interval intensity image with one (thermal / gray) or three (RGB or HSV) channels.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    dims: Dims,
    channels: usize,
    data: Vec<f64>,
}

impl Image {
    pub fn new(height: usize, width: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidRaster(format!("image must be non-empty, got {height}x{width}")));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidRaster(format!("images have 1 or 3 channels, got {channels}")));
        }
        if data.len() != height * width * channels {
            return Err(Error::InvalidRaster(format!(
                "buffer holds {} values, {height}x{width}x{channels} needs {}",
                data.len(),
                height * width * channels
            )));
        }
        if let Some(v) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidRaster(format!("intensity {v} outside [0, 1]")));
        }
        Ok(Image { dims: Dims::new(height, width), channels, data })
    }

    pub fn filled(height: usize, width: usize, channels: usize, value: f64) -> Result<Self> {
        Image::new(height, width, channels, vec![value; height * width * channels])
    }

    /// Builds an image by evaluating `f(row, col, channel)` at every sample.
    pub fn from_fn(
        height: usize,
        width: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(height * width * channels);
        for r in 0..height {
            for c in 0..width {
                for ch in 0..channels {
                    data.push(f(r, c, ch));
                }
            }
        }
        Image::new(height, width, channels, data)
    }

    /// Builds a single-channel image from nested rows.
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let width = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != width) {
            return Err(Error::InvalidRaster("ragged rows".into()));
        }
        Image::new(rows.len(), width, 1, rows.concat())
    }

    // Internal constructor for values already known to be in range.
    pub(crate) fn from_parts(dims: Dims, channels: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), dims.len() * channels);
        debug_assert!(data.iter().all(|v| (0.0..=1.0).contains(v)));
        Image { dims, channels, data }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn height(&self) -> usize {
        self.dims.height
    }

    pub fn width(&self) -> usize {
        self.dims.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, row: usize, col: usize, channel: usize) -> f64 {
        self.data[(row * self.dims.width + col) * self.channels + channel]
    }

    pub fn pixel(&self, row: usize, col: usize) -> &[f64] {
        let start = (row * self.dims.width + col) * self.channels;
        &self.data[start..start + self.channels]
    }

    pub(crate) fn pixel_at(&self, index: usize) -> &[f64] {
        &self.data[index * self.channels..(index + 1) * self.channels]
    }

    pub fn set(&mut self, row: usize, col: usize, channel: usize, value: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::InvalidRaster(format!("intensity {value} outside [0, 1]")));
        }
        let w = self.dims.width;
        self.data[(row * w + col) * self.channels + channel] = value;
        Ok(())
    }

    pub(crate) fn ensure_channels(&self, expected: usize) -> Result<()> {
        if self.channels == expected {
            Ok(())
        } else {
            Err(Error::ChannelMismatch { expected, found: self.channels })
        }
    }

    pub(crate) fn ensure_same_shape(&self, other: &Image) -> Result<()> {
        if self.dims == other.dims && self.channels == other.channels {
            Ok(())
        } else {
            Err(Error::shape(format!("{}x{}", self.dims, self.channels), format!("{}x{}", other.dims, other.channels)))
        }
    }

    /// Mirror left-right.
    pub fn flip_horizontal(&self) -> Image {
        let Dims { height, width } = self.dims;
        let ch = self.channels;
        let mut data = Vec::with_capacity(self.data.len());
        for r in 0..height {
            for c in (0..width).rev() {
                let start = (r * width + c) * ch;
                data.extend_from_slice(&self.data[start..start + ch]);
            }
        }
        Image::from_parts(self.dims, ch, data)
    }

    /// Mirror top-bottom.
    pub fn flip_vertical(&self) -> Image {
        let Dims { height, width } = self.dims;
        let row_len = width * self.channels;
        let mut data = Vec::with_capacity(self.data.len());
        for r in (0..height).rev() {
            data.extend_from_slice(&self.data[r * row_len..(r + 1) * row_len]);
        }
        Image::from_parts(self.dims, self.channels, data)
    }

    /// Elementwise product with a mask, broadcast over channels.
    pub fn masked(&self, mask: &BinaryMask) -> Result<Image> {
        self.dims.ensure_same(mask.dims())?;
        let ch = self.channels;
        let data = self.data.iter().enumerate().map(|(i, &v)| if mask.bits()[i / ch] { v } else { 0.0 }).collect();
        Ok(Image::from_parts(self.dims, ch, data))
    }

    /// Extracts one channel as a single-channel image.
    pub fn channel(&self, channel: usize) -> Image {
        let data = self.data.iter().skip(channel).step_by(self.channels).copied().collect();
        Image::from_parts(self.dims, 1, data)
    }

    /// Copies a `height x width` window starting at (`top`, `left`).
    pub fn crop(&self, top: usize, left: usize, height: usize, width: usize) -> Result<Image> {
        if height == 0 || width == 0 || top + height > self.height() || left + width > self.width() {
            return Err(Error::InvalidParameter(format!("crop {height}x{width}@({top},{left}) exceeds {}", self.dims)));
        }
        let ch = self.channels;
        let mut data = Vec::with_capacity(height * width * ch);
        for r in top..top + height {
            let start = (r * self.width() + left) * ch;
            data.extend_from_slice(&self.data[start..start + width * ch]);
        }
        Ok(Image::from_parts(Dims::new(height, width), ch, data))
    }

    /// Writes `patch` into this image with its top-left corner at (`top`, `left`).
    pub fn paste(&mut self, patch: &Image, top: usize, left: usize) -> Result<()> {
        if patch.channels != self.channels
            || top + patch.height() > self.height()
            || left + patch.width() > self.width()
        {
            return Err(Error::shape(self.dims, format!("{}@({top},{left})", patch.dims)));
        }
        let ch = self.channels;
        let w = self.width();
        for r in 0..patch.height() {
            let dst = ((top + r) * w + left) * ch;
            let src = r * patch.width() * ch;
            self.data[dst..dst + patch.width() * ch].copy_from_slice(&patch.data[src..src + patch.width() * ch]);
        }
        Ok(())
    }
}

/// Per-pixel category ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    dims: Dims,
    ids: Vec<u8>,
}

impl LabelMap {
    pub fn new(height: usize, width: usize, ids: Vec<u8>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidRaster(format!("label map must be non-empty, got {height}x{width}")));
        }
        if ids.len() != height * width {
            return Err(Error::InvalidRaster(format!(
                "label buffer holds {} ids, {height}x{width} needs {}",
                ids.len(),
                height * width
            )));
        }
        Ok(LabelMap { dims: Dims::new(height, width), ids })
    }

    pub fn filled(height: usize, width: usize, id: u8) -> Result<Self> {
        LabelMap::new(height, width, vec![id; height * width])
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> u8) -> Result<Self> {
        let mut ids = Vec::with_capacity(height * width);
        for r in 0..height {
            for c in 0..width {
                ids.push(f(r, c));
            }
        }
        LabelMap::new(height, width, ids)
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn ids(&self) -> &[u8] {
        &self.ids
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.ids[row * self.dims.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, id: u8) {
        let w = self.dims.width;
        self.ids[row * w + col] = id;
    }

    /// Pixels carrying `id`.
    pub fn mask_of(&self, id: u8) -> BinaryMask {
        BinaryMask::from_parts(self.dims, self.ids.iter().map(|&v| v == id).collect())
    }

    /// Pixels whose id is in `ids`.
    pub fn mask_of_any(&self, ids: &[u8]) -> BinaryMask {
        BinaryMask::from_parts(self.dims, self.ids.iter().map(|v| ids.contains(v)).collect())
    }

    pub fn flip_horizontal(&self) -> LabelMap {
        let Dims { height, width } = self.dims;
        let mut ids = Vec::with_capacity(self.ids.len());
        for r in 0..height {
            ids.extend(self.ids[r * width..(r + 1) * width].iter().rev());
        }
        LabelMap { dims: self.dims, ids }
    }
}

/// One boolean per pixel.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    dims: Dims,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(height: usize, width: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != height * width {
            return Err(Error::InvalidRaster(format!(
                "mask holds {} bits, {height}x{width} needs {}",
                bits.len(),
                height * width
            )));
        }
        Ok(BinaryMask { dims: Dims::new(height, width), bits })
    }

    pub(crate) fn from_parts(dims: Dims, bits: Vec<bool>) -> Self {
        debug_assert_eq!(bits.len(), dims.len());
        BinaryMask { dims, bits }
    }

    pub fn empty(dims: Dims) -> Self {
        BinaryMask::from_parts(dims, vec![false; dims.len()])
    }

    /// The all-ones mask.
    pub fn full(dims: Dims) -> Self {
        BinaryMask::from_parts(dims, vec![true; dims.len()])
    }

    pub fn from_fn(dims: Dims, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(dims.len());
        for r in 0..dims.height {
            for c in 0..dims.width {
                bits.push(f(r, c));
            }
        }
        BinaryMask::from_parts(dims, bits)
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.dims.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        let w = self.dims.width;
        self.bits[row * w + col] = value;
    }

    pub fn popcount(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    fn zip_with(&self, other: &BinaryMask, f: impl Fn(bool, bool) -> bool) -> Result<BinaryMask> {
        self.dims.ensure_same(other.dims)?;
        let bits = self.bits.iter().zip(&other.bits).map(|(&a, &b)| f(a, b)).collect();
        Ok(BinaryMask::from_parts(self.dims, bits))
    }

    pub fn union(&self, other: &BinaryMask) -> Result<BinaryMask> {
        self.zip_with(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &BinaryMask) -> Result<BinaryMask> {
        self.zip_with(other, |a, b| a && b)
    }

    /// Pixels in `self` but not in `other`.
    pub fn difference(&self, other: &BinaryMask) -> Result<BinaryMask> {
        self.zip_with(other, |a, b| a && !b)
    }

    pub fn complement(&self) -> BinaryMask {
        BinaryMask::from_parts(self.dims, self.bits.iter().map(|b| !b).collect())
    }

    pub fn intersects(&self, other: &BinaryMask) -> Result<bool> {
        self.dims.ensure_same(other.dims)?;
        Ok(self.bits.iter().zip(&other.bits).any(|(&a, &b)| a && b))
    }

    pub fn is_subset_of(&self, other: &BinaryMask) -> Result<bool> {
        self.dims.ensure_same(other.dims)?;
        Ok(self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b))
    }

    pub fn flip_horizontal(&self) -> BinaryMask {
        let Dims { height, width } = self.dims;
        let mut bits = Vec::with_capacity(self.bits.len());
        for r in 0..height {
            bits.extend(self.bits[r * width..(r + 1) * width].iter().rev());
        }
        BinaryMask::from_parts(self.dims, bits)
    }

    pub fn flip_vertical(&self) -> BinaryMask {
        let Dims { height, width } = self.dims;
        let mut bits = Vec::with_capacity(self.bits.len());
        for r in (0..height).rev() {
            bits.extend_from_slice(&self.bits[r * width..(r + 1) * width]);
        }
        BinaryMask::from_parts(self.dims, bits)
    }

    /// Binary dilation with a square (Chebyshev) structuring element.
    pub fn dilate(&self, radius: usize) -> BinaryMask {
        if radius == 0 {
            return self.clone();
        }
        let Dims { height, width } = self.dims;
        // Separable: max over rows, then over columns.
        let mut horiz = vec![false; self.bits.len()];
        for r in 0..height {
            for c in 0..width {
                let lo = c.saturating_sub(radius);
                let hi = (c + radius).min(width - 1);
                horiz[r * width + c] = self.bits[r * width + lo..=r * width + hi].iter().any(|&b| b);
            }
        }
        let mut bits = vec![false; self.bits.len()];
        for r in 0..height {
            let lo = r.saturating_sub(radius);
            let hi = (r + radius).min(height - 1);
            for c in 0..width {
                bits[r * width + c] = (lo..=hi).any(|rr| horiz[rr * width + c]);
            }
        }
        BinaryMask::from_parts(self.dims, bits)
    }

    /// Indices of set pixels in row-major order.
    pub fn set_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().filter_map(|(i, &b)| b.then_some(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mask_strategy() -> impl Strategy<Value = (BinaryMask, BinaryMask)> {
        (1usize..10, 1usize..10).prop_flat_map(|(h, w)| {
            (proptest::collection::vec(any::<bool>(), h * w), proptest::collection::vec(any::<bool>(), h * w))
                .prop_map(move |(a, b)| (BinaryMask::new(h, w, a).unwrap(), BinaryMask::new(h, w, b).unwrap()))
        })
    }

    proptest! {
        #[test]
        fn inclusion_exclusion((a, b) in mask_strategy()) {
            let u = a.union(&b).unwrap().popcount();
            let i = a.intersection(&b).unwrap().popcount();
            prop_assert_eq!(u + i, a.popcount() + b.popcount());
        }

        #[test]
        fn difference_is_disjoint_from_subtrahend((a, b) in mask_strategy()) {
            let d = a.difference(&b).unwrap();
            prop_assert!(!d.intersects(&b).unwrap());
            prop_assert!(d.is_subset_of(&a).unwrap());
        }
    }

    #[test]
    fn rejects_out_of_range_values() {
        assert!(Image::new(1, 1, 1, vec![1.5]).is_err());
        assert!(Image::new(1, 1, 2, vec![0.1, 0.2]).is_err());
        assert!(Image::new(0, 3, 1, vec![]).is_err());
    }

    #[test]
    fn flips_are_involutions() {
        let img = Image::from_fn(3, 4, 3, |r, c, ch| ((r * 4 + c) * 3 + ch) as f64 / 36.0).unwrap();
        assert_eq!(img.flip_horizontal().flip_horizontal(), img);
        assert_eq!(img.flip_vertical().flip_vertical(), img);
        assert_eq!(img.flip_horizontal().get(0, 0, 2), img.get(0, 3, 2));
        assert_eq!(img.flip_vertical().get(0, 1, 0), img.get(2, 1, 0));
    }

    #[test]
    fn dilation_grows_by_radius() {
        let mut m = BinaryMask::empty(Dims::new(5, 5));
        m.set(2, 2, true);
        assert_eq!(m.dilate(1).popcount(), 9);
        assert_eq!(m.dilate(2).popcount(), 25);
        assert_eq!(m.dilate(0), m);
    }

    #[test]
    fn masked_broadcasts_over_channels() {
        let img = Image::filled(1, 2, 3, 0.5).unwrap();
        let m = BinaryMask::new(1, 2, vec![true, false]).unwrap();
        assert_eq!(img.masked(&m).unwrap().data(), &[0.5, 0.5, 0.5, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn crop_and_paste_roundtrip() {
        let img = Image::from_fn(4, 4, 1, |r, c, _| (r * 4 + c) as f64 / 16.0).unwrap();
        let patch = img.crop(1, 1, 2, 3).unwrap();
        assert_eq!(patch.get(0, 0, 0), img.get(1, 1, 0));
        let mut blank = Image::filled(4, 4, 1, 0.0).unwrap();
        blank.paste(&patch, 1, 1).unwrap();
        assert_eq!(blank.get(2, 3, 0), img.get(2, 3, 0));
        assert_eq!(blank.get(0, 0, 0), 0.0);
        assert!(img.crop(3, 3, 2, 2).is_err());
    }
}
