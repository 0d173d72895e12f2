//! PNG conventions: images map 8-bit values to v/255, label maps are 8-bit
//! category ids, masks are single-channel {0, 255}.
//!
//! Writes go to a temporary sibling file that is renamed into place.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use image::{DynamicImage, GrayImage, ImageFormat, RgbImage};

use crate::error::{Error, Result};
use crate::imagecore::{BinaryMask, Image, LabelMap};

fn io_err(path: &Path, e: impl ToString) -> Error {
    Error::Io { path: path.to_path_buf(), message: e.to_string() }
}

fn parse_err(path: &Path, e: impl ToString) -> Error {
    Error::Parse { path: path.to_path_buf(), message: e.to_string() }
}

fn open_png(path: &Path) -> Result<DynamicImage> {
    if !path.exists() {
        return Err(Error::MissingInput(path.display().to_string()));
    }
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    image::load_from_memory_with_format(&bytes, ImageFormat::Png).map_err(|e| parse_err(path, e))
}

/// Reads a PNG as a 1-channel (grayscale) or 3-channel (color) image.
/// Alpha is dropped; 16-bit inputs are reduced to 8 bits.
pub fn read_image(path: &Path) -> Result<Image> {
    let img = open_png(path)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let to_unit = |v: &u8| f64::from(*v) / 255.0;
    let result = if img.color().has_color() {
        Image::new(h, w, 3, img.to_rgb8().as_raw().iter().map(to_unit).collect())
    } else {
        Image::new(h, w, 1, img.to_luma8().as_raw().iter().map(to_unit).collect())
    };
    result.map_err(|e| parse_err(path, e))
}

fn read_gray8(path: &Path, what: &str) -> Result<(usize, usize, Vec<u8>)> {
    let img = open_png(path)?;
    match img {
        DynamicImage::ImageLuma8(g) => {
            let (w, h) = (g.width() as usize, g.height() as usize);
            Ok((h, w, g.into_raw()))
        }
        other => Err(parse_err(path, format!("{what} must be a single-channel 8-bit PNG, found {:?}", other.color()))),
    }
}

pub fn read_labels(path: &Path) -> Result<LabelMap> {
    let (h, w, ids) = read_gray8(path, "label map")?;
    LabelMap::new(h, w, ids).map_err(|e| parse_err(path, e))
}

pub fn read_mask(path: &Path) -> Result<BinaryMask> {
    let (h, w, raw) = read_gray8(path, "mask")?;
    if let Some(v) = raw.iter().find(|&&v| v != 0 && v != 255) {
        return Err(parse_err(path, format!("mask values must be 0 or 255, found {v}")));
    }
    BinaryMask::new(h, w, raw.into_iter().map(|v| v == 255).collect()).map_err(|e| parse_err(path, e))
}

fn quantize(v: f64) -> u8 {
    (v * 255.0).round().clamp(0.0, 255.0) as u8
}

fn encode_png(img: DynamicImage, path: &Path) -> Result<Vec<u8>> {
    let mut buf = std::io::Cursor::new(Vec::new());
    img.write_to(&mut buf, ImageFormat::Png).map_err(|e| io_err(path, e))?;
    Ok(buf.into_inner())
}

/// Writes `bytes` to `path` atomically.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| io_err(&dir, e))?;
    tmp.write_all(bytes).map_err(|e| io_err(path, e))?;
    tmp.persist(path).map_err(|e| io_err(path, e.error))?;
    Ok(())
}

pub fn image_png_bytes(img: &Image, path: &Path) -> Result<Vec<u8>> {
    let (w, h) = (img.width() as u32, img.height() as u32);
    let raw: Vec<u8> = img.data().iter().map(|&v| quantize(v)).collect();
    let dynimg = if img.channels() == 3 {
        DynamicImage::ImageRgb8(RgbImage::from_raw(w, h, raw).expect("buffer sized from image"))
    } else {
        DynamicImage::ImageLuma8(GrayImage::from_raw(w, h, raw).expect("buffer sized from image"))
    };
    encode_png(dynimg, path)
}

pub fn write_image(path: &Path, img: &Image) -> Result<()> {
    write_atomic(path, &image_png_bytes(img, path)?)
}

pub fn write_labels(path: &Path, labels: &LabelMap) -> Result<()> {
    let d = labels.dims();
    let g = GrayImage::from_raw(d.width as u32, d.height as u32, labels.ids().to_vec()).expect("sized");
    write_atomic(path, &encode_png(DynamicImage::ImageLuma8(g), path)?)
}

pub fn write_mask(path: &Path, mask: &BinaryMask) -> Result<()> {
    let d = mask.dims();
    let raw = mask.bits().iter().map(|&b| if b { 255 } else { 0 }).collect();
    let g = GrayImage::from_raw(d.width as u32, d.height as u32, raw).expect("sized");
    write_atomic(path, &encode_png(DynamicImage::ImageLuma8(g), path)?)
}
