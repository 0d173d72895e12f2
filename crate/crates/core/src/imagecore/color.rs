//! Hexcone HSV conversion. Hue is normalized to [0, 1).

use super::raster::Image;
use crate::error::Result;

pub fn rgb_pixel_to_hsv(r: f64, g: f64, b: f64) -> [f64; 3] {
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    let v = max;
    let s = if max > 0.0 { delta / max } else { 0.0 };
    if delta == 0.0 {
        return [0.0, s, v];
    }
    let sector = if max == r {
        ((g - b) / delta).rem_euclid(6.0)
    } else if max == g {
        (b - r) / delta + 2.0
    } else {
        (r - g) / delta + 4.0
    };
    let h = sector / 6.0;
    // rem_euclid can round to exactly 6.0 for tiny negative inputs.
    [if h >= 1.0 { 0.0 } else { h }, s, v]
}

pub fn hsv_pixel_to_rgb(h: f64, s: f64, v: f64) -> [f64; 3] {
    if s == 0.0 {
        return [v, v, v];
    }
    let h6 = h.rem_euclid(1.0) * 6.0;
    let sector = (h6.floor() as usize).min(5);
    let f = h6 - sector as f64;
    let p = v * (1.0 - s);
    let q = v * (1.0 - s * f);
    let t = v * (1.0 - s * (1.0 - f));
    let rgb = match sector {
        0 => [v, t, p],
        1 => [q, v, p],
        2 => [p, v, t],
        3 => [p, q, v],
        4 => [t, p, v],
        _ => [v, p, q],
    };
    rgb.map(|x| x.clamp(0.0, 1.0))
}

fn map_pixels(img: &Image, f: impl Fn(f64, f64, f64) -> [f64; 3]) -> Result<Image> {
    img.ensure_channels(3)?;
    let data = img.data().chunks_exact(3).flat_map(|p| f(p[0], p[1], p[2])).collect();
    Ok(Image::from_parts(img.dims(), 3, data))
}

/// RGB to HSV, channel order (H, S, V).
pub fn rgb_to_hsv(img: &Image) -> Result<Image> {
    map_pixels(img, rgb_pixel_to_hsv)
}

pub fn hsv_to_rgb(img: &Image) -> Result<Image> {
    map_pixels(img, hsv_pixel_to_rgb)
}
