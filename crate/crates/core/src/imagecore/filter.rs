//! Separable convolution on single planes.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Border {
    /// Out-of-range taps read the nearest edge sample.
    Replicate,
    /// Out-of-range taps are dropped and the remaining weights rescaled to sum to one.
    Renormalize,
}

/// Normalized 1-D Gaussian of odd length `size`.
pub(crate) fn gaussian_kernel(size: usize, sigma: f64) -> Vec<f64> {
    debug_assert!(size % 2 == 1);
    let half = (size / 2) as f64;
    let raw: Vec<f64> = (0..size)
        .map(|i| {
            let x = i as f64 - half;
            (-x * x / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

fn convolve_line(src: &[f64], stride: usize, n: usize, kernel: &[f64], border: Border, out: &mut [f64]) {
    let half = (kernel.len() / 2) as isize;
    for i in 0..n {
        let mut acc = 0.0;
        let mut weight = 0.0;
        for (k, &w) in kernel.iter().enumerate() {
            let j = i as isize + k as isize - half;
            let j = if (0..n as isize).contains(&j) {
                j as usize
            } else {
                match border {
                    Border::Replicate => j.clamp(0, n as isize - 1) as usize,
                    Border::Renormalize => continue,
                }
            };
            acc += w * src[j * stride];
            weight += w;
        }
        out[i * stride] = match border {
            Border::Replicate => acc,
            Border::Renormalize => acc / weight,
        };
    }
}

/// Applies `kernel` along rows then columns of an `height x width` plane.
pub(crate) fn separable(plane: &[f64], height: usize, width: usize, kernel: &[f64], border: Border) -> Vec<f64> {
    let mut tmp = vec![0.0; plane.len()];
    for r in 0..height {
        let row = r * width;
        convolve_line(&plane[row..row + width], 1, width, kernel, border, &mut tmp[row..row + width]);
    }
    let mut out = vec![0.0; plane.len()];
    for c in 0..width {
        convolve_line(&tmp[c..], width, height, kernel, border, &mut out[c..]);
    }
    out
}
