//! Pixel and mask numerics shared by every other module.

mod color;
mod components;
mod edges;
mod filter;
mod raster;
mod similarity;
mod stats;

pub use color::{hsv_pixel_to_rgb, hsv_to_rgb, rgb_pixel_to_hsv, rgb_to_hsv};
pub use components::{connected_components, BBox, ConnectedRegion};
pub use edges::{
    canny_edges, canny_edges_auto, gaussian_blur, sobel_gradient, CANNY_KERNEL, CANNY_LOW_RATIO, CANNY_SIGMA,
};
pub use raster::{BinaryMask, Dims, Image, LabelMap, UNCERTAIN_ID};
pub use similarity::{huber, smooth_l1_loss, ssim, ssim_loss, SSIM_K1, SSIM_K2, SSIM_SIGMA, SSIM_WINDOW};
pub use stats::{masked_mean, masked_min, mean, to_grayscale, LUMA_WEIGHTS};
