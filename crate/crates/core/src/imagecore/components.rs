//! Connected-component labelling of binary masks (8-connectivity).

use std::collections::VecDeque;

use super::raster::{BinaryMask, Dims};

/// Axis-aligned bounding box in pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BBox {
    pub top: usize,
    pub left: usize,
    pub height: usize,
    pub width: usize,
}

impl BBox {
    pub fn bottom(&self) -> usize {
        self.top + self.height - 1
    }

    pub fn right(&self) -> usize {
        self.left + self.width - 1
    }

    /// Height over width.
    pub fn aspect_ratio(&self) -> f64 {
        self.height as f64 / self.width as f64
    }
}

/// A maximal 8-connected set of mask pixels, tagged with a category id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectedRegion {
    pub mask: BinaryMask,
    pub area: usize,
    pub bbox: BBox,
    pub category: u8,
}

const NEIGHBOURS: [(isize, isize); 8] = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)];

/// Splits `mask` into its 8-connected components.
///
/// Regions are ordered by their first pixel in row-major scan order.
pub fn connected_components(mask: &BinaryMask, category: u8) -> Vec<ConnectedRegion> {
    let dims = mask.dims();
    let Dims { height, width } = dims;
    let bits = mask.bits();
    let mut visited = vec![false; bits.len()];
    let mut regions = Vec::new();
    let mut queue = VecDeque::new();

    for seed in 0..bits.len() {
        if !bits[seed] || visited[seed] {
            continue;
        }
        let mut members = vec![false; bits.len()];
        let (mut top, mut left, mut bottom, mut right) = (usize::MAX, usize::MAX, 0, 0);
        let mut area = 0;
        visited[seed] = true;
        queue.push_back(seed);
        while let Some(idx) = queue.pop_front() {
            members[idx] = true;
            area += 1;
            let (r, c) = (idx / width, idx % width);
            top = top.min(r);
            bottom = bottom.max(r);
            left = left.min(c);
            right = right.max(c);
            for (dr, dc) in NEIGHBOURS {
                let nr = r as isize + dr;
                let nc = c as isize + dc;
                if nr < 0 || nc < 0 || nr >= height as isize || nc >= width as isize {
                    continue;
                }
                let n = nr as usize * width + nc as usize;
                if bits[n] && !visited[n] {
                    visited[n] = true;
                    queue.push_back(n);
                }
            }
        }
        regions.push(ConnectedRegion {
            mask: BinaryMask::from_parts(dims, members),
            area,
            bbox: BBox { top, left, height: bottom - top + 1, width: right - left + 1 },
            category,
        });
    }
    regions
}
