//! Cell features: unsigned gradient-orientation histograms plus mean intensity.
//!
//! Per pixel, central differences (edge-replicated) give the gradient;
//! its magnitude votes into one of `bins` equal orientation bins over
//! `[0, pi)`. Each cell histogram is scaled by `1 / (||h|| + 1e-6)`. The
//! last channel is the cell's mean intensity, so a map has `bins + 1`
//! channels.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::tensor::{FeatureMap, GrayImage};

pub const HIST_EPS: f64 = 1e-6;

/// Orientation bin of a gradient, unsigned (opposite directions share a bin).
#[inline]
pub fn orientation_bin(gx: f64, gy: f64, bins: usize) -> usize {
    let mut theta = gy.atan2(gx);
    if theta < 0.0 {
        theta += PI;
    }
    if theta >= PI {
        theta -= PI;
    }
    ((theta / PI * bins as f64) as usize).min(bins - 1)
}

pub fn extract_features(patch: &GrayImage, cell_size: usize, bins: usize) -> Result<FeatureMap<f64>> {
    if cell_size == 0 || bins == 0 {
        return Err(Error::InvalidParameter(format!(
            "cell size and bin count must be positive, got {cell_size} and {bins}"
        )));
    }
    let (h, w) = (patch.height(), patch.width());
    if h < cell_size || w < cell_size {
        return Err(Error::InvalidParameter(format!(
            "{h}x{w} patch is smaller than one {cell_size}px cell"
        )));
    }
    let rows = h.div_ceil(cell_size);
    let cols = w.div_ceil(cell_size);
    let ch = bins + 1;
    let mut data = vec![0.0; rows * cols * ch];

    // padding by replication: pixels past the edge read the last row/column
    for y in 0..rows * cell_size {
        for x in 0..cols * cell_size {
            let (yi, xi) = (y.min(h - 1) as isize, x.min(w - 1) as isize);
            let gx = patch.get_clamped(yi, xi + 1) - patch.get_clamped(yi, xi - 1);
            let gy = patch.get_clamped(yi + 1, xi) - patch.get_clamped(yi - 1, xi);
            let base = ((y / cell_size) * cols + x / cell_size) * ch;
            let mag = gx.hypot(gy);
            if mag > 0.0 {
                data[base + orientation_bin(gx, gy, bins)] += mag;
            }
            data[base + bins] += patch.get_clamped(yi, xi);
        }
    }

    let area = (cell_size * cell_size) as f64;
    for cell in data.chunks_exact_mut(ch) {
        let norm = cell[..bins].iter().map(|v| v * v).sum::<f64>().sqrt();
        for v in &mut cell[..bins] {
            *v /= norm + HIST_EPS;
        }
        cell[bins] /= area;
    }
    FeatureMap::new(rows, cols, ch, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_patch() {
        let p = GrayImage::new(8, 8, vec![0.4; 64]).unwrap();
        let f = extract_features(&p, 4, 8).unwrap();
        assert_eq!(f.shape(), (2, 2, 9));
        for i in 0..2 {
            for j in 0..2 {
                assert!(f.pixel(i, j)[..8].iter().all(|&v| v == 0.0));
                assert!((f.get(i, j, 8) - 0.4).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn vertical_step_edge_votes_horizontal_gradient() {
        let p = GrayImage::from_fn(4, 8, |_, x| if x < 4 { 0.0 } else { 1.0 }).unwrap();
        let f = extract_features(&p, 4, 8).unwrap();
        for j in 0..2 {
            let cell = f.pixel(0, j);
            assert!(cell[0] > 0.99);
            assert!(cell[1..8].iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn orientation_bins_are_unsigned() {
        assert_eq!(orientation_bin(1.0, 0.0, 8), 0);
        assert_eq!(orientation_bin(-1.0, 0.0, 8), 0);
        assert_eq!(orientation_bin(0.0, 1.0, 8), 4);
        assert_eq!(orientation_bin(0.0, -1.0, 8), 4);
        assert_eq!(orientation_bin(-1.0, 1e-12, 8), 7);
        assert_eq!(orientation_bin(-1.0, -1e-12, 8), 0);
    }

    #[test]
    fn pads_non_multiple_patch() {
        let p = GrayImage::from_fn(5, 9, |y, x| ((x + y) % 3) as f64 / 2.0).unwrap();
        let f = extract_features(&p, 4, 6).unwrap();
        assert_eq!(f.shape(), (2, 3, 7));
        assert!(extract_features(&GrayImage::new(3, 8, vec![0.0; 24]).unwrap(), 4, 8).is_err());
        assert!(extract_features(&p, 0, 8).is_err());
    }
}
