use crate::error::{Error, Result};
use crate::regression::LabelMap;
use crate::tensor::{GrayImage, RealMatrix};

/// 2D Gaussian `exp(-(di^2 + dj^2) / (2 bandwidth^2))` peaked at `(peak_row, peak_col)`.
pub fn gaussian_label_map(
    rows: usize,
    cols: usize,
    peak_row: usize,
    peak_col: usize,
    bandwidth: f64,
) -> Result<LabelMap> {
    if peak_row >= rows || peak_col >= cols {
        return Err(Error::InvalidParameter(format!(
            "peak ({peak_row}, {peak_col}) outside {rows}x{cols} grid"
        )));
    }
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "label bandwidth must be positive, got {bandwidth}"
        )));
    }
    let denom = 2.0 * bandwidth * bandwidth;
    let values = RealMatrix::from_fn(rows, cols, |i, j| {
        let di = i as f64 - peak_row as f64;
        let dj = j as f64 - peak_col as f64;
        (-(di * di + dj * dj) / denom).exp()
    })?;
    LabelMap::new(values)
}

/// `width x height` crop centered on `center = (cx, cy)`; pixels outside the
/// image replicate the nearest edge. The top-left corner is
/// `round(cx - width / 2), round(cy - height / 2)`.
pub fn extract_subwindow(image: &GrayImage, center: (f64, f64), width: usize, height: usize) -> Result<GrayImage> {
    let left = (center.0 - width as f64 / 2.0).round() as isize;
    let top = (center.1 - height as f64 / 2.0).round() as isize;
    crop(image, left, top, width, height)
}

pub(crate) fn crop(image: &GrayImage, left: isize, top: isize, width: usize, height: usize) -> Result<GrayImage> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidParameter("empty window".into()));
    }
    GrayImage::from_fn(height, width, |y, x| {
        image.get_clamped(top + y as isize, left + x as isize)
    })
}

/// Samples the source rectangle `(left, top, src_w, src_h)` onto an
/// `out_w x out_h` grid. Integer-aligned same-size requests are plain crops;
/// everything else is bilinear with edge replication.
pub(crate) fn resample_region(
    image: &GrayImage,
    left: f64,
    top: f64,
    src_w: f64,
    src_h: f64,
    out_w: usize,
    out_h: usize,
) -> Result<GrayImage> {
    let same_size = (src_w - out_w as f64).abs() < 1e-9 && (src_h - out_h as f64).abs() < 1e-9;
    if same_size {
        return crop(image, left.round() as isize, top.round() as isize, out_w, out_h);
    }
    let sx = src_w / out_w as f64;
    let sy = src_h / out_h as f64;
    GrayImage::from_fn(out_h, out_w, |v, u| {
        let fx = left + (u as f64 + 0.5) * sx - 0.5;
        let fy = top + (v as f64 + 0.5) * sy - 0.5;
        let (x0, y0) = (fx.floor(), fy.floor());
        let (tx, ty) = (fx - x0, fy - y0);
        let (x0, y0) = (x0 as isize, y0 as isize);
        let p = |y: isize, x: isize| image.get_clamped(y, x);
        let val = (1.0 - ty) * ((1.0 - tx) * p(y0, x0) + tx * p(y0, x0 + 1))
            + ty * ((1.0 - tx) * p(y0 + 1, x0) + tx * p(y0 + 1, x0 + 1));
        val.clamp(0.0, 1.0)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp() -> GrayImage {
        GrayImage::from_fn(4, 4, |y, x| (y * 4 + x) as f64 / 15.0).unwrap()
    }

    #[test]
    fn label_examples() {
        let one = gaussian_label_map(1, 1, 0, 0, 0.5).unwrap();
        assert_eq!(one.as_slice(), &[1.0]);

        let y = gaussian_label_map(5, 5, 2, 2, 1.0).unwrap();
        let v = y.values();
        assert_eq!(v.get(2, 2), 1.0);
        assert!((v.get(0, 0) - (-4.0f64).exp()).abs() < 1e-15);
        assert!((v.get(0, 0) - 0.0183).abs() < 1e-4);
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(v.get(i, j), v.get(4 - i, 4 - j));
                assert_eq!(v.get(i, j), v.get(j, i));
            }
        }
        assert!(gaussian_label_map(3, 3, 3, 0, 1.0).is_err());
        assert!(gaussian_label_map(3, 3, 1, 1, 0.0).is_err());
    }

    #[test]
    fn subwindow_inside() {
        let img = ramp();
        let w = extract_subwindow(&img, (2.0, 2.0), 2, 2).unwrap();
        assert_eq!(w.pixels(), &[img.get(1, 1), img.get(1, 2), img.get(2, 1), img.get(2, 2)]);
    }

    #[test]
    fn subwindow_outside_replicates_corner() {
        let img = ramp();
        let w = extract_subwindow(&img, (-50.0, 80.0), 3, 2).unwrap();
        assert!(w.pixels().iter().all(|&p| p == img.get(3, 0)));
    }

    #[test]
    fn subwindow_half_outside() {
        // left = round(0 - 2) = -2, top = round(1 - 1) = 0
        let img = ramp();
        let w = extract_subwindow(&img, (0.0, 1.0), 4, 2).unwrap();
        let expect = [
            img.get(0, 0), img.get(0, 0), img.get(0, 0), img.get(0, 1),
            img.get(1, 0), img.get(1, 0), img.get(1, 0), img.get(1, 1),
        ];
        assert_eq!(w.pixels(), &expect);
    }

    #[test]
    fn resample_same_size_is_crop() {
        let img = ramp();
        let a = resample_region(&img, 1.0, 0.0, 2.0, 3.0, 2, 3).unwrap();
        let b = crop(&img, 1, 0, 2, 3).unwrap();
        assert_eq!(a, b);
        let up = resample_region(&img, 0.0, 0.0, 4.0, 4.0, 8, 8).unwrap();
        assert_eq!((up.height(), up.width()), (8, 8));
    }
}
