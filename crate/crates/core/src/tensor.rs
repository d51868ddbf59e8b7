//! Dense value types shared by every module.
//!
//! Feature maps are stored row-major with the channel index innermost:
//! element `(i, j, d)` lives at `(i * cols + j) * channels + d`, so the
//! D-vector at a spatial position is a contiguous slice.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn check_finite<T: Scalar>(data: &[T]) -> Result<()> {
    match data.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

/// `rows x cols x channels` tensor, channel-innermost row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap<T> {
    rows: usize,
    cols: usize,
    channels: usize,
    data: Vec<T>,
}

impl<T: Scalar> FeatureMap<T> {
    pub fn new(rows: usize, cols: usize, channels: usize, data: Vec<T>) -> Result<Self> {
        if rows == 0 || cols == 0 || channels == 0 {
            return Err(Error::Dimension(format!(
                "feature map dims must be positive, got {rows}x{cols}x{channels}"
            )));
        }
        if data.len() != rows * cols * channels {
            return Err(Error::Dimension(format!(
                "{rows}x{cols}x{channels} map needs {} values, got {}",
                rows * cols * channels,
                data.len()
            )));
        }
        check_finite(&data)?;
        Ok(Self {
            rows,
            cols,
            channels,
            data,
        })
    }

    pub fn zeros(rows: usize, cols: usize, channels: usize) -> Result<Self> {
        Self::new(rows, cols, channels, vec![T::zero(); rows * cols * channels])
    }

    /// Builds a map by evaluating `f(i, j, d)` in storage order.
    pub fn from_fn(
        rows: usize,
        cols: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> T,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols * channels);
        for i in 0..rows {
            for j in 0..cols {
                for d in 0..channels {
                    data.push(f(i, j, d));
                }
            }
        }
        Self::new(rows, cols, channels, data)
    }

    /// Stacks single-channel matrices of equal shape into one map.
    pub fn from_channels(channels: &[RealMatrix<T>]) -> Result<Self> {
        let first = channels
            .first()
            .ok_or_else(|| Error::Dimension("no channels".into()))?;
        let (rows, cols) = first.shape();
        if channels.iter().any(|c| c.shape() != (rows, cols)) {
            return Err(Error::Dimension("channel shapes differ".into()));
        }
        Self::from_fn(rows, cols, channels.len(), |i, j, d| channels[d].get(i, j))
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.rows, self.cols, self.channels)
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, d: usize) -> usize {
        (i * self.cols + j) * self.channels + d
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, d: usize) -> T {
        self.data[self.index(i, j, d)]
    }

    /// The D-vector at spatial position `(i, j)`.
    #[inline]
    pub fn pixel(&self, i: usize, j: usize) -> &[T] {
        let start = (i * self.cols + j) * self.channels;
        &self.data[start..start + self.channels]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn channel(&self, d: usize) -> RealMatrix<T> {
        RealMatrix {
            rows: self.rows,
            cols: self.cols,
            data: (0..self.rows * self.cols)
                .map(|p| self.data[p * self.channels + d])
                .collect(),
        }
    }

    /// Sum of squares of every element.
    pub fn squared_norm(&self) -> f64 {
        self.data.iter().map(|v| v.widen() * v.widen()).sum()
    }

    /// Copies the `rows x cols` spatial block whose top-left corner is `(top, left)`.
    pub fn window(&self, top: usize, left: usize, rows: usize, cols: usize) -> Result<Self> {
        if top + rows > self.rows || left + cols > self.cols {
            return Err(Error::WindowTooLarge {
                m: top + rows,
                n: left + cols,
                rows: self.rows,
                cols: self.cols,
            });
        }
        let mut data = Vec::with_capacity(rows * cols * self.channels);
        for i in top..top + rows {
            let start = self.index(i, left, 0);
            data.extend_from_slice(&self.data[start..start + cols * self.channels]);
        }
        Ok(Self {
            rows,
            cols,
            channels: self.channels,
            data,
        })
    }

    pub fn map<U: Scalar>(&self, mut f: impl FnMut(T) -> U) -> Result<FeatureMap<U>> {
        FeatureMap::new(
            self.rows,
            self.cols,
            self.channels,
            self.data.iter().map(|&v| f(v)).collect(),
        )
    }

    pub fn cast<U: Scalar>(&self) -> FeatureMap<U> {
        FeatureMap {
            rows: self.rows,
            cols: self.cols,
            channels: self.channels,
            data: self.data.iter().map(|v| U::narrow(v.widen())).collect(),
        }
    }

    /// `(1 - w) * self + w * other`, used for template interpolation.
    pub fn lerp(&self, other: &Self, w: T) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(Error::Dimension(format!(
                "cannot blend {:?} with {:?}",
                self.shape(),
                other.shape()
            )));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| (T::one() - w) * a + w * b)
            .collect();
        Self::new(self.rows, self.cols, self.channels, data)
    }
}

/// Row-major `rows x cols` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct RealMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> RealMatrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension(format!(
                "matrix dims must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} matrix needs {} values, got {}",
                rows * cols,
                data.len()
            )));
        }
        check_finite(&data)?;
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::new(rows, cols, vec![T::zero(); rows * cols])
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::new(rows, cols, data)
    }

    /// Builds from nested rows; all rows must have equal length.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    /// Skips validation; callers guarantee shape and finiteness.
    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<T>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    /// Block with top-left `(top, left)` and the given extent.
    pub fn sub_matrix(&self, top: usize, left: usize, rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 || top + rows > self.rows || left + cols > self.cols {
            return Err(Error::Dimension(format!(
                "block ({top},{left}) {rows}x{cols} outside {}x{} matrix",
                self.rows, self.cols
            )));
        }
        Ok(Self::from_raw(
            rows,
            cols,
            (top..top + rows)
                .flat_map(|i| self.row(i)[left..left + cols].iter().copied())
                .collect(),
        ))
    }

    pub fn sum(&self) -> T {
        self.data.iter().copied().sum()
    }

    /// Position of the largest entry; ties go to the lowest row, then lowest column.
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = 0;
        for (k, v) in self.data.iter().enumerate() {
            if *v > self.data[best] {
                best = k;
            }
        }
        (best / self.cols, best % self.cols)
    }

    pub fn max(&self) -> T {
        self.data.iter().copied().fold(T::neg_infinity(), T::max)
    }

    pub fn min(&self) -> T {
        self.data.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn cast<U: Scalar>(&self) -> RealMatrix<U> {
        RealMatrix::from_raw(
            self.rows,
            self.cols,
            self.data.iter().map(|v| U::narrow(v.widen())).collect(),
        )
    }
}

/// Axis-aligned box in pixel coordinates; `(x, y)` is the top-left corner.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BoundingBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl BoundingBox {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Result<Self> {
        if !(w > 0.0 && h > 0.0) || ![x, y, w, h].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "box ({x}, {y}, {w}, {h}) needs finite coordinates and positive extent"
            )));
        }
        Ok(Self { x, y, w, h })
    }

    pub fn from_center(cx: f64, cy: f64, w: f64, h: f64) -> Result<Self> {
        Self::new(cx - w / 2.0, cy - h / 2.0, w, h)
    }

    pub fn center(&self) -> (f64, f64) {
        (self.x + self.w / 2.0, self.y + self.h / 2.0)
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    /// Shifts the box (shrinking it only if larger than the frame) so it
    /// lies inside a `width x height` frame.
    pub fn clamp_to(&self, width: usize, height: usize) -> Self {
        let (fw, fh) = (width as f64, height as f64);
        let w = self.w.min(fw);
        let h = self.h.min(fh);
        Self {
            x: self.x.clamp(0.0, fw - w),
            y: self.y.clamp(0.0, fh - h),
            w,
            h,
        }
    }

    pub fn is_inside(&self, width: usize, height: usize) -> bool {
        self.x >= 0.0
            && self.y >= 0.0
            && self.x + self.w <= width as f64
            && self.y + self.h <= height as f64
    }
}

/// Grayscale image with intensities in `[0, 1]`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    height: usize,
    width: usize,
    pixels: Vec<f64>,
}

impl GrayImage {
    pub fn new(height: usize, width: usize, pixels: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::Dimension(format!(
                "image dims must be positive, got {height}x{width}"
            )));
        }
        if pixels.len() != height * width {
            return Err(Error::Dimension(format!(
                "{height}x{width} image needs {} pixels, got {}",
                height * width,
                pixels.len()
            )));
        }
        if let Some(index) = pixels
            .iter()
            .position(|p| !p.is_finite() || !(0.0..=1.0).contains(p))
        {
            return Err(Error::InvalidParameter(format!(
                "pixel {index} = {} outside [0, 1]",
                pixels[index]
            )));
        }
        Ok(Self {
            height,
            width,
            pixels,
        })
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut pixels = Vec::with_capacity(height * width);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(y, x));
            }
        }
        Self::new(height, width, pixels)
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize) -> f64 {
        self.pixels[y * self.width + x]
    }

    /// Pixel at signed coordinates, replicating the nearest edge outside the image.
    #[inline]
    pub fn get_clamped(&self, y: isize, x: isize) -> f64 {
        let y = y.clamp(0, self.height as isize - 1) as usize;
        let x = x.clamp(0, self.width as isize - 1) as usize;
        self.get(y, x)
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    /// Bilinear resample to `height x width`, sampling pixel centers.
    pub fn resize(&self, height: usize, width: usize) -> Result<Self> {
        let sy = self.height as f64 / height as f64;
        let sx = self.width as f64 / width as f64;
        Self::from_fn(height, width, |y, x| {
            let fy = ((y as f64 + 0.5) * sy - 0.5).max(0.0);
            let fx = ((x as f64 + 0.5) * sx - 0.5).max(0.0);
            let (y0, x0) = (fy.floor() as isize, fx.floor() as isize);
            let (ty, tx) = (fy - y0 as f64, fx - x0 as f64);
            let p00 = self.get_clamped(y0, x0);
            let p01 = self.get_clamped(y0, x0 + 1);
            let p10 = self.get_clamped(y0 + 1, x0);
            let p11 = self.get_clamped(y0 + 1, x0 + 1);
            let v = (1.0 - ty) * ((1.0 - tx) * p00 + tx * p01) + ty * ((1.0 - tx) * p10 + tx * p11);
            v.clamp(0.0, 1.0)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn make_feature_map_cases() {
        let fm = FeatureMap::new(1, 1, 1, vec![0.5]).unwrap();
        assert_eq!(fm.shape(), (1, 1, 1));
        assert_eq!(fm.get(0, 0, 0), 0.5);

        let fm = FeatureMap::new(2, 3, 2, (0..12).map(f64::from).collect()).unwrap();
        assert_eq!(fm.shape(), (2, 3, 2));

        assert!(matches!(
            FeatureMap::new(2, 2, 1, vec![1.0, 2.0, 3.0]),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            FeatureMap::new(1, 2, 1, vec![1.0, f64::NAN]),
            Err(Error::NonFinite { index: 1 })
        ));
        assert!(FeatureMap::<f32>::new(0, 2, 1, vec![]).is_err());
    }

    #[test]
    fn layout_round_trip_exhaustive() {
        for (rows, cols, ch) in [(1, 1, 1), (2, 3, 2), (3, 2, 4), (4, 4, 3)] {
            let fm = FeatureMap::from_fn(rows, cols, ch, |i, j, d| (i * 100 + j * 10 + d) as f64)
                .unwrap();
            for i in 0..rows {
                for j in 0..cols {
                    for d in 0..ch {
                        let expect = (i * 100 + j * 10 + d) as f64;
                        assert_eq!(fm.get(i, j, d), expect);
                        assert_eq!(fm.as_slice()[(i * cols + j) * ch + d], expect);
                        assert_eq!(fm.pixel(i, j)[d], expect);
                        assert_eq!(fm.channel(d).get(i, j), expect);
                    }
                }
            }
        }
    }

    #[test]
    fn window_and_channels() {
        let fm = FeatureMap::from_fn(4, 5, 2, |i, j, d| (i * 10 + j) as f32 + d as f32 * 0.5).unwrap();
        let w = fm.window(1, 2, 2, 3).unwrap();
        assert_eq!(w.get(0, 0, 1), 12.5);
        assert_eq!(w.get(1, 2, 0), 24.0);
        assert!(fm.window(3, 0, 2, 1).is_err());
        let back = FeatureMap::from_channels(&[fm.channel(0), fm.channel(1)]).unwrap();
        assert_eq!(back, fm);
    }

    #[test]
    fn matrix_argmax_ties_go_low() {
        let m = RealMatrix::from_rows(&[vec![0.0, 2.0, 1.0], vec![2.0, 0.0, 2.0]]).unwrap();
        assert_eq!(m.argmax(), (0, 1));
        assert_eq!(m.max(), 2.0);
        assert_eq!(m.sub_matrix(1, 1, 1, 2).unwrap().as_slice(), &[0.0, 2.0]);
    }

    #[test]
    fn box_validation_and_clamp() {
        assert!(BoundingBox::new(0.0, 0.0, 0.0, 1.0).is_err());
        assert!(BoundingBox::new(0.0, 0.0, 1.0, -1.0).is_err());
        let b = BoundingBox::new(-5.0, 95.0, 10.0, 10.0).unwrap();
        let c = b.clamp_to(100, 100);
        assert_eq!((c.x, c.y), (0.0, 90.0));
        assert!(c.is_inside(100, 100));
        assert_eq!(b.center(), (0.0, 100.0));
    }

    #[test]
    fn gray_image_validation() {
        assert!(GrayImage::new(1, 2, vec![0.0, 1.5]).is_err());
        assert!(GrayImage::new(2, 2, vec![0.0; 3]).is_err());
        let img = GrayImage::new(2, 2, vec![0.0, 0.25, 0.5, 1.0]).unwrap();
        assert_eq!(img.get_clamped(-3, 9), 0.25);
        let same = img.resize(2, 2).unwrap();
        assert_eq!(same, img);
    }
}
