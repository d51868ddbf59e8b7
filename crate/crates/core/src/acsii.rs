//! Autocorrelation with a squared integral image.
//!
//! Every dense `m x n` window of an `M x N x D` signal needs its squared
//! norm for the Gaussian kernel. Summing the squared channels once and
//! building a summed-area table turns each window norm into four lookups,
//! O(MND) overall.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::{FeatureMap, RealMatrix};

/// Summed-area table of the per-position squared channel sums.
#[derive(Debug, Clone, PartialEq)]
pub struct SquaredIntegralImage {
    table: RealMatrix<f64>,
}

impl SquaredIntegralImage {
    pub fn table(&self) -> &RealMatrix<f64> {
        &self.table
    }

    pub fn rows(&self) -> usize {
        self.table.rows()
    }

    pub fn cols(&self) -> usize {
        self.table.cols()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.table.get(i, j)
    }

    /// Sum of squares over all of the signal.
    pub fn total(&self) -> f64 {
        self.get(self.rows() - 1, self.cols() - 1)
    }
}

/// `A(i, j) = sum_d Z(i, j, d)^2`, accumulated in `f64`.
pub fn squared_channel_sum<T: Scalar>(z: &FeatureMap<T>) -> RealMatrix<f64> {
    let (rows, cols, _) = z.shape();
    let data = (0..rows)
        .flat_map(|i| (0..cols).map(move |j| (i, j)))
        .map(|(i, j)| {
            z.pixel(i, j)
                .iter()
                .map(|v| {
                    let v = v.widen();
                    v * v
                })
                .sum()
        })
        .collect();
    RealMatrix::from_raw(rows, cols, data)
}

/// Inclusive prefix sums: `I(i, j) = sum_{p <= i, q <= j} A(p, q)`.
pub fn integral_image(a: &RealMatrix<f64>) -> SquaredIntegralImage {
    let (rows, cols) = a.shape();
    let mut t = vec![0.0; rows * cols];
    let at = |i: usize, j: usize| i * cols + j;

    t[0] = a.get(0, 0);
    for i in 1..rows {
        t[at(i, 0)] = t[at(i - 1, 0)] + a.get(i, 0);
    }
    for j in 1..cols {
        t[at(0, j)] = t[at(0, j - 1)] + a.get(0, j);
    }
    for i in 1..rows {
        for j in 1..cols {
            t[at(i, j)] = t[at(i - 1, j)] + t[at(i, j - 1)] - t[at(i - 1, j - 1)] + a.get(i, j);
        }
    }
    SquaredIntegralImage {
        table: RealMatrix::from_raw(rows, cols, t),
    }
}

/// Window sums of an integral image: entry `(i, j)` is the sum over the
/// `m x n` block with top-left `(i, j)`. Output is `(M-m+1) x (N-n+1)`.
pub fn window_sums(ii: &SquaredIntegralImage, m: usize, n: usize) -> Result<RealMatrix<f64>> {
    let (rows, cols) = (ii.rows(), ii.cols());
    if m == 0 || n == 0 || m > rows || n > cols {
        return Err(Error::WindowTooLarge { m, n, rows, cols });
    }
    let (out_r, out_c) = (rows - m + 1, cols - n + 1);
    let mut b = vec![0.0; out_r * out_c];
    let at = |i: usize, j: usize| i * out_c + j;
    let i_ = |i: usize, j: usize| ii.get(i, j);

    b[0] = i_(m - 1, n - 1);
    for i in 1..out_r {
        b[at(i, 0)] = i_(i + m - 1, n - 1) - i_(i - 1, n - 1);
    }
    for j in 1..out_c {
        b[at(0, j)] = i_(m - 1, j + n - 1) - i_(m - 1, j - 1);
    }
    for i in 1..out_r {
        for j in 1..out_c {
            b[at(i, j)] = i_(i + m - 1, j + n - 1) - i_(i - 1, j + n - 1) - i_(i + m - 1, j - 1)
                + i_(i - 1, j - 1);
        }
    }
    // differences of large prefix sums can dip a hair below zero
    for v in &mut b {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    Ok(RealMatrix::from_raw(out_r, out_c, b))
}

/// Squared Frobenius norm of every dense `m x n x D` window of `z`.
pub fn autocorrelation<T: Scalar>(z: &FeatureMap<T>, m: usize, n: usize) -> Result<RealMatrix<f64>> {
    if m == 0 || n == 0 || m > z.rows() || n > z.cols() {
        return Err(Error::WindowTooLarge {
            m,
            n,
            rows: z.rows(),
            cols: z.cols(),
        });
    }
    window_sums(&integral_image(&squared_channel_sum(z)), m, n)
}
