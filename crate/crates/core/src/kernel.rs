//! Kernel correlation matrices assembled from window norms and circulant
//! correlations.
//!
//! Rows index dense samples, `p = i'' * (N-n+1) + j''`; columns index
//! circulant filters, `c = i' * n + j'`. Every cyclic shift of the base
//! filter has the same norm, so the Gaussian kernel needs only one filter
//! norm, the window norms from [`autocorrelation`], and the cross terms
//! from [`circulant_correlation`].

use nalgebra::DMatrix;

use crate::acsii::autocorrelation;
use crate::ccim::{circulant_correlation, CorrelationStack};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::{FeatureMap, RealMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    #[default]
    Gaussian,
    Linear,
    Polynomial,
}

impl std::str::FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Self::Gaussian),
            "linear" => Ok(Self::Linear),
            "poly" | "polynomial" => Ok(Self::Polynomial),
            other => Err(Error::InvalidParameter(format!("unknown kernel '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct KernelConfig {
    pub kind: KernelKind,
    /// Gaussian bandwidth.
    pub sigma: f64,
    pub poly_degree: f64,
    pub poly_offset: f64,
    /// Divide the Gaussian squared distance by `m * n * D` before `sigma^2`.
    pub normalize_by_dim: bool,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self {
            kind: KernelKind::Gaussian,
            sigma: 4.0,
            poly_degree: 2.0,
            poly_offset: 1.0,
            normalize_by_dim: true,
        }
    }
}

impl KernelConfig {
    pub fn gaussian(sigma: f64) -> Self {
        Self {
            sigma,
            ..Self::default()
        }
    }

    pub fn linear() -> Self {
        Self {
            kind: KernelKind::Linear,
            ..Self::default()
        }
    }

    pub fn polynomial(degree: f64, offset: f64) -> Self {
        Self {
            kind: KernelKind::Polynomial,
            poly_degree: degree,
            poly_offset: offset,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sigma must be positive, got {}",
                self.sigma
            )));
        }
        if !(self.poly_degree >= 1.0 && self.poly_degree.is_finite()) || !self.poly_offset.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "polynomial kernel needs degree >= 1, got {}",
                self.poly_degree
            )));
        }
        Ok(())
    }

    /// Maps a filter/sample pair summary to a kernel value.
    ///
    /// `filter_sq` and `window_sq` are squared norms, `cross` the dot
    /// product, `numel` is `m * n * D`.
    #[inline]
    pub fn evaluate(&self, filter_sq: f64, window_sq: f64, cross: f64, numel: usize) -> f64 {
        match self.kind {
            KernelKind::Gaussian => {
                let scale = if self.normalize_by_dim { numel as f64 } else { 1.0 };
                let dist = (filter_sq + window_sq - 2.0 * cross).max(0.0);
                (-dist / (self.sigma * self.sigma * scale)).exp()
            }
            KernelKind::Linear => cross,
            KernelKind::Polynomial => {
                let base = cross + self.poly_offset;
                if self.poly_degree.fract() == 0.0 {
                    base.powi(self.poly_degree as i32)
                } else {
                    base.powf(self.poly_degree)
                }
            }
        }
    }
}

/// `P x mn` matrix of `kernel(X^{i',j'}, Z^{i'',j''})`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    values: RealMatrix<f64>,
    sample_dims: (usize, usize),
    filter_dims: (usize, usize),
    config: KernelConfig,
}

impl KernelMatrix {
    /// Wraps precomputed values; `values` must be `(sr*sc) x (m*n)`.
    pub fn from_values(
        values: RealMatrix<f64>,
        sample_dims: (usize, usize),
        filter_dims: (usize, usize),
        config: KernelConfig,
    ) -> Result<Self> {
        if values.rows() != sample_dims.0 * sample_dims.1 || values.cols() != filter_dims.0 * filter_dims.1 {
            return Err(Error::Dimension(format!(
                "kernel matrix {}x{} does not match {:?} samples and {:?} filters",
                values.rows(),
                values.cols(),
                sample_dims,
                filter_dims
            )));
        }
        Ok(Self {
            values,
            sample_dims,
            filter_dims,
            config,
        })
    }

    /// Dense sample count `P`.
    pub fn rows(&self) -> usize {
        self.values.rows()
    }

    /// Filter count `m * n`.
    pub fn cols(&self) -> usize {
        self.values.cols()
    }

    #[inline]
    pub fn get(&self, p: usize, c: usize) -> f64 {
        self.values.get(p, c)
    }

    pub fn values(&self) -> &RealMatrix<f64> {
        &self.values
    }

    /// `(M-m+1, N-n+1)`: the grid the rows are flattened from.
    pub fn sample_dims(&self) -> (usize, usize) {
        self.sample_dims
    }

    pub fn filter_dims(&self) -> (usize, usize) {
        self.filter_dims
    }

    pub fn config(&self) -> &KernelConfig {
        &self.config
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows(), self.cols(), self.values.as_slice())
    }

    /// `K * alpha` reshaped to the sample grid.
    pub fn response(&self, alpha: &[f64]) -> Result<RealMatrix<f64>> {
        if alpha.len() != self.cols() {
            return Err(Error::Dimension(format!(
                "alpha has {} entries, kernel has {} columns",
                alpha.len(),
                self.cols()
            )));
        }
        let data = (0..self.rows())
            .map(|p| {
                self.values
                    .row(p)
                    .iter()
                    .zip(alpha)
                    .map(|(k, a)| k * a)
                    .sum()
            })
            .collect();
        RealMatrix::new(self.sample_dims.0, self.sample_dims.1, data)
    }
}

/// `||X^{0,0}||^2`, shared by every circulant shift.
pub fn base_filter_norm<T: Scalar>(x0: &FeatureMap<T>) -> f64 {
    x0.squared_norm()
}

/// Assembles the kernel matrix from window norms and a correlation stack.
pub fn assemble(
    filter_sq: f64,
    window_sq: &RealMatrix<f64>,
    corr: &CorrelationStack,
    numel: usize,
    cfg: &KernelConfig,
) -> Result<KernelMatrix> {
    let (sr, sc) = corr.map_dims();
    if window_sq.shape() != (sr, sc) {
        return Err(Error::Dimension("window norms and correlation maps differ".into()));
    }
    let filters = corr.maps().len();
    let mut data = vec![0.0; sr * sc * filters];
    for (c, map) in corr.maps().iter().enumerate() {
        for (p, (&cross, &wsq)) in map.as_slice().iter().zip(window_sq.as_slice()).enumerate() {
            data[p * filters + c] = cfg.evaluate(filter_sq, wsq, cross, numel);
        }
    }
    KernelMatrix::from_values(
        RealMatrix::new(sr * sc, filters, data)?,
        (sr, sc),
        corr.filter_dims(),
        *cfg,
    )
}

pub fn kernel_matrix<T: Scalar>(
    x0: &FeatureMap<T>,
    z: &FeatureMap<T>,
    cfg: &KernelConfig,
) -> Result<KernelMatrix> {
    cfg.validate()?;
    let corr = circulant_correlation(x0, z)?;
    let window_sq = match cfg.kind {
        KernelKind::Gaussian => autocorrelation(z, x0.rows(), x0.cols())?,
        _ => RealMatrix::zeros(corr.map_dims().0, corr.map_dims().1)?,
    };
    assemble(base_filter_norm(x0), &window_sq, &corr, x0.as_slice().len(), cfg)
}

/// `mn x mn` kernel matrix of the circulant filter set against itself.
///
/// The filter is tiled periodically to `(2m-1) x (2n-1)`; its window at
/// `(r, c)` is the shift `X^{-r,-c}`, so one circulant correlation yields
/// every pairwise dot product.
pub fn gram_kernel_matrix<T: Scalar>(x0: &FeatureMap<T>, cfg: &KernelConfig) -> Result<KernelMatrix> {
    cfg.validate()?;
    let (m, n, ch) = x0.shape();
    let tiled = FeatureMap::from_fn(2 * m - 1, 2 * n - 1, ch, |i, j, d| x0.get(i % m, j % n, d))?;
    let corr = circulant_correlation(x0, &tiled)?;
    let norm = base_filter_norm(x0);
    let numel = x0.as_slice().len();
    let mn = m * n;
    let mut data = vec![0.0; mn * mn];
    for a in 0..mn {
        let map = &corr.maps()[a];
        for r in 0..m {
            for c in 0..n {
                let b = ((m - r) % m) * n + (n - c) % n;
                data[b * mn + a] = cfg.evaluate(norm, norm, map.get(r, c), numel);
            }
        }
    }
    // (a, b) and (b, a) come from different sums; average away the roundoff
    for a in 0..mn {
        for b in a + 1..mn {
            let v = 0.5 * (data[a * mn + b] + data[b * mn + a]);
            data[a * mn + b] = v;
            data[b * mn + a] = v;
        }
    }
    KernelMatrix::from_values(RealMatrix::new(mn, mn, data)?, (m, n), (m, n), *cfg)
}
