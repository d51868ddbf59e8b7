//! Ridge regression over kernel correlation matrices.
//!
//! Single frame: `alpha = (K^T K + lambda I)^{-1} K^T y`.
//!
//! Over frames `q = 1..Q` with exponential weights
//! `beta_1 = (1-gamma)^{Q-1}`, `beta_q = gamma (1-gamma)^{Q-q}` the normal
//! equations become `K_S alpha = v` with
//!
//! ```text
//! K_S = sum_q beta_q (K_q^T K_q + lambda I),   v = sum_q beta_q K_q^T y
//! ```
//!
//! which [`ModelState::update`] maintains recursively:
//! `K_S <- (1-gamma) K_S + gamma (K^T K + lambda I)`, likewise for `v`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::kernel::KernelMatrix;
use crate::tensor::RealMatrix;

/// Regression target on the dense-sample grid: values in `[0, 1]` with a
/// single peak of exactly 1.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelMap {
    values: RealMatrix<f64>,
    peak: (usize, usize),
}

impl LabelMap {
    pub fn new(values: RealMatrix<f64>) -> Result<Self> {
        if values.as_slice().iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidParameter("labels must lie in [0, 1]".into()));
        }
        let ones = values.as_slice().iter().filter(|&&v| v == 1.0).count();
        if ones != 1 {
            return Err(Error::InvalidParameter(format!(
                "labels need exactly one peak of value 1, found {ones}"
            )));
        }
        let peak = values.argmax();
        Ok(Self { values, peak })
    }

    pub fn values(&self) -> &RealMatrix<f64> {
        &self.values
    }

    pub fn peak(&self) -> (usize, usize) {
        self.peak
    }

    pub fn shape(&self) -> (usize, usize) {
        self.values.shape()
    }

    /// Row-major flattening, matching kernel matrix rows.
    pub fn as_slice(&self) -> &[f64] {
        self.values.as_slice()
    }

    fn to_dvector(&self) -> DVector<f64> {
        DVector::from_column_slice(self.as_slice())
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    Ok(())
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "learning rate must lie in (0, 1), got {gamma}"
        )));
    }
    Ok(())
}

fn check_rows(k: &KernelMatrix, y: &LabelMap) -> Result<()> {
    if k.rows() != y.as_slice().len() {
        return Err(Error::Dimension(format!(
            "kernel has {} samples, labels have {}",
            k.rows(),
            y.as_slice().len()
        )));
    }
    Ok(())
}

/// `(K^T K + lambda I, K^T y)`.
fn normal_terms(k: &KernelMatrix, y: &LabelMap, lambda: f64) -> (DMatrix<f64>, DVector<f64>) {
    let km = k.to_dmatrix();
    let mut gram = km.tr_mul(&km);
    for i in 0..gram.nrows() {
        gram[(i, i)] += lambda;
    }
    let rhs = km.tr_mul(&y.to_dvector());
    (gram, rhs)
}

fn symmetrize(a: &mut DMatrix<f64>) {
    let n = a.nrows();
    for i in 0..n {
        for j in i + 1..n {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
}

/// Solves the symmetric positive-definite system, retrying once with
/// diagonal jitter `1e-10 * trace / n`.
pub fn spd_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    if let Some(ch) = Cholesky::<f64, Dyn>::new(a.clone()) {
        return Ok(ch.solve(b));
    }
    let n = a.nrows();
    let jitter = 1e-10 * a.trace() / n as f64;
    let mut aj = a.clone();
    for i in 0..n {
        aj[(i, i)] += jitter;
    }
    Cholesky::<f64, Dyn>::new(aj)
        .map(|ch| ch.solve(b))
        .ok_or(Error::NotPositiveDefinite)
}

pub fn solve_ridge(k: &KernelMatrix, y: &LabelMap, lambda: f64) -> Result<Vec<f64>> {
    check_lambda(lambda)?;
    check_rows(k, y)?;
    let (a, b) = normal_terms(k, y, lambda);
    Ok(spd_solve(&a, &b)?.as_slice().to_vec())
}

/// Weights `beta_1..beta_Q` for `Q` frames; they sum to one.
pub fn frame_weights(frames: usize, gamma: f64) -> Vec<f64> {
    (1..=frames)
        .map(|q| {
            if q == 1 {
                (1.0 - gamma).powi(frames as i32 - 1)
            } else {
                gamma * (1.0 - gamma).powi((frames - q) as i32)
            }
        })
        .collect()
}

/// Multi-frame solution from the explicit weighted sums.
pub fn direct_multiframe_solution(
    ks: &[KernelMatrix],
    y: &LabelMap,
    lambda: f64,
    gamma: f64,
) -> Result<Vec<f64>> {
    check_lambda(lambda)?;
    check_gamma(gamma)?;
    let first = ks
        .first()
        .ok_or_else(|| Error::InvalidParameter("no frames".into()))?;
    let weights = frame_weights(ks.len(), gamma);
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "frame weights sum to {total}"
        )));
    }
    let mn = first.cols();
    let mut a = DMatrix::zeros(mn, mn);
    let mut b = DVector::zeros(mn);
    for (k, w) in ks.iter().zip(&weights) {
        check_rows(k, y)?;
        if k.cols() != mn {
            return Err(Error::Dimension("kernel matrices differ in filter count".into()));
        }
        let (ga, gb) = normal_terms(k, y, lambda);
        a += ga * *w;
        b += gb * *w;
    }
    Ok(spd_solve(&a, &b)?.as_slice().to_vec())
}

/// Accumulated normal equations and the current dual coefficients.
#[derive(Debug, Clone)]
pub struct ModelState {
    ks: DMatrix<f64>,
    v: DVector<f64>,
    alpha: DVector<f64>,
    lambda: f64,
    gamma: f64,
    frames: usize,
}

impl ModelState {
    pub fn init(k: &KernelMatrix, y: &LabelMap, lambda: f64, gamma: f64) -> Result<Self> {
        check_lambda(lambda)?;
        check_gamma(gamma)?;
        check_rows(k, y)?;
        let (ks, v) = normal_terms(k, y, lambda);
        let alpha = spd_solve(&ks, &v)?;
        Ok(Self {
            ks,
            v,
            alpha,
            lambda,
            gamma,
            frames: 1,
        })
    }

    /// Blends in one more frame and re-solves for `alpha`.
    pub fn update(&mut self, k: &KernelMatrix, y: &LabelMap) -> Result<()> {
        check_rows(k, y)?;
        if k.cols() != self.v.len() {
            return Err(Error::Dimension(format!(
                "kernel has {} filters, model has {}",
                k.cols(),
                self.v.len()
            )));
        }
        let (ga, gb) = normal_terms(k, y, self.lambda);
        let keep = 1.0 - self.gamma;
        self.ks = &self.ks * keep + ga * self.gamma;
        symmetrize(&mut self.ks);
        self.v = &self.v * keep + gb * self.gamma;
        self.alpha = spd_solve(&self.ks, &self.v)?;
        self.frames += 1;
        Ok(())
    }

    pub fn alpha(&self) -> &[f64] {
        self.alpha.as_slice()
    }

    #[cfg(test)]
    pub(crate) fn clear_alpha(&mut self) {
        self.alpha.fill(0.0);
    }

    pub fn accumulated_gram(&self) -> &DMatrix<f64> {
        &self.ks
    }

    pub fn accumulated_rhs(&self) -> &DVector<f64> {
        &self.v
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Frames folded in so far (`Q`).
    pub fn frame_count(&self) -> usize {
        self.frames
    }

    /// `||K_S alpha - v|| / ||v||`.
    pub fn residual(&self) -> f64 {
        let r = (&self.ks * &self.alpha - &self.v).norm();
        r / self.v.norm().max(f64::MIN_POSITIVE)
    }
}

pub fn init_model(k: &KernelMatrix, y: &LabelMap, lambda: f64, gamma: f64) -> Result<ModelState> {
    ModelState::init(k, y, lambda, gamma)
}

pub fn update_model(mut state: ModelState, k: &KernelMatrix, y: &LabelMap) -> Result<ModelState> {
    state.update(k, y)?;
    Ok(state)
}
