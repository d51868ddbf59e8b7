//! Circulant correlation with an integral matrix.
//!
//! Correlates all `m*n` cyclic shifts `X^{i',j'}` of a base filter `X^{0,0}`
//! (`m x n x D`) against every interior window of a signal `Z`
//! (`M x N x D`) in O(mnMND), instead of O(m^2 n^2 MND) for the direct
//! sweep.
//!
//! The pipeline:
//!
//! 1. Fundamental matrices `B^{i,j} = P^{-i} (sum_d X(i,j,d) Z_d) Q^{-j}`,
//!    i.e. `B^{i,j}(r, c) = sum_d X(i,j,d) Z((r+i) mod M, (c+j) mod N, d)`.
//! 2. The integral matrix `M_{s,t} = sum_{i<=s, j<=t} B^{i,j}`, a 2D prefix
//!    sum taken over filter positions, entrywise in the `M x N` plane.
//! 3. For each shift `(i',j')` the filter splits into four blocks by where
//!    `X(0,0)` lands (L top-left, G top-right, K bottom-left, J bottom-right).
//!    Each block is a contiguous rectangle of the base filter, so its
//!    contribution is a rectangle difference of the integral matrix,
//!    realigned by a constant cyclic shift:
//!
//!    ```text
//!    S_L = P^{m-i'} S^L Q^{n-j'}     S_G = P^{m-i'} S^G Q^{-j'}
//!    S_K = P^{-i'}  S^K Q^{n-j'}     S_J = P^{-i'}  S^J Q^{-j'}
//!    ```
//!
//!    and `C^{i',j'}` is the top-left `(M-m+1) x (N-n+1)` block of
//!    `S_L + S_G + S_K + S_J`.
//!
//! [`circulant_correlation`] evaluates step 3 only on the extracted block:
//! each output entry gathers the shifted integral-matrix entries directly,
//! which is the same sum without materializing the four `M x N` matrices.
//! [`realigned_blocks`] exposes the materialized form.
//!
//! Memory is Θ(mnMN): the integral matrix holds `m*n` planes of `M x N`.

use crate::cyclic::{cyclic_shift, source_index, ShiftSpec};
use crate::error::{Error, Result};
use crate::par::{map_range, PAR_THRESHOLD};
use crate::scalar::Scalar;
use crate::tensor::{FeatureMap, RealMatrix};

/// A stack of `m*n` planes of size `M x N`, indexed by filter position.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneStack {
    m: usize,
    n: usize,
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl PlaneStack {
    pub fn filter_dims(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    pub fn plane_dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn plane(&self, i: usize, j: usize) -> &[f64] {
        let len = self.rows * self.cols;
        let k = i * self.n + j;
        &self.data[k * len..(k + 1) * len]
    }

    pub fn matrix(&self, i: usize, j: usize) -> RealMatrix<f64> {
        RealMatrix::from_raw(self.rows, self.cols, self.plane(i, j).to_vec())
    }
}

/// The shifted weighted signals `B^{i,j}`.
pub type FundamentalMatrixSet = PlaneStack;

/// Prefix sums `M_{s,t}` of the fundamental matrices.
pub type IntegralMatrix = PlaneStack;

/// The `m*n` correlation maps `C^{i',j'}`, each `(M-m+1) x (N-n+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationStack {
    m: usize,
    n: usize,
    maps: Vec<RealMatrix<f64>>,
}

impl CorrelationStack {
    pub fn new(m: usize, n: usize, maps: Vec<RealMatrix<f64>>) -> Result<Self> {
        if maps.len() != m * n || m == 0 || n == 0 {
            return Err(Error::Dimension(format!(
                "expected {} maps for a {m}x{n} filter, got {}",
                m * n,
                maps.len()
            )));
        }
        let shape = maps[0].shape();
        if maps.iter().any(|c| c.shape() != shape) {
            return Err(Error::Dimension("correlation maps differ in shape".into()));
        }
        Ok(Self { m, n, maps })
    }

    pub fn filter_dims(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    /// `(M-m+1, N-n+1)`.
    pub fn map_dims(&self) -> (usize, usize) {
        self.maps[0].shape()
    }

    /// `C^{i',j'}`.
    pub fn get(&self, di: usize, dj: usize) -> &RealMatrix<f64> {
        &self.maps[di * self.n + dj]
    }

    /// Maps in filter order `c = i' * n + j'`.
    pub fn maps(&self) -> &[RealMatrix<f64>] {
        &self.maps
    }
}

/// Which realignment the evaluation step applies. Only `Standard` is correct;
/// `FlippedRowSign` exists so the self-test can prove it detects a broken
/// realignment.
#[doc(hidden)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Realignment {
    #[default]
    Standard,
    FlippedRowSign,
}

fn check_shapes<T: Scalar>(x0: &FeatureMap<T>, z: &FeatureMap<T>) -> Result<()> {
    if x0.channels() != z.channels() {
        return Err(Error::Dimension(format!(
            "filter has {} channels, signal has {}",
            x0.channels(),
            z.channels()
        )));
    }
    if x0.rows() > z.rows() || x0.cols() > z.cols() {
        return Err(Error::WindowTooLarge {
            m: x0.rows(),
            n: x0.cols(),
            rows: z.rows(),
            cols: z.cols(),
        });
    }
    Ok(())
}

fn work(x0_len: usize, rows: usize, cols: usize) -> usize {
    x0_len * rows * cols
}

pub fn fundamental_matrices<T: Scalar>(
    x0: &FeatureMap<T>,
    z: &FeatureMap<T>,
) -> Result<FundamentalMatrixSet> {
    check_shapes(x0, z)?;
    let (m, n, _) = x0.shape();
    let (rows, cols, _) = z.shape();
    let parallel = work(x0.as_slice().len(), rows, cols) >= PAR_THRESHOLD;

    let planes = map_range(m * n, parallel, |k| {
        let (i, j) = (k / n, k % n);
        let w: Vec<f64> = x0.pixel(i, j).iter().map(|v| v.widen()).collect();
        let mut plane = Vec::with_capacity(rows * cols);
        if w.iter().all(|&v| v == 0.0) {
            plane.resize(rows * cols, 0.0);
            return plane;
        }
        for r in 0..rows {
            let zr = (r + i) % rows;
            for c in 0..cols {
                let zc = (c + j) % cols;
                let acc: f64 = z
                    .pixel(zr, zc)
                    .iter()
                    .zip(&w)
                    .map(|(zv, wv)| zv.widen() * wv)
                    .sum();
                plane.push(acc);
            }
        }
        plane
    });

    Ok(PlaneStack {
        m,
        n,
        rows,
        cols,
        data: planes.concat(),
    })
}

/// Builds `M_{s,t}` with the 2D prefix recurrence over filter positions.
pub fn integral_matrix(fm: &FundamentalMatrixSet) -> IntegralMatrix {
    into_integral(fm.clone())
}

fn into_integral(mut stack: PlaneStack) -> IntegralMatrix {
    let (m, n) = (stack.m, stack.n);
    let plane = stack.rows * stack.cols;
    // in place: planes up, left and diagonal of (i, j) are already final
    let data = &mut stack.data;
    for i in 0..m {
        for j in 0..n {
            let cur = (i * n + j) * plane;
            let (head, tail) = data.split_at_mut(cur);
            let out = &mut tail[..plane];
            let at = |a: usize, b: usize| &head[(a * n + b) * plane..][..plane];
            match (i, j) {
                (0, 0) => {}
                (0, _) => out.iter_mut().zip(at(0, j - 1)).for_each(|(o, l)| *o += l),
                (_, 0) => out.iter_mut().zip(at(i - 1, 0)).for_each(|(o, u)| *o += u),
                _ => {
                    let (up, left, diag) = (at(i - 1, j), at(i, j - 1), at(i - 1, j - 1));
                    for p in 0..plane {
                        out[p] += up[p] + left[p] - diag[p];
                    }
                }
            }
        }
    }
    stack
}

/// Plane indices `(s, t)` combined with sign to form each block sum; an
/// empty list is a zero block.
struct BlockTerms {
    l: Vec<(usize, usize, f64)>,
    g: Vec<(usize, usize, f64)>,
    k: Vec<(usize, usize, f64)>,
    j: Vec<(usize, usize, f64)>,
}

fn block_terms(m: usize, n: usize, di: usize, dj: usize) -> BlockTerms {
    let (top, left) = (m - di - 1, n - dj - 1);
    let l = if di == 0 || dj == 0 {
        vec![]
    } else {
        vec![
            (m - 1, n - 1, 1.0),
            (m - 1, left, -1.0),
            (top, n - 1, -1.0),
            (top, left, 1.0),
        ]
    };
    let g = if di == 0 {
        vec![]
    } else {
        vec![(m - 1, left, 1.0), (top, left, -1.0)]
    };
    let k = if dj == 0 {
        vec![]
    } else {
        vec![(top, n - 1, 1.0), (top, left, -1.0)]
    };
    BlockTerms {
        l,
        g,
        k,
        j: vec![(top, left, 1.0)],
    }
}

fn block_sum(im: &IntegralMatrix, terms: &[(usize, usize, f64)]) -> RealMatrix<f64> {
    let mut acc = vec![0.0; im.rows * im.cols];
    for &(s, t, sign) in terms {
        for (a, v) in acc.iter_mut().zip(im.plane(s, t)) {
            *a += sign * v;
        }
    }
    RealMatrix::from_raw(im.rows, im.cols, acc)
}

/// The four realigned `M x N` block sums `[S_L, S_G, S_K, S_J]` for shift
/// `(di, dj)`, produced with explicit cyclic shifts.
pub fn realigned_blocks(im: &IntegralMatrix, di: usize, dj: usize) -> [RealMatrix<f64>; 4] {
    let (m, n) = (im.m, im.n);
    let terms = block_terms(m, n, di, dj);
    let (di, dj) = (di as isize, dj as isize);
    let (mi, nj) = (m as isize - di, n as isize - dj);
    [
        cyclic_shift(&block_sum(im, &terms.l), ShiftSpec::new(mi, nj)),
        cyclic_shift(&block_sum(im, &terms.g), ShiftSpec::new(mi, -dj)),
        cyclic_shift(&block_sum(im, &terms.k), ShiftSpec::new(-di, nj)),
        cyclic_shift(&block_sum(im, &terms.j), ShiftSpec::new(-di, -dj)),
    ]
}

/// Evaluates `C^{i',j'}` for every shift from a prebuilt integral matrix.
pub fn correlate_from_integral(im: &IntegralMatrix) -> Result<CorrelationStack> {
    evaluate(im, Realignment::Standard)
}

/// Output columns `0..out` read source `(c - shift) mod cols`; as a rotation
/// that is at most two contiguous runs `(dst_start, src_start, len)`.
fn column_runs(shift: isize, out: usize, cols: usize) -> Vec<(usize, usize, usize)> {
    let start = source_index(0, shift, cols);
    let first = out.min(cols - start);
    let mut runs = vec![(0, start, first)];
    if first < out {
        runs.push((first, 0, out - first));
    }
    runs
}

fn evaluate(im: &IntegralMatrix, realign: Realignment) -> Result<CorrelationStack> {
    let (m, n) = (im.m, im.n);
    let (rows, cols) = (im.rows, im.cols);
    let (out_r, out_c) = (rows - m + 1, cols - n + 1);
    let parallel = m * n * out_r * out_c * 9 >= PAR_THRESHOLD;

    let maps = map_range(m * n, parallel, |k| {
        let (di, dj) = (k / n, k % n);
        let terms = block_terms(m, n, di, dj);
        let (di_s, dj_s) = (di as isize, dj as isize);
        let kj_row_shift = match realign {
            Realignment::Standard => -di_s,
            Realignment::FlippedRowSign => di_s,
        };
        // Output (r, c) of a shifted block reads source (r - shift) mod dim;
        // these shifts are constant for a given (i', j').
        let rows_lg: Vec<usize> = (0..out_r)
            .map(|r| source_index(r, m as isize - di_s, rows))
            .collect();
        let rows_kj: Vec<usize> = (0..out_r).map(|r| source_index(r, kj_row_shift, rows)).collect();
        let cols_lk = column_runs(n as isize - dj_s, out_c, cols);
        let cols_gj = column_runs(-dj_s, out_c, cols);

        let mut out = vec![0.0; out_r * out_c];
        let mut add = |terms: &[(usize, usize, f64)], row_idx: &[usize], runs: &[(usize, usize, usize)]| {
            for &(s, t, sign) in terms {
                let plane = im.plane(s, t);
                for (r, &sr) in row_idx.iter().enumerate() {
                    let src = &plane[sr * cols..(sr + 1) * cols];
                    let dst = &mut out[r * out_c..(r + 1) * out_c];
                    for &(d0, s0, len) in runs {
                        for (d, v) in dst[d0..d0 + len].iter_mut().zip(&src[s0..s0 + len]) {
                            *d += sign * v;
                        }
                    }
                }
            }
        };
        add(&terms.l, &rows_lg, &cols_lk);
        add(&terms.g, &rows_lg, &cols_gj);
        add(&terms.k, &rows_kj, &cols_lk);
        add(&terms.j, &rows_kj, &cols_gj);
        RealMatrix::from_raw(out_r, out_c, out)
    });
    CorrelationStack::new(m, n, maps)
}

/// Correlation of every circulant shift of `x0` against every interior
/// window of `z`: `C^{i',j'}(i'', j'') = <X^{i',j'}, Z^{i'',j''}>`.
pub fn circulant_correlation<T: Scalar>(
    x0: &FeatureMap<T>,
    z: &FeatureMap<T>,
) -> Result<CorrelationStack> {
    circulant_correlation_with(x0, z, Realignment::Standard)
}

#[doc(hidden)]
pub fn circulant_correlation_with<T: Scalar>(
    x0: &FeatureMap<T>,
    z: &FeatureMap<T>,
    realign: Realignment,
) -> Result<CorrelationStack> {
    let fm = fundamental_matrices(x0, z)?;
    evaluate(&into_integral(fm), realign)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclic::cyclic_shift_map;

    fn seq_map(rows: usize, cols: usize) -> FeatureMap<f64> {
        FeatureMap::from_fn(rows, cols, 1, |i, j, _| (i * cols + j + 1) as f64).unwrap()
    }

    /// Direct sweep over materialized shifts, kept local so these unit
    /// tests do not depend on the oracle module.
    fn direct(x0: &FeatureMap<f64>, z: &FeatureMap<f64>, di: usize, dj: usize) -> RealMatrix<f64> {
        let x = cyclic_shift_map(x0, ShiftSpec::new(di as isize, dj as isize)).unwrap();
        let (m, n, ch) = x.shape();
        RealMatrix::from_fn(z.rows() - m + 1, z.cols() - n + 1, |r, c| {
            let mut s = 0.0;
            for i in 0..m {
                for j in 0..n {
                    for d in 0..ch {
                        s += x.get(i, j, d) * z.get(r + i, c + j, d);
                    }
                }
            }
            s
        })
        .unwrap()
    }

    #[test]
    fn fundamental_matrix_examples() {
        let z = FeatureMap::from_fn(4, 5, 1, |i, j, _| (i * 5 + j) as f64 * 0.5 - 3.0).unwrap();
        let one = FeatureMap::new(1, 1, 1, vec![1.0]).unwrap();
        let fm = fundamental_matrices(&one, &z).unwrap();
        assert_eq!(fm.matrix(0, 0), z.channel(0));

        let mut x0 = seq_map(3, 3).into_vec();
        x0[4] = 0.0;
        let x0 = FeatureMap::new(3, 3, 1, x0).unwrap();
        let fm = fundamental_matrices(&x0, &seq_map(5, 5)).unwrap();
        assert!(fm.plane(1, 1).iter().all(|&v| v == 0.0));

        let fm = fundamental_matrices(&seq_map(3, 3), &seq_map(5, 5)).unwrap();
        assert_eq!(fm.matrix(2, 2).get(3, 3), 9.0);
        for i in 0..3 {
            for j in 0..3 {
                let w = (i * 3 + j + 1) as f64;
                let zij = (i * 5 + j + 1) as f64;
                assert_eq!(fm.matrix(i, j).get(0, 0), w * zij);
            }
        }
    }

    #[test]
    fn fundamental_matches_shifted_weighted_sum() {
        let x0 = FeatureMap::from_fn(2, 3, 2, |i, j, d| (i + 2 * j) as f64 - d as f64 * 1.5).unwrap();
        let z = FeatureMap::from_fn(4, 4, 2, |i, j, d| ((i * 4 + j) * 3 + d) as f64 % 7.0).unwrap();
        let fm = fundamental_matrices(&x0, &z).unwrap();
        for i in 0..2 {
            for j in 0..3 {
                let weighted = RealMatrix::from_fn(4, 4, |r, c| {
                    (0..2).map(|d| x0.get(i, j, d) * z.get(r, c, d)).sum()
                })
                .unwrap();
                let expect = cyclic_shift(&weighted, ShiftSpec::new(-(i as isize), -(j as isize)));
                assert_eq!(fm.matrix(i, j), expect);
            }
        }
    }

    #[test]
    fn integral_matrix_examples() {
        let one = FeatureMap::new(1, 1, 1, vec![2.0]).unwrap();
        let fm = fundamental_matrices(&one, &seq_map(3, 3)).unwrap();
        assert_eq!(integral_matrix(&fm), fm);

        let x0 = FeatureMap::from_fn(3, 3, 1, |i, j, _| ((i * 5 + j * 3) % 4) as f64 - 1.25).unwrap();
        let z = FeatureMap::from_fn(5, 5, 1, |i, j, _| ((i * 7 + j * 2) % 9) as f64 * 0.3).unwrap();
        let fm = fundamental_matrices(&x0, &z).unwrap();
        let im = integral_matrix(&fm);
        for s in 0..3 {
            for t in 0..3 {
                let plane = im.plane(s, t);
                for p in 0..25 {
                    let mut direct = 0.0;
                    for i in 0..=s {
                        for j in 0..=t {
                            direct += fm.plane(i, j)[p];
                        }
                    }
                    assert!((plane[p] - direct).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn supplement_instance() {
        let c = circulant_correlation(&seq_map(3, 3), &seq_map(5, 5)).unwrap();
        assert_eq!(c.map_dims(), (3, 3));
        assert_eq!(c.get(0, 0).get(0, 0), 411.0);
        assert_eq!(c.get(1, 1).get(0, 0), 267.0);
    }

    #[test]
    fn delta_filter_is_identity() {
        let mut x = vec![0.0; 3 * 2 * 2];
        x[0] = 1.0;
        x[1] = 1.0;
        let x0 = FeatureMap::new(3, 2, 2, x).unwrap();
        let z = FeatureMap::from_fn(6, 5, 2, |i, j, d| (i * 5 + j) as f64 + d as f64 * 0.25).unwrap();
        let c = circulant_correlation(&x0, &z).unwrap();
        let c00 = c.get(0, 0);
        for r in 0..4 {
            for col in 0..4 {
                assert_eq!(c00.get(r, col), z.get(r, col, 0) + z.get(r, col, 1));
            }
        }
    }

    #[test]
    fn every_shift_matches_direct_sweep() {
        for (m, n, rows, cols, ch) in [(1, 1, 3, 3, 1), (3, 3, 5, 5, 1), (2, 4, 5, 6, 2), (4, 3, 4, 7, 3), (3, 2, 3, 2, 2)] {
            let x0 = FeatureMap::from_fn(m, n, ch, |i, j, d| ((i * 11 + j * 5 + d * 3) % 13) as f64 - 6.0)
                .unwrap();
            let z = FeatureMap::from_fn(rows, cols, ch, |i, j, d| ((i * 7 + j * 3 + d) % 10) as f64 - 4.0)
                .unwrap();
            let c = circulant_correlation(&x0, &z).unwrap();
            let im = integral_matrix(&fundamental_matrices(&x0, &z).unwrap());
            for di in 0..m {
                for dj in 0..n {
                    let expect = direct(&x0, &z, di, dj);
                    assert_eq!(c.get(di, dj), &expect, "({m},{n},{rows},{cols}) shift ({di},{dj})");
                    // materialized realignment agrees with the fused gather
                    let parts = realigned_blocks(&im, di, dj);
                    let sum = RealMatrix::from_fn(rows, cols, |r, cc| {
                        parts.iter().map(|p| p.get(r, cc)).sum()
                    })
                    .unwrap();
                    assert_eq!(sum.sub_matrix(0, 0, rows - m + 1, cols - n + 1).unwrap(), expect);
                }
            }
        }
    }

    #[test]
    fn flipped_realignment_is_wrong() {
        let x0 = seq_map(3, 3);
        let z = seq_map(5, 5);
        let good = circulant_correlation(&x0, &z).unwrap();
        let bad = circulant_correlation_with(&x0, &z, Realignment::FlippedRowSign).unwrap();
        assert_eq!(good.get(0, 0), bad.get(0, 0));
        assert_ne!(good.get(1, 1), bad.get(1, 1));
    }

    #[test]
    fn shape_errors() {
        let x0 = FeatureMap::<f64>::zeros(3, 2, 1).unwrap();
        let z = FeatureMap::<f64>::zeros(2, 5, 1).unwrap();
        assert!(matches!(circulant_correlation(&x0, &z), Err(Error::WindowTooLarge { .. })));
        let z2 = FeatureMap::<f64>::zeros(5, 5, 2).unwrap();
        assert!(matches!(circulant_correlation(&x0, &z2), Err(Error::Dimension(_))));
    }
}
