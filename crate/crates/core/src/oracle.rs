//! Brute-force references for the fast paths.
//!
//! Nothing here touches integral images, integral matrices or realignment:
//! every window is summed directly and every circulant filter is
//! materialized. Inputs are limited to 16x16 signals.

use crate::ccim::CorrelationStack;
use crate::cyclic::{cyclic_shift_map, ShiftSpec};
use crate::error::{Error, Result};
use crate::kernel::{KernelConfig, KernelMatrix};
use crate::scalar::Scalar;
use crate::tensor::{FeatureMap, RealMatrix};

pub const MAX_ORACLE_DIM: usize = 16;

fn guard<T: Scalar>(z: &FeatureMap<T>) -> Result<()> {
    if z.rows() > MAX_ORACLE_DIM || z.cols() > MAX_ORACLE_DIM {
        return Err(Error::OracleTooLarge {
            rows: z.rows(),
            cols: z.cols(),
        });
    }
    Ok(())
}

fn fits<T: Scalar>(m: usize, n: usize, z: &FeatureMap<T>) -> Result<()> {
    if m == 0 || n == 0 || m > z.rows() || n > z.cols() {
        return Err(Error::WindowTooLarge {
            m,
            n,
            rows: z.rows(),
            cols: z.cols(),
        });
    }
    Ok(())
}

/// Dot product of `x` with the window of `z` whose top-left is `(r, c)`.
fn window_dot<T: Scalar>(x: &FeatureMap<T>, z: &FeatureMap<T>, r: usize, c: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..x.rows() {
        for j in 0..x.cols() {
            for d in 0..x.channels() {
                s += x.get(i, j, d).widen() * z.get(r + i, c + j, d).widen();
            }
        }
    }
    s
}

pub fn brute_autocorrelation<T: Scalar>(z: &FeatureMap<T>, m: usize, n: usize) -> Result<RealMatrix<f64>> {
    guard(z)?;
    fits(m, n, z)?;
    RealMatrix::from_fn(z.rows() - m + 1, z.cols() - n + 1, |r, c| {
        let mut s = 0.0;
        for i in r..r + m {
            for j in c..c + n {
                for d in 0..z.channels() {
                    let v = z.get(i, j, d).widen();
                    s += v * v;
                }
            }
        }
        s
    })
}

fn materialized_filters<T: Scalar>(x0: &FeatureMap<T>) -> Result<Vec<FeatureMap<T>>> {
    let (m, n) = (x0.rows(), x0.cols());
    (0..m * n)
        .map(|k| cyclic_shift_map(x0, ShiftSpec::new((k / n) as isize, (k % n) as isize)))
        .collect()
}

fn check_pair<T: Scalar>(x0: &FeatureMap<T>, z: &FeatureMap<T>) -> Result<()> {
    guard(z)?;
    fits(x0.rows(), x0.cols(), z)?;
    if x0.channels() != z.channels() {
        return Err(Error::Dimension(format!(
            "filter has {} channels, signal has {}",
            x0.channels(),
            z.channels()
        )));
    }
    Ok(())
}

pub fn brute_circulant_correlation<T: Scalar>(
    x0: &FeatureMap<T>,
    z: &FeatureMap<T>,
) -> Result<CorrelationStack> {
    check_pair(x0, z)?;
    let (m, n) = (x0.rows(), x0.cols());
    let maps = materialized_filters(x0)?
        .iter()
        .map(|x| RealMatrix::from_fn(z.rows() - m + 1, z.cols() - n + 1, |r, c| window_dot(x, z, r, c)))
        .collect::<Result<Vec<_>>>()?;
    CorrelationStack::new(m, n, maps)
}

/// Evaluates every kernel entry from the materialized filter and window.
pub fn brute_kernel_matrix<T: Scalar>(
    x0: &FeatureMap<T>,
    z: &FeatureMap<T>,
    cfg: &KernelConfig,
) -> Result<KernelMatrix> {
    check_pair(x0, z)?;
    cfg.validate()?;
    let (m, n, ch) = x0.shape();
    let (sr, sc) = (z.rows() - m + 1, z.cols() - n + 1);
    let filters = materialized_filters(x0)?;
    let numel = m * n * ch;
    let mut data = Vec::with_capacity(sr * sc * m * n);
    for r in 0..sr {
        for c in 0..sc {
            let window = z.window(r, c, m, n)?;
            let wsq = window.squared_norm();
            for x in &filters {
                let xsq = x.squared_norm();
                let cross = window_dot(x, z, r, c);
                data.push(cfg.evaluate(xsq, wsq, cross, numel));
            }
        }
    }
    KernelMatrix::from_values(RealMatrix::new(sr * sc, m * n, data)?, (sr, sc), (m, n), *cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq_map(rows: usize, cols: usize) -> FeatureMap<f64> {
        FeatureMap::from_fn(rows, cols, 1, |i, j, _| (i * cols + j + 1) as f64).unwrap()
    }

    #[test]
    fn autocorrelation_cases() {
        let z = seq_map(3, 3);
        assert_eq!(
            brute_autocorrelation(&z, 2, 2).unwrap().as_slice(),
            &[46.0, 74.0, 154.0, 206.0]
        );
        let ones = FeatureMap::new(4, 4, 3, vec![1.0; 48]).unwrap();
        assert!(brute_autocorrelation(&ones, 2, 3)
            .unwrap()
            .as_slice()
            .iter()
            .all(|&v| v == 18.0));
        assert!(matches!(
            brute_autocorrelation(&FeatureMap::<f64>::zeros(17, 2, 1).unwrap(), 1, 1),
            Err(Error::OracleTooLarge { .. })
        ));
    }

    #[test]
    fn correlation_supplement_values() {
        let c = brute_circulant_correlation(&seq_map(3, 3), &seq_map(5, 5)).unwrap();
        assert_eq!(c.get(0, 0).get(0, 0), 411.0);
        assert_eq!(c.get(1, 1).get(0, 0), 267.0);
    }

    #[test]
    fn correlation_delta_and_linearity() {
        let mut x = vec![0.0; 6];
        x[0] = 1.0;
        let delta = FeatureMap::new(2, 3, 1, x).unwrap();
        let z = seq_map(4, 5);
        let c = brute_circulant_correlation(&delta, &z).unwrap();
        assert_eq!(c.get(0, 0), &z.channel(0).sub_matrix(0, 0, 3, 3).unwrap());

        let a = FeatureMap::from_fn(2, 3, 1, |i, j, _| (i + j) as f64).unwrap();
        let b = FeatureMap::from_fn(2, 3, 1, |i, j, _| (i * j) as f64 - 1.0).unwrap();
        let ab = FeatureMap::from_fn(2, 3, 1, |i, j, d| 2.0 * a.get(i, j, d) - 3.0 * b.get(i, j, d)).unwrap();
        let (ca, cb, cab) = (
            brute_circulant_correlation(&a, &z).unwrap(),
            brute_circulant_correlation(&b, &z).unwrap(),
            brute_circulant_correlation(&ab, &z).unwrap(),
        );
        for k in 0..6 {
            for (p, v) in cab.maps()[k].as_slice().iter().enumerate() {
                assert_eq!(*v, 2.0 * ca.maps()[k].as_slice()[p] - 3.0 * cb.maps()[k].as_slice()[p]);
            }
        }
    }

    #[test]
    fn kernel_cases() {
        let x0 = FeatureMap::from_fn(2, 2, 2, |i, j, d| (i * 2 + j) as f64 * 0.3 - d as f64).unwrap();
        let g = brute_kernel_matrix(&x0, &x0, &KernelConfig::gaussian(1.0)).unwrap();
        assert_eq!(g.rows(), 1);
        assert!((g.get(0, 0) - 1.0).abs() < 1e-15);

        let z = seq_map(4, 4);
        let x1 = seq_map(2, 2);
        let lin = brute_kernel_matrix(&x1, &z, &KernelConfig::linear()).unwrap();
        let corr = brute_circulant_correlation(&x1, &z).unwrap();
        for c in 0..4 {
            for p in 0..9 {
                assert_eq!(lin.get(p, c), corr.maps()[c].as_slice()[p]);
            }
        }
    }
}
