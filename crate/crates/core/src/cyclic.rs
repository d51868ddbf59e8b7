//! Cyclic shifts as index arithmetic.
//!
//! Left-multiplying by the `rows x rows` cyclic permutation `P` moves row 0
//! to row 1 (and the last row to row 0); right-multiplying by the
//! `cols x cols` permutation `Q` moves column 0 to column 1. The pair
//! `P^di * X * Q^dj` is therefore
//!
//! ```text
//! result(i, j) = X((i - di) mod rows, (j - dj) mod cols)
//! ```
//!
//! and negative powers shift the other way. No permutation matrix is ever
//! materialized.

use crate::error::Result;
use crate::scalar::Scalar;
use crate::tensor::{FeatureMap, RealMatrix};

/// Row and column shift amounts; any integers, reduced modulo the operand shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ShiftSpec {
    pub di: isize,
    pub dj: isize,
}

impl ShiftSpec {
    pub const fn new(di: isize, dj: isize) -> Self {
        Self { di, dj }
    }

    pub const fn inverse(self) -> Self {
        Self {
            di: -self.di,
            dj: -self.dj,
        }
    }

    pub const fn then(self, other: Self) -> Self {
        Self {
            di: self.di + other.di,
            dj: self.dj + other.dj,
        }
    }
}

/// Non-negative remainder of `i - shift` modulo `len`.
#[inline]
pub fn source_index(i: usize, shift: isize, len: usize) -> usize {
    (i as isize - shift).rem_euclid(len as isize) as usize
}

pub fn cyclic_shift<T: Scalar>(m: &RealMatrix<T>, spec: ShiftSpec) -> RealMatrix<T> {
    let (rows, cols) = m.shape();
    let col_src: Vec<usize> = (0..cols).map(|j| source_index(j, spec.dj, cols)).collect();
    let mut data = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        let src = m.row(source_index(i, spec.di, rows));
        data.extend(col_src.iter().map(|&c| src[c]));
    }
    RealMatrix::from_raw(rows, cols, data)
}

/// Applies the same spatial shift to every channel.
pub fn cyclic_shift_map<T: Scalar>(fm: &FeatureMap<T>, spec: ShiftSpec) -> Result<FeatureMap<T>> {
    let (rows, cols, ch) = fm.shape();
    let mut data = Vec::with_capacity(rows * cols * ch);
    for i in 0..rows {
        let si = source_index(i, spec.di, rows);
        for j in 0..cols {
            data.extend_from_slice(fm.pixel(si, source_index(j, spec.dj, cols)));
        }
    }
    FeatureMap::new(rows, cols, ch, data)
}
