//! Boundary-effect-free kernelized correlation filter.
//!
//! The filter is a kernel ridge regressor whose basis functions are the
//! `m*n` cyclic shifts of a base template, trained against every real
//! (non-wrapped) `m x n` window of a larger search region. Building the
//! kernel matrix naively costs O(m^2 n^2 MND); this crate evaluates it in
//! O(mnMND) with two structured algorithms:
//!
//! - [`acsii`]: squared norms of all dense windows via a squared integral image.
//! - [`ccim`]: correlations of all circulant filters against all windows via
//!   an integral matrix over shifted weighted signals.
//!
//! On top of those sit [`kernel`] assembly, closed-form and recursive
//! [`regression`], a [`tracker`], OTB-style [`eval`] metrics and Netpbm
//! [`io`]. [`oracle`] holds brute-force references for verification.
//!
//! Tensors are generic over [`Scalar`] (`f32` or `f64`); the correlation
//! routines always accumulate in `f64`.

pub mod acsii;
pub mod ccim;
pub mod cyclic;
pub mod error;
pub mod eval;
pub mod io;
pub mod kernel;
pub mod oracle;
mod par;
pub mod regression;
pub mod scalar;
pub mod synthetic;
pub mod tensor;
pub mod tracker;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use tensor::{BoundingBox, FeatureMap, GrayImage, RealMatrix};

pub type FeatureMapF32 = FeatureMap<f32>;
pub type FeatureMapF64 = FeatureMap<f64>;
pub type MatrixF32 = RealMatrix<f32>;
pub type MatrixF64 = RealMatrix<f64>;
