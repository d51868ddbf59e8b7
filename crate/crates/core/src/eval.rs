//! OTB-style tracking metrics.
//!
//! Conventions: a frame is "precise" at threshold `t` when its center error
//! is `<= t` pixels; it "succeeds" at overlap threshold `t` when its IoU is
//! strictly greater than `t`. The precision curve samples `t = 0..=50` px,
//! the success curve samples `t = 0, 0.05, .., 1` (21 points), and AUC is
//! the mean of the success samples. Perfect tracking therefore scores an
//! AUC of 20/21: no IoU exceeds 1.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::BoundingBox;

pub const PRECISION_THRESHOLD: f64 = 20.0;
pub const OVERLAP_THRESHOLD: f64 = 0.5;
pub const PRECISION_SAMPLES: usize = 51;
pub const SUCCESS_SAMPLES: usize = 21;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackingMetrics {
    pub mean_center_error: f64,
    pub distance_precision: f64,
    pub precision_curve: Vec<f64>,
    pub mean_overlap: f64,
    pub overlap_precision: f64,
    pub success_curve: Vec<f64>,
    pub auc: f64,
}

pub fn center_error(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let (ax, ay) = a.center();
    let (bx, by) = b.center();
    (ax - bx).hypot(ay - by)
}

/// Intersection over union.
pub fn overlap_ratio(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let iw = ((a.x + a.w).min(b.x + b.w) - a.x.max(b.x)).max(0.0);
    let ih = ((a.y + a.h).min(b.y + b.h) - a.y.max(b.y)).max(0.0);
    let inter = iw * ih;
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        0.0
    } else {
        (inter / union).clamp(0.0, 1.0)
    }
}

/// Success-curve thresholds `k / 20` for `k = 0..=20`.
pub fn success_thresholds() -> Vec<f64> {
    (0..SUCCESS_SAMPLES).map(|k| k as f64 / 20.0).collect()
}

fn fraction(values: &[f64], pred: impl Fn(f64) -> bool) -> f64 {
    values.iter().filter(|&&v| pred(v)).count() as f64 / values.len() as f64
}

pub fn summarize(pred: &[BoundingBox], gt: &[BoundingBox]) -> Result<TrackingMetrics> {
    if pred.len() != gt.len() || pred.is_empty() {
        return Err(Error::Dimension(format!(
            "{} predictions for {} ground-truth boxes",
            pred.len(),
            gt.len()
        )));
    }
    let errors: Vec<f64> = pred.iter().zip(gt).map(|(p, g)| center_error(p, g)).collect();
    let overlaps: Vec<f64> = pred.iter().zip(gt).map(|(p, g)| overlap_ratio(p, g)).collect();
    let count = errors.len() as f64;

    let precision_curve: Vec<f64> = (0..PRECISION_SAMPLES)
        .map(|t| fraction(&errors, |e| e <= t as f64))
        .collect();
    let success_curve: Vec<f64> = success_thresholds()
        .into_iter()
        .map(|t| fraction(&overlaps, |o| o > t))
        .collect();
    let auc = success_curve.iter().sum::<f64>() / SUCCESS_SAMPLES as f64;

    Ok(TrackingMetrics {
        mean_center_error: errors.iter().sum::<f64>() / count,
        distance_precision: fraction(&errors, |e| e <= PRECISION_THRESHOLD),
        precision_curve,
        mean_overlap: overlaps.iter().sum::<f64>() / count,
        overlap_precision: fraction(&overlaps, |o| o > OVERLAP_THRESHOLD),
        success_curve,
        auc,
    })
}
