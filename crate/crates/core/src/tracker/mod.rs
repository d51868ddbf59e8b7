//! End-to-end tracker.
//!
//! Geometry, all in cells of `cell_size` pixels after the one-off small
//! target rescale:
//!
//! - target `m x n` cells (height x width, rounded half-up);
//! - search region `M x N` with `M = max(round(search_factor * sqrt(mn)), m)`,
//!   likewise `N`;
//! - the target sits at cell offset `((M-m)/2, (N-n)/2)` (floored) inside the
//!   region, which is where the Gaussian label peaks.
//!
//! Training kernel-regresses the labels over all `(M-m+1)(N-n+1)` real
//! windows of the region features. Detection evaluates `K' alpha` on a region
//! around the previous position and moves the box to the arg-max window.

mod features;
mod window;

pub use features::{extract_features, orientation_bin, HIST_EPS};
pub use window::{extract_subwindow, gaussian_label_map};

use crate::error::{Error, Result};
use crate::kernel::{kernel_matrix, KernelConfig, KernelKind};
use crate::regression::{LabelMap, ModelState};
use crate::tensor::{BoundingBox, FeatureMap, GrayImage, RealMatrix};
use window::resample_region;

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TrackerConfig {
    /// Pixels per feature cell side.
    pub cell_size: usize,
    /// Orientation bins of the gradient histogram; features have `bins + 1` channels.
    pub feature_bins: usize,
    pub kernel: KernelKind,
    pub sigma: f64,
    pub normalize_by_dim: bool,
    pub poly_degree: f64,
    pub poly_offset: f64,
    pub lambda: f64,
    /// Learning rate of the model update, in `(0, 1)`.
    pub gamma: f64,
    /// Search side in cells = `search_factor * sqrt(m n)`.
    pub search_factor: f64,
    /// Label std in cells = `label_bandwidth_factor * sqrt(m n)`.
    pub label_bandwidth_factor: f64,
    /// Targets with a smaller pixel area are upscaled to this area.
    pub small_target_area: f64,
    /// Odd number of scales searched per frame; 1 disables scale search.
    pub scale_steps: usize,
    pub scale_ratio: f64,
    /// Blend the base template toward each new frame with weight `gamma`.
    pub interpolate_template: bool,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            cell_size: 4,
            feature_bins: 8,
            kernel: KernelKind::Gaussian,
            sigma: 4.0,
            normalize_by_dim: true,
            poly_degree: 2.0,
            poly_offset: 1.0,
            lambda: 1e-4,
            gamma: 0.01,
            search_factor: 3.0,
            label_bandwidth_factor: 0.1,
            small_target_area: 1000.0,
            scale_steps: 1,
            scale_ratio: 1.02,
            interpolate_template: false,
        }
    }
}

impl TrackerConfig {
    pub fn kernel_config(&self) -> KernelConfig {
        KernelConfig {
            kind: self.kernel,
            sigma: self.sigma,
            poly_degree: self.poly_degree,
            poly_offset: self.poly_offset,
            normalize_by_dim: self.normalize_by_dim,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_string()));
        if self.cell_size == 0 || self.feature_bins == 0 {
            return bad("cell size and feature bins must be positive");
        }
        if !(self.lambda > 0.0) {
            return bad("lambda must be positive");
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return bad("gamma must lie in (0, 1)");
        }
        if !(self.search_factor >= 1.0) {
            return bad("search factor must be at least 1");
        }
        if !(self.label_bandwidth_factor > 0.0) || !(self.small_target_area > 0.0) {
            return bad("label bandwidth factor and small-target area must be positive");
        }
        if self.scale_steps == 0 || self.scale_steps.is_multiple_of(2) {
            return bad("scale steps must be odd and positive");
        }
        if !(self.scale_ratio >= 1.0) {
            return bad("scale ratio must be at least 1");
        }
        self.kernel_config().validate()
    }
}

/// Round half up, at least 1.
fn cells(px: f64, cell: usize) -> usize {
    ((px / cell as f64 + 0.5).floor() as usize).max(1)
}

/// Cell dimensions derived from a target size and the config.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Geometry {
    /// Target height and width in cells.
    pub m: usize,
    pub n: usize,
    /// Search region height and width in cells.
    pub big_m: usize,
    pub big_n: usize,
}

impl Geometry {
    /// `(w, h)` are the target extent in rescaled pixels.
    pub fn new(w: f64, h: f64, cfg: &TrackerConfig) -> Self {
        let m = cells(h, cfg.cell_size);
        let n = cells(w, cfg.cell_size);
        let side = (cfg.search_factor * ((m * n) as f64).sqrt() + 0.5).floor() as usize;
        Self {
            m,
            n,
            big_m: side.max(m),
            big_n: side.max(n),
        }
    }

    /// Cell offset of the target inside the search region.
    pub fn target_offset(&self) -> (usize, usize) {
        ((self.big_m - self.m) / 2, (self.big_n - self.n) / 2)
    }

    pub fn response_dims(&self) -> (usize, usize) {
        (self.big_m - self.m + 1, self.big_n - self.n + 1)
    }
}

/// Upscale factor applied to every frame so the initial target covers at
/// least `small_target_area` pixels.
pub fn resize_ratio(init_box: &BoundingBox, small_target_area: f64) -> f64 {
    if init_box.area() < small_target_area {
        (small_target_area / init_box.area()).sqrt()
    } else {
        1.0
    }
}

#[derive(Debug, Clone)]
pub struct TrackerState {
    pub model: ModelState,
    pub base_filter: FeatureMap<f64>,
    pub target_box: BoundingBox,
    pub resize_ratio: f64,
    pub geometry: Geometry,
    /// Current size relative to the initial box.
    pub scale: f64,
    pub config: TrackerConfig,
    labels: LabelMap,
    base_size: (f64, f64),
}

/// Output of [`detect`].
#[derive(Debug, Clone)]
pub struct Detection {
    pub target_box: BoundingBox,
    pub response: RealMatrix<f64>,
    pub peak: f64,
    pub scale: f64,
}

impl TrackerState {
    pub fn labels(&self) -> &LabelMap {
        &self.labels
    }

    /// Search-region features around `center` (original pixels) at `scale`.
    fn region_features(&self, frame: &GrayImage, center: (f64, f64), scale: f64) -> Result<FeatureMap<f64>> {
        region_features(frame, center, scale, self.resize_ratio, &self.geometry, &self.config)
    }
}

fn region_features(
    frame: &GrayImage,
    center: (f64, f64),
    scale: f64,
    ratio: f64,
    g: &Geometry,
    cfg: &TrackerConfig,
) -> Result<FeatureMap<f64>> {
    let cell = cfg.cell_size as f64;
    let (oi, oj) = g.target_offset();
    // the target's top-left in rescaled pixels is one cell-aligned offset
    // away from the region's top-left
    let px_to_src = scale / ratio;
    let left = center.0 - (g.n as f64 * cell / 2.0 + oj as f64 * cell) * px_to_src;
    let top = center.1 - (g.m as f64 * cell / 2.0 + oi as f64 * cell) * px_to_src;
    let out_w = g.big_n * cfg.cell_size;
    let out_h = g.big_m * cfg.cell_size;
    let patch = resample_region(
        frame,
        left,
        top,
        out_w as f64 * px_to_src,
        out_h as f64 * px_to_src,
        out_w,
        out_h,
    )?;
    extract_features(&patch, cfg.cell_size, cfg.feature_bins)
}

pub fn init_tracker(frame: &GrayImage, init_box: &BoundingBox, cfg: &TrackerConfig) -> Result<TrackerState> {
    cfg.validate()?;
    if !(init_box.w > 0.0 && init_box.h > 0.0) {
        return Err(Error::BoxOutsideFrame(format!("zero-area box {init_box:?}")));
    }
    if !init_box.is_inside(frame.width(), frame.height()) {
        return Err(Error::BoxOutsideFrame(format!(
            "{init_box:?} not inside {}x{} frame",
            frame.width(),
            frame.height()
        )));
    }
    let ratio = resize_ratio(init_box, cfg.small_target_area);
    let geometry = Geometry::new(init_box.w * ratio, init_box.h * ratio, cfg);
    let (oi, oj) = geometry.target_offset();
    let (rr, rc) = geometry.response_dims();
    let bandwidth = cfg.label_bandwidth_factor * ((geometry.m * geometry.n) as f64).sqrt();
    let labels = gaussian_label_map(rr, rc, oi, oj, bandwidth)?;

    let z = region_features(frame, init_box.center(), 1.0, ratio, &geometry, cfg)?;
    let base_filter = z.window(oi, oj, geometry.m, geometry.n)?;
    let k = kernel_matrix(&base_filter, &z, &cfg.kernel_config())?;
    let model = ModelState::init(&k, &labels, cfg.lambda, cfg.gamma)?;

    Ok(TrackerState {
        model,
        base_filter,
        target_box: *init_box,
        resize_ratio: ratio,
        geometry,
        scale: 1.0,
        config: cfg.clone(),
        labels,
        base_size: (init_box.w, init_box.h),
    })
}

fn scale_factors(cfg: &TrackerConfig) -> Vec<f64> {
    let half = (cfg.scale_steps / 2) as i32;
    (-half..=half).map(|k| cfg.scale_ratio.powi(k)).collect()
}

/// Response map and peak for one candidate scale.
fn respond(state: &TrackerState, frame: &GrayImage, center: (f64, f64), scale: f64) -> Result<(RealMatrix<f64>, f64)> {
    let z = state.region_features(frame, center, scale)?;
    let k = kernel_matrix(&state.base_filter, &z, &state.config.kernel_config())?;
    let response = k.response(state.model.alpha())?;
    let peak = response.max();
    Ok((response, peak))
}

/// Locates the target in `frame` starting from the current box.
pub fn detect(state: &TrackerState, frame: &GrayImage) -> Result<Detection> {
    let center = state.target_box.center();
    let mut best: Option<(RealMatrix<f64>, f64, f64)> = None;
    for s in scale_factors(&state.config) {
        let scale = state.scale * s;
        let (response, peak) = respond(state, frame, center, scale)?;
        if best.as_ref().is_none_or(|b| peak > b.1) {
            best = Some((response, peak, scale));
        }
    }
    let (response, peak, scale) = best.expect("at least one scale");

    let flat = response.max() - response.min() <= 0.0;
    let (cx, cy) = if flat {
        center
    } else {
        let (r, c) = response.argmax();
        let (oi, oj) = state.geometry.target_offset();
        let step = state.config.cell_size as f64 * scale / state.resize_ratio;
        (
            center.0 + (c as f64 - oj as f64) * step,
            center.1 + (r as f64 - oi as f64) * step,
        )
    };
    let (bw, bh) = (state.base_size.0 * scale, state.base_size.1 * scale);
    let target_box = BoundingBox::from_center(cx, cy, bw, bh)?.clamp_to(frame.width(), frame.height());
    Ok(Detection {
        target_box,
        response,
        peak,
        scale: if flat { state.scale } else { scale },
    })
}

/// Folds the frame, sampled around `located_box`, into the model.
pub fn update(mut state: TrackerState, frame: &GrayImage, located_box: &BoundingBox) -> Result<TrackerState> {
    update_in_place(&mut state, frame, located_box)?;
    Ok(state)
}

fn update_in_place(state: &mut TrackerState, frame: &GrayImage, located_box: &BoundingBox) -> Result<()> {
    if !(located_box.w > 0.0 && located_box.h > 0.0) {
        return Err(Error::InvalidParameter(format!("invalid box {located_box:?}")));
    }
    let scale = located_box.w / state.base_size.0;
    let z = state.region_features(frame, located_box.center(), scale)?;
    let kcfg = state.config.kernel_config();
    let k = kernel_matrix(&state.base_filter, &z, &kcfg)?;
    state.model.update(&k, &state.labels)?;
    if state.config.interpolate_template {
        let (oi, oj) = state.geometry.target_offset();
        let fresh = z.window(oi, oj, state.geometry.m, state.geometry.n)?;
        state.base_filter = state.base_filter.lerp(&fresh, state.config.gamma)?;
    }
    state.target_box = *located_box;
    state.scale = scale;
    Ok(())
}

/// Frame-by-frame driver: detect, then update at the detected box.
#[derive(Debug, Clone)]
pub struct Tracker {
    state: TrackerState,
}

impl Tracker {
    pub fn new(frame: &GrayImage, init_box: &BoundingBox, cfg: &TrackerConfig) -> Result<Self> {
        Ok(Self {
            state: init_tracker(frame, init_box, cfg)?,
        })
    }

    pub fn state(&self) -> &TrackerState {
        &self.state
    }

    pub fn track(&mut self, frame: &GrayImage) -> Result<BoundingBox> {
        let det = detect(&self.state, frame)?;
        let located = det.target_box;
        update_in_place(&mut self.state, frame, &located)?;
        Ok(located)
    }
}

/// Tracks through `frames`; the first box is `init_box` clamped to the
/// first frame. A frame that fails to load aborts with its index.
pub fn track_sequence<I>(frames: I, init_box: &BoundingBox, cfg: &TrackerConfig) -> Result<Vec<BoundingBox>>
where
    I: IntoIterator<Item = Result<GrayImage>>,
{
    let wrap = |index: usize| move |e: Error| Error::Frame { index, source: Box::new(e) };
    let mut iter = frames.into_iter().enumerate();
    let (_, first) = iter
        .next()
        .ok_or_else(|| Error::InvalidParameter("empty frame sequence".into()))?;
    let first = first.map_err(wrap(0))?;
    let mut tracker = Tracker::new(&first, init_box, cfg)?;
    let mut boxes = vec![init_box.clamp_to(first.width(), first.height())];
    for (index, frame) in iter {
        let frame = frame.map_err(wrap(index))?;
        boxes.push(tracker.track(&frame).map_err(wrap(index))?);
    }
    Ok(boxes)
}
