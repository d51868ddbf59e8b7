//! Seeded synthetic sequences: a textured square translating over clutter.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::tensor::{BoundingBox, GrayImage};

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceSpec {
    pub width: usize,
    pub height: usize,
    pub frames: usize,
    /// Side of the square target in pixels.
    pub target_size: usize,
    /// Top-left of the target in the first frame.
    pub start: (f64, f64),
    /// Per-frame displacement `(dx, dy)` in pixels.
    pub velocity: (f64, f64),
    pub seed: u64,
}

impl Default for SequenceSpec {
    fn default() -> Self {
        Self {
            width: 320,
            height: 240,
            frames: 100,
            target_size: 40,
            start: (30.0, 100.0),
            velocity: (2.0, 0.0),
            seed: 7,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Sequence {
    pub frames: Vec<GrayImage>,
    pub groundtruth: Vec<BoundingBox>,
}

/// Random-blob background plus fine noise texture, values in `[0, 1]`.
fn clutter(width: usize, height: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut px: Vec<f64> = (0..width * height).map(|_| rng.gen_range(0.3..0.5)).collect();
    let blobs = (width * height) / 400;
    for _ in 0..blobs {
        let cx = rng.gen_range(0.0..width as f64);
        let cy = rng.gen_range(0.0..height as f64);
        let r = rng.gen_range(3.0..12.0f64);
        let v = rng.gen_range(0.0..1.0);
        let (x0, x1) = ((cx - r).max(0.0) as usize, ((cx + r) as usize).min(width - 1));
        let (y0, y1) = ((cy - r).max(0.0) as usize, ((cy + r) as usize).min(height - 1));
        for y in y0..=y1 {
            for x in x0..=x1 {
                if (x as f64 - cx).hypot(y as f64 - cy) <= r {
                    px[y * width + x] = 0.5 * px[y * width + x] + 0.5 * v;
                }
            }
        }
    }
    px
}

/// Checker-and-stripe texture of side `size`, fixed by the rng.
fn texture(size: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let cell = (size / 5).max(2);
    let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let mut t = vec![0.0; size * size];
    for y in 0..size {
        for x in 0..size {
            let check = ((x / cell) + (y / cell)).is_multiple_of(2);
            let stripe = 0.5 + 0.5 * ((x + 2 * y) as f64 * 0.6 + phase).sin();
            let base = if check { 0.85 } else { 0.1 };
            t[y * size + x] = (0.7 * base + 0.3 * stripe).clamp(0.0, 1.0);
        }
    }
    // dark border makes the square's outline distinct from clutter
    for i in 0..size {
        for &(y, x) in &[(0, i), (size - 1, i), (i, 0), (i, size - 1)] {
            t[y * size + x] = 0.0;
        }
    }
    t
}

/// Renders the sequence. Sub-pixel target positions are bilinearly sampled.
pub fn generate(spec: &SequenceSpec) -> Result<Sequence> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let bg = clutter(spec.width, spec.height, &mut rng);
    let s = spec.target_size;
    let tex = texture(s, &mut rng);
    let tex_at = |u: isize, v: isize| -> Option<f64> {
        (u >= 0 && v >= 0 && (u as usize) < s && (v as usize) < s).then(|| tex[v as usize * s + u as usize])
    };

    let mut frames = Vec::with_capacity(spec.frames);
    let mut groundtruth = Vec::with_capacity(spec.frames);
    for f in 0..spec.frames {
        let ox = spec.start.0 + spec.velocity.0 * f as f64;
        let oy = spec.start.1 + spec.velocity.1 * f as f64;
        let mut px = bg.clone();
        let (x0, y0) = (ox.floor() as isize, oy.floor() as isize);
        let (fx, fy) = (ox - ox.floor(), oy - oy.floor());
        for y in y0.max(0)..(y0 + s as isize + 1).min(spec.height as isize) {
            for x in x0.max(0)..(x0 + s as isize + 1).min(spec.width as isize) {
                // inverse bilinear: pixel (x, y) reads texture at (x - ox, y - oy)
                let (u, v) = (x - x0, y - y0);
                let taps = [
                    (u, v, (1.0 - fx) * (1.0 - fy)),
                    (u - 1, v, fx * (1.0 - fy)),
                    (u, v - 1, (1.0 - fx) * fy),
                    (u - 1, v - 1, fx * fy),
                ];
                let idx = y as usize * spec.width + x as usize;
                let back = px[idx];
                px[idx] = taps
                    .iter()
                    .map(|&(tu, tv, w)| w * tex_at(tu, tv).unwrap_or(back))
                    .sum::<f64>()
                    .clamp(0.0, 1.0);
            }
        }
        frames.push(GrayImage::new(spec.height, spec.width, px)?);
        groundtruth.push(BoundingBox::new(ox, oy, s as f64, s as f64)?);
    }
    Ok(Sequence { frames, groundtruth })
}
