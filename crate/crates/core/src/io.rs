//! Image and annotation files.
//!
//! Netpbm grayscale/color (P2, P3, P5, P6) is parsed here; PNG, JPEG and
//! BMP go through the `image` crate. Color converts to gray with luma
//! weights `0.299 R + 0.587 G + 0.114 B`.
//!
//! Ground truth follows the OTB text layout: one `x,y,w,h` box per line,
//! comma or whitespace separated, 1-indexed. Boxes are 0-indexed in memory.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{io_err, Error, Result};
use crate::eval::TrackingMetrics;
use crate::tensor::{BoundingBox, GrayImage};

const LUMA: [f64; 3] = [0.299, 0.587, 0.114];

pub const IMAGE_EXTENSIONS: &[&str] = &["pgm", "ppm", "pnm", "png", "jpg", "jpeg", "bmp"];

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> std::result::Result<u32, String> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(if self.pos >= self.bytes.len() {
                format!("truncated before {what}")
            } else {
                format!("expected {what}, found byte 0x{:02x}", self.bytes[self.pos])
            });
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| format!("{what} out of range"))
    }
}

/// Parses a P2/P3/P5/P6 Netpbm image into gray intensities in `[0, 1]`.
pub fn parse_pnm(bytes: &[u8]) -> std::result::Result<GrayImage, String> {
    if bytes.len() < 2 || bytes[0] != b'P' {
        return Err("missing Netpbm magic number".into());
    }
    let (plain, channels) = match bytes[1] {
        b'2' => (true, 1),
        b'3' => (true, 3),
        b'5' => (false, 1),
        b'6' => (false, 3),
        other => return Err(format!("unsupported Netpbm type P{}", other as char)),
    };
    let mut cur = Cursor { bytes, pos: 2 };
    let width = cur.number("width")? as usize;
    let height = cur.number("height")? as usize;
    let maxval = cur.number("maxval")?;
    if width == 0 || height == 0 {
        return Err("zero image dimension".into());
    }
    if maxval == 0 || maxval > 65535 {
        return Err(format!("maxval {maxval} outside 1..=65535"));
    }
    let count = width * height * channels;
    let mut samples = Vec::with_capacity(count);
    if plain {
        for _ in 0..count {
            samples.push(cur.number("sample")?);
        }
    } else {
        // exactly one whitespace byte separates the header from the raster
        if !bytes.get(cur.pos).is_some_and(u8::is_ascii_whitespace) {
            return Err("missing whitespace after maxval".into());
        }
        let raster = &bytes[cur.pos + 1..];
        let width_bytes = if maxval < 256 { 1 } else { 2 };
        if raster.len() < count * width_bytes {
            return Err(format!(
                "truncated raster: need {} bytes, have {}",
                count * width_bytes,
                raster.len()
            ));
        }
        if width_bytes == 1 {
            samples.extend(raster[..count].iter().map(|&b| u32::from(b)));
        } else {
            samples.extend(
                raster[..2 * count]
                    .chunks_exact(2)
                    .map(|c| u32::from(u16::from_be_bytes([c[0], c[1]]))),
            );
        }
    }
    if let Some(s) = samples.iter().find(|&&s| s > maxval) {
        return Err(format!("sample {s} exceeds maxval {maxval}"));
    }
    let scale = f64::from(maxval);
    let pixels = if channels == 1 {
        samples.iter().map(|&s| f64::from(s) / scale).collect()
    } else {
        samples
            .chunks_exact(3)
            .map(|rgb| {
                let v: f64 = rgb.iter().zip(LUMA).map(|(&c, w)| w * f64::from(c) / scale).sum();
                v.clamp(0.0, 1.0)
            })
            .collect()
    };
    GrayImage::new(height, width, pixels).map_err(|e| e.to_string())
}

pub fn load_image(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(io_err(path))?;
    let format_err = |message: String| Error::Format {
        path: path.to_path_buf(),
        message,
    };
    if bytes.first() == Some(&b'P') {
        return parse_pnm(&bytes).map_err(format_err);
    }
    let decoded = image::load_from_memory(&bytes).map_err(|e| format_err(e.to_string()))?;
    let rgb = decoded.to_rgb32f();
    let (w, h) = rgb.dimensions();
    let pixels = rgb
        .pixels()
        .map(|p| {
            let v: f64 = p.0.iter().zip(LUMA).map(|(&c, w)| w * f64::from(c)).sum();
            v.clamp(0.0, 1.0)
        })
        .collect();
    GrayImage::new(h as usize, w as usize, pixels)
}

/// Writes an 8-bit binary PGM.
pub fn write_pgm(path: impl AsRef<Path>, img: &GrayImage) -> Result<()> {
    let path = path.as_ref();
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend(img.pixels().iter().map(|&p| (p * 255.0).round() as u8));
    fs::write(path, out).map_err(io_err(path))
}

/// Image files of a sequence directory in lexicographic filename order.
pub fn list_sequence(dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    let mut frames: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io_err(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .and_then(|e| e.to_str())
                    .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
        })
        .collect();
    frames.sort();
    Ok(frames)
}

fn parse_fields(line: &str) -> Option<Vec<f64>> {
    line.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().ok())
        .collect()
}

/// Parses OTB ground truth text; `path` only labels errors.
pub fn parse_groundtruth(text: &str, path: &Path) -> Result<Vec<BoundingBox>> {
    let mut boxes = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: k + 1,
            message,
        };
        let fields = parse_fields(line)
            .filter(|f| f.len() == 4)
            .ok_or_else(|| parse_err(format!("expected four numbers x,y,w,h, got '{line}'")))?;
        let b = BoundingBox::new(fields[0] - 1.0, fields[1] - 1.0, fields[2], fields[3])
            .map_err(|e| parse_err(e.to_string()))?;
        boxes.push(b);
    }
    Ok(boxes)
}

pub fn load_groundtruth(path: impl AsRef<Path>) -> Result<Vec<BoundingBox>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_groundtruth(&text, path)
}

/// CSV with header `frame,x,y,w,h`, 0-indexed frames and coordinates,
/// four decimals.
pub fn format_results(boxes: &[BoundingBox]) -> String {
    let mut out = String::from("frame,x,y,w,h\n");
    for (i, b) in boxes.iter().enumerate() {
        out.push_str(&format!("{i},{:.4},{:.4},{:.4},{:.4}\n", b.x, b.y, b.w, b.h));
    }
    out
}

pub fn write_results(path: impl AsRef<Path>, boxes: &[BoundingBox]) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_results(boxes)).map_err(io_err(path))
}

pub fn read_results(path: impl AsRef<Path>) -> Result<Vec<BoundingBox>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut boxes = Vec::new();
    for (k, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: k + 1,
            message,
        };
        let f = parse_fields(line)
            .filter(|f| f.len() == 5)
            .ok_or_else(|| parse_err(format!("expected frame,x,y,w,h, got '{line}'")))?;
        boxes.push(BoundingBox::new(f[1], f[2], f[3], f[4]).map_err(|e| parse_err(e.to_string()))?);
    }
    Ok(boxes)
}

pub fn format_metrics(metrics: &TrackingMetrics) -> Result<String> {
    Ok(serde_json::to_string_pretty(metrics)? + "\n")
}

pub fn write_metrics(path: impl AsRef<Path>, metrics: &TrackingMetrics) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_metrics(metrics)?).map_err(io_err(path))
}
