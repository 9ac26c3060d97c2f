use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::pgm::GrayImage;
use super::{Instance, Provenance};
use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// Add the two diagonal neighbours per pixel (8-connectivity).
    pub eight_neighbour: bool,
    /// Additive floor on every edge cost.
    pub epsilon: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            eight_neighbour: true,
            epsilon: 0.01,
        }
    }
}

/// Pixel grid graph. Edge cost is `ε + 1/(1 + |g(u) − g(v)|)`, times √2 on
/// diagonals, so strong intensity changes are cheap to cross.
///
/// Edges are emitted per pixel in row-major order as right, down, down-right,
/// down-left. The default query pair joins the middle of the left and right
/// borders.
pub fn grid_from_image(img: &GrayImage, spec: &GridSpec) -> Result<Instance> {
    let (w, h) = (img.width, img.height);
    if w < 2 || h < 2 {
        return Err(Error::ImageTooSmall {
            width: w,
            height: h,
        });
    }
    if img.pixels.len() != w * h || img.pixels.iter().any(|p| !p.is_finite()) {
        return Err(Error::BadPixelFormat(
            "pixel buffer does not match dimensions".into(),
        ));
    }
    if !(spec.epsilon >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be >= 0, got {}",
            spec.epsilon
        )));
    }
    let id = |x: usize, y: usize| y * w + x;
    let cost = |a: f64, b: f64, diag: bool| {
        let c = spec.epsilon + 1.0 / (1.0 + (a - b).abs());
        if diag {
            c * std::f64::consts::SQRT_2
        } else {
            c
        }
    };
    let mut edges = Vec::with_capacity(4 * w * h);
    for y in 0..h {
        for x in 0..w {
            let g = img.at(x, y);
            let mut push = |x2: usize, y2: usize, diag: bool| {
                edges.push((id(x, y), id(x2, y2), cost(g, img.at(x2, y2), diag)));
            };
            if x + 1 < w {
                push(x + 1, y, false);
            }
            if y + 1 < h {
                push(x, y + 1, false);
            }
            if spec.eight_neighbour && y + 1 < h {
                if x + 1 < w {
                    push(x + 1, y + 1, true);
                }
                if x > 0 {
                    push(x - 1, y + 1, true);
                }
            }
        }
    }
    let graph = Graph::new(w * h, &edges)?;
    let coords = (0..w * h)
        .map(|v| ((v % w) as f64, (v / w) as f64))
        .collect();
    let mut provenance = Provenance::new(
        "grid",
        json!({
            "width": w,
            "height": h,
            "eight_neighbour": spec.eight_neighbour,
            "epsilon": spec.epsilon,
        }),
        None,
    );
    provenance
        .notes
        .push("edge cost eps + 1/(1 + |dg|), x sqrt(2) on diagonals; simplified stand-in for a live-wire cost".into());
    Ok(Instance {
        graph,
        pairs: vec![(id(0, h / 2), id(w - 1, h / 2))],
        provenance,
        coords: Some(coords),
    })
}

/// Row of the ridge centre line at column `x`.
pub(crate) fn ridge_row(x: f64, width: usize, height: usize) -> f64 {
    let phase = 2.0 * std::f64::consts::PI * x / width as f64;
    height as f64 / 2.0 + height as f64 / 4.0 * phase.sin()
}

/// Synthetic test image: a faint horizontal gradient with a bright one-pixel
/// sinusoidal ridge through the middle of the left and right borders.
pub fn ridge_image(width: usize, height: usize) -> GrayImage {
    let mut pixels = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            let base = 60.0 + 60.0 * x as f64 / width as f64;
            let on_ridge = (y as f64 - ridge_row(x as f64, width, height)).abs() <= 0.5;
            pixels.push((base + if on_ridge { 120.0 } else { 0.0 }).round());
        }
    }
    GrayImage {
        width,
        height,
        maxval: 255,
        pixels,
    }
}

/// Smooth random test image: a horizontal gradient plus six Gaussian blobs of
/// random sign. Values are left unrounded, so neighbouring costs rarely tie.
pub fn blob_image(width: usize, height: usize, seed: u64) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = width.min(height) as f64;
    let blobs: Vec<(f64, f64, f64, f64)> = (0..6)
        .map(|_| {
            let amp = rng.gen_range(20.0..60.0) * if rng.gen::<bool>() { 1.0 } else { -1.0 };
            let radius = rng.gen_range(scale / 8.0..scale / 3.0);
            (
                rng.gen::<f64>() * width as f64,
                rng.gen::<f64>() * height as f64,
                radius,
                amp,
            )
        })
        .collect();
    let mut pixels = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            let mut g = 100.0 + 40.0 * x as f64 / width as f64;
            for &(cx, cy, r, a) in &blobs {
                let d2 = (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2);
                g += a * (-d2 / (2.0 * r * r)).exp();
            }
            pixels.push(g.clamp(0.0, 255.0));
        }
    }
    GrayImage {
        width,
        height,
        maxval: 255,
        pixels,
    }
}
