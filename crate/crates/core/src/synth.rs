//! Synthetic shapes for checking regularity metrics, a seeded boundary
//! noise model and square-grid decompositions.
//!
//! Generated regions have their bounding box anchored at the origin.

use std::collections::HashSet;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{is_four_connected, PixelSet};
use crate::model::{LabelMap, Point, Region};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeKind {
    Square,
    Circle,
    Hexagon,
    Ellipse,
    Cross,
    U,
    Split,
    Stripe,
    Bean,
}

impl ShapeKind {
    pub const ALL: [ShapeKind; 9] = [
        Self::Square,
        Self::Circle,
        Self::Hexagon,
        Self::Ellipse,
        Self::Cross,
        Self::U,
        Self::Split,
        Self::Stripe,
        Self::Bean,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Square => "square",
            Self::Circle => "circle",
            Self::Hexagon => "hexagon",
            Self::Ellipse => "ellipse",
            Self::Cross => "cross",
            Self::U => "u",
            Self::Split => "split",
            Self::Stripe => "stripe",
            Self::Bean => "bean",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

/// Parameters of a synthetic shape.
///
/// `size` is the side of the bounding square (diameter for discs).
/// `aspect` is the long/short axis ratio of ellipses and stripes.
/// `thickness` is the arm width of crosses and U shapes and the gap of split
/// shapes; it defaults to `size / 3` for crosses and `size / 5` otherwise.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShapeSpec {
    pub kind: ShapeKind,
    pub size: usize,
    pub aspect: f64,
    pub thickness: Option<usize>,
    pub noise_amplitude: usize,
    pub seed: u64,
}

impl ShapeSpec {
    pub fn new(kind: ShapeKind, size: usize) -> Self {
        Self {
            kind,
            size,
            aspect: 2.0,
            thickness: None,
            noise_amplitude: 0,
            seed: 0,
        }
    }

    pub fn with_aspect(mut self, aspect: f64) -> Self {
        self.aspect = aspect;
        self
    }

    pub fn with_thickness(mut self, thickness: usize) -> Self {
        self.thickness = Some(thickness);
        self
    }

    pub fn with_noise(mut self, amplitude: usize, seed: u64) -> Self {
        self.noise_amplitude = amplitude;
        self.seed = seed;
        self
    }

    fn thickness_or_default(&self) -> usize {
        self.thickness
            .unwrap_or(match self.kind {
                ShapeKind::Cross => (self.size as f64 / 3.0).round() as usize,
                _ => self.size / 5,
            })
            .max(1)
    }

    fn validate(&self) -> Result<()> {
        if self.size < 3 {
            return Err(Error::DegenerateShape(format!(
                "size must be at least 3, got {}",
                self.size
            )));
        }
        if !(self.aspect >= 1.0 && self.aspect.is_finite()) {
            return Err(Error::DegenerateShape(format!(
                "aspect must be a finite ratio >= 1, got {}",
                self.aspect
            )));
        }
        if let Some(t) = self.thickness {
            if t == 0 || t > self.size {
                return Err(Error::DegenerateShape(format!(
                    "thickness must lie in 1..={}, got {t}",
                    self.size
                )));
            }
        }
        Ok(())
    }
}

fn collect(size: usize, keep: impl Fn(f64, f64) -> bool) -> Vec<Point> {
    let mut out = Vec::new();
    for y in 0..size as i32 {
        for x in 0..size as i32 {
            if keep(x as f64, y as f64) {
                out.push((x, y));
            }
        }
    }
    out
}

fn in_rotated_ellipse(x: f64, y: f64, cx: f64, cy: f64, a: f64, b: f64, angle: f64) -> bool {
    let (dx, dy) = (x - cx, y - cy);
    let (s, c) = angle.sin_cos();
    let u = c * dx + s * dy;
    let v = -s * dx + c * dy;
    (u / a).powi(2) + (v / b).powi(2) <= 1.0
}

fn base_pixels(spec: &ShapeSpec) -> Vec<Point> {
    let n = spec.size;
    let s = n as f64;
    let c = (s - 1.0) / 2.0;
    let t = spec.thickness_or_default().min(n);
    let ti = t as i32;
    let ni = n as i32;
    match spec.kind {
        ShapeKind::Square => collect(n, |_, _| true),
        ShapeKind::Circle => collect(n, |x, y| (x - c).powi(2) + (y - c).powi(2) <= c * c),
        ShapeKind::Hexagon => {
            let r = c;
            let h = 3f64.sqrt() / 2.0 * r;
            collect(n, |x, y| {
                let (dx, dy) = ((x - c).abs(), (y - c).abs());
                dy <= h && 3f64.sqrt() * dx + dy <= 3f64.sqrt() * r
            })
        }
        ShapeKind::Ellipse => {
            let a = c;
            let b = a / spec.aspect;
            collect(n, |x, y| {
                ((x - c) / a).powi(2) + ((y - c) / b).powi(2) <= 1.0
            })
        }
        ShapeKind::Cross => {
            let o = (ni - ti) / 2;
            collect(n, |x, y| {
                let (x, y) = (x as i32, y as i32);
                (o..o + ti).contains(&x) || (o..o + ti).contains(&y)
            })
        }
        ShapeKind::U => collect(n, |x, y| {
            let (x, y) = (x as i32, y as i32);
            x < ti || x >= ni - ti || y >= ni - ti
        }),
        ShapeKind::Split => {
            let gap = ti.min(ni - 2);
            let left = (ni - gap) / 2;
            let mid = ni / 2;
            collect(n, |x, y| {
                let (x, y) = (x as i32, y as i32);
                x < left || x >= left + gap || y == mid
            })
        }
        ShapeKind::Stripe => {
            let w = ((s / spec.aspect).round() as usize).max(1);
            let mut out = Vec::new();
            for y in 0..w as i32 {
                for x in 0..ni {
                    out.push((x, y));
                }
            }
            out
        }
        ShapeKind::Bean => {
            let (a, b) = (0.3 * s, 0.17 * s);
            let tilt = 25.0 * PI / 180.0;
            let (cl, cr) = (0.5 * s - 0.2 * s, 0.5 * s + 0.2 * s);
            let cy = 0.45 * s;
            collect(n, |x, y| {
                in_rotated_ellipse(x, y, cl, cy, a, b, tilt)
                    || in_rotated_ellipse(x, y, cr, cy, a, b, -tilt)
            })
        }
    }
}

fn anchored(pixels: Vec<Point>) -> Vec<Point> {
    let x0 = pixels.iter().map(|p| p.0).min().unwrap_or(0);
    let y0 = pixels.iter().map(|p| p.1).min().unwrap_or(0);
    pixels.into_iter().map(|(x, y)| (x - x0, y - y0)).collect()
}

/// Rasterizes the shape and applies its boundary noise, if any.
pub fn generate(spec: &ShapeSpec) -> Result<Region> {
    spec.validate()?;
    let pixels = anchored(base_pixels(spec));
    if pixels.is_empty() || !is_four_connected(&pixels) {
        return Err(Error::DegenerateShape(format!(
            "{} of size {} is not a single 4-connected component",
            spec.kind.name(),
            spec.size
        )));
    }
    let region = Region::new(0, pixels)?;
    add_boundary_noise(&region, spec.noise_amplitude, spec.seed)
}

/// Smallest-error size whose generated area is closest to `target_area`
/// (ties go to the smaller size).
pub fn size_for_area(spec: &ShapeSpec, target_area: usize) -> Result<usize> {
    let mut best: Option<(usize, usize)> = None;
    let mut size = 3;
    loop {
        let s = ShapeSpec {
            size,
            noise_amplitude: 0,
            ..spec.clone()
        };
        let area = generate(&s).map(|r| r.area()).unwrap_or(0);
        let err = area.abs_diff(target_area);
        if best.is_none_or(|(_, e)| err < e) {
            best = Some((size, err));
        }
        if area > 2 * target_area + 16 || size > 4 * target_area + 16 {
            break;
        }
        size += 1;
    }
    Ok(best.expect("at least one size tried").0)
}

const NOISE_ATTEMPTS: usize = 8;
const FLIP_PROBABILITY: f64 = 0.5;
const DIRECTIONS: [Point; 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];

/// Perturbs the boundary: each boundary pixel, with probability 1/2, is
/// either pushed outward (dilation) or carved inward (erosion) along one of
/// its outward normals, by a depth drawn uniformly in `1..=amplitude`.
/// Results that are not 4-connected are redrawn; after a fixed number of
/// failures the shape is reported as degenerate. Coordinates that would
/// become negative are shifted back to the origin.
pub fn add_boundary_noise(region: &Region, amplitude: usize, seed: u64) -> Result<Region> {
    if amplitude == 0 {
        return Ok(region.clone());
    }
    let set = PixelSet::new(region.pixels());
    let interior = region.pixels().iter().any(|&p| !set.is_boundary(p));
    if !interior {
        return Err(Error::DegenerateShape(
            "shape has no interior pixel; noise would disconnect it".into(),
        ));
    }
    let boundary: Vec<Point> = region
        .pixels()
        .iter()
        .copied()
        .filter(|&p| set.is_boundary(p))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..NOISE_ATTEMPTS {
        let mut added = HashSet::new();
        let mut removed = HashSet::new();
        for &(x, y) in &boundary {
            let outward: Vec<Point> = DIRECTIONS
                .iter()
                .copied()
                .filter(|&(dx, dy)| !set.contains((x + dx, y + dy)))
                .collect();
            let (dx, dy) = outward[rng.random_range(0..outward.len())];
            if !rng.random_bool(FLIP_PROBABILITY) {
                continue;
            }
            let depth = rng.random_range(1..=amplitude) as i32;
            if rng.random_bool(0.5) {
                for k in 1..=depth {
                    added.insert((x + k * dx, y + k * dy));
                }
            } else {
                for k in 0..depth {
                    removed.insert((x - k * dx, y - k * dy));
                }
            }
        }
        let mut pixels: Vec<Point> = region
            .pixels()
            .iter()
            .copied()
            .filter(|p| !removed.contains(p))
            .collect();
        pixels.extend(added);
        if !pixels.is_empty() && is_four_connected(&pixels) {
            let x0 = pixels.iter().map(|p| p.0).min().expect("non-empty").min(0);
            let y0 = pixels.iter().map(|p| p.1).min().expect("non-empty").min(0);
            let pixels = pixels.into_iter().map(|(x, y)| (x - x0, y - y0)).collect();
            return Region::new(region.label(), pixels);
        }
    }
    Err(Error::DegenerateShape(format!(
        "boundary noise disconnected the shape in {NOISE_ATTEMPTS} attempts"
    )))
}

/// Axis-aligned blocks of `cell × cell` pixels labeled row by row; the last
/// row and column are truncated by the canvas.
pub fn grid_decomposition(width: usize, height: usize, cell: usize) -> Result<LabelMap> {
    if cell == 0 {
        return Err(Error::InvalidParameter(
            "cell size must be at least 1".into(),
        ));
    }
    let cols = width.div_ceil(cell);
    LabelMap::from_fn(width, height, |x, y| ((y / cell) * cols + x / cell) as u32)
}

/// Places a region on a canvas with `margin` background pixels around its
/// bounding box. The region is labeled 1 and the background 0.
pub fn shape_canvas(region: &Region, margin: usize) -> Result<LabelMap> {
    let (x0, y0, x1, y1) = region.bounds();
    let m = margin as i32;
    let w = (x1 - x0 + 1 + 2 * m) as usize;
    let h = (y1 - y0 + 1 + 2 * m) as usize;
    let set = PixelSet::new(region.pixels());
    LabelMap::from_fn(w, h, |x, y| {
        set.contains((x as i32 + x0 - m, y as i32 + y0 - m)) as u32
    })
}
