//! Naive per-pixel reference implementations and random instances shared by
//! the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spxeval::model::{Image, LabelMap};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random blocky label map: a coarse random grid with a fraction of pixels
/// reassigned to random labels.
pub fn random_labels(rng: &mut ChaCha8Rng, w: usize, h: usize, max_labels: u32) -> LabelMap {
    let cell = rng.random_range(1..=4usize);
    let cols = w.div_ceil(cell);
    let base: Vec<u32> = (0..cols * h.div_ceil(cell))
        .map(|_| rng.random_range(0..max_labels))
        .collect();
    let noise = rng.random_range(0.0..0.3);
    let mut labels = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            labels.push(if rng.random_bool(noise) {
                rng.random_range(0..max_labels)
            } else {
                base[(y / cell) * cols + x / cell]
            });
        }
    }
    LabelMap::new(w, h, labels).unwrap()
}

pub fn random_image(rng: &mut ChaCha8Rng, w: usize, h: usize, channels: usize) -> Image {
    let data = (0..w * h * channels)
        .map(|_| rng.random_range(0.0..255.0))
        .collect();
    Image::new(w, h, channels, data).unwrap()
}

fn pixels_of(labels: &LabelMap) -> BTreeMap<u32, Vec<(usize, usize)>> {
    let mut out: BTreeMap<u32, Vec<(usize, usize)>> = BTreeMap::new();
    for y in 0..labels.height() {
        for x in 0..labels.width() {
            out.entry(labels.get(x, y)).or_default().push((x, y));
        }
    }
    out
}

pub fn naive_asa(sp: &LabelMap, gt: &LabelMap) -> f64 {
    let mut total = 0usize;
    for px in pixels_of(sp).values() {
        let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
        for &(x, y) in px {
            *counts.entry(gt.get(x, y)).or_default() += 1;
        }
        total += counts.values().max().unwrap();
    }
    total as f64 / (sp.width() * sp.height()) as f64
}

pub fn naive_ue(sp: &LabelMap, gt: &LabelMap) -> f64 {
    let gt_labels = gt.distinct_labels();
    let mut sum = 0usize;
    for px in pixels_of(sp).values() {
        for &j in &gt_labels {
            let inside = px.iter().filter(|&&(x, y)| gt.get(x, y) == j).count();
            let outside = px.len() - inside;
            sum += inside.min(outside);
        }
    }
    sum as f64 / (sp.width() * sp.height()) as f64
}

pub fn naive_ue_legacy(sp: &LabelMap, gt: &LabelMap) -> f64 {
    let sp_px = pixels_of(sp);
    let gt_px = pixels_of(gt);
    let mut sum = 0.0;
    for gpx in gt_px.values() {
        let touching: BTreeSet<u32> = gpx.iter().map(|&(x, y)| sp.get(x, y)).collect();
        let covered: usize = touching.iter().map(|k| sp_px[k].len()).sum();
        sum += (covered - gpx.len()) as f64 / gpx.len() as f64;
    }
    sum / gt_px.len() as f64
}

/// Pixels with an in-image 4-neighbor carrying another label.
pub fn naive_boundary(labels: &LabelMap) -> Vec<(usize, usize)> {
    let (w, h) = labels.dimensions();
    let mut out = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let l = labels.get(x, y);
            let differs = (x > 0 && labels.get(x - 1, y) != l)
                || (x + 1 < w && labels.get(x + 1, y) != l)
                || (y > 0 && labels.get(x, y - 1) != l)
                || (y + 1 < h && labels.get(x, y + 1) != l);
            if differs {
                out.push((x, y));
            }
        }
    }
    out
}

/// Fraction of `targets` having a `sources` pixel at distance `< epsilon`,
/// by exhaustive search.
pub fn naive_detected(targets: &[(usize, usize)], sources: &[(usize, usize)], epsilon: f64) -> f64 {
    let hit = targets
        .iter()
        .filter(|&&(x, y)| {
            sources.iter().any(|&(a, b)| {
                let d = ((x as f64 - a as f64).powi(2) + (y as f64 - b as f64).powi(2)).sqrt();
                d < epsilon
            })
        })
        .count();
    hit as f64 / targets.len() as f64
}

pub fn naive_br(sp: &LabelMap, gt: &LabelMap, epsilon: f64) -> f64 {
    naive_detected(&naive_boundary(gt), &naive_boundary(sp), epsilon)
}

pub fn naive_precision(sp: &LabelMap, gt: &LabelMap, epsilon: f64) -> f64 {
    naive_detected(&naive_boundary(sp), &naive_boundary(gt), epsilon)
}

fn region_mean(image: &Image, px: &[(usize, usize)]) -> Vec<f64> {
    let mut mean = vec![0.0; image.channels()];
    for &(x, y) in px {
        for (m, v) in mean.iter_mut().zip(image.get(x, y)) {
            *m += v;
        }
    }
    mean.iter().map(|m| m / px.len() as f64).collect()
}

/// Between-region sum of squares over total sum of squares, both summed per
/// pixel.
pub fn naive_ev(image: &Image, labels: &LabelMap) -> f64 {
    let all: Vec<(usize, usize)> = (0..image.height())
        .flat_map(|y| (0..image.width()).map(move |x| (x, y)))
        .collect();
    let global = region_mean(image, &all);
    let (mut between, mut total) = (0.0, 0.0);
    for px in pixels_of(labels).values() {
        let mean = region_mean(image, px);
        for &(x, y) in px {
            for c in 0..image.channels() {
                between += (mean[c] - global[c]).powi(2);
                total += (image.get(x, y)[c] - global[c]).powi(2);
            }
        }
    }
    between / total
}

pub fn naive_icv(image: &Image, labels: &LabelMap) -> f64 {
    let regions = pixels_of(labels);
    let mut sum = 0.0;
    for px in regions.values() {
        let mean = region_mean(image, px);
        let ss: f64 = px
            .iter()
            .map(|&(x, y)| {
                image
                    .get(x, y)
                    .iter()
                    .zip(&mean)
                    .map(|(v, m)| (v - m).powi(2))
                    .sum::<f64>()
            })
            .sum();
        sum += ss.sqrt() / px.len() as f64;
    }
    sum / regions.len() as f64
}

/// Sample Pearson coefficient from the raw-sum formula.
pub fn naive_pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let syy: f64 = ys.iter().map(|y| y * y).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
}

/// `|a − b| ≤ tol · max(|a|, |b|)`
pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}
