//! Color homogeneity: intra-cluster variation (ICV), explained variation (EV)
//! and per-superpixel cubic polynomial compression.
//!
//! Multi-channel images contribute the sum of squared deviations over all
//! channels. No color space conversion is applied.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{Image, LabelMap};

/// Pixels of each label, as flat indices, ordered by label.
fn group_pixels(labels: &LabelMap) -> BTreeMap<u32, Vec<usize>> {
    let mut groups: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.as_slice().iter().enumerate() {
        groups.entry(l).or_default().push(i);
    }
    groups
}

fn check_dimensions(image: &Image, labels: &LabelMap) -> Result<()> {
    labels.ensure_same_dimensions(image.dimensions())
}

fn channel_mean(image: &Image, pixels: &[usize]) -> Vec<f64> {
    let mut mean = vec![0.0; image.channels()];
    for &i in pixels {
        for (m, v) in mean.iter_mut().zip(image.pixel(i)) {
            *m += v;
        }
    }
    let n = pixels.len() as f64;
    mean.iter_mut().for_each(|m| *m /= n);
    mean
}

fn squared_deviation(image: &Image, pixels: &[usize], mean: &[f64]) -> f64 {
    pixels
        .iter()
        .map(|&i| {
            image
                .pixel(i)
                .iter()
                .zip(mean)
                .map(|(v, m)| (v - m).powi(2))
                .sum::<f64>()
        })
        .sum()
}

/// `ICV = 1/|S| Σ_k sqrt(Σ_{p∈S_k} ‖I(p) − μ(S_k)‖²) / |S_k|`
pub fn icv(image: &Image, labels: &LabelMap) -> Result<f64> {
    check_dimensions(image, labels)?;
    let groups = group_pixels(labels);
    let total: f64 = groups
        .values()
        .map(|px| {
            let mean = channel_mean(image, px);
            squared_deviation(image, px, &mean).sqrt() / px.len() as f64
        })
        .sum();
    Ok(total / groups.len() as f64)
}

/// `EV = Σ_k |S_k| ‖μ(S_k) − μ(I)‖² / Σ_p ‖I(p) − μ(I)‖²`
///
/// Fails with [`Error::ZeroVariance`] on a constant image.
pub fn explained_variation(image: &Image, labels: &LabelMap) -> Result<f64> {
    check_dimensions(image, labels)?;
    let all: Vec<usize> = (0..image.pixel_count()).collect();
    let global = channel_mean(image, &all);
    let denominator = squared_deviation(image, &all, &global);
    if denominator <= 0.0 {
        return Err(Error::ZeroVariance("image intensity variance is zero"));
    }
    let numerator: f64 = group_pixels(labels)
        .values()
        .map(|px| {
            let mean = channel_mean(image, px);
            let d: f64 = mean.iter().zip(&global).map(|(a, b)| (a - b).powi(2)).sum();
            px.len() as f64 * d
        })
        .sum();
    Ok(numerator / denominator)
}

/// EV through superpixel variances:
/// `1 − Σ_k (|S_k| / |I|) σ²(S_k) / σ²(I)`.
pub fn explained_variation_from_variances(image: &Image, labels: &LabelMap) -> Result<f64> {
    check_dimensions(image, labels)?;
    let n = image.pixel_count() as f64;
    let all: Vec<usize> = (0..image.pixel_count()).collect();
    let global = channel_mean(image, &all);
    let image_var = squared_deviation(image, &all, &global) / n;
    if image_var <= 0.0 {
        return Err(Error::ZeroVariance("image intensity variance is zero"));
    }
    let weighted_var: f64 = group_pixels(labels)
        .values()
        .map(|px| {
            let mean = channel_mean(image, px);
            let var = squared_deviation(image, px, &mean) / px.len() as f64;
            px.len() as f64 / n * var
        })
        .sum();
    Ok(1.0 - weighted_var / image_var)
}

/// Number of terms of the bivariate cubic basis.
pub const BASIS_LEN: usize = 10;

/// Total degree of each basis term `1, x, y, x², xy, y², x³, x²y, xy², y³`.
const DEGREES: [i32; BASIS_LEN] = [0, 1, 1, 2, 2, 2, 3, 3, 3, 3];

/// Evaluates the cubic basis at `(x, y)`.
pub fn cubic_basis(x: f64, y: f64) -> [f64; BASIS_LEN] {
    [
        1.0,
        x,
        y,
        x * x,
        x * y,
        y * y,
        x * x * x,
        x * x * y,
        x * y * y,
        y * y * y,
    ]
}

/// Cubic fit of one region: coefficients per channel over coordinates
/// centered at the region barycenter.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionPolynomial {
    pub center: (f64, f64),
    pub coefficients: Vec<[f64; BASIS_LEN]>,
}

impl RegionPolynomial {
    pub fn evaluate(&self, x: f64, y: f64, channel: usize) -> f64 {
        let b = cubic_basis(x - self.center.0, y - self.center.1);
        self.coefficients[channel]
            .iter()
            .zip(b)
            .map(|(c, t)| c * t)
            .sum()
    }
}

/// Cubic polynomial per region and channel.
#[derive(Debug, Clone, PartialEq)]
pub struct CompressionModel {
    pub channels: usize,
    pub regions: BTreeMap<u32, RegionPolynomial>,
}

fn fit_region(image: &Image, width: usize, pixels: &[usize]) -> RegionPolynomial {
    let coords: Vec<(f64, f64)> = pixels
        .iter()
        .map(|&i| ((i % width) as f64, (i / width) as f64))
        .collect();
    let n = pixels.len() as f64;
    let cx = coords.iter().map(|c| c.0).sum::<f64>() / n;
    let cy = coords.iter().map(|c| c.1).sum::<f64>() / n;
    // scale coordinates to [-1, 1] so every basis column has comparable magnitude
    let scale = coords
        .iter()
        .map(|&(x, y)| (x - cx).abs().max((y - cy).abs()))
        .fold(1.0f64, f64::max);

    let a = DMatrix::from_fn(pixels.len(), BASIS_LEN, |r, c| {
        let (x, y) = coords[r];
        cubic_basis((x - cx) / scale, (y - cy) / scale)[c]
    });
    let channels = image.channels();
    let b = DMatrix::from_fn(pixels.len(), channels, |r, c| image.pixel(pixels[r])[c]);

    let svd = a.svd(true, true);
    let sigma_max = svd.singular_values.max();
    let solution = svd
        .solve(&b, sigma_max * 1e-12)
        .expect("U and V were requested");

    let coefficients = (0..channels)
        .map(|ch| {
            let col: DVector<f64> = solution.column(ch).into_owned();
            let mut out = [0.0; BASIS_LEN];
            for (t, o) in out.iter_mut().enumerate() {
                *o = col[t] / scale.powi(DEGREES[t]);
            }
            out
        })
        .collect();
    RegionPolynomial {
        center: (cx, cy),
        coefficients,
    }
}

/// Least-squares cubic fit of every region and channel. Underdetermined
/// systems (regions of fewer than ten pixels, or collinear ones) get the
/// minimum-norm solution in the scaled basis.
pub fn fit_compression(image: &Image, labels: &LabelMap) -> Result<CompressionModel> {
    check_dimensions(image, labels)?;
    let groups: Vec<(u32, Vec<usize>)> = group_pixels(labels).into_iter().collect();
    let width = image.width();
    let regions = groups
        .par_iter()
        .map(|(label, px)| (*label, fit_region(image, width, px)))
        .collect();
    Ok(CompressionModel {
        channels: image.channels(),
        regions,
    })
}

/// Evaluates each pixel's region polynomial without clamping.
pub fn reconstruct_unclamped(model: &CompressionModel, labels: &LabelMap) -> Result<Image> {
    let (w, h) = labels.dimensions();
    let mut data = Vec::with_capacity(w * h * model.channels);
    for y in 0..h {
        for x in 0..w {
            let label = labels.get(x, y);
            let poly = model
                .regions
                .get(&label)
                .ok_or(Error::MissingRegion(label))?;
            for ch in 0..model.channels {
                data.push(poly.evaluate(x as f64, y as f64, ch));
            }
        }
    }
    Image::new(w, h, model.channels, data)
}

/// Reconstructed image, clamped to `[0, 255]`.
pub fn reconstruct(model: &CompressionModel, labels: &LabelMap) -> Result<Image> {
    Ok(reconstruct_unclamped(model, labels)?.map(|v| v.clamp(0.0, 255.0)))
}

/// `MSE = 1/|I| Σ_p ‖I(p) − I_r(p)‖²`, channels summed.
pub fn mse(original: &Image, reconstructed: &Image) -> Result<f64> {
    if original.dimensions() != reconstructed.dimensions() {
        return Err(Error::DimensionMismatch {
            expected: original.dimensions(),
            actual: reconstructed.dimensions(),
        });
    }
    if original.channels() != reconstructed.channels() {
        return Err(Error::ChannelMismatch {
            expected: original.channels(),
            actual: reconstructed.channels(),
        });
    }
    let sum: f64 = original
        .data()
        .iter()
        .zip(reconstructed.data())
        .map(|(a, b)| (a - b).powi(2))
        .sum();
    Ok(sum / original.pixel_count() as f64)
}

/// Fits, reconstructs (clamped) and returns the MSE against the original.
pub fn compression_mse(image: &Image, labels: &LabelMap) -> Result<f64> {
    let model = fit_compression(image, labels)?;
    mse(image, &reconstruct(&model, labels)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gray(w: usize, h: usize, data: &[f64]) -> Image {
        Image::new(w, h, 1, data.to_vec()).unwrap()
    }

    #[test]
    fn icv_examples() {
        let flat = Image::from_fn_gray(4, 4, |_, _| 42.0).unwrap();
        let labels = LabelMap::from_fn(4, 4, |x, _| (x / 2) as u32).unwrap();
        assert_eq!(icv(&flat, &labels).unwrap(), 0.0);

        let img = gray(2, 1, &[0.0, 10.0]);
        let one = LabelMap::from_fn(2, 1, |_, _| 0).unwrap();
        let v = icv(&img, &one).unwrap();
        assert!((v - 50f64.sqrt() / 2.0).abs() < 1e-12);
        assert!((v - 3.5355).abs() < 1e-4);
        let doubled = icv(&img.map(|v| 2.0 * v), &one).unwrap();
        assert!((doubled - 7.0711).abs() < 1e-4);
    }

    #[test]
    fn ev_examples() {
        let img = gray(2, 2, &[0.0, 0.0, 10.0, 10.0]);
        let own = LabelMap::from_fn(2, 2, |x, y| (y * 2 + x) as u32).unwrap();
        assert!((explained_variation(&img, &own).unwrap() - 1.0).abs() < 1e-12);
        let one = LabelMap::from_fn(2, 2, |_, _| 0).unwrap();
        assert!(explained_variation(&img, &one).unwrap().abs() < 1e-12);
        let halves = LabelMap::from_fn(2, 2, |_, y| y as u32).unwrap();
        assert_eq!(explained_variation(&img, &halves).unwrap(), 1.0);
    }

    #[test]
    fn ev_constant_image_is_an_error() {
        let img = Image::from_fn_gray(3, 3, |_, _| 7.0).unwrap();
        let l = LabelMap::from_fn(3, 3, |x, _| x as u32).unwrap();
        assert!(matches!(
            explained_variation(&img, &l),
            Err(Error::ZeroVariance(_))
        ));
        assert!(matches!(
            explained_variation_from_variances(&img, &l),
            Err(Error::ZeroVariance(_))
        ));
    }

    #[test]
    fn constant_region_fit() {
        let img = Image::from_fn_gray(5, 4, |_, _| 17.0).unwrap();
        let l = LabelMap::from_fn(5, 4, |_, _| 0).unwrap();
        let m = fit_compression(&img, &l).unwrap();
        let c = m.regions[&0].coefficients[0];
        assert!((c[0] - 17.0).abs() < 1e-9);
        assert!(c[1..].iter().all(|v| v.abs() < 1e-9));
        let r = reconstruct(&m, &l).unwrap();
        assert!(mse(&img, &r).unwrap() < 1e-18);
    }

    #[test]
    fn linear_region_fit_is_exact() {
        let img = Image::from_fn_gray(6, 5, |x, _| 3.0 * x as f64 + 2.0).unwrap();
        let l = LabelMap::from_fn(6, 5, |_, _| 0).unwrap();
        let m = fit_compression(&img, &l).unwrap();
        let p = &m.regions[&0];
        // centered coordinates: value = 3 (x - cx) + 3 cx + 2
        let c = p.coefficients[0];
        assert!((c[0] - (3.0 * p.center.0 + 2.0)).abs() < 1e-9);
        assert!((c[1] - 3.0).abs() < 1e-9);
        assert!(c[2..].iter().all(|v| v.abs() < 1e-9));
        let r = reconstruct_unclamped(&m, &l).unwrap();
        assert!(mse(&img, &r).unwrap() < 1e-18);
    }

    #[test]
    fn missing_region_and_mismatches() {
        let img = Image::from_fn_gray(2, 2, |x, _| x as f64).unwrap();
        let l = LabelMap::from_fn(2, 2, |_, _| 0).unwrap();
        let m = fit_compression(&img, &l).unwrap();
        let other = LabelMap::from_fn(2, 2, |_, _| 5).unwrap();
        assert!(matches!(
            reconstruct(&m, &other),
            Err(Error::MissingRegion(5))
        ));
        let small = Image::from_fn_gray(1, 2, |_, _| 0.0).unwrap();
        assert!(mse(&img, &small).is_err());
        assert!(icv(&small, &l).is_err());
    }

    #[test]
    fn mse_examples() {
        let a = gray(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(mse(&a, &a).unwrap(), 0.0);
        assert_eq!(mse(&a, &a.map(|v| v + 1.0)).unwrap(), 1.0);
    }

    #[test]
    fn reconstruction_is_clamped() {
        let img = Image::from_fn_gray(4, 1, |x, _| 100.0 * x as f64).unwrap();
        let l = LabelMap::from_fn(4, 1, |_, _| 0).unwrap();
        let m = fit_compression(&img, &l).unwrap();
        let r = reconstruct(&m, &l).unwrap();
        assert_eq!(r.data()[3], 255.0);
        assert!((reconstruct_unclamped(&m, &l).unwrap().data()[3] - 300.0).abs() < 1e-9);
    }
}
