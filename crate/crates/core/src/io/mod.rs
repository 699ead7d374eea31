//! Label maps and images on disk.
//!
//! Label maps: PGM (P2/P5, 8 or 16 bit), grayscale PNG (8 or 16 bit) and
//! CSV of integers. Images: PPM (P3/P6), PGM and PNG. Labels and
//! intensities are returned exactly as stored.

mod csv;
mod netpbm;
mod png;

use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{Image, LabelMap};

const PNG_SIGNATURE: &[u8] = b"\x89PNG\r\n\x1a\n";

/// Decoded samples, row-major with interleaved channels.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Raster {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub samples: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelFormat {
    PgmAscii,
    PgmBinary,
    Png,
    Csv,
}

impl LabelFormat {
    /// Format implied by a file extension; `.pgm` maps to binary PGM.
    pub fn from_path(path: &Path) -> Result<Self> {
        match extension(path).as_deref() {
            Some("pgm") => Ok(Self::PgmBinary),
            Some("png") => Ok(Self::Png),
            Some("csv") | Some("txt") => Ok(Self::Csv),
            _ => Err(Error::UnsupportedFormat(format!(
                "cannot infer a label map format from {}",
                path.display()
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageFormat {
    /// Binary PGM for one channel, binary PPM for three.
    Netpbm,
    Png,
}

impl ImageFormat {
    pub fn from_path(path: &Path) -> Result<Self> {
        match extension(path).as_deref() {
            Some("pgm") | Some("ppm") | Some("pnm") => Ok(Self::Netpbm),
            Some("png") => Ok(Self::Png),
            _ => Err(Error::UnsupportedFormat(format!(
                "cannot infer an image format from {}",
                path.display()
            ))),
        }
    }
}

fn extension(path: &Path) -> Option<String> {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
}

fn decode_raster(bytes: &[u8]) -> Option<Result<Raster>> {
    if bytes.starts_with(PNG_SIGNATURE) {
        Some(png::decode(bytes))
    } else if bytes.first() == Some(&b'P') {
        Some(netpbm::decode(bytes))
    } else {
        None
    }
}

/// Decodes a label map, recognizing PNG and netpbm by their magic bytes and
/// reading anything else as CSV.
pub fn decode_label_map(bytes: &[u8]) -> Result<LabelMap> {
    let raster = match decode_raster(bytes) {
        Some(r) => r?,
        None => return csv::decode(bytes),
    };
    if raster.channels != 1 {
        return Err(Error::UnsupportedFormat(format!(
            "label maps must be single-channel, got {} channels",
            raster.channels
        )));
    }
    LabelMap::new(raster.width, raster.height, raster.samples)
}

/// Decodes a PNG or netpbm image. Alpha channels are dropped.
pub fn decode_image(bytes: &[u8]) -> Result<Image> {
    let raster = decode_raster(bytes)
        .ok_or_else(|| Error::UnsupportedFormat("image is neither PNG nor netpbm".into()))??;
    let keep = match raster.channels {
        1 | 2 => 1,
        _ => 3,
    };
    let data = raster
        .samples
        .chunks_exact(raster.channels)
        .flat_map(|px| px[..keep].iter().map(|&v| v as f64))
        .collect();
    Image::new(raster.width, raster.height, keep, data)
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::from(e).in_file(path))
}

pub fn read_label_map(path: impl AsRef<Path>) -> Result<LabelMap> {
    let path = path.as_ref();
    decode_label_map(&read_bytes(path)?).map_err(|e| e.in_file(path))
}

pub fn read_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    decode_image(&read_bytes(path)?).map_err(|e| e.in_file(path))
}

pub fn encode_label_map(labels: &LabelMap, format: LabelFormat) -> Result<Vec<u8>> {
    let raster = || Raster {
        width: labels.width(),
        height: labels.height(),
        channels: 1,
        samples: labels.as_slice().to_vec(),
    };
    match format {
        LabelFormat::PgmAscii => netpbm::encode(&raster(), true),
        LabelFormat::PgmBinary => netpbm::encode(&raster(), false),
        LabelFormat::Png => png::encode(&raster()),
        LabelFormat::Csv => Ok(csv::encode(labels)),
    }
}

/// Encodes an image with values rounded and clamped to `[0, 65535]`; 8-bit
/// samples are used when every value fits.
pub fn encode_image(image: &Image, format: ImageFormat) -> Result<Vec<u8>> {
    let raster = Raster {
        width: image.width(),
        height: image.height(),
        channels: image.channels(),
        samples: image
            .data()
            .iter()
            .map(|v| v.round().clamp(0.0, 65535.0) as u32)
            .collect(),
    };
    match format {
        ImageFormat::Netpbm => netpbm::encode(&raster, false),
        ImageFormat::Png => png::encode(&raster),
    }
}

pub fn write_label_map(labels: &LabelMap, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let format = LabelFormat::from_path(path).map_err(|e| e.in_file(path))?;
    write_label_map_as(labels, path, format)
}

pub fn write_label_map_as(
    labels: &LabelMap,
    path: impl AsRef<Path>,
    format: LabelFormat,
) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_label_map(labels, format).map_err(|e| e.in_file(path))?;
    std::fs::write(path, bytes).map_err(|e| Error::from(e).in_file(path))
}

pub fn write_image(image: &Image, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let format = ImageFormat::from_path(path).map_err(|e| e.in_file(path))?;
    let bytes = encode_image(image, format).map_err(|e| e.in_file(path))?;
    std::fs::write(path, bytes).map_err(|e| Error::from(e).in_file(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_and_csv_agree() {
        let a = decode_label_map(b"P2\n2 2\n1\n0 0 1 1\n").unwrap();
        let b = decode_label_map(b"0,0\n1,1\n").unwrap();
        assert_eq!(a, b);
        assert_eq!(
            a.distinct_labels().into_iter().collect::<Vec<_>>(),
            vec![0, 1]
        );
    }

    #[test]
    fn ppm_red_pixel() {
        let img = decode_image(b"P6 1 1 255\n\xff\x00\x00").unwrap();
        assert_eq!(img.channels(), 3);
        assert_eq!(img.pixel(0), &[255.0, 0.0, 0.0]);
        assert_eq!(decode_image(b"P2 1 1 255 9").unwrap().channels(), 1);
    }

    #[test]
    fn color_label_map_is_rejected() {
        assert!(matches!(
            decode_label_map(b"P3 1 1 255 1 2 3"),
            Err(Error::UnsupportedFormat(_))
        ));
        assert!(matches!(
            decode_image(b"0,1\n"),
            Err(Error::UnsupportedFormat(_))
        ));
    }

    #[test]
    fn every_label_format_round_trips() {
        let m = LabelMap::from_fn(5, 3, |x, y| (x * 700 + y * 11) as u32).unwrap();
        for f in [
            LabelFormat::PgmAscii,
            LabelFormat::PgmBinary,
            LabelFormat::Png,
            LabelFormat::Csv,
        ] {
            assert_eq!(
                decode_label_map(&encode_label_map(&m, f).unwrap()).unwrap(),
                m,
                "{f:?}"
            );
        }
        let big = LabelMap::from_fn(2, 1, |x, _| 70_000 * x as u32).unwrap();
        assert!(encode_label_map(&big, LabelFormat::Png).is_err());
        assert!(encode_label_map(&big, LabelFormat::Csv).is_ok());
    }

    #[test]
    fn missing_file_names_path() {
        let err = read_label_map("/nonexistent/labels.csv").unwrap_err();
        assert!(err.to_string().contains("/nonexistent/labels.csv"));
    }
}
