use std::io::Cursor;

use png::{BitDepth, ColorType, Decoder, Encoder, Transformations};

use super::Raster;
use crate::error::{Error, Result};

fn png_err(e: impl std::fmt::Display) -> Error {
    Error::InvalidImage(format!("PNG: {e}"))
}

/// Decodes any PNG, expanding palettes and sub-byte depths to 8 bits.
/// Alpha channels are kept; callers decide what to do with them.
pub(crate) fn decode(bytes: &[u8]) -> Result<Raster> {
    let mut decoder = Decoder::new(Cursor::new(bytes));
    decoder.set_transformations(Transformations::EXPAND);
    let mut reader = decoder.read_info().map_err(png_err)?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| png_err("image too large"))?;
    let mut buf = vec![0; size];
    let info = reader.next_frame(&mut buf).map_err(png_err)?;
    let channels = match info.color_type {
        ColorType::Grayscale => 1,
        ColorType::GrayscaleAlpha => 2,
        ColorType::Rgb => 3,
        ColorType::Rgba => 4,
        ColorType::Indexed => return Err(png_err("palette was not expanded")),
    };
    let data = &buf[..info.buffer_size()];
    let samples = match info.bit_depth {
        BitDepth::Eight => data.iter().map(|&b| b as u32).collect(),
        BitDepth::Sixteen => data
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]) as u32)
            .collect(),
        d => return Err(Error::UnsupportedFormat(format!("PNG bit depth {d:?}"))),
    };
    Ok(Raster {
        width: info.width as usize,
        height: info.height as usize,
        channels,
        samples,
    })
}

/// Encodes gray or RGB samples, at 16 bits when any sample exceeds 255.
pub(crate) fn encode(raster: &Raster) -> Result<Vec<u8>> {
    let color = match raster.channels {
        1 => ColorType::Grayscale,
        3 => ColorType::Rgb,
        c => {
            return Err(Error::UnsupportedFormat(format!(
                "PNG writer got {c} channels"
            )))
        }
    };
    let max = raster.samples.iter().copied().max().unwrap_or(0);
    if max > 65535 {
        return Err(Error::UnsupportedFormat(format!(
            "value {max} does not fit in 16 bits"
        )));
    }
    let wide = max > 255;
    let data: Vec<u8> = if wide {
        raster
            .samples
            .iter()
            .flat_map(|&v| (v as u16).to_be_bytes())
            .collect()
    } else {
        raster.samples.iter().map(|&v| v as u8).collect()
    };
    let mut out = Vec::new();
    {
        let mut enc = Encoder::new(&mut out, raster.width as u32, raster.height as u32);
        enc.set_color(color);
        enc.set_depth(if wide {
            BitDepth::Sixteen
        } else {
            BitDepth::Eight
        });
        let mut writer = enc.write_header().map_err(png_err)?;
        writer.write_image_data(&data).map_err(png_err)?;
        writer.finish().map_err(png_err)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_depths() {
        for samples in [vec![0, 1, 2, 255], vec![0, 1, 300, 65535]] {
            let r = Raster {
                width: 2,
                height: 2,
                channels: 1,
                samples,
            };
            assert_eq!(decode(&encode(&r).unwrap()).unwrap(), r);
        }
        let rgb = Raster {
            width: 1,
            height: 2,
            channels: 3,
            samples: vec![255, 0, 0, 1, 2, 3],
        };
        assert_eq!(decode(&encode(&rgb).unwrap()).unwrap(), rgb);
    }

    #[test]
    fn garbage_is_rejected() {
        assert!(decode(b"\x89PNG\r\n\x1a\nnope").is_err());
    }
}
