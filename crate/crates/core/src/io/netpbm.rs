use super::Raster;
use crate::error::{Error, Result};

fn parse_err(offset: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        offset,
        message: message.into(),
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                b if b.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    /// Next unsigned decimal token, with its starting offset.
    fn integer(&mut self, what: &str) -> Result<(u32, usize)> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(if start == self.bytes.len() {
                parse_err(
                    start,
                    format!("unexpected end of file while reading {what}"),
                )
            } else {
                parse_err(start, format!("expected {what}"))
            });
        }
        if self.pos < self.bytes.len()
            && !self.bytes[self.pos].is_ascii_whitespace()
            && self.bytes[self.pos] != b'#'
        {
            return Err(parse_err(self.pos, format!("unexpected byte in {what}")));
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).expect("ascii digits");
        let value = text
            .parse::<u32>()
            .map_err(|_| parse_err(start, format!("{what} out of range")))?;
        Ok((value, start))
    }
}

/// Parses P2, P3, P5 and P6 files with 8- or 16-bit samples.
pub(crate) fn decode(bytes: &[u8]) -> Result<Raster> {
    if bytes.len() < 2 || bytes[0] != b'P' {
        return Err(parse_err(0, "missing netpbm magic number"));
    }
    let (channels, binary) = match bytes[1] {
        b'2' => (1, false),
        b'3' => (3, false),
        b'5' => (1, true),
        b'6' => (3, true),
        b'1' | b'4' | b'7' => {
            return Err(Error::UnsupportedFormat(format!(
                "netpbm variant P{} is not supported",
                bytes[1] as char
            )))
        }
        _ => return Err(parse_err(1, "unknown netpbm magic number")),
    };
    let mut cur = Cursor { bytes, pos: 2 };
    let (width, w_at) = cur.integer("width")?;
    let (height, _) = cur.integer("height")?;
    let (maxval, m_at) = cur.integer("maxval")?;
    if width == 0 || height == 0 {
        return Err(parse_err(w_at, "image has a zero dimension"));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(parse_err(
            m_at,
            format!("maxval {maxval} outside 1..=65535"),
        ));
    }
    let count = width as usize * height as usize * channels;
    let mut samples = Vec::with_capacity(count);
    if binary {
        // a single whitespace byte separates the header from the raster
        if cur.pos >= bytes.len() {
            return Err(parse_err(cur.pos, "truncated file: missing pixel data"));
        }
        let start = cur.pos + 1;
        let bps = if maxval > 255 { 2 } else { 1 };
        let need = count * bps;
        let available = bytes.len() - start.min(bytes.len());
        if available < need {
            return Err(parse_err(
                bytes.len(),
                format!("truncated pixel data: expected {need} bytes from offset {start}, found {available}"),
            ));
        }
        let data = &bytes[start..start + need];
        for (i, chunk) in data.chunks_exact(bps).enumerate() {
            let v = if bps == 2 {
                u16::from_be_bytes([chunk[0], chunk[1]]) as u32
            } else {
                chunk[0] as u32
            };
            if v > maxval {
                return Err(parse_err(
                    start + i * bps,
                    format!("sample {v} exceeds maxval {maxval}"),
                ));
            }
            samples.push(v);
        }
    } else {
        for _ in 0..count {
            let (v, at) = match cur.integer("sample") {
                Ok(t) => t,
                Err(Error::Parse { offset, .. }) if offset == bytes.len() => {
                    return Err(parse_err(
                        offset,
                        format!(
                            "truncated pixel data: expected {count} samples, found {}",
                            samples.len()
                        ),
                    ))
                }
                Err(e) => return Err(e),
            };
            if v > maxval {
                return Err(parse_err(at, format!("sample {v} exceeds maxval {maxval}")));
            }
            samples.push(v);
        }
    }
    Ok(Raster {
        width: width as usize,
        height: height as usize,
        channels,
        samples,
    })
}

pub(crate) fn encode(raster: &Raster, ascii: bool) -> Result<Vec<u8>> {
    let magic = match (raster.channels, ascii) {
        (1, true) => "P2",
        (1, false) => "P5",
        (3, true) => "P3",
        (3, false) => "P6",
        (c, _) => {
            return Err(Error::UnsupportedFormat(format!(
                "netpbm cannot store {c} channels"
            )))
        }
    };
    let maxval = raster.samples.iter().copied().max().unwrap_or(0);
    if maxval > 65535 {
        return Err(Error::UnsupportedFormat(format!(
            "value {maxval} does not fit in 16 bits"
        )));
    }
    let maxval = if maxval > 255 { 65535 } else { 255 };
    let mut out = format!("{magic}\n{} {}\n{maxval}\n", raster.width, raster.height).into_bytes();
    if ascii {
        let row_len = raster.width * raster.channels;
        for row in raster.samples.chunks(row_len.max(1)) {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            out.extend_from_slice(line.join(" ").as_bytes());
            out.push(b'\n');
        }
    } else if maxval > 255 {
        for &v in &raster.samples {
            out.extend_from_slice(&(v as u16).to_be_bytes());
        }
    } else {
        out.extend(raster.samples.iter().map(|&v| v as u8));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ascii_gray_with_comments() {
        let r = decode(b"P2\n# comment\n2 2\n1\n0 0\n1 1\n").unwrap();
        assert_eq!((r.width, r.height, r.channels), (2, 2, 1));
        assert_eq!(r.samples, vec![0, 0, 1, 1]);
    }

    #[test]
    fn binary_sixteen_bit_is_big_endian() {
        let mut bytes = b"P5 2 1 65535\n".to_vec();
        bytes.extend_from_slice(&[0x01, 0x02, 0xff, 0xfe]);
        assert_eq!(decode(&bytes).unwrap().samples, vec![0x0102, 0xfffe]);
    }

    #[test]
    fn truncated_binary_reports_offset() {
        let bytes = b"P6 1 1 255\n\xff\x00";
        match decode(bytes) {
            Err(Error::Parse { offset, message }) => {
                assert_eq!(offset, bytes.len());
                assert!(message.contains("truncated"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn truncated_ascii_reports_offset() {
        let bytes = b"P2 2 2 9 1 2 3";
        assert!(matches!(
            decode(bytes),
            Err(Error::Parse { offset: 14, .. })
        ));
    }

    #[test]
    fn sample_above_maxval() {
        assert!(matches!(
            decode(b"P2 1 1 3 4"),
            Err(Error::Parse { offset: 9, .. })
        ));
    }

    #[test]
    fn bad_header() {
        assert!(matches!(
            decode(b"P2 x"),
            Err(Error::Parse { offset: 3, .. })
        ));
        assert!(matches!(
            decode(b"GIF89a"),
            Err(Error::Parse { offset: 0, .. })
        ));
        assert!(matches!(
            decode(b"P4 1 1"),
            Err(Error::UnsupportedFormat(_))
        ));
    }

    #[test]
    fn round_trip_both_encodings() {
        let r = Raster {
            width: 3,
            height: 2,
            channels: 1,
            samples: vec![0, 7, 300, 65535, 1, 2],
        };
        for ascii in [true, false] {
            assert_eq!(decode(&encode(&r, ascii).unwrap()).unwrap(), r);
        }
    }
}
