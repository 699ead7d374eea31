use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// One non-negative integer label per pixel, row-major.
///
/// Label values need not be contiguous and a label need not be connected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    width: usize,
    height: usize,
    labels: Vec<u32>,
}

impl LabelMap {
    pub fn new(width: usize, height: usize, labels: Vec<u32>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!(
                "label map dimensions must be positive, got {width}x{height}"
            )));
        }
        if labels.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "label count {} does not match {width}x{height}",
                labels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            labels,
        })
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> u32) -> Result<Self> {
        let mut labels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                labels.push(f(x, y));
            }
        }
        Self::new(width, height, labels)
    }

    /// Builds a map from row slices; all rows must have the same length.
    pub fn from_rows<R: AsRef<[u32]>>(rows: &[R]) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.as_ref().len());
        let mut labels = Vec::with_capacity(width * height);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != width {
                return Err(Error::InvalidImage(format!(
                    "row {i} has {} labels, expected {width}",
                    row.len()
                )));
            }
            labels.extend_from_slice(row);
        }
        Self::new(width, height, labels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn pixel_count(&self) -> usize {
        self.labels.len()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.labels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u32 {
        self.labels[y * self.width + x]
    }

    pub fn distinct_labels(&self) -> BTreeSet<u32> {
        self.labels.iter().copied().collect()
    }

    pub fn region_count(&self) -> usize {
        self.distinct_labels().len()
    }

    pub fn ensure_same_dimensions(&self, other: (usize, usize)) -> Result<()> {
        if self.dimensions() != other {
            return Err(Error::DimensionMismatch {
                expected: self.dimensions(),
                actual: other,
            });
        }
        Ok(())
    }

    /// Applies `f` to every label.
    pub fn relabel(&self, f: impl Fn(u32) -> u32) -> Self {
        Self {
            labels: self.labels.iter().map(|&l| f(l)).collect(),
            ..self.clone()
        }
    }

    /// Nearest-neighbor upsampling by an integer factor.
    pub fn upsample(&self, factor: usize) -> Self {
        assert!(factor >= 1, "upsampling factor must be positive");
        let (w, h) = (self.width * factor, self.height * factor);
        let mut labels = Vec::with_capacity(w * h);
        for y in 0..h {
            for x in 0..w {
                labels.push(self.get(x / factor, y / factor));
            }
        }
        Self {
            width: w,
            height: h,
            labels,
        }
    }

    /// Rotates the map by 90 degrees clockwise.
    pub fn rotate90(&self) -> Self {
        let (w, h) = (self.height, self.width);
        let mut labels = Vec::with_capacity(w * h);
        for y in 0..h {
            for x in 0..w {
                labels.push(self.get(y, self.height - 1 - x));
            }
        }
        Self {
            width: w,
            height: h,
            labels,
        }
    }
}
