//! Pixel-grid data model: images, label maps, regions, overlaps and boundaries.

mod boundary;
mod image;
mod labels;
mod overlap;
mod region;

pub use boundary::{
    adjacent_pairs, barycenter_dispersion, boundary_mask, contour_density, BoundaryMask,
};
pub use image::Image;
pub use labels::LabelMap;
pub use overlap::{overlap_matrix, OverlapMatrix};
pub use region::{extract_regions, Point, Region};

/// Several human annotations of the same image.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    annotations: Vec<LabelMap>,
}

impl GroundTruth {
    pub fn new(annotations: Vec<LabelMap>) -> crate::Result<Self> {
        let first = annotations.first().ok_or(crate::Error::EmptyInput(
            "ground truth needs at least one annotation",
        ))?;
        for a in &annotations[1..] {
            first.ensure_same_dimensions(a.dimensions())?;
        }
        Ok(Self { annotations })
    }

    pub fn annotations(&self) -> &[LabelMap] {
        &self.annotations
    }

    pub fn dimensions(&self) -> (usize, usize) {
        self.annotations[0].dimensions()
    }
}
