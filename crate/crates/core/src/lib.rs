//! Evaluation of superpixel decompositions.
//!
//! Metrics cover the three aspects of a decomposition:
//!
//! * color homogeneity: [`color::icv`], [`color::explained_variation`];
//! * respect of image objects: [`objects::asa`], [`objects::undersegmentation_error`],
//!   [`objects::boundary_recall`], [`objects::precision`], contour density;
//! * regularity: circularity, [`regularity::shape_regularity_criteria`] (SRC),
//!   [`regularity::smooth_matching_factor`] (SMF), the Jaccard consistency J and
//!   the global regularity GR = SRC · SMF.
//!
//! Superpixel decompositions and ground truths are inputs; no decomposition
//! method is implemented here.

pub mod analysis;
pub mod color;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod io;
pub mod model;
pub mod objects;
pub mod regularity;
pub mod synth;

pub use error::{Error, Result};
