//! Search-region regulated single-object tracking.
//!
//! Each frame, a regulator picks how large a region around the previous
//! prediction the tracker should search (2, 4, 6 or 8 times the target size
//! per axis), and the frame is handed to a tracker dedicated to that region
//! size. The crate also carries the fixed-region baseline, training-sample
//! generation for learned regulators, and the evaluation harness.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod eval;
pub mod geometry;
pub mod grid;
pub mod image;
pub mod io;
pub mod pipeline;
pub mod regulator;
pub mod scalar;
pub mod trackers;
pub mod trainkit;

pub use error::{Error, Result};
pub use geometry::{BoundingBox, RadiusCategory, RegionRect};
pub use scalar::Scalar;

/// Box type used by the tracking pipeline.
pub type BBox = BoundingBox<f64>;
pub type Rect = RegionRect<f64>;
