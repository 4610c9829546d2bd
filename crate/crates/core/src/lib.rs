//! Geometry, losses and representations for omnidirectional (fisheye)
//! perception models.
//!
//! The crate is `no_std` with `alloc`; file formats, the command line tool and
//! parallel drivers live in the `omnigeom` crate.

#![no_std]

extern crate alloc;

pub mod camera_model;
pub mod camera_tensor;
pub mod error;
pub mod geometry_warp;
pub mod grid;
pub mod losses;
pub mod pac;
pub mod polygon_repr;
pub mod scene;
pub mod synthetic;
pub mod task_weighting;

pub use error::{Error, Result};
pub use grid::{FeatureMap, Grid, LabelMap};
