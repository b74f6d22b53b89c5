//! Voxel-domain laboratory: rasterize CSG scenes into occupancy grids,
//! measure metric conditions (John variants, LLC, bounded turning,
//! uniformity, ball separation, quasihyperbolic geodesics) and machine-check
//! homological joinability / bounded-turning statements with a cubical
//! homology engine.

pub mod cli;
pub mod conditions;
pub mod error;
pub mod generators;
pub mod grid;
pub mod homology;
pub mod metrics;

pub use error::{Error, Result};
