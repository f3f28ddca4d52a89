//! Furniture arrangement generation downstream of an occupancy-grid
//! generator: semantic category palettes, rectangle-sweep repair of noisy
//! grids into placements, and CMA-ME search over generator latents for an
//! archive diverse in total price and piece count.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod color;
pub mod error;
pub mod generator;
pub mod grid;
pub mod measures;
pub mod palette;
pub mod qd;

pub use color::Rgb;
pub use error::{Error, Result};
