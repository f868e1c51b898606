//! Trace maps, pullback measures and coarea identities on star-shaped
//! hypersurfaces whose radial profile is only continuous or measurable.
// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod coarea;
pub mod dirichlet;
pub mod error;
pub mod fit;
pub mod function_spaces;
pub mod geometry;
pub mod par;
pub mod quadrature;
pub mod special;
pub mod sphere_quad;
pub mod star_geometry;
pub mod trace_ops;

pub use error::{Error, Result};
pub use geometry::{Dim, Direction, Point};
