//! Geodesics and parallel transport on shape spaces.
//!
//! Two families of shape manifolds are covered:
//!
//! * the Zahn–Roskies space of closed planar contours, represented by the
//!   truncated Fourier series of the turning function ([`zr_space`],
//!   [`zr_geodesic`], [`zr_transport`]), together with its quotient by
//!   changes of the initial point;
//! * Kendall's landmark shape spaces, modelled on the pre-shape sphere
//!   with rotations factored out ([`kendall`]).
//!
//! On top of transport sits the growth transplant pipeline and the
//! parallelity measures ([`parallelity`]).
//!
//! The crate is `no_std` and only needs `alloc`; file formats, plotting and
//! the command line live in the companion `shape-transport` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod contour;
pub mod error;
mod fourier;
pub mod geodesic;
pub mod kendall;
pub mod parallelity;
pub mod polygons;
pub mod quadrature;
pub mod vector;
pub mod zr_geodesic;
pub mod zr_space;
pub mod zr_transport;

pub use contour::{Contour, Placement};
pub use error::{Error, Result};
pub use geodesic::{GeodesicPath, ShapeGeometry, SpaceTag, Transplanted, TransportResult};
pub use kendall::{KendallSpace, KendallTangent, PreShape};
pub use parallelity::{MuVariant, ParallelityReport};
pub use zr_space::{ZrShape, ZrSpace, ZrTangent};
pub use zr_transport::{ZrInvariant, ZrSigma};
