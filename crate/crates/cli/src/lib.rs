//! File formats, plotting and the command line for `shape-transport-core`.
//!
//! The binary wires these pieces into five commands: `ingest` converts
//! contours to shape files, `geodesic` connects two shapes, `transplant`
//! moves a deformation onto another shape, `compare` measures parallelity
//! of two growth series and `demo` regenerates the built-in examples.

pub mod commands;
pub mod config;
pub mod formats;
pub mod render;
pub mod shapes;

use shape_transport_core::Error as CoreError;

/// Process exit status for a failed command: 2 when the failure is a
/// numerical one, 1 for everything else (bad input, I/O, usage).
pub fn exit_code(err: &anyhow::Error) -> u8 {
    let numerical = err
        .chain()
        .filter_map(|e| e.downcast_ref::<CoreError>())
        .any(CoreError::is_numerical);
    if numerical {
        2
    } else {
        1
    }
}
