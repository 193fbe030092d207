//! Built-in demo polygons: a 2:1 rectangle traversed from two different
//! initial points, and the regular hexagon. All three have six unit edges
//! and are symmetric under rotation by π.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::contour::{Contour, Point};

fn build(points: Vec<Point>) -> Contour {
    Contour::new(points).expect("built-in polygon is valid")
}

pub fn unit_square() -> Contour {
    build(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
}

/// The 2:1 rectangle with a vertex at the midpoint of each long side.
pub fn rectangle() -> Contour {
    build(rectangle_vertices())
}

fn rectangle_vertices() -> Vec<Point> {
    vec![
        [0.0, 0.0],
        [1.0, 0.0],
        [2.0, 0.0],
        [2.0, 1.0],
        [1.0, 1.0],
        [0.0, 1.0],
    ]
}

/// The same rectangle with the initial point advanced by two vertices, to
/// the corner `(2, 0)`.
pub fn rectangle_shifted() -> Contour {
    let mut v = rectangle_vertices();
    v.rotate_left(2);
    build(v)
}

/// Regular hexagon with unit edges.
pub fn hexagon() -> Contour {
    let h = 3.0.sqrt() / 2.0;
    build(vec![
        [0.0, 0.0],
        [1.0, 0.0],
        [1.5, h],
        [1.0, 2.0 * h],
        [0.0, 2.0 * h],
        [-0.5, h],
    ])
}

/// `σ1`, `σ2`, `σ3` of the rectangle/hexagon demonstration.
pub fn demo_triple() -> [Contour; 3] {
    [rectangle(), rectangle_shifted(), hexagon()]
}
