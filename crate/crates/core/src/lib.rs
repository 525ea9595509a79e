//! Light-field baking and rendering on spherical Fibonacci lattices.
//!
//! A scene inside a bounding sphere is path traced once into a 2D table of
//! radiance indexed by (origin point, direction point), both drawn from
//! spherical Fibonacci point sets on the sphere. Frames for any outside
//! viewpoint are then synthesized by intersecting each pixel ray with the
//! sphere and looking up the two crossing points.

pub mod baker;
pub mod bvh;
pub mod camera;
pub mod color;
pub mod compare;
pub mod dataset;
pub mod lightfield;
pub mod lplf;
pub mod num;
pub mod ray;
pub mod render;
pub mod sampling;
pub mod scene;
pub mod scenes;
pub mod sf;
pub mod sphere;
pub mod ssim;
pub mod tracer;
pub mod truth;
pub mod vector;

pub use num::Real;
pub use sf::{kernel_radius, kernel_weight, sf_point, Neighbor, Neighbors, SfError, SphericalFibonacci};
pub use vector::Vec3;

/// Double-precision vector used by the renderer.
pub type Vector = Vec3<f64>;
/// Double-precision lattice used by light fields.
pub type Lattice = SphericalFibonacci<f64>;
pub type Camera = camera::Camera<f64>;
pub type Ray = ray::Ray<f64>;
