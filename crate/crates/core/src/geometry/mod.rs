//! Convex feasible sets and Euclidean projections.
//!
//! Estimation in this crate is driven entirely by two primitives: exact
//! projection onto an individual convex set, and approximate projection
//! onto a finite intersection of such sets (Dykstra's scheme). The
//! concrete set shapes are the ones measurement models produce: slabs
//! (between two parallel hyperplanes), axis-aligned boxes, halfspaces,
//! balls, and intersections of any of these.

mod dykstra;
mod sets;
mod vector;

pub use dykstra::{
    distance_to_intersection, dykstra_project, within_distance, DEFAULT_MAX_SWEEPS,
    DEFAULT_TOLERANCE,
};
pub use sets::{Ball, BoxSet, FeasibleSet, Halfspace, Intersection, Slab};
pub use vector::Vector;

/// Default slack for membership tests: a point counts as inside when its
/// distance to the set does not exceed this.
pub const MEMBERSHIP_TOLERANCE: f64 = 1e-9;
