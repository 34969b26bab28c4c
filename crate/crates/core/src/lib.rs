//! Integral geometry of the 3D Heisenberg group.
//!
//! Horizontal lines, PSH(1) motions, convex bodies with exact chords, p-Area
//! quadrature, and Monte Carlo estimators of invariant line and segment
//! measures.

pub mod bodies;
pub mod config;
pub mod estimators;
pub mod geometry;
pub mod measures;
pub mod sampling;

pub use bodies::{transform_body, Ball, Body, ConvexBody, Cuboid, Ellipsoid, Halfspace, Polytope};
pub use estimators::{EstimateResult, Estimator, EstimatorError};
pub use geometry::{HorizontalLine, Point, PshMotion};
