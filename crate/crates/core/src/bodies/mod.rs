//! Euclidean-convex bodies with exact chord intersection against horizontal
//! lines.
//!
//! Every coordinate of `γ(s)` is affine in `s`, so a half-space constraint is
//! a linear inequality in `s` and a quadric constraint is a quadratic one.
//! Chords of convex bodies are single intervals.

mod polytope;
mod quadric;

use nalgebra::Vector3;
use thiserror::Error;

use crate::geometry::{HorizontalLine, Point, PshMotion};
use crate::measures::SurfacePatch;

pub use polytope::{Cuboid, Halfspace, Polytope};
pub use quadric::{Ball, Ellipsoid, Quadric};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BodyError {
    #[error("invalid body parameter: {0}")]
    InvalidParameter(String),
    #[error("half-spaces do not bound a finite region")]
    NotBounded,
    #[error("body has empty interior")]
    EmptyInterior,
}

/// Parameter interval `[s_in, s_out]` of `G ∩ D`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ChordInterval {
    Empty,
    Span { s_in: f64, s_out: f64 },
}

impl ChordInterval {
    pub fn span(s_in: f64, s_out: f64) -> Self {
        debug_assert!(s_in <= s_out);
        Self::Span { s_in, s_out }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, Self::Empty)
    }

    /// Levi-metric chord length `σ = s_out − s_in`.
    pub fn sigma(&self) -> f64 {
        match *self {
            Self::Empty => 0.0,
            Self::Span { s_in, s_out } => s_out - s_in,
        }
    }

    pub fn bounds(&self) -> Option<(f64, f64)> {
        match *self {
            Self::Empty => None,
            Self::Span { s_in, s_out } => Some((s_in, s_out)),
        }
    }

    pub fn midpoint(&self) -> Option<f64> {
        self.bounds().map(|(a, b)| 0.5 * (a + b))
    }

    /// Measure of offsets `h` for which `[h, h+ℓ]` meets the chord: `σ + ℓ`.
    pub fn hit_length(&self, ell: f64) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            self.sigma() + ell
        }
    }

    /// Measure of offsets `h` for which `[h, h+ℓ]` lies in the chord: `(σ − ℓ)₊`.
    pub fn fit_length(&self, ell: f64) -> f64 {
        (self.sigma() - ell).max(0.0)
    }

    /// Whether the parameter range `[h, h+ℓ]` meets the chord.
    pub fn meets(&self, h: f64, ell: f64) -> bool {
        match *self {
            Self::Empty => false,
            Self::Span { s_in, s_out } => h <= s_out && h + ell >= s_in,
        }
    }
}

/// Sampling-window support: a disk about the xy-origin containing the body's
/// projection, and the body's height range.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundingData {
    pub r_xy: f64,
    pub z_min: f64,
    pub z_max: f64,
}

/// Axis-aligned bounding box in ℝ³.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aabb {
    pub min: Vector3<f64>,
    pub max: Vector3<f64>,
}

impl Aabb {
    pub fn extent(&self) -> Vector3<f64> {
        self.max - self.min
    }

    pub fn center(&self) -> Vector3<f64> {
        0.5 * (self.min + self.max)
    }
}

/// Capability set shared by all bodies.
pub trait ConvexBody: Send + Sync {
    /// Membership in the closed body.
    fn contains(&self, pt: Point) -> bool;
    fn chord(&self, line: &HorizontalLine) -> ChordInterval;
    fn bounds(&self) -> BoundingData;
    fn aabb(&self) -> Aabb;
    /// Closed-form Lebesgue volume, when one exists.
    fn volume_exact(&self) -> Option<f64>;
    /// Boundary parametrization with outward normals.
    fn boundary_patches(&self) -> Vec<SurfacePatch>;
    /// Characteristic length used to scale tolerances.
    fn scale(&self) -> f64;
}

/// Clips the parameter range of `line` against `n·x ≤ d` constraints.
pub(crate) fn clip_halfspaces<'a>(
    line: &HorizontalLine,
    halfspaces: impl IntoIterator<Item = (&'a Vector3<f64>, f64)>,
    scale: f64,
) -> ChordInterval {
    let base = line.base_point().to_vector();
    let dir = line.direction();
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for (n, d) in halfspaces {
        let rate = n.dot(&dir);
        let slack = d - n.dot(&base);
        if rate.abs() <= 1e-15 * dir.norm() {
            if slack < 0.0 {
                return ChordInterval::Empty;
            }
            continue;
        }
        let s = slack / rate;
        if rate > 0.0 {
            hi = hi.min(s);
        } else {
            lo = lo.max(s);
        }
    }
    if lo <= hi {
        ChordInterval::span(lo, hi)
    } else if lo - hi <= 1e-12 * scale {
        let mid = 0.5 * (lo + hi);
        ChordInterval::span(mid, mid)
    } else {
        ChordInterval::Empty
    }
}

/// Closed set of concrete bodies understood by the CLI and by
/// [`transform_body`].
#[derive(Clone, Debug)]
pub enum Body {
    Ball(Ball),
    Ellipsoid(Ellipsoid),
    Cuboid(Cuboid),
    Polytope(Polytope),
    Quadric(Quadric),
}

impl Body {
    pub fn kind(&self) -> &'static str {
        match self {
            Body::Ball(_) => "ball",
            Body::Ellipsoid(_) => "ellipsoid",
            Body::Cuboid(_) => "box",
            Body::Polytope(_) => "polytope",
            Body::Quadric(_) => "quadric",
        }
    }

    fn inner(&self) -> &dyn ConvexBody {
        match self {
            Body::Ball(b) => b,
            Body::Ellipsoid(b) => b,
            Body::Cuboid(b) => b,
            Body::Polytope(b) => b,
            Body::Quadric(b) => b,
        }
    }
}

impl ConvexBody for Body {
    fn contains(&self, pt: Point) -> bool {
        self.inner().contains(pt)
    }
    fn chord(&self, line: &HorizontalLine) -> ChordInterval {
        self.inner().chord(line)
    }
    fn bounds(&self) -> BoundingData {
        self.inner().bounds()
    }
    fn aabb(&self) -> Aabb {
        self.inner().aabb()
    }
    fn volume_exact(&self) -> Option<f64> {
        self.inner().volume_exact()
    }
    fn boundary_patches(&self) -> Vec<SurfacePatch> {
        self.inner().boundary_patches()
    }
    fn scale(&self) -> f64 {
        self.inner().scale()
    }
}

impl From<Ball> for Body {
    fn from(b: Ball) -> Self {
        Body::Ball(b)
    }
}
impl From<Ellipsoid> for Body {
    fn from(b: Ellipsoid) -> Self {
        Body::Ellipsoid(b)
    }
}
impl From<Cuboid> for Body {
    fn from(b: Cuboid) -> Self {
        Body::Cuboid(b)
    }
}
impl From<Polytope> for Body {
    fn from(b: Polytope) -> Self {
        Body::Polytope(b)
    }
}
impl From<Quadric> for Body {
    fn from(b: Quadric) -> Self {
        Body::Quadric(b)
    }
}

/// Image of a body under a motion.
///
/// The action is affine on ℝ³, so quadrics map to quadrics and polytopes to
/// polytopes exactly. Boxes become general polytopes.
pub fn transform_body(motion: &PshMotion, body: &Body) -> Result<Body, BodyError> {
    Ok(match body {
        Body::Ball(b) => Body::Quadric(b.quadric().transformed(motion)),
        Body::Ellipsoid(e) => Body::Quadric(e.quadric().transformed(motion)),
        Body::Quadric(q) => Body::Quadric(q.transformed(motion)),
        Body::Cuboid(c) => Body::Polytope(c.to_polytope()?.transformed(motion)?),
        Body::Polytope(p) => Body::Polytope(p.transformed(motion)?),
    })
}
