//! Points, the pseudohermitian motion group PSH(1), oriented horizontal lines
//! and moving frames in the Heisenberg group H₁.
//!
//! Conventions used throughout the crate:
//!
//! * The group law is `(a,b,c)·(x,y,t) = (a+x, b+y, c+t+bx−ay)`.
//! * The contact form is `Θ = dt + x dy − y dx`, whose kernel is spanned by
//!   `e̊₁ = ∂x + y∂t` and `e̊₂ = ∂y − x∂t`.
//! * The Levi metric makes `(e̊₁, e̊₂)` orthonormal.
//! * An oriented horizontal line `G(p, θ, t)` is `γ(s) = (p cosθ + s sinθ,
//!   p sinθ − s cosθ, t + s p)`. The signed foot distance `p` ranges over ℝ
//!   and `θ ∈ [0, 2π)`, so every oriented line has exactly one chart. The
//!   opposite orientation of the same point set is `(−p, θ+π, t)`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use nalgebra::{Matrix3, Matrix4, Vector3, Vector4};
use serde::{Deserialize, Serialize};

/// Absolute tolerance used when comparing angles.
pub const ANGLE_EPS: f64 = 1e-12;

/// Reduces an angle to the half-open interval `[0, 2π)`.
pub fn normalize_angle(angle: f64) -> f64 {
    let r = angle.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Smallest absolute difference between two angles, modulo 2π.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    let d = normalize_angle(a - b);
    d.min(TAU - d)
}

/// A point of H₁ in exponential coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    pub t: f64,
}

impl Point {
    pub const ORIGIN: Point = Point {
        x: 0.0,
        y: 0.0,
        t: 0.0,
    };

    pub const fn new(x: f64, y: f64, t: f64) -> Self {
        Self { x, y, t }
    }

    pub fn to_vector(self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.t)
    }

    pub fn from_vector(v: &Vector3<f64>) -> Self {
        Self::new(v[0], v[1], v[2])
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.t.is_finite()
    }

    /// Euclidean distance in ℝ³, used only for numerical comparisons.
    pub fn euclidean_distance(&self, other: &Point) -> f64 {
        (self.to_vector() - other.to_vector()).norm()
    }

    /// The standard left-invariant frame `(e̊₁, e̊₂, T)` at this point, as
    /// Euclidean vectors.
    pub fn standard_frame(&self) -> [Vector3<f64>; 3] {
        [
            Vector3::new(1.0, 0.0, self.y),
            Vector3::new(0.0, 1.0, -self.x),
            Vector3::new(0.0, 0.0, 1.0),
        ]
    }
}

impl From<Vector3<f64>> for Point {
    fn from(v: Vector3<f64>) -> Self {
        Self::from_vector(&v)
    }
}

/// Contact form `Θ = dt + x dy − y dx` evaluated on `velocity` at `pt`.
///
/// Zero exactly when the velocity lies in the contact plane `ξ_pt`.
pub fn contact_form_at(pt: Point, velocity: Vector3<f64>) -> f64 {
    velocity[2] + pt.x * velocity[1] - pt.y * velocity[0]
}

/// Coordinates of `velocity` in the frame `(e̊₁, e̊₂, T)` at `pt`.
///
/// The first two entries are the contact-plane components, the last one is
/// the Reeb component `Θ(velocity)`.
pub fn frame_components(pt: Point, velocity: Vector3<f64>) -> [f64; 3] {
    [velocity[0], velocity[1], contact_form_at(pt, velocity)]
}

/// Levi-metric norm of the contact-plane part of `velocity` at `pt`.
pub fn horizontal_norm(pt: Point, velocity: Vector3<f64>) -> f64 {
    let [u, v, _] = frame_components(pt, velocity);
    u.hypot(v)
}

/// An element of PSH(1): a contact-plane rotation `R_α` followed by the left
/// translation `L_Q`, `Q = (a, b, c)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PshMotion {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub alpha: f64,
}

impl Default for PshMotion {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl PshMotion {
    pub const IDENTITY: PshMotion = PshMotion {
        a: 0.0,
        b: 0.0,
        c: 0.0,
        alpha: 0.0,
    };

    pub fn new(a: f64, b: f64, c: f64, alpha: f64) -> Self {
        Self {
            a,
            b,
            c,
            alpha: normalize_angle(alpha),
        }
    }

    pub fn translation(a: f64, b: f64, c: f64) -> Self {
        Self::new(a, b, c, 0.0)
    }

    pub fn rotation(alpha: f64) -> Self {
        Self::new(0.0, 0.0, 0.0, alpha)
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite() && self.alpha.is_finite()
    }

    /// `Φ_{Q,α}(pt) = L_Q(R_α(pt))`.
    pub fn apply_point(&self, pt: Point) -> Point {
        let (sin, cos) = self.alpha.sin_cos();
        let x = cos * pt.x - sin * pt.y;
        let y = sin * pt.x + cos * pt.y;
        Point::new(
            self.a + x,
            self.b + y,
            self.c + pt.t + self.b * x - self.a * y,
        )
    }

    /// The 4×4 matrix acting on `(1, x, y, t)ᵀ`.
    ///
    /// The last row carries the rotated coordinates, `t' = c + t + b·x' − a·y'`
    /// with `(x', y') = R_α(x, y)`; for `α = 0` it is `(c, b, −a, 1)`.
    pub fn matrix(&self) -> Matrix4<f64> {
        let (linear, offset) = self.affine();
        let mut m = Matrix4::identity();
        for i in 0..3 {
            m[(i + 1, 0)] = offset[i];
            for j in 0..3 {
                m[(i + 1, j + 1)] = linear[(i, j)];
            }
        }
        m
    }

    /// Applies [`PshMotion::matrix`] to a point by explicit multiplication.
    pub fn apply_point_by_matrix(&self, pt: Point) -> Point {
        let v = self.matrix() * Vector4::new(1.0, pt.x, pt.y, pt.t);
        Point::new(v[1], v[2], v[3])
    }

    /// The action as an affine map of ℝ³: `pt ↦ linear · pt + offset`.
    ///
    /// The linear part has determinant one.
    pub fn affine(&self) -> (Matrix3<f64>, Vector3<f64>) {
        let (sin, cos) = self.alpha.sin_cos();
        let (a, b) = (self.a, self.b);
        #[rustfmt::skip]
        let linear = Matrix3::new(
            cos,                -sin,               0.0,
            sin,                cos,                0.0,
            b * cos - a * sin,  -b * sin - a * cos, 1.0,
        );
        (linear, Vector3::new(a, b, self.c))
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &PshMotion) -> PshMotion {
        let (sin, cos) = self.alpha.sin_cos();
        // Q₁ · R_{α₁}Q₂ in the group, rotations add.
        let a2 = cos * other.a - sin * other.b;
        let b2 = sin * other.a + cos * other.b;
        PshMotion::new(
            self.a + a2,
            self.b + b2,
            self.c + other.c + self.b * a2 - self.a * b2,
            self.alpha + other.alpha,
        )
    }

    /// Two-sided inverse, `R_{−α} ∘ L_{−Q}`, solved from the group law.
    pub fn inverse(&self) -> PshMotion {
        let (sin, cos) = self.alpha.sin_cos();
        PshMotion::new(
            -(cos * self.a + sin * self.b),
            sin * self.a - cos * self.b,
            -self.c,
            -self.alpha,
        )
    }

    /// Image of an oriented horizontal line. Orientation is carried along, so
    /// the result may have negative `p`; call [`HorizontalLine::canonical`]
    /// for the `p ≥ 0` representative of the point set.
    pub fn apply_line(&self, line: &HorizontalLine) -> HorizontalLine {
        let base = self.apply_point(line.base_point());
        let theta = normalize_angle(line.theta + self.alpha);
        HorizontalLine::through(base, theta)
    }

    /// Image of a frame: the frame origin moves by the point action, the
    /// frame angle turns by `α`.
    pub fn apply_frame(&self, frame: &FramePose) -> FramePose {
        FramePose::new(self.apply_point(frame.q), frame.phi + self.alpha)
    }

    pub fn approx_eq(&self, other: &PshMotion, tol: f64) -> bool {
        (self.a - other.a).abs() <= tol
            && (self.b - other.b).abs() <= tol
            && (self.c - other.c).abs() <= tol
            && angle_distance(self.alpha, other.alpha) <= tol
    }
}

/// Oriented horizontal line `G(p, θ, t)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HorizontalLine {
    /// Signed distance from the origin to the footpoint of the projection.
    pub p: f64,
    /// Angle of the projection's normal, in `[0, 2π)`.
    pub theta: f64,
    /// Height of the base point above the footpoint.
    pub t: f64,
}

impl HorizontalLine {
    pub fn new(p: f64, theta: f64, t: f64) -> Self {
        Self {
            p,
            theta: normalize_angle(theta),
            t,
        }
    }

    /// The oriented line through `pt` with normal angle `theta`.
    pub fn through(pt: Point, theta: f64) -> Self {
        let (sin, cos) = theta.sin_cos();
        let p = pt.x * cos + pt.y * sin;
        let s = pt.x * sin - pt.y * cos;
        Self::new(p, theta, pt.t - s * p)
    }

    /// Base point `B`, the lift of the footpoint `(p cosθ, p sinθ)`.
    pub fn base_point(&self) -> Point {
        let (sin, cos) = self.theta.sin_cos();
        Point::new(self.p * cos, self.p * sin, self.t)
    }

    /// Unit-horizontal-speed velocity `U = sinθ e̊₁ − cosθ e̊₂`, constant along
    /// the line.
    pub fn direction(&self) -> Vector3<f64> {
        let (sin, cos) = self.theta.sin_cos();
        Vector3::new(sin, -cos, self.p)
    }

    /// `γ(s) = B + sU`.
    pub fn point_at(&self, s: f64) -> Point {
        let (sin, cos) = self.theta.sin_cos();
        Point::new(
            self.p * cos + s * sin,
            self.p * sin - s * cos,
            self.t + s * self.p,
        )
    }

    /// Horizontal arc-length parameter of the point of the line whose
    /// projection is closest to `pt`'s projection.
    pub fn parameter_of(&self, pt: Point) -> f64 {
        let (sin, cos) = self.theta.sin_cos();
        pt.x * sin - pt.y * cos
    }

    /// The same point set traversed in the opposite direction.
    pub fn reversed(&self) -> Self {
        Self::new(-self.p, self.theta + PI, self.t)
    }

    /// Representative with `p ≥ 0` of the same point set. This may flip the
    /// orientation.
    pub fn canonical(&self) -> Self {
        if self.p < 0.0 {
            self.reversed()
        } else {
            *self
        }
    }

    /// Whether both oriented lines have the same point set, up to `tol`.
    pub fn same_point_set(&self, other: &HorizontalLine, tol: f64) -> bool {
        let a = self.canonical();
        let b = other.canonical();
        if (a.p - b.p).abs() > tol || (a.t - b.t).abs() > tol {
            return false;
        }
        if a.p.abs() <= tol {
            // Through the origin both chart angles describe the same set up to
            // orientation.
            angle_distance(a.theta, b.theta) <= tol || angle_distance(a.theta, b.theta + PI) <= tol
        } else {
            angle_distance(a.theta, b.theta) <= tol
        }
    }
}

/// Levi-metric length of the arc `γ([s0, s1])`.
///
/// Lines are parametrized by horizontal arc length, so this is `s1 − s0`.
pub fn levi_length(_line: &HorizontalLine, s0: f64, s1: f64) -> f64 {
    s1 - s0
}

/// Length of the same arc measured with the contact plane frozen at the
/// initial point `A = γ(s0)`: the `ξ_A`-norm of the displacement `A → γ(s1)`,
/// which lies in `ξ_A` because the line is horizontal.
pub fn levi_length_frozen_plane(line: &HorizontalLine, s0: f64, s1: f64) -> f64 {
    let a = line.point_at(s0);
    let b = line.point_at(s1);
    let sign = if s1 >= s0 { 1.0 } else { -1.0 };
    sign * horizontal_norm(a, b.to_vector() - a.to_vector())
}

/// A moving frame `(Q; e₁(Q), e₂(Q), T)`: origin `Q` and the angle `φ` from
/// `e̊₁(Q)` to `e₁(Q)` in the contact plane.
///
/// Frames correspond to pairs (line, offset) through `φ = θ + π/2` and
/// `Q = γ(h)`; with this convention the line runs along `−e₁(Q)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FramePose {
    pub q: Point,
    pub phi: f64,
}

impl FramePose {
    pub fn new(q: Point, phi: f64) -> Self {
        Self {
            q,
            phi: normalize_angle(phi),
        }
    }

    /// `e₁(Q)` and `e₂(Q) = J e₁(Q)` as Euclidean vectors.
    pub fn axes(&self) -> [Vector3<f64>; 2] {
        let [e1, e2, _] = self.q.standard_frame();
        let (sin, cos) = self.phi.sin_cos();
        [cos * e1 + sin * e2, -sin * e1 + cos * e2]
    }
}

/// `(G, h) ↦ (Q, φ)` with `Q = γ(h)` and `φ = θ + π/2`.
pub fn frame_from_line(line: &HorizontalLine, h: f64) -> FramePose {
    FramePose::new(line.point_at(h), line.theta + FRAC_PI_2)
}

/// Inverse of [`frame_from_line`].
pub fn line_from_frame(frame: &FramePose) -> (HorizontalLine, f64) {
    let theta = normalize_angle(frame.phi - FRAC_PI_2);
    let (sin, cos) = theta.sin_cos();
    let Point { x: a, y: b, t: c } = frame.q;
    let p = a * cos + b * sin;
    let h = a * sin - b * cos;
    (HorizontalLine::new(p, theta, c - h * p), h)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Point, b: Point, tol: f64) -> bool {
        a.euclidean_distance(&b) <= tol
    }

    #[test]
    fn identity_motion_fixes_points() {
        let pt = Point::new(0.3, -1.2, 4.0);
        assert_eq!(PshMotion::IDENTITY.apply_point(pt), pt);
    }

    #[test]
    fn translation_follows_group_law() {
        let m = PshMotion::new(1.0, 2.0, 3.0, 0.0);
        let img = m.apply_point(Point::new(4.0, 5.0, 6.0));
        assert!(close(img, Point::new(5.0, 7.0, 12.0), 1e-15));
    }

    #[test]
    fn quarter_rotation() {
        let m = PshMotion::rotation(FRAC_PI_2);
        assert!(close(
            m.apply_point(Point::new(1.0, 0.0, 0.0)),
            Point::new(0.0, 1.0, 0.0),
            1e-15
        ));
    }

    #[test]
    fn compose_of_translations() {
        // L_(1,0,0)(0,1,0) = (1, 1, 0 + 0·0 − 1·1).
        let m =
            PshMotion::translation(1.0, 0.0, 0.0).compose(&PshMotion::translation(0.0, 1.0, 0.0));
        assert!(close(
            m.apply_point(Point::ORIGIN),
            Point::new(1.0, 1.0, -1.0),
            1e-15
        ));
    }

    #[test]
    fn inverse_of_translation() {
        let inv = PshMotion::translation(1.5, -2.0, 0.25).inverse();
        assert!(inv.approx_eq(&PshMotion::translation(-1.5, 2.0, -0.25), 1e-15));
        assert!(PshMotion::IDENTITY
            .inverse()
            .approx_eq(&PshMotion::IDENTITY, 0.0));
    }

    #[test]
    fn matrix_matches_point_action() {
        let m = PshMotion::new(0.7, -1.1, 2.5, 1.3);
        let pt = Point::new(-0.4, 0.9, 1.7);
        assert!(close(m.apply_point(pt), m.apply_point_by_matrix(pt), 1e-14));
    }

    #[test]
    fn line_points() {
        let g = HorizontalLine::new(1.0, 0.0, 0.0);
        assert!(close(g.point_at(2.0), Point::new(1.0, -2.0, 2.0), 1e-15));
        let g = HorizontalLine::new(0.0, 0.8, 0.0);
        let (sin, cos) = 0.8f64.sin_cos();
        assert!(close(
            g.point_at(1.5),
            Point::new(1.5 * sin, -1.5 * cos, 0.0),
            1e-15
        ));
        let g = HorizontalLine::new(2.0, 1.0, 3.0);
        assert_eq!(g.point_at(0.0), g.base_point());
    }

    #[test]
    fn contact_form_examples() {
        assert_eq!(
            contact_form_at(Point::ORIGIN, Vector3::new(1.0, 0.0, 0.0)),
            0.0
        );
        assert_eq!(
            contact_form_at(Point::new(1.0, 0.0, 0.0), Vector3::new(0.0, 0.0, 1.0)),
            1.0
        );
        let g = HorizontalLine::new(-0.7, 2.2, 1.0);
        for s in [-3.0, 0.0, 0.5, 10.0] {
            assert!(contact_form_at(g.point_at(s), g.direction()).abs() < 1e-12);
        }
    }

    #[test]
    fn translated_line_chart() {
        // B = (1,0,0) ↦ (2, 1, 2); θ' = 0, p' = 2, s' = −1, t' = 2 + 2 = 4.
        let m = PshMotion::translation(1.0, 1.0, 1.0);
        let g = m.apply_line(&HorizontalLine::new(1.0, 0.0, 0.0));
        assert!((g.p - 2.0).abs() < 1e-15);
        assert!(angle_distance(g.theta, 0.0) < 1e-15);
        assert!((g.t - 4.0).abs() < 1e-14);
        let g0 = HorizontalLine::new(1.3, 0.4, -2.0);
        let same = PshMotion::IDENTITY.apply_line(&g0);
        assert!((same.p - g0.p).abs() < 1e-12 && (same.t - g0.t).abs() < 1e-12);
        assert!(angle_distance(same.theta, g0.theta) < ANGLE_EPS);
    }

    #[test]
    fn reversed_line_has_same_points() {
        let g = HorizontalLine::new(1.2, 0.3, -0.5);
        let r = g.reversed();
        for s in [-1.0, 0.0, 2.5] {
            assert!(close(g.point_at(s), r.point_at(-s), 1e-14));
        }
        assert!(g.same_point_set(&r, 1e-12));
        assert!(r.canonical().p >= 0.0);
    }

    #[test]
    fn frames() {
        let f = frame_from_line(&HorizontalLine::new(0.0, 0.0, 0.0), 0.0);
        assert_eq!(f.q, Point::ORIGIN);
        assert!(angle_distance(f.phi, FRAC_PI_2) < 1e-15);

        let f = frame_from_line(&HorizontalLine::new(1.0, 0.0, 2.0), 3.0);
        assert!(close(f.q, Point::new(1.0, -3.0, 5.0), 1e-15));

        let (g, h) = line_from_frame(&FramePose::new(Point::new(1.0, 0.0, 0.0), FRAC_PI_2));
        assert!((g.p - 1.0).abs() < 1e-15 && g.theta.abs() < 1e-15);
        assert!(h.abs() < 1e-15 && g.t.abs() < 1e-15);
    }

    #[test]
    fn frame_axes_are_horizontal_and_orthonormal() {
        let f = FramePose::new(Point::new(0.5, -2.0, 1.0), 0.9);
        let [e1, e2] = f.axes();
        for e in [e1, e2] {
            assert!(contact_form_at(f.q, e).abs() < 1e-14);
            assert!((horizontal_norm(f.q, e) - 1.0).abs() < 1e-14);
        }
        let [u1, v1, _] = frame_components(f.q, e1);
        let [u2, v2, _] = frame_components(f.q, e2);
        assert!((u1 * u2 + v1 * v2).abs() < 1e-14);
        // The line through the frame runs along −e₁.
        let (g, _) = line_from_frame(&f);
        assert!((g.direction() + e1).norm() < 1e-14);
    }

    #[test]
    fn lengths() {
        let g = HorizontalLine::new(0.0, 1.1, 0.0);
        assert_eq!(levi_length(&g, 0.3, 0.3), 0.0);
        assert_eq!(levi_length(&g, -1.0, 1.0), 2.0);
        assert!((levi_length_frozen_plane(&g, -1.0, 1.0) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn angle_normalization() {
        assert_eq!(normalize_angle(TAU), 0.0);
        assert!(normalize_angle(-1e-20) < TAU);
        assert!((normalize_angle(-FRAC_PI_2) - 1.5 * PI).abs() < 1e-15);
    }
}
