use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};

use super::{Aabb, BodyError, BoundingData, ChordInterval, ConvexBody};
use crate::geometry::{HorizontalLine, Point, PshMotion};
use crate::measures::SurfacePatch;

/// Solid ellipsoid `{ c + L u : |u| ≤ 1 }` for an invertible `L`.
///
/// Affine images of balls stay in this family, which is how transformed balls
/// and ellipsoids are represented exactly.
#[derive(Clone, Debug)]
pub struct Quadric {
    center: Vector3<f64>,
    basis: Matrix3<f64>,
    inverse: Matrix3<f64>,
    det: f64,
}

impl Quadric {
    pub fn new(center: Vector3<f64>, basis: Matrix3<f64>) -> Result<Self, BodyError> {
        if !center.iter().chain(basis.iter()).all(|v| v.is_finite()) {
            return Err(BodyError::InvalidParameter(
                "non-finite quadric entry".into(),
            ));
        }
        let det = basis.determinant();
        let inverse = basis
            .try_inverse()
            .filter(|_| det.abs() > 1e-300)
            .ok_or(BodyError::EmptyInterior)?;
        Ok(Self {
            center,
            basis,
            inverse,
            det,
        })
    }

    pub fn center(&self) -> Vector3<f64> {
        self.center
    }

    pub fn basis(&self) -> &Matrix3<f64> {
        &self.basis
    }

    /// The 4×4 quadratic form `Q` with `D = { X : (1,X)ᵀ Q (1,X) ≤ 0 }`.
    pub fn quadratic_form(&self) -> nalgebra::Matrix4<f64> {
        let m = self.inverse.transpose() * self.inverse;
        let mc = m * self.center;
        let mut q = nalgebra::Matrix4::zeros();
        q[(0, 0)] = self.center.dot(&mc) - 1.0;
        for i in 0..3 {
            q[(0, i + 1)] = -mc[i];
            q[(i + 1, 0)] = -mc[i];
            for j in 0..3 {
                q[(i + 1, j + 1)] = m[(i, j)];
            }
        }
        q
    }

    pub fn transformed(&self, motion: &PshMotion) -> Quadric {
        let (linear, offset) = motion.affine();
        let basis = linear * self.basis;
        // det(linear) = 1, so the inverse and determinant transform exactly.
        Quadric {
            center: linear * self.center + offset,
            basis,
            inverse: self.inverse * motion.inverse().affine().0,
            det: self.det,
        }
    }

    fn local(&self, pt: &Vector3<f64>) -> Vector3<f64> {
        self.inverse * (pt - self.center)
    }
}

impl ConvexBody for Quadric {
    fn contains(&self, pt: Point) -> bool {
        self.local(&pt.to_vector()).norm_squared() <= 1.0
    }

    fn chord(&self, line: &HorizontalLine) -> ChordInterval {
        let u0 = self.local(&line.base_point().to_vector());
        let du = self.inverse * line.direction();
        let a = du.norm_squared();
        let mid = -u0.dot(&du) / a;
        // Squared half-width, from the closest approach in unit-ball coordinates.
        let w2 = (1.0 - (u0 + mid * du).norm_squared()) / a;
        let scale = self.scale();
        if w2 < -1e-12 * scale * scale {
            ChordInterval::Empty
        } else {
            let w = w2.max(0.0).sqrt();
            ChordInterval::span(mid - w, mid + w)
        }
    }

    fn bounds(&self) -> BoundingData {
        let rows = self.basis.transpose();
        // Largest singular value of the xy rows of L.
        let r0 = rows.column(0);
        let r1 = rows.column(1);
        let (g00, g01, g11) = (r0.norm_squared(), r0.dot(&r1), r1.norm_squared());
        let tr = g00 + g11;
        let disc = ((g00 - g11).powi(2) + 4.0 * g01 * g01).sqrt();
        let sigma_max = (0.5 * (tr + disc)).sqrt();
        let half_z = rows.column(2).norm();
        BoundingData {
            r_xy: self.center.xy().norm() + sigma_max,
            z_min: self.center.z - half_z,
            z_max: self.center.z + half_z,
        }
    }

    fn aabb(&self) -> Aabb {
        let half = Vector3::from_fn(|i, _| self.basis.row(i).norm());
        Aabb {
            min: self.center - half,
            max: self.center + half,
        }
    }

    fn volume_exact(&self) -> Option<f64> {
        Some(4.0 / 3.0 * PI * self.det.abs())
    }

    fn boundary_patches(&self) -> Vec<SurfacePatch> {
        vec![SurfacePatch::Ellipsoid {
            center: self.center,
            basis: self.basis,
            inverse_transpose: self.inverse.transpose(),
            det: self.det.abs(),
        }]
    }

    fn scale(&self) -> f64 {
        self.basis.norm()
    }
}

/// Euclidean ball.
#[derive(Clone, Debug)]
pub struct Ball {
    center: Point,
    radius: f64,
    quadric: Quadric,
}

impl Ball {
    pub fn new(center: Point, radius: f64) -> Result<Self, BodyError> {
        if !(radius.is_finite() && radius > 0.0) || !center.is_finite() {
            return Err(BodyError::InvalidParameter(format!(
                "ball needs a finite center and positive radius, got {radius}"
            )));
        }
        let quadric = Quadric::new(center.to_vector(), Matrix3::from_diagonal_element(radius))?;
        Ok(Self {
            center,
            radius,
            quadric,
        })
    }

    pub fn unit() -> Self {
        Self::new(Point::ORIGIN, 1.0).expect("unit ball is valid")
    }

    pub fn center(&self) -> Point {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn quadric(&self) -> &Quadric {
        &self.quadric
    }
}

impl ConvexBody for Ball {
    fn contains(&self, pt: Point) -> bool {
        (pt.to_vector() - self.center.to_vector()).norm_squared() <= self.radius * self.radius
    }
    fn chord(&self, line: &HorizontalLine) -> ChordInterval {
        self.quadric.chord(line)
    }
    fn bounds(&self) -> BoundingData {
        BoundingData {
            r_xy: self.center.x.hypot(self.center.y) + self.radius,
            z_min: self.center.t - self.radius,
            z_max: self.center.t + self.radius,
        }
    }
    fn aabb(&self) -> Aabb {
        self.quadric.aabb()
    }
    fn volume_exact(&self) -> Option<f64> {
        Some(4.0 / 3.0 * PI * self.radius.powi(3))
    }
    fn boundary_patches(&self) -> Vec<SurfacePatch> {
        self.quadric.boundary_patches()
    }
    fn scale(&self) -> f64 {
        self.radius
    }
}

/// Axis-aligned solid ellipsoid.
#[derive(Clone, Debug)]
pub struct Ellipsoid {
    center: Point,
    semi_axes: Vector3<f64>,
    quadric: Quadric,
}

impl Ellipsoid {
    pub fn new(center: Point, semi_axes: Vector3<f64>) -> Result<Self, BodyError> {
        if !center.is_finite() || !semi_axes.iter().all(|a| a.is_finite() && *a > 0.0) {
            return Err(BodyError::InvalidParameter(
                "ellipsoid needs a finite center and positive semi-axes".into(),
            ));
        }
        let quadric = Quadric::new(center.to_vector(), Matrix3::from_diagonal(&semi_axes))?;
        Ok(Self {
            center,
            semi_axes,
            quadric,
        })
    }

    pub fn center(&self) -> Point {
        self.center
    }

    pub fn semi_axes(&self) -> Vector3<f64> {
        self.semi_axes
    }

    pub fn quadric(&self) -> &Quadric {
        &self.quadric
    }
}

impl ConvexBody for Ellipsoid {
    fn contains(&self, pt: Point) -> bool {
        let d = pt.to_vector() - self.center.to_vector();
        d.component_div(&self.semi_axes).norm_squared() <= 1.0
    }
    fn chord(&self, line: &HorizontalLine) -> ChordInterval {
        self.quadric.chord(line)
    }
    fn bounds(&self) -> BoundingData {
        let ax = self.semi_axes;
        BoundingData {
            r_xy: self.center.x.hypot(self.center.y) + ax.x.max(ax.y),
            z_min: self.center.t - ax.z,
            z_max: self.center.t + ax.z,
        }
    }
    fn aabb(&self) -> Aabb {
        self.quadric.aabb()
    }
    fn volume_exact(&self) -> Option<f64> {
        Some(4.0 / 3.0 * PI * self.semi_axes.product())
    }
    fn boundary_patches(&self) -> Vec<SurfacePatch> {
        self.quadric.boundary_patches()
    }
    fn scale(&self) -> f64 {
        self.semi_axes.max()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_ball_chords() {
        let ball = Ball::unit();
        for theta in [0.0, 0.4, 2.0, 5.5] {
            let (lo, hi) = ball
                .chord(&HorizontalLine::new(0.0, theta, 0.0))
                .bounds()
                .unwrap();
            assert!((lo + 1.0).abs() < 1e-14 && (hi - 1.0).abs() < 1e-14);
        }
        assert!(ball.chord(&HorizontalLine::new(2.0, 0.0, 0.0)).is_empty());
    }

    #[test]
    fn grazing_line_is_zero_length() {
        // The line x = 1 in the plane t = 0 touches the sphere at (1, 0, 0).
        let c = Ball::unit().chord(&HorizontalLine::new(1.0, 0.0, -0.0));
        // γ(s) = (1, −s, s): |γ|² = 1 + 2s² > 1 except at s = 0.
        let (lo, hi) = c.bounds().unwrap();
        assert!(lo.abs() < 1e-6 && hi.abs() < 1e-6);
    }

    #[test]
    fn quadratic_form_matches_membership() {
        let q = Quadric::new(
            Vector3::new(0.3, -0.2, 1.0),
            Matrix3::new(1.0, 0.2, 0.0, 0.0, 0.7, 0.1, 0.3, 0.0, 1.2),
        )
        .unwrap();
        let form = q.quadratic_form();
        for pt in [
            Point::new(0.3, -0.2, 1.0),
            Point::new(2.0, 0.0, 0.0),
            Point::new(0.8, 0.1, 1.5),
        ] {
            let v = nalgebra::Vector4::new(1.0, pt.x, pt.y, pt.t);
            assert_eq!((v.transpose() * form * v)[0] <= 1e-12, q.contains(pt));
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Ball::new(Point::ORIGIN, 0.0).is_err());
        assert!(Ball::new(Point::new(f64::NAN, 0.0, 0.0), 1.0).is_err());
        assert!(Ellipsoid::new(Point::ORIGIN, Vector3::new(1.0, -1.0, 1.0)).is_err());
        assert!(Quadric::new(Vector3::zeros(), Matrix3::zeros()).is_err());
    }
}
