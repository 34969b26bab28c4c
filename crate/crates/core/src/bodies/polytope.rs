use nalgebra::{Matrix3, Vector3};

use super::{clip_halfspaces, Aabb, BodyError, BoundingData, ChordInterval, ConvexBody};
use crate::geometry::{HorizontalLine, Point, PshMotion};
use crate::measures::SurfacePatch;

/// Closed half-space `normal · x ≤ offset` with a unit normal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Halfspace {
    pub normal: Vector3<f64>,
    pub offset: f64,
}

impl Halfspace {
    /// Normalizes `normal` to unit length, scaling `offset` to match.
    pub fn new(normal: Vector3<f64>, offset: f64) -> Result<Self, BodyError> {
        let len = normal.norm();
        if !(len.is_finite() && len > 0.0 && offset.is_finite()) {
            return Err(BodyError::InvalidParameter(
                "half-space needs a finite nonzero normal and a finite offset".into(),
            ));
        }
        Ok(Self {
            normal: normal / len,
            offset: offset / len,
        })
    }

    pub fn signed_distance(&self, x: &Vector3<f64>) -> f64 {
        self.normal.dot(x) - self.offset
    }
}

#[derive(Clone, Debug)]
struct Face {
    normal: Vector3<f64>,
    /// Counter-clockwise as seen from outside.
    vertices: Vec<Vector3<f64>>,
}

impl Face {
    fn area(&self) -> f64 {
        let v0 = self.vertices[0];
        self.vertices
            .windows(2)
            .skip(1)
            .map(|w| (w[0] - v0).cross(&(w[1] - v0)).dot(&self.normal))
            .sum::<f64>()
            * 0.5
    }
}

/// Bounded convex polytope given by half-spaces, with its vertices and face
/// polygons enumerated at construction.
#[derive(Clone, Debug)]
pub struct Polytope {
    halfspaces: Vec<Halfspace>,
    vertices: Vec<Vector3<f64>>,
    faces: Vec<Face>,
    volume: f64,
    scale: f64,
}

impl Polytope {
    pub fn from_halfspaces(halfspaces: Vec<Halfspace>) -> Result<Self, BodyError> {
        if halfspaces.len() < 4 {
            return Err(BodyError::NotBounded);
        }
        let scale = halfspaces
            .iter()
            .map(|h| h.offset.abs())
            .fold(1.0, f64::max);
        let tol = 1e-9 * scale;

        let mut vertices: Vec<Vector3<f64>> = Vec::new();
        let n = halfspaces.len();
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let (a, b, c) = (&halfspaces[i], &halfspaces[j], &halfspaces[k]);
                    let m = Matrix3::from_rows(&[
                        a.normal.transpose(),
                        b.normal.transpose(),
                        c.normal.transpose(),
                    ]);
                    if m.determinant().abs() < 1e-12 {
                        continue;
                    }
                    let Some(v) = m.lu().solve(&Vector3::new(a.offset, b.offset, c.offset)) else {
                        continue;
                    };
                    if halfspaces.iter().all(|h| h.signed_distance(&v) <= tol)
                        && !vertices.iter().any(|w| (w - v).norm() <= tol)
                    {
                        vertices.push(v);
                    }
                }
            }
        }
        if vertices.len() < 4 {
            return Err(BodyError::EmptyInterior);
        }

        let mut faces = Vec::new();
        for (i, h) in halfspaces.iter().enumerate() {
            let duplicate = halfspaces[..i].iter().any(|g| {
                (g.normal - h.normal).norm() < 1e-12 && (g.offset - h.offset).abs() <= tol
            });
            if duplicate {
                continue;
            }
            let on_plane: Vec<_> = vertices
                .iter()
                .copied()
                .filter(|v| h.signed_distance(v).abs() <= tol)
                .collect();
            if on_plane.len() < 3 {
                continue;
            }
            let face = Face {
                normal: h.normal,
                vertices: order_ccw(on_plane, &h.normal),
            };
            if face.area() > tol * tol {
                faces.push(face);
            }
        }

        // A bounded polytope's faces close up: Σ area·normal = 0.
        let total_area: f64 = faces.iter().map(Face::area).sum();
        let flux: Vector3<f64> = faces.iter().map(|f| f.normal * f.area()).sum();
        if faces.len() < 4 || flux.norm() > 1e-9 * total_area.max(1e-300) {
            return Err(BodyError::NotBounded);
        }
        let volume = faces
            .iter()
            .map(|f| f.area() * f.normal.dot(&f.vertices[0]))
            .sum::<f64>()
            / 3.0;
        if volume.is_nan() || volume <= 1e-12 * scale.powi(3) {
            return Err(BodyError::EmptyInterior);
        }
        let extent = vertices.iter().map(|v| v.norm()).fold(0.0, f64::max);
        Ok(Self {
            halfspaces,
            vertices,
            faces,
            volume,
            scale: extent.max(f64::MIN_POSITIVE),
        })
    }

    pub fn halfspaces(&self) -> &[Halfspace] {
        &self.halfspaces
    }

    pub fn vertices(&self) -> &[Vector3<f64>] {
        &self.vertices
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    /// Volume by the divergence theorem: `V = ⅓ Σ_f A_f (n_f · x_f)`.
    pub fn divergence_volume(&self) -> f64 {
        self.volume
    }

    pub fn transformed(&self, motion: &PshMotion) -> Result<Polytope, BodyError> {
        let (_, offset) = motion.affine();
        let (inv_linear, _) = motion.inverse().affine();
        let pulled = inv_linear.transpose();
        let halfspaces = self
            .halfspaces
            .iter()
            .map(|h| {
                let n = pulled * h.normal;
                Halfspace::new(n, h.offset + n.dot(&offset))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Polytope::from_halfspaces(halfspaces)
    }
}

fn order_ccw(mut pts: Vec<Vector3<f64>>, normal: &Vector3<f64>) -> Vec<Vector3<f64>> {
    let centroid = pts.iter().sum::<Vector3<f64>>() / pts.len() as f64;
    let helper = if normal.x.abs() < 0.9 {
        Vector3::x()
    } else {
        Vector3::y()
    };
    let e1 = normal.cross(&helper).normalize();
    let e2 = normal.cross(&e1);
    pts.sort_by(|a, b| {
        let (da, db) = (a - centroid, b - centroid);
        let ta = da.dot(&e2).atan2(da.dot(&e1));
        let tb = db.dot(&e2).atan2(db.dot(&e1));
        ta.total_cmp(&tb)
    });
    pts
}

impl ConvexBody for Polytope {
    fn contains(&self, pt: Point) -> bool {
        let x = pt.to_vector();
        self.halfspaces.iter().all(|h| h.signed_distance(&x) <= 0.0)
    }

    fn chord(&self, line: &HorizontalLine) -> ChordInterval {
        clip_halfspaces(
            line,
            self.halfspaces.iter().map(|h| (&h.normal, h.offset)),
            self.scale,
        )
    }

    fn bounds(&self) -> BoundingData {
        // Norm and height are convex, so their maxima sit at vertices.
        let r_xy = self
            .vertices
            .iter()
            .map(|v| v.xy().norm())
            .fold(0.0, f64::max);
        let z_min = self
            .vertices
            .iter()
            .map(|v| v.z)
            .fold(f64::INFINITY, f64::min);
        let z_max = self
            .vertices
            .iter()
            .map(|v| v.z)
            .fold(f64::NEG_INFINITY, f64::max);
        BoundingData { r_xy, z_min, z_max }
    }

    fn aabb(&self) -> Aabb {
        let mut min = Vector3::repeat(f64::INFINITY);
        let mut max = Vector3::repeat(f64::NEG_INFINITY);
        for v in &self.vertices {
            min = min.inf(v);
            max = max.sup(v);
        }
        Aabb { min, max }
    }

    fn volume_exact(&self) -> Option<f64> {
        Some(self.volume)
    }

    fn boundary_patches(&self) -> Vec<SurfacePatch> {
        let mut patches = Vec::new();
        for face in &self.faces {
            let v0 = face.vertices[0];
            for w in face.vertices.windows(2).skip(1) {
                patches.push(SurfacePatch::Triangle {
                    apex: v0,
                    b: w[0],
                    c: w[1],
                    normal: face.normal,
                });
            }
        }
        patches
    }

    fn scale(&self) -> f64 {
        self.scale
    }
}

/// Axis-aligned box `[min, max]`.
#[derive(Clone, Debug)]
pub struct Cuboid {
    min: Vector3<f64>,
    max: Vector3<f64>,
    axes: [Vector3<f64>; 6],
}

impl Cuboid {
    pub fn new(min: Vector3<f64>, max: Vector3<f64>) -> Result<Self, BodyError> {
        if !min.iter().chain(max.iter()).all(|v| v.is_finite()) {
            return Err(BodyError::InvalidParameter("non-finite box corner".into()));
        }
        if (0..3).any(|i| max[i] <= min[i]) {
            return Err(BodyError::EmptyInterior);
        }
        let axes = [
            Vector3::x(),
            -Vector3::x(),
            Vector3::y(),
            -Vector3::y(),
            Vector3::z(),
            -Vector3::z(),
        ];
        Ok(Self { min, max, axes })
    }

    pub fn min(&self) -> Vector3<f64> {
        self.min
    }

    pub fn max(&self) -> Vector3<f64> {
        self.max
    }

    fn offsets(&self) -> [f64; 6] {
        [
            self.max.x,
            -self.min.x,
            self.max.y,
            -self.min.y,
            self.max.z,
            -self.min.z,
        ]
    }

    pub fn to_polytope(&self) -> Result<Polytope, BodyError> {
        let hs = self
            .axes
            .iter()
            .zip(self.offsets())
            .map(|(n, d)| Halfspace::new(*n, d))
            .collect::<Result<Vec<_>, _>>()?;
        Polytope::from_halfspaces(hs)
    }
}

impl ConvexBody for Cuboid {
    fn contains(&self, pt: Point) -> bool {
        let x = pt.to_vector();
        (0..3).all(|i| self.min[i] <= x[i] && x[i] <= self.max[i])
    }

    fn chord(&self, line: &HorizontalLine) -> ChordInterval {
        let offsets = self.offsets();
        clip_halfspaces(line, self.axes.iter().zip(offsets), self.scale())
    }

    fn bounds(&self) -> BoundingData {
        let rx = self.min.x.abs().max(self.max.x.abs());
        let ry = self.min.y.abs().max(self.max.y.abs());
        BoundingData {
            r_xy: rx.hypot(ry),
            z_min: self.min.z,
            z_max: self.max.z,
        }
    }

    fn aabb(&self) -> Aabb {
        Aabb {
            min: self.min,
            max: self.max,
        }
    }

    fn volume_exact(&self) -> Option<f64> {
        Some((self.max - self.min).product())
    }

    fn boundary_patches(&self) -> Vec<SurfacePatch> {
        let d = self.max - self.min;
        let (lo, hi) = (self.min, self.max);
        let ex = Vector3::new(d.x, 0.0, 0.0);
        let ey = Vector3::new(0.0, d.y, 0.0);
        let ez = Vector3::new(0.0, 0.0, d.z);
        let face = |origin: Vector3<f64>, edge_u, edge_v, normal| SurfacePatch::Parallelogram {
            origin,
            edge_u,
            edge_v,
            normal,
        };
        vec![
            face(Vector3::new(hi.x, lo.y, lo.z), ey, ez, Vector3::x()),
            face(lo, ey, ez, -Vector3::x()),
            face(Vector3::new(lo.x, hi.y, lo.z), ex, ez, Vector3::y()),
            face(lo, ex, ez, -Vector3::y()),
            face(Vector3::new(lo.x, lo.y, hi.z), ex, ey, Vector3::z()),
            face(lo, ex, ey, -Vector3::z()),
        ]
    }

    fn scale(&self) -> f64 {
        self.min
            .abs()
            .sup(&self.max.abs())
            .norm()
            .max((self.max - self.min).max())
    }
}
