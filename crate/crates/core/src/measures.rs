//! Volume and p-Area of convex bodies.
//!
//! The p-Area of `Σ = ∂D` is evaluated as the surface integral of the norm of
//! the horizontal projection of the outward Euclidean unit normal,
//!
//! ```text
//! |N_H| = √((n₁ + y n₃)² + (n₂ − x n₃)²),
//! ```
//!
//! the contact-plane part of `n` in the orthonormal frame `(e̊₁, e̊₂)`. It is
//! nonnegative and vanishes exactly at the singular points of `Σ`, where the
//! tangent plane is the contact plane.
//!
//! Two independent oracles back the primary computations: voxel counting for
//! the volume and a flat-triangle mesh with centroid evaluation for the
//! p-Area. The mesh oracle only uses patch positions, never the analytic
//! normals or area elements.

use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::bodies::ConvexBody;
use crate::geometry::Point;

/// Parametrized piece of a closed boundary surface.
#[derive(Clone, Debug)]
pub enum SurfacePatch {
    /// `c + L·(sinψ cosφ, sinψ sinφ, cosψ)` over `(ψ, φ) ∈ [0, π] × [0, 2π]`.
    Ellipsoid {
        center: Vector3<f64>,
        basis: Matrix3<f64>,
        inverse_transpose: Matrix3<f64>,
        det: f64,
    },
    /// `origin + u·edge_u + v·edge_v` over `[0, 1]²`.
    Parallelogram {
        origin: Vector3<f64>,
        edge_u: Vector3<f64>,
        edge_v: Vector3<f64>,
        normal: Vector3<f64>,
    },
    /// Collapsed square `apex + u(b − apex) + uv(c − b)` over `[0, 1]²`.
    Triangle {
        apex: Vector3<f64>,
        b: Vector3<f64>,
        c: Vector3<f64>,
        normal: Vector3<f64>,
    },
}

impl SurfacePatch {
    /// Parameter rectangle `((u0, u1), (v0, v1))`.
    pub fn domain(&self) -> ((f64, f64), (f64, f64)) {
        match self {
            SurfacePatch::Ellipsoid { .. } => ((0.0, PI), (0.0, TAU)),
            _ => ((0.0, 1.0), (0.0, 1.0)),
        }
    }

    /// Grid cells per parameter direction at refinement `n`.
    fn grid(&self, n: usize) -> (usize, usize) {
        match self {
            SurfacePatch::Ellipsoid { .. } => (n, 2 * n),
            _ => (n, n),
        }
    }

    pub fn position(&self, u: f64, v: f64) -> Vector3<f64> {
        match self {
            SurfacePatch::Ellipsoid { center, basis, .. } => center + basis * sphere_point(u, v),
            SurfacePatch::Parallelogram {
                origin,
                edge_u,
                edge_v,
                ..
            } => origin + u * edge_u + v * edge_v,
            SurfacePatch::Triangle { apex, b, c, .. } => apex + u * (b - apex) + u * v * (c - b),
        }
    }

    /// Outward unit normal.
    pub fn normal(&self, u: f64, v: f64) -> Vector3<f64> {
        match self {
            SurfacePatch::Ellipsoid {
                inverse_transpose, ..
            } => (inverse_transpose * sphere_point(u, v)).normalize(),
            SurfacePatch::Parallelogram { normal, .. } | SurfacePatch::Triangle { normal, .. } => {
                *normal
            }
        }
    }

    /// Euclidean area element `|X_u × X_v|`.
    pub fn jacobian(&self, u: f64, v: f64) -> f64 {
        match self {
            SurfacePatch::Ellipsoid {
                inverse_transpose,
                det,
                ..
            } => det * u.sin() * (inverse_transpose * sphere_point(u, v)).norm(),
            SurfacePatch::Parallelogram { edge_u, edge_v, .. } => edge_u.cross(edge_v).norm(),
            SurfacePatch::Triangle { apex, b, c, .. } => u * (b - apex).cross(&(c - b)).norm(),
        }
    }

    fn p_area_density(&self, u: f64, v: f64) -> f64 {
        let x = self.position(u, v);
        horizontal_normal_norm(&x, &self.normal(u, v)) * self.jacobian(u, v)
    }

    fn midpoint_rule(&self, n: usize, f: impl Fn(f64, f64) -> f64 + Sync) -> f64 {
        let ((u0, u1), (v0, v1)) = self.domain();
        let (nu, nv) = self.grid(n);
        let du = (u1 - u0) / nu as f64;
        let dv = (v1 - v0) / nv as f64;
        let rows: Vec<f64> = (0..nu)
            .into_par_iter()
            .map(|i| {
                let u = u0 + (i as f64 + 0.5) * du;
                (0..nv)
                    .map(|j| f(u, v0 + (j as f64 + 0.5) * dv))
                    .sum::<f64>()
            })
            .collect();
        rows.iter().sum::<f64>() * du * dv
    }
}

fn sphere_point(psi: f64, phi: f64) -> Vector3<f64> {
    let (sp, cp) = psi.sin_cos();
    let (sf, cf) = phi.sin_cos();
    Vector3::new(sp * cf, sp * sf, cp)
}

/// `|N_H|` for a unit normal `n` at the point `x`: the Levi norm of the
/// contact-plane components `(⟨n, e̊₁⟩, ⟨n, e̊₂⟩)`.
pub fn horizontal_normal_norm(x: &Vector3<f64>, n: &Vector3<f64>) -> f64 {
    (n.x + x.y * n.z).hypot(n.y - x.x * n.z)
}

/// Same integrand evaluated as a frame decomposition at a point.
pub fn p_area_integrand(pt: Point, unit_normal: &Vector3<f64>) -> f64 {
    let [e1, e2, _] = pt.standard_frame();
    unit_normal.dot(&e1).hypot(unit_normal.dot(&e2))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasureMethod {
    Exact,
    Quadrature,
    VoxelOracle,
    TriangulationOracle,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeasureResult {
    pub value: f64,
    pub method: MeasureMethod,
    pub resolution: usize,
    pub error_estimate: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error(
        "quadrature did not converge: value {value}, error estimate {error_estimate} at resolution {resolution}"
    )]
    NonConvergence {
        value: f64,
        error_estimate: f64,
        resolution: usize,
    },
}

/// Refinement control for the nested midpoint quadrature.
#[derive(Clone, Copy, Debug)]
pub struct QuadratureOptions {
    /// Relative tolerance per patch.
    pub tol: f64,
    /// Coarsest grid.
    pub min_cells: usize,
    /// Number of doublings allowed after the coarsest grid.
    pub max_doublings: u32,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            min_cells: 8,
            max_doublings: 9,
        }
    }
}

/// Lebesgue volume. Every stock body has a closed form: spheres and their
/// affine images by `det`, polytopes by the divergence-theorem face sum.
pub fn volume(body: &dyn ConvexBody) -> MeasureResult {
    match body.volume_exact() {
        Some(value) => MeasureResult {
            value,
            method: MeasureMethod::Exact,
            resolution: 0,
            error_estimate: 0.0,
        },
        None => volume_voxel_oracle(body, 256),
    }
}

/// p-Area by nested midpoint refinement with a Richardson error estimate on
/// every boundary patch.
pub fn p_area(body: &dyn ConvexBody) -> Result<MeasureResult, MeasureError> {
    p_area_with(body, &QuadratureOptions::default())
}

pub fn p_area_with(
    body: &dyn ConvexBody,
    opts: &QuadratureOptions,
) -> Result<MeasureResult, MeasureError> {
    let mut value = 0.0;
    let mut error = 0.0;
    let mut resolution = 0;
    let mut failed = false;
    for patch in body.boundary_patches() {
        let r = integrate_patch(&patch, opts, |u, v| patch.p_area_density(u, v));
        value += r.value;
        error += r.error;
        resolution = resolution.max(r.cells);
        failed |= !r.converged;
    }
    if failed {
        return Err(MeasureError::NonConvergence {
            value,
            error_estimate: error,
            resolution,
        });
    }
    Ok(MeasureResult {
        value,
        method: MeasureMethod::Quadrature,
        resolution,
        error_estimate: error,
    })
}

/// Euclidean surface area of the boundary.
pub fn surface_area(body: &dyn ConvexBody) -> f64 {
    body.boundary_patches()
        .iter()
        .map(|p| p.midpoint_rule(64, |u, v| p.jacobian(u, v)))
        .sum()
}

struct PatchIntegral {
    value: f64,
    error: f64,
    cells: usize,
    converged: bool,
}

fn integrate_patch(
    patch: &SurfacePatch,
    opts: &QuadratureOptions,
    f: impl Fn(f64, f64) -> f64 + Sync,
) -> PatchIntegral {
    let mut n = opts.min_cells.max(1);
    let mut coarse = patch.midpoint_rule(n, &f);
    let mut prev_extrapolated: Option<f64> = None;
    let mut error = f64::INFINITY;
    for _ in 0..opts.max_doublings {
        n *= 2;
        let fine = patch.midpoint_rule(n, &f);
        let extrapolated = fine + (fine - coarse) / 3.0;
        if let Some(prev) = prev_extrapolated {
            error = (extrapolated - prev).abs();
            if error <= opts.tol * extrapolated.abs() || error <= 1e-15 {
                return PatchIntegral {
                    value: extrapolated,
                    error,
                    cells: n,
                    converged: true,
                };
            }
        }
        prev_extrapolated = Some(extrapolated);
        coarse = fine;
    }
    let value = prev_extrapolated.unwrap_or(coarse);
    // Last refinement difference; infinite if there was only one level.
    PatchIntegral {
        value,
        error,
        cells: n,
        converged: false,
    }
}

/// Counts voxel centers of an `resolution³` grid over the bounding box.
pub fn volume_voxel_oracle(body: &dyn ConvexBody, resolution: usize) -> MeasureResult {
    let n = resolution.max(8);
    let aabb = body.aabb();
    let pitch = aabb.extent() / n as f64;
    let count: u64 = (0..n)
        .into_par_iter()
        .map(|i| {
            let x = aabb.min.x + (i as f64 + 0.5) * pitch.x;
            let mut c = 0;
            for j in 0..n {
                let y = aabb.min.y + (j as f64 + 0.5) * pitch.y;
                for k in 0..n {
                    let t = aabb.min.z + (k as f64 + 0.5) * pitch.z;
                    c += u64::from(body.contains(Point::new(x, y, t)));
                }
            }
            c
        })
        .sum();
    MeasureResult {
        value: count as f64 * pitch.product(),
        method: MeasureMethod::VoxelOracle,
        resolution: n,
        error_estimate: 0.5 * surface_area(body) * pitch.max(),
    }
}

fn mesh_p_area(patch: &SurfacePatch, n: usize) -> f64 {
    let ((u0, u1), (v0, v1)) = patch.domain();
    let (nu, nv) = patch.grid(n);
    let du = (u1 - u0) / nu as f64;
    let dv = (v1 - v0) / nv as f64;
    let at = |i: usize, j: usize| patch.position(u0 + i as f64 * du, v0 + j as f64 * dv);
    let rows: Vec<f64> = (0..nu)
        .into_par_iter()
        .map(|i| {
            let mut acc = 0.0;
            for j in 0..nv {
                let (p00, p10, p11, p01) = (at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1));
                for tri in [[p00, p10, p11], [p00, p11, p01]] {
                    let cross = (tri[1] - tri[0]).cross(&(tri[2] - tri[0]));
                    let twice_area = cross.norm();
                    if twice_area <= 0.0 {
                        continue;
                    }
                    let centroid = (tri[0] + tri[1] + tri[2]) / 3.0;
                    // |N_H| is even in n, so the triangle winding does not matter.
                    acc +=
                        horizontal_normal_norm(&centroid, &(cross / twice_area)) * 0.5 * twice_area;
                }
            }
            acc
        })
        .collect();
    rows.iter().sum()
}

/// p-Area from a flat-triangle mesh of the boundary patches. The error
/// estimate compares against the half-resolution mesh.
pub fn p_area_triangulation_oracle(body: &dyn ConvexBody, resolution: usize) -> MeasureResult {
    let n = resolution.max(8);
    let patches = body.boundary_patches();
    let fine: f64 = patches.iter().map(|p| mesh_p_area(p, n)).sum();
    let coarse: f64 = patches.iter().map(|p| mesh_p_area(p, n / 2)).sum();
    MeasureResult {
        value: fine,
        method: MeasureMethod::TriangulationOracle,
        resolution: n,
        error_estimate: (fine - coarse).abs() / 3.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::{Ball, Cuboid, Halfspace, Polytope};

    // 2π ∫₋₁¹ √(1 − z⁴) dz, from 30-digit adaptive quadrature.
    const UNIT_BALL_P_AREA: f64 = 10.983_248_999_804_992;
    // 16 + 2 · (4/3)(√2 + ln(1 + √2)).
    const CUBE_2_P_AREA: f64 = 22.121_565_731_713_7;

    #[test]
    fn closed_form_volumes() {
        assert!((volume(&Ball::unit()).value - 4.0 / 3.0 * PI).abs() < 1e-14);
        let cube = Cuboid::new(Vector3::zeros(), Vector3::repeat(1.0)).unwrap();
        assert_eq!(volume(&cube).value, 1.0);
        assert_eq!(volume(&cube).method, MeasureMethod::Exact);
        let poly = cube.to_polytope().unwrap();
        assert!((volume(&poly).value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unit_ball_p_area() {
        let r = p_area(&Ball::unit()).unwrap();
        assert!(
            (r.value - UNIT_BALL_P_AREA).abs() < 1e-5 * UNIT_BALL_P_AREA,
            "{r:?}"
        );
        assert!(r.error_estimate >= 0.0);
    }

    #[test]
    fn centered_cube_p_area_faces() {
        let cube = Cuboid::new(Vector3::repeat(-1.0), Vector3::repeat(1.0)).unwrap();
        let r = p_area(&cube).unwrap();
        assert!(
            (r.value - CUBE_2_P_AREA).abs() < 1e-5 * CUBE_2_P_AREA,
            "{r:?}"
        );
        // The top face alone: ∫∫ √(x² + y²) over [−1, 1]², against a 1D
        // radial quadrature over one octant, 8 ∫₀^{π/4} sec³φ / 3 dφ.
        let top = &cube.boundary_patches()[4];
        let mesh = mesh_p_area(top, 512);
        let m = 200_000;
        let dphi = std::f64::consts::FRAC_PI_4 / m as f64;
        let radial: f64 = (0..m)
            .map(|i| {
                let phi = (i as f64 + 0.5) * dphi;
                8.0 / 3.0 / phi.cos().powi(3) * dphi
            })
            .sum();
        assert!((mesh - radial).abs() < 1e-4 * radial, "{mesh} vs {radial}");
    }

    #[test]
    fn vertical_translation_keeps_p_area() {
        let a = p_area(&Ball::unit()).unwrap().value;
        let b = p_area(&Ball::new(Point::new(0.0, 0.0, 1e6), 1.0).unwrap())
            .unwrap()
            .value;
        assert!((a - b).abs() < 1e-6 * a);
    }

    #[test]
    fn triangulation_oracle_agrees() {
        let o = p_area_triangulation_oracle(&Ball::unit(), 256);
        assert!(
            (o.value - UNIT_BALL_P_AREA).abs() < 5e-3 * UNIT_BALL_P_AREA,
            "{o:?}"
        );
        assert_eq!(o.method, MeasureMethod::TriangulationOracle);
    }

    #[test]
    fn voxel_oracle_converges() {
        let ball = Ball::unit();
        let v = volume_voxel_oracle(&ball, 200);
        assert!((v.value - 4.0 / 3.0 * PI).abs() < 0.01 * 4.0 / 3.0 * PI);
        let cube = Cuboid::new(Vector3::zeros(), Vector3::repeat(1.0)).unwrap();
        assert!((volume_voxel_oracle(&cube, 16).value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn integrand_forms_agree() {
        let x = Vector3::new(0.3, -1.2, 0.5);
        let n = Vector3::new(0.2, 0.1, -0.9).normalize();
        let a = horizontal_normal_norm(&x, &n);
        let b = p_area_integrand(Point::from_vector(&x), &n);
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn nonconvergence_is_reported() {
        let hs = vec![
            Halfspace::new(Vector3::new(1.0, 1.0, 1.0), 1.0).unwrap(),
            Halfspace::new(Vector3::new(-1.0, 0.0, 0.0), 0.0).unwrap(),
            Halfspace::new(Vector3::new(0.0, -1.0, 0.0), 0.0).unwrap(),
            Halfspace::new(Vector3::new(0.0, 0.0, -1.0), 0.0).unwrap(),
        ];
        let simplex = Polytope::from_halfspaces(hs).unwrap();
        let opts = QuadratureOptions {
            tol: 1e-15,
            min_cells: 2,
            max_doublings: 3,
        };
        assert!(matches!(
            p_area_with(&simplex, &opts),
            Err(MeasureError::NonConvergence { .. })
        ));
        assert!(p_area(&simplex).is_ok());
    }
}
