//! Invariant-measure integrals over horizontal lines and kinematic frames.
//!
//! Lines are sampled uniformly in a window of the `(p, θ, t)` chart, which is
//! the density `dG = dp∧dθ∧dt` restricted to a superset of the lines meeting
//! the body. For kinematic quantities the offset `h` along the line is
//! integrated analytically: the `h`-measure of segments `[h, h+ℓ]` meeting a
//! chord of length `σ` is `σ + ℓ`, and of those inside it `(σ − ℓ)₊`.
//! [`Estimator::segment_hit_measure_frames`] instead samples `da∧db∧dc∧dφ`
//! directly.

use std::f64::consts::{PI, TAU};

use serde::Serialize;
use thiserror::Error;

use crate::bodies::{transform_body, Body, BodyError, ChordInterval, ConvexBody};
use crate::geometry::{line_from_frame, FramePose, HorizontalLine, Point, PshMotion};
use crate::measures::{self, MeasureError, QuadratureOptions};
use crate::sampling::{accumulate, MeanEstimate, SamplePlan};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_SAMPLES: u64 = 1_000_000;

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// Paired estimates pass the invariance check below this |z|.
pub const INVARIANCE_Z_LIMIT: f64 = 4.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimatorError {
    #[error("sampling window has zero or non-finite measure")]
    ZeroWindow,
    #[error("segment length must be finite and nonnegative, got {0}")]
    NegativeLength(f64),
    #[error("sample count must be at least 1")]
    NoSamples,
    #[error("inner body is not contained in the outer body (boundary point {0:?} lies outside)")]
    NotContained(Point),
    #[error(transparent)]
    Body(#[from] BodyError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// Rectangle `[−p_max, p_max] × [0, 2π) × [t_lo, t_hi]` of line parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LineWindow {
    pub p_max: f64,
    pub t_lo: f64,
    pub t_hi: f64,
}

impl LineWindow {
    /// Window measure `W = 2π · 2p_max · (t_hi − t_lo)`.
    pub fn measure(&self) -> f64 {
        TAU * 2.0 * self.p_max * (self.t_hi - self.t_lo)
    }

    pub fn contains(&self, line: &HorizontalLine) -> bool {
        line.p.abs() <= self.p_max && (self.t_lo..=self.t_hi).contains(&line.t)
    }

    /// Maps three uniforms to a line, uniformly in the window.
    pub fn line_at(&self, u: [f64; 4]) -> HorizontalLine {
        HorizontalLine::new(
            self.p_max * (2.0 * u[1] - 1.0),
            TAU * u[0],
            self.t_lo + (self.t_hi - self.t_lo) * u[2],
        )
    }
}

/// The smallest window of the stock shape guaranteed to hold every line
/// meeting `body`.
///
/// A line meets the body only if its footpoint distance is at most `r_xy`.
/// On the chord `s² + p² ≤ r_xy²`, so the height `t + sp` differs from `t`
/// by at most `r_xy²`.
pub fn line_window(body: &dyn ConvexBody) -> Result<LineWindow, EstimatorError> {
    let b = body.bounds();
    let r = b.r_xy * (1.0 + 1e-9) + 1e-12 * body.scale();
    let (lo, hi) = (b.z_min - r * r, b.z_max + r * r);
    let margin = 1e-9 * (hi - lo);
    let w = LineWindow {
        p_max: r,
        t_lo: lo - margin,
        t_hi: hi + margin,
    };
    let m = w.measure();
    if m.is_finite() && m > 0.0 {
        Ok(w)
    } else {
        Err(EstimatorError::ZeroWindow)
    }
}

/// A closed-form value together with the routine that produced it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Reference {
    pub value: f64,
    pub source: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimateResult {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub ci95: (f64, f64),
    pub reference: Option<Reference>,
    pub seed: u64,
}

impl EstimateResult {
    fn from_moments(value: f64, var: f64, n: u64, seed: u64) -> Self {
        let se = var.max(0.0).sqrt();
        Self {
            value,
            std_error: se,
            n_samples: n,
            ci95: (value - Z95 * se, value + Z95 * se),
            reference: None,
            seed,
        }
    }

    fn with_reference(mut self, reference: Option<Reference>) -> Self {
        self.reference = reference;
        self
    }

    /// `(value − reference) / std_error`, if a reference is attached.
    pub fn z_score(&self) -> Option<f64> {
        let r = self.reference.as_ref()?;
        Some(z_of(self.value - r.value, self.std_error))
    }

    pub fn relative_error(&self) -> Option<f64> {
        let r = self.reference.as_ref()?;
        Some((self.value - r.value) / r.value.abs())
    }
}

fn z_of(diff: f64, se: f64) -> f64 {
    if se > 0.0 {
        diff / se
    } else if diff == 0.0 {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    }
}

/// Segment-hit estimates at several lengths from one shared sample stream.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResult {
    pub ells: Vec<f64>,
    pub rows: Vec<EstimateResult>,
    /// Estimated `d m / dℓ`; reference `2·p-Area`.
    pub slope: EstimateResult,
    /// Estimated value at `ℓ = 0`; reference `2πV`.
    pub intercept: EstimateResult,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContainmentMeasure {
    /// `∫ (σ − ℓ)₊ dG`, the measure of segments inside the body.
    pub clamped: EstimateResult,
    /// `∫_{G∩D≠∅} (σ − ℓ) dG`, which equals `2πV − 2ℓ·p-Area` for any ℓ.
    pub unclamped: EstimateResult,
    /// Some sampled chord was shorter than `ℓ`.
    pub clamping_active: bool,
    /// The linear closed form attached to `clamped` holds only without clamping.
    pub closed_form_applies: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairedComparison {
    pub original: EstimateResult,
    pub transformed: EstimateResult,
    pub z: f64,
}

impl PairedComparison {
    fn new(original: EstimateResult, transformed: EstimateResult) -> Self {
        let se = original.std_error.hypot(transformed.std_error);
        let z = z_of(transformed.value - original.value, se);
        Self {
            original,
            transformed,
            z,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvarianceReport {
    pub motion: PshMotion,
    pub line_measure: PairedComparison,
    pub chord_integral: PairedComparison,
    pub passed: bool,
}

/// Monte Carlo (or tensor-grid) integrator configuration.
#[derive(Clone, Debug)]
pub struct Estimator {
    pub n: u64,
    pub seed: u64,
    /// Equal θ-strata; 1 disables stratification.
    pub strata: u32,
    pub threads: Option<usize>,
    /// Replace random sampling by a `(θ, p, t)` midpoint grid.
    pub grid: Option<[usize; 3]>,
    /// Attach closed-form references from [`crate::measures`].
    pub references: bool,
    pub quadrature: QuadratureOptions,
}

impl Default for Estimator {
    fn default() -> Self {
        Self {
            n: DEFAULT_SAMPLES,
            seed: DEFAULT_SEED,
            strata: 1,
            threads: None,
            grid: None,
            references: true,
            quadrature: QuadratureOptions::default(),
        }
    }
}

impl Estimator {
    pub fn new(n: u64, seed: u64) -> Self {
        Self {
            n,
            seed,
            ..Self::default()
        }
    }

    pub fn grid(dims: [usize; 3]) -> Self {
        Self {
            grid: Some(dims),
            ..Self::default()
        }
    }

    pub fn without_references(mut self) -> Self {
        self.references = false;
        self
    }

    fn plan(&self) -> Result<SamplePlan, EstimatorError> {
        let mut plan = match self.grid {
            Some(dims) => SamplePlan::grid(dims),
            None => SamplePlan::random(self.n, self.seed),
        };
        if plan.n == 0 {
            return Err(EstimatorError::NoSamples);
        }
        if self.grid.is_none() {
            plan.strata = self.strata.max(1);
        }
        plan.threads = self.threads;
        Ok(plan)
    }

    fn over_lines<const K: usize>(
        &self,
        window: &LineWindow,
        f: impl Fn(&HorizontalLine) -> [f64; K] + Sync,
    ) -> Result<MeanEstimate<K>, EstimatorError> {
        let plan = self.plan()?;
        Ok(accumulate(&plan, |u| f(&window.line_at(u))))
    }

    fn result<const K: usize>(
        &self,
        est: &MeanEstimate<K>,
        value: f64,
        var: f64,
    ) -> EstimateResult {
        EstimateResult::from_moments(value, var, est.n, self.seed)
    }

    fn volume_ref(&self, body: &dyn ConvexBody) -> f64 {
        measures::volume(body).value
    }

    fn p_area_ref(&self, body: &dyn ConvexBody) -> Result<f64, EstimatorError> {
        Ok(measures::p_area_with(body, &self.quadrature)?.value)
    }

    fn reference(
        &self,
        compute: impl FnOnce() -> Result<f64, EstimatorError>,
        source: &str,
    ) -> Result<Option<Reference>, EstimatorError> {
        if !self.references {
            return Ok(None);
        }
        Ok(Some(Reference {
            value: compute()?,
            source: source.to_string(),
        }))
    }

    /// `∫_{G∩D≠∅} dG`; reference `2·p-Area(∂D)`.
    pub fn line_measure(&self, body: &dyn ConvexBody) -> Result<EstimateResult, EstimatorError> {
        self.line_measure_in(body, &line_window(body)?)
    }

    /// Line measure with an explicit sampling window. Lines outside the window
    /// are not counted, so a window that misses part of the body underestimates.
    pub fn line_measure_in(
        &self,
        body: &dyn ConvexBody,
        window: &LineWindow,
    ) -> Result<EstimateResult, EstimatorError> {
        let w = window.measure();
        let est = self.over_lines(window, |g| [hit(&body.chord(g))])?;
        let (v, var) = est.linear([w]);
        let reference = self.reference(
            || Ok(2.0 * self.p_area_ref(body)?),
            "2 * measures::p_area (quadrature)",
        )?;
        Ok(self.result(&est, v, var).with_reference(reference))
    }

    /// `∫_{G∩D≠∅} σ dG`; reference `2π·V(D)`.
    pub fn chord_integral(&self, body: &dyn ConvexBody) -> Result<EstimateResult, EstimatorError> {
        let window = line_window(body)?;
        let w = window.measure();
        let est = self.over_lines(&window, |g| [body.chord(g).sigma()])?;
        let (v, var) = est.linear([w]);
        let reference = self.reference(
            || Ok(TAU * self.volume_ref(body)),
            "2*pi * measures::volume",
        )?;
        Ok(self.result(&est, v, var).with_reference(reference))
    }

    /// Mean chord length over lines meeting the body; reference
    /// `2πV / (2·p-Area)`.
    pub fn mean_chord(&self, body: &dyn ConvexBody) -> Result<EstimateResult, EstimatorError> {
        let window = line_window(body)?;
        let est = self.over_lines(&window, |g| {
            let c = body.chord(g);
            [c.sigma(), hit(&c)]
        })?;
        let (v, var) = est.ratio(0, 1);
        let reference = self.reference(
            || Ok(TAU * self.volume_ref(body) / (2.0 * self.p_area_ref(body)?)),
            "2*pi * measures::volume / (2 * measures::p_area)",
        )?;
        Ok(self.result(&est, v, var).with_reference(reference))
    }

    /// Kinematic measure of horizontal segments of length `ℓ` meeting the
    /// body; reference `2πV + 2ℓ·p-Area`.
    pub fn segment_hit_measure(
        &self,
        body: &dyn ConvexBody,
        ell: f64,
    ) -> Result<EstimateResult, EstimatorError> {
        check_length(ell)?;
        let window = line_window(body)?;
        let w = window.measure();
        let est = self.over_lines(&window, |g| [body.chord(g).hit_length(ell)])?;
        let (v, var) = est.linear([w]);
        let reference = self.reference(
            || Ok(TAU * self.volume_ref(body) + 2.0 * ell * self.p_area_ref(body)?),
            "2*pi * measures::volume + 2*ell * measures::p_area",
        )?;
        Ok(self.result(&est, v, var).with_reference(reference))
    }

    /// Segment-hit measure sampled in frame coordinates `(a, b, c, φ)` with
    /// density `da∧db∧dc∧dφ`, without integrating `h` analytically. Each
    /// frame carries the segment `[h, h+ℓ]` of its line `(G, h)`.
    pub fn segment_hit_measure_frames(
        &self,
        body: &dyn ConvexBody,
        ell: f64,
    ) -> Result<EstimateResult, EstimatorError> {
        check_length(ell)?;
        let b = body.bounds();
        // A hitting segment starts within ℓ of the body's projection, and its
        // height changes by at most ℓ·|p| ≤ ℓ·R along the way.
        let r = (b.r_xy + ell) * (1.0 + 1e-9) + 1e-12 * body.scale();
        let (c_lo, c_hi) = (b.z_min - ell * r, b.z_max + ell * r);
        let margin = 1e-9 * (c_hi - c_lo).max(body.scale());
        let (c_lo, c_hi) = (c_lo - margin, c_hi + margin);
        let w = (2.0 * r).powi(2) * (c_hi - c_lo) * TAU;
        if !(w.is_finite() && w > 0.0) {
            return Err(EstimatorError::ZeroWindow);
        }
        let plan = self.plan()?;
        let est = accumulate(&plan, |u| {
            let frame = FramePose::new(
                Point::new(
                    r * (2.0 * u[1] - 1.0),
                    r * (2.0 * u[2] - 1.0),
                    c_lo + (c_hi - c_lo) * u[3],
                ),
                TAU * u[0],
            );
            let (g, h) = line_from_frame(&frame);
            [f64::from(u8::from(body.chord(&g).meets(h, ell)))]
        });
        let (v, var) = est.linear([w]);
        let reference = self.reference(
            || Ok(TAU * self.volume_ref(body) + 2.0 * ell * self.p_area_ref(body)?),
            "2*pi * measures::volume + 2*ell * measures::p_area",
        )?;
        Ok(self.result(&est, v, var).with_reference(reference))
    }

    /// Segment-hit measures for every `ℓ` in `ells` from a single pass.
    pub fn segment_hit_sweep(
        &self,
        body: &dyn ConvexBody,
        ells: &[f64],
    ) -> Result<SweepResult, EstimatorError> {
        for &ell in ells {
            check_length(ell)?;
        }
        let window = line_window(body)?;
        let w = window.measure();
        let est = self.over_lines(&window, |g| {
            let c = body.chord(g);
            [c.sigma(), hit(&c)]
        })?;
        let (volume, p_area) = if self.references {
            (Some(self.volume_ref(body)), Some(self.p_area_ref(body)?))
        } else {
            (None, None)
        };
        let rows = ells
            .iter()
            .map(|&ell| {
                let (v, var) = est.linear([w, w * ell]);
                let reference = volume.zip(p_area).map(|(vol, pa)| Reference {
                    value: TAU * vol + 2.0 * ell * pa,
                    source: "2*pi * measures::volume + 2*ell * measures::p_area".into(),
                });
                self.result(&est, v, var).with_reference(reference)
            })
            .collect();
        let (s, s_var) = est.linear([0.0, w]);
        let (i, i_var) = est.linear([w, 0.0]);
        Ok(SweepResult {
            ells: ells.to_vec(),
            rows,
            slope: self
                .result(&est, s, s_var)
                .with_reference(p_area.map(|pa| Reference {
                    value: 2.0 * pa,
                    source: "2 * measures::p_area (quadrature)".into(),
                })),
            intercept: self
                .result(&est, i, i_var)
                .with_reference(volume.map(|vol| Reference {
                    value: TAU * vol,
                    source: "2*pi * measures::volume".into(),
                })),
        })
    }

    /// Kinematic measure of segments of length `ℓ` contained in the body.
    pub fn segment_containment_measure(
        &self,
        body: &dyn ConvexBody,
        ell: f64,
    ) -> Result<ContainmentMeasure, EstimatorError> {
        check_length(ell)?;
        let window = line_window(body)?;
        let w = window.measure();
        let est = self.over_lines(&window, |g| {
            let c = body.chord(g);
            let short = !c.is_empty() && c.sigma() < ell;
            [
                c.fit_length(ell),
                hit(&c) * (c.sigma() - ell),
                f64::from(u8::from(short)),
            ]
        })?;
        let (cv, c_var) = est.linear([w, 0.0, 0.0]);
        let (uv, u_var) = est.linear([0.0, w, 0.0]);
        let clamping_active = est.mean[2] > 0.0;
        let reference = self.reference(
            || Ok(TAU * self.volume_ref(body) - 2.0 * ell * self.p_area_ref(body)?),
            "2*pi * measures::volume - 2*ell * measures::p_area",
        )?;
        Ok(ContainmentMeasure {
            clamped: self
                .result(&est, cv, c_var)
                .with_reference(reference.clone()),
            unclamped: self.result(&est, uv, u_var).with_reference(reference),
            clamping_active,
            closed_form_applies: !clamping_active,
        })
    }

    /// Probability that a random segment of length `ℓ` meeting `outer` also
    /// meets `inner`, from common random numbers over `outer`'s window.
    pub fn containment_probability(
        &self,
        inner: &dyn ConvexBody,
        outer: &dyn ConvexBody,
        ell: f64,
    ) -> Result<EstimateResult, EstimatorError> {
        check_length(ell)?;
        check_contained(inner, outer, self.seed)?;
        let window = line_window(outer)?;
        let est = self.over_lines(&window, |g| {
            [
                inner.chord(g).hit_length(ell),
                outer.chord(g).hit_length(ell),
            ]
        })?;
        let (v, var) = est.ratio(0, 1);
        let reference = self.reference(
            || {
                let num = TAU * self.volume_ref(inner) + 2.0 * ell * self.p_area_ref(inner)?;
                let den = TAU * self.volume_ref(outer) + 2.0 * ell * self.p_area_ref(outer)?;
                Ok(num / den)
            },
            "ratio of (2*pi * measures::volume + 2*ell * measures::p_area) for inner and outer",
        )?;
        Ok(self.result(&est, v, var).with_reference(reference))
    }

    /// Compares line measure and chord integral of `body` and of its image
    /// under `motion`, both with this estimator's seed.
    pub fn invariance_check(
        &self,
        body: &Body,
        motion: &PshMotion,
    ) -> Result<InvarianceReport, EstimatorError> {
        let moved = transform_body(motion, body)?;
        let plain = Estimator {
            references: false,
            ..self.clone()
        };
        let line_measure =
            PairedComparison::new(plain.line_measure(body)?, plain.line_measure(&moved)?);
        let chord_integral =
            PairedComparison::new(plain.chord_integral(body)?, plain.chord_integral(&moved)?);
        let passed = line_measure.z.abs() < INVARIANCE_Z_LIMIT
            && chord_integral.z.abs() < INVARIANCE_Z_LIMIT;
        Ok(InvarianceReport {
            motion: *motion,
            line_measure,
            chord_integral,
            passed,
        })
    }
}

#[inline]
fn hit(c: &ChordInterval) -> f64 {
    if c.is_empty() {
        0.0
    } else {
        1.0
    }
}

fn check_length(ell: f64) -> Result<(), EstimatorError> {
    if ell.is_finite() && ell >= 0.0 {
        Ok(())
    } else {
        Err(EstimatorError::NegativeLength(ell))
    }
}

/// Checks `inner ⊆ outer` on 10³ boundary points of `inner`, each pulled
/// slightly toward an interior point so shared boundaries pass.
pub fn check_contained(
    inner: &dyn ConvexBody,
    outer: &dyn ConvexBody,
    seed: u64,
) -> Result<(), EstimatorError> {
    const POINTS: u64 = 1000;
    let patches = inner.boundary_patches();
    if patches.is_empty() {
        return Ok(());
    }
    let points: Vec<_> = (0..POINTS)
        .map(|i| {
            let u = crate::sampling::sample_uniforms(seed ^ 0x9e37_79b9_7f4a_7c15, i);
            let patch = &patches[(u[0] * patches.len() as f64) as usize % patches.len()];
            let ((u0, u1), (v0, v1)) = patch.domain();
            patch.position(u0 + (u1 - u0) * u[1], v0 + (v1 - v0) * u[2])
        })
        .collect();
    let interior = points.iter().sum::<nalgebra::Vector3<f64>>() / points.len() as f64;
    for x in points {
        let pulled = x + 1e-9 * (interior - x);
        let pt = Point::from_vector(&pulled);
        if !outer.contains(pt) {
            return Err(EstimatorError::NotContained(Point::from_vector(&x)));
        }
    }
    Ok(())
}

/// Least-squares line `y ≈ slope·x + intercept`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

pub fn estimate_line_measure(
    body: &dyn ConvexBody,
    n: u64,
    seed: u64,
) -> Result<EstimateResult, EstimatorError> {
    Estimator::new(n, seed).line_measure(body)
}

pub fn estimate_chord_integral(
    body: &dyn ConvexBody,
    n: u64,
    seed: u64,
) -> Result<EstimateResult, EstimatorError> {
    Estimator::new(n, seed).chord_integral(body)
}

pub fn estimate_segment_hit_measure(
    body: &dyn ConvexBody,
    ell: f64,
    n: u64,
    seed: u64,
) -> Result<EstimateResult, EstimatorError> {
    Estimator::new(n, seed).segment_hit_measure(body, ell)
}

pub fn estimate_segment_containment_measure(
    body: &dyn ConvexBody,
    ell: f64,
    n: u64,
    seed: u64,
) -> Result<ContainmentMeasure, EstimatorError> {
    Estimator::new(n, seed).segment_containment_measure(body, ell)
}

pub fn containment_probability(
    inner: &dyn ConvexBody,
    outer: &dyn ConvexBody,
    ell: f64,
    n: u64,
    seed: u64,
) -> Result<EstimateResult, EstimatorError> {
    Estimator::new(n, seed).containment_probability(inner, outer, ell)
}

pub fn invariance_check(
    body: &Body,
    motion: &PshMotion,
    n: u64,
    seed: u64,
) -> Result<InvarianceReport, EstimatorError> {
    Estimator::new(n, seed).invariance_check(body, motion)
}

/// Closed-form unit-ball values, for documentation and quick checks:
/// `(2πV, 2·p-Area)` with `p-Area = 2π ∫₋₁¹ √(1 − z⁴) dz`.
pub fn unit_ball_identities() -> (f64, f64) {
    (8.0 * PI * PI / 3.0, 2.0 * 10.983_248_999_804_992)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::{Ball, Cuboid};
    use nalgebra::Vector3;

    #[test]
    fn unit_ball_window() {
        let w = line_window(&Ball::unit()).unwrap();
        assert!((w.p_max - 1.0).abs() < 1e-8);
        assert!((w.t_lo + 2.0).abs() < 1e-7 && (w.t_hi - 2.0).abs() < 1e-7);
    }

    #[test]
    fn unit_cube_window() {
        let cube = Cuboid::new(Vector3::zeros(), Vector3::repeat(1.0)).unwrap();
        let w = line_window(&cube).unwrap();
        assert!((w.p_max - 2f64.sqrt()).abs() < 1e-8);
        assert!((w.t_lo + 2.0).abs() < 1e-7 && (w.t_hi - 3.0).abs() < 1e-7);
    }

    #[test]
    fn argument_errors() {
        let ball = Ball::unit();
        let e = Estimator::new(10, 1);
        assert!(matches!(
            e.segment_hit_measure(&ball, -1.0),
            Err(EstimatorError::NegativeLength(_))
        ));
        assert!(matches!(
            Estimator::new(0, 1).line_measure(&ball),
            Err(EstimatorError::NoSamples)
        ));
        let small = Ball::new(Point::ORIGIN, 0.5).unwrap();
        assert!(matches!(
            e.containment_probability(&ball, &small, 0.0),
            Err(EstimatorError::NotContained(_))
        ));
    }

    #[test]
    fn window_missing_the_body_counts_nothing() {
        let ball = Ball::new(Point::new(0.0, 0.0, 100.0), 1.0).unwrap();
        let window = line_window(&Ball::unit()).unwrap();
        let r = Estimator::new(20_000, 3)
            .without_references()
            .line_measure_in(&ball, &window)
            .unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.std_error, 0.0);
    }

    #[test]
    fn zero_length_segments_reduce_to_chords() {
        let ball = Ball::unit();
        let e = Estimator::new(50_000, 11).without_references();
        let a = e.segment_hit_measure(&ball, 0.0).unwrap();
        let b = e.chord_integral(&ball).unwrap();
        assert!((a.value - b.value).abs() < 1e-12 * b.value);
        let c = e.segment_containment_measure(&ball, 0.0).unwrap();
        assert!((c.clamped.value - b.value).abs() < 1e-12 * b.value);
        assert!(!c.clamping_active);
    }

    #[test]
    fn identical_bodies_give_probability_one() {
        let ball = Ball::unit();
        let p = Estimator::new(20_000, 5)
            .containment_probability(&ball, &ball, 0.5)
            .unwrap();
        assert!((p.value - 1.0).abs() < 1e-15);
        assert!((p.reference.unwrap().value - 1.0).abs() < 1e-15);
    }

    #[test]
    fn identity_motion_is_invariant() {
        // The image is a general quadric whose window margin differs by ~1e-12.
        let body = Body::from(Ball::unit());
        let r = Estimator::new(20_000, 9)
            .invariance_check(&body, &PshMotion::IDENTITY)
            .unwrap();
        for pair in [&r.line_measure, &r.chord_integral] {
            assert!(
                (pair.original.value - pair.transformed.value).abs() < 1e-9 * pair.original.value
            );
            assert!(pair.z.abs() < 1e-6);
        }
        assert!(r.passed);
    }

    #[test]
    fn clamping_is_flagged() {
        let ball = Ball::unit();
        let (two_pi_v, two_pa) = unit_ball_identities();
        let e = Estimator::new(200_000, 4);
        let long = e.segment_containment_measure(&ball, 1.0).unwrap();
        assert!(long.clamping_active && !long.closed_form_applies);
        assert!(long.clamped.value > two_pi_v - two_pa);
        assert!(long.clamped.value > long.unclamped.value);

        let short = e.segment_containment_measure(&ball, 0.01).unwrap();
        let rel = (short.clamped.value - short.unclamped.value) / short.unclamped.value;
        assert!(rel.abs() < 0.002);
        let target = two_pi_v - 0.01 * two_pa;
        assert!((short.unclamped.value - target).abs() < 4.0 * short.unclamped.std_error);
    }

    #[test]
    fn fit_line_exact() {
        let (s, i) = fit_line(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]);
        assert!((s - 2.0).abs() < 1e-15 && (i - 1.0).abs() < 1e-15);
    }
}
