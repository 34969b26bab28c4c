//! Text formats: body specifications, experiment files, motions and length
//! lists.
//!
//! Bodies and experiments are TOML. A body document has a `kind` and the
//! fields of that kind:
//!
//! ```toml
//! kind = "ball"            # center = [x, y, t], radius
//! center = [0.0, 0.0, 0.0]
//! radius = 1.0
//! ```
//!
//! ```toml
//! kind = "polytope"        # one row per half-space  n·x ≤ offset
//! halfspaces = [
//!   { normal = [1, 0, 0], offset = 1 },
//!   { normal = [-1, 0, 0], offset = 1 },
//!   # ...
//! ]
//! ```
//!
//! `ellipsoid` takes `center` and `semi_axes`, `box` takes `min` and `max`.
//! Unknown fields are rejected.

use std::fmt;
use std::str::FromStr;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bodies::{Ball, Body, BodyError, Cuboid, Ellipsoid, Halfspace, Polytope};
use crate::geometry::{Point, PshMotion};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("parse error: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("invalid body: {0}")]
    Body(#[from] BodyError),
    #[error("invalid {field}: {reason}")]
    Invalid { field: &'static str, reason: String },
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field,
        reason: reason.into(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HalfspaceSpec {
    pub normal: [f64; 3],
    pub offset: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum BodySpec {
    Ball {
        center: [f64; 3],
        radius: f64,
    },
    Ellipsoid {
        center: [f64; 3],
        semi_axes: [f64; 3],
    },
    Box {
        min: [f64; 3],
        max: [f64; 3],
    },
    Polytope {
        halfspaces: Vec<HalfspaceSpec>,
    },
}

/// Vertex enumeration is quartic in the number of half-spaces.
pub const MAX_HALFSPACES: usize = 256;

impl BodySpec {
    pub fn unit_ball() -> Self {
        BodySpec::Ball {
            center: [0.0; 3],
            radius: 1.0,
        }
    }

    pub fn unit_cube() -> Self {
        BodySpec::Box {
            min: [0.0; 3],
            max: [1.0; 3],
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            BodySpec::Ball { .. } => "ball",
            BodySpec::Ellipsoid { .. } => "ellipsoid",
            BodySpec::Box { .. } => "box",
            BodySpec::Polytope { .. } => "polytope",
        }
    }

    pub fn build(&self) -> Result<Body, BodyError> {
        let v = |a: &[f64; 3]| Vector3::from(*a);
        Ok(match self {
            BodySpec::Ball { center, radius } => {
                Ball::new(Point::from_vector(&v(center)), *radius)?.into()
            }
            BodySpec::Ellipsoid { center, semi_axes } => {
                Ellipsoid::new(Point::from_vector(&v(center)), v(semi_axes))?.into()
            }
            BodySpec::Box { min, max } => Cuboid::new(v(min), v(max))?.into(),
            BodySpec::Polytope { halfspaces } => {
                if halfspaces.len() > MAX_HALFSPACES {
                    return Err(BodyError::InvalidParameter(format!(
                        "at most {MAX_HALFSPACES} half-spaces, got {}",
                        halfspaces.len()
                    )));
                }
                let hs = halfspaces
                    .iter()
                    .map(|h| Halfspace::new(v(&h.normal), h.offset))
                    .collect::<Result<Vec<_>, _>>()?;
                Polytope::from_halfspaces(hs)?.into()
            }
        })
    }
}

impl FromStr for BodySpec {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(toml::from_str(s)?)
    }
}

/// Parses and builds a body in one step.
pub fn parse_body(text: &str) -> Result<Body, ConfigError> {
    Ok(text.parse::<BodySpec>()?.build()?)
}

/// Parses `"a,b,c,alpha"` into a motion `L_(a,b,c) ∘ R_alpha`.
pub fn parse_motion(text: &str) -> Result<PshMotion, ConfigError> {
    let v = parse_reals(text, "motion")?;
    let [a, b, c, alpha]: [f64; 4] = v
        .try_into()
        .map_err(|v: Vec<f64>| invalid("motion", format!("expected 4 numbers, got {}", v.len())))?;
    Ok(PshMotion::new(a, b, c, alpha))
}

/// Parses a comma-separated list of nonnegative segment lengths.
pub fn parse_ell_list(text: &str) -> Result<Vec<f64>, ConfigError> {
    let v = parse_reals(text, "ell list")?;
    if v.is_empty() {
        return Err(invalid("ell list", "empty"));
    }
    if let Some(bad) = v.iter().find(|x| **x < 0.0) {
        return Err(invalid("ell list", format!("negative length {bad}")));
    }
    Ok(v)
}

fn parse_reals(text: &str, field: &'static str) -> Result<Vec<f64>, ConfigError> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|s| {
            let x: f64 = s
                .trim()
                .parse()
                .map_err(|_| invalid(field, format!("not a number: {s:?}")))?;
            if x.is_finite() {
                Ok(x)
            } else {
                Err(invalid(field, format!("not finite: {s:?}")))
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Json => "json",
            OutputFormat::Csv => "csv",
        })
    }
}

impl FromStr for OutputFormat {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            _ => Err(invalid(
                "format",
                format!("expected json or csv, got {s:?}"),
            )),
        }
    }
}

/// Experiment file. Every field is optional; command-line flags take
/// precedence over values read here.
///
/// ```toml
/// n_samples = 1000000
/// seed = 42
/// ell = 0.5
/// format = "csv"
///
/// [body]
/// kind = "box"
/// min = [0, 0, 0]
/// max = [1, 1, 1]
/// ```
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub body: Option<BodySpec>,
    pub inner: Option<BodySpec>,
    pub outer: Option<BodySpec>,
    pub n_samples: Option<u64>,
    pub seed: Option<u64>,
    pub ell: Option<f64>,
    pub ell_list: Option<Vec<f64>>,
    /// `[a, b, c, alpha]`.
    pub motion: Option<[f64; 4]>,
    pub resolution: Option<usize>,
    pub tolerance: Option<f64>,
    /// Number of θ-strata; `true` picks a default count, `false` disables.
    pub stratify: Option<Stratify>,
    pub threads: Option<usize>,
    pub format: Option<OutputFormat>,
    pub out: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Stratify {
    Flag(bool),
    Strata(u32),
}

/// Strata used when stratification is switched on without a count.
pub const DEFAULT_STRATA: u32 = 64;

impl Stratify {
    pub fn strata(self) -> u32 {
        match self {
            Stratify::Flag(true) => DEFAULT_STRATA,
            Stratify::Flag(false) => 1,
            Stratify::Strata(k) => k.max(1),
        }
    }
}

impl ExperimentConfig {
    /// Parses and validates. Bodies are built once so that invalid geometry is
    /// reported here rather than mid-run.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for spec in [&self.body, &self.inner, &self.outer].into_iter().flatten() {
            spec.build()?;
        }
        if self.n_samples == Some(0) {
            return Err(invalid("n_samples", "must be at least 1"));
        }
        if let Some(ell) = self.ell {
            if !(ell.is_finite() && ell >= 0.0) {
                return Err(invalid(
                    "ell",
                    format!("must be finite and nonnegative, got {ell}"),
                ));
            }
        }
        if let Some(list) = &self.ell_list {
            if list.is_empty() || list.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                return Err(invalid("ell_list", "needs finite nonnegative lengths"));
            }
        }
        if let Some(m) = self.motion {
            if !m.iter().all(|x| x.is_finite()) {
                return Err(invalid("motion", "non-finite component"));
            }
        }
        if self.resolution == Some(0) {
            return Err(invalid("resolution", "must be at least 1"));
        }
        if let Some(tol) = self.tolerance {
            if !(tol.is_finite() && tol > 0.0) {
                return Err(invalid("tolerance", format!("must be positive, got {tol}")));
            }
        }
        if self.threads == Some(0) {
            return Err(invalid("threads", "must be at least 1"));
        }
        Ok(())
    }

    pub fn motion(&self) -> Option<PshMotion> {
        self.motion
            .map(|[a, b, c, alpha]| PshMotion::new(a, b, c, alpha))
    }
}
