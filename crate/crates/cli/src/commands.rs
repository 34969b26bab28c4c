use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use h1geom::bodies::Body;
use h1geom::config::{
    parse_ell_list, parse_motion, BodySpec, ConfigError, ExperimentConfig, OutputFormat, Stratify,
};
use h1geom::estimators::{Estimator, EstimatorError, DEFAULT_SAMPLES, DEFAULT_SEED};
use h1geom::geometry::PshMotion;
use h1geom::measures::{self, MeasureError, QuadratureOptions};
use thiserror::Error;

use crate::report::{Bodies, Parameters, Report, Row, SCHEMA};
use crate::Common;

/// Estimates are flagged when the reference lies this many standard errors
/// away.
const Z_LIMIT: f64 = 4.0;

const VOXEL_RESOLUTION: usize = 256;
const MESH_RESOLUTION: usize = 256;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Capability(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Capability(_) => 3,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<EstimatorError> for CliError {
    fn from(e: EstimatorError) -> Self {
        match e {
            EstimatorError::NegativeLength(_) | EstimatorError::NoSamples => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Capability(e.to_string()),
        }
    }
}

/// Subcommand-specific flags.
#[derive(Debug, Default, Clone)]
pub struct Extra {
    pub oracle: bool,
    pub inner: Option<String>,
    pub outer: Option<String>,
    pub motion: Option<String>,
    pub ell_list: Option<String>,
}

impl Extra {
    pub fn oracle(oracle: bool) -> Self {
        Self {
            oracle,
            ..Self::default()
        }
    }
}

/// Flags merged over the experiment file.
#[derive(Debug, Clone)]
pub struct Settings {
    pub body: Option<BodySpec>,
    pub inner: Option<BodySpec>,
    pub outer: Option<BodySpec>,
    pub n: u64,
    pub seed: u64,
    pub ell: Option<f64>,
    pub ell_list: Option<Vec<f64>>,
    pub motion: Option<PshMotion>,
    pub resolution: Option<usize>,
    pub tol: Option<f64>,
    pub strata: u32,
    pub threads: Option<usize>,
    pub format: OutputFormat,
    pub out: Option<String>,
}

fn load_body(arg: &str) -> Result<BodySpec, CliError> {
    let spec = match arg {
        "unit-ball" => BodySpec::unit_ball(),
        "unit-cube" => BodySpec::unit_cube(),
        path => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read body file {path}: {e}")))?;
            text.parse::<BodySpec>()
                .map_err(|e| CliError::Config(format!("{path}: {e}")))?
        }
    };
    spec.build()
        .map_err(|e| CliError::Config(format!("{arg}: {e}")))?;
    Ok(spec)
}

impl Settings {
    pub fn resolve(common: &Common, extra: &Extra) -> Result<Self, CliError> {
        let cfg = match &common.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| {
                    CliError::Config(format!("cannot read config {}: {e}", path.display()))
                })?;
                ExperimentConfig::parse(&text)
                    .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
            }
            None => ExperimentConfig::default(),
        };
        let pick = |flag: &Option<String>,
                    file: &Option<BodySpec>|
         -> Result<Option<BodySpec>, CliError> {
            match flag {
                Some(arg) => load_body(arg).map(Some),
                None => Ok(file.clone()),
            }
        };
        let flags = ExperimentConfig {
            body: None,
            inner: None,
            outer: None,
            n_samples: common.n,
            seed: common.seed,
            ell: common.ell,
            ell_list: extra.ell_list.as_deref().map(parse_ell_list).transpose()?,
            motion: extra
                .motion
                .as_deref()
                .map(parse_motion)
                .transpose()?
                .map(|m| [m.a, m.b, m.c, m.alpha]),
            resolution: common.resolution,
            tolerance: common.tol,
            stratify: common.stratify.map(Stratify::Strata),
            threads: common.threads,
            format: common.format,
            out: common.out.as_ref().map(|p| p.display().to_string()),
        };
        flags.validate()?;
        let merged = ExperimentConfig {
            body: pick(&common.body, &cfg.body)?,
            inner: pick(&extra.inner, &cfg.inner)?,
            outer: pick(&extra.outer, &cfg.outer)?,
            n_samples: flags.n_samples.or(cfg.n_samples),
            seed: flags.seed.or(cfg.seed),
            ell: flags.ell.or(cfg.ell),
            ell_list: flags.ell_list.or(cfg.ell_list),
            motion: flags.motion.or(cfg.motion),
            resolution: flags.resolution.or(cfg.resolution),
            tolerance: flags.tolerance.or(cfg.tolerance),
            stratify: flags.stratify.or(cfg.stratify),
            threads: flags.threads.or(cfg.threads),
            format: flags.format.or(cfg.format),
            out: flags.out.or(cfg.out),
        };
        merged.validate()?;
        Ok(Self {
            motion: merged.motion(),
            body: merged.body,
            inner: merged.inner,
            outer: merged.outer,
            n: merged.n_samples.unwrap_or(DEFAULT_SAMPLES),
            seed: merged.seed.unwrap_or(DEFAULT_SEED),
            ell: merged.ell,
            ell_list: merged.ell_list,
            resolution: merged.resolution,
            tol: merged.tolerance,
            strata: merged.stratify.map_or(1, Stratify::strata),
            threads: merged.threads,
            format: merged.format.unwrap_or_default(),
            out: merged.out,
        })
    }

    fn estimator(&self) -> Estimator {
        Estimator {
            strata: self.strata,
            threads: self.threads,
            ..Estimator::new(self.n, self.seed)
        }
    }

    fn body(&self) -> (BodySpec, Body) {
        let spec = self.body.clone().unwrap_or_else(BodySpec::unit_ball);
        let body = spec.build().expect("validated during resolve");
        (spec, body)
    }

    fn required<T: Clone>(value: &Option<T>, flag: &str, command: &str) -> Result<T, CliError> {
        value
            .clone()
            .ok_or_else(|| CliError::Config(format!("{command} needs {flag}")))
    }
}

struct Outcome {
    rows: Vec<Row>,
    fit: Vec<Row>,
    failures: Vec<String>,
    bodies: Bodies,
    monte_carlo: bool,
}

impl Outcome {
    fn single(spec: BodySpec, rows: Vec<Row>, monte_carlo: bool) -> Self {
        Self {
            rows,
            fit: Vec::new(),
            failures: Vec::new(),
            bodies: Bodies {
                body: Some(spec),
                inner: None,
                outer: None,
            },
            monte_carlo,
        }
    }
}

fn volume(s: &Settings, oracle: bool) -> Outcome {
    let (spec, body) = s.body();
    let exact = measures::volume(&body);
    let row = if oracle {
        let m = measures::volume_voxel_oracle(&body, s.resolution.unwrap_or(VOXEL_RESOLUTION));
        Row::measure("volume", "measures::volume_voxel_oracle", &m)
            .with_reference(exact.value, "measures::volume")
    } else {
        Row::measure("volume", "measures::volume", &exact)
    };
    Outcome::single(spec, vec![row], false)
}

fn p_area(s: &Settings, oracle: bool) -> Outcome {
    let (spec, body) = s.body();
    let opts = QuadratureOptions {
        tol: s.tol.unwrap_or(QuadratureOptions::default().tol),
        ..Default::default()
    };
    let quad = measures::p_area_with(&body, &opts);
    let mut failures = Vec::new();
    let row = if oracle {
        let m =
            measures::p_area_triangulation_oracle(&body, s.resolution.unwrap_or(MESH_RESOLUTION));
        let row = Row::measure("p_area", "measures::p_area_triangulation_oracle", &m);
        match quad {
            Ok(q) => row.with_reference(q.value, "measures::p_area"),
            Err(e) => row.with_note(format!("no quadrature reference: {e}")),
        }
    } else {
        match quad {
            Ok(q) => Row::measure("p_area", "measures::p_area", &q),
            Err(MeasureError::NonConvergence {
                value,
                error_estimate,
                resolution,
            }) => {
                failures.push(format!(
                    "p-area quadrature did not reach tolerance {}",
                    opts.tol
                ));
                let m = measures::MeasureResult {
                    value,
                    method: measures::MeasureMethod::Quadrature,
                    resolution,
                    error_estimate,
                };
                Row::measure("p_area", "measures::p_area", &m).with_note("not converged")
            }
        }
    };
    let mut out = Outcome::single(spec, vec![row], false);
    out.failures = failures;
    out
}

fn segments(s: &Settings, command: &str) -> Result<Outcome, CliError> {
    let ell = Settings::required(&s.ell, "--ell", command)?;
    let (spec, body) = s.body();
    let e = s.estimator();
    let hit = e.segment_hit_measure(&body, ell)?;
    let inside = e.segment_containment_measure(&body, ell)?;
    let mut clamped = Row::estimate(
        "segment_containment_measure",
        "estimators::Estimator::segment_containment_measure",
        &inside.clamped,
    )
    .with_ell(ell);
    if !inside.closed_form_applies {
        clamped.reference = None;
        clamped.relative_error = None;
        clamped.z = None;
        clamped = clamped.with_note(
            "some chords are shorter than ell; the linear closed form holds only for the unclamped integral",
        );
    }
    let rows = vec![
        Row::estimate(
            "segment_hit_measure",
            "estimators::Estimator::segment_hit_measure",
            &hit,
        )
        .with_ell(ell),
        clamped,
        Row::estimate(
            "segment_containment_measure_unclamped",
            "estimators::Estimator::segment_containment_measure",
            &inside.unclamped,
        )
        .with_ell(ell),
    ];
    Ok(Outcome::single(spec, rows, true))
}

fn containment(s: &Settings) -> Result<Outcome, CliError> {
    let ell = s.ell.unwrap_or(0.0);
    let inner = Settings::required(&s.inner, "--inner", "containment")?;
    let outer = Settings::required(&s.outer, "--outer", "containment")?;
    let (ib, ob) = (
        inner.build().expect("validated"),
        outer.build().expect("validated"),
    );
    let r = s.estimator().containment_probability(&ib, &ob, ell)?;
    let row = Row::estimate(
        "containment_probability",
        "estimators::Estimator::containment_probability",
        &r,
    )
    .with_ell(ell);
    Ok(Outcome {
        rows: vec![row],
        fit: Vec::new(),
        failures: Vec::new(),
        bodies: Bodies {
            body: None,
            inner: Some(inner),
            outer: Some(outer),
        },
        monte_carlo: true,
    })
}

fn invariance(s: &Settings) -> Result<Outcome, CliError> {
    let motion = Settings::required(&s.motion, "--motion", "invariance")?;
    let (spec, body) = s.body();
    let r = s.estimator().invariance_check(&body, &motion)?;
    let mut rows = Vec::new();
    for (name, pair) in [
        ("line_measure", &r.line_measure),
        ("chord_integral", &r.chord_integral),
    ] {
        let module = format!("estimators::Estimator::{name}");
        rows.push(Row::estimate(name, &module, &pair.original));
        let mut moved = Row::estimate(&format!("{name}_transformed"), &module, &pair.transformed)
            .with_reference(
                pair.original.value,
                &format!("{module} (untransformed body, same seed)"),
            );
        moved.z = Some(pair.z);
        rows.push(moved.with_note("z combines both standard errors"));
    }
    let mut out = Outcome::single(spec, rows, false);
    if !r.passed {
        out.failures.push(format!("paired |z| reached {Z_LIMIT}"));
    }
    Ok(out)
}

fn sweep(s: &Settings) -> Result<Outcome, CliError> {
    let ells = Settings::required(&s.ell_list, "--ell-list", "sweep")?;
    let (spec, body) = s.body();
    let r = s.estimator().segment_hit_sweep(&body, &ells)?;
    let module = "estimators::Estimator::segment_hit_sweep";
    let rows = r
        .ells
        .iter()
        .zip(&r.rows)
        .map(|(&ell, row)| Row::estimate("segment_hit_measure", module, row).with_ell(ell))
        .collect();
    let mut out = Outcome::single(spec, rows, true);
    out.fit = vec![
        Row::estimate("slope", module, &r.slope),
        Row::estimate("intercept", module, &r.intercept),
    ];
    Ok(out)
}

fn check_tolerances(out: &mut Outcome, tol: Option<f64>) {
    for row in out.rows.iter().chain(&out.fit) {
        if out.monte_carlo {
            if let Some(z) = row.z {
                if z.abs() > Z_LIMIT {
                    out.failures.push(format!(
                        "{}: |z| = {:.2} exceeds {Z_LIMIT}",
                        row.quantity,
                        z.abs()
                    ));
                }
            }
        }
        if let (Some(tol), Some(rel)) = (tol, row.relative_error) {
            if rel.abs() > tol {
                out.failures.push(format!(
                    "{}: relative error {rel:.3e} exceeds {tol}",
                    row.quantity
                ));
            }
        }
    }
}

/// Runs one subcommand and writes its report. Returns whether every
/// tolerance check passed.
pub fn execute(command: &str, common: &Common, extra: &Extra) -> Result<bool, CliError> {
    let settings = Settings::resolve(common, extra)?;
    let start = Instant::now();
    let s = &settings;
    let single_mc =
        |quantity: &str, result: Result<_, EstimatorError>| -> Result<Outcome, CliError> {
            let (spec, _) = s.body();
            let module = format!("estimators::Estimator::{quantity}");
            Ok(Outcome::single(
                spec,
                vec![Row::estimate(quantity, &module, &result?)],
                true,
            ))
        };
    let mut outcome = match command {
        "volume" => volume(s, extra.oracle),
        "p-area" => p_area(s, extra.oracle),
        "crofton" => single_mc("line_measure", s.estimator().line_measure(&s.body().1))?,
        "chord-integral" => single_mc("chord_integral", s.estimator().chord_integral(&s.body().1))?,
        "mean-chord" => single_mc("mean_chord", s.estimator().mean_chord(&s.body().1))?,
        "kinematic" => segments(s, command)?,
        "containment" => containment(s)?,
        "invariance" => invariance(s)?,
        "sweep" => sweep(s)?,
        other => return Err(CliError::Config(format!("unknown command {other}"))),
    };
    // Quadrature tolerances are applied inside p-area itself.
    let rel_tol = if command == "p-area" && !extra.oracle {
        None
    } else {
        s.tol
    };
    check_tolerances(&mut outcome, rel_tol);

    let uses_samples = outcome.monte_carlo || command == "invariance";
    let report = Report {
        schema: SCHEMA,
        command: command.into(),
        bodies: outcome.bodies,
        parameters: Parameters {
            n_samples: uses_samples.then_some(s.n),
            seed: s.seed,
            strata: s.strata,
            ell: s
                .ell
                .filter(|_| matches!(command, "kinematic" | "containment")),
            ell_list: s.ell_list.clone().filter(|_| command == "sweep"),
            motion: s
                .motion
                .filter(|_| command == "invariance")
                .map(|m| [m.a, m.b, m.c, m.alpha]),
            resolution: s.resolution,
            tolerance: s.tol,
        },
        rows: outcome.rows,
        fit: outcome.fit,
        pass: outcome.failures.is_empty(),
        failures: outcome.failures,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    write_report(&report, s)?;
    for f in &report.failures {
        eprintln!("h1geom: tolerance failure: {f}");
    }
    Ok(report.pass)
}

fn write_report(report: &Report, s: &Settings) -> Result<(), CliError> {
    let mut buf = Vec::new();
    match s.format {
        OutputFormat::Json => report
            .write_json(&mut buf)
            .map_err(|e| CliError::Config(e.to_string()))?,
        OutputFormat::Csv => report
            .write_csv(&mut buf)
            .map_err(|e| CliError::Config(e.to_string()))?,
    }
    match &s.out {
        Some(path) => fs::write(Path::new(path), &buf)
            .map_err(|e| CliError::Config(format!("cannot write {path}: {e}"))),
        None => std::io::stdout()
            .write_all(&buf)
            .map_err(|e| CliError::Config(e.to_string())),
    }
}
