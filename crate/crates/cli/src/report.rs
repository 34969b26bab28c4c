//! Report layout shared by the JSON and CSV writers.
//!
//! CSV columns, in order:
//!
//! `command, quantity, module, body, ell, value, std_error, ci_lo, ci_hi,
//! n_samples, seed, reference, reference_source, relative_error, z, note`
//!
//! Empty cells mean "not applicable". A sweep writes one row per length; the
//! fitted slope and intercept appear only in JSON.

use std::io::Write;

use h1geom::config::BodySpec;
use h1geom::estimators::{EstimateResult, Reference};
use h1geom::measures::MeasureResult;
use serde::Serialize;

pub const SCHEMA: &str = "h1geom.report/1";

pub const CSV_HEADER: [&str; 16] = [
    "command",
    "quantity",
    "module",
    "body",
    "ell",
    "value",
    "std_error",
    "ci_lo",
    "ci_hi",
    "n_samples",
    "seed",
    "reference",
    "reference_source",
    "relative_error",
    "z",
    "note",
];

#[derive(Clone, Debug, Serialize)]
pub struct Row {
    pub quantity: String,
    /// Routine that produced `value`.
    pub module: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ell: Option<f64>,
    pub value: f64,
    pub std_error: Option<f64>,
    /// 95% interval for Monte Carlo rows, `value ± error_estimate` otherwise.
    pub ci: (f64, f64),
    pub n_samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
    pub reference: Option<Reference>,
    pub relative_error: Option<f64>,
    pub z: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Row {
    pub fn estimate(quantity: &str, module: &str, r: &EstimateResult) -> Self {
        Self {
            quantity: quantity.into(),
            module: module.into(),
            ell: None,
            value: r.value,
            std_error: Some(r.std_error),
            ci: r.ci95,
            n_samples: Some(r.n_samples),
            method: Some("monte-carlo".into()),
            resolution: None,
            reference: r.reference.clone(),
            relative_error: r.relative_error(),
            z: r.z_score(),
            note: None,
        }
    }

    pub fn measure(quantity: &str, module: &str, m: &MeasureResult) -> Self {
        let method = serde_json::to_value(m.method)
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned));
        Self {
            quantity: quantity.into(),
            module: module.into(),
            ell: None,
            value: m.value,
            std_error: None,
            ci: (m.value - m.error_estimate, m.value + m.error_estimate),
            n_samples: None,
            method,
            resolution: (m.resolution > 0).then_some(m.resolution),
            reference: None,
            relative_error: None,
            z: None,
            note: None,
        }
    }

    pub fn with_ell(mut self, ell: f64) -> Self {
        self.ell = Some(ell);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn with_reference(mut self, value: f64, source: &str) -> Self {
        self.relative_error = Some((self.value - value) / value.abs());
        self.reference = Some(Reference {
            value,
            source: source.into(),
        });
        self
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Parameters {
    pub n_samples: Option<u64>,
    pub seed: u64,
    pub strata: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ell: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ell_list: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub motion: Option<[f64; 4]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Bodies {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub body: Option<BodySpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inner: Option<BodySpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outer: Option<BodySpec>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub command: String,
    pub bodies: Bodies,
    pub parameters: Parameters,
    pub rows: Vec<Row>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub fit: Vec<Row>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<String>,
    /// Excluded from reproducibility comparisons.
    pub wall_time_s: f64,
}

impl Report {
    pub fn body_label(&self) -> String {
        let b = &self.bodies;
        match (&b.body, &b.inner, &b.outer) {
            (Some(body), _, _) => body.kind().into(),
            (None, Some(i), Some(o)) => format!("{} in {}", i.kind(), o.kind()),
            _ => String::new(),
        }
    }

    pub fn write_json(&self, out: &mut dyn Write) -> std::io::Result<()> {
        serde_json::to_writer_pretty(&mut *out, self)?;
        writeln!(out)
    }

    pub fn write_csv(&self, out: &mut dyn Write) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        let body = self.body_label();
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        for r in &self.rows {
            let reference = r.reference.as_ref();
            w.write_record([
                self.command.clone(),
                r.quantity.clone(),
                r.module.clone(),
                body.clone(),
                opt(r.ell),
                r.value.to_string(),
                opt(r.std_error),
                r.ci.0.to_string(),
                r.ci.1.to_string(),
                r.n_samples.map(|n| n.to_string()).unwrap_or_default(),
                self.parameters.seed.to_string(),
                opt(reference.map(|x| x.value)),
                reference.map(|x| x.source.clone()).unwrap_or_default(),
                opt(r.relative_error),
                opt(r.z),
                r.note.clone().unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}
