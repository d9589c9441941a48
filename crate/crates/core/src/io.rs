//! CSV and JSON output.
//!
//! CSV files open with `#` metadata lines (crate version, model hash,
//! tolerances) followed by a header row. Floats use the shortest exact
//! representation, so identical inputs give byte-identical files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::model::FriedrichsModel;
use crate::quad::NumericalSettings;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// SHA-256 over the canonical JSON form of the model.
pub fn model_hash(model: &FriedrichsModel) -> String {
    let json = serde_json::to_vec(model).expect("models always serialize");
    hex::encode(Sha256::digest(&json))
}

pub fn fmt_f64(x: f64) -> String {
    format!("{x:e}")
}

#[derive(Clone, Debug)]
pub struct Metadata {
    pub lines: Vec<(String, String)>,
}

impl Metadata {
    pub fn new(model: &FriedrichsModel, settings: &NumericalSettings) -> Self {
        Metadata {
            lines: vec![
                ("version".into(), VERSION.into()),
                ("model_hash".into(), model_hash(model)),
                ("rel_tol".into(), fmt_f64(settings.quad.rel_tol)),
                ("abs_tol".into(), fmt_f64(settings.quad.abs_tol)),
            ],
        }
    }

    pub fn with(mut self, key: &str, value: impl Into<String>) -> Self {
        self.lines.push((key.into(), value.into()));
        self
    }
}

pub fn write_csv_to<W: Write>(out: W, meta: &Metadata, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut out = out;
    for (k, v) in &meta.lines {
        writeln!(out, "# {k}: {v}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv(path: &Path, meta: &Metadata, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    write_csv_to(BufWriter::new(File::create(path)?), meta, header, rows)
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema: &'a str,
    version: &'a str,
    model_hash: String,
    model: &'a FriedrichsModel,
    settings: &'a NumericalSettings,
    data: &'a T,
}

/// Pretty JSON with a versioned `schema` field.
pub fn to_json<T: Serialize>(schema: &str, model: &FriedrichsModel, settings: &NumericalSettings, data: &T) -> Result<String> {
    let env = Envelope {
        schema,
        version: VERSION,
        model_hash: model_hash(model),
        model,
        settings,
        data,
    };
    Ok(serde_json::to_string_pretty(&env)? + "\n")
}

pub fn write_json<T: Serialize>(path: &Path, schema: &str, model: &FriedrichsModel, settings: &NumericalSettings, data: &T) -> Result<()> {
    std::fs::write(path, to_json(schema, model, settings, data)?)?;
    Ok(())
}
