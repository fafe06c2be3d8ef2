//! CSV and manifest files for a finished sweep.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use twobath::lindblad_steady::CRITICAL_MARGIN;
use twobath::{Error, Result};

use crate::config::SweepConfig;
use crate::sweep::SweepRow;

pub const CSV_HEADER: [&str; 13] = [
    "kind",
    "method",
    "lambda_frac",
    "lambda",
    "T1",
    "T2",
    "deltaT",
    "observable",
    "value",
    "ratio_to_langevin",
    "status",
    "diag_residual",
    "diag_quad_error",
];

/// Scientific notation with 17 significant digits.
pub fn format_number(x: f64) -> String {
    format!("{x:.16e}")
}

fn optional(x: Option<f64>) -> String {
    x.map(format_number).unwrap_or_default()
}

fn unwritable(path: &Path, err: impl std::fmt::Display) -> Error {
    Error::OutputUnwritable { path: path.display().to_string(), reason: err.to_string() }
}

pub fn csv_bytes(rows: &[&SweepRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::OutputUnwritable { path: "<memory>".into(), reason: e.to_string() };
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in rows {
        w.write_record([
            r.kind.label().to_string(),
            r.method.label().to_string(),
            format_number(r.lambda_frac),
            format_number(r.lambda),
            format_number(r.t1),
            format_number(r.t2),
            format_number(r.delta_t),
            r.observable.label().to_string(),
            optional(r.value),
            optional(r.ratio_to_langevin),
            r.status.label().to_string(),
            optional(r.diag_residual),
            optional(r.diag_quad_error),
        ])
        .map_err(io)?;
    }
    w.into_inner().map_err(|e| Error::OutputUnwritable { path: "<memory>".into(), reason: e.to_string() })
}

#[derive(Serialize)]
struct Manifest<'a> {
    code_version: &'static str,
    rate_convention: &'static str,
    legend_unverified: bool,
    tolerances: BTreeMap<&'static str, f64>,
    files: Vec<String>,
    row_counts: BTreeMap<String, usize>,
    config: &'a SweepConfig,
}

/// Writes `{name}_{kind}.csv` per coupling kind and `{name}.manifest` into `dir`.
pub fn write_output(rows: &[SweepRow], cfg: &SweepConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| unwritable(dir, e))?;
    let mut written = Vec::new();
    let mut counts = BTreeMap::new();
    for kind in &cfg.kind {
        let subset: Vec<&SweepRow> = rows.iter().filter(|r| r.kind == *kind).collect();
        let file = format!("{}_{}.csv", cfg.name, kind.label());
        let path = dir.join(&file);
        std::fs::write(&path, csv_bytes(&subset)?).map_err(|e| unwritable(&path, e))?;
        counts.insert(file, subset.len());
        written.push(path);
    }
    let tolerances = BTreeMap::from([
        ("quadrature_rel_tol", cfg.quadrature.rel_tol),
        ("quadrature_abs_tol", cfg.quadrature.abs_tol),
        ("quadrature_window_factor", cfg.quadrature.window_factor),
        ("moment_residual_rel", 1e-9),
        ("critical_margin", CRITICAL_MARGIN),
    ]);
    let manifest = Manifest {
        code_version: env!("CARGO_PKG_VERSION"),
        rate_convention: cfg.rate_convention.label(),
        legend_unverified: cfg.legend_unverified,
        tolerances,
        files: written.iter().filter_map(|p| p.file_name()).map(|f| f.to_string_lossy().into_owned()).collect(),
        row_counts: counts,
        config: cfg,
    };
    let text = toml::to_string(&manifest).map_err(|e| Error::OutputUnwritable { path: cfg.name.clone(), reason: e.to_string() })?;
    let path = dir.join(format!("{}.manifest", cfg.name));
    std::fs::write(&path, text).map_err(|e| unwritable(&path, e))?;
    written.push(path);
    Ok(written)
}
