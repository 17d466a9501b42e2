//! The subcommands, written against `Write` sinks so they can be driven from
//! tests as well as from `main`.

use std::collections::{HashMap, HashSet};
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use qcph_core::descriptors::{feature_names, quotient_barcodes};
use qcph_core::filtration::augment_gluing_stars;
use qcph_core::periodic::{cell_basis, select_atom_set};
use qcph_core::regress::{cross_validate, fit, predict as gbt_predict, EvalReport, GbtModel, Matrix};
use qcph_core::verify::{self, VerifyConfig, VerifyReport};
use qcph_core::{assemble_features, reduce, AtomSet, CrystalStructure, Filtration, Motif};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::cif::parse_cif;
use crate::config::RunConfig;
use crate::formats::{self, barcode_set_json, FeatureTable};
use crate::native::parse_native;

#[derive(Debug, Error)]
pub enum CommandError {
    #[error("{0}")]
    Usage(String),
    #[error("{0:#}")]
    Data(#[from] anyhow::Error),
    #[error("verification failed: {failures} failing checks")]
    Verification { failures: usize },
}

impl CommandError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CommandError::Usage(_) => 1,
            CommandError::Data(_) => 2,
            CommandError::Verification { .. } => 3,
        }
    }
}

fn data_err(e: impl Into<anyhow::Error>) -> CommandError {
    CommandError::Data(e.into())
}

#[derive(Debug, Error)]
#[error("feature rows without labels: {}", .0.join(", "))]
pub struct IdMismatch(pub Vec<String>);

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum InputFormat {
    Cif,
    Json,
    Filtration,
}

/// `*.cif` → CIF, `*.filtration.json` → explicit filtration, `*.json` → native.
pub fn detect_format(path: &Path, forced: Option<InputFormat>) -> Result<InputFormat, CommandError> {
    if let Some(f) = forced {
        return Ok(f);
    }
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default().to_ascii_lowercase();
    if name.ends_with(".filtration.json") {
        Ok(InputFormat::Filtration)
    } else if name.ends_with(".json") {
        Ok(InputFormat::Json)
    } else if name.ends_with(".cif") {
        Ok(InputFormat::Cif)
    } else {
        Err(CommandError::Usage(format!(
            "cannot tell the format of {}; pass --format cif|json|filtration",
            path.display()
        )))
    }
}

/// Row id of an input file: its name up to the first dot.
pub fn input_id(path: &Path) -> String {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
    name.split('.').next().unwrap_or(name).to_string()
}

pub fn load_structure(path: &Path, format: InputFormat) -> anyhow::Result<CrystalStructure> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let s = match format {
        InputFormat::Cif => parse_cif(&text)?,
        InputFormat::Json => parse_native(&text)?,
        InputFormat::Filtration => bail!("{} is a filtration, not a structure", path.display()),
    };
    let unknown = s.unknown_elements();
    if !unknown.is_empty() {
        log::warn!("{}: unknown element symbols {:?}", path.display(), unknown);
    }
    Ok(s)
}

pub fn load_filtration(path: &Path) -> anyhow::Result<Filtration> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(formats::parse_filtration(&text)?)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureSummary {
    pub written: usize,
    pub skipped: Vec<PathBuf>,
}

/// Feature CSV of every readable input, rows in input order. Unreadable
/// inputs are skipped with a warning; the command fails only when every
/// input does.
pub fn features(
    inputs: &[PathBuf],
    forced: Option<InputFormat>,
    cfg: &RunConfig,
    out: &mut dyn Write,
) -> Result<FeatureSummary, CommandError> {
    let dcfg = cfg.descriptor_config().map_err(|e| CommandError::Usage(e.to_string()))?;
    if forced == Some(InputFormat::Filtration) {
        return Err(CommandError::Usage("features needs crystal structures, not filtrations".into()));
    }
    let formats = inputs
        .iter()
        .map(|p| detect_format(p, forced))
        .collect::<Result<Vec<_>, _>>()?;
    if let Some(p) = inputs.iter().zip(&formats).find(|(_, f)| **f == InputFormat::Filtration) {
        return Err(CommandError::Usage(format!("{} is a filtration, not a structure", p.0.display())));
    }
    let mut seen = HashSet::new();
    if let Some(dup) = inputs.iter().map(|p| input_id(p)).find(|id| !seen.insert(id.clone())) {
        return Err(CommandError::Usage(format!("two inputs share the row id {dup:?}")));
    }

    let results: Vec<anyhow::Result<Vec<f64>>> = inputs
        .par_iter()
        .zip(formats.par_iter())
        .map(|(path, &format)| {
            let s = load_structure(path, format)?;
            let fv = assemble_features(&s, &dcfg).with_context(|| format!("featurising {}", path.display()))?;
            Ok(fv.values)
        })
        .collect();

    let mut rows = Vec::with_capacity(inputs.len());
    let mut skipped = Vec::new();
    for (path, result) in inputs.iter().zip(results) {
        match result {
            Ok(values) => rows.push((input_id(path), values)),
            Err(e) => {
                log::warn!("skipping {}: {e:#}", path.display());
                skipped.push(path.clone());
            }
        }
    }
    if !inputs.is_empty() && rows.is_empty() {
        return Err(data_err(anyhow!("none of the {} inputs could be featurised", inputs.len())));
    }
    formats::write_features(&mut *out, &feature_names(&dcfg), &rows).map_err(data_err)?;
    Ok(FeatureSummary { written: rows.len(), skipped })
}

/// Plain and quotient barcodes of each selection of a structure, or of an
/// explicit filtration and its class partition. Without `selection` all
/// non-hydrogen atoms form one motif.
pub fn barcodes(
    input: &Path,
    forced: Option<InputFormat>,
    selection: Option<&[AtomSet]>,
    cfg: &RunConfig,
    out: &mut dyn Write,
) -> Result<(), CommandError> {
    let format = detect_format(input, forced)?;
    let doc = if format == InputFormat::Filtration {
        let plain = load_filtration(input)?;
        filtration_barcodes(&input_id(input), &plain)?
    } else {
        let s = load_structure(input, format)?;
        structure_barcodes(&s, selection, cfg)?
    };
    serde_json::to_writer_pretty(&mut *out, &doc).map_err(data_err)?;
    writeln!(out).map_err(data_err)?;
    Ok(())
}

fn filtration_barcodes(source: &str, plain: &Filtration) -> Result<Value, CommandError> {
    let n = plain.vertex_count();
    let mut at_zero = vec![false; n];
    for s in plain.simplices().iter().filter(|s| s.dim() == 0 && s.value == 0.0) {
        at_zero[s.vertices()[0] as usize] = true;
    }
    if let Some(v) = at_zero.iter().position(|z| !z) {
        return Err(data_err(anyhow!("vertex {v} must be listed with value 0 for gluing stars")));
    }
    let glued = augment_gluing_stars(plain, plain.partition());
    Ok(json!({
        "source": source,
        "entries": [{
            "selection": "explicit",
            "vertices": n,
            "classes": plain.partition().len(),
            "plain": barcode_set_json(&reduce(plain)),
            "quotient": barcode_set_json(&reduce(&glued)),
        }],
    }))
}

/// The barcode JSON document of a structure.
pub fn structure_barcodes(
    s: &CrystalStructure,
    selection: Option<&[AtomSet]>,
    cfg: &RunConfig,
) -> Result<Value, CommandError> {
    let dcfg = cfg.descriptor_config().map_err(|e| CommandError::Usage(e.to_string()))?;
    dcfg.validate().map_err(|e| CommandError::Usage(e.to_string()))?;
    let basis = cell_basis(&s.cell).map_err(data_err)?;
    let motifs: Vec<Motif> = match selection {
        Some(sets) => sets.iter().map(|&set| select_atom_set(s, &basis, set)).collect(),
        None => vec![Motif::from_predicate(s, &basis, "non-H", |e| e != "H")],
    };
    let mut entries = Vec::with_capacity(motifs.len());
    for motif in &motifs {
        let (plain, quotient) = if motif.is_empty() {
            (Value::Null, Value::Null)
        } else {
            let (p, q) = quotient_barcodes(motif, &basis, dcfg.max_filtration, dcfg.max_dim).map_err(data_err)?;
            (barcode_set_json(&p), barcode_set_json(&q))
        };
        entries.push(json!({
            "selection": motif.atom_set_tag,
            "atoms": motif.len(),
            "plain": plain,
            "quotient": quotient,
        }));
    }
    Ok(json!({
        "source": s.name,
        "max_filtration": dcfg.max_filtration,
        "entries": entries,
    }))
}

/// Runs the randomized theorem checks, writing a summary and every failing
/// instance as explicit-filtration JSON.
pub fn verify(cfg: &VerifyConfig, out: &mut dyn Write) -> Result<VerifyReport, CommandError> {
    let report = verify::run(cfg);
    writeln!(
        out,
        "verify: seed {}, {} trials, {} checks, {} failures",
        cfg.seed,
        report.trials,
        report.checks,
        report.failures.len()
    )
    .map_err(data_err)?;
    for f in &report.failures {
        writeln!(out, "trial {}: {}: {}", f.trial, f.check, f.detail).map_err(data_err)?;
        writeln!(out, "{}", formats::write_filtration(&f.instance)).map_err(data_err)?;
    }
    if report.passed() {
        Ok(report)
    } else {
        Err(CommandError::Verification { failures: report.failures.len() })
    }
}

/// A fitted model together with the feature columns it was trained on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    #[serde(flatten)]
    pub model: GbtModel,
    pub feature_names: Vec<String>,
}

fn read_text(path: &Path) -> Result<String, CommandError> {
    std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(CommandError::Data)
}

pub fn read_feature_table(path: &Path) -> Result<FeatureTable, CommandError> {
    formats::read_features(&read_text(path)?)
        .with_context(|| format!("reading features from {}", path.display()))
        .map_err(CommandError::Data)
}

/// Targets in feature-row order. Labels without a feature row are ignored.
pub fn aligned_labels(table: &FeatureTable, labels_path: &Path) -> Result<Vec<f64>, CommandError> {
    let labels = formats::read_labels(&read_text(labels_path)?)
        .with_context(|| format!("reading labels from {}", labels_path.display()))?;
    let by_id: HashMap<&str, f64> = labels.iter().map(|(id, y)| (id.as_str(), *y)).collect();
    let missing: Vec<String> = table.ids.iter().filter(|id| !by_id.contains_key(id.as_str())).cloned().collect();
    if !missing.is_empty() {
        return Err(data_err(IdMismatch(missing)));
    }
    let unused = labels.len() - table.ids.len();
    if unused > 0 {
        log::info!("{unused} labels have no feature row");
    }
    Ok(table.ids.iter().map(|id| by_id[id.as_str()]).collect())
}

pub fn train(table: &FeatureTable, y: &[f64], cfg: &RunConfig) -> Result<ModelFile, CommandError> {
    cfg.gbt.validate().map_err(|e| CommandError::Usage(e.to_string()))?;
    let model = fit(&table.x, y, &cfg.gbt).map_err(data_err)?;
    Ok(ModelFile { model, feature_names: table.names.clone() })
}

pub fn predict(model: &ModelFile, table: &FeatureTable) -> Result<Vec<f64>, CommandError> {
    if model.feature_names != table.names {
        return Err(data_err(anyhow!(
            "feature columns differ from the {} columns the model was trained on",
            model.feature_names.len()
        )));
    }
    gbt_predict(&model.model, &table.x).map_err(data_err)
}

fn metrics_value(r: &EvalReport) -> Value {
    json!({ "cod": r.cod, "pcc": r.pcc, "mae": r.mae, "rmse": r.rmse, "pcc_undefined": r.pcc_undefined })
}

/// Repeated k-fold cross-validation; the metrics JSON carries the mean
/// `cod`, `pcc`, `mae`, `rmse` and the per-fold reports.
pub fn cv(x: &Matrix, y: &[f64], cfg: &RunConfig) -> Result<Value, CommandError> {
    cfg.validate().map_err(|e| CommandError::Usage(e.to_string()))?;
    let report = cross_validate(x, y, cfg.folds, cfg.repeats, &cfg.gbt, cfg.seed).map_err(data_err)?;
    let mut doc = metrics_value(&report.mean);
    let extra = json!({
        "rows": y.len(),
        "folds": report.n_folds,
        "repeats": report.repeats,
        "seed": cfg.seed,
        "per_fold": report.folds.iter().map(metrics_value).collect::<Vec<_>>(),
    });
    doc.as_object_mut()
        .expect("metrics are an object")
        .extend(extra.as_object().expect("extras are an object").clone());
    Ok(doc)
}
