//! File formats shared by the commands: explicit filtrations, barcodes,
//! feature tables, labels and predictions.

use std::collections::HashSet;
use std::io::Write;

use qcph_core::filtration::FiltrationError;
use qcph_core::regress::Matrix;
use qcph_core::{Barcode, BarcodeSet, Filtration, Partition};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Filtration(#[from] FiltrationError),
    #[error("CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Invalid(String),
}

/// Shortest decimal form of `x` rounded to `digits` significant digits.
/// Negative zero prints as `0`; non-finite values as `inf`, `-inf`, `nan`.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let rounded: f64 = format!("{:.*e}", digits.max(1) - 1, x)
        .parse()
        .expect("exponent formatting always parses");
    format!("{rounded}")
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FiltrationDoc {
    vertices: usize,
    #[serde(default)]
    classes: Vec<Vec<u32>>,
    simplices: Vec<SimplexDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimplexDoc {
    v: Vec<u32>,
    t: f64,
}

/// Reads `{"vertices": n, "classes": [[..]..], "simplices": [{"v": [..], "t": x}..]}`.
/// Vertices missing from `classes` become singleton classes.
pub fn parse_filtration(text: &str) -> Result<Filtration, FormatError> {
    let doc: FiltrationDoc = serde_json::from_str(text)?;
    let partition = Partition::new(doc.vertices, doc.classes)?;
    let simplices = doc.simplices.into_iter().map(|s| (s.v, s.t)).collect();
    Ok(Filtration::from_simplices(doc.vertices, partition, simplices)?)
}

/// Writes a filtration without gluing stars, with its class partition, in
/// filtration order. Values print in shortest round-trip form so a replay
/// rebuilds the same filtration.
pub fn write_filtration(f: &Filtration) -> String {
    assert_eq!(f.apex_count(), 0, "only filtrations without gluing stars are written");
    let doc = FiltrationDoc {
        vertices: f.vertex_count(),
        classes: f.partition().classes().iter().filter(|c| c.len() > 1).cloned().collect(),
        simplices: f
            .simplices()
            .iter()
            .map(|s| SimplexDoc { v: s.vertices().to_vec(), t: s.value })
            .collect(),
    };
    serde_json::to_string(&doc).expect("filtration documents serialise")
}

fn interval_value(x: f64) -> Value {
    if x.is_infinite() {
        Value::from("inf")
    } else {
        Value::from(x)
    }
}

/// `{"degree": q, "intervals": [[b, d]..]}` with `d = "inf"` for essential classes.
pub fn barcode_json(b: &Barcode) -> Value {
    let intervals: Vec<Value> = b
        .intervals()
        .iter()
        .map(|i| json!([interval_value(i.birth), interval_value(i.death)]))
        .collect();
    json!({ "degree": b.degree, "intervals": intervals })
}

pub fn barcode_set_json(bs: &BarcodeSet) -> Value {
    json!({
        "pb0": barcode_json(&bs.pb0),
        "pb1": barcode_json(&bs.pb1),
        "pb2": barcode_json(&bs.pb2),
        "pb1_finite": barcode_json(&bs.pb1_finite),
        "pb1_inf": barcode_json(&bs.pb1_inf),
        "pb2_incomplete": bs.pb2_incomplete,
        "pb2_truncated": bs.pb2_truncated,
    })
}

/// Inverse of [`barcode_json`].
pub fn parse_barcode(v: &Value) -> Result<Barcode, FormatError> {
    let bad = || FormatError::Invalid(format!("not a barcode: {v}"));
    let degree = v.get("degree").and_then(Value::as_u64).ok_or_else(bad)?;
    let raw = v.get("intervals").and_then(Value::as_array).ok_or_else(bad)?;
    let endpoint = |e: &Value| match e {
        Value::String(s) if s == "inf" => Some(f64::INFINITY),
        _ => e.as_f64(),
    };
    let mut intervals = Vec::with_capacity(raw.len());
    for pair in raw {
        match pair.as_array().map(Vec::as_slice) {
            Some([b, d]) => intervals.push(qcph_core::Interval::new(
                endpoint(b).ok_or_else(bad)?,
                endpoint(d).ok_or_else(bad)?,
            )),
            _ => return Err(bad()),
        }
    }
    Ok(Barcode::new(u8::try_from(degree).map_err(|_| bad())?, intervals))
}

pub const FEATURE_DIGITS: usize = 9;

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

/// Feature CSV: header `id` followed by the slot names, one row per structure.
pub fn write_features<W: Write>(w: W, names: &[String], rows: &[(String, Vec<f64>)]) -> Result<(), FormatError> {
    let mut out = csv_writer(w);
    out.write_record(std::iter::once("id").chain(names.iter().map(String::as_str)))?;
    for (id, values) in rows {
        if values.len() != names.len() {
            return Err(FormatError::Invalid(format!(
                "row {id} has {} values for {} columns",
                values.len(),
                names.len()
            )));
        }
        let mut record = Vec::with_capacity(values.len() + 1);
        record.push(id.clone());
        record.extend(values.iter().map(|&x| format_significant(x, FEATURE_DIGITS)));
        out.write_record(&record)?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub ids: Vec<String>,
    pub names: Vec<String>,
    pub x: Matrix,
}

pub fn read_features(text: &str) -> Result<FeatureTable, FormatError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = reader.headers()?.clone();
    if header.get(0) != Some("id") {
        return Err(FormatError::Invalid("feature CSV must start with an id column".into()));
    }
    let names: Vec<String> = header.iter().skip(1).map(String::from).collect();
    let mut ids = Vec::new();
    let mut seen = HashSet::new();
    let mut data = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let id = record[0].to_string();
        if !seen.insert(id.clone()) {
            return Err(FormatError::Invalid(format!("duplicate id {id}")));
        }
        for (j, field) in record.iter().skip(1).enumerate() {
            let x: f64 = field.parse().ok().filter(|x: &f64| x.is_finite()).ok_or_else(|| {
                FormatError::Invalid(format!("row {}, column {}: {field:?} is not a finite number", i + 2, names[j]))
            })?;
            data.push(x);
        }
        ids.push(id);
    }
    let x = Matrix::new(ids.len(), names.len(), data).map_err(|e| FormatError::Invalid(e.to_string()))?;
    Ok(FeatureTable { ids, names, x })
}

/// Labels CSV with a header and two columns, `id` and the target value.
pub fn read_labels(text: &str) -> Result<Vec<(String, f64)>, FormatError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let mut labels = Vec::new();
    let mut seen = HashSet::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != 2 {
            return Err(FormatError::Invalid(format!("labels row {} must have two fields", i + 2)));
        }
        let id = record[0].to_string();
        let y: f64 = record[1].parse().ok().filter(|y: &f64| y.is_finite()).ok_or_else(|| {
            FormatError::Invalid(format!("labels row {}: {:?} is not a finite number", i + 2, &record[1]))
        })?;
        if !seen.insert(id.clone()) {
            return Err(FormatError::Invalid(format!("duplicate label id {id}")));
        }
        labels.push((id, y));
    }
    Ok(labels)
}

/// Predictions CSV `id,prediction`, shortest round-trip decimal values.
pub fn write_predictions<W: Write>(w: W, ids: &[String], predictions: &[f64]) -> Result<(), FormatError> {
    let mut out = csv_writer(w);
    out.write_record(["id", "prediction"])?;
    for (id, p) in ids.iter().zip(predictions) {
        out.write_record([id.as_str(), &format!("{p}")])?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}
