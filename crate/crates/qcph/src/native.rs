//! The native JSON structure format:
//!
//! ```json
//! {"name":"x","cell":{"a":10,"b":20,"c":30,"alpha":90,"beta":90,"gamma":90},
//!  "atoms":[{"element":"Pb","frac":[0,0,0]}]}
//! ```

use qcph_core::structure::StructureError;
use qcph_core::{Atom, CellParams, CrystalStructure};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::formats::format_significant;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NativeError {
    #[error("invalid JSON: {0}")]
    Json(String),
    /// Names the offending location as a JSON pointer.
    #[error("schema violation at {0}")]
    SchemaViolation(String),
    #[error(transparent)]
    Structure(#[from] StructureError),
}

const CELL_KEYS: [&str; 6] = ["a", "b", "c", "alpha", "beta", "gamma"];
const SIGNIFICANT_DIGITS: usize = 12;

fn violation(pointer: impl Into<String>) -> NativeError {
    NativeError::SchemaViolation(pointer.into())
}

fn object<'a>(v: &'a Value, pointer: &str, keys: &[&str]) -> Result<&'a Map<String, Value>, NativeError> {
    let map = v.as_object().ok_or_else(|| violation(pointer))?;
    if let Some(extra) = map.keys().find(|k| !keys.contains(&k.as_str())) {
        return Err(violation(format!("{pointer}/{extra}")));
    }
    Ok(map)
}

fn field<'a>(map: &'a Map<String, Value>, pointer: &str, key: &str) -> Result<&'a Value, NativeError> {
    map.get(key).ok_or_else(|| violation(format!("{pointer}/{key}")))
}

fn number(v: &Value, pointer: &str) -> Result<f64, NativeError> {
    v.as_f64().filter(|x| x.is_finite()).ok_or_else(|| violation(pointer))
}

pub fn parse_native(text: &str) -> Result<CrystalStructure, NativeError> {
    let root: Value = serde_json::from_str(text).map_err(|e| NativeError::Json(e.to_string()))?;
    let root = object(&root, "", &["name", "cell", "atoms"])?;

    let name = field(root, "", "name")?.as_str().ok_or_else(|| violation("/name"))?;

    let cell = object(field(root, "", "cell")?, "/cell", &CELL_KEYS)?;
    let mut params = [0.0; 6];
    for (slot, key) in params.iter_mut().zip(CELL_KEYS) {
        let pointer = format!("/cell/{key}");
        let x = number(field(cell, "/cell", key)?, &pointer)?;
        let ok = if key.len() == 1 { x > 0.0 } else { x > 0.0 && x < 180.0 };
        if !ok {
            return Err(violation(pointer));
        }
        *slot = x;
    }

    let atoms_value = field(root, "", "atoms")?.as_array().ok_or_else(|| violation("/atoms"))?;
    let mut atoms = Vec::with_capacity(atoms_value.len());
    for (i, a) in atoms_value.iter().enumerate() {
        let pointer = format!("/atoms/{i}");
        let a = object(a, &pointer, &["element", "frac"])?;
        let element = field(a, &pointer, "element")?
            .as_str()
            .filter(|s| !s.is_empty())
            .ok_or_else(|| violation(format!("{pointer}/element")))?;
        let frac_value = field(a, &pointer, "frac")?
            .as_array()
            .filter(|f| f.len() == 3)
            .ok_or_else(|| violation(format!("{pointer}/frac")))?;
        let mut frac = [0.0; 3];
        for (k, (slot, v)) in frac.iter_mut().zip(frac_value).enumerate() {
            *slot = number(v, &format!("{pointer}/frac/{k}"))?;
        }
        atoms.push(Atom::new(element, frac));
    }

    let [a, b, c, alpha, beta, gamma] = params;
    Ok(CrystalStructure::new(name, CellParams::new(a, b, c, alpha, beta, gamma), atoms)?)
}

/// Compact native JSON with keys in schema order and numbers rounded to 12
/// significant digits, followed by a newline.
pub fn serialize_native(s: &CrystalStructure) -> String {
    let num = |x: f64| format_significant(x, SIGNIFICANT_DIGITS);
    let c = &s.cell;
    let mut out = format!(
        "{{\"name\":{},\"cell\":{{\"a\":{},\"b\":{},\"c\":{},\"alpha\":{},\"beta\":{},\"gamma\":{}}},\"atoms\":[",
        Value::String(s.name.clone()),
        num(c.a),
        num(c.b),
        num(c.c),
        num(c.alpha),
        num(c.beta),
        num(c.gamma),
    );
    for (i, a) in s.atoms.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&format!(
            "{{\"element\":{},\"frac\":[{},{},{}]}}",
            Value::String(a.element.clone()),
            num(a.frac[0]),
            num(a.frac[1]),
            num(a.frac[2]),
        ));
    }
    out.push_str("]}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"{"name":"x","cell":{"a":10,"b":20,"c":30,"alpha":90,"beta":90,"gamma":90},"atoms":[{"element":"Pb","frac":[0,0,0]}]}"#;

    #[test]
    fn example_document() {
        let s = parse_native(EXAMPLE).unwrap();
        assert_eq!(s.name, "x");
        assert_eq!(s.cell, CellParams::new(10.0, 20.0, 30.0, 90.0, 90.0, 90.0));
        assert_eq!(s.atoms, vec![Atom::new("Pb", [0.0; 3])]);
        assert_eq!(serialize_native(&s), format!("{EXAMPLE}\n"));
    }

    #[test]
    fn empty_atom_list_is_accepted() {
        let s = parse_native(&EXAMPLE.replace(r#"{"element":"Pb","frac":[0,0,0]}"#, "")).unwrap();
        assert!(s.atoms.is_empty());
    }

    #[test]
    fn pointers() {
        let cases = [
            (EXAMPLE.replace("\"alpha\":90", "\"alpha\":0"), "/cell/alpha"),
            (EXAMPLE.replace("\"a\":10,", ""), "/cell/a"),
            (EXAMPLE.replace("[0,0,0]", "[0,\"y\",0]"), "/atoms/0/frac/1"),
            (EXAMPLE.replace("[0,0,0]", "[0,0]"), "/atoms/0/frac"),
            (EXAMPLE.replace("\"name\":\"x\"", "\"name\":3"), "/name"),
            (EXAMPLE.replace("\"name\"", "\"title\""), "/title"),
        ];
        for (text, pointer) in cases {
            assert_eq!(parse_native(&text), Err(NativeError::SchemaViolation(pointer.into())), "{text}");
        }
    }

    #[test]
    fn canonicalises_and_wraps() {
        let text = EXAMPLE.replace("\"Pb\",\"frac\":[0,0,0]", "\"pb\",\"frac\":[1.25,-0.5,0]");
        let s = parse_native(&text).unwrap();
        assert_eq!(s.atoms, vec![Atom::new("Pb", [0.25, 0.5, 0.0])]);
    }
}
