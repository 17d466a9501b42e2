//! Crystal structure records: cell parameters plus a typed atom list in
//! fractional coordinates.
//!
//! Construction through [`CrystalStructure::new`] enforces the record
//! invariants: positive lengths, angles strictly inside (0°, 180°), coordinates
//! reduced into `[0, 1)`, canonical element capitalisation and removal of
//! same-element duplicates closer than [`DEDUP_TOLERANCE`] Å.

use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::math;

/// Minimum separation (Å) below which two same-element sites are merged.
pub const DEDUP_TOLERANCE: f64 = 1e-6;

const ELEMENTS: [&str; 118] = [
    "H", "He", "Li", "Be", "B", "C", "N", "O", "F", "Ne", "Na", "Mg", "Al", "Si", "P", "S", "Cl",
    "Ar", "K", "Ca", "Sc", "Ti", "V", "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As",
    "Se", "Br", "Kr", "Rb", "Sr", "Y", "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd", "In",
    "Sn", "Sb", "Te", "I", "Xe", "Cs", "Ba", "La", "Ce", "Pr", "Nd", "Pm", "Sm", "Eu", "Gd", "Tb",
    "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf", "Ta", "W", "Re", "Os", "Ir", "Pt", "Au", "Hg", "Tl",
    "Pb", "Bi", "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa", "U", "Np", "Pu", "Am", "Cm", "Bk",
    "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf", "Db", "Sg", "Bh", "Hs", "Mt", "Ds", "Rg", "Cn", "Nh",
    "Fl", "Mc", "Lv", "Ts", "Og",
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StructureError {
    #[error("cell parameter {name} = {value} is out of range")]
    InvalidCell { name: &'static str, value: f64 },
    #[error("atom {index}: fractional coordinate is not finite")]
    NonFiniteCoordinate { index: usize },
}

/// Unit-cell lengths in Å and angles in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl CellParams {
    pub fn new(a: f64, b: f64, c: f64, alpha: f64, beta: f64, gamma: f64) -> Self {
        CellParams { a, b, c, alpha, beta, gamma }
    }

    /// Checks lengths are positive and angles lie strictly between 0 and 180.
    pub fn validate(&self) -> Result<(), StructureError> {
        for (name, value) in [("a", self.a), ("b", self.b), ("c", self.c)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(StructureError::InvalidCell { name, value });
            }
        }
        for (name, value) in [("alpha", self.alpha), ("beta", self.beta), ("gamma", self.gamma)] {
            if !(value.is_finite() && value > 0.0 && value < 180.0) {
                return Err(StructureError::InvalidCell { name, value });
            }
        }
        Ok(())
    }

    /// Squared length of a fractional displacement under the cell metric.
    fn metric_norm2(&self, d: [f64; 3]) -> f64 {
        let (ca, cb, cg) = (
            math::cos_deg(self.alpha),
            math::cos_deg(self.beta),
            math::cos_deg(self.gamma),
        );
        let (x, y, z) = (d[0] * self.a, d[1] * self.b, d[2] * self.c);
        x * x + y * y + z * z + 2.0 * (x * y * cg + x * z * cb + y * z * ca)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub element: String,
    pub frac: [f64; 3],
}

impl Atom {
    pub fn new(element: impl Into<String>, frac: [f64; 3]) -> Self {
        Atom { element: element.into(), frac }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrystalStructure {
    pub name: String,
    pub cell: CellParams,
    pub atoms: Vec<Atom>,
}

impl CrystalStructure {
    /// Validates the cell and normalises the atom list (wrap, canonical
    /// symbols, same-element deduplication). Atom order is preserved.
    pub fn new(
        name: impl Into<String>,
        cell: CellParams,
        atoms: Vec<Atom>,
    ) -> Result<Self, StructureError> {
        cell.validate()?;
        let mut kept: Vec<Atom> = Vec::with_capacity(atoms.len());
        for (index, atom) in atoms.into_iter().enumerate() {
            if atom.frac.iter().any(|x| !x.is_finite()) {
                return Err(StructureError::NonFiniteCoordinate { index });
            }
            let atom = Atom {
                element: canonical_element(&atom.element),
                frac: wrap_frac(atom.frac),
            };
            let duplicate = kept.iter().any(|k| {
                k.element == atom.element && {
                    let d: [f64; 3] = core::array::from_fn(|i| {
                        let x = atom.frac[i] - k.frac[i];
                        x - math::round(x)
                    });
                    cell.metric_norm2(d).abs() < DEDUP_TOLERANCE * DEDUP_TOLERANCE
                }
            });
            if duplicate {
                log::warn!(
                    "dropping duplicate {} site at {:?} (index {})",
                    atom.element,
                    atom.frac,
                    index
                );
                continue;
            }
            kept.push(atom);
        }
        Ok(CrystalStructure { name: name.into(), cell, atoms: kept })
    }

    /// Element symbols that are not in the periodic table, in atom order.
    pub fn unknown_elements(&self) -> Vec<&str> {
        self.atoms
            .iter()
            .map(|a| a.element.as_str())
            .filter(|e| !is_known_element(e))
            .collect()
    }
}

/// Reduces a coordinate into `[0, 1)`.
pub fn wrap_coordinate(x: f64) -> f64 {
    let w = x - math::floor(x);
    // x slightly below an integer can round up to exactly 1.0
    if w >= 1.0 {
        0.0
    } else {
        w
    }
}

pub fn wrap_frac(frac: [f64; 3]) -> [f64; 3] {
    [wrap_coordinate(frac[0]), wrap_coordinate(frac[1]), wrap_coordinate(frac[2])]
}

pub fn is_known_element(symbol: &str) -> bool {
    ELEMENTS.contains(&symbol)
}

/// Capitalises a symbol ("pb" -> "Pb") when the result is a known element;
/// anything else is returned verbatim.
pub fn canonical_element(symbol: &str) -> String {
    let trimmed = symbol.trim();
    let mut chars = trimmed.chars();
    let candidate: String = match chars.next() {
        Some(first) => first
            .to_uppercase()
            .chain(chars.flat_map(|c| c.to_lowercase()))
            .collect(),
        None => String::new(),
    };
    if is_known_element(&candidate) {
        candidate
    } else {
        String::from(trimmed)
    }
}
