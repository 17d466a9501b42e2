//! Lattice bases, element-specific atom sets and the extended motif
//! `V = M ∪ (M + v1) ∪ (M + v2) ∪ (M + v3)` with its periodic classes.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use thiserror::Error;

use crate::math::{self, Vec3};
use crate::structure::{CellParams, CrystalStructure};

/// Componentwise fractional residual below which a difference counts as a
/// lattice vector.
pub const LATTICE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PeriodicError {
    #[error("degenerate cell: angles do not describe a parallelepiped of positive volume")]
    DegenerateCell,
    #[error("unknown atom set `{0}`")]
    UnknownAtomSet(String),
    #[error("motif is empty")]
    EmptyMotif,
}

/// Cartesian lattice vectors (Å). `v1` lies along x, `v2` in the xy-plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeBasis {
    pub v1: Vec3,
    pub v2: Vec3,
    pub v3: Vec3,
}

impl LatticeBasis {
    pub fn vectors(&self) -> [Vec3; 3] {
        [self.v1, self.v2, self.v3]
    }

    pub fn determinant(&self) -> f64 {
        math::dot(self.v1, math::cross(self.v2, self.v3))
    }

    pub fn to_cartesian(&self, frac: [f64; 3]) -> Vec3 {
        let mut p = [0.0; 3];
        for (f, v) in frac.iter().zip(self.vectors()) {
            for k in 0..3 {
                p[k] += f * v[k];
            }
        }
        p
    }

    /// Applies a linear map (row-major 3×3) to every basis vector.
    pub fn transformed(&self, m: &[[f64; 3]; 3]) -> LatticeBasis {
        let apply = |v: Vec3| {
            [math::dot(m[0], v), math::dot(m[1], v), math::dot(m[2], v)]
        };
        LatticeBasis { v1: apply(self.v1), v2: apply(self.v2), v3: apply(self.v3) }
    }
}

/// Conventional orientation of a cell: `v1 = (a, 0, 0)`, `v2` in the xy-plane.
pub fn cell_basis(cell: &CellParams) -> Result<LatticeBasis, PeriodicError> {
    if cell.validate().is_err() {
        return Err(PeriodicError::DegenerateCell);
    }
    let (ca, cb, cg) = (
        math::cos_deg(cell.alpha),
        math::cos_deg(cell.beta),
        math::cos_deg(cell.gamma),
    );
    let sg = math::sin_deg(cell.gamma);
    let v1 = [cell.a, 0.0, 0.0];
    let v2 = [cell.b * cg, cell.b * sg, 0.0];
    let cx = cell.c * cb;
    let cy = cell.c * (ca - cb * cg) / sg;
    let cz2 = cell.c * cell.c - cx * cx - cy * cy;
    if cz2.is_nan() || cz2 <= 0.0 {
        return Err(PeriodicError::DegenerateCell);
    }
    let basis = LatticeBasis { v1, v2, v3: [cx, cy, math::sqrt(cz2)] };
    if basis.determinant().is_nan() || basis.determinant() <= 0.0 {
        return Err(PeriodicError::DegenerateCell);
    }
    Ok(basis)
}

/// The element-specific atom selections used for descriptors.
///
/// `B` is the inorganic B-site (anything that is not C, H, N, O or a
/// halogen), `X` the halide site (Cl, Br, I) and `A_C` the carbon of the
/// organic A-site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AtomSet {
    ACB,
    ACX,
    BX,
    ACBX,
    C,
    O,
    N,
    BSite,
    Bi,
    Cd,
    Ge,
    Pb,
    Sn,
    XSite,
    Cl,
    Br,
    I,
}

impl AtomSet {
    pub const ALL: [AtomSet; 17] = [
        AtomSet::ACB,
        AtomSet::ACX,
        AtomSet::BX,
        AtomSet::ACBX,
        AtomSet::C,
        AtomSet::O,
        AtomSet::N,
        AtomSet::BSite,
        AtomSet::Bi,
        AtomSet::Cd,
        AtomSet::Ge,
        AtomSet::Pb,
        AtomSet::Sn,
        AtomSet::XSite,
        AtomSet::Cl,
        AtomSet::Br,
        AtomSet::I,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            AtomSet::ACB => "A_C-B",
            AtomSet::ACX => "A_C-X",
            AtomSet::BX => "B-X",
            AtomSet::ACBX => "A_C-B-X",
            AtomSet::C => "C",
            AtomSet::O => "O",
            AtomSet::N => "N",
            AtomSet::BSite => "B",
            AtomSet::Bi => "Bi",
            AtomSet::Cd => "Cd",
            AtomSet::Ge => "Ge",
            AtomSet::Pb => "Pb",
            AtomSet::Sn => "Sn",
            AtomSet::XSite => "X",
            AtomSet::Cl => "Cl",
            AtomSet::Br => "Br",
            AtomSet::I => "I",
        }
    }

    pub fn matches(self, element: &str) -> bool {
        match self {
            AtomSet::ACB => is_a_site(element) || is_b_site(element),
            AtomSet::ACX => is_a_site(element) || is_x_site(element),
            AtomSet::BX => is_b_site(element) || is_x_site(element),
            AtomSet::ACBX => is_a_site(element) || is_b_site(element) || is_x_site(element),
            AtomSet::BSite => is_b_site(element),
            AtomSet::XSite => is_x_site(element),
            single => single.tag() == element,
        }
    }
}

impl fmt::Display for AtomSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for AtomSet {
    type Err = PeriodicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AtomSet::ALL
            .iter()
            .copied()
            .find(|set| set.tag() == s)
            .ok_or_else(|| PeriodicError::UnknownAtomSet(String::from(s)))
    }
}

fn is_a_site(element: &str) -> bool {
    element == "C"
}

fn is_x_site(element: &str) -> bool {
    matches!(element, "Cl" | "Br" | "I")
}

fn is_b_site(element: &str) -> bool {
    !matches!(element, "C" | "H" | "N" | "O" | "F" | "Cl" | "Br" | "I")
}

/// Atoms of one selection inside the unit cell, in Cartesian coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Motif {
    pub points: Vec<Vec3>,
    pub frac: Vec<[f64; 3]>,
    pub elements: Vec<String>,
    pub atom_set_tag: String,
}

impl Motif {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Builds a motif from every atom accepted by `keep`.
    pub fn from_predicate(
        structure: &CrystalStructure,
        basis: &LatticeBasis,
        tag: &str,
        keep: impl Fn(&str) -> bool,
    ) -> Motif {
        let mut motif = Motif {
            points: Vec::new(),
            frac: Vec::new(),
            elements: Vec::new(),
            atom_set_tag: String::from(tag),
        };
        for atom in structure.atoms.iter().filter(|a| keep(&a.element)) {
            motif.points.push(basis.to_cartesian(atom.frac));
            motif.frac.push(atom.frac);
            motif.elements.push(atom.element.clone());
        }
        motif
    }
}

/// Selects the atoms of `set`; an empty result is returned (not an error)
/// and logged.
pub fn select_atom_set(structure: &CrystalStructure, basis: &LatticeBasis, set: AtomSet) -> Motif {
    let motif = Motif::from_predicate(structure, basis, set.tag(), |e| set.matches(e));
    if motif.is_empty() {
        log::debug!("{}: atom set {} is empty", structure.name, set);
    }
    motif
}

/// The extended motif: the original points followed by their translates by
/// `v1`, `v2` and `v3`, in that order.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedMotif {
    pub points: Vec<Vec3>,
    pub in_original: Vec<bool>,
    pub class_id: Vec<u32>,
    pub basis: LatticeBasis,
}

impl ExtendedMotif {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn class_count(&self) -> usize {
        self.class_id.iter().map(|&c| c as usize + 1).max().unwrap_or(0)
    }

    /// Members of each class, ascending, indexed by class id.
    pub fn classes(&self) -> Vec<Vec<u32>> {
        let mut classes = alloc::vec![Vec::new(); self.class_count()];
        for (i, &c) in self.class_id.iter().enumerate() {
            classes[c as usize].push(i as u32);
        }
        classes
    }
}

fn is_lattice_vector(diff: [f64; 3]) -> bool {
    diff.iter().all(|d| (d - math::round(*d)).abs() < LATTICE_TOLERANCE)
}

/// Extends a motif by its three basis translates. Motif points that already
/// coincide modulo the lattice are collapsed to the first occurrence.
pub fn extend_motif(motif: &Motif, basis: &LatticeBasis) -> Result<ExtendedMotif, PeriodicError> {
    if motif.is_empty() {
        return Err(PeriodicError::EmptyMotif);
    }
    let mut originals: Vec<usize> = Vec::with_capacity(motif.len());
    for i in 0..motif.len() {
        let collides = originals.iter().any(|&j| {
            let f = motif.frac[i];
            let g = motif.frac[j];
            is_lattice_vector([f[0] - g[0], f[1] - g[1], f[2] - g[2]])
        });
        if collides {
            log::warn!(
                "motif point {} ({}) coincides with another modulo the lattice; collapsed",
                i,
                motif.elements[i]
            );
        } else {
            originals.push(i);
        }
    }

    let m = originals.len();
    let mut points = Vec::with_capacity(4 * m);
    let mut in_original = Vec::with_capacity(4 * m);
    let mut class_id = Vec::with_capacity(4 * m);
    for (copy, shift) in [[0.0; 3], basis.v1, basis.v2, basis.v3].into_iter().enumerate() {
        for (class, &i) in originals.iter().enumerate() {
            points.push(math::add(motif.points[i], shift));
            in_original.push(copy == 0);
            class_id.push(class as u32);
        }
    }
    Ok(ExtendedMotif { points, in_original, class_id, basis: *basis })
}
