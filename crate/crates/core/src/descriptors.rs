//! Quotient-complex descriptors: statistics and Betti curves of the
//! quotient barcodes of every configured atom set, followed by unit-cell
//! edge lengths.
//!
//! Slot layout per atom set is fixed: 20 collections × 7 statistics, then
//! for each of `pb0`, `pb1_fin`, `pb1_inf`, `pb2` the Betti curve and its
//! normalised variant sampled at `bins` points. The seven `cell.*` slots come
//! last. Layout depends only on the configuration.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::filtration::quotient_pair;
use crate::math::{self, Vec3};
use crate::periodic::{cell_basis, extend_motif, select_atom_set, AtomSet, LatticeBasis, Motif, PeriodicError};
use crate::persistence::{reduce, Barcode, BarcodeSet};
use crate::structure::CrystalStructure;

pub const STAT_NAMES: [&str; 7] = ["max", "min", "q25", "q50", "q75", "mean", "std"];
pub const BARCODE_NAMES: [&str; 4] = ["pb0", "pb1_fin", "pb1_inf", "pb2"];
const PB0_COLLECTIONS: [&str; 2] = ["death", "death_norm"];
const PB1_INF_COLLECTIONS: [&str; 2] = ["birth", "birth_norm"];
const FINITE_COLLECTIONS: [&str; 8] =
    ["birth", "birth_norm", "death", "death_norm", "mid", "mid_norm", "life", "life_norm"];

/// Number of statistical slots per atom set.
pub const STAT_SLOTS: usize = 20 * 7;
pub const CELL_SLOTS: usize = 7;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FeatureError {
    #[error(transparent)]
    Periodic(#[from] PeriodicError),
    #[error("invalid descriptor configuration: {0}")]
    InvalidConfig(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StatDescriptor {
    pub max: f64,
    pub min: f64,
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
    pub mean: f64,
    pub std: f64,
}

impl StatDescriptor {
    pub fn as_array(&self) -> [f64; 7] {
        [self.max, self.min, self.q25, self.q50, self.q75, self.mean, self.std]
    }
}

/// Linear interpolation between closest ranks on sorted data
/// (position `p·(n−1)`).
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = math::floor(pos) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Max, min, quartiles, mean and population standard deviation; all zero
/// for an empty collection.
pub fn stat_descriptor(collection: &[f64]) -> StatDescriptor {
    if collection.is_empty() {
        return StatDescriptor::default();
    }
    let mut sorted = collection.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mean = sorted.iter().sum::<f64>() / n;
    let var = sorted.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    StatDescriptor {
        max: sorted[sorted.len() - 1],
        min: sorted[0],
        q25: quantile_sorted(&sorted, 0.25),
        q50: quantile_sorted(&sorted, 0.5),
        q75: quantile_sorted(&sorted, 0.75),
        mean,
        std: math::sqrt(var),
    }
}

/// Each element divided by the collection sum; zeros when the sum is zero.
pub fn normalized(collection: &[f64]) -> Vec<f64> {
    let mut sorted = collection.to_vec();
    sorted.sort_by(f64::total_cmp);
    let total: f64 = sorted.iter().sum();
    if total == 0.0 {
        return vec![0.0; collection.len()];
    }
    collection.iter().map(|x| x / total).collect()
}

/// One named multiset extracted from a barcode.
#[derive(Debug, Clone, PartialEq)]
pub struct Collection {
    pub barcode: &'static str,
    pub name: &'static str,
    pub values: Vec<f64>,
}

fn push_pair(out: &mut Vec<Collection>, barcode: &'static str, names: [&'static str; 2], values: Vec<f64>) {
    let norm = normalized(&values);
    out.push(Collection { barcode, name: names[0], values });
    out.push(Collection { barcode, name: names[1], values: norm });
}

fn finite_collections(out: &mut Vec<Collection>, barcode: &'static str, pb: &Barcode) {
    let finite: Vec<_> = pb.intervals().iter().filter(|i| !i.is_essential()).collect();
    let births = finite.iter().map(|i| i.birth).collect();
    let deaths = finite.iter().map(|i| i.death).collect();
    let mids = finite.iter().map(|i| (i.birth + i.death) / 2.0).collect();
    let lives = finite.iter().map(|i| i.death - i.birth).collect();
    let names = FINITE_COLLECTIONS;
    push_pair(out, barcode, [names[0], names[1]], births);
    push_pair(out, barcode, [names[2], names[3]], deaths);
    push_pair(out, barcode, [names[4], names[5]], mids);
    push_pair(out, barcode, [names[6], names[7]], lives);
}

/// The twenty collections summarised by statistics, in slot order.
pub fn barcode_collections(bs: &BarcodeSet) -> Vec<Collection> {
    let mut out = Vec::with_capacity(20);
    let deaths = bs.pb0.intervals().iter().filter(|i| !i.is_essential()).map(|i| i.death).collect();
    push_pair(&mut out, "pb0", PB0_COLLECTIONS, deaths);
    finite_collections(&mut out, "pb1_fin", &bs.pb1_finite);
    let births = bs.pb1_inf.intervals().iter().map(|i| i.birth).collect();
    push_pair(&mut out, "pb1_inf", PB1_INF_COLLECTIONS, births);
    if bs.pb2.intervals().iter().any(|i| i.is_essential()) {
        log::warn!("essential degree-2 intervals excluded from statistics");
    }
    finite_collections(&mut out, "pb2", &bs.pb2);
    out
}

/// Betti curve sampled at `t_i = i·T/bins`; the normalised curve divides by
/// the number of intervals.
pub fn betti_curve(pb: &Barcode, max_value: f64, bins: usize, normalize: bool) -> Vec<f64> {
    let total = pb.len();
    (0..bins)
        .map(|i| {
            let t = i as f64 * max_value / bins as f64;
            let count = pb.betti_at(t) as f64;
            if !normalize {
                count
            } else if total == 0 {
                0.0
            } else {
                count / total as f64
            }
        })
        .collect()
}

/// `(|v1|, |v2|, |v3|, |v1+v2|, |v1+v3|, |v2+v3|, |v1+v2+v3|)` after
/// relabelling so that `|v1| <= |v2| <= |v3|`.
pub fn unit_cell_features(basis: &LatticeBasis) -> [f64; 7] {
    let mut v: [Vec3; 3] = basis.vectors();
    v.sort_by(|a, b| math::norm(*a).total_cmp(&math::norm(*b)));
    [
        math::norm(v[0]),
        math::norm(v[1]),
        math::norm(v[2]),
        math::norm(math::add(v[0], v[1])),
        math::norm(math::add(v[0], v[2])),
        math::norm(math::add(v[1], v[2])),
        math::norm(math::add(math::add(v[0], v[1]), v[2])),
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct DescriptorConfig {
    pub atom_sets: Vec<AtomSet>,
    /// Truncation scale T (Å) of the Rips filtration and Betti curves.
    pub max_filtration: f64,
    pub bins: usize,
    pub max_dim: usize,
}

impl Default for DescriptorConfig {
    fn default() -> Self {
        DescriptorConfig {
            atom_sets: AtomSet::ALL.to_vec(),
            max_filtration: 10.0,
            bins: 100,
            max_dim: 3,
        }
    }
}

impl DescriptorConfig {
    pub fn validate(&self) -> Result<(), FeatureError> {
        if !(self.max_filtration.is_finite() && self.max_filtration > 0.0) {
            return Err(FeatureError::InvalidConfig("max_filtration must be positive"));
        }
        if self.bins == 0 {
            return Err(FeatureError::InvalidConfig("betti_bins must be at least 1"));
        }
        if !(1..=3).contains(&self.max_dim) {
            return Err(FeatureError::InvalidConfig("max_dim must be 1, 2 or 3"));
        }
        Ok(())
    }

    pub fn slots_per_atom_set(&self) -> usize {
        STAT_SLOTS + BARCODE_NAMES.len() * 2 * self.bins
    }

    pub fn feature_len(&self) -> usize {
        self.atom_sets.len() * self.slots_per_atom_set() + CELL_SLOTS
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub names: Vec<String>,
    pub values: Vec<f64>,
}

/// Slot names for a configuration, in slot order.
pub fn feature_names(config: &DescriptorConfig) -> Vec<String> {
    let mut names = Vec::with_capacity(config.feature_len());
    for set in &config.atom_sets {
        let tag = set.tag();
        for (barcode, collections) in [
            ("pb0", &PB0_COLLECTIONS[..]),
            ("pb1_fin", &FINITE_COLLECTIONS[..]),
            ("pb1_inf", &PB1_INF_COLLECTIONS[..]),
            ("pb2", &FINITE_COLLECTIONS[..]),
        ] {
            for collection in collections {
                for stat in STAT_NAMES {
                    names.push(format!("{tag}.{barcode}.{collection}.{stat}"));
                }
            }
        }
        for barcode in BARCODE_NAMES {
            for variant in ["bc", "nbc"] {
                for i in 0..config.bins {
                    names.push(format!("{tag}.{barcode}.{variant}.{i}"));
                }
            }
        }
    }
    for k in 0..CELL_SLOTS {
        names.push(format!("cell.{k}"));
    }
    names
}

/// Plain and quotient barcodes of one motif.
pub fn quotient_barcodes(
    motif: &Motif,
    basis: &LatticeBasis,
    max_filtration: f64,
    max_dim: usize,
) -> Result<(BarcodeSet, BarcodeSet), PeriodicError> {
    let em = extend_motif(motif, basis)?;
    let (plain, glued) = quotient_pair(&em, max_filtration, max_dim);
    Ok((reduce(&plain), reduce(&glued)))
}

/// Descriptor slots of one atom set computed from its quotient barcodes.
pub fn atom_set_block(bs: &BarcodeSet, config: &DescriptorConfig) -> Vec<f64> {
    let mut out = Vec::with_capacity(config.slots_per_atom_set());
    for c in barcode_collections(bs) {
        out.extend_from_slice(&stat_descriptor(&c.values).as_array());
    }
    for pb in [&bs.pb0, &bs.pb1_finite, &bs.pb1_inf, &bs.pb2] {
        out.extend(betti_curve(pb, config.max_filtration, config.bins, false));
        out.extend(betti_curve(pb, config.max_filtration, config.bins, true));
    }
    out
}

/// The slots contributed by `set`; all zero when the structure has no atom
/// of that set.
pub fn atom_set_features(
    structure: &CrystalStructure,
    basis: &LatticeBasis,
    set: AtomSet,
    config: &DescriptorConfig,
) -> Vec<f64> {
    let motif = select_atom_set(structure, basis, set);
    if motif.is_empty() {
        return vec![0.0; config.slots_per_atom_set()];
    }
    match quotient_barcodes(&motif, basis, config.max_filtration, config.max_dim) {
        Ok((_, quotient)) => atom_set_block(&quotient, config),
        Err(_) => vec![0.0; config.slots_per_atom_set()],
    }
}

/// Full descriptor vector of a structure.
pub fn assemble_features(
    structure: &CrystalStructure,
    config: &DescriptorConfig,
) -> Result<FeatureVector, FeatureError> {
    config.validate()?;
    let basis = cell_basis(&structure.cell)?;
    let mut values = Vec::with_capacity(config.feature_len());
    for &set in &config.atom_sets {
        values.extend(atom_set_features(structure, &basis, set, config));
    }
    values.extend_from_slice(&unit_cell_features(&basis));
    Ok(FeatureVector { names: feature_names(config), values })
}
