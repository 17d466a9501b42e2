//! Persistent homology over Z₂ by boundary-matrix column reduction.
//!
//! Columns are sorted lists of row indices; the pivot is the last entry.
//! Dimensions are reduced from the top down and every pivot row found while
//! reducing dimension `q` is cleared before dimension `q - 1` is visited, so
//! columns that are known to be cycles are never reduced.

use alloc::vec;
use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::filtration::Filtration;

/// A persistence interval; `death == +∞` for essential classes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub birth: f64,
    pub death: f64,
}

impl Interval {
    pub fn new(birth: f64, death: f64) -> Interval {
        Interval { birth, death }
    }

    pub fn is_essential(&self) -> bool {
        self.death == f64::INFINITY
    }

    pub fn is_alive_at(&self, t: f64) -> bool {
        self.birth <= t && t < self.death
    }

    fn cmp_key(&self, other: &Interval) -> core::cmp::Ordering {
        self.birth.total_cmp(&other.birth).then(self.death.total_cmp(&other.death))
    }
}

/// A multiset of intervals of one homology degree, kept sorted by
/// `(birth, death)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Barcode {
    pub degree: u8,
    intervals: Vec<Interval>,
}

impl Barcode {
    /// Drops zero-length intervals and sorts the rest.
    pub fn new(degree: u8, intervals: impl IntoIterator<Item = Interval>) -> Barcode {
        let mut intervals: Vec<Interval> =
            intervals.into_iter().filter(|i| i.birth < i.death).collect();
        intervals.sort_by(Interval::cmp_key);
        Barcode { degree, intervals }
    }

    pub fn empty(degree: u8) -> Barcode {
        Barcode { degree, intervals: Vec::new() }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Number of intervals with `birth <= t < death`.
    pub fn betti_at(&self, t: f64) -> usize {
        self.intervals.iter().filter(|i| i.is_alive_at(t)).count()
    }

    /// Multiset inclusion with exact value comparison.
    pub fn is_submultiset_of(&self, other: &Barcode) -> bool {
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.intervals, &other.intervals);
        while i < a.len() {
            if j == b.len() {
                return false;
            }
            match a[i].cmp_key(&b[j]) {
                core::cmp::Ordering::Equal => {
                    i += 1;
                    j += 1;
                }
                core::cmp::Ordering::Greater => j += 1,
                core::cmp::Ordering::Less => return false,
            }
        }
        true
    }

    /// Multiset difference `self \ other`.
    pub fn difference(&self, other: &Barcode) -> Barcode {
        let mut rest = Vec::new();
        let mut j = 0;
        let b = &other.intervals;
        for a in &self.intervals {
            while j < b.len() && b[j].cmp_key(a) == core::cmp::Ordering::Less {
                j += 1;
            }
            if j < b.len() && b[j].cmp_key(a) == core::cmp::Ordering::Equal {
                j += 1;
            } else {
                rest.push(*a);
            }
        }
        Barcode { degree: self.degree, intervals: rest }
    }

    /// Multiset union.
    pub fn union(&self, other: &Barcode) -> Barcode {
        Barcode::new(self.degree, self.intervals.iter().chain(other.intervals.iter()).copied())
    }
}

/// Barcodes of degrees 0–2 with the finite/essential split of degree 1.
#[derive(Debug, Clone, PartialEq)]
pub struct BarcodeSet {
    pub pb0: Barcode,
    pub pb1: Barcode,
    pub pb2: Barcode,
    pub pb1_finite: Barcode,
    pub pb1_inf: Barcode,
    /// Degree-2 intervals may be missing deaths: the filtration stops below
    /// dimension three.
    pub pb2_incomplete: bool,
    /// Some degree-2 class survives to the truncation scale and is reported
    /// as essential.
    pub pb2_truncated: bool,
}

impl BarcodeSet {
    pub fn barcode(&self, degree: usize) -> &Barcode {
        match degree {
            0 => &self.pb0,
            1 => &self.pb1,
            2 => &self.pb2,
            _ => panic!("barcodes are kept for degrees 0 to 2 only"),
        }
    }

    pub fn betti_at(&self, t: f64) -> [usize; 3] {
        [self.pb0.betti_at(t), self.pb1.betti_at(t), self.pb2.betti_at(t)]
    }
}

/// Splits a degree-1 barcode into its finite and essential parts.
pub fn decompose_pb1(pb1: &Barcode) -> (Barcode, Barcode) {
    let (inf, fin): (Vec<Interval>, Vec<Interval>) =
        pb1.intervals().iter().partition(|i| i.is_essential());
    (Barcode::new(pb1.degree, fin), Barcode::new(pb1.degree, inf))
}

const NONE: usize = usize::MAX;

/// Column `a += b` over Z₂, both sorted ascending.
fn add_column(a: &mut Vec<usize>, b: &[usize], scratch: &mut Vec<usize>) {
    scratch.clear();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            core::cmp::Ordering::Less => {
                scratch.push(a[i]);
                i += 1;
            }
            core::cmp::Ordering::Greater => {
                scratch.push(b[j]);
                j += 1;
            }
            core::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    scratch.extend_from_slice(&a[i..]);
    scratch.extend_from_slice(&b[j..]);
    core::mem::swap(a, scratch);
}

/// Persistence pairs `(birth index, death index)` and essential births of a
/// filtration, indices into `f.simplices()`.
pub fn persistence_pairs(f: &Filtration) -> (Vec<(usize, usize)>, Vec<usize>) {
    let simplices = f.simplices();
    let n = simplices.len();
    let mut index: HashMap<[u32; 4], usize> = HashMap::with_capacity(n);
    for (i, s) in simplices.iter().enumerate() {
        index.insert(s.key(), i);
    }
    let top = f.max_dim().unwrap_or(0);

    let mut by_dim: Vec<Vec<usize>> = vec![Vec::new(); top + 1];
    for (i, s) in simplices.iter().enumerate() {
        by_dim[s.dim()].push(i);
    }

    let mut cleared = vec![false; n];
    let mut is_death = vec![false; n];
    let mut owner = vec![NONE; n];
    let mut reduced: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut pairs = Vec::new();
    let mut column = Vec::new();
    let mut scratch = Vec::new();

    for dim in (1..=top).rev() {
        for &j in &by_dim[dim] {
            if cleared[j] {
                continue;
            }
            column.clear();
            column.extend(simplices[j].face_keys().map(|k| index[&k]));
            column.sort_unstable();
            while let Some(&low) = column.last() {
                let o = owner[low];
                if o == NONE {
                    break;
                }
                add_column(&mut column, &reduced[&o], &mut scratch);
            }
            if let Some(&low) = column.last() {
                owner[low] = j;
                cleared[low] = true;
                is_death[j] = true;
                pairs.push((low, j));
                reduced.insert(j, core::mem::take(&mut column));
            }
        }
    }

    let paired_birth = {
        let mut b = vec![false; n];
        for &(birth, _) in &pairs {
            b[birth] = true;
        }
        b
    };
    let essential = (0..n).filter(|&i| !is_death[i] && !paired_birth[i]).collect();
    pairs.sort_unstable();
    (pairs, essential)
}

/// Barcodes of degrees 0–2. Zero-length intervals are dropped.
pub fn reduce(f: &Filtration) -> BarcodeSet {
    let simplices = f.simplices();
    let (pairs, essential) = persistence_pairs(f);
    let mut per_degree: [Vec<Interval>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    for (b, d) in pairs {
        let q = simplices[b].dim();
        if q <= 2 {
            per_degree[q].push(Interval::new(simplices[b].value, simplices[d].value));
        }
    }
    for b in essential {
        let q = simplices[b].dim();
        if q <= 2 {
            per_degree[q].push(Interval::new(simplices[b].value, f64::INFINITY));
        }
    }
    let [i0, i1, i2] = per_degree;
    let pb0 = Barcode::new(0, i0);
    let pb1 = Barcode::new(1, i1);
    let pb2 = Barcode::new(2, i2);
    let (pb1_finite, pb1_inf) = decompose_pb1(&pb1);

    let pb2_incomplete = matches!(f.rips_max_dim(), Some(d) if d < 3);
    let pb2_truncated = f.max_value().is_finite() && pb2.intervals().iter().any(Interval::is_essential);
    if pb2_incomplete {
        log::warn!("degree-2 barcode requested from a filtration without 3-simplices");
    }
    if pb2_truncated {
        log::debug!("essential degree-2 classes at truncation scale {}", f.max_value());
    }
    BarcodeSet { pb0, pb1, pb2, pb1_finite, pb1_inf, pb2_incomplete, pb2_truncated }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filtration::{build_rips, DistanceMatrix};

    #[test]
    fn two_vertices_one_edge() {
        let f = build_rips(&DistanceMatrix::euclidean(&[[0.0; 3], [3.0, 0.0, 0.0]]), 10.0, 3);
        let bs = reduce(&f);
        assert_eq!(
            bs.pb0.intervals(),
            &[Interval::new(0.0, 3.0), Interval::new(0.0, f64::INFINITY)]
        );
        assert!(bs.pb1.is_empty());
    }

    #[test]
    fn unit_square_loop() {
        let pts = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 0.0]];
        let bs = reduce(&build_rips(&DistanceMatrix::euclidean(&pts), 10.0, 2));
        assert_eq!(bs.pb1.intervals(), &[Interval::new(1.0, core::f64::consts::SQRT_2)]);
        assert!(bs.pb2_incomplete);
    }

    #[test]
    fn decomposition() {
        let pb1 = Barcode::new(1, [Interval::new(2.0, 3.0), Interval::new(2.0, f64::INFINITY)]);
        let (fin, inf) = decompose_pb1(&pb1);
        assert_eq!(fin.intervals(), &[Interval::new(2.0, 3.0)]);
        assert_eq!(inf.intervals(), &[Interval::new(2.0, f64::INFINITY)]);
        assert_eq!(fin.union(&inf), pb1);

        let (fin, inf) = decompose_pb1(&Barcode::empty(1));
        assert!(fin.is_empty() && inf.is_empty());
    }

    #[test]
    fn submultiset() {
        let a = Barcode::new(0, [Interval::new(0.0, 1.0), Interval::new(0.0, 1.0)]);
        let b = Barcode::new(
            0,
            [Interval::new(0.0, 1.0), Interval::new(0.0, 2.0), Interval::new(0.0, 1.0)],
        );
        assert!(a.is_submultiset_of(&b));
        assert!(!b.is_submultiset_of(&a));
        let c = Barcode::new(0, [Interval::new(0.0, 1.0)]);
        assert!(!a.is_submultiset_of(&c));
        assert!(Barcode::empty(0).is_submultiset_of(&c));
    }

    #[test]
    fn zero_length_dropped() {
        let b = Barcode::new(0, [Interval::new(0.0, 0.0), Interval::new(1.0, 2.0)]);
        assert_eq!(b.len(), 1);
    }
}
