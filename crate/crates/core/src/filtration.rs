//! Simplicial filtrations: the bipartite Vietoris–Rips filtration of an
//! extended motif, explicit hand-written filtrations, and the gluing-star
//! augmentation that realises the quotient by periodic equivalence.
//!
//! Simplices are kept sorted by `(value, dimension, vertex tuple)`, which is
//! a valid filtration order whenever faces never enter after their cofaces.
//! Gluing-star apexes are abstract vertex ids appended after the real
//! vertices; no simplex of dimension two or more ever contains an apex.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use hashbrown::HashMap;
use thiserror::Error;

use crate::math;
use crate::periodic::ExtendedMotif;

/// Highest simplex dimension a filtration may hold.
pub const MAX_DIM: usize = 3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FiltrationError {
    #[error("simplex {0:?} is missing one of its faces")]
    NotFaceClosed(Vec<u32>),
    #[error("face {face:?} enters at {face_value} after its coface {coface:?} at {coface_value}")]
    ValueInversion { face: Vec<u32>, face_value: f64, coface: Vec<u32>, coface_value: f64 },
    #[error("simplex {0:?} refers to a vertex outside 0..{1}")]
    VertexOutOfRange(Vec<u32>, usize),
    #[error("simplex {0:?} has dimension above {MAX_DIM}")]
    DimensionTooHigh(Vec<u32>),
    #[error("simplex {0:?} has a repeated vertex or is empty")]
    MalformedSimplex(Vec<u32>),
    #[error("simplex {0:?} is listed twice")]
    DuplicateSimplex(Vec<u32>),
    #[error("simplex {0:?} has a negative or non-finite value")]
    InvalidValue(Vec<u32>),
    #[error("class partition is invalid: {0}")]
    InvalidPartition(&'static str),
}

/// A simplex of dimension at most three with its filtration value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Simplex {
    verts: [u32; 4],
    dim: u8,
    pub value: f64,
    pub gluing_star: bool,
}

impl Simplex {
    /// `vertices` must be strictly ascending and hold one to four ids.
    pub fn new(vertices: &[u32], value: f64) -> Simplex {
        assert!(!vertices.is_empty() && vertices.len() <= MAX_DIM + 1);
        debug_assert!(vertices.windows(2).all(|w| w[0] < w[1]));
        let mut verts = [u32::MAX; 4];
        verts[..vertices.len()].copy_from_slice(vertices);
        Simplex { verts, dim: (vertices.len() - 1) as u8, value, gluing_star: false }
    }

    pub fn vertices(&self) -> &[u32] {
        &self.verts[..self.dim as usize + 1]
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub(crate) fn key(&self) -> [u32; 4] {
        self.verts
    }

    /// Keys of the codimension-one faces, in the order of the removed vertex.
    pub(crate) fn face_keys(&self) -> impl Iterator<Item = [u32; 4]> + '_ {
        let n = self.dim as usize + 1;
        let verts = self.vertices();
        (0..if n > 1 { n } else { 0 }).map(move |skip| {
            let mut key = [u32::MAX; 4];
            let mut k = 0;
            for (i, &v) in verts.iter().enumerate() {
                if i != skip {
                    key[k] = v;
                    k += 1;
                }
            }
            key
        })
    }

    fn filtration_cmp(&self, other: &Simplex) -> Ordering {
        self.value
            .total_cmp(&other.value)
            .then(self.dim.cmp(&other.dim))
            .then_with(|| self.vertices().cmp(other.vertices()))
    }
}

/// Symmetric matrix of pairwise distances, `+∞` marking forbidden pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl DistanceMatrix {
    /// Plain Euclidean distances between points.
    pub fn euclidean(points: &[[f64; 3]]) -> DistanceMatrix {
        let n = points.len();
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let d = math::dist(points[i], points[j]);
                entries[i * n + j] = d;
                entries[j * n + i] = d;
            }
        }
        DistanceMatrix { n, entries }
    }

    /// Builds a matrix from a symmetric closure `f(i, j)` for `i < j`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> DistanceMatrix {
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let d = f(i, j);
                entries[i * n + j] = d;
                entries[j * n + i] = d;
            }
        }
        DistanceMatrix { n, entries }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }
}

/// Euclidean distances except between two translated (non-original)
/// points, which are infinitely far apart.
pub fn bipartite_distances(em: &ExtendedMotif) -> DistanceMatrix {
    DistanceMatrix::from_fn(em.len(), |i, j| {
        if !em.in_original[i] && !em.in_original[j] {
            f64::INFINITY
        } else {
            math::dist(em.points[i], em.points[j])
        }
    })
}

/// A partition of the vertex ids `0..n` into equivalence classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    n: usize,
    classes: Vec<Vec<u32>>,
}

impl Partition {
    /// Every vertex in its own class.
    pub fn singletons(n: usize) -> Partition {
        Partition { n, classes: (0..n as u32).map(|v| vec![v]).collect() }
    }

    /// Validates `classes` over `0..n`. Empty classes are dropped, members
    /// are sorted, and vertices not mentioned become singleton classes
    /// appended in ascending order.
    pub fn new(n: usize, classes: Vec<Vec<u32>>) -> Result<Partition, FiltrationError> {
        let mut seen = vec![false; n];
        let mut out = Vec::with_capacity(classes.len());
        for mut class in classes {
            class.sort_unstable();
            for &v in &class {
                let slot = seen
                    .get_mut(v as usize)
                    .ok_or(FiltrationError::InvalidPartition("vertex id out of range"))?;
                if *slot {
                    return Err(FiltrationError::InvalidPartition("vertex listed in two classes"));
                }
                *slot = true;
            }
            if !class.is_empty() {
                out.push(class);
            }
        }
        for (v, covered) in seen.iter().enumerate() {
            if !covered {
                out.push(vec![v as u32]);
            }
        }
        Ok(Partition { n, classes: out })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn classes(&self) -> &[Vec<u32>] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }
}

/// An immutable filtered simplicial complex.
#[derive(Debug, Clone, PartialEq)]
pub struct Filtration {
    simplices: Vec<Simplex>,
    n_vertices: usize,
    n_apexes: usize,
    partition: Partition,
    rips_max_dim: Option<usize>,
    max_value: f64,
}

impl Filtration {
    fn sorted(
        mut simplices: Vec<Simplex>,
        n_vertices: usize,
        n_apexes: usize,
        partition: Partition,
        rips_max_dim: Option<usize>,
        max_value: f64,
    ) -> Filtration {
        simplices.sort_by(Simplex::filtration_cmp);
        Filtration { simplices, n_vertices, n_apexes, partition, rips_max_dim, max_value }
    }

    /// Validates an explicitly listed filtration. Vertices must be listed as
    /// 0-simplices; simplices may appear in any order.
    pub fn from_simplices(
        n_vertices: usize,
        partition: Partition,
        simplices: Vec<(Vec<u32>, f64)>,
    ) -> Result<Filtration, FiltrationError> {
        if partition.vertex_count() != n_vertices {
            return Err(FiltrationError::InvalidPartition("partition size differs from vertex count"));
        }
        let mut parsed = Vec::with_capacity(simplices.len());
        let mut values: HashMap<[u32; 4], f64> = HashMap::with_capacity(simplices.len());
        for (mut verts, value) in simplices {
            verts.sort_unstable();
            if verts.is_empty() || verts.windows(2).any(|w| w[0] == w[1]) {
                return Err(FiltrationError::MalformedSimplex(verts));
            }
            if verts.len() > MAX_DIM + 1 {
                return Err(FiltrationError::DimensionTooHigh(verts));
            }
            if verts.iter().any(|&v| v as usize >= n_vertices) {
                return Err(FiltrationError::VertexOutOfRange(verts, n_vertices));
            }
            if !(value.is_finite() && value >= 0.0) {
                return Err(FiltrationError::InvalidValue(verts));
            }
            let s = Simplex::new(&verts, value);
            if values.insert(s.key(), value).is_some() {
                return Err(FiltrationError::DuplicateSimplex(verts));
            }
            parsed.push(s);
        }
        for s in &parsed {
            for face in s.face_keys() {
                match values.get(&face) {
                    None => return Err(FiltrationError::NotFaceClosed(s.vertices().to_vec())),
                    Some(&fv) if fv > s.value => {
                        let face: Vec<u32> = face.iter().copied().take_while(|&v| v != u32::MAX).collect();
                        return Err(FiltrationError::ValueInversion {
                            face,
                            face_value: fv,
                            coface: s.vertices().to_vec(),
                            coface_value: s.value,
                        });
                    }
                    Some(_) => {}
                }
            }
        }
        Ok(Filtration::sorted(parsed, n_vertices, 0, partition, None, f64::INFINITY))
    }

    /// Replaces the class partition carried by a filtration without apexes.
    pub fn with_partition(mut self, partition: Partition) -> Result<Filtration, FiltrationError> {
        if partition.vertex_count() != self.n_vertices || self.n_apexes != 0 {
            return Err(FiltrationError::InvalidPartition("partition size differs from vertex count"));
        }
        self.partition = partition;
        Ok(self)
    }

    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    /// Number of real (non-apex) vertices.
    pub fn vertex_count(&self) -> usize {
        self.n_vertices
    }

    pub fn apex_count(&self) -> usize {
        self.n_apexes
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    /// `Some(d)` for Rips filtrations truncated at dimension `d`.
    pub fn rips_max_dim(&self) -> Option<usize> {
        self.rips_max_dim
    }

    /// Largest scale represented; `+∞` for explicit filtrations.
    pub fn max_value(&self) -> f64 {
        self.max_value
    }

    pub fn max_dim(&self) -> Option<usize> {
        self.simplices.iter().map(Simplex::dim).max()
    }

    /// Number of simplices of each dimension entering at or below `eps`.
    pub fn counts_at(&self, eps: f64) -> [usize; MAX_DIM + 1] {
        let mut counts = [0; MAX_DIM + 1];
        for s in self.simplices.iter().filter(|s| s.value <= eps) {
            counts[s.dim()] += 1;
        }
        counts
    }

    /// Distinct simplex values in ascending order.
    pub fn critical_values(&self) -> Vec<f64> {
        let mut values: Vec<f64> = self.simplices.iter().map(|s| s.value).collect();
        values.dedup();
        values
    }

    /// Checks face closure, ordering and the gluing-star shape rules.
    pub fn check_invariants(&self) -> Result<(), FiltrationError> {
        let mut values: HashMap<[u32; 4], f64> = HashMap::with_capacity(self.simplices.len());
        for s in &self.simplices {
            values.insert(s.key(), s.value);
        }
        for (i, s) in self.simplices.iter().enumerate() {
            if i > 0 && self.simplices[i - 1].filtration_cmp(s) != Ordering::Less {
                return Err(FiltrationError::DuplicateSimplex(s.vertices().to_vec()));
            }
            for face in s.face_keys() {
                match values.get(&face) {
                    None => return Err(FiltrationError::NotFaceClosed(s.vertices().to_vec())),
                    Some(&fv) if fv > s.value => {
                        return Err(FiltrationError::ValueInversion {
                            face: face.iter().copied().take_while(|&v| v != u32::MAX).collect(),
                            face_value: fv,
                            coface: s.vertices().to_vec(),
                            coface_value: s.value,
                        })
                    }
                    Some(_) => {}
                }
            }
            let touches_apex = s.vertices().iter().any(|&v| v as usize >= self.n_vertices);
            if touches_apex && (s.dim() >= 2 || !s.gluing_star) {
                return Err(FiltrationError::InvalidPartition("apex in a non-star simplex"));
            }
        }
        Ok(())
    }
}

/// Vietoris–Rips filtration of `d`: every simplex up to `max_dim` whose
/// diameter is at most `max_value`, entering at its diameter. Pairs at `+∞`
/// never share a simplex.
///
/// # Panics
///
/// If `max_dim` is outside `1..=3` or `max_value` is not positive.
pub fn build_rips(d: &DistanceMatrix, max_value: f64, max_dim: usize) -> Filtration {
    assert!((1..=MAX_DIM).contains(&max_dim), "max_dim must be 1, 2 or 3");
    assert!(max_value > 0.0, "max_value must be positive");
    let n = d.len();
    let close = |i: usize, j: usize| {
        let v = d.get(i, j);
        v.is_finite() && v <= max_value
    };
    // Forward neighbours, ascending.
    let forward: Vec<Vec<u32>> = (0..n)
        .map(|i| (i + 1..n).filter(|&j| close(i, j)).map(|j| j as u32).collect())
        .collect();

    let mut simplices: Vec<Simplex> = (0..n as u32).map(|v| Simplex::new(&[v], 0.0)).collect();
    let mut clique = Vec::with_capacity(MAX_DIM + 1);
    for (i, next) in forward.iter().enumerate() {
        clique.clear();
        clique.push(i as u32);
        expand_cliques(d, next, 0.0, max_dim, &mut clique, &mut simplices, &close);
    }
    Filtration::sorted(simplices, n, 0, Partition::singletons(n), Some(max_dim), max_value)
}

fn expand_cliques(
    d: &DistanceMatrix,
    candidates: &[u32],
    value: f64,
    max_dim: usize,
    clique: &mut Vec<u32>,
    out: &mut Vec<Simplex>,
    close: &impl Fn(usize, usize) -> bool,
) {
    if clique.len() > max_dim {
        return;
    }
    for (k, &v) in candidates.iter().enumerate() {
        let diameter = clique
            .iter()
            .fold(value, |acc, &u| acc.max(d.get(u as usize, v as usize)));
        clique.push(v);
        out.push(Simplex::new(clique, diameter));
        if clique.len() <= max_dim {
            let next: Vec<u32> = candidates[k + 1..]
                .iter()
                .copied()
                .filter(|&w| close(v as usize, w as usize))
                .collect();
            if !next.is_empty() {
                expand_cliques(d, &next, diameter, max_dim, clique, out, close);
            }
        }
        clique.pop();
    }
}

/// Adds one apex per class at value 0 and an edge from it to every member
/// at value 0.
pub fn augment_gluing_stars(f: &Filtration, classes: &Partition) -> Filtration {
    augment_gluing_stars_at(f, classes, 0.0)
}

/// Gluing stars entering at an arbitrary `value`. Only 0 yields the quotient
/// filtration; other values exist to exercise the verification suite.
///
/// # Panics
///
/// If `f` already has apexes or `classes` covers a different vertex count.
pub fn augment_gluing_stars_at(f: &Filtration, classes: &Partition, value: f64) -> Filtration {
    assert_eq!(f.n_apexes, 0, "filtration already carries gluing stars");
    assert_eq!(classes.vertex_count(), f.n_vertices, "partition does not match the vertex set");
    if f.is_empty() {
        return f.clone();
    }
    let n = f.n_vertices as u32;
    let members: usize = classes.classes().iter().map(Vec::len).sum();
    let mut simplices = Vec::with_capacity(f.len() + classes.len() + members);
    simplices.extend_from_slice(&f.simplices);
    for (k, class) in classes.classes().iter().enumerate() {
        let apex = n + k as u32;
        let mut s = Simplex::new(&[apex], 0.0);
        s.gluing_star = true;
        simplices.push(s);
        for &m in class {
            let mut e = Simplex::new(&[m, apex], value);
            e.gluing_star = true;
            simplices.push(e);
        }
    }
    Filtration::sorted(
        simplices,
        f.n_vertices,
        classes.len(),
        classes.clone(),
        f.rips_max_dim,
        f.max_value,
    )
}

/// The plain Rips filtration `K` of an extended motif and its gluing-star
/// augmentation `K̃` by lattice classes.
pub fn quotient_pair(em: &ExtendedMotif, max_value: f64, max_dim: usize) -> (Filtration, Filtration) {
    let d = bipartite_distances(em);
    let plain = build_rips(&d, max_value, max_dim);
    let partition = Partition::new(em.len(), em.classes())
        .expect("extended motif classes always partition its points");
    let glued = augment_gluing_stars(&plain, &partition);
    (plain, glued)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::periodic::{extend_motif, LatticeBasis, Motif};
    use alloc::string::String;

    fn vertex_sets(f: &Filtration, dim: usize) -> Vec<(Vec<u32>, f64)> {
        f.simplices()
            .iter()
            .filter(|s| s.dim() == dim)
            .map(|s| (s.vertices().to_vec(), s.value))
            .collect()
    }

    fn single_atom() -> ExtendedMotif {
        let basis =
            LatticeBasis { v1: [10.0, 0.0, 0.0], v2: [0.0, 20.0, 0.0], v3: [0.0, 0.0, 30.0] };
        let motif = Motif {
            points: vec![[0.0; 3]],
            frac: vec![[0.0; 3]],
            elements: vec![String::from("Pb")],
            atom_set_tag: String::from("Pb"),
        };
        extend_motif(&motif, &basis).unwrap()
    }

    #[test]
    fn bipartite_matrix() {
        let d = bipartite_distances(&single_atom());
        assert_eq!(d.get(0, 1), 10.0);
        assert_eq!(d.get(0, 3), 30.0);
        assert_eq!(d.get(1, 2), f64::INFINITY);
        assert_eq!(d.get(2, 1), f64::INFINITY);
        assert_eq!(d.get(2, 2), 0.0);
    }

    #[test]
    fn two_point_rips() {
        let d = DistanceMatrix::euclidean(&[[0.0; 3], [3.0, 0.0, 0.0]]);
        let f = build_rips(&d, 10.0, 3);
        assert_eq!(vertex_sets(&f, 0), vec![(vec![0], 0.0), (vec![1], 0.0)]);
        assert_eq!(vertex_sets(&f, 1), vec![(vec![0, 1], 3.0)]);
    }

    #[test]
    fn star_geometry_has_no_triangles() {
        let d = bipartite_distances(&single_atom());
        let f = build_rips(&d, 1e6, 3);
        assert_eq!(f.counts_at(f64::INFINITY), [4, 3, 0, 0]);
    }

    #[test]
    fn unit_square_rips() {
        let pts = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 0.0]];
        let f = build_rips(&DistanceMatrix::euclidean(&pts), 10.0, 2);
        let edges = vertex_sets(&f, 1);
        assert_eq!(edges.iter().filter(|e| e.1 == 1.0).count(), 4);
        assert_eq!(edges.iter().filter(|e| e.1 == core::f64::consts::SQRT_2).count(), 2);
        let tris = vertex_sets(&f, 2);
        assert_eq!(tris.len(), 4);
        assert!(tris.iter().all(|t| t.1 == core::f64::consts::SQRT_2));
        assert_eq!(f.counts_at(f64::INFINITY)[3], 0);
        f.check_invariants().unwrap();
    }

    #[test]
    fn gluing_star_counts() {
        let em = single_atom();
        let (plain, glued) = quotient_pair(&em, 40.0, 3);
        assert_eq!(glued.len() - plain.len(), 1 + 4);
        assert_eq!(glued.apex_count(), 1);
        let stars: Vec<_> = glued.simplices().iter().filter(|s| s.gluing_star).collect();
        assert_eq!(stars.len(), 5);
        assert!(stars.iter().all(|s| s.value == 0.0));
        glued.check_invariants().unwrap();
    }

    #[test]
    fn empty_filtration_unchanged() {
        let f = build_rips(&DistanceMatrix::euclidean(&[]), 1.0, 3);
        let g = augment_gluing_stars(&f, &Partition::singletons(0));
        assert_eq!(f, g);
    }

    #[test]
    fn explicit_filtration_validation() {
        let ok = Filtration::from_simplices(
            2,
            Partition::singletons(2),
            vec![(vec![0], 0.0), (vec![1], 0.0), (vec![1, 0], 1.0)],
        )
        .unwrap();
        assert_eq!(ok.counts_at(1.0), [2, 1, 0, 0]);

        let missing = Filtration::from_simplices(
            2,
            Partition::singletons(2),
            vec![(vec![0], 0.0), (vec![0, 1], 1.0)],
        );
        assert_eq!(missing, Err(FiltrationError::NotFaceClosed(vec![0, 1])));

        let inverted = Filtration::from_simplices(
            3,
            Partition::singletons(3),
            vec![
                (vec![0], 0.0),
                (vec![1], 0.0),
                (vec![2], 0.0),
                (vec![0, 1], 1.0),
                (vec![0, 2], 1.0),
                (vec![1, 2], 2.0),
                (vec![0, 1, 2], 1.0),
            ],
        );
        assert!(matches!(inverted, Err(FiltrationError::ValueInversion { .. })));
    }

    #[test]
    fn partition_rejects_overlap() {
        assert!(Partition::new(3, vec![vec![0, 1], vec![1, 2]]).is_err());
        assert!(Partition::new(2, vec![vec![5]]).is_err());
        let p = Partition::new(4, vec![vec![3, 1]]).unwrap();
        assert_eq!(p.classes(), &[vec![1, 3], vec![0], vec![2]]);
    }
}
