//! Extended motifs, lattice classes and the unit-cell barcode.

use proptest::prelude::*;
use qcph_core::filtration::quotient_pair;
use qcph_core::oracle;
use qcph_core::periodic::{cell_basis, extend_motif};
use qcph_core::{reduce, CellParams, Interval, LatticeBasis, Motif};

fn motif(basis: &LatticeBasis, frac: &[[f64; 3]]) -> Motif {
    Motif {
        points: frac.iter().map(|f| basis.to_cartesian(*f)).collect(),
        frac: frac.to_vec(),
        elements: vec!["Pb".to_string(); frac.len()],
        atom_set_tag: "Pb".to_string(),
    }
}

fn key(p: [f64; 3]) -> [u64; 3] {
    p.map(f64::to_bits)
}

/// Classes as a sorted set of sorted point sets.
fn class_sets(points: &[[f64; 3]], classes: &[Vec<u32>]) -> Vec<Vec<[u64; 3]>> {
    let mut sets: Vec<Vec<[u64; 3]>> = classes
        .iter()
        .map(|c| {
            let mut s: Vec<[u64; 3]> = c.iter().map(|&i| key(points[i as usize])).collect();
            s.sort_unstable();
            s
        })
        .collect();
    sets.sort_unstable();
    sets
}

fn cell() -> impl Strategy<Value = CellParams> {
    (2.0..8.0f64, 2.0..8.0f64, 2.0..8.0f64, 70.0..110.0f64, 70.0..110.0f64, 70.0..110.0f64)
        .prop_map(|(a, b, c, al, be, ga)| CellParams::new(a, b, c, al, be, ga))
        .prop_filter("non-degenerate cell", |c| cell_basis(c).is_ok())
}

fn fractions() -> impl Strategy<Value = Vec<[f64; 3]>> {
    prop::collection::vec(prop::array::uniform3(0.0..1.0f64), 1..6)
}

proptest! {
    #[test]
    fn atom_order_keeps_the_class_partition(cell in cell(), frac in fractions(), shift in 0usize..6) {
        let basis = cell_basis(&cell).unwrap();
        let mut rotated = frac.clone();
        rotated.rotate_left(shift % frac.len());
        let a = extend_motif(&motif(&basis, &frac), &basis).unwrap();
        let b = extend_motif(&motif(&basis, &rotated), &basis).unwrap();
        prop_assert_eq!(a.len(), 4 * frac.len());
        prop_assert_eq!(class_sets(&a.points, &a.classes()), class_sets(&b.points, &b.classes()));
    }

    #[test]
    fn translates_stay_in_their_class(cell in cell(), frac in fractions()) {
        let basis = cell_basis(&cell).unwrap();
        let em = extend_motif(&motif(&basis, &frac), &basis).unwrap();
        let m = frac.len();
        for i in (0..em.len()).filter(|&i| em.in_original[i]) {
            for v in basis.vectors() {
                let p = em.points[i];
                let target = [p[0] + v[0], p[1] + v[1], p[2] + v[2]];
                let j = (0..em.len())
                    .find(|&j| em.points[j] == target)
                    .expect("every basis translate of an original point is in V");
                prop_assert!(!em.in_original[j]);
                prop_assert_eq!(em.class_id[i], em.class_id[j]);
            }
        }
        prop_assert_eq!(em.class_count(), m);
    }

    /// A single atom in any cell: the quotient carries exactly one essential
    /// loop per lattice vector, born at its length, and nothing in degree 2.
    #[test]
    fn single_atom_loops_are_born_at_the_cell_lengths(cell in cell(), origin in prop::array::uniform3(0.0..1.0f64)) {
        let basis = cell_basis(&cell).unwrap();
        let em = extend_motif(&motif(&basis, &[origin]), &basis).unwrap();
        let (plain, glued) = quotient_pair(&em, 40.0, 3);
        prop_assert_eq!(plain.counts_at(40.0), [4, 3, 0, 0]);
        let q = reduce(&glued);
        prop_assert!(q.pb1_finite.is_empty());
        prop_assert!(q.pb2.is_empty());
        let mut lengths: Vec<f64> = basis.vectors().iter().map(|v| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()).collect();
        lengths.sort_by(f64::total_cmp);
        let births: Vec<f64> = q.pb1_inf.intervals().iter().map(|i| i.birth).collect();
        prop_assert_eq!(births.len(), 3);
        for (b, l) in births.iter().zip(&lengths) {
            prop_assert!((b - l).abs() <= 1e-9 * l, "birth {} vs |v| {}", b, l);
        }
    }
}

#[test]
fn single_atom_orthorhombic_cell() {
    let basis = cell_basis(&CellParams::new(10.0, 20.0, 30.0, 90.0, 90.0, 90.0)).unwrap();
    let em = extend_motif(&motif(&basis, &[[0.0; 3]]), &basis).unwrap();
    assert_eq!(em.points, vec![[0.0; 3], [10.0, 0.0, 0.0], [0.0, 20.0, 0.0], [0.0, 0.0, 30.0]]);
    assert_eq!(em.classes(), vec![vec![0, 1, 2, 3]]);

    let (plain, glued) = quotient_pair(&em, 40.0, 3);
    let q = reduce(&glued);
    let inf = f64::INFINITY;
    assert_eq!(
        q.pb1_inf.intervals(),
        &[Interval::new(10.0, inf), Interval::new(20.0, inf), Interval::new(30.0, inf)]
    );
    assert!(q.pb2.is_empty());
    // 5 vertices, 7 edges, connected: β1 = 7 - 5 + 1
    assert_eq!(oracle::betti_at(&glued, 30.0).unwrap().as_array(), [1, 3, 0]);
    assert_eq!(plain.counts_at(40.0), [4, 3, 0, 0]);
}

#[test]
fn two_atom_motif_in_an_orthorhombic_cell() {
    let basis = cell_basis(&CellParams::new(10.0, 20.0, 30.0, 90.0, 90.0, 90.0)).unwrap();
    let em = extend_motif(&motif(&basis, &[[0.0; 3], [0.5, 0.5, 0.5]]), &basis).unwrap();
    assert_eq!(em.len(), 8);
    assert_eq!(em.points[1], [5.0, 10.0, 15.0]);
    let classes = em.classes();
    assert_eq!(classes.len(), 2);
    assert!(classes.iter().all(|c| c.len() == 4));
}
