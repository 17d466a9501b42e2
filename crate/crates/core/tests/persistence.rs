//! Barcodes against the rank oracle, Euler characteristics and the
//! quotient relations on random inputs.

use proptest::prelude::*;
use qcph_core::filtration::{augment_gluing_stars, augment_gluing_stars_at, build_rips, DistanceMatrix};
use qcph_core::oracle::{self, OracleError};
use qcph_core::persistence::persistence_pairs;
use qcph_core::verify::{check_filtration, random_complex};
use qcph_core::{reduce, Filtration, Interval, Partition};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Critical values, midpoints between them and one value past the last.
fn grid(f: &Filtration) -> Vec<f64> {
    let c = f.critical_values();
    let mut g = c.clone();
    g.extend(c.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    if let Some(last) = c.last() {
        g.push(last + 1.0);
    }
    g
}

/// Betti numbers of every dimension up to 3 read off the persistence pairs.
fn betti_all(f: &Filtration, eps: f64) -> [i64; 4] {
    let s = f.simplices();
    let (pairs, essential) = persistence_pairs(f);
    let mut b = [0i64; 4];
    for (birth, death) in pairs {
        if s[birth].value <= eps && eps < s[death].value {
            b[s[birth].dim()] += 1;
        }
    }
    for birth in essential {
        if s[birth].value <= eps {
            b[s[birth].dim()] += 1;
        }
    }
    b
}

fn random_partition(n: usize, labels: &[u32]) -> Partition {
    let k = labels.iter().take(n).max().map_or(1, |&m| m as usize + 1);
    let mut classes = vec![Vec::new(); k];
    for v in 0..n {
        classes[labels[v] as usize].push(v as u32);
    }
    classes.retain(|c| !c.is_empty());
    Partition::new(n, classes).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn barcode_betti_equals_oracle(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_complex(&mut rng, 9, 150);
        let bs = reduce(&f);
        for eps in grid(&f) {
            let oracle = oracle::betti_at(&f, eps).unwrap().as_array();
            prop_assert_eq!(bs.betti_at(eps), oracle, "eps {}", eps);
        }
    }

    #[test]
    fn euler_characteristic(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_complex(&mut rng, 9, 200);
        for eps in grid(&f) {
            let c = f.counts_at(eps);
            let chi_cells = c[0] as i64 - c[1] as i64 + c[2] as i64 - c[3] as i64;
            let b = betti_all(&f, eps);
            prop_assert_eq!(chi_cells, b[0] - b[1] + b[2] - b[3]);
        }
    }

    #[test]
    fn quotient_relations_on_clouds(
        points in prop::collection::vec(prop::array::uniform3(0.0..10.0f64), 2..=8),
        labels in prop::collection::vec(0u32..5, 8),
        max_value in 4.0..18.0f64,
    ) {
        let plain = build_rips(&DistanceMatrix::euclidean(&points), max_value, 3)
            .with_partition(random_partition(points.len(), &labels))
            .unwrap();
        let (checks, failures) = check_filtration(&plain, 12, 0.0);
        prop_assert!(checks > 0);
        prop_assert!(failures.is_empty(), "{:?}", failures);
    }

    #[test]
    fn singleton_classes_change_nothing(
        points in prop::collection::vec(prop::array::uniform3(0.0..10.0f64), 1..=8),
        max_dim in 1usize..=3,
    ) {
        let plain = build_rips(&DistanceMatrix::euclidean(&points), 12.0, max_dim);
        let glued = augment_gluing_stars(&plain, &Partition::singletons(points.len()));
        prop_assert_eq!(reduce(&glued), reduce(&plain));
    }

    #[test]
    fn relabelling_vertices_keeps_barcodes(
        points in prop::collection::vec(prop::array::uniform3(0.0..10.0f64), 2..=8),
        labels in prop::collection::vec(0u32..4, 8),
        shift in 1usize..8,
    ) {
        let n = points.len();
        let partition = random_partition(n, &labels);
        let perm: Vec<usize> = (0..n).map(|i| (i + shift) % n).collect();
        let moved: Vec<[f64; 3]> = perm.iter().map(|&i| points[i]).collect();
        // vertex k of the moved cloud is vertex perm[k] of the original
        let mut inverse = vec![0u32; n];
        for (k, &i) in perm.iter().enumerate() {
            inverse[i] = k as u32;
        }
        let moved_classes: Vec<Vec<u32>> = partition
            .classes()
            .iter()
            .map(|c| c.iter().map(|&v| inverse[v as usize]).collect())
            .collect();
        let moved_partition = Partition::new(n, moved_classes).unwrap();

        let a = build_rips(&DistanceMatrix::euclidean(&points), 12.0, 3);
        let b = build_rips(&DistanceMatrix::euclidean(&moved), 12.0, 3);
        prop_assert_eq!(reduce(&a), reduce(&b));
        prop_assert_eq!(
            reduce(&augment_gluing_stars(&a, &partition)),
            reduce(&augment_gluing_stars(&b, &moved_partition))
        );
    }
}

#[test]
fn late_gluing_breaks_pb0_inclusion() {
    // two far-apart points glued into one class: with stars at 0 the quotient
    // has a single component from the start; entering at 1 they add a (0, 1) bar
    let plain = build_rips(&DistanceMatrix::euclidean(&[[0.0; 3], [5.0, 0.0, 0.0]]), 10.0, 3);
    let partition = Partition::new(2, vec![vec![0, 1]]).unwrap();
    let at_zero = reduce(&augment_gluing_stars(&plain, &partition));
    assert!(at_zero.pb0.is_submultiset_of(&reduce(&plain).pb0));
    let late = reduce(&augment_gluing_stars_at(&plain, &partition, 1.0));
    assert!(!late.pb0.is_submultiset_of(&reduce(&plain).pb0));
}

#[test]
fn hollow_square_and_filled_triangle() {
    let square = Filtration::from_simplices(
        4,
        Partition::singletons(4),
        vec![
            (vec![0], 0.0),
            (vec![1], 0.0),
            (vec![2], 0.0),
            (vec![3], 0.0),
            (vec![0, 1], 1.0),
            (vec![1, 2], 1.0),
            (vec![2, 3], 1.0),
            (vec![0, 3], 1.0),
        ],
    )
    .unwrap();
    assert_eq!(oracle::betti_at(&square, 1.0).unwrap().as_array(), [1, 1, 0]);
    assert_eq!(reduce(&square).pb1.intervals(), &[Interval::new(1.0, f64::INFINITY)]);

    let triangle = Filtration::from_simplices(
        3,
        Partition::singletons(3),
        vec![
            (vec![0], 0.0),
            (vec![1], 0.0),
            (vec![2], 0.0),
            (vec![0, 1], 1.0),
            (vec![1, 2], 1.0),
            (vec![0, 2], 1.0),
            (vec![0, 1, 2], 2.0),
        ],
    )
    .unwrap();
    assert_eq!(oracle::betti_at(&triangle, 2.0).unwrap().as_array(), [1, 0, 0]);
    assert_eq!(reduce(&triangle).pb1.intervals(), &[Interval::new(1.0, 2.0)]);
}

#[test]
fn oracle_refuses_large_complexes() {
    let points: Vec<[f64; 3]> = (0..40).map(|i| [i as f64 * 0.1, 0.0, 0.0]).collect();
    let f = build_rips(&DistanceMatrix::euclidean(&points), 100.0, 3);
    assert!(f.len() > 20_000);
    assert!(matches!(oracle::betti_at(&f, 100.0), Err(OracleError::ComplexTooLarge { .. })));
}
