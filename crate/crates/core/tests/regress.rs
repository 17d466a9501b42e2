//! Boosted trees, metrics and cross-validation.

use proptest::prelude::*;
use qcph_core::regress::{
    cross_validate, evaluate, fit, fit_with_history, fold_assignments, predict, GbtModel, GbtParams, Matrix, Node, Tree,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn quick() -> GbtParams {
    GbtParams { n_estimators: 30, max_depth: 3, learning_rate: 0.3, subsample: 0.7, ..GbtParams::default() }
}

/// Rows of small integers over 8 so that distinct values stay far apart.
fn data() -> impl Strategy<Value = (Matrix, Vec<f64>)> {
    (4usize..40, 1usize..4).prop_flat_map(|(rows, cols)| {
        (
            prop::collection::vec(-40i32..40, rows * cols),
            prop::collection::vec(-5.0..5.0f64, rows),
        )
            .prop_map(move |(x, y)| {
                let x = Matrix::new(rows, cols, x.into_iter().map(|v| f64::from(v) / 8.0).collect()).unwrap();
                (x, y)
            })
    })
}

/// Continuous values: no row sits exactly on a split midpoint, where the
/// rounding of a scaled midpoint could route it differently.
fn generic_data() -> impl Strategy<Value = (Matrix, Vec<f64>)> {
    (4usize..40, 1usize..4).prop_flat_map(|(rows, cols)| {
        (
            prop::collection::vec(-5.0..5.0f64, rows * cols),
            prop::collection::vec(-5.0..5.0f64, rows),
        )
            .prop_map(move |(x, y)| (Matrix::new(rows, cols, x).unwrap(), y))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn training_mse_never_increases((x, y) in data(), seed in any::<u64>()) {
        let p = GbtParams { seed, ..quick() };
        let report = fit_with_history(&x, &y, &p).unwrap();
        prop_assert_eq!(report.train_mse.len(), report.model.trees.len() + 1);
        for w in report.train_mse.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-300, "{} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn positive_column_scaling_keeps_predictions((x, y) in generic_data(), col in 0usize..4, scale in 0.01..100.0f64) {
        let col = col % x.cols();
        let mut scaled = x.clone();
        scaled.map_column(col, |v| v * scale);
        let a = predict(&fit(&x, &y, &quick()).unwrap(), &x).unwrap();
        let b = predict(&fit(&scaled, &y, &quick()).unwrap(), &scaled).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn fitting_is_deterministic((x, y) in data(), seed in any::<u64>()) {
        let p = GbtParams { seed, ..quick() };
        prop_assert_eq!(fit(&x, &y, &p).unwrap(), fit(&x, &y, &p).unwrap());
    }

    #[test]
    fn metric_identities(pairs in prop::collection::vec((-10.0..10.0f64, -10.0..10.0f64), 1..60)) {
        let (t, p): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let r = evaluate(&t, &p).unwrap();
        prop_assert!(r.rmse >= r.mae);
        prop_assert!(r.cod <= 1.0);
        prop_assert!((-1.0..=1.0).contains(&r.pcc));
        let perfect = evaluate(&t, &t).unwrap();
        prop_assert_eq!(perfect.cod, 1.0);
        prop_assert_eq!(perfect.mae, 0.0);
        if !perfect.pcc_undefined {
            prop_assert!((perfect.pcc - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn folds_partition_the_rows(rows in 2usize..200, folds in 2usize..10, seed in any::<u64>(), repeat in 0usize..5) {
        prop_assume!(folds <= rows);
        let f = fold_assignments(rows, folds, seed, repeat);
        let mut sizes = vec![0usize; folds];
        for &k in &f {
            sizes[k] += 1;
        }
        let (lo, hi) = (sizes.iter().min().unwrap(), sizes.iter().max().unwrap());
        prop_assert!(hi - lo <= 1);
        prop_assert_eq!(sizes.iter().sum::<usize>(), rows);
    }
}

#[test]
fn constant_target_is_reproduced() {
    let x = Matrix::new(5, 2, (0..10).map(f64::from).collect()).unwrap();
    let m = fit(&x, &[3.0; 5], &GbtParams::default()).unwrap();
    assert!(predict(&m, &x).unwrap().iter().all(|&p| p == 3.0));
}

#[test]
fn identity_target_is_learned() {
    let x = Matrix::new(100, 1, (0..100).map(f64::from).collect()).unwrap();
    let y: Vec<f64> = (0..100).map(f64::from).collect();
    let p = GbtParams { n_estimators: 200, max_depth: 7, learning_rate: 0.1, ..GbtParams::default() };
    let m = fit(&x, &y, &p).unwrap();
    let r = evaluate(&y, &predict(&m, &x).unwrap()).unwrap();
    assert!(r.cod > 0.99, "training COD {}", r.cod);
}

#[test]
fn identical_rows_share_a_leaf() {
    let x = Matrix::new(2, 1, vec![1.0, 1.0]).unwrap();
    let p = GbtParams { n_estimators: 50, learning_rate: 0.5, subsample: 1.0, ..GbtParams::default() };
    let m = fit(&x, &[0.0, 4.0], &p).unwrap();
    assert_eq!(predict(&m, &x).unwrap(), vec![2.0, 2.0]);
}

#[test]
fn stump_and_empty_model() {
    let stump = GbtModel {
        base_prediction: 0.0,
        learning_rate: 0.5,
        n_features: 1,
        trees: vec![Tree {
            nodes: vec![
                Node::Split { feature: 0, threshold: 1.0, left: 1, right: 2 },
                Node::Leaf { value: -1.0 },
                Node::Leaf { value: 1.0 },
            ],
        }],
    };
    let x = Matrix::new(2, 1, vec![0.0, 2.0]).unwrap();
    assert_eq!(predict(&stump, &x).unwrap(), vec![-0.5, 0.5]);
    let empty = GbtModel { trees: vec![], base_prediction: 1.25, ..stump };
    assert_eq!(predict(&empty, &x).unwrap(), vec![1.25, 1.25]);
}

#[test]
fn cv_on_a_noisy_linear_target() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let noise = Normal::new(0.0, 0.01).unwrap();
    let rows = 200;
    let mut data = Vec::with_capacity(rows * 3);
    let mut y = Vec::with_capacity(rows);
    for _ in 0..rows {
        let r: [f64; 3] = [rng.random(), rng.random(), rng.random()];
        y.push(2.0 * r[0] + noise.sample(&mut rng));
        data.extend_from_slice(&r);
    }
    let x = Matrix::new(rows, 3, data).unwrap();
    let p = GbtParams { n_estimators: 150, ..GbtParams::default() };
    let a = cross_validate(&x, &y, 5, 2, &p, 3).unwrap();
    assert!(a.mean.cod > 0.95, "COD {}", a.mean.cod);
    assert!(a.folds.iter().all(|r| r.rmse >= r.mae));
    assert_eq!(a, cross_validate(&x, &y, 5, 2, &p, 3).unwrap());
}
