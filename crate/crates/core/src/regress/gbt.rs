use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tree::{grow, SortedColumns, Tree};
use super::{Matrix, RegressError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GbtParams {
    pub n_estimators: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub subsample: f64,
    pub min_samples_split: usize,
    pub seed: u64,
}

impl Default for GbtParams {
    /// Desk-scale settings.
    fn default() -> Self {
        GbtParams {
            n_estimators: 500,
            max_depth: 7,
            learning_rate: 0.05,
            subsample: 0.7,
            min_samples_split: 2,
            seed: 0,
        }
    }
}

impl GbtParams {
    /// 10,000 depth-7 trees, learning rate 0.001, subsample 0.7.
    pub fn full_scale() -> Self {
        GbtParams { n_estimators: 10_000, learning_rate: 0.001, ..GbtParams::default() }
    }

    pub fn validate(&self) -> Result<(), RegressError> {
        if self.n_estimators == 0 {
            return Err(RegressError::InvalidParams("n_estimators must be at least 1"));
        }
        if self.max_depth == 0 {
            return Err(RegressError::InvalidParams("max_depth must be at least 1"));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(RegressError::InvalidParams("learning_rate must be positive"));
        }
        if !(self.subsample > 0.0 && self.subsample <= 1.0) {
            return Err(RegressError::InvalidParams("subsample must lie in (0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtModel {
    #[serde(rename = "base")]
    pub base_prediction: f64,
    #[serde(rename = "lr")]
    pub learning_rate: f64,
    pub n_features: usize,
    pub trees: Vec<Tree>,
}

impl GbtModel {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let boost: f64 = self.trees.iter().map(|t| t.predict_row(row)).sum();
        self.base_prediction + self.learning_rate * boost
    }
}

/// A fitted model with the full-training-set MSE before the first round and
/// after each round.
#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub model: GbtModel,
    pub train_mse: Vec<f64>,
}

fn mse(residuals: &[f64]) -> f64 {
    residuals.iter().map(|r| r * r).sum::<f64>() / residuals.len() as f64
}

pub fn fit(x: &Matrix, y: &[f64], p: &GbtParams) -> Result<GbtModel, RegressError> {
    fit_with_history(x, y, p).map(|r| r.model)
}

pub fn fit_with_history(x: &Matrix, y: &[f64], p: &GbtParams) -> Result<FitReport, RegressError> {
    p.validate()?;
    if x.rows() != y.len() {
        return Err(RegressError::ShapeMismatch { expected: x.rows(), got: y.len() });
    }
    if y.len() < 2 {
        return Err(RegressError::TooFewRows { rows: y.len(), needed: 2 });
    }
    if y.iter().any(|v| !v.is_finite()) || (0..x.rows()).any(|i| x.row(i).iter().any(|v| !v.is_finite())) {
        return Err(RegressError::NonFinite);
    }

    let n = y.len();
    let base = y.iter().sum::<f64>() / n as f64;
    let mut residuals: Vec<f64> = y.iter().map(|v| v - base).collect();
    let mut history = Vec::with_capacity(p.n_estimators + 1);
    history.push(mse(&residuals));
    let mut model = GbtModel {
        base_prediction: base,
        learning_rate: p.learning_rate,
        n_features: x.cols(),
        trees: Vec::new(),
    };
    if residuals.iter().all(|&r| r == 0.0) {
        log::warn!("target is constant; model reduces to its mean");
        return Ok(FitReport { model, train_mse: history });
    }

    let cols = SortedColumns::new(x);
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let take = ((p.subsample * n as f64) as usize).clamp(1, n);
    let mut order: Vec<usize> = (0..n).collect();
    for _ in 0..p.n_estimators {
        let sample: Vec<usize> = if take == n {
            order.clone()
        } else {
            order.sort_unstable();
            let (chosen, _) = order.partial_shuffle(&mut rng, take);
            let mut s = chosen.to_vec();
            s.sort_unstable();
            s
        };
        let tree = grow(x, &cols, &residuals, &sample, p.max_depth, p.min_samples_split);
        for (i, r) in residuals.iter_mut().enumerate() {
            *r -= p.learning_rate * tree.predict_row(x.row(i));
        }
        history.push(mse(&residuals));
        model.trees.push(tree);
    }
    Ok(FitReport { model, train_mse: history })
}

pub fn predict(m: &GbtModel, x: &Matrix) -> Result<Vec<f64>, RegressError> {
    if x.cols() != m.n_features {
        return Err(RegressError::ShapeMismatch { expected: m.n_features, got: x.cols() });
    }
    Ok((0..x.rows()).map(|i| m.predict_row(x.row(i))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regress::tree::Node;
    use alloc::vec;

    #[test]
    fn constant_target() {
        let x = Matrix::new(4, 1, vec![0., 1., 2., 3.]).unwrap();
        let m = fit(&x, &[3.0; 4], &GbtParams::default()).unwrap();
        assert!(m.trees.is_empty());
        assert_eq!(predict(&m, &x).unwrap(), vec![3.0; 4]);
    }

    #[test]
    fn empty_model_predicts_base() {
        let m = GbtModel { base_prediction: 1.5, learning_rate: 0.1, n_features: 2, trees: vec![] };
        let x = Matrix::new(2, 2, vec![0., 1., 2., 3.]).unwrap();
        assert_eq!(predict(&m, &x).unwrap(), vec![1.5, 1.5]);
    }

    #[test]
    fn stump_model() {
        let m = GbtModel {
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
        assert_eq!(predict(&m, &x).unwrap(), vec![-0.5, 0.5]);
        let wrong = Matrix::new(1, 2, vec![0.0, 2.0]).unwrap();
        assert_eq!(
            predict(&m, &wrong),
            Err(RegressError::ShapeMismatch { expected: 1, got: 2 })
        );
    }

    #[test]
    fn duplicate_rows_get_their_mean() {
        let x = Matrix::new(2, 1, vec![1.0, 1.0]).unwrap();
        let m = fit(&x, &[1.0, 3.0], &GbtParams { n_estimators: 5, ..GbtParams::default() }).unwrap();
        assert_eq!(predict(&m, &x).unwrap(), vec![2.0, 2.0]);
    }

    #[test]
    fn shape_and_param_errors() {
        let x = Matrix::new(3, 1, vec![0., 1., 2.]).unwrap();
        assert!(matches!(fit(&x, &[1.0, 2.0], &GbtParams::default()), Err(RegressError::ShapeMismatch { .. })));
        let bad = GbtParams { learning_rate: 0.0, ..GbtParams::default() };
        assert!(matches!(fit(&x, &[1., 2., 3.], &bad), Err(RegressError::InvalidParams(_))));
        let one = Matrix::new(1, 1, vec![0.]).unwrap();
        assert!(matches!(fit(&one, &[1.], &GbtParams::default()), Err(RegressError::TooFewRows { .. })));
        let nan = Matrix::new(2, 1, vec![f64::NAN, 1.0]).unwrap();
        assert_eq!(fit(&nan, &[1., 2.], &GbtParams::default()), Err(RegressError::NonFinite));
    }

    #[test]
    fn linear_target_is_learned() {
        let n = 100;
        let xs: Vec<f64> = (0..n).map(|i| i as f64 / 10.0).collect();
        let x = Matrix::new(n, 1, xs.clone()).unwrap();
        let p = GbtParams { n_estimators: 200, max_depth: 7, learning_rate: 0.1, ..GbtParams::default() };
        let report = fit_with_history(&x, &xs, &p).unwrap();
        let pred = predict(&report.model, &x).unwrap();
        let eval = crate::regress::evaluate(&xs, &pred).unwrap();
        assert!(eval.cod > 0.99, "R² = {}", eval.cod);
        assert!(report.model.trees.iter().all(|t| t.depth() <= 7));
        // same inputs, same model
        assert_eq!(fit(&x, &xs, &p).unwrap(), report.model);
    }
}
