use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{evaluate, fit, predict, EvalReport, GbtParams, Matrix, RegressError};

#[derive(Debug, Clone, PartialEq)]
pub struct CvReport {
    /// Metrics averaged over every fold of every repeat.
    pub mean: EvalReport,
    /// Per-fold reports, repeat-major.
    pub folds: Vec<EvalReport>,
    pub n_folds: usize,
    pub repeats: usize,
}

/// Fold index of every row for one repeat: a seeded permutation cut into
/// `folds` contiguous chunks whose sizes differ by at most one.
pub fn fold_assignments(rows: usize, folds: usize, seed: u64, repeat: usize) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(repeat as u64);
    let mut perm: Vec<usize> = (0..rows).collect();
    perm.shuffle(&mut rng);
    let mut fold_of = vec![0; rows];
    let (base, extra) = (rows / folds, rows % folds);
    let mut pos = 0;
    for fold in 0..folds {
        let size = base + usize::from(fold < extra);
        for &row in &perm[pos..pos + size] {
            fold_of[row] = fold;
        }
        pos += size;
    }
    fold_of
}

/// Repeated k-fold cross-validation of the boosted-tree regressor.
pub fn cross_validate(
    x: &Matrix,
    y: &[f64],
    folds: usize,
    repeats: usize,
    p: &GbtParams,
    seed: u64,
) -> Result<CvReport, RegressError> {
    if x.rows() != y.len() {
        return Err(RegressError::ShapeMismatch { expected: x.rows(), got: y.len() });
    }
    if folds < 2 {
        return Err(RegressError::InvalidParams("folds must be at least 2"));
    }
    if repeats == 0 {
        return Err(RegressError::InvalidParams("repeats must be at least 1"));
    }
    if y.len() < folds {
        return Err(RegressError::TooFewRows { rows: y.len(), needed: folds });
    }
    let mut reports = Vec::with_capacity(folds * repeats);
    for repeat in 0..repeats {
        let fold_of = fold_assignments(y.len(), folds, seed, repeat);
        for fold in 0..folds {
            let (test, train): (Vec<usize>, Vec<usize>) = (0..y.len()).partition(|&i| fold_of[i] == fold);
            let y_train: Vec<f64> = train.iter().map(|&i| y[i]).collect();
            let y_test: Vec<f64> = test.iter().map(|&i| y[i]).collect();
            let model = fit(&x.select_rows(&train), &y_train, p)?;
            let pred = predict(&model, &x.select_rows(&test))?;
            reports.push(evaluate(&y_test, &pred)?);
        }
    }
    let k = reports.len() as f64;
    let mean = EvalReport {
        cod: reports.iter().map(|r| r.cod).sum::<f64>() / k,
        pcc: reports.iter().map(|r| r.pcc).sum::<f64>() / k,
        mae: reports.iter().map(|r| r.mae).sum::<f64>() / k,
        rmse: reports.iter().map(|r| r.rmse).sum::<f64>() / k,
        pcc_undefined: reports.iter().all(|r| r.pcc_undefined),
    };
    Ok(CvReport { mean, folds: reports, n_folds: folds, repeats })
}
