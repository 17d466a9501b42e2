//! Gradient-boosted regression trees with squared-error loss, regression
//! metrics and a repeated k-fold cross-validation harness.

mod cv;
mod gbt;
mod metrics;
mod tree;

use alloc::vec::Vec;

use thiserror::Error;

pub use cv::{cross_validate, fold_assignments, CvReport};
pub use gbt::{fit, fit_with_history, predict, FitReport, GbtModel, GbtParams};
pub use metrics::{evaluate, EvalReport};
pub use tree::{Node, Tree};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RegressError {
    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("length mismatch: {0} true values vs {1} predictions")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} rows, got {rows}")]
    TooFewRows { rows: usize, needed: usize },
    #[error("input contains NaN or infinite values")]
    NonFinite,
    #[error("invalid parameters: {0}")]
    InvalidParams(&'static str),
}

/// Dense row-major feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Matrix, RegressError> {
        if data.len() != rows * cols {
            return Err(RegressError::ShapeMismatch { expected: rows * cols, got: data.len() });
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Matrix, RegressError> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(RegressError::ShapeMismatch { expected: cols, got: r.len() });
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix { rows: rows.len(), cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Matrix { rows: idx.len(), cols: self.cols, data }
    }

    pub fn map_column(&mut self, j: usize, f: impl Fn(f64) -> f64) {
        for i in 0..self.rows {
            let x = &mut self.data[i * self.cols + j];
            *x = f(*x);
        }
    }
}
