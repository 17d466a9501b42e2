use serde::{Deserialize, Serialize};

use super::RegressError;
use crate::math;

/// Coefficient of determination, Pearson correlation, MAE and RMSE.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EvalReport {
    pub cod: f64,
    pub pcc: f64,
    pub mae: f64,
    pub rmse: f64,
    /// Set when either vector is constant; `pcc` is then reported as 0.
    #[serde(default)]
    pub pcc_undefined: bool,
}

pub fn evaluate(y_true: &[f64], y_pred: &[f64]) -> Result<EvalReport, RegressError> {
    if y_true.len() != y_pred.len() || y_true.is_empty() {
        return Err(RegressError::LengthMismatch(y_true.len(), y_pred.len()));
    }
    let n = y_true.len() as f64;
    let mean_t = y_true.iter().sum::<f64>() / n;
    let mean_p = y_pred.iter().sum::<f64>() / n;
    let (mut ss_res, mut ss_tot, mut abs) = (0.0, 0.0, 0.0);
    let (mut cov, mut var_t, mut var_p) = (0.0, 0.0, 0.0);
    for (&t, &p) in y_true.iter().zip(y_pred) {
        let e = t - p;
        ss_res += e * e;
        abs += e.abs();
        let (dt, dp) = (t - mean_t, p - mean_p);
        ss_tot += dt * dt;
        cov += dt * dp;
        var_t += dt * dt;
        var_p += dp * dp;
    }
    let cod = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else if ss_res == 0.0 {
        1.0
    } else {
        0.0
    };
    let pcc_undefined = var_t == 0.0 || var_p == 0.0;
    let pcc = if pcc_undefined {
        0.0
    } else {
        (cov / math::sqrt(var_t * var_p)).clamp(-1.0, 1.0)
    };
    let mae = abs / n;
    // rounding can put sqrt(mean e²) a hair below mean |e| when all |e| are equal
    let rmse = math::sqrt(ss_res / n).max(mae);
    Ok(EvalReport { cod, pcc, mae, rmse, pcc_undefined })
}
