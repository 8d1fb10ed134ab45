//! Validation metrics, per-coordinate breakdowns, prediction averaging and
//! report emission.
//!
//! The headline error is the MSE over all N x 3 squared residuals, which
//! equals the mean of the three per-coordinate MSEs. The distance metric is
//! the per-sample Euclidean norm averaged over samples; the all-samples
//! residual norm (every squared residual under one square root) is exposed
//! separately as [`total_residual_norm`].

pub mod figures;

use std::fmt::Write as _;
use std::path::Path;

use crate::datagen::fmt_f64;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

fn check_shapes(y_true: &Matrix, y_pred: &Matrix) -> Result<()> {
    if y_true.nrows() == 0 {
        return Err(Error::InvalidArgument("no samples to evaluate".into()));
    }
    if y_true.nrows() != y_pred.nrows() || y_true.ncols() != y_pred.ncols() {
        return Err(Error::InvalidArgument(format!(
            "shape mismatch: truth {}x{}, prediction {}x{}",
            y_true.nrows(),
            y_true.ncols(),
            y_pred.nrows(),
            y_pred.ncols()
        )));
    }
    Ok(())
}

/// Mean over all N x K squared residuals.
pub fn mse(y_true: &Matrix, y_pred: &Matrix) -> Result<f64> {
    check_shapes(y_true, y_pred)?;
    let n = y_true.nrows() * y_true.ncols();
    let acc: f64 = y_true
        .data()
        .iter()
        .zip(y_pred.data())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(acc / n as f64)
}

/// Column-wise MSE.
pub fn per_coordinate_mse(y_true: &Matrix, y_pred: &Matrix) -> Result<Vec<f64>> {
    check_shapes(y_true, y_pred)?;
    let n = y_true.nrows();
    let k = y_true.ncols();
    let mut out = vec![0.0; k];
    for r in 0..n {
        for (o, out_o) in out.iter_mut().enumerate() {
            let d = y_true.get(r, o) - y_pred.get(r, o);
            *out_o += d * d;
        }
    }
    for o in &mut out {
        *o /= n as f64;
    }
    Ok(out)
}

/// Mean over samples of the Euclidean distance between truth and
/// prediction.
pub fn mean_euclidean_distance(y_true: &Matrix, y_pred: &Matrix) -> Result<f64> {
    check_shapes(y_true, y_pred)?;
    let n = y_true.nrows();
    let mut acc = 0.0;
    for r in 0..n {
        let d2: f64 = y_true
            .row(r)
            .iter()
            .zip(y_pred.row(r))
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        acc += d2.sqrt();
    }
    Ok(acc / n as f64)
}

/// All squared residuals under one square root.
pub fn total_residual_norm(y_true: &Matrix, y_pred: &Matrix) -> Result<f64> {
    check_shapes(y_true, y_pred)?;
    let acc: f64 = y_true
        .data()
        .iter()
        .zip(y_pred.data())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(acc.sqrt())
}

/// Column-wise mean absolute deviation.
pub fn per_coordinate_mean_abs(y_true: &Matrix, y_pred: &Matrix) -> Result<Vec<f64>> {
    check_shapes(y_true, y_pred)?;
    let n = y_true.nrows();
    let k = y_true.ncols();
    let mut out = vec![0.0; k];
    for r in 0..n {
        for (o, out_o) in out.iter_mut().enumerate() {
            *out_o += (y_true.get(r, o) - y_pred.get(r, o)).abs();
        }
    }
    for o in &mut out {
        *o /= n as f64;
    }
    Ok(out)
}

/// Elementwise mean of two prediction matrices over the same validation
/// rows. Callers are responsible for label alignment; shape mismatches are
/// rejected here.
pub fn average_predictions(pred_a: &Matrix, pred_b: &Matrix) -> Result<Matrix> {
    check_shapes(pred_a, pred_b)?;
    let rows: Vec<Vec<f64>> = (0..pred_a.nrows())
        .map(|r| {
            pred_a
                .row(r)
                .iter()
                .zip(pred_b.row(r))
                .map(|(a, b)| 0.5 * (a + b))
                .collect()
        })
        .collect();
    Matrix::from_rows(&rows)
}

/// Validation metrics for one model.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub model: String,
    pub n_samples: usize,
    pub mse_overall: f64,
    pub mse_per_coordinate: [f64; 3],
    pub mean_distance: f64,
    pub mad_per_coordinate: [f64; 3],
}

impl EvalReport {
    pub fn compute(model: &str, y_true: &Matrix, y_pred: &Matrix) -> Result<EvalReport> {
        if y_true.ncols() != 3 {
            return Err(Error::InvalidArgument(format!(
                "evaluation reports expect 3 label columns, got {}",
                y_true.ncols()
            )));
        }
        let per = per_coordinate_mse(y_true, y_pred)?;
        let mad = per_coordinate_mean_abs(y_true, y_pred)?;
        Ok(EvalReport {
            model: model.to_string(),
            n_samples: y_true.nrows(),
            mse_overall: mse(y_true, y_pred)?,
            mse_per_coordinate: [per[0], per[1], per[2]],
            mean_distance: mean_euclidean_distance(y_true, y_pred)?,
            mad_per_coordinate: [mad[0], mad[1], mad[2]],
        })
    }
}

pub const REPORT_CSV_HEADER: &str =
    "model,n_samples,mse_overall,mse_x,mse_y,mse_z,mean_dist,mad_x,mad_y,mad_z";

/// One CSV row per model, SI units, 17 significant digits. An empty report
/// list is an error and writes nothing.
pub fn write_report_csv(reports: &[EvalReport], path: &Path) -> Result<()> {
    if reports.is_empty() {
        return Err(Error::InvalidArgument(
            "refusing to write an empty evaluation report".into(),
        ));
    }
    let mut out = String::from(REPORT_CSV_HEADER);
    out.push('\n');
    for r in reports {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.model,
            r.n_samples,
            fmt_f64(r.mse_overall),
            fmt_f64(r.mse_per_coordinate[0]),
            fmt_f64(r.mse_per_coordinate[1]),
            fmt_f64(r.mse_per_coordinate[2]),
            fmt_f64(r.mean_distance),
            fmt_f64(r.mad_per_coordinate[0]),
            fmt_f64(r.mad_per_coordinate[1]),
            fmt_f64(r.mad_per_coordinate[2]),
        );
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Parse a report CSV written by [`write_report_csv`].
pub fn read_report_csv(path: &Path) -> Result<Vec<EvalReport>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == REPORT_CSV_HEADER => {}
        _ => {
            return Err(Error::Parse {
                path: path.into(),
                line: 1,
                msg: format!("expected header '{REPORT_CSV_HEADER}'"),
            })
        }
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 10 {
            return Err(Error::Parse {
                path: path.into(),
                line: i + 1,
                msg: format!("expected 10 fields, found {}", f.len()),
            });
        }
        let num = |s: &str| -> Result<f64> {
            s.parse().map_err(|_| Error::Parse {
                path: path.into(),
                line: i + 1,
                msg: format!("bad float '{s}'"),
            })
        };
        out.push(EvalReport {
            model: f[0].to_string(),
            n_samples: f[1].parse().map_err(|_| Error::Parse {
                path: path.into(),
                line: i + 1,
                msg: format!("bad count '{}'", f[1]),
            })?,
            mse_overall: num(f[2])?,
            mse_per_coordinate: [num(f[3])?, num(f[4])?, num(f[5])?],
            mean_distance: num(f[6])?,
            mad_per_coordinate: [num(f[7])?, num(f[8])?, num(f[9])?],
        });
    }
    Ok(out)
}
