//! Probability evaluation: Brier score, calibration curves, and the
//! neighborhood-size study.
//!
//! The Brier score is the mean squared error between predicted swing
//! probabilities and observed outcomes. Calibration curves cut [0, 1] into
//! equal-width bins and compare each bin's mean prediction against its
//! observed swing fraction. Sums use compensated (Kahan) accumulation so
//! that binned totals recombine to the overall score at near machine
//! precision, which the test suite checks as an identity.

use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::knn::{score_dataset, IndexSet};
use crate::types::BallRecord;

/// Compensated sum (Kahan-Babuska/Neumaier). Grouping terms and summing
/// the groups gives the same result as one pass, to within a few ulps,
/// regardless of input magnitude mixes.
pub fn kahan_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

fn check_prediction_set(predictions: &[f64], outcomes: &[bool]) -> Result<()> {
    if predictions.is_empty() {
        return Err(Error::Parameter(
            "cannot evaluate an empty prediction set".into(),
        ));
    }
    if predictions.len() != outcomes.len() {
        return Err(Error::Parameter(format!(
            "{} predictions but {} outcomes",
            predictions.len(),
            outcomes.len()
        )));
    }
    if let Some(p) = predictions
        .iter()
        .find(|p| !(0.0..=1.0).contains(*p))
    {
        return Err(Error::Parameter(format!(
            "prediction {p} outside [0, 1]"
        )));
    }
    Ok(())
}

/// Mean squared error of probabilistic predictions against binary
/// outcomes. 0 is perfect; 0.25 is the score of a constant 0.5.
pub fn brier_score(predictions: &[f64], outcomes: &[bool]) -> Result<f64> {
    check_prediction_set(predictions, outcomes)?;
    let n = predictions.len() as f64;
    let total = kahan_sum(predictions.iter().zip(outcomes).map(|(&p, &y)| {
        let e = p - if y { 1.0 } else { 0.0 };
        e * e
    }));
    Ok(total / n)
}

/// Bin index for a prediction: equal-width bins, half-open below the last,
/// which closes at 1.0.
pub fn bin_index(p: f64, bins: usize) -> usize {
    ((p * bins as f64).floor() as usize).min(bins - 1)
}

/// One calibration bin. `mean_prediction` and `observed_frequency` are
/// `None` when the bin received no predictions.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationBin {
    pub lo: f64,
    pub hi: f64,
    pub count: u64,
    pub mean_prediction: Option<f64>,
    pub observed_frequency: Option<f64>,
}

/// Calibration curve over `bins` equal-width probability bins.
pub fn calibration_curve(
    predictions: &[f64],
    outcomes: &[bool],
    bins: usize,
) -> Result<Vec<CalibrationBin>> {
    if bins < 2 {
        return Err(Error::Parameter(format!(
            "calibration needs at least 2 bins, got {bins}"
        )));
    }
    check_prediction_set(predictions, outcomes)?;

    let mut counts = vec![0u64; bins];
    let mut pred_acc = vec![Vec::<f64>::new(); bins];
    let mut swing_counts = vec![0u64; bins];
    for (&p, &y) in predictions.iter().zip(outcomes) {
        let b = bin_index(p, bins);
        counts[b] += 1;
        pred_acc[b].push(p);
        if y {
            swing_counts[b] += 1;
        }
    }

    Ok((0..bins)
        .map(|b| {
            let lo = b as f64 / bins as f64;
            let hi = (b + 1) as f64 / bins as f64;
            if counts[b] == 0 {
                CalibrationBin {
                    lo,
                    hi,
                    count: 0,
                    mean_prediction: None,
                    observed_frequency: None,
                }
            } else {
                let n = counts[b] as f64;
                CalibrationBin {
                    lo,
                    hi,
                    count: counts[b],
                    mean_prediction: Some(kahan_sum(pred_acc[b].iter().copied()) / n),
                    observed_frequency: Some(swing_counts[b] as f64 / n),
                }
            }
        })
        .collect())
}

/// Evaluation of one prediction set at one neighborhood size.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationReport {
    pub k: usize,
    pub n: usize,
    pub brier: f64,
    pub bins: Vec<CalibrationBin>,
}

pub fn evaluate_predictions(
    k: usize,
    predictions: &[f64],
    outcomes: &[bool],
    bins: usize,
) -> Result<CalibrationReport> {
    Ok(CalibrationReport {
        k,
        n: predictions.len(),
        brier: brier_score(predictions, outcomes)?,
        bins: calibration_curve(predictions, outcomes, bins)?,
    })
}

/// Scores the evaluation set at each requested neighborhood size and
/// reports Brier plus calibration per k, in the order given.
pub fn k_selection_study(
    indexes: &IndexSet,
    evaluation: &[BallRecord],
    ks: &[usize],
    bins: usize,
) -> Result<Vec<CalibrationReport>> {
    if ks.is_empty() {
        return Err(Error::Parameter("no k values requested".into()));
    }
    if evaluation.is_empty() {
        return Err(Error::Parameter("evaluation set is empty".into()));
    }
    let outcomes: Vec<bool> = evaluation.iter().map(|b| b.label.is_swing()).collect();
    let mut reports = Vec::with_capacity(ks.len());
    for &k in ks {
        let scored = score_dataset(indexes, evaluation, Some(k))?;
        let predictions: Vec<f64> = scored.par_iter().map(|s| s.p_s).collect();
        reports.push(evaluate_predictions(k, &predictions, &outcomes, bins)?);
    }
    Ok(reports)
}

/// Writes calibration reports as CSV: one row per (k, bin), empty cells
/// for empty bins. Values keep full precision.
pub fn write_calibration_csv(path: &Path, reports: &[CalibrationReport]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    writer
        .write_record([
            "k",
            "bin_lo",
            "bin_hi",
            "mean_prediction",
            "observed_frequency",
            "count",
        ])
        .map_err(|e| Error::csv(path, e))?;
    for report in reports {
        for bin in &report.bins {
            writer
                .write_record([
                    report.k.to_string(),
                    bin.lo.to_string(),
                    bin.hi.to_string(),
                    bin.mean_prediction.map(|v| v.to_string()).unwrap_or_default(),
                    bin.observed_frequency
                        .map(|v| v.to_string())
                        .unwrap_or_default(),
                    bin.count.to_string(),
                ])
                .map_err(|e| Error::csv(path, e))?;
        }
    }
    writer.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}
