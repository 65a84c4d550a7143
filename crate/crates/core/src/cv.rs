//! K-fold cross-validation on mean binomial deviance.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::FoldAssignment;
use crate::logistic::mean_deviance;
use crate::{Error, Float, Result};

/// Validation deviance per hyperparameter point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct CvCurve<F: Float> {
    /// Hyperparameter value per point (λ for paths, α for the transfer grid).
    pub hyper: Vec<F>,
    /// Mean over folds of the per-fold mean validation deviance.
    pub mean: Vec<F>,
    /// Standard error of that mean across folds.
    pub se: Vec<F>,
    pub n_folds: usize,
}

impl<F: Float> CvCurve<F> {
    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    /// `hyper,mean_deviance,se` rows; `name` replaces the first header.
    pub fn to_csv(&self, name: &str) -> String {
        let mut out = format!("{name},mean_deviance,se\n");
        for i in 0..self.len() {
            out.push_str(&format!("{:e},{:.12},{:.12}\n", self.hyper[i], self.mean[i], self.se[i]));
        }
        out
    }
}

/// Cross-validated deviance of a family of models indexed by a grid.
///
/// `fit(train_rows, valid_rows)` fits on the training rows and returns, for
/// each of the `hyper.len()` grid points, predicted probabilities for the
/// validation rows. Folds are evaluated in parallel; aggregation order is
/// fixed, so the curve does not depend on scheduling.
pub fn cv_deviance<F, Fit>(labels: &[bool], folds: &FoldAssignment, hyper: Vec<F>, fit: Fit) -> Result<CvCurve<F>>
where
    F: Float,
    Fit: Fn(&[usize], &[usize]) -> Result<Vec<Vec<F>>> + Sync,
{
    if folds.n_rows() != labels.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} fold ids for {} rows",
            folds.n_rows(),
            labels.len()
        )));
    }
    let k = folds.k();
    let n_points = hyper.len();
    for f in 0..k {
        let train = folds.train_rows(f);
        let pos = train.iter().filter(|&&i| labels[i]).count();
        if pos == 0 || pos == train.len() {
            return Err(Error::DegenerateFold(f));
        }
    }
    let per_fold: Vec<Vec<F>> = (0..k)
        .into_par_iter()
        .map(|f| {
            let train = folds.train_rows(f);
            let valid = folds.valid_rows(f);
            let preds = fit(&train, &valid)?;
            if preds.len() != n_points || preds.iter().any(|p| p.len() != valid.len()) {
                return Err(Error::DimensionMismatch(format!(
                    "fold {f}: expected {n_points} prediction vectors of length {}",
                    valid.len()
                )));
            }
            let y: Vec<bool> = valid.iter().map(|&i| labels[i]).collect();
            Ok(preds.iter().map(|p| mean_deviance(p, &y)).collect())
        })
        .collect::<Result<_>>()?;

    let kf = F::from_usize_lossy(k);
    let mut mean = Vec::with_capacity(n_points);
    let mut se = Vec::with_capacity(n_points);
    for g in 0..n_points {
        let m = per_fold.iter().fold(F::zero(), |acc, d| acc + d[g]) / kf;
        let var = per_fold.iter().fold(F::zero(), |acc, d| acc + (d[g] - m) * (d[g] - m)) / (kf - F::one());
        mean.push(m);
        se.push((var / kf).sqrt());
    }
    Ok(CvCurve { hyper, mean, se, n_folds: k })
}

/// Index of the smallest mean deviance; ties go to the earliest point, which
/// on a descending λ grid is the more regularized model.
pub fn select_min<F: Float>(curve: &CvCurve<F>) -> usize {
    assert!(!curve.is_empty(), "cannot select from an empty curve");
    let mut best = 0;
    for i in 1..curve.len() {
        if curve.mean[i] < curve.mean[best] {
            best = i;
        }
    }
    best
}
