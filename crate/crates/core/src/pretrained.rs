//! Pretrained lasso for grouped populations.
//!
//! An overall lasso is fit on every group and its λ chosen by CV. Each group
//! then gets its own lasso whose offset is `(1 − α)(Xβ̂₀ + μ̂₀)` and whose
//! penalty factors favor the overall support `S`: `pfⱼ = (1 − α)/α` outside
//! `S` and `1 − α` inside. `α = 1` is an ordinary per-group lasso; `α = 0`
//! refits only `S` on top of the full overall prediction.

use std::collections::BTreeMap;

use ndarray::{Array1, ArrayView1, ArrayView2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cv::CvCurve;
use crate::data::{Coding, Dataset, FoldAssignment};
use crate::lasso::{predict_proba, LambdaGrid, PathEntry, PenaltySpec, SolverOptions};
use crate::model::{lasso_cv, Encoder, FitSettings, LassoCvFit};
use crate::{Error, Float, Result};

/// Default α grid.
pub fn default_alpha_grid<F: Float>() -> Vec<F> {
    [0.0, 0.25, 0.5, 0.75, 1.0].iter().map(|&a| F::lit(a)).collect()
}

/// Overall model: CV-selected entry of a lasso path on all groups.
pub fn fit_overall<F: Float>(
    x: ArrayView2<F>,
    y: ArrayView1<F>,
    folds: &FoldAssignment,
    lambdas: &LambdaGrid<F>,
    opts: &SolverOptions<F>,
) -> Result<LassoCvFit<F>> {
    let spec = PenaltySpec::uniform(x.ncols()).with_lambdas(lambdas.clone());
    lasso_cv(x, y, &spec, folds, opts)
}

/// `(1 − α)(X β̂₀ + μ̂₀)`.
pub fn compute_offset<F: Float>(x: ArrayView2<F>, intercept: F, beta: ArrayView1<F>, alpha: F) -> Result<Array1<F>> {
    if x.ncols() != beta.len() {
        return Err(Error::DimensionMismatch(format!("{} columns for {} coefficients", x.ncols(), beta.len())));
    }
    check_alpha(alpha)?;
    let c = F::one() - alpha;
    Ok(x.dot(&beta).mapv(|v| c * (v + intercept)))
}

/// Literal factors `(1 − α)·[I(j ∉ S)/α + I(j ∈ S)]`; `∞` outside `S` at `α = 0`.
pub fn compute_penalty_factors<F: Float>(support: &[usize], p: usize, alpha: F) -> Vec<F> {
    let c = F::one() - alpha;
    (0..p)
        .map(|j| {
            if support.contains(&j) {
                c
            } else if alpha == F::zero() {
                F::infinity()
            } else {
                c / alpha
            }
        })
        .collect()
}

/// Factors rescaled so the smallest finite one is 1. A global rescaling only
/// relabels λ; at `α = 1` this is the uniform limit of the ratio `1/α`.
pub fn normalized_penalty_factors<F: Float>(support: &[usize], p: usize, alpha: F) -> Vec<F> {
    if alpha >= F::one() {
        return vec![F::one(); p];
    }
    let pf = compute_penalty_factors(support, p, alpha);
    let min = pf.iter().copied().filter(|v| v.is_finite()).fold(F::infinity(), F::min);
    if min.is_finite() && min > F::zero() {
        pf.into_iter().map(|v| v / min).collect()
    } else {
        pf
    }
}

fn check_alpha<F: Float>(alpha: F) -> Result<()> {
    if !(alpha >= F::zero() && alpha <= F::one()) {
        return Err(Error::InvalidInput(format!("alpha = {alpha} outside [0, 1]")));
    }
    Ok(())
}

/// Overall fit, as stored in the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct OverallFit<F: Float> {
    pub entry: PathEntry<F>,
    pub support: Vec<usize>,
    pub cv: CvCurve<F>,
}

/// Fine-tuned fit of one group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct GroupFit<F: Float> {
    pub entry: PathEntry<F>,
    pub cv: CvCurve<F>,
    pub n_rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct PretrainedModel<F: Float> {
    pub encoder: Encoder<F>,
    pub overall: OverallFit<F>,
    pub alpha: F,
    /// Normalized factors shared by every group fit.
    #[serde(with = "crate::io::serde_pf")]
    pub penalty_factors: Vec<F>,
    pub groups: BTreeMap<String, GroupFit<F>>,
    /// Group-aggregated CV deviance per candidate α, when α was selected.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_cv: Option<CvCurve<F>>,
}

/// Per-group fits at one α. Each group's λ is chosen by CV on the shared
/// folds restricted to its rows; groups are fitted in parallel.
pub fn fit_group_models<F: Float>(
    x: ArrayView2<F>,
    y: ArrayView1<F>,
    groups: &[String],
    overall: &PathEntry<F>,
    alpha: F,
    folds: &FoldAssignment,
    settings: &FitSettings<F>,
) -> Result<(Vec<F>, BTreeMap<String, GroupFit<F>>)> {
    check_alpha(alpha)?;
    let support = overall.support();
    let pf = normalized_penalty_factors(&support, x.ncols(), alpha);
    let mut labels: Vec<&String> = groups.iter().collect();
    labels.sort();
    labels.dedup();
    let fits: Vec<(String, GroupFit<F>)> = labels
        .par_iter()
        .map(|&label| {
            let rows: Vec<usize> = (0..groups.len()).filter(|&i| &groups[i] == label).collect();
            let pos = rows.iter().filter(|&&i| y[i] == F::one()).count();
            if pos == 0 || pos == rows.len() {
                return Err(Error::DegenerateGroup(label.clone()));
            }
            let gf = folds.restrict(&rows).ok_or_else(|| Error::DegenerateGroup(label.clone()))?;
            let xk = x.select(Axis(0), &rows);
            let yk = y.select(Axis(0), &rows);
            let offset = compute_offset(xk.view(), overall.intercept, overall.beta.view(), alpha)?;
            let spec = PenaltySpec::uniform(x.ncols())
                .with_lambdas(settings.lambdas.clone())
                .with_penalty_factors(pf.clone())
                .with_offset(offset);
            let fit = lasso_cv(xk.view(), yk.view(), &spec, &gf, &settings.solver)?;
            let entry = fit.selected_entry().clone();
            Ok((label.clone(), GroupFit { entry, cv: fit.cv, n_rows: rows.len() }))
        })
        .collect::<Result<_>>()?;
    Ok((pf, fits.into_iter().collect()))
}

/// Row-weighted mean of the groups' minimum CV deviances, with its standard
/// error combined the same way.
fn aggregate_cv<F: Float>(groups: &BTreeMap<String, GroupFit<F>>) -> (F, F) {
    let total = F::from_usize_lossy(groups.values().map(|g| g.n_rows).sum());
    let mut mean = F::zero();
    let mut var = F::zero();
    for g in groups.values() {
        let w = F::from_usize_lossy(g.n_rows) / total;
        let i = crate::cv::select_min(&g.cv);
        mean += w * g.cv.mean[i];
        var += w * w * g.cv.se[i] * g.cv.se[i];
    }
    (mean, var.sqrt())
}

/// α with the smallest aggregated CV deviance; ties go to the larger α.
/// Returns the index into `curve.hyper`.
pub fn select_alpha<F: Float>(curve: &CvCurve<F>) -> usize {
    assert!(!curve.is_empty(), "cannot select from an empty curve");
    let mut best = 0;
    for i in 1..curve.len() {
        let (m, b) = (curve.mean[i], curve.mean[best]);
        if m < b || (m == b && curve.hyper[i] > curve.hyper[best]) {
            best = i;
        }
    }
    best
}

/// Fits the full procedure. With several α values the group fits are
/// repeated per α against the same overall fit and the best α is kept.
pub fn fit_pretrained<F: Float>(
    train: &Dataset<F>,
    folds: &FoldAssignment,
    alphas: &[F],
    settings: &FitSettings<F>,
) -> Result<PretrainedModel<F>> {
    if alphas.is_empty() {
        return Err(Error::InvalidInput("empty alpha grid".into()));
    }
    for &a in alphas {
        check_alpha(a)?;
    }
    fit_pretrained_with(Encoder::fit(train, Some(Coding::Reference))?, train, folds, alphas, settings)
}

/// As [`fit_pretrained`] with a given encoder.
pub fn fit_pretrained_with<F: Float>(
    encoder: Encoder<F>,
    train: &Dataset<F>,
    folds: &FoldAssignment,
    alphas: &[F],
    settings: &FitSettings<F>,
) -> Result<PretrainedModel<F>> {
    if alphas.is_empty() {
        return Err(Error::InvalidInput("empty alpha grid".into()));
    }
    for &a in alphas {
        check_alpha(a)?;
    }
    let x = encoder.transform(train)?;
    let y = train.y_float();
    let overall_fit = fit_overall(x.view(), y.view(), folds, &settings.lambdas, &settings.solver)?;
    let entry = overall_fit.selected_entry().clone();
    let overall = OverallFit { support: entry.support(), entry, cv: overall_fit.cv };

    let mut candidates = Vec::with_capacity(alphas.len());
    for &a in alphas {
        candidates.push(fit_group_models(x.view(), y.view(), train.groups(), &overall.entry, a, folds, settings)?);
    }
    let (alpha_cv, best) = if alphas.len() > 1 {
        let stats: Vec<(F, F)> = candidates.iter().map(|(_, g)| aggregate_cv(g)).collect();
        let curve = CvCurve {
            hyper: alphas.to_vec(),
            mean: stats.iter().map(|s| s.0).collect(),
            se: stats.iter().map(|s| s.1).collect(),
            n_folds: folds.k(),
        };
        let best = select_alpha(&curve);
        (Some(curve), best)
    } else {
        (None, 0)
    };
    let (penalty_factors, groups) = candidates.swap_remove(best);
    Ok(PretrainedModel { encoder, overall, alpha: alphas[best], penalty_factors, groups, alpha_cv })
}

impl<F: Float> PretrainedModel<F> {
    /// Routes each row to its group's fit. Rows of groups unseen in training
    /// raise `UnknownGroup` unless `allow_fallback`, in which case they are
    /// scored by the overall model; the second value flags those rows.
    pub fn predict_proba(&self, ds: &Dataset<F>, allow_fallback: bool) -> Result<(Array1<F>, Vec<bool>)> {
        let x = self.encoder.transform(ds)?;
        let mut out = Array1::zeros(ds.n_rows());
        let mut fallback = vec![false; ds.n_rows()];
        let mut by_group: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (i, g) in ds.groups().iter().enumerate() {
            by_group.entry(g.as_str()).or_default().push(i);
        }
        let o = &self.overall.entry;
        for (label, rows) in by_group {
            let xk = x.select(Axis(0), &rows);
            let p = match self.groups.get(label) {
                Some(g) => {
                    let offset = compute_offset(xk.view(), o.intercept, o.beta.view(), self.alpha)?;
                    predict_proba(&g.entry, xk.view(), Some(offset.view()))?
                }
                None if allow_fallback => {
                    for &i in &rows {
                        fallback[i] = true;
                    }
                    predict_proba(o, xk.view(), None)?
                }
                None => return Err(Error::UnknownGroup(label.to_string())),
            };
            for (k, &i) in rows.iter().enumerate() {
                out[i] = p[k];
            }
        }
        Ok((out, fallback))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use proptest::prelude::*;

    #[test]
    fn offset_examples() {
        let x = array![[1.0_f64, 2.0]];
        let beta = array![1.0, -1.0];
        let o = compute_offset(x.view(), 0.5, beta.view(), 0.25).unwrap();
        assert_abs_diff_eq!(o[0], -0.375, epsilon = 1e-15);
        assert_eq!(compute_offset(x.view(), 0.5, beta.view(), 1.0).unwrap()[0], 0.0);
        assert_eq!(compute_offset(x.view(), 0.0, array![0.0, 0.0].view(), 0.3).unwrap()[0], 0.0);
        assert!(matches!(compute_offset(x.view(), 0.0, array![1.0].view(), 0.5), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn penalty_factor_examples() {
        assert_eq!(compute_penalty_factors(&[0, 2], 4, 0.5_f64), vec![0.5, 1.0, 0.5, 1.0]);
        assert_eq!(normalized_penalty_factors(&[0, 2], 4, 1.0_f64), vec![1.0; 4]);
        assert_eq!(normalized_penalty_factors(&[0, 2], 4, 0.0_f64), vec![1.0, f64::INFINITY, 1.0, f64::INFINITY]);
        assert_eq!(normalized_penalty_factors(&[], 3, 0.4_f64), vec![1.0; 3]);
        assert_eq!(normalized_penalty_factors(&[0, 2], 4, 0.5_f64), vec![1.0, 2.0, 1.0, 2.0]);
    }

    fn curve(hyper: Vec<f64>, mean: Vec<f64>) -> CvCurve<f64> {
        let n = mean.len();
        CvCurve { hyper, mean, se: vec![0.0; n], n_folds: 3 }
    }

    #[test]
    fn alpha_selection_rules() {
        assert_eq!(select_alpha(&curve(vec![0.5], vec![1.0])), 0);
        assert_eq!(select_alpha(&curve(vec![0.0, 0.5, 1.0], vec![1.0, 1.0, 1.0])), 2);
        assert_eq!(select_alpha(&curve(vec![1.0, 0.0, 0.5], vec![2.0, 2.0, 2.0])), 0);
        assert_eq!(select_alpha(&curve(vec![0.0, 0.5, 1.0], vec![1.0, 0.9, 1.1])), 1);
    }

    proptest! {
        #[test]
        fn pf_ratio_is_inverse_alpha(alpha in 0.01f64..0.99, p in 2usize..12, s in 0usize..12) {
            let s = s % p;
            let support: Vec<usize> = (0..p).filter(|j| j % 2 == 0).take(s.max(1)).collect();
            let pf = compute_penalty_factors(&support, p, alpha);
            let inside = pf[support[0]];
            for j in 0..p {
                if !support.contains(&j) {
                    prop_assert!((pf[j] / inside - 1.0 / alpha).abs() < 1e-12 / alpha);
                }
            }
            let norm = normalized_penalty_factors(&support, p, alpha);
            for j in 0..p {
                prop_assert!((norm[j] - pf[j] / (1.0 - alpha)).abs() < 1e-9 / alpha);
            }
        }

        #[test]
        fn offset_scales_with_one_minus_alpha(alpha in 0.0f64..1.0, mu in -2.0f64..2.0, b0 in -1.0f64..1.0, b1 in -1.0f64..1.0) {
            let x = array![[0.3, -1.2], [1.5, 0.7], [-0.4, 2.0]];
            let beta = array![b0, b1];
            let full = compute_offset(x.view(), mu, beta.view(), 0.0).unwrap();
            let part = compute_offset(x.view(), mu, beta.view(), alpha).unwrap();
            for i in 0..3 {
                if full[i].abs() > 1e-6 {
                    prop_assert!((part[i] / full[i] - (1.0 - alpha)).abs() < 1e-9);
                }
            }
        }
    }
}
