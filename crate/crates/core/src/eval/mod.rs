//! ROC curves, AUC, paired one-sided DeLong tests and report tables.

mod report;

use statrs::distribution::{ContinuousCDF, Normal};

use crate::{Error, Float, Result};

pub use report::{build_report, roc_csv, Comparison, Pairing, Report, ReportSpec, Run, MIN_CLASS_COUNT};

fn class_counts(labels: &[bool]) -> (usize, usize) {
    let pos = labels.iter().filter(|&&y| y).count();
    (pos, labels.len() - pos)
}

fn check<F: Float>(scores: &[F], labels: &[bool]) -> Result<(usize, usize)> {
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch(format!("{} scores for {} labels", scores.len(), labels.len())));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidInput("NaN score".into()));
    }
    let (pos, neg) = class_counts(labels);
    if pos == 0 || neg == 0 {
        return Err(Error::SingleClass);
    }
    Ok((pos, neg))
}

/// Midranks (1-based, ties share the mean rank) of `v`.
fn midranks<F: Float>(v: &[F]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).expect("scores are not NaN"));
    let mut ranks = vec![0.0; v.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && v[order[j + 1]] == v[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Placement values: for each positive, the fraction of negatives it
/// outscores (ties count half); for each negative, the fraction of positives
/// outscoring it.
fn placements<F: Float>(scores: &[F], labels: &[bool]) -> (Vec<f64>, Vec<f64>) {
    let pos: Vec<F> = scores.iter().zip(labels).filter(|(_, &y)| y).map(|(&s, _)| s).collect();
    let neg: Vec<F> = scores.iter().zip(labels).filter(|(_, &y)| !y).map(|(&s, _)| s).collect();
    let (m, n) = (pos.len() as f64, neg.len() as f64);
    let all = midranks(scores);
    let (rp, rn) = (midranks(&pos), midranks(&neg));
    let (mut ap, mut an) = (Vec::new(), Vec::new());
    for (k, &y) in labels.iter().enumerate() {
        if y { ap.push(all[k]) } else { an.push(all[k]) }
    }
    let v10 = ap.iter().zip(&rp).map(|(a, r)| (a - r) / n).collect();
    let v01 = an.iter().zip(&rn).map(|(a, r)| 1.0 - (a - r) / m).collect();
    (v10, v01)
}

/// Mann–Whitney AUC: the fraction of (positive, negative) pairs in which the
/// positive scores higher, ties counting one half.
pub fn auc<F: Float>(scores: &[F], labels: &[bool]) -> Result<F> {
    let (pos, neg) = check(scores, labels)?;
    let ranks = midranks(scores);
    let sum: f64 = ranks.iter().zip(labels).filter(|(_, &y)| y).map(|(r, _)| r).sum();
    let (m, n) = (pos as f64, neg as f64);
    Ok(F::lit((sum - m * (m + 1.0) / 2.0) / (m * n)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve<F> {
    /// Descending; the first is `+∞` for the `(0, 0)` point.
    pub thresholds: Vec<F>,
    pub fpr: Vec<F>,
    pub tpr: Vec<F>,
    pub auc: F,
}

/// Empirical ROC curve with one point per distinct score; its trapezoidal
/// area is the Mann–Whitney AUC.
pub fn roc_points<F: Float>(scores: &[F], labels: &[bool]) -> Result<RocCurve<F>> {
    let (pos, neg) = check(scores, labels)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).expect("scores are not NaN"));
    let (mut thresholds, mut fpr, mut tpr) = (vec![F::infinity()], vec![F::zero()], vec![F::zero()]);
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let t = scores[order[i]];
        while i < order.len() && scores[order[i]] == t {
            if labels[order[i]] { tp += 1 } else { fp += 1 }
            i += 1;
        }
        thresholds.push(t);
        fpr.push(F::lit(fp as f64 / neg as f64));
        tpr.push(F::lit(tp as f64 / pos as f64));
    }
    let mut area = 0.0;
    for k in 1..fpr.len() {
        area += (fpr[k] - fpr[k - 1]).to_f64_lossy() * (tpr[k] + tpr[k - 1]).to_f64_lossy() / 2.0;
    }
    Ok(RocCurve { thresholds, fpr, tpr, auc: F::lit(area) })
}

/// Paired comparison of a challenger against a baseline on the same rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocComparison<F> {
    pub auc_base: F,
    pub auc_new: F,
    /// `auc_new − auc_base`.
    pub delta_auc: F,
    pub variance: F,
    pub z: F,
    /// `P(Z ≥ z)`, the one-sided p-value for "challenger better".
    pub p_one_sided: F,
    /// Zero variance with a nonzero difference; `p` is then 0 or 1.
    pub degenerate: bool,
}

/// DeLong's test of `AUC_new > AUC_base` with the placement-value covariance.
pub fn delong_one_sided<F: Float>(scores_base: &[F], scores_new: &[F], labels: &[bool]) -> Result<RocComparison<F>> {
    let (m, n) = check(scores_base, labels)?;
    check(scores_new, labels)?;
    let (a10, a01) = placements(scores_base, labels);
    let (b10, b01) = placements(scores_new, labels);
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let auc_base = mean(&a10);
    let auc_new = mean(&b10);
    // Variance of the difference of placements equals var(a) + var(b) − 2cov(a, b).
    let diff_var = |a: &[f64], b: &[f64]| {
        let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
        let md = mean(&d);
        if d.len() < 2 {
            0.0
        } else {
            d.iter().map(|v| (v - md) * (v - md)).sum::<f64>() / (d.len() - 1) as f64
        }
    };
    let variance = diff_var(&a10, &b10) / m as f64 + diff_var(&a01, &b01) / n as f64;
    let delta = auc_new - auc_base;
    let (z, p, degenerate) = if variance > 0.0 {
        let z = delta / variance.sqrt();
        let std = Normal::standard();
        (z, std.sf(z), false)
    } else if delta == 0.0 {
        (0.0, 0.5, false)
    } else if delta > 0.0 {
        (f64::INFINITY, 0.0, true)
    } else {
        (f64::NEG_INFINITY, 1.0, true)
    };
    Ok(RocComparison {
        auc_base: F::lit(auc_base),
        auc_new: F::lit(auc_new),
        delta_auc: F::lit(delta),
        variance: F::lit(variance),
        z: F::lit(z),
        p_one_sided: F::lit(p),
        degenerate,
    })
}
