use ndarray::{Array1, ArrayView1, ArrayView2};

use super::PathEntry;
use crate::logistic::sigmoid;
use crate::Float;

/// Normalized stationarity residuals of one lasso solution.
///
/// Every component is compared against the same relative tolerance:
/// intercept `|ḡ|`; active features `|gⱼ + λpfⱼ sign βⱼ| / (s · max(pfⱼ, 1))`;
/// unpenalized features `|gⱼ| / s`; inactive penalized features the relative
/// excess `(|gⱼ| − λpfⱼ) / (λpfⱼ)`. `s` is the problem's λ_max.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktReport<F> {
    pub intercept: F,
    pub active: F,
    pub unpenalized: F,
    pub inactive: F,
    /// An excluded (`pf = ∞`) coefficient is nonzero.
    pub excluded_nonzero: bool,
}

impl<F: Float> KktReport<F> {
    pub fn worst(&self) -> F {
        self.intercept.max(self.active).max(self.unpenalized).max(self.inactive)
    }

    pub fn passes(&self, tol: F) -> bool {
        !self.excluded_nonzero && self.worst() <= tol
    }
}

/// Mean-loss gradient `(mean(p − y), Xᵀ(p − y)/n)` at linear predictor `eta`.
pub(crate) fn gradient<F: Float>(x: ArrayView2<F>, y: ArrayView1<F>, eta: ArrayView1<F>) -> (F, Array1<F>) {
    let n = F::from_usize_lossy(y.len());
    let r: Array1<F> = eta.iter().zip(y.iter()).map(|(&e, &yi)| sigmoid(e) - yi).collect();
    let g0 = r.sum() / n;
    let g = x.t().dot(&r) / n;
    (g0, g)
}

pub(crate) fn report_from_gradient<F: Float>(
    g0: F,
    g: ArrayView1<F>,
    beta: ArrayView1<F>,
    lambda: F,
    pf: &[F],
    scale: F,
    fit_intercept: bool,
) -> KktReport<F> {
    let mut rep = KktReport {
        intercept: if fit_intercept { g0.abs() } else { F::zero() },
        active: F::zero(),
        unpenalized: F::zero(),
        inactive: F::zero(),
        excluded_nonzero: false,
    };
    for j in 0..beta.len() {
        let (b, gj, w) = (beta[j], g[j], pf[j]);
        if w.is_infinite() {
            rep.excluded_nonzero |= b != F::zero();
            continue;
        }
        let pen = lambda * w;
        if pen == F::zero() {
            rep.unpenalized = rep.unpenalized.max(gj.abs() / scale);
        } else if b != F::zero() {
            let r = (gj + pen * b.signum()).abs() / (scale * w.max(F::one()));
            rep.active = rep.active.max(r);
        } else {
            rep.inactive = rep.inactive.max((gj.abs() - pen) / pen);
        }
    }
    rep
}

/// Checks a path entry against the stationarity conditions of its problem.
pub fn kkt_check<F: Float>(
    x: ArrayView2<F>,
    y: ArrayView1<F>,
    offset: Option<ArrayView1<F>>,
    penalty_factors: &[F],
    entry: &PathEntry<F>,
    lambda_max: Option<F>,
    fit_intercept: bool,
) -> KktReport<F> {
    let eta = entry.linear_predictor(x, offset).expect("entry dimensions match the data");
    let (g0, g) = gradient(x, y, eta.view());
    let scale = lambda_max.filter(|v| *v > F::zero()).unwrap_or(F::one());
    report_from_gradient(g0, g.view(), entry.beta.view(), entry.lambda, penalty_factors, scale, fit_intercept)
}
