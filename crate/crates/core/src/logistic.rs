//! Binomial log-likelihood pieces shared by the solvers, CV and prediction.

use ndarray::{ArrayView1, Zip};

use crate::Float;

/// Logistic function, evaluated without overflow for either sign.
#[inline]
pub fn sigmoid<F: Float>(eta: F) -> F {
    if eta >= F::zero() {
        F::one() / (F::one() + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (F::one() + e)
    }
}

/// `log(1 + exp(eta))` without overflow.
#[inline]
pub fn softplus<F: Float>(eta: F) -> F {
    if eta > F::zero() {
        eta + (-eta).exp().ln_1p()
    } else {
        eta.exp().ln_1p()
    }
}

/// Clamps a probability into `[c, 1 - c]` with `c = F::PROB_CLAMP`.
#[inline]
pub fn clamp_prob<F: Float>(p: F) -> F {
    let c = F::lit(F::PROB_CLAMP);
    p.max(c).min(F::one() - c)
}

/// Mean negative log-likelihood `(1/n) Σ [log(1 + e^η) − y η]`.
pub fn mean_log_loss<F: Float>(eta: ArrayView1<F>, y: ArrayView1<F>) -> F {
    let n = F::from_usize_lossy(eta.len());
    let mut total = F::zero();
    Zip::from(&eta).and(&y).for_each(|&e, &yi| {
        total += softplus(e) - yi * e;
    });
    total / n
}

/// Binomial deviance of one observation, `−2 log p(y)` with clamped `p`.
#[inline]
pub fn unit_deviance<F: Float>(prob: F, y: bool) -> F {
    let p = clamp_prob(prob);
    let two = F::lit(2.0);
    if y {
        -two * p.ln()
    } else {
        -two * (F::one() - p).ln()
    }
}

/// Mean binomial deviance of probabilities against labels.
pub fn mean_deviance<F: Float>(probs: &[F], labels: &[bool]) -> F {
    debug_assert_eq!(probs.len(), labels.len());
    let total = probs
        .iter()
        .zip(labels)
        .fold(F::zero(), |acc, (&p, &y)| acc + unit_deviance(p, y));
    total / F::from_usize_lossy(probs.len().max(1))
}

pub fn logit<F: Float>(p: F) -> F {
    (p / (F::one() - p)).ln()
}
