//! L1-penalized logistic regression over a λ path.
//!
//! Minimizes `(1/n) Σ [log(1 + e^ηᵢ) − yᵢηᵢ] + λ Σ pfⱼ|βⱼ|` with
//! `η = offset + μ + Xβ`. The intercept μ is never penalized; `pfⱼ = 0` leaves a
//! feature unpenalized and `pfⱼ = ∞` excludes it. Penalty factors are used as
//! given: scaling every factor by `c` is the same as scaling λ by `c`.

mod kkt;
mod solver;

use ndarray::{Array1, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::logistic::{clamp_prob, sigmoid};
use crate::{Error, Float, Result};

pub use kkt::{kkt_check, KktReport};
pub use solver::{fit_logistic_lasso, lambda_max, null_fit};

/// `sign(z) · max(|z| − t, 0)`.
#[inline]
pub fn soft_threshold<F: Float>(z: F, t: F) -> F {
    debug_assert!(t >= F::zero());
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        F::zero()
    }
}

/// Log-linear grid from `lambda_max` down to `eps_ratio · lambda_max`.
pub fn default_lambda_path<F: Float>(lambda_max: F, n_lambda: usize, eps_ratio: F) -> Vec<F> {
    assert!(n_lambda >= 2, "a lambda path needs at least two values");
    let last = F::from_usize_lossy(n_lambda - 1);
    let log_ratio = eps_ratio.ln();
    (0..n_lambda)
        .map(|k| {
            if k == 0 {
                lambda_max
            } else if k == n_lambda - 1 {
                lambda_max * eps_ratio
            } else {
                lambda_max * (log_ratio * F::from_usize_lossy(k) / last).exp()
            }
        })
        .collect()
}

/// Default smallest-λ ratio: 1e-2 when features outnumber rows, else 1e-4.
pub fn default_eps_ratio<F: Float>(n: usize, p: usize) -> F {
    if n < p {
        F::lit(1e-2)
    } else {
        F::lit(1e-4)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "", rename_all = "snake_case")]
pub enum LambdaGrid<F: Float> {
    /// `n_lambda` values from the data's λ_max; `eps_ratio` defaults by shape.
    Auto { n_lambda: usize, eps_ratio: Option<F> },
    /// Explicit strictly descending values.
    Given(Vec<F>),
}

impl<F: Float> Default for LambdaGrid<F> {
    fn default() -> Self {
        LambdaGrid::Auto { n_lambda: 50, eps_ratio: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct PenaltySpec<F: Float> {
    pub lambdas: LambdaGrid<F>,
    #[serde(with = "crate::io::serde_pf")]
    pub penalty_factors: Vec<F>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<Array1<F>>,
}

impl<F: Float> PenaltySpec<F> {
    /// Unit penalty factors, automatic path, no offset.
    pub fn uniform(p: usize) -> Self {
        Self { lambdas: LambdaGrid::default(), penalty_factors: vec![F::one(); p], offset: None }
    }

    pub fn with_lambdas(mut self, lambdas: LambdaGrid<F>) -> Self {
        self.lambdas = lambdas;
        self
    }

    pub fn with_offset(mut self, offset: Array1<F>) -> Self {
        self.offset = Some(offset);
        self
    }

    pub fn with_penalty_factors(mut self, pf: Vec<F>) -> Self {
        self.penalty_factors = pf;
        self
    }

    pub(crate) fn validate(&self, n: usize, p: usize) -> Result<()> {
        if self.penalty_factors.len() != p {
            return Err(Error::DimensionMismatch(format!(
                "{} penalty factors for {p} features",
                self.penalty_factors.len()
            )));
        }
        if self.penalty_factors.iter().any(|&v| v.is_nan() || v < F::zero()) {
            return Err(Error::InvalidInput("penalty factors must be >= 0".into()));
        }
        if let Some(o) = &self.offset {
            if o.len() != n {
                return Err(Error::DimensionMismatch(format!("offset of length {} for {n} rows", o.len())));
            }
            if o.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput("offset must be finite".into()));
            }
        }
        match &self.lambdas {
            LambdaGrid::Auto { n_lambda, eps_ratio } => {
                if *n_lambda < 1 {
                    return Err(Error::InvalidInput("n_lambda must be positive".into()));
                }
                if let Some(e) = eps_ratio {
                    if !(*e > F::zero() && *e < F::one()) {
                        return Err(Error::InvalidInput("eps_ratio must lie in (0, 1)".into()));
                    }
                }
            }
            LambdaGrid::Given(l) => {
                if l.is_empty() {
                    return Err(Error::InvalidInput("empty lambda path".into()));
                }
                if l.iter().any(|v| !v.is_finite() || *v < F::zero()) {
                    return Err(Error::InvalidInput("lambda values must be finite and >= 0".into()));
                }
                if l.windows(2).any(|w| w[1] >= w[0]) {
                    return Err(Error::InvalidInput("lambda path must be strictly descending".into()));
                }
            }
        }
        Ok(())
    }

    /// Indices with a finite, positive penalty factor.
    pub fn penalized(&self) -> impl Iterator<Item = usize> + '_ {
        self.penalty_factors.iter().enumerate().filter(|(_, &v)| v > F::zero() && v.is_finite()).map(|(j, _)| j)
    }
}

/// Solver controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions<F> {
    /// Relative KKT tolerance each returned solution must meet.
    pub tol: F,
    /// Outer (Newton) iterations per λ.
    pub max_iter: usize,
    pub fit_intercept: bool,
}

impl<F: Float> Default for SolverOptions<F> {
    fn default() -> Self {
        Self { tol: F::lit(1e-7), max_iter: 100, fit_intercept: true }
    }
}

impl<F: Float> SolverOptions<F> {
    pub fn with_tol(mut self, tol: F) -> Self {
        self.tol = tol;
        self
    }
}

/// Solution at one λ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct PathEntry<F: Float> {
    pub lambda: F,
    pub intercept: F,
    #[serde(with = "crate::io::serde_sparse")]
    pub beta: Array1<F>,
    /// Mean training deviance, `2 ×` mean log-loss.
    pub deviance: F,
    pub nonzero_count: usize,
    pub converged: bool,
}

impl<F: Float> PathEntry<F> {
    pub fn linear_predictor(&self, x: ArrayView2<F>, offset: Option<ArrayView1<F>>) -> Result<Array1<F>> {
        if x.ncols() != self.beta.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} columns for {} coefficients",
                x.ncols(),
                self.beta.len()
            )));
        }
        let mut eta = x.dot(&self.beta);
        eta.mapv_inplace(|v| v + self.intercept);
        if let Some(o) = offset {
            if o.len() != eta.len() {
                return Err(Error::DimensionMismatch(format!("offset of length {} for {} rows", o.len(), eta.len())));
            }
            eta += &o;
        }
        Ok(eta)
    }

    pub fn support(&self) -> Vec<usize> {
        self.beta.iter().enumerate().filter(|(_, &b)| b != F::zero()).map(|(j, _)| j).collect()
    }
}

/// `sigmoid(μ + Xβ + offset)`, clamped away from 0 and 1.
pub fn predict_proba<F: Float>(entry: &PathEntry<F>, x: ArrayView2<F>, offset: Option<ArrayView1<F>>) -> Result<Array1<F>> {
    Ok(entry.linear_predictor(x, offset)?.mapv(|e| clamp_prob(sigmoid(e))))
}

/// Fitted path: one entry per λ, in descending λ order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct LassoPath<F: Float> {
    pub entries: Vec<PathEntry<F>>,
    /// λ_max of the training problem; `None` when nothing is penalized.
    pub lambda_max: Option<F>,
}

impl<F: Float> LassoPath<F> {
    pub fn lambdas(&self) -> Vec<F> {
        self.entries.iter().map(|e| e.lambda).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    #[test]
    fn soft_threshold_cases() {
        assert_eq!(soft_threshold(3.0_f64, 1.0), 2.0);
        assert_eq!(soft_threshold(-0.5_f64, 1.0), 0.0);
        assert_eq!(soft_threshold(-3.0_f64, 1.0), -2.0);
        assert_eq!(soft_threshold(1.0_f32, 1.0), 0.0);
    }

    #[test]
    fn log_linear_grid() {
        let g = default_lambda_path(1.0_f64, 3, 0.01);
        assert_eq!(g[0], 1.0);
        assert_abs_diff_eq!(g[1], 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(g[2], 0.01, epsilon = 1e-15);
        let g = default_lambda_path(2.5_f64, 2, 0.1);
        assert_eq!(g, vec![2.5, 0.25]);
        let g = default_lambda_path(0.3_f64, 50, 1e-4);
        assert!(g.windows(2).all(|w| w[1] < w[0]));
        for w in g.windows(3) {
            assert_abs_diff_eq!(w[1] / w[0], w[2] / w[1], epsilon = 1e-12);
        }
    }

    #[test]
    fn predict_proba_cases() {
        let e = PathEntry {
            lambda: 1.0,
            intercept: 0.0_f64,
            beta: array![0.0, 0.0],
            deviance: 0.0,
            nonzero_count: 0,
            converged: true,
        };
        let x = array![[1.0, 2.0], [3.0, -1.0]];
        assert_eq!(predict_proba(&e, x.view(), None).unwrap(), array![0.5, 0.5]);

        let e = PathEntry { intercept: 0.5, beta: array![1.0, -1.0], ..e };
        let x = array![[1.0, 2.0]];
        let off = array![-0.375];
        let p = predict_proba(&e, x.view(), Some(off.view())).unwrap();
        assert_abs_diff_eq!(p[0], 1.0 / (1.0 + 0.875_f64.exp()), epsilon = 1e-15);

        let big = array![[1e6, -1e6], [-1e6, 1e6]];
        let p = predict_proba(&e, big.view(), None).unwrap();
        assert!(p.iter().all(|v| v.is_finite() && *v > 0.0 && *v < 1.0));
        assert!(p[0] > p[1]);

        assert!(matches!(predict_proba(&e, array![[1.0]].view(), None), Err(Error::DimensionMismatch(_))));
    }
}
