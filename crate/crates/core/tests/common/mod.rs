#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Gaussian design with a logistic outcome drawn from `beta` and `intercept`.
pub fn logistic_instance(seed: u64, n: usize, p: usize, beta: &[f64], intercept: f64) -> (Array2<f64>, Array1<f64>) {
    let mut r = rng(seed);
    let x = Array2::from_shape_fn((n, p), |_| r.sample::<f64, _>(StandardNormal));
    let y = (0..n)
        .map(|i| {
            let eta: f64 = intercept + (0..p).map(|j| x[[i, j]] * beta.get(j).copied().unwrap_or(0.0)).sum::<f64>();
            let prob = 1.0 / (1.0 + (-eta).exp());
            if r.random::<f64>() < prob { 1.0 } else { 0.0 }
        })
        .collect();
    (x, y)
}

/// Unpenalized logistic regression by plain Newton iterations with a dense
/// solve. Returns `None` when it fails to converge (e.g. separation).
pub fn newton_logistic(x: &Array2<f64>, y: &Array1<f64>, offset: Option<&Array1<f64>>) -> Option<(f64, Vec<f64>)> {
    let (n, p) = x.dim();
    let a = DMatrix::from_fn(n, p + 1, |i, j| if j == 0 { 1.0 } else { x[[i, j - 1]] });
    let yv = DVector::from_iterator(n, y.iter().copied());
    let off = DVector::from_fn(n, |i, _| offset.map_or(0.0, |o| o[i]));
    let mut theta = DVector::zeros(p + 1);
    for _ in 0..200 {
        let eta = &a * &theta + &off;
        let prob = eta.map(|e| 1.0 / (1.0 + (-e).exp()));
        let w = prob.map(|v| v * (1.0 - v));
        let mut h = DMatrix::zeros(p + 1, p + 1);
        for i in 0..n {
            let row = a.row(i);
            h += w[i] * row.transpose() * row;
        }
        let g = a.transpose() * (&yv - &prob);
        let step = h.lu().solve(&g)?;
        theta += &step;
        if theta.amax() > 50.0 {
            return None;
        }
        if step.amax() < 1e-14 {
            return Some((theta[0], theta.iter().skip(1).copied().collect()));
        }
    }
    None
}

/// Penalized mean log-loss objective evaluated directly from its definition.
pub fn objective(x: &Array2<f64>, y: &Array1<f64>, offset: Option<&Array1<f64>>, mu: f64, beta: &[f64], lambda: f64, pf: &[f64]) -> f64 {
    let (n, p) = x.dim();
    let mut loss = 0.0;
    for i in 0..n {
        let eta = mu + offset.map_or(0.0, |o| o[i]) + (0..p).map(|j| x[[i, j]] * beta[j]).sum::<f64>();
        loss += (1.0 + eta.exp()).ln() - y[i] * eta;
    }
    let pen: f64 = beta.iter().zip(pf).filter(|(_, w)| w.is_finite()).map(|(b, w)| w * b.abs()).sum();
    loss / n as f64 + lambda * pen
}
