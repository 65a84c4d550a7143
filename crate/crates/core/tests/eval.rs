mod common;

use rand::Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{ContinuousCDF, Normal};
use stratglm::eval::{auc, delong_one_sided, roc_points};

use common::rng;

fn brute_auc(s: &[f64], y: &[bool]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..s.len() {
        for j in 0..s.len() {
            if y[i] && !y[j] {
                den += 1.0;
                if s[i] > s[j] {
                    num += 1.0;
                } else if s[i] == s[j] {
                    num += 0.5;
                }
            }
        }
    }
    num / den
}

#[test]
fn auc_matches_pair_count_with_ties() {
    for seed in 0..200 {
        let mut r = rng(seed);
        let n = r.random_range(2..80);
        // Coarse scores force ties.
        let s: Vec<f64> = (0..n).map(|_| (r.random_range(0..12) as f64) / 4.0).collect();
        let mut y: Vec<bool> = (0..n).map(|_| r.random::<bool>()).collect();
        y[0] = true;
        y[1] = false;
        let b = brute_auc(&s, &y);
        assert!((auc(&s, &y).unwrap() - b).abs() < 1e-12);
        assert!((roc_points(&s, &y).unwrap().auc - b).abs() < 1e-12);
    }
}

/// Paired scores sharing a latent component; the new score separates better.
fn paired(seed: u64, n: usize, mu_base: f64, mu_new: f64, shared: f64) -> (Vec<f64>, Vec<f64>, Vec<bool>) {
    let mut r = rng(seed);
    let mut y: Vec<bool> = (0..n).map(|i| i % 2 == 0).collect();
    y.rotate_left(seed as usize % n);
    let (mut a, mut b) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for &yi in &y {
        let c: f64 = r.sample(StandardNormal);
        let ea: f64 = r.sample(StandardNormal);
        let eb: f64 = r.sample(StandardNormal);
        let t = if yi { 1.0 } else { 0.0 };
        a.push(t * mu_base + shared * c + ea);
        b.push(t * mu_new + shared * c + eb);
    }
    (a, b, y)
}

/// One-sided p from a stratified paired bootstrap of the AUC difference,
/// normal approximation with the bootstrap standard deviation.
fn bootstrap_p(a: &[f64], b: &[f64], y: &[bool], reps: usize, seed: u64) -> f64 {
    let pos: Vec<usize> = (0..y.len()).filter(|&i| y[i]).collect();
    let neg: Vec<usize> = (0..y.len()).filter(|&i| !y[i]).collect();
    let mut r = rng(seed);
    let mut deltas = Vec::with_capacity(reps);
    let mut idx = Vec::with_capacity(y.len());
    for _ in 0..reps {
        idx.clear();
        idx.extend((0..pos.len()).map(|_| pos[r.random_range(0..pos.len())]));
        idx.extend((0..neg.len()).map(|_| neg[r.random_range(0..neg.len())]));
        let (np, nn) = (pos.len() as f64, neg.len() as f64);
        let (mut da, mut db) = (0.0, 0.0);
        for &i in &idx[..pos.len()] {
            for &j in &idx[pos.len()..] {
                da += if a[i] > a[j] { 1.0 } else if a[i] == a[j] { 0.5 } else { 0.0 };
                db += if b[i] > b[j] { 1.0 } else if b[i] == b[j] { 0.5 } else { 0.0 };
            }
        }
        deltas.push((db - da) / (np * nn));
    }
    let m = deltas.iter().sum::<f64>() / reps as f64;
    let sd = (deltas.iter().map(|d| (d - m) * (d - m)).sum::<f64>() / (reps - 1) as f64).sqrt();
    let delta = brute_auc(b, y) - brute_auc(a, y);
    Normal::standard().sf(delta / sd)
}

#[test]
fn delong_agrees_with_bootstrap() {
    let mut close = 0;
    let cases = 10;
    for seed in 0..cases {
        let (a, b, y) = paired(seed, 200, 0.8, 1.1, 0.7);
        let p = delong_one_sided(&a, &b, &y).unwrap().p_one_sided;
        let pb = bootstrap_p(&a, &b, &y, 20_000, 1000 + seed);
        if (p - pb).abs() <= 0.02 {
            close += 1;
        }
    }
    assert!(close >= 9, "{close}/{cases}");
}

#[test]
fn null_p_values_are_uniform() {
    let reps = 1000;
    let mut ps: Vec<f64> = (0..reps)
        .map(|seed| {
            let (a, b, y) = paired(50_000 + seed, 500, 0.7, 0.7, 0.0);
            delong_one_sided(&a, &b, &y).unwrap().p_one_sided
        })
        .collect();
    ps.sort_by(|u, v| u.partial_cmp(v).unwrap());
    let n = reps as f64;
    let ks = ps
        .iter()
        .enumerate()
        .map(|(i, &p)| ((i as f64 + 1.0) / n - p).max(p - i as f64 / n))
        .fold(0.0, f64::max);
    assert!(ks < 0.08, "KS = {ks}");
}
