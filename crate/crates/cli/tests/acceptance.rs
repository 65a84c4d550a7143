//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Oracles (KKT conditions, Newton fits, per-group lasso, pair
//! counting, bootstrap) are written here independently of the library code.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::Command as Process;
use std::time::{Duration, Instant};

use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{ContinuousCDF, Normal};
use stratglm::data::{assemble, make_folds, DataConfig, Dataset, FeatureMeta, FoldAssignment};
use stratglm::eval::{auc, delong_one_sided};
use stratglm::glinternet::{build_groups, extract_interactions, fit_glinternet, path_statistics, GlinternetModel};
use stratglm::lasso::{fit_logistic_lasso, LambdaGrid, PathEntry, PenaltySpec, SolverOptions};
use stratglm::model::{fit_glinternet_cv, fit_lasso, FitSettings};
use stratglm::pretrained::{default_alpha_grid, fit_pretrained};
use stratglm::synth::{cohort_preset, generate, SynthConfig};

use common::{logistic_instance, newton_logistic, rng};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn sigmoid(e: f64) -> f64 {
    1.0 / (1.0 + (-e).exp())
}

fn preset(name: &str, seed: u64) -> SynthConfig<f64> {
    let mut cfg = cohort_preset(name).unwrap();
    cfg.seed = seed;
    cfg
}

fn max_abs_diff(a: impl IntoIterator<Item = f64>, b: impl IntoIterator<Item = f64>) -> f64 {
    a.into_iter().zip(b).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max)
}

// ---------------------------------------------------------------- lasso KKT

/// Random small problem: penalty factors from {0, 0.5, 1, 2, ∞}, optional offset.
fn random_lasso_problem(seed: u64) -> (Array2<f64>, Array1<f64>, PenaltySpec<f64>) {
    let mut r = rng(seed ^ 0xacce);
    let n = r.random_range(20..=60);
    let p = r.random_range(1..=10);
    let beta: Vec<f64> = (0..p).map(|_| if r.random::<f64>() < 0.5 { r.random_range(-1.5..1.5) } else { 0.0 }).collect();
    let (x, y) = logistic_instance(seed, n, p, &beta, r.random_range(-1.0..1.0));
    let choices = [0.0, 0.5, 1.0, 2.0, f64::INFINITY];
    let mut pf: Vec<f64> = (0..p).map(|_| choices[r.random_range(1..choices.len())]).collect();
    if p > 1 && r.random::<f64>() < 0.3 {
        pf[0] = 0.0;
    }
    if pf.iter().all(|v| v.is_infinite() || *v == 0.0) {
        pf[p - 1] = 1.0;
    }
    let mut spec = PenaltySpec::uniform(p).with_penalty_factors(pf);
    if r.random::<f64>() < 0.4 {
        spec = spec.with_offset((0..n).map(|_| r.random_range(-1.0..1.0)).collect());
    }
    (x, y, spec)
}

/// Worst normalized stationarity residual of one lasso solution of
/// `mean logloss + λ Σ pfⱼ|βⱼ|`, or `None` if an excluded coefficient is nonzero.
/// Gradient conditions are measured in units of λ_max; the inactive
/// condition as relative excess over λ·pfⱼ.
fn lasso_kkt(x: &Array2<f64>, y: &Array1<f64>, offset: Option<&Array1<f64>>, pf: &[f64], e: &PathEntry<f64>, lmax: f64) -> Option<f64> {
    let (n, p) = x.dim();
    let mut resid = vec![0.0; n];
    for i in 0..n {
        let mut eta = e.intercept + offset.map_or(0.0, |o| o[i]);
        for j in 0..p {
            eta += x[[i, j]] * e.beta[j];
        }
        resid[i] = sigmoid(eta) - y[i];
    }
    let mut worst = (resid.iter().sum::<f64>() / n as f64).abs();
    for j in 0..p {
        let g = (0..n).map(|i| x[[i, j]] * resid[i]).sum::<f64>() / n as f64;
        let b = e.beta[j];
        let pen = e.lambda * pf[j];
        let r = if pf[j].is_infinite() {
            if b != 0.0 {
                return None;
            }
            0.0
        } else if pen == 0.0 {
            g.abs() / lmax
        } else if b != 0.0 {
            (g + pen * b.signum()).abs() / (lmax * pf[j].max(1.0))
        } else {
            (g.abs() - pen) / pen
        };
        worst = worst.max(r);
    }
    Some(worst)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0_f64;
    let mut failures = 0;
    for seed in 0..200 {
        let (x, y, spec) = random_lasso_problem(seed);
        let path = fit_logistic_lasso(x.view(), y.view(), &spec, &SolverOptions::default()).unwrap();
        let lmax = path.lambda_max.unwrap();
        for e in &path.entries {
            match lasso_kkt(&x, &y, spec.offset.as_ref(), &spec.penalty_factors, e, lmax) {
                Some(v) if v <= 1e-6 => worst = worst.max(v),
                other => {
                    failures += 1;
                    worst = worst.max(other.unwrap_or(f64::INFINITY));
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(failures == 0 && secs < 60.0, format!("{failures} failing solutions, worst residual {worst:.2e}, {secs:.1} s"))
}

// ---------------------------------------------------------- Newton oracle

fn criterion_2() -> Outcome {
    let mut worst = 0.0_f64;
    let mut used = 0;
    let mut seed = 0;
    while used < 50 {
        seed += 1;
        let mut r = rng(seed ^ 0x2);
        let n = r.random_range(40..=60);
        let p = r.random_range(1..=6);
        let beta: Vec<f64> = (0..p).map(|_| r.random_range(-1.0..1.0)).collect();
        let (x, y) = logistic_instance(10_000 + seed, n, p, &beta, r.random_range(-0.5..0.5));
        let Some((mu, b)) = newton_logistic(&x, &y, None) else { continue };
        used += 1;
        let spec = PenaltySpec::uniform(p).with_lambdas(LambdaGrid::Given(vec![1e-10]));
        let path = fit_logistic_lasso(x.view(), y.view(), &spec, &SolverOptions::default()).unwrap();
        let e = &path.entries[0];
        worst = worst.max((e.intercept - mu).abs()).max(max_abs_diff(e.beta.iter().copied(), b));
    }
    outcome(worst <= 1e-6, format!("{used} instances, max coefficient error {worst:.2e}"))
}

// -------------------------------------------------------- glinternet KKT

/// Small mixed instance: continuous and 2/3-level categorical features,
/// a sparse logit with one interaction.
fn random_interaction_instance(seed: u64) -> (Array2<f64>, Array1<f64>, Vec<FeatureMeta>) {
    let mut r = rng(seed ^ 0x3);
    let p = r.random_range(2..=5);
    let n = r.random_range(60..=200);
    let n_cand = if p <= 4 && r.random::<f64>() < 0.4 { 2 } else { 1 };
    let mut features = Vec::new();
    let mut x = Array2::zeros((n, p));
    for j in 0..p {
        let levels = if j > 0 && r.random::<f64>() < 0.25 { r.random_range(2..=3) } else { 0 };
        let mut f = if levels == 0 {
            for i in 0..n {
                x[[i, j]] = r.sample::<f64, _>(StandardNormal);
            }
            FeatureMeta::continuous(format!("f{j}"))
        } else {
            for i in 0..n {
                x[[i, j]] = r.random_range(0..levels) as f64;
            }
            FeatureMeta::categorical(format!("f{j}"), &["a", "b", "c"][..levels])
        };
        if j < n_cand {
            f = f.candidate();
        }
        features.push(f);
    }
    let coef: Vec<f64> = (0..p).map(|_| if r.random::<f64>() < 0.6 { r.random_range(-1.0..1.0) } else { 0.0 }).collect();
    let inter = r.random_range(-1.0..1.0);
    let y = (0..n)
        .map(|i| {
            let eta: f64 = (0..p).map(|j| coef[j] * x[[i, j]]).sum::<f64>() + inter * x[[i, 0]] * x[[i, p - 1]];
            if r.random::<f64>() < sigmoid(eta) { 1.0 } else { 0.0 }
        })
        .collect();
    (x, y, features)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Worst group stationarity residual of one overlapped group-lasso solution
/// of `mean logloss + λ Σ γ_g ‖θ_g‖`, measured like [`lasso_kkt`] with group
/// norms. Also returns the number of hierarchy violations: interactions with
/// a nonzero product coefficient whose parent main effects are not both
/// nonzero in the summed coefficients.
fn group_kkt(m: &GlinternetModel<f64>, idx: usize, x: &Array2<f64>, y: &Array1<f64>) -> (f64, usize) {
    let u = m.design.matrix(x.view()).unwrap();
    let cols = m.design.group_columns();
    let weights = &m.structure().weights;
    let e = &m.path.entries[idx];
    let lmax = m.path.lambda_max;
    let (n, q) = u.dim();
    let mut coef: Vec<Vec<f64>> = cols.iter().map(|c| vec![0.0; c.len()]).collect();
    for (g, c) in &e.groups {
        coef[*g].clone_from(c);
    }
    let mut summed = vec![0.0; q];
    summed[0] = e.intercept;
    for (g, c) in cols.iter().enumerate() {
        for (k, &col) in c.iter().enumerate() {
            summed[col] += coef[g][k];
        }
    }
    let resid: Vec<f64> = (0..n).map(|i| sigmoid((0..q).map(|j| u[[i, j]] * summed[j]).sum()) - y[i]).collect();
    let grad: Vec<f64> = (0..q).map(|j| (0..n).map(|i| u[[i, j]] * resid[i]).sum::<f64>() / n as f64).collect();
    let mut worst = grad[0].abs();
    for (g, c) in cols.iter().enumerate() {
        let gg: Vec<f64> = c.iter().map(|&j| grad[j]).collect();
        let pen = e.lambda * weights[g];
        let th = norm(&coef[g]);
        let r = if pen == 0.0 {
            norm(&gg) / lmax
        } else if th > 0.0 {
            let v: Vec<f64> = gg.iter().zip(&coef[g]).map(|(a, b)| a + pen * b / th).collect();
            norm(&v) / lmax
        } else {
            (norm(&gg) - pen) / pen
        };
        worst = worst.max(r);
    }
    let s = m.structure();
    let mut violations = 0;
    for (k, &(a, b)) in s.pairs.iter().enumerate() {
        let g = s.n_features() + k;
        let parents = m.design.feature_columns(a).len() + m.design.feature_columns(b).len();
        if coef[g][parents..].iter().any(|&v| v != 0.0) {
            let live = |i: usize| m.design.feature_columns(i).any(|j| summed[j] != 0.0);
            if !(live(a) && live(b)) {
                violations += 1;
            }
        }
    }
    (worst, violations)
}

fn criterion_3() -> Outcome {
    let settings = FitSettings::glinternet();
    let (mut worst, mut violations, mut failures) = (0.0_f64, 0, 0);
    for seed in 0..100 {
        let (x, y, f) = random_interaction_instance(seed);
        let s = build_groups(&f).unwrap();
        let m = fit_glinternet(x.view(), y.view(), &s, &settings.lambdas, &settings.solver).unwrap();
        for idx in 0..m.path.len() {
            let (w, v) = group_kkt(&m, idx, &x, &y);
            worst = worst.max(w);
            failures += (w > 1e-5) as usize;
            violations += v;
        }
    }
    outcome(failures == 0 && violations == 0, format!("{failures} failing solutions, worst residual {worst:.2e}, {violations} hierarchy violations"))
}

// ----------------------------------------------------- pretrained limits

/// Lasso on one group's rows with λ chosen by minimum CV deviance on the
/// given folds, written directly against the path solver.
fn reference_group_lasso(x: &Array2<f64>, y: &[bool], folds: &[usize], k: usize) -> (f64, Array1<f64>) {
    let yf: Array1<f64> = y.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    let spec = PenaltySpec::uniform(x.ncols());
    let opts = SolverOptions::default();
    let full = fit_logistic_lasso(x.view(), yf.view(), &spec, &opts).unwrap();
    let lambdas = full.lambdas();
    let mut mean = vec![0.0; lambdas.len()];
    for f in 0..k {
        let tr: Vec<usize> = (0..y.len()).filter(|&i| folds[i] != f).collect();
        let va: Vec<usize> = (0..y.len()).filter(|&i| folds[i] == f).collect();
        let fs = spec.clone().with_lambdas(LambdaGrid::Given(lambdas.clone()));
        let path = fit_logistic_lasso(x.select(Axis(0), &tr).view(), yf.select(Axis(0), &tr).view(), &fs, &opts).unwrap();
        for (l, e) in path.entries.iter().enumerate() {
            let dev: f64 = va
                .iter()
                .map(|&i| {
                    let p = sigmoid(e.intercept + x.row(i).dot(&e.beta)).clamp(1e-9, 1.0 - 1e-9);
                    if y[i] { -2.0 * p.ln() } else { -2.0 * (1.0 - p).ln() }
                })
                .sum();
            mean[l] += dev / va.len() as f64 / k as f64;
        }
    }
    let best = (1..mean.len()).fold(0, |b, l| if mean[l] < mean[b] { l } else { b });
    (full.entries[best].intercept, full.entries[best].beta.clone())
}

fn criterion_4() -> Outcome {
    let mut worst = 0.0_f64;
    let mut leaks = 0;
    for seed in 0..10 {
        let d = generate(&preset("transfer", seed)).unwrap().dataset;
        let folds = make_folds(&d, 3, seed).unwrap();
        let m = fit_pretrained(&d, &folds, &[1.0], &FitSettings::lasso()).unwrap();
        let x = m.encoder.transform(&d).unwrap();
        for (label, g) in &m.groups {
            let rows = d.rows_in_group(label);
            let yk: Vec<bool> = rows.iter().map(|&i| d.y()[i]).collect();
            let fk = FoldAssignment::from_ids(rows.iter().map(|&i| folds.fold_ids()[i]).collect(), folds.k()).unwrap();
            let (mu, beta) = reference_group_lasso(&x.select(Axis(0), &rows), &yk, fk.fold_ids(), fk.k());
            worst = worst.max((g.entry.intercept - mu).abs()).max(max_abs_diff(g.entry.beta.iter().copied(), beta));
        }
        let m0 = fit_pretrained(&d, &folds, &[0.0], &FitSettings::lasso()).unwrap();
        let support = &m0.overall.support;
        for g in m0.groups.values() {
            leaks += g.entry.beta.iter().enumerate().filter(|(j, &b)| !support.contains(j) && b != 0.0).count();
        }
    }
    outcome(worst <= 1e-6 && leaks == 0, format!("alpha=1 max coefficient error {worst:.2e}; alpha=0 nonzeros outside S: {leaks}"))
}

// ------------------------------------------------------ transfer benefit

/// Independent draw of `n` rows of `group` from the same generating model.
fn fresh_group(cfg: &SynthConfig<f64>, group: &str, n: usize) -> Dataset<f64> {
    let mut c = cfg.clone();
    c.seed = cfg.seed + 1_000_000;
    for g in &mut c.groups {
        g.n = if g.label == group { n } else { 20 };
    }
    assemble(&generate(&c).unwrap().dataset, &DataConfig::GroupOnly(group.into())).unwrap()
}

/// Per seed: (pretrained beats group-only in minority AUC, fine-tuned
/// minority nonzeros, Mix lasso nonzeros).
fn transfer_runs() -> Vec<(bool, usize, usize)> {
    (0..100)
        .map(|seed| {
            let cfg = preset("transfer", seed);
            let d = generate(&cfg).unwrap().dataset;
            let test = fresh_group(&cfg, "B", 1000);
            let folds = make_folds(&d, 3, seed).unwrap();
            let pt = fit_pretrained(&d, &folds, &default_alpha_grid(), &FitSettings::lasso()).unwrap();
            let b_rows = d.rows_in_group("B");
            let b = d.select_rows(&b_rows).unwrap();
            let fb = folds.restrict(&b_rows).unwrap();
            let group_only = fit_lasso(&b, &fb, &FitSettings::lasso()).unwrap();
            let mix = fit_lasso(&assemble(&d, &DataConfig::Mix("A".into(), "B".into())).unwrap(), &folds, &FitSettings::lasso()).unwrap();
            let a_pt = auc(pt.predict_proba(&test, false).unwrap().0.as_slice().unwrap(), test.y()).unwrap();
            let a_go = auc(group_only.predict_proba(&test).unwrap().as_slice().unwrap(), test.y()).unwrap();
            (a_pt > a_go, pt.groups["B"].entry.nonzero_count, mix.selected_entry().nonzero_count)
        })
        .collect()
}

fn median(mut v: Vec<usize>) -> f64 {
    v.sort_unstable();
    let n = v.len();
    if n % 2 == 1 { v[n / 2] as f64 } else { (v[n / 2 - 1] + v[n / 2]) as f64 / 2.0 }
}

// ---------------------------------------------------- interaction recovery

fn criterion_6() -> Outcome {
    let (mut selected, mut empty_start) = (0, 0);
    for seed in 0..100 {
        let d = generate(&preset("interaction", seed)).unwrap().dataset;
        let folds = make_folds(&d, 3, seed).unwrap();
        let g = fit_glinternet_cv(&d, &folds, &FitSettings::glinternet()).unwrap();
        let pairs: Vec<(usize, usize)> = extract_interactions(&g.model, g.selected).iter().map(|i| (i.candidate, i.partner)).collect();
        selected += pairs.contains(&(0, 1)) as usize;
        let first = path_statistics(&g.model, Some(&g.cv))[0];
        empty_start += (first.n_main_effects == 0 && first.n_interactions == 0) as usize;
    }
    outcome(selected >= 95 && empty_start == 100, format!("planted pair selected {selected}/100; (0,0) at lambda_max {empty_start}/100"))
}

// -------------------------------------------------------------- AUC/DeLong

fn brute_auc(s: &[f64], y: &[bool]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..s.len() {
        for j in 0..s.len() {
            if y[i] && !y[j] {
                den += 1.0;
                num += if s[i] > s[j] { 1.0 } else if s[i] == s[j] { 0.5 } else { 0.0 };
            }
        }
    }
    num / den
}

/// Paired scores sharing a latent component.
fn paired_scores(seed: u64, n: usize, mu_base: f64, mu_new: f64, shared: f64) -> (Vec<f64>, Vec<f64>, Vec<bool>) {
    let mut r = rng(seed);
    let mut y: Vec<bool> = (0..n).map(|i| i % 2 == 0).collect();
    y.rotate_left(seed as usize % n);
    let (mut a, mut b) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for &yi in &y {
        let c: f64 = r.sample(StandardNormal);
        let t = if yi { 1.0 } else { 0.0 };
        a.push(t * mu_base + shared * c + r.sample::<f64, _>(StandardNormal));
        b.push(t * mu_new + shared * c + r.sample::<f64, _>(StandardNormal));
    }
    (a, b, y)
}

/// One-sided p of the AUC difference from a class-stratified paired
/// bootstrap: normal tail at the observed difference over the bootstrap SD.
fn bootstrap_p(a: &[f64], b: &[f64], y: &[bool], reps: usize, seed: u64) -> f64 {
    let pos: Vec<usize> = (0..y.len()).filter(|&i| y[i]).collect();
    let neg: Vec<usize> = (0..y.len()).filter(|&i| !y[i]).collect();
    let mut r = rng(seed);
    let (np, nn) = (pos.len(), neg.len());
    let mut deltas = Vec::with_capacity(reps);
    let (mut ip, mut ineg) = (vec![0; np], vec![0; nn]);
    for _ in 0..reps {
        ip.iter_mut().for_each(|v| *v = pos[r.random_range(0..np)]);
        ineg.iter_mut().for_each(|v| *v = neg[r.random_range(0..nn)]);
        let (mut da, mut db) = (0.0, 0.0);
        for &i in &ip {
            for &j in &ineg {
                da += if a[i] > a[j] { 1.0 } else if a[i] == a[j] { 0.5 } else { 0.0 };
                db += if b[i] > b[j] { 1.0 } else if b[i] == b[j] { 0.5 } else { 0.0 };
            }
        }
        deltas.push((db - da) / (np * nn) as f64);
    }
    let m = deltas.iter().sum::<f64>() / reps as f64;
    let sd = (deltas.iter().map(|d| (d - m) * (d - m)).sum::<f64>() / (reps - 1) as f64).sqrt();
    Normal::standard().sf((brute_auc(b, y) - brute_auc(a, y)) / sd)
}

fn criterion_8() -> Outcome {
    let mut auc_err = 0.0_f64;
    for seed in 0..1000 {
        let mut r = rng(80_000 + seed);
        let n = r.random_range(2..120);
        let coarse = r.random::<bool>();
        let s: Vec<f64> = (0..n).map(|_| if coarse { r.random_range(0..10) as f64 } else { r.sample(StandardNormal) }).collect();
        let mut y: Vec<bool> = (0..n).map(|_| r.random::<bool>()).collect();
        y[0] = true;
        y[1] = false;
        auc_err = auc_err.max((auc(&s, &y).unwrap() - brute_auc(&s, &y)).abs());
    }
    let mut close = 0;
    for seed in 0..100 {
        let (a, b, y) = paired_scores(seed, 200, 0.8, 1.1, 0.7);
        let p = delong_one_sided(&a, &b, &y).unwrap().p_one_sided;
        close += ((p - bootstrap_p(&a, &b, &y, 20_000, 1000 + seed)).abs() <= 0.02) as usize;
    }
    let mut ps: Vec<f64> = (0..1000)
        .map(|seed| {
            let (a, b, y) = paired_scores(50_000 + seed, 500, 0.7, 0.7, 0.0);
            delong_one_sided(&a, &b, &y).unwrap().p_one_sided
        })
        .collect();
    ps.sort_by(f64::total_cmp);
    let n = ps.len() as f64;
    let ks = ps.iter().enumerate().map(|(i, &p)| ((i as f64 + 1.0) / n - p).max(p - i as f64 / n)).fold(0.0, f64::max);
    outcome(
        auc_err <= 1e-12 && close >= 90 && ks < 0.08,
        format!("AUC max error {auc_err:.1e}; DeLong within 0.02 of bootstrap {close}/100; null KS {ks:.4}"),
    )
}

// ------------------------------------------------------------ determinism

fn report_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .filter(|e| e.file_name() != "manifest.json")
        .map(|e| (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap()))
        .collect()
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("report.cfg");
    fs::write(&cfg, "synth.preset = paperlike_small\nsynth.seed = 2024\n").unwrap();
    let mut outputs = Vec::new();
    for (name, threads) in [("a", "1"), ("b", "1"), ("c", "8")] {
        let out = tmp.path().join(name);
        let status = Process::new(env!("CARGO_BIN_EXE_stratglm"))
            .args(["report", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .args(["--threads", threads])
            .status()
            .unwrap();
        if !status.success() {
            return outcome(false, format!("report run `{name}` exited with {status}"));
        }
        outputs.push(report_files(&out));
    }
    let secs = start.elapsed().as_secs_f64();
    let same_runs = outputs[0] == outputs[1];
    let same_threads = outputs[0] == outputs[2];
    outcome(
        same_runs && same_threads && secs < 1800.0 && outputs[0].len() > 10,
        format!(
            "{} files; repeat identical: {same_runs}; threads 1 vs 8 identical: {same_threads}; {secs:.0} s for three runs",
            outputs[0].len()
        ),
    )
}

fn main() {
    let mut all_pass = true;
    let mut report = |id: u32, name: &str, f: &dyn Fn() -> Outcome| {
        let start = Instant::now();
        let o = f();
        let took: Duration = start.elapsed();
        all_pass &= o.pass;
        println!("{} criterion {id} ({name}): {} [{:.1} s]", if o.pass { "PASS" } else { "FAIL" }, o.detail, took.as_secs_f64());
    };
    report(1, "lasso KKT suite", &criterion_1);
    report(2, "Newton oracle equivalence", &criterion_2);
    report(3, "group KKT and hierarchy", &criterion_3);
    report(4, "pretrained alpha limits", &criterion_4);
    let transfer_start = Instant::now();
    let runs = transfer_runs();
    let transfer_secs = transfer_start.elapsed().as_secs_f64();
    report(5, "transfer benefit", &|| {
        let wins = runs.iter().filter(|r| r.0).count();
        outcome(wins >= 80 && transfer_secs < 600.0, format!("pretrained wins {wins}/100, {transfer_secs:.0} s"))
    });
    report(6, "interaction recovery", &criterion_6);
    report(7, "sparsity direction", &|| {
        let ft = median(runs.iter().map(|r| r.1).collect());
        let mix = median(runs.iter().map(|r| r.2).collect());
        outcome(ft <= mix, format!("median nonzeros: fine-tuned minority {ft}, Mix lasso {mix}"))
    });
    report(8, "AUC and DeLong", &criterion_8);
    report(9, "pipeline determinism", &criterion_9);
    if !all_pass {
        std::process::exit(1);
    }
}
