//! Seeded generator of multi-group cohorts with known generating logits.

use std::fs;
use std::path::Path;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, FeatureMeta};
use crate::io::{render_schema, write_dataset, CsvLayout};
use crate::logistic::sigmoid;
use crate::{Error, Float, Result};

/// One population group: size, baseline log-odds and its own effects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct GroupSpec<F: Float> {
    pub label: String,
    pub n: usize,
    pub intercept: F,
    /// `(feature, coefficient)` added for this group only.
    #[serde(default)]
    pub effects: Vec<(usize, F)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SynthConfig<F: Float> {
    pub groups: Vec<GroupSpec<F>>,
    pub p: usize,
    /// `(feature, coefficient)` shared by every group.
    pub shared: Vec<(usize, F)>,
    /// `(i, j, coefficient)` product terms.
    pub interactions: Vec<(usize, usize, F)>,
    pub candidates: Vec<usize>,
    /// Features drawn as 0/1 (thresholded latent normal) and typed categorical.
    #[serde(default)]
    pub binary: Vec<usize>,
    /// AR(1) correlation between neighboring features.
    #[serde(default)]
    pub correlation: Option<F>,
    pub seed: u64,
}

impl<F: Float> SynthConfig<F> {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.p == 0 {
            return bad("p must be positive".into());
        }
        if self.groups.is_empty() {
            return bad("no groups".into());
        }
        let mut labels = std::collections::HashSet::new();
        for g in &self.groups {
            if g.n == 0 {
                return bad(format!("group `{}` has no rows", g.label));
            }
            if g.label.is_empty() || !labels.insert(g.label.as_str()) {
                return bad(format!("empty or duplicate group label `{}`", g.label));
            }
            if !g.intercept.is_finite() || g.effects.iter().any(|&(j, c)| j >= self.p || !c.is_finite()) {
                return bad(format!("group `{}`: invalid intercept or effect", g.label));
            }
        }
        if self.shared.iter().any(|&(j, c)| j >= self.p || !c.is_finite()) {
            return bad("shared effect index out of range".into());
        }
        if self.interactions.iter().any(|&(i, j, c)| i >= self.p || j >= self.p || i == j || !c.is_finite()) {
            return bad("interaction indices must be distinct and in range".into());
        }
        if self.candidates.iter().chain(&self.binary).any(|&j| j >= self.p) {
            return bad("candidate or binary index out of range".into());
        }
        if let Some(rho) = self.correlation {
            if !(rho >= F::zero() && rho < F::one()) {
                return bad(format!("correlation {rho} outside [0, 1)"));
            }
        }
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.groups.iter().map(|g| g.n).sum()
    }

    pub fn features(&self) -> Vec<FeatureMeta> {
        (0..self.p)
            .map(|j| {
                let name = format!("x{}", j + 1);
                let f = if self.binary.contains(&j) {
                    FeatureMeta::categorical(name, &["0", "1"])
                } else {
                    FeatureMeta::continuous(name)
                };
                if self.candidates.contains(&j) { f.candidate() } else { f }
            })
            .collect()
    }

    /// Generating logit of one row of group `g`.
    pub fn logit(&self, g: usize, x: &[F]) -> F {
        let mut eta = self.groups[g].intercept;
        for &(j, c) in self.shared.iter().chain(&self.groups[g].effects) {
            eta += c * x[j];
        }
        for &(i, j, c) in &self.interactions {
            eta += c * x[i] * x[j];
        }
        eta
    }
}

/// Generated cohort and the generating logit of every row.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthData<F: Float> {
    pub dataset: Dataset<F>,
    pub truth: Vec<F>,
}

/// Draws every group in order from one seeded stream.
pub fn generate<F: Float>(config: &SynthConfig<F>) -> Result<SynthData<F>> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let (n, p) = (config.n_rows(), config.p);
    let rho = config.correlation.unwrap_or(F::zero()).to_f64_lossy();
    let innov = (1.0 - rho * rho).sqrt();
    let mut x = Array2::zeros((n, p));
    let mut y = Vec::with_capacity(n);
    let mut groups = Vec::with_capacity(n);
    let mut truth = Vec::with_capacity(n);
    let mut row = 0;
    let mut latent = vec![0.0_f64; p];
    let mut values = vec![F::zero(); p];
    for (g, spec) in config.groups.iter().enumerate() {
        for _ in 0..spec.n {
            for j in 0..p {
                let z: f64 = rng.sample(StandardNormal);
                latent[j] = if j == 0 { z } else { rho * latent[j - 1] + innov * z };
            }
            for j in 0..p {
                values[j] = if config.binary.contains(&j) {
                    if latent[j] > 0.0 { F::one() } else { F::zero() }
                } else {
                    F::lit(latent[j])
                };
                x[[row, j]] = values[j];
            }
            let eta = config.logit(g, &values);
            let u: f64 = rng.random();
            y.push(u < sigmoid(eta).to_f64_lossy());
            groups.push(spec.label.clone());
            truth.push(eta);
            row += 1;
        }
    }
    let dataset = Dataset::new(x, y, groups, config.features())?;
    Ok(SynthData { dataset, truth })
}

/// Documented presets.
///
/// * `paperlike_small`: five groups sized like a large majority cohort with
///   four minorities (8000, 190, 150, 670, 585 rows; majority to smallest
///   about 54:1), p = 50, six shared effects, two effects specific to each
///   minority, one binary feature, candidates x1–x3 and an x1·x3 term.
/// * `transfer`: groups A (1000 rows) and B (60 rows) with identical signal on
///   five of 20 features.
/// * `interaction`: one group of 2000 rows, p = 10, logit `x1 + x2 + 2·x1·x2`,
///   candidate x1.
/// * `null`: groups A (200) and B (100), p = 20, no signal, candidate x1.
pub fn cohort_preset<F: Float>(name: &str) -> Result<SynthConfig<F>> {
    let f = |v: f64| F::lit(v);
    let group = |label: &str, n: usize, intercept: f64, effects: &[(usize, f64)]| GroupSpec {
        label: label.into(),
        n,
        intercept: f(intercept),
        effects: effects.iter().map(|&(j, c)| (j, f(c))).collect(),
    };
    let shared = |s: &[(usize, f64)]| s.iter().map(|&(j, c)| (j, f(c))).collect::<Vec<_>>();
    let cfg = match name {
        "paperlike_small" => SynthConfig {
            groups: vec![
                group("WB", 8000, -2.2, &[]),
                group("SA", 190, -1.4, &[(10, 0.6), (11, -0.5)]),
                group("AF", 150, -1.2, &[(12, 0.7), (13, 0.5)]),
                group("AD", 670, -1.8, &[(14, -0.5), (15, 0.4)]),
                group("NBE", 585, -1.9, &[(16, 0.4), (17, -0.4)]),
            ],
            p: 50,
            shared: shared(&[(0, 0.8), (1, -0.6), (2, 0.5), (3, 0.4), (4, -0.4), (5, 0.3)]),
            interactions: vec![(0, 2, f(0.4))],
            candidates: vec![0, 1, 2],
            binary: vec![1],
            correlation: Some(f(0.2)),
            seed: 0,
        },
        "transfer" => SynthConfig {
            groups: vec![group("A", 1000, 0.0, &[]), group("B", 60, 0.0, &[])],
            p: 20,
            shared: shared(&[(0, 1.0), (1, -0.8), (2, 0.6), (3, 0.5), (4, -0.5)]),
            interactions: vec![],
            candidates: vec![0],
            binary: vec![],
            correlation: None,
            seed: 0,
        },
        "interaction" => SynthConfig {
            groups: vec![group("all", 2000, 0.0, &[])],
            p: 10,
            shared: shared(&[(0, 1.0), (1, 1.0)]),
            interactions: vec![(0, 1, f(2.0))],
            candidates: vec![0],
            binary: vec![],
            correlation: None,
            seed: 0,
        },
        "null" => SynthConfig {
            groups: vec![group("A", 200, 0.0, &[]), group("B", 100, 0.0, &[])],
            p: 20,
            shared: vec![],
            interactions: vec![],
            candidates: vec![0],
            binary: vec![],
            correlation: None,
            seed: 0,
        },
        other => return Err(Error::UnknownPreset(other.to_string())),
    };
    Ok(cfg)
}

pub const PRESETS: [&str; 4] = ["paperlike_small", "transfer", "interaction", "null"];

/// `row,group,logit` per generated row.
pub fn truth_csv<F: Float>(data: &SynthData<F>) -> String {
    let mut out = String::from("row,group,logit\n");
    for (i, (g, t)) in data.dataset.groups().iter().zip(&data.truth).enumerate() {
        out.push_str(&format!("{i},{g},{t}\n"));
    }
    out
}

/// Writes `data.csv`, `schema.txt` and `truth.csv` into `dir`.
pub fn write_synth<F: Float>(data: &SynthData<F>, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let file = fs::File::create(dir.join("data.csv"))?;
    write_dataset(&data.dataset, &CsvLayout::default(), std::io::BufWriter::new(file))?;
    fs::write(dir.join("schema.txt"), render_schema(data.dataset.features()))?;
    fs::write(dir.join("truth.csv"), truth_csv(data))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(intercept: f64, n: usize) -> SynthConfig<f64> {
        SynthConfig {
            groups: vec![GroupSpec { label: "g".into(), n, intercept, effects: vec![] }],
            p: 3,
            shared: vec![],
            interactions: vec![],
            candidates: vec![],
            binary: vec![],
            correlation: None,
            seed: 11,
        }
    }

    fn rate(d: &SynthData<f64>) -> f64 {
        d.dataset.y().iter().filter(|&&v| v).count() as f64 / d.dataset.n_rows() as f64
    }

    #[test]
    fn base_rates() {
        // Binomial sd at n = 10,000 is 0.005 and 0.0021; the bounds are 6 and 4.7 sd.
        let d = generate(&base(0.0, 10_000)).unwrap();
        assert!((rate(&d) - 0.5).abs() <= 0.03);
        let d = generate(&base(-3.0, 10_000)).unwrap();
        let expected = 1.0 / (1.0 + 3f64.exp());
        assert!((expected - 0.047).abs() < 5e-4);
        assert!((rate(&d) - expected).abs() <= 0.01);
    }

    #[test]
    fn deterministic_given_seed() {
        let cfg = cohort_preset::<f64>("transfer").unwrap();
        let a = generate(&cfg).unwrap();
        assert_eq!(a, generate(&cfg).unwrap());
        let b = generate(&SynthConfig { seed: 1, ..cfg }).unwrap();
        assert_ne!(a.dataset, b.dataset);
    }

    #[test]
    fn presets() {
        let p = cohort_preset::<f64>("paperlike_small").unwrap();
        let sizes: Vec<usize> = p.groups.iter().map(|g| g.n).collect();
        let ratio = *sizes.iter().max().unwrap() as f64 / *sizes.iter().min().unwrap() as f64;
        assert!((ratio - 80810.0 / 1499.0).abs() < 1.0, "{ratio}");
        assert_eq!(p.groups.len(), 5);
        assert_eq!(p.p, 50);

        let null = cohort_preset::<f64>("null").unwrap();
        assert!(null.shared.is_empty() && null.interactions.is_empty());
        assert!(null.groups.iter().all(|g| g.effects.is_empty() && g.intercept == 0.0));
        assert_eq!(cohort_preset::<f64>("interaction").unwrap().interactions.len(), 1);
        assert!(matches!(cohort_preset::<f64>("nope"), Err(Error::UnknownPreset(s)) if s == "nope"));
        for name in PRESETS {
            cohort_preset::<f64>(name).unwrap().validate().unwrap();
        }
    }

    #[test]
    fn truth_matches_logit_definition() {
        let mut cfg = cohort_preset::<f64>("paperlike_small").unwrap();
        for g in &mut cfg.groups {
            g.n = 20;
        }
        let d = generate(&cfg).unwrap();
        let x = d.dataset.x();
        for i in 0..d.dataset.n_rows() {
            let g = cfg.groups.iter().position(|s| s.label == d.dataset.groups()[i]).unwrap();
            let row: Vec<f64> = x.row(i).to_vec();
            assert_eq!(d.truth[i], cfg.logit(g, &row));
            assert!(row[1] == 0.0 || row[1] == 1.0);
        }
    }

    #[test]
    fn invalid_configs() {
        let mut c = base(0.0, 10);
        c.shared = vec![(3, 1.0)];
        assert!(matches!(generate(&c), Err(Error::InvalidConfig(_))));
        let mut c = base(0.0, 10);
        c.correlation = Some(1.0);
        assert!(matches!(generate(&c), Err(Error::InvalidConfig(_))));
        let mut c = base(0.0, 10);
        c.groups[0].n = 0;
        assert!(matches!(generate(&c), Err(Error::InvalidConfig(_))));
    }
}
