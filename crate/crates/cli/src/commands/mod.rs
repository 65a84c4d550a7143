//! Subcommand implementations and the pieces they share.

pub mod eval;
pub mod fit;
pub mod report;
pub mod synth;

use std::path::PathBuf;

use stratglm::data::{assemble, make_folds, split_train_test, Coding, DataConfig};
use stratglm::io::{read_dataset, CsvLayout};
use stratglm::lasso::LambdaGrid;
use stratglm::model::{fit_glinternet_cv_with, fit_lasso_with, Encoder, FitSettings, FittedModel};
use stratglm::pretrained::{default_alpha_grid, fit_pretrained_with};
use stratglm::{Dataset64, Error};

use crate::config::Config;
use crate::error::CliError;
use crate::manifest::{file_digest, sha256_hex};
use crate::Options;

pub(crate) const DATA_KEYS: [&str; 5] = ["data.path", "data.schema", "data.test_path", "data.test_fraction", "data.split_seed"];
pub(crate) const FIT_KEYS: [&str; 8] =
    ["fit.model", "fit.data", "fit.folds", "fit.seed", "fit.n_lambda", "fit.eps_ratio", "fit.tol", "fit.alpha"];

pub(crate) fn output_dir(cfg: &Config, opts: &Options) -> Result<PathBuf, CliError> {
    match (&opts.out, cfg.path("output.dir")) {
        (Some(p), _) => Ok(p.clone()),
        (None, Some(p)) => Ok(p),
        (None, None) => Err(CliError::Config("no output directory: pass --out or set output.dir".into())),
    }
}

/// File-name-safe form of a label.
pub(crate) fn slug(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' }).collect()
}

/// Training and test rows plus a fingerprint identifying how they were made.
pub(crate) struct Split {
    pub train: Dataset64,
    pub test: Dataset64,
    pub fingerprint: String,
    pub inputs: Vec<PathBuf>,
}

pub(crate) fn load_split(cfg: &Config) -> Result<Split, CliError> {
    let path = cfg.path("data.path").ok_or_else(|| CliError::Config("missing key `data.path`".into()))?;
    let schema = cfg.path("data.schema").unwrap_or_else(|| path.with_file_name("schema.txt"));
    let layout = CsvLayout::default();
    let full = read_dataset::<f64>(&path, &schema, &layout)?;
    let data_sha = file_digest(&path)?;
    let mut inputs = vec![path, schema.clone()];
    match cfg.path("data.test_path") {
        Some(test_path) => {
            if cfg.get("data.test_fraction").is_some() || cfg.get("data.split_seed").is_some() {
                return Err(CliError::Config("data.test_path excludes data.test_fraction and data.split_seed".into()));
            }
            let test = read_dataset::<f64>(&test_path, &schema, &layout)?;
            let fingerprint = format!("{data_sha}+{}", file_digest(&test_path)?);
            inputs.push(test_path);
            check_strata(&full)?;
            Ok(Split { train: full, test, fingerprint, inputs })
        }
        None => {
            let fraction: f64 = cfg.parsed_or("data.test_fraction", 0.2)?;
            let seed: u64 = cfg.parsed_or("data.split_seed", 0)?;
            if !(fraction > 0.0 && fraction < 1.0) {
                return Err(CliError::Config(format!("data.test_fraction {fraction} outside (0, 1)")));
            }
            let (train, test) = split_train_test(&full, fraction, seed)?;
            let fingerprint = sha256_hex(format!("{data_sha}:{fraction}:{seed}").as_bytes());
            Ok(Split { train, test, fingerprint, inputs })
        }
    }
}

/// Every group present must have rows of both outcomes.
pub(crate) fn check_strata(ds: &Dataset64) -> Result<(), CliError> {
    let counts = ds.cell_counts();
    for g in ds.group_levels() {
        for y in [false, true] {
            if counts.get(&(g.clone(), y)).copied().unwrap_or(0) == 0 {
                return Err(Error::EmptyStratum { group: g, outcome: y as u8 }.into());
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Lasso,
    Glinternet,
    Pretrained,
}

impl Family {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "lasso" => Ok(Family::Lasso),
            "glinternet" => Ok(Family::Glinternet),
            "ptlasso" => Ok(Family::Pretrained),
            other => Err(CliError::Config(format!("fit.model `{other}`: expected lasso, glinternet or ptlasso"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Lasso => "lasso",
            Family::Glinternet => "glinternet",
            Family::Pretrained => "ptlasso",
        }
    }
}

/// Fit controls shared by `fit` and `report`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct FitSpec {
    pub folds: usize,
    pub seed: u64,
    pub n_lambda: Option<usize>,
    pub eps_ratio: Option<f64>,
    pub tol: Option<f64>,
    pub alphas: Vec<f64>,
}

impl FitSpec {
    pub fn from_config(cfg: &Config) -> Result<Self, CliError> {
        let spec = Self {
            folds: cfg.parsed_or("fit.folds", 3)?,
            seed: cfg.parsed_or("fit.seed", 0)?,
            n_lambda: cfg.parsed("fit.n_lambda")?,
            eps_ratio: cfg.parsed("fit.eps_ratio")?,
            tol: cfg.parsed("fit.tol")?,
            alphas: cfg.parsed_list("fit.alpha")?.unwrap_or_else(default_alpha_grid),
        };
        if spec.folds < 2 {
            return Err(CliError::Config("fit.folds must be at least 2".into()));
        }
        if spec.n_lambda == Some(0) || spec.eps_ratio.is_some_and(|e| !(e > 0.0 && e < 1.0)) {
            return Err(CliError::Config("fit.n_lambda must be positive and fit.eps_ratio in (0, 1)".into()));
        }
        if spec.tol.is_some_and(|t| !(t > 0.0)) {
            return Err(CliError::Config("fit.tol must be positive".into()));
        }
        if spec.alphas.is_empty() || spec.alphas.iter().any(|a| !(0.0..=1.0).contains(a)) {
            return Err(CliError::Config("fit.alpha values must lie in [0, 1]".into()));
        }
        Ok(spec)
    }

    fn settings(&self, family: Family) -> FitSettings<f64> {
        let mut s = match family {
            Family::Glinternet => FitSettings::glinternet(),
            _ => FitSettings::lasso(),
        };
        if let LambdaGrid::Auto { n_lambda, eps_ratio } = &mut s.lambdas {
            if let Some(n) = self.n_lambda {
                *n_lambda = n;
            }
            if let Some(e) = self.eps_ratio {
                *eps_ratio = Some(e);
            }
        }
        if let Some(t) = self.tol {
            s.solver = s.solver.with_tol(t);
        }
        s
    }
}

/// Fits one model on the rows of `train` selected by `data`.
///
/// Folds are drawn once on the whole training split and restricted to those
/// rows, and standardization is fitted on the whole training split, so models
/// trained on different data configurations share both.
pub(crate) fn fit_model(train: &Dataset64, data: &DataConfig, family: Family, spec: &FitSpec) -> Result<FittedModel<f64>, CliError> {
    let subset = assemble(train, data)?;
    check_strata(&subset)?;
    let all_folds = make_folds(train, spec.folds, spec.seed)?;
    let rows: Vec<usize> = match data {
        DataConfig::All => (0..train.n_rows()).collect(),
        _ => {
            let wanted = subset.group_levels();
            (0..train.n_rows()).filter(|&i| wanted.contains(&train.groups()[i])).collect()
        }
    };
    let folds = all_folds
        .restrict(&rows)
        .ok_or_else(|| CliError::Data(format!("{data}: fewer than two folds have rows")))?;
    let settings = spec.settings(family);
    let model = match family {
        Family::Lasso => FittedModel::Lasso(fit_lasso_with(Encoder::fit(train, Some(Coding::Reference))?, &subset, &folds, &settings)?),
        Family::Glinternet => FittedModel::Glinternet(fit_glinternet_cv_with(Encoder::fit(train, None)?, &subset, &folds, &settings)?),
        Family::Pretrained => FittedModel::Pretrained(fit_pretrained_with(
            Encoder::fit(train, Some(Coding::Reference))?,
            &subset,
            &folds,
            &spec.alphas,
            &settings,
        )?),
    };
    Ok(model)
}
