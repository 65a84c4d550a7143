//! Scores fitted models on the test rows of one group and compares each to
//! a baseline model: AUC grid, one-sided DeLong p-values with ΔAUC, and ROC
//! curves.
//!
//! `eval.models` lists `[label=]path` items; the label defaults to the model
//! family. `eval.baseline` names the entry every other one is tested against.

use std::path::PathBuf;

use stratglm::data::DataConfig;
use stratglm::eval::{build_report, roc_csv, roc_points, Report, ReportSpec, Run};
use stratglm::model::ModelFile;
use stratglm::{Dataset64, Error};

use crate::config::Config;
use crate::error::CliError;
use crate::manifest::{OutputDir, RunManifest};
use crate::Options;

use super::{load_split, output_dir, slug, DATA_KEYS};

/// One `eval.models` item: `[label=]path`.
fn parse_entry(cfg: &Config, item: &str) -> (Option<String>, PathBuf) {
    match item.split_once('=') {
        Some((label, path)) => (Some(label.trim().to_string()), cfg.resolve(path.trim())),
        None => (None, cfg.resolve(item)),
    }
}

/// Rows of `test` belonging to `group`.
pub(crate) fn target_rows(test: &Dataset64, group: &str) -> Result<Dataset64, CliError> {
    let rows = test.rows_in_group(group);
    if rows.is_empty() {
        return Err(Error::UnknownGroup(group.to_string()).into());
    }
    Ok(test.select_rows(&rows)?)
}

/// Writes grid CSVs, the text report and one ROC curve per run.
pub(crate) fn write_report(out: &mut OutputDir, prefix: &str, report: &Report<f64>, runs: &[Run<f64>]) -> Result<(), CliError> {
    out.write(&format!("{prefix}auc.csv"), report.auc_csv())?;
    out.write(&format!("{prefix}tests.csv"), report.test_csv())?;
    out.write(&format!("{prefix}report.txt"), report.to_text())?;
    for r in runs {
        let curve = roc_points(&r.scores, &r.labels)?;
        out.write(&format!("{prefix}roc_{}_{}.csv", slug(&r.method), slug(&r.data)), roc_csv(&curve))?;
    }
    Ok(())
}

pub fn run(cfg: &Config, opts: &Options) -> Result<(), CliError> {
    let mut keys = vec!["output.dir", "eval.models", "eval.baseline", "eval.group", "eval.outcome"];
    keys.extend(DATA_KEYS);
    cfg.check_keys(&keys)?;
    let items = cfg.list("eval.models").filter(|v| !v.is_empty()).ok_or_else(|| CliError::Config("missing key `eval.models`".into()))?;
    let baseline = cfg.get("eval.baseline").unwrap_or("lasso").to_string();
    let group = cfg.require("eval.group")?.to_string();
    if let Some(b) = items.iter().map(|i| parse_entry(cfg, i)).find(|(l, p)| l.as_deref() == Some(baseline.as_str()) && !p.is_file()) {
        return Err(CliError::Pairing(format!("baseline model file {} not found", b.1.display())));
    }
    let outcome = cfg.get("eval.outcome").unwrap_or("y").to_string();

    let split = load_split(cfg)?;
    let test = target_rows(&split.test, &group)?;
    let mut manifest = RunManifest::new("eval", cfg.bytes(), None);
    for p in &split.inputs {
        manifest.add_input(p)?;
    }

    let mut runs = Vec::new();
    for item in &items {
        let (label, path) = parse_entry(cfg, item);
        if !path.is_file() {
            return Err(CliError::Data(format!("model file {} not found", path.display())));
        }
        manifest.add_input(&path)?;
        let text = std::fs::read_to_string(&path)?;
        let file = ModelFile::<f64>::from_json(&text)?;
        if file.split.as_deref() != Some(split.fingerprint.as_str()) {
            return Err(Error::Unpaired(format!("{} was fitted on a different train/test split", path.display())).into());
        }
        let scores = file.model.predict_proba(&test, opts.allow_fallback)?;
        runs.push(Run {
            method: label.unwrap_or_else(|| file.model.family().to_string()),
            data: DataConfig::parse(&file.data_config)?.label(),
            outcome: outcome.clone(),
            scores: scores.to_vec(),
            labels: test.y().to_vec(),
        });
    }
    let matching: Vec<&Run<f64>> = runs.iter().filter(|r| r.method == baseline).collect();
    let base_data = match matching.as_slice() {
        [one] => one.data.clone(),
        [] => return Err(CliError::Pairing(format!("no model labelled `{baseline}` among eval.models"))),
        _ => return Err(CliError::Config(format!("several models are labelled `{baseline}`; give each a distinct `label=`"))),
    };
    for r in &runs {
        if runs.iter().filter(|s| s.method == r.method && s.data == r.data).count() > 1 {
            return Err(CliError::Config(format!("models `{}` on `{}` are listed twice; give each a distinct `label=`", r.method, r.data)));
        }
    }
    let report = build_report(&runs, &ReportSpec::new(baseline, base_data).against_reference())?;
    let mut out = OutputDir::create(output_dir(cfg, opts)?, manifest)?;
    write_report(&mut out, "", &report, &runs)?;
    out.finish()
}
