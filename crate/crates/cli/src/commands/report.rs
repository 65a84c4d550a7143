//! Full pipeline from one config: generate a cohort, split it, fit every
//! (model, data) combination and write the comparison tables per target group.
//!
//! For each target group `G` the compared models are trained on `group:G`,
//! `mix:MAJ,G` (with `MAJ` the majority group) and `all`. The `all` fits are
//! shared by every target.

use rayon::prelude::*;
use stratglm::data::{split_train_test, DataConfig};
use stratglm::eval::{build_report, ReportSpec, Run};
use stratglm::io::{render_schema, write_dataset, CsvLayout};
use stratglm::model::{FittedModel, ModelFile};
use stratglm::synth::truth_csv;

use crate::config::Config;
use crate::error::CliError;
use crate::manifest::{sha256_hex, OutputDir, RunManifest};
use crate::Options;

use super::eval::{target_rows, write_report};
use super::fit::write_model_outputs;
use super::synth::{generate_from, SYNTH_KEYS};
use super::{fit_model, output_dir, slug, Family, FitSpec, FIT_KEYS};

const OUTCOME: &str = "y";

/// Model fits needed for the given targets, in output order.
pub fn jobs(majority: &str, targets: &[String]) -> Vec<(Family, DataConfig)> {
    let mut jobs: Vec<(Family, DataConfig)> =
        [Family::Lasso, Family::Glinternet, Family::Pretrained].into_iter().map(|f| (f, DataConfig::All)).collect();
    for g in targets {
        jobs.push((Family::Lasso, DataConfig::GroupOnly(g.clone())));
        jobs.push((Family::Glinternet, DataConfig::GroupOnly(g.clone())));
        if g != majority {
            for f in [Family::Lasso, Family::Glinternet, Family::Pretrained] {
                jobs.push((f, DataConfig::Mix(majority.to_string(), g.clone())));
            }
        }
    }
    jobs
}

fn covers(data: &DataConfig, group: &str) -> bool {
    match data {
        DataConfig::All => true,
        DataConfig::GroupOnly(g) => g == group,
        DataConfig::Mix(a, b) => a == group || b == group,
    }
}

pub fn run(cfg: &Config, opts: &Options) -> Result<(), CliError> {
    let mut keys = vec!["output.dir", "data.test_fraction", "data.split_seed", "report.targets", "report.majority"];
    keys.extend(SYNTH_KEYS);
    keys.extend(FIT_KEYS.iter().filter(|k| !matches!(**k, "fit.model" | "fit.data")));
    cfg.check_keys(&keys)?;
    let spec = FitSpec::from_config(cfg)?;
    let fraction: f64 = cfg.parsed_or("data.test_fraction", 0.2)?;
    let split_seed: u64 = cfg.parsed_or("data.split_seed", 0)?;
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(CliError::Config(format!("data.test_fraction {fraction} outside (0, 1)")));
    }

    let data = generate_from(cfg)?;
    let seed = cfg.parsed_or("synth.seed", 0u64)?;
    let (train, test) = split_train_test(&data.dataset, fraction, split_seed)?;
    let levels = train.group_levels();
    let majority = match cfg.get("report.majority") {
        Some(m) => m.to_string(),
        None => levels.iter().max_by_key(|g| (train.rows_in_group(g).len(), std::cmp::Reverse((*g).clone()))).cloned().unwrap_or_default(),
    };
    let targets = cfg.list("report.targets").unwrap_or_else(|| levels.iter().filter(|g| **g != majority).cloned().collect());
    for g in targets.iter().chain([&majority]) {
        if !levels.contains(g) {
            return Err(CliError::Config(format!("group `{g}` is not in the generated cohort")));
        }
    }
    if targets.is_empty() {
        return Err(CliError::Config("no target groups: the cohort has a single group".into()));
    }

    let mut csv = Vec::new();
    write_dataset(&data.dataset, &CsvLayout::default(), &mut csv)?;
    let manifest = RunManifest::new("report", cfg.bytes(), Some(seed));
    let mut out = OutputDir::create(output_dir(cfg, opts)?, manifest)?;
    out.write("data.csv", csv)?;
    out.write("schema.txt", render_schema(data.dataset.features()))?;
    out.write("truth.csv", truth_csv(&data))?;

    let jobs = jobs(&majority, &targets);
    let models: Vec<FittedModel<f64>> =
        jobs.par_iter().map(|(family, dc)| fit_model(&train, dc, *family, &spec)).collect::<Result<_, _>>()?;

    let fingerprint = sha256_hex(format!("{}:{seed}:{fraction}:{split_seed}", sha256_hex(cfg.bytes())).as_bytes());
    for ((family, dc), model) in jobs.iter().zip(&models) {
        let prefix = format!("model_{}_{}_", family.name(), slug(&dc.to_string()));
        write_model_outputs(&mut out, &prefix, model)?;
        let file = ModelFile { data_config: dc.to_string(), seed: spec.seed, split: Some(fingerprint.clone()), model: model.clone() };
        out.write(&format!("model_{}_{}.json", family.name(), slug(&dc.to_string())), file.to_json()? + "\n")?;
    }

    let mut text = String::new();
    for g in &targets {
        let rows = target_rows(&test, g)?;
        let mut runs = Vec::new();
        for ((family, dc), model) in jobs.iter().zip(&models) {
            if !covers(dc, g) {
                continue;
            }
            let scores = model.predict_proba(&rows, opts.allow_fallback)?;
            runs.push(Run {
                method: family.name().to_string(),
                data: dc.label(),
                outcome: OUTCOME.to_string(),
                scores: scores.to_vec(),
                labels: rows.y().to_vec(),
            });
        }
        let report = build_report(&runs, &ReportSpec::new("lasso", g.clone()))?;
        write_report(&mut out, &format!("{}_", slug(g)), &report, &runs)?;
        text.push_str(&format!("== target group {g} (majority {majority}; {} test rows) ==\n", rows.n_rows()));
        text.push_str(&report.to_text());
        text.push('\n');
    }
    out.write("report.txt", text)?;
    out.finish()
}
