use stratglm::data::DataConfig;
use stratglm::glinternet::{export_network, extract_interactions, interaction_tallies, path_statistics, path_statistics_csv};
use stratglm::model::{FittedModel, ModelFile};

use crate::config::Config;
use crate::error::CliError;
use crate::manifest::{OutputDir, RunManifest};
use crate::Options;

use super::{fit_model, load_split, output_dir, Family, FitSpec, DATA_KEYS, FIT_KEYS};

pub fn run(cfg: &Config, opts: &Options) -> Result<(), CliError> {
    let mut keys = vec!["output.dir"];
    keys.extend(DATA_KEYS);
    keys.extend(FIT_KEYS);
    cfg.check_keys(&keys)?;
    let family = Family::parse(cfg.require("fit.model")?)?;
    let data = DataConfig::parse(cfg.get("fit.data").unwrap_or("all"))?;
    let spec = FitSpec::from_config(cfg)?;
    let split = load_split(cfg)?;

    let mut manifest = RunManifest::new("fit", cfg.bytes(), Some(spec.seed));
    for p in &split.inputs {
        manifest.add_input(p)?;
    }
    let model = fit_model(&split.train, &data, family, &spec)?;
    let mut out = OutputDir::create(output_dir(cfg, opts)?, manifest)?;
    write_model_outputs(&mut out, "", &model)?;
    let file = ModelFile { data_config: data.to_string(), seed: spec.seed, split: Some(split.fingerprint), model };
    out.write("model.json", file.to_json()? + "\n")?;
    out.finish()
}

/// CV curves and, for interaction models, path statistics, the selected
/// interaction network and per-candidate tallies. Names get `prefix`.
pub(crate) fn write_model_outputs(out: &mut OutputDir, prefix: &str, model: &FittedModel<f64>) -> Result<(), CliError> {
    out.write(&format!("{prefix}cv.csv"), model.cv_curve().to_csv("lambda"))?;
    match model {
        FittedModel::Lasso(_) => {}
        FittedModel::Glinternet(g) => {
            out.write(&format!("{prefix}path_stats.csv"), path_statistics_csv(&path_statistics(&g.model, Some(&g.cv))))?;
            out.write(&format!("{prefix}network.csv"), export_network(&g.model, g.selected))?;
            let tallies = interaction_tallies(&g.model, &extract_interactions(&g.model, g.selected));
            let mut t = String::from("candidate,n_interactions\n");
            for (name, n) in tallies {
                t.push_str(&format!("{name},{n}\n"));
            }
            out.write(&format!("{prefix}tallies.csv"), t)?;
        }
        FittedModel::Pretrained(m) => {
            if let Some(curve) = &m.alpha_cv {
                out.write(&format!("{prefix}alpha_cv.csv"), curve.to_csv("alpha"))?;
            }
            for (label, g) in &m.groups {
                out.write(&format!("{prefix}group_{}_cv.csv", super::slug(label)), g.cv.to_csv("lambda"))?;
            }
        }
    }
    Ok(())
}
