use stratglm::synth::{cohort_preset, generate, truth_csv, SynthConfig, SynthData};
use stratglm::io::{render_schema, write_dataset, CsvLayout};

use crate::config::Config;
use crate::error::CliError;
use crate::manifest::{OutputDir, RunManifest};
use crate::Options;

use super::output_dir;

pub(crate) const SYNTH_KEYS: [&str; 3] = ["synth.preset", "synth.seed", "synth.n.*"];

/// Preset with seed and per-group size overrides (`synth.n.<group> = N`).
pub(crate) fn synth_config(cfg: &Config) -> Result<SynthConfig<f64>, CliError> {
    let preset = cfg.require("synth.preset")?;
    let mut sc: SynthConfig<f64> = cohort_preset(preset)?;
    sc.seed = cfg.parsed_or("synth.seed", 0)?;
    for (label, value) in cfg.with_prefix("synth.n.") {
        let n: usize = value.parse().map_err(|_| CliError::Config(format!("`synth.n.{label}`: cannot parse `{value}`")))?;
        let g = sc
            .groups
            .iter_mut()
            .find(|g| g.label == label)
            .ok_or_else(|| CliError::Config(format!("preset `{preset}` has no group `{label}`")))?;
        g.n = n;
    }
    sc.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(sc)
}

pub(crate) fn generate_from(cfg: &Config) -> Result<SynthData<f64>, CliError> {
    Ok(generate(&synth_config(cfg)?)?)
}

pub fn run(cfg: &Config, opts: &Options) -> Result<(), CliError> {
    let mut keys = vec!["output.dir"];
    keys.extend(SYNTH_KEYS);
    cfg.check_keys(&keys)?;
    let sc = synth_config(cfg)?;
    let data = generate(&sc)?;
    let mut out = OutputDir::create(output_dir(cfg, opts)?, RunManifest::new("synth", cfg.bytes(), Some(sc.seed)))?;
    let mut csv = Vec::new();
    write_dataset(&data.dataset, &CsvLayout::default(), &mut csv)?;
    out.write("data.csv", csv)?;
    out.write("schema.txt", render_schema(data.dataset.features()))?;
    out.write("truth.csv", truth_csv(&data))?;
    out.finish()
}
