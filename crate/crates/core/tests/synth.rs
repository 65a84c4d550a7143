use std::fs;

use stratglm::io::{read_dataset, CsvLayout};
use stratglm::synth::{cohort_preset, generate, write_synth, SynthConfig, PRESETS};

fn data(name: &str, seed: u64) -> stratglm::synth::SynthData<f64> {
    let mut cfg: SynthConfig<f64> = cohort_preset(name).unwrap();
    cfg.seed = seed;
    generate(&cfg).unwrap()
}

#[test]
fn written_files_read_back_identically() {
    for name in PRESETS {
        let d = data(name, 3);
        let dir = tempfile::tempdir().unwrap();
        write_synth(&d, dir.path()).unwrap();
        let back = read_dataset::<f64>(&dir.path().join("data.csv"), &dir.path().join("schema.txt"), &CsvLayout::default())
            .unwrap();
        assert_eq!(back.x(), d.dataset.x(), "{name}");
        assert_eq!(back.y(), d.dataset.y());
        assert_eq!(back.groups(), d.dataset.groups());
        assert_eq!(back.features(), d.dataset.features());

        let truth = fs::read_to_string(dir.path().join("truth.csv")).unwrap();
        let logits: Vec<f64> = truth.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
        assert_eq!(logits, d.truth);
    }
}

#[test]
fn same_seed_writes_identical_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    write_synth(&data("paperlike_small", 9), a.path()).unwrap();
    write_synth(&data("paperlike_small", 9), b.path()).unwrap();
    for f in ["data.csv", "schema.txt", "truth.csv"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    let c = tempfile::tempdir().unwrap();
    write_synth(&data("paperlike_small", 10), c.path()).unwrap();
    assert_ne!(fs::read(a.path().join("data.csv")).unwrap(), fs::read(c.path().join("data.csv")).unwrap());
}

#[test]
fn paperlike_group_ratio() {
    let cfg: SynthConfig<f64> = cohort_preset("paperlike_small").unwrap();
    let sizes: Vec<usize> = cfg.groups.iter().map(|g| g.n).collect();
    let ratio = *sizes.iter().max().unwrap() as f64 / *sizes.iter().min().unwrap() as f64;
    assert!((ratio - 80_810.0 / 1_499.0).abs() < 1.0, "ratio {ratio}");
}
