//! CSV + schema ingestion and the serde helpers used by model files.
//!
//! Schema files hold one feature per line, `name,kind,candidate_flag`, where
//! `kind` is `continuous` or `categorical:LEVEL|LEVEL|...` and the flag is
//! `1`/`0` (or `true`/`false`). Blank lines and `#` comments are ignored.

use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use ndarray::Array2;

use crate::data::{Dataset, FeatureKind, FeatureMeta};
use crate::{Error, Float, Result};

/// Names of the outcome and group columns in a data CSV.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvLayout {
    pub outcome: String,
    pub group: String,
}

impl Default for CsvLayout {
    fn default() -> Self {
        Self { outcome: "y".into(), group: "group".into() }
    }
}

pub fn parse_schema(text: &str) -> Result<Vec<FeatureMeta>> {
    let mut features = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |what: &str| Error::InvalidInput(format!("schema line {}: {what}", lineno + 1));
        let parts: Vec<&str> = line.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(bad("expected `name,kind,candidate_flag`"));
        }
        let kind = if parts[1] == "continuous" {
            FeatureKind::Continuous
        } else if let Some(levels) = parts[1].strip_prefix("categorical:") {
            let levels: Vec<String> = levels.split('|').map(|s| s.trim().to_string()).collect();
            if levels.iter().any(String::is_empty) {
                return Err(bad("empty categorical level"));
            }
            FeatureKind::Categorical { levels }
        } else {
            return Err(bad("kind must be `continuous` or `categorical:A|B|...`"));
        };
        let candidate = match parts[2] {
            "1" | "true" => true,
            "0" | "false" => false,
            _ => return Err(bad("candidate flag must be 0/1")),
        };
        features.push(FeatureMeta { name: parts[0].to_string(), kind, interaction_candidate: candidate });
    }
    crate::data::validate_features(&features)?;
    Ok(features)
}

pub fn render_schema(features: &[FeatureMeta]) -> String {
    let mut out = String::new();
    for f in features {
        let kind = match &f.kind {
            FeatureKind::Continuous => "continuous".to_string(),
            FeatureKind::Categorical { levels } => format!("categorical:{}", levels.join("|")),
        };
        out.push_str(&format!("{},{},{}\n", f.name, kind, u8::from(f.interaction_candidate)));
    }
    out
}

pub fn read_schema(path: &Path) -> Result<Vec<FeatureMeta>> {
    parse_schema(&std::fs::read_to_string(path)?)
}

pub fn read_dataset<F: Float>(data: &Path, schema: &Path, layout: &CsvLayout) -> Result<Dataset<F>> {
    let features = read_schema(schema)?;
    read_dataset_from(File::open(data)?, features, layout)
}

/// Parses a data CSV whose feature columns are typed by `features`.
pub fn read_dataset_from<F: Float, R: Read>(reader: R, features: Vec<FeatureMeta>, layout: &CsvLayout) -> Result<Dataset<F>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(|s| s.trim().to_string()).collect();
    let position = |name: &str| headers.iter().position(|h| h == name);
    let y_col = position(&layout.outcome)
        .ok_or_else(|| Error::InvalidInput(format!("outcome column `{}` not found", layout.outcome)))?;
    let g_col = position(&layout.group)
        .ok_or_else(|| Error::InvalidInput(format!("group column `{}` not found", layout.group)))?;
    let mut feature_cols = Vec::with_capacity(features.len());
    for f in &features {
        feature_cols.push(position(&f.name).ok_or_else(|| Error::InvalidInput(format!("feature column `{}` not found", f.name)))?);
    }
    if headers.len() != features.len() + 2 {
        let known: Vec<&str> = features.iter().map(|f| f.name.as_str()).chain([layout.outcome.as_str(), layout.group.as_str()]).collect();
        let extra: Vec<&String> = headers.iter().filter(|h| !known.contains(&h.as_str())).collect();
        return Err(Error::InvalidInput(format!("columns not described by the schema: {extra:?}")));
    }
    let level_maps: Vec<Option<HashMap<&str, usize>>> = features
        .iter()
        .map(|f| match &f.kind {
            FeatureKind::Continuous => None,
            FeatureKind::Categorical { levels } => Some(levels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect()),
        })
        .collect();

    let mut values = Vec::new();
    let mut y = Vec::new();
    let mut groups = Vec::new();
    for (r, record) in rdr.records().enumerate() {
        let record = record?;
        let line = r + 2;
        let cell = |c: usize| -> Result<&str> {
            let v = record.get(c).map(str::trim).unwrap_or("");
            if v.is_empty() || v.eq_ignore_ascii_case("na") || v.eq_ignore_ascii_case("nan") {
                Err(Error::InvalidInput(format!("missing value at line {line}, column `{}`", headers[c])))
            } else {
                Ok(v)
            }
        };
        y.push(match cell(y_col)? {
            "1" => true,
            "0" => false,
            other => return Err(Error::InvalidInput(format!("outcome `{other}` at line {line} is not 0/1"))),
        });
        groups.push(cell(g_col)?.to_string());
        for (fi, &c) in feature_cols.iter().enumerate() {
            let v = cell(c)?;
            let value = match &level_maps[fi] {
                None => v
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| Error::InvalidInput(format!("non-numeric value `{v}` at line {line}, column `{}`", headers[c])))?,
                Some(map) => *map.get(v).ok_or_else(|| {
                    Error::InvalidInput(format!("unknown level `{v}` at line {line}, column `{}`", headers[c]))
                })? as f64,
            };
            values.push(F::lit(value));
        }
    }
    let n = y.len();
    let x = Array2::from_shape_vec((n, features.len()), values).map_err(|e| Error::InvalidInput(e.to_string()))?;
    Dataset::new(x, y, groups, features)
}

/// Writes a dataset in the layout [`read_dataset_from`] accepts.
pub fn write_dataset<F: Float, W: Write>(ds: &Dataset<F>, layout: &CsvLayout, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header = vec![layout.group.clone(), layout.outcome.clone()];
    header.extend(ds.features().iter().map(|f| f.name.clone()));
    wtr.write_record(&header)?;
    for i in 0..ds.n_rows() {
        let mut rec = Vec::with_capacity(header.len());
        rec.push(ds.groups()[i].clone());
        rec.push(if ds.y()[i] { "1".into() } else { "0".into() });
        for (j, f) in ds.features().iter().enumerate() {
            let v = ds.x()[[i, j]];
            rec.push(match &f.kind {
                FeatureKind::Continuous => format!("{v}"),
                FeatureKind::Categorical { levels } => levels[v.to_f64_lossy() as usize].clone(),
            });
        }
        wtr.write_record(&rec)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Penalty factors in JSON, with `null` standing for an infinite factor.
pub mod serde_pf {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::Float;

    pub fn serialize<F: Float, S: Serializer>(pf: &[F], s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<Option<F>> = pf.iter().map(|&x| if x.is_infinite() { None } else { Some(x) }).collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, F: Float, D: Deserializer<'de>>(d: D) -> Result<Vec<F>, D::Error> {
        let v: Vec<Option<F>> = Vec::deserialize(d)?;
        Ok(v.into_iter().map(|x| x.unwrap_or_else(F::infinity)).collect())
    }
}

/// Dense vectors stored as `{ "len": n, "nz": [[index, value], ...] }`.
pub mod serde_sparse {
    use ndarray::Array1;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::Float;

    #[derive(Serialize, Deserialize)]
    #[serde(bound = "")]
    struct Sparse<F: Float> {
        len: usize,
        nz: Vec<(usize, F)>,
    }

    pub fn serialize<F: Float, S: Serializer>(v: &Array1<F>, s: S) -> Result<S::Ok, S::Error> {
        let nz = v.iter().enumerate().filter(|(_, &x)| x != F::zero()).map(|(i, &x)| (i, x)).collect();
        Sparse { len: v.len(), nz }.serialize(s)
    }

    pub fn deserialize<'de, F: Float, D: Deserializer<'de>>(d: D) -> Result<Array1<F>, D::Error> {
        let sp: Sparse<F> = Sparse::deserialize(d)?;
        let mut v = Array1::zeros(sp.len);
        for (i, x) in sp.nz {
            if i >= sp.len {
                return Err(serde::de::Error::custom(format!("index {i} out of range for length {}", sp.len)));
            }
            v[i] = x;
        }
        Ok(v)
    }
}
