//! Domain types, standardization, cohort assembly, splitting and folding.

mod design;
mod split;
mod standardize;

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::{Error, Float, Result};

pub use design::{design_columns, design_matrix, Coding, DesignColumn};
pub use split::{make_folds, split_train_test, FoldAssignment};
pub use standardize::{standardize, StandardizationRecord};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FeatureKind {
    Continuous,
    Categorical { levels: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureMeta {
    pub name: String,
    pub kind: FeatureKind,
    pub interaction_candidate: bool,
}

impl FeatureMeta {
    pub fn continuous(name: impl Into<String>) -> Self {
        Self { name: name.into(), kind: FeatureKind::Continuous, interaction_candidate: false }
    }

    pub fn categorical(name: impl Into<String>, levels: &[&str]) -> Self {
        Self {
            name: name.into(),
            kind: FeatureKind::Categorical { levels: levels.iter().map(|s| s.to_string()).collect() },
            interaction_candidate: false,
        }
    }

    pub fn candidate(mut self) -> Self {
        self.interaction_candidate = true;
        self
    }

    pub fn is_continuous(&self) -> bool {
        matches!(self.kind, FeatureKind::Continuous)
    }

    /// Number of levels for a categorical feature, `None` for continuous.
    pub fn n_levels(&self) -> Option<usize> {
        match &self.kind {
            FeatureKind::Continuous => None,
            FeatureKind::Categorical { levels } => Some(levels.len()),
        }
    }
}

pub(crate) fn validate_features(features: &[FeatureMeta]) -> Result<()> {
    let mut seen = HashSet::new();
    for f in features {
        if !seen.insert(f.name.as_str()) {
            return Err(Error::InvalidInput(format!("duplicate feature name `{}`", f.name)));
        }
        if let Some(l) = f.n_levels() {
            if l < 2 {
                return Err(Error::InvalidInput(format!(
                    "categorical feature `{}` needs at least two levels",
                    f.name
                )));
            }
        }
    }
    Ok(())
}

/// Feature matrix, binary outcome and group label per row.
///
/// Categorical features occupy one column holding the level index; they are
/// expanded into indicators only when a solver design is built.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<F: Float> {
    x: Array2<F>,
    y: Vec<bool>,
    groups: Vec<String>,
    features: Vec<FeatureMeta>,
    row_ids: Vec<usize>,
}

impl<F: Float> Dataset<F> {
    pub fn new(x: Array2<F>, y: Vec<bool>, groups: Vec<String>, features: Vec<FeatureMeta>) -> Result<Self> {
        let row_ids = (0..x.nrows()).collect();
        Self::with_row_ids(x, y, groups, features, row_ids)
    }

    pub fn with_row_ids(
        x: Array2<F>,
        y: Vec<bool>,
        groups: Vec<String>,
        features: Vec<FeatureMeta>,
        row_ids: Vec<usize>,
    ) -> Result<Self> {
        let n = x.nrows();
        if n == 0 {
            return Err(Error::InvalidInput("dataset has no rows".into()));
        }
        if y.len() != n || groups.len() != n || row_ids.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{n} rows in X but {} outcomes, {} group labels, {} row ids",
                y.len(),
                groups.len(),
                row_ids.len()
            )));
        }
        if features.len() != x.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "{} feature descriptions for {} columns",
                features.len(),
                x.ncols()
            )));
        }
        validate_features(&features)?;
        for (j, f) in features.iter().enumerate() {
            let col = x.column(j);
            if col.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!("missing or non-finite value in `{}`", f.name)));
            }
            if let Some(l) = f.n_levels() {
                let bad = col.iter().any(|&v| v < F::zero() || v.fract() != F::zero() || v >= F::from_usize_lossy(l));
                if bad {
                    return Err(Error::InvalidInput(format!("invalid level code in `{}`", f.name)));
                }
            }
        }
        Ok(Self { x, y, groups, features, row_ids })
    }

    pub fn x(&self) -> &Array2<F> {
        &self.x
    }

    pub fn y(&self) -> &[bool] {
        &self.y
    }

    /// Outcomes as 0/1 scalars.
    pub fn y_float(&self) -> Array1<F> {
        self.y.iter().map(|&b| if b { F::one() } else { F::zero() }).collect()
    }

    pub fn groups(&self) -> &[String] {
        &self.groups
    }

    pub fn features(&self) -> &[FeatureMeta] {
        &self.features
    }

    pub fn row_ids(&self) -> &[usize] {
        &self.row_ids
    }

    pub fn n_rows(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.x.ncols()
    }

    /// Distinct group labels in sorted order.
    pub fn group_levels(&self) -> Vec<String> {
        let mut levels: Vec<String> = self.groups.iter().cloned().collect::<HashSet<_>>().into_iter().collect();
        levels.sort();
        levels
    }

    pub fn has_group(&self, label: &str) -> bool {
        self.groups.iter().any(|g| g == label)
    }

    /// Row counts per (group, outcome) cell.
    pub fn cell_counts(&self) -> BTreeMap<(String, bool), usize> {
        let mut counts = BTreeMap::new();
        for (g, &y) in self.groups.iter().zip(&self.y) {
            *counts.entry((g.clone(), y)).or_insert(0) += 1;
        }
        counts
    }

    /// New dataset made of the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        Self::with_row_ids(
            self.x.select(Axis(0), rows),
            rows.iter().map(|&i| self.y[i]).collect(),
            rows.iter().map(|&i| self.groups[i].clone()).collect(),
            self.features.clone(),
            rows.iter().map(|&i| self.row_ids[i]).collect(),
        )
    }

    pub fn rows_in_group(&self, label: &str) -> Vec<usize> {
        self.groups.iter().enumerate().filter(|(_, g)| *g == label).map(|(i, _)| i).collect()
    }

    /// Replaces the feature matrix (same shape), e.g. after standardization.
    pub fn with_x(&self, x: Array2<F>) -> Result<Self> {
        if x.dim() != self.x.dim() {
            return Err(Error::DimensionMismatch("replacement matrix has a different shape".into()));
        }
        Self::with_row_ids(x, self.y.clone(), self.groups.clone(), self.features.clone(), self.row_ids.clone())
    }

    pub fn continuous_columns(&self) -> Vec<usize> {
        self.features.iter().enumerate().filter(|(_, f)| f.is_continuous()).map(|(j, _)| j).collect()
    }
}

/// Which rows of a multi-group cohort enter training.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum DataConfig {
    GroupOnly(String),
    Mix(String, String),
    All,
}

impl DataConfig {
    /// Parses `all`, `mix:MAJOR,MINOR` or `group:LABEL`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("all") {
            return Ok(DataConfig::All);
        }
        if let Some(rest) = s.strip_prefix("mix:") {
            let parts: Vec<&str> = rest.split(',').map(str::trim).collect();
            if parts.len() == 2 && parts.iter().all(|p| !p.is_empty()) && parts[0] != parts[1] {
                return Ok(DataConfig::Mix(parts[0].into(), parts[1].into()));
            }
        }
        if let Some(g) = s.strip_prefix("group:") {
            if !g.trim().is_empty() {
                return Ok(DataConfig::GroupOnly(g.trim().into()));
            }
        }
        Err(Error::InvalidConfig(format!("data config `{s}`: expected all, mix:A,B or group:A")))
    }

    /// Short label used in report tables.
    pub fn label(&self) -> String {
        match self {
            DataConfig::GroupOnly(g) => g.clone(),
            DataConfig::Mix(..) => "Mix".into(),
            DataConfig::All => "All".into(),
        }
    }

    pub fn is_group_only(&self) -> bool {
        matches!(self, DataConfig::GroupOnly(_))
    }
}

impl fmt::Display for DataConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DataConfig::GroupOnly(g) => write!(f, "group:{g}"),
            DataConfig::Mix(a, b) => write!(f, "mix:{a},{b}"),
            DataConfig::All => write!(f, "all"),
        }
    }
}

/// Restricts a cohort to the rows a data configuration trains on, preserving row order.
pub fn assemble<F: Float>(dataset: &Dataset<F>, config: &DataConfig) -> Result<Dataset<F>> {
    let wanted: Vec<&str> = match config {
        DataConfig::All => return Ok(dataset.clone()),
        DataConfig::GroupOnly(g) => vec![g.as_str()],
        DataConfig::Mix(a, b) => vec![a.as_str(), b.as_str()],
    };
    for g in &wanted {
        if !dataset.has_group(g) {
            return Err(Error::UnknownGroup(g.to_string()));
        }
    }
    let rows: Vec<usize> = dataset
        .groups()
        .iter()
        .enumerate()
        .filter(|(_, g)| wanted.contains(&g.as_str()))
        .map(|(i, _)| i)
        .collect();
    dataset.select_rows(&rows)
}
