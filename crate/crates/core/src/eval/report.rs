//! AUC and paired-test tables.
//!
//! Grid (a) has one row per (method, data) with an AUC per outcome, the row
//! average and its increment over the baseline method trained on the target
//! group alone. Grid (b) compares every other row to the baseline method
//! trained on the same data, per outcome: one-sided DeLong p-value and ΔAUC.
//! With [`Pairing::Reference`] every row is instead compared to the single
//! baseline row.

use std::fmt::Write as _;

use super::{auc, class_counts, delong_one_sided, RocComparison, RocCurve};
use crate::{Error, Float, Result};

/// Comparisons are refused when either class has fewer test rows.
pub const MIN_CLASS_COUNT: usize = 10;

/// Test-set scores of one fitted model.
#[derive(Debug, Clone, PartialEq)]
pub struct Run<F> {
    pub method: String,
    pub data: String,
    pub outcome: String,
    pub scores: Vec<F>,
    pub labels: Vec<bool>,
}

/// Which baseline run each row of grid (b) is tested against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Pairing {
    /// The baseline method trained on the row's own data.
    #[default]
    SameData,
    /// The one baseline row `(baseline_method, group_only_data)`.
    Reference,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportSpec {
    pub baseline_method: String,
    /// Data label of the baseline row that `inc` is measured against.
    pub group_only_data: String,
    pub pairing: Pairing,
}

impl ReportSpec {
    pub fn new(baseline_method: impl Into<String>, group_only_data: impl Into<String>) -> Self {
        Self { baseline_method: baseline_method.into(), group_only_data: group_only_data.into(), pairing: Pairing::SameData }
    }

    pub fn against_reference(mut self) -> Self {
        self.pairing = Pairing::Reference;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Comparison<F> {
    Tested(RocComparison<F>),
    /// Too few test rows in a class; only ΔAUC is reported.
    Guarded { delta_auc: F, positives: usize, negatives: usize },
}

impl<F: Float> Comparison<F> {
    pub fn delta_auc(&self) -> F {
        match self {
            Comparison::Tested(c) => c.delta_auc,
            Comparison::Guarded { delta_auc, .. } => *delta_auc,
        }
    }

    pub fn p_value(&self) -> Option<F> {
        match self {
            Comparison::Tested(c) => Some(c.p_one_sided),
            Comparison::Guarded { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report<F> {
    pub spec: ReportSpec,
    pub outcomes: Vec<String>,
    /// `(method, data)` in first-seen order.
    pub rows: Vec<(String, String)>,
    /// `auc[row][outcome]`, `None` when that run is absent.
    pub auc: Vec<Vec<Option<F>>>,
    pub avg: Vec<F>,
    pub inc: Vec<F>,
    /// Row indices of grid (b) with their comparisons per outcome.
    pub tests: Vec<(usize, Vec<Option<Comparison<F>>>)>,
}

fn push_unique(v: &mut Vec<String>, s: &str) -> usize {
    match v.iter().position(|x| x == s) {
        Some(i) => i,
        None => {
            v.push(s.to_string());
            v.len() - 1
        }
    }
}

pub fn build_report<F: Float>(runs: &[Run<F>], spec: &ReportSpec) -> Result<Report<F>> {
    let mut outcomes = Vec::new();
    let mut rows: Vec<(String, String)> = Vec::new();
    for r in runs {
        push_unique(&mut outcomes, &r.outcome);
        let key = (r.method.clone(), r.data.clone());
        if !rows.contains(&key) {
            rows.push(key);
        }
    }
    let find = |method: &str, data: &str, outcome: &str| {
        runs.iter().find(|r| r.method == method && r.data == data && r.outcome == outcome)
    };
    let mut auc_grid = vec![vec![None; outcomes.len()]; rows.len()];
    for r in runs {
        let i = rows.iter().position(|k| k.0 == r.method && k.1 == r.data).expect("row registered");
        let j = outcomes.iter().position(|o| *o == r.outcome).expect("outcome registered");
        if auc_grid[i][j].is_some() {
            return Err(Error::InvalidInput(format!("duplicate run {}/{}/{}", r.method, r.data, r.outcome)));
        }
        auc_grid[i][j] = Some(auc(&r.scores, &r.labels)?);
    }
    let avg: Vec<F> = auc_grid
        .iter()
        .map(|row| {
            let vals: Vec<F> = row.iter().flatten().copied().collect();
            vals.iter().fold(F::zero(), |a, &v| a + v) / F::from_usize_lossy(vals.len().max(1))
        })
        .collect();
    let base_row = rows
        .iter()
        .position(|k| k.0 == spec.baseline_method && k.1 == spec.group_only_data)
        .ok_or_else(|| Error::MissingBaseline { data: spec.group_only_data.clone(), outcome: "*".into() })?;
    let inc = avg.iter().map(|&a| a - avg[base_row]).collect();

    let mut tests = Vec::new();
    for (i, (method, data)) in rows.iter().enumerate() {
        if i == base_row || (spec.pairing == Pairing::SameData && *method == spec.baseline_method) {
            continue;
        }
        let base_data = match spec.pairing {
            Pairing::SameData => data,
            Pairing::Reference => &spec.group_only_data,
        };
        let mut cells = Vec::with_capacity(outcomes.len());
        for outcome in &outcomes {
            let Some(run) = find(method, data, outcome) else {
                cells.push(None);
                continue;
            };
            let base = find(&spec.baseline_method, base_data, outcome)
                .ok_or_else(|| Error::MissingBaseline { data: base_data.clone(), outcome: outcome.clone() })?;
            if base.labels != run.labels {
                return Err(Error::Unpaired(format!("{method}/{data}/{outcome} and its baseline use different test rows")));
            }
            let (pos, neg) = class_counts(&run.labels);
            let (auc_new, auc_base) = (auc(&run.scores, &run.labels)?, auc(&base.scores, &base.labels)?);
            let delta_auc = auc_new - auc_base;
            let cmp = if pos < MIN_CLASS_COUNT || neg < MIN_CLASS_COUNT {
                Comparison::Guarded { delta_auc, positives: pos, negatives: neg }
            } else {
                let t = delong_one_sided(&base.scores, &run.scores, &run.labels)?;
                Comparison::Tested(RocComparison { auc_base, auc_new, delta_auc, ..t })
            };
            cells.push(Some(cmp));
        }
        tests.push((i, cells));
    }
    Ok(Report { spec: spec.clone(), outcomes, rows, auc: auc_grid, avg, inc, tests })
}

fn fmt4<F: Float>(v: F) -> String {
    format!("{:.4}", v.to_f64_lossy())
}

/// p-value cell; significant values carry a trailing `*`.
fn p_cell<F: Float>(c: &Comparison<F>) -> String {
    match c.p_value() {
        Some(p) if p.to_f64_lossy() < 0.05 => format!("{}*", fmt4(p)),
        Some(p) => fmt4(p),
        None => "NA".into(),
    }
}

impl<F: Float> Report<F> {
    fn auc_table(&self) -> Vec<Vec<String>> {
        let mut t = vec![["method", "data"].iter().map(|s| s.to_string()).chain(self.outcomes.iter().cloned()).chain(["avg".into(), "inc".into()]).collect()];
        for (i, (m, d)) in self.rows.iter().enumerate() {
            let mut row = vec![m.clone(), d.clone()];
            row.extend(self.auc[i].iter().map(|v| v.map(fmt4).unwrap_or_default()));
            row.push(fmt4(self.avg[i]));
            row.push(fmt4(self.inc[i]));
            t.push(row);
        }
        t
    }

    fn test_table(&self) -> Vec<Vec<String>> {
        let mut t = vec![["method", "metric", "data"].iter().map(|s| s.to_string()).chain(self.outcomes.iter().cloned()).collect()];
        for (i, cells) in &self.tests {
            let (m, d) = &self.rows[*i];
            let line = |metric: &str, f: &dyn Fn(&Comparison<F>) -> String| {
                let mut row = vec![m.clone(), metric.to_string(), d.clone()];
                row.extend(cells.iter().map(|c| c.as_ref().map(f).unwrap_or_default()));
                row
            };
            t.push(line("p", &p_cell));
            t.push(line("delta_auc", &|c| fmt4(c.delta_auc())));
            if cells.iter().flatten().any(|c| matches!(c, Comparison::Guarded { .. })) {
                t.push(line("warning", &|c| match c {
                    Comparison::Guarded { positives, negatives, .. } => {
                        format!("{positives} positive / {negatives} negative test rows; needs {MIN_CLASS_COUNT} each")
                    }
                    Comparison::Tested(_) => String::new(),
                }));
            }
        }
        t
    }

    /// Grid (a) as CSV: `method,data,<outcomes>,avg,inc`.
    pub fn auc_csv(&self) -> String {
        to_csv(&self.auc_table())
    }

    /// Grid (b) as CSV: `method,metric,data,<outcomes>`; `p` cells below 0.05
    /// end in `*`, guarded cells read `NA`.
    pub fn test_csv(&self) -> String {
        to_csv(&self.test_table())
    }

    /// Both grids as aligned plain text.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "ROC-AUC (inc = row average minus the average of {} trained on {})",
            self.spec.baseline_method, self.spec.group_only_data
        );
        out.push_str(&aligned(&self.auc_table()));
        let against = match self.spec.pairing {
            Pairing::SameData => format!("{} on the same data", self.spec.baseline_method),
            Pairing::Reference => format!("{} trained on {}", self.spec.baseline_method, self.spec.group_only_data),
        };
        let _ = writeln!(out, "\nOne-sided DeLong p-values and delta AUC against {against} (* p < 0.05)");
        out.push_str(&aligned(&self.test_table()));
        out
    }
}

fn to_csv(rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.write_record(r).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("utf-8 input")
}

fn aligned(rows: &[Vec<String>]) -> String {
    let ncol = rows.iter().map(|r| r.len()).max().unwrap_or(0);
    let width: Vec<usize> = (0..ncol).map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for r in rows {
        let cells: Vec<String> = r.iter().enumerate().map(|(c, s)| format!("{s:<w$}", w = width[c])).collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out
}

/// `threshold,fpr,tpr` rows of a ROC curve.
pub fn roc_csv<F: Float>(curve: &RocCurve<F>) -> String {
    let mut out = String::from("threshold,fpr,tpr\n");
    for k in 0..curve.fpr.len() {
        let _ = writeln!(out, "{},{},{}", curve.thresholds[k], curve.fpr[k], curve.tpr[k]);
    }
    out
}
