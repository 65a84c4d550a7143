//! Column layout of the overlapped design.
//!
//! Unique columns are: the intercept, then each feature's columns (one for a
//! continuous feature, one indicator per level for a categorical one), then
//! each pair's product columns. Groups index into these; parent copies in an
//! interaction group point at the parent's own columns.

use std::ops::Range;

use ndarray::{Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use super::{GroupKind, GroupStructure};
use crate::{Error, Float, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct InteractionDesign<F: Float> {
    pub structure: GroupStructure,
    /// Centering per product column (nonzero only for continuous pairs).
    pub product_center: Vec<F>,
    pub product_scale: Vec<F>,
}

struct Layout {
    feature_start: Vec<usize>,
    product_start: Vec<usize>,
    n_columns: usize,
}

fn layout(s: &GroupStructure) -> Layout {
    let mut next = 1;
    let feature_start = (0..s.n_features())
        .map(|i| {
            let at = next;
            next += s.feature_width(i);
            at
        })
        .collect();
    let product_start = (0..s.pairs.len())
        .map(|k| {
            let at = next;
            next += s.product_width(k);
            at
        })
        .collect();
    Layout { feature_start, product_start, n_columns: next }
}

/// Columns of feature `i` evaluated on `x`, one closure call per column.
fn feature_values<F: Float>(s: &GroupStructure, x: ArrayView1<F>, i: usize) -> Vec<Vec<F>> {
    match s.features[i].n_levels() {
        None => vec![x.to_vec()],
        Some(l) => (0..l)
            .map(|lev| {
                let code = F::from_usize_lossy(lev);
                x.iter().map(|&v| if v == code { F::one() } else { F::zero() }).collect()
            })
            .collect(),
    }
}

fn raw_products<F: Float>(s: &GroupStructure, x: ArrayView2<F>, k: usize) -> Vec<Vec<F>> {
    let (c, j) = s.pairs[k];
    let a = feature_values(s, x.column(c), c);
    let b = feature_values(s, x.column(j), j);
    let mut out = Vec::with_capacity(a.len() * b.len());
    for ca in &a {
        for cb in &b {
            out.push(ca.iter().zip(cb).map(|(&u, &v)| u * v).collect());
        }
    }
    out
}

impl<F: Float> InteractionDesign<F> {
    /// Records the standardization of continuous-by-continuous products on `x`.
    pub fn fit(structure: GroupStructure, x: ArrayView2<F>) -> Result<Self> {
        if x.ncols() != structure.n_features() {
            return Err(Error::DimensionMismatch(format!(
                "{} columns for {} features",
                x.ncols(),
                structure.n_features()
            )));
        }
        let n = F::from_usize_lossy(x.nrows().max(1));
        let mut product_center = Vec::new();
        let mut product_scale = Vec::new();
        for k in 0..structure.pairs.len() {
            let (c, j) = structure.pairs[k];
            let both_continuous = structure.features[c].is_continuous() && structure.features[j].is_continuous();
            for col in raw_products(&structure, x, k) {
                if both_continuous {
                    let mean = col.iter().fold(F::zero(), |a, &v| a + v) / n;
                    let var = col.iter().fold(F::zero(), |a, &v| a + (v - mean) * (v - mean)) / n;
                    let sd = var.sqrt();
                    let scale = if sd > F::epsilon() * (F::one() + mean.abs()) { sd } else { F::one() };
                    product_center.push(mean);
                    product_scale.push(scale);
                } else {
                    product_center.push(F::zero());
                    product_scale.push(F::one());
                }
            }
        }
        Ok(Self { structure, product_center, product_scale })
    }

    pub fn n_columns(&self) -> usize {
        layout(&self.structure).n_columns
    }

    pub fn feature_columns(&self, i: usize) -> Range<usize> {
        let start = layout(&self.structure).feature_start[i];
        start..start + self.structure.feature_width(i)
    }

    pub fn product_columns(&self, k: usize) -> Range<usize> {
        let start = layout(&self.structure).product_start[k];
        start..start + self.structure.product_width(k)
    }

    /// Unique-column indices of every group, in the order its coefficients
    /// are stored: parent columns first, then products.
    pub fn group_columns(&self) -> Vec<Vec<usize>> {
        let s = &self.structure;
        let l = layout(s);
        let feat = |i: usize| l.feature_start[i]..l.feature_start[i] + s.feature_width(i);
        (0..s.n_groups())
            .map(|g| match s.kind(g) {
                GroupKind::Main(i) => feat(i).collect(),
                GroupKind::Interaction(c, j) => {
                    let k = g - s.n_features();
                    let prod = l.product_start[k]..l.product_start[k] + s.product_width(k);
                    feat(c).chain(feat(j)).chain(prod).collect()
                }
            })
            .collect()
    }

    /// Unique-column matrix of `x`, intercept column first.
    pub fn matrix(&self, x: ArrayView2<F>) -> Result<Array2<F>> {
        let s = &self.structure;
        if x.ncols() != s.n_features() {
            return Err(Error::DimensionMismatch(format!("{} columns for {} features", x.ncols(), s.n_features())));
        }
        let l = layout(s);
        let mut u = Array2::zeros((x.nrows(), l.n_columns));
        u.column_mut(0).fill(F::one());
        for i in 0..s.n_features() {
            for (off, col) in feature_values(s, x.column(i), i).into_iter().enumerate() {
                u.column_mut(l.feature_start[i] + off).assign(&ArrayView1::from(&col));
            }
        }
        let mut pc = 0;
        for k in 0..s.pairs.len() {
            for (off, col) in raw_products(s, x, k).into_iter().enumerate() {
                let (m, sd) = (self.product_center[pc], self.product_scale[pc]);
                let mut dst = u.column_mut(l.product_start[k] + off);
                for (d, v) in dst.iter_mut().zip(col) {
                    *d = (v - m) / sd;
                }
                pc += 1;
            }
        }
        Ok(u)
    }
}
