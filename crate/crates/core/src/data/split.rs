use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::{Error, Float, Result};

/// Row indices per (group, outcome) cell, cells in sorted key order.
fn cells<F: Float>(ds: &Dataset<F>) -> BTreeMap<(String, bool), Vec<usize>> {
    let mut cells: BTreeMap<(String, bool), Vec<usize>> = BTreeMap::new();
    for (i, (g, &y)) in ds.groups().iter().zip(ds.y()).enumerate() {
        cells.entry((g.clone(), y)).or_default().push(i);
    }
    cells
}

/// Stratified train/test split on the joint (group, outcome) cell.
///
/// Each cell sends `round(m * test_fraction)` rows to the test side, clamped
/// to `[1, m - 1]` when the cell has at least two rows; singleton cells stay
/// in training. Both outputs preserve source row order.
pub fn split_train_test<F: Float>(
    ds: &Dataset<F>,
    test_fraction: f64,
    seed: u64,
) -> Result<(Dataset<F>, Dataset<F>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidInput(format!("test fraction {test_fraction} outside (0, 1)")));
    }
    let cells = cells(ds);
    for g in ds.group_levels() {
        for y in [false, true] {
            if !cells.contains_key(&(g.clone(), y)) {
                return Err(Error::EmptyStratum { group: g, outcome: y as u8 });
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut is_test = vec![false; ds.n_rows()];
    for rows in cells.values() {
        let m = rows.len();
        if m < 2 {
            continue;
        }
        let t = ((m as f64) * test_fraction).round() as usize;
        let t = t.clamp(1, m - 1);
        let mut shuffled = rows.clone();
        shuffled.shuffle(&mut rng);
        for &i in &shuffled[..t] {
            is_test[i] = true;
        }
    }
    let train: Vec<usize> = (0..ds.n_rows()).filter(|&i| !is_test[i]).collect();
    let test: Vec<usize> = (0..ds.n_rows()).filter(|&i| is_test[i]).collect();
    Ok((ds.select_rows(&train)?, ds.select_rows(&test)?))
}

/// Fold id per row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldAssignment {
    fold_of: Vec<usize>,
    k: usize,
}

impl FoldAssignment {
    pub fn from_ids(fold_of: Vec<usize>, k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidInput(format!("need at least 2 folds, got {k}")));
        }
        let mut sizes = vec![0usize; k];
        for &f in &fold_of {
            if f >= k {
                return Err(Error::InvalidInput(format!("fold id {f} out of range for k = {k}")));
            }
            sizes[f] += 1;
        }
        if sizes.contains(&0) {
            return Err(Error::InvalidInput("every fold must hold at least one row".into()));
        }
        Ok(Self { fold_of, k })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn fold_ids(&self) -> &[usize] {
        &self.fold_of
    }

    pub fn n_rows(&self) -> usize {
        self.fold_of.len()
    }

    pub fn valid_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_of.len()).filter(|&i| self.fold_of[i] == fold).collect()
    }

    pub fn train_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_of.len()).filter(|&i| self.fold_of[i] != fold).collect()
    }

    /// Folds restricted to a subset of rows (indexed in subset order). Folds
    /// left empty are dropped and the rest renumbered; `None` when fewer than
    /// two folds survive.
    pub fn restrict(&self, rows: &[usize]) -> Option<Self> {
        let mut present = vec![false; self.k];
        for &i in rows {
            present[self.fold_of[i]] = true;
        }
        let mut remap = vec![usize::MAX; self.k];
        let mut next = 0;
        for f in 0..self.k {
            if present[f] {
                remap[f] = next;
                next += 1;
            }
        }
        if next < 2 {
            return None;
        }
        let fold_of = rows.iter().map(|&i| remap[self.fold_of[i]]).collect();
        Some(Self { fold_of, k: next })
    }
}

/// Stratified k-fold assignment.
///
/// Rows of each (group, outcome) cell are shuffled and dealt round-robin with
/// a counter that runs across cells, positive cells first. Every cell then
/// splits into counts differing by at most one, and fold sizes stay balanced.
pub fn make_folds<F: Float>(ds: &Dataset<F>, k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 folds, got {k}")));
    }
    let n = ds.n_rows();
    if n < k {
        return Err(Error::TooFewRows { n, k });
    }
    let cells = cells(ds);
    let mut order: Vec<(&(String, bool), &Vec<usize>)> = cells.iter().collect();
    order.sort_by(|a, b| b.0 .1.cmp(&a.0 .1).then_with(|| a.0 .0.cmp(&b.0 .0)));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold_of = vec![0usize; n];
    let mut counter = 0usize;
    for (_, rows) in order {
        let mut shuffled = rows.clone();
        shuffled.shuffle(&mut rng);
        for i in shuffled {
            fold_of[i] = counter % k;
            counter += 1;
        }
    }
    FoldAssignment::from_ids(fold_of, k)
}
