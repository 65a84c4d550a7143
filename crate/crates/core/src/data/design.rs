use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{Dataset, FeatureKind, FeatureMeta};
use crate::Float;

/// How categorical features expand into solver columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Coding {
    /// `L - 1` indicators, first level is the reference.
    Reference,
    /// One indicator per level.
    Full,
}

/// One column of an expanded design: a continuous feature, or the indicator
/// of one level of a categorical feature.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesignColumn {
    pub feature: usize,
    pub level: Option<usize>,
    pub name: String,
}

pub fn design_columns(features: &[FeatureMeta], coding: Coding) -> Vec<DesignColumn> {
    let mut cols = Vec::new();
    for (j, f) in features.iter().enumerate() {
        match &f.kind {
            FeatureKind::Continuous => cols.push(DesignColumn { feature: j, level: None, name: f.name.clone() }),
            FeatureKind::Categorical { levels } => {
                let first = match coding {
                    Coding::Reference => 1,
                    Coding::Full => 0,
                };
                for (l, level) in levels.iter().enumerate().skip(first) {
                    cols.push(DesignColumn { feature: j, level: Some(l), name: format!("{}={}", f.name, level) });
                }
            }
        }
    }
    cols
}

pub fn design_matrix<F: Float>(ds: &Dataset<F>, coding: Coding) -> (Array2<F>, Vec<DesignColumn>) {
    let cols = design_columns(ds.features(), coding);
    let x = ds.x();
    let m = Array2::from_shape_fn((ds.n_rows(), cols.len()), |(i, c)| {
        let col = &cols[c];
        let v = x[[i, col.feature]];
        match col.level {
            None => v,
            Some(l) if v == F::from_usize_lossy(l) => F::one(),
            Some(_) => F::zero(),
        }
    });
    (m, cols)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn reference_and_full_coding() {
        let feats = vec![FeatureMeta::continuous("age"), FeatureMeta::categorical("anc", &["a", "b", "c"])];
        let x = array![[1.5_f64, 0.0], [2.5, 2.0], [0.5, 1.0]];
        let ds = Dataset::new(x, vec![true, false, true], vec!["g".into(); 3], feats).unwrap();
        let (r, rc) = design_matrix(&ds, Coding::Reference);
        assert_eq!(rc.iter().map(|c| c.name.as_str()).collect::<Vec<_>>(), ["age", "anc=b", "anc=c"]);
        assert_eq!(r, array![[1.5, 0.0, 0.0], [2.5, 0.0, 1.0], [0.5, 1.0, 0.0]]);
        let (f, fc) = design_matrix(&ds, Coding::Full);
        assert_eq!(fc.len(), 4);
        assert_eq!(f.row(1).to_vec(), vec![2.5, 0.0, 0.0, 1.0]);
    }
}
