use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::{Error, Float, Result};

/// Per-column centering and population-sd scaling. Untouched columns carry
/// mean 0 and scale 1, so the record always spans every column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct StandardizationRecord<F: Float> {
    pub mean: Vec<F>,
    pub scale: Vec<F>,
}

impl<F: Float> StandardizationRecord<F> {
    pub fn identity(p: usize) -> Self {
        Self { mean: vec![F::zero(); p], scale: vec![F::one(); p] }
    }

    pub fn n_columns(&self) -> usize {
        self.mean.len()
    }

    pub fn apply(&self, x: ArrayView2<F>) -> Result<Array2<F>> {
        self.check(x.ncols())?;
        let mut out = x.to_owned();
        for (j, mut col) in out.axis_iter_mut(Axis(1)).enumerate() {
            let (m, s) = (self.mean[j], self.scale[j]);
            col.mapv_inplace(|v| (v - m) / s);
        }
        Ok(out)
    }

    pub fn invert(&self, z: ArrayView2<F>) -> Result<Array2<F>> {
        self.check(z.ncols())?;
        let mut out = z.to_owned();
        for (j, mut col) in out.axis_iter_mut(Axis(1)).enumerate() {
            let (m, s) = (self.mean[j], self.scale[j]);
            col.mapv_inplace(|v| v * s + m);
        }
        Ok(out)
    }

    /// Coefficients fit on standardized columns, re-expressed on the raw scale.
    pub fn to_raw_coefficients(&self, intercept: F, beta: ArrayView1<F>) -> Result<(F, Array1<F>)> {
        self.check(beta.len())?;
        let raw: Array1<F> = beta.iter().zip(&self.scale).map(|(&b, &s)| b / s).collect();
        let shift = raw.iter().zip(&self.mean).fold(F::zero(), |acc, (&b, &m)| acc + b * m);
        Ok((intercept - shift, raw))
    }

    /// Inverse of [`Self::to_raw_coefficients`].
    pub fn to_standardized_coefficients(&self, intercept: F, raw: ArrayView1<F>) -> Result<(F, Array1<F>)> {
        self.check(raw.len())?;
        let shift = raw.iter().zip(&self.mean).fold(F::zero(), |acc, (&b, &m)| acc + b * m);
        let beta = raw.iter().zip(&self.scale).map(|(&b, &s)| b * s).collect();
        Ok((intercept + shift, beta))
    }

    fn check(&self, p: usize) -> Result<()> {
        if p != self.n_columns() {
            return Err(Error::DimensionMismatch(format!(
                "standardization record has {} columns, got {p}",
                self.n_columns()
            )));
        }
        Ok(())
    }
}

/// Centers and scales the selected columns to mean 0 and population sd 1.
///
/// `names` labels columns in the error for a constant column.
pub fn standardize<F: Float>(
    x: ArrayView2<F>,
    columns: &[usize],
    names: &[String],
) -> Result<(Array2<F>, StandardizationRecord<F>)> {
    let p = x.ncols();
    let n = F::from_usize_lossy(x.nrows());
    let mut record = StandardizationRecord::identity(p);
    for &j in columns {
        if j >= p {
            return Err(Error::DimensionMismatch(format!("column {j} out of range for {p} columns")));
        }
        let col = x.column(j);
        let mean = col.sum() / n;
        let var = col.fold(F::zero(), |acc, &v| acc + (v - mean) * (v - mean)) / n;
        let sd = var.sqrt();
        if !(sd > F::epsilon() * (F::one() + mean.abs())) {
            let name = names.get(j).cloned().unwrap_or_else(|| format!("column {j}"));
            return Err(Error::ZeroVarianceColumn(name));
        }
        record.mean[j] = mean;
        record.scale[j] = sd;
    }
    let z = record.apply(x)?;
    Ok((z, record))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::{array, Array2};
    use proptest::prelude::*;

    fn names(p: usize) -> Vec<String> {
        (0..p).map(|j| format!("c{j}")).collect()
    }

    #[test]
    fn one_two_three() {
        let x = array![[1.0_f64], [2.0], [3.0]];
        let (z, rec) = standardize(x.view(), &[0], &names(1)).unwrap();
        let k = 1.5_f64.sqrt();
        assert_abs_diff_eq!(z[[0, 0]], -k, epsilon = 1e-12);
        assert_abs_diff_eq!(z[[1, 0]], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(z[[2, 0]], k, epsilon = 1e-12);
        assert_abs_diff_eq!(rec.scale[0], (2.0_f64 / 3.0).sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn idempotent_on_standardized_column() {
        let x = array![[1.0_f64], [2.0], [3.0], [7.0]];
        let (z, _) = standardize(x.view(), &[0], &names(1)).unwrap();
        let (z2, _) = standardize(z.view(), &[0], &names(1)).unwrap();
        for (a, b) in z.iter().zip(z2.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn constant_column_is_rejected() {
        let x = array![[5.0_f64, 1.0], [5.0, 2.0], [5.0, 3.0]];
        let err = standardize(x.view(), &[0, 1], &names(2)).unwrap_err();
        assert!(matches!(err, Error::ZeroVarianceColumn(n) if n == "c0"));
    }

    #[test]
    fn unselected_columns_untouched() {
        let x = array![[5.0_f64, 1.0], [5.0, 2.0], [5.0, 4.0]];
        let (z, rec) = standardize(x.view(), &[1], &names(2)).unwrap();
        assert_eq!(z.column(0), x.column(0));
        assert_eq!(rec.mean[0], 0.0);
        assert_eq!(rec.scale[0], 1.0);
    }

    #[test]
    fn single_precision_works() {
        let x = array![[1.0_f32], [2.0], [3.0]];
        let (z, _) = standardize(x.view(), &[0], &names(1)).unwrap();
        assert!((z[[2, 0]] - 1.224_745).abs() < 1e-5);
    }

    proptest! {
        #[test]
        fn moments_and_round_trip(
            vals in proptest::collection::vec(-50.0_f64..50.0, 6..40),
            b in proptest::collection::vec(-3.0_f64..3.0, 2),
            b0 in -2.0_f64..2.0,
        ) {
            let n = vals.len() / 2;
            let x = Array2::from_shape_fn((n, 2), |(i, j)| vals[2 * i + j] + (i * (j + 1)) as f64);
            let (z, rec) = standardize(x.view(), &[0, 1], &names(2)).unwrap();
            for j in 0..2 {
                let col = z.column(j);
                let mean = col.sum() / n as f64;
                let sd = (col.fold(0.0, |a, v| a + (v - mean) * (v - mean)) / n as f64).sqrt();
                prop_assert!(mean.abs() < 1e-10);
                prop_assert!((sd - 1.0).abs() < 1e-10);
            }
            let back = rec.invert(z.view()).unwrap();
            for (a, c) in back.iter().zip(x.iter()) {
                prop_assert!((a - c).abs() <= 1e-12 * (1.0 + c.abs()));
            }
            let beta = Array1::from(b);
            let (r0, raw) = rec.to_raw_coefficients(b0, beta.view()).unwrap();
            let (s0, std_beta) = rec.to_standardized_coefficients(r0, raw.view()).unwrap();
            prop_assert!((s0 - b0).abs() < 1e-12 * (1.0 + r0.abs()));
            for (a, c) in std_beta.iter().zip(beta.iter()) {
                prop_assert!((a - c).abs() < 1e-12);
            }
            // Linear predictors agree on both scales.
            for i in 0..n {
                let on_std = b0 + z[[i, 0]] * beta[0] + z[[i, 1]] * beta[1];
                let on_raw = r0 + x[[i, 0]] * raw[0] + x[[i, 1]] * raw[1];
                prop_assert!((on_std - on_raw).abs() < 1e-9 * (1.0 + on_raw.abs()));
            }
        }
    }
}
