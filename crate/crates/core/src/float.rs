use ndarray::NdFloat;
use num_traits::FromPrimitive;
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Scalar type the solvers and statistics are generic over.
pub trait Float: NdFloat + FromPrimitive + Default + Serialize + DeserializeOwned {
    /// Smallest probability handed to logs and IRLS weights.
    const PROB_CLAMP: f64;

    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal out of range")
    }

    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("count out of range")
    }

    fn to_f64_lossy(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Float for f64 {
    const PROB_CLAMP: f64 = 1e-9;
}

impl Float for f32 {
    // 1 - 1e-9 rounds to 1 in single precision.
    const PROB_CLAMP: f64 = 1e-6;
}
