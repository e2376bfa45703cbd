use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::ModelSpec;
use crate::scalar::Scalar;

/// A finite realisation `X_1..X_n` with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries<T = f64> {
    values: Vec<T>,
    /// Model that generated the series, if simulated.
    pub spec: Option<ModelSpec>,
    pub seed: Option<u64>,
    pub burn_in: usize,
}

impl<T: Scalar> TimeSeries<T> {
    /// Wrap observed values. Requires `n >= 2` and finite entries.
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::SeriesTooShort(values.len()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self {
            values,
            spec: None,
            seed: None,
            burn_in: 0,
        })
    }

    pub fn with_provenance(mut self, spec: ModelSpec, seed: u64, burn_in: usize) -> Self {
        self.spec = Some(spec);
        self.seed = Some(seed);
        self.burn_in = burn_in;
        self
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always false: a valid series has at least two values.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> T {
        crate::scalar::compensated_sum(self.values.iter().copied()) / T::of_usize(self.len())
    }

    /// Copy with the sample mean removed.
    pub fn demeaned(&self) -> Self {
        let m = self.mean();
        Self {
            values: self.values.iter().map(|&v| v - m).collect(),
            spec: self.spec.clone(),
            seed: self.seed,
            burn_in: self.burn_in,
        }
    }

    /// Convert to another scalar type.
    pub fn cast<U: Scalar>(&self) -> TimeSeries<U> {
        TimeSeries {
            values: self.values.iter().map(|v| U::of(v.to_f64_lossy())).collect(),
            spec: self.spec.clone(),
            seed: self.seed,
            burn_in: self.burn_in,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_short_and_non_finite() {
        assert_eq!(TimeSeries::new(vec![1.0]), Err(Error::SeriesTooShort(1)));
        assert_eq!(
            TimeSeries::new(vec![1.0, f64::NAN, 2.0]),
            Err(Error::NonFinite(1))
        );
    }

    #[test]
    fn demeaned_has_zero_mean() {
        let s = TimeSeries::<f64>::new(vec![1.0, 2.0, 6.0]).unwrap().demeaned();
        assert!(s.mean().abs() < 1e-15);
    }
}
