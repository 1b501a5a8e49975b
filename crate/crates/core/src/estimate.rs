use crate::special::sqrt;

/// Mean and standard error of a Monte Carlo average.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct PoolEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub sample_count: usize,
    /// Generation `n` (hierarchical) or system size `N` (renewal).
    pub generation: usize,
    pub estimator: &'static str,
}

impl PoolEstimate {
    /// Sample mean with the unbiased standard error. Needs two samples.
    pub fn from_samples(values: &[f64], generation: usize, estimator: &'static str) -> Self {
        assert!(values.len() >= 2, "a pool estimate needs at least two samples");
        let count = values.len() as f64;
        let mean = values.iter().sum::<f64>() / count;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (count - 1.0);
        PoolEstimate {
            mean,
            std_error: sqrt(var / count),
            sample_count: values.len(),
            generation,
            estimator,
        }
    }

    /// A value known without sampling error.
    pub fn exact(value: f64, generation: usize, estimator: &'static str) -> Self {
        PoolEstimate {
            mean: value,
            std_error: 0.0,
            sample_count: 2,
            generation,
            estimator,
        }
    }

    pub fn upper(&self, sigmas: f64) -> f64 {
        self.mean + sigmas * self.std_error
    }

    pub fn lower(&self, sigmas: f64) -> f64 {
        self.mean - sigmas * self.std_error
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_error() {
        let e = PoolEstimate::from_samples(&[1.0, 2.0, 3.0, 4.0], 3, "test");
        assert_eq!(e.mean, 2.5);
        assert!((e.std_error - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
        assert_eq!(e.sample_count, 4);
        assert_eq!(PoolEstimate::exact(1.0, 0, "x").std_error, 0.0);
    }
}
