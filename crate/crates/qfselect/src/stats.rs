//! Statistical comparison of run results.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Pooled-variance two-sample t-test result.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TTestOutcome {
    pub t_statistic: f64,
    /// Two-tailed p-value.
    pub p_value: f64,
    /// `n_a + n_b - 2`.
    pub df: usize,
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Unbiased sample variance.
pub fn sample_variance(values: &[f64]) -> f64 {
    let m = mean(values);
    values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (values.len() - 1) as f64
}

/// Two-tailed pooled-variance two-sample t-test.
///
/// Both samples need at least two values. When the pooled variance is zero
/// the statistic is undefined: equal means report `t = 0, p = 1`, unequal
/// means report an infinite statistic with `p = 0`.
pub fn two_sample_t_test(a: &[f64], b: &[f64]) -> Result<TTestOutcome> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::Stats(format!(
            "both samples need at least 2 values, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let (n_a, n_b) = (a.len() as f64, b.len() as f64);
    let df = a.len() + b.len() - 2;
    let difference = mean(a) - mean(b);
    let pooled_variance =
        ((n_a - 1.0) * sample_variance(a) + (n_b - 1.0) * sample_variance(b)) / df as f64;

    if pooled_variance == 0.0 {
        return Ok(if difference == 0.0 {
            TTestOutcome {
                t_statistic: 0.0,
                p_value: 1.0,
                df,
            }
        } else {
            TTestOutcome {
                t_statistic: difference.signum() * f64::INFINITY,
                p_value: 0.0,
                df,
            }
        });
    }

    let t_statistic = difference / (pooled_variance * (1.0 / n_a + 1.0 / n_b)).sqrt();
    let distribution = StudentsT::new(0.0, 1.0, df as f64)
        .map_err(|e| Error::Stats(format!("t distribution with df {df}: {e}")))?;
    let p_value = 2.0 * distribution.cdf(-t_statistic.abs());
    Ok(TTestOutcome {
        t_statistic,
        p_value,
        df,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples_give_zero_statistic() {
        let a: Vec<f64> = (0..20).map(|i| 0.5 + 0.01 * i as f64).collect();
        let outcome = two_sample_t_test(&a, &a).unwrap();
        assert_eq!(outcome.t_statistic, 0.0);
        assert!((outcome.p_value - 1.0).abs() < 1e-12);
        assert_eq!(outcome.df, 38);
    }

    #[test]
    fn constant_equal_samples_report_unit_p() {
        let a = vec![0.7; 20];
        let outcome = two_sample_t_test(&a, &a).unwrap();
        assert_eq!(outcome.t_statistic, 0.0);
        assert_eq!(outcome.p_value, 1.0);
    }

    #[test]
    fn twenty_versus_twenty_has_38_degrees_of_freedom() {
        let a: Vec<f64> = (0..20).map(|i| i as f64 * 0.01).collect();
        let b: Vec<f64> = (0..20).map(|i| 1.0 - i as f64 * 0.01).collect();
        assert_eq!(two_sample_t_test(&a, &b).unwrap().df, 38);
    }

    #[test]
    fn separated_samples_give_extreme_statistic() {
        // Means 1.0 and 0.0 with sd 0.01 jitter: |t| ~ 316.
        let jitter = |i: usize| if i.is_multiple_of(2) { 0.01 } else { -0.01 };
        let a: Vec<f64> = (0..20).map(|i| 1.0 + jitter(i)).collect();
        let b: Vec<f64> = (0..20).map(|i| 0.0 + jitter(i)).collect();
        let outcome = two_sample_t_test(&a, &b).unwrap();
        // sd is slightly above 0.01 (n-1 denominator); expect ~308.
        assert!(
            (300.0..325.0).contains(&outcome.t_statistic),
            "t = {}",
            outcome.t_statistic
        );
        assert!(outcome.p_value < 1e-30);
    }

    #[test]
    fn rejects_undersized_samples() {
        assert!(two_sample_t_test(&[1.0], &[1.0, 2.0]).is_err());
    }
}
