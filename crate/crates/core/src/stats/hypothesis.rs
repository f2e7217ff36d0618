use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, FisherSnedecor, StudentsT};

use super::moments::{mean_and_variance, moments};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub rejected_at_5pct: bool,
}

impl TestResult {
    pub fn new(statistic: f64, p_value: f64) -> Self {
        let p_value = p_value.clamp(0.0, 1.0);
        TestResult {
            statistic,
            p_value,
            rejected_at_5pct: p_value < 0.05,
        }
    }

    /// Significance stars at the 10/5/1% levels.
    pub fn stars(&self) -> &'static str {
        match self.p_value {
            p if p < 0.01 => "***",
            p if p < 0.05 => "**",
            p if p < 0.10 => "*",
            _ => "",
        }
    }
}

/// Jarque–Bera normality test, `n/6 (S^2 + (K-3)^2/4)` against chi-square(2).
pub fn jarque_bera(sample: &[f64]) -> Result<TestResult> {
    if sample.len() < 8 {
        return Err(Error::InsufficientSample {
            needed: 8,
            got: sample.len(),
        });
    }
    let m = moments(sample)?;
    let excess = m.kurtosis - 3.0;
    let jb = m.n as f64 / 6.0 * (m.skewness * m.skewness + excess * excess / 4.0);
    // chi-square with 2 degrees of freedom has survival exp(-x/2)
    Ok(TestResult::new(jb, (-jb / 2.0).exp()))
}

/// Welch two-sample t-test for equal means, two-sided.
pub fn mean_difference_test(x: &[f64], y: &[f64]) -> Result<TestResult> {
    let (mx, vx) = mean_and_variance(x)?;
    let (my, vy) = mean_and_variance(y)?;
    let (nx, ny) = (x.len() as f64, y.len() as f64);
    let (sx, sy) = (vx / nx, vy / ny);
    let se2 = sx + sy;
    if se2 == 0.0 {
        return Ok(if mx == my {
            TestResult::new(0.0, 1.0)
        } else {
            TestResult::new((mx - my).signum() * f64::INFINITY, 0.0)
        });
    }
    let t = (mx - my) / se2.sqrt();
    let df = se2 * se2 / (sx * sx / (nx - 1.0) + sy * sy / (ny - 1.0));
    let dist = StudentsT::new(0.0, 1.0, df)
        .map_err(|_| Error::Domain("invalid Welch degrees of freedom"))?;
    Ok(TestResult::new(t, 2.0 * dist.sf(t.abs())))
}

/// Two-sided F test of `var(x) / var(y)`.
pub fn variance_ratio_test(x: &[f64], y: &[f64]) -> Result<TestResult> {
    let (_, vx) = mean_and_variance(x)?;
    let (_, vy) = mean_and_variance(y)?;
    if vx == 0.0 || vy == 0.0 {
        return Err(Error::DegenerateSample);
    }
    let f = vx / vy;
    let dist = FisherSnedecor::new((x.len() - 1) as f64, (y.len() - 1) as f64)
        .map_err(|_| Error::Domain("invalid F degrees of freedom"))?;
    let p = 2.0 * dist.cdf(f).min(dist.sf(f));
    Ok(TestResult::new(f, p.min(1.0)))
}
