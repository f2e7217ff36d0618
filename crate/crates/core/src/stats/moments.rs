use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sample moments as reported in before/after tables.
///
/// Variance is unbiased (divisor `n - 1`); skewness and kurtosis are the
/// standardised central moments `m3 / m2^1.5` and `m4 / m2^2` with divisor
/// `n`. Kurtosis is raw, so a normal sample sits near 3.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSummary {
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub kurtosis: f64,
    pub min: f64,
    pub max: f64,
}

/// Mean and unbiased variance; needs two observations.
pub fn mean_and_variance(sample: &[f64]) -> Result<(f64, f64)> {
    let n = sample.len();
    if n < 2 {
        return Err(Error::InsufficientSample { needed: 2, got: n });
    }
    let mean = sample.iter().sum::<f64>() / n as f64;
    let ss: f64 = sample.iter().map(|x| (x - mean).powi(2)).sum();
    Ok((mean, ss / (n - 1) as f64))
}

pub fn moments(sample: &[f64]) -> Result<MomentSummary> {
    let n = sample.len();
    if n < 4 {
        return Err(Error::InsufficientSample { needed: 4, got: n });
    }
    if sample.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("sample contains non-finite values"));
    }
    let first = sample[0];
    if sample.iter().all(|&x| x == first) {
        return Err(Error::DegenerateSample);
    }
    let nf = n as f64;
    let mean = sample.iter().sum::<f64>() / nf;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
    for &x in sample {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
        min = min.min(x);
        max = max.max(x);
    }
    if m2 == 0.0 {
        return Err(Error::DegenerateSample);
    }
    let variance = m2 / (nf - 1.0);
    m2 /= nf;
    m3 /= nf;
    m4 /= nf;
    Ok(MomentSummary {
        n,
        mean,
        variance,
        skewness: m3 / m2.powf(1.5),
        kurtosis: m4 / (m2 * m2),
        min,
        max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn constant_sample_is_degenerate() {
        assert!(matches!(moments(&[1.0; 4]), Err(Error::DegenerateSample)));
    }

    #[test]
    fn short_sample_rejected() {
        assert!(matches!(
            moments(&[1.0, 2.0, 3.0]),
            Err(Error::InsufficientSample { needed: 4, got: 3 })
        ));
        assert!(mean_and_variance(&[1.0]).is_err());
    }

    #[test]
    fn two_point_symmetric() {
        let s: Vec<f64> = (0..100)
            .map(|i| if i % 2 == 0 { -1.0 } else { 1.0 })
            .collect();
        let m = moments(&s).unwrap();
        assert_eq!(m.n, 100);
        assert_eq!(m.mean, 0.0);
        assert_eq!(m.skewness, 0.0);
        assert_relative_eq!(m.kurtosis, 1.0, epsilon = 1e-12);
        assert_relative_eq!(m.variance, 100.0 / 99.0, epsilon = 1e-12);
        assert_eq!((m.min, m.max), (-1.0, 1.0));
    }

    #[test]
    fn hand_computed_small_sample() {
        // [1, 2, 3, 10]: mean 4, deviations -3 -2 -1 6
        let m = moments(&[1.0, 2.0, 3.0, 10.0]).unwrap();
        let m2 = (9.0 + 4.0 + 1.0 + 36.0) / 4.0;
        let m3 = (-27.0 - 8.0 - 1.0 + 216.0) / 4.0;
        let m4 = (81.0 + 16.0 + 1.0 + 1296.0) / 4.0;
        assert_relative_eq!(m.mean, 4.0);
        assert_relative_eq!(m.variance, 50.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(m.skewness, m3 / f64::powf(m2, 1.5), epsilon = 1e-12);
        assert_relative_eq!(m.kurtosis, m4 / (m2 * m2), epsilon = 1e-12);
    }
}
