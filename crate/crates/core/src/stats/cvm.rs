//! Two-sample Cramér–von Mises test with a seeded permutation p-value.
//!
//! `T = N M / (N + M)^2 * sum_z (F_x(z) - F_y(z))^2` over every point `z` of
//! the pooled sample. With counts `cx`, `cy` of each sample at or below `z`
//! the summand is `(cx M - cy N)^2 / (N M)^2`, so the sum
//! `S = sum_z (cx M - cy N)^2` is an integer and `T = S / (N M (N + M)^2)`.
//! Permutations are compared on `S`, which keeps `T_perm >= T_obs` exact.
//!
//! Tied values are evaluated once per distinct value (both ECDFs include
//! every tied point) and weighted by the tie multiplicity.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::hypothesis::TestResult;
use crate::error::{Error, Result};

/// Sorted pooled sample reduced to group labels and tie blocks, reusable
/// across permutations.
#[derive(Debug, Clone)]
pub struct CvmPermutation {
    /// `true` where the sorted pooled point came from `x`.
    labels: Vec<bool>,
    /// Exclusive end index of each block of tied values.
    block_ends: Vec<usize>,
    n: u64,
    m: u64,
}

impl CvmPermutation {
    pub fn new(x: &[f64], y: &[f64]) -> Result<Self> {
        for len in [x.len(), y.len()] {
            match len {
                0 => return Err(Error::Empty),
                1 => return Err(Error::InsufficientSample { needed: 2, got: 1 }),
                _ => {}
            }
        }
        if x.iter().chain(y).any(|v| v.is_nan()) {
            return Err(Error::Domain("NaN in Cramér–von Mises input"));
        }
        let mut pooled: Vec<(f64, bool)> = x
            .iter()
            .map(|&v| (v, true))
            .chain(y.iter().map(|&v| (v, false)))
            .collect();
        pooled.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut block_ends = Vec::with_capacity(pooled.len());
        for i in 1..pooled.len() {
            if pooled[i].0 != pooled[i - 1].0 {
                block_ends.push(i);
            }
        }
        block_ends.push(pooled.len());
        Ok(CvmPermutation {
            labels: pooled.into_iter().map(|(_, l)| l).collect(),
            block_ends,
            n: x.len() as u64,
            m: y.len() as u64,
        })
    }

    fn sum_sq(&self, labels: &[bool]) -> u128 {
        let (n, m) = (self.n as i128, self.m as i128);
        let (mut cx, mut cy) = (0i128, 0i128);
        let mut start = 0usize;
        let mut sum: u128 = 0;
        for &end in &self.block_ends {
            for &l in &labels[start..end] {
                if l {
                    cx += 1;
                } else {
                    cy += 1;
                }
            }
            let d = cx * m - cy * n;
            sum += (end - start) as u128 * (d * d) as u128;
            start = end;
        }
        sum
    }

    fn scale(&self) -> f64 {
        let total = (self.n + self.m) as f64;
        (self.n as f64) * (self.m as f64) * total * total
    }

    pub fn statistic(&self) -> f64 {
        self.sum_sq(&self.labels) as f64 / self.scale()
    }

    /// `(1 + #{S_perm >= S_obs}) / (n_perm + 1)` over `n_perm` shuffles.
    pub fn p_value(&self, n_perm: usize, seed: u64) -> f64 {
        let observed = self.sum_sq(&self.labels);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut work = self.labels.clone();
        let mut hits = 0usize;
        for _ in 0..n_perm {
            work.shuffle(&mut rng);
            if self.sum_sq(&work) >= observed {
                hits += 1;
            }
        }
        (1 + hits) as f64 / (n_perm + 1) as f64
    }
}

pub fn cvm_statistic(x: &[f64], y: &[f64]) -> Result<f64> {
    Ok(CvmPermutation::new(x, y)?.statistic())
}

/// Permutation Cramér–von Mises test; `n_perm` must be at least 99.
pub fn cramer_von_mises_2s(x: &[f64], y: &[f64], n_perm: usize, seed: u64) -> Result<TestResult> {
    if n_perm < 99 {
        return Err(Error::InvalidConfig(format!(
            "n_perm must be >= 99, got {n_perm}"
        )));
    }
    let prepared = CvmPermutation::new(x, y)?;
    Ok(TestResult::new(
        prepared.statistic(),
        prepared.p_value(n_perm, seed),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn identical_samples_have_zero_statistic() {
        let x = [0.3, -1.0, 2.0, 0.5, 0.5];
        let r = cramer_von_mises_2s(&x, &x, 999, 1).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn disjoint_supports_reach_minimum_p() {
        let x: Vec<f64> = (0..1000).map(|i| i as f64 * 1e-3).collect();
        let y: Vec<f64> = (0..1000).map(|i| 100.0 + i as f64 * 1e-3).collect();
        let r = cramer_von_mises_2s(&x, &y, 999, 3).unwrap();
        assert_eq!(r.p_value, 1.0 / 1000.0);
        assert!(r.rejected_at_5pct);
    }

    #[test]
    fn statistic_matches_direct_ecdf_sum() {
        let x = [1.0, 3.0, 5.0];
        let y = [2.0, 4.0, 6.0, 8.0];
        // Pooled order 1 2 3 4 5 6 8: (F_x - F_y) =
        // 1/3, 1/3-1/4, 2/3-1/4, 2/3-2/4, 1-2/4, 1-3/4, 0
        let diffs = [1.0 / 3.0, 1.0 / 12.0, 5.0 / 12.0, 1.0 / 6.0, 0.5, 0.25, 0.0];
        let expect = 12.0 / 49.0 * diffs.iter().map(|d: &f64| d * d).sum::<f64>();
        assert_relative_eq!(cvm_statistic(&x, &y).unwrap(), expect, epsilon = 1e-14);
    }

    #[test]
    fn input_errors() {
        assert!(matches!(cvm_statistic(&[], &[1.0, 2.0]), Err(Error::Empty)));
        assert!(cvm_statistic(&[1.0], &[1.0, 2.0]).is_err());
        assert!(cvm_statistic(&[f64::NAN, 1.0], &[1.0, 2.0]).is_err());
        assert!(cramer_von_mises_2s(&[1.0, 2.0], &[3.0, 4.0], 50, 0).is_err());
    }

    #[test]
    fn ties_weighted_by_multiplicity() {
        let x = [1.0, 1.0, 2.0];
        let y = [1.0, 2.0, 2.0];
        // distinct 1: cx=2, cy=1 -> d = 2*3 - 1*3 = 3, weight 3
        // distinct 2: cx=3, cy=3 -> 0
        let expect = 3.0 * 9.0 / (3.0 * 3.0 * 36.0);
        assert_relative_eq!(cvm_statistic(&x, &y).unwrap(), expect, epsilon = 1e-15);
    }
}
