//! Descriptive moments, the hypothesis tests and Table-style aggregation of
//! simulated batches.

mod cvm;
mod hypothesis;
mod moments;
mod report;

pub use cvm::{cramer_von_mises_2s, cvm_statistic, CvmPermutation};
pub use hypothesis::{jarque_bera, mean_difference_test, variance_ratio_test, TestResult};
pub use moments::{mean_and_variance, moments, MomentSummary};
pub use report::{
    aggregate, pooled_tests, CvmCounts, JbCounts, NotApplicable, PooledTests, StatReport,
    CSV_HEADER,
};

/// Default number of permutations for the Cramér–von Mises test.
pub const DEFAULT_PERMUTATIONS: usize = 999;
