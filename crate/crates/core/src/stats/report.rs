//! Per-batch aggregation: moment-shift counts, average percentage changes and
//! test non-rejection counts, one row per simulated setup.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cvm::CvmPermutation;
use super::hypothesis::{jarque_bera, TestResult};
use super::moments::{mean_and_variance, moments};
use crate::error::Result;
use crate::montecarlo::{derive_seed, Batch, RunParts, RunSamples};

/// Column order of the CSV report.
pub const CSV_HEADER: [&str; 15] = [
    "setup",
    "mean_up",
    "var_up",
    "var_delta_pct",
    "skew_up",
    "kurt_down",
    "kurt_delta_pct",
    "cvm_B-b",
    "cvm_b-a",
    "cvm_a-A",
    "cvm_A-B",
    "jb_B",
    "jb_b",
    "jb_a",
    "jb_A",
];

/// Cramér–von Mises non-rejection counts per sample pair.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CvmCounts {
    #[serde(rename = "B-b")]
    pub before_vs_before_short: usize,
    #[serde(rename = "b-a")]
    pub before_short_vs_after_short: usize,
    #[serde(rename = "a-A")]
    pub after_short_vs_after: usize,
    #[serde(rename = "A-B")]
    pub after_vs_before: usize,
}

impl CvmCounts {
    pub fn as_array(&self) -> [usize; 4] {
        [
            self.before_vs_before_short,
            self.before_short_vs_after_short,
            self.after_short_vs_after,
            self.after_vs_before,
        ]
    }

    fn from_array(a: [usize; 4]) -> Self {
        CvmCounts {
            before_vs_before_short: a[0],
            before_short_vs_after_short: a[1],
            after_short_vs_after: a[2],
            after_vs_before: a[3],
        }
    }
}

/// Jarque–Bera non-rejection counts per sample.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct JbCounts {
    #[serde(rename = "B")]
    pub before: usize,
    #[serde(rename = "b")]
    pub before_short: usize,
    #[serde(rename = "a")]
    pub after_short: usize,
    #[serde(rename = "A")]
    pub after: usize,
}

impl JbCounts {
    pub fn as_array(&self) -> [usize; 4] {
        [self.before, self.before_short, self.after_short, self.after]
    }

    fn from_array(a: [usize; 4]) -> Self {
        JbCounts {
            before: a[0],
            before_short: a[1],
            after_short: a[2],
            after: a[3],
        }
    }
}

/// Runs left out of each count because the statistic was undefined
/// (zero variance, too few points).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NotApplicable {
    pub mean: usize,
    pub variance: usize,
    pub skewness: usize,
    pub kurtosis: usize,
    pub var_delta: usize,
    pub kurt_delta: usize,
    pub cvm: [usize; 4],
    pub jb: [usize; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatReport {
    pub setup: String,
    pub n_runs: usize,
    pub mean_up: usize,
    pub var_up: usize,
    /// Average over runs of `100 (A - B) / |B|` for the variance.
    pub var_delta_pct: Option<f64>,
    pub skew_up: usize,
    pub kurt_down: usize,
    pub kurt_delta_pct: Option<f64>,
    pub cvm: CvmCounts,
    pub jb: JbCounts,
    pub not_applicable: NotApplicable,
}

impl StatReport {
    pub fn with_setup(mut self, setup: impl Into<String>) -> Self {
        self.setup = setup.into();
        self
    }

    fn csv_record(&self) -> Vec<String> {
        let pct = |v: Option<f64>| v.map(|x| format!("{x:.1}")).unwrap_or_else(|| "NA".into());
        let mut rec = vec![
            self.setup.clone(),
            self.mean_up.to_string(),
            self.var_up.to_string(),
            pct(self.var_delta_pct),
            self.skew_up.to_string(),
            self.kurt_down.to_string(),
            pct(self.kurt_delta_pct),
        ];
        rec.extend(self.cvm.as_array().iter().map(|c| c.to_string()));
        rec.extend(self.jb.as_array().iter().map(|c| c.to_string()));
        rec
    }

    pub fn write_csv<W: Write>(rows: &[StatReport], out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        for r in rows {
            w.write_record(r.csv_record())?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Default)]
struct RunStats {
    mean_up: Option<bool>,
    var_up: Option<bool>,
    skew_up: Option<bool>,
    kurt_down: Option<bool>,
    var_delta: Option<f64>,
    kurt_delta: Option<f64>,
    /// `Some(true)` when the test did not reject at 5%.
    cvm: [Option<bool>; 4],
    jb: [Option<bool>; 4],
}

fn pct_change(before: f64, after: f64) -> Option<f64> {
    let d = 100.0 * (after - before) / before.abs();
    (before != 0.0 && d.is_finite()).then_some(d)
}

fn run_stats(parts: &RunParts, n_perm: usize, seed: u64) -> RunStats {
    let mut s = RunStats::default();
    if let (Ok((mb, vb)), Ok((ma, va))) = (
        mean_and_variance(&parts.before),
        mean_and_variance(&parts.after),
    ) {
        s.mean_up = Some(ma > mb);
        s.var_up = Some(va > vb);
        s.var_delta = pct_change(vb, va);
    }
    if let (Ok(b), Ok(a)) = (moments(&parts.before), moments(&parts.after)) {
        s.skew_up = Some(a.skewness > b.skewness);
        s.kurt_down = Some(a.kurtosis < b.kurtosis);
        s.kurt_delta = pct_change(b.kurtosis, a.kurtosis);
    }
    let pairs: [(&[f64], &[f64]); 4] = [
        (&parts.before, &parts.before_short),
        (&parts.before_short, &parts.after_short),
        (&parts.after_short, &parts.after),
        (&parts.after, &parts.before),
    ];
    for (k, (x, y)) in pairs.into_iter().enumerate() {
        s.cvm[k] = CvmPermutation::new(x, y)
            .ok()
            .filter(|_| x.iter().chain(y).any(|v| *v != x[0]))
            .map(|p| p.p_value(n_perm, derive_seed(seed, k as u64)) >= 0.05);
    }
    let samples = [
        &parts.before,
        &parts.before_short,
        &parts.after_short,
        &parts.after,
    ];
    for (k, x) in samples.into_iter().enumerate() {
        s.jb[k] = jarque_bera(x).ok().map(|r| !r.rejected_at_5pct);
    }
    s
}

/// Aggregate a batch. Run `i` seeds its permutation tests from
/// `derive_seed(perm_seed, i)`; evaluation is parallel and the reduction
/// follows run order, so the report is reproducible bit for bit.
///
/// Tests on a constant pair of samples are not applicable and are left out
/// of the counts, as are undefined moment comparisons.
pub fn aggregate(batch: &Batch, n_perm: usize, perm_seed: u64) -> Result<StatReport> {
    if n_perm < 99 {
        return Err(crate::error::Error::InvalidConfig(format!(
            "n_perm must be >= 99, got {n_perm}"
        )));
    }
    let per_run: Vec<RunStats> = batch
        .runs
        .par_iter()
        .enumerate()
        .map(|(i, r)| run_stats(&r.parts, n_perm, derive_seed(perm_seed, i as u64)))
        .collect();

    let mut na = NotApplicable::default();
    let count = |f: &dyn Fn(&RunStats) -> Option<bool>, missing: &mut usize| {
        per_run
            .iter()
            .filter(|r| match f(r) {
                Some(v) => v,
                None => {
                    *missing += 1;
                    false
                }
            })
            .count()
    };
    let mean_up = count(&|r| r.mean_up, &mut na.mean);
    let var_up = count(&|r| r.var_up, &mut na.variance);
    let skew_up = count(&|r| r.skew_up, &mut na.skewness);
    let kurt_down = count(&|r| r.kurt_down, &mut na.kurtosis);
    let mut cvm = [0usize; 4];
    let mut jb = [0usize; 4];
    for k in 0..4 {
        cvm[k] = count(&|r| r.cvm[k], &mut na.cvm[k]);
        jb[k] = count(&|r| r.jb[k], &mut na.jb[k]);
    }
    let average = |f: &dyn Fn(&RunStats) -> Option<f64>, missing: &mut usize| {
        let vals: Vec<f64> = per_run.iter().filter_map(f).collect();
        *missing = per_run.len() - vals.len();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    };
    let var_delta_pct = average(&|r| r.var_delta, &mut na.var_delta);
    let kurt_delta_pct = average(&|r| r.kurt_delta, &mut na.kurt_delta);

    Ok(StatReport {
        setup: String::new(),
        n_runs: batch.runs.len(),
        mean_up,
        var_up,
        var_delta_pct,
        skew_up,
        kurt_down,
        kurt_delta_pct,
        cvm: CvmCounts::from_array(cvm),
        jb: JbCounts::from_array(jb),
        not_applicable: na,
    })
}

/// Tests run once on the pooled samples instead of per run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PooledTests {
    /// B-b, b-a, a-A, A-B.
    pub cvm: [Option<TestResult>; 4],
    /// B, b, a, A.
    pub jb: [Option<TestResult>; 4],
}

pub fn pooled_tests(samples: &RunSamples, n_perm: usize, perm_seed: u64) -> PooledTests {
    let pairs: [(&[f64], &[f64]); 4] = [
        (&samples.before, &samples.before_short),
        (&samples.before_short, &samples.after_short),
        (&samples.after_short, &samples.after),
        (&samples.after, &samples.before),
    ];
    let cvm = pairs
        .map(|(x, y)| (x, y))
        .each_ref()
        .map(|&(x, y)| super::cvm::cramer_von_mises_2s(x, y, n_perm, perm_seed).ok());
    let jb = [
        &samples.before,
        &samples.before_short,
        &samples.after_short,
        &samples.after,
    ]
    .map(|x| jarque_bera(x).ok());
    PooledTests { cvm, jb }
}
