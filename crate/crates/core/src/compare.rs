//! Match simulated setups against an observed before/after pattern.
//!
//! A pattern is the share of cases in which mean, variance and skewness rose
//! and kurtosis fell, plus the average variance and kurtosis changes. A
//! setup matches a statistic when its majority direction agrees with the
//! target's. Setups are ranked by the number of agreeing directions, then by
//! the L1 distance between shares, then by the distance between the average
//! percentage changes.

use serde::{Deserialize, Serialize};

use crate::empirical::{Direction, EmpiricalSummary, Tally};
use crate::error::{Error, Result};
use crate::stats::StatReport;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pattern {
    pub mean_up: f64,
    pub var_up: f64,
    pub skew_up: f64,
    pub kurt_down: f64,
    pub var_delta_pct: Option<f64>,
    pub kurt_delta_pct: Option<f64>,
}

fn share_up(t: &Tally) -> f64 {
    let k = t.count as f64 / t.of as f64;
    match t.direction {
        Direction::Up => k,
        Direction::Down => 1.0 - k,
        Direction::Flat => 0.5,
    }
}

impl Pattern {
    pub fn from_report(r: &StatReport) -> Result<Self> {
        let share = |count: usize, missing: usize| {
            let n = r.n_runs.saturating_sub(missing);
            if n == 0 {
                Err(Error::Empty)
            } else {
                Ok(count as f64 / n as f64)
            }
        };
        let na = &r.not_applicable;
        Ok(Pattern {
            mean_up: share(r.mean_up, na.mean)?,
            var_up: share(r.var_up, na.variance)?,
            skew_up: share(r.skew_up, na.skewness)?,
            kurt_down: share(r.kurt_down, na.kurtosis)?,
            var_delta_pct: r.var_delta_pct,
            kurt_delta_pct: r.kurt_delta_pct,
        })
    }

    pub fn from_summary(s: &EmpiricalSummary) -> Result<Self> {
        if s.mean.of == 0 {
            return Err(Error::Empty);
        }
        Ok(Pattern {
            mean_up: share_up(&s.mean),
            var_up: share_up(&s.variance),
            skew_up: share_up(&s.skewness),
            kurt_down: 1.0 - share_up(&s.kurtosis),
            var_delta_pct: Some(s.var_delta_pct),
            kurt_delta_pct: Some(s.kurt_delta_pct),
        })
    }

    fn shares(&self) -> [f64; 4] {
        [self.mean_up, self.var_up, self.skew_up, self.kurt_down]
    }

    /// Majority direction per statistic: `Some(true)` for mean/variance/
    /// skewness up and kurtosis down, `None` on an exact tie.
    pub fn directions(&self) -> [Option<bool>; 4] {
        self.shares()
            .map(|s| if s == 0.5 { None } else { Some(s > 0.5) })
    }
}

/// Five DJIA crash events with 20-day windows: mean, variance and skewness
/// rose and kurtosis fell in four of five; variance changed by -31.9, 60.0,
/// 23.4, 153.6 and 335.3% and kurtosis by -48.5, -24.7, -62.0, 36.7 and
/// -8.7%.
pub fn reference_crash_pattern() -> Pattern {
    Pattern {
        mean_up: 0.8,
        var_up: 0.8,
        skew_up: 0.8,
        kurt_down: 0.8,
        var_delta_pct: Some((-31.9 + 60.0 + 23.4 + 153.6 + 335.3) / 5.0),
        kurt_delta_pct: Some((-48.5 - 24.7 - 62.0 + 36.7 - 8.7) / 5.0),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchRow {
    pub setup: String,
    /// Mean, variance, skewness, kurtosis.
    pub agrees: [bool; 4],
    pub n_agree: usize,
    pub full_match: bool,
    pub share_distance: f64,
    /// `|dVar - dVar*| + |dKurt - dKurt*|`; absent when either side lacks it.
    pub delta_distance: Option<f64>,
    pub rank: usize,
}

pub fn match_pattern(setup: &str, sim: &Pattern, target: &Pattern) -> MatchRow {
    let (ds, dt) = (sim.directions(), target.directions());
    let agrees: [bool; 4] = std::array::from_fn(|i| ds[i] == dt[i]);
    let n_agree = agrees.iter().filter(|&&a| a).count();
    let share_distance = sim
        .shares()
        .iter()
        .zip(target.shares())
        .map(|(a, b)| (a - b).abs())
        .sum();
    let delta_distance = match (
        sim.var_delta_pct,
        sim.kurt_delta_pct,
        target.var_delta_pct,
        target.kurt_delta_pct,
    ) {
        (Some(a), Some(b), Some(c), Some(d)) => Some((a - c).abs() + (b - d).abs()),
        _ => None,
    };
    MatchRow {
        setup: setup.to_string(),
        agrees,
        n_agree,
        full_match: n_agree == 4,
        share_distance,
        delta_distance,
        rank: 0,
    }
}

/// Score and rank every report against `target`; rank 1 is the best fit.
pub fn rank_setups(reports: &[StatReport], target: &Pattern) -> Result<Vec<MatchRow>> {
    let mut rows = reports
        .iter()
        .map(|r| Ok(match_pattern(&r.setup, &Pattern::from_report(r)?, target)))
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| {
        b.n_agree
            .cmp(&a.n_agree)
            .then(a.share_distance.total_cmp(&b.share_distance))
            .then(
                a.delta_distance
                    .unwrap_or(f64::INFINITY)
                    .total_cmp(&b.delta_distance.unwrap_or(f64::INFINITY)),
            )
    });
    for (i, r) in rows.iter_mut().enumerate() {
        r.rank = i + 1;
    }
    Ok(rows)
}

pub const MATCH_HEADER: [&str; 10] = [
    "rank",
    "setup",
    "mean",
    "variance",
    "skewness",
    "kurtosis",
    "n_agree",
    "full_match",
    "share_distance",
    "delta_distance",
];

pub fn write_matches_csv<W: std::io::Write>(rows: &[MatchRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(MATCH_HEADER)?;
    for r in rows {
        let mut rec = vec![r.rank.to_string(), r.setup.clone()];
        rec.extend(
            r.agrees
                .iter()
                .map(|&a| if a { "match" } else { "-" }.to_string()),
        );
        rec.push(r.n_agree.to_string());
        rec.push(r.full_match.to_string());
        rec.push(format!("{:.3}", r.share_distance));
        rec.push(r.delta_distance.map_or("NA".into(), |d| format!("{d:.1}")));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
