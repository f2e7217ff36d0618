//! Daily closing prices around crash dates: loading, differencing, windowing
//! and the before/after comparison table.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDate;
use log::{info, warn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{
    jarque_bera, mean_difference_test, moments, variance_ratio_test, MomentSummary,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Exclusion {
    pub ticker: String,
    pub reason: String,
}

fn default_window() -> usize {
    20
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventSpec {
    pub name: String,
    pub bpd: NaiveDate,
    /// Trading days on each side.
    #[serde(default = "default_window")]
    pub window_days: usize,
    pub tickers: Vec<String>,
    #[serde(default)]
    pub exclusions: Vec<Exclusion>,
}

/// Which side of the split the break day's own difference belongs to.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BpdSide {
    /// `close(bpd) - close(bpd-1)` closes the before window; a break date
    /// without trading snaps back to the last trading day.
    #[default]
    Before,
    /// `close(bpd) - close(bpd-1)` opens the after window; a break date
    /// without trading snaps forward to the next trading day.
    After,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceSeries {
    pub ticker: String,
    /// Strictly increasing dates with positive closes.
    pub observations: Vec<(NaiveDate, f64)>,
}

impl PriceSeries {
    /// First differences dated by the later observation.
    pub fn dated_differences(&self) -> Vec<(NaiveDate, f64)> {
        self.observations
            .windows(2)
            .map(|w| (w[1].0, w[1].1 - w[0].1))
            .collect()
    }
}

fn is_missing(field: &str) -> bool {
    matches!(
        field.trim().to_ascii_lowercase().as_str(),
        "" | "na" | "nan" | "null" | "."
    )
}

/// Read `date,ticker,close` rows (header required, any column order).
/// Rows without a close are dropped and counted; bad dates or prices are
/// errors carrying the line number. Series come back sorted by ticker.
pub fn load_prices<R: Read>(reader: R) -> Result<Vec<PriceSeries>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::Malformed {
                line: 1,
                msg: format!("missing column '{name}'"),
            })
    };
    let (di, ti, ci) = (col("date")?, col("ticker")?, col("close")?);

    let mut by_ticker: BTreeMap<String, Vec<(NaiveDate, f64)>> = BTreeMap::new();
    let mut dropped = 0usize;
    let mut rows = 0usize;
    for rec in rdr.records() {
        let rec = rec?;
        rows += 1;
        let line = rec.position().map_or(0, |p| p.line());
        let field = |i: usize| rec.get(i).unwrap_or("");
        let date =
            NaiveDate::parse_from_str(field(di), "%Y-%m-%d").map_err(|e| Error::Malformed {
                line,
                msg: format!("bad date '{}': {e}", field(di)),
            })?;
        let ticker = field(ti);
        if ticker.is_empty() {
            return Err(Error::Malformed {
                line,
                msg: "empty ticker".into(),
            });
        }
        if is_missing(field(ci)) {
            dropped += 1;
            continue;
        }
        let close: f64 = field(ci).parse().map_err(|_| Error::Malformed {
            line,
            msg: format!("bad close '{}'", field(ci)),
        })?;
        if !(close.is_finite() && close > 0.0) {
            return Err(Error::Malformed {
                line,
                msg: format!("close must be positive, got {close}"),
            });
        }
        by_ticker
            .entry(ticker.to_string())
            .or_default()
            .push((date, close));
    }
    if rows == 0 {
        return Err(Error::Empty);
    }
    if dropped > 0 {
        info!("dropped {dropped} rows with missing close");
    }

    let mut out = Vec::with_capacity(by_ticker.len());
    for (ticker, mut obs) in by_ticker {
        if obs.windows(2).any(|w| w[0].0 > w[1].0) {
            warn!("{ticker}: dates out of order, sorting");
            obs.sort_by_key(|o| o.0);
        }
        if let Some(w) = obs.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::Duplicate {
                ticker,
                date: w[0].0.to_string(),
            });
        }
        out.push(PriceSeries {
            ticker,
            observations: obs,
        });
    }
    Ok(out)
}

pub fn load_prices_path(path: impl AsRef<Path>) -> Result<Vec<PriceSeries>> {
    load_prices(std::fs::File::open(path)?)
}

/// First differences `close_t - close_{t-1}`.
pub fn difference(series: &PriceSeries) -> Result<Vec<f64>> {
    let n = series.observations.len();
    if n < 2 {
        return Err(Error::InsufficientSample { needed: 2, got: n });
    }
    Ok(series
        .dated_differences()
        .into_iter()
        .map(|(_, d)| d)
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Skip {
    pub ticker: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowSplit {
    /// Trading day the split is anchored on.
    pub anchor: NaiveDate,
    pub before: Vec<f64>,
    pub after: Vec<f64>,
    pub included: Vec<String>,
    pub skipped: Vec<Skip>,
}

/// Pool before/after differences across the event's tickers.
///
/// Windows are laid on the market calendar (every date on which any of the
/// event's tickers traded), so a ticker missing a day inside a window
/// contributes one difference fewer. A ticker is skipped when it has no
/// data, is excluded, or does not cover both windows. Every exclusion is
/// reported, listed ticker or not.
pub fn window_split(data: &[PriceSeries], event: &EventSpec, side: BpdSide) -> Result<WindowSplit> {
    let w = event.window_days;
    if w == 0 {
        return Err(Error::InvalidConfig(format!(
            "{}: window_days must be >= 1",
            event.name
        )));
    }
    let by_ticker: BTreeMap<&str, &PriceSeries> =
        data.iter().map(|s| (s.ticker.as_str(), s)).collect();
    let mut skipped: Vec<Skip> = event
        .exclusions
        .iter()
        .map(|x| {
            info!("{}: excluding {}: {}", event.name, x.ticker, x.reason);
            Skip {
                ticker: x.ticker.clone(),
                reason: format!("excluded: {}", x.reason),
            }
        })
        .collect();
    let mut candidates = Vec::new();
    for t in &event.tickers {
        if event.exclusions.iter().any(|x| &x.ticker == t) {
            continue;
        } else if let Some(s) = by_ticker.get(t.as_str()) {
            candidates.push(*s);
        } else {
            info!("{}: skipping {t}: no data", event.name);
            skipped.push(Skip {
                ticker: t.clone(),
                reason: "no data".into(),
            });
        }
    }
    let calendar: Vec<NaiveDate> = candidates
        .iter()
        .flat_map(|s| s.observations.iter().map(|o| o.0))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    let anchor_idx = match side {
        BpdSide::Before => calendar.iter().rposition(|&d| d <= event.bpd),
        BpdSide::After => calendar.iter().position(|&d| d >= event.bpd),
    }
    .ok_or_else(|| {
        Error::InvalidConfig(format!("{}: no trading day near {}", event.name, event.bpd))
    })?;
    let anchor = calendar[anchor_idx];
    if anchor != event.bpd {
        warn!(
            "{}: no trading on {}, anchored on {anchor}",
            event.name, event.bpd
        );
    }
    // Index of the first date of the after window.
    let split = match side {
        BpdSide::Before => anchor_idx + 1,
        BpdSide::After => anchor_idx,
    };
    if split < w + 1 || split + w > calendar.len() {
        return Err(Error::InsufficientHistory {
            needed: 2 * w + 1,
            got: calendar.len(),
        });
    }
    // The difference dated at calendar[split - w] needs the close before it.
    let start = calendar[split - w - 1];
    let first_after = calendar[split];
    let end = calendar[split + w - 1];

    let mut before = Vec::new();
    let mut after = Vec::new();
    let mut included = Vec::new();
    for s in candidates {
        let (first, last) = (
            s.observations[0].0,
            s.observations[s.observations.len() - 1].0,
        );
        if first > start || last < end {
            let reason = format!("data {first}..{last} does not cover {start}..{end}");
            info!("{}: skipping {}: {reason}", event.name, s.ticker);
            skipped.push(Skip {
                ticker: s.ticker.clone(),
                reason,
            });
            continue;
        }
        let mut nb = 0;
        let mut na = 0;
        for (d, x) in s.dated_differences() {
            if d > start && d < first_after {
                before.push(x);
                nb += 1;
            } else if d >= first_after && d <= end {
                after.push(x);
                na += 1;
            }
        }
        if nb < w || na < w {
            info!(
                "{}: {} has gaps ({nb} before, {na} after of {w})",
                event.name, s.ticker
            );
        }
        included.push(s.ticker.clone());
    }
    Ok(WindowSplit {
        anchor,
        before,
        after,
        included,
        skipped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Up,
    Down,
    Flat,
}

impl Direction {
    fn of(before: f64, after: f64) -> Self {
        match after.partial_cmp(&before) {
            Some(std::cmp::Ordering::Greater) => Direction::Up,
            Some(std::cmp::Ordering::Less) => Direction::Down,
            _ => Direction::Flat,
        }
    }

    pub fn arrow(self) -> &'static str {
        match self {
            Direction::Up => "↑",
            Direction::Down => "↓",
            Direction::Flat => "",
        }
    }
}

/// A before/after shift with the significance stars of its test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Shift {
    pub direction: Direction,
    pub stars: String,
}

impl fmt::Display for Shift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.direction.arrow(), self.stars)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventReport {
    pub name: String,
    pub bpd: NaiveDate,
    pub anchor: NaiveDate,
    pub tickers: Vec<String>,
    pub skipped: Vec<Skip>,
    pub before: MomentSummary,
    pub after: MomentSummary,
    pub jb_p_before: f64,
    pub jb_p_after: f64,
    pub mean: Shift,
    pub variance: Shift,
    pub var_delta_pct: f64,
    pub skewness: Direction,
    pub kurtosis: Direction,
    pub kurt_delta_pct: f64,
}

/// "k/n arrow" line of the table: the majority direction over events and,
/// for mean and variance, the weakest significance among that majority.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tally {
    pub count: usize,
    pub of: usize,
    pub direction: Direction,
    pub stars: String,
}

impl fmt::Display for Tally {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}/{} {}{}",
            self.count,
            self.of,
            self.direction.arrow(),
            self.stars
        )
    }
}

fn tally<'a>(items: impl Iterator<Item = (Direction, Option<&'a str>)>) -> Tally {
    let items: Vec<_> = items.collect();
    let ups = items.iter().filter(|i| i.0 == Direction::Up).count();
    let downs = items.iter().filter(|i| i.0 == Direction::Down).count();
    let direction = match ups.cmp(&downs) {
        std::cmp::Ordering::Greater => Direction::Up,
        std::cmp::Ordering::Less => Direction::Down,
        std::cmp::Ordering::Equal => Direction::Flat,
    };
    let majority: Vec<_> = items.iter().filter(|i| i.0 == direction).collect();
    let stars = if direction == Direction::Flat {
        String::new()
    } else {
        majority
            .iter()
            .map(|i| i.1.unwrap_or(""))
            .min_by_key(|s| s.len())
            .unwrap_or("")
            .to_string()
    };
    Tally {
        count: ups.max(downs),
        of: items.len(),
        direction,
        stars,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalSummary {
    pub mean: Tally,
    pub variance: Tally,
    pub skewness: Tally,
    pub kurtosis: Tally,
    /// Average over events of the variance and kurtosis changes.
    pub var_delta_pct: f64,
    pub kurt_delta_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalReport {
    pub events: Vec<EventReport>,
    pub summary: EmpiricalSummary,
}

fn pct_change(before: f64, after: f64) -> f64 {
    100.0 * (after - before) / before.abs()
}

pub fn event_report(data: &[PriceSeries], event: &EventSpec, side: BpdSide) -> Result<EventReport> {
    let split = window_split(data, event, side)?;
    let before = moments(&split.before)?;
    let after = moments(&split.after)?;
    let identical = split.before == split.after;
    let shift = |before: f64, after: f64, p: f64| {
        let direction = if identical {
            Direction::Flat
        } else {
            Direction::of(before, after)
        };
        let stars = if direction == Direction::Flat {
            String::new()
        } else {
            crate::stats::TestResult::new(0.0, p).stars().to_string()
        };
        Shift { direction, stars }
    };
    let mean_p = mean_difference_test(&split.before, &split.after)?.p_value;
    let var_p = variance_ratio_test(&split.before, &split.after)?.p_value;
    let plain = |b: f64, a: f64| {
        if identical {
            Direction::Flat
        } else {
            Direction::of(b, a)
        }
    };
    Ok(EventReport {
        name: event.name.clone(),
        bpd: event.bpd,
        anchor: split.anchor,
        tickers: split.included,
        skipped: split.skipped,
        mean: shift(before.mean, after.mean, mean_p),
        variance: shift(before.variance, after.variance, var_p),
        var_delta_pct: pct_change(before.variance, after.variance),
        skewness: plain(before.skewness, after.skewness),
        kurtosis: plain(before.kurtosis, after.kurtosis),
        kurt_delta_pct: pct_change(before.kurtosis, after.kurtosis),
        jb_p_before: jarque_bera(&split.before)?.p_value,
        jb_p_after: jarque_bera(&split.after)?.p_value,
        before,
        after,
    })
}

pub fn summarize(events: &[EventReport]) -> Result<EmpiricalSummary> {
    if events.is_empty() {
        return Err(Error::Empty);
    }
    let n = events.len() as f64;
    Ok(EmpiricalSummary {
        mean: tally(
            events
                .iter()
                .map(|e| (e.mean.direction, Some(e.mean.stars.as_str()))),
        ),
        variance: tally(
            events
                .iter()
                .map(|e| (e.variance.direction, Some(e.variance.stars.as_str()))),
        ),
        skewness: tally(events.iter().map(|e| (e.skewness, None))),
        kurtosis: tally(events.iter().map(|e| (e.kurtosis, None))),
        var_delta_pct: events.iter().map(|e| e.var_delta_pct).sum::<f64>() / n,
        kurt_delta_pct: events.iter().map(|e| e.kurt_delta_pct).sum::<f64>() / n,
    })
}

/// Before/after table for every event plus the summary tally. Events are
/// independent and processed in parallel; the output keeps config order.
pub fn empirical_report(
    data: &[PriceSeries],
    events: &[EventSpec],
    side: BpdSide,
) -> Result<EmpiricalReport> {
    use rayon::prelude::*;
    let events: Vec<EventReport> = events
        .par_iter()
        .map(|e| event_report(data, e, side))
        .collect::<Result<_>>()?;
    let summary = summarize(&events)?;
    Ok(EmpiricalReport { events, summary })
}

pub const REPORT_HEADER: [&str; 17] = [
    "event",
    "sample",
    "n",
    "mean",
    "mean_shift",
    "variance",
    "var_shift",
    "var_delta_pct",
    "skewness",
    "skew_shift",
    "kurtosis",
    "kurt_shift",
    "kurt_delta_pct",
    "min",
    "max",
    "jb_p",
    "tickers",
];

impl EmpiricalReport {
    /// Two rows per event (B, A) with shifts on the A row, then a summary
    /// row with the tallies.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(REPORT_HEADER)?;
        let f3 = |v: f64| format!("{v:.3}");
        let f2 = |v: f64| format!("{v:.2}");
        for e in &self.events {
            let row = |sample: &str, m: &MomentSummary, jb: f64, after: bool| -> Vec<String> {
                let pick = |s: String| if after { s } else { String::new() };
                vec![
                    e.name.clone(),
                    sample.into(),
                    m.n.to_string(),
                    f3(m.mean),
                    pick(e.mean.to_string()),
                    f3(m.variance),
                    pick(e.variance.to_string()),
                    pick(format!("{:.1}", e.var_delta_pct)),
                    f3(m.skewness),
                    pick(e.skewness.arrow().into()),
                    f3(m.kurtosis),
                    pick(e.kurtosis.arrow().into()),
                    pick(format!("{:.1}", e.kurt_delta_pct)),
                    f2(m.min),
                    f2(m.max),
                    f3(jb),
                    e.tickers.len().to_string(),
                ]
            };
            w.write_record(row("B", &e.before, e.jb_p_before, false))?;
            w.write_record(row("A", &e.after, e.jb_p_after, true))?;
        }
        let s = &self.summary;
        let mut summary = vec![String::new(); REPORT_HEADER.len()];
        summary[0] = "Summary".into();
        summary[4] = s.mean.to_string();
        summary[6] = s.variance.to_string();
        summary[7] = format!("{:.1}", s.var_delta_pct);
        summary[9] = s.skewness.to_string();
        summary[11] = s.kurtosis.to_string();
        summary[12] = format!("{:.1}", s.kurt_delta_pct);
        w.write_record(&summary)?;
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> NaiveDate {
        NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
    }

    #[test]
    fn load_small_file() {
        let csv = "date,ticker,close\n2000-01-03,AA,10\n2000-01-04,AA,12\n2000-01-05,AA,11\n";
        let s = load_prices(csv.as_bytes()).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].observations.len(), 3);
        assert_eq!(difference(&s[0]).unwrap(), vec![2.0, -1.0]);
    }

    #[test]
    fn load_sorts_and_drops_missing() {
        let csv = "ticker,close,date\nAA,11,2000-01-05\nAA,10,2000-01-03\nAA,NA,2000-01-04\nBB,5,2000-01-03\n";
        let s = load_prices(csv.as_bytes()).unwrap();
        assert_eq!(s[0].ticker, "AA");
        assert_eq!(
            s[0].observations,
            vec![(d("2000-01-03"), 10.0), (d("2000-01-05"), 11.0)]
        );
        assert_eq!(s[1].ticker, "BB");
    }

    #[test]
    fn load_errors() {
        let dup = "date,ticker,close\n2000-01-03,AA,10\n2000-01-03,AA,12\n";
        match load_prices(dup.as_bytes()) {
            Err(Error::Duplicate { ticker, date }) => {
                assert_eq!(ticker, "AA");
                assert_eq!(date, "2000-01-03");
            }
            other => panic!("{other:?}"),
        }
        let bad = "date,ticker,close\n2000-01-03,AA,10\n2000-13-03,AA,12\n";
        assert!(matches!(
            load_prices(bad.as_bytes()),
            Err(Error::Malformed { line: 3, .. })
        ));
        let neg = "date,ticker,close\n2000-01-03,AA,-1\n";
        assert!(matches!(
            load_prices(neg.as_bytes()),
            Err(Error::Malformed { line: 2, .. })
        ));
        assert!(matches!(
            load_prices("date,ticker,close\n".as_bytes()),
            Err(Error::Empty)
        ));
        assert!(load_prices("date,close\n2000-01-03,1\n".as_bytes()).is_err());
    }

    #[test]
    fn difference_shapes() {
        let s = PriceSeries {
            ticker: "X".into(),
            observations: vec![
                (d("2000-01-03"), 10.0),
                (d("2000-01-04"), 10.0),
                (d("2000-01-05"), 10.0),
            ],
        };
        assert_eq!(difference(&s).unwrap(), vec![0.0, 0.0]);
        let one = PriceSeries {
            ticker: "X".into(),
            observations: vec![(d("2000-01-03"), 10.0)],
        };
        assert!(difference(&one).is_err());
    }

    fn three_days() -> Vec<PriceSeries> {
        vec![PriceSeries {
            ticker: "X".into(),
            observations: vec![
                (d("2000-01-03"), 10.0),
                (d("2000-01-04"), 7.0),
                (d("2000-01-05"), 8.0),
            ],
        }]
    }

    fn event(bpd: &str, w: usize) -> EventSpec {
        EventSpec {
            name: "e".into(),
            bpd: d(bpd),
            window_days: w,
            tickers: vec!["X".into()],
            exclusions: vec![],
        }
    }

    #[test]
    fn one_day_windows() {
        let s = window_split(&three_days(), &event("2000-01-04", 1), BpdSide::Before).unwrap();
        assert_eq!((s.before, s.after), (vec![-3.0], vec![1.0]));
        let s = window_split(&three_days(), &event("2000-01-05", 1), BpdSide::After).unwrap();
        assert_eq!((s.before, s.after), (vec![-3.0], vec![1.0]));
    }

    #[test]
    fn non_trading_bpd_snaps() {
        // 2000-01-08 is a Saturday
        let mut data = three_days();
        data[0].observations.push((d("2000-01-10"), 9.0));
        let s = window_split(&data, &event("2000-01-08", 1), BpdSide::Before).unwrap();
        assert_eq!(s.anchor, d("2000-01-05"));
        assert_eq!((s.before, s.after), (vec![1.0], vec![1.0]));
        let s = window_split(&data, &event("2000-01-08", 1), BpdSide::After).unwrap();
        assert_eq!(s.anchor, d("2000-01-10"));
        assert_eq!((s.before, s.after), (vec![1.0], vec![1.0]));
    }

    #[test]
    fn late_and_missing_tickers_skipped() {
        let mut data = three_days();
        data.push(PriceSeries {
            ticker: "LATE".into(),
            observations: vec![(d("2000-01-04"), 1.0), (d("2000-01-05"), 2.0)],
        });
        let mut ev = event("2000-01-04", 1);
        ev.tickers = vec!["X".into(), "LATE".into(), "GONE".into(), "OUT".into()];
        ev.exclusions.push(Exclusion {
            ticker: "OUT".into(),
            reason: "outlier".into(),
        });
        let s = window_split(&data, &ev, BpdSide::Before).unwrap();
        assert_eq!(s.included, vec!["X".to_string()]);
        let skipped: Vec<&str> = s.skipped.iter().map(|k| k.ticker.as_str()).collect();
        assert_eq!(skipped, vec!["OUT", "GONE", "LATE"]);
        assert!(window_split(&data, &event("2000-01-04", 2), BpdSide::Before).is_err());
    }

    #[test]
    fn gap_inside_window_costs_one_difference() {
        let days = [
            "2000-01-03",
            "2000-01-04",
            "2000-01-05",
            "2000-01-06",
            "2000-01-07",
        ];
        let full: Vec<_> = days
            .iter()
            .enumerate()
            .map(|(i, s)| (d(s), 10.0 + i as f64))
            .collect();
        let mut gappy = full.clone();
        gappy.remove(1);
        let data = vec![
            PriceSeries {
                ticker: "A".into(),
                observations: full,
            },
            PriceSeries {
                ticker: "B".into(),
                observations: gappy,
            },
        ];
        let mut ev = event("2000-01-05", 2);
        ev.tickers = vec!["A".into(), "B".into()];
        let s = window_split(&data, &ev, BpdSide::Before).unwrap();
        assert_eq!(s.before.len(), 3);
        assert_eq!(s.after.len(), 4);
        assert_eq!(s.before, vec![1.0, 1.0, 2.0]);
    }

    fn synthetic(ticker: &str, start: f64, before: &[f64], after: &[f64]) -> PriceSeries {
        let mut date = d("2001-01-01");
        let mut close = start;
        let mut obs = vec![(date, close)];
        for x in before.iter().chain(after) {
            date = date.succ_opt().unwrap();
            close += x;
            obs.push((date, close));
        }
        PriceSeries {
            ticker: ticker.into(),
            observations: obs,
        }
    }

    #[test]
    fn identical_sides_have_no_arrows() {
        let moves = [0.5, -1.0, 0.25, 2.0, -0.75, 0.1, -0.3, 0.6, -0.2, 1.1];
        let data = vec![synthetic("X", 100.0, &moves, &moves)];
        let mut ev = event("2001-01-11", 10);
        ev.tickers = vec!["X".into()];
        let r = event_report(&data, &ev, BpdSide::Before).unwrap();
        assert_eq!(r.before, r.after);
        assert_eq!(r.mean.to_string(), "");
        assert_eq!(r.variance.to_string(), "");
        assert_eq!(r.skewness, Direction::Flat);
        assert_eq!(r.var_delta_pct, 0.0);
    }
}
