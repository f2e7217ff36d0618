//! Seeded simulation runs with a mid-series behavioural break, the four-way
//! before/after sample split, and parameter sweeps.
//!
//! Periods are numbered from 1. With the defaults (`T = 250`, break at 126,
//! 10% trimmed at each end) period 126 is the first broken period, the
//! "before" part is periods 26..=125 and the "after" part 126..=225.
//!
//! Seeds: run `i` of a batch uses `derive_seed(batch_seed, i)`. Within a
//! run, strategy parameters, noise and per-run extras (memory lengths,
//! stochastic beta/intensity) come from three independent streams derived
//! from the run seed with fixed tags, so a break that re-draws parameters
//! never shifts the noise path.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::behavior::{
    apply_overconfidence, apply_sentiment, generate_strategies, herd_in_place, shift_strategy,
    BreakSpec, SentimentMode, StrategyGenSpec,
};
use crate::error::{Error, Result};
use crate::model::{
    fitness_memory, fitness_one_lag, step_deviation, update_fractions_into, MarketConfig,
    MarketState, Strategy,
};

/// Largest memory length drawn by the memory extension.
pub const MAX_MEMORY: usize = 20;
/// Range of the per-run intensity of choice under stochastic parameters.
pub const STOCHASTIC_BETA_RANGE: (f64, f64) = (5.0, 500.0);
/// Range of the per-run intensity level under stochastic parameters.
pub const STOCHASTIC_LEVEL_RANGE: (f64, f64) = (0.1, 1.0);

const TAG_PARAMS: u64 = 0x7061_7261_6d73; // "params"
const TAG_NOISE: u64 = 0x006e_6f69_7365; // "noise"
const TAG_EXTRA: u64 = 0x0065_7874_7261; // "extra"

/// SplitMix64 finaliser.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed `index` of `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Extensions {
    /// Strategy 0 is always the fundamentalist.
    pub fundamentalist_default: bool,
    /// Beta and break intensity re-drawn uniformly for every run.
    pub stochastic_params: bool,
    /// Fitness averaged over per-strategy memory lengths.
    pub memory: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub market: MarketConfig,
    pub gen: StrategyGenSpec,
    /// Elements injected at the break. They always compose in the order
    /// sentiment, overconfidence, herding, whatever the list order.
    pub breaks: Vec<BreakSpec>,
    pub sentiment_mode: SentimentMode,
    /// Series length `T`.
    pub periods: usize,
    /// First broken period (1-based).
    pub bpd: usize,
    /// Fraction trimmed from each end of the series.
    pub burn_frac: f64,
    /// Length of the short samples next to the break.
    pub window: usize,
    pub seed: u64,
    pub extensions: Extensions,
    pub n_runs: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            market: MarketConfig::default(),
            gen: StrategyGenSpec::default(),
            breaks: Vec::new(),
            sentiment_mode: SentimentMode::default(),
            periods: 250,
            bpd: 126,
            burn_frac: 0.10,
            window: 20,
            seed: 0,
            extensions: Extensions::default(),
            n_runs: 100,
        }
    }
}

impl RunConfig {
    pub fn with_break(mut self, brk: BreakSpec) -> Self {
        self.breaks = if brk.is_none() { Vec::new() } else { vec![brk] };
        self
    }

    /// Number of points trimmed at each end.
    pub fn burn_len(&self) -> usize {
        let raw = self.periods as f64 * self.burn_frac;
        if (raw - raw.round()).abs() < 1e-9 {
            raw.round() as usize
        } else {
            raw.ceil() as usize
        }
    }

    /// Half-open 0-based index ranges of the full before and after parts.
    pub fn part_ranges(&self) -> (std::ops::Range<usize>, std::ops::Range<usize>) {
        let burn = self.burn_len();
        let split = self.bpd - 1;
        (burn..split, split..self.periods.saturating_sub(burn))
    }

    fn active_breaks(&self) -> impl Iterator<Item = &BreakSpec> {
        self.breaks.iter().filter(|b| !b.is_none())
    }

    pub fn has_break(&self) -> bool {
        self.active_breaks().next().is_some()
    }

    /// True when some element has an intensity axis.
    pub fn has_intensity(&self) -> bool {
        self.active_breaks().any(|b| b.has_intensity())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        self.market.validate()?;
        self.gen.validate()?;
        if !(self.burn_frac > 0.0 && self.burn_frac < 0.5) {
            return bad(format!(
                "burn_frac must be in (0, 0.5), got {}",
                self.burn_frac
            ));
        }
        if self.bpd < 2 || self.bpd >= self.periods {
            return bad(format!(
                "bpd must satisfy 2 <= bpd < periods, got bpd={} periods={}",
                self.bpd, self.periods
            ));
        }
        if self.n_runs == 0 {
            return bad("n_runs must be >= 1".into());
        }
        let (before, after) = self.part_ranges();
        if before.start >= before.end || after.start >= after.end {
            return bad("trimming leaves an empty before or after part".into());
        }
        if self.window > before.len() || self.window > after.len() {
            return bad(format!(
                "window {} exceeds a part (before {}, after {})",
                self.window,
                before.len(),
                after.len()
            ));
        }
        let mut seen = [0usize; 3];
        for b in self.active_breaks() {
            b.validate()?;
            let slot = match b {
                BreakSpec::Herding { herder } => {
                    if self.market.n_strategies < 2 {
                        return Err(Error::NothingToImitate(self.market.n_strategies));
                    }
                    if let Some(h) = herder {
                        if *h >= self.market.n_strategies {
                            return bad(format!("herder index {h} out of range"));
                        }
                    }
                    0
                }
                BreakSpec::Overconfidence { .. } => 1,
                BreakSpec::Sentiment { .. } => 2,
                BreakSpec::None => unreachable!(),
            };
            seen[slot] += 1;
        }
        if seen.iter().any(|&c| c > 1) {
            return bad("each behavioural element may appear at most once".into());
        }
        Ok(())
    }
}

/// Per-run parameters that are not fixed by the config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub run: usize,
    pub seed: u64,
    pub beta: f64,
    /// Intensity level in `(0, 1]` when stochastic parameters drew one.
    pub level: Option<f64>,
    /// Memory lengths when the memory extension is on.
    pub memory: Option<Vec<usize>>,
}

/// One run's four-way split.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunParts {
    /// Full before part (`B`).
    pub before: Vec<f64>,
    /// Last `window` points of `before` (`b`).
    pub before_short: Vec<f64>,
    /// First `window` points of `after` (`a`).
    pub after_short: Vec<f64>,
    /// Full after part (`A`).
    pub after: Vec<f64>,
}

/// Pooled samples of a batch, concatenated in run order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunSamples {
    pub before: Vec<f64>,
    pub before_short: Vec<f64>,
    pub after_short: Vec<f64>,
    pub after: Vec<f64>,
}

impl RunSamples {
    pub fn sizes(&self) -> [usize; 4] {
        [
            self.before.len(),
            self.before_short.len(),
            self.after_short.len(),
            self.after.len(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub meta: RunMeta,
    pub parts: RunParts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Batch {
    pub samples: RunSamples,
    pub runs: Vec<RunRecord>,
}

/// A simulated series with the run's realised parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub series: Vec<f64>,
    pub meta: RunMeta,
}

/// Memory lengths drawn uniformly on `0..=20` with 0 mapped to 1.
pub fn memory_lengths<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    (0..n)
        .map(|_| rng.random_range(0..=MAX_MEMORY).max(1))
        .collect()
}

/// Length-`T` deviation series for one run.
pub fn simulate_run(cfg: &RunConfig, run_seed: u64) -> Result<Vec<f64>> {
    Ok(simulate_traced(cfg, 0, run_seed)?.series)
}

/// [`simulate_run`] that also reports the run's drawn parameters.
pub fn simulate_traced(cfg: &RunConfig, run: usize, run_seed: u64) -> Result<RunTrace> {
    cfg.validate()?;
    let n = cfg.market.n_strategies;
    let mut param_rng = ChaCha8Rng::seed_from_u64(derive_seed(run_seed, TAG_PARAMS));
    let mut noise_rng = ChaCha8Rng::seed_from_u64(derive_seed(run_seed, TAG_NOISE));
    let mut extra_rng = ChaCha8Rng::seed_from_u64(derive_seed(run_seed, TAG_EXTRA));

    let mut market = cfg.market.clone();
    let mut breaks: Vec<BreakSpec> = cfg.active_breaks().copied().collect();
    let mut level = None;
    if cfg.extensions.stochastic_params {
        market.beta = extra_rng.random_range(STOCHASTIC_BETA_RANGE.0..=STOCHASTIC_BETA_RANGE.1);
        if cfg.has_intensity() {
            let l = extra_rng.random_range(STOCHASTIC_LEVEL_RANGE.0..=STOCHASTIC_LEVEL_RANGE.1);
            breaks = breaks.iter().map(|b| b.with_level(l)).collect();
            level = Some(l);
        }
    }

    let mut gen = cfg.gen.clone();
    gen.force_fundamentalist |= cfg.extensions.fundamentalist_default;
    let mut strategies = generate_strategies(&gen, n, &mut param_rng)?;
    let memory = if cfg.extensions.memory {
        let m = memory_lengths(n, &mut extra_rng);
        for (s, &len) in strategies.iter_mut().zip(&m) {
            s.m = len;
        }
        Some(m)
    } else {
        None
    };
    let max_m = strategies.iter().map(|s| s.m).max().unwrap_or(1);

    let sentiment = breaks
        .iter()
        .find(|b| matches!(b, BreakSpec::Sentiment { .. }))
        .copied();
    let overconfidence = breaks
        .iter()
        .find(|b| matches!(b, BreakSpec::Overconfidence { .. }))
        .copied();
    let herder = breaks.iter().find_map(|b| match b {
        BreakSpec::Herding { herder } => Some(herder.unwrap_or(n - 1)),
        _ => None,
    });

    let pad = (max_m + 3).max(3);
    let mut state = MarketState::with_padding(n, pad);
    state.x_history.reserve(cfg.periods);
    let mut one_lag = vec![0.0; n];
    let mut prev_one_lag = vec![0.0; n];
    let mut selection = vec![0.0; n];
    let w = market.noise_halfwidth;

    for period in 1..=cfg.periods {
        if period == cfg.bpd {
            if let Some(s) = &sentiment {
                let shifted = apply_sentiment(&gen, s)?;
                match cfg.sentiment_mode {
                    SentimentMode::Shift => {
                        let skip = usize::from(gen.force_fundamentalist);
                        for st in strategies.iter_mut().skip(skip) {
                            *st = shift_strategy(st, &gen, &shifted);
                        }
                    }
                    SentimentMode::Redraw => {
                        let fresh = generate_strategies(&shifted, n, &mut param_rng)?;
                        for (old, new) in strategies.iter_mut().zip(fresh) {
                            old.g = new.g;
                            old.b = new.b;
                        }
                    }
                }
                gen = shifted;
            }
            if let Some(o) = &overconfidence {
                for s in strategies.iter_mut() {
                    *s = apply_overconfidence(s, o)?;
                }
            }
        }
        if period >= cfg.bpd {
            if let Some(h) = herder {
                herd_in_place(&mut strategies, &prev_one_lag, h)?;
            }
        }

        let (x1, x2, x3) = state.lags();
        for (u, s) in one_lag.iter_mut().zip(&strategies) {
            *u = fitness_one_lag(x1, x2, x3, s, &market);
        }
        if memory.is_some() {
            let hist = &state.x_history;
            for (u, s) in selection.iter_mut().zip(&strategies) {
                let window = &hist[hist.len() - (s.m + 2)..];
                *u = fitness_memory(window, s, &market)?;
            }
        } else {
            selection.copy_from_slice(&one_lag);
        }
        update_fractions_into(&selection, market.beta, &mut state.fractions)?;
        state.fitness.copy_from_slice(&selection);

        let eps = if w > 0.0 {
            noise_rng.random_range(-w..=w)
        } else {
            0.0
        };
        let x = step_deviation(&state.fractions, &strategies, x1, eps, &market)?;
        state.x_history.push(x);
        std::mem::swap(&mut prev_one_lag, &mut one_lag);
    }

    let series = state.x_history.split_off(pad);
    Ok(RunTrace {
        series,
        meta: RunMeta {
            run,
            seed: run_seed,
            beta: market.beta,
            level,
            memory,
        },
    })
}

/// Cut one run's series into the B / b / a / A parts.
pub fn split_samples(series: &[f64], cfg: &RunConfig) -> Result<RunParts> {
    if series.len() != cfg.periods {
        return Err(Error::LengthMismatch {
            expected: cfg.periods,
            got: series.len(),
        });
    }
    let (before_r, after_r) = cfg.part_ranges();
    if before_r.start > before_r.end || after_r.start > after_r.end {
        return Err(Error::InvalidConfig(
            "break point leaves no room for the parts".into(),
        ));
    }
    let before = &series[before_r];
    let after = &series[after_r];
    if cfg.window > before.len() || cfg.window > after.len() {
        return Err(Error::InvalidConfig(format!(
            "window {} larger than a part (before {}, after {})",
            cfg.window,
            before.len(),
            after.len()
        )));
    }
    Ok(RunParts {
        before: before.to_vec(),
        before_short: before[before.len() - cfg.window..].to_vec(),
        after_short: after[..cfg.window].to_vec(),
        after: after.to_vec(),
    })
}

/// Run `n_runs` independent runs (in parallel on the current rayon pool)
/// and pool their parts in run order.
pub fn run_batch(cfg: &RunConfig) -> Result<Batch> {
    cfg.validate()?;
    let runs: Vec<RunRecord> = (0..cfg.n_runs)
        .into_par_iter()
        .map(|i| {
            let seed = derive_seed(cfg.seed, i as u64);
            let trace = simulate_traced(cfg, i, seed)?;
            let parts = split_samples(&trace.series, cfg)?;
            Ok(RunRecord {
                meta: trace.meta,
                parts,
            })
        })
        .collect::<Result<_>>()?;

    let mut samples = RunSamples::default();
    for r in &runs {
        samples.before.extend_from_slice(&r.parts.before);
        samples
            .before_short
            .extend_from_slice(&r.parts.before_short);
        samples.after_short.extend_from_slice(&r.parts.after_short);
        samples.after.extend_from_slice(&r.parts.after);
    }
    Ok(Batch { samples, runs })
}

/// Default beta grid: 5 to 500 in steps of 55.
pub fn default_betas() -> Vec<f64> {
    (0..10).map(|k| 5.0 + 55.0 * k as f64).collect()
}

/// Default intensity levels: ten even steps up to the range maximum.
pub fn default_levels() -> Vec<f64> {
    (1..=10).map(|k| k as f64 / 10.0).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub index: usize,
    pub beta: Option<f64>,
    pub level: Option<f64>,
    pub config: RunConfig,
    pub batch: Batch,
}

/// One batch per (beta, level) cell.
///
/// The level axis collapses to a single cell when no element has an
/// intensity; with stochastic parameters the whole grid collapses to one
/// cell whose runs draw their own beta and level.
pub fn sweep_grid(base: &RunConfig, betas: &[f64], levels: &[f64]) -> Result<Vec<Cell>> {
    if betas.is_empty() || levels.is_empty() {
        return Err(Error::InvalidConfig("sweep axes must be non-empty".into()));
    }
    base.validate()?;
    let mut plan: Vec<(Option<f64>, Option<f64>)> = Vec::new();
    if base.extensions.stochastic_params {
        plan.push((None, None));
    } else {
        let lv: Vec<Option<f64>> = if base.has_intensity() {
            levels.iter().copied().map(Some).collect()
        } else {
            vec![None]
        };
        for &b in betas {
            for &l in &lv {
                plan.push((Some(b), l));
            }
        }
    }

    plan.into_iter()
        .enumerate()
        .map(|(index, (beta, level))| {
            let mut config = base.clone();
            config.seed = derive_seed(base.seed, index as u64);
            if let Some(b) = beta {
                config.market.beta = b;
            }
            if let Some(l) = level {
                config.breaks = config.breaks.iter().map(|b| b.with_level(l)).collect();
            }
            let batch = run_batch(&config)?;
            Ok(Cell {
                index,
                beta,
                level,
                config,
                batch,
            })
        })
        .collect()
}

/// Strategies as drawn for a run, before any break; handy for inspection.
pub fn initial_strategies(cfg: &RunConfig, run_seed: u64) -> Result<Vec<Strategy>> {
    let mut param_rng = ChaCha8Rng::seed_from_u64(derive_seed(run_seed, TAG_PARAMS));
    let mut gen = cfg.gen.clone();
    gen.force_fundamentalist |= cfg.extensions.fundamentalist_default;
    generate_strategies(&gen, cfg.market.n_strategies, &mut param_rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behavior::{BreakTarget, Sign};

    fn quiet_fundamentalists() -> RunConfig {
        let mut cfg = RunConfig::default();
        cfg.market.noise_halfwidth = 0.0;
        cfg.market.n_strategies = 1;
        cfg.extensions.fundamentalist_default = true;
        cfg
    }

    #[test]
    fn equilibrium_without_noise_or_chartists() {
        let cfg = quiet_fundamentalists();
        let s = simulate_run(&cfg, 1).unwrap();
        assert_eq!(s.len(), 250);
        assert!(s.iter().all(|&x| x == 0.0));
    }

    fn single_strategy_oracle(g: f64, b: f64, dg: f64, db: f64, cfg: &RunConfig) -> Vec<f64> {
        let r = cfg.market.gross_rate;
        let mut x = 0.0;
        (1..=cfg.periods)
            .map(|p| {
                let (g, b) = if p >= cfg.bpd {
                    (g + dg, b + db)
                } else {
                    (g, b)
                };
                x = (g * x + b) / r;
                x
            })
            .collect()
    }

    #[test]
    fn sentiment_shift_moves_existing_draws() {
        let mut cfg = RunConfig::default();
        cfg.market.noise_halfwidth = 0.0;
        cfg.market.n_strategies = 1;
        for (target, dg, db) in [
            (BreakTarget::BiasOnly, 0.0, 0.15),
            (BreakTarget::TrendOnly, 0.2, 0.0),
            (BreakTarget::Mixed, -0.2, 0.15),
        ] {
            let cfg = cfg
                .clone()
                .with_break(BreakSpec::sentiment_at(target, Sign::Positive, 0.5));
            let s0 = initial_strategies(&cfg, 9).unwrap()[0];
            let expect = single_strategy_oracle(s0.g, s0.b, dg, db, &cfg);
            let got = simulate_run(&cfg, 9).unwrap();
            for (a, e) in got.iter().zip(&expect) {
                assert!(
                    (a - e).abs() <= 1e-12 * (1.0 + e.abs()),
                    "{target:?}: {a} vs {e}"
                );
            }
        }
    }

    #[test]
    fn sentiment_redraw_replaces_draws() {
        let mut cfg = RunConfig::default().with_break(BreakSpec::sentiment_at(
            BreakTarget::BiasOnly,
            Sign::Positive,
            1.0,
        ));
        cfg.market.noise_halfwidth = 0.0;
        cfg.market.n_strategies = 1;
        let s0 = initial_strategies(&cfg, 4).unwrap()[0];
        let shift = simulate_run(&cfg, 4).unwrap();
        cfg.sentiment_mode = SentimentMode::Redraw;
        let redraw = simulate_run(&cfg, 4).unwrap();
        assert_eq!(shift[..125], redraw[..125]);
        assert_ne!(shift[125..], redraw[125..]);
        let expect = single_strategy_oracle(s0.g, s0.b, 0.0, 0.3, &cfg);
        assert!((shift[249] - expect[249]).abs() < 1e-12);
    }

    #[test]
    fn deterministic_per_seed() {
        let cfg = RunConfig::default();
        assert_eq!(
            simulate_run(&cfg, 5).unwrap(),
            simulate_run(&cfg, 5).unwrap()
        );
        assert_ne!(
            simulate_run(&cfg, 5).unwrap(),
            simulate_run(&cfg, 6).unwrap()
        );
    }

    #[test]
    fn split_sizes_default() {
        let cfg = RunConfig::default();
        let series: Vec<f64> = (1..=250).map(|p| p as f64).collect();
        let parts = split_samples(&series, &cfg).unwrap();
        assert_eq!(parts.before.len(), 100);
        assert_eq!(parts.after.len(), 100);
        assert_eq!(parts.before_short.len(), 20);
        assert_eq!(parts.after_short.len(), 20);
        // Periods 26..=125 and 126..=225.
        assert_eq!(parts.before[0], 26.0);
        assert_eq!(*parts.before.last().unwrap(), 125.0);
        assert_eq!(parts.after[0], 126.0);
        assert_eq!(*parts.after.last().unwrap(), 225.0);
        assert_eq!(parts.before_short[0], 106.0);
        assert_eq!(*parts.after_short.last().unwrap(), 145.0);
    }

    #[test]
    fn split_degenerate_and_constant() {
        let mut cfg = RunConfig {
            window: 0,
            ..RunConfig::default()
        };
        let parts = split_samples(&[3.5; 250], &cfg).unwrap();
        assert!(parts.before_short.is_empty() && parts.after_short.is_empty());
        assert!(parts.before.iter().chain(&parts.after).all(|&x| x == 3.5));

        cfg.window = 101;
        assert!(split_samples(&[0.0; 250], &cfg).is_err());
        cfg.window = 20;
        assert!(matches!(
            split_samples(&[0.0; 10], &cfg),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn burn_len_is_exact_for_round_products() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.burn_len(), 25);
        let odd = RunConfig {
            periods: 251,
            ..RunConfig::default()
        };
        assert_eq!(odd.burn_len(), 26);
    }

    #[test]
    fn validate_rejects_bad_configs() {
        let c = RunConfig {
            burn_frac: 0.5,
            ..RunConfig::default()
        };
        assert!(c.validate().is_err());
        let c = RunConfig {
            bpd: 250,
            ..RunConfig::default()
        };
        assert!(c.validate().is_err());
        let c = RunConfig {
            window: 150,
            ..RunConfig::default()
        };
        assert!(c.validate().is_err());
        let c = RunConfig::default().with_break(BreakSpec::Overconfidence {
            target: BreakTarget::Both,
            intensity: -0.1,
        });
        assert!(matches!(c.validate(), Err(Error::InvalidBreak(_))));
        let c = RunConfig {
            breaks: vec![BreakSpec::herding(), BreakSpec::herding()],
            ..RunConfig::default()
        };
        assert!(c.validate().is_err());
        let mut c = RunConfig::default().with_break(BreakSpec::herding());
        c.market.n_strategies = 1;
        assert!(c.validate().is_err());
        // invalid configs fail before simulating anything
        assert!(simulate_run(&c, 0).is_err());
    }

    #[test]
    fn none_break_is_bit_identical() {
        let plain = RunConfig::default();
        let tagged = RunConfig {
            breaks: vec![BreakSpec::None],
            ..RunConfig::default()
        };
        for seed in 0..5 {
            assert_eq!(
                simulate_run(&plain, seed).unwrap(),
                simulate_run(&tagged, seed).unwrap()
            );
        }
    }

    #[test]
    fn break_leaves_prefix_untouched() {
        let plain = RunConfig::default();
        for brk in [
            BreakSpec::herding(),
            BreakSpec::overconfidence_at(BreakTarget::Both, 1.0),
            BreakSpec::sentiment_at(BreakTarget::Both, Sign::Positive, 1.0),
        ] {
            let broken = RunConfig::default().with_break(brk);
            let a = simulate_run(&plain, 3).unwrap();
            let b = simulate_run(&broken, 3).unwrap();
            assert_eq!(a[..125], b[..125], "{brk:?}");
            assert_ne!(a[125..], b[125..], "{brk:?}");
        }
    }

    #[test]
    fn memory_lengths_range_and_uniformity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = memory_lengths(5, &mut ChaCha8Rng::seed_from_u64(4));
        assert_eq!(a, memory_lengths(5, &mut ChaCha8Rng::seed_from_u64(4)));

        let n = 100_000;
        let draws = memory_lengths(n, &mut rng);
        assert!(draws.iter().all(|&m| (1..=20).contains(&m)));
        // 0..=20 uniform with 0 folded into 1: p(1) = 2/21, others 1/21.
        let mut counts = [0usize; 21];
        for m in draws {
            counts[m] += 1;
        }
        for (m, &c) in counts.iter().enumerate().skip(1) {
            let p = if m == 1 { 2.0 / 21.0 } else { 1.0 / 21.0 };
            let se = (p * (1.0 - p) / n as f64).sqrt();
            let freq = c as f64 / n as f64;
            assert!((freq - p).abs() < 3.0 * se, "m={m} freq={freq}");
        }
    }

    #[test]
    fn memory_run_is_finite_and_deterministic() {
        let mut cfg = RunConfig::default().with_break(BreakSpec::herding());
        cfg.extensions.memory = true;
        let t = simulate_traced(&cfg, 0, 99).unwrap();
        assert!(t.series.iter().all(|x| x.is_finite()));
        assert_eq!(t.meta.memory.as_ref().unwrap().len(), 5);
        assert_eq!(t.series, simulate_run(&cfg, 99).unwrap());
    }

    #[test]
    fn unit_memory_fitness_equals_one_lag_on_simulated_path() {
        let cfg = RunConfig::default();
        let series = simulate_run(&cfg, 8).unwrap();
        let s = Strategy::new(0.3, -0.1);
        for w in series.windows(3) {
            let one = fitness_one_lag(w[2], w[1], w[0], &s, &cfg.market);
            let mem = fitness_memory(w, &s, &cfg.market).unwrap();
            assert_eq!(one, mem);
        }
    }

    #[test]
    fn batch_sizes() {
        let mut cfg = RunConfig {
            n_runs: 1,
            ..RunConfig::default()
        };
        assert_eq!(run_batch(&cfg).unwrap().samples.sizes(), [100, 20, 20, 100]);
        cfg.n_runs = 100;
        let b = run_batch(&cfg).unwrap();
        assert_eq!(b.samples.sizes(), [10_000, 2_000, 2_000, 10_000]);
        assert_eq!(b.runs.len(), 100);
        // b is a suffix of each B, a a prefix of each A
        for r in &b.runs {
            assert!(r.parts.before.ends_with(&r.parts.before_short));
            assert!(r.parts.after.starts_with(&r.parts.after_short));
        }
    }

    #[test]
    fn stochastic_runs_record_beta_and_level() {
        let mut cfg = RunConfig::default()
            .with_break(BreakSpec::overconfidence_at(BreakTarget::BiasOnly, 1.0));
        cfg.extensions.stochastic_params = true;
        cfg.n_runs = 20;
        let b = run_batch(&cfg).unwrap();
        let betas: Vec<f64> = b.runs.iter().map(|r| r.meta.beta).collect();
        assert!(betas.iter().all(|&x| (5.0..=500.0).contains(&x)));
        assert!(betas.windows(2).any(|w| w[0] != w[1]));
        assert!(b.runs.iter().all(|r| r.meta.level.is_some()));
    }

    #[test]
    fn sweep_shapes() {
        let mut base =
            RunConfig::default().with_break(BreakSpec::overconfidence_at(BreakTarget::Both, 1.0));
        base.n_runs = 2;
        let cells = sweep_grid(&base, &default_betas(), &default_levels()).unwrap();
        assert_eq!(cells.len(), 100);
        assert_eq!(cells[11].beta, Some(60.0));
        assert_eq!(cells[11].level, Some(0.2));

        let none = RunConfig {
            n_runs: 2,
            ..RunConfig::default()
        };
        assert_eq!(
            sweep_grid(&none, &default_betas(), &default_levels())
                .unwrap()
                .len(),
            10
        );

        base.extensions.stochastic_params = true;
        assert_eq!(
            sweep_grid(&base, &default_betas(), &default_levels())
                .unwrap()
                .len(),
            1
        );

        assert!(sweep_grid(&base, &[], &[1.0]).is_err());
    }

    #[test]
    fn seeds_are_spread() {
        let seeds: std::collections::HashSet<u64> =
            (0..10_000).map(|i| derive_seed(42, i)).collect();
        assert_eq!(seeds.len(), 10_000);
        assert_ne!(derive_seed(0, 0), derive_seed(1, 0));
    }
}
