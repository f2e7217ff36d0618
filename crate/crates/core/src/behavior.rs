//! Strategy populations and the three behavioural break transformations.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Strategy;

/// Overconfidence excess range, as a fraction.
pub const OVERCONFIDENCE_RANGE: (f64, f64) = (0.05, 0.5);
/// Magnitude range of a sentiment shift of the trend mean.
pub const SENTIMENT_TREND_RANGE: (f64, f64) = (0.04, 0.4);
/// Magnitude range of a sentiment shift of the bias mean.
pub const SENTIMENT_BIAS_RANGE: (f64, f64) = (0.03, 0.3);

/// Parameters of the normal distributions strategies are drawn from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StrategyGenSpec {
    pub g_mean: f64,
    pub g_sd: f64,
    pub b_mean: f64,
    pub b_sd: f64,
    /// Pin strategy 0 to the fundamentalist `g = b = 0`.
    pub force_fundamentalist: bool,
}

impl Default for StrategyGenSpec {
    fn default() -> Self {
        StrategyGenSpec {
            g_mean: 0.0,
            g_sd: 0.4,
            b_mean: 0.0,
            b_sd: 0.3,
            force_fundamentalist: false,
        }
    }
}

impl StrategyGenSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.g_sd > 0.0 && self.b_sd > 0.0) {
            return Err(Error::InvalidConfig(
                "strategy generator standard deviations must be > 0".into(),
            ));
        }
        if !(self.g_mean.is_finite() && self.b_mean.is_finite()) {
            return Err(Error::InvalidConfig(
                "strategy generator means must be finite".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BreakTarget {
    BiasOnly,
    TrendOnly,
    Both,
    /// Opposite signs on trend and bias; sentiment only.
    Mixed,
}

impl BreakTarget {
    pub fn hits_trend(self) -> bool {
        !matches!(self, BreakTarget::BiasOnly)
    }

    pub fn hits_bias(self) -> bool {
        !matches!(self, BreakTarget::TrendOnly)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Positive => 1.0,
            Sign::Negative => -1.0,
        }
    }
}

/// One behavioural element injected at the break point.
///
/// Sentiment shifts are stored as magnitudes; `sign` (and, for
/// [`BreakTarget::Mixed`], the target) decides their direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BreakSpec {
    None,
    Herding {
        /// Index of the imitating strategy; the last one when absent.
        #[serde(default)]
        herder: Option<usize>,
    },
    Overconfidence {
        target: BreakTarget,
        /// Relative excess `c`, e.g. 0.2 for 20%.
        intensity: f64,
    },
    Sentiment {
        target: BreakTarget,
        sign: Sign,
        trend_shift: f64,
        bias_shift: f64,
    },
}

impl BreakSpec {
    /// Element at a fraction `level` of its range maximum: level 1 gives
    /// overconfidence 0.5 and sentiment shifts 0.4 / 0.3.
    pub fn overconfidence_at(target: BreakTarget, level: f64) -> Self {
        BreakSpec::Overconfidence {
            target,
            intensity: OVERCONFIDENCE_RANGE.1 * level,
        }
    }

    pub fn sentiment_at(target: BreakTarget, sign: Sign, level: f64) -> Self {
        BreakSpec::Sentiment {
            target,
            sign,
            trend_shift: SENTIMENT_TREND_RANGE.1 * level,
            bias_shift: SENTIMENT_BIAS_RANGE.1 * level,
        }
    }

    pub fn herding() -> Self {
        BreakSpec::Herding { herder: None }
    }

    pub fn is_none(&self) -> bool {
        matches!(self, BreakSpec::None)
    }

    /// Same element with its intensity rescaled to `level`; herding and
    /// none have no intensity and come back unchanged.
    pub fn with_level(&self, level: f64) -> Self {
        match *self {
            BreakSpec::Overconfidence { target, .. } => Self::overconfidence_at(target, level),
            BreakSpec::Sentiment { target, sign, .. } => Self::sentiment_at(target, sign, level),
            other => other,
        }
    }

    pub fn has_intensity(&self) -> bool {
        matches!(
            self,
            BreakSpec::Overconfidence { .. } | BreakSpec::Sentiment { .. }
        )
    }

    pub fn validate(&self) -> Result<()> {
        const TOL: f64 = 1e-12;
        let in_range = |v: f64, (lo, hi): (f64, f64)| v >= lo - TOL && v <= hi + TOL;
        match *self {
            BreakSpec::None | BreakSpec::Herding { .. } => Ok(()),
            BreakSpec::Overconfidence { target, intensity } => {
                if target == BreakTarget::Mixed {
                    return Err(Error::InvalidBreak(
                        "mixed target is only defined for sentiment".into(),
                    ));
                }
                if !(intensity > 0.0 && intensity.is_finite()) {
                    return Err(Error::InvalidBreak(format!(
                        "overconfidence intensity must be > 0, got {intensity}"
                    )));
                }
                Ok(())
            }
            BreakSpec::Sentiment {
                target,
                trend_shift,
                bias_shift,
                ..
            } => {
                if target.hits_trend() && !in_range(trend_shift, SENTIMENT_TREND_RANGE) {
                    return Err(Error::InvalidBreak(format!(
                        "sentiment trend shift {trend_shift} outside [0.04, 0.4]"
                    )));
                }
                if target.hits_bias() && !in_range(bias_shift, SENTIMENT_BIAS_RANGE) {
                    return Err(Error::InvalidBreak(format!(
                        "sentiment bias shift {bias_shift} outside [0.03, 0.3]"
                    )));
                }
                Ok(())
            }
        }
    }
}

/// Draw `n` strategies from the generator. Every slot consumes one `g` and
/// one `b` draw, including a forced fundamentalist, so the stream position
/// does not depend on `force_fundamentalist`.
pub fn generate_strategies<R: Rng + ?Sized>(
    spec: &StrategyGenSpec,
    n: usize,
    rng: &mut R,
) -> Result<Vec<Strategy>> {
    spec.validate()?;
    let g_dist =
        Normal::new(spec.g_mean, spec.g_sd).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let b_dist =
        Normal::new(spec.b_mean, spec.b_sd).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let mut out: Vec<Strategy> = (0..n)
        .map(|_| {
            let g = g_dist.sample(rng);
            let b = b_dist.sample(rng);
            Strategy::new(g, b)
        })
        .collect();
    if spec.force_fundamentalist {
        if let Some(first) = out.first_mut() {
            *first = Strategy::FUNDAMENTALIST;
        }
    }
    Ok(out)
}

/// Scale the targeted parameters by `1 + c`; signs are preserved.
pub fn apply_overconfidence(s: &Strategy, spec: &BreakSpec) -> Result<Strategy> {
    let BreakSpec::Overconfidence { target, intensity } = *spec else {
        return Err(Error::InvalidBreak(
            "expected an overconfidence spec".into(),
        ));
    };
    spec.validate()?;
    let scale = 1.0 + intensity;
    let mut out = *s;
    if target.hits_trend() {
        out.g *= scale;
    }
    if target.hits_bias() {
        out.b *= scale;
    }
    Ok(out)
}

/// Shift the generator means. The mixed target moves trend and bias in
/// opposite directions, with the bias taking the spec's sign.
pub fn apply_sentiment(spec: &StrategyGenSpec, brk: &BreakSpec) -> Result<StrategyGenSpec> {
    let BreakSpec::Sentiment {
        target,
        sign,
        trend_shift,
        bias_shift,
    } = *brk
    else {
        return Err(Error::InvalidBreak("expected a sentiment spec".into()));
    };
    brk.validate()?;
    let s = sign.factor();
    let mut out = spec.clone();
    match target {
        BreakTarget::BiasOnly => out.b_mean += s * bias_shift,
        BreakTarget::TrendOnly => out.g_mean += s * trend_shift,
        BreakTarget::Both => {
            out.g_mean += s * trend_shift;
            out.b_mean += s * bias_shift;
        }
        BreakTarget::Mixed => {
            out.g_mean -= s * trend_shift;
            out.b_mean += s * bias_shift;
        }
    }
    Ok(out)
}

/// How a sentiment element reaches the strategies at the break.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SentimentMode {
    /// Each strategy keeps its draws, moved by the generator's mean shift.
    /// `g + shift` has the shifted generator's distribution, and the before
    /// and after regimes share the same underlying draws.
    #[default]
    Shift,
    /// Fresh draws from the shifted generator.
    Redraw,
}

/// Move a strategy by the mean shift between two generators.
pub fn shift_strategy(s: &Strategy, from: &StrategyGenSpec, to: &StrategyGenSpec) -> Strategy {
    Strategy {
        g: s.g + (to.g_mean - from.g_mean),
        b: s.b + (to.b_mean - from.b_mean),
        ..*s
    }
}

/// Index of the best strategy by `fitness` excluding `skip`; the lowest
/// index wins ties.
pub fn best_other(fitness: &[f64], skip: usize) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &u) in fitness.iter().enumerate() {
        if i == skip || u.is_nan() {
            continue;
        }
        match best {
            Some(j) if fitness[j] >= u => {}
            _ => best = Some(i),
        }
    }
    best
}

/// The herder takes over `(g, b)` of the previous period's most profitable
/// other strategy. Its own memory length is kept.
pub fn apply_herding(
    strategies: &[Strategy],
    fitness_prev: &[f64],
    herd_index: usize,
) -> Result<Vec<Strategy>> {
    let mut out = strategies.to_vec();
    herd_in_place(&mut out, fitness_prev, herd_index)?;
    Ok(out)
}

pub(crate) fn herd_in_place(
    strategies: &mut [Strategy],
    fitness_prev: &[f64],
    herd_index: usize,
) -> Result<()> {
    let n = strategies.len();
    if n < 2 {
        return Err(Error::NothingToImitate(n));
    }
    if fitness_prev.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: fitness_prev.len(),
        });
    }
    if herd_index >= n {
        return Err(Error::InvalidBreak(format!(
            "herder index {herd_index} out of range for {n} strategies"
        )));
    }
    if let Some(best) = best_other(fitness_prev, herd_index) {
        let model = strategies[best];
        let herder = &mut strategies[herd_index];
        herder.g = model.g;
        herder.b = model.b;
    }
    Ok(())
}
