//! The deviations-form adaptive belief system.
//!
//! Everything here is a pure function over explicit state: linear beliefs,
//! realised fitness (one lag or averaged over a memory window), logit
//! strategy fractions and the market-clearing price deviation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Belief parameters of one trader type.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Strategy {
    /// Trend extrapolation coefficient.
    pub g: f64,
    /// Bias, in price-deviation units.
    pub b: f64,
    /// Memory length in periods; 1 means no averaging.
    pub m: usize,
}

impl Strategy {
    pub const FUNDAMENTALIST: Strategy = Strategy {
        g: 0.0,
        b: 0.0,
        m: 1,
    };

    pub fn new(g: f64, b: f64) -> Self {
        Strategy { g, b, m: 1 }
    }

    pub fn with_memory(mut self, m: usize) -> Self {
        self.m = m;
        self
    }

    pub fn is_fundamentalist(&self) -> bool {
        self.g == 0.0 && self.b == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        if !self.g.is_finite() || !self.b.is_finite() {
            return Err(Error::Domain("strategy parameters must be finite"));
        }
        if self.m == 0 {
            return Err(Error::Domain("memory length must be at least 1"));
        }
        Ok(())
    }
}

/// Global market constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MarketConfig {
    /// Gross risk-free rate `1 + r`.
    pub gross_rate: f64,
    /// Intensity of choice.
    pub beta: f64,
    /// The product `a * sigma^2`; fitness is divided by it.
    pub risk_term: f64,
    /// Number of strategies.
    pub n_strategies: usize,
    /// Noise is drawn from `Uniform(-w, +w)`.
    pub noise_halfwidth: f64,
    /// Constant expected dividend, only used for price reconstruction.
    pub ybar: f64,
}

impl Default for MarketConfig {
    fn default() -> Self {
        MarketConfig {
            gross_rate: 1.1,
            beta: 300.0,
            risk_term: 1.0,
            n_strategies: 5,
            noise_halfwidth: 0.05,
            ybar: 1.0,
        }
    }
}

impl MarketConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if !(self.gross_rate.is_finite() && self.gross_rate > 1.0) {
            return bad("gross_rate must be > 1");
        }
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return bad("beta must be finite and >= 0");
        }
        if !(self.risk_term.is_finite() && self.risk_term > 0.0) {
            return bad("risk_term must be > 0");
        }
        if self.n_strategies == 0 {
            return bad("n_strategies must be >= 1");
        }
        if !(self.noise_halfwidth.is_finite() && self.noise_halfwidth >= 0.0) {
            return bad("noise_halfwidth must be >= 0");
        }
        if !(self.ybar.is_finite() && self.ybar > 0.0) {
            return bad("ybar must be > 0");
        }
        Ok(())
    }

    pub fn interest_rate(&self) -> f64 {
        self.gross_rate - 1.0
    }
}

/// Price deviation history plus the last fitness and fraction vectors.
///
/// The history is seeded with three zero deviations (the fundamental
/// equilibrium) and fractions start uniform.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketState {
    /// Deviations `x_t`, most recent last.
    pub x_history: Vec<f64>,
    pub fitness: Vec<f64>,
    pub fractions: Vec<f64>,
}

impl MarketState {
    pub fn new(n_strategies: usize) -> Self {
        Self::with_padding(n_strategies, 3)
    }

    /// Start from `pad` zero deviations. Memory runs need `max m + 3`.
    pub fn with_padding(n_strategies: usize, pad: usize) -> Self {
        let n = n_strategies.max(1);
        MarketState {
            x_history: vec![0.0; pad.max(3)],
            fitness: vec![0.0; n],
            fractions: vec![1.0 / n as f64; n],
        }
    }

    pub fn last(&self) -> f64 {
        *self.x_history.last().expect("history is never empty")
    }

    /// `(x_{t-1}, x_{t-2}, x_{t-3})` relative to the period about to be computed.
    pub fn lags(&self) -> (f64, f64, f64) {
        let n = self.x_history.len();
        (
            self.x_history[n - 1],
            self.x_history[n - 2],
            self.x_history[n - 3],
        )
    }
}

/// Present value of a constant dividend stream, `ybar / r`.
pub fn fundamental_price(ybar: f64, r: f64) -> Result<f64> {
    if r.is_nan() || r <= 0.0 {
        return Err(Error::Domain("undiscounted dividend stream: r must be > 0"));
    }
    Ok(ybar / r)
}

/// Linear belief `g * x_{t-1} + b`.
#[inline]
pub fn forecast(s: &Strategy, x_prev: f64) -> f64 {
    s.g * x_prev + s.b
}

/// Realised one-period fitness
/// `(x1 - R x2) (g x3 + b - R x2) / (a sigma^2)`
/// with `x1 = x_{t-1}`, `x2 = x_{t-2}`, `x3 = x_{t-3}`.
#[inline]
pub fn fitness_one_lag(x1: f64, x2: f64, x3: f64, s: &Strategy, cfg: &MarketConfig) -> f64 {
    let r = cfg.gross_rate;
    (x1 - r * x2) * (forecast(s, x3) - r * x2) / cfg.risk_term
}

/// Fitness averaged over the strategy's memory.
///
/// `window` holds deviations oldest first with `x_{t-1}` last, and must
/// supply at least `m + 2` values.
pub fn fitness_memory(window: &[f64], s: &Strategy, cfg: &MarketConfig) -> Result<f64> {
    let m = s.m.max(1);
    let needed = m + 2;
    if window.len() < needed {
        return Err(Error::InsufficientHistory {
            needed,
            got: window.len(),
        });
    }
    let n = window.len();
    let total: f64 = (0..m)
        .map(|l| {
            let x1 = window[n - 1 - l];
            let x2 = window[n - 2 - l];
            let x3 = window[n - 3 - l];
            fitness_one_lag(x1, x2, x3, s, cfg)
        })
        .sum();
    Ok(total / m as f64)
}

/// Multinomial logit fractions with max-subtraction.
pub fn update_fractions(fitness: &[f64], beta: f64) -> Result<Vec<f64>> {
    let mut out = vec![0.0; fitness.len()];
    update_fractions_into(fitness, beta, &mut out)?;
    Ok(out)
}

/// In-place variant used by the simulation loop.
pub fn update_fractions_into(fitness: &[f64], beta: f64, out: &mut [f64]) -> Result<()> {
    if fitness.is_empty() {
        return Err(Error::Empty);
    }
    if out.len() != fitness.len() {
        return Err(Error::LengthMismatch {
            expected: fitness.len(),
            got: out.len(),
        });
    }
    let max = fitness
        .iter()
        .map(|u| beta * u)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut z = 0.0;
    for (o, u) in out.iter_mut().zip(fitness) {
        *o = (beta * u - max).exp();
        z += *o;
    }
    for o in out.iter_mut() {
        *o /= z;
    }
    Ok(())
}

/// Market clearing: `x_t = (sum_h n_h (g_h x_{t-1} + b_h) + eps) / R`.
pub fn step_deviation(
    fractions: &[f64],
    strategies: &[Strategy],
    x_prev: f64,
    eps: f64,
    cfg: &MarketConfig,
) -> Result<f64> {
    if fractions.len() != strategies.len() {
        return Err(Error::LengthMismatch {
            expected: strategies.len(),
            got: fractions.len(),
        });
    }
    let demand: f64 = fractions
        .iter()
        .zip(strategies)
        .map(|(n, s)| n * forecast(s, x_prev))
        .sum();
    Ok((demand + eps) / cfg.gross_rate)
}

/// `p_t = x_t + p*`.
pub fn reconstruct_price(x: f64, cfg: &MarketConfig) -> Result<f64> {
    Ok(x + fundamental_price(cfg.ybar, cfg.interest_rate())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cfg() -> MarketConfig {
        MarketConfig::default()
    }

    #[test]
    fn fundamental_price_cases() {
        assert_eq!(fundamental_price(1.0, 0.1).unwrap(), 10.0);
        assert_eq!(fundamental_price(0.5, 0.1).unwrap(), 5.0);
        assert!(matches!(fundamental_price(1.0, 0.0), Err(Error::Domain(_))));
        assert!(fundamental_price(1.0, -0.2).is_err());
    }

    #[test]
    fn forecast_cases() {
        assert_eq!(forecast(&Strategy::FUNDAMENTALIST, 5.0), 0.0);
        assert_eq!(forecast(&Strategy::new(1.0, 0.0), 0.3), 0.3);
        assert_relative_eq!(
            forecast(&Strategy::new(0.4, 0.1), 1.0),
            0.5,
            epsilon = 1e-15
        );
    }

    #[test]
    fn fitness_one_lag_cases() {
        let c = cfg();
        assert_eq!(
            fitness_one_lag(0.0, 0.0, 0.0, &Strategy::new(0.7, -0.3), &c),
            0.0
        );
        assert_eq!(
            fitness_one_lag(1.0, 0.0, 0.0, &Strategy::new(0.5, 0.0), &c),
            0.0
        );
        // (1 - 1.1)(0.4 + 0.1 - 1.1) = (-0.1)(-0.6)
        assert_relative_eq!(
            fitness_one_lag(1.0, 1.0, 1.0, &Strategy::new(0.4, 0.1), &c),
            0.06,
            epsilon = 1e-12
        );
    }

    #[test]
    fn fitness_memory_cases() {
        let c = cfg();
        let s = Strategy::new(0.4, 0.1);
        let w = [0.3, -0.2, 0.9, 0.1];
        assert_eq!(
            fitness_memory(&w, &s, &c).unwrap(),
            fitness_one_lag(0.1, 0.9, -0.2, &s, &c)
        );
        assert_eq!(
            fitness_memory(&[0.0; 7], &s.with_memory(5), &c).unwrap(),
            0.0
        );
        assert_relative_eq!(
            fitness_memory(&[1.0; 5], &s.with_memory(3), &c).unwrap(),
            0.06,
            epsilon = 1e-12
        );
        assert!(matches!(
            fitness_memory(&[1.0; 4], &s.with_memory(3), &c),
            Err(Error::InsufficientHistory { needed: 5, got: 4 })
        ));
    }

    #[test]
    fn fractions_cases() {
        let n = update_fractions(&[7.0, -2.0, 0.5], 0.0).unwrap();
        for v in n {
            assert_relative_eq!(v, 1.0 / 3.0, epsilon = 1e-15);
        }
        let n = update_fractions(&[-4.2; 5], 123.0).unwrap();
        for v in n {
            assert_relative_eq!(v, 0.2, epsilon = 1e-15);
        }
        let n = update_fractions(&[2f64.ln(), 0.0], 1.0).unwrap();
        assert_relative_eq!(n[0], 2.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(n[1], 1.0 / 3.0, epsilon = 1e-15);
        assert!(matches!(update_fractions(&[], 1.0), Err(Error::Empty)));
    }

    #[test]
    fn fractions_survive_huge_exponents() {
        let n = update_fractions(&[10.0, -10.0, 0.0], 1000.0).unwrap();
        assert!(n.iter().all(|v| v.is_finite()));
        assert_eq!(n[0], 1.0);
    }

    #[test]
    fn step_cases() {
        let c = cfg();
        let fund = vec![Strategy::FUNDAMENTALIST; 3];
        assert_eq!(
            step_deviation(&[0.2, 0.3, 0.5], &fund, 4.0, 0.0, &c).unwrap(),
            0.0
        );

        let neutral = [Strategy::new(c.gross_rate, 0.0)];
        assert_relative_eq!(
            step_deviation(&[1.0], &neutral, 0.7, 0.0, &c).unwrap(),
            0.7,
            epsilon = 1e-15
        );

        let pair = [Strategy::new(0.2, 0.0), Strategy::new(0.0, 0.1)];
        assert_relative_eq!(
            step_deviation(&[0.5, 0.5], &pair, 1.0, 0.0, &c).unwrap(),
            0.15 / 1.1,
            epsilon = 1e-15
        );
        assert!(matches!(
            step_deviation(&[1.0], &pair, 1.0, 0.0, &c),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn reconstruct_cases() {
        let mut c = cfg();
        assert_relative_eq!(reconstruct_price(0.0, &c).unwrap(), 10.0, epsilon = 1e-12);
        assert_relative_eq!(reconstruct_price(-0.5, &c).unwrap(), 9.5, epsilon = 1e-12);
        c.ybar = 2.0;
        assert_relative_eq!(reconstruct_price(0.25, &c).unwrap(), 20.25, epsilon = 1e-12);
    }

    #[test]
    fn market_config_validation() {
        assert!(cfg().validate().is_ok());
        let mut c = cfg();
        c.gross_rate = 1.0;
        assert!(c.validate().is_err());
        let mut c = cfg();
        c.n_strategies = 0;
        assert!(c.validate().is_err());
        let mut c = cfg();
        c.risk_term = 0.0;
        assert!(c.validate().is_err());
    }
}
