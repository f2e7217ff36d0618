//! Named experiment setups: the thirteen single-element rows, the four
//! extension families and combinations.

use serde::{Deserialize, Serialize};

use crate::behavior::{BreakSpec, BreakTarget, Sign};
use crate::error::{Error, Result};
use crate::montecarlo::{Extensions, RunConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Setup {
    /// Machine name, e.g. `sentiment+bias` or `herding,overconfidence-bias`.
    pub name: String,
    /// Row label for reports.
    pub label: String,
    pub breaks: Vec<BreakSpec>,
    #[serde(default)]
    pub extensions: Extensions,
}

impl Setup {
    /// Copy of `base` carrying this setup's elements at intensity `level`
    /// and its extension flags (flags already set in `base` stay set).
    pub fn apply(&self, base: &RunConfig, level: f64) -> RunConfig {
        let mut cfg = base.clone();
        cfg.breaks = self.breaks.iter().map(|b| b.with_level(level)).collect();
        let e = &mut cfg.extensions;
        e.fundamentalist_default |= self.extensions.fundamentalist_default;
        e.stochastic_params |= self.extensions.stochastic_params;
        e.memory |= self.extensions.memory;
        cfg
    }
}

const TARGETS: [(BreakTarget, &str, &str); 4] = [
    (BreakTarget::BiasOnly, "bias", " (bias)"),
    (BreakTarget::TrendOnly, "trend", " (trend)"),
    (BreakTarget::Mixed, "mix", " (mix)"),
    (BreakTarget::Both, "both", ""),
];

fn element(name: &str) -> Option<(BreakSpec, String)> {
    match name {
        "none" => return Some((BreakSpec::None, "No Behavioural Impact".into())),
        "herding" => return Some((BreakSpec::herding(), "Herding".into())),
        _ => {}
    }
    if let Some(t) = name.strip_prefix("overconfidence-") {
        let &(target, _, suffix) = TARGETS
            .iter()
            .find(|(tg, n, _)| *n == t && *tg != BreakTarget::Mixed)?;
        return Some((
            BreakSpec::overconfidence_at(target, 1.0),
            format!("Overconfidence{suffix}"),
        ));
    }
    let (sign, rest, mark) = if let Some(r) = name.strip_prefix("sentiment+") {
        (Sign::Positive, r, '+')
    } else {
        (Sign::Negative, name.strip_prefix("sentiment-")?, '-')
    };
    let &(target, _, suffix) = TARGETS.iter().find(|(_, n, _)| *n == rest)?;
    Some((
        BreakSpec::sentiment_at(target, sign, 1.0),
        format!("M. Sentiment{mark}{suffix}"),
    ))
}

fn short_label(label: &str) -> String {
    label
        .replace("Overconfidence", "Over.")
        .replace("M. Sentiment", "Sent.")
        .replace("Herding", "Herd.")
}

/// Parse a setup name: one element, or several joined by commas for a
/// combination. Elements are `none`, `herding`,
/// `overconfidence-{bias,trend,both}` and `sentiment{+,-}{bias,trend,mix,both}`.
pub fn by_name(name: &str) -> Result<Setup> {
    let parts: Vec<&str> = name.split(',').map(str::trim).collect();
    let mut breaks = Vec::new();
    let mut labels = Vec::new();
    for p in &parts {
        let (b, label) = element(p)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown setup element '{p}'")))?;
        if b.is_none() && parts.len() > 1 {
            return Err(Error::InvalidConfig("'none' cannot be combined".into()));
        }
        if !b.is_none() {
            breaks.push(b);
        }
        labels.push(label);
    }
    let label = if labels.len() == 1 {
        labels.pop().unwrap()
    } else {
        labels
            .iter()
            .map(|l| short_label(l))
            .collect::<Vec<_>>()
            .join(" & ")
    };
    let setup = Setup {
        name: parts.join(","),
        label,
        breaks,
        extensions: Extensions::default(),
    };
    RunConfig {
        breaks: setup.breaks.clone(),
        ..RunConfig::default()
    }
    .validate()?;
    Ok(setup)
}

pub const SINGLE_ELEMENT: [&str; 13] = [
    "none",
    "herding",
    "overconfidence-bias",
    "overconfidence-trend",
    "overconfidence-both",
    "sentiment+bias",
    "sentiment+trend",
    "sentiment+mix",
    "sentiment+both",
    "sentiment-bias",
    "sentiment-trend",
    "sentiment-mix",
    "sentiment-both",
];

/// Single-element setups re-run under each extension.
pub const EXTENSION_BASE: [&str; 8] = [
    "herding",
    "overconfidence-bias",
    "overconfidence-trend",
    "overconfidence-both",
    "sentiment+bias",
    "sentiment+trend",
    "sentiment+mix",
    "sentiment+both",
];

pub const COMBINATIONS: [&str; 4] = [
    "herding,overconfidence-bias",
    "herding,sentiment+bias",
    "overconfidence-bias,sentiment+bias",
    "herding,overconfidence-bias,sentiment+bias",
];

pub fn single_element() -> Vec<Setup> {
    SINGLE_ELEMENT.iter().map(|n| by_name(n).unwrap()).collect()
}

/// Fundamentalists, stochastic parameters, combinations, memory.
pub fn extensions() -> Vec<Setup> {
    let family = |prefix: &str, ext: Extensions| -> Vec<Setup> {
        EXTENSION_BASE
            .iter()
            .map(|n| {
                let mut s = by_name(n).unwrap();
                s.name = format!("{prefix}:{}", s.name);
                s.label = format!("{prefix}: {}", s.label);
                s.extensions = ext;
                s
            })
            .collect()
    };
    let mut out = family(
        "fundamentalists",
        Extensions {
            fundamentalist_default: true,
            ..Default::default()
        },
    );
    out.extend(family(
        "stochastic",
        Extensions {
            stochastic_params: true,
            ..Default::default()
        },
    ));
    out.extend(COMBINATIONS.iter().map(|n| {
        let mut s = by_name(n).unwrap();
        s.label = format!("combination: {}", s.label);
        s
    }));
    out.extend(family(
        "memory",
        Extensions {
            memory: true,
            ..Default::default()
        },
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_element_rows() {
        let rows = single_element();
        assert_eq!(rows.len(), 13);
        assert!(rows[0].breaks.is_empty());
        assert_eq!(rows[0].label, "No Behavioural Impact");
        assert_eq!(rows[4].label, "Overconfidence");
        assert_eq!(rows[7].label, "M. Sentiment+ (mix)");
        assert_eq!(rows[12].label, "M. Sentiment-");
    }

    #[test]
    fn level_one_is_range_maximum() {
        let s = by_name("sentiment+bias").unwrap();
        assert_eq!(
            s.breaks[0],
            BreakSpec::Sentiment {
                target: BreakTarget::BiasOnly,
                sign: Sign::Positive,
                trend_shift: 0.4,
                bias_shift: 0.3
            }
        );
        let cfg = s.apply(&RunConfig::default(), 0.5);
        match cfg.breaks[0] {
            BreakSpec::Sentiment { bias_shift, .. } => assert!((bias_shift - 0.15).abs() < 1e-15),
            _ => unreachable!(),
        }
    }

    #[test]
    fn combinations_parse() {
        let s = by_name("herding, overconfidence-bias ,sentiment+bias").unwrap();
        assert_eq!(s.breaks.len(), 3);
        assert_eq!(s.label, "Herd. & Over. (bias) & Sent.+ (bias)");
        assert!(by_name("herding,herding").is_err());
        assert!(by_name("none,herding").is_err());
        assert!(by_name("overconfidence-mix").is_err());
        assert!(by_name("sentiment*bias").is_err());
    }

    #[test]
    fn extension_families() {
        let ext = extensions();
        assert_eq!(ext.len(), 28);
        assert!(ext[..8].iter().all(|s| s.extensions.fundamentalist_default));
        assert!(ext[8..16].iter().all(|s| s.extensions.stochastic_params));
        assert!(ext[16..20].iter().all(|s| s.breaks.len() >= 2));
        assert!(ext[20..].iter().all(|s| s.extensions.memory));
    }
}
