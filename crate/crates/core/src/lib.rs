//! Heterogeneous-agent asset pricing with behavioural structural breaks,
//! Monte Carlo experiments and before/after distribution tests.

pub mod behavior;
pub mod compare;
pub mod empirical;
pub mod error;
pub mod model;
pub mod montecarlo;
pub mod setups;
pub mod stats;

pub use error::{Error, Result};
