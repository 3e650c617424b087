//! Rate estimation for Exponential durations observed under double truncation.
//!
//! Units are born uniformly over a window of length `G` before the study
//! begins and are observed only if their duration ends within the
//! following observation window of length `s`. [`model`] holds the closed
//! forms of that design, [`estimator`] the score-root MLE with its standard
//! error and the naive srs-design comparison, [`sampling`] and
//! [`montecarlo`] the simulation study, and [`cli`] the command-line front end.

pub mod cli;
pub mod error;
pub mod estimator;
pub mod model;
pub mod montecarlo;
pub mod numeric;
pub mod sampling;

pub use error::{Error, Result};
pub use estimator::{estimate, fit_mle, fit_srs, Boundary, EstimateReport, SufficientStats};
pub use model::{ModelConfig, SecondMomentMethod, Theta};
pub use montecarlo::{SimulationReport, SimulationScenario};
pub use sampling::{LatentSample, SeedSpec, TruncatedSample};
