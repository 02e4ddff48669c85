//! Cellular-automaton engine and wave-based majority gate laboratory for the
//! Life-like rule B2/S2345.

pub mod engine;
pub mod error;
pub mod gatelab;
pub mod meanfield;
pub mod metrics;
pub mod pattern;
pub mod rle;
pub mod spectral;

pub use engine::{ActivityTrace, Grid, Rect, RuleSpec, SparseStepper};
pub use error::{Error, Result};
pub use metrics::{measure, Measurement, PatternMetrics};
pub use pattern::{Pattern, Transform};
