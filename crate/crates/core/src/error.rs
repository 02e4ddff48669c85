use thiserror::Error;

/// Errors produced by the engine, analysis and gate-lab layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("pattern of {pattern_w}x{pattern_h} at ({x}, {y}) escapes a {grid_w}x{grid_h} grid")]
    OutOfBounds {
        x: i64,
        y: i64,
        pattern_w: usize,
        pattern_h: usize,
        grid_w: usize,
        grid_h: usize,
    },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid rule string {0:?}")]
    Rule(String),

    #[error("pattern exceeded the size budget of {budget} cells after {steps} steps")]
    BudgetExceeded { budget: usize, steps: u64 },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("discovery failed: no {0} found")]
    DiscoveryFailure(String),

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("no {0} junction template is known")]
    NoJunction(String),

    #[error("layout kind {0} is not calibrated")]
    NotCalibrated(String),

    #[error("calibration exhausted {tried} candidates without a passing configuration")]
    CalibrationFailure {
        tried: usize,
        log: Box<crate::gatelab::calibrate::CalibrationLog>,
    },

    #[error("layout file: {0}")]
    Layout(String),
}

pub type Result<T> = std::result::Result<T, Error>;
