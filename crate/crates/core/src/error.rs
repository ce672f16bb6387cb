use std::fmt;

use serde::{Deserialize, Serialize};

/// Which stopping threshold tripped a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BlowUpReason {
    /// `K^m_inf` exceeded the curvature cap.
    CurvatureCap,
    /// Polygon length fell below the floor relative to the initial length.
    LengthFloor,
    /// Some length element collapsed relative to the mean.
    MinLengthElement,
}

impl fmt::Display for BlowUpReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BlowUpReason::CurvatureCap => "curvature cap",
            BlowUpReason::LengthFloor => "length floor",
            BlowUpReason::MinLengthElement => "minimum length element",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("degenerate segment at index {j}: length element {q:e} below floor")]
    DegenerateSegment { j: usize, q: f64 },

    #[error("hairpin singularity at vertex {j}: adjacent tangents are antiparallel")]
    HairpinSingularity { j: usize },

    #[error("cyclic system is not strictly diagonally dominant in row {row}")]
    NotDiagonallyDominant { row: usize },

    #[error("cyclic system pivot underflow in row {row}")]
    SingularSystem { row: usize },

    #[error("time {t} is at or beyond the extinction time {extinction}")]
    BeyondExtinction { t: f64, extinction: f64 },

    #[error("radius collapsed at t = {t} before the requested end time")]
    ExtinctBefore { t: f64 },

    #[error("adaptive step size underflow at t = {t}")]
    StepSizeUnderflow { t: f64 },

    #[error("blow-up detected at t = {t} ({reason})")]
    BlowUpDetected { reason: BlowUpReason, t: f64 },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

pub type Result<T> = std::result::Result<T, Error>;
