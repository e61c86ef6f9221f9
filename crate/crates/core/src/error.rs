// SPDX-License-Identifier: Apache-2.0

use std::fmt;

use crate::fabric::Rect;

/// A problem found while reading one of the line-oriented input formats.
///
/// `line` is 1-based; `0` means the problem concerns the file as a whole
/// (for example a required directive that never appeared).
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, message: impl Into<String>) -> Self {
        Self {
            line,
            message: message.into(),
        }
    }

    pub fn whole_file(message: impl Into<String>) -> Self {
        Self::new(0, message)
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "{}", self.message)
        } else {
            write!(f, "line {}: {}", self.line, self.message)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("rectangle {rect} lies outside the {width}x{height} cell grid")]
pub struct OutOfBounds {
    pub rect: Rect,
    pub width: u32,
    pub height: u32,
}

/// Failures of the planning pipeline.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PlanError {
    #[error("design does not fit the device: {0}")]
    Capacity(String),
    #[error("region `{0}` could not be placed")]
    Unplaceable(String),
    #[error("region `{region}` has no CLB demand; every region type needs CLBs")]
    NoLogic { region: String },
    #[error("terminal `{name}` offset {offset} is outside its edge (length {length})")]
    TerminalOffset { name: String, offset: u32, length: u32 },
    #[error("invalid parameter: {0}")]
    Param(String),
}
