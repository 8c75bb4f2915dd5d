//! Crate-wide error type.
//!
//! Every fallible operation in this crate returns [`Result`]. Variants are
//! grouped by what the caller can do about them: fix the input (`Graph`,
//! `Domain`, `Dimension`, `Parse`, ...), relax the request (`Infeasible`,
//! `SparsifierCap`, `TooLarge`), or treat as a hard numerical failure
//! (`Numerical`).

use std::fmt;
use std::io;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug)]
pub enum Error {
    /// Structural problem while building or transforming a graph
    /// (self-loop, non-positive weight, out-of-range vertex id, empty input).
    Graph(String),
    /// A duplicate undirected edge was rejected by the dedupe policy.
    DuplicateEdge { u: usize, v: usize },
    /// The operation requires a connected graph.
    Disconnected(String),
    /// A parameter lies outside its documented domain.
    Domain(String),
    /// A per-node vector does not match the graph's node count.
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    /// Eigendecomposition or factorization failure.
    Numerical(String),
    /// The optimization problem has an empty feasible set.
    Infeasible(String),
    /// The sparsifier could not certify the requested tolerance within the
    /// edge cap; `achieved_epsilon` is the best certified value.
    SparsifierCap {
        requested_epsilon: f64,
        achieved_epsilon: f64,
        edge_cap: usize,
    },
    /// The instance is too large for an exhaustive oracle.
    TooLarge(String),
    /// Malformed text input; `line` is 1-based.
    Parse { line: usize, message: String },
    /// Underlying I/O failure.
    Io(io::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Graph(msg) => write!(f, "graph error: {msg}"),
            Error::DuplicateEdge { u, v } => {
                write!(f, "duplicate edge ({u}, {v}) rejected by dedupe policy")
            }
            Error::Disconnected(msg) => write!(f, "graph not connected: {msg}"),
            Error::Domain(msg) => write!(f, "{msg}"),
            Error::Dimension {
                what,
                expected,
                got,
            } => write!(f, "{what} has length {got}, expected {expected}"),
            Error::Numerical(msg) => write!(f, "numerical failure: {msg}"),
            Error::Infeasible(msg) => write!(f, "infeasible problem: {msg}"),
            Error::SparsifierCap {
                requested_epsilon,
                achieved_epsilon,
                edge_cap,
            } => write!(
                f,
                "edge cap {edge_cap} is too small for epsilon = {requested_epsilon}; \
                 best achieved epsilon = {achieved_epsilon}"
            ),
            Error::TooLarge(msg) => write!(f, "instance too large: {msg}"),
            Error::Parse { line, message } => write!(f, "line {line}: {message}"),
            Error::Io(err) => write!(f, "io error: {err}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(err) => Some(err),
            _ => None,
        }
    }
}

impl From<io::Error> for Error {
    fn from(err: io::Error) -> Self {
        Error::Io(err)
    }
}

impl Error {
    /// True for failures of the numerical machinery itself (as opposed to
    /// bad input); the CLI maps these to a distinct exit code.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Numerical(_) | Error::Infeasible(_) | Error::SparsifierCap { .. }
        )
    }
}
