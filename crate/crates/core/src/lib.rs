//! Hierarchy inference over symbol sequences.
//!
//! The crate builds Lexis-DAGs (minimum-edge hierarchies whose sources are
//! symbols and whose targets are strings), adjusts them incrementally as
//! targets are born and retired, and measures the resulting structure:
//! cost, depth, path-centrality cores and hourglass scores.

pub mod centrality;
pub mod engine;
pub mod glexis;
pub mod inclexis;
pub mod metrics;
pub mod model;
pub mod parsing;
pub mod targetgen;

pub use model::{
    Addition, Alphabet, DagError, DagSnapshot, DotOptions, Edge, LexisDag, Node, NodeId, NodeKind, PruneReport, Symbol,
    SymbolString, SymbolTable, ValidationReport, Violation,
};
