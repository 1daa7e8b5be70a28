//! Symbols, strings and the Lexis-DAG itself.
//!
//! A [`LexisDag`] stores every node's string together with its parse form:
//! the ordered pieces whose strings concatenate to it. Edges are never
//! stored separately; the edge `(piece, node, index)` exists for every piece
//! of a node's parse, with `index` the 1-based offset of the piece.

mod dag;
mod export;
mod prune;
mod validate;

use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

pub use dag::{Addition, DagError, Edge, LexisDag, Node};
pub use export::{DagSnapshot, DotOptions, NodeSnapshot, SymbolTable};
pub use prune::PruneReport;
pub use validate::{ValidationReport, Violation};

/// A source symbol, identified by its index in the alphabet.
pub type Symbol = u32;

/// Number of distinct source symbols.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Alphabet {
    size: usize,
}

impl Alphabet {
    pub fn new(size: usize) -> Result<Self, DagError> {
        if size < 2 || size > Symbol::MAX as usize {
            return Err(DagError::AlphabetSize(size));
        }
        Ok(Self { size })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn contains(&self, symbol: Symbol) -> bool {
        (symbol as usize) < self.size
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> {
        0..self.size as Symbol
    }
}

/// An ordered sequence of alphabet symbols.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SymbolString(Vec<Symbol>);

impl SymbolString {
    pub fn new(symbols: Vec<Symbol>) -> Self {
        Self(symbols)
    }

    pub fn as_slice(&self) -> &[Symbol] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<Symbol> {
        self.0
    }

    /// Maps `a`, `b`, ... to 0, 1, ...; handy for small hand-written examples.
    pub fn from_letters(text: &str) -> Self {
        text.bytes()
            .map(|b| {
                assert!(b.is_ascii_lowercase(), "not a lowercase letter: {}", b as char);
                Symbol::from(b - b'a')
            })
            .collect()
    }

    /// Maps ASCII digits to their numeric value.
    pub fn from_digits(text: &str) -> Self {
        text.bytes()
            .map(|b| {
                assert!(b.is_ascii_digit(), "not a digit: {}", b as char);
                Symbol::from(b - b'0')
            })
            .collect()
    }
}

impl Deref for SymbolString {
    type Target = [Symbol];

    fn deref(&self) -> &[Symbol] {
        &self.0
    }
}

impl AsRef<[Symbol]> for SymbolString {
    fn as_ref(&self) -> &[Symbol] {
        &self.0
    }
}

impl std::borrow::Borrow<[Symbol]> for SymbolString {
    fn borrow(&self) -> &[Symbol] {
        &self.0
    }
}

impl From<Vec<Symbol>> for SymbolString {
    fn from(symbols: Vec<Symbol>) -> Self {
        Self(symbols)
    }
}

impl From<&[Symbol]> for SymbolString {
    fn from(symbols: &[Symbol]) -> Self {
        Self(symbols.to_vec())
    }
}

impl FromIterator<Symbol> for SymbolString {
    fn from_iter<I: IntoIterator<Item = Symbol>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

/// Stable node identifier. Sources occupy ids `0..n`, so a source's id
/// equals its symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Source,
    Intermediate,
    Target,
}
