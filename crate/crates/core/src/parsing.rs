//! Minimum-piece parsing of a string over a dictionary of node strings.
//!
//! Parsing is a shortest path over string positions `0..=N` where every
//! dictionary entry `t[i..j]` contributes a unit edge `i -> j`. The
//! [`Matcher`] is a symbol trie that enumerates the entries starting at a
//! position, so the whole parse is `O(N * depth)`.

use std::collections::HashMap;

use thiserror::Error;

use crate::model::{Alphabet, LexisDag, NodeId, Symbol, SymbolString};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("no tiling of the suffix starting at position {0}")]
    NoParse(usize),
}

/// Strings of all sources and intermediates, keyed to their node.
#[derive(Clone, Debug, Default)]
pub struct Dictionary {
    entries: HashMap<SymbolString, NodeId>,
}

impl Dictionary {
    /// Only the single-symbol source strings.
    pub fn sources(alphabet: Alphabet) -> Self {
        let entries = alphabet.symbols().map(|s| (SymbolString::new(vec![s]), LexisDag::source_id(s))).collect();
        Self { entries }
    }

    /// Sources plus every intermediate of `dag`.
    pub fn from_dag(dag: &LexisDag) -> Self {
        let mut dict = Self::sources(dag.alphabet());
        for id in dag.intermediates() {
            dict.insert(dag.string(id).clone(), id);
        }
        dict
    }

    pub fn insert(&mut self, string: SymbolString, id: NodeId) {
        self.entries.insert(string, id);
    }

    pub fn get(&self, string: &[Symbol]) -> Option<NodeId> {
        self.entries.get(string).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SymbolString, NodeId)> {
        self.entries.iter().map(|(s, &id)| (s, id))
    }
}

/// A minimum-piece tiling of a string.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Parse {
    pub pieces: Vec<NodeId>,
}

impl Parse {
    pub fn cost(&self) -> usize {
        self.pieces.len()
    }
}

#[derive(Clone, Debug, Default)]
struct TrieNode {
    /// Sorted by symbol.
    children: Vec<(Symbol, u32)>,
    entry: Option<NodeId>,
}

/// Multi-pattern index over dictionary strings.
#[derive(Clone, Debug)]
pub struct Matcher {
    nodes: Vec<TrieNode>,
}

impl Default for Matcher {
    fn default() -> Self {
        Self { nodes: vec![TrieNode::default()] }
    }
}

impl Matcher {
    pub fn build(dict: &Dictionary) -> Self {
        let mut matcher = Self::default();
        for (s, id) in dict.iter() {
            matcher.insert(s, id);
        }
        matcher
    }

    pub fn from_dag(dag: &LexisDag) -> Self {
        let mut matcher = Self::default();
        for s in dag.alphabet().symbols() {
            matcher.insert(&[s], LexisDag::source_id(s));
        }
        for id in dag.intermediates() {
            matcher.insert(dag.string(id), id);
        }
        matcher
    }

    fn child(&self, node: u32, symbol: Symbol) -> Option<u32> {
        let children = &self.nodes[node as usize].children;
        children.binary_search_by_key(&symbol, |&(s, _)| s).ok().map(|i| children[i].1)
    }

    pub fn insert(&mut self, string: &[Symbol], id: NodeId) {
        let mut cur = 0u32;
        for &s in string {
            cur = match self.child(cur, s) {
                Some(next) => next,
                None => {
                    let next = self.nodes.len() as u32;
                    self.nodes.push(TrieNode::default());
                    let children = &mut self.nodes[cur as usize].children;
                    let at = children.partition_point(|&(c, _)| c < s);
                    children.insert(at, (s, next));
                    next
                }
            };
        }
        self.nodes[cur as usize].entry = Some(id);
    }

    pub fn remove(&mut self, string: &[Symbol]) -> Option<NodeId> {
        let mut cur = 0u32;
        for &s in string {
            cur = self.child(cur, s)?;
        }
        self.nodes[cur as usize].entry.take()
    }

    /// Entries starting at `start`, as `(length, node)` by increasing length.
    pub fn matches_at<'a>(&'a self, query: &'a [Symbol], start: usize) -> impl Iterator<Item = (usize, NodeId)> + 'a {
        let mut cur = Some(0u32);
        let mut len = 0;
        std::iter::from_fn(move || loop {
            let node = cur?;
            if start + len >= query.len() {
                cur = None;
                return None;
            }
            cur = self.child(node, query[start + len]);
            len += 1;
            if let Some(next) = cur {
                if let Some(id) = self.nodes[next as usize].entry {
                    return Some((len, id));
                }
            }
        })
    }

    /// All matches, grouped by start position.
    pub fn matches(&self, query: &[Symbol]) -> Vec<Vec<(usize, NodeId)>> {
        (0..query.len()).map(|i| self.matches_at(query, i).collect()).collect()
    }

    /// Minimum number of dictionary pieces tiling `t`. Among equal-cost
    /// parses the longest piece is taken at each step from the left.
    pub fn parse(&self, t: &[Symbol]) -> Result<Parse, ParseError> {
        let n = t.len();
        const UNREACHABLE: usize = usize::MAX;
        // best[i]: fewest pieces for the suffix t[i..].
        let mut best = vec![UNREACHABLE; n + 1];
        best[n] = 0;
        for i in (0..n).rev() {
            for (len, _) in self.matches_at(t, i) {
                if best[i + len] != UNREACHABLE {
                    best[i] = best[i].min(best[i + len] + 1);
                }
            }
        }
        let mut pieces = Vec::with_capacity(best[0].min(n));
        let mut i = 0;
        while i < n {
            if best[i] == UNREACHABLE {
                return Err(ParseError::NoParse(i));
            }
            let (len, id) = self
                .matches_at(t, i)
                .filter(|&(len, _)| best[i + len] != UNREACHABLE && best[i + len] + 1 == best[i])
                .last()
                .expect("a reachable position has an optimal continuation");
            pieces.push(id);
            i += len;
        }
        Ok(Parse { pieces })
    }
}

/// Optimal parse of `t` over `dict`.
pub fn optimal_parse(t: &[Symbol], dict: &Dictionary) -> Result<Parse, ParseError> {
    Matcher::build(dict).parse(t)
}
