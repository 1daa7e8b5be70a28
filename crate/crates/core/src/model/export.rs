use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{Alphabet, DagError, LexisDag, NodeId, NodeKind, Symbol, SymbolString};

/// How symbols are rendered as text.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SymbolTable {
    /// Letters for alphabets up to 26 symbols, dotted integers otherwise.
    #[default]
    Auto,
    Letters,
    Digits,
    /// Integers joined by `.`.
    Dotted,
    Custom(Vec<String>),
}

impl SymbolTable {
    pub fn render(&self, alphabet: Alphabet, symbols: &[Symbol]) -> String {
        let table = match self {
            SymbolTable::Auto if alphabet.size() <= 26 => &SymbolTable::Letters,
            SymbolTable::Auto => &SymbolTable::Dotted,
            other => other,
        };
        match table {
            SymbolTable::Letters if alphabet.size() <= 26 => {
                symbols.iter().map(|&s| (b'a' + s as u8) as char).collect()
            }
            SymbolTable::Digits if alphabet.size() <= 10 => symbols.iter().map(|&s| (b'0' + s as u8) as char).collect(),
            SymbolTable::Custom(names) => {
                symbols.iter().map(|&s| names.get(s as usize).map(String::as_str).unwrap_or("?")).collect()
            }
            _ => symbols.iter().map(|s| s.to_string()).collect::<Vec<_>>().join("."),
        }
    }
}

#[derive(Clone, Debug)]
pub struct DotOptions {
    pub symbols: SymbolTable,
    /// Labels longer than this are cut and suffixed with `...`.
    pub label_width: usize,
    pub include_unused_sources: bool,
}

impl Default for DotOptions {
    fn default() -> Self {
        Self { symbols: SymbolTable::Auto, label_width: 24, include_unused_sources: false }
    }
}

/// Serializable form of a DAG. Sources are implicit; each edge is stored as
/// `[from, index]` with the 1-based index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DagSnapshot {
    pub alphabet: usize,
    pub nodes: Vec<NodeSnapshot>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeSnapshot {
    pub id: NodeId,
    pub kind: NodeKind,
    pub string: SymbolString,
    pub edges: Vec<(NodeId, usize)>,
}

impl LexisDag {
    pub fn to_dot(&self, opts: &DotOptions) -> String {
        let mut out = String::from("digraph lexis {\n  rankdir=BT;\n");
        for (id, node) in self.nodes() {
            if node.kind() == NodeKind::Source && node.out_degree() == 0 && !opts.include_unused_sources {
                continue;
            }
            let mut label = opts.symbols.render(self.alphabet(), node.string());
            if label.chars().count() > opts.label_width {
                label = label.chars().take(opts.label_width).collect::<String>() + "...";
            }
            let shape = match node.kind() {
                NodeKind::Source => "circle",
                NodeKind::Intermediate => "ellipse",
                NodeKind::Target => "box",
            };
            let _ = writeln!(out, "  {} [label=\"{}\", shape={}];", id.0, label.replace('"', "\\\""), shape);
        }
        for e in self.edges() {
            let _ = writeln!(out, "  {} -> {} [label=\"{}\"];", e.from.0, e.to.0, e.index);
        }
        out.push_str("}\n");
        out
    }

    pub fn snapshot(&self) -> DagSnapshot {
        let mut nodes: Vec<NodeSnapshot> = self
            .nodes()
            .filter(|(_, n)| n.kind() != NodeKind::Source)
            .map(|(id, n)| NodeSnapshot {
                id,
                kind: n.kind(),
                string: n.string().clone(),
                edges: Vec::with_capacity(n.in_degree()),
            })
            .collect();
        let mut slot = vec![usize::MAX; self.id_bound()];
        for (i, n) in nodes.iter().enumerate() {
            slot[n.id.index()] = i;
        }
        for e in self.edges() {
            nodes[slot[e.to.index()]].edges.push((e.from, e.index));
        }
        DagSnapshot { alphabet: self.alphabet().size(), nodes }
    }

    /// Rebuilds a DAG from a snapshot. Edge indices must describe a
    /// contiguous tiling; the result is otherwise not validated.
    pub fn from_snapshot(snapshot: &DagSnapshot) -> Result<Self, DagError> {
        let alphabet = Alphabet::new(snapshot.alphabet)?;
        let mut records = Vec::with_capacity(snapshot.nodes.len());
        for n in &snapshot.nodes {
            let mut edges = n.edges.clone();
            edges.sort_by_key(|&(_, index)| index);
            records.push((n.id, n.kind, n.string.clone(), edges.iter().map(|e| e.0).collect::<Vec<_>>()));
        }
        let dag = Self::from_parts(alphabet, records)?;
        for n in &snapshot.nodes {
            let mut edges = n.edges.clone();
            edges.sort_by_key(|&(_, index)| index);
            let mut offset = 1;
            for &(from, index) in &edges {
                if index != offset {
                    return Err(DagError::Tiling(n.id));
                }
                offset += dag.string(from).len();
            }
        }
        Ok(dag)
    }
}
