use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use super::{Alphabet, NodeId, NodeKind, Symbol, SymbolString};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DagError {
    #[error("alphabet size must be between 2 and u32::MAX, got {0}")]
    AlphabetSize(usize),
    #[error("strings must contain at least one symbol")]
    EmptyString,
    #[error("symbol {0} is outside the alphabet")]
    InvalidSymbol(Symbol),
    #[error("node {0} does not exist")]
    UnknownNode(NodeId),
    #[error("node {0} is not a target")]
    NotATarget(NodeId),
    #[error("node {0} cannot be used as a piece")]
    InvalidPiece(NodeId),
    #[error("a target with the same string already exists ({0})")]
    DuplicateTarget(NodeId),
    #[error("an intermediate with the same string already exists ({0})")]
    DuplicateString(NodeId),
    #[error("occurrences overlap inside host {0}")]
    Overlap(NodeId),
    #[error("at least two occurrences are required, got {0}")]
    TooFewOccurrences(usize),
    #[error("an intermediate needs at least two pieces, got {0}")]
    TooFewPieces(usize),
    #[error("string does not occur in host {host} at position {position}")]
    Mismatch { host: NodeId, position: usize },
    #[error("occurrence in host {host} at position {position} does not align with its pieces")]
    Misaligned { host: NodeId, position: usize },
    #[error("occurrences are tiled by different pieces")]
    InconsistentTiling,
    #[error("pieces do not concatenate to the string of {0}")]
    Tiling(NodeId),
}

/// A concatenation edge: `S(from)` occurs in `S(to)` starting at the
/// 1-based position `index`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub from: NodeId,
    pub to: NodeId,
    pub index: usize,
}

#[derive(Clone, Debug)]
pub struct Node {
    pub(crate) kind: NodeKind,
    pub(crate) string: SymbolString,
    pub(crate) pieces: Vec<NodeId>,
    /// Out-neighbours with edge multiplicity.
    pub(crate) users: BTreeMap<NodeId, u32>,
    pub(crate) out_degree: usize,
}

impl Node {
    pub fn kind(&self) -> NodeKind {
        self.kind
    }

    pub fn string(&self) -> &SymbolString {
        &self.string
    }

    /// The parse form: in-neighbours in index order.
    pub fn pieces(&self) -> &[NodeId] {
        &self.pieces
    }

    pub fn in_degree(&self) -> usize {
        self.pieces.len()
    }

    pub fn out_degree(&self) -> usize {
        self.out_degree
    }

    /// Out-neighbours and the number of edges to each, in id order.
    pub fn users(&self) -> impl Iterator<Item = (NodeId, u32)> + '_ {
        self.users.iter().map(|(&id, &count)| (id, count))
    }
}

/// Outcome of materialising a repeated substring.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Addition {
    pub node: Option<NodeId>,
    /// Pieces left with a single user after rewiring, inlined into it.
    pub inlined: Vec<NodeId>,
    /// Pieces left unused after rewiring.
    pub deleted: Vec<NodeId>,
}

#[derive(Clone, Debug)]
pub struct LexisDag {
    alphabet: Alphabet,
    nodes: Vec<Option<Node>>,
    intermediate_index: HashMap<SymbolString, NodeId>,
    target_index: HashMap<SymbolString, NodeId>,
}

impl LexisDag {
    /// A DAG holding only the sources of `alphabet`.
    pub fn new(alphabet: Alphabet) -> Self {
        let nodes = alphabet
            .symbols()
            .map(|s| {
                Some(Node {
                    kind: NodeKind::Source,
                    string: SymbolString::new(vec![s]),
                    pieces: Vec::new(),
                    users: BTreeMap::new(),
                    out_degree: 0,
                })
            })
            .collect();
        Self { alphabet, nodes, intermediate_index: HashMap::new(), target_index: HashMap::new() }
    }

    /// The flat DAG: every target tiled directly by sources.
    pub fn flat<'a, I>(alphabet: Alphabet, targets: I) -> Result<Self, DagError>
    where
        I: IntoIterator<Item = &'a SymbolString>,
    {
        let mut dag = Self::new(alphabet);
        for t in targets {
            dag.add_flat_target(t.clone())?;
        }
        Ok(dag)
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn source_id(symbol: Symbol) -> NodeId {
        NodeId(symbol)
    }

    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.nodes.get(id.index()).and_then(Option::as_ref)
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.node(id).is_some()
    }

    pub(crate) fn get(&self, id: NodeId) -> &Node {
        self.node(id).unwrap_or_else(|| panic!("node {id} is not live"))
    }

    pub(crate) fn get_mut(&mut self, id: NodeId) -> &mut Node {
        self.nodes[id.index()].as_mut().unwrap_or_else(|| panic!("node {id} is not live"))
    }

    /// One past the largest id ever allocated; useful for dense side tables.
    pub fn id_bound(&self) -> usize {
        self.nodes.len()
    }

    pub fn kind(&self, id: NodeId) -> Option<NodeKind> {
        self.node(id).map(|n| n.kind)
    }

    pub fn string(&self, id: NodeId) -> &SymbolString {
        &self.get(id).string
    }

    pub fn pieces(&self, id: NodeId) -> &[NodeId] {
        &self.get(id).pieces
    }

    /// Live nodes in id order.
    pub fn nodes(&self) -> impl Iterator<Item = (NodeId, &Node)> + '_ {
        self.nodes.iter().enumerate().filter_map(|(i, n)| n.as_ref().map(|n| (NodeId(i as u32), n)))
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes().map(|(id, _)| id)
    }

    fn ids_of(&self, kind: NodeKind) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes().filter(move |(_, n)| n.kind == kind).map(|(id, _)| id)
    }

    pub fn sources(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.ids_of(NodeKind::Source)
    }

    pub fn intermediates(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.ids_of(NodeKind::Intermediate)
    }

    pub fn targets(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.ids_of(NodeKind::Target)
    }

    pub fn target_count(&self) -> usize {
        self.target_index.len()
    }

    pub fn intermediate_count(&self) -> usize {
        self.intermediate_index.len()
    }

    /// Total number of edges, `Σ d_in(v)`.
    pub fn edge_cost(&self) -> usize {
        self.nodes().map(|(_, n)| n.pieces.len()).sum()
    }

    /// Cumulative length of all target strings.
    pub fn total_target_length(&self) -> usize {
        self.targets().map(|t| self.get(t).string.len()).sum()
    }

    pub fn intermediate_by_string(&self, s: &[Symbol]) -> Option<NodeId> {
        self.intermediate_index.get(s).copied()
    }

    pub fn target_by_string(&self, s: &[Symbol]) -> Option<NodeId> {
        self.target_index.get(s).copied()
    }

    /// Target strings in id order.
    pub fn target_strings(&self) -> Vec<SymbolString> {
        self.targets().map(|t| self.get(t).string.clone()).collect()
    }

    /// All edges, ordered by destination then index.
    pub fn edges(&self) -> Vec<Edge> {
        let mut edges = Vec::with_capacity(self.edge_cost());
        for (to, node) in self.nodes() {
            let mut offset = 1;
            for &from in &node.pieces {
                edges.push(Edge { from, to, index: offset });
                offset += self.get(from).string.len();
            }
        }
        edges
    }

    fn check_string(&self, s: &[Symbol]) -> Result<(), DagError> {
        if s.is_empty() {
            return Err(DagError::EmptyString);
        }
        match s.iter().find(|&&c| !self.alphabet.contains(c)) {
            Some(&c) => Err(DagError::InvalidSymbol(c)),
            None => Ok(()),
        }
    }

    fn check_piece(&self, piece: NodeId) -> Result<&Node, DagError> {
        let node = self.node(piece).ok_or(DagError::UnknownNode(piece))?;
        if node.kind == NodeKind::Target {
            return Err(DagError::InvalidPiece(piece));
        }
        Ok(node)
    }

    pub(crate) fn concat(&self, pieces: &[NodeId]) -> Result<SymbolString, DagError> {
        let mut out = Vec::new();
        for &p in pieces {
            out.extend_from_slice(&self.check_piece(p)?.string);
        }
        Ok(SymbolString::new(out))
    }

    fn alloc(&mut self, node: Node) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        let pieces = node.pieces.clone();
        self.nodes.push(Some(node));
        for p in pieces {
            self.add_use(p, id, 1);
        }
        id
    }

    pub(crate) fn add_use(&mut self, piece: NodeId, user: NodeId, count: u32) {
        let node = self.get_mut(piece);
        *node.users.entry(user).or_insert(0) += count;
        node.out_degree += count as usize;
    }

    pub(crate) fn drop_use(&mut self, piece: NodeId, user: NodeId, count: u32) {
        let node = self.get_mut(piece);
        let entry = node.users.get_mut(&user).unwrap_or_else(|| panic!("{user} does not use {piece}"));
        assert!(*entry >= count, "{user} uses {piece} fewer than {count} times");
        *entry -= count;
        if *entry == 0 {
            node.users.remove(&user);
        }
        node.out_degree -= count as usize;
    }

    /// Adds a target tiled by `pieces` (sources or intermediates).
    pub fn add_target(&mut self, string: SymbolString, pieces: Vec<NodeId>) -> Result<NodeId, DagError> {
        self.check_string(&string)?;
        if let Some(&existing) = self.target_index.get(&string) {
            return Err(DagError::DuplicateTarget(existing));
        }
        let next = NodeId(self.nodes.len() as u32);
        if pieces.is_empty() || self.concat(&pieces)? != string {
            return Err(DagError::Tiling(next));
        }
        let id = self.alloc(Node {
            kind: NodeKind::Target,
            string: string.clone(),
            pieces,
            users: BTreeMap::new(),
            out_degree: 0,
        });
        self.target_index.insert(string, id);
        Ok(id)
    }

    /// Adds a target tiled symbol by symbol.
    pub fn add_flat_target(&mut self, string: SymbolString) -> Result<NodeId, DagError> {
        self.check_string(&string)?;
        let pieces = string.iter().map(|&s| Self::source_id(s)).collect();
        self.add_target(string, pieces)
    }

    /// Materialises `s` as a new intermediate node. Each occurrence is a host
    /// node and the 1-based symbol position of `s` inside it; the span must
    /// start and end on piece boundaries of the host, and every span must be
    /// tiled by the same pieces, which become the new node's parse form.
    pub fn add_intermediate(
        &mut self,
        s: &SymbolString,
        occurrences: &[(NodeId, usize)],
    ) -> Result<Addition, DagError> {
        self.check_string(s)?;
        if let Some(&existing) = self.intermediate_index.get(s) {
            return Err(DagError::DuplicateString(existing));
        }
        let mut spans: Vec<(NodeId, usize)> = occurrences.to_vec();
        spans.sort();
        for pair in spans.windows(2) {
            if pair[0].0 == pair[1].0 && pair[0].1 + s.len() > pair[1].1 {
                return Err(DagError::Overlap(pair[0].0));
            }
        }
        let mut tiling: Option<Vec<NodeId>> = None;
        let mut token_occurrences = Vec::with_capacity(occurrences.len());
        for &(host, position) in occurrences {
            let node = self.node(host).ok_or(DagError::UnknownNode(host))?;
            let start = position.checked_sub(1).ok_or(DagError::Mismatch { host, position })?;
            if node.string.get(start..start + s.len()) != Some(&s[..]) {
                return Err(DagError::Mismatch { host, position });
            }
            let misaligned = DagError::Misaligned { host, position };
            let mut offset = 0;
            let mut first = None;
            let mut last = None;
            for (i, &p) in node.pieces.iter().enumerate() {
                if offset == start {
                    first = Some(i);
                }
                offset += self.get(p).string.len();
                if offset == start + s.len() {
                    last = Some(i + 1);
                    break;
                }
            }
            let (Some(first), Some(last)) = (first, last) else {
                return Err(misaligned);
            };
            let tokens = &node.pieces[first..last];
            match &tiling {
                Some(t) if t.as_slice() != tokens => return Err(DagError::InconsistentTiling),
                Some(_) => {}
                None => tiling = Some(tokens.to_vec()),
            }
            token_occurrences.push((host, first));
        }
        let pieces = tiling.ok_or(DagError::TooFewOccurrences(0))?;
        self.add_intermediate_tokens(&pieces, &token_occurrences)
    }

    /// Materialises the token string `pieces` as a new intermediate, replacing
    /// each occurrence `(host, token position)` by a single edge from it.
    /// Pieces left with one user are inlined into the new node.
    pub fn add_intermediate_tokens(
        &mut self,
        pieces: &[NodeId],
        occurrences: &[(NodeId, usize)],
    ) -> Result<Addition, DagError> {
        if pieces.len() < 2 {
            return Err(DagError::TooFewPieces(pieces.len()));
        }
        if occurrences.len() < 2 {
            return Err(DagError::TooFewOccurrences(occurrences.len()));
        }
        let string = self.concat(pieces)?;
        if let Some(&existing) = self.intermediate_index.get(&string) {
            return Err(DagError::DuplicateString(existing));
        }
        self.check_occurrences(pieces, occurrences)?;
        let id = self.alloc(Node {
            kind: NodeKind::Intermediate,
            string: string.clone(),
            pieces: pieces.to_vec(),
            users: BTreeMap::new(),
            out_degree: 0,
        });
        self.intermediate_index.insert(string, id);
        self.splice_occurrences(id, pieces.len(), occurrences);
        let (inlined, deleted) = self.settle(pieces.iter().copied());
        Ok(Addition { node: Some(id), inlined, deleted })
    }

    /// Replaces each token-string occurrence by an edge from the existing
    /// intermediate `node`, whose string the tokens spell.
    pub(crate) fn rewire_to_existing(
        &mut self,
        node: NodeId,
        tokens: &[NodeId],
        occurrences: &[(NodeId, usize)],
    ) -> Result<Addition, DagError> {
        if self.concat(tokens)? != self.get(node).string {
            return Err(DagError::Tiling(node));
        }
        if occurrences.iter().any(|&(host, _)| host == node) {
            return Err(DagError::InvalidPiece(node));
        }
        self.check_occurrences(tokens, occurrences)?;
        self.splice_occurrences(node, tokens.len(), occurrences);
        let (inlined, deleted) = self.settle(tokens.iter().copied());
        Ok(Addition { node: None, inlined, deleted })
    }

    fn check_occurrences(&self, tokens: &[NodeId], occurrences: &[(NodeId, usize)]) -> Result<(), DagError> {
        let mut sorted = occurrences.to_vec();
        sorted.sort();
        for pair in sorted.windows(2) {
            if pair[0].0 == pair[1].0 && pair[0].1 + tokens.len() > pair[1].1 {
                return Err(DagError::Overlap(pair[0].0));
            }
        }
        for &(host, pos) in occurrences {
            let node = self.node(host).ok_or(DagError::UnknownNode(host))?;
            if node.pieces.get(pos..pos + tokens.len()) != Some(tokens) {
                return Err(DagError::Mismatch { host, position: pos });
            }
        }
        Ok(())
    }

    fn splice_occurrences(&mut self, replacement: NodeId, width: usize, occurrences: &[(NodeId, usize)]) {
        let mut sorted = occurrences.to_vec();
        // Descending positions keep earlier token indices valid.
        sorted.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)));
        for (host, pos) in sorted {
            let removed: Vec<NodeId> = self.get_mut(host).pieces.splice(pos..pos + width, [replacement]).collect();
            for p in removed {
                self.drop_use(p, host, 1);
            }
            self.add_use(replacement, host, 1);
        }
    }

    /// Replaces the single use of intermediate `id` by its own pieces and
    /// deletes it.
    pub(crate) fn inline(&mut self, id: NodeId) {
        let node = self.get(id);
        assert_eq!(node.kind, NodeKind::Intermediate);
        assert_eq!(node.out_degree, 1, "only single-use nodes can be inlined");
        let user = *node.users.keys().next().expect("single user");
        let pieces = node.pieces.clone();
        let pos = self.get(user).pieces.iter().position(|&p| p == id).expect("user holds the node");
        self.get_mut(user).pieces.splice(pos..pos + 1, pieces.iter().copied());
        for &p in &pieces {
            self.drop_use(p, id, 1);
            self.add_use(p, user, 1);
        }
        self.remove_node(id);
    }

    /// Deletes an intermediate with no users.
    pub(crate) fn delete_unused(&mut self, id: NodeId) {
        assert_eq!(self.get(id).out_degree, 0);
        let pieces = self.get(id).pieces.clone();
        for p in pieces {
            self.drop_use(p, id, 1);
        }
        self.remove_node(id);
    }

    /// Removes a target together with its in-edges.
    pub(crate) fn delete_target(&mut self, id: NodeId) {
        let pieces = self.get(id).pieces.clone();
        for p in pieces {
            self.drop_use(p, id, 1);
        }
        self.remove_node(id);
    }

    fn remove_node(&mut self, id: NodeId) {
        let node = self.nodes[id.index()].take().expect("live node");
        match node.kind {
            NodeKind::Intermediate => {
                self.intermediate_index.remove(&node.string);
            }
            NodeKind::Target => {
                self.target_index.remove(&node.string);
            }
            NodeKind::Source => panic!("sources are never removed"),
        }
    }

    /// Rebuilds a DAG from explicit node records. Ids are preserved; the
    /// result is not validated.
    pub(crate) fn from_parts(
        alphabet: Alphabet,
        records: Vec<(NodeId, NodeKind, SymbolString, Vec<NodeId>)>,
    ) -> Result<Self, DagError> {
        let mut dag = Self::new(alphabet);
        let bound = records.iter().map(|r| r.0.index() + 1).max().unwrap_or(0);
        if bound > dag.nodes.len() {
            dag.nodes.resize(bound, None);
        }
        for (id, kind, string, pieces) in &records {
            if kind == &NodeKind::Source {
                continue;
            }
            dag.check_string(string)?;
            if id.index() < alphabet.size() || dag.nodes[id.index()].is_some() {
                return Err(DagError::InvalidPiece(*id));
            }
            dag.nodes[id.index()] = Some(Node {
                kind: *kind,
                string: string.clone(),
                pieces: pieces.clone(),
                users: BTreeMap::new(),
                out_degree: 0,
            });
            let index = match kind {
                NodeKind::Intermediate => &mut dag.intermediate_index,
                _ => &mut dag.target_index,
            };
            if let Some(&other) = index.get(string) {
                return Err(match kind {
                    NodeKind::Intermediate => DagError::DuplicateString(other),
                    _ => DagError::DuplicateTarget(other),
                });
            }
            index.insert(string.clone(), *id);
        }
        for (id, kind, _, pieces) in &records {
            if kind == &NodeKind::Source {
                continue;
            }
            for &p in pieces {
                if !dag.contains(p) {
                    return Err(DagError::UnknownNode(p));
                }
                dag.add_use(p, *id, 1);
            }
        }
        Ok(dag)
    }

    /// The flat counterpart: same sources and target ids, no intermediates.
    pub fn flattened(&self) -> Self {
        let mut flat = Self::new(self.alphabet);
        flat.nodes.resize(self.nodes.len(), None);
        for t in self.targets().collect::<Vec<_>>() {
            let string = self.get(t).string.clone();
            let pieces: Vec<NodeId> = string.iter().map(|&s| Self::source_id(s)).collect();
            flat.nodes[t.index()] = Some(Node {
                kind: NodeKind::Target,
                string: string.clone(),
                pieces: pieces.clone(),
                users: BTreeMap::new(),
                out_degree: 0,
            });
            for p in pieces {
                flat.add_use(p, t, 1);
            }
            flat.target_index.insert(string, t);
        }
        flat
    }

    /// Expands `id` recursively down to sources.
    pub fn expand(&self, id: NodeId) -> SymbolString {
        let node = self.get(id);
        if node.kind == NodeKind::Source {
            return node.string.clone();
        }
        node.pieces.iter().flat_map(|&p| self.expand(p).into_vec()).collect()
    }
}
