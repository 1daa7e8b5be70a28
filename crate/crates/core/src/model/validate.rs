use std::collections::{BTreeMap, HashMap};

use super::{LexisDag, NodeId, NodeKind, SymbolString};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    SourceHasInEdges(NodeId),
    TargetHasOutEdges(NodeId),
    /// The pieces do not concatenate to the node's string.
    Tiling(NodeId),
    /// Intermediate used fewer than two times.
    Reuse {
        node: NodeId,
        out_degree: usize,
    },
    /// Intermediate built from fewer than two pieces.
    TooFewPieces(NodeId),
    DuplicateIntermediate {
        node: NodeId,
        other: NodeId,
    },
    DuplicateTarget {
        node: NodeId,
        other: NodeId,
    },
    /// A piece that is missing or is itself a target.
    BadPiece {
        node: NodeId,
        piece: NodeId,
    },
    /// Cached use counts disagree with the parse forms.
    UseCount(NodeId),
    /// The string index disagrees with the node table.
    Index(NodeId),
    Cycle(NodeId),
}

impl Violation {
    pub fn node(&self) -> NodeId {
        match *self {
            Violation::SourceHasInEdges(n)
            | Violation::TargetHasOutEdges(n)
            | Violation::Tiling(n)
            | Violation::TooFewPieces(n)
            | Violation::UseCount(n)
            | Violation::Index(n)
            | Violation::Cycle(n) => n,
            Violation::Reuse { node, .. }
            | Violation::DuplicateIntermediate { node, .. }
            | Violation::DuplicateTarget { node, .. }
            | Violation::BadPiece { node, .. } => node,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl LexisDag {
    /// Checks every structural constraint; an empty report means the DAG is
    /// a valid Lexis-DAG.
    pub fn validate(&self) -> ValidationReport {
        let mut out = Vec::new();
        let mut uses: BTreeMap<NodeId, BTreeMap<NodeId, u32>> = BTreeMap::new();
        let mut seen_intermediate: HashMap<&SymbolString, NodeId> = HashMap::new();
        let mut seen_target: HashMap<&SymbolString, NodeId> = HashMap::new();

        for (id, node) in self.nodes() {
            let mut pieces_ok = true;
            for &p in &node.pieces {
                match self.kind(p) {
                    None | Some(NodeKind::Target) => {
                        out.push(Violation::BadPiece { node: id, piece: p });
                        pieces_ok = false;
                    }
                    Some(_) => *uses.entry(p).or_default().entry(id).or_insert(0) += 1,
                }
            }
            match node.kind {
                NodeKind::Source => {
                    if !node.pieces.is_empty() {
                        out.push(Violation::SourceHasInEdges(id));
                    }
                }
                NodeKind::Intermediate => {
                    if node.pieces.len() < 2 {
                        out.push(Violation::TooFewPieces(id));
                    }
                    if node.out_degree < 2 {
                        out.push(Violation::Reuse { node: id, out_degree: node.out_degree });
                    }
                    if let Some(&other) = seen_intermediate.get(&node.string) {
                        out.push(Violation::DuplicateIntermediate { node: id, other });
                    } else {
                        seen_intermediate.insert(&node.string, id);
                    }
                    if self.intermediate_by_string(&node.string) != Some(id) {
                        out.push(Violation::Index(id));
                    }
                }
                NodeKind::Target => {
                    if node.out_degree != 0 {
                        out.push(Violation::TargetHasOutEdges(id));
                    }
                    if let Some(&other) = seen_target.get(&node.string) {
                        out.push(Violation::DuplicateTarget { node: id, other });
                    } else {
                        seen_target.insert(&node.string, id);
                    }
                    if self.target_by_string(&node.string) != Some(id) {
                        out.push(Violation::Index(id));
                    }
                }
            }
            if node.kind != NodeKind::Source && pieces_ok {
                let spelled: Vec<_> = node.pieces.iter().flat_map(|&p| self.get(p).string.iter().copied()).collect();
                if node.pieces.is_empty() || spelled != node.string.as_slice() {
                    out.push(Violation::Tiling(id));
                }
            }
        }
        if seen_intermediate.len() != self.intermediate_count() {
            if let Some(id) = self.intermediates().next() {
                out.push(Violation::Index(id));
            }
        }
        if seen_target.len() != self.target_count() {
            if let Some(id) = self.targets().next() {
                out.push(Violation::Index(id));
            }
        }

        for (id, node) in self.nodes() {
            let empty = BTreeMap::new();
            let expected = uses.get(&id).unwrap_or(&empty);
            let total: u32 = expected.values().sum();
            if &node.users != expected || node.out_degree != total as usize {
                out.push(Violation::UseCount(id));
            }
        }

        self.find_cycles(&mut out);
        ValidationReport { violations: out }
    }

    fn find_cycles(&self, out: &mut Vec<Violation>) {
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut state = vec![0u8; self.id_bound()];
        for (root, _) in self.nodes() {
            if state[root.index()] != 0 {
                continue;
            }
            let mut stack = vec![(root, 0usize)];
            state[root.index()] = 1;
            while let Some(&mut (id, ref mut next)) = stack.last_mut() {
                let pieces = self.get(id).pieces();
                if *next < pieces.len() {
                    let p = pieces[*next];
                    *next += 1;
                    if !self.contains(p) {
                        continue;
                    }
                    match state[p.index()] {
                        0 => {
                            state[p.index()] = 1;
                            stack.push((p, 0));
                        }
                        1 => out.push(Violation::Cycle(p)),
                        _ => {}
                    }
                } else {
                    state[id.index()] = 2;
                    stack.pop();
                }
            }
        }
    }
}
