use std::collections::BTreeSet;

use super::{DagError, LexisDag, NodeId, NodeKind};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PruneReport {
    pub removed_targets: Vec<NodeId>,
    /// Intermediates deleted because nothing used them any more.
    pub deleted: Vec<NodeId>,
    /// Intermediates with a single remaining use, inlined into that user.
    pub inlined: Vec<NodeId>,
}

impl PruneReport {
    pub fn is_empty(&self) -> bool {
        self.removed_targets.is_empty() && self.deleted.is_empty() && self.inlined.is_empty()
    }
}

impl LexisDag {
    /// Removes the victim targets, then deletes unused intermediates and
    /// inlines single-use ones until every intermediate is used at least
    /// twice.
    pub fn remove_targets_and_prune(&mut self, victims: &[NodeId]) -> Result<PruneReport, DagError> {
        let unique: BTreeSet<NodeId> = victims.iter().copied().collect();
        for &v in &unique {
            if self.kind(v) != Some(NodeKind::Target) {
                return Err(DagError::NotATarget(v));
            }
        }
        let mut touched = BTreeSet::new();
        for &v in &unique {
            touched.extend(self.pieces(v).iter().copied());
            self.delete_target(v);
        }
        let (inlined, deleted) = self.settle(touched);
        Ok(PruneReport { removed_targets: unique.into_iter().collect(), deleted, inlined })
    }

    /// Restores the reuse constraint over the whole DAG.
    pub fn prune_redundant(&mut self) -> PruneReport {
        let all: Vec<NodeId> = self.intermediates().collect();
        let (inlined, deleted) = self.settle(all);
        PruneReport { removed_targets: Vec::new(), deleted, inlined }
    }

    /// Fixpoint over the candidate nodes and anything whose use count drops
    /// as a consequence. Each pass handles candidates by decreasing string
    /// length (then id). Returns (inlined, deleted).
    pub(crate) fn settle<I>(&mut self, candidates: I) -> (Vec<NodeId>, Vec<NodeId>)
    where
        I: IntoIterator<Item = NodeId>,
    {
        let mut inlined = Vec::new();
        let mut deleted = Vec::new();
        let mut pending: BTreeSet<NodeId> = candidates.into_iter().collect();
        while !pending.is_empty() {
            let mut pass: Vec<NodeId> =
                pending.iter().copied().filter(|&id| self.kind(id) == Some(NodeKind::Intermediate)).collect();
            pending.clear();
            pass.sort_by_key(|&id| (std::cmp::Reverse(self.string(id).len()), id));
            for id in pass {
                if !self.contains(id) {
                    continue;
                }
                match self.get(id).out_degree {
                    0 => {
                        pending.extend(self.pieces(id).iter().copied());
                        self.delete_unused(id);
                        deleted.push(id);
                    }
                    1 => {
                        self.inline(id);
                        inlined.push(id);
                    }
                    _ => {}
                }
            }
        }
        (inlined, deleted)
    }
}
