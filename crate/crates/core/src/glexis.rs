//! Greedy construction of low-cost Lexis-DAGs.
//!
//! Starting from the flat DAG, each step materialises the repeated token
//! substring (over sources and existing intermediates) whose addition removes
//! the most edges. A substring of `ℓ` tokens with `f` non-overlapping
//! occurrences saves `f(ℓ−1) − ℓ` edges: every occurrence collapses to one
//! edge and the new node itself costs `ℓ`.

use std::cmp::{Ordering, Reverse};

use crate::model::{Addition, Alphabet, DagError, LexisDag, NodeId, NodeKind, SymbolString};

/// Smallest saving still worth materialising. Break-even pairs (two
/// occurrences of two tokens) are accepted.
pub const MIN_SAVING: i64 = 0;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepeatCandidate {
    pub tokens: Vec<NodeId>,
    /// Greedy left-to-right non-overlapping occurrences as
    /// `(host, token position)`, in host order.
    pub occurrences: Vec<(NodeId, usize)>,
    pub saving: i64,
}

impl RepeatCandidate {
    pub fn count(&self) -> usize {
        self.occurrences.len()
    }

    pub fn token_len(&self) -> usize {
        self.tokens.len()
    }
}

/// Edge saving of materialising `token_len` tokens occurring `count` times.
pub fn saving(count: usize, token_len: usize) -> i64 {
    count as i64 * (token_len as i64 - 1) - token_len as i64
}

/// The best candidate over the parse forms of every non-source node.
pub fn best_repeat(dag: &LexisDag) -> Option<RepeatCandidate> {
    let hosts: Vec<NodeId> = dag.node_ids().collect();
    best_repeat_in(dag, &hosts)
}

/// The best candidate over the parse forms of `hosts` only. Ties go to the
/// longer token string, then to the earliest first occurrence.
pub fn best_repeat_in(dag: &LexisDag, hosts: &[NodeId]) -> Option<RepeatCandidate> {
    let mut ids: Vec<NodeId> = hosts
        .iter()
        .copied()
        .filter(|&h| matches!(dag.kind(h), Some(NodeKind::Intermediate | NodeKind::Target)))
        .collect();
    ids.sort_unstable();
    ids.dedup();
    let forms: Vec<&[NodeId]> = ids.iter().map(|&h| dag.pieces(h)).collect();

    // Positions are (form, offset); every group shares one token window.
    let mut start: Vec<(u32, u32)> =
        forms.iter().enumerate().flat_map(|(f, form)| (0..form.len()).map(move |p| (f as u32, p as u32))).collect();
    start.sort_by_key(|&(f, p)| forms[f as usize][p as usize]);
    let mut stack: Vec<(usize, Vec<(u32, u32)>)> = Vec::new();
    split_runs(start, |&(f, p)| forms[f as usize][p as usize], |group| stack.push((1, group)));

    let mut best: Option<Best> = None;
    while let Some((len, group)) = stack.pop() {
        if len >= 2 {
            let (count, first) = greedy_count(&group, len);
            if count >= 2 {
                let s = saving(count, len);
                let key = (s, len, Reverse(first));
                if s >= MIN_SAVING && best.as_ref().is_none_or(|b| key.cmp(&b.key()) == Ordering::Greater) {
                    best = Some(Best { saving: s, len, first, group: group.clone() });
                }
            }
        }
        let mut next: Vec<(u32, u32)> =
            group.into_iter().filter(|&(f, p)| (p as usize + len) < forms[f as usize].len()).collect();
        next.sort_by_key(|&(f, p)| forms[f as usize][p as usize + len]);
        split_runs(next, |&(f, p)| forms[f as usize][p as usize + len], |g| stack.push((len + 1, g)));
    }

    let best = best?;
    let (f0, p0) = best.first;
    let tokens = forms[f0 as usize][p0 as usize..p0 as usize + best.len].to_vec();
    let occurrences = greedy_positions(&best.group, best.len).map(|(f, p)| (ids[f as usize], p as usize)).collect();
    Some(RepeatCandidate { tokens, occurrences, saving: best.saving })
}

struct Best {
    saving: i64,
    len: usize,
    first: (u32, u32),
    group: Vec<(u32, u32)>,
}

impl Best {
    fn key(&self) -> (i64, usize, Reverse<(u32, u32)>) {
        (self.saving, self.len, Reverse(self.first))
    }
}

/// Splits a key-sorted list into runs of equal key, keeping runs of two or
/// more. Sorting is stable, so each run stays in (form, offset) order.
fn split_runs<K: PartialEq>(
    sorted: Vec<(u32, u32)>,
    key: impl Fn(&(u32, u32)) -> K,
    mut emit: impl FnMut(Vec<(u32, u32)>),
) {
    let mut run: Vec<(u32, u32)> = Vec::new();
    for pos in sorted {
        if run.last().is_some_and(|last| key(last) != key(&pos)) {
            if run.len() >= 2 {
                emit(std::mem::take(&mut run));
            } else {
                run.clear();
            }
        }
        run.push(pos);
    }
    if run.len() >= 2 {
        emit(run);
    }
}

fn greedy_positions(group: &[(u32, u32)], len: usize) -> impl Iterator<Item = (u32, u32)> + '_ {
    let mut cursor: Option<(u32, u32)> = None;
    group.iter().copied().filter(move |&(f, p)| {
        let free = match cursor {
            Some((cf, end)) if cf == f => p >= end,
            _ => true,
        };
        if free {
            cursor = Some((f, p + len as u32));
        }
        free
    })
}

fn greedy_count(group: &[(u32, u32)], len: usize) -> (usize, (u32, u32)) {
    (greedy_positions(group, len).count(), group[0])
}

/// One greedy iteration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GreedyStep {
    pub candidate: RepeatCandidate,
    /// Set when the token string spelled an existing intermediate, which was
    /// reused instead of creating a duplicate.
    pub reused: Option<NodeId>,
    pub outcome: Addition,
    pub cost_before: usize,
    pub cost_after: usize,
}

impl GreedyStep {
    pub fn new_node(&self) -> Option<NodeId> {
        self.outcome.node
    }
}

/// Materialises the best candidate over `hosts`, reusing an existing
/// intermediate when the tokens spell one. `None` once nothing qualifies.
pub fn greedy_step(dag: &mut LexisDag, hosts: &[NodeId]) -> Result<Option<GreedyStep>, DagError> {
    let Some(candidate) = best_repeat_in(dag, hosts) else {
        return Ok(None);
    };
    let cost_before = dag.edge_cost();
    let string = dag.concat(&candidate.tokens)?;
    let (reused, outcome) = match dag.intermediate_by_string(&string) {
        Some(existing) => {
            // The existing node spans the whole string, so at most one
            // occurrence sits inside it and at least one remains.
            let occ: Vec<(NodeId, usize)> =
                candidate.occurrences.iter().copied().filter(|&(h, _)| h != existing).collect();
            (Some(existing), dag.rewire_to_existing(existing, &candidate.tokens, &occ)?)
        }
        None => (None, dag.add_intermediate_tokens(&candidate.tokens, &candidate.occurrences)?),
    };
    Ok(Some(GreedyStep { candidate, reused, outcome, cost_before, cost_after: dag.edge_cost() }))
}

/// Runs the greedy loop over the parse forms of `hosts` (plus every node it
/// creates) until no candidate is left.
pub fn compress(dag: &mut LexisDag, hosts: &[NodeId]) -> Result<Vec<GreedyStep>, DagError> {
    let mut scope: Vec<NodeId> = hosts.to_vec();
    let mut steps = Vec::new();
    while let Some(step) = greedy_step(dag, &scope)? {
        scope.extend(step.new_node());
        scope.retain(|&h| dag.contains(h));
        steps.push(step);
    }
    Ok(steps)
}

/// Clean-slate construction: the flat DAG over `targets`, compressed.
pub fn glexis_build(alphabet: Alphabet, targets: &[SymbolString]) -> Result<LexisDag, DagError> {
    glexis_build_traced(alphabet, targets).map(|(dag, _)| dag)
}

pub fn glexis_build_traced(
    alphabet: Alphabet,
    targets: &[SymbolString],
) -> Result<(LexisDag, Vec<GreedyStep>), DagError> {
    let mut dag = LexisDag::flat(alphabet, targets)?;
    let hosts: Vec<NodeId> = dag.targets().collect();
    let steps = compress(&mut dag, &hosts)?;
    Ok((dag, steps))
}
