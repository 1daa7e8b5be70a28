//! Incremental adjustment of an existing DAG as targets arrive and retire.
//!
//! Expansion attaches each new target through an optimal parse over the
//! current sources and intermediates, then compresses structure shared by the
//! new targets alone. Pruning removes retired targets and repairs whatever
//! intermediates fall below two uses.

use thiserror::Error;

use crate::glexis::{compress, GreedyStep};
use crate::model::{DagError, LexisDag, NodeId, PruneReport, SymbolString};
use crate::parsing::{Matcher, Parse, ParseError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IncError {
    #[error("target {0:?} is already present")]
    DuplicateTarget(SymbolString),
    #[error(transparent)]
    Dag(#[from] DagError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// How the cost of a prospective target is measured.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CostMode {
    /// Pieces of the optimal parse over the current dictionary.
    #[default]
    ParseOnly,
    /// Edge-cost change from fully expanding a clone of the DAG.
    CloneAndCommit,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExpansionReport {
    /// New target ids with their stage-1 parses, in input order.
    pub attached: Vec<(NodeId, Parse)>,
    pub stage2: Vec<GreedyStep>,
    /// Intermediates created by stage 2 that are still present.
    pub new_intermediates: Vec<NodeId>,
}

impl ExpansionReport {
    pub fn stage1_cost(&self) -> usize {
        self.attached.iter().map(|(_, p)| p.cost()).sum()
    }

    pub fn stage2_saving(&self) -> usize {
        self.stage2.iter().map(|s| s.cost_before - s.cost_after).sum()
    }

    pub fn target_ids(&self) -> Vec<NodeId> {
        self.attached.iter().map(|(id, _)| *id).collect()
    }
}

/// Adds `new_targets` to `dag`. Old nodes keep their parses; they can only
/// gain users.
pub fn expand(dag: &mut LexisDag, new_targets: &[SymbolString]) -> Result<ExpansionReport, IncError> {
    expand_with(dag, new_targets, true)
}

fn expand_with(dag: &mut LexisDag, new_targets: &[SymbolString], stage2: bool) -> Result<ExpansionReport, IncError> {
    let mut seen = std::collections::HashSet::new();
    for t in new_targets {
        if dag.target_by_string(t).is_some() || !seen.insert(t.as_slice()) {
            return Err(IncError::DuplicateTarget(t.clone()));
        }
    }
    let matcher = Matcher::from_dag(dag);
    let mut parses = Vec::with_capacity(new_targets.len());
    for t in new_targets {
        parses.push(matcher.parse(t)?);
    }
    let mut report = ExpansionReport::default();
    for (t, parse) in new_targets.iter().zip(parses) {
        let id = dag.add_target(t.clone(), parse.pieces.clone())?;
        report.attached.push((id, parse));
    }
    if stage2 {
        report.stage2 = compress(dag, &report.target_ids())?;
        report.new_intermediates =
            report.stage2.iter().filter_map(GreedyStep::new_node).filter(|&id| dag.contains(id)).collect();
    }
    Ok(report)
}

/// Edge cost `t` would add to `dag` if attached by stage 1 alone.
pub fn marginal_cost(dag: &LexisDag, t: &SymbolString) -> Result<usize, IncError> {
    Ok(Matcher::from_dag(dag).parse(t)?.cost())
}

/// Cost of `t` under `mode`. `matcher` must index the current `dag`.
pub fn marginal_cost_with(
    dag: &LexisDag,
    matcher: &Matcher,
    t: &SymbolString,
    mode: CostMode,
) -> Result<usize, IncError> {
    match mode {
        CostMode::ParseOnly => Ok(matcher.parse(t)?.cost()),
        CostMode::CloneAndCommit => {
            let mut trial = dag.clone();
            let before = trial.edge_cost();
            expand(&mut trial, std::slice::from_ref(t))?;
            Ok(trial.edge_cost() - before)
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StepReport {
    pub expansion: ExpansionReport,
    pub pruning: PruneReport,
}

/// Expansion by `t_plus` followed by removal of `t_minus`.
pub fn incremental_step(
    dag: &mut LexisDag,
    t_plus: &[SymbolString],
    t_minus: &[NodeId],
) -> Result<StepReport, IncError> {
    for &victim in t_minus {
        if dag.kind(victim) != Some(crate::model::NodeKind::Target) {
            return Err(DagError::NotATarget(victim).into());
        }
    }
    let expansion = expand(dag, t_plus)?;
    let pruning = dag.remove_targets_and_prune(t_minus)?;
    Ok(StepReport { expansion, pruning })
}
