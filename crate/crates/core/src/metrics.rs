//! Scalar metrics over DAGs and string collections.

use serde::{Deserialize, Serialize};

use crate::glexis::glexis_build;
use crate::model::{DagError, LexisDag, NodeKind, SymbolString};

/// One row of per-iteration output. Absent values serialize as `null`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub iteration: usize,
    pub normalized_cost: Option<f64>,
    pub avg_depth: Option<f64>,
    pub avg_node_length: Option<f64>,
    pub diversity: Option<f64>,
    pub core_size: Option<usize>,
    pub flat_core_size: Option<usize>,
    pub h_score: Option<f64>,
    pub core_stability: Option<f64>,
    pub acceptance_likelihood: Option<f64>,
    pub cost_ratio: Option<f64>,
    pub pid: Option<f64>,
    pub edge_cost: Option<usize>,
    pub intermediates: Option<usize>,
    pub core_strings: Vec<String>,
    pub top1_core: Option<String>,
}

/// Edge cost over cumulative target length.
pub fn normalized_cost(dag: &LexisDag) -> f64 {
    let total = dag.total_target_length();
    if total == 0 {
        return 1.0;
    }
    dag.edge_cost() as f64 / total as f64
}

/// Incremental cost over the cost of a clean-slate build of the same targets.
pub fn pid(inc_dag: &LexisDag) -> Result<f64, DagError> {
    let clean = glexis_build(inc_dag.alphabet(), &inc_dag.target_strings())?;
    Ok(pid_against(inc_dag, &clean))
}

pub fn pid_against(inc_dag: &LexisDag, clean: &LexisDag) -> f64 {
    inc_dag.edge_cost() as f64 / clean.edge_cost() as f64
}

/// Mean over targets of the mean source-to-target path length in edges.
pub fn avg_depth(dag: &LexisDag) -> f64 {
    // (paths, summed path lengths) from all sources to each node.
    let mut acc: Vec<Option<(u64, u64)>> = vec![None; dag.id_bound()];
    fn visit(dag: &LexisDag, v: crate::model::NodeId, acc: &mut Vec<Option<(u64, u64)>>) -> (u64, u64) {
        if let Some(r) = acc[v.index()] {
            return r;
        }
        let r = if dag.kind(v) == Some(NodeKind::Source) {
            (1, 0)
        } else {
            dag.pieces(v).iter().fold((0, 0), |(c, s), &p| {
                let (pc, ps) = visit(dag, p, acc);
                (c + pc, s + ps + pc)
            })
        };
        acc[v.index()] = Some(r);
        r
    }
    let per_target: Vec<f64> = dag
        .targets()
        .collect::<Vec<_>>()
        .into_iter()
        .map(|t| {
            let (c, s) = visit(dag, t, &mut acc);
            s as f64 / c as f64
        })
        .collect();
    if per_target.is_empty() {
        return 0.0;
    }
    per_target.iter().sum::<f64>() / per_target.len() as f64
}

/// Mean string length of the intermediates, `None` without any.
pub fn avg_node_length(dag: &LexisDag) -> Option<f64> {
    let lens: Vec<usize> = dag.intermediates().map(|v| dag.string(v).len()).collect();
    (!lens.is_empty()).then(|| lens.iter().sum::<usize>() as f64 / lens.len() as f64)
}

/// Edit distance with unit insertions, deletions and substitutions.
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.len() < b.len() {
        return levenshtein(b, a);
    }
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, x) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let next = (diag + usize::from(x != y)).min(row[j] + 1).min(row[j + 1] + 1);
            diag = row[j + 1];
            row[j + 1] = next;
        }
    }
    row[b.len()]
}

/// `LD / max(|a|, |b|)`; zero for two empty strings.
pub fn normalized_levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> f64 {
    let longest = a.len().max(b.len());
    if longest == 0 {
        return 0.0;
    }
    levenshtein(a, b) as f64 / longest as f64
}

pub fn sim<T: PartialEq>(a: &[T], b: &[T]) -> f64 {
    1.0 - normalized_levenshtein(a, b)
}

fn best_match_sum<S: AsRef<[u32]>>(from: &[S], to: &[S]) -> f64 {
    from.iter().map(|a| to.iter().map(|b| sim(a.as_ref(), b.as_ref())).fold(f64::NEG_INFINITY, f64::max)).sum()
}

/// Jaccard-like similarity of two string sets: every element is matched to
/// its most similar counterpart in the other set, in both directions, and
/// the similarities are averaged. Two empty sets score 1, one empty set 0.
pub fn lev_jaccard<S: AsRef<[u32]>>(a: &[S], b: &[S]) -> f64 {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => return 1.0,
        (true, false) | (false, true) => return 0.0,
        _ => {}
    }
    (best_match_sum(a, b) + best_match_sum(b, a)) / (a.len() + b.len()) as f64
}

/// Index of the element with the lowest summed distance to all others,
/// first on ties.
pub fn medoid<S: AsRef<[u32]>>(set: &[S]) -> Option<usize> {
    let totals: Vec<usize> =
        set.iter().map(|a| set.iter().map(|b| levenshtein(a.as_ref(), b.as_ref())).sum()).collect();
    let min = *totals.iter().min()?;
    totals.iter().position(|&t| t == min)
}

/// Mean edit distance from the medoid to every element, medoid included.
pub fn diversity<S: AsRef<[u32]>>(set: &[S]) -> f64 {
    let Some(m) = medoid(set) else { return 0.0 };
    let total: usize = set.iter().map(|s| levenshtein(set[m].as_ref(), s.as_ref())).sum();
    total as f64 / set.len() as f64
}

/// `lev_jaccard(core[i], core[i − window])`; `None` for the first `window`
/// entries.
pub fn core_stability(history: &[Vec<SymbolString>], window: usize) -> Vec<Option<f64>> {
    (0..history.len())
        .map(|i| (i >= window && window > 0).then(|| lev_jaccard(&history[i], &history[i - window])))
        .collect()
}

pub const DEFAULT_STABILITY_WINDOW: usize = 10;
pub const DEFAULT_MIN_STASIS: usize = 100;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StasisReport {
    /// Normalized distance between entries `i` and `i + 1`.
    pub distances: Vec<f64>,
    /// Inclusive index ranges.
    pub periods: Vec<(usize, usize)>,
    pub fraction_in_stasis: f64,
    /// Normalized distance between the first entries of consecutive periods.
    pub cross_distances: Vec<f64>,
}

/// Maximal runs over which consecutive top-1 strings stay within `mu_ld`
/// normalized edit distance, kept when they span at least `min_len` entries.
/// A missing entry breaks any run.
pub fn stasis_periods(top1: &[Option<SymbolString>], mu_ld: f64, min_len: usize) -> StasisReport {
    let distances: Vec<f64> = top1
        .windows(2)
        .map(|w| match (&w[0], &w[1]) {
            (Some(a), Some(b)) => normalized_levenshtein(a, b),
            _ => 1.0,
        })
        .collect();
    let mut periods = Vec::new();
    let mut start = 0;
    for i in 0..=distances.len() {
        let breaks = i == distances.len() || distances[i] > mu_ld;
        if breaks {
            let len = i + 1 - start;
            if len >= min_len.max(1) && top1.get(start).is_some_and(Option::is_some) {
                periods.push((start, i));
            }
            start = i + 1;
        }
    }
    let covered: usize = periods.iter().map(|(s, e)| e - s + 1).sum();
    let fraction_in_stasis = if top1.is_empty() { 0.0 } else { covered as f64 / top1.len() as f64 };
    let cross_distances = periods
        .windows(2)
        .map(|w| {
            let a = top1[w[0].0].as_ref().expect("period start is present");
            let b = top1[w[1].0].as_ref().expect("period start is present");
            normalized_levenshtein(a, b)
        })
        .collect();
    StasisReport { distances, periods, fraction_in_stasis, cross_distances }
}
