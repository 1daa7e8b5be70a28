//! Path centrality, greedy cores and the hourglass score.
//!
//! A source-to-target path follows concatenation edges upward, so a target
//! of length `ℓ` terminates exactly `ℓ` paths and the total path count is
//! the cumulative target length. The path centrality of `v` is the number of
//! those paths through `v`: `P_S(v) · P_T(v)`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{LexisDag, NodeId, NodeKind};

pub const DEFAULT_TAU: f64 = 0.85;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CentralityError {
    #[error("the flat core is empty at tau = {0}; the hourglass score is undefined")]
    Degenerate(f64),
}

/// Topological order with pieces before their users.
fn topo_order(dag: &LexisDag) -> Vec<NodeId> {
    let mut order = Vec::with_capacity(dag.id_bound());
    let mut state = vec![0u8; dag.id_bound()];
    for root in dag.node_ids() {
        if state[root.index()] != 0 {
            continue;
        }
        let mut stack = vec![(root, 0usize)];
        state[root.index()] = 1;
        while let Some(&mut (v, ref mut next)) = stack.last_mut() {
            let pieces = dag.pieces(v);
            if *next < pieces.len() {
                let p = pieces[*next];
                *next += 1;
                if state[p.index()] == 0 {
                    state[p.index()] = 1;
                    stack.push((p, 0));
                }
            } else {
                state[v.index()] = 2;
                order.push(v);
                stack.pop();
            }
        }
    }
    order
}

/// Path counts with some nodes deleted.
struct PathCounter<'a> {
    dag: &'a LexisDag,
    order: Vec<NodeId>,
    removed: Vec<bool>,
    from_sources: Vec<u64>,
    to_targets: Vec<u64>,
}

impl<'a> PathCounter<'a> {
    fn new(dag: &'a LexisDag) -> Self {
        let n = dag.id_bound();
        let mut counter = Self {
            dag,
            order: topo_order(dag),
            removed: vec![false; n],
            from_sources: vec![0; n],
            to_targets: vec![0; n],
        };
        counter.recount();
        counter
    }

    fn recount(&mut self) {
        for &v in &self.order {
            self.from_sources[v.index()] = if self.removed[v.index()] {
                0
            } else if self.dag.kind(v) == Some(NodeKind::Source) {
                1
            } else {
                self.dag.pieces(v).iter().map(|p| self.from_sources[p.index()]).sum()
            };
        }
        for &v in self.order.iter().rev() {
            let node = self.dag.node(v).expect("live node");
            self.to_targets[v.index()] = if self.removed[v.index()] {
                0
            } else if node.kind() == NodeKind::Target {
                1
            } else {
                node.users().map(|(w, m)| m as u64 * self.to_targets[w.index()]).sum()
            };
        }
    }

    fn remaining(&self) -> u64 {
        self.dag.targets().map(|t| self.from_sources[t.index()]).sum()
    }

    fn centrality(&self, v: NodeId) -> u64 {
        self.from_sources[v.index()] * self.to_targets[v.index()]
    }

    fn remove(&mut self, v: NodeId) {
        self.removed[v.index()] = true;
        self.recount();
    }
}

/// `P_S(v) · P_T(v)` for every intermediate.
pub fn path_centrality(dag: &LexisDag) -> BTreeMap<NodeId, u64> {
    let counter = PathCounter::new(dag);
    dag.intermediates().map(|v| (v, counter.centrality(v))).collect()
}

/// `P_S(v) · P_T(v)` for every node.
pub fn path_centrality_all(dag: &LexisDag) -> BTreeMap<NodeId, u64> {
    let counter = PathCounter::new(dag);
    dag.node_ids().map(|v| (v, counter.centrality(v))).collect()
}

/// Number of source-to-target paths after deleting `removed`.
pub fn remaining_paths(dag: &LexisDag, removed: &[NodeId]) -> u64 {
    let mut counter = PathCounter::new(dag);
    for &v in removed {
        counter.removed[v.index()] = true;
    }
    counter.recount();
    counter.remaining()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoreSet {
    /// Selection order.
    pub members: Vec<NodeId>,
    /// Centrality of each member at the time it was picked.
    pub centralities: Vec<u64>,
    pub tau: f64,
    pub total_paths: u64,
    /// Paths left after removing the first `j` members, `j = 0..=len`.
    pub remaining: Vec<u64>,
}

impl CoreSet {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn covered_fraction(&self) -> f64 {
        match self.total_paths {
            0 => 1.0,
            total => 1.0 - *self.remaining.last().unwrap_or(&total) as f64 / total as f64,
        }
    }
}

/// True once at least a fraction `tau` of the paths is cut.
fn within(remaining: u64, tau: f64, total: u64) -> bool {
    remaining as f64 <= (1.0 - tau) * total as f64 * (1.0 + 1e-12)
}

/// Greedy core: repeatedly delete the most central node until at most
/// `(1 − tau) · L_T` paths remain. Ties go to the longer string, then the lower id.
pub fn g_core(dag: &LexisDag, tau: f64) -> CoreSet {
    greedy(dag, tau, |_| true)
}

fn greedy(dag: &LexisDag, tau: f64, eligible: impl Fn(NodeId) -> bool) -> CoreSet {
    assert!((0.0..=1.0).contains(&tau), "tau must lie in [0, 1], got {tau}");
    let mut counter = PathCounter::new(dag);
    let total = counter.remaining();
    let mut core =
        CoreSet { members: Vec::new(), centralities: Vec::new(), tau, total_paths: total, remaining: vec![total] };
    let mut left = total;
    while !within(left, tau, total) {
        let (best, score) = dag
            .node_ids()
            .filter(|&v| !counter.removed[v.index()] && eligible(v))
            .map(|v| (v, counter.centrality(v)))
            .max_by(|a, b| a.1.cmp(&b.1).then(dag.string(a.0).len().cmp(&dag.string(b.0).len())).then(b.0.cmp(&a.0)))
            .expect("paths remain, so some eligible node carries them");
        counter.remove(best);
        left = counter.remaining();
        core.members.push(best);
        core.centralities.push(score);
        core.remaining.push(left);
    }
    core
}

/// Core of the flat DAG with the same targets, whose only candidates are
/// sources and targets. The mixed greedy can overshoot the all-targets and
/// all-sources covers, so the smallest of the three greedy runs is kept.
pub fn flat_core(dag: &LexisDag, tau: f64) -> CoreSet {
    let flat = dag.flattened();
    let is_target = |v: NodeId| flat.kind(v) == Some(NodeKind::Target);
    let mixed = greedy(&flat, tau, |_| true);
    let targets = greedy(&flat, tau, is_target);
    let sources = greedy(&flat, tau, |v| !is_target(v));
    [targets, sources].into_iter().fold(mixed, |best, c| if c.len() < best.len() { c } else { best })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HScore {
    pub value: f64,
    pub core: CoreSet,
    pub flat_core: CoreSet,
}

/// `1 − |Core(τ)| / |Core_f(τ)|`, clamped to `[0, 1]`. A DAG without
/// intermediates scores 0.
pub fn h_score(dag: &LexisDag, tau: f64) -> Result<HScore, CentralityError> {
    let core = g_core(dag, tau);
    let flat = flat_core(dag, tau);
    if flat.is_empty() {
        return Err(CentralityError::Degenerate(tau));
    }
    let value =
        if dag.intermediate_count() == 0 { 0.0 } else { (1.0 - core.len() as f64 / flat.len() as f64).clamp(0.0, 1.0) };
    Ok(HScore { value, core, flat_core: flat })
}

/// `(j, fraction of paths left)` after deleting the first `j` core members.
pub fn robustness_curve(core: &CoreSet) -> Vec<(usize, f64)> {
    core.remaining
        .iter()
        .enumerate()
        .map(|(j, &r)| (j, if core.total_paths == 0 { 0.0 } else { r as f64 / core.total_paths as f64 }))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::glexis::glexis_build;
    use crate::model::{Alphabet, SymbolString};
    use proptest::prelude::*;

    /// Every source-to-target path as its node sequence, by explicit DFS
    /// from each target down through its pieces.
    fn enumerate_paths(dag: &LexisDag) -> Vec<Vec<NodeId>> {
        fn walk(dag: &LexisDag, v: NodeId, suffix: &mut Vec<NodeId>, out: &mut Vec<Vec<NodeId>>) {
            suffix.push(v);
            if dag.kind(v) == Some(NodeKind::Source) {
                out.push(suffix.iter().rev().copied().collect());
            } else {
                for &p in dag.pieces(v) {
                    walk(dag, p, suffix, out);
                }
            }
            suffix.pop();
        }
        let mut out = Vec::new();
        for t in dag.targets() {
            walk(dag, t, &mut Vec::new(), &mut out);
        }
        out
    }

    fn oracle_remaining(paths: &[Vec<NodeId>], removed: &[NodeId]) -> u64 {
        paths.iter().filter(|p| !p.iter().any(|v| removed.contains(v))).count() as u64
    }

    fn letters(s: &str) -> SymbolString {
        SymbolString::from_letters(s)
    }

    /// Intermediates abcd (used 3 times) and efgh (used twice).
    fn shared_modules() -> (LexisDag, NodeId, NodeId) {
        let targets = [letters("abcdefgh"), letters("abcdabcd"), letters("efghab"), letters("hg")];
        let dag = glexis_build(Alphabet::new(8).unwrap(), &targets).unwrap();
        let m1 = dag.intermediate_by_string(&letters("abcd")).unwrap();
        let m6 = dag.intermediate_by_string(&letters("efgh")).unwrap();
        (dag, m1, m6)
    }

    #[test]
    fn centrality_matches_path_enumeration() {
        let (dag, m1, _) = shared_modules();
        let paths = enumerate_paths(&dag);
        assert_eq!(paths.len(), dag.total_target_length());
        for (v, c) in path_centrality_all(&dag) {
            let through = paths.iter().filter(|p| p.contains(&v)).count() as u64;
            assert_eq!(c, through, "node {v}");
        }
        // abcd: 4 source paths, reached from targets 3 times.
        assert_eq!(path_centrality(&dag)[&m1], 12);
    }

    #[test]
    fn length_three_used_twice_has_centrality_six() {
        let dag = glexis_build(Alphabet::new(4).unwrap(), &[letters("abcd"), letters("dabc")]).unwrap();
        let abc = dag.intermediate_by_string(&letters("abc")).unwrap();
        assert_eq!(path_centrality(&dag), BTreeMap::from([(abc, 6)]));
    }

    #[test]
    fn flat_dag_has_no_intermediate_centralities_and_scores_zero() {
        let dag = LexisDag::flat(Alphabet::new(3).unwrap(), &[letters("abc"), letters("cab")]).unwrap();
        assert!(path_centrality(&dag).is_empty());
        assert_eq!(h_score(&dag, 0.5).unwrap().value, 0.0);
    }

    #[test]
    fn tau_zero_gives_empty_core_and_degenerate_score() {
        let (dag, _, _) = shared_modules();
        assert!(g_core(&dag, 0.0).is_empty());
        assert_eq!(h_score(&dag, 0.0), Err(CentralityError::Degenerate(0.0)));
    }

    #[test]
    fn single_target_flat_core_is_that_target() {
        let dag = LexisDag::flat(Alphabet::new(3).unwrap(), &[letters("abcab")]).unwrap();
        let core = flat_core(&dag, 1.0);
        assert_eq!(core.members, vec![dag.targets().next().unwrap()]);
    }

    /// Two disjoint 10-symbol modules inside three targets, each target
    /// adding one private symbol: `XYa`, `YXb`, `XcY`.
    fn two_module_hourglass() -> (LexisDag, NodeId, NodeId) {
        let x: Vec<u32> = (0..10).collect();
        let y: Vec<u32> = (10..20).collect();
        let cat = |parts: &[&[u32]]| SymbolString::from(parts.concat());
        let targets = [cat(&[&x, &y, &[20]]), cat(&[&y, &x, &[21]]), cat(&[&x, &[22], &y])];
        let mut dag = LexisDag::flat(Alphabet::new(23).unwrap(), &targets).unwrap();
        let t: Vec<NodeId> = targets.iter().map(|s| dag.target_by_string(s).unwrap()).collect();
        let mx = dag.add_intermediate(&SymbolString::from(x), &[(t[0], 1), (t[1], 11), (t[2], 1)]).unwrap();
        let my = dag.add_intermediate(&SymbolString::from(y), &[(t[0], 11), (t[1], 1), (t[2], 12)]).unwrap();
        assert!(dag.validate().is_valid());
        (dag, mx.node.unwrap(), my.node.unwrap())
    }

    #[test]
    fn two_module_hourglass_scores_one_third() {
        let (dag, x, y) = two_module_hourglass();
        let paths = enumerate_paths(&dag);
        assert_eq!(paths.len(), 63);
        let h = h_score(&dag, 0.9).unwrap();
        assert_eq!(h.core.members, vec![x, y]);
        assert_eq!(h.core.centralities, vec![30, 30]);
        assert_eq!(h.flat_core.len(), 3);
        assert!((h.value - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(format!("{:.2}", h.value), "0.33");
        // 90% coverage leaves at most 6.3 of 63 paths; one module leaves 33.
        assert_eq!(oracle_remaining(&paths, &[x]), 33);
        assert_eq!(oracle_remaining(&paths, &h.core.members), 3);
        let flat_paths = enumerate_paths(&dag.flattened());
        assert!(oracle_remaining(&flat_paths, &h.flat_core.members) as f64 <= 0.1 * 63.0);
        assert!(oracle_remaining(&flat_paths, &h.flat_core.members[..2]) as f64 > 0.1 * 63.0);
    }

    #[test]
    fn perfect_hourglass_scores_near_one() {
        // One long shared module inside many targets over many symbols.
        let alphabet = Alphabet::new(40).unwrap();
        let waist: Vec<u32> = (0..20).collect();
        let targets: Vec<SymbolString> = (20..40)
            .map(|x| {
                let mut t = vec![x];
                t.extend(&waist);
                SymbolString::from(t)
            })
            .collect();
        let dag = glexis_build(alphabet, &targets).unwrap();
        let h = h_score(&dag, 0.9).unwrap();
        assert_eq!(h.core.len(), 1);
        assert!(h.value >= 0.9, "{}", h.value);
    }

    fn small_dag() -> impl Strategy<Value = LexisDag> {
        proptest::collection::vec(proptest::collection::vec(0u32..4, 1..=12), 1..=6).prop_map(|raw| {
            let mut targets: Vec<SymbolString> = raw.into_iter().map(SymbolString::from).collect();
            targets.sort();
            targets.dedup();
            glexis_build(Alphabet::new(4).unwrap(), &targets).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn dp_matches_enumeration(dag in small_dag()) {
            let paths = enumerate_paths(&dag);
            prop_assert_eq!(paths.len(), dag.total_target_length());
            for (v, c) in path_centrality_all(&dag) {
                prop_assert_eq!(c, paths.iter().filter(|p| p.contains(&v)).count() as u64);
                if dag.kind(v) != Some(NodeKind::Source) {
                    let counter = PathCounter::new(&dag);
                    prop_assert_eq!(counter.from_sources[v.index()], dag.string(v).len() as u64);
                }
            }
        }

        #[test]
        fn core_properties(dag in small_dag(), tau in 0.0f64..1.0) {
            let paths = enumerate_paths(&dag);
            let core = g_core(&dag, tau);
            prop_assert!(core.covered_fraction() >= tau - 1e-9);
            for w in core.remaining.windows(2) {
                prop_assert!(w[1] < w[0]);
            }
            let curve = robustness_curve(&core);
            prop_assert_eq!(curve[0], (0, 1.0));
            for (j, frac) in &curve {
                let left = oracle_remaining(&paths, &core.members[..*j]);
                prop_assert!((frac - left as f64 / paths.len() as f64).abs() < 1e-12);
                prop_assert_eq!(remaining_paths(&dag, &core.members[..*j]), left);
            }
            prop_assert!(curve.last().unwrap().1 <= 1.0 - tau + 1e-9);
            let flat = flat_core(&dag, tau);
            let used_sources = dag.sources().filter(|&s| dag.node(s).unwrap().out_degree() > 0).count();
            prop_assert!(flat.len() <= used_sources.min(dag.target_count()));
            if let Ok(h) = h_score(&dag, tau) {
                prop_assert!((0.0..=1.0).contains(&h.value));
            }
        }

        #[test]
        fn tau_one_is_a_vertex_cut(dag in small_dag()) {
            let core = g_core(&dag, 1.0);
            prop_assert_eq!(oracle_remaining(&enumerate_paths(&dag), &core.members), 0);
        }

        #[test]
        fn larger_tau_never_needs_fewer_members(dag in small_dag(), a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(g_core(&dag, lo).len() <= g_core(&dag, hi).len());
        }
    }
}
