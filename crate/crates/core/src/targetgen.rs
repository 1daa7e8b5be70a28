//! Candidate target generation: random, mutation, recombination, and their
//! variants with cost-based selection against the current hierarchy.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::inclexis::{marginal_cost_with, CostMode};
use crate::model::{Alphabet, LexisDag, NodeId, Symbol, SymbolString};
use crate::parsing::Matcher;

pub const WEAK_BETA: f64 = 1.0;
pub const STRONG_BETA: f64 = 12.0;
pub const DEFAULT_MAX_STALL: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Model {
    Rnd,
    M,
    Ms,
    Mr,
    Mrs,
}

impl Model {
    pub const ALL: [Model; 5] = [Model::Rnd, Model::M, Model::Ms, Model::Mr, Model::Mrs];

    pub fn uses_selection(self) -> bool {
        matches!(self, Model::Ms | Model::Mrs)
    }

    pub fn min_targets(self) -> usize {
        match self {
            Model::Rnd => 0,
            Model::M | Model::Ms => 1,
            Model::Mr | Model::Mrs => 2,
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::Rnd => "RND",
            Model::M => "M",
            Model::Ms => "MS",
            Model::Mr => "MR",
            Model::Mrs => "MRS",
        })
    }
}

impl FromStr for Model {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Model::ALL
            .into_iter()
            .find(|m| m.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown model {s:?}; expected one of RND, M, MS, MR, MRS"))
    }
}

/// Denominator of the recombination selection ratio.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeedWeighting {
    /// `(|x1|·C(s1) + |x2|·C(s2)) / (|x1| + |x2|)`.
    #[default]
    Average,
    /// `|x1|·C(s1) + |x2|·C(s2)`.
    Sum,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenModelConfig {
    pub model: Model,
    pub beta: f64,
    pub k: usize,
    #[serde(default = "default_max_stall")]
    pub max_stall: usize,
    #[serde(default)]
    pub weighting: SeedWeighting,
    #[serde(default)]
    pub cost_mode: CostMode,
}

fn default_max_stall() -> usize {
    DEFAULT_MAX_STALL
}

impl GenModelConfig {
    pub fn new(model: Model, beta: f64, k: usize) -> Self {
        Self {
            model,
            beta,
            k,
            max_stall: DEFAULT_MAX_STALL,
            weighting: SeedWeighting::Average,
            cost_mode: CostMode::ParseOnly,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenError {
    #[error("{model} produced no acceptable target in {rounds} consecutive rounds")]
    Stall { model: Model, rounds: usize },
    #[error("{model} needs at least {needed} targets, the DAG has {found}")]
    TooFewTargets { model: Model, needed: usize, found: usize },
    #[error("target length {0} is too short for this model")]
    TargetLength(usize),
    #[error("cost evaluation failed: {0}")]
    Cost(String),
}

/// One candidate examined during generation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub round: usize,
    pub candidate: SymbolString,
    pub seeds: Vec<NodeId>,
    /// 1-based crossover index.
    pub crossover: Option<usize>,
    /// Which of the four recombinations, 1 to 4.
    pub variant: Option<u8>,
    /// Lengths of the fragments taken from the first and second seed.
    pub fragments: Option<(usize, usize)>,
    pub cost: usize,
    pub ratio: Option<f64>,
    pub duplicate: bool,
    /// Passed the duplicate check and, where applicable, selection.
    pub passed: bool,
    /// Emitted into the batch.
    pub accepted: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Batch {
    pub targets: Vec<SymbolString>,
    /// Cost of each emitted target against the DAG at batch start.
    pub costs: Vec<usize>,
    pub trials: Vec<CandidateRecord>,
    /// Generation rounds in which at least one non-duplicate candidate was
    /// produced.
    pub rounds: usize,
}

impl Batch {
    /// Emitted targets per counted round.
    pub fn acceptance_likelihood(&self) -> f64 {
        if self.rounds == 0 {
            return 0.0;
        }
        self.targets.len() as f64 / self.rounds as f64
    }

    pub fn mean_cost(&self) -> Option<f64> {
        (!self.costs.is_empty()).then(|| self.costs.iter().sum::<usize>() as f64 / self.costs.len() as f64)
    }
}

/// `1` for `ratio <= 1`, `e^{-β(R−1)}` above.
pub fn selection_probability(ratio: f64, beta: f64) -> f64 {
    if ratio <= 1.0 {
        1.0
    } else {
        (-beta * (ratio - 1.0)).exp()
    }
}

fn passes_selection<R: Rng>(ratio: f64, beta: f64, rng: &mut R) -> bool {
    ratio <= 1.0 || rng.gen::<f64>() < selection_probability(ratio, beta)
}

/// The four junction recombinations of `s1` and `s2` at 1-based index `i`,
/// each with the lengths of its fragments from `s1` and from `s2`.
pub fn recombine(s1: &[Symbol], s2: &[Symbol], i: usize, c: Symbol) -> [(SymbolString, (usize, usize)); 4] {
    let k = s1.len();
    assert_eq!(k, s2.len(), "seeds must have equal length");
    assert!((1..k).contains(&i), "crossover index {i} outside 1..={}", k - 1);
    let head = |s: &[Symbol]| s[..i - 1].to_vec();
    let tail = |s: &[Symbol]| s[i..].to_vec();
    let join = |a: Vec<Symbol>, b: Vec<Symbol>| {
        let mut v = a;
        v.push(c);
        v.extend(b);
        SymbolString::from(v)
    };
    let (h, t) = (i - 1, k - i);
    [
        (join(head(s1), tail(s2)), (h, t)),
        (join(head(s2), tail(s1)), (t, h)),
        (join(tail(s2), head(s1)), (h, t)),
        (join(tail(s1), head(s2)), (t, h)),
    ]
}

/// Mutates one uniformly chosen position to a different uniformly chosen
/// symbol.
pub fn point_mutation<R: Rng>(seed: &[Symbol], alphabet: Alphabet, rng: &mut R) -> SymbolString {
    let mut out = seed.to_vec();
    let pos = rng.gen_range(0..out.len());
    let shift = rng.gen_range(1..alphabet.size() as Symbol);
    out[pos] = (out[pos] + shift) % alphabet.size() as Symbol;
    SymbolString::from(out)
}

pub fn random_string<R: Rng>(alphabet: Alphabet, k: usize, rng: &mut R) -> SymbolString {
    (0..k).map(|_| rng.gen_range(0..alphabet.size() as Symbol)).collect()
}

struct Context<'a> {
    dag: &'a LexisDag,
    matcher: Matcher,
    seeds: Vec<NodeId>,
    pending: HashSet<SymbolString>,
    cfg: &'a GenModelConfig,
}

impl Context<'_> {
    fn is_duplicate(&self, s: &SymbolString) -> bool {
        self.dag.target_by_string(s).is_some() || self.pending.contains(s)
    }

    fn cost(&self, s: &SymbolString) -> Result<usize, GenError> {
        marginal_cost_with(self.dag, &self.matcher, s, self.cfg.cost_mode).map_err(|e| GenError::Cost(e.to_string()))
    }

    fn seed_cost(&self, id: NodeId) -> usize {
        self.dag.pieces(id).len()
    }
}

/// Generates `count` new targets for `dag` under `cfg`. Costs are evaluated
/// against `dag` as it stands; the batch is added later as a whole.
pub fn generate<R: Rng>(dag: &LexisDag, cfg: &GenModelConfig, count: usize, rng: &mut R) -> Result<Batch, GenError> {
    let found = dag.target_count();
    if found < cfg.model.min_targets() {
        return Err(GenError::TooFewTargets { model: cfg.model, needed: cfg.model.min_targets(), found });
    }
    let min_k = if matches!(cfg.model, Model::Mr | Model::Mrs) { 2 } else { 1 };
    if cfg.k < min_k {
        return Err(GenError::TargetLength(cfg.k));
    }
    let mut ctx =
        Context { dag, matcher: Matcher::from_dag(dag), seeds: dag.targets().collect(), pending: HashSet::new(), cfg };
    let mut batch = Batch::default();
    let mut stall = 0;
    let mut round = 0;
    while batch.targets.len() < count {
        if stall >= cfg.max_stall {
            return Err(GenError::Stall { model: cfg.model, rounds: stall });
        }
        let before = batch.trials.len();
        let (counted, emitted) = match cfg.model {
            Model::Rnd | Model::M | Model::Ms => single_round(&ctx, round, rng, &mut batch.trials)?,
            Model::Mr | Model::Mrs => recombination_round(&ctx, round, rng, &mut batch.trials)?,
        };
        if counted {
            batch.rounds += 1;
        }
        match emitted {
            Some(idx) => {
                let record = &mut batch.trials[before + idx];
                record.accepted = true;
                ctx.pending.insert(record.candidate.clone());
                batch.targets.push(record.candidate.clone());
                batch.costs.push(record.cost);
                stall = 0;
            }
            None => stall += 1,
        }
        round += 1;
    }
    Ok(batch)
}

/// One RND, M or MS candidate. Returns whether the round counts toward the
/// acceptance likelihood and the index of the emitted record.
fn single_round<R: Rng>(
    ctx: &Context<'_>,
    round: usize,
    rng: &mut R,
    log: &mut Vec<CandidateRecord>,
) -> Result<(bool, Option<usize>), GenError> {
    let alphabet = ctx.dag.alphabet();
    let (candidate, seeds) = match ctx.cfg.model {
        Model::Rnd => (random_string(alphabet, ctx.cfg.k, rng), Vec::new()),
        _ => {
            let seed = *ctx.seeds.choose(rng).expect("seed pool checked");
            (point_mutation(ctx.dag.string(seed), alphabet, rng), vec![seed])
        }
    };
    let duplicate = ctx.is_duplicate(&candidate);
    let cost = if duplicate { 0 } else { ctx.cost(&candidate)? };
    let mut ratio = None;
    let passed = !duplicate
        && match ctx.cfg.model {
            Model::Ms => {
                let r = cost as f64 / ctx.seed_cost(seeds[0]) as f64;
                ratio = Some(r);
                passes_selection(r, ctx.cfg.beta, rng)
            }
            _ => true,
        };
    log.push(CandidateRecord {
        round,
        candidate,
        seeds,
        crossover: None,
        variant: None,
        fragments: None,
        cost,
        ratio,
        duplicate,
        passed,
        accepted: false,
    });
    Ok((!duplicate, passed.then_some(0)))
}

fn recombination_round<R: Rng>(
    ctx: &Context<'_>,
    round: usize,
    rng: &mut R,
    log: &mut Vec<CandidateRecord>,
) -> Result<(bool, Option<usize>), GenError> {
    let picked: Vec<NodeId> = ctx.seeds.choose_multiple(rng, 2).copied().collect();
    let (s1, s2) = (picked[0], picked[1]);
    let k = ctx.dag.string(s1).len();
    if k < 2 || ctx.dag.string(s2).len() != k {
        return Err(GenError::TargetLength(k));
    }
    let i = rng.gen_range(1..k);
    let c = rng.gen_range(0..ctx.dag.alphabet().size() as Symbol);
    let (c1, c2) = (ctx.seed_cost(s1) as f64, ctx.seed_cost(s2) as f64);
    let start = log.len();
    for (v, (candidate, (x1, x2))) in recombine(ctx.dag.string(s1), ctx.dag.string(s2), i, c).into_iter().enumerate() {
        let duplicate = ctx.is_duplicate(&candidate);
        let cost = if duplicate { 0 } else { ctx.cost(&candidate)? };
        let mut weight = x1 as f64 * c1 + x2 as f64 * c2;
        if ctx.cfg.weighting == SeedWeighting::Average {
            weight /= (x1 + x2) as f64;
        }
        let (ratio, passed) = match (duplicate, ctx.cfg.model) {
            (true, _) => (None, false),
            (false, Model::Mrs) => {
                let r = cost as f64 / weight;
                (Some(r), passes_selection(r, ctx.cfg.beta, rng))
            }
            (false, _) => (Some(cost as f64 / weight), true),
        };
        log.push(CandidateRecord {
            round,
            candidate,
            seeds: vec![s1, s2],
            crossover: Some(i),
            variant: Some(v as u8 + 1),
            fragments: Some((x1, x2)),
            cost,
            ratio,
            duplicate,
            passed,
            accepted: false,
        });
    }
    let round_log = &log[start..];
    let counted = round_log.iter().any(|r| !r.duplicate);
    // Identical variants (possible when fragments coincide) must not be
    // emitted twice; keep the first of each string among the passers.
    let mut seen = HashSet::new();
    let passers: Vec<usize> = round_log
        .iter()
        .enumerate()
        .filter(|(_, r)| r.passed && seen.insert(r.candidate.clone()))
        .map(|(j, _)| j)
        .collect();
    Ok((counted, passers.choose(rng).copied()))
}
