//! The evolutionary loop: seed a DAG with random targets, then repeatedly
//! generate a batch, fold it in incrementally, retire the oldest targets
//! and record metrics.

mod config;
mod output;

use std::collections::VecDeque;
use std::path::{Path, PathBuf};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::centrality::{g_core, h_score, HScore};
use crate::glexis::glexis_build;
use crate::inclexis::{incremental_step, IncError};
use crate::metrics::{
    avg_depth, avg_node_length, diversity, lev_jaccard, normalized_cost, pid_against, stasis_periods, MetricRecord,
    StasisReport,
};
use crate::model::{LexisDag, NodeId, SymbolString, SymbolTable, Violation};
use crate::targetgen::{generate, random_string, Batch, GenError, Model};

pub use config::RunConfig;
pub use output::{summarize, write_experiment, SummaryRow};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error(transparent)]
    Inc(#[from] IncError),
    #[error("DAG invalid after iteration {iteration}: {violations:?}")]
    Invalid { iteration: usize, violations: Vec<Violation> },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl EngineError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        EngineError::Io { path: path.to_path_buf(), source }
    }
}

/// Incremental design against a clean-slate rebuild of the same targets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparatorRecord {
    pub iteration: usize,
    pub inc_cost: usize,
    pub cs_cost: usize,
    pub pid: f64,
    /// `L_T / E(D_CS)`, the largest PID can be.
    pub pid_bound: f64,
    pub core_similarity: f64,
    pub inc_depth: f64,
    pub cs_depth: f64,
    pub inc_h_score: Option<f64>,
    pub cs_h_score: Option<f64>,
}

#[derive(Clone)]
pub struct RunState {
    pub dag: LexisDag,
    /// Live targets, oldest first.
    pub fifo: VecDeque<NodeId>,
    pub iteration: usize,
    pub records: Vec<MetricRecord>,
    pub comparisons: Vec<ComparatorRecord>,
    pub core_history: Vec<Vec<SymbolString>>,
    pub top1_history: Vec<Option<SymbolString>>,
    pub events: Vec<String>,
    rng: ChaCha8Rng,
}

fn render(dag: &LexisDag, s: &[u32]) -> String {
    SymbolTable::Auto.render(dag.alphabet(), s)
}

/// `s` random targets compressed from scratch.
pub fn init_run(cfg: &RunConfig, seed: u64) -> Result<RunState, EngineError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alphabet = cfg.alphabet();
    let mut targets: Vec<SymbolString> = Vec::with_capacity(cfg.s);
    while targets.len() < cfg.s {
        let t = random_string(alphabet, cfg.k, &mut rng);
        if !targets.contains(&t) {
            targets.push(t);
        }
    }
    let dag = glexis_build(alphabet, &targets).map_err(IncError::from)?;
    let fifo = targets.iter().map(|t| dag.target_by_string(t).expect("just built")).collect();
    let mut state = RunState {
        dag,
        fifo,
        iteration: 0,
        records: Vec::new(),
        comparisons: Vec::new(),
        core_history: Vec::new(),
        top1_history: Vec::new(),
        events: Vec::new(),
        rng,
    };
    check_valid(&state)?;
    let record = measure(&mut state, cfg, None, None);
    state.records.push(record);
    Ok(state)
}

fn check_valid(state: &RunState) -> Result<(), EngineError> {
    let report = state.dag.validate();
    if report.is_valid() {
        Ok(())
    } else {
        Err(EngineError::Invalid { iteration: state.iteration, violations: report.violations })
    }
}

/// Structural metrics of a standalone DAG. Fields that need history
/// (stability, acceptance, cost ratio, PID) are left empty.
pub fn analyze(dag: &LexisDag, tau: f64) -> MetricRecord {
    analyze_with_core(dag, tau).0
}

fn analyze_with_core(dag: &LexisDag, tau: f64) -> (MetricRecord, Vec<SymbolString>, Option<String>) {
    let targets = dag.target_strings();
    let (core, h, note) = match h_score(dag, tau) {
        Ok(HScore { value, core, flat_core }) => (core, Some((value, flat_core.len())), None),
        Err(e) => (g_core(dag, tau), None, Some(format!("h_score skipped: {e}"))),
    };
    let core_strings: Vec<SymbolString> = core.members.iter().map(|&v| dag.string(v).clone()).collect();
    let record = MetricRecord {
        iteration: 0,
        normalized_cost: Some(normalized_cost(dag)),
        avg_depth: Some(avg_depth(dag)),
        avg_node_length: avg_node_length(dag),
        diversity: Some(diversity(&targets)),
        core_size: Some(core.len()),
        flat_core_size: h.map(|(_, f)| f),
        h_score: h.map(|(v, _)| v),
        edge_cost: Some(dag.edge_cost()),
        intermediates: Some(dag.intermediate_count()),
        core_strings: core_strings.iter().map(|s| render(dag, s)).collect(),
        top1_core: core_strings.first().map(|s| render(dag, s)),
        ..Default::default()
    };
    (record, core_strings, note)
}

fn measure(state: &mut RunState, cfg: &RunConfig, batch: Option<&Batch>, cost_ratio: Option<f64>) -> MetricRecord {
    let (mut record, core_strings, note) = analyze_with_core(&state.dag, cfg.tau);
    if let Some(note) = note {
        state.events.push(format!("iter={} {note}", state.iteration));
    }
    record.iteration = state.iteration;
    record.core_stability = state
        .core_history
        .len()
        .checked_sub(cfg.stability_window)
        .filter(|_| cfg.stability_window > 0)
        .map(|i| lev_jaccard(&core_strings, &state.core_history[i]));
    record.acceptance_likelihood = batch.map(Batch::acceptance_likelihood);
    record.cost_ratio = cost_ratio;
    state.top1_history.push(core_strings.first().cloned());
    state.core_history.push(core_strings);
    record
}

/// One generation-expansion-pruning iteration.
pub fn step(state: &mut RunState, cfg: &RunConfig) -> Result<MetricRecord, EngineError> {
    state.iteration += 1;
    let batch_seed = state.rng.next_u64();
    let gen = cfg.gen_config();
    let batch = generate(&state.dag, &gen, cfg.b, &mut ChaCha8Rng::seed_from_u64(batch_seed))?;
    let cost_ratio = if cfg.paired_cost_ratio && cfg.model == Model::Mrs {
        let paired = crate::targetgen::GenModelConfig { model: Model::Mr, ..gen };
        let mr = generate(&state.dag, &paired, cfg.b, &mut ChaCha8Rng::seed_from_u64(batch_seed))?;
        match (batch.mean_cost(), mr.mean_cost()) {
            (Some(a), Some(b)) if b > 0.0 => Some(a / b),
            _ => None,
        }
    } else {
        None
    };
    for rec in &batch.trials {
        state.events.push(format!(
            "iter={} round={} model={} cost={} ratio={} duplicate={} passed={} accepted={}",
            state.iteration,
            rec.round,
            cfg.model,
            rec.cost,
            rec.ratio.map_or("-".to_string(), |r| format!("{r:.4}")),
            rec.duplicate,
            rec.passed,
            rec.accepted
        ));
    }
    // Retire the oldest targets beyond the steady-state count.
    let excess = (state.fifo.len() + batch.targets.len()).saturating_sub(cfg.t_s);
    let victims: Vec<NodeId> = state.fifo.iter().take(excess).copied().collect();
    let report = incremental_step(&mut state.dag, &batch.targets, &victims)?;
    state.fifo.drain(..excess);
    state.fifo.extend(report.expansion.target_ids());
    check_valid(state)?;
    let mut record = measure(state, cfg, Some(&batch), cost_ratio);
    let steady = state.fifo.len() == cfg.t_s;
    if steady && cfg.eval_every > 0 && state.iteration.is_multiple_of(cfg.eval_every) {
        let cmp = clean_slate_compare(state, cfg);
        record.pid = Some(cmp.pid);
        state.comparisons.push(cmp);
    }
    state.records.push(record.clone());
    Ok(record)
}

/// Rebuilds the current targets from scratch and compares both designs.
pub fn clean_slate_compare(state: &RunState, cfg: &RunConfig) -> ComparatorRecord {
    compare_dags(&state.dag, state.iteration, cfg.tau)
}

/// Compares `inc` with a G-Lexis rebuild of its targets.
pub fn compare_dags(inc: &LexisDag, iteration: usize, tau: f64) -> ComparatorRecord {
    let cs = glexis_build(inc.alphabet(), &inc.target_strings()).expect("targets of a valid DAG");
    let core_strings = |dag: &LexisDag| -> Vec<SymbolString> {
        g_core(dag, tau).members.iter().map(|&v| dag.string(v).clone()).collect()
    };
    ComparatorRecord {
        iteration,
        inc_cost: inc.edge_cost(),
        cs_cost: cs.edge_cost(),
        pid: pid_against(inc, &cs),
        pid_bound: inc.total_target_length() as f64 / cs.edge_cost() as f64,
        core_similarity: lev_jaccard(&core_strings(inc), &core_strings(&cs)),
        inc_depth: avg_depth(inc),
        cs_depth: avg_depth(&cs),
        inc_h_score: h_score(inc, tau).ok().map(|h| h.value),
        cs_h_score: h_score(&cs, tau).ok().map(|h| h.value),
    }
}

/// Everything one replicate produced.
pub struct RunResult {
    pub run: usize,
    pub seed: u64,
    pub records: Vec<MetricRecord>,
    pub comparisons: Vec<ComparatorRecord>,
    pub events: Vec<String>,
    pub stasis: StasisReport,
    pub final_dag: LexisDag,
    /// DOT renderings at the configured iterations.
    pub dots: Vec<(usize, String)>,
}

pub fn run_single(cfg: &RunConfig, run: usize) -> Result<RunResult, EngineError> {
    let seed = cfg.run_seed(run);
    let mut state = init_run(cfg, seed)?;
    let mut dots = Vec::new();
    let dot = |state: &RunState, dots: &mut Vec<(usize, String)>| {
        if cfg.dot_at.contains(&state.iteration) {
            dots.push((state.iteration, state.dag.to_dot(&Default::default())));
        }
    };
    dot(&state, &mut dots);
    for _ in 0..cfg.iterations {
        step(&mut state, cfg)?;
        dot(&state, &mut dots);
    }
    let stasis = stasis_periods(&state.top1_history, cfg.stasis_mu, cfg.stasis_min_len);
    Ok(RunResult {
        run,
        seed,
        records: state.records,
        comparisons: state.comparisons,
        events: state.events,
        stasis,
        final_dag: state.dag,
        dots,
    })
}

/// All replicates, run in parallel, in replicate order.
pub fn run_replicates(cfg: &RunConfig) -> Result<Vec<RunResult>, EngineError> {
    cfg.validate()?;
    (0..cfg.runs).into_par_iter().map(|r| run_single(cfg, r)).collect()
}

/// Runs every replicate and writes the outputs under `out_dir`.
pub fn run_experiment(cfg: &RunConfig, out_dir: &Path) -> Result<Vec<SummaryRow>, EngineError> {
    let results = run_replicates(cfg)?;
    write_experiment(cfg, &results, out_dir)
}
