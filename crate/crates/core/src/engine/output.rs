use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{EngineError, RunConfig, RunResult};
use crate::metrics::MetricRecord;

/// Mean of each metric over the replicates that report it.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub iteration: usize,
    pub runs: usize,
    pub normalized_cost: Option<f64>,
    pub avg_depth: Option<f64>,
    pub avg_node_length: Option<f64>,
    pub diversity: Option<f64>,
    pub core_size: Option<f64>,
    pub flat_core_size: Option<f64>,
    pub h_score: Option<f64>,
    pub core_stability: Option<f64>,
    pub acceptance_likelihood: Option<f64>,
    pub cost_ratio: Option<f64>,
    pub pid: Option<f64>,
    pub edge_cost: Option<f64>,
    pub intermediates: Option<f64>,
}

fn mean<I: Iterator<Item = Option<f64>>>(values: I) -> Option<f64> {
    let (sum, n) = values.flatten().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// One row per iteration, averaged across replicates.
pub fn summarize(results: &[RunResult]) -> Vec<SummaryRow> {
    let len = results.iter().map(|r| r.records.len()).max().unwrap_or(0);
    (0..len)
        .map(|i| {
            let rows: Vec<&MetricRecord> = results.iter().filter_map(|r| r.records.get(i)).collect();
            let avg = |f: fn(&MetricRecord) -> Option<f64>| mean(rows.iter().map(|r| f(r)));
            SummaryRow {
                iteration: rows[0].iteration,
                runs: rows.len(),
                normalized_cost: avg(|r| r.normalized_cost),
                avg_depth: avg(|r| r.avg_depth),
                avg_node_length: avg(|r| r.avg_node_length),
                diversity: avg(|r| r.diversity),
                core_size: avg(|r| r.core_size.map(|v| v as f64)),
                flat_core_size: avg(|r| r.flat_core_size.map(|v| v as f64)),
                h_score: avg(|r| r.h_score),
                core_stability: avg(|r| r.core_stability),
                acceptance_likelihood: avg(|r| r.acceptance_likelihood),
                cost_ratio: avg(|r| r.cost_ratio),
                pid: avg(|r| r.pid),
                edge_cost: avg(|r| r.edge_cost.map(|v| v as f64)),
                intermediates: avg(|r| r.intermediates.map(|v| v as f64)),
            }
        })
        .collect()
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), EngineError> {
    fs::write(path, contents).map_err(|e| EngineError::io(path, e))
}

fn jsonl<T: Serialize>(items: &[T]) -> Vec<u8> {
    let mut out = Vec::new();
    for item in items {
        serde_json::to_writer(&mut out, item).expect("records serialize");
        out.push(b'\n');
    }
    out
}

/// Layout:
///
/// ```text
/// out_dir/config.toml
/// out_dir/summary.csv
/// out_dir/run-{r}/metrics.jsonl
/// out_dir/run-{r}/comparator.jsonl
/// out_dir/run-{r}/events.log
/// out_dir/run-{r}/stasis.json
/// out_dir/run-{r}/final_dag.json
/// out_dir/run-{r}/dag-{iteration}.dot
/// ```
pub fn write_experiment(
    cfg: &RunConfig,
    results: &[RunResult],
    out_dir: &Path,
) -> Result<Vec<SummaryRow>, EngineError> {
    fs::create_dir_all(out_dir).map_err(|e| EngineError::io(out_dir, e))?;
    write_file(&out_dir.join("config.toml"), cfg.to_toml_string().as_bytes())?;
    for r in results {
        let dir = out_dir.join(format!("run-{}", r.run));
        fs::create_dir_all(&dir).map_err(|e| EngineError::io(&dir, e))?;
        write_file(&dir.join("metrics.jsonl"), &jsonl(&r.records))?;
        write_file(&dir.join("comparator.jsonl"), &jsonl(&r.comparisons))?;
        let mut events = Vec::new();
        writeln!(events, "seed={}", r.seed).expect("in-memory write");
        for e in &r.events {
            writeln!(events, "{e}").expect("in-memory write");
        }
        write_file(&dir.join("events.log"), &events)?;
        let stasis = serde_json::to_vec_pretty(&r.stasis).expect("stasis serializes");
        write_file(&dir.join("stasis.json"), &stasis)?;
        let snap = serde_json::to_vec(&r.final_dag.snapshot()).expect("snapshot serializes");
        write_file(&dir.join("final_dag.json"), &snap)?;
        for (iter, dot) in &r.dots {
            write_file(&dir.join(format!("dag-{iter}.dot")), dot.as_bytes())?;
        }
    }
    let rows = summarize(results);
    let path = out_dir.join("summary.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| EngineError::io(&path, e.into()))?;
    for row in &rows {
        w.serialize(row).map_err(|e| EngineError::io(&path, e.into()))?;
    }
    w.flush().map_err(|e| EngineError::io(&path, e))?;
    Ok(rows)
}
