//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.
//!
//! Directional criteria use the desk profile (s=5, n=20, k=50, b=5, T_s=30,
//! 500 iterations, 3 seeds), comparator every 20 iterations and a stasis
//! minimum of 20 iterations.

use std::collections::{BTreeSet, HashSet};
use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::Instant;

use lexis_core::centrality::{g_core, h_score, path_centrality_all, robustness_curve};
use lexis_core::engine::{init_run, run_experiment, step, ComparatorRecord, RunConfig};
use lexis_core::glexis::{best_repeat_in, glexis_build, glexis_build_traced, greedy_step};
use lexis_core::metrics::{lev_jaccard, stasis_periods, MetricRecord};
use lexis_core::parsing::{optimal_parse, Dictionary};
use lexis_core::targetgen::Model;
use lexis_core::{Alphabet, LexisDag, NodeId, NodeKind, Symbol, SymbolString};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn letters(s: &str) -> SymbolString {
    SymbolString::from_letters(s)
}

// ---------------------------------------------------------------- oracles

/// Quadratic DP over all `(i, j)` with direct set membership.
fn brute_parse_cost(t: &[Symbol], entries: &HashSet<Vec<Symbol>>) -> Option<usize> {
    let mut best = vec![None; t.len() + 1];
    best[0] = Some(0usize);
    for j in 1..=t.len() {
        for i in 0..j {
            if let Some(c) = best[i] {
                if entries.contains(&t[i..j].to_vec()) {
                    best[j] = Some(best[j].map_or(c + 1, |b: usize| b.min(c + 1)));
                }
            }
        }
    }
    best[t.len()]
}

/// Every source-to-target path as a node list, by DFS from each target.
fn enumerate_paths(dag: &LexisDag) -> Vec<Vec<NodeId>> {
    fn walk(dag: &LexisDag, v: NodeId, stack: &mut Vec<NodeId>, out: &mut Vec<Vec<NodeId>>) {
        stack.push(v);
        if dag.kind(v) == Some(NodeKind::Source) {
            out.push(stack.clone());
        } else {
            for &p in dag.pieces(v) {
                walk(dag, p, stack, out);
            }
        }
        stack.pop();
    }
    let mut out = Vec::new();
    for t in dag.targets() {
        walk(dag, t, &mut Vec::new(), &mut out);
    }
    out
}

/// Best saving over every token substring of length ≥ 2 of every
/// non-source parse form, counting greedy left-to-right occurrences.
fn exhaustive_saving(dag: &LexisDag) -> Option<i64> {
    let forms: Vec<Vec<NodeId>> =
        dag.node_ids().filter(|&v| dag.kind(v) != Some(NodeKind::Source)).map(|v| dag.pieces(v).to_vec()).collect();
    let mut words = BTreeSet::new();
    for f in &forms {
        for i in 0..f.len() {
            for j in i + 2..=f.len() {
                words.insert(f[i..j].to_vec());
            }
        }
    }
    words
        .iter()
        .filter_map(|w| {
            let mut count = 0i64;
            for f in &forms {
                let mut i = 0;
                while i + w.len() <= f.len() {
                    if f[i..i + w.len()] == w[..] {
                        count += 1;
                        i += w.len();
                    } else {
                        i += 1;
                    }
                }
            }
            let len = w.len() as i64;
            let saving = count * (len - 1) - len;
            (count >= 2 && saving >= 0).then_some(saving)
        })
        .max()
}

// ------------------------------------------------------------- desk runs

struct DeskRun {
    records: Vec<MetricRecord>,
    comparisons: Vec<ComparatorRecord>,
    stasis_fraction: f64,
    invalid_steps: usize,
    cost_out_of_range: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Profile {
    Rnd,
    M,
    MsWeak,
    MsStrong,
    MrsWeak,
    MrsStrong,
    MrsStrongB1,
}

const PROFILES: [Profile; 7] = [
    Profile::Rnd,
    Profile::M,
    Profile::MsWeak,
    Profile::MsStrong,
    Profile::MrsWeak,
    Profile::MrsStrong,
    Profile::MrsStrongB1,
];

fn desk_config(p: Profile) -> RunConfig {
    let (model, beta) = match p {
        Profile::Rnd => (Model::Rnd, 0.0),
        Profile::M => (Model::M, 0.0),
        Profile::MsWeak => (Model::Ms, 1.0),
        Profile::MsStrong => (Model::Ms, 12.0),
        Profile::MrsWeak => (Model::Mrs, 1.0),
        Profile::MrsStrong | Profile::MrsStrongB1 => (Model::Mrs, 12.0),
    };
    let mut cfg = RunConfig::desk(model, beta);
    cfg.eval_every = 20;
    cfg.stasis_min_len = 20;
    cfg.stasis_mu = 0.1;
    if p == Profile::MrsStrongB1 {
        cfg.b = 1;
    }
    cfg
}

fn desk_run(p: Profile, run: usize) -> DeskRun {
    let cfg = desk_config(p);
    let mut state = init_run(&cfg, cfg.run_seed(run)).expect("init");
    let mut invalid_steps = 0;
    let mut cost_out_of_range = 0;
    for _ in 0..cfg.iterations {
        let rec = step(&mut state, &cfg).expect("step");
        if !state.dag.validate().is_valid() {
            invalid_steps += 1;
        }
        let c = rec.normalized_cost.unwrap();
        if !(c > 0.0 && c <= 1.0) {
            cost_out_of_range += 1;
        }
    }
    let stasis = stasis_periods(&state.top1_history, cfg.stasis_mu, cfg.stasis_min_len);
    DeskRun {
        records: state.records,
        comparisons: state.comparisons,
        stasis_fraction: stasis.fraction_in_stasis,
        invalid_steps,
        cost_out_of_range,
    }
}

fn desk() -> &'static Vec<(Profile, Vec<DeskRun>)> {
    static CACHE: OnceLock<Vec<(Profile, Vec<DeskRun>)>> = OnceLock::new();
    CACHE.get_or_init(|| {
        let jobs: Vec<(Profile, usize)> = PROFILES.iter().flat_map(|&p| (0..3).map(move |r| (p, r))).collect();
        let mut runs: Vec<(Profile, usize, DeskRun)> =
            jobs.into_par_iter().map(|(p, r)| (p, r, desk_run(p, r))).collect();
        runs.sort_by_key(|(p, r, _)| (PROFILES.iter().position(|q| q == p), *r));
        PROFILES
            .iter()
            .map(|&p| {
                let mine: Vec<DeskRun> = runs
                    .iter_mut()
                    .filter(|(q, _, _)| *q == p)
                    .map(|(_, _, d)| std::mem::replace(d, empty_run()))
                    .collect();
                (p, mine)
            })
            .collect()
    })
}

fn empty_run() -> DeskRun {
    DeskRun {
        records: Vec::new(),
        comparisons: Vec::new(),
        stasis_fraction: 0.0,
        invalid_steps: 0,
        cost_out_of_range: 0,
    }
}

fn runs_of(p: Profile) -> &'static [DeskRun] {
    &desk().iter().find(|(q, _)| *q == p).unwrap().1
}

fn mean(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (s, n) = xs.into_iter().fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    s / n as f64
}

/// Seed-mean of a metric at the final iteration.
fn final_mean(p: Profile, f: impl Fn(&MetricRecord) -> Option<f64>) -> f64 {
    mean(runs_of(p).iter().map(|r| f(r.records.last().unwrap()).unwrap_or(0.0)))
}

/// Mean of a metric over all iterations and seeds where it is reported.
fn stream_mean(p: Profile, f: impl Fn(&MetricRecord) -> Option<f64>) -> f64 {
    mean(runs_of(p).iter().flat_map(|r| r.records.iter().filter_map(&f)))
}

fn comparator_mean(p: Profile, f: impl Fn(&ComparatorRecord) -> f64) -> f64 {
    mean(runs_of(p).iter().flat_map(|r| r.comparisons.iter().map(&f)))
}

// ------------------------------------------------------------- criteria

fn criterion_1() -> Outcome {
    let mut notes = Vec::new();
    let (dag, steps) = glexis_build_traced(Alphabet::new(4).unwrap(), &[letters("aabcaabdaabc")]).unwrap();
    let added: Vec<SymbolString> = steps.iter().filter_map(|s| s.new_node()).map(|v| dag.string(v).clone()).collect();
    let trajectory_ok = steps.len() == 2
        && steps[0].cost_before == 12
        && steps[0].cost_after == 9
        && steps[1].cost_after == 9
        && added == [letters("aab"), letters("aabc")];
    notes.push(format!(
        "glexis costs {}->{}->{} adds {:?}",
        steps.first().map_or(0, |s| s.cost_before),
        steps.first().map_or(0, |s| s.cost_after),
        steps.last().map_or(0, |s| s.cost_after),
        added.len()
    ));

    // Three targets XYa, YXb, XcY with two shared 10-symbol modules.
    let x: Vec<u32> = (0..10).collect();
    let y: Vec<u32> = (10..20).collect();
    let cat = |parts: &[&[u32]]| SymbolString::from(parts.concat());
    let targets = [cat(&[&x, &y, &[20]]), cat(&[&y, &x, &[21]]), cat(&[&x, &[22], &y])];
    let mut hg = LexisDag::flat(Alphabet::new(23).unwrap(), &targets).unwrap();
    let t: Vec<NodeId> = targets.iter().map(|s| hg.target_by_string(s).unwrap()).collect();
    hg.add_intermediate(&SymbolString::from(x), &[(t[0], 1), (t[1], 11), (t[2], 1)]).unwrap();
    hg.add_intermediate(&SymbolString::from(y), &[(t[0], 11), (t[1], 1), (t[2], 12)]).unwrap();
    let h = h_score(&hg, 0.9).unwrap();
    let h_ok = h.core.len() == 2 && h.flat_core.len() == 3 && (h.value - 1.0 / 3.0).abs() < 1e-12;
    notes.push(format!("H={:.2} (|core|={}, |flat|={})", h.value, h.core.len(), h.flat_core.len()));

    let a = [letters("abc"), letters("cdef"), letters("fgh")];
    let b = [letters("abcd"), letters("cgef"), letters("xyh")];
    let lj = lev_jaccard(&a, &b);
    // The printed 0.61 is 11/18 rounded to two places.
    let lj_ok = (lj - 11.0 / 18.0).abs() <= 1e-9 && format!("{lj:.2}") == "0.61";
    notes.push(format!("LevJac={lj:.9}"));
    check(trajectory_ok && h_ok && lj_ok, notes.join("; "))
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let alphabet = Alphabet::new(4).unwrap();

    let mut parse_mismatch = 0;
    for _ in 0..200 {
        let len = rng.gen_range(1..=50);
        let t: Vec<Symbol> = (0..len).map(|_| rng.gen_range(0..4)).collect();
        let mut dict = Dictionary::sources(alphabet);
        let mut entries: HashSet<Vec<Symbol>> = (0..4).map(|s| vec![s]).collect();
        let next_id = 4u32;
        for e in 0..rng.gen_range(0..12) {
            let w: Vec<Symbol> = if rng.gen_bool(0.7) {
                let i = rng.gen_range(0..len);
                let j = rng.gen_range(i + 1..=len.min(i + 8));
                t[i..j].to_vec()
            } else {
                (0..rng.gen_range(2..6)).map(|_| rng.gen_range(0..4)).collect()
            };
            if w.len() >= 2 && entries.insert(w.clone()) {
                dict.insert(SymbolString::from(w), NodeId(next_id + e));
            }
        }
        let got = optimal_parse(&t, &dict).ok().map(|p| p.cost());
        if got != brute_parse_cost(&t, &entries) {
            parse_mismatch += 1;
        }
    }

    let mut centrality_mismatch = 0;
    let mut dags = 0;
    while dags < 50 {
        let count = rng.gen_range(1..=8);
        let mut targets: Vec<SymbolString> =
            (0..count).map(|_| (0..rng.gen_range(2..=30)).map(|_| rng.gen_range(0..4)).collect()).collect();
        targets.sort();
        targets.dedup();
        let dag = glexis_build(alphabet, &targets).unwrap();
        let paths = enumerate_paths(&dag);
        if paths.len() > 10_000 {
            continue;
        }
        dags += 1;
        for (v, c) in path_centrality_all(&dag) {
            if c != paths.iter().filter(|p| p.contains(&v)).count() as u64 {
                centrality_mismatch += 1;
            }
        }
        for tau in [0.5, 0.85, 1.0] {
            let core = g_core(&dag, tau);
            for (j, frac) in robustness_curve(&core) {
                let left = paths.iter().filter(|p| !p.iter().any(|v| core.members[..j].contains(v))).count();
                if (frac - left as f64 / paths.len() as f64).abs() > 0.0 {
                    centrality_mismatch += 1;
                }
            }
        }
    }

    let five = Alphabet::new(5).unwrap();
    let mut saving_mismatch = 0;
    let mut steps_checked = 0;
    for _ in 0..40 {
        let count = rng.gen_range(1..=5);
        let mut targets: Vec<SymbolString> =
            (0..count).map(|_| (0..rng.gen_range(2..=20)).map(|_| rng.gen_range(0..5)).collect()).collect();
        targets.sort();
        targets.dedup();
        let mut dag = LexisDag::flat(five, &targets).unwrap();
        let mut scope: Vec<NodeId> = dag.targets().collect();
        loop {
            let expected = exhaustive_saving(&dag);
            let got = best_repeat_in(&dag, &scope).map(|c| c.saving);
            steps_checked += 1;
            if got != expected {
                saving_mismatch += 1;
            }
            let Some(step) = greedy_step(&mut dag, &scope).unwrap() else { break };
            scope.extend(step.new_node());
            scope.retain(|&h| dag.contains(h));
        }
        if dag.edge_cost() != glexis_build(five, &targets).unwrap().edge_cost() {
            saving_mismatch += 1;
        }
    }
    check(
        parse_mismatch + centrality_mismatch + saving_mismatch == 0,
        format!(
            "parse mismatches {parse_mismatch}/200; centrality/robustness mismatches {centrality_mismatch} over {dags} DAGs; \
             saving mismatches {saving_mismatch} over {steps_checked} greedy steps"
        ),
    )
}

fn criterion_3() -> Outcome {
    let mut invalid = 0;
    let mut cost_bad = 0;
    let mut pid_bad = 0;
    let mut points = 0;
    for (_, runs) in desk() {
        for r in runs {
            invalid += r.invalid_steps;
            cost_bad += r.cost_out_of_range;
            for c in &r.comparisons {
                points += 1;
                if c.pid > c.pid_bound * (1.0 + 1e-12) {
                    pid_bad += 1;
                }
            }
        }
    }
    check(
        invalid == 0 && cost_bad == 0 && pid_bad == 0 && points > 0,
        format!("invalid DAGs {invalid}; normalized cost outside (0,1] {cost_bad}; PID above bound {pid_bad}/{points}"),
    )
}

fn criterion_4() -> Outcome {
    use Profile::*;
    let cost = |p| final_mean(p, |r| r.normalized_cost);
    let depth = |p| final_mean(p, |r| r.avg_depth);
    let node_len = |p| final_mean(p, |r| r.avg_node_length);
    let div = |p| final_mean(p, |r| r.diversity);
    let h = |p| final_mean(p, |r| r.h_score);
    let core = |p| final_mean(p, |r| r.core_size.map(|c| c as f64));
    let checks = [
        ("cost RND>M>MS-s", cost(Rnd) > cost(M) && cost(M) > cost(MsStrong), [cost(Rnd), cost(M), cost(MsStrong)]),
        (
            "depth RND<M<MS-s",
            depth(Rnd) < depth(M) && depth(M) < depth(MsStrong),
            [depth(Rnd), depth(M), depth(MsStrong)],
        ),
        (
            "node length RND<M<MS-s",
            node_len(Rnd) < node_len(M) && node_len(M) < node_len(MsStrong),
            [node_len(Rnd), node_len(M), node_len(MsStrong)],
        ),
        (
            "diversity RND>MRS-s>MS-s",
            div(Rnd) > div(MrsStrong) && div(MrsStrong) > div(MsStrong),
            [div(Rnd), div(MrsStrong), div(MsStrong)],
        ),
        ("H MRS-s>MRS-w+0.05", h(MrsStrong) > h(MrsWeak) + 0.05, [h(MrsStrong), h(MrsWeak), f64::NAN]),
        ("core MRS-s<MRS-w", core(MrsStrong) < core(MrsWeak), [core(MrsStrong), core(MrsWeak), f64::NAN]),
    ];
    let detail: Vec<String> = checks
        .iter()
        .map(|(name, ok, v)| {
            let vals: Vec<String> = v.iter().filter(|x| !x.is_nan()).map(|x| format!("{x:.3}")).collect();
            format!("{name} [{}]{}", vals.join(", "), if *ok { "" } else { " VIOLATED" })
        })
        .collect();
    check(checks.iter().all(|c| c.1), detail.join("; "))
}

fn criterion_5() -> Outcome {
    let strong = stream_mean(Profile::MrsStrong, |r| r.acceptance_likelihood);
    let weak = stream_mean(Profile::MrsWeak, |r| r.acceptance_likelihood);
    let ratio = stream_mean(Profile::MrsStrong, |r| r.cost_ratio);
    check(
        strong < 0.6 && strong < weak && ratio < 1.0,
        format!("acceptance MRS-s {strong:.3} vs MRS-w {weak:.3}; MRS/MR cost ratio {ratio:.3}"),
    )
}

fn criterion_6() -> Outcome {
    let strong = mean(runs_of(Profile::MrsStrong).iter().map(|r| r.stasis_fraction));
    let weak = mean(runs_of(Profile::MrsWeak).iter().map(|r| r.stasis_fraction));
    check(strong > weak, format!("fraction in stasis MRS-s {strong:.3} vs MRS-w {weak:.3}"))
}

fn criterion_7() -> Outcome {
    let pid1 = comparator_mean(Profile::MrsStrongB1, |c| c.pid);
    let pid5 = comparator_mean(Profile::MrsStrong, |c| c.pid);
    let cs_depth = comparator_mean(Profile::MrsStrong, |c| c.cs_depth);
    let inc_depth = comparator_mean(Profile::MrsStrong, |c| c.inc_depth);
    let inc_h = comparator_mean(Profile::MrsStrong, |c| c.inc_h_score.unwrap_or(0.0));
    let cs_h = comparator_mean(Profile::MrsStrong, |c| c.cs_h_score.unwrap_or(0.0));
    check(
        pid1 > pid5 && cs_depth >= inc_depth && inc_h > 0.0 && cs_h > 0.0,
        format!(
            "PID b=1 {pid1:.3} vs b=5 {pid5:.3}; depth CS {cs_depth:.3} vs INC {inc_depth:.3}; H INC {inc_h:.3} CS {cs_h:.3}"
        ),
    )
}

fn criterion_8() -> Outcome {
    let mut cfg = desk_config(Profile::MrsStrong);
    cfg.runs = 1;
    cfg.rng_seed = 8;
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        run_experiment(&cfg, d.path()).map_err(|e| e.to_string())?;
    }
    let mut differing = Vec::new();
    for f in ["run-0/metrics.jsonl", "run-0/comparator.jsonl", "run-0/events.log", "summary.csv"] {
        let a = std::fs::read(dirs[0].path().join(f)).unwrap();
        let b = std::fs::read(dirs[1].path().join(f)).unwrap();
        if a != b || a.is_empty() {
            differing.push(f);
        }
    }
    check(differing.is_empty(), format!("MRS-strong seed 8, 500 iterations; differing files {differing:?}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("exact worked examples", criterion_1),
        ("oracle equivalence", criterion_2),
        ("invariant suite", criterion_3),
        ("ablation ordering", criterion_4),
        ("evolvability", criterion_5),
        ("stasis", criterion_6),
        ("incremental vs clean-slate", criterion_7),
        ("determinism", criterion_8),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("PASS criterion {} ({name}): {d} [{secs:.1}s]", i + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL criterion {} ({name}): {d} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
