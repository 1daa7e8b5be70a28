//! Shared inputs for the benchmarks.

use lexis_core::engine::{init_run, step, RunConfig, RunState};
use lexis_core::targetgen::{random_string, Model};
use lexis_core::{Alphabet, SymbolString};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `count` random strings of length `k` over `n` symbols.
pub fn random_targets(n: usize, k: usize, count: usize, seed: u64) -> Vec<SymbolString> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alphabet = Alphabet::new(n).expect("n >= 2");
    (0..count).map(|_| random_string(alphabet, k, &mut rng)).collect()
}

/// A desk-profile MRS-strong run advanced to `iterations`.
pub fn evolved_state(iterations: usize) -> (RunConfig, RunState) {
    let cfg = RunConfig { eval_every: 0, ..RunConfig::desk(Model::Mrs, 12.0) };
    let mut state = init_run(&cfg, 7).expect("valid desk config");
    for _ in 0..iterations {
        step(&mut state, &cfg).expect("desk step");
    }
    (cfg, state)
}
