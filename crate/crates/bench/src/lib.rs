//! Shared fixtures for the benchmarks in `benches/`.

use specshare::{EstimatorConfig, FadingModel, RngStream, StateSet};

pub const SEED: u64 = 11;

/// `n` Rayleigh/Rayleigh Monte Carlo states.
pub fn rayleigh_states(n: usize) -> StateSet {
    let r = FadingModel::rayleigh();
    EstimatorConfig::monte_carlo(n, RngStream::new(SEED, 0))
        .and_then(|c| c.states(&r, &r))
        .expect("valid fixture")
}
