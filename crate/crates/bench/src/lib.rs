//! Shared data builders for the criterion benches.

use discipline_core::synth::{generate, SynthConfig, SynthData};

/// Synthetic workload sized for benchmarking. Seed is fixed so runs are
/// comparable across checkouts.
pub fn workload(train: usize, queries: usize) -> SynthData {
    generate(&SynthConfig::new(train, queries, 0xBE7C))
}
