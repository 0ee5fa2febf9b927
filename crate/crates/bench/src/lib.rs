//! Shared fixtures for the primitive benchmarks.

use lightlock_core::geometry::{rat_int, SpacetimePoint};
use lightlock_core::pc::{PcParams, PcScenario};
use lightlock_core::sim::rats;

/// The toy commitment scenario used across benchmarks: four committable
/// points on a line between two verifiers.
pub fn toy_scenario(seed: u64) -> PcScenario {
    PcScenario::new(
        1,
        vec![rats(&[0]), rats(&[6])],
        vec![
            SpacetimePoint::new(rats(&[2]), rat_int(10)),
            SpacetimePoint::new(rats(&[3]), rat_int(10)),
            SpacetimePoint::new(rats(&[4]), rat_int(10)),
            SpacetimePoint::new(rats(&[3]), rat_int(13)),
        ],
        PcParams { n: 8, rounds: 1, kappa: 8, lambda_com: 4, payload_bits: 1 },
        seed,
    )
    .expect("bench scenario valid")
}
