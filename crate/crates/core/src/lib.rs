//! NB-IoT NPUSCH uplink link adaptation: payload and resource-unit tables,
//! pluggable block-error-rate oracles, lookup-table scheduling, six
//! adaptation strategies, and a session simulator covering acknowledged and
//! unacknowledged service modes at extreme-coverage SNRs.

pub mod channel;
pub mod cli;
pub mod config;
pub mod lut;
pub mod sim;
pub mod strategy;

pub use channel::{BlerGrid, BlerOracle, LinkParams, ResourceTable, Snr, SyntheticAwgn};
pub use lut::{Lut, LutEntry, LutKey, QosBand, QosThresholds};
pub use sim::{ServiceMode, SessionConfig, SessionResult};
pub use strategy::StrategyKind;

/// Derives an independent per-stream seed from a base seed, so that every
/// session in a sweep gets its own reproducible random source regardless of
/// execution order. Uses the splitmix64 finalizer for dispersion.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base
        .wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_seeds_are_stable_and_distinct() {
        assert_eq!(derive_seed(7, 0), derive_seed(7, 0));
        assert_ne!(derive_seed(7, 0), derive_seed(7, 1));
        assert_ne!(derive_seed(7, 0), derive_seed(8, 0));
        let mut seen = std::collections::HashSet::new();
        for stream in 0..10_000u64 {
            assert!(seen.insert(derive_seed(42, stream)));
        }
    }
}
