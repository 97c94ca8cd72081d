//! Fixed-seed proptest configuration so every run draws the same cases.

use proptest::test_runner::{Config, RngSeed};

pub fn config(cases: u32) -> Config {
    Config { cases, rng_seed: RngSeed::Fixed(0x7ec5_01e5), failure_persistence: None, ..Config::default() }
}
