//! Shared fixtures for the benchmark targets.

use orthant_core::{realize_two_valued, EnvironmentWindow, Region, TwoValuedModel, UniformField};

pub fn orthant_window(seed: u64, p: f64, size: u32) -> EnvironmentWindow {
    realize_two_valued(
        &UniformField::new(seed),
        &TwoValuedModel::orthant(p).unwrap(),
        Region::centered_square(size),
    )
}
