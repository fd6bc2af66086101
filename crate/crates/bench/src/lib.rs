//! Shared fixtures for the construction benchmarks.

use lepage_core::charts::{shear, ChartTransform};
use lepage_core::lepage::Lagrangian;
use lepage_core::suite::Sampler;
use lepage_core::{JetSpace, Result};

/// A nonvanishing first-order Lagrangian with `m` fields over `n` dimensions.
pub fn first_order(n: usize, m: usize, seed: u64) -> Result<Lagrangian> {
    let space = JetSpace::new(n, m, 3)?;
    Sampler::new(seed).lagrangian(space, 1, 3, true)
}

/// A nonvanishing second-order Lagrangian in the plane.
pub fn second_order(seed: u64) -> Result<Lagrangian> {
    let space = JetSpace::new(2, 1, 5)?;
    Sampler::new(seed).lagrangian(space, 2, 3, true)
}

/// A third-order Lagrangian in the plane together with the quadratic shear.
pub fn third_order_with_shear(seed: u64) -> Result<(Lagrangian, ChartTransform)> {
    let space = JetSpace::new(2, 1, 7)?;
    let l = Sampler::new(seed).lagrangian(space, 3, 2, false)?;
    Ok((l, shear(space)?))
}
