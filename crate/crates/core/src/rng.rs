//! Seeded random stream used by the planner.
//!
//! The generator is xoshiro256++ seeded through SplitMix64, and uniform
//! variates are built from the top 53 bits of each draw. Both steps are
//! spelled out here so the stream does not depend on the sampling code of
//! any particular `rand` release.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

pub type PlannerRng = Xoshiro256PlusPlus;

pub fn planner_rng(seed: u64) -> PlannerRng {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

/// Uniform variate in `[0, 1)` from one 64-bit draw.
pub fn unit_f64<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform variate in `[-bound, bound)`, one draw.
pub fn symmetric_f64<R: RngCore + ?Sized>(rng: &mut R, bound: f64) -> f64 {
    bound * (2.0 * unit_f64(rng) - 1.0)
}
