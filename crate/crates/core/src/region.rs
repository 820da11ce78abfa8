//! Random rectangle sampling and the portable random stream behind it.
//!
//! Every random draw in the crate goes through [`RngStream`]: xoshiro256++
//! seeded from a single `u64` by four successive SplitMix64 outputs. Unit
//! floats take the top 53 bits of a draw scaled by 2^-53, so they lie in
//! `[0, 1)` and are reproducible in any language.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::{SplitMix64, Xoshiro256PlusPlus};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::Rect;

/// Identifies the generator construction. Bump on any change to draw order
/// or bit construction.
pub const RNG_ALGORITHM: &str = "xoshiro256++/splitmix64-seeded/f64-top53";

/// Single-owner stream of pseudo-random draws.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    inner: Xoshiro256PlusPlus,
}

impl RngStream {
    pub fn from_seed(seed: u64) -> Self {
        Self {
            seed,
            inner: Xoshiro256PlusPlus::seed_from_u64(seed),
        }
    }

    /// The seed this stream was created from.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `[0, 1)`.
    pub fn next_unit_float(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// `a + (b - a) * u`.
    pub fn uniform(&mut self, a: f64, b: f64) -> f64 {
        a + (b - a) * self.next_unit_float()
    }

    /// `floor(u * n)`, in `0..n`. `n` must be positive.
    pub fn below(&mut self, n: u32) -> u32 {
        debug_assert!(n > 0);
        ((self.next_unit_float() * f64::from(n)) as u32).min(n - 1)
    }
}

/// One SplitMix64 step from state `x`: advance by the golden gamma, then mix.
pub fn splitmix64(x: u64) -> u64 {
    SplitMix64::seed_from_u64(x).next_u64()
}

/// Successive SplitMix64 outputs starting from state `seed`; handy for
/// handing out independent stream seeds.
pub fn seed_sequence(seed: u64) -> impl Iterator<Item = u64> {
    let mut sm = SplitMix64::seed_from_u64(seed);
    std::iter::repeat_with(move || sm.next_u64())
}

/// Area and aspect ranges for [`rand_position`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionParams {
    /// Smallest rectangle area as a fraction of the image area.
    pub area_lo: f64,
    pub area_hi: f64,
    /// Height / width ratio bounds.
    pub aspect_lo: f64,
    pub aspect_hi: f64,
    pub max_attempts: u32,
}

impl Default for RegionParams {
    fn default() -> Self {
        Self {
            area_lo: 0.02,
            area_hi: 0.4,
            aspect_lo: 0.3,
            aspect_hi: 1.0 / 0.3,
            max_attempts: 100,
        }
    }
}

impl RegionParams {
    pub fn validate(&self) -> Result<()> {
        let ok_area = self.area_lo > 0.0 && self.area_lo <= self.area_hi && self.area_hi <= 1.0;
        if !ok_area {
            return Err(Error::Config(format!(
                "area range must satisfy 0 < lo <= hi <= 1, got [{}, {}]",
                self.area_lo, self.area_hi
            )));
        }
        if !(self.aspect_lo > 0.0 && self.aspect_lo <= self.aspect_hi && self.aspect_hi.is_finite()) {
            return Err(Error::Config(format!(
                "aspect range must satisfy 0 < lo <= hi, got [{}, {}]",
                self.aspect_lo, self.aspect_hi
            )));
        }
        if self.max_attempts == 0 {
            return Err(Error::Config("max_attempts must be at least 1".into()));
        }
        Ok(())
    }
}

/// Samples a rectangle strictly smaller than the image in both dimensions.
///
/// Each attempt draws, in order: area fraction, aspect, column, row. Sides are
/// `round(sqrt(area * aspect))` (height) and `round(sqrt(area / aspect))`
/// (width). An attempt fails when a side is zero or not strictly smaller than
/// the image side. Returns `None` after `max_attempts` failures.
pub fn rand_position(width: u32, height: u32, params: &RegionParams, rng: &mut RngStream) -> Option<Rect> {
    let image_area = f64::from(width) * f64::from(height);
    for _ in 0..params.max_attempts {
        let target_area = rng.uniform(params.area_lo, params.area_hi) * image_area;
        let aspect = rng.uniform(params.aspect_lo, params.aspect_hi);
        let h = (target_area * aspect).sqrt().round();
        let w = (target_area / aspect).sqrt().round();
        if w >= 1.0 && h >= 1.0 && w < f64::from(width) && h < f64::from(height) {
            let (w, h) = (w as u32, h as u32);
            let x0 = rng.below(width - w + 1);
            let y0 = rng.below(height - h + 1);
            return Some(Rect { x0, y0, w, h });
        }
    }
    None
}
