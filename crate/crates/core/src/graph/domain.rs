use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::Configuration;

/// `Ω(h, κ) = [-κ, κ] × [-1/κ, 1/κ]` minus the same rectangle scaled by `h`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub h: f64,
    pub kappa: f64,
}

impl DomainSpec {
    pub fn new(h: f64, kappa: f64) -> Result<Self> {
        let spec = Self { h, kappa };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.h) {
            return invalid(format!("hollow fraction h must lie in [0, 1), got {}", self.h));
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return invalid(format!("kappa must be positive, got {}", self.kappa));
        }
        Ok(())
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        let (hx, hy) = (self.kappa, 1.0 / self.kappa);
        let outer = x.abs() <= hx && y.abs() <= hy;
        let hole = self.h > 0.0 && x.abs() <= self.h * hx && y.abs() <= self.h * hy;
        outer && !hole
    }

    pub fn area(&self) -> f64 {
        4.0 * (1.0 - self.h * self.h)
    }
}

/// `n` i.i.d. uniform points on `Ω(h, κ)` by rejection from the outer rectangle.
pub fn sample_domain(spec: &DomainSpec, n: usize, seed: u64) -> Result<Configuration> {
    spec.validate()?;
    if n == 0 {
        return invalid("cannot sample an empty configuration");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (hx, hy) = (spec.kappa, 1.0 / spec.kappa);
    let mut coords = Vec::with_capacity(2 * n);
    while coords.len() < 2 * n {
        let x = rng.random_range(-hx..=hx);
        let y = rng.random_range(-hy..=hy);
        if spec.contains(x, y) {
            coords.push(x);
            coords.push(y);
        }
    }
    Configuration::new(n, 2, coords)
}
