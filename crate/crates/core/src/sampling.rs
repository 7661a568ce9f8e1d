//! Seeded random chart points with rejection of singular points.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::expr::ChartPoint;

/// Rejections tolerated before sampling gives up.
pub const MAX_REJECTIONS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("gave up after {rejections} rejected points ({accepted} accepted)")]
pub struct SamplingError {
    pub rejections: usize,
    pub accepted: usize,
}

/// Uniform sampler on the box `|t|, |xⁱ|, |yⁱ| ≤ half_width`.
#[derive(Debug, Clone)]
pub struct PointSampler {
    n: usize,
    half_width: f64,
    rng: ChaCha8Rng,
}

impl PointSampler {
    pub fn new(n: usize, seed: u64, half_width: f64) -> Self {
        PointSampler { n, half_width, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn unit_box(n: usize, seed: u64) -> Self {
        PointSampler::new(n, seed, 1.0)
    }

    pub fn next_point(&mut self) -> ChartPoint {
        let w = self.half_width;
        let coords: Vec<f64> = (0..2 * self.n + 1).map(|_| self.rng.random_range(-w..=w)).collect();
        ChartPoint::from_coords(self.n, &coords)
    }

    /// Draws `count` points accepted by `valid`, rejecting at most
    /// [`MAX_REJECTIONS`] candidates in total.
    pub fn sample(
        &mut self,
        count: usize,
        valid: impl Fn(&ChartPoint) -> bool,
    ) -> Result<Vec<ChartPoint>, SamplingError> {
        let mut out = Vec::with_capacity(count);
        let mut rejections = 0;
        while out.len() < count {
            let p = self.next_point();
            if valid(&p) {
                out.push(p);
            } else {
                rejections += 1;
                if rejections > MAX_REJECTIONS {
                    return Err(SamplingError { rejections, accepted: out.len() });
                }
            }
        }
        Ok(out)
    }

    /// A random vector with entries in `[-1, 1]`.
    pub fn next_vector(&mut self, len: usize) -> Vec<f64> {
        (0..len).map(|_| self.rng.random_range(-1.0..=1.0)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_for_a_seed() {
        let a = PointSampler::unit_box(2, 42).sample(5, |_| true).unwrap();
        let b = PointSampler::unit_box(2, 42).sample(5, |_| true).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|p| p.coords().iter().all(|c| c.abs() <= 1.0)));
    }

    #[test]
    fn rejection_budget() {
        let err = PointSampler::unit_box(1, 1).sample(3, |_| false).unwrap_err();
        assert_eq!(err.accepted, 0);
        assert_eq!(err.rejections, MAX_REJECTIONS + 1);
        let half = PointSampler::unit_box(1, 1).sample(50, |p| p.x[0] > 0.0).unwrap();
        assert!(half.iter().all(|p| p.x[0] > 0.0));
    }
}
