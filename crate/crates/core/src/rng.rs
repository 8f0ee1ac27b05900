//! The single seeded generator used everywhere randomness is needed.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

/// Recorded in experiment metadata so runs can be matched across implementations.
pub const RNG_NAME: &str = "xoshiro256++/splitmix64-seeded";

/// xoshiro256++ seeded through SplitMix64 from a `u64`.
#[derive(Debug, Clone)]
pub struct Rng(Xoshiro256PlusPlus);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng(Xoshiro256PlusPlus::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_in(&mut self, low: f64, high: f64) -> f64 {
        // Guard against rounding up to `high`.
        let v = low + (high - low) * self.uniform();
        if v < high {
            v
        } else {
            low
        }
    }

    /// Standard normal by Box-Muller (one draw per call, the sine half is discarded).
    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    pub fn normal_vector(&mut self, len: usize) -> Vector {
        Vector::from_fn(len, |_| self.normal())
    }

    pub fn normal_matrix(&mut self, rows: usize, cols: usize) -> Matrix {
        Matrix::from_fn(rows, cols, |_, _| self.normal())
    }
}

/// `d_y` i.i.d. uniform draws from `[low, high)`.
pub fn sample_y(d_y: usize, low: f64, high: f64, seed: u64) -> Result<Vector> {
    if d_y == 0 {
        return Err(Error::Usage("d_y must be positive".into()));
    }
    if !low.is_finite() || !high.is_finite() || low >= high {
        return Err(Error::Usage(format!("invalid range [{low}, {high})")));
    }
    let mut rng = Rng::new(seed);
    Ok(Vector::from_fn(d_y, |_| rng.uniform_in(low, high)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_draws() {
        assert_eq!(
            sample_y(5, -1.0, 1.0, 42).unwrap(),
            sample_y(5, -1.0, 1.0, 42).unwrap()
        );
        assert_ne!(
            sample_y(5, -1.0, 1.0, 42).unwrap(),
            sample_y(5, -1.0, 1.0, 43).unwrap()
        );
    }

    #[test]
    fn draws_stay_in_range() {
        let y = sample_y(1000, 3.0, 6.0, 9).unwrap();
        assert!(y.iter().all(|&v| (3.0..6.0).contains(&v)));
    }

    #[test]
    fn degenerate_requests_are_usage_errors() {
        assert!(matches!(sample_y(0, 0.0, 1.0, 1), Err(Error::Usage(_))));
        assert!(matches!(sample_y(3, 1.0, 1.0, 1), Err(Error::Usage(_))));
        assert!(matches!(sample_y(3, 2.0, 1.0, 1), Err(Error::Usage(_))));
    }

    #[test]
    fn normals_have_unit_scale() {
        let mut rng = Rng::new(3);
        let n = 20_000;
        let xs: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.05);
        assert!((var - 1.0).abs() < 0.05);
    }
}
