//! Small numerical kernels shared across the crate.

pub mod quad;
pub mod rk;
pub mod roots;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PRIMES: [u32; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

/// Radical inverse of `index` in `base`.
pub fn radical_inverse(mut index: u64, base: u32) -> f64 {
    let b = base as u64;
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while index > 0 {
        r += (index % b) as f64 * f;
        index /= b;
        f *= inv;
    }
    r
}

/// Randomly shifted Halton points in the unit cube.
#[derive(Debug, Clone)]
pub struct LowDiscrepancy {
    shift: Vec<f64>,
    next: u64,
}

impl LowDiscrepancy {
    pub fn new(dim: usize, seed: u64) -> Self {
        assert!(dim <= PRIMES.len());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shift = (0..dim).map(|_| rng.gen::<f64>()).collect();
        Self { shift, next: 1 }
    }

    pub fn next_point(&mut self) -> Vec<f64> {
        let i = self.next;
        self.next += 1;
        self.shift
            .iter()
            .enumerate()
            .map(|(d, s)| (radical_inverse(i, PRIMES[d]) + s).fract())
            .collect()
    }
}

/// Map a unit coordinate into `[lo, hi]`.
pub fn scale(u: f64, (lo, hi): (f64, f64)) -> f64 {
    lo + u * (hi - lo)
}

/// Evenly spaced points in `[a, b]`.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|i| if i == n - 1 { b } else { a + (b - a) * i as f64 / (n - 1) as f64 }).collect()
}
