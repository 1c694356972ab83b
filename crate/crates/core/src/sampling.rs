//! Deterministic point sets on spheres.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Default seed for every sampled check.
pub const DEFAULT_SEED: u64 = 42;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Fibonacci lattice of `count` nearly uniform points on S².
pub fn fibonacci_sphere(count: usize) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let t = golden * i as f64;
            [r * t.cos(), r * t.sin(), z]
        })
        .collect()
}

/// Uniform random unit vector in `R^d`.
pub fn random_unit<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-6 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Unit-sphere samples in `R^d`: the Fibonacci lattice for `d = 3`, seeded
/// random points otherwise.
pub fn sphere_samples(d: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    if d == 3 {
        fibonacci_sphere(count).into_iter().map(|p| p.to_vec()).collect()
    } else {
        let mut r = rng(seed);
        (0..count).map(|_| random_unit(&mut r, d)).collect()
    }
}
