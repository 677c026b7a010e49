//! Deterministic point sets on spheres.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::f64::consts::PI;

/// Seed used for every pseudo-random sample the library draws on its own.
pub const DEFAULT_SEED: u64 = 0x6e69_6c66_6f63_6b00;

pub fn normalize(v: &mut [f64]) -> f64 {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// `count` pseudo-random unit vectors in R^dim (Gaussian then normalized).
pub fn random_sphere(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| loop {
            let mut v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
            if normalize(&mut v) > 1e-8 {
                break v;
            }
        })
        .collect()
}

/// Equally spaced points on the unit circle.
pub fn circle(count: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|i| {
            let a = 2.0 * PI * (i as f64 + 0.5) / count as f64;
            vec![a.cos(), a.sin()]
        })
        .collect()
}

/// Fibonacci lattice on S^2.
pub fn fibonacci_sphere(count: usize) -> Vec<Vec<f64>> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            vec![r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

/// Hyperspherical-angle product grid on S^{dim-1} with roughly `target` points.
pub fn angle_grid(dim: usize, target: usize) -> Vec<Vec<f64>> {
    assert!(dim >= 2);
    let angles = dim - 1;
    let steps = ((target as f64).powf(1.0 / angles as f64).ceil() as usize).max(2);
    let mut out = Vec::new();
    let mut idx = vec![0usize; angles];
    loop {
        // polar angles in (0, pi), last angle in [0, 2pi)
        let mut v = vec![0.0; dim];
        let mut s = 1.0;
        for a in 0..angles {
            let t = if a + 1 == angles {
                2.0 * PI * idx[a] as f64 / steps as f64
            } else {
                PI * (idx[a] as f64 + 0.5) / steps as f64
            };
            if a + 1 == angles {
                v[a] = s * t.cos();
                v[a + 1] = s * t.sin();
            } else {
                v[a] = s * t.cos();
                s *= t.sin();
            }
        }
        out.push(v);
        let mut k = 0;
        loop {
            if k == angles {
                return out;
            }
            idx[k] += 1;
            if idx[k] < steps {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Quasi-uniform sample of S^{dim-1}: ±1 on the line, equally spaced on the
/// circle, Fibonacci on S^2 and an angle grid above.
pub fn sphere_grid(dim: usize, count: usize) -> Vec<Vec<f64>> {
    match dim {
        0 => Vec::new(),
        1 => vec![vec![1.0], vec![-1.0]],
        2 => circle(count),
        3 => fibonacci_sphere(count),
        _ => angle_grid(dim, count),
    }
}

/// Exactly `count` points (2 on the line): circle and Fibonacci samples in
/// low dimension, seeded Gaussian samples above.
pub fn sample_sphere(dim: usize, count: usize) -> Vec<Vec<f64>> {
    match dim {
        0 => Vec::new(),
        1 => vec![vec![1.0], vec![-1.0]],
        2 => circle(count),
        3 => fibonacci_sphere(count),
        _ => random_sphere(dim, count, DEFAULT_SEED),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids_are_unit() {
        for dim in 1..6 {
            for p in sphere_grid(dim, 200) {
                let n: f64 = p.iter().map(|x| x * x).sum();
                assert!((n - 1.0).abs() < 1e-12, "dim {dim}: {p:?}");
            }
        }
    }

    #[test]
    fn sample_sphere_counts() {
        assert_eq!(sample_sphere(1, 64).len(), 2);
        for dim in 2..7 {
            let pts = sample_sphere(dim, 64);
            assert_eq!(pts.len(), 64);
            assert!(pts.iter().all(|p| (p.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12));
        }
    }

    #[test]
    fn random_sphere_is_reproducible() {
        assert_eq!(random_sphere(4, 3, 7), random_sphere(4, 3, 7));
        assert_ne!(random_sphere(4, 3, 7), random_sphere(4, 3, 8));
    }

    #[test]
    fn angle_grid_size() {
        let g = angle_grid(4, 4096);
        assert!(g.len() >= 4096);
    }
}
