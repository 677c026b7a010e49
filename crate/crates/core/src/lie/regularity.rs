//! Regularity certification: `ω_θ` nondegenerate for every `θ ≠ 0`.
//!
//! The minimum of `σ_min(Ω_θ)` over the unit sphere of `g2*` is located by a
//! deterministic grid followed by compass-search refinement around the best
//! grid points. The cross-check path minimizes `σ_min(ad_x)` over the unit
//! sphere of `g1` starting from random samples.

use super::Step2Algebra;
use crate::linalg;
use crate::sampling;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

#[derive(Debug, Clone)]
pub struct RegularityOptions {
    /// Grid size on the `θ`-sphere.
    pub grid_points: usize,
    /// Threshold on `σ_min` relative to `max_k ‖B[k]‖`.
    pub rel_tol: f64,
    /// Number of best grid points refined by local search.
    pub refine_starts: usize,
}

impl Default for RegularityOptions {
    fn default() -> Self {
        Self { grid_points: 4096, rel_tol: 1e-8, refine_starts: 8 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    /// A skew form on an odd-dimensional space is degenerate.
    OddDimension,
    /// `θ` on the sphere with `σ_min(Ω_θ) ≤ tol`; `x` spans a kernel
    /// direction of `Ω_θ`, so `ad_x` misses `θ` and is not surjective.
    DegenerateDirection { theta: Vec<f64>, sigma_min: f64, x: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Regular,
    NotRegular(Witness),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegularityReport {
    pub verdict: Verdict,
    /// Minimum of `σ_min(Ω_θ)` found on the unit `θ`-sphere.
    pub sphere_min_sigma: f64,
    pub argmin_theta: Vec<f64>,
    /// Absolute threshold used (`rel_tol · max_k ‖B[k]‖`).
    pub tolerance: f64,
    pub generation_rank: usize,
    /// `g2` is spanned by brackets of `g1`.
    pub generated: bool,
    pub grid_points: usize,
}

impl RegularityReport {
    pub fn is_regular(&self) -> bool {
        self.verdict == Verdict::Regular
    }
}

pub fn is_regular(a: &Step2Algebra) -> RegularityReport {
    a.regularity().clone()
}

pub fn is_regular_with(a: &Step2Algebra, opts: &RegularityOptions) -> RegularityReport {
    let tolerance = opts.rel_tol * a.scale();
    let generation_rank = a.generation_rank();
    let generated = generation_rank == a.n2();

    if a.n1() % 2 == 1 {
        return RegularityReport {
            verdict: Verdict::NotRegular(Witness::OddDimension),
            sphere_min_sigma: 0.0,
            argmin_theta: Vec::new(),
            tolerance,
            generation_rank,
            generated,
            grid_points: 0,
        };
    }

    let grid = sampling::sphere_grid(a.n2(), opts.grid_points);
    let sig = |t: &[f64]| linalg::sigma_min(&a.omega_unchecked(t));
    let mut scored: Vec<(f64, usize)> =
        grid.par_iter().enumerate().map(|(i, t)| (sig(t), i)).collect();
    scored.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.cmp(&q.1)));

    let step0 = grid_spacing(a.n2(), grid.len());
    let (mut best, mut best_theta) = (scored[0].0, grid[scored[0].1].clone());
    if a.n2() > 1 {
        let refined: Vec<(f64, Vec<f64>)> = scored
            .iter()
            .take(opts.refine_starts)
            .map(|&(_, i)| compass_search(&grid[i], step0, &sig))
            .collect();
        for (v, t) in refined {
            if v < best {
                best = v;
                best_theta = t;
            }
        }
    }

    let verdict = if best <= tolerance {
        let (_, x) = linalg::min_right_singular_vector(&a.omega_unchecked(&best_theta));
        Verdict::NotRegular(Witness::DegenerateDirection {
            theta: best_theta.clone(),
            sigma_min: best,
            x: x.iter().cloned().collect(),
        })
    } else {
        Verdict::Regular
    };

    RegularityReport {
        verdict,
        sphere_min_sigma: best,
        argmin_theta: best_theta,
        tolerance,
        generation_rank,
        generated,
        grid_points: grid.len(),
    }
}

fn grid_spacing(dim: usize, count: usize) -> f64 {
    let area = match dim {
        2 => 2.0 * std::f64::consts::PI,
        3 => 4.0 * std::f64::consts::PI,
        d => 2.0 * std::f64::consts::PI.powf(d as f64 / 2.0) / gamma_half(d),
    };
    (area / count as f64).powf(1.0 / (dim as f64 - 1.0))
}

// Γ(d/2) for integer d ≥ 1
fn gamma_half(d: usize) -> f64 {
    if d.is_multiple_of(2) {
        (1..d / 2).map(|k| k as f64).product()
    } else {
        let mut g = std::f64::consts::PI.sqrt();
        let mut x = 0.5;
        while x < d as f64 / 2.0 - 0.25 {
            g *= x;
            x += 1.0;
        }
        g
    }
}

/// Orthonormal basis of the tangent space `p^⊥` of a unit vector.
fn tangent_basis(p: &[f64]) -> Vec<Vec<f64>> {
    let n = p.len();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n - 1);
    for i in 0..n {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        for _ in 0..2 {
            let d: f64 = v.iter().zip(p).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(p).for_each(|(a, b)| *a -= d * b);
            for q in &basis {
                let d: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(q).for_each(|(a, b)| *a -= d * b);
            }
        }
        if sampling::normalize(&mut v) > 1e-6 {
            basis.push(v);
        }
        if basis.len() == n - 1 {
            break;
        }
    }
    basis
}

/// Compass search on the unit sphere.
fn compass_search(start: &[f64], step0: f64, f: &impl Fn(&[f64]) -> f64) -> (f64, Vec<f64>) {
    let mut p = start.to_vec();
    let mut fp = f(&p);
    let mut h = step0;
    let mut iters = 0;
    while h > 1e-14 && iters < 4000 && fp > 0.0 {
        iters += 1;
        let mut improved = false;
        for t in tangent_basis(&p) {
            for sgn in [1.0, -1.0] {
                let mut q: Vec<f64> = p.iter().zip(&t).map(|(a, b)| a + sgn * h * b).collect();
                sampling::normalize(&mut q);
                let fq = f(&q);
                if fq < fp {
                    p = q;
                    fp = fq;
                    improved = true;
                    break;
                }
            }
            if improved {
                break;
            }
        }
        if improved {
            h *= 1.5;
        } else {
            h *= 0.5;
        }
    }
    (fp, p)
}

/// Outcome of the `ad_x` surjectivity sampler.
#[derive(Debug, Clone, PartialEq)]
pub struct AdScan {
    /// Smallest `σ_min(ad_x)` over the raw random samples.
    pub sampled_min: f64,
    /// Smallest value after alternating refinement.
    pub refined_min: f64,
    pub argmin_x: Vec<f64>,
    /// `ad_x` was surjective for every sample after refinement.
    pub all_surjective: bool,
    pub tolerance: f64,
}

fn ad_sigma_min(a: &Step2Algebra, x: &[f64]) -> f64 {
    if a.n2() > a.n1() {
        return 0.0;
    }
    linalg::sigma_min(&a.ad_unchecked(x))
}

/// Gauss-Newton on `Ω_θ x = 0`, `|x| = |θ| = 1`, started from `x` and the
/// cokernel direction of `ad_x`. Alternating minimization converges only
/// linearly near a degenerate `θ`; this finishes the descent.
fn gauss_newton_polish(a: &Step2Algebra, x0: &[f64]) -> Vec<f64> {
    let (n1, n2) = (a.n1(), a.n2());
    let mut x = DVector::from_column_slice(x0);
    let (_, mut theta) = linalg::min_right_singular_vector(&a.ad_unchecked(x0).transpose());
    let residual = |x: &DVector<f64>, th: &DVector<f64>| (a.omega_unchecked(th.as_slice()) * x).norm();
    let mut r = residual(&x, &theta);
    for _ in 0..40 {
        let omega = a.omega_unchecked(theta.as_slice());
        let mut jac = DMatrix::zeros(n1 + 2, n1 + n2);
        let mut f = DVector::zeros(n1 + 2);
        jac.view_mut((0, 0), (n1, n1)).copy_from(&omega);
        for (k, bk) in a.bracket_tensor().iter().enumerate() {
            jac.view_mut((0, n1 + k), (n1, 1)).copy_from(&(bk * &x));
        }
        jac.view_mut((n1, 0), (1, n1)).copy_from(&x.transpose());
        jac.view_mut((n1 + 1, n1), (1, n2)).copy_from(&theta.transpose());
        f.rows_mut(0, n1).copy_from(&(&omega * &x));
        f[n1] = 0.5 * (x.norm_squared() - 1.0);
        f[n1 + 1] = 0.5 * (theta.norm_squared() - 1.0);
        let Ok(step) = jac.svd(true, true).solve(&f, 1e-14) else { break };
        let mut xn = &x - step.rows(0, n1);
        let mut tn = &theta - step.rows(n1, n2);
        if xn.norm() == 0.0 || tn.norm() == 0.0 {
            break;
        }
        xn.normalize_mut();
        tn.normalize_mut();
        let rn = residual(&xn, &tn);
        if rn.is_nan() || rn >= r {
            break;
        }
        x = xn;
        theta = tn;
        r = rn;
    }
    x.iter().cloned().collect()
}

/// Samples `count` random unit `x ∈ g1`, then refines each by alternating
/// minimization of `‖θ ∘ ad_x‖` over unit `θ` and unit `x`, finished by a
/// Gauss-Newton solve of `θ ∘ ad_x = 0`.
pub fn ad_surjectivity_scan(a: &Step2Algebra, count: usize, seed: u64, rel_tol: f64) -> AdScan {
    let tolerance = rel_tol * a.scale();
    let xs = sampling::random_sphere(a.n1(), count, seed);
    let results: Vec<(f64, f64, Vec<f64>)> = xs
        .par_iter()
        .map(|x0| {
            let s0 = ad_sigma_min(a, x0);
            let mut x = x0.clone();
            let mut s = s0;
            for _ in 0..60 {
                if a.n2() > a.n1() || s == 0.0 {
                    break;
                }
                // θ: left singular direction of ad_x for the smallest value
                let (_, theta) = linalg::min_right_singular_vector(&a.ad_unchecked(&x).transpose());
                let omega = a.omega_unchecked(theta.as_slice());
                let (_, xn) = linalg::min_right_singular_vector(&omega);
                let xn: Vec<f64> = xn.iter().cloned().collect();
                let sn = ad_sigma_min(a, &xn);
                if sn >= s * (1.0 - 1e-12) {
                    if sn < s {
                        x = xn;
                        s = sn;
                    }
                    break;
                }
                x = xn;
                s = sn;
            }
            if a.n2() <= a.n1() && s > 0.0 {
                let xn = gauss_newton_polish(a, &x);
                let sn = ad_sigma_min(a, &xn);
                if sn < s {
                    x = xn;
                    s = sn;
                }
            }
            (s0, s, x)
        })
        .collect();
    let sampled_min = results.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    let (refined_min, argmin_x) = results
        .iter()
        .min_by(|p, q| p.1.total_cmp(&q.1))
        .map(|r| (r.1, r.2.clone()))
        .unwrap_or((f64::INFINITY, Vec::new()));
    AdScan {
        sampled_min,
        refined_min,
        argmin_x,
        all_surjective: refined_min > tolerance,
        tolerance,
    }
}
