//! Step-2 graded nilpotent Lie algebras `g = g1 ⊕ g2` given by structure
//! constants.
//!
//! The bracket tensor stores `[e_i, e_j] = Σ_k B[k][i][j] z_k` with every
//! `B[k]` skew. Both layers carry a metric (identity unless specified); the
//! metrics only enter through the structure maps `J_z` and the complex
//! structures built from them.
//!
//! Coadjoint orbits of a regular algebra are either points `{η}` of `g1*`
//! (the characters) or the flat affine spaces `g1* ⊕ {θ}` for `θ ≠ 0`. A net
//! of flat orbits with `θ → 0` converges to every character at once; the
//! orbit space topology is not modelled beyond this classification.

mod format;
mod regularity;

pub use format::{parse_algebra, write_algebra};
pub use regularity::{
    ad_surjectivity_scan, is_regular, is_regular_with, AdScan, RegularityOptions,
    RegularityReport, Verdict, Witness,
};

use crate::error::{check_len, Error, Result};
use crate::linalg;
use nalgebra::{DMatrix, DVector};
use std::sync::OnceLock;

/// Graded step-2 algebra given by its bracket tensor and layer metrics.
#[derive(Debug, Clone)]
pub struct Step2Algebra {
    n1: usize,
    n2: usize,
    b: Vec<DMatrix<f64>>,
    g1_metric: DMatrix<f64>,
    g2_metric: DMatrix<f64>,
    regularity: OnceLock<RegularityReport>,
}

impl PartialEq for Step2Algebra {
    fn eq(&self, other: &Self) -> bool {
        self.n1 == other.n1
            && self.n2 == other.n2
            && self.b == other.b
            && self.g1_metric == other.g1_metric
            && self.g2_metric == other.g2_metric
    }
}

impl Step2Algebra {
    /// Builds an algebra with identity metrics. Every `b[k]` must be `n1×n1`
    /// and exactly skew.
    pub fn new(n1: usize, b: Vec<DMatrix<f64>>) -> Result<Self> {
        let n2 = b.len();
        Self::with_metrics(n1, b, DMatrix::identity(n1, n1), DMatrix::identity(n2, n2))
    }

    pub fn with_metrics(
        n1: usize,
        b: Vec<DMatrix<f64>>,
        g1_metric: DMatrix<f64>,
        g2_metric: DMatrix<f64>,
    ) -> Result<Self> {
        let n2 = b.len();
        if n1 == 0 || n2 == 0 {
            return Err(Error::Input("both layers must be nonzero".into()));
        }
        for (k, m) in b.iter().enumerate() {
            if m.nrows() != n1 || m.ncols() != n1 {
                return Err(Error::Input(format!(
                    "B[{}] is {}x{}, expected {n1}x{n1}",
                    k + 1,
                    m.nrows(),
                    m.ncols()
                )));
            }
            for i in 0..n1 {
                for j in 0..=i {
                    if m[(i, j)] != -m[(j, i)] {
                        return Err(Error::Input(format!(
                            "B[{}] is not skew at ({}, {})",
                            k + 1,
                            i + 1,
                            j + 1
                        )));
                    }
                }
            }
        }
        if !linalg::is_symmetric_positive_definite(&g1_metric) || g1_metric.nrows() != n1 {
            return Err(Error::Input("g1 metric must be symmetric positive-definite".into()));
        }
        if !linalg::is_symmetric_positive_definite(&g2_metric) || g2_metric.nrows() != n2 {
            return Err(Error::Input("g2 metric must be symmetric positive-definite".into()));
        }
        Ok(Self { n1, n2, b, g1_metric, g2_metric, regularity: OnceLock::new() })
    }

    /// Skew-symmetrizes arbitrary matrices, `(M - Mᵀ)/2`, then builds.
    pub fn from_skew_parts(n1: usize, parts: Vec<DMatrix<f64>>) -> Result<Self> {
        let b = parts.into_iter().map(|m| (&m - m.transpose()) * 0.5).collect();
        Self::new(n1, b)
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn dim(&self) -> usize {
        self.n1 + self.n2
    }

    pub fn bracket_tensor(&self) -> &[DMatrix<f64>] {
        &self.b
    }

    pub fn g1_metric(&self) -> &DMatrix<f64> {
        &self.g1_metric
    }

    pub fn g2_metric(&self) -> &DMatrix<f64> {
        &self.g2_metric
    }

    /// Largest spectral norm among the `B[k]`; sets the scale for tolerances.
    pub fn scale(&self) -> f64 {
        self.b.iter().map(linalg::spectral_norm).fold(0.0, f64::max)
    }

    /// `[x, y]` for `x, y ∈ g1`: component `k` is `xᵀ B[k] y`.
    pub fn bracket(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n1, x.len())?;
        check_len(self.n1, y.len())?;
        let xv = DVector::from_column_slice(x);
        let yv = DVector::from_column_slice(y);
        Ok(self.b.iter().map(|m| xv.dot(&(m * &yv))).collect())
    }

    /// `Ω_θ = Σ_k θ_k B[k]`, the matrix of `ω_θ(u, v) = θ([u, v])`.
    pub fn omega_matrix(&self, theta: &[f64]) -> Result<DMatrix<f64>> {
        check_len(self.n2, theta.len())?;
        Ok(self.omega_unchecked(theta))
    }

    pub(crate) fn omega_unchecked(&self, theta: &[f64]) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.n1, self.n1);
        for (t, m) in theta.iter().zip(&self.b) {
            if *t != 0.0 {
                out += m * *t;
            }
        }
        out
    }

    /// Matrix of `ad_x : g1 → g2`, row `k` is `(B[k] x)ᵀ` up to sign.
    pub fn ad_matrix(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        check_len(self.n1, x.len())?;
        Ok(self.ad_unchecked(x))
    }

    pub(crate) fn ad_unchecked(&self, x: &[f64]) -> DMatrix<f64> {
        let xv = DVector::from_column_slice(x);
        let mut m = DMatrix::zeros(self.n2, self.n1);
        for (k, bk) in self.b.iter().enumerate() {
            let row = bk.transpose() * &xv;
            m.row_mut(k).copy_from(&row.transpose());
        }
        m
    }

    /// Whether `ad_x` maps `g1` onto `g2` (numerical rank `n2`).
    pub fn is_adx_surjective(&self, x: &[f64]) -> Result<bool> {
        check_len(self.n1, x.len())?;
        if x.iter().all(|&v| v == 0.0) {
            return Err(Error::Input("ad_x surjectivity needs x ≠ 0".into()));
        }
        if self.n2 > self.n1 {
            return Ok(false);
        }
        Ok(linalg::rank(&self.ad_unchecked(x)) == self.n2)
    }

    /// Rank of the span of the brackets `[e_i, e_j]`, `i < j`.
    pub fn generation_rank(&self) -> usize {
        let pairs = self.n1 * (self.n1 - 1) / 2;
        if pairs == 0 {
            return 0;
        }
        let mut m = DMatrix::zeros(self.n2, pairs);
        let mut c = 0;
        for i in 0..self.n1 {
            for j in i + 1..self.n1 {
                for k in 0..self.n2 {
                    m[(k, c)] = self.b[k][(i, j)];
                }
                c += 1;
            }
        }
        linalg::rank(&m)
    }

    /// Cached regularity report with default options.
    pub fn regularity(&self) -> &RegularityReport {
        self.regularity.get_or_init(|| is_regular_with(self, &RegularityOptions::default()))
    }

    /// Applies a change of basis: `g1` by `p` (new basis vectors as columns)
    /// and `g2` by `q`. Metrics are kept as identity; intended for orthogonal
    /// `p`, `q` on algebras with identity metrics.
    pub fn change_basis(&self, p: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<Self> {
        check_len(self.n1, p.nrows())?;
        check_len(self.n2, q.nrows())?;
        // [p e_i, p e_j] = Σ_k (pᵀ B[k] p)_ij z_k ; z_k = Σ_l (q⁻¹)_lk z'_l
        let qinv = q
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Input("g2 change of basis is singular".into()))?;
        let conj: Vec<DMatrix<f64>> = self.b.iter().map(|m| p.transpose() * m * p).collect();
        let mut out = vec![DMatrix::zeros(self.n1, self.n1); self.n2];
        for (l, o) in out.iter_mut().enumerate() {
            for (k, c) in conj.iter().enumerate() {
                *o += c * qinv[(l, k)];
            }
            // restore exact skewness lost to rounding
            *o = (&*o - o.transpose()) * 0.5;
        }
        Self::new(self.n1, out)
    }
}

/// Kind of a coadjoint orbit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrbitKind {
    /// `{η}`, a character of the group.
    Point,
    /// `g1* ⊕ {θ}` with `θ ≠ 0`.
    FlatAffine,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrbitDescriptor {
    pub kind: OrbitKind,
    pub eta: Vec<f64>,
    pub theta: Vec<f64>,
    pub orbit_dimension: usize,
}

impl OrbitDescriptor {
    /// Whether `(eta, theta)` lies on this orbit.
    pub fn contains(&self, eta: &[f64], theta: &[f64]) -> bool {
        match self.kind {
            OrbitKind::Point => theta.iter().all(|&t| t == 0.0) && eta == self.eta.as_slice(),
            OrbitKind::FlatAffine => theta == self.theta.as_slice(),
        }
    }
}

/// Coadjoint orbit through `(η, θ)`. Requires a regular algebra.
pub fn coadjoint_orbit(a: &Step2Algebra, eta: &[f64], theta: &[f64]) -> Result<OrbitDescriptor> {
    check_len(a.n1(), eta.len())?;
    check_len(a.n2(), theta.len())?;
    if !a.regularity().is_regular() {
        return Err(Error::Unsupported(
            "orbit classification requires a regular algebra".into(),
        ));
    }
    if theta.iter().all(|&t| t == 0.0) {
        return Ok(OrbitDescriptor {
            kind: OrbitKind::Point,
            eta: eta.to_vec(),
            theta: theta.to_vec(),
            orbit_dimension: 0,
        });
    }
    let dim = linalg::rank(&a.omega_unchecked(theta));
    if dim != a.n1() {
        let sigma_min = linalg::sigma_min(&a.omega_unchecked(theta));
        return Err(Error::Internal {
            what: format!("flat orbit has dimension {dim} instead of {}", a.n1()),
            residual: sigma_min,
        });
    }
    Ok(OrbitDescriptor {
        kind: OrbitKind::FlatAffine,
        eta: eta.to_vec(),
        theta: theta.to_vec(),
        orbit_dimension: dim,
    })
}

/// `Ad*_{exp(x)}(η, θ)` for `x = (x1, x2)`: the central part acts trivially
/// and `η ↦ η + Ω_θ x1`, `θ` is fixed.
pub fn coadjoint_action(
    a: &Step2Algebra,
    x1: &[f64],
    eta: &[f64],
    theta: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_len(a.n1(), x1.len())?;
    check_len(a.n1(), eta.len())?;
    let omega = a.omega_matrix(theta)?;
    let shift = omega * DVector::from_column_slice(x1);
    Ok((eta.iter().zip(shift.iter()).map(|(e, s)| e + s).collect(), theta.to_vec()))
}

/// Element of `g1 ⊕ g2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
}

/// Inhomogeneous dilation `δ_λ(x1, x2) = (λ x1, λ² x2)`.
pub fn dilate(a: &Step2Algebra, lambda: f64, v: &Element) -> Result<Element> {
    if lambda.is_nan() || lambda <= 0.0 {
        return Err(Error::Input(format!("dilation factor must be positive, got {lambda}")));
    }
    check_len(a.n1(), v.x1.len())?;
    check_len(a.n2(), v.x2.len())?;
    Ok(Element {
        x1: v.x1.iter().map(|x| lambda * x).collect(),
        x2: v.x2.iter().map(|x| lambda * lambda * x).collect(),
    })
}

/// Random algebra with entries uniform in [-1, 1], skew-symmetrized.
pub fn random_algebra<R: rand::Rng>(n1: usize, n2: usize, rng: &mut R) -> Step2Algebra {
    let parts = (0..n2)
        .map(|_| DMatrix::from_fn(n1, n1, |_, _| rng.random_range(-1.0..=1.0)))
        .collect();
    Step2Algebra::from_skew_parts(n1, parts).expect("well-formed random algebra")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::htype::{make_heisenberg, make_quaternionic_heisenberg};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn split_example() -> Step2Algebra {
        // B1 = J ⊕ 0, B2 = 0 ⊕ J on R^4
        let mut b1 = DMatrix::zeros(4, 4);
        b1[(0, 1)] = 1.0;
        b1[(1, 0)] = -1.0;
        let mut b2 = DMatrix::zeros(4, 4);
        b2[(2, 3)] = 1.0;
        b2[(3, 2)] = -1.0;
        Step2Algebra::new(4, vec![b1, b2]).unwrap()
    }

    fn quaternion_mul(p: [f64; 4], q: [f64; 4]) -> [f64; 4] {
        let [a1, b1, c1, d1] = p;
        let [a2, b2, c2, d2] = q;
        [
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        ]
    }

    #[test]
    fn heisenberg_bracket() {
        let h = make_heisenberg(1);
        assert_eq!(h.bracket(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), vec![1.0]);
        assert_eq!(h.bracket(&[0.3, -2.0], &[0.3, -2.0]).unwrap(), vec![0.0]);
    }

    #[test]
    fn quaternionic_bracket_matches_quaternion_table() {
        // ⟨z_a, [x, y]⟩ = ⟨q_a · x, y⟩ with q_a ∈ {i, j, k}
        let a = make_quaternionic_heisenberg(1);
        let units = [[0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]];
        let basis = |i: usize| {
            let mut e = [0.0; 4];
            e[i] = 1.0;
            e
        };
        for i in 0..4 {
            for j in 0..4 {
                let br = a.bracket(&basis(i), &basis(j)).unwrap();
                for (k, q) in units.iter().enumerate() {
                    let qx = quaternion_mul(*q, basis(i));
                    let expected: f64 = qx.iter().zip(basis(j)).map(|(u, v)| u * v).sum();
                    assert_eq!(br[k], expected, "i={i} j={j} k={k}");
                }
            }
        }
        assert_eq!(a.bracket(&basis(0), &basis(1)).unwrap(), vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn bracket_dimension_mismatch() {
        let h = make_heisenberg(1);
        assert!(matches!(h.bracket(&[1.0], &[0.0, 1.0]), Err(Error::Dimension { .. })));
        assert!(h.omega_matrix(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn rejects_non_skew() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!(Step2Algebra::new(2, vec![m]).is_err());
    }

    #[test]
    fn omega_examples() {
        let h = make_heisenberg(1);
        assert_eq!(h.omega_matrix(&[1.0]).unwrap(), linalg::standard_symplectic(1));
        assert_eq!(h.omega_matrix(&[0.0]).unwrap(), DMatrix::zeros(2, 2));
    }

    #[test]
    fn adx_examples() {
        let h = make_heisenberg(1);
        assert!(h.is_adx_surjective(&[1.0, 0.0]).unwrap());
        assert!(h.is_adx_surjective(&[0.0, 0.0]).is_err());
        let s = split_example();
        assert!(!s.is_adx_surjective(&[1.0, 0.0, 0.0, 0.0]).unwrap());
        let q = make_quaternionic_heisenberg(1);
        for x in crate::sampling::random_sphere(4, 50, 3) {
            assert!(q.is_adx_surjective(&x).unwrap());
        }
    }

    #[test]
    fn generation_rank_examples() {
        assert_eq!(make_heisenberg(2).generation_rank(), 1);
        assert_eq!(make_quaternionic_heisenberg(1).generation_rank(), 3);
        let mut zero = Step2Algebra::new(2, vec![DMatrix::zeros(2, 2), DMatrix::zeros(2, 2)]).unwrap();
        assert_eq!(zero.generation_rank(), 0);
        zero = split_example();
        assert_eq!(zero.generation_rank(), 2);
    }

    #[test]
    fn orbit_examples() {
        let h = make_heisenberg(1);
        let o = coadjoint_orbit(&h, &[1.0, 0.0], &[0.0]).unwrap();
        assert_eq!(o.kind, OrbitKind::Point);
        assert_eq!(o.orbit_dimension, 0);
        let o = coadjoint_orbit(&h, &[0.4, -1.0], &[2.0]).unwrap();
        assert_eq!(o.kind, OrbitKind::FlatAffine);
        assert_eq!(o.orbit_dimension, 2);
        let q = make_quaternionic_heisenberg(1);
        let o = coadjoint_orbit(&q, &[0.0; 4], &[0.0, 0.0, 1.0]).unwrap();
        assert_eq!((o.kind, o.orbit_dimension), (OrbitKind::FlatAffine, 4));
        assert!(matches!(
            coadjoint_orbit(&split_example(), &[0.0; 4], &[1.0, 0.0]),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn coadjoint_action_sweeps_the_flat_orbit() {
        // η + Ω_θ x reaches any η' when Ω_θ is invertible
        let q = make_quaternionic_heisenberg(1);
        let theta = [0.3, -0.2, 0.9];
        let target = [1.0, 2.0, -3.0, 0.5];
        let omega = q.omega_matrix(&theta).unwrap();
        let x = omega.lu().solve(&DVector::from_column_slice(&target)).unwrap();
        let (eta, th) = coadjoint_action(&q, x.as_slice(), &[0.0; 4], &theta).unwrap();
        assert_eq!(th, theta.to_vec());
        for (e, t) in eta.iter().zip(target) {
            assert!((e - t).abs() < 1e-12);
        }
        let orbit = coadjoint_orbit(&q, &[0.0; 4], &theta).unwrap();
        assert!(orbit.contains(&eta, &th));
    }

    #[test]
    fn dilation_examples() {
        let h = make_heisenberg(1);
        let v = Element { x1: vec![1.0, 0.0], x2: vec![1.0] };
        assert_eq!(dilate(&h, 1.0, &v).unwrap(), v);
        assert_eq!(
            dilate(&h, 2.0, &v).unwrap(),
            Element { x1: vec![2.0, 0.0], x2: vec![4.0] }
        );
        assert!(dilate(&h, 0.0, &v).is_err());
        assert!(dilate(&h, -1.0, &v).is_err());
    }

    #[test]
    fn dilation_is_automorphism_on_random_algebra() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_algebra(4, 2, &mut rng);
        // integer entries keep both sides exactly representable
        let x = [1.0, -2.0, 3.0, 0.0];
        let y = [0.0, 1.0, 1.0, -1.0];
        let lam = 3.0;
        let dx: Vec<f64> = x.iter().map(|v| lam * v).collect();
        let dy: Vec<f64> = y.iter().map(|v| lam * v).collect();
        let lhs = a.bracket(&dx, &dy).unwrap();
        let rhs: Vec<f64> = a.bracket(&x, &y).unwrap().iter().map(|v| lam * lam * v).collect();
        for (l, r) in lhs.iter().zip(&rhs) {
            assert!((l - r).abs() <= 1e-13 * r.abs().max(1.0));
        }
    }

    proptest! {
        #[test]
        fn omega_is_skew_and_linear(seed in 0u64..1000, t1 in -2.0..2.0f64, t2 in -2.0..2.0f64, s1 in -2.0..2.0f64, s2 in -2.0..2.0f64) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_algebra(4, 2, &mut rng);
            let o1 = a.omega_matrix(&[t1, t2]).unwrap();
            let o2 = a.omega_matrix(&[s1, s2]).unwrap();
            let sum = a.omega_matrix(&[t1 + s1, t2 + s2]).unwrap();
            prop_assert_eq!(&o1, &(-o1.transpose()));
            prop_assert!(linalg::max_abs_diff(&sum, &(&o1 + &o2)) < 1e-14);
        }

        #[test]
        fn bracket_is_antisymmetric(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_algebra(6, 3, &mut rng);
            let x: Vec<f64> = (0..6).map(|i| (i as f64 * 0.37 + seed as f64).sin()).collect();
            let y: Vec<f64> = (0..6).map(|i| (i as f64 * 1.3 - seed as f64).cos()).collect();
            let xy = a.bracket(&x, &y).unwrap();
            let yx = a.bracket(&y, &x).unwrap();
            for (p, q) in xy.iter().zip(&yx) {
                prop_assert!((p + q).abs() < 1e-13);
            }
        }

        #[test]
        fn dilation_automorphism(seed in 0u64..500, lam in 0.1..5.0f64) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_algebra(4, 2, &mut rng);
            let x = [0.5, -1.0, 0.25, 2.0];
            let y = [1.0, 0.0, -0.75, 0.5];
            let lx: Vec<f64> = x.iter().map(|v| lam * v).collect();
            let ly: Vec<f64> = y.iter().map(|v| lam * v).collect();
            let lhs = a.bracket(&lx, &ly).unwrap();
            let rhs = a.bracket(&x, &y).unwrap();
            for (l, r) in lhs.iter().zip(&rhs) {
                prop_assert!((l - lam * lam * r).abs() <= 1e-12 * (1.0 + (lam * lam * r).abs()));
            }
        }
    }
}
