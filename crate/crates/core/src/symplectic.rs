//! Compatible complex structures and Darboux bases.
//!
//! Sign convention: the positive form is `(x, y) ↦ ω(Jx, y)` and the Darboux
//! partners are `Y_j = -J X_j`, so that `ω(X_j, Y_j) = +1`. The opposite
//! choice produces the conjugate Fock space.

use crate::error::{Error, Result};
use crate::linalg;
use nalgebra::{DMatrix, DVector};

/// `(ω, J, g_J)` with `J² = -I`, `Jᵀ Ω J = Ω` and `g_J(x, y) = ω(Jx, y)`
/// positive-definite.
#[derive(Debug, Clone, PartialEq)]
pub struct CompatibleTriple {
    pub omega: DMatrix<f64>,
    pub j: DMatrix<f64>,
    pub positive_form: DMatrix<f64>,
}

impl CompatibleTriple {
    pub fn dim(&self) -> usize {
        self.omega.nrows()
    }

    /// `‖J² + I‖_max`
    pub fn square_residual(&self) -> f64 {
        let n = self.dim();
        linalg::max_abs_diff(&(&self.j * &self.j), &(-DMatrix::identity(n, n)))
    }

    /// `‖JᵀΩJ - Ω‖_max`
    pub fn invariance_residual(&self) -> f64 {
        linalg::max_abs_diff(&(self.j.transpose() * &self.omega * &self.j), &self.omega)
    }

    pub fn is_positive(&self) -> bool {
        self.positive_form.clone().symmetric_eigen().eigenvalues.iter().all(|&e| e > 0.0)
    }
}

/// Polar complex structure of `ω` relative to `metric`.
///
/// With `A = metric⁻¹ Ω`, returns `J = A (-A²)^{-1/2}`; the square root is
/// taken through a symmetric eigendecomposition in the metric's Cholesky
/// frame. `J` only depends on the ray of `ω`.
pub fn compatible_j(omega: &DMatrix<f64>, metric: &DMatrix<f64>) -> Result<CompatibleTriple> {
    let n = omega.nrows();
    if !omega.is_square() || metric.nrows() != n || metric.ncols() != n {
        return Err(Error::Input("omega and metric must be square of the same size".into()));
    }
    if linalg::max_abs_diff(omega, &(-omega.transpose())) > 0.0 {
        return Err(Error::Input("omega must be skew".into()));
    }
    let chol = metric
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Input("metric must be symmetric positive-definite".into()))?;
    let l = chol.l();
    let l_inv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Input("metric is singular".into()))?;
    // skew matrix of ω in a metric-orthonormal frame
    let a = &l_inv * omega * l_inv.transpose();
    let a = (&a - a.transpose()) * 0.5;
    let sv = linalg::singular_values(&a);
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if n % 2 == 1 || smax == 0.0 || smin <= linalg::RANK_RTOL * smax {
        return Err(Error::Degenerate { sigma_min: if n % 2 == 1 { 0.0 } else { smin } });
    }
    let neg_sq = -(&a * &a);
    let neg_sq = (&neg_sq + neg_sq.transpose()) * 0.5;
    let eig = neg_sq.symmetric_eigen();
    let inv_sqrt = DMatrix::from_diagonal(&eig.eigenvalues.map(|e| 1.0 / e.sqrt()));
    let root = &eig.eigenvectors * inv_sqrt * eig.eigenvectors.transpose();
    let jt = &a * root;
    // in the orthonormal frame J is exactly skew and orthogonal; two polar
    // Newton steps clean up the eigendecomposition error
    let mut jt = (&jt - jt.transpose()) * 0.5;
    for _ in 0..2 {
        if let Some(inv) = jt.clone().try_inverse() {
            let next = (&jt + inv.transpose()) * 0.5;
            jt = (&next - next.transpose()) * 0.5;
        }
    }
    let j = l_inv.transpose() * jt * l.transpose();
    let p = j.transpose() * omega;
    let positive_form = (&p + p.transpose()) * 0.5;
    Ok(CompatibleTriple { omega: omega.clone(), j, positive_form })
}

/// Symplectic basis `X_1..X_n, Y_1..Y_n` with `J X_j = -Y_j`, `J Y_j = X_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct DarbouxBasis {
    pub x: Vec<DVector<f64>>,
    pub y: Vec<DVector<f64>>,
}

impl DarbouxBasis {
    pub fn n(&self) -> usize {
        self.x.len()
    }

    /// Columns `X_1..X_n, Y_1..Y_n`.
    pub fn matrix(&self) -> DMatrix<f64> {
        let cols: Vec<DVector<f64>> = self.x.iter().chain(self.y.iter()).cloned().collect();
        DMatrix::from_columns(&cols)
    }

    /// Coordinates `(a, b)` with `v = Σ a_j X_j + b_j Y_j`.
    pub fn coordinates(&self, v: &DVector<f64>) -> Option<(Vec<f64>, Vec<f64>)> {
        let n = self.n();
        let c = self.matrix().lu().solve(v)?;
        Some((c.rows(0, n).iter().cloned().collect(), c.rows(n, n).iter().cloned().collect()))
    }

    /// Basis multiplied by `s`. For `s = 1/λ` this is a Darboux basis of
    /// `λ²ω` with the same `J`.
    pub fn scaled(&self, s: f64) -> DarbouxBasis {
        DarbouxBasis {
            x: self.x.iter().map(|v| v * s).collect(),
            y: self.y.iter().map(|v| v * s).collect(),
        }
    }

    /// `max |PᵀΩP - Ω_std|` for `P = [X | Y]`.
    pub fn darboux_residual(&self, omega: &DMatrix<f64>) -> f64 {
        let p = self.matrix();
        linalg::max_abs_diff(&(p.transpose() * omega * &p), &linalg::standard_symplectic(self.n()))
    }

    /// `max(‖J X_j + Y_j‖, ‖J Y_j - X_j‖)`.
    pub fn j_residual(&self, j: &DMatrix<f64>) -> f64 {
        self.x
            .iter()
            .zip(&self.y)
            .map(|(x, y)| ((j * x + y).amax()).max((j * y - x).amax()))
            .fold(0.0, f64::max)
    }
}

/// Greedy Darboux basis: the seed is the first standard basis vector with
/// nonzero component in the current complement; `X` is normalized in the
/// positive form, `Y = -JX`, and the construction recurses on the common
/// `ω`/positive-form orthogonal complement.
pub fn darboux_basis(t: &CompatibleTriple) -> Result<DarbouxBasis> {
    let n1 = t.dim();
    let g = &t.positive_form;
    let inner = |u: &DVector<f64>, v: &DVector<f64>| u.dot(&(g * v));
    let mut chosen: Vec<DVector<f64>> = Vec::with_capacity(n1);
    let mut xs = Vec::with_capacity(n1 / 2);
    let mut ys = Vec::with_capacity(n1 / 2);
    let scale = g.diagonal().amax().max(f64::MIN_POSITIVE);
    for i in 0..n1 {
        if xs.len() * 2 == n1 {
            break;
        }
        let mut v = DVector::zeros(n1);
        v[i] = 1.0;
        for _ in 0..2 {
            for c in &chosen {
                let d = inner(c, &v);
                v -= c * d;
            }
        }
        let norm2 = inner(&v, &v);
        if norm2 <= 1e-8 * scale {
            continue;
        }
        let x = v / norm2.sqrt();
        let mut y = -(&t.j * &x);
        for _ in 0..2 {
            for c in chosen.iter().chain(std::iter::once(&x)) {
                let d = inner(c, &y);
                y -= c * d;
            }
        }
        let y = &y / inner(&y, &y).sqrt();
        chosen.push(x.clone());
        chosen.push(y.clone());
        xs.push(x);
        ys.push(y);
    }
    if xs.len() * 2 != n1 {
        return Err(Error::Internal {
            what: "Darboux recursion did not exhaust g1".into(),
            residual: (n1 - 2 * xs.len()) as f64,
        });
    }
    let basis = DarbouxBasis { x: xs, y: ys };
    let scale = t.omega.amax().max(1.0);
    let res = basis.darboux_residual(&t.omega).max(basis.j_residual(&t.j));
    if res > 1e-10 * scale {
        return Err(Error::Internal { what: "Darboux identities".into(), residual: res });
    }
    Ok(basis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_skew(n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..=1.0));
        (&m - m.transpose()) * 0.5
    }

    fn random_spd(n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..=1.0));
        &m * m.transpose() + DMatrix::identity(n, n) * 0.5
    }

    #[test]
    fn standard_form_is_its_own_structure() {
        let om = linalg::standard_symplectic(2);
        let t = compatible_j(&om, &DMatrix::identity(4, 4)).unwrap();
        assert!(linalg::max_abs_diff(&t.j, &om) < 1e-15);
        assert!(linalg::max_abs_diff(&t.positive_form, &DMatrix::identity(4, 4)) < 1e-15);
    }

    #[test]
    fn degree_zero_homogeneity() {
        let om = random_skew(6, 3);
        let g = DMatrix::identity(6, 6);
        let a = compatible_j(&om, &g).unwrap();
        let b = compatible_j(&(&om * 5.0), &g).unwrap();
        assert!(linalg::max_abs_diff(&a.j, &b.j) < 1e-12);
        let om1 = linalg::standard_symplectic(1);
        let c = compatible_j(&(&om1 * 5.0), &DMatrix::identity(2, 2)).unwrap();
        assert!(linalg::max_abs_diff(&c.j, &om1) < 1e-15);
    }

    #[test]
    fn random_triples_satisfy_invariants() {
        for seed in 0..20 {
            let om = random_skew(6, seed);
            let g = if seed % 2 == 0 { DMatrix::identity(6, 6) } else { random_spd(6, seed + 100) };
            let t = compatible_j(&om, &g).unwrap();
            assert!(t.square_residual() <= 1e-12, "seed {seed}: {}", t.square_residual());
            assert!(t.invariance_residual() <= 1e-12 * om.amax().max(1.0));
            assert!(t.is_positive());
            // J is skew for the metric
            let gj = &g * &t.j;
            assert!(linalg::max_abs_diff(&gj, &(-gj.transpose())) < 1e-11);
        }
    }

    #[test]
    fn degenerate_form_is_rejected() {
        let mut om = DMatrix::zeros(4, 4);
        om[(0, 1)] = 1.0;
        om[(1, 0)] = -1.0;
        let err = compatible_j(&om, &DMatrix::identity(4, 4)).unwrap_err();
        assert!(matches!(err, Error::Degenerate { sigma_min } if sigma_min < 1e-12));
        let odd = DMatrix::zeros(3, 3);
        assert!(compatible_j(&odd, &DMatrix::identity(3, 3)).is_err());
    }

    #[test]
    fn standard_darboux() {
        let om = linalg::standard_symplectic(1);
        let t = compatible_j(&om, &DMatrix::identity(2, 2)).unwrap();
        let d = darboux_basis(&t).unwrap();
        assert_eq!(d.x[0], DVector::from_vec(vec![1.0, 0.0]));
        assert_eq!(d.y[0], -(&om * DVector::from_vec(vec![1.0, 0.0])));
        assert!((d.x[0].dot(&(&om * &d.y[0])) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn darboux_reconstruction() {
        for seed in 0..20 {
            let om = random_skew(6, seed);
            let g = if seed % 3 == 0 { random_spd(6, seed) } else { DMatrix::identity(6, 6) };
            let t = compatible_j(&om, &g).unwrap();
            let d = darboux_basis(&t).unwrap();
            assert!(d.darboux_residual(&om) <= 1e-10);
            assert!(d.j_residual(&t.j) <= 1e-10);
            for (x, y) in d.x.iter().zip(&d.y) {
                assert!((x.dot(&(&om * y)) - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn rescaled_form_uses_inverse_scaled_basis() {
        let om = random_skew(4, 9);
        let t = compatible_j(&om, &DMatrix::identity(4, 4)).unwrap();
        let d = darboux_basis(&t).unwrap();
        let lam = 2.0;
        let om2 = &om * (lam * lam);
        assert!(d.scaled(1.0 / lam).darboux_residual(&om2) <= 1e-12);
        // multiplying by λ instead scales ω(X, Y) by λ⁴
        let wrong = d.scaled(lam);
        let p = wrong.matrix();
        let val = (p.transpose() * &om2 * &p)[(0, 2)];
        assert!((val - lam.powi(4)).abs() < 1e-10);
    }
}
