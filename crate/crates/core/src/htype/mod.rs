//! H-type (Heisenberg-type) detection and classification.
//!
//! The structure map `J_z` is defined by `⟨J_z x, y⟩ = ⟨z, [x, y]⟩`. An
//! algebra is H-type when the `J_z` satisfy the Clifford relations
//! `J_z J_w + J_w J_z = -2⟨z, w⟩ I`, i.e. `g1` is a unitary `Cl(g2)`-module.
//! Such algebras are classified by `(dim g2, dim g1)`.

mod catalog;
mod clifford;

pub use catalog::{
    make_complexified_heisenberg, make_heisenberg, make_htype_from_clifford,
    make_quaternionic_heisenberg, perturbation_tensor, perturbed_quaternionic,
    perturbed_quaternionic_fixture, PERTURBATION,
};
pub use clifford::{
    clifford_generators, clifford_irrep_dim, clifford_relation_defect, commutant_dimension,
    expected_commutant_dim,
};

use crate::error::{check_len, Error, Result};
use crate::lie::Step2Algebra;
use crate::linalg;
use crate::sampling;
use nalgebra::{DMatrix, DVector};

/// `J_z` with `g1_metric(J_z x, y) = g2_metric(z, [x, y])`.
pub fn structure_map(a: &Step2Algebra, z: &[f64]) -> Result<DMatrix<f64>> {
    check_len(a.n2(), z.len())?;
    let gz = a.g2_metric() * DVector::from_column_slice(z);
    let omega = a.omega_unchecked(gz.as_slice());
    let g1_inv = a
        .g1_metric()
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Input("g1 metric is singular".into()))?;
    Ok(-(g1_inv * omega))
}

/// `g2_metric`-orthonormal basis of `g2` (columns of `L⁻ᵀ`, `G = L Lᵀ`).
pub fn g2_orthonormal_basis(a: &Step2Algebra) -> Vec<Vec<f64>> {
    let l = a.g2_metric().clone().cholesky().expect("metric is SPD").l();
    let lt_inv = l.transpose().try_inverse().expect("metric is SPD");
    (0..a.n2()).map(|k| lt_inv.column(k).iter().cloned().collect()).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct HTypeVerdict {
    pub is_htype: bool,
    /// `max_{a ≤ b} ‖J_a J_b + J_b J_a + 2δ_ab I‖₂` over an orthonormal basis.
    pub clifford_defect: f64,
    /// `max ‖J_zᵀ G1 J_z - G1‖` over sampled unit `z`.
    pub orthogonality_defect: f64,
    /// `(dim g2, dim g1)` when H-type.
    pub class_pair: Option<(usize, usize)>,
    pub tolerance: f64,
}

pub fn is_htype(a: &Step2Algebra) -> HTypeVerdict {
    let basis = g2_orthonormal_basis(a);
    let js: Vec<DMatrix<f64>> =
        basis.iter().map(|z| structure_map(a, z).expect("sized basis")).collect();
    let n1 = a.n1();
    let mut defect: f64 = 0.0;
    for i in 0..js.len() {
        for k in i..js.len() {
            let mut s = &js[i] * &js[k] + &js[k] * &js[i];
            if i == k {
                s += DMatrix::<f64>::identity(n1, n1) * 2.0;
            }
            defect = defect.max(linalg::spectral_norm(&s));
        }
    }

    // independent re-check: J_z is G1-orthogonal for unit z
    let g1 = a.g1_metric();
    let mut ortho: f64 = 0.0;
    let samples = sampling::random_sphere(a.n2(), 16, sampling::DEFAULT_SEED);
    for u in basis.iter().cloned().chain(samples.into_iter().map(|u| {
        // unit coefficients in the orthonormal basis
        let mut z = vec![0.0; a.n2()];
        for (c, b) in u.iter().zip(&basis) {
            z.iter_mut().zip(b).for_each(|(zi, bi)| *zi += c * bi);
        }
        z
    })) {
        let j = structure_map(a, &u).expect("sized");
        ortho = ortho.max(linalg::spectral_norm(&(j.transpose() * g1 * &j - g1)));
    }

    let tolerance = 1e-8 * n1 as f64;
    let is_htype = defect <= tolerance;
    HTypeVerdict {
        is_htype,
        clifford_defect: defect,
        orthogonality_defect: ortho,
        class_pair: is_htype.then_some((a.n2(), n1)),
        tolerance,
    }
}

/// Classification data of an H-type algebra.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HTypeClass {
    /// `dim g2`
    pub m: usize,
    pub dim_g1: usize,
    /// Number of irreducible `Cl(0, m)` summands in `g1`.
    pub multiplicity: usize,
}

pub fn classify_htype(a: &Step2Algebra) -> Result<HTypeClass> {
    let v = is_htype(a);
    if !v.is_htype {
        return Err(Error::Precondition(format!(
            "not H-type (Clifford defect {:e})",
            v.clifford_defect
        )));
    }
    let d = clifford_irrep_dim(a.n2());
    if !a.n1().is_multiple_of(d) {
        return Err(Error::DataCorruption(format!(
            "dim g1 = {} is not a multiple of the Cl(0,{}) module dimension {d}",
            a.n1(),
            a.n2()
        )));
    }
    Ok(HTypeClass { m: a.n2(), dim_g1: a.n1(), multiplicity: a.n1() / d })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_orthogonal(n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..=1.0)).qr().q()
    }

    #[test]
    fn heisenberg_structure_map() {
        let h = make_heisenberg(1);
        let j = structure_map(&h, &[1.0]).unwrap();
        assert_eq!(&j * &j, -DMatrix::<f64>::identity(2, 2));
        let v = is_htype(&h);
        assert!(v.is_htype);
        assert!(v.clifford_defect < 1e-12);
        assert_eq!(v.class_pair, Some((1, 2)));
    }

    #[test]
    fn characterizing_identity() {
        let a = make_complexified_heisenberg(1);
        let z = [0.6, -0.8];
        let j = structure_map(&a, &z).unwrap();
        for i in 0..a.n1() {
            for k in 0..a.n1() {
                let mut ei = vec![0.0; a.n1()];
                let mut ek = vec![0.0; a.n1()];
                ei[i] = 1.0;
                ek[k] = 1.0;
                let lhs = j[(k, i)]; // ⟨J_z e_i, e_k⟩
                let br = a.bracket(&ei, &ek).unwrap();
                let rhs: f64 = br.iter().zip(&z).map(|(b, w)| b * w).sum();
                assert!((lhs - rhs).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn quaternionic_j_sweeps_center() {
        // [x, J_z x] = |x|² z for unit z
        let a = make_quaternionic_heisenberg(1);
        for z in sampling::fibonacci_sphere(10) {
            let j = structure_map(&a, &z).unwrap();
            for x in sampling::random_sphere(4, 5, 17) {
                let x: Vec<f64> = x.iter().map(|v| 1.7 * v).collect();
                let jx = &j * DVector::from_column_slice(&x);
                let br = a.bracket(&x, jx.as_slice()).unwrap();
                let n2: f64 = x.iter().map(|v| v * v).sum();
                for (b, zz) in br.iter().zip(&z) {
                    assert!((b - n2 * zz).abs() < 1e-12, "{b} vs {}", n2 * zz);
                }
            }
        }
    }

    #[test]
    fn catalog_defects() {
        let mut algebras = vec![];
        for n in 1..=3 {
            algebras.push(make_heisenberg(n));
        }
        for n in 1..=2 {
            algebras.push(make_quaternionic_heisenberg(n));
        }
        for m in 1..=4 {
            for mult in 1..=2 {
                algebras.push(make_htype_from_clifford(m, mult));
            }
        }
        algebras.push(make_complexified_heisenberg(1));
        for a in &algebras {
            let v = is_htype(a);
            assert!(v.clifford_defect <= 1e-12, "{:?}", v);
            assert!(v.orthogonality_defect <= 1e-10);
            assert!(a.regularity().is_regular());
        }
    }

    #[test]
    fn perturbed_fixture_is_regular_but_not_htype() {
        let a = perturbed_quaternionic_fixture();
        assert!(a.regularity().is_regular());
        let v = is_htype(&a);
        assert!(!v.is_htype);
        assert!(v.clifford_defect > 1e-3);
        assert!(matches!(classify_htype(&a), Err(Error::Precondition(_))));
    }

    #[test]
    fn classification_examples() {
        let c = classify_htype(&make_heisenberg(1)).unwrap();
        assert_eq!((c.m, c.dim_g1, c.multiplicity), (1, 2, 1));
        let c = classify_htype(&make_quaternionic_heisenberg(1)).unwrap();
        assert_eq!((c.m, c.dim_g1, c.multiplicity), (3, 4, 1));
        let c = classify_htype(&make_complexified_heisenberg(1)).unwrap();
        assert_eq!((c.m, c.dim_g1, c.multiplicity), (2, 4, 1));
        let c = classify_htype(&make_htype_from_clifford(1, 3)).unwrap();
        assert_eq!(c, classify_htype(&make_heisenberg(3)).unwrap());
    }

    #[test]
    fn classification_survives_orthogonal_changes_of_basis() {
        for (k, a) in [make_quaternionic_heisenberg(1), make_htype_from_clifford(4, 1)]
            .into_iter()
            .enumerate()
        {
            let reference = classify_htype(&a).unwrap();
            for seed in 0..5 {
                let p = random_orthogonal(a.n1(), 100 * k as u64 + seed);
                let q = random_orthogonal(a.n2(), 7 + seed);
                let b = a.change_basis(&p, &q).unwrap();
                assert_eq!(classify_htype(&b).unwrap(), reference);
            }
        }
    }

    #[test]
    fn nonorthogonal_basis_change_breaks_htype_but_not_regularity() {
        let a = make_quaternionic_heisenberg(1);
        let mut p = DMatrix::<f64>::identity(4, 4);
        p[(0, 0)] = 2.0;
        let b = a.change_basis(&p, &DMatrix::identity(3, 3)).unwrap();
        assert!(b.regularity().is_regular());
        assert!(!is_htype(&b).is_htype);
    }
}
