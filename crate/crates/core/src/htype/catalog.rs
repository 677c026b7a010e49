//! Catalog constructions.

use super::clifford::clifford_generators;
use crate::lie::Step2Algebra;
use crate::linalg;
use nalgebra::DMatrix;

/// `heis(ℝ^{2n}, ω_std)`: `n1 = 2n`, `n2 = 1`, `[e_j, e_{n+j}] = z`.
pub fn make_heisenberg(n: usize) -> Step2Algebra {
    assert!(n >= 1);
    Step2Algebra::new(2 * n, vec![linalg::standard_symplectic(n)]).expect("valid tensor")
}

/// H-type algebra on `mult` copies of the irreducible `Cl(0, m)` module,
/// with `⟨z_a, [x, y]⟩ = ⟨γ_a x, y⟩`, i.e. `B[a] = γ_aᵀ`.
pub fn make_htype_from_clifford(m: usize, mult: usize) -> Step2Algebra {
    assert!(m >= 1 && mult >= 1);
    let id = DMatrix::<f64>::identity(mult, mult);
    let b: Vec<DMatrix<f64>> =
        clifford_generators(m).iter().map(|g| id.kronecker(&g.transpose())).collect();
    let n1 = b[0].nrows();
    Step2Algebra::new(n1, b).expect("valid tensor")
}

/// Quaternionic Heisenberg algebra: `g1 = ℍ^n`, `g2 = Im ℍ`.
pub fn make_quaternionic_heisenberg(n: usize) -> Step2Algebra {
    make_htype_from_clifford(3, n)
}

/// Realification of the complexified Heisenberg algebra `heis_C(ℂ^{2n})`.
///
/// Real basis: `e_1..e_{2n}` real unit vectors, `e_{2n+1}..e_{4n}` their
/// `i`-multiples. `B[1]`, `B[2]` are the real and imaginary parts of the
/// complex-bilinear form `ω_C(u, v) = uᵀ Ω v`.
pub fn make_complexified_heisenberg(n: usize) -> Step2Algebra {
    assert!(n >= 1);
    let om = linalg::standard_symplectic(n);
    let k = 2 * n;
    let mut re = DMatrix::zeros(2 * k, 2 * k);
    let mut im = DMatrix::zeros(2 * k, 2 * k);
    re.view_mut((0, 0), (k, k)).copy_from(&om);
    re.view_mut((k, k), (k, k)).copy_from(&(-&om));
    im.view_mut((0, k), (k, k)).copy_from(&om);
    im.view_mut((k, 0), (k, k)).copy_from(&om);
    Step2Algebra::new(2 * k, vec![re, im]).expect("valid tensor")
}

/// Upper-triangle entries `(12, 13, 14, 23, 24, 34)` of the fixed
/// perturbation tensor `C` used by [`perturbed_quaternionic_fixture`].
pub const PERTURBATION: [[f64; 6]; 3] = [
    [0.37, -0.82, 0.15, 0.64, -0.29, 0.91],
    [-0.55, 0.08, 0.73, -0.41, 0.96, -0.12],
    [0.21, 0.67, -0.94, 0.33, -0.76, 0.48],
];

/// `scale · C` as skew 4×4 matrices.
pub fn perturbation_tensor(scale: f64) -> Vec<DMatrix<f64>> {
    PERTURBATION
        .iter()
        .map(|up| {
            let mut m = DMatrix::zeros(4, 4);
            let mut c = 0;
            for i in 0..4 {
                for j in i + 1..4 {
                    m[(i, j)] = scale * up[c];
                    m[(j, i)] = -scale * up[c];
                    c += 1;
                }
            }
            m
        })
        .collect()
}

/// `B_qH + t·C` for the quaternionic Heisenberg tensor on `ℍ`.
pub fn perturbed_quaternionic(t: f64) -> Step2Algebra {
    let base = make_quaternionic_heisenberg(1);
    let b = base
        .bracket_tensor()
        .iter()
        .zip(perturbation_tensor(t))
        .map(|(b, c)| b + c)
        .collect();
    Step2Algebra::new(4, b).expect("skew by construction")
}

/// Regular algebra that is not H-type: `B_qH + 0.1·C`. Since
/// `‖0.1 Σ θ_k C_k‖ < |θ|`, `σ_min(Ω_θ) > 0` on the whole sphere.
pub fn perturbed_quaternionic_fixture() -> Step2Algebra {
    perturbed_quaternionic(0.1)
}
