//! Real Clifford modules for `Cl(0, m)` (generators squaring to `-1`).
//!
//! Generators for `m ≤ 7` are left multiplications by imaginary octonion
//! units, restricted to the complex (`m = 1`) or quaternion (`m ≤ 3`)
//! subalgebra when that already carries `m` generators. `m = 8` doubles the
//! seven octonionic generators, and `m > 8` uses the period-8 tensor
//! recursion `Cl(0, m+8) = Cl(0, m) ⊗ Cl(0, 8)`. All entries are `0` or `±1`,
//! so the output is reproducible bit for bit.

use nalgebra::DMatrix;

// e_a e_b = e_c for each oriented line of the Fano plane
const FANO: [(usize, usize, usize); 7] =
    [(1, 2, 3), (1, 4, 5), (1, 7, 6), (2, 4, 6), (2, 5, 7), (3, 4, 7), (3, 6, 5)];

/// Product of octonion basis units `e_a e_b = sign · e_c` (index 0 is 1).
fn octonion_unit_product(a: usize, b: usize) -> (f64, usize) {
    if a == 0 {
        return (1.0, b);
    }
    if b == 0 {
        return (1.0, a);
    }
    if a == b {
        return (-1.0, 0);
    }
    for &(p, q, r) in &FANO {
        for (x, y, z) in [(p, q, r), (q, r, p), (r, p, q)] {
            if (a, b) == (x, y) {
                return (1.0, z);
            }
            if (a, b) == (y, x) {
                return (-1.0, z);
            }
        }
    }
    unreachable!("every pair of distinct imaginary units lies on a Fano line")
}

/// Left multiplication by `e_a` restricted to `span(e_0..e_{dim-1})`.
fn octonion_left(a: usize, dim: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(dim, dim);
    for b in 0..dim {
        let (s, c) = octonion_unit_product(a, b);
        debug_assert!(c < dim, "subalgebra not closed");
        m[(c, b)] = s;
    }
    m
}

/// `m` anticommuting real skew orthogonal matrices squaring to `-I`, acting
/// irreducibly.
pub fn clifford_generators(m: usize) -> Vec<DMatrix<f64>> {
    assert!(m >= 1, "Cl(0, m) needs m ≥ 1");
    match m {
        1 => vec![octonion_left(1, 2)],
        2 | 3 => (1..=m).map(|a| octonion_left(a, 4)).collect(),
        4..=7 => (1..=m).map(|a| octonion_left(a, 8)).collect(),
        8 => {
            // Γ_a = diag(γ_a, -γ_a), Γ_8 = [[0, -I], [I, 0]]
            let mut flip = DMatrix::zeros(2, 2);
            flip[(0, 0)] = 1.0;
            flip[(1, 1)] = -1.0;
            let mut eps = DMatrix::zeros(2, 2);
            eps[(0, 1)] = -1.0;
            eps[(1, 0)] = 1.0;
            let mut out: Vec<DMatrix<f64>> =
                clifford_generators(7).iter().map(|g| flip.kronecker(g)).collect();
            out.push(eps.kronecker(&DMatrix::<f64>::identity(8, 8)));
            out
        }
        _ => {
            let low = clifford_generators(m - 8);
            let eight = clifford_generators(8);
            let chirality = eight.iter().skip(1).fold(eight[0].clone(), |acc, g| acc * g);
            let d = low[0].nrows();
            let mut out: Vec<DMatrix<f64>> = low.iter().map(|g| g.kronecker(&chirality)).collect();
            out.extend(eight.iter().map(|g| DMatrix::<f64>::identity(d, d).kronecker(g)));
            out
        }
    }
}

/// Real dimension of an irreducible `Cl(0, m)` module, read off the
/// constructed generators.
pub fn clifford_irrep_dim(m: usize) -> usize {
    if m > 8 {
        return 16 * clifford_irrep_dim(m - 8);
    }
    clifford_generators(m)[0].nrows()
}

/// Dimension of the centralizer `End_{Cl(0,m)}(S)` of an irreducible module:
/// `ℝ`, `ℂ` or `ℍ` depending on `m mod 8`.
pub fn expected_commutant_dim(m: usize) -> usize {
    [1, 2, 4, 4, 4, 2, 1, 1][m % 8]
}

/// `max_{a ≤ b} ‖γ_a γ_b + γ_b γ_a + 2 δ_ab I‖_max`.
pub fn clifford_relation_defect(gens: &[DMatrix<f64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for (a, ga) in gens.iter().enumerate() {
        let d = ga.nrows();
        for (b, gb) in gens.iter().enumerate().skip(a) {
            let mut s = ga * gb + gb * ga;
            if a == b {
                s += DMatrix::<f64>::identity(d, d) * 2.0;
            }
            worst = worst.max(s.amax());
        }
    }
    worst
}

/// Dimension of `{C : C γ_a = γ_a C for all a}`, as the null space of the
/// stacked linear system `vec(γ_a C - C γ_a) = 0`.
pub fn commutant_dimension(gens: &[DMatrix<f64>]) -> usize {
    let d = gens[0].nrows();
    let id = DMatrix::<f64>::identity(d, d);
    // Gram matrix Σ M_aᵀ M_a with M_a = I⊗γ - γᵀ⊗I (column-major vec)
    let mut gram = DMatrix::<f64>::zeros(d * d, d * d);
    for g in gens {
        let gt = g.transpose();
        gram += id.kronecker(&(&gt * g));
        gram -= gt.kronecker(&gt);
        gram -= g.kronecker(g);
        gram += (g * &gt).kronecker(&id);
    }
    let eig = gram.symmetric_eigen();
    let top = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    eig.eigenvalues.iter().filter(|&&e| e <= 1e-9 * top.max(1.0)).count()
}
