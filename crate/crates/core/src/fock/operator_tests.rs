use super::*;
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn ket(t: &FockTruncation, a: &[u32]) -> usize {
    t.index_of(a).unwrap()
}

fn dense_norm(m: &DMatrix<C64>) -> f64 {
    m.clone().svd(false, false).singular_values.iter().cloned().fold(0.0, f64::max)
}

#[test]
fn creation_formula_and_truncation() {
    let t = FockTruncation::new(1, 5).unwrap();
    let a = FockOperator::creation(t.clone(), 0).unwrap();
    assert_eq!(a.entry(ket(&t, &[3]), ket(&t, &[2])), c(3f64.sqrt()));
    // top level is dropped
    assert!(a.entries().all(|(_, col, _)| col != ket(&t, &[5])));
    let ann = FockOperator::annihilation(t.clone(), 0).unwrap();
    assert!(ann.entries().all(|(_, col, _)| col != ket(&t, &[0])));
    assert!(FockOperator::creation(t, 1).is_err());
}

#[test]
fn annihilation_is_exact_adjoint() {
    let t = FockTruncation::new(3, 6).unwrap();
    for j in 0..3 {
        let a = FockOperator::creation(t.clone(), j).unwrap();
        let b = FockOperator::annihilation(t.clone(), j).unwrap();
        let d = a.to_dense().adjoint() - b.to_dense();
        assert_eq!(d.iter().map(|x| x.norm()).fold(0.0, f64::max), 0.0);
        assert_eq!(b.level_shift(), Some(-1));
    }
}

#[test]
fn interior_ccr() {
    let t = FockTruncation::new(3, 7).unwrap();
    let id = FockOperator::identity(t.clone());
    for i in 0..3 {
        for j in 0..3 {
            let ai = FockOperator::annihilation(t.clone(), i).unwrap();
            let aj = FockOperator::creation(t.clone(), j).unwrap();
            let mut d = ai.commutator(&aj);
            if i == j {
                d = &d - &id;
            }
            assert!(d.interior_norm(6) <= 1e-12, "({i},{j})");
            // and the artifact really sits at the top level
            if i == j {
                assert!(d.spectral_norm() > 1.0);
            }
        }
    }
}

#[test]
fn unilateral_shift() {
    let t = FockTruncation::new(1, 6).unwrap();
    let s = FockOperator::shift_basis(t.clone(), 0).unwrap();
    for k in 0..6u32 {
        assert_eq!(s.entry(ket(&t, &[k + 1]), ket(&t, &[k])), c(1.0));
    }
    assert_eq!(s.nnz(), 6);
}

/// Brute-force symmetric tensors on (ℂⁿ)^{⊗k} with real coefficients.
struct TensorOracle {
    n: usize,
}

impl TensorOracle {
    fn permutations(k: usize) -> Vec<Vec<usize>> {
        if k == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in Self::permutations(k - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, k - 1);
                out.push(q);
            }
        }
        out
    }

    fn flat(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.n + i)
    }

    fn symmetrize(&self, v: &[f64], k: usize) -> Vec<f64> {
        let perms = Self::permutations(k);
        let mut out = vec![0.0; v.len()];
        for (f, &x) in v.iter().enumerate() {
            if x == 0.0 {
                continue;
            }
            let mut idx = vec![0; k];
            let mut g = f;
            for slot in (0..k).rev() {
                idx[slot] = g % self.n;
                g /= self.n;
            }
            for p in &perms {
                let q: Vec<usize> = p.iter().map(|&i| idx[i]).collect();
                out[self.flat(&q)] += x / perms.len() as f64;
            }
        }
        out
    }

    /// Unit vector in Sym^k for the multi-index α.
    fn state(&self, a: &[u32]) -> Vec<f64> {
        let k: usize = a.iter().map(|&x| x as usize).sum();
        let idx: Vec<usize> =
            a.iter().enumerate().flat_map(|(j, &m)| std::iter::repeat_n(j, m as usize)).collect();
        let mut v = vec![0.0; self.n.pow(k as u32)];
        v[self.flat(&idx)] = 1.0;
        let mut s = self.symmetrize(&v, k);
        let norm = s.iter().map(|x| x * x).sum::<f64>().sqrt();
        s.iter_mut().for_each(|x| *x /= norm);
        s
    }

    /// `⟨β| Sym(e_j ⊗ |α⟩)`.
    fn shift_entry(&self, j: usize, a: &[u32], b: &[u32]) -> f64 {
        let k: usize = a.iter().map(|&x| x as usize).sum();
        let u = self.state(a);
        let mut w = vec![0.0; self.n.pow(k as u32 + 1)];
        for (f, &x) in u.iter().enumerate() {
            w[j * self.n.pow(k as u32) + f] = x;
        }
        let s = self.symmetrize(&w, k + 1);
        let vb = self.state(b);
        s.iter().zip(&vb).map(|(x, y)| x * y).sum()
    }
}

#[test]
fn shift_matches_brute_force_symmetrization() {
    for n in [2usize, 3] {
        let oracle = TensorOracle { n };
        let t = FockTruncation::new(n, 3).unwrap();
        for j in 0..n {
            let s = FockOperator::shift_basis(t.clone(), j).unwrap();
            for (ci, a) in t.basis().iter().enumerate() {
                if t.level_of(ci) >= 3 {
                    continue;
                }
                for (ri, b) in t.basis().iter().enumerate() {
                    if t.level_of(ri) != t.level_of(ci) + 1 {
                        continue;
                    }
                    let want = oracle.shift_entry(j, a, b);
                    assert!((s.entry(ri, ci).re - want).abs() < 1e-12, "n={n} j={j} {a:?}->{b:?}");
                }
            }
        }
    }
    let t = FockTruncation::new(2, 3).unwrap();
    let s = FockOperator::shift_basis(t.clone(), 0).unwrap();
    let v = s.entry(ket(&t, &[2, 1]), ket(&t, &[1, 1])).re;
    assert!((v - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
}

#[test]
fn shift_is_linear_in_w() {
    let t = FockTruncation::new(2, 5).unwrap();
    let w = [C64::new(0.3, -0.2), C64::new(-1.1, 0.7)];
    let s = FockOperator::shift(t.clone(), &w).unwrap();
    let s1 = FockOperator::shift_basis(t.clone(), 0).unwrap().scaled(w[0]);
    let s2 = FockOperator::shift_basis(t.clone(), 1).unwrap().scaled(w[1]);
    assert!((&s - &(&s1 + &s2)).max_abs() < 1e-15);
    assert!(FockOperator::shift(t, &w[..1]).is_err());
}

#[test]
fn sum_of_shift_squares() {
    let n = 2;
    let t = FockTruncation::new(n, 9).unwrap();
    let mut sum = FockOperator::zero(t.clone(), LevelBand::single(0));
    for j in 0..n {
        let s = FockOperator::shift_basis(t.clone(), j).unwrap();
        sum = &sum + &(&s.adjoint() * &s);
    }
    for (i, a) in t.basis().iter().enumerate() {
        let k = a.iter().sum::<u32>() as f64;
        let want = if t.level_of(i) < 9 { (k + n as f64) / (k + 1.0) } else { 0.0 };
        assert!((sum.entry(i, i).re - want).abs() < 1e-14);
    }
    assert!(sum.actual_band() == Some(LevelBand::single(0)));
}

#[test]
fn shift_norm_bounded_and_monotone() {
    let w = [C64::new(0.6, 0.3), C64::new(-0.2, 0.5)];
    let wn = w.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let mut prev = 0.0;
    for k in [8, 16, 32] {
        let t = FockTruncation::new(2, k).unwrap();
        let nrm = FockOperator::shift(t, &w).unwrap().spectral_norm();
        assert!(nrm <= wn * (1.0 + 1e-12), "K={k}: {nrm} > {wn}");
        assert!(nrm >= prev - 1e-12);
        prev = nrm;
    }
    assert!(prev > 0.9 * wn);
}

#[test]
fn band_bookkeeping() {
    let t = FockTruncation::new(2, 6).unwrap();
    let s = FockOperator::shift_basis(t.clone(), 0).unwrap();
    let a = FockOperator::annihilation(t.clone(), 1).unwrap();
    let w = &(&s * &s) * &a;
    assert_eq!(w.level_shift(), Some(1));
    assert!(w.check_band());
    let mixed = &s + &a;
    assert_eq!(mixed.band(), LevelBand { lo: -1, hi: 1 });
    assert!(mixed.check_band());
    assert!(mixed.level_shift().is_none());
    assert!(s.clone().with_band(LevelBand::single(0)).is_err());
}

#[test]
fn shifts_commute_and_quotient_is_commutative() {
    let t = FockTruncation::new(3, 24).unwrap();
    let s: Vec<_> = (0..3).map(|j| FockOperator::shift_basis(t.clone(), j).unwrap()).collect();
    for i in 0..3 {
        for j in 0..3 {
            assert!(s[i].commutator(&s[j]).compactness_defect(4) <= 1e-12);
            let c = s[i].adjoint().commutator(&s[j]);
            let (d4, d8, d16) =
                (c.compactness_defect(4), c.compactness_defect(8), c.compactness_defect(16));
            assert!(d8 < d4 && d16 < d8, "({i},{j}): {d4} {d8} {d16}");
        }
    }
}

#[test]
fn number_and_flow() {
    let t = FockTruncation::new(2, 5).unwrap();
    let n = FockOperator::number_operator(t.clone());
    assert_eq!(n.entry(0, 0), c(0.0));
    assert_eq!(n.entry(ket(&t, &[2, 1]), ket(&t, &[2, 1])), c(3.0));
    let u0 = FockOperator::flow_unitary(t.clone(), 0.0);
    assert_eq!((&u0 - &FockOperator::identity(t.clone())).max_abs(), 0.0);
    for s in [-2.0, 0.3, 7.5] {
        let u = FockOperator::flow_unitary(t.clone(), s);
        for i in 0..t.dim() {
            assert!((u.entry(i, i).norm() - 1.0).abs() < 1e-15);
        }
        let k = 4.0f64;
        let want = C64::new(0.0, s * (k + 1.0).ln()).exp();
        assert!((u.entry(ket(&t, &[1, 3]), ket(&t, &[1, 3])) - want).norm() < 1e-15);
    }
}

#[test]
fn flow_conjugate_matches_unitary_conjugation() {
    let t = FockTruncation::new(2, 7).unwrap();
    let op = &FockOperator::shift_basis(t.clone(), 0).unwrap()
        + &FockOperator::annihilation(t.clone(), 1).unwrap();
    for tt in [0.0, 0.5, std::f64::consts::PI] {
        let u = FockOperator::flow_unitary(t.clone(), tt / 2.0);
        let direct = &(&u * &op) * &u.adjoint();
        assert!((&direct - &op.flow_conjugate(tt)).max_abs() < 1e-14);
    }
    assert_eq!((&op.flow_conjugate(0.0) - &op).max_abs(), 0.0);
    let d = FockOperator::number_operator(t);
    assert!((&d.flow_conjugate(1.3) - &d).max_abs() < 1e-15);
}

#[test]
fn identity_defect_is_one() {
    let t = FockTruncation::new(2, 10).unwrap();
    let id = FockOperator::identity(t);
    for l in 0..10 {
        assert_eq!(id.compactness_defect(l), 1.0);
    }
    assert_eq!(id.compactness_defect_with_margin(10, 0), 1.0);
    assert_eq!(id.compactness_defect(10), 0.0);
}

#[test]
fn toeplitz_commutator_defect_closed_form() {
    // [S*_1, S_1] is diagonal with entry (k - α_1)/(k(k+1)) on level k ≥ 1,
    // whose maximum over levels ≥ L is 1/(L+1).
    let t = FockTruncation::new(2, 64).unwrap();
    let s = FockOperator::shift_basis(t, 0).unwrap();
    let c = s.adjoint().commutator(&s);
    for l in [4usize, 8, 16, 32] {
        let d = c.compactness_defect(l);
        assert!((d - 1.0 / (l as f64 + 1.0)).abs() < 1e-14, "L={l}: {d}");
    }
    for l in [8usize, 16] {
        assert!(c.compactness_defect(2 * l) <= 0.6 * c.compactness_defect(l));
    }
}

#[test]
fn flow_difference_bound() {
    let t = FockTruncation::new(2, 64).unwrap();
    let s = FockOperator::shift_basis(t, 0).unwrap();
    for tt in [0.5, std::f64::consts::PI] {
        let d = &s.flow_conjugate(tt) - &s;
        for l in [8usize, 16, 32] {
            let bound = tt / (2.0 * (l as f64 + 1.0)) + 1e-12;
            let got = d.compactness_defect(l);
            assert!(got <= bound, "t={tt} L={l}: {got} > {bound}");
            assert!(got > 0.5 * bound);
        }
    }
}

#[test]
fn spectral_norm_matches_dense_svd() {
    let t = FockTruncation::new(2, 6).unwrap();
    let ops = [
        &FockOperator::shift(t.clone(), &[C64::new(0.4, 0.1), C64::new(0.2, -0.9)]).unwrap()
            + &FockOperator::annihilation(t.clone(), 0).unwrap().scaled(C64::new(0.0, 0.3)),
        FockOperator::creation(t.clone(), 1).unwrap(),
        &FockOperator::number_operator(t.clone()) + &FockOperator::shift_basis(t.clone(), 1).unwrap(),
    ];
    for op in &ops {
        let want = dense_norm(&op.to_dense());
        assert!((op.spectral_norm() - want).abs() < 1e-10 * want, "{} vs {want}", op.spectral_norm());
    }
}

#[test]
fn large_block_norm_uses_lanczos() {
    // level blocks of size > 320 for n=3 at K≥25
    let t = FockTruncation::new(3, 26).unwrap();
    let s = FockOperator::shift(t.clone(), &[c(0.6), c(0.0), C64::new(0.0, 0.8)]).unwrap();
    let nrm = s.spectral_norm();
    assert!(nrm <= 1.0 + 1e-12 && nrm > 0.9);
}

#[test]
fn dump_round_trip() {
    let t = FockTruncation::new(2, 4).unwrap();
    let op = &FockOperator::shift(t.clone(), &[C64::new(0.1, 1.0 / 3.0), c(-2.5e-7)]).unwrap()
        + &FockOperator::annihilation(t.clone(), 1).unwrap();
    let text = write_dump(&op);
    assert!(text.starts_with("fockop 2 4 -1:1\n"));
    let back = parse_dump(&text, DEFAULT_MAX_DIM).unwrap();
    assert_eq!(back.band(), op.band());
    assert_eq!((&back - &op).max_abs(), 0.0);
    assert_eq!(write_dump(&back), text);

    let s = FockOperator::shift_basis(t, 0).unwrap();
    assert!(write_dump(&s).starts_with("fockop 2 4 1\n"));
}

#[test]
fn dump_errors() {
    let cases = [
        "",
        "fock 2 4 1",
        "fockop 2 4 x",
        "fockop 2 4 1\nentry 0 99 1.0 0.0",
        "fockop 2 4 1\nentry 1 0 1.0",
        "fockop 2 4 1\nentry 1 0 1.0 0.0\nentry 1 0 1.0 0.0",
        "fockop 2 4 0\nentry 1 0 1.0 0.0",
        "fockop 2 4 1\nentry 1 0 NaN 0.0",
    ];
    for text in cases {
        assert!(parse_dump(text, DEFAULT_MAX_DIM).is_err(), "{text:?}");
    }
    assert!(matches!(parse_dump("fockop 5 30 0", 1000), Err(crate::Error::CapExceeded { .. })));
}
