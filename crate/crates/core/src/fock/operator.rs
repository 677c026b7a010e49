use super::FockTruncation;
use crate::sampling::DEFAULT_SEED;
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

/// Range of level shifts `lo..=hi` an operator is allowed to carry.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LevelBand {
    pub lo: i32,
    pub hi: i32,
}

impl LevelBand {
    pub const fn single(s: i32) -> Self {
        Self { lo: s, hi: s }
    }

    pub fn contains(&self, s: i32) -> bool {
        self.lo <= s && s <= self.hi
    }

    pub fn shift(&self) -> Option<i32> {
        (self.lo == self.hi).then_some(self.lo)
    }

    fn union(self, o: Self) -> Self {
        Self { lo: self.lo.min(o.lo), hi: self.hi.max(o.hi) }
    }

    fn sum(self, o: Self) -> Self {
        Self { lo: self.lo + o.lo, hi: self.hi + o.hi }
    }
}

impl fmt::Display for LevelBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.shift() {
            Some(s) => write!(f, "{s}"),
            None => write!(f, "{}:{}", self.lo, self.hi),
        }
    }
}

/// Operator on a truncated Fock space, stored as sorted sparse rows.
///
/// Arithmetic between operators on different truncations panics.
#[derive(Clone, Debug)]
pub struct FockOperator {
    trunc: Arc<FockTruncation>,
    rows: Vec<Vec<(usize, C64)>>,
    band: LevelBand,
}

/// Rows with more entries than this go through Lanczos instead of a dense SVD.
const DENSE_BLOCK_LIMIT: usize = 320;
const LANCZOS_STEPS: usize = 160;

impl FockOperator {
    /// Build from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(
        trunc: Arc<FockTruncation>,
        band: LevelBand,
        triplets: impl IntoIterator<Item = (usize, usize, C64)>,
    ) -> Self {
        let mut rows = vec![Vec::new(); trunc.dim()];
        for (r, c, v) in triplets {
            rows[r].push((c, v));
        }
        for row in rows.iter_mut() {
            *row = merge_row(std::mem::take(row));
        }
        Self { trunc, rows, band }
    }

    pub fn zero(trunc: Arc<FockTruncation>, band: LevelBand) -> Self {
        let rows = vec![Vec::new(); trunc.dim()];
        Self { trunc, rows, band }
    }

    /// Diagonal operator with entry `f(α)` on `|α⟩`.
    pub fn diagonal(trunc: Arc<FockTruncation>, f: impl Fn(&[u32]) -> C64) -> Self {
        let rows = trunc
            .basis()
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let v = f(a);
                if v == C64::new(0.0, 0.0) {
                    Vec::new()
                } else {
                    vec![(i, v)]
                }
            })
            .collect();
        Self { trunc, rows, band: LevelBand::single(0) }
    }

    pub fn identity(trunc: Arc<FockTruncation>) -> Self {
        Self::diagonal(trunc, |_| C64::new(1.0, 0.0))
    }

    /// `A*_j|α⟩ = √(α_j+1)|α+e_j⟩`, dropped at the top level. `j` is 0-based.
    pub fn creation(trunc: Arc<FockTruncation>, j: usize) -> crate::Result<Self> {
        check_mode(&trunc, j)?;
        let t = trunc.clone();
        let triplets = raising(&t, j, |a| (a[j] as f64 + 1.0).sqrt());
        Ok(Self::from_triplets(trunc, LevelBand::single(1), triplets))
    }

    /// Exact adjoint of [`FockOperator::creation`].
    pub fn annihilation(trunc: Arc<FockTruncation>, j: usize) -> crate::Result<Self> {
        Ok(Self::creation(trunc, j)?.adjoint())
    }

    /// Symmetrized shift `S_w = Sym(w ⊗ ·)`:
    /// `S_{e_j}|α⟩ = √((α_j+1)/(|α|+1))|α+e_j⟩`.
    pub fn shift(trunc: Arc<FockTruncation>, w: &[C64]) -> crate::Result<Self> {
        crate::error::check_len(trunc.modes(), w.len())?;
        let t = trunc.clone();
        let mut triplets = Vec::new();
        for (j, &wj) in w.iter().enumerate() {
            if wj == C64::new(0.0, 0.0) {
                continue;
            }
            triplets.extend(raising(&t, j, |a| {
                let level: u32 = a.iter().sum();
                ((a[j] as f64 + 1.0) / (level as f64 + 1.0)).sqrt()
            })
            .map(|(r, c, v)| (r, c, v * wj)));
        }
        Ok(Self::from_triplets(trunc, LevelBand::single(1), triplets))
    }

    /// `S_{e_j}` for a 0-based mode index.
    pub fn shift_basis(trunc: Arc<FockTruncation>, j: usize) -> crate::Result<Self> {
        check_mode(&trunc, j)?;
        let mut w = vec![C64::new(0.0, 0.0); trunc.modes()];
        w[j] = C64::new(1.0, 0.0);
        Self::shift(trunc, &w)
    }

    pub fn number_operator(trunc: Arc<FockTruncation>) -> Self {
        Self::diagonal(trunc, |a| C64::new(a.iter().sum::<u32>() as f64, 0.0))
    }

    /// `(N+1)^{is}`.
    pub fn flow_unitary(trunc: Arc<FockTruncation>, s: f64) -> Self {
        Self::diagonal(trunc, |a| {
            let k = a.iter().sum::<u32>() as f64;
            C64::from_polar(1.0, s * (k + 1.0).ln())
        })
    }

    /// `(N+1)^{it/2} · self · (N+1)^{-it/2}`, computed entrywise.
    pub fn flow_conjugate(&self, t: f64) -> Self {
        let mut out = self.clone();
        for (r, row) in out.rows.iter_mut().enumerate() {
            let lr = self.trunc.level_of(r) as f64 + 1.0;
            for (c, v) in row.iter_mut() {
                let lc = self.trunc.level_of(*c) as f64 + 1.0;
                *v *= C64::from_polar(1.0, 0.5 * t * (lr / lc).ln());
            }
        }
        out
    }

    pub fn truncation(&self) -> &Arc<FockTruncation> {
        &self.trunc
    }

    pub fn dim(&self) -> usize {
        self.trunc.dim()
    }

    /// Declared band of level shifts.
    pub fn band(&self) -> LevelBand {
        self.band
    }

    /// Declared level shift when the band is a single value.
    pub fn level_shift(&self) -> Option<i32> {
        self.band.shift()
    }

    /// Replace the declared band, checking every stored entry fits.
    pub fn with_band(mut self, band: LevelBand) -> crate::Result<Self> {
        self.band = band;
        if self.check_band() {
            Ok(self)
        } else {
            Err(crate::Error::DataCorruption(format!("entries outside level band {band}")))
        }
    }

    /// True when every nonzero entry maps level k to a level k+s with s in the band.
    pub fn check_band(&self) -> bool {
        self.entries().all(|(r, c, _)| self.band.contains(self.shift_of(r, c)))
    }

    /// Smallest band containing the actual nonzero pattern.
    pub fn actual_band(&self) -> Option<LevelBand> {
        self.entries().map(|(r, c, _)| LevelBand::single(self.shift_of(r, c))).reduce(LevelBand::union)
    }

    fn shift_of(&self, r: usize, c: usize) -> i32 {
        self.trunc.level_of(r) as i32 - self.trunc.level_of(c) as i32
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Nonzero entries in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().map(move |&(c, v)| (r, c, v)))
    }

    pub fn entry(&self, r: usize, c: usize) -> C64 {
        match self.rows[r].binary_search_by_key(&c, |e| e.0) {
            Ok(p) => self.rows[r][p].1,
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.entries().map(|e| e.2.norm()).fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim(), self.dim());
        for (r, c, v) in self.entries() {
            m[(r, c)] = v;
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        let mut rows = vec![Vec::new(); self.dim()];
        for (r, c, v) in self.entries() {
            rows[c].push((r, v.conj()));
        }
        // rows were filled in increasing r, so they are already sorted
        Self { trunc: self.trunc.clone(), rows, band: LevelBand { lo: -self.band.hi, hi: -self.band.lo } }
    }

    pub fn scaled(&self, s: C64) -> Self {
        let mut out = self.clone();
        for row in out.rows.iter_mut() {
            row.retain_mut(|(_, v)| {
                *v *= s;
                *v != C64::new(0.0, 0.0)
            });
        }
        out
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    /// Apply to a vector in the documented basis order.
    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.dim());
        self.rows.iter().map(|row| row.iter().map(|&(c, v)| v * x[c]).sum()).collect()
    }

    /// Zero every row and column whose level lies outside `lo..=hi`.
    pub fn compress(&self, lo: usize, hi: usize) -> Self {
        let inside = |i: usize| (lo..=hi).contains(&self.trunc.level_of(i));
        let rows = self
            .rows
            .iter()
            .enumerate()
            .map(|(r, row)| {
                if inside(r) {
                    row.iter().filter(|(c, _)| inside(*c)).copied().collect()
                } else {
                    Vec::new()
                }
            })
            .collect();
        Self { trunc: self.trunc.clone(), rows, band: self.band }
    }

    /// `‖P_top · self · P_top‖` where `P_top` projects onto levels `≤ top`.
    pub fn interior_norm(&self, top: usize) -> f64 {
        self.compress(0, top).spectral_norm()
    }

    /// Norm of the compression to levels `L..=K-1`.
    ///
    /// The top level is excluded because truncation makes it an artifact:
    /// without the margin `[S*, S]` would have defect 1 at every `L`.
    pub fn compactness_defect(&self, l: usize) -> f64 {
        self.compactness_defect_with_margin(l, 1)
    }

    /// Norm of the compression to levels `L..=K-margin` (0 if that window is empty).
    pub fn compactness_defect_with_margin(&self, l: usize, margin: usize) -> f64 {
        assert!(l <= self.trunc.top_level(), "level {l} above truncation");
        match self.trunc.top_level().checked_sub(margin) {
            Some(hi) if hi >= l => self.compress(l, hi).spectral_norm(),
            _ => 0.0,
        }
    }

    /// Operator 2-norm.
    ///
    /// Level-homogeneous operators split into independent level blocks, each
    /// handled by a dense SVD (or Lanczos when large). Mixed operators go
    /// through Lanczos on `MᴴM` with full reorthogonalization.
    pub fn spectral_norm(&self) -> f64 {
        let Some(band) = self.actual_band() else {
            return 0.0;
        };
        match band.shift() {
            Some(s) => self.block_norm(s),
            None => lanczos_norm(self, self.dim()),
        }
    }

    fn block_norm(&self, s: i32) -> f64 {
        let t = &self.trunc;
        (0..=t.top_level())
            .into_par_iter()
            .filter_map(|target| {
                let source = target as i32 - s;
                (0..=t.top_level() as i32).contains(&source).then_some((target, source as usize))
            })
            .map(|(target, source)| {
                let rr = t.level_range(target);
                let cr = t.level_range(source);
                let block = self.block(rr.clone(), cr.clone());
                if block.nnz() == 0 {
                    0.0
                } else if s == 0 && block.is_diagonal() {
                    block.max_abs()
                } else if rr.len().max(cr.len()) <= DENSE_BLOCK_LIMIT {
                    let d = block.to_dense();
                    d.svd(false, false).singular_values.iter().cloned().fold(0.0, f64::max)
                } else {
                    lanczos_norm(&block, block.ncols)
                }
            })
            .reduce(|| 0.0, f64::max)
    }

    fn block(&self, rr: std::ops::Range<usize>, cr: std::ops::Range<usize>) -> SparseBlock {
        let c0 = cr.start;
        let rows = rr
            .map(|r| {
                self.rows[r]
                    .iter()
                    .filter(|(c, _)| cr.contains(c))
                    .map(|&(c, v)| (c - c0, v))
                    .collect()
            })
            .collect();
        SparseBlock { rows, ncols: cr.len() }
    }
}

fn check_mode(t: &FockTruncation, j: usize) -> crate::Result<()> {
    if j >= t.modes() {
        Err(crate::Error::Input(format!("mode index {j} out of range for {} modes", t.modes())))
    } else {
        Ok(())
    }
}

/// Triplets of `|α⟩ ↦ c(α)|α+e_j⟩` for `|α| < K`.
fn raising<'a>(
    t: &'a FockTruncation,
    j: usize,
    coeff: impl Fn(&[u32]) -> f64 + 'a,
) -> impl Iterator<Item = (usize, usize, C64)> + 'a {
    let below_top = t.level_offsets()[t.top_level()];
    t.basis()[..below_top].iter().enumerate().map(move |(c, a)| {
        let mut b = a.clone();
        b[j] += 1;
        let r = t.index_of(&b).expect("raised index is in the basis");
        (r, c, C64::new(coeff(a), 0.0))
    })
}

fn merge_row(mut row: Vec<(usize, C64)>) -> Vec<(usize, C64)> {
    row.sort_by_key(|e| e.0);
    let mut out: Vec<(usize, C64)> = Vec::with_capacity(row.len());
    for (c, v) in row {
        match out.last_mut() {
            Some(last) if last.0 == c => last.1 += v,
            _ => out.push((c, v)),
        }
    }
    out.retain(|e| e.1 != C64::new(0.0, 0.0));
    out
}

fn assert_same(a: &FockOperator, b: &FockOperator) {
    assert!(
        Arc::ptr_eq(&a.trunc, &b.trunc) || a.trunc == b.trunc,
        "operators live on different truncations"
    );
}

fn combine(a: &FockOperator, b: &FockOperator, sign: f64) -> FockOperator {
    assert_same(a, b);
    let rows = a
        .rows
        .par_iter()
        .zip(b.rows.par_iter())
        .map(|(x, y)| {
            let mut row: Vec<(usize, C64)> = x.clone();
            row.extend(y.iter().map(|&(c, v)| (c, v * sign)));
            merge_row(row)
        })
        .collect();
    FockOperator { trunc: a.trunc.clone(), rows, band: a.band.union(b.band) }
}

impl Add for &FockOperator {
    type Output = FockOperator;
    fn add(self, rhs: Self) -> FockOperator {
        combine(self, rhs, 1.0)
    }
}

impl Sub for &FockOperator {
    type Output = FockOperator;
    fn sub(self, rhs: Self) -> FockOperator {
        combine(self, rhs, -1.0)
    }
}

impl Neg for &FockOperator {
    type Output = FockOperator;
    fn neg(self) -> FockOperator {
        self.scaled(C64::new(-1.0, 0.0))
    }
}

impl Mul for &FockOperator {
    type Output = FockOperator;
    fn mul(self, rhs: Self) -> FockOperator {
        assert_same(self, rhs);
        let dim = self.dim();
        let rows = self
            .rows
            .par_iter()
            .map_init(
                || (vec![C64::new(0.0, 0.0); dim], Vec::<usize>::new()),
                |(acc, touched), row| {
                    for &(k, a) in row {
                        for &(j, b) in &rhs.rows[k] {
                            if acc[j] == C64::new(0.0, 0.0) {
                                touched.push(j);
                            }
                            acc[j] += a * b;
                        }
                    }
                    touched.sort_unstable();
                    touched.dedup();
                    let out = touched
                        .iter()
                        .map(|&j| (j, std::mem::take(&mut acc[j])))
                        .filter(|e| e.1 != C64::new(0.0, 0.0))
                        .collect();
                    touched.clear();
                    out
                },
            )
            .collect();
        FockOperator { trunc: self.trunc.clone(), rows, band: self.band.sum(rhs.band) }
    }
}

impl Mul<&FockOperator> for C64 {
    type Output = FockOperator;
    fn mul(self, rhs: &FockOperator) -> FockOperator {
        rhs.scaled(self)
    }
}

/// Minimal row-sparse matrix used for per-block norms.
struct SparseBlock {
    rows: Vec<Vec<(usize, C64)>>,
    ncols: usize,
}

impl SparseBlock {
    fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    fn is_diagonal(&self) -> bool {
        self.rows.iter().enumerate().all(|(r, row)| row.iter().all(|e| e.0 == r))
    }

    fn max_abs(&self) -> f64 {
        self.rows.iter().flatten().map(|e| e.1.norm()).fold(0.0, f64::max)
    }

    fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.rows.len(), self.ncols);
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, v) in row {
                m[(r, c)] = v;
            }
        }
        m
    }
}

trait RowSparse {
    fn row_list(&self) -> &[Vec<(usize, C64)>];
}

impl RowSparse for SparseBlock {
    fn row_list(&self) -> &[Vec<(usize, C64)>] {
        &self.rows
    }
}

impl RowSparse for FockOperator {
    fn row_list(&self) -> &[Vec<(usize, C64)>] {
        &self.rows
    }
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm2(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest singular value via Lanczos on `MᴴM`.
fn lanczos_norm(m: &impl RowSparse, ncols: usize) -> f64 {
    let rows = m.row_list();
    let gram = |x: &[C64]| -> Vec<C64> {
        let y: Vec<C64> = rows.iter().map(|row| row.iter().map(|&(c, v)| v * x[c]).sum()).collect();
        let mut z = vec![C64::new(0.0, 0.0); ncols];
        for (r, row) in rows.iter().enumerate() {
            for &(c, v) in row {
                z[c] += v.conj() * y[r];
            }
        }
        z
    };
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let mut q: Vec<C64> = (0..ncols)
        .map(|_| C64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
        .collect();
    let n0 = norm2(&q);
    q.iter_mut().for_each(|x| *x /= n0);

    let steps = LANCZOS_STEPS.min(ncols);
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(steps);
    let mut alpha = Vec::with_capacity(steps);
    let mut beta: Vec<f64> = Vec::with_capacity(steps);
    let mut best = 0.0f64;
    for step in 0..steps {
        let mut w = gram(&q);
        let a = dot(&q, &w).re;
        basis.push(q);
        alpha.push(a);
        for _ in 0..2 {
            for b in &basis {
                let h = dot(b, &w);
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= h * y);
            }
        }
        let bnorm = norm2(&w);
        let top = tridiagonal_top(&alpha, &beta);
        let converged = step > 4 && (top - best).abs() <= 1e-15 * top.max(1e-300);
        best = best.max(top);
        if bnorm <= 1e-13 * best.max(1e-300) || converged {
            break;
        }
        beta.push(bnorm);
        q = w.into_iter().map(|x| x / bnorm).collect();
    }
    best.max(0.0).sqrt()
}

fn tridiagonal_top(alpha: &[f64], beta: &[f64]) -> f64 {
    let k = alpha.len();
    let mut t = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alpha[i];
        if i + 1 < k {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    t.symmetric_eigenvalues().iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}
