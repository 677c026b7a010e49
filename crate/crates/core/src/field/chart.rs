//! Osculating algebras of a distribution `H ⊂ Tℝ^d` over sample points.
//!
//! The quotient `TM/H` at `p` is identified with the span of the completion
//! fields `Z_1..Z_{d-h}` of the frame: writing
//! `[X_i, X_j](p) = Σ a_l X_l(p) + Σ c_k Z_k(p)`, the osculating bracket is
//! `B[k][i][j] = c_k`. Everything up to the final conversion to floats is
//! exact rational arithmetic.

use super::poly::{poly_bracket, q_from_f64, q_int, q_to_f64, Poly, PolyCovector, PolyVectorField, Q};
use crate::error::{Error, Result};
use crate::htype::{
    is_htype, make_heisenberg, make_quaternionic_heisenberg, perturbation_tensor,
};
use crate::lie::Step2Algebra;
use nalgebra::DMatrix;
use num_traits::{One, Zero};
use rayon::prelude::*;
use std::sync::Arc;

type TensorFn = dyn Fn(&[f64]) -> Vec<DMatrix<f64>> + Send + Sync;

#[derive(Clone)]
enum Source {
    Frames {
        /// H-frame followed by the completion.
        frame: Vec<PolyVectorField>,
        /// `[X_i, X_j]` for `i < j`, row-major.
        brackets: Vec<PolyVectorField>,
        /// Polynomial 1-forms `θ_k` with `θ_k(X_i) = 0`, `θ_k(Z_l) = δ_kl`, when available.
        annihilator: Option<Vec<PolyCovector>>,
        default_completion: bool,
    },
    Tensor(Arc<TensorFn>),
}

/// Distribution over a chart together with its sample points.
#[derive(Clone)]
pub struct ChartField {
    dim: usize,
    hrank: usize,
    source: Source,
    points: Vec<Vec<Q>>,
}

impl std::fmt::Debug for ChartField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChartField")
            .field("dim", &self.dim)
            .field("hrank", &self.hrank)
            .field("points", &self.points.len())
            .finish_non_exhaustive()
    }
}

fn pair_index(h: usize) -> Vec<(usize, usize)> {
    (0..h).flat_map(|i| (i + 1..h).map(move |j| (i, j))).collect()
}

impl ChartField {
    /// Chart from a polynomial frame of `H`. `completion` defaults to the
    /// coordinate fields `∂_{h+1}, …, ∂_d`.
    pub fn from_frames(
        h_frame: Vec<PolyVectorField>,
        completion: Option<Vec<PolyVectorField>>,
        points: Vec<Vec<Q>>,
    ) -> Result<Self> {
        let hrank = h_frame.len();
        let dim = h_frame.first().map(PolyVectorField::dim).ok_or_else(|| Error::Input("empty H-frame".into()))?;
        if hrank >= dim {
            return Err(Error::Input(format!("H has rank {hrank} in dimension {dim}; need a proper subbundle")));
        }
        let default_completion = completion.is_none();
        let completion =
            completion.unwrap_or_else(|| (hrank..dim).map(|i| PolyVectorField::coordinate(dim, i)).collect());
        if completion.len() != dim - hrank {
            return Err(Error::Dimension { expected: dim - hrank, got: completion.len() });
        }
        let frame: Vec<PolyVectorField> = h_frame.into_iter().chain(completion).collect();
        if frame.iter().any(|f| f.dim() != dim) {
            return Err(Error::Input("frame fields have different ambient dimensions".into()));
        }
        if let Some(p) = points.iter().find(|p| p.len() != dim) {
            return Err(Error::Dimension { expected: dim, got: p.len() });
        }
        let brackets = pair_index(hrank)
            .into_iter()
            .map(|(i, j)| poly_bracket(&frame[i], &frame[j]))
            .collect::<Result<Vec<_>>>()?;
        let annihilator = if default_completion { graph_annihilator(&frame[..hrank], dim) } else { None };
        Ok(Self { dim, hrank, source: Source::Frames { frame, brackets, annihilator, default_completion }, points })
    }

    /// Chart whose osculating tensor at `p` is `f(p)` (no frames).
    pub fn from_tensor_fn(
        n1: usize,
        n2: usize,
        f: impl Fn(&[f64]) -> Vec<DMatrix<f64>> + Send + Sync + 'static,
        points: Vec<Vec<Q>>,
    ) -> Result<Self> {
        let dim = n1 + n2;
        if let Some(p) = points.iter().find(|p| p.len() != dim) {
            return Err(Error::Dimension { expected: dim, got: p.len() });
        }
        Ok(Self { dim, hrank: n1, source: Source::Tensor(Arc::new(f)), points })
    }

    /// Left-invariant frame of the group of `a` in exponential coordinates:
    /// `X_i = ∂_{x_i} - ½ Σ_k (Σ_j B_k[i][j] x_j) ∂_{z_k}`.
    pub fn left_invariant(a: &Step2Algebra, points: Vec<Vec<Q>>) -> Result<Self> {
        let (n1, d) = (a.n1(), a.dim());
        let half = Q::new(1.into(), 2.into());
        let frame = (0..n1)
            .map(|i| {
                let mut x = PolyVectorField::coordinate(d, i);
                for (k, bk) in a.bracket_tensor().iter().enumerate() {
                    let mut c = Poly::zero(d);
                    for j in 0..n1 {
                        if bk[(i, j)] != 0.0 {
                            c = &c + &Poly::var(d, j).scale(&(-q_from_f64(bk[(i, j)]) * &half));
                        }
                    }
                    *x.component_mut(n1 + k) = c;
                }
                x
            })
            .collect();
        Self::from_frames(frame, None, points)
    }

    /// Same H-frame with a different completion.
    pub fn with_completion(&self, completion: Vec<PolyVectorField>) -> Result<Self> {
        match &self.source {
            Source::Frames { frame, .. } => {
                Self::from_frames(frame[..self.hrank].to_vec(), Some(completion), self.points.clone())
            }
            Source::Tensor(_) => Err(Error::Unsupported("tensor charts have no frame to complete".into())),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hrank(&self) -> usize {
        self.hrank
    }

    pub fn points(&self) -> &[Vec<Q>] {
        &self.points
    }

    /// H-frame followed by the completion (empty for tensor charts).
    pub fn frame(&self) -> &[PolyVectorField] {
        match &self.source {
            Source::Frames { frame, .. } => frame,
            Source::Tensor(_) => &[],
        }
    }

    pub fn has_default_completion(&self) -> bool {
        matches!(self.source, Source::Frames { default_completion: true, .. })
    }

    pub fn annihilator(&self) -> Option<&[PolyCovector]> {
        match &self.source {
            Source::Frames { annihilator, .. } => annihilator.as_deref(),
            Source::Tensor(_) => None,
        }
    }

    /// Osculating algebra at `p`.
    pub fn osculating_at(&self, p: &[Q]) -> Result<Step2Algebra> {
        if p.len() != self.dim {
            return Err(Error::Dimension { expected: self.dim, got: p.len() });
        }
        let (h, n2) = (self.hrank, self.dim - self.hrank);
        match &self.source {
            Source::Tensor(f) => {
                let pf: Vec<f64> = p.iter().map(q_to_f64).collect();
                Step2Algebra::new(h, f(&pf))
            }
            Source::Frames { frame, brackets, .. } => {
                let cols: Vec<Vec<Q>> = frame.iter().map(|x| x.eval(p)).collect();
                let rhs: Vec<Vec<Q>> = brackets.iter().map(|b| b.eval(p)).collect();
                let sol = solve_exact(&cols, &rhs).ok_or_else(|| {
                    Error::Precondition(format!(
                        "frame is rank deficient at ({})",
                        p.iter().map(|x| q_to_f64(x).to_string()).collect::<Vec<_>>().join(", ")
                    ))
                })?;
                let mut b = vec![DMatrix::zeros(h, h); n2];
                for (&(i, j), c) in pair_index(h).iter().zip(&sol) {
                    for (k, bk) in b.iter_mut().enumerate() {
                        let v = q_to_f64(&c[h + k]);
                        bk[(i, j)] = v;
                        bk[(j, i)] = -v;
                    }
                }
                Step2Algebra::new(h, b)
            }
        }
    }
}

/// For frames of the form `X_i = ∂_i + Σ_k a_{ik} ∂_{h+k}` the forms
/// `θ_k = dz_k - Σ_i a_{ik} dx_i` annihilate `H` and are dual to `∂_z`.
fn graph_annihilator(h_frame: &[PolyVectorField], d: usize) -> Option<Vec<PolyCovector>> {
    let h = h_frame.len();
    for (i, x) in h_frame.iter().enumerate() {
        for (l, c) in x.components()[..h].iter().enumerate() {
            let want = if i == l { Q::one() } else { Q::zero() };
            if c.as_constant() != Some(want) {
                return None;
            }
        }
    }
    let forms = (0..d - h)
        .map(|k| {
            let mut comps = vec![Poly::zero(d); d];
            comps[h + k] = Poly::constant(d, Q::one());
            for (i, x) in h_frame.iter().enumerate() {
                comps[i] = -&x.components()[h + k];
            }
            PolyCovector::new(comps).expect("sized")
        })
        .collect();
    Some(forms)
}

/// Solve `[cols] · c = r` exactly for each right-hand side; `None` if singular.
fn solve_exact(cols: &[Vec<Q>], rhs: &[Vec<Q>]) -> Option<Vec<Vec<Q>>> {
    let d = cols.len();
    let m = rhs.len();
    // augmented rows: d x (d + m)
    let mut a: Vec<Vec<Q>> = (0..d)
        .map(|r| cols.iter().map(|c| c[r].clone()).chain(rhs.iter().map(|v| v[r].clone())).collect())
        .collect();
    for col in 0..d {
        let piv = (col..d).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        let inv = Q::one() / &a[col][col];
        for v in a[col].iter_mut() {
            *v *= &inv;
        }
        for r in 0..d {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                let pivot_row = a[col].clone();
                for (x, y) in a[r].iter_mut().zip(&pivot_row) {
                    *x -= &f * y;
                }
            }
        }
    }
    Some((0..m).map(|s| (0..d).map(|r| a[r][d + s].clone()).collect()).collect())
}

/// Per-point result of [`scan_chart`].
#[derive(Debug, Clone)]
pub struct PointReport {
    pub point: Vec<f64>,
    pub algebra: Step2Algebra,
    pub regular: bool,
    pub sigma_min: f64,
    pub htype: bool,
    pub clifford_defect: f64,
    pub class_pair: Option<(usize, usize)>,
}

/// Exact check of `dθ(X_i, X_j) = -θ([X_i, X_j])` at the sample points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DThetaCheck {
    pub evaluations: usize,
    pub mismatches: usize,
}

#[derive(Debug, Clone)]
pub struct ChartScan {
    pub points: Vec<PointReport>,
    /// Every osculating algebra is regular.
    pub polycontact: bool,
    /// Every osculating algebra is H-type.
    pub htype_manifold: bool,
    /// Common class pair when all points are H-type with the same class.
    pub class_pair: Option<(usize, usize)>,
    pub class_constant: bool,
    pub non_regular: Vec<usize>,
    pub non_htype: Vec<usize>,
    pub dtheta: Option<DThetaCheck>,
}

impl ChartScan {
    /// Same regularity verdicts and class pairs point by point.
    pub fn same_invariants(&self, other: &ChartScan) -> bool {
        self.points.len() == other.points.len()
            && self
                .points
                .iter()
                .zip(&other.points)
                .all(|(a, b)| a.regular == b.regular && a.class_pair == b.class_pair)
    }
}

/// Regularity and H-type verdicts at every sample point.
pub fn scan_chart(f: &ChartField) -> Result<ChartScan> {
    let points = f
        .points
        .par_iter()
        .map(|p| {
            let a = f.osculating_at(p)?;
            let reg = a.regularity().clone();
            let ht = is_htype(&a);
            Ok(PointReport {
                point: p.iter().map(q_to_f64).collect(),
                regular: reg.is_regular(),
                sigma_min: reg.sphere_min_sigma,
                htype: ht.is_htype,
                clifford_defect: ht.clifford_defect,
                class_pair: ht.class_pair,
                algebra: a,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let non_regular: Vec<usize> = points.iter().enumerate().filter(|(_, r)| !r.regular).map(|(i, _)| i).collect();
    let non_htype: Vec<usize> = points.iter().enumerate().filter(|(_, r)| !r.htype).map(|(i, _)| i).collect();
    let first = points.first().and_then(|r| r.class_pair);
    let class_constant = non_htype.is_empty() && points.iter().all(|r| r.class_pair == first);
    Ok(ChartScan {
        polycontact: non_regular.is_empty(),
        htype_manifold: non_htype.is_empty(),
        class_pair: if class_constant { first } else { None },
        class_constant,
        non_regular,
        non_htype,
        dtheta: dtheta_check(f),
        points,
    })
}

/// `None` when the chart has no polynomial annihilator.
pub fn dtheta_check(f: &ChartField) -> Option<DThetaCheck> {
    let Source::Frames { frame, brackets, annihilator: Some(forms), .. } = &f.source else {
        return None;
    };
    let h = f.hrank;
    let pairs = pair_index(h);
    let mut polys = Vec::new();
    for th in forms {
        for (&(i, j), br) in pairs.iter().zip(brackets) {
            // dθ(X,Y) + θ([X,Y]) must vanish
            polys.push(&th.d_pair(&frame[i], &frame[j]) + &th.pair(br));
        }
        // θ must annihilate H for the identity to apply
        for x in &frame[..h] {
            polys.push(th.pair(x));
        }
    }
    let mismatches = f
        .points
        .par_iter()
        .map(|p| polys.iter().filter(|q| !q.eval(p).is_zero()).count())
        .sum();
    Some(DThetaCheck { evaluations: polys.len() * f.points.len(), mismatches })
}

/// Cartesian grid with `steps` points per axis on `[lo, hi]^d`, exact.
pub fn grid(d: usize, lo: &Q, hi: &Q, steps: usize) -> Vec<Vec<Q>> {
    let axis: Vec<Q> = if steps <= 1 {
        vec![lo.clone()]
    } else {
        (0..steps).map(|s| lo + (hi - lo) * Q::new(s.into(), (steps - 1).into())).collect()
    };
    let mut out: Vec<Vec<Q>> = vec![Vec::new()];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push(v.clone());
                    q
                })
            })
            .collect();
    }
    out
}

/// Heisenberg chart `X = ∂x - (y/2)∂z`, `Y = ∂y + (x/2)∂z` on a 5³ grid in `[-1, 1]³`.
pub fn heisenberg_chart() -> ChartField {
    ChartField::left_invariant(&make_heisenberg(1), grid(3, &q_int(-1), &q_int(1), 5)).expect("valid chart")
}

/// Involutive distribution spanned by `∂_1, ∂_2` on ℝ³, same grid.
pub fn involutive_chart() -> ChartField {
    let frame = vec![PolyVectorField::coordinate(3, 0), PolyVectorField::coordinate(3, 1)];
    ChartField::from_frames(frame, None, grid(3, &q_int(-1), &q_int(1), 5)).expect("valid chart")
}

/// Left-invariant quaternionic Heisenberg frame on ℝ⁷ at a few points.
pub fn quaternionic_chart() -> ChartField {
    let pts = crate::sampling::random_sphere(7, 12, 11)
        .into_iter()
        .map(|p| p.iter().map(|x| Q::new(((x * 8.0).round() as i64).into(), 4.into())).collect())
        .collect();
    ChartField::left_invariant(&make_quaternionic_heisenberg(1), pts).expect("valid chart")
}

/// `B(x) = B_qH + max(0, x_1) · C` with `C` the fixed 0.1-scaled perturbation:
/// regular everywhere, H-type exactly where `x_1 ≤ 0`. Sampled on a 5×5
/// grid in `(x_1, x_2) ∈ [-1, 1]²` with the other coordinates 0.
pub fn mixed_fixture() -> ChartField {
    let base = make_quaternionic_heisenberg(1).bracket_tensor().to_vec();
    let c = perturbation_tensor(0.1);
    let f = move |p: &[f64]| {
        let t = p[0].max(0.0);
        base.iter().zip(&c).map(|(b, c)| b + c * t).collect()
    };
    let pts = grid(2, &q_int(-1), &q_int(1), 5)
        .into_iter()
        .map(|mut p| {
            p.resize(7, Q::zero());
            p
        })
        .collect();
    ChartField::from_tensor_fn(4, 3, f, pts).expect("valid chart")
}
