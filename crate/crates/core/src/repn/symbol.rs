//! Principal symbols of Toeplitz words.
//!
//! A word is a formal product of letters; its operator on a truncation is
//! the product of the letter matrices, and its symbol is the product of the
//! letter symbols on the unit sphere of `ℂⁿ`:
//! `σ(S_w)(ζ) = Σ w_j ζ_j`, `σ(S*_w) = conj σ(S_w)`, compact letters give 0
//! and flow phases give 1.
//!
//! Over a point `θ` the sphere `S*g1` is identified with the unit sphere of
//! `ℂⁿ` through the Darboux frame of `ω_θ`: `ζ_j ∝ ξ(X_j) + iξ(Y_j)`, and a
//! real vector `X = Σ a_j X_j + b_j Y_j` becomes the shift vector
//! `w_j = a_j - i b_j` (the coordinates of `(X - iJ_θX)/√2` in the `W_j`).

use crate::error::{check_len, Result};
use crate::fock::{FockOperator, FockTruncation, LevelBand};
use crate::lie::Step2Algebra;
use crate::sampling;
use crate::symplectic::{compatible_j, darboux_basis, DarbouxBasis};
use nalgebra::DVector;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

/// Spread below which a section counts as constant in `θ`.
pub const T0_TOL: f64 = 1e-8;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub enum Letter {
    /// `S_w`
    Shift(Vec<C64>),
    /// `S*_w`
    ShiftAdj(Vec<C64>),
    /// Projection onto levels `≤ m` (compact, symbol 0).
    Compact(usize),
    /// Diagonal `((N+2)/(N+1))^{it/2}` (identity plus compact, symbol 1).
    FlowPhase(f64),
}

impl Letter {
    pub fn symbol(&self, zeta: &[C64]) -> C64 {
        match self {
            Letter::Shift(w) => w.iter().zip(zeta).map(|(a, z)| a * z).sum(),
            Letter::ShiftAdj(w) => w.iter().zip(zeta).map(|(a, z)| a * z).sum::<C64>().conj(),
            Letter::Compact(_) => ZERO,
            Letter::FlowPhase(_) => ONE,
        }
    }

    pub fn operator(&self, trunc: &Arc<FockTruncation>) -> Result<FockOperator> {
        Ok(match self {
            Letter::Shift(w) => FockOperator::shift(trunc.clone(), w)?,
            Letter::ShiftAdj(w) => FockOperator::shift(trunc.clone(), w)?.adjoint(),
            Letter::Compact(m) => FockOperator::diagonal(trunc.clone(), |a| {
                if a.iter().sum::<u32>() as usize <= *m {
                    ONE
                } else {
                    ZERO
                }
            }),
            Letter::FlowPhase(t) => FockOperator::diagonal(trunc.clone(), |a| {
                let k = a.iter().sum::<u32>() as f64;
                C64::from_polar(1.0, 0.5 * t * ((k + 2.0) / (k + 1.0)).ln())
            }),
        })
    }

    fn adjoint(&self) -> Letter {
        match self {
            Letter::Shift(w) => Letter::ShiftAdj(w.clone()),
            Letter::ShiftAdj(w) => Letter::Shift(w.clone()),
            Letter::Compact(m) => Letter::Compact(*m),
            Letter::FlowPhase(t) => Letter::FlowPhase(-t),
        }
    }
}

/// `coeff · letters[0] · letters[1] · …`; the empty word is the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Word {
    pub coeff: C64,
    pub letters: Vec<Letter>,
}

/// Finite sum of words.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SymbolExpr {
    pub terms: Vec<Word>,
}

impl SymbolExpr {
    pub fn identity() -> Self {
        Self { terms: vec![Word { coeff: ONE, letters: Vec::new() }] }
    }

    pub fn letter(l: Letter) -> Self {
        Self { terms: vec![Word { coeff: ONE, letters: vec![l] }] }
    }

    pub fn shift(w: Vec<C64>) -> Self {
        Self::letter(Letter::Shift(w))
    }

    pub fn shift_adj(w: Vec<C64>) -> Self {
        Self::letter(Letter::ShiftAdj(w))
    }

    /// `S_{e_j}` on `n` modes (0-based `j`).
    pub fn shift_basis(n: usize, j: usize) -> Self {
        let mut w = vec![ZERO; n];
        w[j] = ONE;
        Self::shift(w)
    }

    pub fn compact(m: usize) -> Self {
        Self::letter(Letter::Compact(m))
    }

    pub fn scaled(&self, c: C64) -> Self {
        Self {
            terms: self.terms.iter().map(|w| Word { coeff: w.coeff * c, letters: w.letters.clone() }).collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|w| Word {
                    coeff: w.coeff.conj(),
                    letters: w.letters.iter().rev().map(Letter::adjoint).collect(),
                })
                .collect(),
        }
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    pub fn symbol_at(&self, zeta: &[C64]) -> C64 {
        self.terms
            .iter()
            .map(|w| w.letters.iter().fold(w.coeff, |acc, l| acc * l.symbol(zeta)))
            .sum()
    }

    pub fn operator(&self, trunc: &Arc<FockTruncation>) -> Result<FockOperator> {
        let mut out = FockOperator::zero(trunc.clone(), LevelBand::single(0));
        for w in &self.terms {
            let mut op = FockOperator::identity(trunc.clone());
            for l in &w.letters {
                op = &op * &l.operator(trunc)?;
            }
            out = &out + &op.scaled(w.coeff);
        }
        Ok(out)
    }

    /// Image under the flow `α_t = Ad (N+1)^{it/2}`, written in letters:
    /// `α_t(S_w) = S_w · Φ_t` and `α_t(S*_w) = Φ_{-t} · S*_w`, with
    /// `Φ_t` the [`Letter::FlowPhase`] diagonal.
    pub fn flow(&self, t: f64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|w| Word {
                coeff: w.coeff,
                letters: w
                    .letters
                    .iter()
                    .flat_map(|l| match l {
                        Letter::Shift(_) => vec![l.clone(), Letter::FlowPhase(t)],
                        Letter::ShiftAdj(_) => vec![Letter::FlowPhase(-t), l.clone()],
                        _ => vec![l.clone()],
                    })
                    .collect(),
            })
            .collect();
        Self { terms }
    }
}

impl Add for &SymbolExpr {
    type Output = SymbolExpr;
    fn add(self, rhs: Self) -> SymbolExpr {
        SymbolExpr { terms: self.terms.iter().chain(&rhs.terms).cloned().collect() }
    }
}

impl Sub for &SymbolExpr {
    type Output = SymbolExpr;
    fn sub(self, rhs: Self) -> SymbolExpr {
        self + &rhs.scaled(-ONE)
    }
}

impl Mul for &SymbolExpr {
    type Output = SymbolExpr;
    fn mul(self, rhs: Self) -> SymbolExpr {
        let mut terms = Vec::with_capacity(self.terms.len() * rhs.terms.len());
        for a in &self.terms {
            for b in &rhs.terms {
                terms.push(Word {
                    coeff: a.coeff * b.coeff,
                    letters: a.letters.iter().chain(&b.letters).cloned().collect(),
                });
            }
        }
        SymbolExpr { terms }
    }
}

/// Unit vector of `ℂⁿ` representing `ξ ∈ g1*` in the Darboux frame.
pub fn fiber_point(frame: &DarbouxBasis, xi: &[f64]) -> Vec<C64> {
    let xi = DVector::from_column_slice(xi);
    let mut z: Vec<C64> =
        frame.x.iter().zip(&frame.y).map(|(x, y)| C64::new(xi.dot(x), xi.dot(y))).collect();
    let norm = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        z.iter_mut().for_each(|c| *c /= norm);
    }
    z
}

/// Fock coordinates `w_j = a_j - i b_j` of `X = Σ a_j X_j + b_j Y_j`.
pub fn shift_vector(frame: &DarbouxBasis, x: &[f64]) -> Result<Vec<C64>> {
    check_len(frame.x.first().map_or(0, |v| v.len()), x.len())?;
    let (a, b) = frame
        .coordinates(&DVector::from_column_slice(x))
        .ok_or_else(|| crate::Error::Input("Darboux vectors are not a basis".into()))?;
    Ok(a.iter().zip(&b).map(|(a, b)| C64::new(*a, -b)).collect())
}

/// Darboux frames over a sample of `θ ∈ S*g2`.
#[derive(Debug, Clone)]
pub struct SymbolContext {
    pub theta_points: Vec<Vec<f64>>,
    frames: Vec<DarbouxBasis>,
}

impl SymbolContext {
    pub fn new(a: &Step2Algebra, theta_points: Vec<Vec<f64>>) -> Result<Self> {
        let frames = theta_points
            .par_iter()
            .map(|th| {
                let t = compatible_j(&a.omega_matrix(th)?, a.g1_metric())?;
                darboux_basis(&t)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { theta_points, frames })
    }

    /// `count` quasi-uniform `θ` (just `±1` when `g2` is a line).
    pub fn with_default_samples(a: &Step2Algebra, count: usize) -> Result<Self> {
        Self::new(a, sampling::sample_sphere(a.n2(), count))
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn frame(&self, ti: usize) -> &DarbouxBasis {
        &self.frames[ti]
    }

    pub fn fiber_point(&self, ti: usize, xi: &[f64]) -> Vec<C64> {
        fiber_point(&self.frames[ti], xi)
    }

    pub fn shift_vector(&self, ti: usize, x: &[f64]) -> Result<Vec<C64>> {
        shift_vector(&self.frames[ti], x)
    }
}

/// Symbol values indexed `[word][theta][sphere point]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolSample {
    pub theta_points: Vec<Vec<f64>>,
    pub sphere_points: Vec<Vec<f64>>,
    pub values: Vec<Vec<Vec<C64>>>,
}

impl SymbolSample {
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .flatten()
            .flatten()
            .zip(other.values.iter().flatten().flatten())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Evaluate `words` at every `(θ, ξ)` pair.
pub fn symbol_eval(ctx: &SymbolContext, words: &[SymbolExpr], sphere_points: &[Vec<f64>]) -> SymbolSample {
    let values = words
        .iter()
        .map(|w| {
            (0..ctx.len())
                .map(|ti| sphere_points.iter().map(|xi| w.symbol_at(&ctx.fiber_point(ti, xi))).collect())
                .collect()
        })
        .collect();
    SymbolSample {
        theta_points: ctx.theta_points.clone(),
        sphere_points: sphere_points.to_vec(),
        values,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct T0Verdict {
    pub member: bool,
    /// `max_ξ max_{θ,θ'} |σ_θ(ξ) - σ_θ'(ξ)|`
    pub spread: f64,
    /// Same spread for the real parts only.
    pub real_part_spread: f64,
    pub tolerance: f64,
}

/// Tests whether the symbol of `section(θ_i)` is independent of `θ`.
pub fn t0_membership(
    ctx: &SymbolContext,
    section: impl Fn(usize) -> SymbolExpr,
    sphere_points: &[Vec<f64>],
) -> T0Verdict {
    let words: Vec<SymbolExpr> = (0..ctx.len()).map(section).collect();
    let mut spread = 0.0f64;
    let mut real_spread = 0.0f64;
    for xi in sphere_points {
        let vals: Vec<C64> = words.iter().enumerate().map(|(ti, w)| w.symbol_at(&ctx.fiber_point(ti, xi))).collect();
        for (i, a) in vals.iter().enumerate() {
            for b in &vals[i + 1..] {
                spread = spread.max((a - b).norm());
                real_spread = real_spread.max((a.re - b.re).abs());
            }
        }
    }
    T0Verdict { member: spread <= T0_TOL, spread, real_part_spread: real_spread, tolerance: T0_TOL }
}
