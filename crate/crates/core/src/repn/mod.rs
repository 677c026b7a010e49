//! Kirillov representations `π_θ` on truncated Fock spaces, principal
//! symbols of Toeplitz words and the number-operator flow.
//!
//! For a Darboux basis `X_j, Y_j` of `(g1, ω_θ)` with `J X_j = -Y_j` the
//! representation is
//! `ρ(X_j) = i(A*_j + A_j)/√2`, `ρ(Y_j) = (A*_j - A_j)/√2`, `ρ(z) = iθ(z)`,
//! so that `ρ(W_j) = i A*_j` for `W_j = (X_j + iY_j)/√2`.

mod symbol;

pub use symbol::{
    fiber_point, shift_vector, symbol_eval, t0_membership, Letter, SymbolContext, SymbolExpr,
    SymbolSample, T0Verdict, Word,
};

use crate::error::{check_len, Error, Result};
use crate::fock::{FockOperator, FockTruncation};
use crate::lie::Step2Algebra;
use crate::symplectic::{compatible_j, darboux_basis, CompatibleTriple, DarbouxBasis};
use nalgebra::DVector;
use num_complex::Complex64 as C64;
use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::Arc;

#[derive(Debug, Clone)]
pub struct KirillovRep {
    algebra: Step2Algebra,
    theta: Vec<f64>,
    triple: CompatibleTriple,
    darboux: DarbouxBasis,
    trunc: Arc<FockTruncation>,
    rho_x: Vec<FockOperator>,
    rho_y: Vec<FockOperator>,
    /// `ρ` on the standard basis of `g = g1 ⊕ g2`.
    rho: Vec<FockOperator>,
}

/// Build `π_θ` up to Fock level `k` with the default dimension cap.
pub fn build_rep(a: &Step2Algebra, theta: &[f64], k: usize) -> Result<KirillovRep> {
    build_rep_with_cap(a, theta, k, crate::fock::DEFAULT_MAX_DIM)
}

pub fn build_rep_with_cap(a: &Step2Algebra, theta: &[f64], k: usize, cap: usize) -> Result<KirillovRep> {
    check_len(a.n2(), theta.len())?;
    if theta.iter().all(|&t| t == 0.0) {
        return Err(Error::Input("theta must be nonzero".into()));
    }
    let omega = a.omega_matrix(theta)?;
    let triple = compatible_j(&omega, a.g1_metric())?;
    let darboux = darboux_basis(&triple)?;
    let trunc = FockTruncation::with_cap(a.n1() / 2, k, cap)?;
    KirillovRep::from_darboux(a, theta, triple, darboux, trunc)
}

impl KirillovRep {
    /// Representation for a given compatible triple and Darboux basis of `ω_θ`.
    pub fn from_darboux(
        a: &Step2Algebra,
        theta: &[f64],
        triple: CompatibleTriple,
        darboux: DarbouxBasis,
        trunc: Arc<FockTruncation>,
    ) -> Result<Self> {
        check_len(a.n2(), theta.len())?;
        let n = a.n1() / 2;
        if darboux.n() != n || trunc.modes() != n {
            return Err(Error::Dimension { expected: n, got: darboux.n().min(trunc.modes()) });
        }
        let i = C64::new(0.0, 1.0);
        let mut rho_x = Vec::with_capacity(n);
        let mut rho_y = Vec::with_capacity(n);
        for j in 0..n {
            let cr = FockOperator::creation(trunc.clone(), j)?;
            let an = cr.adjoint();
            rho_x.push((&cr + &an).scaled(i * FRAC_1_SQRT_2));
            rho_y.push((&cr - &an).scaled(C64::new(FRAC_1_SQRT_2, 0.0)));
        }
        let mut rho = Vec::with_capacity(a.dim());
        for e in 0..a.n1() {
            let mut v = DVector::zeros(a.n1());
            v[e] = 1.0;
            let (xs, ys) = darboux
                .coordinates(&v)
                .ok_or_else(|| Error::Input("Darboux vectors are not a basis".into()))?;
            rho.push(combine(&trunc, &rho_x, &rho_y, &xs, &ys));
        }
        for &t in theta {
            rho.push(FockOperator::identity(trunc.clone()).scaled(C64::new(0.0, t)));
        }
        Ok(Self {
            algebra: a.clone(),
            theta: theta.to_vec(),
            triple,
            darboux,
            trunc,
            rho_x,
            rho_y,
            rho,
        })
    }

    pub fn algebra(&self) -> &Step2Algebra {
        &self.algebra
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn triple(&self) -> &CompatibleTriple {
        &self.triple
    }

    pub fn darboux(&self) -> &DarbouxBasis {
        &self.darboux
    }

    pub fn truncation(&self) -> &Arc<FockTruncation> {
        &self.trunc
    }

    /// `ρ` of the i-th standard basis vector of `g` (g1 first, then g2).
    pub fn rho_basis(&self, i: usize) -> &FockOperator {
        &self.rho[i]
    }

    pub fn rho_x(&self, j: usize) -> &FockOperator {
        &self.rho_x[j]
    }

    pub fn rho_y(&self, j: usize) -> &FockOperator {
        &self.rho_y[j]
    }

    /// `ρ(W_j) = (ρ(X_j) + iρ(Y_j))/√2`.
    pub fn rho_w(&self, j: usize) -> FockOperator {
        (&self.rho_x[j] + &self.rho_y[j].scaled(C64::new(0.0, 1.0))).scaled(C64::new(FRAC_1_SQRT_2, 0.0))
    }

    /// `ρ(W̄_j) = (ρ(X_j) - iρ(Y_j))/√2`.
    pub fn rho_wbar(&self, j: usize) -> FockOperator {
        (&self.rho_x[j] - &self.rho_y[j].scaled(C64::new(0.0, 1.0))).scaled(C64::new(FRAC_1_SQRT_2, 0.0))
    }

    /// `ρ(v)` for `v` in standard coordinates of `g`.
    pub fn rho_of(&self, v: &[f64]) -> Result<FockOperator> {
        check_len(self.algebra.dim(), v.len())?;
        let mut out = FockOperator::zero(self.trunc.clone(), crate::fock::LevelBand::single(0));
        for (c, op) in v.iter().zip(&self.rho) {
            if *c != 0.0 {
                out = &out + &op.scaled(C64::new(*c, 0.0));
            }
        }
        Ok(out)
    }

    /// `max_{u,v} ‖P_{K-2}([ρu, ρv] - ρ[u,v])P_{K-2}‖` over basis pairs of `g`.
    pub fn verify_homomorphism(&self) -> f64 {
        let d = self.algebra.dim();
        let n1 = self.algebra.n1();
        let top = self.trunc.top_level().saturating_sub(2);
        let pairs: Vec<(usize, usize)> = (0..d).flat_map(|u| (u + 1..d).map(move |v| (u, v))).collect();
        use rayon::prelude::*;
        pairs
            .par_iter()
            .map(|&(u, v)| {
                let comm = self.rho[u].commutator(&self.rho[v]);
                let target = if u < n1 && v < n1 {
                    let mut eu = vec![0.0; n1];
                    let mut ev = vec![0.0; n1];
                    eu[u] = 1.0;
                    ev[v] = 1.0;
                    let br = self.algebra.bracket(&eu, &ev).expect("lengths match");
                    let val: f64 = br.iter().zip(&self.theta).map(|(b, t)| b * t).sum();
                    FockOperator::identity(self.trunc.clone()).scaled(C64::new(0.0, val))
                } else {
                    FockOperator::zero(self.trunc.clone(), crate::fock::LevelBand::single(0))
                };
                (&comm - &target).interior_norm(top)
            })
            .reduce(|| 0.0, f64::max)
    }

    /// `max_x ‖P_{K-1}(ρx + ρxᴴ)P_{K-1}‖` over basis vectors.
    pub fn anti_hermitian_defect(&self) -> f64 {
        let top = self.trunc.top_level().saturating_sub(1);
        self.rho.iter().map(|r| (r + &r.adjoint()).interior_norm(top)).fold(0.0, f64::max)
    }

    /// Residuals of `ρ(W_j)(N+1)^{-1/2} = i S_{e_j}` and its adjoint
    /// `S*_{e_j} = -i (N+1)^{-1/2} ρ(W̄_j)`, maximized over `j`.
    pub fn weyl_shift_identity(&self) -> WeylResidual {
        let inv_sqrt = FockOperator::diagonal(self.trunc.clone(), |a| {
            C64::new(1.0 / (a.iter().sum::<u32>() as f64 + 1.0).sqrt(), 0.0)
        });
        let i = C64::new(0.0, 1.0);
        let mut out = WeylResidual { forward: 0.0, adjoint: 0.0 };
        for j in 0..self.trunc.modes() {
            let s = FockOperator::shift_basis(self.trunc.clone(), j).expect("mode in range");
            let lhs = &self.rho_w(j) * &inv_sqrt;
            out.forward = out.forward.max((&lhs - &s.scaled(i)).spectral_norm());
            let rhs = (&inv_sqrt * &self.rho_wbar(j)).scaled(-i);
            out.adjoint = out.adjoint.max((&s.adjoint() - &rhs).spectral_norm());
        }
        out
    }
}

fn combine(
    trunc: &Arc<FockTruncation>,
    rx: &[FockOperator],
    ry: &[FockOperator],
    xs: &[f64],
    ys: &[f64],
) -> FockOperator {
    let mut out = FockOperator::zero(trunc.clone(), crate::fock::LevelBand { lo: -1, hi: 1 });
    for j in 0..rx.len() {
        if xs[j] != 0.0 {
            out = &out + &rx[j].scaled(C64::new(xs[j], 0.0));
        }
        if ys[j] != 0.0 {
            out = &out + &ry[j].scaled(C64::new(ys[j], 0.0));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeylResidual {
    pub forward: f64,
    pub adjoint: f64,
}

impl WeylResidual {
    pub fn max(&self) -> f64 {
        self.forward.max(self.adjoint)
    }
}

/// `(N+1)^{it/2} · op · (N+1)^{-it/2}`.
pub fn flow_conjugate(t: f64, op: &FockOperator) -> FockOperator {
    op.flow_conjugate(t)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneityReport {
    pub lambda: f64,
    /// Darboux residual of `X_j/λ, Y_j/λ` for `ω_{λ²θ}`.
    pub scaled_darboux_residual: f64,
    /// `J` is unchanged and still satisfies `J X_j = -Y_j` on the scaled basis.
    pub scaled_j_residual: f64,
    /// `max |ρ'(z_k) - iλ²θ_k|` for the representation built from the scaled basis.
    pub central_character_residual: f64,
    /// `max_u ‖ρ_{λ²θ}(u) - ρ_θ(δ_λ u)‖` over basis vectors of `g`.
    pub pullback_residual: f64,
}

impl HomogeneityReport {
    pub fn max_residual(&self) -> f64 {
        self.scaled_darboux_residual
            .max(self.scaled_j_residual)
            .max(self.central_character_residual)
            .max(self.pullback_residual)
    }
}

/// Checks `δ_λ^* π_θ = π_{λ²θ}` on generators.
///
/// The scaled basis for `ω_{λ²θ}` is `X_j/λ, Y_j/λ`, and the pulled-back
/// identity reads `ρ_{λ²θ}(u) = ρ_θ(δ_λ u)`; on `g2` this is
/// `ρ_{λ²θ}(z) = ρ_θ(λ² z)`.
pub fn homogeneity_check(a: &Step2Algebra, theta: &[f64], lambda: f64, k: usize) -> Result<HomogeneityReport> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Input(format!("lambda must be positive, got {lambda}")));
    }
    let base = build_rep(a, theta, k)?;
    let theta2: Vec<f64> = theta.iter().map(|t| lambda * lambda * t).collect();
    let omega2 = a.omega_matrix(&theta2)?;
    let scaled = base.darboux.scaled(1.0 / lambda);
    let scaled_darboux_residual = scaled.darboux_residual(&omega2);
    let scaled_j_residual = scaled.j_residual(&base.triple.j);
    let triple2 = CompatibleTriple {
        omega: omega2,
        j: base.triple.j.clone(),
        positive_form: &base.triple.positive_form * (lambda * lambda),
    };
    let rep2 = KirillovRep::from_darboux(a, &theta2, triple2, scaled, base.trunc.clone())?;

    let n1 = a.n1();
    let mut central = 0.0f64;
    let mut pullback = 0.0f64;
    for u in 0..a.dim() {
        if u >= n1 {
            let want = C64::new(0.0, lambda * lambda * theta[u - n1]);
            let op = &rep2.rho[u];
            for r in 0..op.dim() {
                central = central.max((op.entry(r, r) - want).norm());
            }
        }
        let factor = if u < n1 { lambda } else { lambda * lambda };
        let diff = &rep2.rho[u] - &base.rho[u].scaled(C64::new(factor, 0.0));
        pullback = pullback.max(diff.max_abs());
    }
    Ok(HomogeneityReport {
        lambda,
        scaled_darboux_residual,
        scaled_j_residual,
        central_character_residual: central,
        pullback_residual: pullback,
    })
}
