//! Explicit side-information extension and the resulting lower bound on the
//! optimized collision entropy.
//!
//! The extension appends a qubit flag `C` to the conditioning system:
//! `ρ_ABC = ρ̄_AB ⊗ |1⟩⟨1| + (ρ_AB − ρ̄_AB) ⊗ |0⟩⟨0|`, where
//! `ρ̄_AB = ρ_AB {ρ_AB ≤ μ}` keeps the spectral part at or below
//! `μ = 2^{−H̲_ε̲(AB)}`. The combined conditioning index is `b·2 + c`.

use nalgebra::{Complex, DMatrix};
use num_traits::Zero;
use serde::Serialize;

use crate::cq::BipartiteState;
use crate::entropy::{collision_entropy_r, h_inf, h_sup};
use crate::error::{arg, Result};
use crate::operator::{check_dim, spectral_decompose, HermitianOperator};
use crate::scalar::Real;

/// Slack on the inequality `R_ε(A|BC) ≥ bound`.
pub const THEOREM2_TOL: f64 = 1e-6;

fn check_eps_under<T: Real>(eu: T) -> Result<()> {
    if !(eu > T::zero() && eu < T::one()) {
        return arg(format!("eps_under must lie in (0, 1), got {}", eu.as_f64()));
    }
    Ok(())
}

fn check_eps_hat<T: Real>(eh: T) -> Result<()> {
    if !(eh > T::zero() && eh < T::one()) {
        return arg(format!("eps_hat must lie in (0, 1), got {}", eh.as_f64()));
    }
    Ok(())
}

/// `ρ̄_AB = Σ_{λ_i ≤ μ} λ_i E_i` with `μ = 2^{−H̲_ε̲(ρ_AB)}`; returns `(ρ̄_AB, μ)`.
pub fn clipped_state<T: Real>(rho: &BipartiteState<T>, eps_under: T) -> Result<(HermitianOperator<T>, T)> {
    check_eps_under(eps_under)?;
    let mu = (-h_inf(rho.state(), eps_under)?).exp2();
    let spec = spectral_decompose(rho.op())?;
    let limit = mu + spec.cutoff();
    let clipped = spec.compose(|l| if l <= limit { l } else { T::zero() });
    Ok((clipped, mu))
}

/// The extension together with the constants of the bound.
#[derive(Clone, Debug)]
pub struct ExtensionWitness<T: Real> {
    /// State on `A ⊗ (B ⊗ C)` with dims `(d_A, 2·d_B)`.
    pub rho_abc: BipartiteState<T>,
    pub mu: T,
    /// `2^{−H̄_ε̂(B)}`.
    pub lam: T,
    /// `1 − ε̲^{1/2}`.
    pub c_check: T,
    /// `ε̲^{1/2} + ε̲ + ε̂`.
    pub eps_total: T,
    /// `Tr[ρ̄_AB]`, the mass of the flag-1 block.
    pub flag_mass: T,
}

/// Places `block` on flag value `flag` of the enlarged conditioning system.
fn embed_flag<T: Real>(out: &mut DMatrix<Complex<T>>, block: &HermitianOperator<T>, d_b: usize, flag: usize) {
    let m = block.matrix();
    let d = block.dim();
    for i in 0..d {
        let (ai, bi) = (i / d_b, i % d_b);
        let row = (ai * d_b + bi) * 2 + flag;
        for j in 0..d {
            let (aj, bj) = (j / d_b, j % d_b);
            out[(row, (aj * d_b + bj) * 2 + flag)] = m[(i, j)];
        }
    }
}

pub fn build_extension<T: Real>(rho: &BipartiteState<T>, eps_under: T, eps_hat: T) -> Result<ExtensionWitness<T>> {
    check_eps_hat(eps_hat)?;
    let (clipped, mu) = clipped_state(rho, eps_under)?;
    let (d_a, d_b) = rho.dims();
    check_dim(d_a * d_b * 2, "extension")?;
    let rest = rho.op().sub(&clipped)?;
    let mut m = DMatrix::from_element(d_a * d_b * 2, d_a * d_b * 2, Complex::zero());
    embed_flag(&mut m, &clipped, d_b, 1);
    embed_flag(&mut m, &rest, d_b, 0);
    let rho_abc = BipartiteState::trusted(HermitianOperator::hermitize(m), (d_a, 2 * d_b));
    let lam = (-h_sup(&rho.marginal_b()?, eps_hat)?).exp2();
    let root = eps_under.sqrt();
    Ok(ExtensionWitness {
        rho_abc,
        mu,
        lam,
        c_check: T::one() - root,
        eps_total: root + eps_under + eps_hat,
        flag_mass: clipped.trace(),
    })
}

/// `(H̲ − H̄ + log₂(1 − ε̲^{1/2}), ε̲^{1/2} + ε̲ + ε̂)` from precomputed entropies.
pub fn bound_from_entropies<T: Real>(h_inf_ab: T, h_sup_b: T, eps_under: T, eps_hat: T) -> (T, T) {
    let root = eps_under.sqrt();
    (h_inf_ab - h_sup_b + (T::one() - root).log2(), root + eps_under + eps_hat)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LowerBound<T> {
    pub bound: T,
    pub eps: T,
    /// `ε ≥ 1`: the entropy at that smoothing level is undefined, so the bound says nothing.
    pub vacuous: bool,
}

pub fn theorem2_lower_bound<T: Real>(rho: &BipartiteState<T>, eps_under: T, eps_hat: T) -> Result<LowerBound<T>> {
    check_eps_under(eps_under)?;
    check_eps_hat(eps_hat)?;
    let hi = h_inf(rho.state(), eps_under)?;
    let hs = h_sup(&rho.marginal_b()?, eps_hat)?;
    let (bound, eps) = bound_from_entropies(hi, hs, eps_under, eps_hat);
    Ok(LowerBound { bound, eps, vacuous: eps >= T::one() })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Theorem2Report<T> {
    pub eps_under: T,
    pub eps_hat: T,
    pub d_a: usize,
    pub d_b: usize,
    pub mu: T,
    pub lam: T,
    pub c_check: T,
    pub bound: T,
    pub eps: T,
    pub vacuous: bool,
    /// `R_ε(A|BC)` on the explicit extension; absent when vacuous.
    pub r_eps_abc: Option<T>,
    /// `R_ε(A|B)` on the original state; absent when vacuous.
    pub r_eps_ab: Option<T>,
    /// `R_ε(A|BC) − bound`.
    pub margin: Option<T>,
    /// `margin ≥ −tol`; absent when vacuous.
    pub holds: Option<bool>,
}

pub fn verify_theorem2<T: Real>(rho: &BipartiteState<T>, eps_under: T, eps_hat: T, tol: T) -> Result<Theorem2Report<T>> {
    let lb = theorem2_lower_bound(rho, eps_under, eps_hat)?;
    let w = build_extension(rho, eps_under, eps_hat)?;
    let (d_a, d_b) = rho.dims();
    let mut report = Theorem2Report {
        eps_under,
        eps_hat,
        d_a,
        d_b,
        mu: w.mu,
        lam: w.lam,
        c_check: w.c_check,
        bound: lb.bound,
        eps: lb.eps,
        vacuous: lb.vacuous,
        r_eps_abc: None,
        r_eps_ab: None,
        margin: None,
        holds: None,
    };
    if lb.vacuous {
        return Ok(report);
    }
    let search_tol = T::of(crate::entropy::DEFAULT_TOL).min(tol);
    let r_abc = collision_entropy_r(&w.rho_abc, lb.eps, search_tol)?.value;
    let r_ab = collision_entropy_r(rho, lb.eps, search_tol)?.value;
    let margin = r_abc - lb.bound;
    report.r_eps_abc = Some(r_abc);
    report.r_eps_ab = Some(r_ab);
    report.margin = Some(margin);
    report.holds = Some(margin >= -tol);
    Ok(report)
}
