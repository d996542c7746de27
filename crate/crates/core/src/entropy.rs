//! Conditional collision entropies defined through spectral thresholds.
//!
//! `R_ε(A|B)` is the largest `λ` for which the projection
//! `P(λ) = {ρ̃_B − 2^{−λ} ρ_B² ≤ 0}`, with `ρ̃_B = Tr_A[ρ_AB²]`, still carries at
//! least `1 − ε` of the mass of `ρ_B`. The mass `λ ↦ Tr[P(λ) ρ_B]` is not known
//! to be monotone, so the search never assumes it: it evaluates the mass on the
//! pencil breakpoints (where an eigenvalue of `ρ̃_B − tρ_B²` crosses zero) and on
//! interior sample points, then bisects the bracket above the largest feasible
//! candidate. The returned [`Certificate`] records what was checked.

use serde::Serialize;

use crate::asymptotics::LogSpectrum;
use crate::cq::BipartiteState;
use crate::error::{arg, Result};
use crate::operator::{partial_trace, spectral_decompose, von_neumann, DensityOperator, HermitianOperator, Spectrum, Subsystem};
use crate::scalar::Real;

/// Default bisection tolerance in bits.
pub const DEFAULT_TOL: f64 = 1e-6;

/// How the search for the supremum terminated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Envelope {
    /// `λ*` is feasible and `λ* + tol` was checked infeasible.
    Bracketed,
    /// `λ*` is the largest examined candidate; no infeasible point within `tol` above it was confirmed.
    LargestCandidate,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certificate<T> {
    pub lambda_star: T,
    /// Mass re-evaluated at `lambda_star`.
    pub achieved_mass: T,
    pub tol: T,
    pub breakpoints_examined: usize,
    pub evaluations: usize,
    pub envelope: Envelope,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntropyResult<T> {
    /// Entropy in bits.
    pub value: T,
    pub epsilon: T,
    pub certificate: Certificate<T>,
}

/// Tuning for [`collision_entropy_r_with`].
#[derive(Clone, Copy, Debug)]
pub struct SearchOptions<T> {
    pub tol: T,
    /// Evenly spaced sample points inside each interval between consecutive breakpoints.
    pub interior_samples: usize,
}

impl<T: Real> Default for SearchOptions<T> {
    fn default() -> Self {
        Self { tol: T::of(DEFAULT_TOL), interior_samples: 7 }
    }
}

/// `ρ̃_B = Tr_A[ρ_AB²]`.
pub fn rho_tilde<T: Real>(rho: &BipartiteState<T>) -> Result<HermitianOperator<T>> {
    partial_trace(&rho.op().square(), rho.dims(), Subsystem::B)
}

/// Precomputed operators for repeated evaluations of `Tr[P(λ) ρ_B]`.
#[derive(Clone, Debug)]
pub struct Pencil<T: Real> {
    rho_b: HermitianOperator<T>,
    rho_b_spec: Spectrum<T>,
    tilde: HermitianOperator<T>,
    rho_b_sq: HermitianOperator<T>,
}

impl<T: Real> Pencil<T> {
    pub fn new(rho: &BipartiteState<T>) -> Result<Self> {
        let rho_b = partial_trace(rho.op(), rho.dims(), Subsystem::B)?;
        let rho_b_spec = spectral_decompose(&rho_b)?;
        if rho_b_spec.rank() == 0 {
            return arg("marginal on the conditioning system is zero");
        }
        let tilde = rho_tilde(rho)?;
        let rho_b_sq = rho_b.square();
        Ok(Self { rho_b, rho_b_spec, tilde, rho_b_sq })
    }

    /// `Tr[{ρ̃_B − 2^{−λ} ρ_B² ≤ 0} ρ_B]`.
    pub fn mass(&self, lambda: T) -> Result<T> {
        if lambda == T::neg_infinity() {
            return Ok(self.rho_b.trace());
        }
        let t = (-lambda).exp2();
        let h = self.tilde.sub(&self.rho_b_sq.scale(t))?;
        let s = spectral_decompose(&h)?;
        let cut = s.cutoff();
        let mut mass = T::zero();
        for (i, &l) in s.eigenvalues.iter().enumerate() {
            if l <= cut {
                mass += self.rho_b.expectation(s.vector(i));
            }
        }
        Ok(mass.max(T::zero()))
    }

    /// `λ_i = −log₂ t_i` for the generalized eigenvalues `t_i` of `(ρ̃_B, ρ_B²)` on
    /// `supp ρ_B`, ascending and deduplicated.
    pub fn breakpoints(&self) -> Result<Vec<T>> {
        let s = &self.rho_b_spec;
        let cut = s.cutoff();
        let support: Vec<usize> = (0..s.dim()).filter(|&i| s.eigenvalues[i] > cut).collect();
        let r = support.len();
        let d = s.dim();
        // columns v_i / λ_i of the support: Y = W† ρ̃ W = ρ_B⁺ ρ̃ ρ_B⁺ restricted to the support
        let w = nalgebra::DMatrix::from_fn(d, r, |row, k| {
            let i = support[k];
            s.eigenvectors[(row, i)] / nalgebra::Complex::new(s.eigenvalues[i], T::zero())
        });
        let y = self.tilde.congruence(&w)?;
        let ys = spectral_decompose(&y)?;
        let mut out: Vec<T> = ys
            .eigenvalues
            .iter()
            .filter(|&&t| t > T::zero())
            .map(|&t| -t.log2())
            .collect();
        out.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        out.dedup_by(|a, b| (*a - *b).abs() <= T::of(1e-12));
        Ok(out)
    }

    pub fn rho_b(&self) -> &HermitianOperator<T> {
        &self.rho_b
    }

    pub fn rank_b(&self) -> usize {
        self.rho_b_spec.rank()
    }
}

/// `Tr[{ρ̃_B − 2^{−λ} ρ_B² ≤ 0} ρ_B]` for a single `λ`.
pub fn feasible_mass<T: Real>(lambda: T, rho: &BipartiteState<T>) -> Result<T> {
    Pencil::new(rho)?.mass(lambda)
}

fn check_eps<T: Real>(eps: T) -> Result<()> {
    if !(eps >= T::zero() && eps < T::one()) {
        return arg(format!("epsilon must lie in [0, 1), got {}", eps.as_f64()));
    }
    Ok(())
}

/// `R_ε(A|B)` with the default search options and bisection tolerance `tol`.
pub fn collision_entropy_r<T: Real>(rho: &BipartiteState<T>, eps: T, tol: T) -> Result<EntropyResult<T>> {
    collision_entropy_r_with(rho, eps, SearchOptions { tol, ..SearchOptions::default() })
}

pub fn collision_entropy_r_with<T: Real>(
    rho: &BipartiteState<T>,
    eps: T,
    opts: SearchOptions<T>,
) -> Result<EntropyResult<T>> {
    check_eps(eps)?;
    if !(opts.tol > T::zero()) {
        return arg("tolerance must be positive");
    }
    let pencil = Pencil::new(rho)?;
    search(&pencil, eps, opts)
}

/// Runs the supremum search on a prepared pencil.
pub fn search<T: Real>(pencil: &Pencil<T>, eps: T, opts: SearchOptions<T>) -> Result<EntropyResult<T>> {
    check_eps(eps)?;
    let tol = opts.tol;
    let need = T::one() - eps - T::of(T::MASS_SLACK);
    let breaks = pencil.breakpoints()?;
    let mut evaluations = 0usize;
    let mut eval = |l: T| -> Result<T> {
        evaluations += 1;
        pencil.mass(l)
    };

    let mut cands = Vec::with_capacity(breaks.len() * (opts.interior_samples + 1) + 1);
    for (i, &b) in breaks.iter().enumerate() {
        cands.push(b);
        if let Some(&next) = breaks.get(i + 1) {
            let k = opts.interior_samples;
            for j in 1..=k {
                cands.push(b + (next - b) * T::of(j as f64 / (k + 1) as f64));
            }
        }
    }
    let last = *breaks.last().expect("nonzero marginal has at least one breakpoint");
    let span = (last - breaks[0]).max(T::one());
    cands.push(last + span);

    let mut masses = Vec::with_capacity(cands.len());
    for &l in &cands {
        masses.push(eval(l)?);
    }
    let best = (0..cands.len()).rev().find(|&i| masses[i] >= need);

    let (mut lo, mut lo_mass, hi) = match best {
        Some(i) if i + 1 < cands.len() => (cands[i], masses[i], Some(cands[i + 1])),
        Some(i) => (cands[i], masses[i], None),
        // the mass is 1 below every breakpoint
        None => {
            let l = breaks[0] - span;
            let m = eval(l)?;
            let mut hi = breaks[0];
            let mut lo = l;
            let mut lo_mass = m;
            while hi - lo > tol {
                let mid = lo + (hi - lo) * T::of(0.5);
                let mm = eval(mid)?;
                if mm >= need {
                    lo = mid;
                    lo_mass = mm;
                } else {
                    hi = mid;
                }
            }
            (lo, lo_mass, Some(hi))
        }
    };

    let envelope = if let Some(mut hi) = hi {
        while hi - lo > tol {
            let mid = lo + (hi - lo) * T::of(0.5);
            let m = eval(mid)?;
            if m >= need {
                lo = mid;
                lo_mass = m;
            } else {
                hi = mid;
            }
        }
        if eval(lo + tol)? < need {
            Envelope::Bracketed
        } else {
            Envelope::LargestCandidate
        }
    } else {
        Envelope::LargestCandidate
    };

    Ok(EntropyResult {
        value: lo,
        epsilon: eps,
        certificate: Certificate {
            lambda_star: lo,
            achieved_mass: lo_mass,
            tol,
            breakpoints_examined: breaks.len(),
            evaluations,
            envelope,
        },
    })
}

/// Classical `R_ε(X|Y)` from a joint pmf indexed `joint[x][y]`.
///
/// Returns the largest per-branch value `r = R(X|Y=y)` with `Pr[R(X|Y) ≥ r] ≥ 1 − ε`.
/// Branch values that agree within `1e−12` are merged first.
pub fn classical_collision_r<T: Real>(joint: &[Vec<T>], eps: T) -> Result<EntropyResult<T>> {
    check_eps(eps)?;
    let ny = joint.first().map(|r| r.len()).unwrap_or(0);
    if ny == 0 || joint.iter().any(|r| r.len() != ny) {
        return arg("joint pmf must be a nonempty rectangular table");
    }
    if joint.iter().flatten().any(|&p| !(p >= T::zero())) {
        return arg("joint pmf entries must be nonnegative");
    }
    let total = joint.iter().flatten().fold(T::zero(), |a, &p| a + p);
    if (total - T::one()).abs() > T::of(T::STATE_TOL) {
        return arg(format!("joint pmf sums to {}, expected 1", total.as_f64()));
    }
    let mut branches: Vec<(T, T)> = Vec::with_capacity(ny);
    for y in 0..ny {
        let py = joint.iter().fold(T::zero(), |a, r| a + r[y]);
        if py <= T::zero() {
            continue;
        }
        let coll = joint.iter().fold(T::zero(), |a, r| {
            let q = r[y] / py;
            a + q * q
        });
        branches.push((-coll.log2(), py));
    }
    branches.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut merged: Vec<(T, T)> = Vec::with_capacity(branches.len());
    for (r, w) in branches {
        match merged.last_mut() {
            Some(last) if (last.0 - r).abs() <= T::of(1e-12) => last.1 += w,
            _ => merged.push((r, w)),
        }
    }
    let need = T::one() - eps - T::of(T::MASS_SLACK);
    let mut cum = T::zero();
    let mut pick = merged.len() - 1;
    for (i, &(_, w)) in merged.iter().enumerate() {
        cum += w;
        if cum >= need {
            pick = i;
            break;
        }
    }
    let value = merged[pick].0;
    Ok(EntropyResult {
        value,
        epsilon: eps,
        certificate: Certificate {
            lambda_star: value,
            achieved_mass: cum,
            tol: T::zero(),
            breakpoints_examined: merged.len(),
            evaluations: merged.len(),
            envelope: Envelope::Bracketed,
        },
    })
}

/// Information-spectrum sup-entropy `H̄_ε(ρ)`.
pub fn h_sup<T: Real>(rho: &DensityOperator<T>, eps: T) -> Result<T> {
    check_eps(eps)?;
    Ok(LogSpectrum::of_state(rho)?.h_sup(eps))
}

/// Information-spectrum inf-entropy `H̲_ε(ρ)`.
pub fn h_inf<T: Real>(rho: &DensityOperator<T>, eps: T) -> Result<T> {
    check_eps(eps)?;
    Ok(LogSpectrum::of_state(rho)?.h_inf(eps))
}

/// `S(A|B) = S(ρ_AB) − S(ρ_B)`.
pub fn cond_vn<T: Real>(rho: &BipartiteState<T>) -> Result<T> {
    let rb = rho.marginal_b()?;
    Ok(von_neumann(rho.op())? - von_neumann(rb.op())?)
}
