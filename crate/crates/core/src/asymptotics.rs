//! Tensor-power behaviour through the eigenvalue distribution.
//!
//! The spectrum of `ρ^{⊗n}` is the `n`-fold product of the spectrum of `ρ`,
//! so the information-spectrum entropies of `ρ^{⊗n}` only need the `n`-fold
//! convolution of the log-eigenvalue atoms, never the `d^n`-dimensional matrix.

use serde::Serialize;

use crate::cq::BipartiteState;
use crate::entropy::cond_vn;
use crate::error::{arg, Error, Result};
use crate::extension::bound_from_entropies;
use crate::operator::{spectral_decompose, DensityOperator};
use crate::scalar::Real;

/// Default cap on the number of atoms kept by [`convolve_power`].
pub const DEFAULT_ATOM_CAP: usize = 10_000_000;

/// Log-eigenvalues closer than this are one atom.
const MERGE_TOL: f64 = 1e-12;

/// Eigenvalue distribution as atoms `(log₂ eigenvalue, total mass)`, ascending in log-eigenvalue.
///
/// The mass of an atom is `multiplicity × eigenvalue`, so the masses of a
/// normalized state sum to one.
#[derive(Clone, Debug, PartialEq)]
pub struct LogSpectrum<T: Real> {
    atoms: Vec<(T, T)>,
}

/// Bin edge used when coarsening; see [`ConvolveOptions`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinEdge {
    /// Round log-eigenvalues up: `H̲` can only decrease.
    Upper,
    /// Round log-eigenvalues down: `H̄` can only increase.
    Lower,
}

#[derive(Clone, Copy, Debug)]
pub struct ConvolveOptions<T> {
    pub atom_cap: usize,
    /// When set, atoms are binned to this width whenever the cap is exceeded.
    pub binning: Option<(T, BinEdge)>,
}

impl<T> Default for ConvolveOptions<T> {
    fn default() -> Self {
        Self { atom_cap: DEFAULT_ATOM_CAP, binning: None }
    }
}

impl<T: Real> LogSpectrum<T> {
    /// Builds from `(log₂ eigenvalue, mass)` pairs; negative masses are rejected.
    pub fn from_atoms(atoms: Vec<(T, T)>) -> Result<Self> {
        if atoms.iter().any(|a| !(a.1 >= T::zero())) {
            return arg("atom masses must be nonnegative");
        }
        let total = atoms.iter().fold(T::zero(), |s, a| s + a.1);
        if total > T::one() + T::of(1e-10) {
            return arg(format!("atom masses sum to {} > 1", total.as_f64()));
        }
        Ok(Self { atoms: merge(atoms) })
    }

    /// Atoms for the positive eigenvalues of a list (zero eigenvalues carry no mass).
    pub fn from_eigenvalues(eigs: &[T]) -> Result<Self> {
        Self::from_atoms(eigs.iter().filter(|&&l| l > T::zero()).map(|&l| (l.log2(), l)).collect())
    }

    pub fn of_state(rho: &DensityOperator<T>) -> Result<Self> {
        let s = spectral_decompose(rho.op())?;
        let cut = s.cutoff();
        Self::from_atoms(s.eigenvalues.iter().filter(|&&l| l > cut).map(|&l| (l.log2(), l)).collect())
    }

    pub fn atoms(&self) -> &[(T, T)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> T {
        self.atoms.iter().fold(T::zero(), |s, a| s + a.1)
    }

    /// `H̄_ε`: accumulate mass from the largest eigenvalue down; `+∞` if `1 − ε` is never reached.
    pub fn h_sup(&self, eps: T) -> T {
        let need = T::one() - eps - T::of(T::MASS_SLACK);
        let mut cum = T::zero();
        for &(l, m) in self.atoms.iter().rev() {
            cum += m;
            if cum >= need {
                return -l;
            }
        }
        T::infinity()
    }

    /// `H̲_ε`: accumulate mass from the smallest positive eigenvalue up; `−∞` if never reached.
    pub fn h_inf(&self, eps: T) -> T {
        let need = T::one() - eps - T::of(T::MASS_SLACK);
        let mut cum = T::zero();
        for &(l, m) in &self.atoms {
            cum += m;
            if cum >= need {
                return -l;
            }
        }
        T::neg_infinity()
    }

    /// Mass on eigenvalues strictly above `2^{log_threshold}`.
    pub fn mass_above(&self, log_threshold: T) -> T {
        self.atoms.iter().filter(|a| a.0 > log_threshold).fold(T::zero(), |s, a| s + a.1)
    }

    /// Mass on eigenvalues strictly below `2^{log_threshold}`.
    pub fn mass_below(&self, log_threshold: T) -> T {
        self.atoms.iter().filter(|a| a.0 < log_threshold).fold(T::zero(), |s, a| s + a.1)
    }

    /// Spectrum of the tensor product of two states.
    pub fn product(&self, other: &Self) -> Self {
        let mut out = Vec::with_capacity(self.len() * other.len());
        for &(la, ma) in &self.atoms {
            for &(lb, mb) in &other.atoms {
                out.push((la + lb, ma * mb));
            }
        }
        Self { atoms: merge(out) }
    }

    fn coarsen(&self, width: T, edge: BinEdge) -> Self {
        let atoms = self
            .atoms
            .iter()
            .map(|&(l, m)| {
                let k = (l / width).floor();
                let rep = match edge {
                    BinEdge::Upper => (k + T::one()) * width,
                    BinEdge::Lower => k * width,
                };
                (rep, m)
            })
            .collect();
        Self { atoms: merge(atoms) }
    }
}

fn merge<T: Real>(mut atoms: Vec<(T, T)>) -> Vec<(T, T)> {
    atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut out: Vec<(T, T)> = Vec::with_capacity(atoms.len());
    for (l, m) in atoms {
        match out.last_mut() {
            Some(last) if (l - last.0).abs() <= T::of(MERGE_TOL) => last.1 += m,
            _ => out.push((l, m)),
        }
    }
    out
}

/// `n`-fold convolution of the atoms, the spectrum of `ρ^{⊗n}`.
pub fn convolve_power<T: Real>(spec: &LogSpectrum<T>, n: u32, opts: ConvolveOptions<T>) -> Result<LogSpectrum<T>> {
    if n == 0 {
        return arg("convolve_power needs n >= 1");
    }
    let mut acc = spec.clone();
    for _ in 1..n {
        acc = step(&acc, spec, &opts)?;
    }
    Ok(acc)
}

fn step<T: Real>(acc: &LogSpectrum<T>, base: &LogSpectrum<T>, opts: &ConvolveOptions<T>) -> Result<LogSpectrum<T>> {
    if acc.len().saturating_mul(base.len()) > opts.atom_cap.saturating_mul(64) && opts.binning.is_none() {
        return Err(atom_error(acc.len() * base.len(), opts.atom_cap));
    }
    let next = acc.product(base);
    if next.len() <= opts.atom_cap {
        return Ok(next);
    }
    match opts.binning {
        Some((w, edge)) if w > T::zero() => {
            let c = next.coarsen(w, edge);
            if c.len() > opts.atom_cap {
                Err(atom_error(c.len(), opts.atom_cap))
            } else {
                Ok(c)
            }
        }
        _ => Err(atom_error(next.len(), opts.atom_cap)),
    }
}

fn atom_error(count: usize, cap: usize) -> Error {
    Error::Resource(format!(
        "spectrum convolution produced {count} atoms, above the cap {cap}; pass a binning width to coarsen"
    ))
}

/// `H̄_ε(ρ^{⊗n})` from the convolved spectrum.
pub fn h_sup_power<T: Real>(rho: &DensityOperator<T>, n: u32, eps: T) -> Result<T> {
    Ok(convolve_power(&LogSpectrum::of_state(rho)?, n, ConvolveOptions::default())?.h_sup(eps))
}

/// `H̲_ε(ρ^{⊗n})` from the convolved spectrum.
pub fn h_inf_power<T: Real>(rho: &DensityOperator<T>, n: u32, eps: T) -> Result<T> {
    Ok(convolve_power(&LogSpectrum::of_state(rho)?, n, ConvolveOptions::default())?.h_inf(eps))
}

/// Large-deviation exponents for the upper and lower spectral tails.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SanovExponents<T> {
    /// Minimal `D(σ‖ρ)` over commuting `σ` with cross-entropy `≥ S(ρ) + γ`; `+∞` if none exists.
    pub d_bar: T,
    /// Same with cross-entropy `≤ S(ρ) − γ`.
    pub d_under: T,
    pub gamma: T,
}

/// Tilted distribution `p ∝ r^{1+β}` and its `(cross-entropy, D(p‖r))`, both in bits.
pub fn tilted<T: Real>(r: &[T], beta: T) -> (Vec<T>, T, T) {
    let logs: Vec<T> = r.iter().map(|x| x.log2()).collect();
    let w: Vec<T> = logs.iter().map(|&l| (T::one() + beta) * l).collect();
    let top = w.iter().copied().fold(T::neg_infinity(), |a, b| a.max(b));
    let un: Vec<T> = w.iter().map(|&x| (x - top).exp2()).collect();
    let z = un.iter().fold(T::zero(), |a, &b| a + b);
    let p: Vec<T> = un.iter().map(|&u| u / z).collect();
    let log_z = z.log2() + top;
    let mut cross = T::zero();
    let mut kl = T::zero();
    for (i, &pi) in p.iter().enumerate() {
        if pi > T::zero() {
            cross -= pi * logs[i];
            // log₂ p_i − log₂ r_i = β log₂ r_i − log₂ Z
            kl += pi * (beta * logs[i] - log_z);
        }
    }
    (p, cross, kl.max(T::zero()))
}

/// Solves `inf D(p‖r)` subject to cross-entropy `≥ target` (`upper`) or `≤ target`.
fn constrained_kl<T: Real>(r: &[T], target: T, upper: bool) -> T {
    let logs: Vec<T> = r.iter().map(|&x| -x.log2()).collect();
    let l_max = logs.iter().copied().fold(T::neg_infinity(), |a, b| a.max(b));
    let l_min = logs.iter().copied().fold(T::infinity(), |a, b| a.min(b));
    let edge_tol = T::of(1e-12);
    let entropy = r.iter().zip(&logs).fold(T::zero(), |a, (&p, &l)| a + p * l);
    let extreme = if upper { l_max } else { l_min };
    if upper && target <= entropy || !upper && target >= entropy {
        return T::zero();
    }
    if upper && target > l_max + edge_tol || !upper && target < l_min - edge_tol {
        return T::infinity();
    }
    if (target - extreme).abs() <= edge_tol {
        // point mass on the extreme atoms, weighted by r
        let w = r
            .iter()
            .zip(&logs)
            .filter(|(_, &l)| (l - extreme).abs() <= edge_tol)
            .fold(T::zero(), |a, (&p, _)| a + p);
        return -w.log2();
    }
    let cross = |b: T| tilted(r, b).1;
    // cross-entropy is nonincreasing in β
    let (mut lo, mut hi) = if upper { (-T::one(), T::zero()) } else { (T::zero(), T::one()) };
    if upper {
        while cross(lo) < target {
            lo *= T::of(2.0);
            if lo < T::of(-1e6) {
                break;
            }
        }
    } else {
        while cross(hi) > target {
            hi *= T::of(2.0);
            if hi > T::of(1e6) {
                break;
            }
        }
    }
    for _ in 0..200 {
        let mid = (lo + hi) * T::of(0.5);
        let c = cross(mid);
        if (c >= target) == upper {
            if upper {
                lo = mid;
            } else {
                hi = mid;
            }
        } else if upper {
            hi = mid;
        } else {
            lo = mid;
        }
        if (hi - lo).abs() <= T::default_epsilon() * (T::one() + lo.abs().max(hi.abs())) {
            break;
        }
    }
    let beta = if upper { lo } else { hi };
    tilted(r, beta).2
}

/// Exponents for `σ` diagonal in one fixed eigenbasis of `ρ`.
pub fn sanov_exponents<T: Real>(rho: &DensityOperator<T>, gamma: T) -> Result<SanovExponents<T>> {
    if !(gamma > T::zero()) {
        return arg("gamma must be positive");
    }
    let s = spectral_decompose(rho.op())?;
    let cut = s.cutoff();
    let r: Vec<T> = s.eigenvalues.iter().copied().filter(|&l| l > cut).collect();
    Ok(sanov_exponents_of(&r, gamma))
}

/// [`sanov_exponents`] on an explicit positive probability vector.
pub fn sanov_exponents_of<T: Real>(r: &[T], gamma: T) -> SanovExponents<T> {
    let entropy = r.iter().fold(T::zero(), |a, &p| a - p.xlog2x());
    SanovExponents {
        d_bar: constrained_kl(r, entropy + gamma, true),
        d_under: constrained_kl(r, entropy - gamma, false),
        gamma,
    }
}

/// `(1+n)^d 2^{−nD}`, zero when `D = +∞`.
pub fn sanov_epsilon<T: Real>(exponent: T, n: u32, dim: usize) -> T {
    if exponent == T::infinity() {
        return T::zero();
    }
    let nn = T::of(n as f64);
    (T::of(dim as f64) * (T::one() + nn).log2() - nn * exponent).exp2()
}

/// `(ε̄, ε̲)` for `ρ^{⊗n}` at deviation `γ`. Values above one make the corresponding bound vacuous.
pub fn prop3_epsilons<T: Real>(rho: &DensityOperator<T>, gamma: T, n: u32, dim: usize) -> Result<(T, T)> {
    let e = sanov_exponents(rho, gamma)?;
    Ok((sanov_epsilon(e.d_bar, n, dim), sanov_epsilon(e.d_under, n, dim)))
}

/// Exact tail masses of `ρ^{⊗n}` that the deviation bounds control:
/// `(mass below 2^{−n(S+γ)}, mass above 2^{−n(S−γ)})`.
pub fn power_tails<T: Real>(rho: &DensityOperator<T>, gamma: T, n: u32) -> Result<(T, T)> {
    let base = LogSpectrum::of_state(rho)?;
    let entropy = base.atoms().iter().fold(T::zero(), |a, &(l, m)| a - m * l);
    let p = convolve_power(&base, n, ConvolveOptions::default())?;
    let nn = T::of(n as f64);
    Ok((p.mass_below(-nn * (entropy + gamma)), p.mass_above(-nn * (entropy - gamma))))
}

/// Smoothing schedule `n ↦ (ε̲_n, ε̂_n)` for the per-copy scan.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Schedule<T> {
    /// `ε̲_n = min(cap, (1+n)^{d_A d_B} 2^{−n^{k_ε}})`, `ε̂_n = min(cap, (1+n)^{d_B} 2^{−n^{k_ε}})`.
    ///
    /// Requires `k_γ, k_ε > 0` and `2k_γ + k_ε < 1`.
    ProofShape { k_gamma: T, k_eps: T, cap: T },
    Fixed { eps_under: T, eps_hat: T },
}

impl<T: Real> Default for Schedule<T> {
    fn default() -> Self {
        Schedule::ProofShape { k_gamma: T::of(0.25), k_eps: T::of(0.25), cap: T::of(0.05) }
    }
}

impl<T: Real> Schedule<T> {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Schedule::ProofShape { k_gamma, k_eps, cap } => {
                if !(k_gamma > T::zero() && k_eps > T::zero()) || k_gamma * T::of(2.0) + k_eps >= T::one() {
                    return arg("schedule exponents need k_gamma, k_eps > 0 and 2 k_gamma + k_eps < 1");
                }
                if !(cap > T::zero() && cap < T::one()) {
                    return arg("schedule cap must lie in (0, 1)");
                }
            }
            Schedule::Fixed { eps_under, eps_hat } => {
                if !(eps_under > T::zero() && eps_under < T::one() && eps_hat > T::zero()) {
                    return arg("fixed schedule needs 0 < eps_under < 1 and eps_hat > 0");
                }
            }
        }
        Ok(())
    }

    pub fn at(&self, n: u32, dims: (usize, usize)) -> (T, T) {
        match *self {
            Schedule::ProofShape { k_eps, cap, .. } => {
                let nn = T::of(n as f64);
                let decay = nn.powf(k_eps);
                let log1n = (T::one() + nn).log2();
                let under = (T::of((dims.0 * dims.1) as f64) * log1n - decay).exp2();
                let hat = (T::of(dims.1 as f64) * log1n - decay).exp2();
                (under.min(cap), hat.min(cap))
            }
            Schedule::Fixed { eps_under, eps_hat } => (eps_under, eps_hat),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanRow<T> {
    pub n: u32,
    pub eps_under: T,
    pub eps_hat: T,
    /// `ε̲^{1/2} + ε̲ + ε̂`.
    pub eps_n: T,
    pub bound_per_n: T,
    pub cond_vn: T,
    pub gap: T,
}

/// Per-copy extension lower bound for `ρ^{⊗n}`, `n = 1..=n_max`, against `S(A|B)`.
pub fn corollary4_scan<T: Real>(rho: &BipartiteState<T>, n_max: u32, schedule: Schedule<T>) -> Result<Vec<ScanRow<T>>> {
    if n_max == 0 {
        return arg("n_max must be at least 1");
    }
    schedule.validate()?;
    let s_ab = LogSpectrum::of_state(rho.state())?;
    let s_b = LogSpectrum::of_state(&rho.marginal_b()?)?;
    let target = cond_vn(rho)?;
    let opts = ConvolveOptions::default();
    let mut pow_ab = s_ab.clone();
    let mut pow_b = s_b.clone();
    let mut rows = Vec::with_capacity(n_max as usize);
    for n in 1..=n_max {
        if n > 1 {
            pow_ab = step(&pow_ab, &s_ab, &opts)?;
            pow_b = step(&pow_b, &s_b, &opts)?;
        }
        let (eu, eh) = schedule.at(n, rho.dims());
        let (bound, eps_n) = bound_from_entropies(pow_ab.h_inf(eu), pow_b.h_sup(eh), eu, eh);
        let per = bound / T::of(n as f64);
        rows.push(ScanRow { n, eps_under: eu, eps_hat: eh, eps_n, bound_per_n: per, cond_vn: target, gap: target - per });
    }
    Ok(rows)
}
