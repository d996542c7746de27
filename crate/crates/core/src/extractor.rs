//! Randomness extraction `S = G(X)` against quantum side information.
//!
//! For each family member `g` the hashed state is block diagonal in the
//! output `s`, with subnormalized blocks `ρ_sg = Σ_{x ∈ g⁻¹(s)} p_x ρ_x`. The
//! distance from uniform is evaluated in closed form on those blocks:
//!
//! ```text
//! Δ_R = (1/|G|) Σ_{g,s} Tr[ρ_sg log₂ ρ_sg] − Tr[ρ_B log₂ ρ_B] + log₂|S|
//! Δ_d = (1/|G|) Σ_{g,s} ½ ‖ρ_sg − ρ_B/|S|‖₁
//! ```
//!
//! Worked example: `X` uniform on two bits, no side information,
//! `linear_gf2(2, 1)`. Three of the four matrices give a uniform output bit
//! and the zero matrix gives a constant one, so `Δ_R = ¼ · 1 = 0.25` and
//! `Δ_d = ¼ · ½ = 0.125`, while the bound at `ε = 0`, `R = 2` is
//! `δ/ln 2 = 0.5/ln 2 ≈ 0.7213`.

use nalgebra::{Complex, DMatrix};
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::cq::CqState;
use crate::entropy::{collision_entropy_r, DEFAULT_TOL};
use crate::error::{arg, Error, Result};
use crate::hashing::{FamilyDescriptor, FamilyKind, HashFamily};
use crate::operator::{check_dim, spectral_decompose, trace_distance, von_neumann, DensityOperator, HermitianOperator};
use crate::scalar::Real;

/// Slack on `Δ_R ≤ rhs` for exact runs.
pub const THEOREM1_TOL: f64 = 1e-9;

/// Which members the family average runs over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum Mode {
    /// Every member of the family.
    Exact,
    /// `samples` members drawn with [`HashFamily::sample_many`].
    Sampled { samples: usize, seed: u64 },
}

#[derive(Clone, Debug)]
pub struct HashedOutput<T: Real> {
    /// `p_{s|g}`.
    pub prob: T,
    /// `ρ_sg = p_{s|g} ρ_{s|g}`; the zero operator for an empty preimage.
    pub block: HermitianOperator<T>,
}

impl<T: Real> HashedOutput<T> {
    /// `ρ_{s|g}`, absent when `p_{s|g} = 0`.
    pub fn conditional(&self) -> Option<DensityOperator<T>> {
        if self.prob > T::zero() {
            Some(DensityOperator::trusted(self.block.scale(T::one() / self.prob)))
        } else {
            None
        }
    }
}

#[derive(Clone, Debug)]
pub struct MemberOutputs<T: Real> {
    pub member: u64,
    /// Indexed by the output value `s`.
    pub outputs: Vec<HashedOutput<T>>,
}

/// The hashed state `ρ_SGB` as per-member output blocks.
#[derive(Clone, Debug)]
pub struct HashedEnsemble<T: Real> {
    pub family: FamilyDescriptor,
    pub mode: Mode,
    pub range: usize,
    pub members: Vec<MemberOutputs<T>>,
}

fn check_domain<T: Real>(cq: &CqState<T>, fam: &HashFamily) -> Result<()> {
    if fam.domain_size() != cq.alphabet_size() as u64 {
        return arg(format!(
            "family domain {} does not match alphabet size {}",
            fam.domain_size(),
            cq.alphabet_size()
        ));
    }
    if fam.range_size() > 1 << 16 {
        return Err(Error::Resource(format!("output alphabet of {} symbols is too large", fam.range_size())));
    }
    Ok(())
}

fn member_list(fam: &HashFamily, mode: Mode) -> Result<Vec<u64>> {
    match mode {
        Mode::Exact => fam.enumerable().map(|n| (0..n).collect()).ok_or_else(|| {
            Error::Resource(format!(
                "family has {} members, too many for exact mode; use sampled mode (estimates only)",
                fam.family_size().as_f64()
            ))
        }),
        Mode::Sampled { samples, seed } => {
            if samples == 0 {
                return arg("sampled mode needs at least one sample");
            }
            Ok(fam.sample_many(seed, samples))
        }
    }
}

/// Output blocks of one member.
pub fn hash_member<T: Real>(cq: &CqState<T>, fam: &HashFamily, member: u64) -> Result<MemberOutputs<T>> {
    check_domain(cq, fam)?;
    let range = fam.range_size() as usize;
    let d = cq.d_b();
    let table = fam.table(member)?;
    let mut probs = vec![T::zero(); range];
    let mut blocks = vec![DMatrix::<Complex<T>>::from_element(d, d, Complex::zero()); range];
    for (x, &s) in table.iter().enumerate() {
        let p = cq.probs()[x];
        probs[s as usize] += p;
        blocks[s as usize] += cq.conditionals()[x].op().matrix().map(|z| z * p);
    }
    let outputs = probs
        .into_iter()
        .zip(blocks)
        .map(|(prob, m)| HashedOutput { prob, block: HermitianOperator::hermitize(m) })
        .collect();
    Ok(MemberOutputs { member, outputs })
}

pub fn apply_hash<T: Real>(cq: &CqState<T>, fam: &HashFamily, mode: Mode) -> Result<HashedEnsemble<T>> {
    check_domain(cq, fam)?;
    let members = member_list(fam, mode)?;
    let members = members
        .par_iter()
        .map(|&g| hash_member(cq, fam, g))
        .collect::<Result<Vec<_>>>()?;
    Ok(HashedEnsemble { family: fam.descriptor(), mode, range: fam.range_size() as usize, members })
}

impl<T: Real> HashedEnsemble<T> {
    pub fn is_exact(&self) -> bool {
        self.mode == Mode::Exact
    }

    fn weight(&self) -> T {
        T::one() / T::of(self.members.len() as f64)
    }

    /// `Tr ρ_SGB`.
    pub fn total_trace(&self) -> T {
        let w = self.weight();
        self.members
            .iter()
            .flat_map(|m| m.outputs.iter())
            .fold(T::zero(), |acc, o| acc + o.block.trace() * w)
    }

    /// Dense `ρ_SGB` with blocks ordered by member then output; for small checks only.
    pub fn joint_operator(&self) -> Result<HermitianOperator<T>> {
        let d = self.members.first().and_then(|m| m.outputs.first()).map_or(0, |o| o.block.dim());
        let dim = self.members.len() * self.range * d;
        check_dim(dim, "joint hashed state")?;
        let w = self.weight();
        let mut m = DMatrix::from_element(dim, dim, Complex::zero());
        for (gi, mem) in self.members.iter().enumerate() {
            for (s, o) in mem.outputs.iter().enumerate() {
                let at = (gi * self.range + s) * d;
                m.view_mut((at, at), (d, d)).copy_from(&o.block.matrix().map(|z| z * w));
            }
        }
        Ok(HermitianOperator::hermitize(m))
    }

    /// `σ_SGB = I_S/|S| ⊗ I_G/|G| ⊗ ρ_B` in the layout of [`Self::joint_operator`].
    pub fn ideal_operator(&self, rho_b: &DensityOperator<T>) -> Result<HermitianOperator<T>> {
        let d = rho_b.dim();
        let dim = self.members.len() * self.range * d;
        check_dim(dim, "ideal hashed state")?;
        let w = T::one() / T::of((self.members.len() * self.range) as f64);
        let block = rho_b.op().matrix().map(|z| z * w);
        let mut m = DMatrix::from_element(dim, dim, Complex::zero());
        for k in 0..self.members.len() * self.range {
            m.view_mut((k * d, k * d), (d, d)).copy_from(&block);
        }
        Ok(HermitianOperator::hermitize(m))
    }
}

/// `(Σ_s Tr[ρ_sg log₂ ρ_sg], Σ_s ½‖ρ_sg − ρ_B/|S|‖₁)` for one member.
fn member_terms<T: Real>(outputs: &[HashedOutput<T>], uniform_b: &HermitianOperator<T>) -> Result<(T, T)> {
    let mut neg_entropy = T::zero();
    let mut dist = T::zero();
    for o in outputs {
        if o.prob > T::zero() {
            neg_entropy -= von_neumann(&o.block)?;
            dist += trace_distance(&o.block, uniform_b)?;
        } else {
            dist += uniform_b.trace() * T::of(0.5);
        }
    }
    Ok((neg_entropy, dist))
}

fn ensemble_terms<T: Real>(ens: &HashedEnsemble<T>, rho_b: &DensityOperator<T>) -> Result<(T, T)> {
    let uniform_b = rho_b.op().scale(T::one() / T::of(ens.range as f64));
    let terms = ens
        .members
        .par_iter()
        .map(|m| member_terms(&m.outputs, &uniform_b))
        .collect::<Result<Vec<_>>>()?;
    Ok(average(&terms))
}

fn average<T: Real>(terms: &[(T, T)]) -> (T, T) {
    let w = T::one() / T::of(terms.len() as f64);
    terms.iter().fold((T::zero(), T::zero()), |(a, b), &(x, y)| (a + x * w, b + y * w))
}

/// `Δ_R(S|GB)`; an estimate when the ensemble is sampled.
pub fn delta_r<T: Real>(ens: &HashedEnsemble<T>, rho_b: &DensityOperator<T>) -> Result<T> {
    let (neg_entropy, _) = ensemble_terms(ens, rho_b)?;
    Ok(neg_entropy + von_neumann(rho_b.op())? + T::of(ens.range as f64).log2())
}

/// `Δ_d(S|GB)`; an estimate when the ensemble is sampled.
pub fn delta_d<T: Real>(ens: &HashedEnsemble<T>, rho_b: &DensityOperator<T>) -> Result<T> {
    Ok(ensemble_terms(ens, rho_b)?.1)
}

/// `Δ_R` and `Δ_d` without storing the ensemble.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Distances<T> {
    pub delta_r: T,
    pub delta_d: T,
    pub members: usize,
    pub exact: bool,
}

pub fn distances<T: Real>(cq: &CqState<T>, fam: &HashFamily, mode: Mode) -> Result<Distances<T>> {
    check_domain(cq, fam)?;
    let members = member_list(fam, mode)?;
    let rho_b = cq.marginal_b();
    let range = fam.range_size() as usize;
    let uniform_b = rho_b.op().scale(T::one() / T::of(range as f64));
    let terms = members
        .par_iter()
        .map(|&g| member_terms(&hash_member(cq, fam, g)?.outputs, &uniform_b))
        .collect::<Result<Vec<_>>>()?;
    let (neg_entropy, delta_d) = average(&terms);
    Ok(Distances {
        delta_r: neg_entropy + von_neumann(rho_b.op())? + T::of(range as f64).log2(),
        delta_d,
        members: members.len(),
        exact: mode == Mode::Exact,
    })
}

/// `η₀(ε) = −ε log₂ ε` on `[0, ½]` and `½` above.
pub fn eta0<T: Real>(eps: T) -> Result<T> {
    if !(eps >= T::zero()) {
        return arg(format!("eta0 needs a nonnegative argument, got {}", eps.as_f64()));
    }
    Ok(if eps > T::of(0.5) { T::of(0.5) } else { -eps.xlog2x() })
}

/// `δ = |S| · 2^{−R}`.
pub fn delta_param<T: Real>(range: T, r_eps: T) -> T {
    range * (-r_eps).exp2()
}

fn check_eps<T: Real>(eps: T) -> Result<()> {
    if !(eps >= T::zero() && eps < T::one()) {
        return arg(format!("epsilon must lie in [0, 1), got {}", eps.as_f64()));
    }
    Ok(())
}

/// `ε log₂(d|S|) + η₀(ε) + (δ + ε + ε^{1/2})/ln 2` with `δ = |S| 2^{−R}`.
pub fn theorem1_rhs<T: Real>(eps: T, range: T, d: T, r_eps: T) -> Result<T> {
    check_eps(eps)?;
    Ok(eps * (d * range).log2() + eta0(eps)? + (delta_param(range, r_eps) + eps + eps.sqrt()) / T::ln_2())
}

/// `ε log₂|S| + δ/ln 2`, the bound for classical side information.
pub fn classical_rhs<T: Real>(eps: T, range: T, r_eps: T) -> T {
    eps * range.log2() + delta_param(range, r_eps) / T::ln_2()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportParams<T> {
    pub eps: T,
    pub delta: T,
    /// `rank ρ_B`.
    pub d: usize,
    #[serde(rename = "S")]
    pub range: u64,
    pub r_eps: T,
    pub family: FamilyDescriptor,
    #[serde(flatten)]
    pub mode: Mode,
    /// Members in the average.
    pub sample_count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtractionReport<T> {
    #[serde(rename = "delta_R")]
    pub delta_r: T,
    pub delta_d: T,
    pub theorem1_rhs: T,
    /// `theorem1_rhs − delta_R`.
    pub margin: T,
    pub params: ReportParams<T>,
    /// Exact mode with `margin ≥ −1e−9`; sampled runs never certify.
    pub certified: bool,
}

impl<T: Real> ExtractionReport<T> {
    /// The bound is violated: an exact run with a negative margin.
    pub fn violated(&self) -> bool {
        self.params.mode == Mode::Exact && self.margin < -T::of(THEOREM1_TOL)
    }
}

/// Assembles the report for one `ε` from precomputed distances.
pub fn theorem1_report<T: Real>(
    cq: &CqState<T>,
    fam: &HashFamily,
    eps: T,
    dist: &Distances<T>,
    mode: Mode,
) -> Result<ExtractionReport<T>> {
    check_eps(eps)?;
    let r_eps = collision_entropy_r(&cq.embed()?, eps, T::of(DEFAULT_TOL))?.value;
    let d = spectral_decompose(cq.marginal_b().op())?.rank();
    let range = T::of(fam.range_size() as f64);
    let rhs = theorem1_rhs(eps, range, T::of(d as f64), r_eps)?;
    let margin = rhs - dist.delta_r;
    Ok(ExtractionReport {
        delta_r: dist.delta_r,
        delta_d: dist.delta_d,
        theorem1_rhs: rhs,
        margin,
        params: ReportParams {
            eps,
            delta: delta_param(range, r_eps),
            d,
            range: fam.range_size(),
            r_eps,
            family: fam.descriptor(),
            mode,
            sample_count: dist.members,
        },
        certified: dist.exact && margin >= -T::of(THEOREM1_TOL),
    })
}

pub fn verify_theorem1_with<T: Real>(cq: &CqState<T>, fam: &HashFamily, eps: T, mode: Mode) -> Result<ExtractionReport<T>> {
    check_eps(eps)?;
    let dist = distances(cq, fam, mode)?;
    theorem1_report(cq, fam, eps, &dist, mode)
}

/// Exact-mode check of the key-length bound; families beyond the enumeration cap are a resource error.
pub fn verify_theorem1<T: Real>(cq: &CqState<T>, fam: &HashFamily, eps: T) -> Result<ExtractionReport<T>> {
    verify_theorem1_with(cq, fam, eps, Mode::Exact)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KeyLength<T> {
    /// `log₂|S|`.
    pub m: u32,
    pub eps_prime: T,
    pub delta: T,
    pub r_eps: T,
    /// `R_ε + log₂ δ`.
    pub length_lower_bound: T,
    pub family: FamilyDescriptor,
}

/// `ε′ = ε log₂(d|X|) + η₀(ε) + (δ + ε + ε^{1/2})/ln 2`.
pub fn eps_prime<T: Real>(eps: T, d: T, domain: T, delta: T) -> Result<T> {
    check_eps(eps)?;
    Ok(eps * (d * domain).log2() + eta0(eps)? + (delta + eps + eps.sqrt()) / T::ln_2())
}

/// Largest `m ≤ log₂|X|` whose `ε′` does not exceed `target`; `m = 0` when none does.
pub fn extractable_length<T: Real>(cq: &CqState<T>, eps: T, target: T, kind: FamilyKind) -> Result<KeyLength<T>> {
    check_eps(eps)?;
    let nx = cq.alphabet_size() as u64;
    let n_bits = 63 - nx.leading_zeros();
    if kind != FamilyKind::AllFunctions && nx != 1 << n_bits {
        return arg(format!("{kind:?} needs a power-of-two alphabet, got {nx}"));
    }
    let r_eps = collision_entropy_r(&cq.embed()?, eps, T::of(DEFAULT_TOL))?.value;
    let d = T::of(spectral_decompose(cq.marginal_b().op())?.rank() as f64);
    let domain = T::of(nx as f64);
    let at = |m: u32| -> Result<KeyLength<T>> {
        let delta = delta_param(T::of((m as f64).exp2()), r_eps);
        let family = match kind {
            FamilyKind::AllFunctions => FamilyDescriptor::AllFunctions { domain: nx, range: 1 << m },
            FamilyKind::LinearGf2 => FamilyDescriptor::LinearGf2 { n: n_bits, m },
            FamilyKind::ToeplitzGf2 => FamilyDescriptor::ToeplitzGf2 { n: n_bits, m },
        };
        Ok(KeyLength {
            m,
            eps_prime: eps_prime(eps, d, domain, delta)?,
            delta,
            r_eps,
            length_lower_bound: r_eps + delta.log2(),
            family,
        })
    };
    for m in (1..=n_bits).rev() {
        let k = at(m)?;
        if k.eps_prime <= target {
            return Ok(k);
        }
    }
    at(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cq::{random_classical_cq, random_cq};
    use crate::operator::rel_entropy;

    fn uniform_bits(n: u32) -> CqState<f64> {
        let k = 1usize << n;
        CqState::new(vec![1.0 / k as f64; k], vec![DensityOperator::maximally_mixed(1); k]).unwrap()
    }

    #[test]
    fn worked_example() {
        let cq = uniform_bits(2);
        let fam = HashFamily::linear_gf2(2, 1).unwrap();
        let ens = apply_hash(&cq, &fam, Mode::Exact).unwrap();
        let rb = cq.marginal_b();
        assert!((delta_r(&ens, &rb).unwrap() - 0.25).abs() < 1e-12);
        assert!((delta_d(&ens, &rb).unwrap() - 0.125).abs() < 1e-12);
        let rep = verify_theorem1(&cq, &fam, 0.0).unwrap();
        assert!((rep.theorem1_rhs - 0.5 / std::f64::consts::LN_2).abs() < 1e-9);
        assert!((rep.margin - (0.5 / std::f64::consts::LN_2 - 0.25)).abs() < 1e-9);
        assert!(rep.certified);
        assert_eq!(rep.params.sample_count, 4);
    }

    #[test]
    fn injective_and_constant_maps() {
        let cq = random_cq::<f64>(3, 4, 2, 2).unwrap();
        let fam = HashFamily::all_functions(4, 4).unwrap();
        // member with digits (0, 1, 2, 3) is the identity
        let id = 0 + 4 + 2 * 16 + 3 * 64;
        let out = hash_member(&cq, &fam, id).unwrap();
        for x in 0..4 {
            assert!((out.outputs[x].prob - cq.probs()[x]).abs() < 1e-15);
            let cond = out.outputs[x].conditional().unwrap();
            assert!(cond.op().sub(cq.conditionals()[x].op()).unwrap().max_abs_entry() < 1e-12);
        }
        let out = hash_member(&cq, &fam, 0).unwrap();
        assert!((out.outputs[0].prob - 1.0).abs() < 1e-12);
        assert!(out.outputs[1].conditional().is_none());
        assert!(out.outputs[0].block.sub(cq.marginal_b().op()).unwrap().max_abs_entry() < 1e-12);
    }

    #[test]
    fn outputs_partition_the_marginal() {
        let cq = random_cq::<f64>(11, 8, 3, 3).unwrap();
        let fam = HashFamily::linear_gf2(3, 2).unwrap();
        let ens = apply_hash(&cq, &fam, Mode::Exact).unwrap();
        let rb = cq.marginal_b();
        for m in &ens.members {
            let total: f64 = m.outputs.iter().map(|o| o.prob).sum();
            assert!((total - 1.0).abs() < 1e-12);
            let mut acc = HermitianOperator::zeros(3);
            for o in &m.outputs {
                acc = acc.add(&o.block).unwrap();
            }
            assert!(acc.sub(rb.op()).unwrap().max_abs_entry() < 1e-12);
        }
        assert!((ens.total_trace() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn closed_form_matches_relative_entropy() {
        let cq = random_cq::<f64>(5, 4, 2, 2).unwrap();
        let fam = HashFamily::linear_gf2(2, 1).unwrap();
        let ens = apply_hash(&cq, &fam, Mode::Exact).unwrap();
        let rb = cq.marginal_b();
        let direct = rel_entropy(&ens.joint_operator().unwrap(), &ens.ideal_operator(&rb).unwrap()).unwrap();
        assert!((delta_r(&ens, &rb).unwrap() - direct).abs() < 1e-10);
        let dist = crate::operator::trace_distance(&ens.joint_operator().unwrap(), &ens.ideal_operator(&rb).unwrap()).unwrap();
        assert!((delta_d(&ens, &rb).unwrap() - dist).abs() < 1e-10);
    }

    #[test]
    fn uniform_independent_output_has_zero_distance() {
        let cq = CqState::new(vec![0.5, 0.5], vec![DensityOperator::<f64>::maximally_mixed(2); 2]).unwrap();
        let fam = HashFamily::all_functions(2, 2).unwrap();
        // members 1 and 2 are bijections
        let ens = HashedEnsemble { members: vec![hash_member(&cq, &fam, 1).unwrap(), hash_member(&cq, &fam, 2).unwrap()], ..apply_hash(&cq, &fam, Mode::Exact).unwrap() };
        let rb = cq.marginal_b();
        assert!(delta_r(&ens, &rb).unwrap().abs() < 1e-12);
        assert!(delta_d(&ens, &rb).unwrap().abs() < 1e-12);
    }

    #[test]
    fn duplicating_members_changes_nothing() {
        let cq = random_cq::<f64>(9, 4, 2, 2).unwrap();
        let fam = HashFamily::linear_gf2(2, 1).unwrap();
        let ens = apply_hash(&cq, &fam, Mode::Exact).unwrap();
        let mut doubled = ens.clone();
        doubled.members.extend(ens.members.iter().cloned());
        let rb = cq.marginal_b();
        assert!((delta_r(&ens, &rb).unwrap() - delta_r(&doubled, &rb).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn eta0_values() {
        assert_eq!(eta0(0.0f64).unwrap(), 0.0);
        assert!((eta0(0.25f64).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(eta0(0.7f64).unwrap(), 0.5);
        assert!(eta0(-0.1f64).is_err());
    }

    #[test]
    fn rhs_arithmetic_and_monotonicity() {
        assert!((theorem1_rhs(0.0, 2.0, 3.0, 2.0).unwrap() - 0.5 / std::f64::consts::LN_2).abs() < 1e-12);
        assert!(theorem1_rhs(0.0, 2.0, 1.0, f64::INFINITY).unwrap().abs() < 1e-15);
        let mut prev = 0.0;
        for i in 0..1000 {
            let v = theorem1_rhs(i as f64 / 1000.0, 4.0, 2.0, 3.0).unwrap();
            assert!(v >= prev - 1e-15);
            prev = v;
        }
    }

    #[test]
    fn exact_mode_on_four_bits() {
        let cq = uniform_bits(4);
        let fam = HashFamily::linear_gf2(4, 2).unwrap();
        let rep = verify_theorem1(&cq, &fam, 0.0).unwrap();
        assert!((rep.params.delta - 0.25).abs() < 1e-6);
        assert!(rep.margin > 0.0);
        assert_eq!(rep.params.sample_count, 256);
    }

    #[test]
    fn sampled_mode_never_certifies() {
        let cq = uniform_bits(4);
        let fam = HashFamily::linear_gf2(4, 2).unwrap();
        let rep = verify_theorem1_with(&cq, &fam, 0.0, Mode::Sampled { samples: 64, seed: 1 }).unwrap();
        assert!(!rep.certified);
        assert!(!rep.violated());
        let big = HashFamily::linear_gf2(4, 8).unwrap();
        assert!(matches!(verify_theorem1(&cq, &HashFamily::toeplitz_gf2(4, 2).unwrap(), 0.1).map(|r| r.certified), Ok(true)));
        assert!(verify_theorem1(&uniform_bits(4), &big, 0.0).is_err());
    }

    #[test]
    fn key_length_examples() {
        for n in 1..=4 {
            let cq = uniform_bits(n);
            let k = extractable_length(&cq, 0.0, 0.75, FamilyKind::LinearGf2).unwrap();
            assert_eq!(k.m, n - 1);
            assert!((k.eps_prime - 0.5 / std::f64::consts::LN_2).abs() < 1e-6);
            let k = extractable_length(&cq, 0.0, 0.0, FamilyKind::LinearGf2).unwrap();
            assert_eq!(k.m, 0);
        }
        let cq = random_cq::<f64>(2, 8, 2, 2).unwrap();
        let mut prev = 0;
        for i in 0..40 {
            let k = extractable_length(&cq, 0.01, i as f64 * 0.1, FamilyKind::ToeplitzGf2).unwrap();
            assert!(k.m >= prev);
            prev = k.m;
        }
    }

    #[test]
    fn classical_bound_is_below_quantum_bound() {
        let cq = random_classical_cq::<f64>(4, 4, 2).unwrap();
        let fam = HashFamily::linear_gf2(2, 1).unwrap();
        let rep = verify_theorem1(&cq, &fam, 0.0).unwrap();
        assert!(rep.delta_r <= classical_rhs(0.0, 2.0, rep.params.r_eps) + 1e-9);
        for eps in [0.0, 1e-4, 1e-2, 0.1] {
            let q = theorem1_rhs(eps, 2.0, 2.0, 1.5).unwrap();
            assert!(q - classical_rhs(eps, 2.0, 1.5) >= 0.0);
        }
        let small = theorem1_rhs(1e-12, 2.0, 2.0, 1.5).unwrap() - classical_rhs(1e-12, 2.0, 1.5);
        assert!(small < 1e-5);
    }
}
