//! Classical-quantum states `Σ_x p_x |x⟩⟨x| ⊗ ρ_x`, general bipartite states,
//! seeded random ensembles and tensor powers.
//!
//! Random states use a normalized Wishart ensemble: a `d × k` matrix `G` of
//! independent complex standard normals gives `ρ = GG†/Tr[GG†]`, which has
//! rank `min(d, k)` with probability one. Symbol probabilities are normalized
//! standard exponentials (uniform on the simplex). All randomness comes from
//! `ChaCha20Rng::seed_from_u64(seed)`.

use nalgebra::{Complex, DMatrix, DVector};
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::error::{arg, Result};
use crate::operator::{check_dim, partial_trace, DensityOperator, HermitianOperator, Subsystem};
use crate::scalar::Real;

/// `Σ_x p_x |x⟩⟨x| ⊗ ρ_x` over the alphabet `{0, …, |X|−1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct CqState<T: Real> {
    probs: Vec<T>,
    conditionals: Vec<DensityOperator<T>>,
    d_b: usize,
}

impl<T: Real> CqState<T> {
    pub fn new(probs: Vec<T>, conditionals: Vec<DensityOperator<T>>) -> Result<Self> {
        if probs.is_empty() || probs.len() != conditionals.len() {
            return arg(format!(
                "cq state needs one conditional per symbol ({} probabilities, {} conditionals)",
                probs.len(),
                conditionals.len()
            ));
        }
        if probs.iter().any(|&p| !(p >= T::zero())) {
            return arg("symbol probabilities must be nonnegative");
        }
        let total = probs.iter().fold(T::zero(), |a, &p| a + p);
        if (total - T::one()).abs() > T::of(T::STATE_TOL) {
            return arg(format!("symbol probabilities sum to {}, expected 1", total.as_f64()));
        }
        let d_b = conditionals[0].dim();
        if conditionals.iter().any(|r| r.dim() != d_b) {
            return arg("conditional states must share one dimension");
        }
        Ok(Self { probs, conditionals, d_b })
    }

    pub fn alphabet_size(&self) -> usize {
        self.probs.len()
    }

    pub fn d_b(&self) -> usize {
        self.d_b
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn conditionals(&self) -> &[DensityOperator<T>] {
        &self.conditionals
    }

    /// Marginal distribution of the classical symbol.
    pub fn marginal_x(&self) -> Vec<T> {
        self.probs.clone()
    }

    /// `ρ_B = Σ_x p_x ρ_x`.
    pub fn marginal_b(&self) -> DensityOperator<T> {
        let mut acc = DMatrix::<Complex<T>>::zeros(self.d_b, self.d_b);
        for (p, r) in self.probs.iter().zip(&self.conditionals) {
            acc += r.op().matrix().map(|z| z * *p);
        }
        DensityOperator::trusted(HermitianOperator::hermitize(acc))
    }

    /// Block-diagonal density operator on `H_X ⊗ H_B`, block `x` equal to `p_x ρ_x`.
    pub fn embed(&self) -> Result<BipartiteState<T>> {
        let nx = self.alphabet_size();
        let db = self.d_b;
        check_dim(nx * db, "cq embedding")?;
        let mut m = DMatrix::<Complex<T>>::zeros(nx * db, nx * db);
        for (x, (p, r)) in self.probs.iter().zip(&self.conditionals).enumerate() {
            let block = r.op().matrix().map(|z| z * *p);
            m.view_mut((x * db, x * db), (db, db)).copy_from(&block);
        }
        Ok(BipartiteState { state: DensityOperator::trusted(HermitianOperator::hermitize(m)), dims: (nx, db) })
    }

    /// Joint pmf `p(x, y) = p_x ⟨y|ρ_x|y⟩` when every conditional is diagonal in the
    /// computational basis (off-diagonal entries below `tol`); `None` otherwise.
    pub fn diagonal_joint(&self, tol: T) -> Option<Vec<Vec<T>>> {
        let mut joint = Vec::with_capacity(self.alphabet_size());
        for (p, r) in self.probs.iter().zip(&self.conditionals) {
            let m = r.op().matrix();
            for i in 0..self.d_b {
                for j in 0..self.d_b {
                    if i != j && m[(i, j)].norm_sqr().sqrt() > tol {
                        return None;
                    }
                }
            }
            joint.push((0..self.d_b).map(|y| *p * m[(y, y)].re).collect());
        }
        Some(joint)
    }
}

/// A state on `H_A ⊗ H_B` with the factor dimensions attached.
#[derive(Clone, Debug, PartialEq)]
pub struct BipartiteState<T: Real> {
    state: DensityOperator<T>,
    dims: (usize, usize),
}

impl<T: Real> BipartiteState<T> {
    pub fn new(state: DensityOperator<T>, dims: (usize, usize)) -> Result<Self> {
        if dims.0 == 0 || dims.1 == 0 || dims.0 * dims.1 != state.dim() {
            return arg(format!("dims ({}, {}) do not factor dimension {}", dims.0, dims.1, state.dim()));
        }
        Ok(Self { state, dims })
    }

    pub(crate) fn trusted(op: HermitianOperator<T>, dims: (usize, usize)) -> Self {
        Self { state: DensityOperator::trusted(op), dims }
    }

    pub fn state(&self) -> &DensityOperator<T> {
        &self.state
    }

    pub fn op(&self) -> &HermitianOperator<T> {
        self.state.op()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn marginal_a(&self) -> Result<DensityOperator<T>> {
        partial_trace(self.op(), self.dims, Subsystem::A).map(DensityOperator::trusted)
    }

    pub fn marginal_b(&self) -> Result<DensityOperator<T>> {
        partial_trace(self.op(), self.dims, Subsystem::B).map(DensityOperator::trusted)
    }

    /// Applies an isometry `V: H_B → H_B'` (columns orthonormal) as `(I ⊗ V) ρ (I ⊗ V)†`.
    pub fn apply_isometry_b(&self, v: &DMatrix<Complex<T>>) -> Result<Self> {
        let (da, db) = self.dims;
        if v.ncols() != db || v.nrows() < db {
            return arg(format!("isometry must be d' x {db} with d' >= {db}"));
        }
        let big = DMatrix::<Complex<T>>::identity(da, da).kronecker(v);
        let out = &big * self.op().matrix() * big.adjoint();
        Ok(Self::trusted(HermitianOperator::hermitize(out), (da, v.nrows())))
    }
}

/// Validated dims for `ρ^{⊗n}`.
pub fn power_dims(dims: (usize, usize), n: u32) -> Result<(usize, usize)> {
    let pa = dims.0.checked_pow(n);
    let pb = dims.1.checked_pow(n);
    match (pa, pb) {
        (Some(a), Some(b)) if a.checked_mul(b).is_some() => {
            check_dim(a * b, "tensor power (use the spectrum-convolution path in `asymptotics` instead)")?;
            Ok((a, b))
        }
        _ => Err(crate::error::Error::Resource(
            "tensor power dimension overflows; use the spectrum-convolution path in `asymptotics`".into(),
        )),
    }
}

/// `ρ^{⊗n}` with all A-factors ordered before all B-factors, dims `(d_A^n, d_B^n)`.
pub fn tensor_power<T: Real>(rho: &BipartiteState<T>, n: u32) -> Result<BipartiteState<T>> {
    if n == 0 {
        return arg("tensor power needs n >= 1");
    }
    let (da, db) = rho.dims;
    let (pa, pb) = power_dims(rho.dims, n)?;
    let mut kron = rho.op().matrix().clone();
    for _ in 1..n {
        kron = kron.kronecker(rho.op().matrix());
    }
    let d = da * db;
    // reordered index (a_1..a_n, b_1..b_n) -> interleaved index ((a_1 b_1)..(a_n b_n))
    let perm: Vec<usize> = (0..pa * pb)
        .map(|idx| {
            let (mut a, mut b) = (idx / pb, idx % pb);
            let mut orig = 0usize;
            let mut weight = 1usize;
            for _ in 0..n {
                orig += (a % da * db + b % db) * weight;
                weight *= d;
                a /= da;
                b /= db;
            }
            orig
        })
        .collect();
    let out = DMatrix::from_fn(pa * pb, pa * pb, |i, j| kron[(perm[i], perm[j])]);
    Ok(BipartiteState::trusted(HermitianOperator::hermitize(out), (pa, pb)))
}

fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

fn complex_normal<T: Real>(r: &mut ChaCha20Rng) -> Complex<T> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let re: f64 = r.sample(StandardNormal);
    let im: f64 = r.sample(StandardNormal);
    Complex::new(T::of(re * s), T::of(im * s))
}

/// Normalized `GG†` for a `dim × width` complex Gaussian `G`.
pub fn wishart_state<T: Real>(r: &mut ChaCha20Rng, dim: usize, width: usize) -> DensityOperator<T> {
    let g = DMatrix::from_fn(dim, width, |_, _| complex_normal::<T>(r));
    let op = HermitianOperator::hermitize(&g * g.adjoint());
    let tr = op.trace();
    DensityOperator::trusted(op.scale(T::one() / tr))
}

fn simplex_point<T: Real>(r: &mut ChaCha20Rng, n: usize) -> Vec<T> {
    let e: Vec<f64> = (0..n).map(|_| r.sample::<f64, _>(Exp1)).collect();
    let total: f64 = e.iter().sum();
    e.into_iter().map(|x| T::of(x / total)).collect()
}

/// Seeded random cq state; every conditional has rank `min(d_B, rank_cap)`.
pub fn random_cq<T: Real>(seed: u64, nx: usize, d_b: usize, rank_cap: usize) -> Result<CqState<T>> {
    if nx == 0 || d_b == 0 || rank_cap == 0 || rank_cap > d_b {
        return arg(format!("random_cq: need |X| >= 1, d_B >= 1, 1 <= rank_cap <= d_B (got {nx}, {d_b}, {rank_cap})"));
    }
    let mut r = rng(seed);
    let probs = simplex_point(&mut r, nx);
    let conditionals = (0..nx).map(|_| wishart_state(&mut r, d_b, rank_cap)).collect();
    CqState::new(probs, conditionals)
}

/// Seeded random cq state whose conditionals are diagonal in the computational basis.
pub fn random_classical_cq<T: Real>(seed: u64, nx: usize, d_b: usize) -> Result<CqState<T>> {
    if nx == 0 || d_b == 0 {
        return arg("random_classical_cq: dimensions must be positive");
    }
    let mut r = rng(seed);
    let probs = simplex_point(&mut r, nx);
    let conditionals = (0..nx)
        .map(|_| DensityOperator::trusted(HermitianOperator::from_real_diagonal(&simplex_point::<T>(&mut r, d_b))))
        .collect();
    CqState::new(probs, conditionals)
}

/// Seeded random bipartite state of rank `min(d_A d_B, rank_cap)`.
pub fn random_bipartite<T: Real>(seed: u64, d_a: usize, d_b: usize, rank_cap: usize) -> Result<BipartiteState<T>> {
    let d = d_a * d_b;
    if d_a == 0 || d_b == 0 || rank_cap == 0 || rank_cap > d {
        return arg(format!("random_bipartite: need positive dims and 1 <= rank_cap <= d_A d_B (got {d_a}, {d_b}, {rank_cap})"));
    }
    check_dim(d, "random bipartite state")?;
    let mut r = rng(seed);
    Ok(BipartiteState::trusted(wishart_state(&mut r, d, rank_cap).into_op(), (d_a, d_b)))
}

/// Seeded Haar-like isometry `H_d → H_{d'}` (QR of a complex Gaussian), `d' ≥ d`.
pub fn random_isometry<T: Real>(seed: u64, d: usize, d_big: usize) -> Result<DMatrix<Complex<T>>> {
    if d == 0 || d_big < d {
        return arg("random_isometry needs 1 <= d <= d'");
    }
    let mut r = rng(seed);
    let g = DMatrix::from_fn(d_big, d, |_, _| complex_normal::<T>(&mut r));
    Ok(gram_schmidt(g))
}

fn gram_schmidt<T: Real>(mut g: DMatrix<Complex<T>>) -> DMatrix<Complex<T>> {
    for j in 0..g.ncols() {
        for k in 0..j {
            let proj = g.column(k).dotc(&g.column(j));
            let qk: DVector<Complex<T>> = g.column(k).into_owned();
            g.column_mut(j).axpy(-proj, &qk, Complex::one());
        }
        let norm = g.column(j).norm();
        g.column_mut(j).iter_mut().for_each(|z| *z = *z / Complex::new(norm, T::zero()));
    }
    g
}
