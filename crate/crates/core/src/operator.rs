//! Dense complex Hermitian operators and the spectral functionals built on them.
//!
//! Every rank, support and projection decision goes through one scale-aware
//! eigenvalue cutoff, `dim · unit · ‖H‖` where `‖H‖` is the largest absolute
//! eigenvalue and `unit` comes from [`Real::CUTOFF_UNIT`]. Matrix functions
//! (logarithms, powers) are defined spectrally and vanish on the kernel.

use std::sync::OnceLock;

use nalgebra::{Complex, DMatrix, SymmetricEigen};
use num_traits::Zero;

use crate::error::{arg, Error, Result};
use crate::scalar::Real;

/// Default cap on operator dimensions produced by tensor products.
pub const DEFAULT_DIM_CAP: usize = 8192;

/// Dimension cap, overridable through `QREX_DIM_CAP`.
pub fn dim_cap() -> usize {
    static CAP: OnceLock<usize> = OnceLock::new();
    *CAP.get_or_init(|| {
        std::env::var("QREX_DIM_CAP")
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .filter(|&c: &usize| c > 0)
            .unwrap_or(DEFAULT_DIM_CAP)
    })
}

pub(crate) fn check_dim(dim: usize, what: &str) -> Result<()> {
    let cap = dim_cap();
    if dim > cap {
        return Err(Error::Resource(format!(
            "{what} needs dimension {dim}, above the cap {cap} (set QREX_DIM_CAP to raise it)"
        )));
    }
    Ok(())
}

#[inline]
pub(crate) fn c<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

/// A Hermitian matrix. Construction symmetrizes the input, so holding one
/// means the entries are exactly conjugate-symmetric.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator<T: Real> {
    m: DMatrix<Complex<T>>,
}

impl<T: Real> HermitianOperator<T> {
    /// Accepts `m` if `max |m − m†| ≤ hermitian_tol`, then replaces it by `(m + m†)/2`.
    pub fn new(m: DMatrix<Complex<T>>, hermitian_tol: T) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return arg(format!("operator must be square and nonempty, got {}x{}", m.nrows(), m.ncols()));
        }
        let adj = m.adjoint();
        let asym = (&m - &adj).iter().fold(T::zero(), |acc, z| acc.max(z.norm_sqr().sqrt()));
        if !(asym <= hermitian_tol) {
            return arg(format!("operator is not Hermitian: max |M - M†| = {}", asym.as_f64()));
        }
        Ok(Self::hermitize(m))
    }

    /// Symmetrizes without checking; for internal chains whose output is Hermitian by algebra.
    pub(crate) fn hermitize(m: DMatrix<Complex<T>>) -> Self {
        let half = T::of(0.5);
        let adj = m.adjoint();
        let m = (m + adj).map(|z| z * half);
        Self { m }
    }

    /// Hermiticity tolerance used by constructors that take no explicit bound.
    pub fn default_tol(m: &DMatrix<Complex<T>>) -> T {
        let scale = m.iter().fold(T::one(), |acc, z| acc.max(z.norm_sqr().sqrt()));
        T::of(1e3 * T::CUTOFF_UNIT) * scale * T::of(m.nrows().max(1) as f64)
    }

    pub fn from_matrix(m: DMatrix<Complex<T>>) -> Result<Self> {
        let tol = Self::default_tol(&m);
        Self::new(m, tol)
    }

    pub fn from_rows(rows: &[Vec<Complex<T>>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return arg("matrix rows must all have length equal to the row count");
        }
        Self::from_matrix(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn from_real_diagonal(diag: &[T]) -> Self {
        let mut m = DMatrix::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = c(d);
        }
        Self { m }
    }

    pub fn identity(dim: usize) -> Self {
        Self { m: DMatrix::identity(dim, dim) }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { m: DMatrix::zeros(dim, dim) }
    }

    /// `|v⟩⟨v|` for an arbitrary (not necessarily normalized) vector.
    pub fn outer(v: &[Complex<T>]) -> Self {
        let n = v.len();
        Self { m: DMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj()) }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex<T>> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<Complex<T>> {
        self.m
    }

    pub fn trace(&self) -> T {
        (0..self.dim()).fold(T::zero(), |acc, i| acc + self.m[(i, i)].re)
    }

    /// Largest absolute entry.
    pub fn max_abs_entry(&self) -> T {
        self.m.iter().fold(T::zero(), |acc, z| acc.max(z.norm_sqr().sqrt()))
    }

    pub fn scale(&self, s: T) -> Self {
        Self { m: self.m.map(|z| z * s) }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        same_dim(self, other)?;
        Ok(Self { m: &self.m + &other.m })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        same_dim(self, other)?;
        Ok(Self { m: &self.m - &other.m })
    }

    /// `H²`.
    pub fn square(&self) -> Self {
        Self::hermitize(&self.m * &self.m)
    }

    /// `C† H C` for an arbitrary `dim × k` matrix `C`.
    pub fn congruence(&self, c: &DMatrix<Complex<T>>) -> Result<Self> {
        if c.nrows() != self.dim() {
            return arg(format!("congruence: {} rows for a {}-dim operator", c.nrows(), self.dim()));
        }
        Ok(Self::hermitize(c.adjoint() * &self.m * c))
    }

    /// `Tr[self · other]`, real for Hermitian arguments.
    pub fn trace_product(&self, other: &Self) -> Result<T> {
        same_dim(self, other)?;
        let n = self.dim();
        let mut acc = T::zero();
        for i in 0..n {
            for j in 0..n {
                acc += (self.m[(i, j)] * other.m[(j, i)]).re;
            }
        }
        Ok(acc)
    }

    /// `⟨v|H|v⟩` for a column of an eigenvector matrix.
    pub(crate) fn expectation(&self, v: nalgebra::DVectorView<'_, Complex<T>>) -> T {
        (v.adjoint() * &self.m * v)[(0, 0)].re
    }

    /// Applies `f` to every eigenvalue.
    pub fn map_spectrum(&self, f: impl Fn(T) -> T) -> Result<Self> {
        spectral_decompose(self).map(|s| s.compose(f))
    }

    /// Every eigenvalue is `≥ −tol`.
    pub fn is_psd(&self, tol: T) -> Result<bool> {
        Ok(spectral_decompose(self)?.min() >= -tol)
    }
}

fn same_dim<T: Real>(a: &HermitianOperator<T>, b: &HermitianOperator<T>) -> Result<()> {
    if a.dim() != b.dim() {
        return arg(format!("dimension mismatch: {} vs {}", a.dim(), b.dim()));
    }
    Ok(())
}

/// Eigenvalues ascending, with the matching orthonormal eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct Spectrum<T: Real> {
    pub eigenvalues: Vec<T>,
    pub eigenvectors: DMatrix<Complex<T>>,
}

impl<T: Real> Spectrum<T> {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn min(&self) -> T {
        self.eigenvalues.first().copied().unwrap_or_else(T::zero)
    }

    pub fn max(&self) -> T {
        self.eigenvalues.last().copied().unwrap_or_else(T::zero)
    }

    /// Spectral norm.
    pub fn norm(&self) -> T {
        self.min().abs().max(self.max().abs())
    }

    /// Global zero cutoff for this operator.
    pub fn cutoff(&self) -> T {
        T::cutoff(self.dim(), self.norm())
    }

    /// Number of eigenvalues above the cutoff.
    pub fn rank(&self) -> usize {
        let cut = self.cutoff();
        self.eigenvalues.iter().filter(|&&l| l > cut).count()
    }

    pub fn vector(&self, i: usize) -> nalgebra::DVectorView<'_, Complex<T>> {
        self.eigenvectors.column(i)
    }

    /// `Σ f(λ_i) |v_i⟩⟨v_i|`.
    pub fn compose(&self, f: impl Fn(T) -> T) -> HermitianOperator<T> {
        let n = self.dim();
        let mut scaled = self.eigenvectors.clone();
        for (j, &l) in self.eigenvalues.iter().enumerate() {
            let fl = f(l);
            scaled.column_mut(j).iter_mut().for_each(|z| *z = *z * fl);
        }
        let m = scaled * self.eigenvectors.adjoint();
        debug_assert_eq!(m.nrows(), n);
        HermitianOperator::hermitize(m)
    }

    /// Projection onto the eigenvectors whose eigenvalue satisfies `keep`.
    pub fn projector(&self, keep: impl Fn(T) -> bool) -> HermitianOperator<T> {
        self.compose(|l| if keep(l) { T::one() } else { T::zero() })
    }

    pub fn reconstruct(&self) -> HermitianOperator<T> {
        self.compose(|l| l)
    }
}

/// Eigendecomposition with eigenvalues sorted ascending.
pub fn spectral_decompose<T: Real>(h: &HermitianOperator<T>) -> Result<Spectrum<T>> {
    let dim = h.dim();
    let eig = SymmetricEigen::try_new(h.m.clone(), T::default_epsilon(), 500 * dim.max(8))
        .ok_or(Error::NonConvergence { dim })?;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors = DMatrix::from_fn(dim, dim, |r, k| eig.eigenvectors[(r, order[k])]);
    Ok(Spectrum { eigenvalues, eigenvectors })
}

/// Which sign class of eigenvalues a spectral projection keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Positive,
    NonNegative,
    NonPositive,
    Negative,
}

/// `{H > 0}`, `{H ≥ 0}`, `{H ≤ 0}` or `{H < 0}`; eigenvalues within the cutoff count as zero.
pub fn spectral_projection<T: Real>(h: &HermitianOperator<T>, sign: Sign) -> Result<HermitianOperator<T>> {
    let s = spectral_decompose(h)?;
    let cut = s.cutoff();
    Ok(s.projector(|l| match sign {
        Sign::Positive => l > cut,
        Sign::NonNegative => l >= -cut,
        Sign::NonPositive => l <= cut,
        Sign::Negative => l < -cut,
    }))
}

/// `{H ≤ 0}`.
pub fn proj_nonpos<T: Real>(h: &HermitianOperator<T>) -> Result<HermitianOperator<T>> {
    spectral_projection(h, Sign::NonPositive)
}

/// Kronecker product `A ⊗ B`.
pub fn tensor<T: Real>(a: &HermitianOperator<T>, b: &HermitianOperator<T>) -> Result<HermitianOperator<T>> {
    let dim = a.dim().checked_mul(b.dim()).ok_or_else(|| Error::Resource("tensor dimension overflow".into()))?;
    check_dim(dim, "tensor product")?;
    Ok(HermitianOperator { m: a.m.kronecker(&b.m) })
}

/// Subsystem of a bipartite space `H_A ⊗ H_B`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Traces out one factor of a `d_A · d_B` dimensional operator, keeping `keep`.
pub fn partial_trace<T: Real>(
    m: &HermitianOperator<T>,
    dims: (usize, usize),
    keep: Subsystem,
) -> Result<HermitianOperator<T>> {
    let (da, db) = dims;
    if da == 0 || db == 0 || da * db != m.dim() {
        return arg(format!("partial trace: dims ({da}, {db}) do not factor dimension {}", m.dim()));
    }
    let x = &m.m;
    let out = match keep {
        Subsystem::B => DMatrix::from_fn(db, db, |i, j| {
            (0..da).fold(Complex::zero(), |acc, a| acc + x[(a * db + i, a * db + j)])
        }),
        Subsystem::A => DMatrix::from_fn(da, da, |i, j| {
            (0..db).fold(Complex::zero(), |acc, b| acc + x[(i * db + b, j * db + b)])
        }),
    };
    Ok(HermitianOperator::hermitize(out))
}

/// `½ Σ |λ_i(A − B)|`.
pub fn trace_distance<T: Real>(a: &HermitianOperator<T>, b: &HermitianOperator<T>) -> Result<T> {
    let diff = a.sub(b)?;
    let s = spectral_decompose(&diff)?;
    Ok(T::of(0.5) * s.eigenvalues.iter().fold(T::zero(), |acc, l| acc + l.abs()))
}

fn psd_spectrum<T: Real>(a: &HermitianOperator<T>, what: &str) -> Result<Spectrum<T>> {
    let s = spectral_decompose(a)?;
    let tol = s.cutoff().max(T::of(T::STATE_TOL) * s.norm().max(T::one()));
    if s.min() < -tol {
        return arg(format!("{what} has a negative eigenvalue {}", s.min().as_f64()));
    }
    Ok(s)
}

/// `S(A) = −Tr A log₂ A` for `A ≥ 0`.
pub fn von_neumann<T: Real>(a: &HermitianOperator<T>) -> Result<T> {
    let s = psd_spectrum(a, "von Neumann argument")?;
    Ok(entropy_of_eigenvalues(&s))
}

pub(crate) fn entropy_of_eigenvalues<T: Real>(s: &Spectrum<T>) -> T {
    let cut = s.cutoff();
    -s.eigenvalues
        .iter()
        .filter(|&&l| l > cut)
        .fold(T::zero(), |acc, &l| acc + l.xlog2x())
}

/// `D(A‖B) = Tr[A(log₂ A − log₂ B)]`, `+∞` when `supp A ⊄ supp B`.
pub fn rel_entropy<T: Real>(a: &HermitianOperator<T>, b: &HermitianOperator<T>) -> Result<T> {
    same_dim(a, b)?;
    let sa = psd_spectrum(a, "relative entropy first argument")?;
    let sb = psd_spectrum(b, "relative entropy second argument")?;
    let cut_b = sb.cutoff();
    let kernel_b = sb.projector(|l| l <= cut_b);
    let leak = a.trace_product(&kernel_b)?;
    if leak > sa.cutoff().max(T::of(T::STATE_TOL) * a.trace().abs()) {
        return Ok(T::infinity());
    }
    let log_b = sb.compose(|l| if l > cut_b { l.log2() } else { T::zero() });
    let cross = a.trace_product(&log_b)?;
    Ok(-entropy_of_eigenvalues(&sa) - cross)
}

/// `log₂ H` on the support of a positive operator, zero on its kernel.
pub fn log2_op<T: Real>(h: &HermitianOperator<T>) -> Result<HermitianOperator<T>> {
    let s = spectral_decompose(h)?;
    let cut = s.cutoff();
    Ok(s.compose(|l| if l > cut { l.log2() } else { T::zero() }))
}

/// Smallest eigenvalue of `Σ C†f(X)C − f(Σ C†XC)` for `f = −log₂`.
///
/// Nonnegative up to rounding whenever `Σ C†C = I` and every `X > 0`.
pub fn jensen_gap<T: Real>(xs: &[HermitianOperator<T>], cs: &[DMatrix<Complex<T>>]) -> Result<T> {
    if xs.is_empty() || xs.len() != cs.len() {
        return arg("jensen_gap needs equally many operators and contractions, at least one");
    }
    let n = xs[0].dim();
    let mut completeness = DMatrix::<Complex<T>>::zeros(n, n);
    for (x, cm) in xs.iter().zip(cs) {
        if x.dim() != n || cm.nrows() != n || cm.ncols() != n {
            return arg("jensen_gap operands must share one dimension");
        }
        completeness += cm.adjoint() * cm;
    }
    let dev = (completeness - DMatrix::<Complex<T>>::identity(n, n))
        .iter()
        .fold(T::zero(), |acc, z| acc.max(z.norm_sqr().sqrt()));
    if dev > T::of(1e3 * T::CUTOFF_UNIT) * T::of(n as f64) {
        return arg(format!("contractions are not complete: max |ΣC†C − I| = {}", dev.as_f64()));
    }
    let neg_log = |x: &HermitianOperator<T>| -> Result<HermitianOperator<T>> {
        let s = spectral_decompose(x)?;
        if s.min() <= T::zero() {
            return arg("jensen_gap operators must be strictly positive");
        }
        Ok(s.compose(|l| -l.log2()))
    };
    let mut lhs = HermitianOperator::zeros(n);
    let mut mixed = HermitianOperator::zeros(n);
    for (x, cm) in xs.iter().zip(cs) {
        lhs = lhs.add(&neg_log(x)?.congruence(cm)?)?;
        mixed = mixed.add(&x.congruence(cm)?)?;
    }
    let gap = lhs.sub(&neg_log(&mixed)?)?;
    Ok(spectral_decompose(&gap)?.min())
}

/// A positive semidefinite operator of unit trace (or trace at most one when subnormalized).
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator<T: Real> {
    op: HermitianOperator<T>,
}

impl<T: Real> DensityOperator<T> {
    pub fn new(op: HermitianOperator<T>, trace_tol: T) -> Result<Self> {
        let tr = op.trace();
        if (tr - T::one()).abs() > trace_tol {
            return arg(format!("density operator trace is {}, expected 1", tr.as_f64()));
        }
        Self::check_psd(&op, trace_tol)?;
        Ok(Self { op })
    }

    /// Validates with the scalar's default state tolerance.
    pub fn from_operator(op: HermitianOperator<T>) -> Result<Self> {
        Self::new(op, T::of(T::STATE_TOL))
    }

    /// Accepts `0 ≤ Tr ≤ 1`.
    pub fn subnormalized(op: HermitianOperator<T>, trace_tol: T) -> Result<Self> {
        let tr = op.trace();
        if tr > T::one() + trace_tol || tr < -trace_tol {
            return arg(format!("subnormalized state trace {} outside [0, 1]", tr.as_f64()));
        }
        Self::check_psd(&op, trace_tol)?;
        Ok(Self { op })
    }

    fn check_psd(op: &HermitianOperator<T>, tol: T) -> Result<()> {
        let min = spectral_decompose(op)?.min();
        if min < -tol {
            return arg(format!("state is not positive semidefinite: min eigenvalue {}", min.as_f64()));
        }
        Ok(())
    }

    /// `I/d`.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self { op: HermitianOperator::identity(dim).scale(T::one() / T::of(dim as f64)) }
    }

    /// Normalizes `|v⟩⟨v|`.
    pub fn pure(v: &[Complex<T>]) -> Result<Self> {
        let norm2 = v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr());
        if norm2 <= T::zero() {
            return arg("pure state vector is zero");
        }
        Ok(Self { op: HermitianOperator::outer(v).scale(T::one() / norm2) })
    }

    /// Diagonal state from a probability vector.
    pub fn diagonal(p: &[T]) -> Result<Self> {
        Self::from_operator(HermitianOperator::from_real_diagonal(p))
    }

    pub(crate) fn trusted(op: HermitianOperator<T>) -> Self {
        Self { op }
    }

    pub fn op(&self) -> &HermitianOperator<T> {
        &self.op
    }

    pub fn into_op(self) -> HermitianOperator<T> {
        self.op
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }
}

impl<T: Real> AsRef<HermitianOperator<T>> for DensityOperator<T> {
    fn as_ref(&self) -> &HermitianOperator<T> {
        &self.op
    }
}
