//! Two-universal hash families with canonical member indexing.
//!
//! Member layouts (stable; reports cite member indices):
//!
//! * `all_functions(|X|, |S|)`: member `k` maps `x` to the `x`-th base-`|S|`
//!   digit of `k`, least significant digit first.
//! * `linear_gf2(n, m)`: member `k` is the `m × n` binary matrix whose entry
//!   `(i, j)` is bit `i·n + j` of `k`. Input bit `j` of `x` and output bit `i`
//!   of `s` are counted from the least significant bit.
//! * `toeplitz_gf2(n, m)`: member `k` is an `(n+m−1)`-bit seed `t`; the matrix
//!   entry `(i, j)` is bit `i − j + n − 1` of `t`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};

/// Largest family enumerated exhaustively.
pub const ENUMERATION_CAP: u64 = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    AllFunctions,
    LinearGf2,
    ToeplitzGf2,
}

/// JSON descriptor of a family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilyDescriptor {
    AllFunctions {
        #[serde(rename = "X")]
        domain: u64,
        #[serde(rename = "S")]
        range: u64,
    },
    LinearGf2 {
        n: u32,
        m: u32,
    },
    ToeplitzGf2 {
        n: u32,
        m: u32,
    },
}

/// Number of members. GF(2) families store the exponent of two.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilySize {
    Exact(u64),
    Pow2(u32),
}

impl FamilySize {
    pub fn as_u64(self) -> Option<u64> {
        match self {
            FamilySize::Exact(v) => Some(v),
            FamilySize::Pow2(k) if k < 64 => Some(1u64 << k),
            FamilySize::Pow2(_) => None,
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            FamilySize::Exact(v) => v as f64,
            FamilySize::Pow2(k) => (k as f64).exp2(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HashFamily {
    desc: FamilyDescriptor,
    domain: u64,
    range: u64,
    size: FamilySize,
}

impl HashFamily {
    pub fn all_functions(domain: u64, range: u64) -> Result<Self> {
        if domain == 0 || range == 0 {
            return arg("all_functions needs |X|, |S| >= 1");
        }
        let size = u32::try_from(domain)
            .ok()
            .and_then(|d| range.checked_pow(d))
            .ok_or_else(|| Error::Resource(format!("|S|^|X| = {range}^{domain} does not fit in 64 bits")))?;
        Ok(Self { desc: FamilyDescriptor::AllFunctions { domain, range }, domain, range, size: FamilySize::Exact(size) })
    }

    pub fn linear_gf2(n: u32, m: u32) -> Result<Self> {
        if n == 0 || m == 0 || n >= 64 || m >= 64 || n * m > 64 {
            return arg(format!("linear_gf2 needs n, m >= 1 and n·m <= 64 (got n={n}, m={m})"));
        }
        Ok(Self { desc: FamilyDescriptor::LinearGf2 { n, m }, domain: 1 << n, range: 1 << m, size: FamilySize::Pow2(n * m) })
    }

    pub fn toeplitz_gf2(n: u32, m: u32) -> Result<Self> {
        if n == 0 || m == 0 || n >= 64 || m >= 64 || n + m - 1 > 64 {
            return arg(format!("toeplitz_gf2 needs n, m >= 1 and n+m-1 <= 64 (got n={n}, m={m})"));
        }
        Ok(Self {
            desc: FamilyDescriptor::ToeplitzGf2 { n, m },
            domain: 1 << n,
            range: 1 << m,
            size: FamilySize::Pow2(n + m - 1),
        })
    }

    pub fn from_descriptor(d: FamilyDescriptor) -> Result<Self> {
        match d {
            FamilyDescriptor::AllFunctions { domain, range } => Self::all_functions(domain, range),
            FamilyDescriptor::LinearGf2 { n, m } => Self::linear_gf2(n, m),
            FamilyDescriptor::ToeplitzGf2 { n, m } => Self::toeplitz_gf2(n, m),
        }
    }

    pub fn descriptor(&self) -> FamilyDescriptor {
        self.desc
    }

    pub fn kind(&self) -> FamilyKind {
        match self.desc {
            FamilyDescriptor::AllFunctions { .. } => FamilyKind::AllFunctions,
            FamilyDescriptor::LinearGf2 { .. } => FamilyKind::LinearGf2,
            FamilyDescriptor::ToeplitzGf2 { .. } => FamilyKind::ToeplitzGf2,
        }
    }

    pub fn domain_size(&self) -> u64 {
        self.domain
    }

    pub fn range_size(&self) -> u64 {
        self.range
    }

    pub fn family_size(&self) -> FamilySize {
        self.size
    }

    /// Family size when it is at most [`ENUMERATION_CAP`].
    pub fn enumerable(&self) -> Option<u64> {
        self.size.as_u64().filter(|&s| s <= ENUMERATION_CAP)
    }

    /// Bits needed to describe one member.
    pub fn description_bits(&self) -> u32 {
        match self.desc {
            FamilyDescriptor::AllFunctions { .. } => 64 - (self.size.as_u64().unwrap_or(u64::MAX) - 1).leading_zeros(),
            FamilyDescriptor::LinearGf2 { n, m } => n * m,
            FamilyDescriptor::ToeplitzGf2 { n, m } => n + m - 1,
        }
    }

    fn check_member(&self, member: u64) -> Result<()> {
        if let Some(size) = self.size.as_u64() {
            if member >= size {
                return arg(format!("member index {member} outside family of size {size}"));
            }
        }
        Ok(())
    }

    /// Row masks of the binary matrix for GF(2) families, `m` rows of `n` bits.
    fn rows(&self, member: u64) -> Vec<u64> {
        match self.desc {
            FamilyDescriptor::LinearGf2 { n, m } => {
                let mask = low_mask(n);
                (0..m).map(|i| (member >> (i * n)) & mask).collect()
            }
            FamilyDescriptor::ToeplitzGf2 { n, m } => (0..m)
                .map(|i| {
                    (0..n).fold(0u64, |row, j| {
                        let bit = (member >> (i + n - 1 - j)) & 1;
                        row | (bit << j)
                    })
                })
                .collect(),
            FamilyDescriptor::AllFunctions { .. } => Vec::new(),
        }
    }

    pub fn evaluate(&self, member: u64, x: u64) -> Result<u64> {
        self.check_member(member)?;
        if x >= self.domain {
            return arg(format!("input {x} outside domain of size {}", self.domain));
        }
        Ok(match self.desc {
            FamilyDescriptor::AllFunctions { range, .. } => {
                let mut k = member;
                for _ in 0..x {
                    k /= range;
                }
                k % range
            }
            _ => apply_rows(&self.rows(member), x),
        })
    }

    /// Outputs for every input, `table[x] = g(x)`.
    pub fn table(&self, member: u64) -> Result<Vec<u64>> {
        self.check_member(member)?;
        Ok(match self.desc {
            FamilyDescriptor::AllFunctions { domain, range } => {
                let mut k = member;
                (0..domain)
                    .map(|_| {
                        let d = k % range;
                        k /= range;
                        d
                    })
                    .collect()
            }
            _ => {
                let rows = self.rows(member);
                (0..self.domain).map(|x| apply_rows(&rows, x)).collect()
            }
        })
    }

    /// Uniform member from a seed.
    pub fn sample(&self, seed: u64) -> u64 {
        self.draw(&mut ChaCha20Rng::seed_from_u64(seed))
    }

    /// `count` uniform members from one seeded stream.
    pub fn sample_many(&self, seed: u64, count: usize) -> Vec<u64> {
        let mut r = ChaCha20Rng::seed_from_u64(seed);
        (0..count).map(|_| self.draw(&mut r)).collect()
    }

    fn draw(&self, r: &mut ChaCha20Rng) -> u64 {
        match self.size {
            FamilySize::Exact(s) => r.random_range(0..s),
            FamilySize::Pow2(k) => r.random::<u64>() & low_mask(k),
        }
    }
}

fn low_mask(bits: u32) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

fn apply_rows(rows: &[u64], x: u64) -> u64 {
    rows.iter()
        .enumerate()
        .fold(0u64, |s, (i, &row)| s | ((((row & x).count_ones() & 1) as u64) << i))
}

/// Collision count for a pair of inputs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Collision {
    pub colliding: u64,
    /// Members examined: the whole family when `exact`, otherwise the sample size.
    pub examined: u64,
    pub exact: bool,
}

impl Collision {
    pub fn probability(&self) -> f64 {
        self.colliding as f64 / self.examined as f64
    }
}

/// Sample size giving a two-sided Hoeffding deviation `t` with failure probability `delta`.
pub fn chernoff_samples(t: f64, delta: f64) -> usize {
    ((2.0 / delta).ln() / (2.0 * t * t)).ceil() as usize
}

/// Default seed for sampled collision estimates.
pub const COLLISION_SEED: u64 = 0x5eed;

/// `Pr[G(x₀) = G(x₁)]`, exact when the family is enumerable, sampled otherwise.
pub fn collision_prob(fam: &HashFamily, x0: u64, x1: u64) -> Result<Collision> {
    if x0 == x1 {
        return arg("collision probability concerns distinct inputs");
    }
    if x0.max(x1) >= fam.domain_size() {
        return arg("inputs outside the family domain");
    }
    match fam.enumerable() {
        Some(size) => {
            let mut colliding = 0;
            for g in 0..size {
                if fam.evaluate(g, x0)? == fam.evaluate(g, x1)? {
                    colliding += 1;
                }
            }
            Ok(Collision { colliding, examined: size, exact: true })
        }
        None => {
            let count = chernoff_samples(0.01, 1e-6);
            let mut colliding = 0;
            for g in fam.sample_many(COLLISION_SEED, count) {
                if fam.evaluate(g, x0)? == fam.evaluate(g, x1)? {
                    colliding += 1;
                }
            }
            Ok(Collision { colliding, examined: count as u64, exact: false })
        }
    }
}

/// Outcome of a two-universality check over all distinct input pairs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct UniversalityCheck {
    pub pairs: u64,
    /// Largest collision count over all pairs.
    pub worst_colliding: u64,
    pub examined: u64,
    pub exact: bool,
    /// `worst_colliding · |S| ≤ examined` (exact integer test when `exact`; with
    /// a `0.01` Hoeffding slack otherwise).
    pub holds: bool,
}

/// Checks `Pr[G(x₀) = G(x₁)] ≤ 1/|S|` for every pair of distinct inputs.
pub fn verify_two_universal(fam: &HashFamily) -> Result<UniversalityCheck> {
    let dom = fam.domain_size();
    if dom > 1 << 12 {
        return Err(Error::Resource(format!("pairwise check over a domain of {dom} inputs is too large")));
    }
    let dom = dom as usize;
    let (members, exact): (Vec<u64>, bool) = match fam.enumerable() {
        Some(size) => ((0..size).collect(), true),
        None => (fam.sample_many(COLLISION_SEED, chernoff_samples(0.01, 1e-6)), false),
    };
    let mut counts = vec![0u64; dom * dom];
    for &g in &members {
        let t = fam.table(g)?;
        for a in 0..dom {
            for b in a + 1..dom {
                if t[a] == t[b] {
                    counts[a * dom + b] += 1;
                }
            }
        }
    }
    let worst = (0..dom)
        .flat_map(|a| (a + 1..dom).map(move |b| (a, b)))
        .map(|(a, b)| counts[a * dom + b])
        .max()
        .unwrap_or(0);
    let examined = members.len() as u64;
    let range = fam.range_size();
    let holds = if exact {
        (worst as u128) * (range as u128) <= examined as u128
    } else {
        (worst as f64) / (examined as f64) <= 1.0 / range as f64 + 0.01
    };
    Ok(UniversalityCheck { pairs: (dom * dom.saturating_sub(1) / 2) as u64, worst_colliding: worst, examined, exact, holds })
}
