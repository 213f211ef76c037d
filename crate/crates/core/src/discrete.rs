//! Finite-dimensional models: the truncated left shift with an engineered
//! virtual state, and nullity as the least rank of a regularising perturbation.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DiscreteError {
    #[error("|z| = {modulus} is not in the required domain")]
    DomainError { modulus: f64 },
    #[error("trials disagree at rank {rank}: {successes} of {trials} regularised")]
    Inconclusive { rank: usize, successes: usize, trials: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
}

/// `(L - z)^{-1}` truncated to `n×n`: entry `(i, j) = -z^{-1-(j-i)}` for `j ≥ i`.
pub fn shift_resolvent(n: usize, z: Complex64) -> Result<DMatrix<Complex64>, DiscreteError> {
    if !(z.norm() > 1.0) {
        return Err(DiscreteError::DomainError { modulus: z.norm() });
    }
    if n == 0 {
        return Err(DiscreteError::InvalidArgument("n must be positive"));
    }
    let inv = 1.0 / z;
    let powers: Vec<Complex64> = (0..n).scan(inv, |p, _| {
        let cur = *p;
        *p *= inv;
        Some(cur)
    }).collect();
    Ok(DMatrix::from_fn(n, n, |a, b| if b >= a { -powers[b - a] } else { Complex64::new(0.0, 0.0) }))
}

/// Truncated left shift `L_n`.
pub fn shift_matrix(n: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(n, n, |a, b| if b == a + 1 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) })
}

/// `max |((L_n - z)R - I)_{ij}|` over all rows but the last.
pub fn shift_identity_defect(r: &DMatrix<Complex64>, z: Complex64) -> f64 {
    let n = r.nrows();
    let lhs = (shift_matrix(n) - DMatrix::identity(n, n) * z) * r - DMatrix::<Complex64>::identity(n, n);
    (0..n.saturating_sub(1)).flat_map(|a| (0..n).map(move |b| (a, b))).map(|(a, b)| lhs[(a, b)].norm()).fold(0.0, f64::max)
}

/// A summable sequence `φ₁, φ₂, …`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Sequence {
    /// `φᵢ = i^{-p}`, `p > 1`.
    InversePower { p: f64 },
    /// `φᵢ = rⁱ`, `|r| < 1`.
    Geometric { r: f64 },
    /// Finitely many nonzero entries.
    Finite { values: Vec<Complex64> },
}

impl Sequence {
    pub fn at(&self, i: usize) -> Complex64 {
        match self {
            Self::InversePower { p } => Complex64::new((i as f64).powf(-p), 0.0),
            Self::Geometric { r } => Complex64::new(r.powi(i as i32), 0.0),
            Self::Finite { values } => values.get(i - 1).copied().unwrap_or(Complex64::new(0.0, 0.0)),
        }
    }

    fn validate(&self) -> Result<(), DiscreteError> {
        let ok = match self {
            Self::InversePower { p } => *p > 1.0,
            Self::Geometric { r } => r.abs() < 1.0,
            Self::Finite { values } => !values.is_empty() && values[0] != Complex64::new(0.0, 0.0),
        };
        if ok {
            Ok(())
        } else {
            Err(DiscreteError::InvalidArgument("sequence must be summable with a nonzero first entry"))
        }
    }

    /// `Ψ_m = -Σ_{k≥0} z0^{-1-k} φ_{m+k}`.
    fn tail_sum(&self, m: usize, z0: Complex64) -> Complex64 {
        let inv = 1.0 / z0;
        match self {
            Self::Geometric { r } => -r.powi(m as i32) * inv / (1.0 - r * inv),
            Self::Finite { values } => {
                let mut s = Complex64::new(0.0, 0.0);
                let mut q = inv;
                for i in m..=values.len() {
                    s += q * self.at(i);
                    q *= inv;
                }
                -s
            }
            Self::InversePower { p } => {
                // direct partial sum, then Euler–Maclaurin (z0 = 1) or a first
                // Abel-summation correction (z0 ≠ 1) for the remainder
                const K: usize = 20_000;
                let mut s = Complex64::new(0.0, 0.0);
                let mut q = inv;
                for k in 0..K {
                    s += q * ((m + k) as f64).powf(-p);
                    q *= inv;
                }
                let x = (m + K) as f64;
                let rest = if (z0 - 1.0).norm() < 1e-14 {
                    Complex64::new(x.powf(1.0 - p) / (p - 1.0) + 0.5 * x.powf(-p) + p * x.powf(-p - 1.0) / 12.0, 0.0)
                } else {
                    q * x.powf(-p) / (1.0 - inv)
                };
                -(s + rest)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VirtualStateKind {
    /// `φ` has finite support, so `Ψ` does too.
    Degenerate,
    /// `Ψ` decays fast enough to be square summable.
    L2Eigenvector,
    /// `Ψ ∈ c₀` but not square summable.
    Genuine,
}

#[derive(Debug, Clone, Serialize)]
pub struct ShiftVirtualState {
    pub n: usize,
    pub z0: Complex64,
    pub psi: Vec<Complex64>,
    /// `‖(A_n - z0)Ψ_n‖∞`.
    pub residual: f64,
    /// Fitted `q` in `|Ψᵢ| ~ i^{-q}` over `i ∈ [n/4, n]`.
    pub decay_exponent: f64,
    /// `Σ_{i≤n} |Ψᵢ|²`.
    pub l2_partial_sum: f64,
    pub kind: VirtualStateKind,
}

/// `A = L - K(L - z0)` with `K = φ⊗e₁/φ₁`, and `Ψ = (L - z0)^{-1}φ` sampled exactly
/// on the first `n` entries; `(A - z0)Ψ = 0` in infinite dimensions.
pub fn engineered_virtual_state(n: usize, z0: Complex64, phi: &Sequence) -> Result<(DMatrix<Complex64>, ShiftVirtualState), DiscreteError> {
    if (z0.norm() - 1.0).abs() > 1e-12 {
        return Err(DiscreteError::DomainError { modulus: z0.norm() });
    }
    if n < 8 {
        return Err(DiscreteError::InvalidArgument("n must be at least 8"));
    }
    phi.validate()?;
    let phis: Vec<Complex64> = (1..=n).map(|i| phi.at(i)).collect();

    // Ψᵢ = (Ψᵢ₊₁ - φᵢ)/z0, started from the exact tail at n + 1
    let mut psi = vec![Complex64::new(0.0, 0.0); n + 1];
    psi[n] = phi.tail_sum(n + 1, z0);
    for k in (0..n).rev() {
        psi[k] = (psi[k + 1] - phis[k]) / z0;
    }
    psi.truncate(n);

    let l = shift_matrix(n);
    let id = DMatrix::<Complex64>::identity(n, n);
    let mut kmat = DMatrix::<Complex64>::zeros(n, n);
    for a in 0..n {
        kmat[(a, 0)] = phis[a] / phis[0];
    }
    let a_mat = &l - &kmat * (&l - &id * z0);
    let v = nalgebra::DVector::from_vec(psi.clone());
    let r = (&a_mat - &id * z0) * v;
    let residual = r.iter().map(|x| x.norm()).fold(0.0, f64::max);

    let lo = n / 4;
    let xs: Vec<f64> = (lo..=n).map(|i| i as f64).collect();
    let ys: Vec<f64> = (lo..=n).map(|i| psi[i - 1].norm()).collect();
    let decay = if ys.iter().all(|&y| y > 0.0) { -crate::bifurcation::power_law_fit(&xs, &ys).0 } else { f64::INFINITY };
    let kind = match phi {
        Sequence::Finite { .. } => VirtualStateKind::Degenerate,
        _ if decay > 0.55 => VirtualStateKind::L2Eigenvector,
        _ => VirtualStateKind::Genuine,
    };
    let l2 = psi.iter().map(|x| x.norm_sqr()).sum();
    Ok((a_mat, ShiftVirtualState { n, z0, psi, residual, decay_exponent: decay, l2_partial_sum: l2, kind }))
}

/// `|det M| / Π‖columns‖`, which lies in `[0, 1]`.
pub fn normalized_det(m: &DMatrix<Complex64>) -> f64 {
    let hadamard: f64 = m.column_iter().map(|c| c.norm()).product();
    if hadamard == 0.0 {
        return 0.0;
    }
    m.clone().lu().determinant().norm() / hadamard
}

pub const TOL_DET: f64 = 1e-10;

fn random_rank(rng: &mut ChaCha8Rng, n: usize, r: usize, scale: f64) -> DMatrix<Complex64> {
    let mut sample = || Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let mut out = DMatrix::<Complex64>::zeros(n, n);
    for _ in 0..r {
        let u = nalgebra::DVector::from_fn(n, |_, _| sample());
        let v = nalgebra::DVector::from_fn(n, |_, _| sample());
        out += u * v.adjoint();
    }
    let norm = out.norm();
    if norm > 0.0 {
        out *= Complex64::new(scale / norm, 0.0);
    }
    out
}

/// Least `r` such that a random rank-`r` perturbation makes `M` invertible.
pub fn min_rank_regularizer(m: &DMatrix<Complex64>, trials: usize, seed: u64) -> Result<usize, DiscreteError> {
    let n = m.nrows();
    if n == 0 || n != m.ncols() || n > 12 {
        return Err(DiscreteError::InvalidArgument("matrix must be square with 1 ≤ n ≤ 12"));
    }
    if trials < 5 {
        return Err(DiscreteError::InvalidArgument("at least five trials are required"));
    }
    let scale = m.norm() + 1.0;
    for r in 0..=n {
        let successes = (0..trials)
            .filter(|&t| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((r as u64) << 32) ^ t as u64);
                let pert = if r == 0 { m.clone() } else { m + random_rank(&mut rng, n, r, scale) };
                normalized_det(&pert) > TOL_DET
            })
            .count();
        if 5 * successes >= 4 * trials {
            return Ok(r);
        }
        if 5 * successes > trials {
            return Err(DiscreteError::Inconclusive { rank: r, successes, trials });
        }
    }
    Err(DiscreteError::Inconclusive { rank: n, successes: 0, trials })
}

/// Random `n×n` matrix of rank `n - nullity`, as a product of two random factors.
pub fn planted_nullity(n: usize, nullity: usize, seed: u64) -> Result<DMatrix<Complex64>, DiscreteError> {
    if n == 0 || nullity > n {
        return Err(DiscreteError::InvalidArgument("need 0 ≤ nullity ≤ n and n ≥ 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = n - nullity;
    let mut sample = || Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let left = DMatrix::<Complex64>::from_fn(n, k, |_, _| sample());
    let right = DMatrix::<Complex64>::from_fn(k, n, |_, _| sample());
    Ok(left * right)
}

/// Number of singular values below `rel · σ_max` (all of them when `M = 0`).
pub fn svd_nullity(m: &DMatrix<Complex64>, rel: f64) -> usize {
    let sv = m.clone().svd(false, false).singular_values;
    let top = sv.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return sv.len();
    }
    sv.iter().filter(|&&s| s <= rel * top).count()
}

/// The 3×3 nilpotent Jordan block.
pub fn jordan3() -> DMatrix<Complex64> {
    let mut m = DMatrix::<Complex64>::zeros(3, 3);
    m[(0, 1)] = Complex64::new(1.0, 0.0);
    m[(1, 2)] = Complex64::new(1.0, 0.0);
    m
}
