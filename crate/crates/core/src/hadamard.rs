//! Hadamard triples, τ-scaled spectra, and the Fourier transform of μ.
//!
//! A triple (R, B, L) is Hadamard when the N×N matrix
//! `H = N^{−1/2} [e^{2πi⟨R⁻¹b, l⟩}]` (rows l ∈ L, columns b ∈ B) is unitary.
//! Such triples make the exponentials indexed by the level sets
//! Λₙ = Σ_{k=0}^{n} (Rᵗ)ᵏ L orthonormal in L²(μ), and this stays true for the
//! τ-scaled family τΛₙ with integer τ coprime to the construction. The module
//! validates unitarity exactly, enumerates scaled levels in deterministic
//! order, and evaluates μ̂ both in floating point and along an exact-rational
//! path for integer frequencies.

use std::collections::HashSet;

use num::complex::Complex64;
use num::Zero;

use crate::affine_ifs::AffineIfs;
use crate::rational::{frac, rat_int, to_f64, Rat, RatVec};
use crate::util::{exp2pi, frac_f64};
use crate::{Error, Result};

/// Unitarity tolerance on the max-norm defect of H*H − I.
pub const UNITARY_TOL: f64 = 1e-12;

/// Test whether (R, B, L) is a Hadamard triple.
///
/// Returns the max-norm defect ‖H*H − I‖ together with the verdict
/// `defect < UNITARY_TOL`. The phases ⟨R⁻¹b, l⟩ are reduced mod 1 in exact
/// rational arithmetic before any trigonometry.
pub fn check_unitary(
    matrix: &crate::affine_ifs::ExpansionMatrix,
    b: &crate::affine_ifs::DigitSet,
    l: &crate::affine_ifs::DigitSet,
) -> Result<(bool, f64)> {
    if b.len() != l.len() {
        return Err(Error::CardinalityMismatch {
            b: b.len(),
            l: l.len(),
        });
    }
    if matrix.dim() != b.dim() || matrix.dim() != l.dim() {
        return Err(Error::DimensionMismatch {
            expected: matrix.dim(),
            got: if matrix.dim() != b.dim() {
                b.dim()
            } else {
                l.dim()
            },
        });
    }
    let n = b.len();
    let scale = 1.0 / (n as f64).sqrt();
    // h[row l][col b]
    let mut h = vec![vec![Complex64::zero(); n]; n];
    for (i, lv) in l.digits().iter().enumerate() {
        for (j, bv) in b.digits().iter().enumerate() {
            let rinv_b = matrix.inverse().mul_vec(&RatVec::from_ints(bv));
            let phase: Rat = rinv_b
                .0
                .iter()
                .zip(lv)
                .map(|(r, &c)| r * rat_int(c))
                .sum();
            h[i][j] = exp2pi(to_f64(&frac(&phase))) * scale;
        }
    }
    let mut defect = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            // (H*H)_{ij} = Σ_k conj(h[k][i]) h[k][j]
            let mut g = Complex64::zero();
            for row in &h {
                g += row[i].conj() * row[j];
            }
            if i == j {
                g -= 1.0;
            }
            defect = defect.max(g.norm());
        }
    }
    Ok((defect < UNITARY_TOL, defect))
}

/// A validated Hadamard triple (R, B, L) with a nonzero integer scale τ.
#[derive(Clone, Debug)]
pub struct HadamardTriple {
    ifs: AffineIfs,
    l: DigitSetL,
    tau: i64,
    defect: f64,
}

type DigitSetL = crate::affine_ifs::DigitSet;

impl HadamardTriple {
    pub fn new(ifs: AffineIfs, l: DigitSetL, tau: i64) -> Result<Self> {
        if tau == 0 {
            return Err(Error::ZeroScale);
        }
        let (ok, defect) = check_unitary(ifs.matrix(), ifs.digits(), &l)?;
        if !ok {
            return Err(Error::NotHadamard {
                defect,
                tol: UNITARY_TOL,
            });
        }
        Ok(HadamardTriple {
            ifs,
            l,
            tau,
            defect,
        })
    }

    /// One-dimensional convenience constructor.
    pub fn new_1d(r: i64, b: &[i64], l: &[i64], tau: i64) -> Result<Self> {
        let matrix = crate::affine_ifs::ExpansionMatrix::validate(vec![vec![r]])?;
        let bset = crate::affine_ifs::DigitSet::new(b.iter().map(|&x| vec![x]).collect())?;
        let lset = crate::affine_ifs::DigitSet::new(l.iter().map(|&x| vec![x]).collect())?;
        let ifs = AffineIfs::new(matrix, bset)?;
        HadamardTriple::new(ifs, lset, tau)
    }

    pub fn ifs(&self) -> &AffineIfs {
        &self.ifs
    }

    pub fn l_digits(&self) -> &DigitSetL {
        &self.l
    }

    pub fn tau(&self) -> i64 {
        self.tau
    }

    /// Max-norm unitarity defect recorded at validation time.
    pub fn defect(&self) -> f64 {
        self.defect
    }

    pub fn dim(&self) -> usize {
        self.ifs.dim()
    }

    /// The scaled level set τΛₙ, Λₙ = Σ_{k=0}^{n} (Rᵗ)ᵏ L, with N^{n+1}
    /// elements in lexicographic digit-word order (k = 0 digit most
    /// significant). Fails if the unscaled level has a collision.
    pub fn spectrum_level(&self, n: usize, budget: usize) -> Result<Vec<Vec<i64>>> {
        spectrum_level_raw(
            &self.ifs.matrix().transpose_entries(),
            self.l.digits(),
            self.tau,
            n,
            budget,
        )
    }
}

/// Level-set enumeration on raw integer data (see [`HadamardTriple::spectrum_level`]).
pub(crate) fn spectrum_level_raw(
    rt: &[Vec<i64>],
    l_digits: &[Vec<i64>],
    tau: i64,
    n: usize,
    budget: usize,
) -> Result<Vec<Vec<i64>>> {
    let dim = rt.len();
    let count = (l_digits.len() as u128)
        .checked_pow(n as u32 + 1)
        .unwrap_or(u128::MAX);
    if count > budget as u128 {
        return Err(Error::BudgetExceeded {
            requested: count,
            budget,
        });
    }
    let overflow = || Error::Unreliable {
        reason: "integer overflow enumerating the spectrum level".to_string(),
    };
    // (Rᵗ)^k·l for k = 0..=n, all in checked i64 arithmetic.
    let mut terms: Vec<Vec<Vec<i64>>> = Vec::with_capacity(n + 1);
    let mut scaled: Vec<Vec<i64>> = l_digits.to_vec();
    for _ in 0..=n {
        terms.push(scaled.clone());
        let mut next = Vec::with_capacity(scaled.len());
        for v in &scaled {
            let mut w = vec![0i64; dim];
            for i in 0..dim {
                let mut acc = 0i64;
                for j in 0..dim {
                    acc = acc
                        .checked_add(rt[i][j].checked_mul(v[j]).ok_or_else(overflow)?)
                        .ok_or_else(overflow)?;
                }
                w[i] = acc;
            }
            next.push(w);
        }
        scaled = next;
    }
    // Prepend digits from k = n down to 0 so the k = 0 digit ends up most
    // significant in the enumeration index.
    let mut level: Vec<Vec<i64>> = vec![vec![0i64; dim]];
    for k in (0..=n).rev() {
        let mut next = Vec::with_capacity(level.len() * l_digits.len());
        for term in &terms[k] {
            for x in &level {
                let mut y = vec![0i64; dim];
                for i in 0..dim {
                    y[i] = term[i].checked_add(x[i]).ok_or_else(overflow)?;
                }
                next.push(y);
            }
        }
        level = next;
    }
    let distinct: HashSet<&Vec<i64>> = level.iter().collect();
    if distinct.len() != level.len() {
        return Err(Error::DegenerateSpectrum {
            level: n,
            distinct: distinct.len(),
            expected: level.len(),
        });
    }
    for v in &mut level {
        for c in v.iter_mut() {
            *c = c.checked_mul(tau).ok_or_else(overflow)?;
        }
    }
    Ok(level)
}

/// μ̂(ξ) ≈ ∏_{k=1}^{K} M_B((Rᵗ)^{−k}ξ), M_B(η) = (1/N) Σ_b e^{2πi⟨b,η⟩}.
pub fn mu_hat(ifs: &AffineIfs, xi: &[f64], truncation_k: usize) -> Complex64 {
    assert_eq!(xi.len(), ifs.dim());
    let inv = ifs.matrix().inverse();
    let dim = ifs.dim();
    // (R⁻¹)ᵗ in doubles (exact for the small denominators in play).
    let inv_t: Vec<Vec<f64>> = (0..dim)
        .map(|i| (0..dim).map(|j| to_f64(&inv.rows[j][i])).collect())
        .collect();
    let n = ifs.digits().len() as f64;
    let mut y = xi.to_vec();
    let mut product = Complex64::new(1.0, 0.0);
    for _ in 0..truncation_k {
        let next: Vec<f64> = (0..dim)
            .map(|i| (0..dim).map(|j| inv_t[i][j] * y[j]).sum())
            .collect();
        y = next;
        let mut factor = Complex64::zero();
        for b in ifs.digits().digits() {
            let arg: f64 = b.iter().zip(&y).map(|(&c, v)| c as f64 * v).sum();
            factor += exp2pi(frac_f64(arg));
        }
        product *= factor / n;
    }
    product
}

/// μ̂ at an integer frequency with every phase reduced mod 1 exactly.
pub fn mu_hat_int(ifs: &AffineIfs, xi: &[i64], truncation_k: usize) -> Complex64 {
    assert_eq!(xi.len(), ifs.dim());
    let inv = ifs.matrix().inverse();
    let dim = ifs.dim();
    let inv_t: Vec<Vec<Rat>> = (0..dim)
        .map(|i| (0..dim).map(|j| inv.rows[j][i].clone()).collect())
        .collect();
    let n = ifs.digits().len() as f64;
    let mut y = RatVec::from_ints(xi);
    let mut product = Complex64::new(1.0, 0.0);
    for _ in 0..truncation_k {
        let next: Vec<Rat> = (0..dim)
            .map(|i| (0..dim).map(|j| &inv_t[i][j] * &y.0[j]).sum())
            .collect();
        y = RatVec(next);
        let mut factor = Complex64::zero();
        for b in ifs.digits().digits() {
            let phase: Rat = b.iter().zip(&y.0).map(|(&c, v)| rat_int(c) * v).sum();
            factor += exp2pi(to_f64(&frac(&phase)));
        }
        product *= factor / n;
    }
    product
}

/// Largest |⟨e_λ, e_λ'⟩| = |μ̂(λ' − λ)| over distinct pairs of the scaled
/// level τΛₙ. Zero for an exact spectrum up to floating-point residue.
pub fn orthonormality_defect(
    triple: &HadamardTriple,
    n: usize,
    truncation_k: usize,
    budget: usize,
) -> Result<f64> {
    let freqs = triple.spectrum_level(n, budget)?;
    let pairs = (freqs.len() as u128) * (freqs.len() as u128 - 1) / 2;
    if pairs > budget as u128 {
        return Err(Error::BudgetExceeded {
            requested: pairs,
            budget,
        });
    }
    let dim = triple.dim();
    let mut defect = 0.0f64;
    for i in 0..freqs.len() {
        for j in (i + 1)..freqs.len() {
            let diff: Vec<i64> = (0..dim).map(|c| freqs[j][c] - freqs[i][c]).collect();
            let v = mu_hat_int(triple.ifs(), &diff, truncation_k).norm();
            defect = defect.max(v);
        }
    }
    Ok(defect)
}
