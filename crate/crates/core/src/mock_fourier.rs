//! Mock Fourier analysis: the generating polynomial, Dirichlet kernels,
//! coefficients, and partial sums.
//!
//! For a triple (R, B, L) with scale τ the generating trigonometric
//! polynomial is `m_τ(x) = Σ_{l∈L} e^{2πi⟨τl, x⟩}` (so m_τ(0) = N). The
//! Dirichlet kernel of order n factorizes over the level structure,
//! `D_n(x) = Σ_{λ∈τΛ_n} e^{2πi⟨λ,x⟩} = ∏_{k=0}^{n} m_τ(Rᵏx)`,
//! which gives three interchangeable evaluation modes: the direct spectral
//! sum, the telescoping product, and a log-domain product along exactly
//! reduced orbits for very large orders. Partial sums of f against the
//! orthonormal family e_λ, λ ∈ τΛ_n, are computed either coefficient by
//! coefficient or through the kernel; both paths share one quadrature rule.

use num::complex::Complex64;
use num::traits::Euclid;
use num::Zero;

use crate::affine_ifs::{integrate, DigitSet, DigitStream, OrbitEncoder, QuadratureRule};
use crate::hadamard::HadamardTriple;
use crate::rational::{frac, rat_int, to_f64, Rat, RatVec};
use crate::util::{exp2pi, frac_f64, frac_int_dot};
use crate::{Error, Result};

/// Product-mode factors below this magnitude are reported as exact zeros.
pub const ZERO_FACTOR_TOL: f64 = 1e-15;

/// Orbit-mode magnitudes are clipped here before taking logs.
pub const LOG_CLIP: f64 = 1e-300;

/// Digit window used to represent orbit points exactly.
pub const ORBIT_WINDOW: usize = 48;

// ---------------------------------------------------------------------------
// The generating polynomial m_τ
// ---------------------------------------------------------------------------

/// A sum of unit exponentials with integer frequencies:
/// p(x) = Σ_j e^{2πi⟨ν_j, x⟩}.
#[derive(Clone, Debug)]
pub struct TrigPolynomial {
    freqs: Vec<Vec<i64>>,
}

impl TrigPolynomial {
    /// From explicit integer frequency vectors (a single frequency is legal;
    /// ν = {0} gives the constant polynomial 1).
    pub fn new(freqs: Vec<Vec<i64>>) -> Result<Self> {
        let dim = match freqs.first() {
            Some(f) => f.len(),
            None => return Err(Error::DegenerateDigitSet),
        };
        if let Some(bad) = freqs.iter().find(|f| f.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: bad.len(),
            });
        }
        Ok(TrigPolynomial { freqs })
    }

    /// The generating polynomial m_τ of a digit set: frequencies τ·l, l ∈ L.
    pub fn from_digits(l: &DigitSet, tau: i64) -> Result<Self> {
        if tau == 0 {
            return Err(Error::ZeroScale);
        }
        let freqs = l
            .digits()
            .iter()
            .map(|d| {
                d.iter()
                    .map(|&c| c.checked_mul(tau).ok_or(Error::Unreliable {
                        reason: "scale overflow building the generating polynomial".to_string(),
                    }))
                    .collect::<Result<Vec<i64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TrigPolynomial { freqs })
    }

    pub fn dim(&self) -> usize {
        self.freqs[0].len()
    }

    pub fn freqs(&self) -> &[Vec<i64>] {
        &self.freqs
    }

    /// Evaluate at a real point. Phases ⟨ν, x⟩ are reduced mod 1 through
    /// exact integer-times-double arithmetic, so the value is ℤᵈ-periodic to
    /// the last bit.
    pub fn eval(&self, x: &[f64]) -> Complex64 {
        debug_assert_eq!(x.len(), self.dim());
        let mut sum = Complex64::zero();
        for f in &self.freqs {
            sum += exp2pi(frac_int_dot(f, x));
        }
        sum
    }

    /// Evaluate at an exact rational point (phases reduced mod 1 in ℚ).
    pub fn eval_rational(&self, x: &RatVec) -> Complex64 {
        debug_assert_eq!(x.0.len(), self.dim());
        let mut sum = Complex64::zero();
        for f in &self.freqs {
            let phase: Rat = f.iter().zip(&x.0).map(|(&c, v)| rat_int(c) * v).sum();
            sum += exp2pi(to_f64(&frac(&phase)));
        }
        sum
    }
}

/// m_τ of a validated triple.
pub fn m_tau(triple: &HadamardTriple) -> TrigPolynomial {
    TrigPolynomial::from_digits(triple.l_digits(), triple.tau()).expect("validated scale")
}

// ---------------------------------------------------------------------------
// Dirichlet kernels
// ---------------------------------------------------------------------------

/// How a kernel value was computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelMode {
    /// Explicit sum over the enumerated spectrum level.
    Direct,
    /// Telescoping product of generating-polynomial factors.
    Product,
}

/// A single kernel evaluation D_n(x).
#[derive(Clone, Debug)]
pub struct KernelEvaluation {
    pub order: usize,
    pub value: Complex64,
    /// Sum of factor log-magnitudes in product mode, ln|value| in direct
    /// mode; −∞ when a factor vanished.
    pub log_magnitude: f64,
    pub mode: KernelMode,
    /// Index k of the first factor with |m_τ(Rᵏx)| < [`ZERO_FACTOR_TOL`],
    /// product mode only.
    pub zero_factor: Option<usize>,
}

/// D_n(x) as the explicit spectral sum (N^{n+1} terms, budget-capped).
pub fn dirichlet_direct(
    triple: &HadamardTriple,
    n: usize,
    x: &[f64],
    budget: usize,
) -> Result<KernelEvaluation> {
    let freqs = triple.spectrum_level(n, budget)?;
    let mut sum = Complex64::zero();
    for lambda in &freqs {
        sum += exp2pi(frac_int_dot(lambda, x));
    }
    let value = sum;
    Ok(KernelEvaluation {
        order: n,
        value,
        log_magnitude: value.norm().ln(),
        mode: KernelMode::Direct,
        zero_factor: None,
    })
}

/// D_n(x) as ∏_{k=0}^{n} m_τ(Rᵏx), the trajectory reduced mod 1 every step.
pub fn dirichlet_product(triple: &HadamardTriple, n: usize, x: &[f64]) -> KernelEvaluation {
    let poly = m_tau(triple);
    let mut y: Vec<f64> = x.iter().map(|&c| frac_f64(c)).collect();
    let mut value = Complex64::new(1.0, 0.0);
    let mut log_mag = 0.0f64;
    let mut zero_factor = None;
    for k in 0..=n {
        let factor = poly.eval(&y);
        let mag = factor.norm();
        if mag < ZERO_FACTOR_TOL && zero_factor.is_none() {
            zero_factor = Some(k);
        }
        value *= factor;
        log_mag += mag.ln();
        if k < n {
            let next = triple.ifs().matrix().entries();
            let mut z = vec![0.0f64; y.len()];
            for (i, row) in next.iter().enumerate() {
                let mut acc = 0.0;
                for (j, &c) in row.iter().enumerate() {
                    acc += c as f64 * y[j];
                }
                z[i] = frac_f64(acc);
            }
            y = z;
        }
    }
    if zero_factor.is_some() {
        value = Complex64::zero();
        log_mag = f64::NEG_INFINITY;
    }
    KernelEvaluation {
        order: n,
        value,
        log_magnitude: log_mag,
        mode: KernelMode::Product,
        zero_factor,
    }
}

/// Product-mode kernel at an exact rational point: the trajectory
/// frac(Rᵏx) stays in ℚ, so zero factors are detected exactly.
pub fn dirichlet_product_rational(
    triple: &HadamardTriple,
    n: usize,
    x: &RatVec,
) -> KernelEvaluation {
    let poly = m_tau(triple);
    let mut y = x.frac();
    let mut value = Complex64::new(1.0, 0.0);
    let mut log_mag = 0.0f64;
    let mut zero_factor = None;
    for k in 0..=n {
        let factor = poly.eval_rational(&y);
        let mag = factor.norm();
        if mag < ZERO_FACTOR_TOL && zero_factor.is_none() {
            zero_factor = Some(k);
        }
        value *= factor;
        log_mag += mag.ln();
        if k < n {
            y = triple.ifs().matrix().mul_vec(&y).frac();
        }
    }
    if zero_factor.is_some() {
        value = Complex64::zero();
        log_mag = f64::NEG_INFINITY;
    }
    KernelEvaluation {
        order: n,
        value,
        log_magnitude: log_mag,
        mode: KernelMode::Product,
        zero_factor,
    }
}

/// Cumulative kernel log-magnitudes along a μ-generic orbit.
#[derive(Clone, Debug)]
pub struct OrbitLog {
    /// cumulative[n] = Σ_{k=0}^{n} log|m_τ(frac(Rᵏx − x_b))|, n = 0..=n_max.
    pub cumulative: Vec<f64>,
    /// Steps whose factor magnitude was clipped at [`LOG_CLIP`].
    pub clipped: usize,
}

/// log|D_n(x − x_b)| for n = 0..=n_max, where x is realized by `stream`
/// and x_b is the fixed anchor of `anchor_digit` (a fixed point of the
/// expanding map mod 1, so the shift rides along the orbit unchanged).
///
/// Orbit points are windows of `ORBIT_WINDOW` digits updated on integer
/// numerators over a fixed denominator; no Rᵏ magnification ever touches
/// floating point.
pub fn dirichlet_orbit_log(
    triple: &HadamardTriple,
    stream: &DigitStream,
    anchor_digit: &[i64],
    n_max: usize,
) -> Result<OrbitLog> {
    let ifs = triple.ifs();
    let poly = m_tau(triple);
    let xb = ifs.fixed_anchor(anchor_digit)?.frac();
    let mut enc = OrbitEncoder::new(ifs, stream, ORBIT_WINDOW);
    // Common denominator for y_k − x_b.
    let enc_den = enc.denominator().clone();
    let xb_den = xb
        .0
        .iter()
        .fold(num::BigInt::from(1), |acc, r| num::integer::lcm(acc, r.denom().clone()));
    let den = num::integer::lcm(enc_den.clone(), xb_den);
    let enc_scale = &den / &enc_den;
    let xb_num: Vec<num::BigInt> = xb.0.iter().map(|r| r.numer() * (&den / r.denom())).collect();
    let den_f64 = num::ToPrimitive::to_f64(&den).expect("denominator in f64 range");
    let mut cumulative = Vec::with_capacity(n_max + 1);
    let mut acc = 0.0f64;
    let mut clipped = 0usize;
    let mut arg = vec![0.0f64; ifs.dim()];
    for _ in 0..=n_max {
        for (i, slot) in arg.iter_mut().enumerate() {
            let t = (&enc.numerators()[i] * &enc_scale - &xb_num[i]).rem_euclid(&den);
            *slot = num::ToPrimitive::to_f64(&t).expect("numerator below denominator") / den_f64;
        }
        let mag = poly.eval(&arg).norm();
        let safe = if mag < LOG_CLIP {
            clipped += 1;
            LOG_CLIP
        } else {
            mag
        };
        acc += safe.ln();
        cumulative.push(acc);
        enc.advance();
    }
    Ok(OrbitLog { cumulative, clipped })
}

// ---------------------------------------------------------------------------
// Coefficients and partial sums
// ---------------------------------------------------------------------------

/// c_λ = ∫ f(x) e^{−2πi⟨λ,x⟩} dμ(x) over the given quadrature rule.
pub fn mock_coefficient<F: Fn(&[f64]) -> Complex64>(
    f: F,
    lambda: &[i64],
    rule: &QuadratureRule,
) -> Result<Complex64> {
    integrate(
        |x| f(x) * exp2pi(frac_int_dot(lambda, x)).conj(),
        rule,
    )
}

/// All coefficients of the scaled level τΛ_n, in spectrum enumeration order.
pub fn mock_coefficients<F: Fn(&[f64]) -> Complex64>(
    triple: &HadamardTriple,
    f: F,
    n: usize,
    rule: &QuadratureRule,
    budget: usize,
) -> Result<Vec<(Vec<i64>, Complex64)>> {
    let freqs = triple.spectrum_level(n, budget)?;
    let mut out = Vec::with_capacity(freqs.len());
    for lambda in freqs {
        let c = mock_coefficient(&f, &lambda, rule)?;
        out.push((lambda, c));
    }
    Ok(out)
}

/// P_n f(x) = Σ_{λ∈τΛ_n} c_λ e^{2πi⟨λ,x⟩}, coefficient path.
pub fn partial_sum<F: Fn(&[f64]) -> Complex64>(
    triple: &HadamardTriple,
    f: F,
    n: usize,
    x: &[f64],
    rule: &QuadratureRule,
    budget: usize,
) -> Result<Complex64> {
    let coeffs = mock_coefficients(triple, f, n, rule, budget)?;
    let mut sum = Complex64::zero();
    for (lambda, c) in &coeffs {
        sum += c * exp2pi(frac_int_dot(lambda, x));
    }
    Ok(sum)
}

/// P_n f(x) through the kernel: ∫ f(t)·D_n(x − t) dμ(t).
pub fn partial_sum_kernel<F: Fn(&[f64]) -> Complex64>(
    triple: &HadamardTriple,
    f: F,
    n: usize,
    x: &[f64],
    rule: &QuadratureRule,
    budget: usize,
) -> Result<Complex64> {
    // Direct-mode kernel so the two paths share no cancellation structure.
    let mut err = None;
    let v = integrate(
        |t| {
            let diff: Vec<f64> = x.iter().zip(t).map(|(a, b)| a - b).collect();
            match dirichlet_direct(triple, n, &diff, budget) {
                Ok(k) => f(t) * k.value,
                Err(e) => {
                    err = Some(e);
                    Complex64::zero()
                }
            }
        },
        rule,
    )?;
    match err {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

/// P_n f at every quadrature node at once (coefficient path, one coefficient
/// pass shared across nodes). Returned in node order.
pub fn partial_sum_discrete<F: Fn(&[f64]) -> Complex64>(
    triple: &HadamardTriple,
    f: F,
    n: usize,
    rule: &QuadratureRule,
    budget: usize,
) -> Result<Vec<Complex64>> {
    let coeffs = mock_coefficients(triple, f, n, rule, budget)?;
    let mut out = Vec::with_capacity(rule.len());
    for x in rule.nodes_f64() {
        let mut sum = Complex64::zero();
        for (lambda, c) in &coeffs {
            sum += c * exp2pi(frac_int_dot(lambda, x));
        }
        out.push(sum);
    }
    Ok(out)
}

/// Metric of convergence in measure between two node-sampled functions:
/// mean of min(|u − v|, 1) under the equal-weight node measure.
pub fn l0_distance(u: &[Complex64], v: &[Complex64]) -> f64 {
    assert_eq!(u.len(), v.len());
    assert!(!u.is_empty());
    let total: f64 = u
        .iter()
        .zip(v)
        .map(|(a, b)| (a - b).norm().min(1.0))
        .sum();
    total / u.len() as f64
}
