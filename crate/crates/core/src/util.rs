//! Deterministic random numbers and numerically careful mod-1 helpers.
//!
//! Randomness is counter-based throughout: the k-th draw of a seeded
//! generator is a pure function of (seed, k), so digit k of a stream is
//! addressable without generating its predecessors and parallel workers can
//! draw independently without shared state.

use num::complex::Complex64;

/// 64-bit finalizer of the splitmix64 generator.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

const GOLDEN: u64 = 0x9e3779b97f4a7c15;

/// The k-th output of splitmix64 seeded with `seed` — random access into the
/// sequence a sequential generator would produce.
pub fn counter_u64(seed: u64, k: u64) -> u64 {
    mix64(seed.wrapping_add(k.wrapping_add(1).wrapping_mul(GOLDEN)))
}

/// Derive a child seed, used to split one master seed into independent streams.
pub fn child_seed(seed: u64, index: u64) -> u64 {
    // Two rounds keep child sequences decorrelated from the parent counter.
    mix64(counter_u64(seed, index) ^ GOLDEN)
}

/// Uniform draw in [0, 1) from the counter generator (53-bit resolution).
pub fn uniform_f64(seed: u64, k: u64) -> f64 {
    (counter_u64(seed, k) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform draw in {0, …, n−1} by the multiply-shift reduction (bias ≤ n/2⁶⁴).
pub fn uniform_index(seed: u64, k: u64, n: usize) -> usize {
    ((counter_u64(seed, k) as u128 * n as u128) >> 64) as usize
}

/// Fractional part of a double, in [0, 1).
pub fn frac_f64(x: f64) -> f64 {
    let f = x - x.floor();
    // x just below an integer can round to 1.0; fold it back.
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// e^{2πit} for t already reduced into [0, 1).
pub fn exp2pi(t: f64) -> Complex64 {
    let (s, c) = (std::f64::consts::TAU * t).sin_cos();
    Complex64::new(c, s)
}

/// Exact fractional part of k·x for integer k and double x.
///
/// k·x is formed in 128-bit integer arithmetic on the mantissa of x, so the
/// reduction mod 1 loses nothing even when k·x is far too large for the
/// 53-bit significand; only the final quotient is rounded once. A plain
/// `(k as f64 * x).fract()` would lose |k·x|·ε absolute accuracy, which at
/// the spectrum magnitudes used here is the difference between 1e-16 and
/// 1e-11 phase errors.
pub fn frac_int_mul(k: i64, x: f64) -> f64 {
    if k == 0 || x == 0.0 || !x.is_finite() {
        return 0.0;
    }
    let bits = x.abs().to_bits();
    let exp_raw = (bits >> 52) & 0x7ff;
    let mant = if exp_raw == 0 {
        bits & ((1u64 << 52) - 1)
    } else {
        (bits & ((1u64 << 52) - 1)) | (1u64 << 52)
    };
    // |x| = mant · 2^e with mant < 2^53.
    let e = if exp_raw == 0 {
        -1074i64
    } else {
        exp_raw as i64 - 1075
    };
    let sign = if x < 0.0 { -1i128 } else { 1i128 };
    let p: i128 = k as i128 * mant as i128 * sign; // |p| < 2^116
    if e >= 0 {
        return 0.0; // k·x is an exact integer
    }
    let shift = -e as u32;
    if shift >= 117 {
        // |k·x| < 1/2: no integer part to strip, the direct product is safe.
        return frac_f64(k as f64 * x);
    }
    let modulus = 1i128 << shift;
    let r = p.rem_euclid(modulus);
    r as f64 / modulus as f64
}

/// Exact fractional part of λ·x for an integer vector λ and a double point x.
pub fn frac_int_dot(lambda: &[i64], x: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (&k, &xi) in lambda.iter().zip(x) {
        acc += frac_int_mul(k, xi);
    }
    frac_f64(acc)
}

/// Ordinary least-squares line fit; returns (slope, intercept).
pub fn least_squares(points: impl Iterator<Item = (f64, f64)> + Clone) -> (f64, f64) {
    let n = points.clone().count() as f64;
    let (mut sx, mut sy) = (0.0, 0.0);
    for (x, y) in points.clone() {
        sx += x;
        sy += y;
    }
    let (mx, my) = (sx / n, sy / n);
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in points {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Wilson 95% score interval for a binomial proportion.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959963984540054; // 97.5% normal quantile
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}
