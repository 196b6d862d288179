//! Expansive integer matrices, digit sets, and the self-affine measure.
//!
//! The iterated function system `φ_b(x) = R⁻¹(x + b)` for `b` in a digit set
//! `B` has a compact attractor carrying a unique balanced invariant measure
//! `μ`. Points of the attractor are encoded symbolically by digit sequences
//! through `h(b₁b₂…) = Σ R⁻ⁱ b_i`; the left shift on sequences corresponds to
//! the expanding map `x ↦ Rx mod 1` on the attractor. This module provides
//! the exact-rational encoding, fixed anchors of single digits, a cylinder
//! quadrature rule for integrating against `μ`, seeded digit streams for
//! Monte Carlo sampling, and a ball-counting doubling diagnostic.

use num::bigint::BigInt;
use num::complex::Complex64;
use num::traits::Euclid;
use num::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::rational::{rat_int, to_f64, Rat, RatMat, RatVec};
use crate::util::{child_seed, uniform_index};
use crate::{Error, Result};

/// Margin on |eigenvalue| − 1 below which a matrix is rejected as not expansive.
pub const EXPANSIVE_MARGIN: f64 = 1e-9;

// ---------------------------------------------------------------------------
// Expansion matrices
// ---------------------------------------------------------------------------

/// A validated expansive integer matrix R (every eigenvalue modulus > 1).
#[derive(Clone, Debug)]
pub struct ExpansionMatrix {
    dim: usize,
    entries: Vec<Vec<i64>>,
    inverse: RatMat,
    eigen_moduli: Vec<f64>,
}

impl ExpansionMatrix {
    /// Validate a square integer matrix: nonzero determinant and all
    /// eigenvalue moduli > 1 + margin, computed from the characteristic
    /// polynomial (exact coefficients, floating-point roots).
    pub fn validate(entries: Vec<Vec<i64>>) -> Result<Self> {
        let dim = entries.len();
        if dim == 0 || entries.iter().any(|row| row.len() != dim) {
            return Err(Error::NotSquare {
                rows: dim,
                cols: entries.first().map_or(0, |r| r.len()),
            });
        }
        let coeffs = char_poly(&entries);
        if coeffs[0].is_zero() {
            return Err(Error::Singular);
        }
        // An eigenvalue of ±1 makes det(R ∓ I) vanish; that is decidable
        // exactly and catches repeated boundary eigenvalues the float root
        // finder would blur.
        for sign in [1i64, -1] {
            let mut shifted = entries.clone();
            for (i, row) in shifted.iter_mut().enumerate() {
                row[i] -= sign;
            }
            if char_poly(&shifted)[0].is_zero() {
                return Err(Error::NotExpansive { modulus: 1.0 });
            }
        }
        let coeffs_f64: Vec<f64> = coeffs.iter().map(to_f64).collect();
        let mut eigen_moduli: Vec<f64> = poly_roots(&coeffs_f64).iter().map(|z| z.norm()).collect();
        eigen_moduli.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if let Some(&lo) = eigen_moduli.first() {
            if lo <= 1.0 + EXPANSIVE_MARGIN {
                return Err(Error::NotExpansive { modulus: lo });
            }
        }
        let inverse = RatMat::from_ints(&entries)
            .inverse()
            .expect("nonzero determinant");
        Ok(ExpansionMatrix {
            dim,
            entries,
            inverse,
            eigen_moduli,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Vec<i64>] {
        &self.entries
    }

    /// Eigenvalue moduli in ascending order.
    pub fn eigen_moduli(&self) -> &[f64] {
        &self.eigen_moduli
    }

    /// Exact R⁻¹.
    pub fn inverse(&self) -> &RatMat {
        &self.inverse
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.dim).all(|i| (0..self.dim).all(|j| self.entries[i][j] == self.entries[j][i]))
    }

    /// Integer transpose Rᵗ as rows.
    pub fn transpose_entries(&self) -> Vec<Vec<i64>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.entries[j][i]).collect())
            .collect()
    }

    /// R·v for an exact rational point.
    pub fn mul_vec(&self, v: &RatVec) -> RatVec {
        RatVec(
            self.entries
                .iter()
                .map(|row| row.iter().zip(&v.0).map(|(&a, b)| rat_int(a) * b).sum())
                .collect(),
        )
    }

    /// Rᵗ·x in doubles.
    pub fn transpose_mul_f64(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.entries[j][i] as f64 * x[j]).sum())
            .collect()
    }
}

/// Coefficients of det(xI − A), exact, monic: index k holds the x^k coefficient.
fn char_poly(entries: &[Vec<i64>]) -> Vec<Rat> {
    // Faddeev–LeVerrier recursion in exact rational arithmetic.
    let d = entries.len();
    let a = RatMat::from_ints(entries);
    let mut coeffs = vec![Rat::zero(); d + 1];
    coeffs[d] = Rat::one();
    let mut mk = RatMat::identity(d);
    for k in 1..=d {
        let am = a.mul_mat(&mk);
        let trace: Rat = (0..d).map(|i| am.rows[i][i].clone()).sum();
        let c = -trace / rat_int(k as i64);
        coeffs[d - k] = c.clone();
        mk = am;
        for i in 0..d {
            mk.rows[i][i] = &mk.rows[i][i] + &c;
        }
    }
    coeffs
}

/// All complex roots of a monic polynomial by Durand–Kerner iteration.
fn poly_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let d = coeffs.len() - 1;
    if d == 0 {
        return Vec::new();
    }
    let radius = 1.0 + coeffs[..d].iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (1..=d)
        .map(|j| seed.powu(j as u32) * radius)
        .collect();
    let eval = |z: Complex64| {
        let mut p = Complex64::new(0.0, 0.0);
        for &c in coeffs.iter().rev() {
            p = p * z + c;
        }
        p
    };
    for _ in 0..1000 {
        let mut max_step = 0.0f64;
        for i in 0..d {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..d {
                if j != i {
                    denom *= roots[i] - roots[j];
                }
            }
            let step = eval(roots[i]) / denom;
            roots[i] -= step;
            max_step = max_step.max(step.norm());
        }
        if max_step < 1e-13 * radius {
            break;
        }
    }
    roots
}

// ---------------------------------------------------------------------------
// Digit sets, words, streams
// ---------------------------------------------------------------------------

/// A set of N ≥ 2 pairwise distinct integer digit vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DigitSet {
    dim: usize,
    digits: Vec<Vec<i64>>,
}

impl DigitSet {
    pub fn new(digits: Vec<Vec<i64>>) -> Result<Self> {
        if digits.len() < 2 {
            return Err(Error::DegenerateDigitSet);
        }
        let dim = digits[0].len();
        if digits.iter().any(|d| d.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: digits.iter().map(|d| d.len()).find(|&l| l != dim).unwrap(),
            });
        }
        let mut sorted = digits.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != digits.len() {
            return Err(Error::DegenerateDigitSet);
        }
        Ok(DigitSet { dim, digits })
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        false // N ≥ 2 by construction
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn digit(&self, index: usize) -> &[i64] {
        &self.digits[index]
    }

    pub fn digits(&self) -> &[Vec<i64>] {
        &self.digits
    }

    pub fn index_of(&self, digit: &[i64]) -> Option<usize> {
        self.digits.iter().position(|d| d == digit)
    }

    /// Componentwise mean of the digit vectors, exact.
    pub fn mean(&self) -> RatVec {
        let n = rat_int(self.digits.len() as i64);
        RatVec(
            (0..self.dim)
                .map(|c| {
                    let sum: Rat = self.digits.iter().map(|d| rat_int(d[c])).sum();
                    sum / &n
                })
                .collect(),
        )
    }
}

/// A finite sequence of indices into a digit set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DigitWord {
    indices: Vec<usize>,
}

impl DigitWord {
    pub fn new(indices: Vec<usize>, set: &DigitSet) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= set.len()) {
            return Err(Error::BadDigitIndex {
                index: bad,
                size: set.len(),
            });
        }
        Ok(DigitWord { indices })
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// Drop the first k digits.
    pub fn shift(&self, k: usize) -> Result<DigitWord> {
        if k > self.indices.len() {
            return Err(Error::ShiftPastEnd {
                len: self.indices.len(),
                k,
            });
        }
        Ok(DigitWord {
            indices: self.indices[k..].to_vec(),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum StreamKind {
    /// I.i.d. uniform digits from the counter generator.
    Seeded { seed: u64 },
    /// Every digit equal — a degenerate diagnostic stream (orbit pinned at a
    /// fixed point of the corresponding map).
    Constant { index: usize },
}

/// An infinite digit sequence: digit k is a pure function of (seed, position + k).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DigitStream {
    kind: StreamKind,
    num_digits: usize,
    position: u64,
}

impl DigitStream {
    pub fn seeded(seed: u64, set: &DigitSet) -> Self {
        DigitStream {
            kind: StreamKind::Seeded { seed },
            num_digits: set.len(),
            position: 0,
        }
    }

    /// The constant stream of one repeated digit index.
    pub fn constant(index: usize, set: &DigitSet) -> Result<Self> {
        if index >= set.len() {
            return Err(Error::BadDigitIndex {
                index,
                size: set.len(),
            });
        }
        Ok(DigitStream {
            kind: StreamKind::Constant { index },
            num_digits: set.len(),
            position: 0,
        })
    }

    /// Digit index at offset k from the current position.
    pub fn digit(&self, k: u64) -> usize {
        match self.kind {
            StreamKind::Seeded { seed } => {
                uniform_index(seed, self.position + k, self.num_digits)
            }
            StreamKind::Constant { index } => index,
        }
    }

    /// Advance the position by k without re-seeding.
    pub fn shift(&self, k: u64) -> DigitStream {
        DigitStream {
            position: self.position + k,
            ..*self
        }
    }
}

/// H independent deterministic streams derived from one master seed.
pub fn sample_stream(seed: u64, count: usize, set: &DigitSet) -> Vec<DigitStream> {
    (0..count)
        .map(|h| DigitStream::seeded(child_seed(seed, h as u64), set))
        .collect()
}

// ---------------------------------------------------------------------------
// The affine IFS (R, B) and its measure
// ---------------------------------------------------------------------------

/// A validated pair (R, B): the iterated function system φ_b(x) = R⁻¹(x+b).
#[derive(Clone, Debug)]
pub struct AffineIfs {
    matrix: ExpansionMatrix,
    digits: DigitSet,
}

impl AffineIfs {
    pub fn new(matrix: ExpansionMatrix, digits: DigitSet) -> Result<Self> {
        if matrix.dim() != digits.dim() {
            return Err(Error::DimensionMismatch {
                expected: matrix.dim(),
                got: digits.dim(),
            });
        }
        Ok(AffineIfs { matrix, digits })
    }

    pub fn matrix(&self) -> &ExpansionMatrix {
        &self.matrix
    }

    pub fn digits(&self) -> &DigitSet {
        &self.digits
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// The encoding h(b₁…b_m) = Σ_{i=1}^m R⁻ⁱ b_{w_i}, exact.
    pub fn encode(&self, word: &DigitWord) -> RatVec {
        let mut x = RatVec::zero(self.dim());
        for &idx in word.indices().iter().rev() {
            let b = RatVec::from_ints(self.digits.digit(idx));
            x = self.matrix.inverse.mul_vec(&x.add(&b));
        }
        x
    }

    /// Encode the first `depth` digits of a stream.
    pub fn encode_stream(&self, stream: &DigitStream, depth: usize) -> RatVec {
        let indices = (0..depth as u64).map(|k| stream.digit(k)).collect();
        let word = DigitWord { indices };
        self.encode(&word)
    }

    /// Fixed point of x ↦ R⁻¹(x+b): (I − R⁻¹)⁻¹·b = (R − I)⁻¹·R·b, exact.
    pub fn fixed_anchor(&self, digit: &[i64]) -> Result<RatVec> {
        if self.digits.index_of(digit).is_none() {
            return Err(Error::UnknownDigit {
                digit: digit.to_vec(),
            });
        }
        self.fixed_point(&RatVec::from_ints(digit))
    }

    /// Fixed point of x ↦ R⁻¹(x+v) for an arbitrary rational v.
    pub fn fixed_point(&self, v: &RatVec) -> Result<RatVec> {
        let r = RatMat::from_ints(&self.matrix.entries);
        let shifted = r.sub(&RatMat::identity(self.dim()));
        let inv = shifted.inverse().ok_or(Error::SingularShift)?;
        Ok(inv.mul_vec(&r.mul_vec(v)))
    }

    /// Cylinder quadrature at the given depth (N^m nodes, equal weights).
    pub fn build_quadrature(
        &self,
        depth: usize,
        anchor: AnchorPolicy,
        budget: usize,
    ) -> Result<QuadratureRule> {
        assert!(depth >= 1, "quadrature depth must be at least 1");
        let n = self.digits.len() as u128;
        let count = n.checked_pow(depth as u32).unwrap_or(u128::MAX);
        if count > budget as u128 {
            return Err(Error::BudgetExceeded {
                requested: count,
                budget,
            });
        }
        // Lexicographic enumeration: prepending digit b to a depth-(m−1) word
        // maps its node through φ_b, so each level is the φ_b-images of the
        // previous level grouped by leading digit.
        let mut nodes = vec![RatVec::zero(self.dim())];
        for _ in 0..depth {
            let mut next = Vec::with_capacity(nodes.len() * self.digits.len());
            for b in self.digits.digits() {
                let bvec = RatVec::from_ints(b);
                for y in &nodes {
                    next.push(self.matrix.inverse.mul_vec(&y.add(&bvec)));
                }
            }
            nodes = next;
        }
        let anchor_point = match anchor {
            AnchorPolicy::Corner => RatVec::zero(self.dim()),
            AnchorPolicy::Center => self.fixed_point(&self.digits.mean())?,
        };
        if anchor == AnchorPolicy::Center {
            let tail = self.matrix.inverse.pow(depth).mul_vec(&anchor_point);
            for node in &mut nodes {
                *node = node.add(&tail);
            }
        }
        let weight = Rat::new(BigInt::one(), BigInt::from(self.digits.len()).pow(depth as u32));
        let nodes_f64 = nodes.iter().map(RatVec::to_f64_vec).collect();
        Ok(QuadratureRule {
            depth,
            num_digits: self.digits.len(),
            nodes,
            nodes_f64,
            weight,
            anchor,
            anchor_point,
        })
    }
}

/// Where the infinite digit tail of each quadrature node is anchored.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnchorPolicy {
    /// Tail of zeros: nodes are cylinder corners Σ R⁻ⁱ b_{w_i}. Makes the
    /// one-step self-similarity identity exact.
    Corner,
    /// Tail anchored at the fixed point of the mean digit; keeps nodes away
    /// from the rational zeros of trigonometric factors.
    Center,
}

/// Depth-m cylinder discretization of μ: N^m nodes of equal weight N^{−m}.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    depth: usize,
    num_digits: usize,
    nodes: Vec<RatVec>,
    nodes_f64: Vec<Vec<f64>>,
    weight: Rat,
    anchor: AnchorPolicy,
    anchor_point: RatVec,
}

impl QuadratureRule {
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[RatVec] {
        &self.nodes
    }

    pub fn nodes_f64(&self) -> &[Vec<f64>] {
        &self.nodes_f64
    }

    /// The exact common weight N^{−m}.
    pub fn weight(&self) -> &Rat {
        &self.weight
    }

    pub fn anchor(&self) -> AnchorPolicy {
        self.anchor
    }

    pub fn anchor_point(&self) -> &RatVec {
        &self.anchor_point
    }

    /// Reconstruct the digit word of node `index` (lexicographic order).
    pub fn word_of(&self, index: usize) -> Vec<usize> {
        let mut word = vec![0; self.depth];
        let mut rem = index;
        for i in (0..self.depth).rev() {
            word[i] = rem % self.num_digits;
            rem /= self.num_digits;
        }
        word
    }

    /// Exact minimum squared pairwise node distance (brute force; diagnostic).
    pub fn min_gap_squared(&self) -> Option<Rat> {
        let mut best: Option<Rat> = None;
        for i in 0..self.nodes.len() {
            for j in (i + 1)..self.nodes.len() {
                let diff = self.nodes[i].sub(&self.nodes[j]);
                let d2: Rat = diff.0.iter().map(|c| c * c).sum();
                if best.as_ref().is_none_or(|b| &d2 < b) {
                    best = Some(d2);
                }
            }
        }
        best
    }
}

/// Quadrature of a complex integrand: (Σ_w f(x_w)) / N^m, nodes in fixed
/// lexicographic order so results are bit-reproducible.
pub fn integrate<F: FnMut(&[f64]) -> Complex64>(mut f: F, rule: &QuadratureRule) -> Result<Complex64> {
    let mut sum = Complex64::new(0.0, 0.0);
    for (i, x) in rule.nodes_f64.iter().enumerate() {
        let v = f(x);
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::NonFinite {
                index: i,
                word: rule.word_of(i),
            });
        }
        sum += v;
    }
    Ok(sum / rule.nodes_f64.len() as f64)
}

/// Quadrature of an exact rational integrand; every step in rational arithmetic.
pub fn integrate_rational<F: Fn(&RatVec) -> Rat>(f: F, rule: &QuadratureRule) -> Rat {
    let sum: Rat = rule.nodes.iter().map(f).sum();
    sum * &rule.weight
}

// ---------------------------------------------------------------------------
// Doubling diagnostic
// ---------------------------------------------------------------------------

/// One (center, radius) row of a doubling scan.
#[derive(Clone, Debug, Serialize)]
pub struct DoublingEntry {
    pub center: Vec<f64>,
    pub radius: f64,
    pub mass_small: f64,
    pub mass_large: f64,
    /// μ(B(x,2r)) / μ(B(x,r)); `None` when the small ball carries no node.
    pub ratio: Option<f64>,
}

/// Result of a doubling scan: ratio table plus the maximum observed ratio.
#[derive(Clone, Debug, Serialize)]
pub struct DoublingReport {
    pub entries: Vec<DoublingEntry>,
    pub max_ratio: Option<f64>,
    /// Entries skipped because the small ball was empty.
    pub skipped_empty: usize,
    /// Minimum pairwise node distance, when cheap enough to measure.
    pub min_node_gap: Option<f64>,
    /// Set when some requested radius is at or below the node spacing, where
    /// counting estimates stop resolving the measure.
    pub spacing_warning: bool,
}

impl DoublingReport {
    /// Data rows "center;radius;mass_r;mass_2r;ratio" (ratio blank when the
    /// small ball was empty). Center components joined by a space.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("center,radius,mass_r,mass_2r,ratio\n");
        for e in &self.entries {
            let center = e
                .center
                .iter()
                .map(|c| format!("{c}"))
                .collect::<Vec<_>>()
                .join(" ");
            let ratio = e.ratio.map_or(String::new(), |r| format!("{r}"));
            out.push_str(&format!(
                "{center},{},{},{},{ratio}\n",
                e.radius, e.mass_small, e.mass_large, ratio = ratio
            ));
        }
        out
    }
}

/// Estimate μ(B(x,2r))/μ(B(x,r)) by node counting for every (center, radius).
///
/// Balls are closed Euclidean balls. Entries whose small ball captures no
/// node are recorded with `ratio: None` and skipped in the maximum.
pub fn doubling_scan(rule: &QuadratureRule, centers: &[Vec<f64>], radii: &[f64]) -> DoublingReport {
    assert!(radii.iter().all(|&r| r > 0.0), "radii must be positive");
    let total = rule.nodes_f64.len() as f64;
    let mut entries = Vec::with_capacity(centers.len() * radii.len());
    let mut max_ratio: Option<f64> = None;
    let mut skipped = 0usize;
    for center in centers {
        for &r in radii {
            let mut small = 0usize;
            let mut large = 0usize;
            for node in &rule.nodes_f64 {
                let d2: f64 = node
                    .iter()
                    .zip(center)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                let d = d2.sqrt();
                if d <= r {
                    small += 1;
                }
                if d <= 2.0 * r {
                    large += 1;
                }
            }
            let ratio = if small == 0 {
                skipped += 1;
                None
            } else {
                let q = large as f64 / small as f64;
                max_ratio = Some(max_ratio.map_or(q, |m: f64| m.max(q)));
                Some(q)
            };
            entries.push(DoublingEntry {
                center: center.clone(),
                radius: r,
                mass_small: small as f64 / total,
                mass_large: large as f64 / total,
                ratio,
            });
        }
    }
    // Spacing check: with few enough nodes, measure the true minimum gap.
    let min_node_gap = (rule.nodes_f64.len() <= 1 << 12).then(|| {
        let mut best = f64::INFINITY;
        for i in 0..rule.nodes_f64.len() {
            for j in (i + 1)..rule.nodes_f64.len() {
                let d2: f64 = rule.nodes_f64[i]
                    .iter()
                    .zip(&rule.nodes_f64[j])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                best = best.min(d2.sqrt());
            }
        }
        best
    });
    let spacing_warning = match min_node_gap {
        Some(gap) => radii.iter().any(|&r| r <= gap),
        None => false,
    };
    DoublingReport {
        entries,
        max_ratio,
        skipped_empty: skipped,
        min_node_gap,
        spacing_warning,
    }
}

// ---------------------------------------------------------------------------
// Orbit encoder: the numerically stable path to frac(encode(shift^k stream))
// ---------------------------------------------------------------------------

/// Sliding-window encoder for orbits of the expanding map.
///
/// Yields y_k = frac(Σ_{i=1}^{depth} R⁻ⁱ b_{k+i}) for k = 0, 1, 2, … without
/// ever forming Rᵏx in floating point: the update
/// y_{k+1} = frac(R·y_k − b_{k+1} + R^{−depth}·b_{k+depth+1})
/// is carried out on integer numerators over the fixed denominator of
/// R^{−depth}, so every reduction mod 1 is exact and the numbers never grow.
pub struct OrbitEncoder {
    dim: usize,
    r_rows: Vec<Vec<BigInt>>,
    /// numerators of y_k over `den`, each in [0, den)
    num: Vec<BigInt>,
    den: BigInt,
    /// b·den per digit index (the integer shift applied at each step)
    digit_times_den: Vec<Vec<BigInt>>,
    /// numerators of R^{−depth}·b over `den` per digit index
    tail_num: Vec<Vec<BigInt>>,
    stream: DigitStream,
    step: u64,
    depth: usize,
}

impl OrbitEncoder {
    pub fn new(ifs: &AffineIfs, stream: &DigitStream, depth: usize) -> Self {
        assert!(depth >= 1);
        let dim = ifs.dim();
        let inv_pow = ifs.matrix().inverse().pow(depth);
        let den = inv_pow.common_denominator();
        let tail_num = ifs
            .digits()
            .digits()
            .iter()
            .map(|b| {
                let v = inv_pow.mul_vec(&RatVec::from_ints(b));
                v.0.iter()
                    .map(|r| r.numer() * (&den / r.denom()))
                    .collect()
            })
            .collect();
        let digit_times_den = ifs
            .digits()
            .digits()
            .iter()
            .map(|b| b.iter().map(|&c| BigInt::from(c) * &den).collect())
            .collect();
        let r_rows = ifs
            .matrix()
            .entries()
            .iter()
            .map(|row| row.iter().map(|&c| BigInt::from(c)).collect())
            .collect();
        let y0 = ifs.encode_stream(stream, depth).frac();
        let num = y0
            .0
            .iter()
            .map(|r| r.numer() * (&den / r.denom()))
            .collect();
        OrbitEncoder {
            dim,
            r_rows,
            num,
            den,
            digit_times_den,
            tail_num,
            stream: *stream,
            step: 0,
            depth,
        }
    }

    pub fn denominator(&self) -> &BigInt {
        &self.den
    }

    /// Numerators of the current y_k over [`Self::denominator`], each in [0, den).
    pub fn numerators(&self) -> &[BigInt] {
        &self.num
    }

    /// The current y_k as doubles.
    pub fn current_f64(&self) -> Vec<f64> {
        let den = self.den.to_f64().expect("denominator in f64 range");
        self.num
            .iter()
            .map(|n| n.to_f64().expect("numerator in f64 range") / den)
            .collect()
    }

    /// Advance from y_k to y_{k+1}.
    pub fn advance(&mut self) {
        let leaving = self.stream.digit(self.step);
        let entering = self.stream.digit(self.step + self.depth as u64);
        let mut next = Vec::with_capacity(self.dim);
        for i in 0..self.dim {
            let mut acc = BigInt::zero();
            for j in 0..self.dim {
                acc += &self.r_rows[i][j] * &self.num[j];
            }
            acc -= &self.digit_times_den[leaving][i];
            acc += &self.tail_num[entering][i];
            next.push(acc.rem_euclid(&self.den));
        }
        self.num = next;
        self.step += 1;
    }
}
