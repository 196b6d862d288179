//! Experiment configuration: a JSON file describing one triple and the
//! depths, tolerances, and seeds of every command. Defaults are materialized
//! on load so the echoed config shows exactly what ran.

use serde::{Deserialize, Serialize};

use mflab_core::affine_ifs::{AffineIfs, AnchorPolicy, DigitSet, ExpansionMatrix};
use mflab_core::hadamard::HadamardTriple;

/// One experiment = one triple plus run parameters. Field names `d`, `R`,
/// `B`, `L` mirror the construction (R expansion matrix, B digit set,
/// L frequency set).
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub d: usize,
    #[serde(rename = "R")]
    pub r: Vec<Vec<i64>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<i64>>,
    #[serde(rename = "L")]
    pub l: Vec<Vec<i64>>,
    /// Spectrum scale τ.
    #[serde(default = "default_tau")]
    pub tau: i64,
    /// Cylinder quadrature depth m (N^m nodes).
    #[serde(default = "default_quadrature_m")]
    pub quadrature_m: usize,
    /// Orbit length for Birkhoff averages.
    #[serde(default = "default_orbit_n")]
    pub orbit_n: usize,
    /// Highest kernel order checked by the recursion part of kernel-check,
    /// and the growth-fit depth ceiling.
    #[serde(default = "default_kernel_n_max")]
    pub kernel_n_max: usize,
    /// Cross-check points for kernel-check.
    #[serde(default = "default_kernel_check_points")]
    pub kernel_check_points: usize,
    /// Factor count K in measure-transform truncations.
    #[serde(default = "default_truncation_k")]
    pub truncation_k: usize,
    /// Level n enumerated by the spectrum command.
    #[serde(default = "default_spectrum_level")]
    pub spectrum_level: usize,
    /// Level n whose exponentials the ortho command tests pairwise.
    #[serde(default = "default_ortho_level")]
    pub ortho_level: usize,
    /// Thresholds for the tail command (increasing).
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
    #[serde(default = "default_tail_samples")]
    pub tail_samples: usize,
    /// Tail depth; when absent it is derived from the measured indicator as
    /// ceil(3·log(tail_target_alpha)/logΔ̂).
    #[serde(default)]
    pub tail_n_max: Option<usize>,
    #[serde(default = "default_tail_target_alpha")]
    pub tail_target_alpha: f64,
    /// Atoms of ν for the tail command, each a comma-separated vector of
    /// exact fractions (e.g. "8/3"). Default: the fixed anchor of the digit
    /// with the largest measured indicator.
    #[serde(default)]
    pub atoms: Option<Vec<String>>,
    /// Growth-fit depth.
    #[serde(default = "default_growth_n_max")]
    pub growth_n_max: usize,
    /// Magnitudes below this are clipped before logs in quadrature/orbit
    /// integrands.
    #[serde(default = "default_clip_epsilon")]
    pub clip_epsilon: f64,
    #[serde(default = "default_anchor")]
    pub anchor: AnchorPolicy,
    #[serde(default)]
    pub seed: u64,
    /// Enumeration budget (spectrum points, quadrature nodes, pair counts).
    #[serde(default = "default_budget")]
    pub budget: usize,
    /// The classification lemma assumes μ is doubling; recorded with the
    /// verdict.
    #[serde(default = "default_doubling_assumed")]
    pub doubling_assumed: bool,
    /// Output directory (CLI --out overrides).
    #[serde(default)]
    pub out_dir: Option<String>,
}

fn default_tau() -> i64 {
    1
}
fn default_quadrature_m() -> usize {
    12
}
fn default_orbit_n() -> usize {
    100_000
}
fn default_kernel_n_max() -> usize {
    200
}
fn default_kernel_check_points() -> usize {
    100
}
fn default_truncation_k() -> usize {
    40
}
fn default_spectrum_level() -> usize {
    2
}
fn default_ortho_level() -> usize {
    2
}
fn default_alphas() -> Vec<f64> {
    vec![10.0, 100.0, 1000.0, 10000.0]
}
fn default_tail_samples() -> usize {
    10_000
}
fn default_tail_target_alpha() -> f64 {
    1000.0
}
fn default_growth_n_max() -> usize {
    10_000
}
fn default_clip_epsilon() -> f64 {
    1e-300
}
fn default_anchor() -> AnchorPolicy {
    AnchorPolicy::Center
}
fn default_budget() -> usize {
    mflab_core::DEFAULT_BUDGET
}
fn default_doubling_assumed() -> bool {
    true
}

impl ExperimentConfig {
    /// Build and validate the triple this config describes. Every command
    /// runs this before touching anything else.
    pub fn triple(&self) -> mflab_core::Result<HadamardTriple> {
        let matrix = ExpansionMatrix::validate(self.r.clone())?;
        if matrix.dim() != self.d {
            return Err(mflab_core::Error::DimensionMismatch {
                expected: self.d,
                got: matrix.dim(),
            });
        }
        let digits = DigitSet::new(self.b.clone())?;
        let freqs = DigitSet::new(self.l.clone())?;
        let ifs = AffineIfs::new(matrix, digits)?;
        HadamardTriple::new(ifs, freqs, self.tau)
    }
}
