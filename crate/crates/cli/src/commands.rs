//! Command implementations and report emission.
//!
//! Every command validates the triple first, writes its reports into the
//! output directory, and returns the list of files written. All randomness
//! descends from the config seed, so identical configs produce byte-identical
//! payloads; wall-clock time appears only in the manifest.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use mflab_core::affine_ifs::{doubling_scan, DigitStream};
use mflab_core::divergence::{
    classify, delta_birkhoff, delta_quadrature, growth_rate, suggested_tail_depth,
    tail_distribution, DeltaEstimate,
};
use mflab_core::hadamard::{orthonormality_defect, HadamardTriple};
use mflab_core::mock_fourier::{dirichlet_direct, dirichlet_product, m_tau};
use mflab_core::rational::RatVec;
use mflab_core::util::{child_seed, frac_f64, uniform_f64};

use crate::config::ExperimentConfig;

/// Spectrum convention named in every output file.
pub const CONVENTION: &str =
    "Λ_n = Σ_{k=0}^{n} (Rᵗ)^k L; reported spectra are τ·Λ_n; level n has N^{n+1} points";

/// Failure carrying the exit-code class: 1 validation, 2 numeric, 3 I/O.
#[derive(Debug)]
pub enum CliError {
    Invalid(String),
    Core(mflab_core::Error),
    Io { path: PathBuf, source: std::io::Error },
}

impl From<mflab_core::Error> for CliError {
    fn from(e: mflab_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use mflab_core::Error::*;
        match self {
            CliError::Invalid(_) => 1,
            CliError::Io { .. } => 3,
            CliError::Core(e) => match e {
                NotExpansive { .. } | Singular | NotSquare { .. } | DimensionMismatch { .. }
                | DegenerateDigitSet | BadDigitIndex { .. } | UnknownDigit { .. }
                | CardinalityMismatch { .. } | NotHadamard { .. } | ZeroScale
                | NonSymmetric { .. } => 1,
                ShiftPastEnd { .. } | SingularShift | BudgetExceeded { .. }
                | NonFinite { .. } | DegenerateSpectrum { .. } | MethodDisagreement { .. }
                | Unreliable { .. } => 2,
            },
        }
    }

    pub fn kind(&self) -> String {
        match self {
            CliError::Invalid(_) => "invalid_config".to_string(),
            CliError::Io { .. } => "io".to_string(),
            CliError::Core(e) => {
                let debug = format!("{e:?}");
                let name = debug.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("error");
                let mut snake = String::new();
                for (i, c) in name.char_indices() {
                    if c.is_uppercase() {
                        if i > 0 {
                            snake.push('_');
                        }
                        snake.extend(c.to_lowercase());
                    } else {
                        snake.push(c);
                    }
                }
                snake
            }
        }
    }

    pub fn message(&self) -> String {
        match self {
            CliError::Invalid(m) => m.clone(),
            CliError::Io { path, source } => format!("{}: {source}", path.display()),
            CliError::Core(e) => e.to_string(),
        }
    }

    /// The machine-readable form printed to stderr.
    pub fn to_json(&self) -> String {
        let body = serde_json::json!({
            "error": self.kind(),
            "message": self.message(),
            "exit_code": self.exit_code(),
        });
        serde_json::to_string(&body).expect("error serialization")
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn write_file(dir: &Path, name: &str, contents: &str) -> CliResult<PathBuf> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> CliResult<PathBuf> {
    let mut body = serde_json::to_string_pretty(value).map_err(|e| CliError::Invalid(format!(
        "report serialization failed: {e}"
    )))?;
    body.push('\n');
    write_file(dir, name, &body)
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct ValidationReport<'a> {
    convention: &'static str,
    d: usize,
    #[serde(rename = "R")]
    r: &'a [Vec<i64>],
    #[serde(rename = "B")]
    b: &'a [Vec<i64>],
    #[serde(rename = "L")]
    l: &'a [Vec<i64>],
    tau: i64,
    unitary: bool,
    unitarity_defect: f64,
    eigenvalue_moduli: Vec<f64>,
    symmetric: bool,
}

pub fn cmd_validate(
    config: &ExperimentConfig,
    triple: &HadamardTriple,
    out: &Path,
) -> CliResult<Vec<PathBuf>> {
    let report = ValidationReport {
        convention: CONVENTION,
        d: config.d,
        r: &config.r,
        b: &config.b,
        l: &config.l,
        tau: config.tau,
        unitary: true,
        unitarity_defect: triple.defect(),
        eigenvalue_moduli: triple.ifs().matrix().eigen_moduli().to_vec(),
        symmetric: triple.ifs().matrix().is_symmetric(),
    };
    let path = write_json(out, "validation_report.json", &report)?;
    println!(
        "valid triple: unitarity defect {:.3e}, eigenvalue moduli {:?}",
        report.unitarity_defect, report.eigenvalue_moduli
    );
    Ok(vec![path])
}

// ---------------------------------------------------------------------------
// spectrum
// ---------------------------------------------------------------------------

pub fn cmd_spectrum(
    config: &ExperimentConfig,
    triple: &HadamardTriple,
    out: &Path,
) -> CliResult<Vec<PathBuf>> {
    let freqs = triple.spectrum_level(config.spectrum_level, config.budget)?;
    let mut csv = format!("# convention: {CONVENTION}\nindex,lambda\n");
    for (i, lambda) in freqs.iter().enumerate() {
        let joined = lambda
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(" ");
        let _ = writeln!(csv, "{i},{joined}");
    }
    let path = write_file(out, "spectrum.csv", &csv)?;
    println!(
        "spectrum level {}: {} frequencies",
        config.spectrum_level,
        freqs.len()
    );
    Ok(vec![path])
}

// ---------------------------------------------------------------------------
// kernel-check
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct KernelCheckReport {
    convention: &'static str,
    tau: i64,
    cross_check_orders: usize,
    cross_check_points: usize,
    max_cross_relative_defect: f64,
    recursion_orders: usize,
    max_recursion_relative_defect: f64,
}

pub fn cmd_kernel_check(
    config: &ExperimentConfig,
    triple: &HadamardTriple,
    out: &Path,
) -> CliResult<Vec<PathBuf>> {
    // direct spectral sums against factored products on seeded points
    let cross_orders = 6usize;
    let mut max_cross = 0.0f64;
    for n in 0..=cross_orders {
        for i in 0..config.kernel_check_points as u64 {
            let point: Vec<f64> = (0..config.d)
                .map(|c| uniform_f64(child_seed(config.seed, n as u64 * 8 + c as u64), i))
                .collect();
            let a = dirichlet_direct(triple, n, &point, config.budget)?;
            let b = dirichlet_product(triple, n, &point);
            let rel = (a.value - b.value).norm() / (1.0 + a.value.norm());
            max_cross = max_cross.max(rel);
        }
    }
    // the one-step recursion at full depth on a few points
    let poly = m_tau(triple);
    let entries = triple.ifs().matrix().entries().to_vec();
    let mut max_rec = 0.0f64;
    for i in 0..3u64 {
        let point: Vec<f64> = (0..config.d)
            .map(|c| uniform_f64(child_seed(config.seed, 91 + c as u64), i))
            .collect();
        for n in 0..config.kernel_n_max {
            let lhs = dirichlet_product(triple, n + 1, &point).value;
            let mapped: Vec<f64> = entries
                .iter()
                .map(|row| {
                    frac_f64(
                        row.iter()
                            .zip(&point)
                            .map(|(&c, &x)| c as f64 * x)
                            .sum::<f64>(),
                    )
                })
                .collect();
            let rhs = poly.eval(&point) * dirichlet_product(triple, n, &mapped).value;
            let rel = (lhs - rhs).norm() / (1.0 + lhs.norm());
            max_rec = max_rec.max(rel);
        }
    }
    let report = KernelCheckReport {
        convention: CONVENTION,
        tau: config.tau,
        cross_check_orders: cross_orders,
        cross_check_points: config.kernel_check_points,
        max_cross_relative_defect: max_cross,
        recursion_orders: config.kernel_n_max,
        max_recursion_relative_defect: max_rec,
    };
    let path = write_json(out, "kernel_check_report.json", &report)?;
    println!(
        "kernel check: cross defect {max_cross:.3e} (orders ≤ {cross_orders}), \
         recursion defect {max_rec:.3e} (orders ≤ {})",
        config.kernel_n_max
    );
    Ok(vec![path])
}

// ---------------------------------------------------------------------------
// ortho
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct OrthoReport {
    convention: &'static str,
    tau: i64,
    level: usize,
    truncation_k: usize,
    max_offdiagonal: f64,
}

pub fn cmd_ortho(
    config: &ExperimentConfig,
    triple: &HadamardTriple,
    out: &Path,
) -> CliResult<Vec<PathBuf>> {
    let defect = orthonormality_defect(triple, config.ortho_level, config.truncation_k, config.budget)?;
    let report = OrthoReport {
        convention: CONVENTION,
        tau: config.tau,
        level: config.ortho_level,
        truncation_k: config.truncation_k,
        max_offdiagonal: defect,
    };
    let path = write_json(out, "ortho_report.json", &report)?;
    println!(
        "orthonormality defect {defect:.3e} at level {} (K = {})",
        config.ortho_level, config.truncation_k
    );
    Ok(vec![path])
}

// ---------------------------------------------------------------------------
// delta
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct DeltaEntry {
    b: Vec<i64>,
    log_delta_quadrature: f64,
    log_delta_birkhoff: f64,
    stderr: f64,
    clipped_quadrature: usize,
    clipped_birkhoff: usize,
    flagged_unreliable: bool,
}

#[derive(Serialize)]
struct DeltaReport {
    convention: &'static str,
    tau: i64,
    quadrature_depth: usize,
    orbit_length: usize,
    seed: u64,
    entries: Vec<DeltaEntry>,
}

fn both_estimates(
    config: &ExperimentConfig,
    triple: &HadamardTriple,
    b: &[i64],
    idx: usize,
) -> CliResult<(DeltaEstimate, DeltaEstimate)> {
    let quad = delta_quadrature(
        triple,
        b,
        config.quadrature_m,
        config.clip_epsilon,
        config.anchor,
        config.budget,
    )?;
    let orbit = delta_birkhoff(triple, b, config.orbit_n, child_seed(config.seed, idx as u64))?;
    Ok((quad, orbit))
}

pub fn cmd_delta(
    config: &ExperimentConfig,
    triple: &HadamardTriple,
    out: &Path,
) -> CliResult<Vec<PathBuf>> {
    let mut entries = Vec::new();
    for (idx, b) in triple.ifs().digits().digits().to_vec().iter().enumerate() {
        let (quad, orbit) = both_estimates(config, triple, b, idx)?;
        entries.push(DeltaEntry {
            b: b.clone(),
            log_delta_quadrature: quad.log_delta,
            log_delta_birkhoff: orbit.log_delta,
            stderr: orbit.stderr.unwrap_or(0.0),
            clipped_quadrature: quad.clipped_count,
            clipped_birkhoff: orbit.clipped_count,
            flagged_unreliable: quad.flagged_unreliable,
        });
    }
    let report = DeltaReport {
        convention: CONVENTION,
        tau: config.tau,
        quadrature_depth: config.quadrature_m,
        orbit_length: config.orbit_n,
        seed: config.seed,
        entries,
    };
    let path = write_json(out, "delta_report.json", &report)?;
    for e in &report.entries {
        println!(
            "b = {:?}: logΔ quadrature {:.5}, orbit {:.5} ± {:.5}",
            e.b, e.log_delta_quadrature, e.log_delta_birkhoff, e.stderr
        );
    }
    Ok(vec![path])
}

// ---------------------------------------------------------------------------
// growth
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct GrowthEntry {
    b: Vec<i64>,
    slope: f64,
    intercept: f64,
    max_deviation: f64,
    window_start: usize,
    window_end: usize,
    clipped: usize,
    seed: u64,
}

#[derive(Serialize)]
struct CliGrowthReport {
    convention: &'static str,
    tau: i64,
    n_max: usize,
    entries: Vec<GrowthEntry>,
}

pub fn cmd_growth(
    config: &ExperimentConfig,
    triple: &HadamardTriple,
    out: &Path,
) -> CliResult<Vec<PathBuf>> {
    let mut entries = Vec::new();
    for (idx, b) in triple.ifs().digits().digits().to_vec().iter().enumerate() {
        let stream_seed = child_seed(config.seed, idx as u64);
        let stream = DigitStream::seeded(stream_seed, triple.ifs().digits());
        let g = growth_rate(triple, b, &stream, config.growth_n_max)?;
        entries.push(GrowthEntry {
            b: b.clone(),
            slope: g.slope,
            intercept: g.intercept,
            max_deviation: g.max_deviation,
            window_start: g.window_start,
            window_end: g.window_end,
            clipped: g.clipped,
            seed: stream_seed,
        });
    }
    let report = CliGrowthReport {
        convention: CONVENTION,
        tau: config.tau,
        n_max: config.growth_n_max,
        entries,
    };
    let path = write_json(out, "growth_report.json", &report)?;
    for e in &report.entries {
        println!("b = {:?}: slope {:.5} over [{}, {}]", e.b, e.slope, e.window_start, e.window_end);
    }
    Ok(vec![path])
}

// ---------------------------------------------------------------------------
// tail
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct TailReport {
    convention: &'static str,
    tau: i64,
    atoms: Vec<String>,
    indicator_digit: Vec<i64>,
    indicator_log_delta: f64,
    n_max: usize,
    alphas: Vec<f64>,
    masses: Vec<f64>,
    ci_low: Vec<f64>,
    ci_high: Vec<f64>,
    sample_count: usize,
    seed: u64,
}

pub fn cmd_tail(
    config: &ExperimentConfig,
    triple: &HadamardTriple,
    out: &Path,
) -> CliResult<Vec<PathBuf>> {
    if config.alphas.is_empty() {
        return Err(CliError::Invalid("alphas must be non-empty".to_string()));
    }
    // the measured indicator picks the default atom and the default depth
    let mut best: Option<(Vec<i64>, f64)> = None;
    for b in triple.ifs().digits().digits().to_vec() {
        let est = delta_quadrature(
            triple,
            &b,
            config.quadrature_m,
            config.clip_epsilon,
            config.anchor,
            config.budget,
        )?;
        if best.as_ref().map(|(_, v)| est.log_delta > *v).unwrap_or(true) {
            best = Some((b, est.log_delta));
        }
    }
    let (best_digit, log_delta) = best.expect("non-empty digit set");
    let atoms: Vec<RatVec> = match &config.atoms {
        Some(list) => list
            .iter()
            .map(|s| {
                let v = RatVec::parse(s)
                    .ok_or_else(|| CliError::Invalid(format!("unparseable atom {s:?}")))?;
                if v.dim() != config.d {
                    return Err(CliError::Invalid(format!(
                        "atom {s:?} has dimension {} (want {})",
                        v.dim(),
                        config.d
                    )));
                }
                Ok(v)
            })
            .collect::<CliResult<Vec<_>>>()?,
        None => vec![triple.ifs().fixed_anchor(&best_digit)?],
    };
    let n_max = match config.tail_n_max {
        Some(n) => n,
        None => suggested_tail_depth(config.tail_target_alpha.ln(), log_delta).ok_or_else(|| {
            CliError::Core(mflab_core::Error::Unreliable {
                reason: format!(
                    "measured logΔ = {log_delta:.4} predicts no growth; set tail_n_max explicitly"
                ),
            })
        })?,
    };
    let curve = tail_distribution(
        triple,
        &atoms,
        n_max,
        &config.alphas,
        config.tail_samples,
        config.seed,
    )?;
    let csv = format!("# convention: {CONVENTION}\n{}", curve.to_csv());
    let csv_path = write_file(out, "tail_curve.csv", &csv)?;
    let report = TailReport {
        convention: CONVENTION,
        tau: config.tau,
        atoms: curve.atoms.clone(),
        indicator_digit: best_digit,
        indicator_log_delta: log_delta,
        n_max,
        alphas: curve.alphas.clone(),
        masses: curve.masses.clone(),
        ci_low: curve.ci_low.clone(),
        ci_high: curve.ci_high.clone(),
        sample_count: curve.sample_count,
        seed: curve.seed,
    };
    let json_path = write_json(out, "tail_report.json", &report)?;
    println!(
        "tail masses {:?} at α = {:?} (n_max {n_max}, {} samples)",
        report.masses, report.alphas, report.sample_count
    );
    Ok(vec![csv_path, json_path])
}

// ---------------------------------------------------------------------------
// classify
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct TripleEcho<'a> {
    d: usize,
    #[serde(rename = "R")]
    r: &'a [Vec<i64>],
    #[serde(rename = "B")]
    b: &'a [Vec<i64>],
    #[serde(rename = "L")]
    l: &'a [Vec<i64>],
}

#[derive(Serialize)]
struct ClassifyReportOut<'a> {
    convention: &'static str,
    triple: TripleEcho<'a>,
    tau: i64,
    doubling_assumed: bool,
    quadrature_depth: usize,
    orbit_length: usize,
    seed: u64,
    entries: Vec<ClassifyEntryOut>,
    verdict: String,
}

#[derive(Serialize)]
struct ClassifyEntryOut {
    b: Vec<i64>,
    log_delta_quadrature: f64,
    log_delta_birkhoff: f64,
    stderr: f64,
    clipped_count: usize,
    tolerance: f64,
    satisfied: bool,
}

pub fn cmd_classify(
    config: &ExperimentConfig,
    triple: &HadamardTriple,
    out: &Path,
) -> CliResult<Vec<PathBuf>> {
    let report = classify(
        triple,
        config.quadrature_m,
        config.orbit_n,
        config.seed,
        config.anchor,
        config.clip_epsilon,
        config.budget,
    )?;
    let verdict = if report.satisfied {
        "divergence criterion satisfied"
    } else {
        "divergence criterion not satisfied"
    };
    let out_report = ClassifyReportOut {
        convention: CONVENTION,
        triple: TripleEcho {
            d: config.d,
            r: &config.r,
            b: &config.b,
            l: &config.l,
        },
        tau: report.tau,
        doubling_assumed: config.doubling_assumed,
        quadrature_depth: report.quadrature_depth,
        orbit_length: report.orbit_length,
        seed: report.seed,
        entries: report
            .entries
            .iter()
            .map(|e| ClassifyEntryOut {
                b: e.digit.clone(),
                log_delta_quadrature: e.log_delta_quadrature,
                log_delta_birkhoff: e.log_delta_birkhoff,
                stderr: e.stderr,
                clipped_count: e.clipped_quadrature + e.clipped_birkhoff,
                tolerance: e.tolerance,
                satisfied: e.satisfied,
            })
            .collect(),
        verdict: verdict.to_string(),
    };
    let path = write_json(out, "classify_report.json", &out_report)?;
    println!("verdict: {verdict}");
    Ok(vec![path])
}

// ---------------------------------------------------------------------------
// doubling
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct DoublingOut {
    convention: &'static str,
    depth: usize,
    centers: usize,
    radii: Vec<f64>,
    max_ratio: Option<f64>,
    skipped_empty: usize,
    min_node_gap: Option<f64>,
    spacing_warning: bool,
    doubling_assumed: bool,
}

pub fn cmd_doubling(
    config: &ExperimentConfig,
    triple: &HadamardTriple,
    out: &Path,
) -> CliResult<Vec<PathBuf>> {
    let rule = triple
        .ifs()
        .build_quadrature(config.quadrature_m, config.anchor, config.budget)?;
    let stride = (rule.len() / 64).max(1);
    let centers: Vec<Vec<f64>> = rule.nodes_f64().iter().step_by(stride).cloned().collect();
    let radii: Vec<f64> = (1..=10).map(|k| 2f64.powi(-k)).collect();
    let report = doubling_scan(&rule, &centers, &radii);
    let csv = format!("# convention: {CONVENTION}\n{}", report.to_csv());
    let csv_path = write_file(out, "doubling.csv", &csv)?;
    let summary = DoublingOut {
        convention: CONVENTION,
        depth: config.quadrature_m,
        centers: centers.len(),
        radii,
        max_ratio: report.max_ratio,
        skipped_empty: report.skipped_empty,
        min_node_gap: report.min_node_gap,
        spacing_warning: report.spacing_warning,
        doubling_assumed: config.doubling_assumed,
    };
    let json_path = write_json(out, "doubling_report.json", &summary)?;
    println!(
        "doubling: max ratio {:?} over {} centers ({} skipped empty balls)",
        summary.max_ratio, summary.centers, summary.skipped_empty
    );
    Ok(vec![csv_path, json_path])
}

// ---------------------------------------------------------------------------
// manifest
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct Manifest<'a> {
    convention: &'static str,
    command: &'a str,
    tool_version: &'static str,
    wall_time_seconds: f64,
    seed: u64,
    files: Vec<String>,
    config: &'a ExperimentConfig,
}

pub fn write_manifest(
    out: &Path,
    command: &str,
    config: &ExperimentConfig,
    wall_time_seconds: f64,
    files: &[PathBuf],
) -> CliResult<PathBuf> {
    let manifest = Manifest {
        convention: CONVENTION,
        command,
        tool_version: env!("CARGO_PKG_VERSION"),
        wall_time_seconds,
        seed: config.seed,
        files: files
            .iter()
            .map(|p| {
                p.file_name()
                    .map(|n| n.to_string_lossy().into_owned())
                    .unwrap_or_default()
            })
            .collect(),
        config,
    };
    write_json(out, "manifest.json", &manifest)
}
