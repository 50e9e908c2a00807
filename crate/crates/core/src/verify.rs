//! Randomized residual batteries, the regression self-test and deterministic
//! report serialization.

use std::io;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{self, ChainConfig};
use crate::closed_forms;
use crate::determinant::{self, branch_invariance};
use crate::error::{Error, Result};
use crate::kernel;
use crate::model::{check_separation, ModelParams, SpectralPoints, C64, DEFAULT_SEPARATION};
use crate::oracle::{self, MAX_ENUMERATE_L};
use crate::transfer::{self, SpectrumTable};

pub const REPORT_SCHEMA: &str = "vertex-spectra/report/v1";

/// Prefactor used by the Korepin check, in words.
pub const KOREPIN_PINNED_FORM: &str = "c * prod_{k != j} b(lambda_i - mu_k) * prod_{l != i} b(lambda_l - mu_j)";
/// The commonly printed prefactor, reported beside the pinned one.
pub const KOREPIN_PRINTED_FORM: &str = "-c * prod_{l,m = 1..L} b(lambda_l - mu_i) * b(lambda_m - mu_j)";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "camelCase", deny_unknown_fields)]
pub struct Tolerances {
    /// Closed forms and the oracle triangle.
    pub closed_form: f64,
    /// Spectral determinant against the oracle, branch invariance, chain checks.
    pub end_to_end: f64,
    pub korepin: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { closed_form: 1e-10, end_to_end: 1e-8, korepin: 1e-9 }
    }
}

/// Rectangle in the complex plane, `re ∈ [re[0], re[1]]`, `im ∈ [im[0], im[1]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleBox {
    pub re: [f64; 2],
    pub im: [f64; 2],
}

impl SampleBox {
    pub const GAMMA: SampleBox = SampleBox { re: [0.2, 1.2], im: [-0.5, 0.5] };
    pub const POINTS: SampleBox = SampleBox { re: [-1.0, 1.0], im: [-0.5, 0.5] };

    fn draw(&self, rng: &mut impl Rng) -> C64 {
        let u: f64 = rng.random();
        let v: f64 = rng.random();
        C64::new(self.re[0] + (self.re[1] - self.re[0]) * u, self.im[0] + (self.im[1] - self.im[0]) * v)
    }

    fn validate(&self, what: &str) -> Result<()> {
        let ok = self.re.iter().chain(&self.im).all(|x| x.is_finite()) && self.re[0] <= self.re[1] && self.im[0] <= self.im[1];
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!("{what} sampling box is empty or non-finite")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SweepConfig {
    pub lengths: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_gamma_box")]
    pub gamma_box: SampleBox,
    #[serde(default = "default_point_box")]
    pub mu_box: SampleBox,
    #[serde(default = "default_point_box")]
    pub lambda_box: SampleBox,
    #[serde(default = "default_true")]
    pub strict_separation: bool,
    /// Fixed anisotropy; sampled when absent.
    #[serde(default)]
    pub gamma: Option<C64>,
    /// Fixed spectral points, used for every trial of matching length.
    #[serde(default)]
    pub lambda: Option<Vec<C64>>,
    #[serde(default = "default_retry_cap")]
    pub degeneracy_retries: usize,
    #[serde(default)]
    pub report_path: Option<String>,
    #[serde(default)]
    pub summary_path: Option<String>,
}

fn default_gamma_box() -> SampleBox {
    SampleBox::GAMMA
}
fn default_point_box() -> SampleBox {
    SampleBox::POINTS
}
fn default_true() -> bool {
    true
}
fn default_retry_cap() -> usize {
    5
}

/// Attempts at drawing a point set that clears the separation guards.
const MAX_REJECTIONS: usize = 1000;

impl SweepConfig {
    pub fn new(lengths: Vec<usize>, trials: usize, seed: u64) -> Self {
        SweepConfig {
            lengths,
            trials,
            seed,
            tolerances: Tolerances::default(),
            gamma_box: SampleBox::GAMMA,
            mu_box: SampleBox::POINTS,
            lambda_box: SampleBox::POINTS,
            strict_separation: true,
            gamma: None,
            lambda: None,
            degeneracy_retries: default_retry_cap(),
            report_path: None,
            summary_path: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lengths.is_empty() {
            return Err(Error::InvalidParams("no lattice lengths requested".into()));
        }
        if let Some(&l) = self.lengths.iter().find(|&&l| !(2..=transfer::MAX_DENSE_L).contains(&l)) {
            return Err(Error::SizeGuard { what: "verification lattice length", l, max: transfer::MAX_DENSE_L });
        }
        let t = &self.tolerances;
        if ![t.closed_form, t.end_to_end, t.korepin].iter().all(|x| x.is_finite() && *x > 0.0) {
            return Err(Error::InvalidParams("tolerances must be positive".into()));
        }
        self.gamma_box.validate("gamma")?;
        self.mu_box.validate("mu")?;
        self.lambda_box.validate("lambda")?;
        Ok(())
    }

    /// Parses a JSON config; errors carry line, column and the offending field.
    pub fn from_json(text: &str) -> std::result::Result<Self, ConfigError> {
        let cfg: SweepConfig = serde_json::from_str(text).map_err(ConfigError::from_json)?;
        cfg.validate().map_err(|e| ConfigError { line: 0, column: 0, message: e.to_string() })?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("config error at line {line}, column {column}: {message}")]
pub struct ConfigError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ConfigError {
    fn from_json(e: serde_json::Error) -> Self {
        ConfigError { line: e.line(), column: e.column(), message: e.to_string() }
    }
}

/// Grid of anisotropies times lattice lengths; each cell is one verification run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SweepGrid {
    pub gammas: Vec<C64>,
    pub lengths: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_point_box")]
    pub mu_box: SampleBox,
    #[serde(default = "default_point_box")]
    pub lambda_box: SampleBox,
    #[serde(default = "default_true")]
    pub strict_separation: bool,
    #[serde(default = "default_retry_cap")]
    pub degeneracy_retries: usize,
}

impl SweepGrid {
    pub fn from_json(text: &str) -> std::result::Result<Self, ConfigError> {
        let grid: SweepGrid = serde_json::from_str(text).map_err(ConfigError::from_json)?;
        if grid.gammas.is_empty() {
            return Err(ConfigError { line: 0, column: 0, message: "`gammas` must not be empty".into() });
        }
        for cfg in grid.cells() {
            cfg.validate().map_err(|e| ConfigError { line: 0, column: 0, message: e.to_string() })?;
        }
        Ok(grid)
    }

    /// One config per `(γ, L)`, γ-major.
    pub fn cells(&self) -> Vec<SweepConfig> {
        let mut out = Vec::with_capacity(self.gammas.len() * self.lengths.len());
        for &g in &self.gammas {
            for &l in &self.lengths {
                let mut cfg = SweepConfig::new(vec![l], self.trials, self.seed);
                cfg.gamma = Some(g);
                cfg.tolerances = self.tolerances;
                cfg.mu_box = self.mu_box;
                cfg.lambda_box = self.lambda_box;
                cfg.strict_separation = self.strict_separation;
                cfg.degeneracy_retries = self.degeneracy_retries;
                out.push(cfg);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct OracleTriangle {
    pub contract: C64,
    pub izergin: C64,
    pub enumerate: Option<C64>,
    pub izergin_vs_contract: f64,
    pub enumerate_vs_contract: Option<f64>,
    pub enumerate_vs_izergin: Option<f64>,
}

impl OracleTriangle {
    pub fn max_residual(&self) -> f64 {
        [Some(self.izergin_vs_contract), self.enumerate_vs_contract, self.enumerate_vs_izergin]
            .into_iter()
            .flatten()
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BranchReport {
    pub branch: usize,
    pub eigenvalue_at_reference: C64,
    pub kappa0: C64,
    pub det_h: C64,
    pub z: C64,
    /// `|κ₀ det H − Z| / |Z|` against the contraction oracle.
    pub residual: f64,
    pub condition_estimate: f64,
    /// Largest transposition residual of `F_n` over `n = 2..=L`.
    pub symmetry: f64,
    /// `|κ₀ F_L / (f0 Z) − 1|`.
    pub chain_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct KorepinReport {
    pub lambda_index: usize,
    pub mu_index: usize,
    pub residual: f64,
    pub factor: C64,
    pub printed_factor: C64,
    pub printed_ratio: C64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PointMetrics {
    pub oracle: OracleTriangle,
    pub branches: Vec<BranchReport>,
    pub max_end_to_end: f64,
    pub branch_invariance: f64,
    pub max_symmetry: f64,
    pub max_chain_ratio: f64,
    pub korepin: Option<KorepinReport>,
    pub eigenvector_condition: f64,
    pub max_h_condition: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PointStatus {
    Verified,
    Separation,
    Degenerate,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PointReport {
    pub index: usize,
    pub lattice_len: usize,
    pub trial: usize,
    pub status: PointStatus,
    pub passed: bool,
    pub detail: Option<String>,
    pub degenerate_resamples: usize,
    pub gamma: C64,
    pub mu: Vec<C64>,
    pub lambda: Vec<C64>,
    pub metrics: Option<PointMetrics>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ReportSummary {
    pub points: usize,
    pub verified: usize,
    pub separation_skips: usize,
    pub degenerate_resamples: usize,
    pub degenerate_exhausted: usize,
    pub errors: usize,
    pub max_oracle: f64,
    pub max_end_to_end: f64,
    pub max_branch_invariance: f64,
    pub max_symmetry: f64,
    pub max_chain_ratio: f64,
    pub max_korepin: f64,
    pub korepin_pinned_form: &'static str,
    pub korepin_printed_form: &'static str,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct VerificationReport {
    pub schema: &'static str,
    pub seed: u64,
    pub lengths: Vec<usize>,
    pub trials: usize,
    pub tolerances: Tolerances,
    pub strict_separation: bool,
    pub points: Vec<PointReport>,
    pub summary: ReportSummary,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.summary.verdict == Verdict::Pass
    }

    pub fn to_json(&self) -> String {
        to_json_string(self)
    }

    /// One line per point.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "index,L,trial,status,passed,oracle,endToEnd,branchInvariance,symmetry,chainRatio,korepin,eigenvectorCondition,maxHCondition\n",
        );
        for p in &self.points {
            let m = p.metrics.as_ref();
            let f = |x: Option<f64>| x.map(format_float).unwrap_or_default();
            let status = serde_json::to_value(p.status).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                p.index,
                p.lattice_len,
                p.trial,
                status,
                p.passed,
                f(m.map(|m| m.oracle.max_residual())),
                f(m.map(|m| m.max_end_to_end)),
                f(m.map(|m| m.branch_invariance)),
                f(m.map(|m| m.max_symmetry)),
                f(m.map(|m| m.max_chain_ratio)),
                f(m.and_then(|m| m.korepin.as_ref().map(|k| k.residual))),
                f(m.map(|m| m.eigenvector_condition)),
                f(m.map(|m| m.max_h_condition)),
            ));
        }
        out
    }
}

fn relative(x: C64, reference: C64) -> f64 {
    (x - reference).norm() / reference.norm()
}

/// Runs every check at one parameter point.
pub fn verify_point(params: &ModelParams, points: &SpectralPoints, spectrum: &SpectrumTable) -> Result<PointMetrics> {
    let l = params.len();
    let contract = oracle::z_contract(params, points)?.value;
    if !(contract.norm() > 0.0) {
        return Err(Error::Precondition("partition function vanishes at the sampled point".into()));
    }
    let izergin = oracle::z_izergin(params, points)?.value;
    let enumerate = if l <= MAX_ENUMERATE_L { Some(oracle::z_enumerate(params, points)?.value) } else { None };
    let oracle = OracleTriangle {
        contract,
        izergin,
        enumerate,
        izergin_vs_contract: relative(izergin, contract),
        enumerate_vs_contract: enumerate.map(|e| relative(e, contract)),
        enumerate_vs_izergin: enumerate.map(|e| relative(e, izergin)),
    };

    let spectral = determinant::z_spectral_all(params, points, spectrum)?;
    let zs: Vec<C64> = spectral.iter().map(|s| s.z).collect();
    let mut branches = Vec::with_capacity(spectral.len());
    for s in &spectral {
        let config = ChainConfig::new(s.branch);
        let mut symmetry = 0.0f64;
        for n in 2..=l {
            symmetry = symmetry.max(chain::symmetry_residual(params, spectrum, config, &points.values()[..n])?);
        }
        let ratio = chain::fl_vs_z(params, spectrum, config, points)?;
        branches.push(BranchReport {
            branch: s.branch,
            eigenvalue_at_reference: spectrum.eigenvalues()[s.branch],
            kappa0: s.kappa0,
            det_h: s.det_h,
            z: s.z,
            residual: relative(s.z, contract),
            condition_estimate: s.condition,
            symmetry,
            chain_ratio: (s.kappa0 * ratio / config.f0 - 1.0).norm(),
        });
    }

    let korepin = if l >= 2 {
        let (i, j) = (0, l - 1);
        let mut lam = points.values().to_vec();
        lam[i] = params.mu()[j] - params.gamma();
        let special = oracle::points_unchecked(params, lam)?;
        let k = oracle::korepin_residual(params, &special, i, j)?;
        Some(KorepinReport {
            lambda_index: i,
            mu_index: j,
            residual: k.residual,
            factor: k.factor,
            printed_factor: k.printed_factor,
            printed_ratio: k.printed_ratio,
        })
    } else {
        None
    };

    let fold = |f: fn(&BranchReport) -> f64| branches.iter().map(f).fold(0.0, f64::max);
    Ok(PointMetrics {
        max_end_to_end: fold(|b| b.residual),
        branch_invariance: branch_invariance(&zs),
        max_symmetry: fold(|b| b.symmetry),
        max_chain_ratio: fold(|b| b.chain_ratio),
        max_h_condition: fold(|b| b.condition_estimate),
        eigenvector_condition: spectrum.condition(),
        oracle,
        branches,
        korepin,
    })
}

impl PointMetrics {
    pub fn within(&self, tol: &Tolerances) -> bool {
        self.oracle.max_residual() < tol.closed_form
            && self.max_end_to_end < tol.end_to_end
            && self.branch_invariance < tol.end_to_end
            && self.max_symmetry < tol.end_to_end
            && self.max_chain_ratio < tol.end_to_end
            && self.korepin.as_ref().is_none_or(|k| k.residual < tol.korepin)
    }
}

/// Independent stream per `(seed, L, trial)`, so a point does not depend on
/// which other points are in the run.
fn point_rng(seed: u64, l: usize, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((l as u64) << 32) | trial as u64);
    rng
}

struct Draw {
    gamma: C64,
    mu: Vec<C64>,
    lambda: Vec<C64>,
}

fn clears_guards(d: &Draw, tol: f64) -> bool {
    let a_tol = |x: C64| (x + d.gamma).sinh().norm() >= tol;
    check_separation(&d.mu, tol, "mu").is_ok()
        && check_separation(&d.lambda, tol, "lambda").is_ok()
        && d.lambda.iter().all(|&x| {
            d.mu.iter().all(|&m| (x - m).sinh().norm() >= tol && a_tol(x - m))
                && d.lambda.iter().all(|&y| x == y || a_tol(x - y))
        })
        && d.mu.iter().all(|&x| d.mu.iter().all(|&y| x == y || a_tol(x - y)))
}

fn draw(cfg: &SweepConfig, l: usize, rng: &mut ChaCha8Rng) -> Draw {
    let mut attempt = || Draw {
        gamma: cfg.gamma.unwrap_or_else(|| cfg.gamma_box.draw(rng)),
        mu: (0..l).map(|_| cfg.mu_box.draw(rng)).collect(),
        lambda: match &cfg.lambda {
            Some(fixed) if fixed.len() == l => fixed.clone(),
            _ => (0..l).map(|_| cfg.lambda_box.draw(rng)).collect(),
        },
    };
    if !cfg.strict_separation {
        return attempt();
    }
    let mut d = attempt();
    for _ in 0..MAX_REJECTIONS {
        if clears_guards(&d, DEFAULT_SEPARATION) {
            break;
        }
        d = attempt();
    }
    d
}

fn run_point(cfg: &SweepConfig, index: usize, l: usize, trial: usize) -> PointReport {
    let mut rng = point_rng(cfg.seed, l, trial);
    let mut resamples = 0;
    loop {
        let d = draw(cfg, l, &mut rng);
        let mut report = PointReport {
            index,
            lattice_len: l,
            trial,
            status: PointStatus::Verified,
            passed: false,
            detail: None,
            degenerate_resamples: resamples,
            gamma: d.gamma,
            mu: d.mu.clone(),
            lambda: d.lambda.clone(),
            metrics: None,
        };
        let outcome = ModelParams::new(d.gamma, d.mu).and_then(|params| {
            let points = SpectralPoints::new(d.lambda, &params)?;
            let spectrum = transfer::diagonalize_default(&params)?;
            verify_point(&params, &points, &spectrum)
        });
        match outcome {
            Ok(m) => {
                report.passed = m.within(&cfg.tolerances);
                report.metrics = Some(m);
                return report;
            }
            Err(e @ (Error::DegenerateSpectrum(_) | Error::EigenvalueZeroAtMu { .. })) => {
                if resamples >= cfg.degeneracy_retries {
                    report.status = PointStatus::Degenerate;
                    report.detail = Some(e.to_string());
                    return report;
                }
                resamples += 1;
            }
            Err(e @ (Error::Separation { .. } | Error::PoleProximity { .. })) => {
                report.status = PointStatus::Separation;
                report.detail = Some(e.to_string());
                return report;
            }
            Err(e) => {
                report.status = PointStatus::Error;
                report.detail = Some(e.to_string());
                return report;
            }
        }
    }
}

/// Runs the battery over `lengths × trials` points in parallel; the report is
/// assembled in point order.
pub fn run_verify(cfg: &SweepConfig) -> Result<VerificationReport> {
    cfg.validate()?;
    let jobs: Vec<(usize, usize)> = cfg.lengths.iter().flat_map(|&l| (0..cfg.trials).map(move |t| (l, t))).collect();
    let points: Vec<PointReport> = jobs.par_iter().enumerate().map(|(i, &(l, t))| run_point(cfg, i, l, t)).collect();
    let summary = summarize(&points);
    Ok(VerificationReport {
        schema: REPORT_SCHEMA,
        seed: cfg.seed,
        lengths: cfg.lengths.clone(),
        trials: cfg.trials,
        tolerances: cfg.tolerances,
        strict_separation: cfg.strict_separation,
        points,
        summary,
    })
}

/// One grid cell of a sweep: the anisotropy, the lattice length and the
/// summary of its verification run.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SweepRow {
    pub gamma: C64,
    pub lattice_len: usize,
    #[serde(flatten)]
    pub summary: ReportSummary,
}

impl SweepRow {
    pub const CSV_HEADER: &'static str =
        "gammaRe,gammaIm,L,points,verified,separationSkips,degenerateExhausted,errors,oracle,endToEnd,branchInvariance,symmetry,chainRatio,korepin,verdict";

    pub fn to_csv_line(&self) -> String {
        let s = &self.summary;
        let verdict = match s.verdict {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
        };
        [
            format_float(self.gamma.re),
            format_float(self.gamma.im),
            self.lattice_len.to_string(),
            s.points.to_string(),
            s.verified.to_string(),
            s.separation_skips.to_string(),
            s.degenerate_exhausted.to_string(),
            s.errors.to_string(),
            format_float(s.max_oracle),
            format_float(s.max_end_to_end),
            format_float(s.max_branch_invariance),
            format_float(s.max_symmetry),
            format_float(s.max_chain_ratio),
            format_float(s.max_korepin),
            verdict.to_string(),
        ]
        .join(",")
    }
}

/// Runs every cell of the grid in γ-major order.
pub fn run_sweep(grid: &SweepGrid) -> Result<Vec<SweepRow>> {
    grid.cells()
        .into_iter()
        .map(|cfg| {
            let report = run_verify(&cfg)?;
            Ok(SweepRow { gamma: cfg.gamma.unwrap_or_default(), lattice_len: cfg.lengths[0], summary: report.summary })
        })
        .collect()
}

fn summarize(points: &[PointReport]) -> ReportSummary {
    let count = |s: PointStatus| points.iter().filter(|p| p.status == s).count();
    let metrics: Vec<&PointMetrics> = points.iter().filter_map(|p| p.metrics.as_ref()).collect();
    let max = |f: &dyn Fn(&PointMetrics) -> f64| metrics.iter().map(|m| f(m)).fold(0.0, f64::max);
    let failed = points.iter().any(|p| match p.status {
        PointStatus::Verified => !p.passed,
        PointStatus::Separation => false,
        PointStatus::Degenerate | PointStatus::Error => true,
    });
    ReportSummary {
        points: points.len(),
        verified: count(PointStatus::Verified),
        separation_skips: count(PointStatus::Separation),
        degenerate_resamples: points.iter().map(|p| p.degenerate_resamples).sum(),
        degenerate_exhausted: count(PointStatus::Degenerate),
        errors: count(PointStatus::Error),
        max_oracle: max(&|m| m.oracle.max_residual()),
        max_end_to_end: max(&|m| m.max_end_to_end),
        max_branch_invariance: max(&|m| m.branch_invariance),
        max_symmetry: max(&|m| m.max_symmetry),
        max_chain_ratio: max(&|m| m.max_chain_ratio),
        max_korepin: max(&|m| m.korepin.as_ref().map_or(0.0, |k| k.residual)),
        korepin_pinned_form: KOREPIN_PINNED_FORM,
        korepin_printed_form: KOREPIN_PRINTED_FORM,
        verdict: if failed { Verdict::Fail } else { Verdict::Pass },
    }
}

/// Seventeen significant digits, lowercase scientific.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".into()
    }
}

/// JSON formatter writing every float through [`format_float`].
#[derive(Debug, Clone, Copy, Default)]
pub struct FixedFloatFormatter;

impl serde_json::ser::Formatter for FixedFloatFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_float(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Compact JSON with fixed float formatting.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedFloatFormatter);
    value.serialize(&mut ser).expect("in-memory serialization of report types cannot fail");
    String::from_utf8(out).expect("serde_json emits UTF-8")
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SelftestOptions {
    /// Negative control: flips the sign of some `b` weights in the
    /// enumeration oracle used by the first check.
    pub corrupt_weight_sign: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub max_error: f64,
    pub tolerance: f64,
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SelftestReport {
    pub schema: &'static str,
    pub seed: u64,
    pub checks: Vec<CheckOutcome>,
    pub first_failure: Option<&'static str>,
    pub verdict: Verdict,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

pub const SELFTEST_SCHEMA: &str = "vertex-spectra/selftest/v1";

struct Battery {
    rng: ChaCha8Rng,
    checks: Vec<CheckOutcome>,
}

impl Battery {
    fn run(&mut self, name: &'static str, tolerance: f64, f: impl FnOnce(&mut ChaCha8Rng) -> Result<f64>) {
        let outcome = match f(&mut self.rng) {
            Ok(err) => CheckOutcome { name, passed: err <= tolerance, max_error: err, tolerance, detail: None },
            Err(e) => CheckOutcome { name, passed: false, max_error: f64::NAN, tolerance, detail: Some(e.to_string()) },
        };
        self.checks.push(outcome);
    }
}

fn random_params(rng: &mut ChaCha8Rng, l: usize) -> (ModelParams, SpectralPoints) {
    let cfg = SweepConfig::new(vec![l], 1, 0);
    let d = draw(&cfg, l, rng);
    let params = ModelParams::new(d.gamma, d.mu).expect("sampler clears the separation guards");
    let points = SpectralPoints::new(d.lambda, &params).expect("sampler clears the separation guards");
    (params, points)
}

fn uniform_params(rng: &mut ChaCha8Rng) -> Result<ModelParams> {
    ModelParams::allow_coincident_mu(SampleBox::GAMMA.draw(rng), vec![C64::new(0.0, 0.0); 3])
}

fn table_error(computed: &[C64], reference: &[C64]) -> f64 {
    closed_forms::nearest_matches(computed, reference).iter().map(|m| m.1).fold(0.0, f64::max)
}

/// Sign of `κ₀` on the computed branch nearest to each table row; a mismatch
/// counts as error 1.
fn kappa_sign_error(params: &ModelParams, spectrum: &SpectrumTable, lambda: C64, table: &[closed_forms::TableEntry]) -> Result<f64> {
    let computed = spectrum.eigenvalues_at(lambda);
    let reference: Vec<C64> = table.iter().map(|e| e.eigenvalue).collect();
    let mut worst = 0.0f64;
    for (row, (k, _)) in closed_forms::nearest_matches(&computed, &reference).into_iter().enumerate() {
        let kappa = determinant::kappa0(params, spectrum, k)?;
        worst = worst.max((kappa - table[row].kappa0).norm());
    }
    Ok(worst)
}

/// Regression battery over the published closed forms and tables.
pub fn run_selftest(seed: u64, options: SelftestOptions) -> SelftestReport {
    let mut b = Battery { rng: ChaCha8Rng::seed_from_u64(seed), checks: Vec::new() };

    b.run("l2-closed-form", 1e-10, |rng| {
        let mut worst = 0.0f64;
        for _ in 0..20 {
            let (p, pts) = random_params(rng, 2);
            let z = if options.corrupt_weight_sign {
                oracle::z_enumerate_corrupted(&p, &pts)?
            } else {
                oracle::z_enumerate(&p, &pts)?
            };
            worst = worst.max(relative(z.value, closed_forms::z_l2(&p, &pts)?));
        }
        Ok(worst)
    });
    b.run("l2-izergin-closed-form", 1e-10, |rng| {
        let (p, pts) = random_params(rng, 2);
        Ok(relative(oracle::z_izergin(&p, &pts)?.value, closed_forms::z_l2(&p, &pts)?))
    });
    b.run("l2-spectrum-table", 1e-9, |rng| {
        let (p, pts) = random_params(rng, 2);
        let s = transfer::diagonalize_default(&p)?;
        let mut worst = 0.0f64;
        for &x in pts.values() {
            let table: Vec<C64> = closed_forms::spectrum_l2(&p, x)?.iter().map(|e| e.eigenvalue).collect();
            worst = worst.max(table_error(&s.eigenvalues_at(x), &table));
        }
        Ok(worst)
    });
    b.run("l2-kappa0-signs", 1e-9, |rng| {
        let (p, pts) = random_params(rng, 2);
        let s = transfer::diagonalize_default(&p)?;
        kappa_sign_error(&p, &s, pts.values()[0], &closed_forms::spectrum_l2(&p, pts.values()[0])?)
    });
    b.run("l2-spectral-determinant", 1e-9, |rng| {
        let (p, pts) = random_params(rng, 2);
        let s = transfer::diagonalize_default(&p)?;
        let z = closed_forms::z_l2(&p, &pts)?;
        let all = determinant::z_spectral_all(&p, &pts, &s)?;
        Ok(all.iter().map(|r| relative(r.z, z)).fold(0.0, f64::max))
    });
    b.run("l2-kernel-closed-form", 1e-10, |rng| {
        let (p, pts) = random_params(rng, 2);
        let (x, y) = (pts.values()[0], pts.values()[1]);
        Ok(relative(kernel::coeff_m(&p, 1, 1, &[x, y])?, kernel::m1_closed_form_l2(&p, x, y)?))
    });
    b.run("l2-homogeneous-limit", 1e-9, |rng| {
        let (p, pts) = random_params(rng, 2);
        let s = transfer::diagonalize_default(&p)?;
        let x = pts.values()[0];
        let z = oracle::z_enumerate(&p, &oracle::points_unchecked(&p, vec![x, x])?)?.value;
        let mut worst = 0.0f64;
        for k in 0..s.branch_count() {
            worst = worst.max(relative(oracle::homogeneous_z2(&p, x, &s, k)?, z));
        }
        Ok(worst)
    });
    b.run("l3-spectrum-table", 1e-9, |rng| {
        let p = uniform_params(rng)?;
        let s = transfer::diagonalize_default(&p)?;
        let x = SampleBox::POINTS.draw(rng);
        let table: Vec<C64> = closed_forms::spectrum_l3_uniform(&p, x)?.iter().map(|e| e.eigenvalue).collect();
        Ok(table_error(&s.eigenvalues_at(x), &table))
    });
    b.run("l3-kappa0-signs", 1e-9, |rng| {
        let p = uniform_params(rng)?;
        let s = transfer::diagonalize_default(&p)?;
        let x = SampleBox::POINTS.draw(rng);
        kappa_sign_error(&p, &s, x, &closed_forms::spectrum_l3_uniform(&p, x)?)
    });
    b.run("l3-closed-form", 1e-10, |rng| {
        let p = uniform_params(rng)?;
        let (_, pts) = random_params(rng, 3);
        let pts = SpectralPoints::new(pts.values().to_vec(), &p)?;
        Ok(relative(oracle::z_enumerate(&p, &pts)?.value, closed_forms::z_l3_uniform(&p, &pts)?))
    });
    b.run("l3-spectral-determinant", 1e-9, |rng| {
        let p = uniform_params(rng)?;
        let (_, pts) = random_params(rng, 3);
        let pts = SpectralPoints::new(pts.values().to_vec(), &p)?;
        let s = transfer::diagonalize_default(&p)?;
        let z = closed_forms::z_l3_uniform(&p, &pts)?;
        let all = determinant::z_spectral_all(&p, &pts, &s)?;
        Ok(all.iter().map(|r| relative(r.z, z)).fold(0.0, f64::max))
    });
    b.run("diagonal-point", 1e-10, |rng| {
        let mut worst = 0.0f64;
        for l in 1..=MAX_ENUMERATE_L {
            let (p, _) = random_params(rng, l);
            let pts = oracle::points_unchecked(&p, p.mu().to_vec())?;
            worst = worst.max(relative(oracle::z_enumerate(&p, &pts)?.value, oracle::diagonal_value(&p)));
        }
        Ok(worst)
    });
    b.run("ice-configuration-counts", 0.0, |rng| {
        let expected = [1u64, 2, 7, 42, 429, 7436];
        let mut misses = 0.0;
        for (l, &n) in (1..=MAX_ENUMERATE_L).zip(&expected) {
            let (p, pts) = random_params(rng, l);
            if oracle::z_enumerate(&p, &pts)?.cost.configurations != n {
                misses += 1.0;
            }
        }
        Ok(misses)
    });
    b.run("h-dimensions", 0.0, |_| {
        let ok = (3..=8).all(|l| determinant::h_dimension(l) == 3 * (1 << (l - 2)) - 2);
        Ok(if ok { 0.0 } else { 1.0 })
    });
    b.run("korepin-l2", 1e-9, |rng| {
        let (p, pts) = random_params(rng, 2);
        let mut lam = pts.values().to_vec();
        lam[1] = p.mu()[0] - p.gamma();
        Ok(oracle::korepin_residual(&p, &oracle::points_unchecked(&p, lam)?, 1, 0)?.residual)
    });

    let first_failure = b.checks.iter().find(|c| !c.passed).map(|c| c.name);
    SelftestReport {
        schema: SELFTEST_SCHEMA,
        seed,
        verdict: if first_failure.is_some() { Verdict::Fail } else { Verdict::Pass },
        first_failure,
        checks: b.checks,
    }
}
