mod parse;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use vertex_spectra::determinant::{z_spectral, z_spectral_all, SpectralZ};
use vertex_spectra::transfer::diagonalize_default;
use vertex_spectra::verify::{
    format_float, run_selftest, run_sweep, run_verify, to_json_string, SelftestOptions, SweepConfig, SweepGrid, SweepRow,
};
use vertex_spectra::{Error, ModelParams, SpectralPoints, C64};

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_DEGENERATE: u8 = 3;

#[derive(Parser)]
#[command(name = "vertex-spectra", version, about = "Spectral-determinant checks for the domain-wall six-vertex partition function")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the built-in regression battery.
    Selftest(SelftestArgs),
    /// Verify the determinant representation at random parameter points.
    Verify(VerifyArgs),
    /// Run `verify` over a grid of anisotropies and lattice lengths.
    Sweep(SweepArgs),
    /// Transfer-matrix eigenvalues at given spectral points.
    Spectrum(PointArgs),
    /// Per-branch `kappa0 det H` at one parameter point.
    Zvalue(PointArgs),
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Args)]
struct Output {
    /// Write output here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct SelftestArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, hide = true)]
    corrupt_weight_sign: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct VerifyArgs {
    /// JSON sweep config; flags given on the command line override its fields.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Lattice lengths: `3`, `3..5`, `3-5` or `3,5`.
    #[arg(long = "L", value_name = "RANGE", value_parser = parse::lengths)]
    lengths: Option<parse::Lengths>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// End-to-end tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Fix the anisotropy instead of sampling it.
    #[arg(long, value_name = "RE,IM", allow_hyphen_values = true, value_parser = parse::complex)]
    gamma: Option<C64>,
    /// Fix the spectral points (used for lattice lengths matching their count).
    #[arg(long, value_name = "RE,IM", action = ArgAction::Append, allow_hyphen_values = true, value_parser = parse::complex)]
    lambda: Option<Vec<C64>>,
    /// Mark separation violations as skips instead of resampling.
    #[arg(long)]
    no_strict_separation: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct SweepArgs {
    /// JSON grid: `gammas`, `lengths`, `trials`, `seed`, optional tolerances and boxes.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct PointArgs {
    #[arg(long, value_name = "RE,IM", allow_hyphen_values = true, value_parser = parse::complex)]
    gamma: C64,
    /// Inhomogeneities; all zero when omitted (then `--L` is required).
    #[arg(long, value_name = "RE,IM", action = ArgAction::Append, allow_hyphen_values = true, value_parser = parse::complex)]
    mu: Option<Vec<C64>>,
    #[arg(long = "L")]
    length: Option<usize>,
    /// Spectral points.
    #[arg(long, value_name = "RE,IM", action = ArgAction::Append, allow_hyphen_values = true, value_parser = parse::complex)]
    lambda: Option<Vec<C64>>,
    /// Restrict output to one branch.
    #[arg(long)]
    branch: Option<usize>,
    #[command(flatten)]
    output: Output,
}

enum Failure {
    Usage(String),
    Degenerate(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::DegenerateSpectrum(_) | Error::EigenvalueZeroAtMu { .. } => Failure::Degenerate(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type Outcome = Result<u8, Failure>;

fn write_text(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn json_lines<T: Serialize>(rows: &[T]) -> String {
    rows.iter().map(|r| to_json_string(r) + "\n").collect()
}

fn selftest(args: SelftestArgs) -> Outcome {
    let report = run_selftest(args.seed, SelftestOptions { corrupt_weight_sign: args.corrupt_weight_sign });
    let text = match args.output.format {
        Format::Json => to_json_string(&report) + "\n",
        Format::Csv => {
            let mut s = String::from("name,passed,maxError,tolerance\n");
            for c in &report.checks {
                s += &format!("{},{},{},{}\n", c.name, c.passed, format_float(c.max_error), format_float(c.tolerance));
            }
            s
        }
    };
    write_text(args.output.out.as_deref(), &text)?;
    match report.first_failure {
        None => {
            eprintln!("selftest PASS ({} checks)", report.checks.len());
            Ok(0)
        }
        Some(name) => {
            eprintln!("selftest FAIL: first failing check `{name}`");
            Ok(EXIT_FAIL)
        }
    }
}

fn verify(args: VerifyArgs) -> Outcome {
    let mut cfg = match &args.config {
        Some(path) => SweepConfig::from_json(&read_text(path)?).map_err(|e| Failure::Usage(e.to_string()))?,
        None => {
            let lengths = args.lengths.clone().ok_or_else(|| Failure::Usage("either --config or --L is required".into()))?;
            SweepConfig::new(lengths.0, 10, 42)
        }
    };
    if let Some(l) = args.lengths {
        cfg.lengths = l.0;
    }
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(t) = args.tol {
        cfg.tolerances.end_to_end = t;
    }
    if args.gamma.is_some() {
        cfg.gamma = args.gamma;
    }
    if args.lambda.is_some() {
        cfg.lambda = args.lambda;
    }
    if args.no_strict_separation {
        cfg.strict_separation = false;
    }

    let report = run_verify(&cfg)?;
    if let Some(p) = &cfg.report_path {
        write_text(Some(Path::new(p)), &(report.to_json() + "\n"))?;
    }
    if let Some(p) = &cfg.summary_path {
        write_text(Some(Path::new(p)), &report.to_csv())?;
    }
    let text = match args.output.format {
        Format::Json => report.to_json() + "\n",
        Format::Csv => report.to_csv(),
    };
    write_text(args.output.out.as_deref(), &text)?;

    let s = &report.summary;
    eprintln!(
        "verify {}: {} points, {} verified, {} separation skips, max end-to-end {:.3e}",
        if report.passed() { "PASS" } else { "FAIL" },
        s.points,
        s.verified,
        s.separation_skips,
        s.max_end_to_end
    );
    Ok(if s.degenerate_exhausted > 0 {
        EXIT_DEGENERATE
    } else if report.passed() {
        0
    } else {
        EXIT_FAIL
    })
}

fn sweep(args: SweepArgs) -> Outcome {
    let grid = SweepGrid::from_json(&read_text(&args.config)?).map_err(|e| Failure::Usage(e.to_string()))?;
    let rows = run_sweep(&grid)?;
    let text = match args.output.format {
        Format::Json => json_lines(&rows),
        Format::Csv => {
            let mut s = format!("{}\n", SweepRow::CSV_HEADER);
            for r in &rows {
                s += &(r.to_csv_line() + "\n");
            }
            s
        }
    };
    write_text(args.output.out.as_deref(), &text)?;
    let failed = rows.iter().filter(|r| r.summary.verdict != vertex_spectra::verify::Verdict::Pass).count();
    eprintln!("sweep: {} cells, {failed} failed", rows.len());
    Ok(if rows.iter().any(|r| r.summary.degenerate_exhausted > 0) {
        EXIT_DEGENERATE
    } else if failed > 0 {
        EXIT_FAIL
    } else {
        0
    })
}

fn model(args: &PointArgs) -> Result<ModelParams, Failure> {
    match (&args.mu, args.length) {
        (Some(mu), Some(l)) if mu.len() != l => Err(Failure::Usage(format!("--L {l} but {} --mu values", mu.len()))),
        (Some(mu), _) => Ok(ModelParams::new(args.gamma, mu.clone())?),
        (None, Some(l)) => Ok(ModelParams::allow_coincident_mu(args.gamma, vec![C64::new(0.0, 0.0); l])?),
        (None, None) => Err(Failure::Usage("either --mu or --L is required".into())),
    }
}

fn check_branch(branch: Option<usize>, count: usize) -> Result<(), Failure> {
    match branch {
        Some(b) if b >= count => Err(Failure::Usage(format!("--branch {b} out of range (branch count {count})"))),
        _ => Ok(()),
    }
}

#[derive(Serialize)]
struct SpectrumRow {
    branch: usize,
    lambda: C64,
    re: f64,
    im: f64,
    residual: f64,
}

fn spectrum(args: PointArgs) -> Outcome {
    let params = model(&args)?;
    let table = diagonalize_default(&params)?;
    check_branch(args.branch, table.branch_count())?;
    let points = args.lambda.clone().unwrap_or_else(|| vec![table.reference_point()]);
    let mut rows = Vec::new();
    for &x in &points {
        for k in (0..table.branch_count()).filter(|&k| args.branch.is_none_or(|b| b == k)) {
            let (v, residual) = table.eigenvalue_at(k, x)?;
            rows.push(SpectrumRow { branch: k, lambda: x, re: v.re, im: v.im, residual });
        }
    }
    let text = match args.output.format {
        Format::Json => json_lines(&rows),
        Format::Csv => {
            let mut s = String::from("branch,lambdaRe,lambdaIm,re,im,residual\n");
            for r in &rows {
                let f = format_float;
                s += &format!("{},{},{},{},{},{}\n", r.branch, f(r.lambda.re), f(r.lambda.im), f(r.re), f(r.im), f(r.residual));
            }
            s
        }
    };
    write_text(args.output.out.as_deref(), &text)?;
    Ok(0)
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ZRow {
    branch: usize,
    kappa0: C64,
    #[serde(rename = "detH")]
    det_h: C64,
    #[serde(rename = "Z")]
    z: C64,
    condition_estimate: f64,
}

impl From<SpectralZ> for ZRow {
    fn from(s: SpectralZ) -> Self {
        ZRow { branch: s.branch, kappa0: s.kappa0, det_h: s.det_h, z: s.z, condition_estimate: s.condition }
    }
}

fn zvalue(args: PointArgs) -> Outcome {
    let params = model(&args)?;
    let lambda = args.lambda.clone().ok_or_else(|| Failure::Usage(format!("--lambda needs {} values", params.len())))?;
    let points = SpectralPoints::new(lambda, &params)?;
    let table = diagonalize_default(&params)?;
    check_branch(args.branch, table.branch_count())?;
    let rows: Vec<ZRow> = match args.branch {
        Some(k) => vec![z_spectral(&params, &points, &table, k)?.into()],
        None => z_spectral_all(&params, &points, &table)?.into_iter().map(ZRow::from).collect(),
    };
    let text = match args.output.format {
        Format::Json => json_lines(&rows),
        Format::Csv => {
            let mut s = String::from("branch,kappa0Re,kappa0Im,detHRe,detHIm,ZRe,ZIm,conditionEstimate\n");
            let f = format_float;
            for r in &rows {
                s += &format!(
                    "{},{},{},{},{},{},{},{}\n",
                    r.branch,
                    f(r.kappa0.re),
                    f(r.kappa0.im),
                    f(r.det_h.re),
                    f(r.det_h.im),
                    f(r.z.re),
                    f(r.z.im),
                    f(r.condition_estimate)
                );
            }
            s
        }
    };
    write_text(args.output.out.as_deref(), &text)?;
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse_from(parse::expand_lists(std::env::args_os())) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Selftest(a) => selftest(a),
        Command::Verify(a) => verify(a),
        Command::Sweep(a) => sweep(a),
        Command::Spectrum(a) => spectrum(a),
        Command::Zvalue(a) => zvalue(a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Degenerate(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_DEGENERATE)
        }
    }
}
