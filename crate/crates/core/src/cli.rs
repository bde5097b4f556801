//! Command-line front end.
//!
//! Exit status: 0 when every check passes, 1 on a failed check or a runtime
//! error, 2 on invalid configuration or usage.

use std::f64::consts::TAU;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::io::config::{Construction, RunConfig};
use crate::io::emit::{fmt_f64, write_json, Csv};
use crate::scanner::{scan_unit_circle, EigCertificate, ScanConfig, ScanReport};
use crate::semigroup::{trajectory, uniform_times, AxisReport, FourierState, GeneratorSpec, SgCertificate};
use crate::truncation::spectrum::EIGEN_RESIDUAL_TOL;
use crate::truncation::{build_tn, spectrum_convergence, spectrum_of, ConvergenceTable, SectionChecks};
use crate::verify::{self, VerifyOptions, VerifyReport};
use crate::C64;

/// Modulus within this of 1 counts as peripheral in `eigs`.
pub const PERIPHERAL_TOL: f64 = 1e-10;
pub const MASS_TOL: f64 = 1e-8;
pub const POSITIVITY_TOL: f64 = 1e-10;
/// Rounding allowance on `‖(T - u) z‖` for `‖z‖ = 1`; the certificate at
/// `u = 1` attains the `2 q_n` threshold with equality.
pub const THRESHOLD_ROUNDING: f64 = 64.0 * f64::EPSILON;

#[derive(Debug, Parser)]
#[command(name = "spectral-forge", version, about = "Certified spectra of stochastic operators with prescribed peripheral spectrum")]
pub struct Cli {
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Truncation depth of certified sums.
    #[arg(long, global = true)]
    pub depth: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Certify the unit circle minus U as resolvent set and U as approximate spectrum.
    ScanCircle(ScanCircleArgs),
    /// Spectrum of a finite section through its secular equation.
    Eigs(EigsArgs),
    /// Distance from U to the spectra of finite sections of growing size.
    Convergence(ConvergenceArgs),
    /// Seeded property suites.
    Verify(VerifyArgs),
    #[command(subcommand)]
    Semigroup(SemigroupCommand),
}

#[derive(Debug, Args)]
pub struct ScanCircleArgs {
    #[arg(long, value_delimiter = ',')]
    pub orders: Option<Vec<usize>>,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub exclusion: Option<f64>,
    #[arg(long)]
    pub cert_block: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EigsArgs {
    #[arg(long, value_delimiter = ',')]
    pub orders: Option<Vec<usize>>,
    /// Number of blocks in the section.
    #[arg(long = "N", value_name = "N")]
    pub n: Option<usize>,
    /// Keep `q_n` instead of rescaling by `1/(1 - tail(N))`.
    #[arg(long)]
    pub no_renormalize: bool,
}

#[derive(Debug, Args)]
pub struct ConvergenceArgs {
    #[arg(long, value_delimiter = ',')]
    pub orders: Option<Vec<usize>>,
    #[arg(long)]
    pub nmax: Option<usize>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_delimiter = ',')]
    pub suites: Option<Vec<String>>,
    /// Corrupts the rank-one resolvent before it is compared (negative control).
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}

#[derive(Debug, Subcommand)]
pub enum SemigroupCommand {
    /// Certify points iβ of the imaginary axis.
    ScanAxis(ScanAxisArgs),
    /// Approximate eigenvectors for ir.
    Cert(CertArgs),
    /// Evolve e under the semigroup.
    Evolve(EvolveArgs),
}

#[derive(Debug, Args)]
pub struct ScanAxisArgs {
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub betas: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct CertArgs {
    /// Rationals `r >= 1`, e.g. `3/2`.
    #[arg(long = "r", value_delimiter = ',')]
    pub r: Option<Vec<String>>,
    #[arg(long)]
    pub occurrence: Option<u64>,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub chain_depth: Option<usize>,
}

/// What a command produced.
#[derive(Debug)]
pub struct Outcome {
    pub passed: bool,
    pub summary: String,
    pub files: Vec<PathBuf>,
}

/// 2 for configuration errors, 1 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Invalid(_) | Error::NotInU(_) | Error::Json(_) => 2,
        _ => 1,
    }
}

pub fn main() -> i32 {
    let cli = Cli::parse();
    match run(cli) {
        Ok(o) => {
            println!("{}", o.summary);
            for f in &o.files {
                println!("wrote {}", f.display());
            }
            if o.passed {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn base_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(d) = cli.depth {
        cfg.truncation_depth = d;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.out_dir = o.clone();
    }
    Ok(cfg)
}

fn set<T>(field: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *field = v;
    }
}

pub fn run(cli: Cli) -> Result<Outcome> {
    let mut cfg = base_config(&cli)?;
    match cli.command {
        Command::ScanCircle(a) => {
            set(&mut cfg.orders, a.orders);
            set(&mut cfg.grid_size, a.grid);
            set(&mut cfg.exclusion_radius, a.exclusion);
            set(&mut cfg.certificate_block, a.cert_block);
            prepare(&mut cfg, Construction::SingleOperator)?;
            scan_circle(&cfg)
        }
        Command::Eigs(a) => {
            set(&mut cfg.orders, a.orders);
            set(&mut cfg.section_depth, a.n);
            if a.no_renormalize {
                cfg.renormalize = false;
            }
            prepare(&mut cfg, Construction::SingleOperator)?;
            eigs(&cfg)
        }
        Command::Convergence(a) => {
            set(&mut cfg.orders, a.orders);
            set(&mut cfg.n_max, a.nmax);
            prepare(&mut cfg, Construction::SingleOperator)?;
            convergence(&cfg)
        }
        Command::Verify(a) => {
            set(&mut cfg.suites, a.suites);
            cfg.validate()?;
            run_verify(&cfg, a.inject_fault)
        }
        Command::Semigroup(sub) => {
            match &sub {
                SemigroupCommand::ScanAxis(a) => set(&mut cfg.beta_grid, a.betas.clone()),
                SemigroupCommand::Cert(a) => {
                    set(&mut cfg.cert_points, a.r.clone());
                    set(&mut cfg.occurrence, a.occurrence);
                }
                SemigroupCommand::Evolve(a) => {
                    set(&mut cfg.evolve_time, a.t);
                    set(&mut cfg.evolve_steps, a.steps);
                    set(&mut cfg.chain_depth, a.chain_depth);
                }
            }
            prepare(&mut cfg, Construction::Semigroup)?;
            match sub {
                SemigroupCommand::ScanAxis(_) => scan_axis(&cfg),
                SemigroupCommand::Cert(_) => cert(&cfg),
                SemigroupCommand::Evolve(_) => evolve(&cfg),
            }
        }
    }
}

fn prepare(cfg: &mut RunConfig, c: Construction) -> Result<()> {
    cfg.require(c)?;
    cfg.validate()
}

fn out_path(cfg: &RunConfig, name: &str) -> PathBuf {
    cfg.out_dir.join(name)
}

#[derive(Serialize)]
struct CertificateCheck<'a> {
    #[serde(flatten)]
    certificate: &'a EigCertificate,
    threshold: f64,
    within_threshold: bool,
}

#[derive(Serialize)]
struct ScanSummary<'a> {
    #[serde(flatten)]
    report: &'a ScanReport,
    grid_points: usize,
    required_points: usize,
    certified_points: usize,
    min_required_abs_lower: f64,
    certificate_checks: Vec<CertificateCheck<'a>>,
    passed: bool,
}

pub fn scan_circle(cfg: &RunConfig) -> Result<Outcome> {
    let spec = cfg.group_spec()?;
    let w = cfg.single_weights()?;
    let sc = ScanConfig {
        grid_size: cfg.grid_size,
        exclusion_radius: cfg.exclusion_radius,
        depth: cfg.truncation_depth,
        certificate_block: cfg.certificate_block,
    };
    let report = scan_unit_circle(&spec, &w, &sc)?;

    let mut csv = Csv::new(&[
        "theta",
        "re_lambda",
        "im_lambda",
        "verdict",
        "denominator_abs_lower",
        "empirical_block_bound",
    ]);
    for p in &report.points {
        csv.row(&[
            fmt_f64(TAU * p.theta),
            fmt_f64(p.lambda.re),
            fmt_f64(p.lambda.im),
            p.verdict.label().to_string(),
            fmt_f64(p.verdict.abs_lower()),
            fmt_f64(p.empirical_block_bound),
        ]);
    }
    let checks: Vec<CertificateCheck> = report
        .certificates
        .iter()
        .map(|c| {
            let threshold = 2.0 * w.q(c.block);
            CertificateCheck { certificate: c, threshold, within_threshold: c.residual <= threshold + THRESHOLD_ROUNDING }
        })
        .collect();
    let passed = report.all_required_certified() && checks.iter().all(|c| c.within_threshold);
    let summary = ScanSummary {
        report: &report,
        grid_points: report.points.len(),
        required_points: report.required().count(),
        certified_points: report.certified_count(),
        min_required_abs_lower: report.required().map(|p| p.verdict.abs_lower()).fold(f64::INFINITY, f64::min),
        certificate_checks: checks,
        passed,
    };
    let (csv_path, json_path) = (out_path(cfg, "scan_circle.csv"), out_path(cfg, "scan_circle.json"));
    csv.write(&csv_path)?;
    write_json(&json_path, &summary)?;
    Ok(Outcome {
        passed,
        summary: format!(
            "scan-circle orders={:?}: {}/{} required points certified, {} certified in total, max certificate residual {:e}: {}",
            cfg.orders,
            report.required().filter(|p| p.verdict.is_certified()).count(),
            summary.required_points,
            summary.certified_points,
            report.max_certificate_residual(),
            verdict_word(passed)
        ),
        files: vec![csv_path, json_path],
    })
}

fn verdict_word(passed: bool) -> &'static str {
    if passed {
        "PASS"
    } else {
        "FAIL"
    }
}

#[derive(Serialize)]
struct DistanceRow {
    u: String,
    distance: f64,
    bound: f64,
}

#[derive(Serialize)]
struct EigsSummary {
    orders: Vec<usize>,
    depth: usize,
    renormalized: bool,
    dimension: usize,
    eigenvalue_count: usize,
    max_residual: f64,
    residual_tolerance: f64,
    max_modulus: f64,
    secular_margin: Option<f64>,
    /// Eigenvalues with `|λ| >= 1 - 1e-10`.
    peripheral: Vec<[f64; 2]>,
    peripheral_only_at_one: bool,
    checks: SectionChecks,
    head_column_sum: f64,
    distances_to_u: Vec<DistanceRow>,
    passed: bool,
}

pub fn eigs(cfg: &RunConfig) -> Result<Outcome> {
    let spec = cfg.group_spec()?;
    let w = cfg.single_weights()?;
    let n = cfg.section_depth;
    let op = build_tn(&spec, &w, n, cfg.renormalize)?;
    let s = spectrum_of(&op)?;
    let all = s.eigenvalues();

    let mut csv = Csv::new(&["re", "im", "kind", "residual"]);
    for e in &all {
        csv.row(&[fmt_f64(e.re), fmt_f64(e.im), e.kind.as_str().to_string(), fmt_f64(e.residual)]);
    }
    let peripheral: Vec<C64> = all
        .iter()
        .map(|e| e.value())
        .filter(|z| z.norm() >= 1.0 - PERIPHERAL_TOL)
        .collect();
    let peripheral_only_at_one =
        peripheral.len() == 1 && (peripheral[0] - C64::new(1.0, 0.0)).norm() <= PERIPHERAL_TOL;
    let bound = 2.0 * op.section_weights()[n - 1];
    let distances_to_u = spec
        .union_points()
        .iter()
        .map(|u| DistanceRow { u: u.to_string(), distance: s.distance_to(u.to_complex()), bound })
        .collect();
    let passed = all.len() == op.dim() && s.max_residual <= EIGEN_RESIDUAL_TOL;
    let summary = EigsSummary {
        orders: cfg.orders.clone(),
        depth: n,
        renormalized: cfg.renormalize,
        dimension: op.dim(),
        eigenvalue_count: all.len(),
        max_residual: s.max_residual,
        residual_tolerance: EIGEN_RESIDUAL_TOL,
        max_modulus: s.max_modulus,
        secular_margin: s.secular_margin,
        peripheral: peripheral.iter().map(|z| [z.re, z.im]).collect(),
        peripheral_only_at_one,
        checks: op.checks(),
        head_column_sum: op.column_sums()[0],
        distances_to_u,
        passed,
    };
    let (csv_path, json_path) = (out_path(cfg, "eigs.csv"), out_path(cfg, "eigs.json"));
    csv.write(&csv_path)?;
    write_json(&json_path, &summary)?;
    Ok(Outcome {
        passed,
        summary: format!(
            "eigs orders={:?} N={n}: {} eigenvalues (dimension {}), max residual {:e}, head column sum {}: {}",
            cfg.orders,
            all.len(),
            op.dim(),
            s.max_residual,
            fmt_f64(summary.head_column_sum),
            verdict_word(passed)
        ),
        files: vec![csv_path, json_path],
    })
}

#[derive(Serialize)]
struct ConvergenceSummary<'a> {
    #[serde(flatten)]
    table: &'a ConvergenceTable,
    passed: bool,
}

pub fn convergence(cfg: &RunConfig) -> Result<Outcome> {
    let spec = cfg.group_spec()?;
    let w = cfg.single_weights()?;
    let table = spectrum_convergence(&spec, &w, cfg.n_max)?;
    let passed = table.all_within_bound();
    let path = out_path(cfg, "convergence.json");
    write_json(&path, &ConvergenceSummary { table: &table, passed })?;
    let last = table.rows.iter().filter(|r| r.n == cfg.n_max).map(|r| r.distance).fold(0.0, f64::max);
    Ok(Outcome {
        passed,
        summary: format!(
            "convergence orders={:?} nmax={}: max dist(u, spectrum) at N={} is {last:e}: {}",
            cfg.orders,
            cfg.n_max,
            cfg.n_max,
            verdict_word(passed)
        ),
        files: vec![path],
    })
}

pub fn run_verify(cfg: &RunConfig, inject_fault: bool) -> Result<Outcome> {
    let report: VerifyReport = verify::run(&VerifyOptions {
        seed: cfg.seed,
        suites: cfg.suites.clone(),
        inject_fault,
    })?;
    let path = out_path(cfg, "verify.json");
    write_json(&path, &report)?;
    let lines: Vec<String> = report
        .suites
        .iter()
        .map(|s| format!("  {:<17} {} ({} cases, max error {:e})", s.name, verdict_word(s.passed), s.cases, s.max_error))
        .collect();
    let mut summary = format!("verify seed={}:\n{}", report.seed, lines.join("\n"));
    if !report.passed {
        summary.push_str(&format!("\nfailed suites: {}", report.failed.join(", ")));
    }
    Ok(Outcome { passed: report.passed, summary, files: vec![path] })
}

fn generator(cfg: &RunConfig) -> Result<GeneratorSpec> {
    GeneratorSpec::new(cfg.semigroup_weights()?, cfg.truncation_depth)
}

#[derive(Serialize)]
struct AxisSummary<'a> {
    #[serde(flatten)]
    report: &'a AxisReport,
    passed: bool,
}

pub fn scan_axis(cfg: &RunConfig) -> Result<Outcome> {
    let g = generator(cfg)?;
    let report = g.scan_imaginary_axis(&cfg.beta_grid, cfg.truncation_depth, &cfg.cert_rationals()?)?;
    let mut csv = Csv::new(&["beta", "verdict", "denominator_abs_lower"]);
    for p in &report.points {
        csv.row(&[fmt_f64(p.beta), p.verdict.label().to_string(), fmt_f64(p.verdict.abs_lower())]);
    }
    let passed = report.passed();
    let (csv_path, json_path) = (out_path(cfg, "scan_axis.csv"), out_path(cfg, "scan_axis.json"));
    csv.write(&csv_path)?;
    write_json(&json_path, &AxisSummary { report: &report, passed })?;
    let certified = report.points.iter().filter(|p| p.verdict.is_certified()).count();
    Ok(Outcome {
        passed,
        summary: format!(
            "semigroup scan-axis depth={}: {certified}/{} grid points certified, beta=0 {}: {}",
            cfg.truncation_depth,
            report.points.len(),
            report.zero.label(),
            verdict_word(passed)
        ),
        files: vec![csv_path, json_path],
    })
}

#[derive(Serialize)]
struct CertSummary {
    occurrence: u64,
    certificates: Vec<SgCertificate>,
    passed: bool,
}

pub fn cert(cfg: &RunConfig) -> Result<Outcome> {
    let g = generator(cfg)?;
    let certificates = cfg
        .cert_rationals()?
        .iter()
        .map(|r| g.approx_eigenvalue_cert(r, cfg.occurrence))
        .collect::<Result<Vec<_>>>()?;
    let path = out_path(cfg, "cert.json");
    let summary = CertSummary { occurrence: cfg.occurrence, certificates, passed: true };
    write_json(&path, &summary)?;
    let lines: Vec<String> = summary
        .certificates
        .iter()
        .map(|c| format!("  r={} n={} k={} omega={} residual={:e}", c.r, c.n, c.k, c.omega, c.residual))
        .collect();
    Ok(Outcome {
        passed: true,
        summary: format!("semigroup cert:\n{}", lines.join("\n")),
        files: vec![path],
    })
}

#[derive(Serialize)]
struct EvolveSummary {
    t: f64,
    steps: usize,
    chain_depth: usize,
    initial_mass: f64,
    max_mass_deviation: f64,
    mass_tolerance: f64,
    min_chain_entry: f64,
    positivity_tolerance: f64,
    passed: bool,
}

pub fn evolve(cfg: &RunConfig) -> Result<Outcome> {
    let g = generator(cfg)?;
    let depth = cfg.chain_depth;
    let f0 = FourierState::e();
    let rows = trajectory(&g, &f0, &uniform_times(cfg.evolve_time, cfg.evolve_steps), depth)?;
    let mut header = vec!["t".to_string(), "mass".into(), "head".into()];
    header.extend((1..=depth).map(|n| format!("block_{n}")));
    let mut csv = Csv::new(&header);
    for r in &rows {
        let mut cells = vec![fmt_f64(r.t), fmt_f64(r.mass), fmt_f64(r.head)];
        cells.extend(r.block_masses.iter().map(|&m| fmt_f64(m)));
        csv.row(&cells);
    }
    let initial_mass = f0.norm();
    let max_mass_deviation = rows.iter().map(|r| (r.mass - initial_mass).abs()).fold(0.0, f64::max);
    let min_chain_entry = rows.iter().map(|r| r.min_entry).fold(f64::INFINITY, f64::min);
    let passed = max_mass_deviation <= MASS_TOL && min_chain_entry >= -POSITIVITY_TOL;
    let summary = EvolveSummary {
        t: cfg.evolve_time,
        steps: cfg.evolve_steps,
        chain_depth: depth,
        initial_mass,
        max_mass_deviation,
        mass_tolerance: MASS_TOL,
        min_chain_entry,
        positivity_tolerance: POSITIVITY_TOL,
        passed,
    };
    let (csv_path, json_path) = (out_path(cfg, "evolve.csv"), out_path(cfg, "evolve.json"));
    csv.write(&csv_path)?;
    write_json(&json_path, &summary)?;
    Ok(Outcome {
        passed,
        summary: format!(
            "semigroup evolve t={} N={depth}: max mass deviation {max_mass_deviation:e}, min chain entry {min_chain_entry:e}: {}",
            cfg.evolve_time,
            verdict_word(passed)
        ),
        files: vec![csv_path, json_path],
    })
}

/// Parses `args` (without the program name) and runs the command.
pub fn run_args<I, S>(args: I) -> Result<Outcome>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let argv = std::iter::once(std::ffi::OsString::from("spectral-forge")).chain(args.into_iter().map(Into::into));
    let cli = Cli::try_parse_from(argv).map_err(|e| Error::Invalid(e.to_string()))?;
    run(cli)
}
