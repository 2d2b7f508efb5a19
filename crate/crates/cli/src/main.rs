//! Command-line front end: loads a system by built-in name or JSON file,
//! runs the attractor / verification / coding machinery and emits CSV plus
//! deterministic JSON reports.
//!
//! Exit codes: 0 success, 1 check failure, 2 input error, 3 not hyperbolic,
//! 4 left inverse required but missing, 5 a support touched the branch set.

use clap::{Args, Parser, Subcommand};
use ifs_oalg::branch::{BranchError, BranchReport, SeparationCheck};
use ifs_oalg::cloud::{attractor, self_similarity_residual, AttractorData, DEFAULT_POINT_CAP};
use ifs_oalg::codemap::{canonical_base_point, code_error_bound, code_point};
use ifs_oalg::exact::format_rational;
use ifs_oalg::exel::{verify_left_inverse, verify_toeplitz, verify_transfer_identity, ExelError};
use ifs_oalg::func::{CographFunction, SampledFunction};
use ifs_oalg::ifs::IfsError;
use ifs_oalg::pimsner::{
    branch_maps, verify_cograph_generators, verify_condition_i, verify_condition_ii,
    verify_condition_iii, PimsnerError,
};
use ifs_oalg::report::round15;
use ifs_oalg::scalar::{Rational, Scalar};
use ifs_oalg::spec_io::{cloud_to_csv, load_system, SystemSpec};
use ifs_oalg::word::Word;
use ifs_oalg::algebra::verify_cuntz;
use ifs_oalg::PointCloud;
use serde_json::{json, Map, Value};
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_NOT_HYPERBOLIC: u8 = 3;
const EXIT_NO_LEFT_INVERSE: u8 = 4;
const EXIT_ON_BRANCH_SET: u8 = 5;

#[derive(Parser)]
#[command(
    name = "ifs-oalg",
    about = "Attractors, symbolic coding and operator-relation checks for hyperbolic IFS",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a certified attractor cloud, write it as CSV, report as JSON.
    Attractor(AttractorArgs),
    /// Run verification checks and emit an aggregated JSON report.
    Verify(VerifyArgs),
    /// Evaluate the symbolic coding of a word and its error bound.
    Codemap(CodemapArgs),
}

#[derive(Args)]
struct SystemArg {
    /// Built-in name (CANTOR3, HALVES, TENTINV, SIERP) or a JSON file path.
    #[arg(long)]
    system: String,
}

#[derive(Args)]
struct AttractorArgs {
    #[command(flatten)]
    system: SystemArg,
    /// Target resolution for the certified cloud.
    #[arg(long, default_value_t = 1e-4)]
    eps: f64,
    /// CSV destination for the point cloud.
    #[arg(long, default_value = "attractor.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    system: SystemArg,
    /// Comma-separated subset of attractor,branch,covariance,cuntz,cograph,exel.
    #[arg(long, default_value = "attractor,branch,cuntz,covariance")]
    checks: String,
    /// Cloud resolution used by the sampled checks.
    #[arg(long, default_value_t = 1e-3)]
    eps: f64,
    /// Word length for the operator-relation checks.
    #[arg(long, default_value_t = 3)]
    depth: usize,
    /// Numeric tolerance for the sampled residuals.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record that the open-set condition holds, on the caller's authority;
    /// it is not decidable from samples and is never checked.
    #[arg(long)]
    osc_certificate: bool,
}

#[derive(Args)]
struct CodemapArgs {
    #[command(flatten)]
    system: SystemArg,
    /// Word over 1..d, e.g. 1222 (use dots for alphabets past 9: 1.2.10).
    #[arg(long, default_value = "")]
    word: String,
    /// Resolution of the cloud used to bound the attractor diameter.
    #[arg(long, default_value_t = 1e-3)]
    eps: f64,
}

/// A terminating failure with its process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }

    fn check(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_CHECK_FAILED,
            message: message.into(),
        }
    }
}

impl From<IfsError> for Failure {
    fn from(e: IfsError) -> Self {
        let code = match e {
            IfsError::NotHyperbolic { .. } => EXIT_NOT_HYPERBOLIC,
            _ => EXIT_CHECK_FAILED,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Attractor(args) => cmd_attractor(&args),
        Command::Verify(args) => cmd_verify(&args),
        Command::Codemap(args) => cmd_codemap(&args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn load(system: &SystemArg) -> Result<SystemSpec, Failure> {
    load_system(&system.system).map_err(|e| Failure::input(e.to_string()))
}

fn point_cap() -> Result<usize, Failure> {
    match std::env::var("IFS_OALG_POINT_CAP") {
        Ok(text) => text
            .trim()
            .parse::<usize>()
            .map_err(|_| Failure::input(format!("IFS_OALG_POINT_CAP is not a point count: {text}"))),
        Err(_) => Ok(DEFAULT_POINT_CAP),
    }
}

fn require_positive(value: f64, what: &str) -> Result<(), Failure> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Failure::input(format!("{what} must be positive, got {value}")))
    }
}

fn json_float(x: f64) -> Value {
    serde_json::Number::from_f64(round15(x))
        .map(Value::Number)
        .unwrap_or_else(|| Value::String(format!("{x}")))
}

fn json_rational_point(point: &[Rational]) -> Value {
    Value::Array(point.iter().map(|q| Value::String(format_rational(q))).collect())
}

fn json_decimal_point(point: &[Rational]) -> Value {
    Value::Array(point.iter().map(|q| json_float(q.to_f64_lossy())).collect())
}

fn json_cloud(cloud: &PointCloud<f64>) -> Value {
    Value::Array(
        cloud
            .points
            .iter()
            .map(|p| Value::Array(p.iter().map(|&v| json_float(v)).collect()))
            .collect(),
    )
}

fn json_separation(check: &SeparationCheck) -> Value {
    json!({
        "separated": check.separated,
        "min_gap": json_float(check.min_gap),
        "threshold": json_float(check.threshold),
    })
}

fn emit(report: &Value, out: Option<&PathBuf>) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn compute_attractor(spec: &SystemSpec, eps: f64) -> Result<AttractorData, Failure> {
    let float = spec.system.to_f64();
    attractor(&float, eps, point_cap()?).map_err(Failure::from)
}

fn cmd_attractor(args: &AttractorArgs) -> Result<u8, Failure> {
    require_positive(args.eps, "--eps")?;
    let spec = load(&args.system)?;
    let data = compute_attractor(&spec, args.eps)?;
    let residual = self_similarity_residual(&spec.system.to_f64(), &data.cloud);

    std::fs::write(&args.out, cloud_to_csv(&data.cloud))
        .map_err(|e| Failure::input(format!("cannot write {}: {e}", args.out.display())))?;

    let passed = residual <= 2.0 * args.eps;
    let report = json!({
        "schema": 1,
        "system": spec.name,
        "residual": json_float(residual),
        "resolution": json_float(args.eps),
        "certified_resolution": json_float(data.cloud.resolution),
        "iterations": data.iterations,
        "points": data.cloud.len(),
        "csv": args.out.display().to_string(),
        "status": if passed { "pass" } else { "fail" },
    });
    emit(&report, None)?;
    Ok(if passed { 0 } else { EXIT_CHECK_FAILED })
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Check {
    Attractor,
    Branch,
    Covariance,
    Cuntz,
    Cograph,
    Exel,
}

impl Check {
    fn name(self) -> &'static str {
        match self {
            Check::Attractor => "attractor",
            Check::Branch => "branch",
            Check::Covariance => "covariance",
            Check::Cuntz => "cuntz",
            Check::Cograph => "cograph",
            Check::Exel => "exel",
        }
    }
}

fn parse_checks(text: &str) -> Result<Vec<Check>, Failure> {
    let mut checks = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        let check = match part {
            "attractor" => Check::Attractor,
            "branch" => Check::Branch,
            "covariance" => Check::Covariance,
            "cuntz" => Check::Cuntz,
            "cograph" => Check::Cograph,
            "exel" => Check::Exel,
            other => {
                return Err(Failure::input(format!(
                    "unknown check '{other}'; valid: attractor, branch, covariance, cuntz, cograph, exel"
                )))
            }
        };
        if !checks.contains(&check) {
            checks.push(check);
        }
    }
    if checks.is_empty() {
        return Err(Failure::input("--checks must name at least one check"));
    }
    checks.sort();
    Ok(checks)
}

/// Fixed, deterministic test inputs for the randomized-in-the-library
/// identities: a pair of low-degree rational polynomials in the first
/// coordinate, and sections built from them.
fn probe_functions() -> (SampledFunction, SampledFunction) {
    fn q(n: i64, d: i64) -> Rational {
        <Rational as Scalar>::from_ratio(n, d)
    }
    let a = SampledFunction::poly(0, vec![q(1, 2), q(1, 3)], 1.0 / 3.0);
    let b = SampledFunction::poly(0, vec![q(0, 1), q(1, 4), q(1, 5)], 0.25 + 2.0 / 5.0);
    (a, b)
}

fn cmd_verify(args: &VerifyArgs) -> Result<u8, Failure> {
    require_positive(args.eps, "--eps")?;
    require_positive(args.tol, "--tol")?;
    let checks = parse_checks(&args.checks)?;
    let spec = load(&args.system)?;
    spec.system.ensure_hyperbolic().map_err(Failure::from)?;

    // The exel precondition is checked before any work happens.
    if checks.contains(&Check::Exel) && spec.left_inverse.is_none() {
        return Err(Failure {
            code: EXIT_NO_LEFT_INVERSE,
            message: format!(
                "check 'exel' requires a left inverse, and system {} declares none",
                spec.name
            ),
        });
    }

    let needs_cloud = checks.iter().any(|c| {
        matches!(
            c,
            Check::Attractor | Check::Branch | Check::Covariance | Check::Cograph | Check::Exel
        )
    });
    let data = if needs_cloud {
        Some(compute_attractor(&spec, args.eps)?)
    } else {
        None
    };

    let mut entries = Map::new();
    let mut all_passed = true;
    for check in checks {
        let (value, passed) = run_check(check, &spec, args, data.as_ref())?;
        all_passed &= passed;
        entries.insert(check.name().to_string(), value);
    }

    let report = json!({
        "schema": 1,
        "system": spec.name,
        "parameters": {
            "eps": json_float(args.eps),
            "depth": args.depth,
            "tol": json_float(args.tol),
            "osc_certificate": args.osc_certificate,
        },
        "checks": Value::Object(entries),
        "status": if all_passed { "pass" } else { "fail" },
    });
    emit(&report, args.out.as_ref())?;
    Ok(if all_passed { 0 } else { EXIT_CHECK_FAILED })
}

fn run_check(
    check: Check,
    spec: &SystemSpec,
    args: &VerifyArgs,
    data: Option<&AttractorData>,
) -> Result<(Value, bool), Failure> {
    let cloud = data.map(|d| &d.cloud);
    match check {
        Check::Attractor => {
            let data = data.expect("attractor check requested a cloud");
            let residual = self_similarity_residual(&spec.system.to_f64(), &data.cloud);
            let passed = residual <= 2.0 * args.eps;
            Ok((
                json!({
                    "status": if passed { "pass" } else { "fail" },
                    "residual": json_float(residual),
                    "tolerance": json_float(2.0 * args.eps),
                    "points": data.cloud.len(),
                    "iterations": data.iterations,
                }),
                passed,
            ))
        }
        Check::Branch => {
            let report = BranchReport::compute(
                &spec.system.to_f64(),
                cloud.expect("branch check requested a cloud"),
                args.tol.max(1e-12),
            );
            Ok((
                json!({
                    "status": "pass",
                    "branched_values": json_cloud(&report.branched_values),
                    "branched_points": json_cloud(&report.branched_points),
                    "finite_branch": report.finite_branch,
                    "strong_separation": json_separation(&report.strong),
                    "cograph_separation": json_separation(&report.cograph),
                    "tol": json_float(report.tol),
                }),
                true,
            ))
        }
        Check::Cuntz => {
            let report = verify_cuntz(spec.system.branch_count())
                .map_err(|e| Failure::check(e.to_string()))?;
            Ok((
                json!({
                    "status": if report.all_exact { "exact" } else { "fail" },
                    "alphabet": report.d,
                    "relations": report.relations.len(),
                }),
                report.all_exact,
            ))
        }
        Check::Covariance => {
            let (a, b) = probe_functions();
            let maps = branch_maps(&spec.system);
            let xi = CographFunction::tensor(
                &SampledFunction::poly(
                    0,
                    vec![Rational::from_integer(0.into()), Rational::from_integer(1.into())],
                    1.0,
                ),
                &SampledFunction::one(),
                &maps,
            );
            let eta = CographFunction::tensor(&b, &SampledFunction::one(), &maps);
            let ci = verify_condition_i(&a, &xi, &b, &spec.system, args.depth)
                .map_err(|e| Failure::check(e.to_string()))?;
            let cii = verify_condition_ii(&xi, &eta, &spec.system, args.depth)
                .map_err(|e| Failure::check(e.to_string()))?;
            let (ciii, partition) = verify_condition_iii(
                &SampledFunction::one(),
                &spec.system,
                cloud.expect("covariance check requested a cloud"),
                args.depth,
                args.tol,
            )
            .map_err(|e| match e {
                PimsnerError::Branch(BranchError::OnBranchSet { .. }) => Failure {
                    code: EXIT_ON_BRANCH_SET,
                    message: format!("condition (iii) support meets the branch set: {e}"),
                },
                other => Failure::check(other.to_string()),
            })?;
            let passed = ci.exactly_zero && cii.exactly_zero && ciii.passed;
            Ok((
                json!({
                    "status": if passed { "pass" } else { "fail" },
                    "condition_i": { "exactly_zero": ci.exactly_zero },
                    "condition_ii": { "exactly_zero": cii.exactly_zero },
                    "condition_iii": {
                        "residual": ciii.residual_norm.map(json_float).unwrap_or(Value::Null),
                        "tol": json_float(args.tol),
                        "passed": ciii.passed,
                        "partition_balls": partition.len(),
                    },
                }),
                passed,
            ))
        }
        Check::Cograph => {
            let result = verify_cograph_generators(
                &spec.system,
                cloud.expect("cograph check requested a cloud"),
                args.depth,
                args.tol,
            );
            match result {
                Ok(report) => {
                    let passed = report.all_exact
                        && report.generators_are_shifts
                        && report.stable_under_depth;
                    Ok((
                        json!({
                            "status": if passed { "exact" } else { "fail" },
                            "alphabet": report.d,
                            "generators_are_shifts": report.generators_are_shifts,
                            "stable_under_depth": report.stable_under_depth,
                            "relations": report.relations.len(),
                            "separation": json_separation(&report.separation),
                            "normalization_note": report.normalization_note,
                        }),
                        passed,
                    ))
                }
                Err(PimsnerError::NotCographSeparated { min_gap, threshold }) => Ok((
                    json!({
                        "status": "fail: NotCographSeparated",
                        "min_gap": json_float(min_gap),
                        "threshold": json_float(threshold),
                    }),
                    false,
                )),
                Err(other) => Err(Failure::check(other.to_string())),
            }
        }
        Check::Exel => {
            let gamma = spec.left_inverse.as_ref().expect("precondition checked");
            let cloud = cloud.expect("exel check requested a cloud");
            let (a, b) = probe_functions();
            let inverse = match verify_left_inverse(&spec.system, gamma, cloud, args.tol) {
                Ok(report) => report,
                Err(ExelError::NotLeftInverse { letter, point, .. }) => {
                    return Ok((
                        json!({
                            "status": "fail",
                            "left_inverse": {
                                "passed": false,
                                "failing_letter": letter,
                                "point": Value::Array(
                                    point.iter().map(|&v| json_float(v)).collect(),
                                ),
                            },
                        }),
                        false,
                    ))
                }
                Err(other) => return Err(Failure::check(other.to_string())),
            };
            let transfer = verify_transfer_identity(&a, &b, &spec.system, gamma, cloud, args.tol)
                .map_err(|e| Failure::check(e.to_string()))?;
            let toeplitz = verify_toeplitz(&a, &spec.system, gamma, args.depth)
                .map_err(|e| Failure::check(e.to_string()))?;
            let toeplitz_exact = toeplitz.iter().all(|c| c.exactly_zero);
            let passed = transfer.passed && toeplitz_exact;
            Ok((
                json!({
                    "status": if passed { "pass" } else { "fail" },
                    "left_inverse": {
                        "max_residual": json_float(inverse.max_residual),
                        "tol": json_float(inverse.tol),
                        "samples": inverse.samples,
                        "continuity_warnings": inverse.warnings.len(),
                    },
                    "transfer_identity": {
                        "max_residual": json_float(transfer.max_residual),
                        "passed": transfer.passed,
                        "samples": transfer.samples,
                    },
                    "toeplitz": {
                        "status": if toeplitz_exact { "exact" } else { "fail" },
                        "relations": toeplitz.len(),
                    },
                }),
                passed,
            ))
        }
    }
}

fn cmd_codemap(args: &CodemapArgs) -> Result<u8, Failure> {
    require_positive(args.eps, "--eps")?;
    let spec = load(&args.system)?;
    spec.system.ensure_hyperbolic().map_err(Failure::from)?;
    let d = spec.system.branch_count();
    let word = if args.word.is_empty() {
        Word::empty()
    } else {
        Word::parse(&args.word, d).map_err(|e| Failure::input(e.to_string()))?
    };

    let base = canonical_base_point(&spec.system);
    let point = code_point(&spec.system, &word, &base)
        .map_err(|e| Failure::input(e.to_string()))?;

    let data = compute_attractor(&spec, args.eps)?;
    let diam = data.cloud.diameter_estimate() + 2.0 * data.cloud.resolution;
    let bound = code_error_bound(&spec.system, word.len(), diam);

    let report = json!({
        "schema": 1,
        "system": spec.name,
        "word": word.to_string(),
        "point": json_rational_point(&point),
        "point_decimal": json_decimal_point(&point),
        "base_point": json_rational_point(&base),
        "bound": json_float(bound),
    });
    emit(&report, None)?;
    Ok(0)
}
