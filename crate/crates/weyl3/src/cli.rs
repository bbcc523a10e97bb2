//! Command-line front end.
//!
//! Subcommands: `check` (build a family and verify it), `classify` (holonomy
//! subalgebra of a family or an explicit coframe), `dkp` (Einstein-Weyl vs
//! dKP equivalence for a given K), `suite` (the full battery).
//!
//! Exit codes: 0 all checks pass, 1 a check failed, 2 parse or guard errors.

use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::dkp;
use crate::families::{build, FamilyFields, FamilySpec, FamilyTag, MetricSign};
use crate::fields::ScalarField;
use crate::holonomy::{classify, ClassifyOptions, SubalgebraId};
use crate::report::{CheckResult, Meta, Report};
use crate::sample::{points_in_box, rng};
use crate::suite::{self, Tolerances};
use crate::weyl::{DomainBox, FrameMetric, WeylStructure};

#[derive(Parser)]
#[command(
    name = "weyl3",
    version,
    about = "Verification toolkit for three-dimensional Weyl structures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a canonical family and verify its advertised properties.
    Check(CheckArgs),
    /// Classify the holonomy subalgebra of a structure.
    Classify(ClassifyArgs),
    /// Check the Einstein-Weyl / dKP equivalence for a coefficient K.
    Dkp(DkpArgs),
    /// Run the full verification battery.
    Suite(SuiteArgs),
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Number of sample points.
    #[arg(long, default_value_t = 200)]
    points: usize,
    /// Seed of the sampling stream.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Sampling box as xmin,xmax,ymin,ymax,zmin,zmax.
    #[arg(long, value_name = "BOUNDS", allow_hyphen_values = true)]
    r#box: Option<String>,
    /// Base tolerance; the per-check thresholds keep their ratios to it.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Jet order carried through the computation.
    #[arg(long, default_value_t = 3)]
    order: usize,
    /// Write the JSON report to this path.
    #[arg(long, value_name = "PATH")]
    json: Option<String>,
}

#[derive(Args)]
struct FamilyArgs {
    /// Family name: A, B0, Bm2, Bq, C, D, E or A-EW.
    #[arg(long)]
    family: String,
    /// Parameter q (family Bq).
    #[arg(long, allow_hyphen_values = true)]
    q: Option<f64>,
    /// Sign choice: for E the sign of dz^2, for A-EW the sign of 2dxdy.
    #[arg(long, value_name = "+|-")]
    sign: Option<String>,
    /// Coefficient H(x,y,z).
    #[arg(long = "H", value_name = "EXPR", allow_hyphen_values = true)]
    h: Option<String>,
    /// Coefficient K(x,y,z).
    #[arg(long = "K", value_name = "EXPR", allow_hyphen_values = true)]
    k: Option<String>,
    /// Coefficient L(x,y,z).
    #[arg(long = "L", value_name = "EXPR", allow_hyphen_values = true)]
    l: Option<String>,
    /// Coefficient F(x,z) of the reduced family.
    #[arg(long = "F", value_name = "EXPR", allow_hyphen_values = true)]
    f_upper: Option<String>,
    /// Coefficient G(x,y,z) of the reduced family.
    #[arg(long = "G", value_name = "EXPR", allow_hyphen_values = true)]
    g_upper: Option<String>,
    /// Coefficient f(x) of the reduced family.
    #[arg(long = "f", value_name = "EXPR", allow_hyphen_values = true)]
    f_lower: Option<String>,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    family: FamilyArgs,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Family name; omit when passing an explicit coframe.
    #[arg(long)]
    family: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    q: Option<f64>,
    #[arg(long, value_name = "+|-")]
    sign: Option<String>,
    #[arg(long = "H", value_name = "EXPR", allow_hyphen_values = true)]
    h: Option<String>,
    #[arg(long = "K", value_name = "EXPR", allow_hyphen_values = true)]
    k: Option<String>,
    #[arg(long = "L", value_name = "EXPR", allow_hyphen_values = true)]
    l: Option<String>,
    #[arg(long = "F", value_name = "EXPR", allow_hyphen_values = true)]
    f_upper: Option<String>,
    #[arg(long = "G", value_name = "EXPR", allow_hyphen_values = true)]
    g_upper: Option<String>,
    #[arg(long = "f", value_name = "EXPR", allow_hyphen_values = true)]
    f_lower: Option<String>,
    /// Explicit coframe row theta^1 as "ex,ey,ez".
    #[arg(long, value_name = "EX,EY,EZ", allow_hyphen_values = true)]
    theta1: Option<String>,
    /// Explicit coframe row theta^2.
    #[arg(long, value_name = "EX,EY,EZ", allow_hyphen_values = true)]
    theta2: Option<String>,
    /// Explicit coframe row theta^3.
    #[arg(long, value_name = "EX,EY,EZ", allow_hyphen_values = true)]
    theta3: Option<String>,
    /// Potential 1-form as "ex,ey,ez".
    #[arg(long, value_name = "EX,EY,EZ", allow_hyphen_values = true)]
    nu: Option<String>,
    /// Frame metric for explicit coframes: lorentzian or euclidean.
    #[arg(long, default_value = "lorentzian")]
    metric: String,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct DkpArgs {
    /// Coefficient K(x,y,z) of the q = -1/2 structure.
    #[arg(long = "K", value_name = "EXPR", allow_hyphen_values = true)]
    k: String,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct SuiteArgs {
    #[command(flatten)]
    common: CommonArgs,
}

/// Top-level entry. Returns the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(report) => {
            if report.passed() {
                0
            } else {
                1
            }
        }
        Err(message) => {
            eprintln!("error: {message}");
            2
        }
    }
}

fn dispatch(cli: Cli) -> Result<Report, String> {
    match cli.command {
        Command::Check(args) => cmd_check(args),
        Command::Classify(args) => cmd_classify(args),
        Command::Dkp(args) => cmd_dkp(args),
        Command::Suite(args) => cmd_suite(args),
    }
}

fn parse_field(name: &str, src: &Option<String>) -> Result<Option<ScalarField>, String> {
    match src {
        None => Ok(None),
        Some(src) => ScalarField::parse(src)
            .map(Some)
            .map_err(|e| format!("in --{name} {src:?}: {e}")),
    }
}

fn parse_box(src: &Option<String>) -> Result<Option<DomainBox>, String> {
    let Some(src) = src else { return Ok(None) };
    let parts: Vec<f64> = src
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|e| format!("bad --box entry {p:?}: {e}"))
        })
        .collect::<Result<_, _>>()?;
    if parts.len() != 6 {
        return Err("--box needs six comma-separated numbers".into());
    }
    let b = DomainBox {
        min: [parts[0], parts[2], parts[4]],
        max: [parts[1], parts[3], parts[5]],
    };
    for i in 0..3 {
        if b.min[i] >= b.max[i] {
            return Err("--box bounds must satisfy min < max on each axis".into());
        }
    }
    Ok(Some(b))
}

fn family_spec(args: &FamilyArgs, domain: Option<DomainBox>) -> Result<FamilySpec, String> {
    let tag = FamilyTag::parse(&args.family).ok_or_else(|| {
        format!(
            "unknown family {:?} (expected A, B0, Bm2, Bq, C, D, E, A-EW)",
            args.family
        )
    })?;
    let mut spec = FamilySpec::new(tag);
    spec.q = args.q;
    if let Some(sign) = &args.sign {
        spec.sign = MetricSign::parse(sign).ok_or_else(|| format!("bad --sign {sign:?}"))?;
    }
    if let Some(domain) = domain {
        spec.domain = domain;
    }
    spec.fields = FamilyFields {
        h: parse_field("H", &args.h)?,
        k: parse_field("K", &args.k)?,
        l: parse_field("L", &args.l)?,
        f_upper: parse_field("F", &args.f_upper)?,
        g_upper: parse_field("G", &args.g_upper)?,
        f_lower: parse_field("f", &args.f_lower)?,
    };
    Ok(spec)
}

fn meta(command: &str, seed: u64) -> Meta {
    Meta {
        seed,
        version: env!("CARGO_PKG_VERSION").into(),
        command: command.into(),
    }
}

fn finish(mut report: Report, common: &CommonArgs, started: Instant) -> Result<Report, String> {
    report.wall_time_ms = started.elapsed().as_millis() as u64;
    print!("{}", report.render_table());
    if let Some(path) = &common.json {
        std::fs::write(path, report.to_json()).map_err(|e| format!("cannot write {path}: {e}"))?;
    }
    Ok(report)
}

fn cmd_check(args: CheckArgs) -> Result<Report, String> {
    let started = Instant::now();
    let tol = Tolerances::with_base(args.common.tol);
    let spec = family_spec(&args.family, parse_box(&args.common.r#box)?)?;
    let outcome = suite::check_family(
        &spec,
        args.common.points,
        args.common.seed,
        &tol,
        args.common.order,
    )?;
    let mut report = Report::new(meta(
        &format!("check --family {}", spec.tag.name()),
        args.common.seed,
    ));
    report.notes = outcome.notes;
    report.extend(outcome.checks);
    report.classification = Some(outcome.classification);
    finish(report, &args.common, started)
}

fn cmd_classify(args: ClassifyArgs) -> Result<Report, String> {
    let started = Instant::now();
    let tol = Tolerances::with_base(args.common.tol);
    let domain = parse_box(&args.common.r#box)?;
    let (structure, expected, notes, label, q_hint): (
        WeylStructure,
        Option<SubalgebraId>,
        Vec<String>,
        String,
        Option<f64>,
    ) = if let Some(family) = &args.family {
        let family_args = FamilyArgs {
            family: family.clone(),
            q: args.q,
            sign: args.sign.clone(),
            h: args.h.clone(),
            k: args.k.clone(),
            l: args.l.clone(),
            f_upper: args.f_upper.clone(),
            g_upper: args.g_upper.clone(),
            f_lower: args.f_lower.clone(),
        };
        let spec = family_spec(&family_args, domain)?;
        let instance = build(&spec).map_err(|e| e.to_string())?;
        (
            instance.structure,
            Some(spec.tag.expected_subalgebra(spec.q)),
            instance.notes,
            format!("classify --family {}", spec.tag.name()),
            spec.q,
        )
    } else {
        let coframe_row = |name: &str, src: &Option<String>| -> Result<[ScalarField; 3], String> {
            let Some(src) = src else {
                return Err(format!("explicit classification needs --{name}"));
            };
            let parts: Vec<&str> = src.split(',').collect();
            if parts.len() != 3 {
                return Err(format!("--{name} needs three comma-separated expressions"));
            }
            Ok([
                ScalarField::parse(parts[0]).map_err(|e| format!("--{name}: {e}"))?,
                ScalarField::parse(parts[1]).map_err(|e| format!("--{name}: {e}"))?,
                ScalarField::parse(parts[2]).map_err(|e| format!("--{name}: {e}"))?,
            ])
        };
        let metric = match args.metric.as_str() {
            "lorentzian" => FrameMetric::lorentzian_null(),
            "euclidean" => FrameMetric::euclidean(),
            other => return Err(format!("unknown --metric {other:?}")),
        };
        let structure = WeylStructure {
            coframe: [
                coframe_row("theta1", &args.theta1)?,
                coframe_row("theta2", &args.theta2)?,
                coframe_row("theta3", &args.theta3)?,
            ],
            metric,
            nu: coframe_row("nu", &args.nu)?,
            domain: domain.unwrap_or_else(crate::sample::default_box),
            guards: Vec::new(),
        };
        (structure, None, Vec::new(), "classify --explicit".into(), args.q)
    };

    let mut report = Report::new(meta(&label, args.common.seed));
    report.notes = notes;
    let mut r = rng(args.common.seed);
    let points = points_in_box(&structure.domain, args.common.points.clamp(1, 50), &mut r);
    let options = ClassifyOptions {
        q_hint,
        ..ClassifyOptions::default()
    };
    let holonomy =
        classify(&structure, &points, args.common.order, &options).map_err(|e| e.to_string())?;
    report.push(CheckResult::new(
        "subalgebra_membership",
        holonomy.membership_residual,
        tol.membership,
        points[0],
    ));
    if let Some(expected) = expected {
        let ok = match (expected, holonomy.classified) {
            (SubalgebraId::Bq(want), SubalgebraId::Bq(got))
            | (SubalgebraId::Dq(want), SubalgebraId::Dq(got)) => (want - got).abs() <= tol.q_fit,
            (want, got) => want == got,
        };
        report.push(CheckResult::flag(
            "classification_matches_family",
            ok,
            points[0],
        ));
    }
    println!(
        "classified: {} (algebra {}, span dim {}{})",
        holonomy.classified.tag(),
        holonomy.algebra_label,
        holonomy.span_dim,
        holonomy
            .fitted_q
            .map(|q| format!(", q = {q:.6}"))
            .unwrap_or_default()
    );
    report.classification = Some(holonomy);
    finish(report, &args.common, started)
}

fn cmd_dkp(args: DkpArgs) -> Result<Report, String> {
    let started = Instant::now();
    let tol = Tolerances::with_base(args.common.tol);
    let k = ScalarField::parse(&args.k).map_err(|e| format!("in --K: {e}"))?;
    let domain = parse_box(&args.common.r#box)?.unwrap_or_else(crate::sample::default_box);
    let mut r = rng(args.common.seed);
    let points = points_in_box(&domain, args.common.points.max(1), &mut r);
    let check = dkp::verify_equivalence(&k, &points, tol.dkp_ew).map_err(|e| e.to_string())?;

    let mut report = Report::new(meta("dkp", args.common.seed));
    report.push(CheckResult::flag(
        "dkp_einstein_weyl_no_mismatch",
        check.verdict != dkp::DkpVerdict::Mismatch,
        check.mismatch_point.unwrap_or(points[0]),
    ));
    println!(
        "verdict: {:?} (max |dKP residual| {:.3e} at {:?}, max |EW| {:.3e} at {:?})",
        check.verdict,
        check.max_residual,
        check.worst_residual_point,
        check.max_ew,
        check.worst_ew_point
    );
    report.dkp = Some(check);
    finish(report, &args.common, started)
}

fn cmd_suite(args: SuiteArgs) -> Result<Report, String> {
    let started = Instant::now();
    let tol = Tolerances::with_base(args.common.tol);
    let outcome = suite::run_all(args.common.seed, &tol, args.common.order);
    let mut report = Report::new(meta("suite", args.common.seed));
    report.notes = outcome.notes;
    report.extend(outcome.checks);
    finish(report, &args.common, started)
}
