//! Argument parsing and subcommand dispatch.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use kkmkit_core::alternatives::{
    infsup_alternative, saddle_point, solve_matrix_game, supinf_infsup_gap, two_function_alternative, AlternativeError,
    BifunctionInstance, GridSchedule,
};
use kkmkit_core::fixed_points::{affine_fixed_point, common_fixed_point, AffineFamily, FixedPointError};
use kkmkit_core::intersection::{check_ghouila_houri, KleeStatus};
use kkmkit_core::kkm::{kkm_intersection, verify_kkm, FiniteKkmMap};
use kkmkit_core::separation::{certify_point, certify_sets, separate_point, separate_sets, SeparationError};
use kkmkit_core::vi::{
    coercivity_bound, mazur_schauder_minimize, stampacchia_solve, BilinearForm, LinearFunctional, ViError,
};
use serde_json::{json, Value};

use crate::config::{Overrides, RunConfig, TOL_ENV};
use crate::input::{self, AlternativeKind, InputError};
use crate::report::{exit, InputDigest, Report, Status};
use crate::suites;

#[derive(Debug, Parser)]
#[command(
    name = "kkmkit",
    version,
    about = "Certified convex-analysis computations over polytopes"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Seed for every randomized step.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Numerical tolerance (default 1e-9, or $KKMKIT_TOL).
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Grid resolution in (0, 1] for grid-certified claims (default 1/16).
    #[arg(long, global = true)]
    resolution: Option<f64>,
    /// JSON config file; explicit flags take precedence over it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Report destination; `-` or absent means standard output.
    #[arg(long, short, global = true)]
    output: Option<String>,
    /// Record wall-clock time in the report (makes reports non-reproducible).
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Strictly separate a point, or a second polytope, from a polytope.
    Separate {
        /// The polytope C.
        #[arg(long)]
        set: PathBuf,
        /// Point to separate from C.
        #[arg(long, conflicts_with = "other", required_unless_present = "other")]
        point: Option<PathBuf>,
        /// Polytope K to separate from C.
        #[arg(long)]
        other: Option<PathBuf>,
    },
    /// Check the intersection hypotheses on a family of polytopes.
    KleeCheck {
        #[arg(long)]
        family: PathBuf,
    },
    /// Certify a finite KKM map and intersect its values.
    KkmVerify {
        #[arg(long)]
        map: PathBuf,
    },
    /// Decide a nonlinear alternative for built-in bifunctions.
    Alternative {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Solve a zero-sum matrix game.
    Minimax {
        #[arg(long)]
        game: PathBuf,
    },
    /// Solve a coercive variational inequality over a polytope.
    ViSolve {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Minimize a built-in quasiconvex objective.
    Minimize {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Common fixed point of commuting affine self-maps.
    FixedPoint {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Run randomized verification suites.
    VerifySuite {
        /// Suite name, or `all`.
        #[arg(long, default_value = "all")]
        suite: String,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Separate { .. } => "separate",
            Command::KleeCheck { .. } => "klee-check",
            Command::KkmVerify { .. } => "kkm-verify",
            Command::Alternative { .. } => "alternative",
            Command::Minimax { .. } => "minimax",
            Command::ViSolve { .. } => "vi-solve",
            Command::Minimize { .. } => "minimize",
            Command::FixedPoint { .. } => "fixed-point",
            Command::VerifySuite { .. } => "verify-suite",
        }
    }
}

/// Why a command stopped without an outcome.
#[derive(Debug)]
enum Failure {
    Input(InputError),
    Io(String),
    Tool(String),
}

impl Failure {
    fn exit_code(&self) -> i32 {
        match self {
            Failure::Input(InputError::Malformed { .. }) => exit::MALFORMED,
            Failure::Input(InputError::DimensionMismatch(_)) => exit::DIMENSION,
            Failure::Input(InputError::Invalid(_)) | Failure::Io(_) | Failure::Tool(_) => exit::ERROR,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Input(e) => e.to_string(),
            Failure::Io(m) | Failure::Tool(m) => m.clone(),
        }
    }
}

impl From<InputError> for Failure {
    fn from(e: InputError) -> Self {
        Failure::Input(e)
    }
}

fn tool<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Tool(e.to_string())
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("outcomes serialize")
}

struct Session {
    cfg: RunConfig,
    inputs: Vec<InputDigest>,
}

impl Session {
    fn read(&mut self, role: &str, path: &Path) -> Result<Vec<u8>, Failure> {
        let bytes =
            std::fs::read(path).map_err(|e| Failure::Io(format!("cannot read {role} file {}: {e}", path.display())))?;
        self.inputs.push(InputDigest::of(role, &bytes));
        Ok(bytes)
    }

    fn sched(&self) -> GridSchedule {
        GridSchedule {
            seed: self.cfg.seed,
            ..GridSchedule::from_resolution(self.cfg.resolution)
        }
    }
}

type Outcome = Result<(Status, Value), Failure>;

/// Parses `args` (including the program name) and runs the command. The
/// report is returned rather than written.
pub fn dispatch<I, T>(args: I) -> Result<Report, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args)?;
    Ok(execute(&cli, std::env::var(TOL_ENV).ok().as_deref()))
}

pub fn execute(cli: &Cli, env_tol: Option<&str>) -> Report {
    let start = Instant::now();
    let mut session = Session {
        // Keep the requested destination even if the config fails to load.
        cfg: RunConfig {
            output_path: cli.output.clone(),
            ..RunConfig::default()
        },
        inputs: Vec::new(),
    };
    let result = configure(cli, env_tol, &mut session).and_then(|()| run_command(&cli.command, &mut session));
    let (status, exit_code, outcome, error) = match result {
        Ok((status, outcome)) => {
            let code = match status {
                Status::Certified => exit::OK,
                Status::Negative => exit::NEGATIVE,
                Status::Inconclusive | Status::Error => exit::ERROR,
            };
            (status, code, outcome, None)
        }
        Err(f) => (Status::Error, f.exit_code(), Value::Null, Some(f.message())),
    };
    Report {
        command: cli.command.name().to_string(),
        version: env!("CARGO_PKG_VERSION"),
        inputs: session.inputs,
        config: session.cfg,
        status,
        exit_code,
        outcome,
        error,
        elapsed_seconds: cli.timing.then(|| start.elapsed().as_secs_f64()),
    }
}

fn configure(cli: &Cli, env_tol: Option<&str>, session: &mut Session) -> Result<(), Failure> {
    let file = match &cli.config {
        Some(path) => Some(input::parse_config(&session.read("config", path)?)?),
        None => None,
    };
    let flags = Overrides {
        seed: cli.seed,
        tol: cli.tol,
        resolution: cli.resolution,
        output_path: cli.output.clone(),
    };
    session.cfg = RunConfig::resolve(&flags, file.as_ref(), env_tol)?;
    Ok(())
}

/// Runs the CLI and writes the report; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let report = match dispatch(args) {
        Ok(r) => r,
        Err(e) => {
            let code = if e.use_stderr() { exit::MALFORMED } else { exit::OK };
            let _ = e.print();
            return code;
        }
    };
    let bytes = report.to_bytes();
    let written = match report.config.output_path.as_deref() {
        None | Some("-") => std::io::stdout().lock().write_all(&bytes),
        Some(path) => std::fs::write(path, &bytes),
    };
    if let Err(e) = written {
        eprintln!("kkmkit: cannot write report: {e}");
        return exit::ERROR;
    }
    if let Some(msg) = &report.error {
        eprintln!("kkmkit: {msg}");
    }
    report.exit_code
}

fn run_command(cmd: &Command, session: &mut Session) -> Outcome {
    match cmd {
        Command::Separate { set, point, other } => separate(session, set, point.as_deref(), other.as_deref()),
        Command::KleeCheck { family } => klee_check(session, family),
        Command::KkmVerify { map } => kkm_verify(session, map),
        Command::Alternative { instance } => alternative(session, instance),
        Command::Minimax { game } => minimax(session, game),
        Command::ViSolve { instance } => vi_solve(session, instance),
        Command::Minimize { instance } => minimize(session, instance),
        Command::FixedPoint { instance } => fixed_point(session, instance),
        Command::VerifySuite { suite } => verify_suite(session, suite),
    }
}

fn separate(session: &mut Session, set: &Path, point: Option<&Path>, other: Option<&Path>) -> Outcome {
    let c = input::parse_polytope(&session.read("set", set)?)?;
    let tol = session.cfg.tol;
    if let Some(path) = point {
        let x = input::parse_point(&session.read("point", path)?)?;
        if x.dim() != c.dim() {
            return Err(InputError::DimensionMismatch(format!(
                "point has {} coordinates, set has {}",
                x.dim(),
                c.dim()
            ))
            .into());
        }
        return match separate_point(&c, &x, tol) {
            Ok(r) => {
                let cert = certify_point(&r, &c, &x);
                Ok((
                    Status::Certified,
                    json!({"normal": r.normal(), "separation": r, "certificate": cert}),
                ))
            }
            Err(SeparationError::PointInsideSet { point }) => {
                Ok((Status::Negative, json!({"point_inside_set": point})))
            }
            Err(e) => Err(tool(e)),
        };
    }
    let k = input::parse_polytope(&session.read("other", other.expect("clap requires one of point/other"))?)?;
    if k.dim() != c.dim() {
        return Err(
            InputError::DimensionMismatch(format!("polytopes live in dimensions {} and {}", k.dim(), c.dim())).into(),
        );
    }
    match separate_sets(&k, &c, tol) {
        Ok(r) => {
            let cert = certify_sets(&r, &k, &c);
            Ok((
                Status::Certified,
                json!({"normal": r.normal(), "separation": r, "certificate": cert}),
            ))
        }
        Err(SeparationError::SetsIntersect { witness }) => Ok((Status::Negative, json!({"common_point": witness}))),
        Err(e) => Err(tool(e)),
    }
}

fn klee_check(session: &mut Session, path: &Path) -> Outcome {
    let family = input::parse_family(&session.read("family", path)?)?;
    let cfg = &session.cfg;
    let report = check_ghouila_houri(&family, cfg.resolution, cfg.tol, cfg.seed).map_err(tool)?;
    let status = match report.status {
        KleeStatus::CommonPoint => Status::Certified,
        KleeStatus::SubfamilyHypothesisFails | KleeStatus::ConvexityCounterWitness => Status::Negative,
        KleeStatus::ResolutionInsufficient => Status::Inconclusive,
    };
    Ok((status, to_value(&report)))
}

fn kkm_verify(session: &mut Session, path: &Path) -> Outcome {
    let inst = input::parse_kkm(&session.read("map", path)?)?;
    let cfg = &session.cfg;
    let resolution = inst.resolution.unwrap_or(cfg.resolution);
    let map = FiniteKkmMap::new(inst.domain_points, inst.values, inst.ambient, cfg.tol).map_err(tool)?;
    let cert = verify_kkm(&map, resolution, cfg.tol).map_err(tool)?;
    if !cert.certified {
        return Ok((Status::Negative, json!({"certificate": cert})));
    }
    let hit = kkm_intersection(&map, cfg.tol).map_err(tool)?;
    Ok((Status::Certified, json!({"certificate": cert, "intersection": hit})))
}

/// Hypothesis violations come with a witness and count as negative outcomes.
fn alternative_failure(e: AlternativeError) -> Outcome {
    match e {
        AlternativeError::StructureViolation { .. }
        | AlternativeError::PrecondViolated { .. }
        | AlternativeError::NotSubset { .. }
        | AlternativeError::TheoremViolation { .. } => {
            Ok((Status::Negative, json!({"hypothesis_violation": e.to_string()})))
        }
        AlternativeError::ResolutionInsufficient { k, best, lambda } => Ok((
            Status::Inconclusive,
            json!({"resolution_insufficient": {"k": k, "best": best, "lambda": lambda}}),
        )),
        e => Err(tool(e)),
    }
}

fn alternative(session: &mut Session, path: &Path) -> Outcome {
    let inst = input::parse_alternative(&session.read("instance", path)?)?;
    let mut sched = session.sched();
    if let Some(r) = inst.resolution {
        sched.k = GridSchedule::from_resolution(r).k;
    }
    let tol = session.cfg.tol;
    let f = inst.f.instance(inst.x.clone(), inst.y.clone());
    let g = inst.g.as_ref().map(|g| g.instance(inst.x.clone(), inst.y.clone()));
    let need_g = || {
        g.as_ref()
            .ok_or_else(|| Failure::Input(InputError::Invalid("this kind needs g".into())))
    };
    let result = match inst.kind {
        AlternativeKind::Infsup => {
            infsup_alternative(&f, inst.lambda.expect("validated"), &sched, tol).map(|o| to_value(&o))
        }
        AlternativeKind::TwoFunction => {
            two_function_alternative(&f, need_g()?, inst.lambda.expect("validated"), &sched, tol).map(|o| to_value(&o))
        }
        AlternativeKind::Gap => supinf_infsup_gap(&f, need_g()?, &sched, tol).map(|o| to_value(&o)),
    };
    match result {
        Ok(v) => Ok((Status::Certified, json!({"schedule": sched, "result": v}))),
        Err(e) => alternative_failure(e),
    }
}

fn minimax(session: &mut Session, path: &Path) -> Outcome {
    let game = input::parse_game(&session.read("game", path)?)?;
    let inst = BifunctionInstance::matrix_game(game.matrix.clone()).map_err(tool)?;
    let sp = match saddle_point(&inst, &session.sched(), session.cfg.tol) {
        Ok(sp) => sp,
        Err(e) => return alternative_failure(e),
    };
    let strategies = solve_matrix_game(&game.matrix).map_err(tool)?;
    Ok((Status::Certified, json!({"saddle_point": sp, "game": strategies})))
}

fn vi_failure(e: ViError) -> Outcome {
    match e {
        ViError::QuasiconvexityViolated { .. } => {
            Ok((Status::Negative, json!({"hypothesis_violation": e.to_string()})))
        }
        e => Err(tool(e)),
    }
}

fn vi_solve(session: &mut Session, path: &Path) -> Outcome {
    let inst = input::parse_vi(&session.read("instance", path)?)?;
    let tol = inst.tol.unwrap_or(session.cfg.tol);
    let a = BilinearForm::from_matrix(inst.a).map_err(tool)?;
    let ell = LinearFunctional::new(inst.ell);
    let sol = match stampacchia_solve(&a, &ell, &inst.x, tol) {
        Ok(s) => s,
        Err(e) => return vi_failure(e),
    };
    let y0 = inst.x.barycenter();
    let bound = coercivity_bound(a.continuity_c(), a.coercivity_alpha(), ell.norm(), y0.norm()).map_err(tool)?;
    let status = if sol.residual <= tol {
        Status::Certified
    } else {
        Status::Inconclusive
    };
    Ok((
        status,
        json!({
            "solution": sol,
            "tol": tol,
            "continuity_c": a.continuity_c(),
            "coercivity_alpha": a.coercivity_alpha(),
            "a_priori_bound": {"y0": y0, "bound": bound},
        }),
    ))
}

fn minimize(session: &mut Session, path: &Path) -> Outcome {
    let inst = input::parse_minimize(&session.read("instance", path)?)?;
    let domain = inst.objective.domain(&inst.domain);
    let phi = inst.objective.evaluator();
    match mazur_schauder_minimize(|x| phi(x), &domain, session.cfg.tol, session.cfg.seed) {
        Ok(m) => Ok((Status::Certified, json!({"objective": inst.objective, "minimum": m}))),
        Err(e) => vi_failure(e),
    }
}

fn fixed_point(session: &mut Session, path: &Path) -> Outcome {
    let inst = input::parse_fixed_point(&session.read("instance", path)?)?;
    let tol = session.cfg.tol;
    let result = if inst.maps.len() == 1 {
        affine_fixed_point(&inst.maps[0], &inst.x, tol)
    } else {
        AffineFamily::new(inst.maps, inst.x, tol).and_then(|fam| common_fixed_point(&fam, tol))
    };
    match result {
        Ok(fp) => Ok((
            Status::Certified,
            json!({"fixed_point": fp, "max_residual": fp.max_residual()}),
        )),
        Err(e @ (FixedPointError::NotSelfMap { .. } | FixedPointError::CommutativityViolated { .. })) => {
            Ok((Status::Negative, json!({"hypothesis_violation": e.to_string()})))
        }
        Err(e) => Err(tool(e)),
    }
}

fn verify_suite(session: &mut Session, name: &str) -> Outcome {
    let outcomes = if name == "all" {
        suites::run_all(&session.cfg)
    } else {
        let spec = suites::find_suite(name).ok_or_else(|| {
            let known: Vec<_> = suites::suite_names().collect();
            Failure::Input(InputError::Invalid(format!(
                "unknown suite {name:?}; known: all, {}",
                known.join(", ")
            )))
        })?;
        vec![suites::run_suite(spec, &session.cfg)]
    };
    let status = if outcomes.iter().all(|o| o.passed) {
        Status::Certified
    } else {
        Status::Error
    };
    Ok((status, json!({"suites": outcomes})))
}
