//! `spcp` command-line interface.
//!
//! Exit codes: 0 success, 1 internal error, 2 validation failure,
//! 3 solver did not converge, 4 inconclusive certificate.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use spcp::experiments::{lemma_suite, phase_grid, tau_sweep, ExperimentConfig, CHECK_NAMES};
use spcp::formats::{load_instance, save_certificate, save_instance, save_solution, MatrixFormat, SolutionFile};
use spcp_core::certificate::{
    build_wq, certificate_search, check_wq, CertificateOptions, Verdict, WqMethod, WqOptions,
};
use spcp_core::model::{build_instance, check_alpha_beta, InstanceParams, TauMode, DEFAULT_ALPHA, DEFAULT_BETA};
use spcp_core::solver::{dual_objective, primal_objective, recovery_error, solve, SolverOptions};

const EXIT_INTERNAL: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_NOT_CONVERGED: u8 = 3;
const EXIT_INCONCLUSIVE: u8 = 4;

#[derive(Parser)]
#[command(
    name = "spcp",
    version,
    about = "Strongly convex principal component pursuit from reduced measurements"
)]
#[command(
    after_help = "Exit codes: 0 success, 1 internal error, 2 validation failure, 3 no convergence, 4 inconclusive certificate.\nEvery command prints its resolved configuration as one JSON line prefixed with CONFIG:"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance M = L0 + S0 with a random measurement subspace.
    Gen(GenArgs),
    /// Solve an instance by accelerated dual gradient ascent.
    Solve(SolveArgs),
    /// Search for a dual certificate of the planted pair.
    Certify(CertifyArgs),
    /// Phase-transition grid over (r, rho, p).
    Phase(ExperimentArgs),
    /// Re-solve a grid at multiples of the data-driven tau.
    #[command(
        long_about = "Re-solve every cell of the grid at tau = multiplier * tau_criterion, where \
tau_criterion = 8 sqrt(15) ||M||_F / (3 lambda).\n\nDefault multipliers: 1e-3, 1e-2, 1e-1, 1, 10. \
Set \"tau_mode\": {\"sweep\": [...]} in the config to choose others."
    )]
    TauSweep(ExperimentArgs),
    /// Monte-Carlo pass rates of the certificate and norm bounds.
    Lemmas(ExperimentArgs),
    /// Describe the file formats and the experiment config schema.
    Formats,
}

#[derive(Clone, Copy, ValueEnum)]
enum TauModeArg {
    /// 8 sqrt(15) ||M||_F / (3 lambda), needs only the data.
    Criterion,
    /// Smallest tau allowed by the ground-truth bounds.
    Oracle,
}

#[derive(Args)]
struct GenArgs {
    /// Side length.
    #[arg(long)]
    n: usize,
    /// Rank of L0 (1 <= r <= n).
    #[arg(long)]
    r: usize,
    /// Bernoulli probability of a sparse entry, in [0, 1].
    #[arg(long)]
    rho: f64,
    /// Dimension of the unobserved subspace Q-perp (p < n^2/4).
    #[arg(long)]
    p: usize,
    #[arg(long)]
    seed: u64,
    /// Magnitude of the sparse entries.
    #[arg(long, default_value_t = 1.0)]
    magnitude: f64,
    #[arg(long, value_enum, default_value = "criterion")]
    tau_mode: TauModeArg,
    /// Explicit tau; overrides --tau-mode.
    #[arg(long)]
    tau: Option<f64>,
    /// Matrix file format.
    #[arg(long, value_enum, default_value = "binary")]
    format: MatrixFormat,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    /// Instance manifest or the directory holding it.
    #[arg(long)]
    instance: PathBuf,
    /// Feasibility and fixed-point tolerance.
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
    #[arg(long, default_value_t = 50_000)]
    max_iters: usize,
    /// Step on the scaled multiplier, in (0, 1/2].
    #[arg(long, default_value_t = 0.5)]
    step: f64,
    /// Plain gradient ascent without momentum.
    #[arg(long)]
    no_accel: bool,
    /// Write trace.csv (iter, feas, fixL, fixS, dual).
    #[arg(long)]
    trace: bool,
    /// Matrix file format of the outputs (default: the instance's).
    #[arg(long, value_enum)]
    format: Option<MatrixFormat>,
    /// Output directory for solution.json and the matrices.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CertifyArgs {
    /// Instance manifest or directory; must include L0 and S0.
    #[arg(long)]
    instance: PathBuf,
    /// Bound on ||P_Omega D||_F; need alpha > 1/4.
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    /// Bound on ||W|| and ||F||_inf; need beta > 1/2 and alpha + beta <= 1.
    #[arg(long, default_value_t = DEFAULT_BETA)]
    beta: f64,
    #[arg(long, value_enum)]
    format: Option<MatrixFormat>,
    /// Output directory for certificate.json and the candidate matrices.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// JSON config (see `spcp formats`).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's output_dir.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Overrides the config's worker count.
    #[arg(long)]
    threads: Option<usize>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn validation(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_VALIDATION,
            message: message.into(),
        }
    }
}

impl From<spcp::Error> for Failure {
    fn from(e: spcp::Error) -> Self {
        use spcp_core::Error as Core;
        let code = match &e {
            spcp::Error::Core(Core::NotConverged { .. }) => EXIT_NOT_CONVERGED,
            spcp::Error::Core(
                Core::PowerIteration { .. } | Core::ConstructionFailed { .. } | Core::DualOutsideQ { .. },
            ) => EXIT_INTERNAL,
            spcp::Error::Core(_) | spcp::Error::Config(_) | spcp::Error::Format { .. } => EXIT_VALIDATION,
            spcp::Error::Io { .. } => EXIT_INTERNAL,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<spcp_core::Error> for Failure {
    fn from(e: spcp_core::Error) -> Self {
        spcp::Error::from(e).into()
    }
}

type Outcome = Result<u8, Failure>;

fn echo(config: serde_json::Value) {
    println!("CONFIG:{config}");
}

fn gen(args: GenArgs) -> Outcome {
    let mode = match (args.tau, args.tau_mode) {
        (Some(t), _) => TauMode::Explicit(t),
        (None, TauModeArg::Criterion) => TauMode::Criterion,
        (None, TauModeArg::Oracle) => TauMode::Oracle,
    };
    let params = InstanceParams {
        magnitude: args.magnitude,
        ..InstanceParams::new(args.n, args.r, args.rho, args.p, args.seed)
    }
    .tau_mode(mode);
    let inst = build_instance(&params)?;
    echo(json!({
        "command": "gen",
        "n": args.n, "r": args.r, "rho": args.rho, "p": args.p, "seed": args.seed,
        "magnitude": args.magnitude, "tau_mode": mode, "lambda": inst.lambda, "tau": inst.tau,
        "format": args.format, "out": args.out,
    }));
    let manifest = save_instance(&args.out, &inst, &params, args.format)?;
    println!("wrote {}", manifest.display());
    Ok(0)
}

fn solve_cmd(args: SolveArgs) -> Outcome {
    let (manifest, inst) = load_instance(&args.instance).map_err(|e| Failure::validation(e.to_string()))?;
    let opts = SolverOptions {
        step: args.step,
        accelerate: !args.no_accel,
        max_iters: args.max_iters,
        tol_feas: args.tol,
        tol_fix: args.tol,
        trace: args.trace,
    };
    opts.validate()?;
    let format = args.format.unwrap_or(manifest.format);
    echo(json!({
        "command": "solve", "instance": args.instance, "n": inst.n, "p": inst.q.dim_perp(),
        "lambda": inst.lambda, "tau": inst.tau, "solver": opts, "format": format, "out": args.out,
    }));
    let sol = solve(&inst, &opts)?;
    let recovery = match &inst.truth {
        Some(t) => Some(recovery_error(&sol, t)?),
        None => None,
    };
    println!(
        "converged={} iters={} feas={:e} fix={:e}",
        sol.converged, sol.iters, sol.feas_residual, sol.fix_residual
    );
    if let Some(e) = &recovery {
        println!("errL={:e} errS={:e} support_f1={}", e.err_l, e.err_s, e.support_f1);
    }
    if let Some(out) = &args.out {
        let objectives = (primal_objective(&sol.l, &sol.s, &inst)?, dual_objective(&sol.y, &inst)?);
        let file = SolutionFile::new(&sol, opts, inst.lambda, inst.tau, objectives, recovery, format);
        let path = save_solution(out, &file, &sol)?;
        println!("wrote {}", path.display());
    }
    Ok(if sol.converged { 0 } else { EXIT_NOT_CONVERGED })
}

fn certify(args: CertifyArgs) -> Outcome {
    check_alpha_beta(args.alpha, args.beta)?;
    let (manifest, inst) = load_instance(&args.instance).map_err(|e| Failure::validation(e.to_string()))?;
    let truth = inst.truth()?;
    let format = args.format.unwrap_or(manifest.format);
    echo(json!({
        "command": "certify", "instance": args.instance, "n": inst.n, "p": inst.q.dim_perp(),
        "lambda": inst.lambda, "tau": inst.tau, "alpha": args.alpha, "beta": args.beta,
        "format": format, "out": args.out,
    }));
    let (candidate, report) = certificate_search(
        truth,
        &inst.q,
        inst.tau,
        inst.lambda,
        args.alpha,
        args.beta,
        &CertificateOptions::default(),
    )?;
    let wq = build_wq(
        truth,
        &inst.m,
        inst.tau,
        &inst.q,
        WqMethod::LeastSquares,
        &WqOptions::default(),
    )
    .and_then(|w| check_wq(&w.w, &truth.support, inst.lambda))
    .map_err(|e| e.to_string());
    println!("verdict={}", report.verdict.as_str());
    if !report.failed.is_empty() {
        println!("failed: {}", report.failed.join(", "));
    }
    if let Some(out) = &args.out {
        let (path, _) = save_certificate(out, &candidate, &report, wq, format)?;
        println!("wrote {}", path.display());
    }
    Ok(match report.verdict {
        Verdict::Certified => 0,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
        Verdict::PreconditionFailed => EXIT_VALIDATION,
    })
}

fn load_config(args: &ExperimentArgs, command: &str) -> Result<ExperimentConfig, Failure> {
    let mut cfg = ExperimentConfig::load(&args.config).map_err(|e| Failure::validation(e.to_string()))?;
    if let Some(dir) = &args.out_dir {
        cfg.output_dir = dir.clone();
    }
    if let Some(t) = args.threads {
        cfg.threads = t;
    }
    cfg.validate()?;
    let mut value = serde_json::to_value(&cfg).map_err(|e| Failure {
        code: EXIT_INTERNAL,
        message: e.to_string(),
    })?;
    value["command"] = json!(command);
    if command == "tau-sweep" {
        value["multipliers"] = json!(cfg.sweep_multipliers());
    }
    echo(value);
    Ok(cfg)
}

fn phase(args: ExperimentArgs) -> Outcome {
    let cfg = load_config(&args, "phase")?;
    let out = phase_grid(&cfg)?;
    for c in &out.cells {
        println!(
            "cell {} r={} rho={} p={}: success {}/{}{}",
            c.cell,
            c.r,
            c.rho,
            c.p,
            c.successes,
            c.trials,
            if c.invalid == c.trials { " (invalid)" } else { "" }
        );
    }
    for f in &out.files {
        println!("wrote {}", f.display());
    }
    Ok(0)
}

fn sweep(args: ExperimentArgs) -> Outcome {
    let cfg = load_config(&args, "tau-sweep")?;
    let out = tau_sweep(&cfg)?;
    let show = |x: Option<f64>| x.map_or("n/a".to_string(), |v| format!("{v:e}"));
    for row in &out.rows {
        println!(
            "cell {} multiplier {}: median errL {} median errS {}",
            row.cell,
            row.multiplier.unwrap_or(f64::NAN),
            show(row.median_err_l),
            show(row.median_err_s)
        );
    }
    for f in &out.files {
        println!("wrote {}", f.display());
    }
    Ok(0)
}

fn lemmas(args: ExperimentArgs) -> Outcome {
    let cfg = load_config(&args, "lemmas")?;
    let report = lemma_suite(&cfg)?;
    for cell in &report.cells {
        println!("cell {} r={} rho={} p={}:", cell.cell, cell.r, cell.rho, cell.p);
        for c in &cell.checks {
            println!("  {:<20} pass {}/{}", c.name, c.passed, c.evaluated);
        }
    }
    println!("wrote {}", cfg.output_dir.join("lemmas.json").display());
    Ok(0)
}

fn formats() -> Outcome {
    echo(json!({ "command": "formats" }));
    print!("{}", FORMATS_DOC.replace("{checks}", &CHECK_NAMES.join(", ")));
    Ok(0)
}

const FORMATS_DOC: &str = r#"MATRIX FILES
  csv     one line per row, comma separated, 17 significant digits ({:.16e}).
  binary  bytes "SCPCP1", rows (u64 LE), cols (u64 LE), rows*cols f64 LE in
          column-major order. Round-trips bit-exactly.

INSTANCE (gen --out DIR)
  DIR/manifest.json
    {"n", "r", "rho", "p", "magnitude", "lambda", "tau",
     "tau_mode": "criterion" | "oracle" | {"explicit": tau},
     "seed", "format": "csv" | "binary",
     "paths": {"m", "l0", "s0", "q_perp"}}
  q_perp is an n^2 x p orthonormal basis of Q-perp (columns are column-major
  vectorized matrices); it is omitted when p = 0. l0 and s0 are optional.
  Paths are relative to the manifest.

SOLUTION (solve --out DIR)
  DIR/solution.json  converged, iters, residuals, objectives, options,
                     recovery {err_l, err_s, support_f1} when L0, S0 are known,
                     paths {l, s, y, trace}
  DIR/trace.csv      iter,feas,fixL,fixS,dual (with --trace)
  y is the scaled multiplier tau * Y.

CERTIFICATE (certify --out DIR)
  DIR/certificate.json  verdict (certified | inconclusive | precondition_failed),
                        report (residuals, norm_w, inf_f, frob_pd,
                        transversality, failed), wq bounds, paths to W, F, D.

EXPERIMENT CONFIG (phase, tau-sweep, lemmas --config FILE)
  {"n": 60,                                   side length
   "grid": {"r": [1, 2], "rho": [0.05], "p": [0, 60]},
   "trials_per_cell": 10,                     default 1
   "tau_mode": "criterion",                   "criterion" | "oracle" |
                                              {"sweep": [1e-3, 1e-2, 1e-1, 1, 10]}
   "success_threshold": 1e-3,                 default 1e-3
   "base_seed": 0,                            default 0
   "output_dir": "out",                       default "out"
   "threads": 4,                              default 1
   "magnitude": 1.0,                          default 1.0
   "solver": {"tol": 1e-7, "max_iters": 50000}}
  Unknown keys are rejected. Trial seeds are derived from
  (base_seed, cell index, trial index).

EXPERIMENT OUTPUTS
  records.csv   cell,trial,n,r,rho,p,multiplier,seed,status,lambda,tau,mu,
                err_l,err_s,support_f1,iters,converged,success,message,wall_time
                status is ok | invalid | error; rows are ordered by
                (cell, multiplier, trial). Only wall_time varies between runs.
  summary.csv   per cell (and multiplier): counts, success_rate, medians.
  summary.json  resolved config, per-cell summaries, per-axis trends.
  heatmap_*.svg success rate for each pair of grid axes (phase).
  sweep.svg     median errors against the tau multiplier (tau-sweep).
  lemmas.json   per cell and check: evaluated, passed, errors, pass_rate,
                worst_margin (lemmas). Checks: {checks}.
"#;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => gen(a),
        Command::Solve(a) => solve_cmd(a),
        Command::Certify(a) => certify(a),
        Command::Phase(a) => phase(a),
        Command::TauSweep(a) => sweep(a),
        Command::Lemmas(a) => lemmas(a),
        Command::Formats => formats(),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
